#include "snls/control.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace snls {

namespace {

double grad_sq_integral(const ComplexField& u) {
    double s = 0.0;
    for (const ComplexField& comp : gradient(u))
        for (const cplx& v : comp.values()) s += std::norm(v);
    return s * u.grid()->cell_volume();
}

}  // namespace

double choose_lambda(const ComplexField& u0, double sigma_tilde, double t1) {
    const double m0 = mass(u0);
    if (m0 <= 0.0)
        throw std::invalid_argument("choose_lambda: initial state must be nonzero");
    if (sigma_tilde <= 2.0 / u0.grid()->dim())
        throw std::invalid_argument("choose_lambda: aux exponent must exceed 2/d");
    if (t1 <= 0.0)
        throw std::invalid_argument("choose_lambda: horizon must be positive");
    const double t = std::min(t1, 1.0);

    const double grad2 = grad_sq_integral(u0);
    const double v0 = variance(u0);
    const double g0 = momentum(u0);
    const double lpow = lp_power(u0, sigma_tilde);  // |u0|_{L^{2s~+2}}^{2s~+2}
    const double rhs = 0.5 * grad2 + (v0 + 4.0 * t * std::abs(g0)) / (8.0 * t * t);
    const double lambda_min = (2.0 * sigma_tilde + 2.0) * rhs / lpow;
    return 1.05 * lambda_min;
}

double blowup_time_bound(double v0, double g0, double h_aux) {
    if (v0 < 0.0)
        throw std::invalid_argument("blowup_time_bound: variance must be nonnegative");
    if (!(h_aux < 0.0 || (h_aux == 0.0 && g0 < 0.0)))
        throw std::invalid_argument(
            "blowup_time_bound: need negative auxiliary energy (or zero with "
            "negative momentum)");
    if (h_aux == 0.0) return -v0 / (4.0 * g0);
    // 8 H t^2 + 4 G t + V = 0; with H < 0 and V >= 0 one root is
    // nonnegative, the other nonpositive.
    const double a = 8.0 * h_aux, b = 4.0 * g0, c = v0;
    const double disc = b * b - 4.0 * a * c;
    const double sq = std::sqrt(disc);
    const double r1 = (-b + sq) / (2.0 * a);
    const double r2 = (-b - sq) / (2.0 * a);
    const double lo = std::min(r1, r2), hi = std::max(r1, r2);
    if (hi < 0.0)
        throw std::invalid_argument("blowup_time_bound: no nonnegative root");
    return (lo >= 0.0) ? lo : hi;
}

double default_m_bar(const ComplexField& u0) {
    return std::max(mass(u0) + 1.0,
                    variance(u0) + 4.0 * std::abs(momentum(u0)) + 1.0);
}

ControlResult construct_control(const ComplexField& u0, double sigma,
                                double sigma_tilde, double t1, double m_bar,
                                double h_bar, double dt) {
    if (mass(u0) <= 0.0)
        throw std::invalid_argument("construct_control: initial state must be nonzero");
    if (h_bar <= 0.0)
        throw std::invalid_argument("construct_control: Hbar must be positive");
    if (m_bar < default_m_bar(u0))
        throw std::invalid_argument(
            "construct_control: Mbar below max(M+1, V+4|G|+1)");
    if (dt <= 0.0)
        throw std::invalid_argument("construct_control: dt must be positive");
    if (sigma_tilde <= 2.0 / u0.grid()->dim() || sigma_tilde >= sigma)
        throw std::invalid_argument("construct_control: need 2/d < sigma_tilde < sigma");

    ControlResult result;
    result.sigma_tilde = sigma_tilde;
    result.m_bar = m_bar;
    result.h_bar = h_bar;
    result.dt = dt;

    // Degenerate case: u0 already qualifies.
    if (energy(u0, sigma) < -h_bar && in_admissible_set(u0, sigma, m_bar, h_bar)) {
        result.t2 = 0.0;
        result.u_t2 = u0;
        result.certificate = make_record(u0, 0.0, sigma);
        return result;
    }

    const double t1c = std::min(t1, 1.0);
    result.lambda = choose_lambda(u0, sigma_tilde, t1c);

    ModelSpec aux_spec;
    aux_spec.sigma = sigma;
    aux_spec.primary_coeff = 0.0;
    aux_spec.aux = AuxTerm{sigma_tilde, result.lambda};
    aux_spec.validate(u0.grid()->dim());

    const double h1_0 = h_norm(u0, 1.0);
    BlowupDetectorParams guard;

    std::vector<double> f_times;
    std::vector<RealField> f_fields;
    ComplexField u = u0;
    const int max_steps = static_cast<int>(std::llround(t1c / dt));
    double achieved_h = energy(u0, sigma);
    result.history.push_back({0.0, 0.0, achieved_h});

    for (int k = 0; k < max_steps; ++k) {
        const double t = k * dt;
        ComplexField v = linear_step(u, 0.5 * dt);

        // Control potential at the substep midpoint; stored before the
        // phase rotation, which does not change |v|.
        RealField f(v.grid());
        double lam_norm_sq = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double a2 = std::norm(v[i]);
            const double lam_term = result.lambda * std::pow(a2, sigma_tilde);
            f[i] = lam_term - std::pow(a2, sigma);
            lam_norm_sq += lam_term * lam_term;
        }
        lam_norm_sq *= v.grid()->cell_volume();
        f_times.push_back(t + 0.5 * dt);
        f_fields.push_back(std::move(f));

        v = local_step(v, dt, aux_spec, t + 0.5 * dt);
        u = linear_step(v, 0.5 * dt);
        const double t_now = (k + 1) * dt;

        achieved_h = energy(u, sigma);
        result.history.push_back({t_now, std::sqrt(lam_norm_sq), achieved_h});

        const double h1 = h_norm(u, 1.0);
        if (!std::isfinite(h1) || h1 >= guard.h1_growth_factor * h1_0 ||
            spectral_tail_fraction(u) >= guard.tail_threshold)
            throw std::runtime_error(
                "construct_control: resolution lost before reaching -Hbar "
                "(achieved H = " + std::to_string(achieved_h) + ")");

        if (achieved_h < -h_bar) {
            result.t2 = t_now;
            result.u_t2 = std::move(u);
            result.f = TabulatedPotential(std::move(f_times), std::move(f_fields));
            result.certificate = make_record(result.u_t2, result.t2, sigma);
            if (!in_admissible_set(result.u_t2, sigma, m_bar, h_bar))
                throw std::runtime_error(
                    "construct_control: reached -Hbar outside the admissible set");
            return result;
        }
    }
    throw std::runtime_error(
        "construct_control: -Hbar not reached within T1 at this resolution "
        "(achieved H = " + std::to_string(achieved_h) + ")");
}

Trajectory two_phase_run(const ControlResult& ctrl, const CovarianceOperator& op,
                         double sigma, double t2, double dt, RngStream& rng,
                         const BlowupDetectorParams& detector) {
    if (ctrl.u_t2.grid() != op.grid())
        throw std::invalid_argument("two_phase_run: state and operator grids differ");
    const DiagnosticsRecord& c = ctrl.certificate;
    const double criterion = blowup_functional(c.mass, c.energy, c.momentum,
                                               c.variance, op.m_phi(), t2);
    if (criterion >= 0.0)
        throw std::invalid_argument(
            "two_phase_run: blow-up criterion not met at this horizon "
            "(value = " + std::to_string(criterion) + ")");

    ModelSpec spec;
    spec.sigma = sigma;
    spec.noise = &op;

    EvolveOptions options;
    options.horizon = t2;
    options.dt = dt;
    options.sample_every = 1;
    options.detector = detector;
    return evolve(ctrl.u_t2, spec, options, rng);
}

}  // namespace snls
