// Acceptance harness: one pass/fail line per criterion, nonzero exit when
// any criterion fails.  Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "snls/control.hpp"
#include "snls/diagnostics.hpp"
#include "snls/dynamics.hpp"
#include "snls/ensemble.hpp"
#include "snls/grid.hpp"
#include "snls/noise.hpp"

using namespace snls;

namespace {

const double kSqrtPi = std::sqrt(M_PI);

struct Outcome {
    bool pass = false;
    std::string detail;
};

ComplexField gauss_state(const GridPtr& g, double amp, double width) {
    ComplexField f(g);
    for (std::size_t i = 0; i < g->size(); ++i)
        f[i] = amp * std::exp(-g->node_radius_sq(i) / (2.0 * width * width));
    return f;
}

std::string fmt(const char* pattern, ...) {
    char buf[256];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

double l2_err(const ComplexField& a, const ComplexField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s * a.grid()->cell_volume());
}

// ---------------------------------------------------------------------------
// 1. Gaussian functional values against closed forms.

Outcome criterion_gaussian_functionals() {
    auto g = Grid::make(1, 20.0, 512);
    ComplexField u = gauss_state(g, 1.0, 1.0);
    const double em = std::abs(mass(u) - kSqrtPi);
    const double ev = std::abs(variance(u) - kSqrtPi / 2.0);
    const double eg = std::abs(momentum(u));
    const double eh = std::abs(energy(u, 3.0) - 3.0 * kSqrtPi / 16.0);
    const double worst = std::max({em, ev, eg, eh});
    return {worst < 1e-8, fmt("max functional error %.2e (tol 1e-8)", worst)};
}

// ---------------------------------------------------------------------------
// 2. Pathwise mass conservation on a noisy run.

Outcome criterion_mass_conservation() {
    auto g = Grid::make(1, 20.0, 512);
    ComplexField u0 = gauss_state(g, 1.0, 1.0);
    CovarianceOperator op({KernelSpec::Shape::gaussian, 0.5, 1.0}, g);
    ModelSpec spec;
    spec.sigma = 3.0;
    spec.noise = &op;

    EvolveOptions opts;
    opts.horizon = 0.5;
    opts.dt = 1e-3;
    opts.sample_every = 10;
    RngStream rng = RngStream::derived(2025, 0);
    Trajectory traj = evolve(u0, spec, opts, rng);

    const double m0 = traj.records.front().mass;
    double drift = 0.0;
    for (const DiagnosticsRecord& r : traj.records)
        drift = std::max(drift, std::abs(r.mass - m0) / m0);
    return {traj.verdict == Verdict::none && drift < 1e-10,
            fmt("max relative drift %.2e (tol 1e-10)", drift)};
}

// ---------------------------------------------------------------------------
// 3. Pathwise variance identity and its dt-halving behavior.

Outcome criterion_variance_identity() {
    auto g = Grid::make(1, 20.0, 512);
    ComplexField u0 = gauss_state(g, 1.0, 1.0);
    CovarianceOperator op({KernelSpec::Shape::gaussian, 0.5, 1.0}, g);
    ModelSpec spec;
    spec.sigma = 3.0;
    spec.noise = &op;

    const double dt = 1e-3, horizon = 0.3;
    const int fine_steps = 2 * static_cast<int>(std::llround(horizon / dt));
    RngStream rng = RngStream::derived(33, 0);
    NoisePath fine = sample_path(op, 0.5 * dt, fine_steps, rng);
    NoisePath coarse = coarsen_path(fine);

    EvolveOptions opts;
    opts.horizon = horizon;
    opts.dt = dt;
    Trajectory traj_c = evolve(u0, spec, opts, rng, &coarse);
    EvolveOptions halved = opts;
    halved.dt = 0.5 * dt;
    Trajectory traj_f = evolve(u0, spec, halved, rng, &fine);

    if (traj_c.verdict != Verdict::none || traj_f.verdict != Verdict::none)
        return {false, "run did not stay clean to the horizon"};
    const double v0 = traj_c.records.front().variance;
    const double r_c = std::abs(check_variance_identity(traj_c));
    const double r_f = std::abs(check_variance_identity(traj_f));
    // the residual is pure discretization error, so halving dt must shrink
    // it by at least ~2x; the scheme is second order, so quartering is the
    // typical outcome and is accepted
    const double ratio = r_f / r_c;
    const bool pass = r_c < 1e-3 * v0 && ratio < 0.65;
    return {pass, fmt("residual %.3e (tol %.1e), dt/2 ratio %.3f (want < 0.65)",
                      r_c, 1e-3 * v0, ratio)};
}

// ---------------------------------------------------------------------------
// 4. Quadratic variance growth of the free flow.

Outcome criterion_linear_variance() {
    auto g = Grid::make(1, 20.0, 512);
    ComplexField u0 = gauss_state(g, 1.0, 1.0);
    ModelSpec lin;
    lin.sigma = 1.0;
    lin.primary_coeff = 0.0;

    EvolveOptions opts;
    opts.horizon = 0.5;
    opts.dt = 1e-3;
    opts.sample_every = 100;
    RngStream rng(0);
    Trajectory traj = evolve(u0, lin, opts, rng);

    double worst = 0.0;
    for (double t : {0.1, 0.2, 0.5}) {
        const double expected = kSqrtPi * (0.5 + 2.0 * t * t);
        double v = 0.0;
        for (const DiagnosticsRecord& r : traj.records)
            if (std::abs(r.t - t) < 1e-9) v = r.variance;
        worst = std::max(worst, std::abs(v - expected));
    }
    return {worst < 1e-6, fmt("max deviation %.2e (tol 1e-6)", worst)};
}

// ---------------------------------------------------------------------------
// 5 + 6. In-expectation energy and momentum identities (shared ensemble).

struct MomentEnsembles {
    EnsembleStats noisy;
    double energy_bias = 0.0;
    double momentum_bias = 0.0;
    CovarianceOperator op;
    bool ready = false;

    MomentEnsembles()
        : op({KernelSpec::Shape::gaussian, 0.5, 1.0}, Grid::make(1, 20.0, 512)) {}
};

MomentEnsembles& moment_ensembles() {
    static MomentEnsembles shared;
    if (shared.ready) return shared;

    const GridPtr& g = shared.op.grid();
    ComplexField u0 = gauss_state(g, 1.0, 1.0);
    ModelSpec spec;
    spec.sigma = 3.0;
    spec.noise = &shared.op;

    EnsembleOptions opts;
    opts.horizon = 0.3;
    opts.dt = 1e-3;
    opts.paths = 2000;
    opts.master_seed = 56;
    opts.sample_every = 10;

    // dt-bias baselines from the deterministic (a = 0) run at the same dt.
    ModelSpec det = spec;
    det.noise = nullptr;
    EnsembleOptions det_opts = opts;
    det_opts.paths = 2;
    EnsembleStats flat = run_ensemble(u0, det, det_opts);
    for (std::size_t i = 0; i < flat.times.size(); ++i)
        shared.energy_bias = std::max(
            shared.energy_bias, std::abs(flat.mean_h[i] - flat.mean_h.front()));
    IdentityCheck det_mom = check_momentum_identity(flat, spec.sigma, 0.0);
    for (double r : det_mom.residual)
        shared.momentum_bias = std::max(shared.momentum_bias, std::abs(r));
    shared.energy_bias = 2.0 * shared.energy_bias + 1e-12;
    shared.momentum_bias = 2.0 * shared.momentum_bias + 1e-12;

    shared.noisy = run_ensemble(u0, spec, opts);
    shared.ready = true;
    return shared;
}

Outcome criterion_energy_identity() {
    MomentEnsembles& m = moment_ensembles();
    IdentityCheck check = check_energy_identity(m.noisy, m.op, m.energy_bias);
    double worst = 0.0;
    for (double r : check.residual) worst = std::max(worst, std::abs(r));
    return {check.pass, fmt("max residual %.3e, allowance 3 SE + %.2e", worst,
                            m.energy_bias)};
}

Outcome criterion_momentum_identity() {
    MomentEnsembles& m = moment_ensembles();
    IdentityCheck check = check_momentum_identity(m.noisy, 3.0, m.momentum_bias);
    double worst = 0.0;
    for (double r : check.residual) worst = std::max(worst, std::abs(r));
    return {check.pass, fmt("max residual %.3e, allowance 3 SE + %.2e", worst,
                            m.momentum_bias)};
}

// ---------------------------------------------------------------------------
// 7. Deterministic blow-up before the variance-envelope bound.

Outcome criterion_deterministic_blowup() {
    auto g = Grid::make(1, 5.0, 2048);
    ComplexField u0 = gauss_state(g, 3.0, 1.0);
    ModelSpec spec;
    spec.sigma = 3.0;

    const DiagnosticsRecord r0 = make_record(u0, 0.0, spec.sigma);
    const double bound = blowup_time_bound(r0.variance, r0.momentum, r0.energy);

    EvolveOptions opts;
    opts.dt = 1e-5;
    opts.horizon = 1.5 * bound;
    RngStream rng(0);
    Trajectory traj = evolve_confirmed(u0, spec, opts, rng);

    if (traj.verdict != Verdict::detected)
        return {false, fmt("no confirmed detection (verdict %d)",
                           static_cast<int>(traj.verdict))};
    const double limit = bound + 10.0 * opts.dt;
    return {traj.tau_star <= limit,
            fmt("tau* = %.5f, bound + 10 dt = %.5f", traj.tau_star, limit)};
}

// ---------------------------------------------------------------------------
// 8. Noisy blow-up probability under the spectral criterion.

Outcome criterion_noisy_blowup() {
    auto g = Grid::make(1, 5.0, 2048);
    ComplexField u0 = gauss_state(g, 3.0, 1.0);
    CovarianceOperator op({KernelSpec::Shape::gaussian, 0.1, 1.0}, g);
    ModelSpec spec;
    spec.sigma = 3.0;
    spec.noise = &op;

    const double tbar = 0.05;
    const DiagnosticsRecord r0 = make_record(u0, 0.0, spec.sigma);
    const double criterion = blowup_functional(r0.mass, r0.energy, r0.momentum,
                                               r0.variance, op.m_phi(), tbar);
    if (criterion >= 0.0)
        return {false, fmt("criterion not negative: %.3f", criterion)};

    EnsembleOptions opts;
    opts.horizon = tbar;
    opts.dt = 2e-5;
    opts.paths = 200;
    opts.master_seed = 88;
    opts.sample_every = 10;
    EnsembleStats stats = run_ensemble(u0, spec, opts);
    Theorem41Verdict verdict = check_theorem41(stats, op, tbar);
    return {verdict.pass,
            fmt("criterion %.2f, detections %d/200, Wilson lower %.3f",
                criterion, verdict.probability.detections,
                verdict.probability.lower)};
}

// ---------------------------------------------------------------------------
// 9 + 10. Control construction and the noisy two-phase continuation.

// The crossing state has a focusing core of width ~0.016, and the
// eight-power quadrature needs roughly four times the field bandwidth to be
// alias-free, so the spacing must be ~2e-3: a small box with a fine grid.
// Coarser grids either lose resolution before the energy target or report a
// spuriously negative energy that disappears under upsampling.
struct ControlSetup {
    GridPtr grid = Grid::make(1, 5.0, 4096);
    ComplexField u0;
    ControlResult ctrl;
    double m_bar = 0.0;
    bool ready = false;
};

ControlSetup& control_setup() {
    static ControlSetup shared;
    if (shared.ready) return shared;
    shared.u0 = gauss_state(shared.grid, 1.0, 1.0);
    shared.m_bar = default_m_bar(shared.u0);
    shared.ctrl =
        construct_control(shared.u0, 3.0, 2.5, 1.0, shared.m_bar, 10.0, 1e-5);
    shared.ready = true;
    return shared;
}

Outcome criterion_control_construction() {
    ControlSetup& s = control_setup();
    const ControlResult& ctrl = s.ctrl;
    if (ctrl.t2 <= 0.0 || ctrl.t2 > 1.0)
        return {false, fmt("T2 = %.4f outside (0, 1]", ctrl.t2)};
    if (ctrl.certificate.energy >= -10.0)
        return {false, fmt("H(U(T2)) = %.3f not below -10", ctrl.certificate.energy)};
    // the certified energy must survive refinement of the quadrature grid
    const double h_refined = energy(spectral_upsample(ctrl.u_t2, 8192), 3.0);
    if (h_refined >= -10.0)
        return {false, fmt("certified energy is a quadrature artifact: "
                           "%.3f on the refined grid", h_refined)};
    if (!in_admissible_set(ctrl.u_t2, 3.0, s.m_bar, 10.0))
        return {false, "U(T2) outside the admissible set"};
    const double m_rel =
        std::abs(ctrl.certificate.mass - mass(s.u0)) / mass(s.u0);
    if (m_rel >= 1e-10)
        return {false, fmt("mass drift %.2e (tol 1e-10)", m_rel)};

    ModelSpec replay;
    replay.sigma = 3.0;
    replay.potential = &ctrl.f;
    ComplexField u = s.u0;
    const int steps = static_cast<int>(std::llround(ctrl.t2 / ctrl.dt));
    for (int k = 0; k < steps; ++k)
        u = strang_step(u, ctrl.dt, replay, k * ctrl.dt, nullptr);
    const double err = l2_err(u, ctrl.u_t2);
    return {err < 1e-6,
            fmt("T2 = %.4f, H = %.2f, replay error %.2e (tol 1e-6)", ctrl.t2,
                ctrl.certificate.energy, err)};
}

Outcome criterion_two_phase() {
    ControlSetup& s = control_setup();
    const ControlResult& ctrl = s.ctrl;
    CovarianceOperator op({KernelSpec::Shape::gaussian, 0.1, 1.0},
                          ctrl.u_t2.grid());

    const DiagnosticsRecord& c = ctrl.certificate;
    const double bound = blowup_time_bound(c.variance, c.momentum, c.energy);
    const double t2 = 1.2 * bound;
    const double dt = 2e-5;
    // the gradient norm saturates near 290 once the core reaches the grid
    // scale, so the growth threshold must sit below that ceiling
    BlowupDetectorParams detector;
    detector.h1_growth_factor = 5.0;

    EnsembleStats stats;
    stats.paths = 100;
    stats.horizon = t2;
    for (int path = 0; path < 100; ++path) {
        RngStream rng = RngStream::derived(99, path);
        Trajectory traj = two_phase_run(ctrl, op, 3.0, t2, dt, rng, detector);
        stats.verdicts.push_back(traj.verdict);
        stats.tau_stars.push_back(
            traj.verdict == Verdict::detected ? traj.tau_star : 0.0);
    }
    ProbabilityEstimate est = estimate_blowup_probability(stats, t2);
    return {est.detections > 0 && est.lower > 0.0,
            fmt("t2 = %.3f, detections %d/100, Wilson lower %.3f", t2,
                est.detections, est.lower)};
}

// ---------------------------------------------------------------------------
// 11. Stratonovich splitting vs Ito Euler-Maruyama, first moment of H.

Outcome criterion_ito_stratonovich() {
    auto g = Grid::make(1, 10.0, 512);
    ComplexField u0 = gauss_state(g, 1.0, 1.0);
    CovarianceOperator op({KernelSpec::Shape::gaussian, 0.5, 1.0}, g);
    ModelSpec spec;
    spec.sigma = 1.0;
    spec.noise = &op;

    const double T = 0.2;
    const double dt_em = 2e-4;
    const int paths = 2000;

    // Splitting ensemble.
    EnsembleOptions opts;
    opts.horizon = T;
    opts.dt = 1e-3;
    opts.paths = paths;
    opts.master_seed = 7;
    opts.sample_every = 50;
    EnsembleStats strang = run_ensemble(u0, spec, opts);
    const double mean_strang = strang.mean_h.back();
    const double se_strang = strang.se_h.back();

    // Euler-Maruyama ensemble of the Ito form.
    const int em_steps = static_cast<int>(std::llround(T / dt_em));
    double mean_em = 0.0, m2_em = 0.0;
    for (int p = 0; p < paths; ++p) {
        RngStream rng = RngStream::derived(7, p);
        ComplexField u = u0;
        for (int k = 0; k < em_steps; ++k) {
            RealField dw = op.sample_increment(dt_em, rng);
            u = ito_reference_step(u, dt_em, spec, &dw, k * dt_em);
        }
        const double h = energy(u, spec.sigma);
        const double d = h - mean_em;
        mean_em += d / (p + 1);
        m2_em += d * (h - mean_em);
    }
    const double se_em = std::sqrt(m2_em / (paths - 1.0) / paths);

    // O(dt) allowance from the deterministic discrepancy of the two schemes.
    ModelSpec det = spec;
    det.noise = nullptr;
    ComplexField us = u0, ue = u0;
    for (int k = 0; k < static_cast<int>(std::llround(T / opts.dt)); ++k)
        us = strang_step(us, opts.dt, det, k * opts.dt, nullptr);
    for (int k = 0; k < em_steps; ++k)
        ue = ito_reference_step(ue, dt_em, det, nullptr, k * dt_em);
    const double allowance =
        2.0 * std::abs(energy(us, spec.sigma) - energy(ue, spec.sigma)) + 1e-10;

    const double gap = std::abs(mean_strang - mean_em);
    const double budget =
        3.0 * std::sqrt(se_strang * se_strang + se_em * se_em) + allowance;
    return {gap < budget,
            fmt("E[H]: %.5f vs %.5f, gap %.2e, budget %.2e", mean_strang,
                mean_em, gap, budget)};
}

// ---------------------------------------------------------------------------
// 12. Truncated dynamics stay bounded for a long horizon.

Outcome criterion_truncation() {
    auto g = Grid::make(1, 5.0, 2048);
    ComplexField u0 = gauss_state(g, 3.0, 1.0);
    ModelSpec spec;
    spec.sigma = 3.0;
    const double R = 5.0, s0 = 1.75;
    spec.truncation = TruncationParams{R, s0};

    const double dt = 1e-4, T = 10.0;
    const int steps = static_cast<int>(std::llround(T / dt));
    ComplexField u = u0;
    double h_max = h_norm(u, s0);
    for (int k = 0; k < steps; ++k) {
        u = strang_step(u, dt, spec, k * dt, nullptr);
        if ((k + 1) % 100 == 0) {
            const double h = h_norm(u, s0);
            if (!std::isfinite(h))
                return {false, fmt("state lost finiteness at t = %.3f", (k + 1) * dt)};
            h_max = std::max(h_max, h);
        }
    }
    const double limit = 1.1 * std::sqrt(2.0) * R;
    return {h_max <= limit,
            fmt("max H^{%.2f} norm %.3f over [0, %g] (limit %.3f)", s0, h_max, T,
                limit)};
}

// ---------------------------------------------------------------------------
// 13. Sampled increments match the advertised variance and correlation.

Outcome criterion_noise_statistics() {
    auto g = Grid::make(1, 10.0, 64);
    CovarianceOperator op({KernelSpec::Shape::gaussian, 1.0, 1.0}, g);
    const double dt = 0.01;
    const int draws = 10000;
    const std::size_t ia = 12, ib = 22;

    RngStream rng(404);
    double sum_sq = 0.0, sum_ab = 0.0;
    for (int k = 0; k < draws; ++k) {
        RealField w = op.sample_increment(dt, rng);
        sum_sq += w[ia] * w[ia];
        sum_ab += w[ia] * w[ib];
    }
    const double var_true = op.F_phi_value() * dt;
    const double cov_true = op.correlation({static_cast<int>(ia), 0},
                                           {static_cast<int>(ib), 0}) * dt;

    const double var_err = std::abs(sum_sq / draws - var_true);
    const double var_se = var_true * std::sqrt(2.0 / draws);
    const double cov_err = std::abs(sum_ab / draws - cov_true);
    const double cov_se =
        std::sqrt((var_true * var_true + cov_true * cov_true) / draws);
    const bool pass = var_err < 5.0 * var_se && cov_err < 5.0 * cov_se;
    return {pass, fmt("variance off by %.2f SE, covariance by %.2f SE (limit 5)",
                      var_err / var_se, cov_err / cov_se)};
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> criteria = {
        {"gaussian functionals", criterion_gaussian_functionals},
        {"mass conservation", criterion_mass_conservation},
        {"variance identity", criterion_variance_identity},
        {"linear variance law", criterion_linear_variance},
        {"energy drift law", criterion_energy_identity},
        {"momentum identity", criterion_momentum_identity},
        {"deterministic blow-up bound", criterion_deterministic_blowup},
        {"noisy blow-up probability", criterion_noisy_blowup},
        {"control construction", criterion_control_construction},
        {"two-phase mechanism", criterion_two_phase},
        {"ito-stratonovich cross-check", criterion_ito_stratonovich},
        {"truncated dynamics bound", criterion_truncation},
        {"noise statistics", criterion_noise_statistics},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
        std::printf("criterion %2zu %-30s %s  (%s) [%.1fs]\n", i + 1,
                    criteria[i].name, out.pass ? "PASS" : "FAIL",
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    if (failures > 0) std::printf("%d criteria FAILED\n", failures);
    else std::printf("all %zu criteria passed\n", criteria.size());
    return failures;
}
