#include "snls/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace snls {

TabulatedPotential::TabulatedPotential(std::vector<double> times,
                                       std::vector<RealField> fields)
    : times_(std::move(times)), fields_(std::move(fields)) {
    if (times_.size() != fields_.size())
        throw std::invalid_argument("TabulatedPotential: times/fields size mismatch");
    if (!std::is_sorted(times_.begin(), times_.end()))
        throw std::invalid_argument("TabulatedPotential: times must be sorted");
}

RealField TabulatedPotential::at(double t) const {
    if (empty())
        throw std::out_of_range("TabulatedPotential: no samples stored");
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
    if (hi < times_.size() && std::abs(times_[hi] - t) < 1e-12 * std::max(1.0, std::abs(t)))
        return fields_[hi];
    if (hi == 0) return fields_.front();
    if (hi >= times_.size()) return fields_.back();
    const double t0 = times_[hi - 1], t1 = times_[hi];
    const double w = (t - t0) / (t1 - t0);
    RealField out = fields_[hi - 1];
    const RealField& f1 = fields_[hi];
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - w) * out[i] + w * f1[i];
    return out;
}

void ModelSpec::validate(int dim) const {
    if (sigma <= 0.0)
        throw std::invalid_argument("ModelSpec: sigma must be positive");
    if (aux) {
        if (aux->lambda < 0.0)
            throw std::invalid_argument("ModelSpec: aux coupling must be nonnegative");
        if (aux->sigma_tilde <= 2.0 / dim || aux->sigma_tilde >= sigma)
            throw std::invalid_argument(
                "ModelSpec: aux exponent must lie in (2/d, sigma)");
    }
    if (truncation) {
        if (truncation->level < 1.0)
            throw std::invalid_argument("ModelSpec: truncation level must be >= 1");
        const double s0 = truncation->sobolev_exponent;
        if (s0 <= 1.5 || s0 >= 2.0)
            throw std::invalid_argument("ModelSpec: s0 must lie in (3/2, 2)");
    }
}

ComplexField linear_step(const ComplexField& u, double dt) {
    const Grid& g = *u.grid();
    std::vector<cplx> spec(g.size());
    g.fft_forward(u.values().data(), spec.data());
    const std::vector<double>& ksq = g.wavenumber_sq();
    const double inv_n = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        spec[i] *= std::polar(inv_n, ksq[i] * dt);
    ComplexField out(u.grid());
    g.fft_backward(spec.data(), out.values().data());
    return out;
}

namespace {

// Phase rate of the local substep: mu |u|^{2s} + lambda |u|^{2s~} + f.
std::vector<double> local_phase_rate(const ComplexField& u, const ModelSpec& spec,
                                     double t) {
    std::vector<double> rate(u.size(), 0.0);
    if (spec.primary_coeff != 0.0) {
        for (std::size_t i = 0; i < u.size(); ++i)
            rate[i] += spec.primary_coeff * std::pow(std::norm(u[i]), spec.sigma);
    }
    if (spec.aux && spec.aux->lambda != 0.0) {
        for (std::size_t i = 0; i < u.size(); ++i)
            rate[i] += spec.aux->lambda * std::pow(std::norm(u[i]), spec.aux->sigma_tilde);
    }
    if (spec.potential) {
        const RealField f = spec.potential->at(t);
        for (std::size_t i = 0; i < u.size(); ++i) rate[i] += f[i];
    }
    return rate;
}

}  // namespace

ComplexField local_step(const ComplexField& u, double dt, const ModelSpec& spec,
                        double t) {
    const std::vector<double> rate = local_phase_rate(u, spec, t);
    ComplexField out = u;
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] *= std::polar(1.0, -rate[i] * dt);
    return out;
}

ComplexField noise_step(const ComplexField& u, const RealField& dw) {
    if (dw.size() != u.size())
        throw std::invalid_argument("noise_step: increment size mismatch");
    ComplexField out = u;
    for (std::size_t i = 0; i < u.size(); ++i)
        out[i] *= std::polar(1.0, -dw[i]);
    return out;
}

double truncation_factor(const ComplexField& u, const TruncationParams& params) {
    const double h = h_norm(u, params.sobolev_exponent);
    const double x = h * h / (params.level * params.level);
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    const auto q = [](double y) { return y > 0.0 ? std::exp(-1.0 / y) : 0.0; };
    return q(2.0 - x) / (q(2.0 - x) + q(x - 1.0));
}

ComplexField strang_step(const ComplexField& u, double dt, const ModelSpec& spec,
                         double t, const RealField* dw) {
    if (dt < 0.0 && (spec.noise || dw))
        throw std::invalid_argument("strang_step: negative dt only for noise-free models");
    ComplexField v = linear_step(u, 0.5 * dt);
    double theta = 1.0;
    if (spec.truncation) theta = truncation_factor(v, *spec.truncation);
    v = local_step(v, theta * dt, spec, t + 0.5 * dt);
    if (dw) {
        if (theta == 1.0) {
            v = noise_step(v, *dw);
        } else {
            RealField scaled = *dw;
            for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= theta;
            v = noise_step(v, scaled);
        }
    }
    return linear_step(v, 0.5 * dt);
}

ComplexField ito_reference_step(const ComplexField& u, double dt, const ModelSpec& spec,
                                const RealField* dw, double t) {
    const Grid& g = *u.grid();
    const double h = g.spacing();
    if (dt <= 0.0 || dt > h * h / M_PI)
        throw std::invalid_argument(
            "ito_reference_step: dt violates the spectral stability bound h^2/pi");

    const std::vector<double> rate = local_phase_rate(u, spec, t);
    const double f_phi = spec.noise ? spec.noise->F_phi_value() : 0.0;

    // Explicit Euler on the local terms, the noise increment, and the Ito
    // drift correction ...
    ComplexField out = u;
    const cplx mi{0.0, -1.0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx du = mi * rate[i] * u[i] * dt - 0.5 * f_phi * u[i] * dt;
        if (dw) du += mi * u[i] * (*dw)[i];
        out[i] = u[i] + du;
    }

    // ... then the exact linear propagator e^{i k^2 dt} in Fourier space.
    std::vector<cplx> spec_buf(g.size());
    g.fft_forward(out.values().data(), spec_buf.data());
    const std::vector<double>& ksq = g.wavenumber_sq();
    const double inv_n = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        spec_buf[i] *= std::polar(inv_n, ksq[i] * dt);
    g.fft_backward(spec_buf.data(), out.values().data());
    return out;
}

double spectral_tail_fraction(const ComplexField& u) {
    const Grid& g = *u.grid();
    std::vector<cplx> spec(g.size());
    g.fft_forward(u.values().data(), spec.data());
    const int n = g.points_per_axis();
    const double k_max = M_PI * (n / 2) / g.half_width();
    const double k_cut = (2.0 / 3.0) * k_max;
    double tail = 0.0, total = 0.0;
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        const double p = std::norm(spec[flat]);
        total += p;
        std::size_t rem = flat;
        double kmax_axis = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const int m = static_cast<int>(rem % n);
            rem /= n;
            kmax_axis = std::max(kmax_axis, std::abs(g.wavenumber(m)));
        }
        if (kmax_axis >= k_cut) tail += p;
    }
    return total > 0.0 ? tail / total : 0.0;
}

Trajectory evolve(const ComplexField& u0, const ModelSpec& spec,
                  const EvolveOptions& options, RngStream& rng,
                  const NoisePath* path) {
    spec.validate(u0.grid()->dim());
    if (options.dt <= 0.0)
        throw std::invalid_argument("evolve: dt must be positive");
    if (options.horizon < 0.0)
        throw std::invalid_argument("evolve: horizon must be nonnegative");
    if (path && std::abs(path->dt - options.dt) > 1e-12 * options.dt)
        throw std::invalid_argument("evolve: noise path step does not match dt");

    const int steps = static_cast<int>(std::llround(options.horizon / options.dt));
    Trajectory traj;
    traj.dt = options.dt;
    traj.records.push_back(make_record(u0, 0.0, spec.sigma));
    const double h1_0 = traj.records.front().h1;
    const double h1_fire = options.detector.h1_growth_factor * h1_0;

    ComplexField u = u0;
    for (int k = 0; k < steps; ++k) {
        const double t = k * options.dt;
        const RealField* dw = nullptr;
        RealField sampled;
        if (spec.noise) {
            if (path) {
                if (k >= static_cast<int>(path->increments.size()))
                    throw std::invalid_argument("evolve: noise path too short");
                dw = &path->increments[k];
            } else {
                sampled = spec.noise->sample_increment(options.dt, rng);
                dw = &sampled;
            }
        }
        u = strang_step(u, options.dt, spec, t, dw);

        const bool sample_now = ((k + 1) % options.sample_every == 0) || (k + 1 == steps);
        if (!sample_now) continue;
        const double t_now = (k + 1) * options.dt;
        DiagnosticsRecord rec = make_record(u, t_now, spec.sigma);
        traj.records.push_back(rec);
        if (!std::isfinite(rec.h1) || !std::isfinite(rec.mass))
            throw std::runtime_error(
                "evolve: state lost finiteness before a detector fired");
        if (rec.h1 >= h1_fire) {
            traj.verdict = Verdict::detected;
            traj.tau_star = t_now;
            break;
        }
        if (spectral_tail_fraction(u) >= options.detector.tail_threshold) {
            traj.verdict = Verdict::under_resolved;
            break;
        }
    }
    traj.final_field = std::move(u);
    return traj;
}

Trajectory evolve_confirmed(const ComplexField& u0, const ModelSpec& spec,
                            const EvolveOptions& options, RngStream& rng) {
    // Both runs share one Brownian realization: sample at dt/2, sum pairs
    // for the coarse run.
    const int fine_steps =
        2 * static_cast<int>(std::llround(options.horizon / options.dt));
    NoisePath fine, coarse;
    const NoisePath* coarse_ptr = nullptr;
    const NoisePath* fine_ptr = nullptr;
    if (spec.noise) {
        fine = sample_path(*spec.noise, 0.5 * options.dt, fine_steps, rng);
        coarse = coarsen_path(fine);
        coarse_ptr = &coarse;
        fine_ptr = &fine;
    }

    Trajectory traj = evolve(u0, spec, options, rng, coarse_ptr);
    if (traj.verdict != Verdict::detected) return traj;

    EvolveOptions halved = options;
    halved.dt = 0.5 * options.dt;
    halved.sample_every = 2 * options.sample_every;
    Trajectory confirm = evolve(u0, spec, halved, rng, fine_ptr);
    const bool confirmed =
        confirm.verdict == Verdict::detected &&
        std::abs(confirm.tau_star - traj.tau_star) <= 0.05 * traj.tau_star;
    if (!confirmed) traj.verdict = Verdict::under_resolved;
    return traj;
}

}  // namespace snls
