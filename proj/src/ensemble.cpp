#include "snls/ensemble.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace snls {

namespace {

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    // FNV-1a over the 8 bytes of v.
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_double(std::uint64_t h, double x) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    __builtin_memcpy(&bits, &x, sizeof(bits));
    return hash_combine(h, bits);
}

EnsembleStats fold(const std::vector<Trajectory>& trajectories,
                   const EnsembleOptions& options, const ModelSpec& spec) {
    EnsembleStats stats;
    stats.paths = options.paths;
    stats.horizon = options.horizon;
    stats.dt = options.dt;
    stats.master_seed = options.master_seed;

    std::size_t max_records = 0;
    for (const Trajectory& t : trajectories)
        max_records = std::max(max_records, t.records.size());
    stats.times.resize(max_records);
    for (const Trajectory& t : trajectories)
        for (std::size_t i = 0; i < t.records.size(); ++i)
            stats.times[i] = t.records[i].t;

    const std::size_t nt = max_records;
    stats.alive.assign(nt, 0);
    stats.mean_m.assign(nt, 0.0);
    stats.mean_h.assign(nt, 0.0);
    stats.mean_g.assign(nt, 0.0);
    stats.mean_v.assign(nt, 0.0);
    stats.mean_lp.assign(nt, 0.0);
    std::vector<double> m2_m(nt, 0.0), m2_h(nt, 0.0), m2_g(nt, 0.0), m2_v(nt, 0.0);

    stats.min_alive_horizon = options.horizon;
    for (const Trajectory& traj : trajectories) {
        stats.verdicts.push_back(traj.verdict);
        stats.tau_stars.push_back(traj.verdict == Verdict::detected ? traj.tau_star : 0.0);
        if (traj.verdict == Verdict::under_resolved) {
            ++stats.under_resolved;
            continue;
        }
        const double path_horizon =
            traj.verdict == Verdict::detected ? traj.tau_star : options.horizon;
        stats.min_alive_horizon = std::min(stats.min_alive_horizon, path_horizon);
        for (std::size_t i = 0; i < traj.records.size(); ++i) {
            const DiagnosticsRecord& r = traj.records[i];
            const int n = ++stats.alive[i];
            const auto update = [n](double& mean, double& m2, double x) {
                const double d = x - mean;
                mean += d / n;
                m2 += d * (x - mean);
            };
            update(stats.mean_m[i], m2_m[i], r.mass);
            update(stats.mean_h[i], m2_h[i], r.energy);
            update(stats.mean_g[i], m2_g[i], r.momentum);
            update(stats.mean_v[i], m2_v[i], r.variance);
            stats.mean_lp[i] += (r.lp_power - stats.mean_lp[i]) / n;
        }
    }

    stats.se_m.assign(nt, 0.0);
    stats.se_h.assign(nt, 0.0);
    stats.se_g.assign(nt, 0.0);
    stats.se_v.assign(nt, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
        const int n = stats.alive[i];
        if (n >= 2) {
            stats.se_m[i] = std::sqrt(m2_m[i] / (n - 1.0) / n);
            stats.se_h[i] = std::sqrt(m2_h[i] / (n - 1.0) / n);
            stats.se_g[i] = std::sqrt(m2_g[i] / (n - 1.0) / n);
            stats.se_v[i] = std::sqrt(m2_v[i] / (n - 1.0) / n);
        }
    }

    std::uint64_t h = 1469598103934665603ull;
    h = hash_double(h, options.horizon);
    h = hash_double(h, options.dt);
    h = hash_combine(h, options.paths);
    h = hash_combine(h, options.master_seed);
    h = hash_double(h, spec.sigma);
    stats.config_hash = h;
    return stats;
}

}  // namespace

EnsembleStats run_ensemble(const ComplexField& u0, const ModelSpec& spec,
                           const EnsembleOptions& options) {
    if (options.paths < 2)
        throw std::invalid_argument("run_ensemble: need at least 2 paths");
    spec.validate(u0.grid()->dim());

    std::vector<Trajectory> trajectories(options.paths);
    std::exception_ptr error;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (options.parallel)
#endif
    for (int p = 0; p < options.paths; ++p) {
        try {
            RngStream rng = RngStream::derived(options.master_seed, p);
            EvolveOptions eo;
            eo.horizon = options.horizon;
            eo.dt = options.dt;
            eo.sample_every = options.sample_every;
            eo.detector = options.detector;
            trajectories[p] = evolve(u0, spec, eo, rng);
            trajectories[p].seed = options.master_seed;
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    EnsembleStats stats = fold(trajectories, options, spec);
    stats.initial = make_record(u0, 0.0, spec.sigma);
    stats.dim = u0.grid()->dim();
    if (stats.under_resolved > options.max_under_resolved_fraction * options.paths)
        throw std::runtime_error(
            "run_ensemble: more than 20% of paths lost resolution; refine the grid");
    return stats;
}

EnsembleStats run_ensemble_serial(const ComplexField& u0, const ModelSpec& spec,
                                  EnsembleOptions options) {
    options.parallel = false;
    return run_ensemble(u0, spec, options);
}

ProbabilityEstimate estimate_blowup_probability(const EnsembleStats& stats, double tbar) {
    if (tbar > stats.horizon + 1e-12)
        throw std::invalid_argument("estimate_blowup_probability: tbar beyond horizon");
    int detections = 0;
    for (std::size_t p = 0; p < stats.verdicts.size(); ++p)
        if (stats.verdicts[p] == Verdict::detected && stats.tau_stars[p] <= tbar)
            ++detections;
    const double n = static_cast<double>(stats.paths);
    const double phat = detections / n;
    const double z = 1.959963984540054;  // 95%
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = phat + z2 / (2.0 * n);
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    ProbabilityEstimate out;
    out.p = phat;
    out.detections = detections;
    out.lower = (center - half) / denom;
    out.upper = (center + half) / denom;
    return out;
}

IdentityCheck check_energy_identity(const EnsembleStats& stats,
                                    const CovarianceOperator& op,
                                    double bias_allowance) {
    // Constant f_phi1 is guaranteed by the convolution-kernel construction;
    // reject anything else by contract.
    const RealField f1 = op.f_phi1();
    for (double v : f1.values())
        if (std::abs(v - op.f_phi1_value()) > 1e-12 * std::max(1.0, op.f_phi1_value()))
            throw std::invalid_argument(
                "check_energy_identity: nonconstant f_phi1 (no closed form)");
    const double c1 = op.f_phi1_value();
    const double h0 = stats.initial.energy;
    const double m0 = stats.initial.mass;

    IdentityCheck out;
    out.bias_allowance = bias_allowance;
    out.pass = true;
    for (std::size_t i = 0; i < stats.times.size(); ++i) {
        const double t = stats.times[i];
        if (t > stats.min_alive_horizon + 1e-12) break;
        const double res = stats.mean_h[i] - h0 - 0.5 * c1 * m0 * t;
        out.times.push_back(t);
        out.residual.push_back(res);
        out.se.push_back(stats.se_h[i]);
        if (std::abs(res) > 3.0 * stats.se_h[i] + bias_allowance) out.pass = false;
    }
    return out;
}

IdentityCheck check_momentum_identity(const EnsembleStats& stats, double sigma,
                                      double bias_allowance) {
    IdentityCheck out;
    out.bias_allowance = bias_allowance;
    out.pass = true;

    const double g0 = stats.initial.momentum;
    double int_h = 0.0, int_lp = 0.0;
    for (std::size_t i = 0; i < stats.times.size(); ++i) {
        const double t = stats.times[i];
        if (t > stats.min_alive_horizon + 1e-12) break;
        if (i > 0) {
            const double dt = stats.times[i] - stats.times[i - 1];
            int_h += 0.5 * dt * (stats.mean_h[i] + stats.mean_h[i - 1]);
            int_lp += 0.5 * dt * (stats.mean_lp[i] + stats.mean_lp[i - 1]);
        }
        const double coeff = (2.0 - sigma * stats.dim) / (sigma + 1.0);
        const double res = stats.mean_g[i] - g0 - 4.0 * int_h - coeff * int_lp;
        out.times.push_back(t);
        out.residual.push_back(res);
        out.se.push_back(stats.se_g[i]);
        if (std::abs(res) > 3.0 * stats.se_g[i] + bias_allowance) out.pass = false;
    }
    return out;
}

double check_variance_identity(const Trajectory& traj) {
    if (traj.verdict != Verdict::none)
        throw std::invalid_argument(
            "check_variance_identity: trajectory must run clean to its horizon");
    double int_g = 0.0;
    for (std::size_t i = 1; i < traj.records.size(); ++i) {
        const double dt = traj.records[i].t - traj.records[i - 1].t;
        int_g += 0.5 * dt * (traj.records[i].momentum + traj.records[i - 1].momentum);
    }
    return traj.records.back().variance - traj.records.front().variance - 4.0 * int_g;
}

Theorem41Verdict check_theorem41(const EnsembleStats& stats,
                                 const CovarianceOperator& op, double tbar) {
    const DiagnosticsRecord& r = stats.initial;
    Theorem41Verdict out;
    out.criterion_value = blowup_functional(r.mass, r.energy, r.momentum, r.variance,
                                            op.m_phi(), tbar);
    out.applicable = out.criterion_value < 0.0;
    out.probability = estimate_blowup_probability(stats, tbar);
    out.pass = !out.applicable || out.probability.lower > 0.0;
    return out;
}

}  // namespace snls
