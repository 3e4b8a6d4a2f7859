#pragma once

#include <cstdint>
#include <vector>

#include "snls/dynamics.hpp"
#include "snls/noise.hpp"

namespace snls {

/// Per-time Monte Carlo moments over independent trajectories.  Detected
/// paths contribute up to their tau*; under-resolved paths are excluded
/// from the moment series but kept in the verdict list.
struct EnsembleStats {
    std::vector<double> times;
    std::vector<int> alive;
    std::vector<double> mean_m, se_m;
    std::vector<double> mean_h, se_h;
    std::vector<double> mean_g, se_g;
    std::vector<double> mean_v, se_v;
    std::vector<double> mean_lp;  // mean |u|_{L^{2s+2}}^{2s+2}

    std::vector<Verdict> verdicts;
    std::vector<double> tau_stars;  // per path; 0 unless detected

    int paths = 0;
    int under_resolved = 0;
    int dim = 1;
    double horizon = 0.0;
    double dt = 0.0;
    double min_alive_horizon = 0.0;
    DiagnosticsRecord initial;
    std::uint64_t master_seed = 0;
    std::uint64_t config_hash = 0;
};

struct EnsembleOptions {
    double horizon = 1.0;
    double dt = 1e-3;
    int paths = 2;
    std::uint64_t master_seed = 0;
    int sample_every = 1;
    BlowupDetectorParams detector;
    bool parallel = true;
    double max_under_resolved_fraction = 0.2;
};

/// Path-parallel Monte Carlo driver.  Streams derive from
/// (master seed, path index); aggregation is a fold in path order, so the
/// result is bit-identical for any worker count.
EnsembleStats run_ensemble(const ComplexField& u0, const ModelSpec& spec,
                           const EnsembleOptions& options);

/// Serial reference driver (same contract, no worker pool).
EnsembleStats run_ensemble_serial(const ComplexField& u0, const ModelSpec& spec,
                                  EnsembleOptions options);

struct ProbabilityEstimate {
    double p = 0.0;
    double lower = 0.0;  // 95% Wilson score interval
    double upper = 0.0;
    int detections = 0;
};

ProbabilityEstimate estimate_blowup_probability(const EnsembleStats& stats, double tbar);

struct IdentityCheck {
    std::vector<double> times;
    std::vector<double> residual;
    std::vector<double> se;
    double bias_allowance = 0.0;
    bool pass = false;
};

/// In-expectation energy drift against the closed form
/// E[H(t)] = H(u0) + 1/2 c1 M(u0) t for a homogeneous kernel (constant
/// f_phi1 = c1).  Pass rule: |residual| <= 3 SE + bias allowance.
IdentityCheck check_energy_identity(const EnsembleStats& stats,
                                    const CovarianceOperator& op,
                                    double bias_allowance);

/// In-expectation momentum identity: residual of
/// E[G(t)] - G0 - 4 int E[H] - (2 - sigma d)/(sigma + 1) int E[|u|^{2s+2}].
IdentityCheck check_momentum_identity(const EnsembleStats& stats, double sigma,
                                      double bias_allowance);

/// Pathwise variance identity residual V(T) - V(0) - 4 int G (trapezoid).
double check_variance_identity(const Trajectory& traj);

struct Theorem41Verdict {
    double criterion_value = 0.0;
    bool applicable = false;  // criterion < 0
    ProbabilityEstimate probability;
    bool pass = false;  // applicable implies Wilson lower bound > 0
};

Theorem41Verdict check_theorem41(const EnsembleStats& stats,
                                 const CovarianceOperator& op, double tbar);

}  // namespace snls
