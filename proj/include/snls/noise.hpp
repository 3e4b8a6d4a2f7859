#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "snls/grid.hpp"
#include "snls/rng.hpp"

namespace snls {

/// Homogeneous convolution kernel defining the covariance operator.
struct KernelSpec {
    enum class Shape { gaussian };
    Shape shape = Shape::gaussian;
    double amplitude = 1.0;  // a >= 0
    double width = 1.0;      // l > 0
};

/// Covariance operator phi realized as convolution with a periodized
/// kernel.  Diagonal in the Fourier basis; the cached intensity fields
/// F_phi, f_phi1 and the constant m_phi are computed from the same
/// discrete spectral multipliers used for sampling, so drift terms and
/// sampled increments are mutually consistent at the discrete level.
class CovarianceOperator {
public:
    CovarianceOperator(const KernelSpec& spec, GridPtr grid);

    const KernelSpec& kernel() const { return spec_; }
    const GridPtr& grid() const { return grid_; }
    const std::vector<double>& multipliers() const { return multipliers_; }

    /// Pointwise noise intensity sum_k (phi e_k)^2; spatially constant
    /// for a convolution kernel.
    RealField F_phi() const;
    double F_phi_value() const { return f_phi_value_; }

    /// Pointwise gradient intensity sum_k |grad phi e_k|^2.
    RealField f_phi1() const;
    double f_phi1_value() const { return f_phi1_value_; }

    /// Sup norm of f_phi1 (noise-strength constant of the blow-up
    /// criterion).
    double m_phi() const { return f_phi1_value_; }

    /// Two-point correlation c(x,y) between grid nodes, given per-axis
    /// node indices.
    double correlation(const std::array<int, 2>& node_x,
                       const std::array<int, 2>& node_y) const;

    /// Wiener increment over dt: real field with mean zero, pointwise
    /// variance F_phi * dt and spatial correlation c(x,y) * dt.
    RealField sample_increment(double dt, RngStream& rng) const;

private:
    KernelSpec spec_;
    GridPtr grid_;
    std::vector<double> multipliers_;   // spectral order
    std::vector<double> corr_;          // c by displacement index
    double f_phi_value_ = 0.0;
    double f_phi1_value_ = 0.0;
};

/// Discrete Wiener path: independent increments on a fixed step.
struct NoisePath {
    double dt = 0.0;
    std::vector<RealField> increments;  // increments[k] = W(t_{k+1}) - W(t_k)
    std::uint64_t seed = 0;
};

NoisePath sample_path(const CovarianceOperator& op, double dt, int steps,
                      RngStream& rng, std::uint64_t seed_tag = 0);

/// Merge pairs of increments into a path with step 2*dt (same Brownian
/// realization at half the resolution).
NoisePath coarsen_path(const NoisePath& path);

/// Piecewise-constant noise rate: projection of increment k-1 onto the
/// lowest n spectral modes, divided by dt.  k = 0 returns the zero field.
RealField piecewise_rate(const NoisePath& path, int mode_cutoff, int interval_index);

}  // namespace snls
