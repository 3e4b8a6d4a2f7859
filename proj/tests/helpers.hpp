#pragma once

#include <cmath>
#include <random>

#include "snls/grid.hpp"

namespace snls::test {

/// amp * exp(-|x|^2 / (2 w^2)) with an optional quadratic chirp.
inline ComplexField gaussian(const GridPtr& grid, double amp = 1.0, double w = 1.0,
                             double chirp = 0.0) {
    ComplexField f(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double r2 = grid->node_radius_sq(i);
        f[i] = amp * std::exp(-r2 / (2.0 * w * w)) *
               std::polar(1.0, 0.5 * chirp * r2);
    }
    return f;
}

/// Band-limited random field: a handful of low Fourier modes with
/// Gaussian coefficients.
inline ComplexField random_smooth_field(const GridPtr& grid, unsigned seed,
                                        int max_mode = 5) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<cplx> spec(grid->size(), cplx{0.0, 0.0});
    const int n = grid->points_per_axis();
    for (std::size_t flat = 0; flat < grid->size(); ++flat) {
        std::size_t rem = flat;
        bool low = true;
        for (int a = 0; a < grid->dim(); ++a) {
            const int m = static_cast<int>(rem % n);
            rem /= n;
            const int sm = (m < n / 2) ? m : m - n;
            if (std::abs(sm) > max_mode) low = false;
        }
        if (low) spec[flat] = cplx(normal(rng), normal(rng));
    }
    return from_spectral(grid, spec);
}

inline double l2_distance(const ComplexField& a, const ComplexField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s * a.grid()->cell_volume());
}

}  // namespace snls::test
