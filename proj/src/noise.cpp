#include "snls/noise.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace snls {

namespace {

// Kernel profile wrapped onto the torus.
double periodized_gaussian(double x, double amplitude, double width, double half_width) {
    double s = 0.0;
    for (int w = -3; w <= 3; ++w) {
        const double y = x - 2.0 * half_width * w;
        s += std::exp(-y * y / (2.0 * width * width));
    }
    return amplitude * s;
}

std::size_t partner_index(const Grid& g, std::size_t flat) {
    const int n = g.points_per_axis();
    std::size_t out = 0;
    std::size_t rem = flat;
    std::size_t stride = 1;
    for (int a = 0; a < g.dim(); ++a) {
        const int m = static_cast<int>(rem % n);
        rem /= n;
        out += static_cast<std::size_t>((n - m) % n) * stride;
        stride *= n;
    }
    return out;
}

}  // namespace

CovarianceOperator::CovarianceOperator(const KernelSpec& spec, GridPtr grid)
    : spec_(spec), grid_(std::move(grid)) {
    if (spec_.amplitude < 0.0)
        throw std::invalid_argument("CovarianceOperator: amplitude must be nonnegative");
    if (spec_.width <= 0.0)
        throw std::invalid_argument("CovarianceOperator: kernel width must be positive");
    const Grid& g = *grid_;
    if (spec_.width < 2.0 * g.spacing())
        throw std::invalid_argument(
            "CovarianceOperator: kernel under-resolved (width < 2h); refine the grid");
    if (spec_.width > g.half_width() / 5.0)
        std::fprintf(stderr,
                     "warning: kernel width %g exceeds L/5 = %g; periodization error "
                     "may be significant\n",
                     spec_.width, g.half_width() / 5.0);

    // Discrete transform of the periodized kernel profile.
    ComplexField profile(grid_);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double v = periodized_gaussian(g.node_coord(i, 0), 1.0, spec_.width, g.half_width());
        if (g.dim() == 2)
            v *= periodized_gaussian(g.node_coord(i, 1), 1.0, spec_.width, g.half_width());
        profile[i] = spec_.amplitude * v;
    }
    std::vector<cplx> khat = to_spectral(profile);
    multipliers_.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) multipliers_[i] = khat[i].real();

    // Autocorrelation by displacement: inverse transform of multiplier^2.
    std::vector<cplx> msq(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        msq[i] = cplx(multipliers_[i] * multipliers_[i], 0.0);
    std::vector<cplx> corr_c(g.size());
    g.fft_backward(msq.data(), corr_c.data());
    corr_.resize(g.size());
    const double inv_box = 1.0 / g.box_volume();
    for (std::size_t i = 0; i < g.size(); ++i) corr_[i] = corr_c[i].real() * inv_box;

    f_phi_value_ = corr_[0];

    double f1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double kg2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double k = g.wavenumber_axis(a)[i];
            kg2 += k * k;
        }
        f1 += kg2 * multipliers_[i] * multipliers_[i];
    }
    f_phi1_value_ = f1 * inv_box;
}

RealField CovarianceOperator::F_phi() const {
    return RealField(grid_, f_phi_value_);
}

RealField CovarianceOperator::f_phi1() const {
    return RealField(grid_, f_phi1_value_);
}

double CovarianceOperator::correlation(const std::array<int, 2>& node_x,
                                       const std::array<int, 2>& node_y) const {
    const Grid& g = *grid_;
    const int n = g.points_per_axis();
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (int a = g.dim() - 1; a >= 0; --a) {
        const int d = ((node_x[a] - node_y[a]) % n + n) % n;
        flat += static_cast<std::size_t>(d) * stride;
        stride *= n;
    }
    return corr_[flat];
}

RealField CovarianceOperator::sample_increment(double dt, RngStream& rng) const {
    if (dt < 0.0)
        throw std::invalid_argument("sample_increment: dt must be nonnegative");
    const Grid& g = *grid_;
    RealField out(grid_);
    if (dt == 0.0) return out;

    // Hermitian-symmetric spectral sampling: each conjugate pair carries an
    // independent complex Gaussian, self-conjugate modes a real one.
    const double scale = std::sqrt(g.box_volume() * dt);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<cplx> spec(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::size_t p = partner_index(g, i);
        if (i < p) {
            const double g1 = rng.normal();
            const double g2 = rng.normal();
            const cplx z = scale * multipliers_[i] * inv_sqrt2 * cplx(g1, g2);
            spec[i] = z;
            spec[p] = std::conj(z);
        } else if (i == p) {
            spec[i] = cplx(scale * multipliers_[i] * rng.normal(), 0.0);
        }
    }
    std::vector<cplx> field(g.size());
    g.fft_backward(spec.data(), field.data());
    const double inv_box = 1.0 / g.box_volume();
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = field[i].real() * inv_box;
    return out;
}

NoisePath sample_path(const CovarianceOperator& op, double dt, int steps,
                      RngStream& rng, std::uint64_t seed_tag) {
    NoisePath path;
    path.dt = dt;
    path.seed = seed_tag;
    path.increments.reserve(steps);
    for (int k = 0; k < steps; ++k)
        path.increments.push_back(op.sample_increment(dt, rng));
    return path;
}

NoisePath coarsen_path(const NoisePath& path) {
    if (path.increments.size() % 2 != 0)
        throw std::invalid_argument("coarsen_path: need an even number of increments");
    NoisePath out;
    out.dt = 2.0 * path.dt;
    out.seed = path.seed;
    out.increments.reserve(path.increments.size() / 2);
    for (std::size_t k = 0; k + 1 < path.increments.size(); k += 2) {
        RealField sum = path.increments[k];
        const RealField& next = path.increments[k + 1];
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += next[i];
        out.increments.push_back(std::move(sum));
    }
    return out;
}

RealField piecewise_rate(const NoisePath& path, int mode_cutoff, int interval_index) {
    if (path.increments.empty())
        throw std::invalid_argument("piecewise_rate: empty path");
    const GridPtr& grid = path.increments.front().grid();
    const Grid& g = *grid;
    if (interval_index < 0 || interval_index >= static_cast<int>(path.increments.size()))
        throw std::out_of_range("piecewise_rate: interval index out of range");
    if (mode_cutoff < 0 || mode_cutoff > g.points_per_axis() / 2)
        throw std::invalid_argument("piecewise_rate: mode cutoff out of range");
    if (interval_index == 0) return RealField(grid);  // W_c(-dt) = 0

    const RealField& inc = path.increments[interval_index - 1];
    std::vector<cplx> buf(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] = cplx(inc[i], 0.0);
    std::vector<cplx> spec(g.size());
    g.fft_forward(buf.data(), spec.data());

    const int n = g.points_per_axis();
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        std::size_t rem = flat;
        bool keep = true;
        for (int a = 0; a < g.dim(); ++a) {
            const int m = static_cast<int>(rem % n);
            rem /= n;
            const int signed_m = (m < n / 2) ? m : m - n;
            if (signed_m < -mode_cutoff || signed_m >= mode_cutoff) keep = false;
        }
        if (!keep) spec[flat] = cplx(0.0, 0.0);
    }
    g.fft_backward(spec.data(), buf.data());
    RealField out(grid);
    const double scale = 1.0 / (path.dt * static_cast<double>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = buf[i].real() * scale;
    return out;
}

}  // namespace snls
