#include "snls/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace snls {

namespace {
// FFTW plan creation is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Grid::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

std::shared_ptr<const Grid> Grid::make(int dim, double half_width, int n) {
    if (dim != 1 && dim != 2)
        throw std::invalid_argument("Grid: dimension must be 1 or 2");
    if (half_width <= 0.0)
        throw std::invalid_argument("Grid: box half-width must be positive");
    if (n < 8)
        throw std::invalid_argument("Grid: need at least 8 points per axis");
    if (n % 2 != 0)
        throw std::invalid_argument("Grid: points per axis must be even");
    return std::shared_ptr<const Grid>(new Grid(dim, half_width, n));
}

Grid::Grid(int dim, double half_width, int n)
    : dim_(dim), half_width_(half_width), n_(n) {
    size_ = 1;
    for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(n_);

    const double h = spacing();
    axis_coord_.resize(n_);
    axis_wavenumber_.resize(n_);
    for (int j = 0; j < n_; ++j) {
        axis_coord_[j] = -half_width_ + j * h;
        const int m = (j < n_ / 2) ? j : j - n_;  // FFT index order
        axis_wavenumber_[j] = M_PI * m / half_width_;
    }

    ksq_.resize(size_);
    k_axis_.assign(dim_, std::vector<double>(size_));
    for (std::size_t flat = 0; flat < size_; ++flat) {
        double s = 0.0;
        std::size_t rem = flat;
        for (int a = dim_ - 1; a >= 0; --a) {
            const int m = static_cast<int>(rem % n_);
            rem /= n_;
            const double k = axis_wavenumber_[m];
            s += k * k;
            // Nyquist has no symmetric partner; first derivatives drop it.
            k_axis_[a][flat] = (m == n_ / 2) ? 0.0 : k;
        }
        ksq_[flat] = s;
    }

    plans_ = std::make_unique<Plans>();
    std::vector<cplx> dummy_in(size_), dummy_out(size_);
    auto* in = reinterpret_cast<fftw_complex*>(dummy_in.data());
    auto* out = reinterpret_cast<fftw_complex*>(dummy_out.data());
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (dim_ == 1) {
        plans_->forward = fftw_plan_dft_1d(n_, in, out, FFTW_FORWARD, flags);
        plans_->backward = fftw_plan_dft_1d(n_, in, out, FFTW_BACKWARD, flags);
    } else {
        plans_->forward = fftw_plan_dft_2d(n_, n_, in, out, FFTW_FORWARD, flags);
        plans_->backward = fftw_plan_dft_2d(n_, n_, in, out, FFTW_BACKWARD, flags);
    }
    if (!plans_->forward || !plans_->backward)
        throw std::runtime_error("Grid: FFTW plan creation failed");
}

Grid::~Grid() = default;

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing();
    return v;
}

double Grid::box_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= 2.0 * half_width_;
    return v;
}

double Grid::node_coord(std::size_t flat, int axis) const {
    std::size_t stride = 1;
    for (int a = dim_ - 1; a > axis; --a) stride *= n_;
    return axis_coord_[(flat / stride) % n_];
}

double Grid::node_radius_sq(std::size_t flat) const {
    double r2 = 0.0;
    for (int a = 0; a < dim_; ++a) {
        const double x = node_coord(flat, a);
        r2 += x * x;
    }
    return r2;
}

void Grid::fft_forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(plans_->forward,
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

void Grid::fft_backward(const cplx* in, cplx* out) const {
    fftw_execute_dft(plans_->backward,
                     reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

ComplexField::ComplexField(GridPtr grid, cplx fill)
    : grid_(std::move(grid)), values_(grid_->size(), fill) {}

ComplexField::ComplexField(GridPtr grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size())
        throw std::invalid_argument("ComplexField: value count does not match grid");
}

bool ComplexField::finite() const {
    for (const cplx& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

RealField::RealField(GridPtr grid, double fill)
    : grid_(std::move(grid)), values_(grid_->size(), fill) {}

RealField::RealField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size())
        throw std::invalid_argument("RealField: value count does not match grid");
}

cplx integrate(const ComplexField& f) {
    cplx s{0.0, 0.0};
    for (const cplx& v : f.values()) s += v;
    return s * f.grid()->cell_volume();
}

double integrate(const RealField& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s * f.grid()->cell_volume();
}

std::vector<cplx> to_spectral(const ComplexField& f) {
    const Grid& g = *f.grid();
    std::vector<cplx> out(g.size());
    g.fft_forward(f.values().data(), out.data());
    // f_hat_k = h^d (-1)^(m1+..+md) F_m : continuum-style transform with the
    // phase offset of the centered box.
    const double hd = g.cell_volume();
    const int n = g.points_per_axis();
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        std::size_t rem = flat;
        int parity = 0;
        for (int a = 0; a < g.dim(); ++a) {
            parity += static_cast<int>(rem % n);
            rem /= n;
        }
        out[flat] *= (parity % 2 == 0) ? hd : -hd;
    }
    return out;
}

ComplexField from_spectral(const GridPtr& grid, const std::vector<cplx>& fhat) {
    const Grid& g = *grid;
    if (fhat.size() != g.size())
        throw std::invalid_argument("from_spectral: size mismatch");
    std::vector<cplx> scaled(g.size());
    const double inv = 1.0 / g.box_volume();
    const int n = g.points_per_axis();
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        std::size_t rem = flat;
        int parity = 0;
        for (int a = 0; a < g.dim(); ++a) {
            parity += static_cast<int>(rem % n);
            rem /= n;
        }
        scaled[flat] = fhat[flat] * ((parity % 2 == 0) ? inv : -inv);
    }
    ComplexField out(grid);
    g.fft_backward(scaled.data(), out.values().data());
    return out;
}

std::vector<ComplexField> gradient(const ComplexField& f) {
    const Grid& g = *f.grid();
    std::vector<cplx> spec(g.size());
    g.fft_forward(f.values().data(), spec.data());
    const double inv_n = 1.0 / static_cast<double>(g.size());

    std::vector<ComplexField> out;
    out.reserve(g.dim());
    std::vector<cplx> tmp(g.size());
    for (int a = 0; a < g.dim(); ++a) {
        const std::vector<double>& k = g.wavenumber_axis(a);
        for (std::size_t i = 0; i < g.size(); ++i)
            tmp[i] = spec[i] * cplx(0.0, k[i]) * inv_n;
        ComplexField comp(f.grid());
        g.fft_backward(tmp.data(), comp.values().data());
        out.push_back(std::move(comp));
    }
    return out;
}

double h_norm(const ComplexField& f, double s) {
    if (s < 0.0)
        throw std::invalid_argument("h_norm: regularity exponent must be nonnegative");
    const Grid& g = *f.grid();
    std::vector<cplx> spec(g.size());
    g.fft_forward(f.values().data(), spec.data());
    // |f_hat|^2 = h^(2d) |F_m|^2 ; divide by (2L)^d = (N h)^d.
    const double scale = g.cell_volume() * g.cell_volume() / g.box_volume();
    const std::vector<double>& ksq = g.wavenumber_sq();
    double acc = 0.0;
    if (s == 0.0) {
        for (std::size_t i = 0; i < g.size(); ++i) acc += std::norm(spec[i]);
    } else {
        for (std::size_t i = 0; i < g.size(); ++i)
            acc += std::pow(1.0 + ksq[i], s) * std::norm(spec[i]);
    }
    return std::sqrt(acc * scale);
}

ComplexField spectral_upsample(const ComplexField& f, int new_points_per_axis) {
    const Grid& g = *f.grid();
    const int n = g.points_per_axis();
    const int n2 = new_points_per_axis;
    if (n2 < n)
        throw std::invalid_argument("spectral_upsample: target grid must be finer");
    GridPtr fine = Grid::make(g.dim(), g.half_width(), n2);
    if (n2 == n) return ComplexField(fine, f.values());

    const std::vector<cplx> spec = to_spectral(f);
    std::vector<cplx> spec2(fine->size(), cplx{0.0, 0.0});

    // Per-axis mode mapping with Nyquist splitting.
    struct Target {
        int index;
        double weight;
    };
    auto targets_for = [&](int m) -> std::vector<Target> {
        const int signed_m = (m < n / 2) ? m : m - n;
        if (signed_m == -n / 2)
            return {{(n / 2) % n2, 0.5}, {n2 - n / 2, 0.5}};
        return {{(signed_m + n2) % n2, 1.0}};
    };

    for (std::size_t flat = 0; flat < g.size(); ++flat) {
        int m[2] = {0, 0};
        std::size_t rem = flat;
        for (int a = g.dim() - 1; a >= 0; --a) {
            m[a] = static_cast<int>(rem % n);
            rem /= n;
        }
        for (const Target& t0 : targets_for(m[0])) {
            if (g.dim() == 1) {
                spec2[t0.index] += t0.weight * spec[flat];
            } else {
                for (const Target& t1 : targets_for(m[1]))
                    spec2[static_cast<std::size_t>(t0.index) * n2 + t1.index] +=
                        t0.weight * t1.weight * spec[flat];
            }
        }
    }
    return from_spectral(fine, spec2);
}

}  // namespace snls
