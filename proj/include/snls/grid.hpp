#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace snls {

using cplx = std::complex<double>;

/// Periodic spectral grid on the centered box [-L, L)^d, d in {1, 2}.
///
/// Nodes per axis: x_j = -L + j*h with h = 2L/N.  Wavenumbers per axis:
/// k_m = pi*m/L with m in {-N/2, ..., N/2 - 1}, stored in FFT index order
/// (m >= 0 first, then negative frequencies).  The single Nyquist mode
/// -N/2 has no symmetric partner; derivative operators zero it.
class Grid {
public:
    static std::shared_ptr<const Grid> make(int dim, double half_width, int points_per_axis);
    ~Grid();

    Grid(const Grid&) = delete;
    Grid& operator=(const Grid&) = delete;

    int dim() const { return dim_; }
    double half_width() const { return half_width_; }
    int points_per_axis() const { return n_; }
    double spacing() const { return 2.0 * half_width_ / n_; }
    std::size_t size() const { return size_; }
    double cell_volume() const;   // h^d
    double box_volume() const;    // (2L)^d

    double coord(int j) const { return axis_coord_[j]; }
    double wavenumber(int m) const { return axis_wavenumber_[m]; }
    const std::vector<double>& axis_coords() const { return axis_coord_; }

    /// |k|^2 per flattened spectral index (FFT order).
    const std::vector<double>& wavenumber_sq() const { return ksq_; }
    /// k along the given axis per flattened spectral index, Nyquist zeroed.
    const std::vector<double>& wavenumber_axis(int axis) const { return k_axis_[axis]; }

    /// Node coordinate along an axis for a flattened index.
    double node_coord(std::size_t flat, int axis) const;
    /// Squared distance of a node from the box center.
    double node_radius_sq(std::size_t flat) const;

    /// Unnormalized complex DFT of `in` (forward: e^{-i 2 pi j m / N}).
    /// Thread-safe; plans are created once at grid construction.
    void fft_forward(const cplx* in, cplx* out) const;
    /// Unnormalized inverse DFT (backward: e^{+i 2 pi j m / N}).
    void fft_backward(const cplx* in, cplx* out) const;

private:
    Grid(int dim, double half_width, int n);

    int dim_;
    double half_width_;
    int n_;
    std::size_t size_;
    std::vector<double> axis_coord_;
    std::vector<double> axis_wavenumber_;
    std::vector<double> ksq_;
    std::vector<std::vector<double>> k_axis_;

    struct Plans;
    std::unique_ptr<Plans> plans_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Complex amplitude sampled on a Grid.  Value semantics.
class ComplexField {
public:
    ComplexField() = default;
    explicit ComplexField(GridPtr grid, cplx fill = {0.0, 0.0});
    ComplexField(GridPtr grid, std::vector<cplx> values);

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }
    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }

    bool finite() const;

private:
    GridPtr grid_;
    std::vector<cplx> values_;
};

/// Real scalar field on a Grid (noise increments, potentials, F_phi, ...).
class RealField {
public:
    RealField() = default;
    explicit RealField(GridPtr grid, double fill = 0.0);
    RealField(GridPtr grid, std::vector<double> values);

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    const double& operator[](std::size_t i) const { return values_[i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Rectangle-rule integral h^d * sum(f), spectrally accurate on the torus.
cplx integrate(const ComplexField& f);
double integrate(const RealField& f);

/// Continuum-normalized spectral coefficients f_hat(k) (approximates the
/// Fourier transform on the box); index order matches Grid spectral order.
std::vector<cplx> to_spectral(const ComplexField& f);
ComplexField from_spectral(const GridPtr& grid, const std::vector<cplx>& fhat);

/// Spectral gradient, one component per axis.  Nyquist modes are zeroed.
std::vector<ComplexField> gradient(const ComplexField& f);

/// Discrete H^s norm: sqrt( sum_k (1+|k|^2)^s |f_hat_k|^2 / (2L)^d ),
/// normalized so s = 0 reproduces the L^2 norm.
double h_norm(const ComplexField& f, double s);

/// Zero-padded spectral interpolation onto a finer grid with the same box.
/// Exact for band-limited fields; Nyquist coefficients are split between
/// the +-N/2 modes of the target grid to preserve realness.
ComplexField spectral_upsample(const ComplexField& f, int new_points_per_axis);

}  // namespace snls
