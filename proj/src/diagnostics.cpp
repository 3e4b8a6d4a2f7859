#include "snls/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace snls {

double mass(const ComplexField& u) {
    double s = 0.0;
    for (const cplx& v : u.values()) s += std::norm(v);
    return s * u.grid()->cell_volume();
}

double lp_power(const ComplexField& u, double sigma) {
    const double p = 2.0 * sigma + 2.0;
    double s = 0.0;
    for (const cplx& v : u.values()) s += std::pow(std::abs(v), p);
    return s * u.grid()->cell_volume();
}

double energy(const ComplexField& u, double sigma) {
    if (sigma <= 0.0)
        throw std::invalid_argument("energy: nonlinearity exponent must be positive");
    double grad2 = 0.0;
    for (const ComplexField& comp : gradient(u))
        for (const cplx& v : comp.values()) grad2 += std::norm(v);
    grad2 *= u.grid()->cell_volume();
    return 0.5 * grad2 - lp_power(u, sigma) / (2.0 * sigma + 2.0);
}

double momentum(const ComplexField& u) {
    const Grid& g = *u.grid();
    const std::vector<ComplexField> grad = gradient(u);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx dot{0.0, 0.0};
        for (int a = 0; a < g.dim(); ++a)
            dot += g.node_coord(i, a) * std::conj(grad[a][i]);
        s += (u[i] * dot).imag();
    }
    return s * g.cell_volume();
}

double variance(const ComplexField& u) {
    const Grid& g = *u.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        s += g.node_radius_sq(i) * std::norm(u[i]);
    return s * g.cell_volume();
}

double truncated_variance(const ComplexField& u, double eps) {
    if (eps < 0.0)
        throw std::invalid_argument("truncated_variance: eps must be nonnegative");
    const Grid& g = *u.grid();
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r2 = g.node_radius_sq(i);
        s += std::exp(-eps * r2) * r2 * std::norm(u[i]);
    }
    return s * g.cell_volume();
}

double aux_energy(const ComplexField& u, double sigma_tilde, double lambda) {
    if (sigma_tilde <= 0.0)
        throw std::invalid_argument("aux_energy: exponent must be positive");
    if (lambda < 0.0)
        throw std::invalid_argument("aux_energy: coupling must be nonnegative");
    double grad2 = 0.0;
    for (const ComplexField& comp : gradient(u))
        for (const cplx& v : comp.values()) grad2 += std::norm(v);
    grad2 *= u.grid()->cell_volume();
    return 0.5 * grad2 - lambda * lp_power(u, sigma_tilde) / (2.0 * sigma_tilde + 2.0);
}

double sigma_norm(const ComplexField& u) {
    const double h1 = h_norm(u, 1.0);
    return std::sqrt(h1 * h1 + variance(u));
}

double boundary_mass_fraction(const ComplexField& u) {
    const Grid& g = *u.grid();
    const double edge = 0.9 * g.half_width();
    double outer = 0.0, total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double m = std::norm(u[i]);
        total += m;
        bool in_shell = false;
        for (int a = 0; a < g.dim(); ++a)
            if (std::abs(g.node_coord(i, a)) >= edge) in_shell = true;
        if (in_shell) outer += m;
    }
    return total > 0.0 ? outer / total : 0.0;
}

double blowup_functional(double mass, double energy, double momentum,
                         double variance, double m_phi, double tbar) {
    return variance + 4.0 * momentum * tbar + 8.0 * energy * tbar * tbar +
           (4.0 / 3.0) * tbar * tbar * tbar * m_phi * mass;
}

bool in_admissible_set(const ComplexField& u, double sigma, double m_bar, double h_bar) {
    if (m_bar <= 0.0 || h_bar <= 0.0)
        throw std::invalid_argument("in_admissible_set: bounds must be positive");
    return variance(u) < m_bar && momentum(u) < m_bar && mass(u) < m_bar &&
           energy(u, sigma) < -h_bar;
}

DiagnosticsRecord make_record(const ComplexField& u, double t, double sigma) {
    DiagnosticsRecord r;
    r.t = t;
    r.mass = mass(u);
    r.energy = energy(u, sigma);
    r.momentum = momentum(u);
    r.variance = variance(u);
    r.h1 = h_norm(u, 1.0);
    r.boundary_mass_fraction = boundary_mass_fraction(u);
    r.lp_power = lp_power(u, sigma);
    return r;
}

}  // namespace snls
