#pragma once

#include "snls/grid.hpp"

namespace snls {

/// One row of trajectory diagnostics.
struct DiagnosticsRecord {
    double t = 0.0;
    double mass = 0.0;
    double energy = 0.0;
    double momentum = 0.0;
    double variance = 0.0;
    double h1 = 0.0;
    double boundary_mass_fraction = 0.0;
    // L^{2 sigma + 2} norm to the power 2 sigma + 2; carried for the
    // momentum identity, not part of the CSV row.
    double lp_power = 0.0;
};

double mass(const ComplexField& u);

/// H(u) = 1/2 |grad u|^2 - 1/(2s+2) |u|_{L^{2s+2}}^{2s+2}
double energy(const ComplexField& u, double sigma);

/// G(u) = Im int u x . grad(conj u) dx
double momentum(const ComplexField& u);

/// V(u) = int |x|^2 |u|^2 dx, x measured from the box center.
double variance(const ComplexField& u);

/// V_eps(u) = int e^{-eps |x|^2} |x|^2 |u|^2 dx
double truncated_variance(const ComplexField& u, double eps);

/// Energy of the auxiliary flow with coupling lambda on the
/// |u|^{2 sigma_tilde} nonlinearity.
double aux_energy(const ComplexField& u, double sigma_tilde, double lambda);

/// |u|^p_{L^p} with p = 2 sigma + 2.
double lp_power(const ComplexField& u, double sigma);

/// Sigma-norm sqrt(|u|_{H^1}^2 + V(u)).
double sigma_norm(const ComplexField& u);

/// Mass in the outer 10% shell of the box over total mass.  Diagnostics
/// are unreliable once this exceeds ~1e-6.
double boundary_mass_fraction(const ComplexField& u);

/// V + 4 G tbar + 8 H tbar^2 + (4/3) tbar^3 m_phi M.  Strictly negative
/// value signals the blow-up criterion.
double blowup_functional(double mass, double energy, double momentum,
                         double variance, double m_phi, double tbar);

/// Strict-inequality membership in the admissible set:
/// V < Mbar, G < Mbar, M < Mbar, H < -Hbar.
bool in_admissible_set(const ComplexField& u, double sigma, double m_bar, double h_bar);

DiagnosticsRecord make_record(const ComplexField& u, double t, double sigma);

}  // namespace snls
