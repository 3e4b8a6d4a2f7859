#pragma once

#include <vector>

#include "snls/dynamics.hpp"

namespace snls {

/// Output of the control-potential construction: an auxiliary coupling,
/// a switch time T2, the potential driving the state there, and the
/// certified state U(T2) with very negative energy.
struct ControlResult {
    double lambda = 0.0;
    double sigma_tilde = 0.0;
    double t2 = 0.0;
    TabulatedPotential f;      // lambda |U|^{2s~} - |U|^{2s} at substep midpoints
    ComplexField u_t2;
    DiagnosticsRecord certificate;
    double m_bar = 0.0;
    double h_bar = 0.0;
    double dt = 0.0;
    // (t, L2 norm of the lambda-term, H(U(t))) along the controlled flow.
    std::vector<std::array<double, 3>> history;
};

/// Coupling for the auxiliary supercritical flow, chosen with a 5% margin
/// above the smallest value making the auxiliary energy beat
/// -(1/(8 T1^2)) (V + 4 T1 |G|).  T1 > 1 is clamped to 1.
double choose_lambda(const ComplexField& u0, double sigma_tilde, double t1);

/// Smallest nonnegative root of 8 Haux t^2 + 4 G0 t + V0 = 0 -- the time
/// by which the variance envelope reaches zero, so existence must fail.
double blowup_time_bound(double v0, double g0, double h_aux);

/// Evolve the auxiliary flow until the true energy drops below -Hbar,
/// recording the control potential along the way.
ControlResult construct_control(const ComplexField& u0, double sigma,
                                double sigma_tilde, double t1, double m_bar,
                                double h_bar, double dt);

/// Standard admissibility bound max(M + 1, V + 4|G| + 1) for u0.
double default_m_bar(const ComplexField& u0);

/// Noisy continuation from the certified state: evolve U(T2) under the
/// full model for horizon t2.  Times in the returned trajectory are
/// measured from the switch.
Trajectory two_phase_run(const ControlResult& ctrl, const CovarianceOperator& op,
                         double sigma, double t2, double dt, RngStream& rng,
                         const BlowupDetectorParams& detector = {});

}  // namespace snls
