#pragma once

#include <string>

#include "snls/control.hpp"
#include "snls/dynamics.hpp"
#include "snls/ensemble.hpp"

namespace snls {

/// trajectory.csv: one diagnostics row per sample time plus a footer row
/// carrying the verdict and tau*.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// ensemble_stats.csv: t, meanM, seM, meanH, seH, meanG, seG, meanV, seV,
/// meanL2s2.
void write_ensemble_csv(const EnsembleStats& stats, const std::string& path);

/// verdicts.csv: path, verdict, tau_star.
void write_verdicts_csv(const EnsembleStats& stats, const std::string& path);

/// Binary field dump: magic 0x534E4C53, version, d, N, L, kind, payload.
void write_field(const ComplexField& f, const std::string& path);
void write_field(const RealField& f, const std::string& path);
ComplexField read_complex_field(const std::string& path);

/// ControlResult directory: control.csv, certificate.csv, f/ field dumps.
void write_control_result(const ControlResult& ctrl, const std::string& dir);

/// Minimal SVG line chart of one column of a CSV against its first column.
void write_svg_line_chart(const std::string& csv_path, int column,
                          const std::string& title, const std::string& out_path);

const char* verdict_name(Verdict v);

}  // namespace snls
