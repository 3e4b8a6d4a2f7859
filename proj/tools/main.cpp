// Command-line front end: simulate / ensemble / control / two-phase /
// verify / plot, driven by a flat key = value config file.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "snls/config.hpp"
#include "snls/control.hpp"
#include "snls/diagnostics.hpp"
#include "snls/dynamics.hpp"
#include "snls/ensemble.hpp"
#include "snls/grid.hpp"
#include "snls/io.hpp"
#include "snls/noise.hpp"

using namespace snls;

namespace {

struct Problem {
    GridPtr grid;
    ComplexField u0;
    std::unique_ptr<CovarianceOperator> op;  // null when noise.amplitude = 0
    ModelSpec spec;
    double sigma = 1.0;
    double sigma_tilde = 0.0;

    EvolveOptions evolve_options;
    EnsembleOptions ensemble_options;
    std::uint64_t seed = 0;
};

Problem load_problem(const Config& cfg) {
    Problem p;
    const int d = cfg.get_int("grid.d", 1);
    const double L = cfg.get_double("grid.L", 10.0);
    const int n = cfg.get_int("grid.N", 256);
    p.grid = Grid::make(d, L, n);

    const double amp = cfg.get_double("model.init_amplitude", 1.0);
    const double width = cfg.get_double("model.init_width", 1.0);
    const double chirp = cfg.get_double("model.init_chirp", 0.0);
    p.u0 = ComplexField(p.grid);
    for (std::size_t i = 0; i < p.grid->size(); ++i) {
        const double r2 = p.grid->node_radius_sq(i);
        p.u0[i] = amp * std::exp(-r2 / (2.0 * width * width)) *
                  std::polar(1.0, 0.5 * chirp * r2);
    }

    const double noise_amp = cfg.get_double("noise.amplitude", 0.0);
    const std::string shape = cfg.get_string("noise.shape", "gaussian");
    if (shape != "gaussian")
        throw std::runtime_error("unknown noise.shape: " + shape);
    if (noise_amp > 0.0) {
        KernelSpec kernel{KernelSpec::Shape::gaussian, noise_amp,
                          cfg.get_double("noise.width", 1.0)};
        p.op = std::make_unique<CovarianceOperator>(kernel, p.grid);
    }

    p.sigma = cfg.get_double("model.sigma", 1.0);
    p.sigma_tilde =
        cfg.get_double("model.sigma_tilde", (2.0 / d + p.sigma) / 2.0);
    p.spec.sigma = p.sigma;
    p.spec.noise = p.op.get();
    const double lambda = cfg.get_double("model.lambda", 0.0);
    if (lambda > 0.0) p.spec.aux = AuxTerm{p.sigma_tilde, lambda};
    const double trunc = cfg.get_double("model.truncation_level", 0.0);
    if (trunc > 0.0)
        p.spec.truncation =
            TruncationParams{trunc, cfg.get_double("model.truncation_s0", 1.75)};

    p.seed = cfg.get_u64("run.seed", 0);
    EvolveOptions& eo = p.evolve_options;
    eo.horizon = cfg.get_double("run.T", 1.0);
    eo.dt = cfg.get_double("run.dt", 1e-3);
    eo.sample_every = cfg.get_int("run.sample_every", 1);
    eo.detector.h1_growth_factor = cfg.get_double("run.h1_growth_factor", 100.0);
    eo.detector.tail_threshold = cfg.get_double("run.tail_threshold", 0.1);

    EnsembleOptions& en = p.ensemble_options;
    en.horizon = eo.horizon;
    en.dt = eo.dt;
    en.sample_every = eo.sample_every;
    en.detector = eo.detector;
    en.paths = cfg.get_int("run.paths", 100);
    en.master_seed = p.seed;
    en.parallel = cfg.get_int("run.serial", 0) == 0;
    return p;
}

std::string out_file(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / name).string();
}

int cmd_simulate(const Config& cfg, const std::string& out_dir) {
    Problem p = load_problem(cfg);
    RngStream rng = RngStream::derived(p.seed, 0);
    Trajectory traj =
        cfg.get_int("run.confirm", 0) != 0
            ? evolve_confirmed(p.u0, p.spec, p.evolve_options, rng)
            : evolve(p.u0, p.spec, p.evolve_options, rng);
    write_trajectory_csv(traj, out_file(out_dir, "trajectory.csv"));
    write_field(traj.final_field, out_file(out_dir, "u_final.bin"));
    std::cout << "verdict: " << verdict_name(traj.verdict);
    if (traj.verdict == Verdict::detected) std::cout << "  tau* = " << traj.tau_star;
    std::cout << "\nwrote " << out_file(out_dir, "trajectory.csv") << '\n';
    return 0;
}

int cmd_ensemble(const Config& cfg, const std::string& out_dir) {
    Problem p = load_problem(cfg);
    EnsembleStats stats = run_ensemble(p.u0, p.spec, p.ensemble_options);
    write_ensemble_csv(stats, out_file(out_dir, "ensemble_stats.csv"));
    write_verdicts_csv(stats, out_file(out_dir, "verdicts.csv"));
    int detected = 0;
    for (Verdict v : stats.verdicts)
        if (v == Verdict::detected) ++detected;
    std::cout << stats.paths << " paths: " << detected << " detected, "
              << stats.under_resolved << " under-resolved\n"
              << "wrote " << out_file(out_dir, "ensemble_stats.csv") << '\n';
    return 0;
}

ControlResult run_control(const Config& cfg, const Problem& p) {
    const double t1 = cfg.get_double("run.t1", 1.0);
    const double m_bar = cfg.get_double("run.m_bar", default_m_bar(p.u0));
    const double h_bar = cfg.get_double("run.h_bar", 10.0);
    return construct_control(p.u0, p.sigma, p.sigma_tilde, t1, m_bar, h_bar,
                             p.evolve_options.dt);
}

int cmd_control(const Config& cfg, const std::string& out_dir) {
    Problem p = load_problem(cfg);
    ControlResult ctrl = run_control(cfg, p);
    write_control_result(ctrl, out_dir);
    std::cout << "lambda = " << ctrl.lambda << "  T2 = " << ctrl.t2
              << "  H(U(T2)) = " << ctrl.certificate.energy << '\n'
              << "wrote " << out_dir << "/control.csv\n";
    return 0;
}

int cmd_two_phase(const Config& cfg, const std::string& out_dir) {
    Problem p = load_problem(cfg);
    if (!p.op) throw std::runtime_error("two-phase: noise.amplitude must be > 0");
    ControlResult ctrl = run_control(cfg, p);
    write_control_result(ctrl, out_dir);

    const DiagnosticsRecord& c = ctrl.certificate;
    const double bound = blowup_time_bound(c.variance, c.momentum, c.energy);
    const double t2 = cfg.get_double("run.t2", 1.2 * bound);
    std::cout << "T2 = " << ctrl.t2 << "  envelope bound = " << bound
              << "  horizon t2 = " << t2 << '\n';

    const int paths = p.ensemble_options.paths;
    EnsembleStats stats;
    stats.paths = paths;
    stats.horizon = t2;
    Trajectory first;
    for (int path = 0; path < paths; ++path) {
        RngStream rng = RngStream::derived(p.seed, path);
        Trajectory traj = two_phase_run(ctrl, *p.op, p.sigma, t2,
                                        p.evolve_options.dt, rng,
                                        p.evolve_options.detector);
        stats.verdicts.push_back(traj.verdict);
        stats.tau_stars.push_back(
            traj.verdict == Verdict::detected ? traj.tau_star : 0.0);
        if (path == 0) first = std::move(traj);
    }
    write_verdicts_csv(stats, out_file(out_dir, "verdicts.csv"));
    write_trajectory_csv(first, out_file(out_dir, "trajectory.csv"));

    ProbabilityEstimate est = estimate_blowup_probability(stats, t2);
    std::cout << est.detections << "/" << paths
              << " detected before T2 + t2; p = " << est.p << "  95% CI = ["
              << est.lower << ", " << est.upper << "]\n";
    return 0;
}

// --- verify suites: each returns pass/fail plus a one-line detail. ---

struct SuiteResult {
    bool pass = false;
    std::string detail;
};

SuiteResult verify_mass(const Config& cfg) {
    Problem p = load_problem(cfg);
    RngStream rng = RngStream::derived(p.seed, 0);
    Trajectory traj = evolve(p.u0, p.spec, p.evolve_options, rng);
    double drift = 0.0;
    for (const DiagnosticsRecord& r : traj.records)
        drift = std::max(drift, std::abs(r.mass - traj.records.front().mass));
    const double tol = cfg.get_double("run.tol", 1e-10);
    return {drift < tol, "max mass drift " + std::to_string(drift)};
}

SuiteResult verify_variance(const Config& cfg) {
    Problem p = load_problem(cfg);
    const double dt = p.evolve_options.dt;
    const int steps =
        2 * static_cast<int>(std::llround(p.evolve_options.horizon / dt));

    // Shared Brownian realization at dt/2; summed pairs give the dt path.
    RngStream rng = RngStream::derived(p.seed, 0);
    NoisePath fine, coarse;
    const NoisePath* fine_ptr = nullptr;
    const NoisePath* coarse_ptr = nullptr;
    if (p.op) {
        fine = sample_path(*p.op, 0.5 * dt, steps, rng);
        coarse = coarsen_path(fine);
        fine_ptr = &fine;
        coarse_ptr = &coarse;
    }
    Trajectory traj_c = evolve(p.u0, p.spec, p.evolve_options, rng, coarse_ptr);
    EvolveOptions halved = p.evolve_options;
    halved.dt = 0.5 * dt;
    halved.sample_every = 2 * p.evolve_options.sample_every;
    Trajectory traj_f = evolve(p.u0, p.spec, halved, rng, fine_ptr);

    const double r_c = std::abs(check_variance_identity(traj_c));
    const double r_f = std::abs(check_variance_identity(traj_f));
    const double floor = 1e-12;
    const bool halves = r_f <= 0.65 * r_c || r_c < floor;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "residual %.3e -> %.3e at dt/2", r_c, r_f);
    return {halves, buf};
}

// Scheme bias baseline: the same residual with the noise switched off.
double deterministic_energy_bias(const Problem& p) {
    ModelSpec det = p.spec;
    det.noise = nullptr;
    EnsembleOptions opts = p.ensemble_options;
    opts.paths = 2;
    EnsembleStats flat = run_ensemble(p.u0, det, opts);
    double worst = 0.0;
    for (std::size_t i = 0; i < flat.times.size(); ++i)
        worst = std::max(worst, std::abs(flat.mean_h[i] - flat.mean_h.front()));
    return worst;
}

SuiteResult verify_energy(const Config& cfg) {
    Problem p = load_problem(cfg);
    if (!p.op) return {false, "noise.amplitude must be > 0"};
    const double bias = 2.0 * deterministic_energy_bias(p) + 1e-10;
    EnsembleStats stats = run_ensemble(p.u0, p.spec, p.ensemble_options);
    IdentityCheck check = check_energy_identity(stats, *p.op, bias);
    double worst = 0.0;
    for (double r : check.residual) worst = std::max(worst, std::abs(r));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max residual %.3e (allowance 3 SE + %.3e)",
                  worst, bias);
    return {check.pass, buf};
}

SuiteResult verify_momentum(const Config& cfg) {
    Problem p = load_problem(cfg);
    const double bias = cfg.get_double("run.bias", 1e-4);
    EnsembleStats stats = run_ensemble(p.u0, p.spec, p.ensemble_options);
    IdentityCheck check = check_momentum_identity(stats, p.sigma, bias);
    double worst = 0.0;
    for (double r : check.residual) worst = std::max(worst, std::abs(r));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max residual %.3e (allowance 3 SE + %.3e)",
                  worst, bias);
    return {check.pass, buf};
}

SuiteResult verify_linear(const Config& cfg) {
    Problem p = load_problem(cfg);
    ModelSpec lin = p.spec;
    lin.primary_coeff = 0.0;
    lin.noise = nullptr;
    lin.aux.reset();

    double grad2 = 0.0;
    for (const ComplexField& comp : gradient(p.u0))
        for (const cplx& v : comp.values()) grad2 += std::norm(v);
    grad2 *= p.grid->cell_volume();
    const double v0 = variance(p.u0);
    const double g0 = momentum(p.u0);

    RngStream rng = RngStream::derived(p.seed, 0);
    Trajectory traj = evolve(p.u0, lin, p.evolve_options, rng);
    double worst = 0.0;
    for (const DiagnosticsRecord& r : traj.records) {
        const double expected = v0 + 4.0 * g0 * r.t + 4.0 * grad2 * r.t * r.t;
        worst = std::max(worst, std::abs(r.variance - expected));
    }
    const double tol = cfg.get_double("run.tol", 1e-6);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max deviation %.3e (tol %.1e)", worst, tol);
    return {worst < tol, buf};
}

SuiteResult verify_theorem41(const Config& cfg) {
    Problem p = load_problem(cfg);
    if (!p.op) return {false, "noise.amplitude must be > 0"};
    const double tbar = cfg.get_double("run.tbar", p.ensemble_options.horizon);
    EnsembleStats stats = run_ensemble(p.u0, p.spec, p.ensemble_options);
    Theorem41Verdict v = check_theorem41(stats, *p.op, tbar);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "criterion %.4f%s, detections %d/%d, p = %.3f, CI [%.3f, %.3f]",
                  v.criterion_value, v.applicable ? "" : " (not applicable)",
                  v.probability.detections, stats.paths, v.probability.p,
                  v.probability.lower, v.probability.upper);
    return {v.pass, buf};
}

SuiteResult verify_control(const Config& cfg) {
    Problem p = load_problem(cfg);
    ControlResult ctrl = run_control(cfg, p);

    // Replay the full equation driven by the recorded potential.
    ModelSpec replay;
    replay.sigma = p.sigma;
    replay.potential = &ctrl.f;
    ComplexField u = p.u0;
    const std::size_t steps =
        static_cast<std::size_t>(std::llround(ctrl.t2 / ctrl.dt));
    for (std::size_t k = 0; k < steps; ++k)
        u = strang_step(u, ctrl.dt, replay, k * ctrl.dt, nullptr);
    double err2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) err2 += std::norm(u[i] - ctrl.u_t2[i]);
    const double err = std::sqrt(err2 * p.grid->cell_volume());

    const bool admissible =
        in_admissible_set(ctrl.u_t2, p.sigma, ctrl.m_bar, ctrl.h_bar);
    const double tol = cfg.get_double("run.tol", 1e-6);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "T2 = %.4f, H = %.2f, replay error %.3e (tol %.1e), admissible %s",
                  ctrl.t2, ctrl.certificate.energy, err, tol,
                  admissible ? "yes" : "no");
    return {err < tol && admissible, buf};
}

int cmd_verify(const Config& cfg, const std::string& suite,
               const std::string& out_dir) {
    SuiteResult result;
    if (suite == "mass") result = verify_mass(cfg);
    else if (suite == "variance") result = verify_variance(cfg);
    else if (suite == "energy") result = verify_energy(cfg);
    else if (suite == "momentum") result = verify_momentum(cfg);
    else if (suite == "linear") result = verify_linear(cfg);
    else if (suite == "theorem41") result = verify_theorem41(cfg);
    else if (suite == "control") result = verify_control(cfg);
    else throw std::runtime_error("unknown suite: " + suite);

    const std::string line =
        suite + ": " + (result.pass ? "PASS" : "FAIL") + " (" + result.detail + ")";
    std::ofstream report(out_file(out_dir, "report.txt"), std::ios::app);
    report << line << '\n';
    std::cout << line << '\n';
    return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral simulator for the stochastic focusing NLS equation"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", suite;
    std::string csv_path, title = "series", plot_out = "plot.svg";
    int column = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key = value config file")
            ->required();
        cmd->add_option("--out", out_dir, "output directory");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "single trajectory");
    add_common(simulate);
    CLI::App* ensemble = app.add_subcommand("ensemble", "Monte Carlo ensemble");
    add_common(ensemble);
    CLI::App* control = app.add_subcommand("control", "control construction");
    add_common(control);
    CLI::App* two_phase =
        app.add_subcommand("two-phase", "control, then noisy continuation");
    add_common(two_phase);
    CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
    add_common(verify);
    verify
        ->add_option("--suite", suite,
                     "mass|variance|energy|momentum|linear|theorem41|control")
        ->required();
    CLI::App* plot = app.add_subcommand("plot", "CSV column to SVG line chart");
    plot->add_option("--csv", csv_path, "input CSV")->required();
    plot->add_option("--column", column, "column index (0 = time axis)");
    plot->add_option("--title", title, "chart title");
    plot->add_option("--out", plot_out, "output SVG path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (plot->parsed()) {
            write_svg_line_chart(csv_path, column, title, plot_out);
            std::cout << "wrote " << plot_out << '\n';
            return 0;
        }
        const Config cfg = Config::parse_file(config_path);
        if (simulate->parsed()) return cmd_simulate(cfg, out_dir);
        if (ensemble->parsed()) return cmd_ensemble(cfg, out_dir);
        if (control->parsed()) return cmd_control(cfg, out_dir);
        if (two_phase->parsed()) return cmd_two_phase(cfg, out_dir);
        if (verify->parsed()) return cmd_verify(cfg, suite, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
