#include <doctest.h>

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "snls/config.hpp"
#include "snls/io.hpp"

using namespace snls;
using namespace snls::test;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("snls_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static inline int counter = 0;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
    Config cfg = Config::parse_string(
        "# comment\n"
        "grid.d = 1\n"
        "grid.L = 20.0\n"
        "  grid.N=512  \n"
        "\n"
        "noise.amplitude = 0.5\n"
        "run.seed = 18446744073709551615\n"
        "run.label = base run\n");
    CHECK(cfg.get_int("grid.d") == 1);
    CHECK(cfg.get_double("grid.L") == 20.0);
    CHECK(cfg.get_int("grid.N") == 512);
    CHECK(cfg.get_double("noise.amplitude") == 0.5);
    CHECK(cfg.get_u64("run.seed", 0) == 18446744073709551615ull);
    CHECK(cfg.get_string("run.label") == "base run");

    CHECK(cfg.has("grid.d"));
    CHECK_FALSE(cfg.has("grid.h"));
    CHECK(cfg.get_double("run.T", 1.5) == 1.5);
    CHECK(cfg.get_int("run.paths", 100) == 100);
    CHECK(cfg.get_string("noise.shape", "gaussian") == "gaussian");
    CHECK_THROWS_AS(cfg.get_string("missing.key"), std::runtime_error);

    try {
        Config::parse_string("a = 1\nnonsense\n");
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(Config::parse_string("= 3\n"), std::runtime_error);

    TempDir tmp;
    {
        std::ofstream out(tmp.file("run.cfg"));
        out << "model.sigma = 3\n";
    }
    CHECK(Config::parse_file(tmp.file("run.cfg")).get_int("model.sigma") == 3);
    CHECK_THROWS_AS(Config::parse_file(tmp.file("absent.cfg")), std::runtime_error);
}

TEST_CASE("field dump round trip") {
    TempDir tmp;
    auto g = Grid::make(1, 8.0, 64);
    ComplexField f = random_smooth_field(g, 17);
    write_field(f, tmp.file("u.bin"));
    ComplexField back = read_complex_field(tmp.file("u.bin"));
    CHECK(back.grid()->dim() == 1);
    CHECK(back.grid()->points_per_axis() == 64);
    CHECK(back.grid()->half_width() == 8.0);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == f[i]);

    // leading magic doubles as the byte-order mark
    std::ifstream in(tmp.file("u.bin"), std::ios::binary);
    std::uint32_t magic = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    CHECK(magic == 0x534E4C53u);

    // real dumps are refused by the complex reader
    RealField r(g, 1.0);
    write_field(r, tmp.file("r.bin"));
    CHECK_THROWS_AS(read_complex_field(tmp.file("r.bin")), std::runtime_error);

    // corrupted magic is rejected
    {
        std::fstream fix(tmp.file("u.bin"),
                         std::ios::in | std::ios::out | std::ios::binary);
        const std::uint32_t bad = 0xDEADBEEF;
        fix.write(reinterpret_cast<const char*>(&bad), sizeof(bad));
    }
    CHECK_THROWS_AS(read_complex_field(tmp.file("u.bin")), std::runtime_error);
    CHECK_THROWS_AS(read_complex_field(tmp.file("missing.bin")), std::runtime_error);
}

TEST_CASE("trajectory csv") {
    TempDir tmp;
    Trajectory traj;
    traj.records.push_back({0.0, 1.0, 0.5, 0.0, 2.0, 1.5, 0.0, 0.0});
    traj.records.push_back({0.125, 1.0, 0.25, -0.5, 2.25, 1.75, 0.0, 0.0});
    traj.verdict = Verdict::detected;
    traj.tau_star = 0.125;
    write_trajectory_csv(traj, tmp.file("trajectory.csv"));

    const std::string text = slurp(tmp.file("trajectory.csv"));
    CHECK(text.find("t,M,H,G,V,h1,boundary_mass_fraction") == 0);
    CHECK(text.find("# verdict=detected,tau_star=0.125") != std::string::npos);

    traj.verdict = Verdict::none;
    write_trajectory_csv(traj, tmp.file("clean.csv"));
    CHECK(slurp(tmp.file("clean.csv")).find("# verdict=none") != std::string::npos);
}

TEST_CASE("ensemble and verdict csv") {
    TempDir tmp;
    EnsembleStats stats;
    stats.times = {0.0, 0.25};
    stats.mean_m = {1.0, 1.0};
    stats.se_m = {0.0, 0.0};
    stats.mean_h = {0.5, 0.75};
    stats.se_h = {0.0, 0.0625};
    stats.mean_g = {0.0, 0.0};
    stats.se_g = {0.0, 0.0};
    stats.mean_v = {2.0, 2.25};
    stats.se_v = {0.0, 0.03125};
    stats.mean_lp = {0.75, 0.875};
    stats.verdicts = {Verdict::none, Verdict::detected, Verdict::under_resolved};
    stats.tau_stars = {0.0, 0.0625, 0.0};
    stats.paths = 3;

    write_ensemble_csv(stats, tmp.file("ensemble_stats.csv"));
    const std::string text = slurp(tmp.file("ensemble_stats.csv"));
    CHECK(text.find("t,meanM,seM,meanH,seH,meanG,seG,meanV,seV,meanL2s2") == 0);
    CHECK(text.find("0.25,1,0,0.75,0.0625,0,0,2.25,0.03125,0.875") !=
          std::string::npos);

    write_verdicts_csv(stats, tmp.file("verdicts.csv"));
    const std::string v = slurp(tmp.file("verdicts.csv"));
    CHECK(v.find("path,verdict,tau_star") == 0);
    CHECK(v.find("0,none,") != std::string::npos);
    CHECK(v.find("1,detected,0.0625") != std::string::npos);
    CHECK(v.find("2,under_resolved,") != std::string::npos);
}

TEST_CASE("control result directory") {
    TempDir tmp;
    auto g = Grid::make(1, 8.0, 32);
    ControlResult ctrl;
    ctrl.lambda = 4.0;
    ctrl.sigma_tilde = 2.5;
    ctrl.t2 = 0.02;
    ctrl.dt = 0.01;
    ctrl.m_bar = 5.0;
    ctrl.h_bar = 2.0;
    ctrl.f = TabulatedPotential({0.005, 0.015},
                                {RealField(g, 1.0), RealField(g, 2.0)});
    ctrl.u_t2 = gaussian(g);
    ctrl.certificate = {0.02, 1.7, -2.5, 0.0, 0.9, 3.0, 0.0, 0.0};
    ctrl.history = {{0.0, 0.0, 0.3}, {0.01, 1.0, -1.0}, {0.02, 2.0, -2.5}};

    const std::string dir = tmp.file("control");
    write_control_result(ctrl, dir);
    CHECK(slurp(dir + "/control.csv").find("t,lambda_term_norm,H") == 0);
    CHECK(slurp(dir + "/certificate.csv").find("t2,lambda,sigma_tilde") == 0);
    CHECK(fs::exists(dir + "/f/f_000000.bin"));
    CHECK(fs::exists(dir + "/f/f_000001.bin"));
    ComplexField u = read_complex_field(dir + "/u_t2.bin");
    CHECK(l2_distance(u, ctrl.u_t2) == 0.0);
}

TEST_CASE("svg chart") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("data.csv"));
        out << "t,y\n0,1\n1,3\n2,2\n# footer\n";
    }
    write_svg_line_chart(tmp.file("data.csv"), 1, "demo", tmp.file("plot.svg"));
    const std::string svg = slurp(tmp.file("plot.svg"));
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("demo") != std::string::npos);

    CHECK_THROWS_AS(write_svg_line_chart(tmp.file("absent.csv"), 1, "x",
                                         tmp.file("o.svg")),
                    std::runtime_error);
    {
        std::ofstream out(tmp.file("empty.csv"));
        out << "t,y\n";
    }
    CHECK_THROWS_AS(write_svg_line_chart(tmp.file("empty.csv"), 1, "x",
                                         tmp.file("o.svg")),
                    std::runtime_error);
}
