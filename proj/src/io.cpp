#include "snls/io.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace snls {

namespace {

constexpr std::uint32_t kMagic = 0x534E4C53;  // "SNLS"; doubles as byte-order mark
constexpr std::uint32_t kVersion = 1;

std::ofstream open_out(const std::string& path, std::ios::openmode mode = {}) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.precision(17);
    return out;
}

void write_header(std::ofstream& out, const Grid& g, std::uint32_t kind) {
    const std::uint32_t d = g.dim();
    const std::uint32_t n = g.points_per_axis();
    const double L = g.half_width();
    out.write(reinterpret_cast<const char*>(&kMagic), sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(&L), sizeof(L));
    out.write(reinterpret_cast<const char*>(&kind), sizeof(kind));
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::none: return "none";
        case Verdict::detected: return "detected";
        case Verdict::under_resolved: return "under_resolved";
    }
    return "unknown";
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t,M,H,G,V,h1,boundary_mass_fraction\n";
    for (const DiagnosticsRecord& r : traj.records)
        out << r.t << ',' << r.mass << ',' << r.energy << ',' << r.momentum << ','
            << r.variance << ',' << r.h1 << ',' << r.boundary_mass_fraction << '\n';
    out << "# verdict=" << verdict_name(traj.verdict);
    if (traj.verdict == Verdict::detected) out << ",tau_star=" << traj.tau_star;
    out << '\n';
}

void write_ensemble_csv(const EnsembleStats& stats, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "t,meanM,seM,meanH,seH,meanG,seG,meanV,seV,meanL2s2\n";
    for (std::size_t i = 0; i < stats.times.size(); ++i)
        out << stats.times[i] << ',' << stats.mean_m[i] << ',' << stats.se_m[i] << ','
            << stats.mean_h[i] << ',' << stats.se_h[i] << ',' << stats.mean_g[i] << ','
            << stats.se_g[i] << ',' << stats.mean_v[i] << ',' << stats.se_v[i] << ','
            << stats.mean_lp[i] << '\n';
}

void write_verdicts_csv(const EnsembleStats& stats, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "path,verdict,tau_star\n";
    for (std::size_t p = 0; p < stats.verdicts.size(); ++p) {
        out << p << ',' << verdict_name(stats.verdicts[p]) << ',';
        if (stats.verdicts[p] == Verdict::detected) out << stats.tau_stars[p];
        out << '\n';
    }
}

void write_field(const ComplexField& f, const std::string& path) {
    std::ofstream out = open_out(path, std::ios::binary);
    write_header(out, *f.grid(), 1);
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(cplx)));
}

void write_field(const RealField& f, const std::string& path) {
    std::ofstream out = open_out(path, std::ios::binary);
    write_header(out, *f.grid(), 0);
    out.write(reinterpret_cast<const char*>(f.values().data()),
              static_cast<std::streamsize>(f.size() * sizeof(double)));
}

ComplexField read_complex_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::uint32_t magic = 0, version = 0, d = 0, n = 0, kind = 0;
    double L = 0.0;
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    if (magic != kMagic)
        throw std::runtime_error("field file: bad magic or byte order: " + path);
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&d), sizeof(d));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    in.read(reinterpret_cast<char*>(&L), sizeof(L));
    in.read(reinterpret_cast<char*>(&kind), sizeof(kind));
    if (kind != 1) throw std::runtime_error("field file: not a complex field: " + path);
    GridPtr grid = Grid::make(static_cast<int>(d), L, static_cast<int>(n));
    std::vector<cplx> values(grid->size());
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(cplx)));
    if (!in) throw std::runtime_error("field file: truncated payload: " + path);
    return ComplexField(grid, std::move(values));
}

void write_control_result(const ControlResult& ctrl, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream out = open_out(dir + "/control.csv");
        out << "t,lambda_term_norm,H\n";
        for (const auto& row : ctrl.history)
            out << row[0] << ',' << row[1] << ',' << row[2] << '\n';
    }
    {
        std::ofstream out = open_out(dir + "/certificate.csv");
        const DiagnosticsRecord& c = ctrl.certificate;
        out << "t2,lambda,sigma_tilde,M,H,G,V,h1,M_bar,H_bar\n";
        out << ctrl.t2 << ',' << ctrl.lambda << ',' << ctrl.sigma_tilde << ','
            << c.mass << ',' << c.energy << ',' << c.momentum << ',' << c.variance
            << ',' << c.h1 << ',' << ctrl.m_bar << ',' << ctrl.h_bar << '\n';
    }
    fs::create_directories(dir + "/f");
    char name[64];
    for (std::size_t i = 0; i < ctrl.f.size(); ++i) {
        std::snprintf(name, sizeof(name), "/f/f_%06zu.bin", i);
        write_field(ctrl.f.fields()[i], dir + name);
    }
    if (ctrl.u_t2.grid()) write_field(ctrl.u_t2, dir + "/u_t2.bin");
}

void write_svg_line_chart(const std::string& csv_path, int column,
                          const std::string& title, const std::string& out_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open csv: " + csv_path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string cell;
        double x = 0.0, y = 0.0;
        bool ok = false;
        for (int c = 0; std::getline(row, cell, ','); ++c) {
            if (c == 0) x = std::stod(cell);
            if (c == column) {
                y = std::stod(cell);
                ok = true;
            }
        }
        if (ok) {
            xs.push_back(x);
            ys.push_back(y);
        }
    }
    if (xs.empty()) throw std::runtime_error("csv has no data rows: " + csv_path);

    double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
    for (std::size_t i = 1; i < xs.size(); ++i) {
        xmin = std::min(xmin, xs[i]);
        xmax = std::max(xmax, xs[i]);
        ymin = std::min(ymin, ys[i]);
        ymax = std::max(ymax, ys[i]);
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    const double W = 720, H = 480, m = 60;
    std::ofstream out = open_out(out_path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>"
        << title << "</text>\n"
        << "<line x1='" << m << "' y1='" << H - m << "' x2='" << W - m << "' y2='"
        << H - m << "' stroke='black'/>\n"
        << "<line x1='" << m << "' y1='" << m << "' x2='" << m << "' y2='" << H - m
        << "' stroke='black'/>\n"
        << "<text x='" << m << "' y='" << H - m + 20 << "' font-size='12'>" << xmin
        << "</text>\n<text x='" << W - m << "' y='" << H - m + 20
        << "' text-anchor='end' font-size='12'>" << xmax << "</text>\n"
        << "<text x='" << m - 6 << "' y='" << H - m << "' text-anchor='end' font-size='12'>"
        << ymin << "</text>\n<text x='" << m - 6 << "' y='" << m
        << "' text-anchor='end' font-size='12'>" << ymax << "</text>\n<polyline fill='none' "
        << "stroke='steelblue' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = m + (xs[i] - xmin) / (xmax - xmin) * (W - 2 * m);
        const double py = H - m - (ys[i] - ymin) / (ymax - ymin) * (H - 2 * m);
        out << px << ',' << py << ' ';
    }
    out << "'/>\n</svg>\n";
}

}  // namespace snls
