#include "axiflow/errors.hpp"
#include "axiflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace axiflow {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string snapshot_filename(std::size_t step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "curve_%06zu.txt", step);
    return buf;
}

void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows) {
    auto out = open_out(path);
    out << "time,energy_total,energy_area,volume,ratio,min_r,min_element_length,max_contact_residual\n";
    for (const auto& r : rows)
        out << num(r.time) << ',' << num(r.energy_total) << ',' << num(r.energy_area) << ',' << num(r.volume) << ','
            << num(r.ratio) << ',' << num(r.min_r) << ',' << num(r.min_element_length) << ','
            << num(r.max_contact_residual) << '\n';
    if (!out) throw Error("write failed: " + path);
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
    auto out = open_out(path);
    out << "J,h,dt,error,eoc,steps,max_newton_iterations,status\n";
    for (const auto& r : rows)
        out << r.J << ',' << num(r.h) << ',' << num(r.dt) << ',' << num(r.error) << ',' << num(r.eoc) << ',' << r.steps
            << ',' << r.max_newton_iterations << ',' << to_string(r.status) << '\n';
    if (!out) throw Error("write failed: " + path);
}

void write_svg(const std::string& path, const std::vector<std::pair<std::size_t, DiscreteCurve>>& snapshots) {
    double rmax = 1e-3, zmin = 0.0, zmax = 0.0;
    bool first = true;
    for (const auto& [step, c] : snapshots)
        for (const auto& p : c.points()) {
            rmax = std::max(rmax, p.x());
            zmin = first ? p.y() : std::min(zmin, p.y());
            zmax = first ? p.y() : std::max(zmax, p.y());
            first = false;
        }
    const double span = std::max({rmax, zmax - zmin, 1e-3});
    const double size = 600.0, pad = 40.0, scale = (size - 2 * pad) / span;
    auto X = [&](double r) { return pad + r * scale; };
    auto Y = [&](double z) { return size - pad - (z - zmin) * scale; };

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
    out << "<line x1=\"" << X(0) << "\" y1=\"" << pad / 2 << "\" x2=\"" << X(0) << "\" y2=\"" << size - pad / 2
        << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
    out << "<line x1=\"" << pad / 2 << "\" y1=\"" << Y(0) << "\" x2=\"" << size - pad / 2 << "\" y2=\"" << Y(0)
        << "\" stroke=\"gray\"/>\n";
    out << "<text x=\"" << size - pad << "\" y=\"" << Y(0) - 4 << "\" font-size=\"12\">r</text>\n";
    out << "<text x=\"" << X(0) + 4 << "\" y=\"" << pad / 2 + 12 << "\" font-size=\"12\">z</text>\n";
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        const auto& [step, c] = snapshots[k];
        out << "<polyline fill=\"none\" stroke=\"hsl(" << (240 * k) / std::max<std::size_t>(1, snapshots.size())
            << ",70%,40%)\" stroke-width=\"1\" points=\"";
        for (const auto& p : c.points()) out << X(p.x()) << ',' << Y(p.y()) << ' ';
        if (c.is_closed()) out << X(c.point(0).x()) << ',' << Y(c.point(0).y());
        out << "\"/>\n";
        const auto& p0 = c.point(0);
        out << "<text x=\"" << X(p0.x()) + 3 << "\" y=\"" << Y(p0.y()) << "\" font-size=\"9\">step " << step
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw Error("write failed: " + path);
}

void write_outputs(const ExperimentConfig& cfg, const SimulationResult& res) {
    if (cfg.output.dir.empty()) return;
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output.dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());

    if (cfg.output.diagnostics) write_diagnostics_csv((dir / "diagnostics.csv").string(), res.rows);
    for (const auto& [step, c] : res.snapshots) write_curve_file((dir / snapshot_filename(step)).string(), c);
    if (cfg.output.svg) {
        auto shots = res.snapshots;
        if (shots.empty()) shots = {{0, res.initial}, {res.steps, res.final_curve}};
        write_svg((dir / "curves.svg").string(), shots);
    }
    auto out = open_out((dir / "config.json").string());
    out << config_to_json(cfg) << '\n';
}

} // namespace axiflow
