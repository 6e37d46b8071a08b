#include "axiflow/errors.hpp"
#include "axiflow/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace axiflow {

using nlohmann::json;

namespace {

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw InvalidConfig("'" + where + "' must be an object");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
        if (!ok.count(k)) throw InvalidConfig("unknown key '" + where + (where.empty() ? "" : ".") + k + "'");
}

template <class T>
void get(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("bad value for '") + key + "': " + e.what());
    }
}

EndCondition parse_end(const std::string& tok) {
    EndCondition e;
    const auto colon = tok.find(':');
    try {
        e.kind = boundary_kind_from_string(tok.substr(0, colon));
    } catch (const ParseError& err) {
        throw InvalidConfig(err.what());
    }
    if (colon != std::string::npos) {
        try {
            e.rho = std::stod(tok.substr(colon + 1));
        } catch (const std::exception&) {
            throw InvalidConfig("bad contact density in '" + tok + "'");
        }
    }
    if (std::abs(e.rho) > 1.0) throw InvalidConfig("contact energy density must satisfy |rho| <= 1");
    return e;
}

std::string format_end(const EndCondition& e) {
    std::ostringstream s;
    s << to_string(e.kind);
    if (e.kind == BoundaryKind::CylinderSlide || e.kind == BoundaryKind::PlaneSlide) s << ':' << e.rho;
    return s.str();
}

ExactSolution exact_from_string(const std::string& s) {
    if (s == "none") return ExactSolution::None;
    if (s == "sphere_mcf") return ExactSolution::SphereMcf;
    if (s == "sphere_power") return ExactSolution::SpherePower;
    if (s == "sphere_inverse") return ExactSolution::SphereInverse;
    throw InvalidConfig("unknown exact solution '" + s + "'");
}

std::string exact_to_string(ExactSolution e) {
    switch (e) {
    case ExactSolution::None: return "none";
    case ExactSolution::SphereMcf: return "sphere_mcf";
    case ExactSolution::SpherePower: return "sphere_power";
    case ExactSolution::SphereInverse: return "sphere_inverse";
    }
    return "none";
}

/// "a.b.c = value" lines to a nested JSON object.
json parse_key_values(const std::string& text) {
    json root = json::object();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        if (trim(line).empty()) continue;
        if (eq == std::string::npos) throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        json v;
        try {
            v = json::parse(val);
        } catch (const json::exception&) {
            v = val; // bare word
        }
        json* node = &root;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (dot == std::string::npos) {
                (*node)[part] = v;
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }
    return root;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json j;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw InvalidConfig(std::string("malformed JSON: ") + e.what());
        }
    } else {
        j = parse_key_values(text);
    }

    ExperimentConfig cfg;
    allow_keys(j, "", {"name", "geometry", "scheme", "newton", "time", "exact", "stop", "output", "convergence", "seed"});
    get(j, "name", cfg.name);
    get(j, "seed", cfg.seed);

    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        allow_keys(g, "geometry", {"type", "J", "radius", "R", "r", "z0", "z1", "a", "b", "p", "turns", "width", "pitch",
                                   "bottom", "top", "path", "jitter"});
        auto& G = cfg.geometry;
        get(g, "type", G.type);
        get(g, "J", G.J);
        get(g, "radius", G.radius);
        get(g, "R", G.R);
        get(g, "r", G.r);
        get(g, "z0", G.z0);
        get(g, "z1", G.z1);
        get(g, "a", G.a);
        get(g, "b", G.b);
        get(g, "p", G.p);
        get(g, "turns", G.turns);
        get(g, "width", G.width);
        get(g, "pitch", G.pitch);
        get(g, "path", G.path);
        get(g, "jitter", G.jitter);
        std::string s;
        if (g.contains("bottom")) {
            get(g, "bottom", s);
            G.bottom = parse_end(s);
        }
        if (g.contains("top")) {
            get(g, "top", s);
            G.top = parse_end(s);
        }
        if (G.J < 3) throw InvalidConfig("geometry.J must be at least 3");
    }

    if (j.contains("scheme")) {
        const auto& s = j["scheme"];
        allow_keys(s, "scheme", {"name", "integration", "speed", "beta", "conserved", "eliminate", "element_normals",
                                 "check_stability"});
        auto& F = cfg.flow;
        std::string name = "A", integ = "lumped", speed = "mcf";
        double beta = 1.0;
        get(s, "name", name);
        get(s, "integration", integ);
        get(s, "speed", speed);
        get(s, "beta", beta);
        get(s, "conserved", F.conserved);
        get(s, "eliminate", F.eliminate);
        get(s, "element_normals", F.element_normals);
        get(s, "check_stability", F.check_stability);
        F.scheme = scheme_from_string(name);
        if (integ == "lumped")
            F.integration = Integration::Lumped;
        else if (integ == "exact")
            F.integration = Integration::Exact;
        else
            throw InvalidConfig("scheme.integration must be lumped or exact");
        if (speed == "mcf")
            F.speed = SpeedLaw::identity();
        else if (speed == "power")
            F.speed = SpeedLaw::power(beta);
        else if (speed == "inverse")
            F.speed = SpeedLaw::inverse();
        else if (speed == "gauss")
            F.speed = SpeedLaw::gauss();
        else
            throw InvalidConfig("unknown speed law '" + speed + "'");
    }

    if (j.contains("newton")) {
        const auto& n = j["newton"];
        allow_keys(n, "newton", {"tolerance", "max_iterations", "max_halvings"});
        get(n, "tolerance", cfg.flow.newton.tolerance);
        get(n, "max_iterations", cfg.flow.newton.max_iterations);
        get(n, "max_halvings", cfg.flow.newton.max_halvings);
    }

    if (j.contains("time")) {
        const auto& t = j["time"];
        allow_keys(t, "time", {"T", "dt", "dt_factor", "clip_final_step"});
        get(t, "T", cfg.T);
        get(t, "dt", cfg.dt);
        get(t, "dt_factor", cfg.dt_factor);
        get(t, "clip_final_step", cfg.clip_final_step);
    }

    if (j.contains("exact")) {
        std::string e;
        get(j, "exact", e);
        cfg.exact = exact_from_string(e);
    }

    if (j.contains("stop")) {
        const auto& s = j["stop"];
        allow_keys(s, "stop", {"min_r", "min_element_length", "max_ratio", "oscillation"});
        get(s, "min_r", cfg.stop.min_r);
        get(s, "min_element_length", cfg.stop.min_element_length);
        get(s, "max_ratio", cfg.stop.max_ratio);
        get(s, "oscillation", cfg.stop.oscillation);
    }

    if (j.contains("output")) {
        const auto& o = j["output"];
        allow_keys(o, "output", {"dir", "snapshot_every", "diagnostics", "svg", "dump_matrices"});
        get(o, "dir", cfg.output.dir);
        get(o, "snapshot_every", cfg.output.snapshot_every);
        get(o, "diagnostics", cfg.output.diagnostics);
        get(o, "svg", cfg.output.svg);
        get(o, "dump_matrices", cfg.output.dump_matrices);
    }

    if (j.contains("convergence")) {
        const auto& c = j["convergence"];
        allow_keys(c, "convergence", {"J"});
        get(c, "J", cfg.refinements);
    }

    if (!(cfg.T > 0.0)) throw InvalidConfig("time.T must be positive");
    if (cfg.dt < 0.0 || cfg.dt_factor < 0.0 || (cfg.dt == 0.0) == (cfg.dt_factor == 0.0))
        throw InvalidConfig("give exactly one of time.dt and time.dt_factor");
    cfg.flow.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["seed"] = cfg.seed;
    const auto& G = cfg.geometry;
    j["geometry"] = {{"type", G.type}, {"J", G.J}, {"radius", G.radius}, {"R", G.R}, {"r", G.r},
                     {"z0", G.z0}, {"z1", G.z1}, {"a", G.a}, {"b", G.b}, {"p", G.p},
                     {"turns", G.turns}, {"width", G.width}, {"pitch", G.pitch},
                     {"bottom", format_end(G.bottom)}, {"top", format_end(G.top)}, {"path", G.path},
                     {"jitter", G.jitter}};
    const auto& F = cfg.flow;
    std::string speed = "mcf";
    switch (F.speed.kind) {
    case SpeedLaw::Kind::Identity: speed = "mcf"; break;
    case SpeedLaw::Kind::Power: speed = "power"; break;
    case SpeedLaw::Kind::Inverse: speed = "inverse"; break;
    case SpeedLaw::Kind::General: speed = F.speed.name; break;
    }
    j["scheme"] = {{"name", to_string(F.scheme)},
                   {"integration", F.integration == Integration::Lumped ? "lumped" : "exact"},
                   {"speed", speed},
                   {"beta", F.speed.beta},
                   {"conserved", F.conserved},
                   {"eliminate", F.eliminate},
                   {"element_normals", F.element_normals},
                   {"check_stability", F.check_stability}};
    j["newton"] = {{"tolerance", F.newton.tolerance}, {"max_iterations", F.newton.max_iterations},
                   {"max_halvings", F.newton.max_halvings}};
    j["time"] = {{"T", cfg.T}, {"dt", cfg.dt}, {"dt_factor", cfg.dt_factor}, {"clip_final_step", cfg.clip_final_step}};
    j["exact"] = exact_to_string(cfg.exact);
    j["stop"] = {{"min_r", cfg.stop.min_r}, {"min_element_length", cfg.stop.min_element_length},
                 {"max_ratio", cfg.stop.max_ratio}, {"oscillation", cfg.stop.oscillation}};
    j["output"] = {{"dir", cfg.output.dir}, {"snapshot_every", cfg.output.snapshot_every},
                   {"diagnostics", cfg.output.diagnostics}, {"svg", cfg.output.svg},
                   {"dump_matrices", cfg.output.dump_matrices}};
    j["convergence"] = {{"J", cfg.refinements}};
    return j.dump(2);
}

double resolve_dt(const ExperimentConfig& cfg, const DiscreteCurve& initial) {
    if (cfg.dt > 0.0) return cfg.dt;
    const auto g = element_tangents_normals(initial);
    double hmax = 0.0;
    for (double l : g.length) hmax = std::max(hmax, l);
    return cfg.dt_factor * hmax * hmax;
}

} // namespace axiflow
