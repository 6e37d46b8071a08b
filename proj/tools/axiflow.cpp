#include "axiflow/errors.hpp"
#include "axiflow/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace axiflow;

namespace {

struct Overrides {
    std::size_t dump = 0;
    std::size_t snapshot_every = 0;
    unsigned long long seed = 0;
    bool seed_set = false;
    std::string out;
};

ExperimentConfig load(const std::string& path, const Overrides& o) {
    ExperimentConfig cfg = std::filesystem::exists(path) ? load_config(path) : fixture(path);
    if (o.dump) cfg.output.dump_matrices = o.dump;
    if (o.snapshot_every) cfg.output.snapshot_every = o.snapshot_every;
    if (o.seed_set) cfg.seed = o.seed;
    if (!o.out.empty()) cfg.output.dir = o.out;
    if (cfg.output.dir.empty() && (cfg.output.dump_matrices || cfg.output.snapshot_every))
        cfg.output.dir = "out/" + cfg.name;
    return cfg;
}

int cmd_run(const std::string& path, const Overrides& o) {
    const ExperimentConfig cfg = load(path, o);
    RunHooks hooks;
    std::filesystem::path dir(cfg.output.dir);
    if (cfg.output.dump_matrices) {
        std::filesystem::create_directories(dir);
        hooks.on_step = [&](const StepInfo& info) {
            if (info.index > cfg.output.dump_matrices || !info.system) return;
            char name[32];
            std::snprintf(name, sizeof name, "system_%06zu.txt", info.index);
            std::ofstream f(dir / name);
            if (!f) throw Error("cannot write " + (dir / name).string());
            dump_matrix(f, *info.system);
        };
    }
    const SimulationResult res = run_simulation(cfg, hooks);
    write_outputs(cfg, res);

    std::printf("%s: %s after %zu steps, t = %.6g\n", cfg.name.c_str(), to_string(res.status).c_str(), res.steps,
                res.final_time());
    if (!res.message.empty()) std::printf("  %s\n", res.message.c_str());
    const auto& last = res.rows.back();
    std::printf("  energy %.10g, element ratio %.4g, min r %.4g, min element %.4g\n", last.energy_total, last.ratio,
                last.min_r, last.min_element_length);
    if (std::isfinite(last.volume)) std::printf("  volume %.10g, max relative drift %.3e\n", last.volume, res.max_volume_drift());
    if (cfg.exact != ExactSolution::None) std::printf("  max error %.4e\n", res.max_error);
    if (res.max_newton_iterations) std::printf("  max Newton iterations %d\n", res.max_newton_iterations);
    if (res.oscillation_time) std::printf("  oscillation detected at t = %.6g\n", *res.oscillation_time);
    for (const auto& w : res.warnings) std::printf("  warning: %s\n", w.c_str());
    if (!cfg.output.dir.empty()) std::printf("  output in %s\n", cfg.output.dir.c_str());
    std::printf("  %.2f s\n", res.seconds);
    return 0;
}

int cmd_converge(const std::string& path, const Overrides& o) {
    const ExperimentConfig cfg = load(path, o);
    const auto rows = convergence_study(cfg);
    std::printf("%s (%s)\n%6s %12s %12s %12s %10s %8s %s\n", cfg.name.c_str(), cfg.flow.label().c_str(), "J", "h", "dt",
                "error", "EOC", "newton", "status");
    for (const auto& r : rows)
        std::printf("%6zu %12.4e %12.4e %12.4e %10.6f %8d %s\n", r.J, r.h, r.dt, r.error, r.eoc,
                    r.max_newton_iterations, to_string(r.status).c_str());
    if (!cfg.output.dir.empty()) {
        std::filesystem::create_directories(cfg.output.dir);
        const auto file = (std::filesystem::path(cfg.output.dir) / "convergence.csv").string();
        write_convergence_csv(file, rows);
        std::printf("wrote %s\n", file.c_str());
    }
    return 0;
}

int cmd_verify(const std::string& tag) {
    const auto tags = tag == "all" ? verify_tags() : std::vector<std::string>{tag};
    int failed = 0;
    for (const auto& t : tags)
        for (const auto& c : verify_suite(t)) {
            std::printf("%s [%s] %s: %s\n", c.passed ? "PASS" : "FAIL", t.c_str(), c.name.c_str(), c.detail.c_str());
            failed += !c.passed;
        }
    std::printf("%d failed\n", failed);
    return failed ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Axisymmetric curvature flows by parametric finite elements"};
    app.require_subcommand(1);
    Overrides o;
    std::string config, tag;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--dump-matrices", o.dump, "write the linear system of the first n steps")
            ->expected(0, 1)
            ->default_str("1");
        c->add_option("--snapshot-every", o.snapshot_every, "write the curve every n steps");
        c->add_option("--seed", o.seed, "seed for randomized initial perturbations")->each([&](const std::string&) {
            o.seed_set = true;
        });
        c->add_option("--out", o.out, "output directory");
    };

    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("config", config, "config file or fixture name")->required();
    add_common(run);
    auto* conv = app.add_subcommand("converge", "convergence study over the configured J values");
    conv->add_option("config", config, "config file or fixture name")->required();
    add_common(conv);
    auto* ver = app.add_subcommand("verify", "run a verification suite");
    ver->add_option("tag", tag, "stability, equidistribution, conservation, convergence, assumptions or all")->required();
    auto* fix = app.add_subcommand("fixture", "print a canned configuration as JSON");
    fix->add_option("name", config, "fixture name, or 'list'")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config, o);
        if (*conv) return cmd_converge(config, o);
        if (*ver) return cmd_verify(tag);
        if (*fix) {
            if (config == "list")
                for (const auto& n : fixture_names()) std::printf("%s\n", n.c_str());
            else
                std::printf("%s\n", config_to_json(fixture(config)).c_str());
            return 0;
        }
    } catch (const InvalidConfig& e) {
        std::fprintf(stderr, "invalid config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
