#include "axiflow/errors.hpp"
#include "axiflow/harness.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace axiflow {

namespace {

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(5);
    s << v;
    return s.str();
}

CheckResult check(std::string name, bool ok, std::string detail) { return {std::move(name), ok, std::move(detail)}; }

struct StabilityOutcome {
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::string end;
};

/// Up to `steps` steps; StabilityViolation or an energy increase counts as a violation.
StabilityOutcome stability_run(const DiscreteCurve& c0, const FlowSpec& spec, double dt, int steps) {
    StabilityOutcome out;
    SchemeState s{c0, {}, 0.0, {}};
    for (int k = 0; k < steps; ++k) {
        try {
            const StepResult r = step(s, dt, spec);
            const double slack = stability_slack * std::max(1.0, std::abs(r.energy_before));
            if (r.stability_checked) ++out.checked;
            if (!(r.energy_after <= r.energy_before + slack)) ++out.violations;
            s = {r.curve, r.kappa, s.time + dt, r.speed_argument};
            if (min_radius(s.curve) <= 0.0) {
                out.end = "negative radius";
                break;
            }
        } catch (const StabilityViolation& e) {
            ++out.violations;
            out.end = e.what();
            break;
        } catch (const Error& e) {
            out.end = e.what();
            break;
        }
    }
    return out;
}

std::vector<std::pair<std::string, DiscreteCurve>> stability_fixtures() {
    return {{"sphere", semicircle(32)},
            {"torus", circle(64, 1.0, 0.5)},
            {"cylinder", cylinder(32, 1.0, -2.0, 2.0, {BoundaryKind::Fixed, 0.0}, {BoundaryKind::Fixed, 0.0})},
            {"cylinder-planes",
             cylinder(32, 1.0, 0.0, 1.0, {BoundaryKind::PlaneSlide, -0.5}, {BoundaryKind::PlaneSlide, -0.5})},
            {"disc-in-cylinder", disc(32, 1.0, 0.0, {BoundaryKind::CylinderSlide, -0.5})}};
}

std::vector<CheckResult> suite_stability() {
    std::vector<CheckResult> out;
    for (Scheme sch : {Scheme::CStar, Scheme::DStar})
        for (Integration in : {Integration::Lumped, Integration::Exact})
            for (bool conserved : {false, true}) {
                if (conserved && sch == Scheme::DStar) continue;
                for (const auto& [name, c0] : stability_fixtures())
                    for (double dt : {1e-4, 1e-2, 1.0}) {
                        FlowSpec spec;
                        spec.scheme = sch;
                        spec.integration = in;
                        spec.conserved = conserved;
                        const auto r = stability_run(c0, spec, dt, 20);
                        const std::string label = spec.label() + " " + name + " dt=" + fmt(dt);
                        out.push_back(check(label, r.violations == 0 && r.checked > 0,
                                            std::to_string(r.checked) + " steps checked, " +
                                                std::to_string(r.violations) + " violations" +
                                                (r.end.empty() ? "" : ", ended: " + r.end)));
                    }
            }
    return out;
}

std::vector<CheckResult> suite_equidistribution() {
    std::vector<CheckResult> out;
    const auto a = run_simulation(fixture("conserved_sphere_A"));
    const double adj = adjacent_length_ratio(a.final_curve);
    out.push_back(check("A conserved sphere: adjacent non-parallel length ratio <= 1.05",
                        a.status == TerminalStatus::Completed && adj <= 1.05, "ratio " + fmt(adj)));
    const double ra = element_ratio(a.final_curve);
    const auto cl = run_simulation(fixture("conserved_sphere_Cstar_lumped"));
    const auto ce = run_simulation(fixture("conserved_sphere_Cstar_exact"));
    const double rl = element_ratio(cl.final_curve), re = element_ratio(ce.final_curve);
    out.push_back(check("A conserved sphere: element ratio near 1.01", std::abs(ra - 1.01) <= 0.1, fmt(ra)));
    out.push_back(check("C_star exact conserved sphere: element ratio near 2.94", std::abs(re - 2.94) <= 0.1, fmt(re)));
    out.push_back(check("C_star lumped conserved sphere: element ratio near 73.13",
                        std::abs(rl - 73.13) <= 0.3 * 73.13, fmt(rl)));
    out.push_back(check("ratio ordering A < C_star exact < C_star lumped", ra < re && re < rl,
                        fmt(ra) + " < " + fmt(re) + " < " + fmt(rl)));
    return out;
}

std::vector<CheckResult> suite_conservation() {
    std::vector<CheckResult> out;
    for (const char* name : {"conserved_sphere_A", "conserved_sphere_Cstar_lumped", "conserved_sphere_Cstar_exact"}) {
        const auto r = run_simulation(fixture(name));
        const double d = r.max_volume_drift();
        out.push_back(check(std::string(name) + ": volume drift <= 2e-3",
                            r.status == TerminalStatus::Completed && d <= 2e-3, "drift " + fmt(d)));
    }
    const auto t = run_simulation(fixture("conserved_torus"));
    const double d = t.max_volume_drift();
    out.push_back(check("conserved_torus: volume drift <= 2e-3 up to closing",
                        t.status == TerminalStatus::PinchOffStop && d <= 2e-3,
                        "drift " + fmt(d) + ", stop " + to_string(t.status) + " at t=" + fmt(t.final_time())));
    return out;
}

std::vector<CheckResult> suite_convergence() {
    std::vector<CheckResult> out;
    auto cfg = fixture("sphere_mcf");
    cfg.refinements = {32, 64, 128};
    const auto a = convergence_study(cfg);
    for (std::size_t k = 1; k < a.size(); ++k)
        out.push_back(check("A sphere EOC J=" + std::to_string(a[k].J), std::abs(a[k].eoc - 2.0) <= 0.05,
                            "error " + fmt(a[k].error) + ", EOC " + fmt(a[k].eoc)));
    cfg.flow.scheme = Scheme::CStar;
    cfg.flow.integration = Integration::Exact;
    const auto c = convergence_study(cfg);
    for (std::size_t k = 1; k < c.size(); ++k)
        out.push_back(check("C_star exact sphere EOC J=" + std::to_string(c[k].J),
                            c[k].eoc >= 1.6 && c[k].eoc <= 1.8, "error " + fmt(c[k].error) + ", EOC " + fmt(c[k].eoc)));
    const auto cl = run_simulation(fixture("sphere_c_linear"));
    out.push_back(check("C lumped sphere stops with a negative radius", cl.status == TerminalStatus::NegativeRadiusStop,
                        to_string(cl.status) + " at t=" + fmt(cl.final_time())));

    const auto g = run_simulation(fixture("grim_reaper"));
    std::vector<double> times;
    for (const auto& row : g.rows) times.push_back(row.time);
    const double speed = fit_speed(times, g.contact_radius, 0.5);
    const double target = std::numbers::pi / 3.0;
    out.push_back(check("travelling wave speed within 2% of pi/3",
                        g.status == TerminalStatus::Completed && std::abs(speed - target) <= 0.02 * target,
                        "speed " + fmt(speed) + " vs " + fmt(target)));
    return out;
}

std::vector<CheckResult> suite_assumptions() {
    std::vector<CheckResult> out;
    const auto ok = check_assumptions(semicircle(32));
    out.push_back(check("semicircle satisfies all rank assumptions",
                        ok.a && ok.b_lumped && ok.c_lumped && ok.c_exact, ok.detail));
    const auto seg = check_assumptions(fixture_curve_segment());
    out.push_back(check("vertical segment violates the rank assumption", !seg.b_lumped, seg.detail));
    const auto sing = run_simulation(fixture("singular_segment"));
    out.push_back(check("singular segment run reports AssumptionViolated",
                        sing.status == TerminalStatus::AssumptionViolated, sing.message));

    const auto torus = run_simulation(fixture("torus_close"));
    out.push_back(check("torus r=0.7 closes up (min r < 0.05) for t in [0.075, 0.09]",
                        torus.status == TerminalStatus::PinchOffStop && torus.final_time() >= 0.075 &&
                            torus.final_time() <= 0.09,
                        to_string(torus.status) + " at t=" + fmt(torus.final_time())));
    const auto cyl = run_simulation(fixture("cylinder_pinch"));
    out.push_back(check("cylinder pinches off for t in [0.45, 0.55]",
                        cyl.status == TerminalStatus::PinchOffStop && cyl.final_time() >= 0.45 &&
                            cyl.final_time() <= 0.55,
                        to_string(cyl.status) + " at t=" + fmt(cyl.final_time())));
    const auto imcf = run_simulation(fixture("imcf_torus"));
    const bool unphysical =
        imcf.status == TerminalStatus::DomainViolation || imcf.status == TerminalStatus::AssumptionViolated;
    out.push_back(check("inverse flow torus becomes unphysical for t in [0.5, 0.55]",
                        unphysical && imcf.final_time() >= 0.5 && imcf.final_time() <= 0.55,
                        to_string(imcf.status) + " at t=" + fmt(imcf.final_time())));
    return out;
}

} // namespace

DiscreteCurve fixture_curve_segment() {
    return cylinder(16, 1.0, 0.0, 1.0, {BoundaryKind::CylinderSlide, 0.0}, {BoundaryKind::CylinderSlide, 0.0});
}

std::vector<std::string> verify_tags() { return {"stability", "equidistribution", "conservation", "convergence", "assumptions"}; }

std::vector<CheckResult> verify_suite(const std::string& tag) {
    if (tag == "stability") return suite_stability();
    if (tag == "equidistribution") return suite_equidistribution();
    if (tag == "conservation") return suite_conservation();
    if (tag == "convergence") return suite_convergence();
    if (tag == "assumptions") return suite_assumptions();
    throw InvalidConfig("unknown verification tag '" + tag + "'");
}

} // namespace axiflow
