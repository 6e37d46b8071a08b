#include "axiflow/errors.hpp"
#include "axiflow/harness.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <limits>

namespace axiflow {

std::string to_string(TerminalStatus s) {
    switch (s) {
    case TerminalStatus::Completed: return "Completed";
    case TerminalStatus::NegativeRadiusStop: return "NegativeRadiusStop";
    case TerminalStatus::PinchOffStop: return "PinchOffStop";
    case TerminalStatus::NoConvergence: return "NoConvergence";
    case TerminalStatus::AssumptionViolated: return "AssumptionViolated";
    case TerminalStatus::DomainViolation: return "DomainViolation";
    }
    return "?";
}

std::size_t sign_alternations(const DiscreteCurve& curve) {
    const auto mean = curvature_diagnostics(curve).mean;
    std::size_t count = 0;
    int last = 0, first = 0;
    for (double k : mean) {
        const int s = (k > 0.0) - (k < 0.0);
        if (s == 0) continue;
        if (first == 0) first = s;
        if (last != 0 && s != last) ++count;
        last = s;
    }
    if (curve.is_closed() && first != 0 && last != first) ++count;
    return count;
}

bool oscillating(const DiscreteCurve& curve) { return 4 * sign_alternations(curve) > curve.elements(); }

double SimulationResult::max_volume_drift() const {
    if (rows.empty() || !std::isfinite(rows.front().volume)) return std::numeric_limits<double>::quiet_NaN();
    const double v0 = rows.front().volume;
    double drift = 0.0;
    for (const auto& r : rows) drift = std::max(drift, std::abs(r.volume - v0) / std::abs(v0));
    return drift;
}

namespace {

double exact_radius(const ExperimentConfig& cfg, double t) {
    switch (cfg.exact) {
    case ExactSolution::SphereMcf: return sphere_radius_mcf(cfg.geometry.radius, t);
    case ExactSolution::SpherePower: return sphere_radius_power(cfg.flow.speed.beta, t);
    case ExactSolution::SphereInverse: return sphere_radius_inverse(t);
    case ExactSolution::None: break;
    }
    return 0.0;
}

double nodal_error(const DiscreteCurve& c, double R) {
    double e = 0.0;
    for (const auto& p : c.points()) e = std::max(e, std::abs(p.norm() - R));
    return e;
}

} // namespace

SimulationResult run_simulation(const ExperimentConfig& cfg, const RunHooks& hooks) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.flow.validate();
    if ((cfg.exact == ExactSolution::SpherePower || cfg.exact == ExactSolution::SphereInverse) &&
        cfg.geometry.radius != 1.0)
        throw InvalidConfig("this exact solution is defined for a unit initial sphere");
    if (cfg.exact != ExactSolution::None && cfg.geometry.type != "semicircle")
        throw InvalidConfig("exact solutions need the semicircle geometry");

    SimulationResult res;
    res.initial = build_initial_curve(cfg.geometry, cfg.seed);
    res.dt = resolve_dt(cfg, res.initial);
    if (!(res.dt > 0.0)) throw InvalidConfig("time step must be positive");

    SchemeState state{res.initial, {}, 0.0, {}};
    auto record = [&](const DiscreteCurve& c, double t) {
        res.rows.push_back(diagnostics(c, t));
        res.contact_radius.push_back(c.r(0));
    };
    record(state.curve, 0.0);

    const auto every = cfg.output.snapshot_every;
    if (every > 0) res.snapshots.emplace_back(0, state.curve);

    const double ratio = cfg.T / res.dt;
    const auto total = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
    std::size_t m = 0;
    bool warned_guard = false;
    auto finish = [&](TerminalStatus s, std::string msg) {
        res.status = s;
        res.message = std::move(msg);
    };

    try {
        while (m < total) {
            const double t_next = m + 1 == total && cfg.clip_final_step ? cfg.T : static_cast<double>(m + 1) * res.dt;
            const double dt = t_next - state.time;

            LinearSystem sys;
            const bool capture = hooks.capture_systems || m < cfg.output.dump_matrices;
            StepResult out = step(state, dt, cfg.flow, capture ? &sys : nullptr);
            ++m;
            if (out.guard.status == GuardStatus::Warn && !warned_guard) {
                res.warnings.push_back("step " + std::to_string(m) + ": " + out.guard.message);
                warned_guard = true;
            }
            if (hooks.on_step) {
                StepInfo info{m, dt, &state, &out, capture ? &sys : nullptr};
                hooks.on_step(info);
            }

            // the step producing a negative radius is rejected
            if (min_radius(out.curve) <= 0.0) {
                finish(TerminalStatus::NegativeRadiusStop, "negative radius at t = " + std::to_string(t_next));
                break;
            }
            state.curve = std::move(out.curve);
            state.kappa = std::move(out.kappa);
            state.speed_argument = std::move(out.speed_argument);
            state.time = t_next;
            res.steps = m;
            res.max_newton_iterations = std::max(res.max_newton_iterations, out.newton_iterations);
            record(state.curve, state.time);
            if (every > 0 && m % every == 0) res.snapshots.emplace_back(m, state.curve);

            if (cfg.exact != ExactSolution::None) {
                try {
                    res.max_error = std::max(res.max_error, nodal_error(state.curve, exact_radius(cfg, state.time)));
                } catch (const PastExtinction& e) {
                    finish(TerminalStatus::Completed, e.what());
                    break;
                }
            }
            if (!res.oscillation_time && oscillating(state.curve)) {
                res.oscillation_time = state.time;
                if (cfg.stop.oscillation) {
                    finish(TerminalStatus::Completed, "oscillation detected");
                    break;
                }
            }
            const auto& row = res.rows.back();
            if (row.min_r < cfg.stop.min_r || row.min_element_length < cfg.stop.min_element_length) {
                finish(TerminalStatus::PinchOffStop, "pinch-off threshold reached at t = " + std::to_string(state.time));
                break;
            }
            if (cfg.stop.max_ratio > 0.0 && row.ratio > cfg.stop.max_ratio) {
                finish(TerminalStatus::AssumptionViolated, "element ratio above limit at t = " + std::to_string(state.time));
                break;
            }
        }
    } catch (const NoConvergence& e) {
        finish(TerminalStatus::NoConvergence, e.what());
    } catch (const DomainViolation& e) {
        finish(TerminalStatus::DomainViolation, e.what());
    } catch (const AssumptionViolated& e) {
        finish(TerminalStatus::AssumptionViolated, e.what());
    } catch (const SingularSystem& e) {
        finish(TerminalStatus::AssumptionViolated, e.what());
    } catch (const ZeroLengthElement& e) {
        finish(TerminalStatus::AssumptionViolated, e.what());
    }

    if (res.final_curve.nodes() == 0) res.final_curve = state.curve;
    if (every > 0 && (res.snapshots.empty() || res.snapshots.back().first != res.steps))
        res.snapshots.emplace_back(res.steps, res.final_curve);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& cfg) {
    if (cfg.refinements.empty()) throw InvalidConfig("convergence.J is empty");
    if (cfg.exact == ExactSolution::None) throw InvalidConfig("convergence study needs an exact solution");

    std::vector<std::future<ConvergenceRow>> jobs;
    for (std::size_t J : cfg.refinements) {
        ExperimentConfig c = cfg;
        c.geometry.J = J;
        c.output = OutputSpec{};
        c.output.svg = false;
        c.output.diagnostics = false;
        jobs.push_back(std::async(std::launch::async, [c]() {
            const auto res = run_simulation(c);
            ConvergenceRow row;
            row.J = c.geometry.J;
            const auto g = element_tangents_normals(res.initial);
            for (double l : g.length) row.h = std::max(row.h, l);
            row.dt = res.dt;
            row.error = res.max_error;
            row.steps = res.steps;
            row.max_newton_iterations = res.max_newton_iterations;
            row.status = res.status;
            row.seconds = res.seconds;
            return row;
        }));
    }
    std::vector<ConvergenceRow> rows;
    for (auto& j : jobs) rows.push_back(j.get());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        rows[k].eoc = k == 0 || rows[k].status != TerminalStatus::Completed ||
                              rows[k - 1].status != TerminalStatus::Completed
                          ? std::numeric_limits<double>::quiet_NaN()
                          : std::log(rows[k - 1].error / rows[k].error) / std::log(rows[k - 1].h / rows[k].h);
    }
    return rows;
}

double fit_speed(const std::vector<double>& times, const std::vector<double>& values, double fraction) {
    if (times.size() != values.size() || times.size() < 2) throw InvalidConfig("fit_speed needs matching samples");
    const double t_end = times.back();
    const double t_start = t_end - fraction * (t_end - times.front());
    double n = 0, st = 0, sv = 0, stt = 0, stv = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_start) continue;
        n += 1;
        st += times[i];
        sv += values[i];
        stt += times[i] * times[i];
        stv += times[i] * values[i];
    }
    const double den = n * stt - st * st;
    if (n < 2 || den == 0.0) throw InvalidConfig("fit_speed window holds fewer than two samples");
    return (n * stv - st * sv) / den;
}

} // namespace axiflow
