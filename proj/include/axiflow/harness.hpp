#pragma once

#include "axiflow/geometry.hpp"
#include "axiflow/mesh.hpp"
#include "axiflow/schemes.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace axiflow {

// ---------------------------------------------------------------------------
// Initial curves

/// Semicircle of the given radius from the lower to the upper pole, with nodes
/// at angles phi + 0.1 cos(phi), phi = (q_j - 1/2) pi. Both ends on the axis.
DiscreteCurve semicircle(std::size_t J, double radius = 1.0);
/// Circle of radius r around (R, z0), counter-clockwise, J nodes.
DiscreteCurve circle(std::size_t J, double R, double r, double z0 = 0.0);
/// Vertical segment r = radius from z0 to z1.
DiscreteCurve cylinder(std::size_t J, double radius, double z0, double z1, EndCondition bottom, EndCondition top);
/// Horizontal segment at height z from the axis out to r = radius.
DiscreteCurve disc(std::size_t J, double radius, double z, EndCondition rim);
/// Half of a superellipse |r/a|^p + |z/b|^p = 1 from the lower to the upper pole.
/// p = 2 gives an ellipse; b > a a cigar, b < a a flat disc.
DiscreteCurve superellipse(std::size_t J, double a, double b, double p = 2.0);
/// Closed band around a planar spiral with the given number of turns, centred at (R, 0).
DiscreteCurve spiral(std::size_t J, double turns, double R = 2.0, double width = 0.1, double pitch = 0.25);

/// Radii of spheres evolving under the power laws f(s) = |s|^{beta-1} s and f(s) = -1/s.
double sphere_radius_mcf(double r0, double t);
double sphere_radius_power(double beta, double t);
double sphere_radius_inverse(double t);

// ---------------------------------------------------------------------------
// Configuration

struct GeometrySpec {
    std::string type = "semicircle"; // semicircle, circle, cylinder, disc, superellipse, spiral, file
    std::size_t J = 32;
    double radius = 1.0; // semicircle, cylinder, disc
    double R = 1.0;      // circle centre, spiral centre
    double r = 0.5;      // circle radius
    double z0 = 0.0, z1 = 1.0;
    double a = 0.5, b = 2.0, p = 2.0;          // superellipse
    double turns = 2.0, width = 0.1, pitch = 0.25; // spiral
    EndCondition bottom{BoundaryKind::Fixed, 0.0};
    EndCondition top{BoundaryKind::Fixed, 0.0};
    std::string path;   // file
    double jitter = 0.0; // random tangential node displacement, fraction of the local element length
};

struct StopSpec {
    double min_r = 0.0;              // PinchOffStop below this radius
    double min_element_length = 0.0; // PinchOffStop below this element length
    double max_ratio = 0.0;          // AssumptionViolated above this element ratio (0: off)
    bool oscillation = false;        // stop on oscillation flag
};

struct OutputSpec {
    std::string dir;
    std::size_t snapshot_every = 0;
    bool diagnostics = true;
    bool svg = true;
    std::size_t dump_matrices = 0; // number of leading steps whose system is written
};

enum class ExactSolution { None, SphereMcf, SpherePower, SphereInverse };

struct ExperimentConfig {
    std::string name = "run";
    GeometrySpec geometry;
    FlowSpec flow;
    double T = 0.1;
    double dt = 0.0;        // fixed step, or
    double dt_factor = 0.0; // dt = dt_factor * (max initial element length)^2
    bool clip_final_step = true;
    ExactSolution exact = ExactSolution::None;
    StopSpec stop;
    OutputSpec output;
    std::vector<std::size_t> refinements; // convergence study
    unsigned long long seed = 0;
};

/// JSON document, or "section.key = value" lines.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

DiscreteCurve build_initial_curve(const GeometrySpec& g, unsigned long long seed = 0);
double resolve_dt(const ExperimentConfig& cfg, const DiscreteCurve& initial);

// ---------------------------------------------------------------------------
// Runs

enum class TerminalStatus { Completed, NegativeRadiusStop, PinchOffStop, NoConvergence, AssumptionViolated, DomainViolation };
std::string to_string(TerminalStatus s);

/// Number of sign changes of the nodal mean curvature along the curve.
std::size_t sign_alternations(const DiscreteCurve& curve);
/// Flags oscillation when the sign alternations exceed J / 4.
bool oscillating(const DiscreteCurve& curve);

struct StepInfo {
    std::size_t index = 0; // 1-based step number
    double dt = 0.0;
    const SchemeState* before = nullptr;
    const StepResult* result = nullptr;
    const LinearSystem* system = nullptr; // first linear system of the step
};

struct RunHooks {
    std::function<void(const StepInfo&)> on_step;
    bool capture_systems = false;
};

struct SimulationResult {
    TerminalStatus status = TerminalStatus::Completed;
    std::string message;
    std::vector<DiagnosticsRow> rows; // initial state plus one row per completed step
    std::vector<double> contact_radius; // r of the first node, per row
    DiscreteCurve initial, final_curve;
    std::size_t steps = 0;
    double dt = 0.0;
    int max_newton_iterations = 0;
    double max_error = 0.0; // against the exact solution, over steps m >= 1
    std::optional<double> oscillation_time;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::size_t, DiscreteCurve>> snapshots;
    double seconds = 0.0;

    double max_volume_drift() const; // relative to the initial volume
    double final_time() const { return rows.empty() ? 0.0 : rows.back().time; }
};

SimulationResult run_simulation(const ExperimentConfig& cfg, const RunHooks& hooks = {});

struct ConvergenceRow {
    std::size_t J = 0;
    double h = 0.0; // max initial element length
    double dt = 0.0;
    double error = 0.0;
    double eoc = 0.0; // NaN for the first row
    std::size_t steps = 0;
    int max_newton_iterations = 0;
    TerminalStatus status = TerminalStatus::Completed;
    double seconds = 0.0;
};

/// Runs cfg for each J in cfg.refinements (in parallel) and computes
/// EOC = log(e_{k-1} / e_k) / log(h_{k-1} / h_k).
std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& cfg);

/// Least-squares slope of values against times over the last fraction of the samples.
double fit_speed(const std::vector<double>& times, const std::vector<double>& values, double fraction = 0.5);

// ---------------------------------------------------------------------------
// Output

std::string snapshot_filename(std::size_t step);
void write_diagnostics_csv(const std::string& path, const std::vector<DiagnosticsRow>& rows);
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);
void write_svg(const std::string& path, const std::vector<std::pair<std::size_t, DiscreteCurve>>& snapshots);
/// Writes diagnostics, snapshots and the overlay into cfg.output.dir.
void write_outputs(const ExperimentConfig& cfg, const SimulationResult& res);

// ---------------------------------------------------------------------------
// Canned experiments

/// Named configurations used by the verification suites, the tests and the
/// configs/ directory. Throws InvalidConfig for unknown names.
ExperimentConfig fixture(const std::string& name);
std::vector<std::string> fixture_names();
/// Vertical segment with both ends on cylinders: violates the rank assumption.
DiscreteCurve fixture_curve_segment();

// ---------------------------------------------------------------------------
// Verification suites

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// tag: stability, equidistribution, conservation, convergence, assumptions.
std::vector<CheckResult> verify_suite(const std::string& tag);
std::vector<std::string> verify_tags();

} // namespace axiflow
