#pragma once

#include "axiflow/geometry.hpp"
#include "axiflow/mesh.hpp"
#include "axiflow/solver.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace axiflow {

/// A, B   : curvature of the generating curve as unknown (scalar / vector)
/// C, D   : r-weighted mean curvature as unknown (scalar / vector)
/// CStar, DStar : C, D with the area term taken at the new time level
enum class Scheme { A, B, C, CStar, D, DStar };
enum class Integration { Lumped, Exact };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

/// Normal velocity law V = f(mean curvature), or the explicit V = F(mean, gauss).
struct SpeedLaw {
    enum class Kind { Identity, Power, Inverse, General };
    Kind kind = Kind::Identity;
    double beta = 1.0;
    std::function<double(double, double)> general; // F(mean, gauss)
    std::string name = "mcf";

    static SpeedLaw identity();
    static SpeedLaw power(double beta);
    static SpeedLaw inverse();
    static SpeedLaw gauss();
    static SpeedLaw custom(std::string name, std::function<double(double, double)> F);

    double value(double s) const;
    double derivative(double s) const;
    /// True for laws whose argument has to keep its sign (f(s) = -1/s).
    bool needs_sign() const { return kind == Kind::Inverse; }
};

struct FlowSpec {
    Scheme scheme = Scheme::A;
    Integration integration = Integration::Lumped;
    SpeedLaw speed;
    bool conserved = false;
    /// Solve for the displacement only (lumped C, CStar, D, DStar with f = id).
    bool eliminate = false;
    /// With eliminate on CStar: project on the element normals instead of the vertex normals.
    bool element_normals = false;
    bool check_stability = true;
    NewtonConfig newton;

    /// Throws InvalidConfig for combinations the schemes do not define.
    void validate() const;
    bool vector_curvature() const { return scheme == Scheme::B || scheme == Scheme::D || scheme == Scheme::DStar; }
    bool weighted() const { return scheme != Scheme::A && scheme != Scheme::B; }
    bool implicit_area() const { return scheme == Scheme::CStar || scheme == Scheme::DStar; }
    std::string label() const;
};

/// Replacement of (nu . e1) / r at the nodes: (omega . e1) / r off the axis, -kappa on it.
std::vector<double> axis_substitute(const DiscreteCurve& curve, const Eigen::VectorXd& kappa);
/// Vector form: (omega . e1) / r * omega / |omega|^2 off the axis, -kappa on it.
std::vector<Vec2> axis_substitute_vector(const DiscreteCurve& curve, const Eigen::VectorXd& kappa);

/// Nodal curvature of the initial curve from the unconstrained lumped curvature
/// identity, projected on the normalized vertex normals.
Eigen::VectorXd init_kappa0(const DiscreteCurve& curve);

/// One time step of a scheme, as a residual in the unknowns (displacement,
/// curvature) with nodal block layout [dr, dz, kappa...].
class SchemeProblem {
public:
    SchemeProblem(const DiscreteCurve& curve, double dt, const FlowSpec& spec, const Eigen::VectorXd& kappa_prev = {});
    ~SchemeProblem();
    SchemeProblem(SchemeProblem&&) noexcept;

    int block() const;
    Eigen::Index size() const;
    bool linear() const;
    const std::vector<char>& pinned() const;

    Eigen::VectorXd residual(const Eigen::VectorXd& u) const;
    /// Jacobian at u with right-hand side -residual(u).
    LinearSystem jacobian(const Eigen::VectorXd& u) const;
    Eigen::VectorXd start() const;
    bool admissible(const Eigen::VectorXd& u) const;
    /// Nodal arguments of a sign-sensitive speed law at u; empty for other laws.
    std::vector<double> speed_arguments(const Eigen::VectorXd& u) const;
    /// Takes the admissible signs from the previous step's arguments instead of the start.
    void set_sign_reference(const std::vector<double>& previous);

    DiscreteCurve advance(const Eigen::VectorXd& u) const;
    Eigen::VectorXd curvature(const Eigen::VectorXd& u) const;
    /// Dissipation term D with E(new) + 2 pi dt D <= E(old) for the CStar / DStar families.
    double dissipation(const Eigen::VectorXd& u) const;

private:
    struct Impl;
    std::unique_ptr<Impl> p_;
};

struct SchemeState {
    DiscreteCurve curve;
    Eigen::VectorXd kappa; // previous curvature unknowns, may be empty
    double time = 0.0;
    std::vector<double> speed_argument; // previous nodal speed arguments, may be empty
};

struct StepResult {
    DiscreteCurve curve;
    Eigen::VectorXd kappa;
    Eigen::VectorXd unknowns;
    std::vector<double> speed_argument;
    int newton_iterations = 0; // 0 for linear schemes
    double energy_before = 0.0;
    double energy_after = 0.0;
    double dissipation = 0.0;
    bool stability_checked = false;
    GuardResult guard;
};

/// Advances one step. Throws AssumptionViolated, SingularSystem, NoConvergence,
/// DomainViolation or StabilityViolation.
StepResult step(const SchemeState& state, double dt, const FlowSpec& spec, LinearSystem* first_system = nullptr);

StepResult step_A(const SchemeState& state, double dt, const FlowSpec& spec);
StepResult step_A_f(const SchemeState& state, double dt, const FlowSpec& spec);
StepResult step_B(const SchemeState& state, double dt, const FlowSpec& spec);
StepResult step_C(const SchemeState& state, double dt, const FlowSpec& spec);
StepResult step_C_star(const SchemeState& state, double dt, const FlowSpec& spec);
StepResult step_D(const SchemeState& state, double dt, const FlowSpec& spec);
StepResult step_D_star(const SchemeState& state, double dt, const FlowSpec& spec);

/// Slack of the discrete stability check, relative to max(1, |E|).
inline constexpr double stability_slack = 1e-12;

} // namespace axiflow
