#pragma once

#include "axiflow/errors.hpp"
#include "axiflow/harness.hpp"
#include "axiflow/schemes.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace support {

using namespace axiflow;

/// Moves interior nodes by a smooth deterministic perturbation of size amp * h.
inline DiscreteCurve wobble(const DiscreteCurve& c, double amp) {
    std::vector<Vec2> p = c.points();
    const double h = c.h();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!c.is_closed() && c.endpoint_index(i) >= 0) continue;
        const double s = static_cast<double>(i);
        p[i] += amp * h * Vec2(std::sin(1.7 * s + 0.3), std::cos(2.3 * s));
    }
    return c.with_points(std::move(p));
}

struct NamedCurve {
    std::string name;
    DiscreteCurve curve;
};

/// Small curves covering every endpoint kind, both orientations of the plane
/// contact density and a closed curve.
inline std::vector<NamedCurve> test_curves(std::size_t J = 12) {
    return {
        {"semicircle", wobble(semicircle(J), 0.2)},
        {"torus", wobble(circle(J, 2.0, 0.6), 0.3)},
        {"planes", wobble(cylinder(J, 1.0, 0.0, 1.0, {BoundaryKind::PlaneSlide, 0.3}, {BoundaryKind::PlaneSlide, -0.4}), 0.3)},
        {"disc_rim", wobble(disc(J, 1.0, 0.0, {BoundaryKind::CylinderSlide, 0.25}), 0.3)},
        {"fixed", wobble(cylinder(J, 1.0, -1.0, 1.0, {BoundaryKind::Fixed, 0.0}, {BoundaryKind::Fixed, 0.0}), 0.3)},
        {"mixed", wobble(cylinder(J, 1.0, 0.0, 1.0, {BoundaryKind::CylinderSlide, -0.2}, {BoundaryKind::PlaneSlide, 0.5}), 0.3)},
    };
}

/// Every well-defined scheme variant with f = id, plus the nonlinear ones on
/// request. Variants that the spec validation rejects are left out.
inline std::vector<FlowSpec> flow_variants(bool nonlinear) {
    std::vector<FlowSpec> out;
    auto push = [&](FlowSpec f) {
        try {
            f.validate();
            out.push_back(f);
        } catch (const Error&) {
        }
    };
    for (Scheme s : {Scheme::A, Scheme::B, Scheme::C, Scheme::CStar, Scheme::D, Scheme::DStar})
        for (Integration in : {Integration::Lumped, Integration::Exact}) {
            FlowSpec f;
            f.scheme = s;
            f.integration = in;
            push(f);
            f.eliminate = true;
            push(f);
            f.element_normals = true;
            push(f);
            f.eliminate = f.element_normals = false;
            f.conserved = true;
            push(f);
            if (nonlinear) {
                f.conserved = false;
                f.speed = SpeedLaw::power(0.5);
                push(f);
                f.conserved = true;
                push(f);
                f.conserved = false;
                f.speed = SpeedLaw::inverse();
                push(f);
            }
        }
    return out;
}

/// Curvature of the previous step as the schemes expect it: the lagged values
/// of scheme A, nothing for the others.
inline Eigen::VectorXd kappa_prev(const DiscreteCurve& c, const FlowSpec& f) {
    return f.scheme == Scheme::A ? init_kappa0(c) : Eigen::VectorXd{};
}

inline std::string describe(const std::string& curve, const FlowSpec& f) { return curve + " " + f.label(); }

} // namespace support
