#include "axiflow/geometry.hpp"

#include "axiflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace axiflow {

EnergyBreakdown discrete_energy(const DiscreteCurve& curve) {
    EnergyBreakdown e;
    double area = 0.0;
    for (std::size_t k = 0; k < curve.elements(); ++k) {
        const auto [a, b] = curve.element_nodes(k);
        area += (curve.point(b) - curve.point(a)).norm() * 0.5 * (curve.r(a) + curve.r(b));
    }
    e.area = 2.0 * std::numbers::pi * area;
    if (curve.is_closed()) return e;
    for (int p = 0; p < 2; ++p) {
        const auto& end = curve.end(p);
        const Vec2& x = p == 0 ? curve.points().front() : curve.points().back();
        if (end.kind == BoundaryKind::CylinderSlide)
            e.cylinder += 2.0 * std::numbers::pi * end.rho * x.x() * x.y();
        else if (end.kind == BoundaryKind::PlaneSlide)
            e.plane += std::numbers::pi * end.rho * x.x() * x.x();
    }
    return e;
}

double enclosed_volume(const DiscreteCurve& curve) {
    if (!curve.is_closed() && !(curve.end(0).kind == BoundaryKind::Axis && curve.end(1).kind == BoundaryKind::Axis))
        throw OpenSurface("volume needs a closed surface");
    double v = 0.0;
    for (std::size_t k = 0; k < curve.elements(); ++k) {
        const auto [a, b] = curve.element_nodes(k);
        const double ra = curve.r(a), rb = curve.r(b);
        v += (curve.point(b).y() - curve.point(a).y()) * (ra * ra + ra * rb + rb * rb) / 3.0;
    }
    return std::numbers::pi * v;
}

CurvatureDiagnostics curvature_diagnostics(const DiscreteCurve& curve) {
    const auto geo = element_tangents_normals(curve);
    const auto w = vertex_normals(curve, geo);
    const auto m = lumped_masses(curve, geo);
    const std::size_t n = curve.nodes();

    std::vector<Vec2> ax(n, Vec2::Zero());
    for (std::size_t k = 0; k < curve.elements(); ++k) {
        const auto [a, b] = curve.element_nodes(k);
        const Vec2 d = (curve.point(b) - curve.point(a)) / geo.length[k];
        ax[a] += d;
        ax[b] -= d;
    }

    CurvatureDiagnostics c;
    c.vector.resize(n);
    c.in_plane.resize(n);
    c.ratio.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.vector[i] = ax[i] / m[i];
        if (curve.is_axis_node(i)) c.vector[i].x() = 0.0; // reflection across the axis
        c.in_plane[i] = c.vector[i].dot(w[i]) / w[i].norm();
    }
    if (!curve.is_closed()) {
        const std::size_t last = n - 1;
        if (!curve.is_axis_node(0)) c.in_plane[0] = c.in_plane[1];
        if (!curve.is_axis_node(last)) c.in_plane[last] = c.in_plane[last - 1];
    }
    c.azimuthal.resize(n);
    c.mean.resize(n);
    c.gauss.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.ratio[i] = curve.is_axis_node(i) ? -c.in_plane[i] : w[i].x() / w[i].norm() / curve.r(i);
        c.azimuthal[i] = -c.ratio[i];
        c.mean[i] = c.in_plane[i] - c.ratio[i];
        c.gauss[i] = -c.in_plane[i] * c.ratio[i];
    }
    return c;
}

std::vector<double> contact_angle_residual(const DiscreteCurve& curve) {
    std::vector<double> res(2, 0.0);
    if (curve.is_closed()) return res;
    const auto geo = element_tangents_normals(curve);
    for (int p = 0; p < 2; ++p) {
        const Vec2& tau = p == 0 ? geo.tangent.front() : geo.tangent.back();
        const double sign = p == 0 ? 1.0 : -1.0;
        const auto& end = curve.end(p);
        switch (end.kind) {
        case BoundaryKind::Axis: res[static_cast<std::size_t>(p)] = tau.y(); break;
        case BoundaryKind::CylinderSlide: res[static_cast<std::size_t>(p)] = sign * tau.y() - end.rho; break;
        case BoundaryKind::PlaneSlide: res[static_cast<std::size_t>(p)] = sign * tau.x() - end.rho; break;
        case BoundaryKind::Fixed: break;
        }
    }
    return res;
}

double max_contact_residual(const DiscreteCurve& curve) {
    const auto r = contact_angle_residual(curve);
    return std::max(std::abs(r[0]), std::abs(r[1]));
}

double min_radius(const DiscreteCurve& curve) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < curve.nodes(); ++i)
        if (!curve.is_axis_node(i)) lo = std::min(lo, curve.r(i));
    return lo;
}

double adjacent_length_ratio(const DiscreteCurve& curve, double angle_tol) {
    const auto g = element_tangents_normals(curve);
    const std::size_t J = curve.elements();
    const std::size_t pairs = curve.is_closed() ? J : J - 1;
    double worst = 1.0;
    for (std::size_t e = 0; e < pairs; ++e) {
        const std::size_t f = (e + 1) % J;
        const double cross = g.tangent[e].x() * g.tangent[f].y() - g.tangent[e].y() * g.tangent[f].x();
        const double angle = std::atan2(std::abs(cross), g.tangent[e].dot(g.tangent[f]));
        if (angle <= angle_tol) continue;
        worst = std::max(worst, std::max(g.length[e] / g.length[f], g.length[f] / g.length[e]));
    }
    return worst;
}

double min_element_length(const DiscreteCurve& curve) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < curve.elements(); ++k) {
        const auto [a, b] = curve.element_nodes(k);
        lo = std::min(lo, (curve.point(b) - curve.point(a)).norm());
    }
    return lo;
}

DiagnosticsRow diagnostics(const DiscreteCurve& curve, double time) {
    DiagnosticsRow d;
    d.time = time;
    const auto e = discrete_energy(curve);
    d.energy_total = e.total();
    d.energy_area = e.area;
    try {
        d.volume = enclosed_volume(curve);
    } catch (const OpenSurface&) {
        d.volume = std::numeric_limits<double>::quiet_NaN();
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t k = 0; k < curve.elements(); ++k) {
        const auto [a, b] = curve.element_nodes(k);
        const double l = (curve.point(b) - curve.point(a)).norm();
        lo = std::min(lo, l);
        hi = std::max(hi, l);
    }
    d.ratio = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    d.min_r = min_radius(curve);
    d.min_element_length = lo;
    d.max_contact_residual = lo > 0.0 ? max_contact_residual(curve) : std::numeric_limits<double>::quiet_NaN();
    return d;
}

} // namespace axiflow
