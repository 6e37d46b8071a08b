#include "axiflow/errors.hpp"
#include "axiflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace axiflow {

namespace {

constexpr double pi = std::numbers::pi;

/// Resamples a closed polygon to J nodes equally spaced in arc length.
std::vector<Vec2> resample_closed(const std::vector<Vec2>& poly, std::size_t J) {
    std::vector<double> s(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) s[i + 1] = s[i] + (poly[(i + 1) % poly.size()] - poly[i]).norm();
    const double L = s.back();
    std::vector<Vec2> out;
    out.reserve(J);
    std::size_t seg = 0;
    for (std::size_t j = 0; j < J; ++j) {
        const double target = L * static_cast<double>(j) / static_cast<double>(J);
        while (s[seg + 1] < target) ++seg;
        const double t = (target - s[seg]) / (s[seg + 1] - s[seg]);
        out.push_back((1.0 - t) * poly[seg] + t * poly[(seg + 1) % poly.size()]);
    }
    return out;
}

} // namespace

DiscreteCurve semicircle(std::size_t J, double radius) {
    std::vector<Vec2> pts(J + 1);
    for (std::size_t j = 0; j <= J; ++j) {
        const double phi = (static_cast<double>(j) / static_cast<double>(J) - 0.5) * pi;
        const double theta = phi + 0.1 * std::cos(phi);
        pts[j] = radius * Vec2(std::cos(theta), std::sin(theta));
    }
    pts.front().x() = 0.0;
    pts.back().x() = 0.0;
    return DiscreteCurve::open(std::move(pts), {BoundaryKind::Axis, 0.0}, {BoundaryKind::Axis, 0.0});
}

DiscreteCurve circle(std::size_t J, double R, double r, double z0) {
    std::vector<Vec2> pts(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double a = 2.0 * pi * static_cast<double>(j) / static_cast<double>(J);
        pts[j] = Vec2(R + r * std::cos(a), z0 + r * std::sin(a));
    }
    return DiscreteCurve::closed(std::move(pts));
}

DiscreteCurve cylinder(std::size_t J, double radius, double z0, double z1, EndCondition bottom, EndCondition top) {
    std::vector<Vec2> pts(J + 1);
    for (std::size_t j = 0; j <= J; ++j)
        pts[j] = Vec2(radius, z0 + (z1 - z0) * static_cast<double>(j) / static_cast<double>(J));
    return DiscreteCurve::open(std::move(pts), bottom, top);
}

DiscreteCurve disc(std::size_t J, double radius, double z, EndCondition rim) {
    std::vector<Vec2> pts(J + 1);
    for (std::size_t j = 0; j <= J; ++j) pts[j] = Vec2(radius * static_cast<double>(j) / static_cast<double>(J), z);
    return DiscreteCurve::open(std::move(pts), {BoundaryKind::Axis, 0.0}, rim);
}

DiscreteCurve superellipse(std::size_t J, double a, double b, double p) {
    std::vector<Vec2> pts(J + 1);
    for (std::size_t j = 0; j <= J; ++j) {
        const double th = (static_cast<double>(j) / static_cast<double>(J) - 0.5) * pi;
        const double c = std::cos(th), s = std::sin(th);
        pts[j] = Vec2(a * std::pow(std::abs(c), 2.0 / p), b * std::copysign(std::pow(std::abs(s), 2.0 / p), s));
    }
    pts.front().x() = 0.0;
    pts.back().x() = 0.0;
    return DiscreteCurve::open(std::move(pts), {BoundaryKind::Axis, 0.0}, {BoundaryKind::Axis, 0.0});
}

DiscreteCurve spiral(std::size_t J, double turns, double R, double width, double pitch) {
    const std::size_t samples = std::max<std::size_t>(4 * J, 2000);
    const double phi_end = 2.0 * pi * turns;
    const double rho0 = 2.0 * width;
    auto centre = [&](double phi) {
        const double rho = rho0 + pitch * phi / (2.0 * pi);
        return Vec2(R + rho * std::cos(phi), rho * std::sin(phi));
    };
    auto normal = [&](double phi) {
        const double eps = 1e-6;
        const Vec2 t = (centre(phi + eps) - centre(phi - eps)).normalized();
        return Vec2(t.y(), -t.x());
    };
    std::vector<Vec2> outer, inner;
    for (std::size_t k = 0; k <= samples; ++k) {
        const double phi = phi_end * static_cast<double>(k) / static_cast<double>(samples);
        outer.push_back(centre(phi) + 0.5 * width * normal(phi));
        inner.push_back(centre(phi) - 0.5 * width * normal(phi));
    }
    std::vector<Vec2> poly = outer;
    const std::size_t cap = 64;
    auto add_cap = [&](double phi, bool at_end) {
        const Vec2 c = centre(phi), nrm = normal(phi);
        const Vec2 tan(-nrm.y(), nrm.x());
        for (std::size_t k = 1; k < cap; ++k) {
            const double a = pi * static_cast<double>(k) / static_cast<double>(cap);
            const Vec2 dir = std::cos(a) * nrm + (at_end ? -1.0 : 1.0) * std::sin(a) * tan;
            poly.push_back(c + 0.5 * width * dir);
        }
    };
    add_cap(phi_end, true);
    for (auto it = inner.rbegin(); it != inner.rend(); ++it) poly.push_back(*it);
    add_cap(0.0, false);
    double area = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        area += p.x() * q.y() - q.x() * p.y();
    }
    if (area < 0.0) std::reverse(poly.begin(), poly.end());
    return DiscreteCurve::closed(resample_closed(poly, J));
}

double sphere_radius_mcf(double r0, double t) {
    const double s = r0 * r0 - 4.0 * t;
    if (s < 0.0) throw PastExtinction("time beyond extinction of the sphere");
    return std::sqrt(s);
}

double sphere_radius_power(double beta, double t) {
    const double s = 1.0 - std::pow(2.0, beta) * (beta + 1.0) * t;
    if (s < 0.0) throw PastExtinction("time beyond extinction of the sphere");
    return std::pow(s, 1.0 / (beta + 1.0));
}

double sphere_radius_inverse(double t) { return std::exp(0.5 * t); }

DiscreteCurve build_initial_curve(const GeometrySpec& g, unsigned long long seed) {
    DiscreteCurve c;
    if (g.type == "semicircle")
        c = semicircle(g.J, g.radius);
    else if (g.type == "circle")
        c = circle(g.J, g.R, g.r, g.z0);
    else if (g.type == "cylinder")
        c = cylinder(g.J, g.radius, g.z0, g.z1, g.bottom, g.top);
    else if (g.type == "disc")
        c = disc(g.J, g.radius, g.z0, g.top);
    else if (g.type == "superellipse")
        c = superellipse(g.J, g.a, g.b, g.p);
    else if (g.type == "spiral")
        c = spiral(g.J, g.turns, g.R, g.width, g.pitch);
    else if (g.type == "file")
        c = read_curve_file(g.path);
    else
        throw InvalidConfig("unknown geometry '" + g.type + "'");

    if (g.jitter > 0.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> U(-0.5, 0.5);
        auto pts = c.points();
        const std::size_t n = pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (c.endpoint_index(i) >= 0) continue;
            const Vec2& prev = c.point(i == 0 ? n - 1 : i - 1);
            const Vec2& next = c.point(i + 1 == n ? 0 : i + 1);
            const double l = std::min((c.point(i) - prev).norm(), (next - c.point(i)).norm());
            pts[i] += g.jitter * U(rng) * l * (next - prev).normalized();
        }
        c = c.with_points(std::move(pts));
    }
    return c;
}

} // namespace axiflow
