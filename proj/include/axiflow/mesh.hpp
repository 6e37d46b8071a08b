#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace axiflow {

using Vec2 = Eigen::Vector2d;

/// Endpoint conditions of an open generating curve.
///   Axis          : endpoint on the rotation axis (r = 0, slides along it)
///   Fixed         : endpoint does not move
///   CylinderSlide : endpoint slides on the cylinder r = const
///   PlaneSlide    : endpoint slides on the plane z = const
enum class BoundaryKind { Axis, Fixed, CylinderSlide, PlaneSlide };

struct EndCondition {
    BoundaryKind kind = BoundaryKind::Axis;
    double rho = 0.0; // contact energy density (sliding kinds only)
};

std::string to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& name);

/// Piecewise linear generating curve in the (r, z) half plane over the
/// uniform reference grid q_j = j / J.
///
/// Closed curves store J distinct nodes; open curves store J + 1.
class DiscreteCurve {
public:
    DiscreteCurve() = default; // empty placeholder

    static DiscreteCurve closed(std::vector<Vec2> nodes);
    static DiscreteCurve open(std::vector<Vec2> nodes, EndCondition first, EndCondition last);

    bool is_closed() const { return closed_; }
    std::size_t elements() const { return closed_ ? pts_.size() : pts_.size() - 1; }
    std::size_t nodes() const { return pts_.size(); }
    double h() const { return 1.0 / static_cast<double>(elements()); }

    const std::vector<Vec2>& points() const { return pts_; }
    const Vec2& point(std::size_t i) const { return pts_[i]; }
    double r(std::size_t i) const { return pts_[i].x(); }

    /// p = 0 first node, p = 1 last node. Only meaningful for open curves.
    const EndCondition& end(int p) const { return ends_[static_cast<std::size_t>(p)]; }

    /// Nodes (a, b) of element e, e = 0..J-1, with b following a.
    std::pair<std::size_t, std::size_t> element_nodes(std::size_t e) const {
        return {e, closed_ && e + 1 == pts_.size() ? 0 : e + 1};
    }

    /// -1 for interior nodes, otherwise the endpoint index p.
    int endpoint_index(std::size_t i) const;
    bool is_axis_node(std::size_t i) const;

    /// Component k of the displacement at node i is pinned by the boundary condition.
    bool constrained(std::size_t i, int k) const;

    /// Same topology and endpoint data, new node positions.
    DiscreteCurve with_points(std::vector<Vec2> nodes) const;

private:
    void check_structure() const;

    std::vector<Vec2> pts_;
    bool closed_ = true;
    std::array<EndCondition, 2> ends_{};
};

struct ElementGeometry {
    std::vector<double> length; // |h_j|
    std::vector<Vec2> tangent;
    std::vector<Vec2> normal;
};

/// Element lengths, unit tangents and normals nu = (tau_z, -tau_r).
/// Throws ZeroLengthElement below 1e-14 times the curve diameter.
ElementGeometry element_tangents_normals(const DiscreteCurve& curve);

/// Length-weighted vertex normals; endpoints of open curves take the adjacent normal.
std::vector<Vec2> vertex_normals(const DiscreteCurve& curve, const ElementGeometry& geo);

/// Lumped nodal masses (|h_j| + |h_{j+1}|) / 2.
std::vector<double> lumped_masses(const DiscreteCurve& curve, const ElementGeometry& geo);

double element_ratio(const DiscreteCurve& curve);
double diameter(const DiscreteCurve& curve);

/// Piecewise polynomial field on the J elements of a curve, stored per element
/// as coefficients in the local coordinate s in [0, 1] (degree <= 4).
class ElementField {
public:
    static constexpr int max_degree = 4;
    using Coeffs = std::array<double, max_degree + 1>;

    explicit ElementField(std::size_t elements = 0) : c_(elements, Coeffs{}) {}

    static ElementField nodal(const DiscreteCurve& curve, const std::vector<double>& values);
    static ElementField per_element(const std::vector<double>& values);
    static ElementField hat(const DiscreteCurve& curve, std::size_t node);
    static ElementField constant(std::size_t elements, double value);
    /// Linear on each element with given one-sided endpoint values (left = s 0, right = s 1).
    static ElementField endpoints(const std::vector<std::pair<double, double>>& values);

    std::size_t elements() const { return c_.size(); }
    double operator()(std::size_t e, double s) const;
    Coeffs& coeffs(std::size_t e) { return c_[e]; }
    const Coeffs& coeffs(std::size_t e) const { return c_[e]; }

    ElementField operator+(const ElementField& o) const;
    ElementField operator-(const ElementField& o) const;
    ElementField operator*(const ElementField& o) const;
    ElementField operator*(double a) const;
    /// Derivative with respect to the reference coordinate rho (= J d/ds).
    ElementField derivative() const;

private:
    std::vector<Coeffs> c_;
};

/// Mass-lumped product (h / 2) sum_j [(f g w)(q_j^-) + (f g w)(q_{j-1}^+)].
double ip_lumped(const ElementField& f, const ElementField& g, const ElementField& weight);
/// Exact product by 3-point Gauss quadrature on each element.
double ip_exact(const ElementField& f, const ElementField& g, const ElementField& weight);

struct AssumptionReport {
    bool a = true;        // positive lengths, positive radius away from the axis
    bool b_lumped = true; // vertex normals span R^2
    bool c_lumped = true; // r-weighted vertex normals off the axis span R^2
    bool c_exact = true;  // r-weighted exact normal moments span R^2
    std::string detail;
};

/// Rank test: smallest singular value > 1e-10 times the largest.
bool spans_plane(const std::vector<Vec2>& vectors);
AssumptionReport check_assumptions(const DiscreteCurve& curve);

/// Text format: header "closed" or "open <kind>[:rho] <kind>[:rho]",
/// then one "r z" line per node in shortest round-trip form.
void write_curve(std::ostream& out, const DiscreteCurve& curve);
DiscreteCurve read_curve(std::istream& in);
void write_curve_file(const std::string& path, const DiscreteCurve& curve);
DiscreteCurve read_curve_file(const std::string& path);

} // namespace axiflow
