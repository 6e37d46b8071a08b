#include "axiflow/mesh.hpp"

#include "axiflow/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace axiflow {

std::string to_string(BoundaryKind kind) {
    switch (kind) {
    case BoundaryKind::Axis: return "axis";
    case BoundaryKind::Fixed: return "fixed";
    case BoundaryKind::CylinderSlide: return "cylinder";
    case BoundaryKind::PlaneSlide: return "plane";
    }
    return "?";
}

BoundaryKind boundary_kind_from_string(const std::string& name) {
    if (name == "axis") return BoundaryKind::Axis;
    if (name == "fixed") return BoundaryKind::Fixed;
    if (name == "cylinder") return BoundaryKind::CylinderSlide;
    if (name == "plane") return BoundaryKind::PlaneSlide;
    throw ParseError("unknown boundary kind '" + name + "'");
}

DiscreteCurve DiscreteCurve::closed(std::vector<Vec2> nodes) {
    DiscreteCurve c;
    c.pts_ = std::move(nodes);
    c.closed_ = true;
    c.check_structure();
    return c;
}

DiscreteCurve DiscreteCurve::open(std::vector<Vec2> nodes, EndCondition first, EndCondition last) {
    DiscreteCurve c;
    c.pts_ = std::move(nodes);
    c.closed_ = false;
    c.ends_ = {first, last};
    c.check_structure();
    return c;
}

void DiscreteCurve::check_structure() const {
    const std::size_t min_nodes = closed_ ? 3 : 4;
    if (pts_.size() < min_nodes)
        throw InvalidCurve("curve needs J >= 3 elements");
    for (const auto& p : pts_)
        if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
            throw InvalidCurve("non-finite node coordinate");
    if (closed_) return;
    for (int p = 0; p < 2; ++p) {
        const auto& e = ends_[static_cast<std::size_t>(p)];
        if (std::abs(e.rho) > 1.0)
            throw InvalidCurve("contact energy density must satisfy |rho| <= 1");
        const Vec2& x = p == 0 ? pts_.front() : pts_.back();
        if (e.kind == BoundaryKind::Axis && x.x() != 0.0)
            throw InvalidCurve("axis endpoint must have r = 0");
    }
}

int DiscreteCurve::endpoint_index(std::size_t i) const {
    if (closed_) return -1;
    if (i == 0) return 0;
    if (i + 1 == pts_.size()) return 1;
    return -1;
}

bool DiscreteCurve::is_axis_node(std::size_t i) const {
    const int p = endpoint_index(i);
    return p >= 0 && ends_[static_cast<std::size_t>(p)].kind == BoundaryKind::Axis;
}

bool DiscreteCurve::constrained(std::size_t i, int k) const {
    const int p = endpoint_index(i);
    if (p < 0) return false;
    switch (ends_[static_cast<std::size_t>(p)].kind) {
    case BoundaryKind::Axis:
    case BoundaryKind::CylinderSlide: return k == 0;
    case BoundaryKind::PlaneSlide: return k == 1;
    case BoundaryKind::Fixed: return true;
    }
    return false;
}

DiscreteCurve DiscreteCurve::with_points(std::vector<Vec2> nodes) const {
    DiscreteCurve c = *this;
    if (nodes.size() != pts_.size())
        throw InvalidCurve("node count mismatch");
    c.pts_ = std::move(nodes);
    return c;
}

double diameter(const DiscreteCurve& curve) {
    Vec2 lo = curve.point(0), hi = curve.point(0);
    for (const auto& p : curve.points()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

ElementGeometry element_tangents_normals(const DiscreteCurve& curve) {
    const std::size_t J = curve.elements();
    ElementGeometry g;
    g.length.resize(J);
    g.tangent.resize(J);
    g.normal.resize(J);
    const double tol = 1e-14 * diameter(curve);
    for (std::size_t e = 0; e < J; ++e) {
        const auto [a, b] = curve.element_nodes(e);
        const Vec2 d = curve.point(b) - curve.point(a);
        const double l = d.norm();
        if (!(l > tol))
            throw ZeroLengthElement("element " + std::to_string(e) + " has zero length");
        g.length[e] = l;
        g.tangent[e] = d / l;
        g.normal[e] = Vec2(g.tangent[e].y(), -g.tangent[e].x());
    }
    return g;
}

std::vector<Vec2> vertex_normals(const DiscreteCurve& curve, const ElementGeometry& geo) {
    const std::size_t n = curve.nodes();
    const std::size_t J = curve.elements();
    std::vector<Vec2> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool has_left = curve.is_closed() || i > 0;
        const bool has_right = curve.is_closed() || i < J;
        const std::size_t l = i == 0 ? J - 1 : i - 1;
        Vec2 acc = Vec2::Zero();
        double len = 0.0;
        if (has_left) {
            acc += geo.length[l] * geo.normal[l];
            len += geo.length[l];
        }
        if (has_right) {
            acc += geo.length[i] * geo.normal[i];
            len += geo.length[i];
        }
        w[i] = acc / len;
    }
    return w;
}

std::vector<double> lumped_masses(const DiscreteCurve& curve, const ElementGeometry& geo) {
    std::vector<double> m(curve.nodes(), 0.0);
    for (std::size_t e = 0; e < curve.elements(); ++e) {
        const auto [a, b] = curve.element_nodes(e);
        m[a] += 0.5 * geo.length[e];
        m[b] += 0.5 * geo.length[e];
    }
    return m;
}

double element_ratio(const DiscreteCurve& curve) {
    const auto g = element_tangents_normals(curve);
    const auto [lo, hi] = std::minmax_element(g.length.begin(), g.length.end());
    return *hi / *lo;
}

// ---------------------------------------------------------------------------
// ElementField

ElementField ElementField::nodal(const DiscreteCurve& curve, const std::vector<double>& values) {
    if (values.size() != curve.nodes())
        throw InvalidCurve("nodal field size mismatch");
    ElementField f(curve.elements());
    for (std::size_t e = 0; e < curve.elements(); ++e) {
        const auto [a, b] = curve.element_nodes(e);
        f.c_[e][0] = values[a];
        f.c_[e][1] = values[b] - values[a];
    }
    return f;
}

ElementField ElementField::per_element(const std::vector<double>& values) {
    ElementField f(values.size());
    for (std::size_t e = 0; e < values.size(); ++e) f.c_[e][0] = values[e];
    return f;
}

ElementField ElementField::hat(const DiscreteCurve& curve, std::size_t node) {
    std::vector<double> v(curve.nodes(), 0.0);
    v[node] = 1.0;
    return nodal(curve, v);
}

ElementField ElementField::constant(std::size_t elements, double value) {
    ElementField f(elements);
    for (auto& c : f.c_) c[0] = value;
    return f;
}

ElementField ElementField::endpoints(const std::vector<std::pair<double, double>>& values) {
    ElementField f(values.size());
    for (std::size_t e = 0; e < values.size(); ++e) {
        f.c_[e][0] = values[e].first;
        f.c_[e][1] = values[e].second - values[e].first;
    }
    return f;
}

double ElementField::operator()(std::size_t e, double s) const {
    const auto& c = c_[e];
    double v = 0.0;
    for (int k = max_degree; k >= 0; --k) v = v * s + c[static_cast<std::size_t>(k)];
    return v;
}

ElementField ElementField::operator+(const ElementField& o) const {
    ElementField r(*this);
    for (std::size_t e = 0; e < c_.size(); ++e)
        for (std::size_t k = 0; k <= max_degree; ++k) r.c_[e][k] += o.c_[e][k];
    return r;
}

ElementField ElementField::operator-(const ElementField& o) const { return *this + o * -1.0; }

ElementField ElementField::operator*(double a) const {
    ElementField r(*this);
    for (auto& c : r.c_)
        for (auto& v : c) v *= a;
    return r;
}

ElementField ElementField::operator*(const ElementField& o) const {
    ElementField r(c_.size());
    for (std::size_t e = 0; e < c_.size(); ++e) {
        for (std::size_t i = 0; i <= max_degree; ++i) {
            if (c_[e][i] == 0.0) continue;
            for (std::size_t j = 0; j <= max_degree; ++j) {
                if (o.c_[e][j] == 0.0) continue;
                if (i + j > max_degree)
                    throw InvalidCurve("element field degree exceeds 4");
                r.c_[e][i + j] += c_[e][i] * o.c_[e][j];
            }
        }
    }
    return r;
}

ElementField ElementField::derivative() const {
    const double J = static_cast<double>(c_.size());
    ElementField r(c_.size());
    for (std::size_t e = 0; e < c_.size(); ++e)
        for (std::size_t k = 1; k <= max_degree; ++k)
            r.c_[e][k - 1] = J * static_cast<double>(k) * c_[e][k];
    return r;
}

double ip_lumped(const ElementField& f, const ElementField& g, const ElementField& w) {
    const std::size_t J = f.elements();
    const double h = 1.0 / static_cast<double>(J);
    double sum = 0.0;
    for (std::size_t e = 0; e < J; ++e)
        sum += f(e, 1.0) * g(e, 1.0) * w(e, 1.0) + f(e, 0.0) * g(e, 0.0) * w(e, 0.0);
    return 0.5 * h * sum;
}

double ip_exact(const ElementField& f, const ElementField& g, const ElementField& w) {
    static const double d = std::sqrt(0.6);
    static const std::array<double, 3> s{0.5 * (1.0 - d), 0.5, 0.5 * (1.0 + d)};
    static const std::array<double, 3> wt{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    const std::size_t J = f.elements();
    const double h = 1.0 / static_cast<double>(J);
    double sum = 0.0;
    for (std::size_t e = 0; e < J; ++e)
        for (std::size_t q = 0; q < 3; ++q) sum += wt[q] * f(e, s[q]) * g(e, s[q]) * w(e, s[q]);
    return h * sum;
}

// ---------------------------------------------------------------------------
// Assumptions

bool spans_plane(const std::vector<Vec2>& vectors) {
    if (vectors.empty()) return false;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(vectors.size()), 2);
    for (std::size_t i = 0; i < vectors.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = vectors[i].transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    return s(0) > 0.0 && s(1) > 1e-10 * s(0);
}

AssumptionReport check_assumptions(const DiscreteCurve& curve) {
    AssumptionReport rep;
    for (std::size_t i = 0; i < curve.nodes(); ++i) {
        if (!curve.is_axis_node(i) && !(curve.r(i) > 0.0)) {
            rep.a = false;
            rep.detail += "node " + std::to_string(i) + " has r <= 0; ";
            break;
        }
    }
    ElementGeometry geo;
    try {
        geo = element_tangents_normals(curve);
    } catch (const ZeroLengthElement& e) {
        rep.a = rep.b_lumped = rep.c_lumped = rep.c_exact = false;
        rep.detail += e.what();
        return rep;
    }
    const auto w = vertex_normals(curve, geo);
    rep.b_lumped = spans_plane(w);
    if (!rep.b_lumped) rep.detail += "vertex normals are collinear; ";

    std::vector<Vec2> zl;
    for (std::size_t i = 0; i < curve.nodes(); ++i)
        if (!curve.is_axis_node(i)) zl.push_back(curve.r(i) * w[i]);
    rep.c_lumped = spans_plane(zl);
    if (!rep.c_lumped) rep.detail += "weighted vertex normals are collinear; ";

    std::vector<Vec2> ze(curve.nodes(), Vec2::Zero());
    for (std::size_t e = 0; e < curve.elements(); ++e) {
        const auto [a, b] = curve.element_nodes(e);
        const double ra = curve.r(a), rb = curve.r(b);
        ze[a] += geo.length[e] * (ra / 3.0 + rb / 6.0) * geo.normal[e];
        ze[b] += geo.length[e] * (ra / 6.0 + rb / 3.0) * geo.normal[e];
    }
    rep.c_exact = spans_plane(ze);
    if (!rep.c_exact) rep.detail += "weighted normal moments are collinear; ";
    return rep;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("bad number '" + s + "'");
    return v;
}

std::string format_end(const EndCondition& e) {
    std::string s = to_string(e.kind);
    if (e.kind == BoundaryKind::CylinderSlide || e.kind == BoundaryKind::PlaneSlide)
        s += ":" + format_double(e.rho);
    return s;
}

EndCondition parse_end(const std::string& tok) {
    EndCondition e;
    const auto colon = tok.find(':');
    e.kind = boundary_kind_from_string(tok.substr(0, colon));
    if (colon != std::string::npos) e.rho = parse_double(tok.substr(colon + 1));
    return e;
}

} // namespace

void write_curve(std::ostream& out, const DiscreteCurve& curve) {
    if (curve.is_closed())
        out << "closed\n";
    else
        out << "open " << format_end(curve.end(0)) << ' ' << format_end(curve.end(1)) << '\n';
    for (const auto& p : curve.points()) out << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
}

DiscreteCurve read_curve(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty curve file");
    std::istringstream head(line);
    std::string kind;
    head >> kind;
    bool closed = false;
    EndCondition e0, e1;
    if (kind == "closed") {
        closed = true;
    } else if (kind == "open") {
        std::string a, b;
        if (!(head >> a >> b)) throw ParseError("open header needs two endpoint kinds");
        e0 = parse_end(a);
        e1 = parse_end(b);
    } else {
        throw ParseError("unknown curve header '" + line + "'");
    }
    std::vector<Vec2> pts;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string rs, zs;
        if (!(ls >> rs)) continue;
        if (!(ls >> zs)) throw ParseError("node line needs two numbers");
        pts.emplace_back(parse_double(rs), parse_double(zs));
    }
    return closed ? DiscreteCurve::closed(std::move(pts)) : DiscreteCurve::open(std::move(pts), e0, e1);
}

void write_curve_file(const std::string& path, const DiscreteCurve& curve) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write_curve(out, curve);
}

DiscreteCurve read_curve_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read " + path);
    return read_curve(in);
}

} // namespace axiflow
