#include "axiflow/schemes.hpp"

#include "axiflow/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace axiflow {

std::string to_string(Scheme s) {
    switch (s) {
    case Scheme::A: return "A";
    case Scheme::B: return "B";
    case Scheme::C: return "C";
    case Scheme::CStar: return "C_star";
    case Scheme::D: return "D";
    case Scheme::DStar: return "D_star";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "A") return Scheme::A;
    if (name == "B") return Scheme::B;
    if (name == "C") return Scheme::C;
    if (name == "C_star") return Scheme::CStar;
    if (name == "D") return Scheme::D;
    if (name == "D_star") return Scheme::DStar;
    throw InvalidConfig("unknown scheme '" + name + "'");
}

SpeedLaw SpeedLaw::identity() { return SpeedLaw{}; }

SpeedLaw SpeedLaw::power(double beta) {
    if (!(beta > 0.0)) throw InvalidConfig("power law needs beta > 0");
    SpeedLaw s;
    s.kind = Kind::Power;
    s.beta = beta;
    std::ostringstream n;
    n << "power" << beta;
    s.name = n.str();
    return s;
}

SpeedLaw SpeedLaw::inverse() {
    SpeedLaw s;
    s.kind = Kind::Inverse;
    s.name = "inverse";
    return s;
}

SpeedLaw SpeedLaw::gauss() {
    return custom("gauss", [](double, double g) { return -g; });
}

SpeedLaw SpeedLaw::custom(std::string name, std::function<double(double, double)> F) {
    SpeedLaw s;
    s.kind = Kind::General;
    s.general = std::move(F);
    s.name = std::move(name);
    return s;
}

double SpeedLaw::value(double s) const {
    switch (kind) {
    case Kind::Identity: return s;
    case Kind::Power: return std::pow(std::abs(s), beta - 1.0) * s;
    case Kind::Inverse: return -1.0 / s;
    case Kind::General: break;
    }
    throw InvalidConfig("general speed law has no scalar form");
}

double SpeedLaw::derivative(double s) const {
    switch (kind) {
    case Kind::Identity: return 1.0;
    case Kind::Power: return beta * std::pow(std::abs(s), beta - 1.0);
    case Kind::Inverse: return 1.0 / (s * s);
    case Kind::General: break;
    }
    throw InvalidConfig("general speed law has no scalar form");
}

void FlowSpec::validate() const {
    const bool lumped_only = scheme == Scheme::A || scheme == Scheme::B;
    if (lumped_only && integration == Integration::Exact)
        throw InvalidConfig("schemes A and B are defined with mass lumping only");
    const bool plain = speed.kind == SpeedLaw::Kind::Identity && !conserved;
    if (!plain && scheme != Scheme::A && scheme != Scheme::CStar)
        throw InvalidConfig("speed laws and conservation are defined for schemes A and C_star");
    if (speed.kind == SpeedLaw::Kind::General) {
        if (scheme != Scheme::A || conserved) throw InvalidConfig("general speed laws need scheme A without conservation");
        if (!speed.general) throw InvalidConfig("general speed law without function");
    }
    if (speed.kind == SpeedLaw::Kind::Power && !(speed.beta > 0.0)) throw InvalidConfig("power law needs beta > 0");
    if (eliminate) {
        if (!weighted()) throw InvalidConfig("elimination applies to schemes C, C_star, D, D_star");
        if (integration != Integration::Lumped) throw InvalidConfig("elimination needs mass lumping");
        if (!plain) throw InvalidConfig("elimination needs f = id without conservation");
    }
    if (element_normals && !(eliminate && scheme == Scheme::CStar))
        throw InvalidConfig("element normal projection is a variant of the eliminated C_star scheme");
    if (!(newton.tolerance > 0.0) || newton.max_iterations < 1 || newton.max_halvings < 0)
        throw InvalidConfig("bad Newton settings");
}

std::string FlowSpec::label() const {
    std::string s = to_string(scheme);
    if (weighted()) s += integration == Integration::Lumped ? "^h" : "";
    if (speed.kind != SpeedLaw::Kind::Identity) s += "[" + speed.name + "]";
    if (conserved) s += "[V]";
    if (eliminate) s += element_normals ? "[elim-nu]" : "[elim]";
    return s;
}

// ---------------------------------------------------------------------------

std::vector<double> axis_substitute(const DiscreteCurve& curve, const Eigen::VectorXd& kappa) {
    const auto geo = element_tangents_normals(curve);
    const auto w = vertex_normals(curve, geo);
    std::vector<double> k(curve.nodes());
    for (std::size_t i = 0; i < curve.nodes(); ++i)
        k[i] = curve.is_axis_node(i) ? -kappa(static_cast<Eigen::Index>(i)) : w[i].x() / curve.r(i);
    return k;
}

std::vector<Vec2> axis_substitute_vector(const DiscreteCurve& curve, const Eigen::VectorXd& kappa) {
    const auto geo = element_tangents_normals(curve);
    const auto w = vertex_normals(curve, geo);
    std::vector<Vec2> k(curve.nodes());
    for (std::size_t i = 0; i < curve.nodes(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        if (curve.is_axis_node(i))
            k[i] = -Vec2(kappa(2 * ii), kappa(2 * ii + 1));
        else
            k[i] = w[i].x() / curve.r(i) * w[i] / w[i].squaredNorm();
    }
    return k;
}

Eigen::VectorXd init_kappa0(const DiscreteCurve& curve) {
    const auto geo = element_tangents_normals(curve);
    const auto w = vertex_normals(curve, geo);
    const auto m = lumped_masses(curve, geo);
    std::vector<Vec2> ax(curve.nodes(), Vec2::Zero());
    for (std::size_t e = 0; e < curve.elements(); ++e) {
        const auto [a, b] = curve.element_nodes(e);
        const Vec2 d = (curve.point(b) - curve.point(a)) / geo.length[e];
        ax[a] += d;
        ax[b] -= d;
    }
    Eigen::VectorXd k(static_cast<Eigen::Index>(curve.nodes()));
    for (std::size_t i = 0; i < curve.nodes(); ++i) k(static_cast<Eigen::Index>(i)) = ax[i].dot(w[i]) / (m[i] * w[i].norm());
    return k;
}

// ---------------------------------------------------------------------------

namespace {

enum class Family { A, B, C, D, ElimC, ElimD };

double positive_part(double x) { return std::max(x, 0.0); }
double negative_part(double x) { return std::min(x, 0.0); }

} // namespace

struct SchemeProblem::Impl {
    DiscreteCurve curve;
    double dt = 0.0;
    FlowSpec spec;
    Family family = Family::A;
    int b = 3;
    std::size_t n = 0, J = 0;
    bool is_linear = true;

    ElementGeometry geo;
    std::vector<Vec2> omega;
    std::vector<double> mass, r, lambda, quot;
    std::vector<Vec2> quot_vec;
    std::vector<double> stiff;
    std::vector<std::array<double, 4>> W; // l_e * weighted element mass (aa, ab, ba, bb)
    std::vector<double> colsum;           // (r, chi_j |X_rho|)
    double rsum = 0.0;                    // (r, |X_rho|)
    double c_lag = 0.0;
    std::vector<double> explicit_speed;
    std::vector<char> pin;
    Eigen::VectorXd u0;
    std::vector<double> sign_ref;

    Eigen::Index idx(std::size_t i, int c) const { return static_cast<Eigen::Index>(i) * b + c; }

    Impl(const DiscreteCurve& c, double dt_, const FlowSpec& s, const Eigen::VectorXd& kprev);
    void evaluate(const Eigen::VectorXd& u, Eigen::VectorXd* R, LinearSystem* jac) const;
    double phi(const Eigen::VectorXd& u, std::size_t j) const;
    double phi_prime(const Eigen::VectorXd& u, std::size_t j) const;
    double speed_argument(const Eigen::VectorXd& u, std::size_t i) const;
};

SchemeProblem::Impl::Impl(const DiscreteCurve& c, double dt_, const FlowSpec& s, const Eigen::VectorXd& kprev)
    : curve(c), dt(dt_), spec(s) {
    spec.validate();
    if (!(dt > 0.0)) throw InvalidConfig("time step must be positive");
    n = curve.nodes();
    J = curve.elements();
    const bool lumped = spec.integration == Integration::Lumped;

    switch (spec.scheme) {
    case Scheme::A: family = Family::A; b = 3; break;
    case Scheme::B: family = Family::B; b = 4; break;
    case Scheme::C:
    case Scheme::CStar: family = spec.eliminate ? Family::ElimC : Family::C; b = spec.eliminate ? 2 : 3; break;
    case Scheme::D:
    case Scheme::DStar: family = spec.eliminate ? Family::ElimD : Family::D; b = spec.eliminate ? 2 : 4; break;
    }
    if (spec.speed.kind == SpeedLaw::Kind::General && !curve.is_closed())
        for (int p = 0; p < 2; ++p)
            if (curve.end(p).kind == BoundaryKind::Fixed)
                throw InvalidConfig("explicit speed laws are not defined with fixed endpoints");

    for (std::size_t i = 0; i < n; ++i)
        if (!curve.is_axis_node(i) && !(curve.r(i) > 0.0))
            throw AssumptionViolated("node " + std::to_string(i) + " has r <= 0");
    try {
        geo = element_tangents_normals(curve);
    } catch (const ZeroLengthElement& e) {
        throw AssumptionViolated(e.what());
    }
    omega = vertex_normals(curve, geo);
    mass = lumped_masses(curve, geo);

    r.resize(n);
    lambda.resize(n);
    quot.resize(n);
    quot_vec.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = curve.r(i);
        const bool axis = curve.is_axis_node(i);
        lambda[i] = axis ? 2.0 : 1.0;
        quot[i] = axis ? 0.0 : omega[i].x() / r[i];
        quot_vec[i] = axis ? Vec2::Zero() : Vec2(quot[i] * omega[i] / omega[i].squaredNorm());
    }

    stiff.resize(J);
    W.resize(J);
    colsum.assign(n, 0.0);
    rsum = 0.0;
    for (std::size_t e = 0; e < J; ++e) {
        const auto [a, bn] = curve.element_nodes(e);
        const double l = geo.length[e];
        const double ra = r[a], rb = r[bn];
        if (spec.weighted()) {
            stiff[e] = 0.5 * (ra + rb) / l;
            if (lumped)
                W[e] = {l * ra / 2.0, 0.0, 0.0, l * rb / 2.0};
            else
                W[e] = {l * (ra / 4.0 + rb / 12.0), l * (ra + rb) / 12.0, l * (ra + rb) / 12.0, l * (ra / 12.0 + rb / 4.0)};
            colsum[a] += W[e][0] + W[e][2];
            colsum[bn] += W[e][1] + W[e][3];
        } else {
            stiff[e] = 1.0 / l;
        }
        rsum += l * 0.5 * (ra + rb);
    }

    pin.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(b), 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 2; ++k)
            if (curve.constrained(i, k)) pin[static_cast<std::size_t>(idx(i, k))] = 1;
        if (lumped && curve.is_axis_node(i) && (family == Family::C || family == Family::D))
            for (int c2 = 2; c2 < b; ++c2) pin[static_cast<std::size_t>(idx(i, c2))] = 1;
    }

    // Previous curvature, used for lagged terms and the Newton start.
    Eigen::VectorXd kap;
    if (family == Family::A) {
        kap = kprev.size() == static_cast<Eigen::Index>(n) ? kprev : init_kappa0(curve);
    } else if (family == Family::C) {
        if (kprev.size() == static_cast<Eigen::Index>(n)) {
            kap = kprev;
        } else {
            const auto cd = curvature_diagnostics(curve);
            kap = Eigen::Map<const Eigen::VectorXd>(cd.mean.data(), static_cast<Eigen::Index>(n));
        }
    }

    const bool general = spec.speed.kind == SpeedLaw::Kind::General;
    is_linear = true;
    if (spec.implicit_area()) is_linear = false;
    if (family == Family::A && !general && spec.speed.kind != SpeedLaw::Kind::Identity) is_linear = false;

    if (family == Family::A && (spec.conserved || general)) {
        const auto K = axis_substitute(curve, kap);
        if (spec.conserved) {
            double num = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (!curve.is_axis_node(i)) num += r[i] * mass[i] * spec.speed.value(kap(static_cast<Eigen::Index>(i)) - K[i]);
            c_lag = num / rsum;
        } else {
            explicit_speed.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double k = kap(static_cast<Eigen::Index>(i));
                explicit_speed[i] = spec.speed.general(k - K[i], -k * K[i]);
            }
        }
    }

    u0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * b);
    if (!is_linear && (family == Family::A || family == Family::C)) {
        for (std::size_t i = 0; i < n; ++i) u0(idx(i, 2)) = kap(static_cast<Eigen::Index>(i));
        if (family == Family::A && !curve.is_closed()) {
            // kappa^0 vanishes at the axis; start from the neighbouring value instead
            if (curve.is_axis_node(0) && u0(idx(0, 2)) == 0.0) u0(idx(0, 2)) = u0(idx(1, 2));
            if (curve.is_axis_node(n - 1) && u0(idx(n - 1, 2)) == 0.0) u0(idx(n - 1, 2)) = u0(idx(n - 2, 2));
        }
        for (std::size_t k = 0; k < pin.size(); ++k)
            if (pin[k]) u0(static_cast<Eigen::Index>(k)) = 0.0;
    }
    if (spec.speed.needs_sign()) {
        sign_ref.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (pin[static_cast<std::size_t>(idx(i, 2))]) continue;
            sign_ref[i] = family == Family::A ? speed_argument(u0, i) : u0(idx(i, 2));
            sign_ref[i] = sign_ref[i] > 0.0 ? 1.0 : (sign_ref[i] < 0.0 ? -1.0 : 0.0);
        }
    }
}

double SchemeProblem::Impl::speed_argument(const Eigen::VectorXd& u, std::size_t i) const {
    return lambda[i] * u(idx(i, 2)) - quot[i];
}

double SchemeProblem::Impl::phi(const Eigen::VectorXd& u, std::size_t j) const {
    if (pin[static_cast<std::size_t>(idx(j, 2))]) return 0.0;
    return spec.speed.value(u(idx(j, 2)));
}

double SchemeProblem::Impl::phi_prime(const Eigen::VectorXd& u, std::size_t j) const {
    if (pin[static_cast<std::size_t>(idx(j, 2))]) return 0.0;
    return spec.speed.derivative(u(idx(j, 2)));
}

void SchemeProblem::Impl::evaluate(const Eigen::VectorXd& u, Eigen::VectorXd* Rp, LinearSystem* jac) const {
    const Eigen::Index N = static_cast<Eigen::Index>(n) * b;
    Eigen::VectorXd R = Eigen::VectorXd::Zero(N);
    BlockTridiagonal M;
    if (jac) M = BlockTridiagonal(n, b, curve.is_closed());
    auto addJ = [&](std::size_t i, int ci, std::size_t j, int cj, double v) {
        if (jac) M.add(i, ci, j, cj, v);
    };
    auto dx = [&](std::size_t i) { return Vec2(u(idx(i, 0)), u(idx(i, 1))); };
    const double idt = 1.0 / dt;
    const bool star = spec.implicit_area();

    std::vector<Vec2> xn(n);
    for (std::size_t i = 0; i < n; ++i) xn[i] = curve.point(i) + dx(i);

    // stiffness (X^{m+1}_rho, eta_rho w)
    for (std::size_t e = 0; e < J; ++e) {
        const auto [a, bn] = curve.element_nodes(e);
        const Vec2 d = xn[bn] - xn[a];
        const double w = stiff[e];
        for (int k = 0; k < 2; ++k) {
            R(idx(a, k)) -= w * d(k);
            R(idx(bn, k)) += w * d(k);
            addJ(a, k, a, k, w);
            addJ(a, k, bn, k, -w);
            addJ(bn, k, bn, k, w);
            addJ(bn, k, a, k, -w);
        }
    }

    // area term (eta . e1, |X_rho|) of the weighted schemes
    if (family != Family::A && family != Family::B) {
        if (!star) {
            for (std::size_t i = 0; i < n; ++i) R(idx(i, 0)) += mass[i];
        } else {
            for (std::size_t e = 0; e < J; ++e) {
                const auto [a, bn] = curve.element_nodes(e);
                const Vec2 d = xn[bn] - xn[a];
                const double L = d.norm();
                const Vec2 t = d / L;
                R(idx(a, 0)) += 0.5 * L;
                R(idx(bn, 0)) += 0.5 * L;
                for (int l = 0; l < 2; ++l) {
                    addJ(a, 0, bn, l, 0.5 * t(l));
                    addJ(a, 0, a, l, -0.5 * t(l));
                    addJ(bn, 0, bn, l, 0.5 * t(l));
                    addJ(bn, 0, a, l, -0.5 * t(l));
                }
            }
        }
    }

    // contact terms
    if (!curve.is_closed()) {
        for (int p = 0; p < 2; ++p) {
            const std::size_t i = p == 0 ? 0 : n - 1;
            const auto& end = curve.end(p);
            const double wr = spec.weighted() ? r[i] : 1.0;
            if (end.kind == BoundaryKind::CylinderSlide) {
                R(idx(i, 1)) += end.rho * wr;
            } else if (end.kind == BoundaryKind::PlaneSlide) {
                if (star) {
                    R(idx(i, 0)) += positive_part(end.rho) * xn[i].x() + negative_part(end.rho) * r[i];
                    addJ(i, 0, i, 0, positive_part(end.rho));
                } else {
                    R(idx(i, 0)) += end.rho * wr;
                }
            }
        }
    }

    std::optional<RankOneUpdate> update;

    switch (family) {
    case Family::A:
        for (std::size_t i = 0; i < n; ++i) {
            const double kap = u(idx(i, 2));
            for (int k = 0; k < 2; ++k) {
                R(idx(i, k)) += mass[i] * kap * omega[i](k);
                addJ(i, k, i, 2, mass[i] * omega[i](k));
            }
            double phi_i = 0.0, dphi = 0.0;
            if (spec.speed.kind == SpeedLaw::Kind::General) {
                phi_i = explicit_speed[i];
            } else {
                const double s = speed_argument(u, i);
                phi_i = spec.speed.value(s) - c_lag;
                dphi = spec.speed.derivative(s) * lambda[i];
            }
            R(idx(i, 2)) += mass[i] * (omega[i].dot(dx(i)) * idt - phi_i);
            for (int l = 0; l < 2; ++l) addJ(i, 2, i, l, mass[i] * omega[i](l) * idt);
            addJ(i, 2, i, 2, -mass[i] * dphi);
        }
        break;
    case Family::B:
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < 2; ++k) {
                const double kap = u(idx(i, 2 + k));
                R(idx(i, k)) += mass[i] * kap;
                addJ(i, k, i, 2 + k, mass[i]);
                R(idx(i, 2 + k)) += mass[i] * (dx(i)(k) * idt - (lambda[i] * kap - quot_vec[i](k)));
                addJ(i, 2 + k, i, k, mass[i] * idt);
                addJ(i, 2 + k, i, 2 + k, -mass[i] * lambda[i]);
            }
        }
        break;
    case Family::C: {
        std::vector<double> ph(n), dph(n);
        for (std::size_t j = 0; j < n; ++j) {
            ph[j] = phi(u, j);
            dph[j] = phi_prime(u, j);
        }
        for (std::size_t e = 0; e < J; ++e) {
            const auto [a, bn] = curve.element_nodes(e);
            const std::array<std::size_t, 2> loc{a, bn};
            const Vec2& nu = geo.normal[e];
            for (int p = 0; p < 2; ++p) {
                for (int q = 0; q < 2; ++q) {
                    const double w = W[e][static_cast<std::size_t>(2 * p + q)];
                    const std::size_t i = loc[static_cast<std::size_t>(p)], j = loc[static_cast<std::size_t>(q)];
                    const double kj = u(idx(j, 2));
                    for (int k = 0; k < 2; ++k) {
                        R(idx(i, k)) += w * nu(k) * kj;
                        addJ(i, k, j, 2, w * nu(k));
                    }
                    R(idx(i, 2)) += w * (nu.dot(dx(j)) * idt - ph[j]);
                    for (int l = 0; l < 2; ++l) addJ(i, 2, j, l, w * nu(l) * idt);
                    addJ(i, 2, j, 2, -w * dph[j]);
                }
            }
        }
        if (spec.conserved) {
            double num = 0.0;
            for (std::size_t j = 0; j < n; ++j) num += colsum[j] * ph[j];
            const double c = num / rsum;
            RankOneUpdate up;
            up.u = Eigen::VectorXd::Zero(N);
            up.v = Eigen::VectorXd::Zero(N);
            for (std::size_t i = 0; i < n; ++i) {
                R(idx(i, 2)) += c * colsum[i];
                up.u(idx(i, 2)) = colsum[i] / rsum;
                up.v(idx(i, 2)) = colsum[i] * dph[i];
            }
            update = up;
        }
        break;
    }
    case Family::D:
        for (std::size_t e = 0; e < J; ++e) {
            const auto [a, bn] = curve.element_nodes(e);
            const std::array<std::size_t, 2> loc{a, bn};
            for (int p = 0; p < 2; ++p) {
                for (int q = 0; q < 2; ++q) {
                    const double w = W[e][static_cast<std::size_t>(2 * p + q)];
                    const std::size_t i = loc[static_cast<std::size_t>(p)], j = loc[static_cast<std::size_t>(q)];
                    for (int k = 0; k < 2; ++k) {
                        const double kj = u(idx(j, 2 + k));
                        R(idx(i, k)) += w * kj;
                        addJ(i, k, j, 2 + k, w);
                        R(idx(i, 2 + k)) += w * (dx(j)(k) * idt - kj);
                        addJ(i, 2 + k, j, k, w * idt);
                        addJ(i, 2 + k, j, 2 + k, -w);
                    }
                }
            }
        }
        break;
    case Family::ElimC:
        if (spec.element_normals) {
            for (std::size_t e = 0; e < J; ++e) {
                const auto [a, bn] = curve.element_nodes(e);
                const Vec2& nu = geo.normal[e];
                for (std::size_t i : {a, bn}) {
                    const double w = 0.5 * geo.length[e] * r[i];
                    const double vn = nu.dot(dx(i)) * idt;
                    for (int k = 0; k < 2; ++k) {
                        R(idx(i, k)) += w * vn * nu(k);
                        for (int l = 0; l < 2; ++l) addJ(i, k, i, l, w * nu(l) * nu(k) * idt);
                    }
                }
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double w = r[i] * mass[i];
                const double vn = omega[i].dot(dx(i)) * idt;
                for (int k = 0; k < 2; ++k) {
                    R(idx(i, k)) += w * vn * omega[i](k);
                    for (int l = 0; l < 2; ++l) addJ(i, k, i, l, w * omega[i](l) * omega[i](k) * idt);
                }
            }
        }
        break;
    case Family::ElimD:
        for (std::size_t i = 0; i < n; ++i) {
            const double w = r[i] * mass[i];
            for (int k = 0; k < 2; ++k) {
                R(idx(i, k)) += w * dx(i)(k) * idt;
                addJ(i, k, i, k, w * idt);
            }
        }
        break;
    }

    for (std::size_t k = 0; k < pin.size(); ++k) {
        if (!pin[k]) continue;
        const auto kk = static_cast<Eigen::Index>(k);
        R(kk) = u(kk);
        if (jac) M.pin(k / static_cast<std::size_t>(b), static_cast<int>(k % static_cast<std::size_t>(b)));
        if (update) {
            update->u(kk) = 0.0;
            update->v(kk) = 0.0;
        }
    }
    if (Rp) *Rp = R;
    if (jac) {
        jac->matrix = std::move(M);
        jac->rhs = -R;
        jac->update = update;
    }
}

SchemeProblem::SchemeProblem(const DiscreteCurve& curve, double dt, const FlowSpec& spec, const Eigen::VectorXd& kappa_prev)
    : p_(std::make_unique<Impl>(curve, dt, spec, kappa_prev)) {}
SchemeProblem::~SchemeProblem() = default;
SchemeProblem::SchemeProblem(SchemeProblem&&) noexcept = default;

int SchemeProblem::block() const { return p_->b; }
Eigen::Index SchemeProblem::size() const { return static_cast<Eigen::Index>(p_->n) * p_->b; }
bool SchemeProblem::linear() const { return p_->is_linear; }
const std::vector<char>& SchemeProblem::pinned() const { return p_->pin; }
Eigen::VectorXd SchemeProblem::start() const { return p_->u0; }

Eigen::VectorXd SchemeProblem::residual(const Eigen::VectorXd& u) const {
    Eigen::VectorXd R;
    p_->evaluate(u, &R, nullptr);
    return R;
}

LinearSystem SchemeProblem::jacobian(const Eigen::VectorXd& u) const {
    LinearSystem sys;
    p_->evaluate(u, nullptr, &sys);
    return sys;
}

bool SchemeProblem::admissible(const Eigen::VectorXd& u) const {
    if (p_->sign_ref.empty()) return true;
    for (std::size_t i = 0; i < p_->n; ++i) {
        if (p_->pin[static_cast<std::size_t>(p_->idx(i, 2))]) continue;
        const double s = p_->family == Family::A ? p_->speed_argument(u, i) : u(p_->idx(i, 2));
        if (!(s * p_->sign_ref[i] > 0.0)) return false;
    }
    return true;
}

std::vector<double> SchemeProblem::speed_arguments(const Eigen::VectorXd& u) const {
    std::vector<double> out;
    if (p_->sign_ref.empty()) return out;
    out.assign(p_->n, 0.0);
    for (std::size_t i = 0; i < p_->n; ++i) {
        if (p_->pin[static_cast<std::size_t>(p_->idx(i, 2))]) continue;
        out[i] = p_->family == Family::A ? p_->speed_argument(u, i) : u(p_->idx(i, 2));
    }
    return out;
}

void SchemeProblem::set_sign_reference(const std::vector<double>& previous) {
    if (p_->sign_ref.empty() || previous.size() != p_->n) return;
    for (std::size_t i = 0; i < p_->n; ++i)
        if (previous[i] != 0.0 && p_->sign_ref[i] != 0.0) p_->sign_ref[i] = previous[i] > 0.0 ? 1.0 : -1.0;
}

DiscreteCurve SchemeProblem::advance(const Eigen::VectorXd& u) const {
    std::vector<Vec2> pts(p_->n);
    for (std::size_t i = 0; i < p_->n; ++i)
        pts[i] = p_->curve.point(i) + Vec2(u(p_->idx(i, 0)), u(p_->idx(i, 1)));
    return p_->curve.with_points(std::move(pts));
}

Eigen::VectorXd SchemeProblem::curvature(const Eigen::VectorXd& u) const {
    const auto& P = *p_;
    const auto n = static_cast<Eigen::Index>(P.n);
    switch (P.family) {
    case Family::A:
    case Family::C: {
        Eigen::VectorXd k(n);
        for (std::size_t i = 0; i < P.n; ++i) k(static_cast<Eigen::Index>(i)) = u(P.idx(i, 2));
        return k;
    }
    case Family::B:
    case Family::D: {
        Eigen::VectorXd k(2 * n);
        for (std::size_t i = 0; i < P.n; ++i)
            for (int c = 0; c < 2; ++c) k(2 * static_cast<Eigen::Index>(i) + c) = u(P.idx(i, 2 + c));
        return k;
    }
    case Family::ElimC: {
        Eigen::VectorXd k(n);
        for (std::size_t i = 0; i < P.n; ++i)
            k(static_cast<Eigen::Index>(i)) =
                P.curve.is_axis_node(i) ? 0.0 : P.omega[i].dot(Vec2(u(P.idx(i, 0)), u(P.idx(i, 1)))) / P.dt;
        return k;
    }
    case Family::ElimD: {
        Eigen::VectorXd k(2 * n);
        for (std::size_t i = 0; i < P.n; ++i)
            for (int c = 0; c < 2; ++c)
                k(2 * static_cast<Eigen::Index>(i) + c) = P.curve.is_axis_node(i) ? 0.0 : u(P.idx(i, c)) / P.dt;
        return k;
    }
    }
    return {};
}

double SchemeProblem::dissipation(const Eigen::VectorXd& u) const {
    const auto& P = *p_;
    double d = 0.0;
    switch (P.family) {
    case Family::A:
    case Family::B: return 0.0;
    case Family::C: {
        std::vector<double> ph(P.n);
        for (std::size_t j = 0; j < P.n; ++j) ph[j] = P.phi(u, j);
        for (std::size_t e = 0; e < P.J; ++e) {
            const auto [a, bn] = P.curve.element_nodes(e);
            const std::array<std::size_t, 2> loc{a, bn};
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q)
                    d += P.W[e][static_cast<std::size_t>(2 * p + q)] * u(P.idx(loc[static_cast<std::size_t>(p)], 2)) *
                         ph[loc[static_cast<std::size_t>(q)]];
        }
        if (P.spec.conserved) {
            double num = 0.0, kr = 0.0;
            for (std::size_t j = 0; j < P.n; ++j) {
                num += P.colsum[j] * ph[j];
                kr += P.colsum[j] * u(P.idx(j, 2));
            }
            d -= num * kr / P.rsum;
        }
        return d;
    }
    case Family::D:
        for (std::size_t e = 0; e < P.J; ++e) {
            const auto [a, bn] = P.curve.element_nodes(e);
            const std::array<std::size_t, 2> loc{a, bn};
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q)
                    for (int k = 0; k < 2; ++k)
                        d += P.W[e][static_cast<std::size_t>(2 * p + q)] * u(P.idx(loc[static_cast<std::size_t>(p)], 2 + k)) *
                             u(P.idx(loc[static_cast<std::size_t>(q)], 2 + k));
        }
        return d;
    case Family::ElimC:
        if (P.spec.element_normals) {
            for (std::size_t e = 0; e < P.J; ++e) {
                const auto [a, bn] = P.curve.element_nodes(e);
                for (std::size_t i : {a, bn}) {
                    const double vn = P.geo.normal[e].dot(Vec2(u(P.idx(i, 0)), u(P.idx(i, 1)))) / P.dt;
                    d += 0.5 * P.geo.length[e] * P.r[i] * vn * vn;
                }
            }
            return d;
        }
        for (std::size_t i = 0; i < P.n; ++i) {
            const double vn = P.omega[i].dot(Vec2(u(P.idx(i, 0)), u(P.idx(i, 1)))) / P.dt;
            d += P.r[i] * P.mass[i] * vn * vn;
        }
        return d;
    case Family::ElimD:
        for (std::size_t i = 0; i < P.n; ++i) {
            const Vec2 v(u(P.idx(i, 0)) / P.dt, u(P.idx(i, 1)) / P.dt);
            d += P.r[i] * P.mass[i] * v.squaredNorm();
        }
        return d;
    }
    return d;
}

// ---------------------------------------------------------------------------

StepResult step(const SchemeState& state, double dt, const FlowSpec& spec, LinearSystem* first_system) {
    SchemeProblem prob(state.curve, dt, spec, state.kappa);
    prob.set_sign_reference(state.speed_argument);
    StepResult out;
    if (spec.scheme == Scheme::DStar) out.guard = timestep_guard(state.curve, dt);

    Eigen::VectorXd u;
    if (prob.linear()) {
        LinearSystem sys = prob.jacobian(prob.start());
        u = prob.start() + solve_linear(sys);
        if (first_system) *first_system = std::move(sys);
    } else {
        if (first_system) *first_system = prob.jacobian(prob.start());
        const auto res = newton_solve([&](const Eigen::VectorXd& x) { return prob.residual(x); },
                                      [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
                                          const LinearSystem sys = prob.jacobian(x);
                                          return solve_unchecked(sys.matrix, sys.update, r);
                                      },
                                      prob.start(), spec.newton,
                                      [&](const Eigen::VectorXd& x) { return prob.admissible(x); });
        u = res.x;
        out.newton_iterations = res.iterations;
    }
    if (!u.allFinite()) throw SingularSystem("non-finite solution");

    out.unknowns = u;
    out.speed_argument = prob.speed_arguments(u);
    out.curve = prob.advance(u);
    out.kappa = prob.curvature(u);
    out.energy_before = discrete_energy(state.curve).total();
    out.energy_after = discrete_energy(out.curve).total();
    if (spec.implicit_area() && spec.check_stability) {
        out.dissipation = prob.dissipation(u);
        out.stability_checked = true;
        const double lhs = out.energy_after + 2.0 * std::numbers::pi * dt * out.dissipation;
        const double slack = stability_slack * std::max(1.0, std::abs(out.energy_before));
        if (!(lhs <= out.energy_before + slack)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "stability bound violated: " << lhs << " > " << out.energy_before;
            throw StabilityViolation(msg.str());
        }
    }
    return out;
}

namespace {

StepResult checked(const SchemeState& state, double dt, const FlowSpec& spec, std::initializer_list<Scheme> allowed) {
    if (std::find(allowed.begin(), allowed.end(), spec.scheme) == allowed.end())
        throw InvalidConfig("stepper called with scheme " + to_string(spec.scheme));
    return step(state, dt, spec);
}

} // namespace

StepResult step_A(const SchemeState& s, double dt, const FlowSpec& spec) {
    if (spec.speed.kind != SpeedLaw::Kind::Identity || spec.conserved) throw InvalidConfig("step_A is the plain linear scheme");
    return checked(s, dt, spec, {Scheme::A});
}
StepResult step_A_f(const SchemeState& s, double dt, const FlowSpec& spec) { return checked(s, dt, spec, {Scheme::A}); }
StepResult step_B(const SchemeState& s, double dt, const FlowSpec& spec) { return checked(s, dt, spec, {Scheme::B}); }
StepResult step_C(const SchemeState& s, double dt, const FlowSpec& spec) { return checked(s, dt, spec, {Scheme::C}); }
StepResult step_C_star(const SchemeState& s, double dt, const FlowSpec& spec) { return checked(s, dt, spec, {Scheme::CStar}); }
StepResult step_D(const SchemeState& s, double dt, const FlowSpec& spec) { return checked(s, dt, spec, {Scheme::D}); }
StepResult step_D_star(const SchemeState& s, double dt, const FlowSpec& spec) { return checked(s, dt, spec, {Scheme::DStar}); }

} // namespace axiflow
