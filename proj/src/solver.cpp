#include "axiflow/solver.hpp"

#include "axiflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace axiflow {

BlockTridiagonal::BlockTridiagonal(std::size_t nodes, int block, bool cyclic)
    : b_(block), cyclic_(cyclic), diag_(nodes, Block::Zero(block, block)), lower_(nodes, Block::Zero(block, block)),
      upper_(nodes, Block::Zero(block, block)) {
    if (block < 1 || block > 4) throw Error("block size must be 1..4");
    if (cyclic && nodes < 3) throw Error("cyclic block system needs at least 3 nodes");
}

void BlockTridiagonal::outside_pattern() { throw Error("block entry outside the tridiagonal pattern"); }

void BlockTridiagonal::pin(std::size_t i, int c) {
    const std::size_t n = nodes();
    diag_[i].row(c).setZero();
    lower_[i].row(c).setZero();
    upper_[i].row(c).setZero();
    diag_[i].col(c).setZero();
    diag_[i](c, c) = 1.0;
    // column c of node i appears in upper(i-1) and lower(i+1)
    if (i > 0 || cyclic_) upper_[i == 0 ? n - 1 : i - 1].col(c).setZero();
    if (i + 1 < n || cyclic_) lower_[i + 1 == n ? 0 : i + 1].col(c).setZero();
}

Eigen::VectorXd BlockTridiagonal::multiply(const Eigen::VectorXd& x) const {
    const std::size_t n = nodes();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i) * b_;
        y.segment(row, b_) += diag_[i] * x.segment(row, b_);
        if (i > 0 || cyclic_) {
            const std::size_t j = i == 0 ? n - 1 : i - 1;
            y.segment(row, b_) += lower_[i] * x.segment(static_cast<Eigen::Index>(j) * b_, b_);
        }
        if (i + 1 < n || cyclic_) {
            const std::size_t j = i + 1 == n ? 0 : i + 1;
            y.segment(row, b_) += upper_[i] * x.segment(static_cast<Eigen::Index>(j) * b_, b_);
        }
    }
    return y;
}

Eigen::MatrixXd BlockTridiagonal::dense() const {
    const std::size_t n = nodes();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size(), size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i) * b_;
        m.block(row, row, b_, b_) += diag_[i];
        if (i > 0 || cyclic_) {
            const std::size_t j = i == 0 ? n - 1 : i - 1;
            m.block(row, static_cast<Eigen::Index>(j) * b_, b_, b_) += lower_[i];
        }
        if (i + 1 < n || cyclic_) {
            const std::size_t j = i + 1 == n ? 0 : i + 1;
            m.block(row, static_cast<Eigen::Index>(j) * b_, b_, b_) += upper_[i];
        }
    }
    return m;
}

// ---------------------------------------------------------------------------

SmallLU::SmallLU(const Block& m) : n_(static_cast<int>(m.rows())) {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) a_[i][j] = m(i, j);
    for (int k = 0; k < n_; ++k) {
        int p = k;
        for (int i = k + 1; i < n_; ++i)
            if (std::abs(a_[i][k]) > std::abs(a_[p][k])) p = i;
        piv_[k] = p;
        if (p != k)
            for (int j = 0; j < n_; ++j) std::swap(a_[k][j], a_[p][j]);
        if (a_[k][k] == 0.0) continue;
        for (int i = k + 1; i < n_; ++i) {
            const double f = a_[i][k] / a_[k][k];
            a_[i][k] = f;
            for (int j = k + 1; j < n_; ++j) a_[i][j] -= f * a_[k][j];
        }
    }
}

BlockVector SmallLU::solve(const BlockVector& b) const {
    double x[4];
    for (int i = 0; i < n_; ++i) x[i] = b(i);
    for (int k = 0; k < n_; ++k) std::swap(x[k], x[piv_[k]]);
    for (int i = 1; i < n_; ++i)
        for (int j = 0; j < i; ++j) x[i] -= a_[i][j] * x[j];
    for (int i = n_ - 1; i >= 0; --i) {
        for (int j = i + 1; j < n_; ++j) x[i] -= a_[i][j] * x[j];
        x[i] /= a_[i][i];
    }
    BlockVector out(n_);
    for (int i = 0; i < n_; ++i) out(i) = x[i];
    return out;
}

Block SmallLU::solve(const Block& b) const {
    Block out(n_, b.cols());
    for (Eigen::Index c = 0; c < b.cols(); ++c) out.col(c) = solve(BlockVector(b.col(c)));
    return out;
}

double SmallLU::min_pivot() const {
    double lo = std::abs(a_[0][0]);
    for (int i = 1; i < n_; ++i) lo = std::min(lo, std::abs(a_[i][i]));
    return lo;
}

void BlockFactorization::Chain::factor(const BlockTridiagonal& m, std::size_t n) {
    lu.clear();
    g.clear();
    lu.reserve(n);
    g.reserve(n);
    Block s = m.diag(0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) s = m.diag(i) - m.lower(i) * g[i - 1];
        lu.emplace_back(s);
        if (i + 1 < n) g.emplace_back(lu[i].solve(m.upper(i)));
    }
}

void BlockFactorization::Chain::solve(const BlockTridiagonal& m, Eigen::Ref<Eigen::VectorXd> x) const {
    const int b = m.block();
    const std::size_t n = lu.size();
    BlockVector prev;
    for (std::size_t i = 0; i < n; ++i) {
        BlockVector f = x.segment(static_cast<Eigen::Index>(i) * b, b);
        if (i > 0) f -= m.lower(i) * prev;
        prev = lu[i].solve(f);
        x.segment(static_cast<Eigen::Index>(i) * b, b) = prev;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x.segment(static_cast<Eigen::Index>(i) * b, b) -= g[i] * x.segment(static_cast<Eigen::Index>(i + 1) * b, b);
    }
}

BlockFactorization::BlockFactorization(const BlockTridiagonal& m) : m_(m) {
    const std::size_t N = m.nodes();
    const int b = m.block();
    n_chain_ = m.cyclic() ? N - 1 : N;
    chain_.factor(m, n_chain_);
    if (!m.cyclic()) return;

    const auto rows = static_cast<Eigen::Index>(n_chain_) * b;
    border_ = Eigen::MatrixXd::Zero(rows, b);
    border_.topRows(b) = m.lower(0);
    border_.bottomRows(b) += m.upper(n_chain_ - 1);
    for (int c = 0; c < b; ++c) {
        Eigen::VectorXd col = border_.col(c);
        chain_.solve(m, col);
        border_.col(c) = col;
    }
    const std::size_t last = N - 1;
    Eigen::MatrixXd s = m.diag(last);
    s -= m.upper(last) * border_.topRows(b);
    s -= m.lower(last) * border_.bottomRows(b);
    schur_.compute(s);
}

Eigen::VectorXd BlockFactorization::solve(const Eigen::VectorXd& f) const {
    const int b = m_.block();
    Eigen::VectorXd x = f;
    if (!m_.cyclic()) {
        chain_.solve(m_, x);
        return x;
    }
    const auto rows = static_cast<Eigen::Index>(n_chain_) * b;
    Eigen::VectorXd top = f.head(rows);
    chain_.solve(m_, top);
    const std::size_t last = n_chain_;
    Eigen::VectorXd rhs = f.tail(b) - m_.upper(last) * top.head(b) - m_.lower(last) * top.tail(b);
    const Eigen::VectorXd xl = schur_.solve(rhs);
    x.head(rows) = top - border_ * xl;
    x.tail(b) = xl;
    return x;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd LinearSystem::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = matrix.multiply(x);
    if (update) y += update->u * update->v.dot(x);
    return y;
}

Eigen::MatrixXd LinearSystem::dense() const {
    Eigen::MatrixXd m = matrix.dense();
    if (update) m += update->u * update->v.transpose();
    return m;
}

Eigen::VectorXd solve_unchecked(const BlockTridiagonal& m, const std::optional<RankOneUpdate>& update,
                                const Eigen::VectorXd& rhs) {
    const BlockFactorization fac(m);
    Eigen::VectorXd x = fac.solve(rhs);
    if (update) {
        const Eigen::VectorXd y = fac.solve(update->u);
        const double denom = 1.0 + update->v.dot(y);
        if (denom == 0.0 || !std::isfinite(denom)) throw SingularSystem("singular rank-one update");
        x -= y * (update->v.dot(x) / denom);
    }
    return x;
}

Eigen::VectorXd solve_linear(const LinearSystem& sys) {
    Eigen::VectorXd x = solve_unchecked(sys.matrix, sys.update, sys.rhs);
    if (!x.allFinite()) throw SingularSystem("singular system: zero pivot in block elimination");
    const double res = (sys.apply(x) - sys.rhs).lpNorm<Eigen::Infinity>();
    const double bound = 1e-10 * (1.0 + sys.rhs.lpNorm<Eigen::Infinity>());
    if (!(res <= bound)) {
        std::ostringstream msg;
        msg << "linear solve residual " << res << " exceeds " << bound;
        throw SingularSystem(msg.str());
    }
    return x;
}

void dump_matrix(std::ostream& out, const LinearSystem& sys) {
    const Eigen::MatrixXd m = sys.dense();
    out.precision(17);
    out << "# rows " << m.rows() << "\n# i j value\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) out << i << ' ' << j << ' ' << m(i, j) << '\n';
    out << "# rhs\n";
    for (Eigen::Index i = 0; i < sys.rhs.size(); ++i) out << i << ' ' << sys.rhs(i) << '\n';
}

// ---------------------------------------------------------------------------

NewtonResult newton_solve(const ResidualFn& residual, const NewtonStepFn& step, Eigen::VectorXd start,
                          const NewtonConfig& cfg, const AdmissibleFn& admissible) {
    NewtonResult out;
    out.x = std::move(start);
    if (admissible && !admissible(out.x)) throw DomainViolation("Newton start outside the admissible set");
    Eigen::VectorXd r = residual(out.x);
    double norm = r.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(norm)) throw NoConvergence("non-finite residual at the Newton start");
    while (norm > cfg.tolerance) {
        if (out.iterations >= cfg.max_iterations) {
            std::ostringstream msg;
            msg << "Newton did not converge in " << cfg.max_iterations << " iterations (residual " << norm << ")";
            throw NoConvergence(msg.str());
        }
        const Eigen::VectorXd d = step(out.x, r);
        double alpha = 1.0;
        Eigen::VectorXd x_new, r_new;
        double norm_new = 0.0;
        for (int halving = 0;; ++halving) {
            x_new = out.x - alpha * d;
            const bool inside = !admissible || admissible(x_new);
            if (inside) {
                r_new = residual(x_new);
                norm_new = r_new.lpNorm<Eigen::Infinity>();
                if (std::isfinite(norm_new) && (norm_new <= norm || halving >= cfg.max_halvings)) break;
            }
            if (halving >= cfg.max_halvings) {
                if (!inside) throw DomainViolation("Newton iterate left the admissible set");
                break;
            }
            alpha *= 0.5;
        }
        if (!std::isfinite(norm_new)) throw NoConvergence("non-finite Newton residual");
        out.x = std::move(x_new);
        r = std::move(r_new);
        norm = norm_new;
        ++out.iterations;
    }
    out.residual = norm;
    return out;
}

GuardResult timestep_guard(const DiscreteCurve& curve, double dt) {
    GuardResult g;
    for (std::size_t i = 0; i < curve.nodes(); ++i) {
        if (curve.is_axis_node(i)) {
            g.status = GuardStatus::Skipped;
            g.message = "axis endpoint present";
            return g;
        }
    }
    double lo = curve.r(0);
    for (std::size_t i = 0; i < curve.nodes(); ++i) lo = std::min(lo, curve.r(i));
    g.bound = 3.0 * lo * lo;
    if (dt >= g.bound) {
        g.status = GuardStatus::Warn;
        std::ostringstream msg;
        msg << "time step " << dt << " >= 3 min r^2 = " << g.bound;
        g.message = msg.str();
    }
    return g;
}

} // namespace axiflow
