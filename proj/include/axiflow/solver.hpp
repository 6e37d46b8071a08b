#pragma once

#include "axiflow/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace axiflow {

/// Small dense block, at most 4 x 4, stored on the stack.
using Block = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using BlockVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;

/// Block tridiagonal matrix with one block row per curve node. In cyclic mode
/// the corner blocks couple the first and the last node.
class BlockTridiagonal {
public:
    BlockTridiagonal() = default;
    BlockTridiagonal(std::size_t nodes, int block, bool cyclic);

    std::size_t nodes() const { return diag_.size(); }
    int block() const { return b_; }
    bool cyclic() const { return cyclic_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(nodes()) * b_; }

    Block& diag(std::size_t i) { return diag_[i]; }
    const Block& diag(std::size_t i) const { return diag_[i]; }
    /// Coupling of node i to its predecessor (node n - 1 for i = 0 when cyclic).
    Block& lower(std::size_t i) { return lower_[i]; }
    const Block& lower(std::size_t i) const { return lower_[i]; }
    /// Coupling of node i to its successor (node 0 for i = n - 1 when cyclic).
    Block& upper(std::size_t i) { return upper_[i]; }
    const Block& upper(std::size_t i) const { return upper_[i]; }

    /// Adds v to entry (row node i, component ci; column node j, component cj).
    /// j must be i or a neighbour of i.
    void add(std::size_t i, int ci, std::size_t j, int cj, double v) {
        if (j == i)
            diag_[i](ci, cj) += v;
        else if (j == i + 1 || (cyclic_ && i + 1 == diag_.size() && j == 0))
            upper_[i](ci, cj) += v;
        else if (j + 1 == i || (cyclic_ && i == 0 && j + 1 == diag_.size()))
            lower_[i](ci, cj) += v;
        else
            outside_pattern();
    }

    /// Replaces row and column of dof (i, c) by the identity.
    void pin(std::size_t i, int c);

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd dense() const;

private:
    [[noreturn]] static void outside_pattern();

    int b_ = 0;
    bool cyclic_ = false;
    std::vector<Block> diag_, lower_, upper_;
};

/// LU factorization with partial pivoting of a block (size <= 4).
class SmallLU {
public:
    SmallLU() = default;
    explicit SmallLU(const Block& a);
    BlockVector solve(const BlockVector& b) const;
    Block solve(const Block& b) const;
    /// Smallest pivot magnitude, zero when singular.
    double min_pivot() const;

private:
    int n_ = 0;
    double a_[4][4] = {};
    int piv_[4] = {};
};

/// Factorization of a block tridiagonal matrix; cyclic matrices are handled by
/// bordering the last node against the open chain of the others.
class BlockFactorization {
public:
    explicit BlockFactorization(const BlockTridiagonal& m);
    Eigen::VectorXd solve(const Eigen::VectorXd& f) const;

private:
    struct Chain {
        std::vector<SmallLU> lu;
        std::vector<Block> g; // S_i^{-1} U_i
        std::vector<Block> lower;
        void factor(const BlockTridiagonal& m, std::size_t n);
        void solve(const BlockTridiagonal& m, Eigen::Ref<Eigen::VectorXd> x) const;
    };
    const BlockTridiagonal& m_;
    Chain chain_;
    std::size_t n_chain_ = 0;
    Eigen::MatrixXd border_; // chain solution of the corner coupling, cyclic only
    Eigen::PartialPivLU<Eigen::MatrixXd> schur_;
};

struct RankOneUpdate {
    Eigen::VectorXd u, v; // matrix + u v^T
};

struct LinearSystem {
    BlockTridiagonal matrix;
    Eigen::VectorXd rhs;
    std::optional<RankOneUpdate> update;

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd dense() const;
};

/// Solves the system and checks the residual against 1e-10 (1 + |rhs|_inf);
/// throws SingularSystem otherwise.
Eigen::VectorXd solve_linear(const LinearSystem& sys);
/// Same solve without the residual check.
Eigen::VectorXd solve_unchecked(const BlockTridiagonal& m, const std::optional<RankOneUpdate>& update,
                                const Eigen::VectorXd& rhs);

void dump_matrix(std::ostream& out, const LinearSystem& sys);

struct NewtonConfig {
    double tolerance = 1e-10; // max norm of the residual
    int max_iterations = 25;
    int max_halvings = 4;
};

struct NewtonResult {
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0.0;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// Returns J(x)^{-1} r.
using NewtonStepFn = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& r)>;
using AdmissibleFn = std::function<bool(const Eigen::VectorXd&)>;

/// Full Newton steps, halved up to max_halvings times when the residual grows or
/// the iterate leaves the admissible set. Throws NoConvergence or DomainViolation.
NewtonResult newton_solve(const ResidualFn& residual, const NewtonStepFn& step, Eigen::VectorXd start,
                          const NewtonConfig& cfg, const AdmissibleFn& admissible = {});

enum class GuardStatus { Ok, Warn, Skipped };

struct GuardResult {
    GuardStatus status = GuardStatus::Ok;
    double bound = 0.0; // 3 min r^2
    std::string message;
};

/// Time step check for the vector weighted schemes: warns when dt >= 3 min r^2.
/// Skipped when an endpoint lies on the axis.
GuardResult timestep_guard(const DiscreteCurve& curve, double dt);

} // namespace axiflow
