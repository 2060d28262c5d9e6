#include "setmem/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "setmem/errors.hpp"

namespace setmem::qp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Phase 1 minimizes (t + 1)^2 + delta^2 |x - x_start|^2 over the bounds
// relaxed by t. Pulling t towards -1 (not 0) keeps the bias of the proximal
// term at O(delta^2 |x - x_start|^2) regardless of how ill-conditioned the
// constraint normals are, and lands strictly inside when there is room.
constexpr double kPhaseOneWeight = 1e-6;
constexpr double kPhaseOneTarget = -1.0;
constexpr int kPhaseOneRounds = 8;

// A candidate normal whose component outside the span of the working set is
// below this fraction of its length is treated as dependent and never added.
constexpr double kDependenceTol = 1e-12;

struct WorkingBound {
    Eigen::Index row;
    bool upper;
};

class ActiveSet {
public:
    ActiveSet(const SqrtObjective& obj, const Constraints& cons, const SolverOptions& opt)
        : obj_(obj), cons_(cons), opt_(opt), k_(obj.r.cols()) {}

    // Runs the primal method from x0, which must satisfy the bounds inflated
    // by its own violation. Returns the iteration count.
    Solution run(const Vector& x0) {
        const double slack = max_violation(cons_, x0);
        lower_ = cons_.lower.array() - slack;
        upper_ = cons_.upper.array() + slack;

        Solution sol;
        Vector x = x0;
        working_.clear();
        in_working_.assign(static_cast<std::size_t>(cons_.normals.rows()), 0);

        for (int iter = 0; iter < opt_.max_iterations; ++iter) {
            sol.iterations = iter + 1;
            update_basis();
            Vector target = solve_equality(working_, lower_, upper_);
            Vector p = target - x;

            auto [alpha, blocking] = ratio_test(x, p);
            if (blocking < 0) {
                x = std::move(target);
                Vector lambda = multipliers(x);
                Eigen::Index worst = -1;
                double worst_value = -opt_.dual_tol * dual_scale(x);
                for (Eigen::Index w = 0; w < lambda.size(); ++w) {
                    if (lambda(w) < worst_value) {
                        worst_value = lambda(w);
                        worst = w;
                    }
                }
                if (worst < 0) {
                    sol.status = SolveStatus::Optimal;
                    sol.x = polish(x);
                    finalize(sol);
                    return sol;
                }
                in_working_[static_cast<std::size_t>(working_[worst].row)] = 0;
                working_.erase(working_.begin() + worst);
            } else {
                x += alpha * p;
                const bool upper = cons_.normals.row(blocking).dot(p) > 0.0;
                working_.push_back({blocking, upper});
                in_working_[static_cast<std::size_t>(blocking)] = 1;
            }
        }
        sol.status = SolveStatus::MaxIter;
        sol.x = x;
        finalize(sol);
        return sol;
    }

private:
    double bound_value(const WorkingBound& w, const Vector& lo, const Vector& hi) const {
        return w.upper ? hi(w.row) : lo(w.row);
    }

    // argmin ||R x - c|| s.t. n_w . x = b_w for w in the working set, by the
    // null-space method. Rank-deficient reduced problems take the min-norm
    // solution.
    Vector solve_equality(const std::vector<WorkingBound>& ws, const Vector& lo,
                          const Vector& hi) const {
        const auto m = static_cast<Eigen::Index>(ws.size());
        if (m == 0) {
            return Eigen::CompleteOrthogonalDecomposition<Matrix>(obj_.r).solve(obj_.c);
        }
        Matrix n(k_, m);
        Vector b(m);
        for (Eigen::Index w = 0; w < m; ++w) {
            n.col(w) = cons_.normals.row(ws[w].row).transpose();
            b(w) = bound_value(ws[w], lo, hi);
        }
        Eigen::HouseholderQR<Matrix> qr(n);
        const Matrix q = qr.householderQ() * Matrix::Identity(k_, k_);
        const Matrix rn = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
        Vector y = rn.transpose().triangularView<Eigen::Lower>().solve(b);
        Vector xp = q.leftCols(m) * y;
        if (m >= k_) return xp;
        const Matrix z = q.rightCols(k_ - m);
        const Matrix rz = obj_.r * z;
        Vector zz = Eigen::CompleteOrthogonalDecomposition<Matrix>(rz).solve(obj_.c - obj_.r * xp);
        return xp + z * zz;
    }

    // Half-space multipliers of the working set at x, for ||Rx - c||^2.
    Vector multipliers(const Vector& x) const {
        const auto m = static_cast<Eigen::Index>(working_.size());
        Vector lambda(m);
        if (m == 0) return lambda;
        Matrix n(k_, m);
        for (Eigen::Index w = 0; w < m; ++w) n.col(w) = cons_.normals.row(working_[w].row).transpose();
        const Vector grad = 2.0 * obj_.r.transpose() * (obj_.r * x - obj_.c);
        Vector raw = n.colPivHouseholderQr().solve(grad);
        for (Eigen::Index w = 0; w < m; ++w) lambda(w) = working_[w].upper ? -raw(w) : raw(w);
        return lambda;
    }

    void update_basis() {
        const auto m = static_cast<Eigen::Index>(working_.size());
        if (m == 0) {
            basis_.resize(k_, 0);
            return;
        }
        Matrix n(k_, m);
        for (Eigen::Index w = 0; w < m; ++w) n.col(w) = cons_.normals.row(working_[w].row).transpose();
        Eigen::HouseholderQR<Matrix> qr(n);
        basis_ = qr.householderQ() * Matrix::Identity(k_, std::min(m, k_));
    }

    bool dependent(Eigen::Index i) const {
        if (basis_.cols() == 0) return false;
        if (basis_.cols() >= k_) return true;
        const Vector n = cons_.normals.row(i).transpose();
        const Vector outside = n - basis_ * (basis_.transpose() * n);
        return outside.norm() <= kDependenceTol * n.norm();
    }

    double dual_scale(const Vector& x) const {
        const double rn = obj_.r.norm();
        return std::max(1.0, 2.0 * rn * (rn * x.norm() + obj_.c.norm()));
    }

    std::pair<double, Eigen::Index> ratio_test(const Vector& x, const Vector& p) const {
        double alpha = 1.0;
        Eigen::Index blocking = -1;
        const double pnorm = p.norm();
        if (pnorm == 0.0) return {alpha, blocking};
        for (Eigen::Index i = 0; i < cons_.normals.rows(); ++i) {
            if (in_working_[static_cast<std::size_t>(i)]) continue;
            const auto row = cons_.normals.row(i);
            const double dir = row.dot(p);
            const double thresh = opt_.direction_tol * row.norm() * pnorm;
            double step;
            if (dir < -thresh && std::isfinite(lower_(i))) {
                step = (lower_(i) - row.dot(x)) / dir;
            } else if (dir > thresh && std::isfinite(upper_(i))) {
                step = (upper_(i) - row.dot(x)) / dir;
            } else {
                continue;
            }
            step = std::max(step, 0.0);
            if (step < alpha && !dependent(i)) {
                alpha = step;
                blocking = i;
            }
        }
        return {alpha, blocking};
    }

    // Re-solve on the exact (uninflated) bounds of the final working set.
    Vector polish(const Vector& x) const {
        if (working_.empty()) return x;
        Vector exact = solve_equality(working_, cons_.lower, cons_.upper);
        if (!exact.allFinite()) return x;
        return max_violation(cons_, exact) <= max_violation(cons_, x) ? exact : x;
    }

    void finalize(Solution& sol) const {
        sol.max_violation = max_violation(cons_, sol.x);
        const Vector lambda = multipliers(sol.x);
        sol.active.clear();
        for (std::size_t w = 0; w < working_.size(); ++w) {
            sol.active.push_back({working_[w].row, working_[w].upper, lambda(static_cast<Eigen::Index>(w))});
        }
    }

    const SqrtObjective& obj_;
    const Constraints& cons_;
    const SolverOptions& opt_;
    Eigen::Index k_;
    Vector lower_, upper_;
    Matrix basis_;
    std::vector<WorkingBound> working_;
    std::vector<char> in_working_;
};

Vector phase_one(const Constraints& cons, const Vector& x0, const SolverOptions& opt, int& iterations) {
    const Eigen::Index k = x0.size();
    const Eigen::Index n = cons.normals.rows();
    const double weight = kPhaseOneWeight / std::max(1.0, x0.norm());

    SqrtObjective obj;
    obj.r = Matrix::Zero(k + 1, k + 1);
    obj.r.topLeftCorner(k, k).diagonal().setConstant(weight);
    obj.r(k, k) = 1.0;
    obj.c = Vector::Zero(k + 1);
    obj.c.head(k) = weight * x0;
    obj.c(k) = kPhaseOneTarget;

    Constraints aug;
    aug.normals = Matrix::Zero(2 * n, k + 1);
    aug.lower = Vector::Constant(2 * n, -kInf);
    aug.upper = Vector::Constant(2 * n, kInf);
    for (Eigen::Index i = 0; i < n; ++i) {
        aug.normals.row(2 * i).head(k) = cons.normals.row(i);
        aug.normals(2 * i, k) = 1.0;
        aug.lower(2 * i) = cons.lower(i);
        aug.normals.row(2 * i + 1).head(k) = cons.normals.row(i);
        aug.normals(2 * i + 1, k) = -1.0;
        aug.upper(2 * i + 1) = cons.upper(i);
    }

    Vector start(k + 1);
    start.head(k) = x0;
    start(k) = max_violation(cons, x0);

    ActiveSet solver(obj, aug, opt);
    Solution s = solver.run(start);
    iterations += s.iterations;
    return s.x.head(k);
}

}  // namespace

SqrtObjective reduce(const Matrix& design, const Vector& target) {
    require_dim(design.rows() == target.size(), "design rows vs target");
    const Eigen::Index k = design.cols();
    Matrix aug(design.rows(), k + 1);
    aug << design, target;
    Eigen::HouseholderQR<Matrix> qr(aug);
    const Eigen::Index rows = std::min<Eigen::Index>(aug.rows(), k);
    SqrtObjective out;
    out.r = Matrix::Zero(k, k);
    out.c = Vector::Zero(k);
    const Matrix packed = qr.matrixQR();
    out.r.topRows(rows) = packed.topLeftCorner(rows, k).triangularView<Eigen::Upper>();
    out.c.head(rows) = packed.col(k).head(rows);
    return out;
}

double max_violation(const Constraints& cons, const Vector& x) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < cons.normals.rows(); ++i) {
        const double v = cons.normals.row(i).dot(x);
        if (std::isnan(v)) return kInf;
        worst = std::max({worst, cons.lower(i) - v, v - cons.upper(i)});
    }
    return worst;
}

Solution solve(const SqrtObjective& objective, const Constraints& constraints, const SolverOptions& options) {
    const Eigen::Index k = objective.r.cols();
    require_dim(objective.r.rows() == k && objective.c.size() == k, "square-root objective");
    require_dim(constraints.normals.cols() == k, "constraint normals vs variables");
    require_dim(constraints.lower.size() == constraints.normals.rows() &&
                    constraints.upper.size() == constraints.normals.rows(),
                "constraint bounds");

    Vector start = Eigen::CompleteOrthogonalDecomposition<Matrix>(objective.r).solve(objective.c);
    int iterations = 0;
    if (max_violation(constraints, start) > 0.0) {
        // The proximal term biases phase 1 by an amount proportional to the
        // distance travelled; re-centering on the previous result removes it.
        double viol = max_violation(constraints, start);
        for (int round = 0; round < kPhaseOneRounds && viol > 0.0; ++round) {
            Vector next = phase_one(constraints, start, options, iterations);
            const double next_viol = max_violation(constraints, next);
            if (!(next_viol < viol)) break;
            start = std::move(next);
            viol = next_viol;
        }
        if (max_violation(constraints, start) > options.feasibility_tol) {
            Solution out;
            out.x = start;
            out.status = SolveStatus::Infeasible;
            out.max_violation = max_violation(constraints, start);
            out.iterations = iterations;
            return out;
        }
    }

    ActiveSet solver(objective, constraints, options);
    Solution out = solver.run(start);
    out.iterations += iterations;
    return out;
}

}  // namespace setmem::qp
