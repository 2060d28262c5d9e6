#pragma once

#include <cstddef>
#include <vector>

#include "setmem/linalg.hpp"

// Dense inequality-constrained linear least squares
//
//     minimize    || R x - c ||^2
//     subject to  lower_i <= n_i . x <= upper_i      (i = 1..N)
//
// solved by a primal active-set method. The objective is carried in
// square-root form (R, c), never as R^T R, so that badly scaled designs
// (states growing like 1.1^t) keep their conditioning instead of squaring
// it. A phase-1 problem that minimizes the worst bound violation produces
// the starting point; its optimum also decides infeasibility.
//
// Bounds may be +-infinity. Both sides of one row are never active together
// unless lower == upper.
namespace setmem::qp {

enum class SolveStatus { Optimal, Infeasible, MaxIter };

struct SolverOptions {
    // Worst admissible bound violation of the returned point.
    double feasibility_tol = 1e-9;
    // Relative tolerance on negative multipliers before a constraint is
    // released from the working set.
    double dual_tol = 1e-11;
    // Blocking constraints with |n_i . p| <= this * |n_i| |p| are ignored.
    double direction_tol = 1e-11;
    int max_iterations = 10000;
};

struct ActiveBound {
    Eigen::Index row = 0;
    bool upper = false;
    // Multiplier of the half-space form (>= 0 at a KKT point) for the
    // objective || R x - c ||^2 (not halved).
    double multiplier = 0.0;
};

struct Solution {
    Vector x;
    SolveStatus status = SolveStatus::MaxIter;
    std::vector<ActiveBound> active;
    double max_violation = 0.0;
    int iterations = 0;
};

// Square-root form of a least-squares objective.
struct SqrtObjective {
    Matrix r;  // k x k
    Vector c;  // k
};

struct Constraints {
    Matrix normals;  // N x k
    Vector lower;    // N
    Vector upper;    // N
};

// Reduces ||design x - target||^2 to square-root form by Householder QR.
SqrtObjective reduce(const Matrix& design, const Vector& target);

Solution solve(const SqrtObjective& objective, const Constraints& constraints,
               const SolverOptions& options = {});

// Worst violation of the bounds at x (0 if feasible).
double max_violation(const Constraints& constraints, const Vector& x);

}  // namespace setmem::qp
