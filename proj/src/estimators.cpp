#include "setmem/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <vector>

#include "setmem/errors.hpp"
#include "setmem/spectral.hpp"

namespace setmem {
namespace {

// Per-group data shared by all row problems.
struct RowData {
    Matrix x;        // n x d regressors
    Matrix y;        // n x d successors
    Vector scale;    // max(1, |X_i|)
    Matrix normals;  // X_i / scale_i
    Matrix r;        // square-root objective factor (d x d)
    Matrix c;        // d x d, column j is the reduced target of row j
};

void check_inputs(const MeasurementGroup& group, const NoiseSet& noise) {
    if (group.pairs.empty()) throw DimensionError("estimation needs at least one measurement pair");
    if (!noise.is_box()) throw UnsupportedError("estimation supports box noise sets only");
    const Eigen::Index d = noise.dim();
    for (const auto& pr : group.pairs) {
        require_dim(pr.x.size() == d && pr.y.size() == d, "measurement pair vs noise set dimension");
    }
}

RowData prepare(const MeasurementGroup& group, Loss loss, double ridge) {
    if (!(ridge >= 0.0)) throw DimensionError("ridge must be nonnegative");
    RowData rd;
    rd.x = group.regressors();
    rd.y = group.successors();
    const Eigen::Index n = rd.x.rows();
    const Eigen::Index d = rd.x.cols();
    rd.scale = rd.x.rowwise().norm().cwiseMax(1.0);
    rd.normals = rd.scale.cwiseInverse().asDiagonal() * rd.x;

    if (loss == Loss::Zero) {
        rd.r = Matrix::Identity(d, d);
        rd.c = Matrix::Zero(d, d);
        return rd;
    }
    Matrix design(n + d, d);
    design << rd.x, std::sqrt(ridge) * Matrix::Identity(d, d);
    Matrix targets = Matrix::Zero(n + d, d);
    targets.topRows(n) = rd.y;

    Eigen::HouseholderQR<Matrix> qr(design);
    const Matrix qt_targets = qr.householderQ().adjoint() * targets;
    const Eigen::Index rows = std::min<Eigen::Index>(n + d, d);
    rd.r = Matrix::Zero(d, d);
    rd.r.topRows(rows) = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
    rd.c = Matrix::Zero(d, d);
    rd.c.topRows(rows) = qt_targets.topRows(rows);
    return rd;
}

qp::Constraints row_constraints(const RowData& rd, const NoiseSet& noise, Eigen::Index j) {
    qp::Constraints cons;
    cons.normals = rd.normals;
    cons.lower = (rd.y.col(j).array() - noise.upper()(j)) / rd.scale.array();
    cons.upper = (rd.y.col(j).array() - noise.lower()(j)) / rd.scale.array();
    return cons;
}

// Relative KKT residual of one row at the solver's working set.
double row_kkt(const RowData& rd, const qp::Constraints& cons, const qp::Solution& sol, Loss loss, double ridge,
               Eigen::Index j) {
    const Vector& a = sol.x;
    Vector grad;
    double scale = 1.0;
    if (loss == Loss::Zero) {
        grad = 2.0 * a;
        scale += 2.0 * a.norm();
    } else {
        const Vector fitted = rd.x * a;
        const Vector resid = fitted - rd.y.col(j);
        grad = 2.0 * (rd.x.transpose() * resid + ridge * a);
        const Vector row_norms = rd.x.rowwise().norm();
        scale += 2.0 * (row_norms.dot(fitted.cwiseAbs() + rd.y.col(j).cwiseAbs()) + ridge * a.norm());
    }
    double dual_infeasible = 0.0;
    double complementarity = 0.0;
    for (const auto& act : sol.active) {
        const auto n = cons.normals.row(act.row);
        const double sign = act.upper ? -1.0 : 1.0;
        grad -= act.multiplier * sign * n.transpose();
        scale += std::fabs(act.multiplier) * n.norm();
        dual_infeasible = std::max(dual_infeasible, -act.multiplier);
        const double bound = act.upper ? cons.upper(act.row) : cons.lower(act.row);
        complementarity = std::max(complementarity, std::fabs(act.multiplier) * std::fabs(n.dot(a) - bound));
    }
    return std::max({grad.cwiseAbs().maxCoeff(), dual_infeasible, complementarity}) / scale;
}

double loss_value(const Matrix& x, const Matrix& y, const Matrix& a_hat) {
    return (y - x * a_hat.transpose()).squaredNorm();
}

double soft_violation(const RowData& rd, const NoiseSet& noise, const Matrix& a_hat) {
    const Matrix resid = rd.y - rd.x * a_hat.transpose();
    double total = 0.0;
    for (Eigen::Index i = 0; i < resid.rows(); ++i) {
        const Vector r = resid.row(i).transpose();
        const double dist = (r - project(noise, r)).norm() / rd.scale(i);
        total += dist * dist;
    }
    return total;
}

EstimateStatus combine(const std::vector<qp::SolveStatus>& row_status) {
    bool maxiter = false;
    for (auto s : row_status) {
        if (s == qp::SolveStatus::Infeasible) return EstimateStatus::Infeasible;
        if (s == qp::SolveStatus::MaxIter) maxiter = true;
    }
    return maxiter ? EstimateStatus::MaxIter : EstimateStatus::Optimal;
}

EstimateStatus finalize_status(EstimateStatus solver_status, const EstimateResult& r, const Matrix& x) {
    if (solver_status != EstimateStatus::Optimal) return solver_status;
    if (!(r.max_violation <= kFeasibilityTol) || !(r.kkt_residual <= kKktTol)) return EstimateStatus::MaxIter;
    if (regressor_rank(x) < x.cols()) return EstimateStatus::Underdetermined;
    return EstimateStatus::Optimal;
}

}  // namespace

Eigen::Index regressor_rank(const Matrix& regressors) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < regressors.rows(); ++i) {
        if (regressors.row(i).norm() > 0.0) keep.push_back(i);
    }
    if (keep.empty()) return 0;
    Matrix unit(static_cast<Eigen::Index>(keep.size()), regressors.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        unit.row(static_cast<Eigen::Index>(i)) = regressors.row(keep[i]).normalized();
    }
    Eigen::JacobiSVD<Matrix> svd(unit);
    const Vector sv = svd.singularValues();
    const double tol = 1e-10 * sv(0);
    return static_cast<Eigen::Index>((sv.array() > tol).count());
}

EstimateResult sme_estimate(const MeasurementGroup& group, const NoiseSet& noise, const EstimateOptions& options) {
    check_inputs(group, noise);
    const RowData rd = prepare(group, options.loss, options.ridge);
    const Eigen::Index d = noise.dim();

    std::vector<qp::Solution> rows(static_cast<std::size_t>(d));
    std::vector<double> kkt(static_cast<std::size_t>(d), 0.0);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(d));

#pragma omp parallel for schedule(static) if (options.execution == Execution::Parallel)
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto idx = static_cast<std::size_t>(j);
        try {
            const qp::Constraints cons = row_constraints(rd, noise, j);
            qp::SqrtObjective obj{rd.r, rd.c.col(j)};
            rows[idx] = qp::solve(obj, cons, options.solver);
            kkt[idx] = row_kkt(rd, cons, rows[idx], options.loss, options.ridge, j);
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    EstimateResult out;
    out.a_hat.resize(d, d);
    std::vector<qp::SolveStatus> statuses;
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto& sol = rows[static_cast<std::size_t>(j)];
        out.a_hat.row(j) = sol.x.transpose();
        out.max_violation = std::max(out.max_violation, sol.max_violation);
        out.kkt_residual = std::max(out.kkt_residual, kkt[static_cast<std::size_t>(j)]);
        out.iterations += sol.iterations;
        statuses.push_back(sol.status);
    }
    out.n_used = group.size();
    out.objective = options.loss == Loss::Zero ? soft_violation(rd, noise, out.a_hat) : loss_value(rd.x, rd.y, out.a_hat);
    out.status = finalize_status(combine(statuses), out, rd.x);
    return out;
}

EstimateResult feasible_estimate(const MeasurementGroup& group, const NoiseSet& noise, Execution execution) {
    EstimateOptions opts;
    opts.loss = Loss::Zero;
    opts.execution = execution;
    return sme_estimate(group, noise, opts);
}

EstimateResult ols_estimate(const MeasurementGroup& group) {
    if (group.pairs.empty()) throw DimensionError("estimation needs at least one measurement pair");
    const Matrix x = group.regressors();
    const Matrix y = group.successors();
    require_dim(x.cols() == y.cols(), "regressor vs successor dimension");

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(x);
    EstimateResult out;
    out.a_hat = cod.solve(y).transpose();
    out.n_used = group.size();
    out.iterations = 0;
    out.objective = loss_value(x, y, out.a_hat);
    // No noise set is involved; the feasibility diagnostic does not apply.
    out.max_violation = std::numeric_limits<double>::quiet_NaN();

    const Matrix fitted = x * out.a_hat.transpose();
    const Matrix normal_resid = x.transpose() * (fitted - y);
    const Vector row_norms = x.rowwise().norm();
    double kkt = 0.0;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        const double scale = 1.0 + row_norms.dot(fitted.col(j).cwiseAbs() + y.col(j).cwiseAbs());
        kkt = std::max(kkt, normal_resid.col(j).cwiseAbs().maxCoeff() / scale);
    }
    out.kkt_residual = kkt;
    out.status = regressor_rank(x) < x.cols() ? EstimateStatus::Underdetermined : EstimateStatus::Optimal;
    return out;
}

double estimation_error(const Matrix& a_hat, const Matrix& a_true, ErrorMetric metric) {
    require_dim(a_hat.rows() == a_true.rows() && a_hat.cols() == a_true.cols(), "estimation_error(): shapes");
    const Matrix diff = a_hat - a_true;
    return metric == ErrorMetric::Frobenius ? diff.norm() : spectral_norm(diff);
}

std::string_view to_string(EstimateStatus status) {
    switch (status) {
        case EstimateStatus::Optimal: return "optimal";
        case EstimateStatus::Infeasible: return "infeasible";
        case EstimateStatus::Underdetermined: return "underdetermined";
        case EstimateStatus::MaxIter: return "max_iter";
    }
    return "unknown";
}

std::string_view to_string(ErrorMetric metric) {
    return metric == ErrorMetric::Frobenius ? "frobenius" : "spectral";
}

ErrorMetric parse_error_metric(std::string_view text) {
    if (text == "frobenius") return ErrorMetric::Frobenius;
    if (text == "spectral") return ErrorMetric::Spectral;
    throw ConfigError("unknown error metric '" + std::string(text) + "' (expected frobenius|spectral)");
}

namespace reference {

EstimateResult sme_estimate_joint(const MeasurementGroup& group, const NoiseSet& noise, const EstimateOptions& options) {
    check_inputs(group, noise);
    const RowData rd = prepare(group, options.loss, options.ridge);
    const Eigen::Index d = noise.dim();
    const Eigen::Index n = rd.x.rows();

    // Unknown vector is A stacked row by row.
    qp::SqrtObjective obj{Matrix::Zero(d * d, d * d), Vector::Zero(d * d)};
    qp::Constraints cons{Matrix::Zero(n * d, d * d), Vector(n * d), Vector(n * d)};
    for (Eigen::Index j = 0; j < d; ++j) {
        obj.r.block(j * d, j * d, d, d) = rd.r;
        obj.c.segment(j * d, d) = rd.c.col(j);
        const qp::Constraints row = row_constraints(rd, noise, j);
        cons.normals.block(j * n, j * d, n, d) = row.normals;
        cons.lower.segment(j * n, n) = row.lower;
        cons.upper.segment(j * n, n) = row.upper;
    }
    const qp::Solution sol = qp::solve(obj, cons, options.solver);

    EstimateResult out;
    out.a_hat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(sol.x.data(), d, d);
    out.max_violation = sol.max_violation;
    out.iterations = sol.iterations;
    out.n_used = group.size();
    for (Eigen::Index j = 0; j < d; ++j) {
        qp::Solution row_sol;
        row_sol.x = sol.x.segment(j * d, d);
        for (const auto& act : sol.active) {
            if (act.row / n == j) row_sol.active.push_back({act.row % n, act.upper, act.multiplier});
        }
        out.kkt_residual = std::max(out.kkt_residual,
                                    row_kkt(rd, row_constraints(rd, noise, j), row_sol, options.loss, options.ridge, j));
    }
    out.objective = options.loss == Loss::Zero ? soft_violation(rd, noise, out.a_hat) : loss_value(rd.x, rd.y, out.a_hat);
    out.status = finalize_status(combine({sol.status}), out, rd.x);
    return out;
}

}  // namespace reference

}  // namespace setmem
