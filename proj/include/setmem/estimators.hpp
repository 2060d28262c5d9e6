#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "setmem/dynamics.hpp"
#include "setmem/linalg.hpp"
#include "setmem/noise_model.hpp"
#include "setmem/qp.hpp"

namespace setmem {

enum class Loss { SquaredResidual, Zero };
enum class EstimateStatus { Optimal, Infeasible, Underdetermined, MaxIter };
enum class ErrorMetric { Frobenius, Spectral };

// Row QPs run on OpenMP threads (Parallel) or in order on the caller's
// thread (Serial). Both produce bit-identical results.
enum class Execution { Serial, Parallel };

inline constexpr double kDefaultRidge = 1e-9;
inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kKktTol = 1e-8;

struct EstimateOptions {
    Loss loss = Loss::SquaredResidual;
    double ridge = kDefaultRidge;
    Execution execution = Execution::Parallel;
    qp::SolverOptions solver{};
};

struct EstimateResult {
    Matrix a_hat;
    EstimateStatus status = EstimateStatus::MaxIter;
    // Worst residual-bound violation, with each pair's bounds divided by
    // max(1, |X_i|_2).
    double max_violation = 0.0;
    // Relative KKT residual (stationarity, dual sign, complementarity).
    double kkt_residual = 0.0;
    // sum_i |Y_i - A_hat X_i|^2 for the squared loss; for the feasibility
    // problem, the scaled soft violation sum_i (dist(W, Y_i - A_hat X_i) / s_i)^2.
    double objective = 0.0;
    std::size_t n_used = 0;
    int iterations = 0;
};

// Set-membership estimate
//     argmin sum_i |Y_i - A X_i|^2 + ridge |A|_F^2   s.t.  Y_i - A X_i in W
// for a box W, solved as d independent row problems. Loss::Zero turns it
// into the minimum-norm feasible point. Throws DimensionError on empty or
// inconsistent input and UnsupportedError for polytope W.
EstimateResult sme_estimate(const MeasurementGroup& group, const NoiseSet& noise, const EstimateOptions& options = {});

// The feasibility estimate: any A with every residual in W, chosen as the
// one of minimum Frobenius norm. Infeasible if the least achievable worst
// violation exceeds the feasibility tolerance.
EstimateResult feasible_estimate(const MeasurementGroup& group, const NoiseSet& noise,
                                 Execution execution = Execution::Parallel);

// Ordinary least squares (sum Y X^T)(sum X X^T)^{-1}, via a complete
// orthogonal decomposition; rank-deficient data gets the minimum-norm
// solution and Underdetermined status.
EstimateResult ols_estimate(const MeasurementGroup& group);

double estimation_error(const Matrix& a_hat, const Matrix& a_true, ErrorMetric metric = ErrorMetric::Frobenius);

// Numerical rank of the regressors (rows normalized to unit length).
Eigen::Index regressor_rank(const Matrix& regressors);

std::string_view to_string(EstimateStatus status);
std::string_view to_string(ErrorMetric metric);
ErrorMetric parse_error_metric(std::string_view text);

namespace reference {

// Solves all d^2 unknowns as one block-diagonal QP instead of d row
// problems. Slow; kept to check the row decomposition.
EstimateResult sme_estimate_joint(const MeasurementGroup& group, const NoiseSet& noise,
                                  const EstimateOptions& options = {});

}  // namespace reference

}  // namespace setmem
