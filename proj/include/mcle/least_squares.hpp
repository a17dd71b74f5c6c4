#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace mcle {

struct LeastSquaresProblem {
    std::size_t residual_count = 0;
    std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)> residuals;
    std::function<void(const Eigen::VectorXd& params, Eigen::MatrixXd& jacobian)> jacobian;
};

struct LeastSquaresResult {
    Eigen::VectorXd params;
    /// sqrt(diag(s^2 (J^T J)^{-1})) with s^2 = rss / (m - p); zero when m == p.
    Eigen::VectorXd standard_errors;
    double rss = 0.0;
    long iterations = 0;
    bool converged = false;
    /// Sum of squared residuals after each iteration.
    std::vector<double> rss_history;
};

/// Levenberg-Marquardt minimization of the sum of squared residuals.
/// Does not throw on non-convergence; callers inspect `converged`.
LeastSquaresResult levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd initial,
                                       double tolerance = 1e-14, long max_evaluations = 2000);

} // namespace mcle
