#include "mcle/least_squares.hpp"

#include "mcle/error.hpp"

#include <unsupported/Eigen/NonLinearOptimization>

#include <cmath>

namespace mcle {

namespace {

struct Functor {
    const LeastSquaresProblem* problem;
    Eigen::Index n_inputs;

    Eigen::Index values() const { return static_cast<Eigen::Index>(problem->residual_count); }
    Eigen::Index inputs() const { return n_inputs; }

    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
        problem->residuals(p, r);
        return r.allFinite() ? 0 : -1;
    }
    int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
        problem->jacobian(p, j);
        return j.allFinite() ? 0 : -1;
    }
};

} // namespace

LeastSquaresResult levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd initial,
                                       double tolerance, long max_evaluations) {
    const auto m = static_cast<Eigen::Index>(problem.residual_count);
    const Eigen::Index p = initial.size();
    if (m < p || p == 0) {
        throw InputError("least squares: need at least as many residuals as parameters");
    }

    Functor functor{&problem, p};
    Eigen::LevenbergMarquardt<Functor> lm(functor);
    lm.parameters.ftol = tolerance;
    lm.parameters.xtol = tolerance;
    lm.parameters.maxfev = max_evaluations;
    LeastSquaresResult out;
    auto status = lm.minimizeInit(initial);
    if (status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
        do {
            status = lm.minimizeOneStep(initial);
            out.rss_history.push_back(lm.fnorm * lm.fnorm);
        } while (status == Eigen::LevenbergMarquardtSpace::Running);
    }

    out.params = initial;
    out.iterations = lm.iter;

    Eigen::VectorXd r(m);
    problem.residuals(initial, r);
    out.rss = r.squaredNorm();
    out.converged = r.allFinite() && status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                    status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                    status != Eigen::LevenbergMarquardtSpace::UserAsked;

    Eigen::MatrixXd j(m, p);
    problem.jacobian(initial, j);
    out.standard_errors = Eigen::VectorXd::Zero(p);
    if (m > p) {
        const double s2 = out.rss / static_cast<double>(m - p);
        const Eigen::MatrixXd cov = (j.transpose() * j).ldlt().solve(Eigen::MatrixXd::Identity(p, p)) * s2;
        for (Eigen::Index i = 0; i < p; ++i) {
            out.standard_errors(i) = std::sqrt(std::max(0.0, cov(i, i)));
        }
    }
    return out;
}

} // namespace mcle
