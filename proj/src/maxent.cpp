#include "mcle/maxent.hpp"

#include "mcle/error.hpp"
#include "mcle/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

namespace mcle::maxent {

namespace {

constexpr double lambda_cap = 1e6;

// ln(<x>/x0) = -ln λ - ln(e^λ Γ(0,λ))
double log_mean_ratio(double lambda) { return -std::log(lambda) - std::log(gamma0_scaled(lambda)); }

double log_gamma0(double z) { return -z + std::log(gamma0_scaled(z)); }

} // namespace

void RankDistribution::validate(bool require_sorted) const {
    if (ranks.size() != populations.size()) {
        throw InputError("rank table: ranks and populations differ in length");
    }
    if (populations.empty()) {
        throw InputError("rank table is empty");
    }
    const auto n = static_cast<double>(count);
    for (std::size_t i = 0; i < populations.size(); ++i) {
        if (!(populations[i] > 0.0) || !std::isfinite(populations[i])) {
            throw InputError("rank table: population at row " + std::to_string(i) + " is not positive");
        }
        if (require_sorted && i > 0 && populations[i] > populations[i - 1]) {
            throw InputError("rank table: populations are not sorted in descending order");
        }
        if (!(ranks[i] > 0.0) || ranks[i] > n) {
            throw InputError("rank table: rank at row " + std::to_string(i) + " lies outside (0, n]");
        }
    }
}

RankDistribution make_rank_table(std::vector<double> populations, double floor) {
    std::sort(populations.begin(), populations.end(), std::greater<>());
    RankDistribution table;
    table.count = populations.size();
    table.ranks.resize(populations.size());
    for (std::size_t i = 0; i < populations.size(); ++i) {
        table.ranks[i] = static_cast<double>(i) + 0.5;
    }
    table.total = std::accumulate(populations.begin(), populations.end(), 0.0);
    table.floor = floor;
    table.populations = std::move(populations);
    return table;
}

double mean_ratio(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw InputError("MaxEnt rate must be positive and finite");
    }
    return std::exp(log_mean_ratio(lambda));
}

MaxEntModel::MaxEntModel(double lambda, double floor, std::size_t count)
    : lambda_(lambda), floor_(floor), count_(count) {
    if (!(floor > 0.0) || !std::isfinite(floor)) {
        throw InputError("MaxEnt floor must be positive");
    }
    if (count == 0) {
        throw InputError("MaxEnt model needs at least one component");
    }
    total_ = static_cast<double>(count) * floor * mean_ratio(lambda);
    mu_ = log_gamma0(lambda);
}

double MaxEntModel::mean_residual(double total) const { return std::abs(total_ - total) / total; }

MaxEntModel solve_lambda(double total, std::size_t count, double floor) {
    if (count == 0 || !(floor > 0.0) || !(total > 0.0)) {
        throw InputError("solve_lambda: total, count and floor must be positive");
    }
    const double target = total / (static_cast<double>(count) * floor);
    if (!(target > 1.0)) {
        throw InputError("solve_lambda: mean population N/n must exceed the floor x0");
    }
    const double log_target = std::log(target);
    auto f = [&](double s) { return log_mean_ratio(std::exp(s)) - log_target; };

    double lo = std::log(1e-300);
    double hi = std::log(lambda_cap);
    if (f(lo) < 0.0) {
        throw NumericalError("solve_lambda: no sign change in bracket (N/n too large)");
    }
    if (f(hi) > 0.0) {
        std::ostringstream msg;
        msg << "solve_lambda: lambda diverges beyond cap " << lambda_cap << " as N/n approaches x0";
        throw NumericalError(msg.str());
    }
    for (int i = 0; i < 80 && hi - lo > 1e-6; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    // Newton polish in s = ln λ: d/ds ln(<x>/x0) = -1 - λ + 1/(e^λ Γ(0,λ)).
    double s = 0.5 * (lo + hi);
    for (int i = 0; i < 20; ++i) {
        const double lambda = std::exp(s);
        const double fs = f(s);
        const double slope = -1.0 - lambda + 1.0 / gamma0_scaled(lambda);
        if (slope >= 0.0) {
            break;
        }
        const double next = s - fs / slope;
        if (std::abs(next - s) < 1e-15 * std::max(1.0, std::abs(s))) {
            s = next;
            break;
        }
        s = next;
    }
    MaxEntModel model(std::exp(s), floor, count);
    if (model.mean_residual(total) > 1e-10) {
        throw NumericalError("solve_lambda: residual above tolerance after polish");
    }
    return model;
}

double analytic_rank(const MaxEntModel& model, double r) {
    const auto n = static_cast<double>(model.count());
    if (!(r > 0.0)) {
        throw InputError("analytic_rank: rank must be positive (the head r -> 0 diverges)");
    }
    if (r > n) {
        throw InputError("analytic_rank: rank exceeds n");
    }
    if (r == n) {
        return model.floor();
    }
    const double z = gamma0_inverse_log(log_gamma0(model.lambda()) + std::log(r / n));
    return model.floor() * z / model.lambda();
}

double model_cdf(const MaxEntModel& model, double x) {
    if (x <= model.floor()) {
        return 0.0;
    }
    const double z = model.lambda() * x / model.floor();
    return 1.0 - std::exp(log_gamma0(z) - log_gamma0(model.lambda()));
}

double ks_distance(const RankDistribution& data, const MaxEntModel& model) {
    std::vector<double> x = data.populations;
    std::sort(x.begin(), x.end());
    const auto m = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = model_cdf(model, x[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    return d;
}

LambdaFit fit_lambda(const RankDistribution& data, double floor) {
    data.validate(false);
    if (data.size() < 10) {
        throw InputError("fit_lambda: need at least 10 entries");
    }
    if (!(floor > 0.0)) {
        throw InputError("fit_lambda: floor must be positive");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.populations[i] < floor) {
            throw InputError("fit_lambda: entry " + std::to_string(i) + " lies below the floor");
        }
    }
    const auto n = static_cast<double>(data.count);
    const std::size_t m = data.size();

    std::vector<double> log_x(m);
    std::vector<double> log_frac(m);
    for (std::size_t i = 0; i < m; ++i) {
        log_x[i] = std::log(data.populations[i]);
        log_frac[i] = std::log(data.ranks[i] / n);
    }

    // Parameter is θ = ln λ. ln x_model = ln x0 - θ + ln z with Γ(0,z) = Γ(0,λ) r/n,
    // and d ln x_model / dθ = -1 + S(z)/S(λ), S(z) = e^z Γ(0,z).
    auto model_z = [&](double lambda, std::size_t i) {
        return log_frac[i] == 0.0 ? lambda : gamma0_inverse_log(log_gamma0(lambda) + log_frac[i]);
    };
    LeastSquaresProblem problem;
    problem.residual_count = m;
    problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        const double lambda = std::exp(p(0));
        for (std::size_t i = 0; i < m; ++i) {
            const double z = model_z(lambda, i);
            r(static_cast<Eigen::Index>(i)) = log_x[i] - (std::log(floor) - p(0) + std::log(z));
        }
    };
    problem.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& j) {
        const double lambda = std::exp(p(0));
        const double s_lambda = gamma0_scaled(lambda);
        for (std::size_t i = 0; i < m; ++i) {
            const double z = model_z(lambda, i);
            j(static_cast<Eigen::Index>(i), 0) = 1.0 - gamma0_scaled(z) / s_lambda;
        }
    };

    // Start from the mean-value solution for the rows at hand.
    const double mean = std::accumulate(data.populations.begin(), data.populations.end(), 0.0) /
                        static_cast<double>(m);
    double start = 1.0;
    if (mean > floor * (1.0 + 1e-6)) {
        start = solve_lambda(mean * static_cast<double>(m), m, floor).lambda();
    }
    Eigen::VectorXd initial(1);
    initial(0) = std::log(start);
    const auto result = levenberg_marquardt(problem, initial);
    if (!result.converged || !std::isfinite(result.params(0))) {
        std::ostringstream msg;
        msg << "fit_lambda did not converge; residual history:";
        for (double v : result.rss_history) {
            msg << ' ' << v;
        }
        throw NumericalError(msg.str());
    }
    LambdaFit fit;
    fit.lambda = std::exp(result.params(0));
    fit.standard_error = fit.lambda * result.standard_errors(0);
    fit.rss = result.rss;
    fit.iterations = result.iterations;
    return fit;
}

} // namespace mcle::maxent
