#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace mcle {

/// Component populations x_i at time t together with their conserved total N.
///
/// Construction validates that every x_i is strictly positive and that the
/// populations add up to N within `sum_tolerance` (relative).
class PopulationState {
public:
    static constexpr double default_sum_tolerance = 1e-9;

    PopulationState(std::vector<double> x, double total, double t = 0.0,
                    double sum_tolerance = default_sum_tolerance);

    std::span<const double> x() const noexcept { return x_; }
    const std::vector<double>& values() const noexcept { return x_; }
    double operator[](std::size_t i) const { return x_[i]; }
    std::size_t size() const noexcept { return x_.size(); }
    double total() const noexcept { return total_; }
    double time() const noexcept { return t_; }

private:
    std::vector<double> x_;
    double total_;
    double t_;
};

using Trajectory = std::vector<PopulationState>;

struct ConstantRates {
    std::vector<double> k;
};

/// Time-dependent rates given through the cumulative exponent h_i(t), so that
/// constant rates correspond to h_i(t) = k_i t. `rate` is dh/dt.
struct ParametricRates {
    std::size_t count = 0;
    std::function<std::vector<double>(double)> exponent;
    std::function<std::vector<double>(double)> rate;
};

/// k_i(t) = mean_i + sigma_i xi(t), with xi drawn once per interval dt.
struct StochasticRates {
    std::vector<double> mean;
    std::vector<double> sigma;
    double dt = 0.0;
};

class RateModel {
public:
    using Variant = std::variant<ConstantRates, ParametricRates, StochasticRates>;

    static RateModel constant(std::vector<double> k);
    /// Rates obtained from h by a fourth-order central difference.
    static RateModel parametric(std::size_t count, std::function<std::vector<double>(double)> exponent);
    static RateModel parametric(std::size_t count, std::function<std::vector<double>(double)> exponent,
                                std::function<std::vector<double>(double)> rate);
    static RateModel stochastic(std::vector<double> mean, std::vector<double> sigma, double dt);

    std::size_t size() const noexcept;
    bool is_stochastic() const noexcept { return std::holds_alternative<StochasticRates>(model_); }

    /// k_i(t); throws for stochastic models, which have no deterministic rate.
    std::vector<double> rates_at(double t) const;
    /// h_i(t), the cumulative exponent used by the closed-form solution.
    std::vector<double> exponents_at(double t) const;

    const Variant& variant() const noexcept { return model_; }

private:
    explicit RateModel(Variant v) : model_(std::move(v)) {}
    Variant model_;
};

/// Single-component logistic growth: rate k, carrying capacity N, x(0) = x0.
struct LogisticParams {
    double k;
    double total;
    double x0;

    LogisticParams(double k, double total, double x0);
};

/// dx_i/dt = x_i (k_i - (1/N) sum_j k_j x_j).
std::vector<double> mcle_rhs(const PopulationState& state, std::span<const double> k);

/// x_i = N x_i(0) e^{h_i} / sum_j x_j(0) e^{h_j}, evaluated with a max-shift so
/// that very large exponents do not overflow.
std::vector<double> substituted_solution(std::span<const double> x0, std::span<const double> exponents,
                                         double total);

/// Exact solution for constant rates (h_i = k_i t).
PopulationState closed_form(std::span<const double> x0, std::span<const double> k, double total, double t);

/// Fixed-step RK4 integration of the MCLE from `state` to t_end, renormalizing
/// to the total after every step. The step is shortened uniformly so that the
/// last sample lands exactly on t_end. Returns every step including the start.
Trajectory integrate(const PopulationState& state, const RateModel& rates, double t_end, double dt);

double sigmoid(const LogisticParams& params, double t);

} // namespace mcle
