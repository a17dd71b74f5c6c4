#pragma once

#include <cstddef>
#include <vector>

namespace mcle::maxent {

/// Upper incomplete gamma function of order zero, Γ(0,z) = E1(z), for z > 0.
double gamma0(double z);
/// e^z Γ(0,z); stays representable where Γ(0,z) itself underflows.
double gamma0_scaled(double z);
/// The z > 0 with Γ(0,z) = g.
double gamma0_inverse(double g);
/// The z > 0 with ln Γ(0,z) = log_g; covers targets below the double range.
double gamma0_inverse_log(double log_g);

/// Descending population-vs-rank table. `count` is the n of the rank law, which
/// can exceed the number of rows when only part of the table is kept.
struct RankDistribution {
    std::vector<double> ranks;
    std::vector<double> populations;
    std::size_t count = 0;
    double total = 0.0;
    double floor = 0.0;

    std::size_t size() const noexcept { return populations.size(); }
    /// Throws InputError unless populations are non-increasing and ranks lie in (0, count].
    /// Ordering is skipped when require_sorted is false (noisy rows at fixed ranks).
    void validate(bool require_sorted = true) const;
};

/// Sorts descending and assigns midpoint ranks r = i + 1/2 (i = 0..n-1).
RankDistribution make_rank_table(std::vector<double> populations, double floor);

/// MaxEnt equilibrium p(x) dx ∝ e^{-λx/x0} dx / x on [x0, ∞).
///
/// `lambda` is the dimensionless rate with populations measured in units of
/// the floor x0; the rate per person is lambda / x0. The total is tied to λ by
/// the mean-value condition e^{-λ} / (λ Γ(0,λ)) = N / (n x0).
class MaxEntModel {
public:
    /// Model with the given rate; the total follows from the mean-value condition.
    MaxEntModel(double lambda, double floor, std::size_t count);

    double lambda() const noexcept { return lambda_; }
    double rate_per_person() const noexcept { return lambda_ / floor_; }
    double floor() const noexcept { return floor_; }
    std::size_t count() const noexcept { return count_; }
    double total() const noexcept { return total_; }
    /// Normalization multiplier: p(x) = e^{-mu} e^{-λx/x0} / x.
    double mu() const noexcept { return mu_; }

    /// Relative residual of the mean-value condition for a given total.
    double mean_residual(double total) const;

private:
    double lambda_;
    double floor_;
    std::size_t count_;
    double total_;
    double mu_;
};

/// <x>/x0 under the MaxEnt density with reduced rate lambda.
double mean_ratio(double lambda);

/// Solves e^{-λ}/(λΓ(0,λ)) = N/(n x0) by log-space bisection and Newton polish.
MaxEntModel solve_lambda(double total, std::size_t count, double floor);

/// x(r) = (x0/λ) Γ^{-1}[Γ(0,λ) r/n] for 0 < r <= n.
double analytic_rank(const MaxEntModel& model, double r);

/// P(X <= x) under the model density.
double model_cdf(const MaxEntModel& model, double x);

/// Kolmogorov-Smirnov distance between the table's populations and the model.
double ks_distance(const RankDistribution& data, const MaxEntModel& model);

struct LambdaFit {
    double lambda = 0.0;
    double standard_error = 0.0;
    double rss = 0.0;
    long iterations = 0;
};

/// Least-squares fit of log x(r) to the log of the rank law, λ free, with n and
/// x0 taken from the table and the given floor.
LambdaFit fit_lambda(const RankDistribution& data, double floor);

} // namespace mcle::maxent
