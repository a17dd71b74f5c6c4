#pragma once

#include "mcle/maxent.hpp"
#include "mcle/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mcle::walkers {

/// How a step keeps every walker at or above the population floor.
enum class FloorPolicy {
    /// Normal reflection: violators are projected back onto the constrained
    /// surface along e_i - x/N. Leaves the MaxEnt equilibrium invariant.
    project,
    /// Per-walker rejection of the proposal, then clamp-and-renormalize any
    /// walker the correction pushed below the floor.
    reject_then_clamp,
};

struct WalkerParams {
    double total = 6e6;
    double floor = 150.0;
    double dt = 0.03;
    std::vector<double> drift;   // k̄_i
    std::vector<double> sigma;   // σ_i
    std::uint64_t seed = 0;
    FloorPolicy policy = FloorPolicy::project;
};

/// Walkers in log-population space u_i = ln x_i with Σ e^{u_i} = N and
/// e^{u_i} >= floor after every step.
class WalkerEnsemble {
public:
    WalkerEnsemble(std::vector<double> log_populations, WalkerParams params);

    /// n walkers at x_i = N/n with uniform drift and noise.
    static WalkerEnsemble uniform(std::size_t count, double total, double floor, double dt, double drift,
                                  double sigma, std::uint64_t seed, FloorPolicy policy = FloorPolicy::project);

    /// Advances one interval in place.
    void advance();

    std::span<const double> log_populations() const noexcept { return u_; }
    std::vector<double> populations() const;
    std::size_t size() const noexcept { return u_.size(); }
    std::uint64_t step_count() const noexcept { return steps_; }
    const WalkerParams& params() const noexcept { return params_; }

private:
    void enforce_floor_projected();
    void enforce_floor_clamped();

    std::vector<double> u_;
    WalkerParams params_;
    CounterRng rng_;
    std::uint64_t steps_ = 0;
    double log_floor_;
    std::vector<double> scratch_;
};

/// A = -ln[(1/N) Σ e^{u'_j}], the global shift restoring Σ e^u = N.
double correction_A(std::span<const double> u_proposed, double total);

/// Returns the ensemble advanced by one interval.
WalkerEnsemble step(WalkerEnsemble ens);

struct EnsembleStats {
    maxent::RankDistribution rank_table;
    /// Empty when |u̇|² has no spread (e.g. noiseless runs).
    std::optional<double> corr_coeff;
    std::uint64_t step_count = 0;
};

/// Runs `burn_in` steps, then takes `samples` snapshots `sample_every` steps
/// apart. The rank table is the rank-wise average of the sorted snapshots; the
/// correlation pools u against |u̇|² over the step following each snapshot.
EnsembleStats run_to_equilibrium(WalkerEnsemble& ens, std::uint64_t burn_in, std::uint64_t sample_every,
                                 std::uint64_t samples);

/// Streaming Pearson correlation.
class CorrelationAccumulator {
public:
    void add(double a, double b) noexcept;
    std::size_t count() const noexcept { return n_; }
    /// Throws NumericalError when either variable has zero variance.
    double value() const;
    std::optional<double> try_value() const;

private:
    std::size_t n_ = 0;
    double mean_a_ = 0.0;
    double mean_b_ = 0.0;
    double m2_a_ = 0.0;
    double m2_b_ = 0.0;
    double c_ab_ = 0.0;
};

/// Pearson correlation between u_i and |u̇_i|², with u̇ from finite
/// differences of consecutive snapshots dt apart, pooled over all pairs.
double scale_invariance_corr(std::span<const std::vector<double>> u_snapshots, double dt);

} // namespace mcle::walkers
