#include "mcle/walkers.hpp"

#include "mcle/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <numeric>
#include <string>

namespace mcle::walkers {

namespace {

double log_sum_exp(std::span<const double> u) {
    const double m = *std::max_element(u.begin(), u.end());
    double s = 0.0;
    for (double v : u) {
        s += std::exp(v - m);
    }
    return m + std::log(s);
}

} // namespace

double correction_A(std::span<const double> u_proposed, double total) {
    if (u_proposed.empty()) {
        throw InputError("correction_A: no walkers");
    }
    if (!(total > 0.0)) {
        throw InputError("correction_A: total must be positive");
    }
    for (double v : u_proposed) {
        if (!std::isfinite(v)) {
            throw InputError("correction_A: non-finite log population");
        }
    }
    return std::log(total) - log_sum_exp(u_proposed);
}

WalkerEnsemble::WalkerEnsemble(std::vector<double> log_populations, WalkerParams params)
    : u_(std::move(log_populations)), params_(std::move(params)), rng_(params_.seed) {
    const std::size_t n = u_.size();
    if (n < 2) {
        throw InputError("walker ensemble needs at least two walkers");
    }
    if (params_.drift.size() != n || params_.sigma.size() != n) {
        throw InputError("walker ensemble: drift and sigma must have one entry per walker");
    }
    if (!(params_.dt > 0.0)) {
        throw InputError("walker ensemble: dt must be positive");
    }
    if (!(params_.floor > 0.0) || !(params_.total > 0.0)) {
        throw InputError("walker ensemble: floor and total must be positive");
    }
    if (params_.total < static_cast<double>(n) * params_.floor) {
        throw InputError("walker ensemble: floor infeasible, N < n * x0");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(params_.drift[i]) || !(params_.sigma[i] >= 0.0)) {
            throw InputError("walker ensemble: invalid drift or sigma at walker " + std::to_string(i));
        }
    }
    // Smallest u with e^u >= floor, so walkers pinned at the floor read back at or above it.
    log_floor_ = std::log(params_.floor);
    while (std::exp(log_floor_) < params_.floor) {
        log_floor_ = std::nextafter(log_floor_, std::numeric_limits<double>::infinity());
    }
    const double lse = log_sum_exp(u_);
    if (std::abs(std::exp(lse - std::log(params_.total)) - 1.0) > 1e-9) {
        throw InputError("walker ensemble: populations do not add up to the total");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (u_[i] < log_floor_ - 1e-12) {
            throw InputError("walker ensemble: walker " + std::to_string(i) + " starts below the floor");
        }
    }
    scratch_.resize(n);
}

WalkerEnsemble WalkerEnsemble::uniform(std::size_t count, double total, double floor, double dt, double drift,
                                       double sigma, std::uint64_t seed, FloorPolicy policy) {
    if (count == 0) {
        throw InputError("walker ensemble needs at least two walkers");
    }
    WalkerParams p;
    p.total = total;
    p.floor = floor;
    p.dt = dt;
    p.drift.assign(count, drift);
    p.sigma.assign(count, sigma);
    p.seed = seed;
    p.policy = policy;
    return WalkerEnsemble(std::vector<double>(count, std::log(total / static_cast<double>(count))), std::move(p));
}

std::vector<double> WalkerEnsemble::populations() const {
    std::vector<double> x(u_.size());
    std::transform(u_.begin(), u_.end(), x.begin(), [](double v) { return std::exp(v); });
    return x;
}

void WalkerEnsemble::advance() {
    const std::size_t n = u_.size();
    const double dt = params_.dt;
    auto& proposal = scratch_;
    for (std::size_t pair = 0; 2 * pair < n; ++pair) {
        const auto [xi0, xi1] = rng_.normal_pair(steps_, pair);
        const std::size_t i = 2 * pair;
        proposal[i] = u_[i] + dt * (params_.drift[i] + params_.sigma[i] * xi0);
        if (i + 1 < n) {
            proposal[i + 1] = u_[i + 1] + dt * (params_.drift[i + 1] + params_.sigma[i + 1] * xi1);
        }
    }
    if (params_.policy == FloorPolicy::reject_then_clamp) {
        for (std::size_t i = 0; i < n; ++i) {
            if (proposal[i] < log_floor_) {
                proposal[i] = u_[i];
            }
        }
    }
    const double a = correction_A(proposal, params_.total);
    for (std::size_t i = 0; i < n; ++i) {
        u_[i] = proposal[i] + a;
    }
    if (params_.policy == FloorPolicy::project) {
        enforce_floor_projected();
    } else {
        enforce_floor_clamped();
    }
    ++steps_;
}

void WalkerEnsemble::enforce_floor_projected() {
    // Newton-type iteration for the multipliers μ_i of the active floor
    // constraints g_i = u_i + A(u) - ln x0 >= 0, whose gradients are e_i - w
    // with w = x/N. Each pass moves u by Σ μ_i (e_i - w) and renormalizes.
    const std::size_t n = u_.size();
    const double total = params_.total;
    for (int pass = 0; pass < 100; ++pass) {
        bool any = false;
        for (double v : u_) {
            if (v < log_floor_) {
                any = true;
                break;
            }
        }
        if (!any) {
            return;
        }
        double sum_w2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            scratch_[i] = std::exp(u_[i]) / total;
            sum_w2 += scratch_[i] * scratch_[i];
        }
        double mu_total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (u_[i] < log_floor_) {
                const double mu = (log_floor_ - u_[i]) / (1.0 - 2.0 * scratch_[i] + sum_w2);
                u_[i] += mu;
                mu_total += mu;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            u_[i] -= scratch_[i] * mu_total;
        }
        const double a = correction_A(u_, total);
        for (double& v : u_) {
            v += a;
        }
        // Rounding can leave violations at the 1e-15 level; settle those exactly.
        bool settled = true;
        for (double& v : u_) {
            if (v < log_floor_) {
                if (v > log_floor_ - 1e-12) {
                    v = log_floor_;
                } else {
                    settled = false;
                }
            }
        }
        if (settled) {
            return;
        }
    }
    throw NumericalError("floor projection did not converge at step " + std::to_string(steps_));
}

void WalkerEnsemble::enforce_floor_clamped() {
    const std::size_t n = u_.size();
    const double total = params_.total;
    const double floor = params_.floor;
    std::vector<bool> pinned(n, false);
    std::size_t pinned_count = 0;
    for (std::size_t pass = 0; pass <= n; ++pass) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!pinned[i] && u_[i] < log_floor_) {
                pinned[i] = true;
                ++pinned_count;
                changed = true;
            }
        }
        if (!changed) {
            return;
        }
        double free_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!pinned[i]) {
                free_sum += std::exp(u_[i]);
            }
        }
        const double remaining = total - static_cast<double>(pinned_count) * floor;
        if (!(free_sum > 0.0) || !(remaining > 0.0)) {
            for (double& v : u_) {
                v = log_floor_;
            }
            return;
        }
        const double shift = std::log(remaining / free_sum);
        for (std::size_t i = 0; i < n; ++i) {
            u_[i] = pinned[i] ? log_floor_ : u_[i] + shift;
        }
    }
}

WalkerEnsemble step(WalkerEnsemble ens) {
    ens.advance();
    return ens;
}

void CorrelationAccumulator::add(double a, double b) noexcept {
    ++n_;
    const double k = static_cast<double>(n_);
    const double da = a - mean_a_;
    const double db = b - mean_b_;
    mean_a_ += da / k;
    mean_b_ += db / k;
    m2_a_ += da * (a - mean_a_);
    m2_b_ += db * (b - mean_b_);
    c_ab_ += da * (b - mean_b_);
}

double CorrelationAccumulator::value() const {
    if (auto v = try_value()) {
        return *v;
    }
    throw NumericalError("correlation undefined: fewer than two points or zero variance input");
}

std::optional<double> CorrelationAccumulator::try_value() const {
    if (n_ < 2) {
        return std::nullopt;
    }
    const double k = static_cast<double>(n_);
    auto degenerate = [k](double m2, double mean) {
        const double scale = std::max(std::abs(mean), 1e-300);
        return m2 / k <= 1e-24 * scale * scale;
    };
    if (degenerate(m2_a_, mean_a_) || degenerate(m2_b_, mean_b_)) {
        return std::nullopt;
    }
    return std::clamp(c_ab_ / std::sqrt(m2_a_ * m2_b_), -1.0, 1.0);
}

double scale_invariance_corr(std::span<const std::vector<double>> u_snapshots, double dt) {
    if (u_snapshots.size() < 2) {
        throw InputError("scale_invariance_corr: need at least two snapshots");
    }
    if (!(dt > 0.0)) {
        throw InputError("scale_invariance_corr: dt must be positive");
    }
    CorrelationAccumulator acc;
    for (std::size_t s = 1; s < u_snapshots.size(); ++s) {
        const auto& prev = u_snapshots[s - 1];
        const auto& next = u_snapshots[s];
        if (prev.size() != next.size()) {
            throw InputError("scale_invariance_corr: snapshots differ in size");
        }
        for (std::size_t i = 0; i < prev.size(); ++i) {
            const double rate = (next[i] - prev[i]) / dt;
            acc.add(prev[i], rate * rate);
        }
    }
    return acc.value();
}

EnsembleStats run_to_equilibrium(WalkerEnsemble& ens, std::uint64_t burn_in, std::uint64_t sample_every,
                                 std::uint64_t samples) {
    if (burn_in < 1 || samples < 1 || sample_every < 1) {
        throw InputError("run_to_equilibrium: burn_in, sample_every and samples must be at least 1");
    }
    for (std::uint64_t s = 0; s < burn_in; ++s) {
        ens.advance();
    }
    const std::size_t n = ens.size();
    const double dt = ens.params().dt;
    std::vector<double> mean_sorted(n, 0.0);
    CorrelationAccumulator acc;
    std::vector<double> before;
    std::vector<double> x;
    for (std::uint64_t k = 0; k < samples; ++k) {
        if (k > 0) {
            for (std::uint64_t s = 1; s < sample_every; ++s) {
                ens.advance();
            }
        }
        x = ens.populations();
        std::sort(x.begin(), x.end(), std::greater<>());
        for (std::size_t i = 0; i < n; ++i) {
            mean_sorted[i] += x[i];
        }
        before.assign(ens.log_populations().begin(), ens.log_populations().end());
        ens.advance();
        const auto after = ens.log_populations();
        for (std::size_t i = 0; i < n; ++i) {
            const double rate = (after[i] - before[i]) / dt;
            acc.add(before[i], rate * rate);
        }
    }
    for (double& v : mean_sorted) {
        v /= static_cast<double>(samples);
    }

    EnsembleStats stats;
    stats.rank_table = maxent::make_rank_table(std::move(mean_sorted), ens.params().floor);
    stats.rank_table.total = ens.params().total;
    stats.corr_coeff = acc.try_value();
    stats.step_count = ens.step_count();
    return stats;
}

} // namespace mcle::walkers
