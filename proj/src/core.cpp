#include "mcle/core.hpp"

#include "mcle/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mcle {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw InputError(std::string(what) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
    }
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

} // namespace

PopulationState::PopulationState(std::vector<double> x, double total, double t, double sum_tolerance)
    : x_(std::move(x)), total_(total), t_(t) {
    if (!(total_ > 0.0) || !std::isfinite(total_)) {
        throw InputError("population total must be positive and finite");
    }
    if (x_.empty()) {
        throw InputError("population state needs at least one component");
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
        if (!(x_[i] > 0.0) || !std::isfinite(x_[i])) {
            throw InputError("population " + std::to_string(i) + " is not positive and finite");
        }
    }
    if (std::abs(sum(x_) - total_) > sum_tolerance * total_) {
        throw InputError("populations do not add up to the total");
    }
}

RateModel RateModel::constant(std::vector<double> k) {
    if (k.empty()) {
        throw InputError("rate vector is empty");
    }
    return RateModel(ConstantRates{std::move(k)});
}

RateModel RateModel::parametric(std::size_t count, std::function<std::vector<double>(double)> exponent) {
    if (!exponent) {
        throw InputError("parametric rates need an exponent function");
    }
    auto rate = [exponent](double t) {
        // Five-point stencil; step scaled with |t| so the truncation and
        // cancellation errors stay balanced.
        const double h = 1e-3 * std::max(1.0, std::abs(t));
        auto p2 = exponent(t + 2 * h);
        auto p1 = exponent(t + h);
        auto m1 = exponent(t - h);
        auto m2 = exponent(t - 2 * h);
        std::vector<double> k(p1.size());
        for (std::size_t i = 0; i < k.size(); ++i) {
            k[i] = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
        }
        return k;
    };
    return parametric(count, std::move(exponent), std::move(rate));
}

RateModel RateModel::parametric(std::size_t count, std::function<std::vector<double>(double)> exponent,
                                std::function<std::vector<double>(double)> rate) {
    if (count == 0 || !exponent || !rate) {
        throw InputError("parametric rates need a component count, exponent and rate");
    }
    return RateModel(ParametricRates{count, std::move(exponent), std::move(rate)});
}

RateModel RateModel::stochastic(std::vector<double> mean, std::vector<double> sigma, double dt) {
    require_same_size(mean.size(), sigma.size(), "stochastic rates");
    if (mean.empty()) {
        throw InputError("rate vector is empty");
    }
    if (!(dt > 0.0)) {
        throw InputError("stochastic rates need dt > 0");
    }
    return RateModel(StochasticRates{std::move(mean), std::move(sigma), dt});
}

std::size_t RateModel::size() const noexcept {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantRates>) {
                return m.k.size();
            } else if constexpr (std::is_same_v<T, ParametricRates>) {
                return m.count;
            } else {
                return m.mean.size();
            }
        },
        model_);
}

std::vector<double> RateModel::rates_at(double t) const {
    if (const auto* c = std::get_if<ConstantRates>(&model_)) {
        return c->k;
    }
    if (const auto* p = std::get_if<ParametricRates>(&model_)) {
        auto k = p->rate(t);
        require_same_size(k.size(), p->count, "parametric rate");
        return k;
    }
    throw InputError("stochastic rates have no deterministic value; use the walker ensemble");
}

std::vector<double> RateModel::exponents_at(double t) const {
    if (const auto* c = std::get_if<ConstantRates>(&model_)) {
        std::vector<double> h(c->k.size());
        std::transform(c->k.begin(), c->k.end(), h.begin(), [t](double k) { return k * t; });
        return h;
    }
    if (const auto* p = std::get_if<ParametricRates>(&model_)) {
        auto h = p->exponent(t);
        require_same_size(h.size(), p->count, "parametric exponent");
        return h;
    }
    throw InputError("stochastic rates have no deterministic exponent");
}

LogisticParams::LogisticParams(double k_, double total_, double x0_) : k(k_), total(total_), x0(x0_) {
    if (!(total > 0.0)) {
        throw InputError("carrying capacity must be positive");
    }
    if (!(x0 > 0.0 && x0 < total)) {
        throw InputError("initial population must lie in (0, N)");
    }
    if (!std::isfinite(k)) {
        throw InputError("growth rate must be finite");
    }
}

std::vector<double> mcle_rhs(const PopulationState& state, std::span<const double> k) {
    require_same_size(state.size(), k.size(), "mcle_rhs");
    const auto x = state.x();
    double mean_rate = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        mean_rate += k[j] * x[j];
    }
    mean_rate /= state.total();
    std::vector<double> dx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        dx[i] = x[i] * (k[i] - mean_rate);
    }
    return dx;
}

std::vector<double> substituted_solution(std::span<const double> x0, std::span<const double> exponents,
                                         double total) {
    require_same_size(x0.size(), exponents.size(), "substituted_solution");
    if (x0.empty()) {
        throw InputError("substituted_solution: no components");
    }
    std::vector<double> w(x0.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(x0[i] > 0.0)) {
            throw InputError("initial populations must be positive");
        }
        w[i] = std::log(x0[i]) + exponents[i];
    }
    const double shift = *std::max_element(w.begin(), w.end());
    if (!std::isfinite(shift)) {
        throw NumericalError("non-finite exponent in closed-form solution");
    }
    double norm = 0.0;
    for (double& v : w) {
        v = std::exp(v - shift);
        norm += v;
    }
    for (double& v : w) {
        v = total * v / norm;
    }
    return w;
}

PopulationState closed_form(std::span<const double> x0, std::span<const double> k, double total, double t) {
    require_same_size(x0.size(), k.size(), "closed_form");
    std::vector<double> h(k.size());
    std::transform(k.begin(), k.end(), h.begin(), [t](double ki) { return ki * t; });
    auto x = substituted_solution(x0, h, total);
    // Components far below the leading one underflow to zero; keep the state
    // representable by flooring at the smallest positive double.
    for (double& v : x) {
        v = std::max(v, std::numeric_limits<double>::min());
    }
    return PopulationState(std::move(x), total, t);
}

Trajectory integrate(const PopulationState& state, const RateModel& rates, double t_end, double dt) {
    if (!(dt > 0.0)) {
        throw InputError("integrate: dt must be positive");
    }
    if (rates.is_stochastic()) {
        throw InputError("integrate: stochastic rates are handled by the walker ensemble");
    }
    require_same_size(state.size(), rates.size(), "integrate");
    const double span = t_end - state.time();
    if (span < 0.0) {
        throw InputError("integrate: t_end precedes the initial time");
    }

    const double total = state.total();
    const std::size_t n = state.size();
    const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));

    Trajectory out;
    out.reserve(steps + 1);
    out.push_back(state);
    if (steps == 0) {
        return out;
    }
    const double h = span / static_cast<double>(steps);

    std::vector<double> x = state.values();
    auto deriv = [&](const std::vector<double>& y, double t) {
        const auto k = rates.rates_at(t);
        double mean_rate = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            mean_rate += k[j] * y[j];
        }
        mean_rate /= total;
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = y[i] * (k[i] - mean_rate);
        }
        return d;
    };

    std::vector<double> tmp(n);
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = state.time() + h * static_cast<double>(s);
        const auto k1 = deriv(x, t);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        const auto k2 = deriv(tmp, t + 0.5 * h);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        const auto k3 = deriv(tmp, t + 0.5 * h);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
        const auto k4 = deriv(tmp, t + h);

        double s_x = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!std::isfinite(x[i]) || !(x[i] > 0.0)) {
                throw NumericalError("integrate: component " + std::to_string(i) +
                                     " became non-finite or non-positive at step " + std::to_string(s + 1));
            }
            s_x += x[i];
        }
        const double scale = total / s_x;
        for (double& v : x) v *= scale;

        const double t_next = (s + 1 == steps) ? t_end : state.time() + h * static_cast<double>(s + 1);
        out.emplace_back(x, total, t_next);
    }
    return out;
}

double sigmoid(const LogisticParams& p, double t) {
    return p.total / (1.0 + (p.total / p.x0 - 1.0) * std::exp(-p.k * t));
}

} // namespace mcle
