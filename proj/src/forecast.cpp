#include "mcle/forecast.hpp"

#include "mcle/core.hpp"
#include "mcle/error.hpp"
#include "mcle/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mcle::forecast {

ShareSeries::ShareSeries(std::vector<std::string> components, std::vector<double> times,
                         std::vector<std::vector<double>> shares, double total, double sum_tolerance)
    : components_(std::move(components)), times_(std::move(times)), shares_(std::move(shares)), total_(total) {
    if (components_.empty()) {
        throw InputError("share series has no components");
    }
    if (!(total_ > 0.0)) {
        throw InputError("share series total must be positive");
    }
    if (shares_.size() != times_.size()) {
        throw InputError("share series: one row of shares per time is required");
    }
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (!std::isfinite(times_[k]) || (k > 0 && !(times_[k] > times_[k - 1]))) {
            throw InputError("share series: times must be finite and strictly increasing (row " +
                             std::to_string(k) + ")");
        }
        const auto& row = shares_[k];
        if (row.size() != components_.size()) {
            throw InputError("share series: row " + std::to_string(k) + " has the wrong number of shares");
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (!(row[i] > 0.0) || !std::isfinite(row[i])) {
                throw InputError("share series: non-positive share for " + components_[i] + " in row " +
                                 std::to_string(k));
            }
        }
        const double s = std::accumulate(row.begin(), row.end(), 0.0);
        if (std::abs(s - total_) > sum_tolerance * total_) {
            throw InputError("share series: row " + std::to_string(k) + " sums to " + std::to_string(s) +
                             ", expected " + std::to_string(total_));
        }
    }
}

std::size_t ShareSeries::index_of(const std::string& name) const {
    const auto it = std::find(components_.begin(), components_.end(), name);
    if (it == components_.end()) {
        throw InputError("unknown component '" + name + "'");
    }
    return static_cast<std::size_t>(it - components_.begin());
}

std::size_t ShareSeries::origin_row() const {
    for (std::size_t k = 0; k < times_.size(); ++k) {
        if (std::abs(times_[k]) < 1e-12) {
            return k;
        }
    }
    throw InputError("share series has no sample at t = 0");
}

GrowthExponents extract_h(const ShareSeries& series, std::size_t ref_index, HConvention convention) {
    if (ref_index >= series.component_count()) {
        throw InputError("extract_h: reference index out of range");
    }
    const std::size_t origin = series.origin_row();
    const auto& x0 = series.shares()[origin];
    GrowthExponents out;
    out.times = series.times();
    out.reference = ref_index;
    out.convention = convention;
    out.h.assign(series.component_count(), std::vector<double>(series.sample_count(), 0.0));
    const double sign = convention == HConvention::growth ? 1.0 : -1.0;
    for (std::size_t k = 0; k < series.sample_count(); ++k) {
        const auto& x = series.shares()[k];
        const double ref_term = std::log(x0[ref_index]) - std::log(x[ref_index]);
        for (std::size_t i = 0; i < series.component_count(); ++i) {
            if (i == ref_index) {
                continue;
            }
            out.h[i][k] = sign * (std::log(x[i]) - std::log(x0[i]) + ref_term);
        }
    }
    return out;
}

double ComponentFit::evaluate(double t) const {
    if (is_reference) {
        return 0.0;
    }
    switch (form) {
    case FitForm::exponential:
        return a * std::exp(-b * t) * t + c;
    case FitForm::linear:
        return a * t + c;
    case FitForm::tabulated: {
        if (table_t.size() == 1) {
            return table_h.front();
        }
        auto hi = std::upper_bound(table_t.begin(), table_t.end(), t);
        std::size_t j = static_cast<std::size_t>(hi - table_t.begin());
        j = std::clamp<std::size_t>(j, 1, table_t.size() - 1);
        const double t0 = table_t[j - 1];
        const double t1 = table_t[j];
        const double w = (t - t0) / (t1 - t0);
        return table_h[j - 1] + w * (table_h[j] - table_h[j - 1]);
    }
    }
    return 0.0;
}

double RateFit::exponent(std::size_t component, double t) const {
    const double h = components.at(component).evaluate(t);
    return convention == HConvention::growth ? h : -h;
}

namespace {

ComponentFit fit_component(std::span<const double> t, std::span<const double> h, FitForm form,
                           const std::string& label) {
    ComponentFit fit;
    fit.form = form;
    if (form == FitForm::tabulated) {
        fit.table_t.assign(t.begin(), t.end());
        fit.table_h.assign(h.begin(), h.end());
        return fit;
    }
    const std::size_t m = t.size();
    // a from the least-squares slope of the last three samples.
    double a0 = 0.0;
    {
        const std::size_t s = m - 3;
        const double tm = (t[s] + t[s + 1] + t[s + 2]) / 3.0;
        const double hm = (h[s] + h[s + 1] + h[s + 2]) / 3.0;
        double num = 0.0, den = 0.0;
        for (std::size_t k = s; k < m; ++k) {
            num += (t[k] - tm) * (h[k] - hm);
            den += (t[k] - tm) * (t[k] - tm);
        }
        a0 = num / den;
    }

    LeastSquaresProblem problem;
    problem.residual_count = m;
    Eigen::VectorXd initial;
    if (form == FitForm::exponential) {
        initial = Eigen::Vector3d(a0, 0.0, 0.0);
        problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
            for (std::size_t k = 0; k < m; ++k) {
                r(static_cast<Eigen::Index>(k)) = h[k] - (p(0) * std::exp(-p(1) * t[k]) * t[k] + p(2));
            }
        };
        problem.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& j) {
            for (std::size_t k = 0; k < m; ++k) {
                const auto row = static_cast<Eigen::Index>(k);
                const double e = std::exp(-p(1) * t[k]);
                j(row, 0) = -e * t[k];
                j(row, 1) = p(0) * t[k] * t[k] * e;
                j(row, 2) = -1.0;
            }
        };
    } else {
        initial = Eigen::Vector2d(a0, 0.0);
        problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
            for (std::size_t k = 0; k < m; ++k) {
                r(static_cast<Eigen::Index>(k)) = h[k] - (p(0) * t[k] + p(1));
            }
        };
        problem.jacobian = [&](const Eigen::VectorXd&, Eigen::MatrixXd& j) {
            for (std::size_t k = 0; k < m; ++k) {
                j(static_cast<Eigen::Index>(k), 0) = -t[k];
                j(static_cast<Eigen::Index>(k), 1) = -1.0;
            }
        };
    }
    const auto result = levenberg_marquardt(problem, initial);
    if (!result.converged || !result.params.allFinite()) {
        const double best = result.rss_history.empty()
                                ? result.rss
                                : *std::min_element(result.rss_history.begin(), result.rss_history.end());
        std::ostringstream msg;
        msg << "fit_rates: no convergence for " << label << " after " << result.iterations
            << " iterations; best residual sum of squares " << best;
        throw NumericalError(msg.str());
    }
    fit.rss = result.rss;
    fit.iterations = result.iterations;
    fit.a = result.params(0);
    fit.a_err = result.standard_errors(0);
    if (form == FitForm::exponential) {
        fit.b = result.params(1);
        fit.b_err = result.standard_errors(1);
        fit.c = result.params(2);
        fit.c_err = result.standard_errors(2);
    } else {
        fit.c = result.params(1);
        fit.c_err = result.standard_errors(1);
    }
    return fit;
}

} // namespace

RateFit fit_rates(const GrowthExponents& exponents, FitForm form) {
    const std::size_t m = exponents.times.size();
    if (m < 5) {
        throw InputError("fit_rates: need at least 5 samples per component");
    }
    RateFit fit;
    fit.reference = exponents.reference;
    fit.convention = exponents.convention;
    fit.components.resize(exponents.h.size());
    for (std::size_t i = 0; i < exponents.h.size(); ++i) {
        if (i == exponents.reference) {
            fit.components[i].form = form;
            fit.components[i].is_reference = true;
            continue;
        }
        if (exponents.h[i].size() != m) {
            throw InputError("fit_rates: exponent table length mismatch");
        }
        fit.components[i] = fit_component(exponents.times, exponents.h[i], form, "component " + std::to_string(i));
    }
    return fit;
}

ShareSeries forecast(const ShareSeries& series, const RateFit& fit, std::span<const double> horizon,
                     double n_prime_factor) {
    if (fit.components.size() != series.component_count()) {
        throw InputError("forecast: fit and series have different component counts");
    }
    if (!(n_prime_factor > 0.0)) {
        throw InputError("forecast: N' factor must be positive");
    }
    const auto& x0 = series.shares()[series.origin_row()];
    const double total = n_prime_factor * series.total();
    std::vector<std::vector<double>> rows;
    rows.reserve(horizon.size());
    std::vector<double> exps(series.component_count());
    for (double t : horizon) {
        for (std::size_t i = 0; i < exps.size(); ++i) {
            exps[i] = fit.exponent(i, t);
            if (!std::isfinite(exps[i])) {
                throw NumericalError("forecast: fitted exponent is not finite at t = " + std::to_string(t));
            }
        }
        rows.push_back(substituted_solution(x0, exps, total));
        for (double& v : rows.back()) {
            v = std::max(v, std::numeric_limits<double>::min());
        }
    }
    return ShareSeries(series.components(), std::vector<double>(horizon.begin(), horizon.end()), std::move(rows),
                       total, 1e-9);
}

const char* to_string(FitForm form) {
    switch (form) {
    case FitForm::exponential:
        return "exponential";
    case FitForm::linear:
        return "linear";
    case FitForm::tabulated:
        return "tabulated";
    }
    return "unknown";
}

FitForm parse_fit_form(const std::string& name) {
    if (name == "exponential") return FitForm::exponential;
    if (name == "linear") return FitForm::linear;
    if (name == "tabulated") return FitForm::tabulated;
    throw InputError("unknown fit form '" + name + "' (expected exponential, linear or tabulated)");
}

} // namespace mcle::forecast
