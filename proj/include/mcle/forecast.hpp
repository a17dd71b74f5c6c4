#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mcle::forecast {

/// Compositional time series: shares of n named components sampled at
/// strictly increasing times (months, t = 0 at the reference epoch).
class ShareSeries {
public:
    ShareSeries(std::vector<std::string> components, std::vector<double> times,
                std::vector<std::vector<double>> shares, double total = 100.0, double sum_tolerance = 1e-6);

    const std::vector<std::string>& components() const noexcept { return components_; }
    const std::vector<double>& times() const noexcept { return times_; }
    /// shares()[k][i]: component i at times()[k].
    const std::vector<std::vector<double>>& shares() const noexcept { return shares_; }
    double total() const noexcept { return total_; }
    std::size_t component_count() const noexcept { return components_.size(); }
    std::size_t sample_count() const noexcept { return times_.size(); }

    std::size_t index_of(const std::string& name) const;
    /// Row index of t = 0; throws InputError when absent.
    std::size_t origin_row() const;

private:
    std::vector<std::string> components_;
    std::vector<double> times_;
    std::vector<std::vector<double>> shares_;
    double total_;
};

/// Sign convention for the relative growth exponent.
enum class HConvention {
    /// h_i = log[(x_i(t)/x_i(0)) (x_ref(0)/x_ref(t))]; constant rates give (k_i - k_ref) t.
    growth,
    /// h_i = log[(x_i(0)/x_i(t)) (x_ref(t)/x_ref(0))], the reciprocal form.
    printed,
};

struct GrowthExponents {
    std::vector<double> times;
    /// h[i][k]: component i at times[k]; h[reference] is identically zero.
    std::vector<std::vector<double>> h;
    std::size_t reference = 0;
    HConvention convention = HConvention::growth;
};

GrowthExponents extract_h(const ShareSeries& series, std::size_t ref_index,
                          HConvention convention = HConvention::growth);

enum class FitForm {
    exponential,  // a e^{-bt} t + c
    linear,       // a t + c
    tabulated,    // piecewise-linear through the extracted values
};

struct ComponentFit {
    FitForm form = FitForm::linear;
    bool is_reference = false;
    double a = 0.0, b = 0.0, c = 0.0;
    double a_err = 0.0, b_err = 0.0, c_err = 0.0;
    double rss = 0.0;
    long iterations = 0;
    std::vector<double> table_t;
    std::vector<double> table_h;

    double evaluate(double t) const;
};

struct RateFit {
    std::size_t reference = 0;
    HConvention convention = HConvention::growth;
    std::vector<ComponentFit> components;

    /// The exponent that replaces k_i t in the closed-form solution.
    double exponent(std::size_t component, double t) const;
};

/// Fits every non-reference component. Nonlinear forms start from a = slope of
/// the last three samples, b = 0, c = 0.
RateFit fit_rates(const GrowthExponents& exponents, FitForm form);

/// Closed-form solution with k_i t replaced by the fitted exponents, the t = 0
/// shares as initial condition and total N' = n_prime_factor * N. Values are
/// reported as computed, without rescaling back to N.
ShareSeries forecast(const ShareSeries& series, const RateFit& fit, std::span<const double> horizon,
                     double n_prime_factor = 1.0);

const char* to_string(FitForm form);
FitForm parse_fit_form(const std::string& name);

} // namespace mcle::forecast
