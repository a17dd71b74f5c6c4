#include "mcle/core.hpp"
#include "mcle/error.hpp"
#include "mcle/forecast.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mcle;
using namespace mcle::forecast;

namespace {

std::vector<double> month_grid(int first, int last) {
    std::vector<double> t;
    for (int m = first; m <= last; ++m) t.push_back(m);
    return t;
}

ShareSeries constant_rate_series(const std::vector<double>& x0, const std::vector<double>& k,
                                 const std::vector<double>& times) {
    std::vector<std::vector<double>> rows;
    for (double t : times) rows.push_back(closed_form(x0, k, 100.0, t).values());
    std::vector<std::string> names;
    for (std::size_t i = 0; i < x0.size(); ++i) names.push_back("c" + std::to_string(i));
    return ShareSeries(names, times, rows, 100.0, 1e-9);
}

double h_model(double a, double b, double c, double t) { return a * std::exp(-b * t) * t + c; }

// Exponents table for one non-reference component with the given values.
GrowthExponents single_component(const std::vector<double>& t, const std::vector<double>& h) {
    GrowthExponents g;
    g.times = t;
    g.reference = 0;
    g.h = {std::vector<double>(t.size(), 0.0), h};
    return g;
}

} // namespace

TEST_CASE("ShareSeries validation") {
    const std::vector<std::string> names{"a", "b"};
    CHECK_NOTHROW(ShareSeries(names, {-1.0, 0.0}, {{40.0, 60.0}, {50.0, 50.0}}));
    CHECK_THROWS_AS(ShareSeries(names, {0.0, 0.0}, {{40.0, 60.0}, {50.0, 50.0}}), InputError);
    CHECK_THROWS_AS(ShareSeries(names, {1.0, 0.0}, {{40.0, 60.0}, {50.0, 50.0}}), InputError);
    CHECK_THROWS_AS(ShareSeries(names, {0.0, 1.0}, {{0.0, 100.0}, {50.0, 50.0}}), InputError);
    CHECK_THROWS_AS(ShareSeries(names, {0.0, 1.0}, {{-1.0, 101.0}, {50.0, 50.0}}), InputError);
    CHECK_THROWS_AS(ShareSeries(names, {0.0, 1.0}, {{40.0, 50.0}, {50.0, 50.0}}), InputError);
    CHECK_NOTHROW(ShareSeries(names, {0.0, 1.0}, {{40.0, 50.0}, {50.0, 50.0}}, 100.0, 0.2));
    const ShareSeries s(names, {1.0, 2.0}, {{40.0, 60.0}, {50.0, 50.0}});
    CHECK_THROWS_AS(s.origin_row(), InputError);
    CHECK(s.index_of("b") == 1);
    CHECK_THROWS_AS(s.index_of("z"), InputError);
}

TEST_CASE("extract_h") {
    const auto times = month_grid(-5, 20);
    const auto series = constant_rate_series({50.0, 30.0, 20.0}, {0.0, 0.1, 0.3}, times);
    SUBCASE("constant rates give (k_i - k_ref) t") {
        const auto h = extract_h(series, 0);
        for (std::size_t j = 0; j < times.size(); ++j) {
            CHECK(h.h[0][j] == 0.0);
            CHECK(h.h[1][j] == doctest::Approx(0.1 * times[j]).epsilon(1e-10).scale(1.0));
            CHECK(h.h[2][j] == doctest::Approx(0.3 * times[j]).epsilon(1e-10).scale(1.0));
        }
    }
    SUBCASE("printed convention is the negative") {
        const auto g = extract_h(series, 0, HConvention::growth);
        const auto p = extract_h(series, 0, HConvention::printed);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < times.size(); ++j) CHECK(p.h[i][j] == doctest::Approx(-g.h[i][j]));
    }
    SUBCASE("constant shares give zero") {
        const auto flat = constant_rate_series({50.0, 30.0, 20.0}, {0.2, 0.2, 0.2}, times);
        const auto h = extract_h(flat, 1);
        for (const auto& row : h.h)
            for (double v : row) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
    SUBCASE("changing the reference shifts every exponent by -h of the new reference") {
        const auto h0 = extract_h(series, 0);
        const auto h1 = extract_h(series, 1);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < times.size(); ++j)
                CHECK(h1.h[i][j] == doctest::Approx(h0.h[i][j] - h0.h[1][j]).scale(1.0).epsilon(1e-12));
        CHECK(h1.reference == 1);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(extract_h(series, 3), InputError);
        const ShareSeries no_origin({"a", "b"}, {1.0, 2.0}, {{40.0, 60.0}, {50.0, 50.0}});
        CHECK_THROWS_AS(extract_h(no_origin, 0), InputError);
    }
}

TEST_CASE("fit_rates") {
    const auto t = month_grid(-24, 36);
    SUBCASE("noiseless exponential generator is recovered") {
        std::vector<double> h;
        for (double v : t) h.push_back(h_model(0.0579, 0.0097, 0.104, v));
        const auto fit = fit_rates(single_component(t, h), FitForm::exponential);
        const auto& c = fit.components[1];
        CHECK(std::abs(c.a - 0.0579) < 1e-6);
        CHECK(std::abs(c.b - 0.0097) < 1e-6);
        CHECK(std::abs(c.c - 0.104) < 1e-6);
        CHECK(fit.components[0].is_reference);
        CHECK(fit.exponent(0, 5.0) == 0.0);
    }
    SUBCASE("b = 0 data: linear and exponential fits agree") {
        std::vector<double> h;
        for (double v : t) h.push_back(0.04 * v - 0.2);
        const auto e = fit_rates(single_component(t, h), FitForm::exponential).components[1];
        const auto l = fit_rates(single_component(t, h), FitForm::linear).components[1];
        CHECK(std::abs(e.a - l.a) < 1e-6);
        CHECK(std::abs(e.c - l.c) < 1e-6);
        CHECK(std::abs(e.b) < 1e-6);
        CHECK(l.a == doctest::Approx(0.04).epsilon(1e-10));
    }
    SUBCASE("1% noise: truth within 3 standard errors for at least 90% of seeds") {
        int covered = 0;
        for (int seed = 0; seed < 50; ++seed) {
            std::mt19937_64 gen(static_cast<std::uint64_t>(seed));
            std::normal_distribution<double> noise(0.0, 0.01);
            std::vector<double> h;
            for (double v : t) h.push_back(h_model(0.0579, 0.0097, 0.104, v) + noise(gen));
            const auto c = fit_rates(single_component(t, h), FitForm::exponential).components[1];
            const bool ok = std::abs(c.a - 0.0579) <= 3 * c.a_err && std::abs(c.b - 0.0097) <= 3 * c.b_err &&
                            std::abs(c.c - 0.104) <= 3 * c.c_err;
            covered += ok ? 1 : 0;
        }
        CHECK(covered >= 45);
    }
    SUBCASE("tabulated form interpolates") {
        std::vector<double> h;
        for (double v : t) h.push_back(std::sin(v / 7.0));
        const auto c = fit_rates(single_component(t, h), FitForm::tabulated).components[1];
        for (std::size_t j = 0; j < t.size(); ++j) CHECK(c.evaluate(t[j]) == h[j]);
        CHECK(c.evaluate(0.5) == doctest::Approx(0.5 * (h[24] + h[25])));
    }
    SUBCASE("errors") {
        const std::vector<double> few{0.0, 1.0, 2.0, 3.0};
        CHECK_THROWS_AS(fit_rates(single_component(few, {0, 1, 2, 3}), FitForm::linear), InputError);
        std::vector<double> bad;
        for (double v : t) bad.push_back(v == 0.0 ? std::nan("") : v);
        CHECK_THROWS(fit_rates(single_component(t, bad), FitForm::exponential));
    }
    CHECK(parse_fit_form("linear") == FitForm::linear);
    CHECK_THROWS_AS(parse_fit_form("cubic"), InputError);
}

TEST_CASE("forecast") {
    const auto times = month_grid(-12, 24);
    const std::vector<double> x0{50.0, 30.0, 20.0};
    const std::vector<double> k{0.0, 0.02, -0.03};
    const auto series = constant_rate_series(x0, k, times);

    SUBCASE("constant-rate round trip over the training times") {
        for (auto form : {FitForm::linear, FitForm::exponential, FitForm::tabulated}) {
            const auto fit = fit_rates(extract_h(series, 0), form);
            const auto out = forecast::forecast(series, fit, times, 1.0);
            for (std::size_t j = 0; j < times.size(); ++j) {
                CHECK(oracle::max_rel_error(out.shares()[j], series.shares()[j]) < 1e-8);
            }
        }
    }
    SUBCASE("reference change leaves the forecast unchanged") {
        const auto horizon = month_grid(-12, 80);
        const auto a = forecast::forecast(series, fit_rates(extract_h(series, 0), FitForm::linear), horizon);
        const auto b = forecast::forecast(series, fit_rates(extract_h(series, 2), FitForm::linear), horizon);
        for (std::size_t j = 0; j < horizon.size(); ++j) {
            CHECK(oracle::max_rel_error(b.shares()[j], a.shares()[j]) < 1e-8);
        }
    }
    SUBCASE("printed convention reproduces the data as well") {
        const auto fit = fit_rates(extract_h(series, 0, HConvention::printed), FitForm::linear);
        const auto out = forecast::forecast(series, fit, times);
        CHECK(oracle::max_rel_error(out.shares().back(), series.shares().back()) < 1e-8);
        CHECK(fit.components[1].a == doctest::Approx(-0.02));
    }
    SUBCASE("two components reduce to the sigmoid") {
        const auto two = constant_rate_series({20.0, 80.0}, {0.0, 0.15}, times);
        const auto fit = fit_rates(extract_h(two, 0), FitForm::linear);
        const auto horizon = month_grid(0, 100);
        const auto out = forecast::forecast(two, fit, horizon);
        for (std::size_t j = 0; j < horizon.size(); ++j) {
            const double s = sigmoid(LogisticParams(0.15, 100.0, 80.0), horizon[j]);
            CHECK(out.shares()[j][1] == doctest::Approx(s).epsilon(1e-10));
        }
    }
    SUBCASE("N' scales the raw output without renormalization") {
        const auto fit = fit_rates(extract_h(series, 0), FitForm::linear);
        const auto out = forecast::forecast(series, fit, times, 1.03);
        CHECK(out.total() == doctest::Approx(103.0));
        for (std::size_t j = 0; j < times.size(); ++j)
            for (std::size_t i = 0; i < 3; ++i)
                CHECK(out.shares()[j][i] == doctest::Approx(1.03 * series.shares()[j][i]).epsilon(1e-8));
    }
    SUBCASE("long horizons stay finite") {
        std::vector<double> h;
        const auto fit = fit_rates(extract_h(series, 0), FitForm::linear);
        const std::vector<double> far{1e4, 1e5};
        const auto out = forecast::forecast(series, fit, far);
        for (const auto& row : out.shares())
            for (double v : row) CHECK(std::isfinite(v));
        CHECK(out.shares().back()[1] == doctest::Approx(100.0));
    }
    SUBCASE("errors") {
        const auto fit = fit_rates(extract_h(series, 0), FitForm::linear);
        CHECK_THROWS_AS(forecast::forecast(series, fit, times, 0.0), InputError);
        const auto other = constant_rate_series({50.0, 50.0}, {0.0, 0.1}, times);
        CHECK_THROWS_AS(forecast::forecast(other, fit, times), InputError);
    }
}
