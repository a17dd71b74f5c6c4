#include "mcle/core.hpp"
#include "mcle/error.hpp"
#include "mcle/network.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace mcle;
using namespace mcle::network;

namespace {

Network path_graph(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return Network(n, e);
}

Network star_graph(std::size_t n) {
    std::vector<Edge> e;
    for (NodeId i = 1; i < n; ++i) e.emplace_back(0, i);
    return Network(n, e);
}

double kernel_mass(const DiffusionKernelParams& k, double t, double lo, double hi) {
    return oracle::integrate([&](double x) { return kernel_density(k, x, t); }, lo, hi);
}

// ∫_0^N p_X dx, split at the median and at the ±4 sd points so each piece is smooth.
double kernel_integral(const DiffusionKernelParams& k, double t) {
    const double mean = k.y0() + k.drift() * t;
    const double sd = std::sqrt(2.0 * k.diffusion() * t);
    std::vector<double> cuts{0.0};
    for (double z : {-4.0, 0.0, 4.0}) cuts.push_back(y_inverse(mean + z * sd, k.total()));
    cuts.push_back(k.total());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] > cuts[i]) total += kernel_mass(k, t, cuts[i], cuts[i + 1]);
    }
    return total;
}

} // namespace

TEST_CASE("Network validation") {
    const std::vector<Edge> loop{{0, 0}};
    CHECK_THROWS_AS(Network(2, loop), InputError);
    const std::vector<Edge> repeated{{0, 1}, {1, 0}};
    CHECK_THROWS_AS(Network(2, repeated), InputError);
    const std::vector<Edge> missing{{0, 5}};
    CHECK_THROWS_AS(Network(2, missing), InputError);
    const std::vector<Edge> ok{{1, 0}, {1, 2}};
    const Network net(3, ok);
    CHECK(net.edge_count() == 2);
    CHECK(net.degree(1) == 2);
    CHECK(net.edges() == std::vector<Edge>{{0, 1}, {1, 2}});
}

TEST_CASE("grow_cluster") {
    CHECK(grow_cluster(star_graph(10), 0).sizes == std::vector<std::size_t>{1, 10});
    CHECK(grow_cluster(path_graph(5), 0).sizes == std::vector<std::size_t>{1, 2, 3, 4, 5});
    CHECK(grow_cluster(path_graph(5), 2).sizes == std::vector<std::size_t>{1, 3, 5});
    CHECK(grow_cluster(star_graph(10), 3).sizes == std::vector<std::size_t>{1, 2, 10});
    CHECK_THROWS_AS(grow_cluster(path_graph(5), 5), InputError);

    const std::vector<Edge> two{{0, 1}, {2, 3}, {3, 4}};
    const Network split(5, two);
    CHECK(grow_cluster(split, 0).sizes == std::vector<std::size_t>{1, 2});
    CHECK(component_sizes(split) == std::vector<std::size_t>{3, 2});
    CHECK(largest_component(split) == std::vector<NodeId>{2, 3, 4});
}

TEST_CASE("generate_sfin") {
    SUBCASE("degree law at the reference size") {
        const auto net = generate_sfin(20000, 100, 17);
        const auto hist = degree_histogram(net);
        CHECK(hist.size() <= 101);
        CHECK(loglog_slope(hist, 2, 50) == doctest::Approx(-1.0).epsilon(0.1));
        std::size_t sum = 0;
        for (NodeId v = 0; v < net.node_count(); ++v) {
            CHECK(net.degree(v) <= 100);
            sum += net.degree(v);
        }
        CHECK(sum == 2 * net.edge_count());
        CHECK(hist[0] == 0);
    }
    SUBCASE("simple graph: no loops or repeated edges") {
        const auto net = generate_sfin(3000, 60, 5);
        std::set<Edge> seen;
        for (const auto& [u, v] : net.edges()) {
            CHECK(u < v);
            CHECK(seen.insert({u, v}).second);
        }
    }
    SUBCASE("c_M = 2 gives degrees 1 and 2 only") {
        const auto net = generate_sfin(1000, 2, 3);
        for (NodeId v = 0; v < net.node_count(); ++v) {
            CHECK(net.degree(v) >= 1);
            CHECK(net.degree(v) <= 2);
        }
    }
    SUBCASE("determinism") {
        CHECK(generate_sfin(2000, 50, 8).edges() == generate_sfin(2000, 50, 8).edges());
        CHECK(generate_sfin(2000, 50, 8).edges() != generate_sfin(2000, 50, 9).edges());
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(generate_sfin(10, 20, 1), InputError);
        CHECK_THROWS_AS(generate_sfin(10, 1, 1), InputError);
    }
}

TEST_CASE("property: growth processes are increasing and end at the component size") {
    const auto net = generate_sfin(5000, 100, 21);
    const auto comps = component_sizes(net);
    const auto giant = largest_component(net);
    std::mt19937_64 gen(4);
    for (int trial = 0; trial < 50; ++trial) {
        const NodeId seed = static_cast<NodeId>(gen() % net.node_count());
        const auto p = grow_cluster(net, seed);
        CHECK(p.sizes.front() == 1);
        for (std::size_t i = 1; i < p.sizes.size(); ++i) CHECK(p.sizes[i] > p.sizes[i - 1]);
        if (std::binary_search(giant.begin(), giant.end(), seed)) CHECK(p.sizes.back() == comps.front());
        CHECK(std::find(comps.begin(), comps.end(), p.sizes.back()) != comps.end());
    }
}

TEST_CASE("y_transform") {
    const double n = 20000.0;
    CHECK(y_transform(n / 2, n) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(y_transform(n / (1.0 + std::exp(1.0)), n) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK_THROWS_AS(y_transform(0.0, n), InputError);
    CHECK_THROWS_AS(y_transform(n, n), InputError);
    CHECK_THROWS_AS(y_transform(-1.0, n), InputError);
    for (double lf = std::log(1e-9); lf < std::log(1.0 - 1e-9); lf += 0.01) {
        const double x = n * std::exp(lf);
        CHECK(std::abs(y_inverse(y_transform(x, n), n) - x) <= 1e-12 * x);
    }
    for (double f = 0.5; f < 1.0 - 1e-9; f = 0.5 * (f + 1.0)) {
        const double x = n * f;
        CHECK(std::abs(y_inverse(y_transform(x, n), n) - x) <= 1e-12 * x);
    }
    SUBCASE("the logistic curve is a straight line") {
        const LogisticParams p(0.7, n, 3.0);
        const double y0 = y_transform(3.0, n);
        for (double t = 0.5; t < 20.0; t += 0.5) {
            CHECK(y_transform(sigmoid(p, t), n) == doctest::Approx(y0 + 0.7 * t).epsilon(1e-9));
        }
    }
}

TEST_CASE("DiffusionKernelParams") {
    const DiffusionKernelParams k(3.09, 0.245, -9.9, 20000.0, 1.0);
    CHECK(k.sigma() * k.sigma() == doctest::Approx(2.0 * 0.245).epsilon(1e-12));
    const DiffusionKernelParams k2(3.09, 0.245, -9.9, 20000.0, 0.5);
    CHECK(k2.sigma() == doctest::Approx(std::sqrt(2.0 * 0.245 / 0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(DiffusionKernelParams(1.0, -0.1, 0.0, 10.0), InputError);
    CHECK_THROWS_AS(DiffusionKernelParams(1.0, 0.0, 0.0, 10.0), InputError);
    CHECK_THROWS_AS(DiffusionKernelParams(1.0, 0.1, 0.0, 0.0), InputError);
    CHECK_THROWS_AS(DiffusionKernelParams(1.0, 0.1, 0.0, 10.0, 0.0), InputError);
}

TEST_CASE("kernel_density") {
    const double n = 20000.0;
    const double y0 = y_transform(1.0, n);
    const DiffusionKernelParams k(3.09, 0.245, y0, n);

    SUBCASE("normalization by quadrature") {
        for (double t : {1.0, 3.0, 6.0}) {
            CHECK(kernel_integral(k, t) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    SUBCASE("non-negative and zero-free inside the support") {
        for (double x = 1.0; x < n; x *= 1.7) CHECK(kernel_density(k, x, 3.0) >= 0.0);
    }
    SUBCASE("median and mode") {
        for (double t : {1.0, 3.0, 6.0}) {
            const double m = kernel_median(k, t);
            CHECK(m == doctest::Approx(n / (1.0 + std::exp(-(y0 + 3.09 * t)))).epsilon(1e-14));
            const double below = oracle::integrate([&](double x) { return kernel_density(k, x, t); }, 0.0, m);
            CHECK(below == doctest::Approx(0.5).epsilon(1e-6));
            const auto p_y = [&](double y) {
                const double x = y_inverse(y, n);
                return kernel_density(k, x, t) * x * (1.0 - x / n);
            };
            const double c = y0 + 3.09 * t;
            CHECK(p_y(c) > p_y(c + 0.1));
            CHECK(p_y(c) > p_y(c - 0.1));
        }
    }
    SUBCASE("small D concentrates mass on the deterministic path") {
        const DiffusionKernelParams narrow(3.09, 1e-4, y0, n);
        for (double t : {1.0, 3.0}) {
            const double m = kernel_median(narrow, t);
            const double sig = n / (1.0 + std::exp(-(y0 + 3.09 * t)));
            CHECK(m == doctest::Approx(sig));
            const double mass = kernel_mass(narrow, t, 0.95 * m, std::min(1.05 * m, n));
            CHECK(mass > 0.99);
        }
    }
    SUBCASE("domain errors") {
        CHECK_THROWS_AS(kernel_density(k, 0.0, 1.0), InputError);
        CHECK_THROWS_AS(kernel_density(k, n, 1.0), InputError);
        CHECK_THROWS_AS(kernel_density(k, 10.0, 0.0), InputError);
    }
}

TEST_CASE("fit_kernel") {
    SUBCASE("synthetic y-walkers") {
        const double n = 1e9, kbar = 3.0, d = 0.25;
        const double y0 = y_transform(1.0, n);
        std::mt19937_64 gen(12);
        std::normal_distribution<double> nd(0.0, std::sqrt(2.0 * d));
        std::vector<std::vector<double>> traj(500);
        for (auto& tr : traj) {
            double y = y0;
            tr.push_back(1.0);
            for (int t = 1; t <= 10; ++t) {
                y += kbar + nd(gen);
                tr.push_back(y_inverse(y, n));
            }
        }
        const auto fit = fit_kernel(std::span<const std::vector<double>>(traj), n);
        CHECK(fit.params.drift() == doctest::Approx(kbar).epsilon(0.05));
        CHECK(fit.params.diffusion() == doctest::Approx(d).epsilon(0.15));
        CHECK(fit.params.sigma() * fit.params.sigma() == doctest::Approx(2.0 * fit.params.diffusion()).epsilon(1e-12));
        CHECK(fit.params.y0() == doctest::Approx(y0));
    }
    SUBCASE("identical deterministic sigmoids leave D undefined") {
        const double n = 20000.0;
        const LogisticParams p(1.5, n, 1.0);
        std::vector<std::vector<double>> traj(40);
        for (auto& tr : traj) {
            for (int t = 0; t <= 8; ++t) tr.push_back(sigmoid(p, t));
        }
        CHECK_THROWS_AS(fit_kernel(std::span<const std::vector<double>>(traj), n), NumericalError);
    }
    SUBCASE("too few processes") {
        std::vector<GrowthProcess> one{grow_cluster(path_graph(5), 0)};
        CHECK_THROWS_AS(fit_kernel(std::span<const GrowthProcess>(one), 5.0), InputError);
    }
}
