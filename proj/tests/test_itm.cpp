#include "mcle/core.hpp"
#include "mcle/error.hpp"
#include "mcle/itm.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mcle;
using namespace mcle::itm;

namespace {

Eigen::MatrixXd random_symmetric(std::mt19937_64& gen, Eigen::Index n) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = nd(gen);
    return 0.5 * (a + a.transpose());
}

Eigen::VectorXd random_unit(std::mt19937_64& gen, Eigen::Index n) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = u(gen);
    return v / v.norm();
}

} // namespace

TEST_CASE("to_chi and from_chi") {
    const double n = 1000.0;
    const auto half = to_chi(PopulationState({n / 2, n / 2}, n));
    CHECK(half[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(half[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

    const auto edge = to_chi(PopulationState({n - 1e-12, 1e-12}, n));
    CHECK(edge[0] == doctest::Approx(1.0));
    CHECK(edge[1] < 1e-7);

    std::mt19937_64 gen(1);
    std::uniform_int_distribution<int> dn(2, 10);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = oracle::random_populations(gen, static_cast<std::size_t>(dn(gen)), n);
        const PopulationState s(x, n);
        const auto chi = to_chi(s);
        CHECK(std::abs(chi.chi().norm() - 1.0) <= 1e-15 * 4);
        const auto back = from_chi(chi, n);
        CHECK(oracle::max_rel_error(back.values(), x) < 1e-12);
        for (Eigen::Index i = 0; i < chi.size(); ++i) CHECK(chi[i] >= 0.0);
    }
    CHECK_THROWS_AS(ChiState(Eigen::Vector2d(1.0, 1.0)), InputError);
    CHECK_THROWS_AS(ChiState(Eigen::VectorXd()), InputError);
}

TEST_CASE("RateMatrix") {
    Eigen::Matrix2d a;
    a << 1.0, 2.0, 2.0 + 1e-6, 3.0;
    try {
        RateMatrix bad(a);
        FAIL("asymmetric matrix accepted");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("max asymmetry") != std::string::npos);
    }
    CHECK(max_asymmetry(a) == doctest::Approx(1e-6));
    Eigen::MatrixXd nonsquare(2, 3);
    nonsquare.setZero();
    CHECK_THROWS_AS(RateMatrix{nonsquare}, InputError);
    const auto d = RateMatrix::diagonal({1.0, 2.0, 3.0});
    CHECK(d.is_diagonal());
    CHECK(d.diagonal_values() == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("itm_rhs") {
    SUBCASE("hand-evaluated diagonal case") {
        const auto k = RateMatrix::diagonal({0.0, 1.0});
        const double s = 1.0 / std::sqrt(2.0);
        const auto r = itm_rhs(Eigen::Vector2d(s, s), k);
        CHECK(r(0) == doctest::Approx(-1.0 / (4.0 * std::sqrt(2.0))).epsilon(1e-15));
        CHECK(r(1) == doctest::Approx(1.0 / (4.0 * std::sqrt(2.0))).epsilon(1e-15));
        // Brute-force: 1/2 (K chi - q chi) with explicit loops.
        const double q = 0.0 * s * s + 1.0 * s * s;
        CHECK(r(0) == doctest::Approx(0.5 * (0.0 * s - q * s)));
        CHECK(r(1) == doctest::Approx(0.5 * (1.0 * s - q * s)));
    }
    SUBCASE("eigenvectors are fixed points") {
        std::mt19937_64 gen(2);
        const auto a = random_symmetric(gen, 5);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        for (Eigen::Index j = 0; j < 5; ++j) {
            CHECK(itm_rhs(es.eigenvectors().col(j), RateMatrix(a)).norm() < 1e-12);
        }
    }
    SUBCASE("orthogonal to chi") {
        std::mt19937_64 gen(3);
        for (int trial = 0; trial < 100; ++trial) {
            const auto n = static_cast<Eigen::Index>(2 + trial % 9);
            const auto a = random_symmetric(gen, n);
            const auto chi = random_unit(gen, n);
            CHECK(std::abs(chi.dot(itm_rhs(chi, RateMatrix(a)))) < 1e-14 * (1.0 + a.norm()));
        }
    }
    CHECK_THROWS_AS(itm_rhs(Eigen::Vector3d(1, 0, 0), RateMatrix::diagonal({1.0, 2.0})), InputError);
}

TEST_CASE("itm_evolve") {
    SUBCASE("diagonal K matches the closed-form population dynamics") {
        std::mt19937_64 gen(4);
        std::uniform_real_distribution<double> dk(-2.0, 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t n = 2 + static_cast<std::size_t>(trial % 9);
            std::vector<double> k(n);
            for (auto& v : k) v = dk(gen);
            const auto x0 = oracle::random_populations(gen, n, 1.0);
            const auto chi0 = to_chi(PopulationState(x0, 1.0));
            const auto traj = itm_evolve(chi0, RateMatrix::diagonal(k), 5.0, 1e-3);
            double worst = 0.0;
            for (const auto& s : traj) {
                worst = std::max(worst, oracle::max_rel_error(from_chi(s, 1.0).values(),
                                                              oracle::closed_form_ld(x0, k, 1.0, s.time())));
            }
            CHECK(worst < 1e-6);
            CHECK(traj.back().time() == 5.0);
        }
    }
    SUBCASE("generic K converges to the dominant eigenvector") {
        std::mt19937_64 gen(5);
        for (int trial = 0; trial < 10; ++trial) {
            const auto n = static_cast<Eigen::Index>(2 + trial % 7);
            const auto a = random_symmetric(gen, n);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
            const double gap = es.eigenvalues()(n - 1) - es.eigenvalues()(n - 2);
            if (gap < 0.2) continue;
            Eigen::VectorXd start = random_unit(gen, n);
            const auto v = oracle::dominant_eigenvector(a);
            if (start.dot(v) < 0.0) start = -start;
            const auto ss = itm_steady_state(ChiState(start), RateMatrix(a), 1e-2);
            Eigen::VectorXd got = ss.chi.chi();
            if (got.dot(v) < 0.0) got = -got;
            CHECK((got - v).norm() < 1e-8);
            CHECK(ss.residual < 1e-10);
        }
    }
    SUBCASE("K = cI leaves chi constant") {
        Eigen::MatrixXd k = 2.5 * Eigen::MatrixXd::Identity(4, 4);
        const Eigen::Vector4d v = Eigen::Vector4d(0.1, 0.2, 0.3, 0.4).normalized();
        const auto traj = itm_evolve(ChiState(v), RateMatrix(k), 3.0, 1e-2);
        CHECK((traj.back().chi() - v).norm() < 1e-14);
    }
    SUBCASE("shift invariance") {
        std::mt19937_64 gen(6);
        const auto a = random_symmetric(gen, 6);
        const auto chi0 = ChiState(random_unit(gen, 6));
        const auto t1 = itm_evolve(chi0, RateMatrix(a), 2.0, 1e-3);
        const Eigen::MatrixXd shifted = a + 3.7 * Eigen::MatrixXd::Identity(6, 6);
        const auto t2 = itm_evolve(chi0, RateMatrix(shifted), 2.0, 1e-3);
        REQUIRE(t1.size() == t2.size());
        double worst = 0.0;
        for (std::size_t j = 0; j < t1.size(); ++j) worst = std::max(worst, (t1[j].chi() - t2[j].chi()).norm());
        CHECK(worst < 1e-10);
    }
    SUBCASE("norm conservation and monotone Rayleigh quotient") {
        std::mt19937_64 gen(7);
        for (int trial = 0; trial < 20; ++trial) {
            const auto n = static_cast<Eigen::Index>(2 + trial % 9);
            const RateMatrix k(random_symmetric(gen, n));
            const auto traj = itm_evolve(ChiState(random_unit(gen, n)), k, 5.0, 1e-2);
            double prev = -1e300;
            for (const auto& s : traj) {
                CHECK(std::abs(s.chi().norm() - 1.0) <= 1e-10);
                const double q = rayleigh_quotient(s.chi(), k);
                CHECK(q >= prev - 1e-14);
                prev = q;
            }
        }
    }
    SUBCASE("self-consistent functional is evaluated every step") {
        int calls = 0;
        const auto k = RateMatrix::diagonal({0.0, 1.0});
        const auto traj = itm_evolve(ChiState(Eigen::Vector2d(1, 1).normalized()), k, 1.0, 0.1,
                                     [&](const ChiState& c) {
                                         ++calls;
                                         return RateMatrix::diagonal({c[0], c[1]});
                                     });
        CHECK(calls == 10);
        CHECK(traj.size() == 11);
    }
    SUBCASE("errors") {
        const auto k = RateMatrix::diagonal({0.0, 1.0});
        const ChiState c(Eigen::Vector2d(1, 0));
        CHECK_THROWS_AS(itm_evolve(c, k, 1.0, 0.0), InputError);
        CHECK_THROWS_AS(itm_evolve(ChiState(Eigen::Vector3d(1, 0, 0)), k, 1.0, 0.1), InputError);
        const double inf = std::numeric_limits<double>::max();
        Eigen::Matrix2d huge;
        huge << inf, inf, inf, inf;
        CHECK_THROWS_AS(itm_evolve(ChiState(Eigen::Vector2d(1, 1).normalized()), RateMatrix(huge), 1.0, 0.5),
                        NumericalError);
    }
}
