#pragma once

#include "mcle/core.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

namespace mcle::itm {

/// Unit-norm amplitude vector; chi_i = sqrt(x_i / N) when built from populations.
class ChiState {
public:
    static constexpr double norm_tolerance = 1e-10;

    explicit ChiState(Eigen::VectorXd chi, double t = 0.0);

    const Eigen::VectorXd& chi() const noexcept { return chi_; }
    double operator[](Eigen::Index i) const { return chi_(i); }
    Eigen::Index size() const noexcept { return chi_.size(); }
    double time() const noexcept { return t_; }

private:
    Eigen::VectorXd chi_;
    double t_;
};

ChiState to_chi(const PopulationState& state);
/// x_i = N chi_i^2; components that square to zero are floored at DBL_MIN.
PopulationState from_chi(const ChiState& chi, double total);

/// Symmetric rate matrix. Construction rejects ||K - K^T|| > 1e-12 ||K||
/// and reports the largest asymmetric entry.
class RateMatrix {
public:
    explicit RateMatrix(Eigen::MatrixXd k);
    static RateMatrix diagonal(const std::vector<double>& k);

    const Eigen::MatrixXd& matrix() const noexcept { return k_; }
    Eigen::Index size() const noexcept { return k_.rows(); }
    bool is_diagonal() const;
    std::vector<double> diagonal_values() const;

private:
    Eigen::MatrixXd k_;
};

/// Largest |K_ij - K_ji|.
double max_asymmetry(const Eigen::MatrixXd& k);

/// 1/2 (K chi - (chi^T K chi / chi^T chi) chi)
Eigen::VectorXd itm_rhs(const Eigen::VectorXd& chi, const RateMatrix& k);
double rayleigh_quotient(const Eigen::VectorXd& chi, const RateMatrix& k);

/// Optional self-consistent K[chi], evaluated once at the start of every step.
using MatrixFunctional = std::function<RateMatrix(const ChiState&)>;

/// RK4 with renormalization to ||chi|| = 1 after every step. The returned
/// trajectory starts with chi0 and ends exactly at t_end.
std::vector<ChiState> itm_evolve(const ChiState& chi0, const RateMatrix& k, double t_end, double dt,
                                 const MatrixFunctional& functional = {});

struct SteadyState {
    ChiState chi;
    double residual;
    long steps;
};

/// Evolves until ||rhs|| < tolerance; throws NumericalError after max_steps.
SteadyState itm_steady_state(const ChiState& chi0, const RateMatrix& k, double dt, double tolerance = 1e-10,
                             long max_steps = 10'000'000);

} // namespace mcle::itm
