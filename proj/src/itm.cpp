#include "mcle/itm.hpp"

#include "mcle/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mcle::itm {

ChiState::ChiState(Eigen::VectorXd chi, double t) : chi_(std::move(chi)), t_(t) {
    if (chi_.size() == 0) {
        throw InputError("chi state is empty");
    }
    if (!chi_.allFinite()) {
        throw InputError("chi state has non-finite entries");
    }
    const double norm = chi_.norm();
    if (std::abs(norm - 1.0) > norm_tolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "chi state norm is " << norm << ", expected 1";
        throw InputError(msg.str());
    }
}

ChiState to_chi(const PopulationState& state) {
    Eigen::VectorXd chi(static_cast<Eigen::Index>(state.size()));
    for (std::size_t i = 0; i < state.size(); ++i) {
        chi(static_cast<Eigen::Index>(i)) = std::sqrt(state[i] / state.total());
    }
    // The population sum carries its own tolerance; bring the norm to 1 exactly.
    chi /= chi.norm();
    return ChiState(std::move(chi), state.time());
}

PopulationState from_chi(const ChiState& chi, double total) {
    std::vector<double> x(static_cast<std::size_t>(chi.size()));
    for (Eigen::Index i = 0; i < chi.size(); ++i) {
        x[static_cast<std::size_t>(i)] = std::max(total * chi[i] * chi[i], std::numeric_limits<double>::min());
    }
    return PopulationState(std::move(x), total, chi.time(), 1e-9);
}

double max_asymmetry(const Eigen::MatrixXd& k) {
    if (k.rows() != k.cols()) {
        throw InputError("rate matrix must be square");
    }
    return (k - k.transpose()).cwiseAbs().maxCoeff();
}

RateMatrix::RateMatrix(Eigen::MatrixXd k) : k_(std::move(k)) {
    if (k_.rows() == 0 || k_.rows() != k_.cols()) {
        throw InputError("rate matrix must be square and non-empty");
    }
    if (!k_.allFinite()) {
        throw InputError("rate matrix has non-finite entries");
    }
    const double asym = (k_ - k_.transpose()).norm();
    if (asym > 1e-12 * k_.norm()) {
        Eigen::Index r = 0, c = 0;
        const double worst = (k_ - k_.transpose()).cwiseAbs().maxCoeff(&r, &c);
        std::ostringstream msg;
        msg.precision(17);
        msg << "rate matrix is not symmetric: max asymmetry " << worst << " at (" << r << ", " << c << ")";
        throw InputError(msg.str());
    }
}

RateMatrix RateMatrix::diagonal(const std::vector<double>& k) {
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(k.data(), static_cast<Eigen::Index>(k.size()));
    return RateMatrix(d.asDiagonal().toDenseMatrix());
}

bool RateMatrix::is_diagonal() const {
    for (Eigen::Index i = 0; i < k_.rows(); ++i) {
        for (Eigen::Index j = 0; j < k_.cols(); ++j) {
            if (i != j && k_(i, j) != 0.0) {
                return false;
            }
        }
    }
    return true;
}

std::vector<double> RateMatrix::diagonal_values() const {
    std::vector<double> d(static_cast<std::size_t>(k_.rows()));
    for (Eigen::Index i = 0; i < k_.rows(); ++i) {
        d[static_cast<std::size_t>(i)] = k_(i, i);
    }
    return d;
}

Eigen::VectorXd itm_rhs(const Eigen::VectorXd& chi, const RateMatrix& k) {
    if (chi.size() != k.size()) {
        throw InputError("itm_rhs: chi has " + std::to_string(chi.size()) + " entries, K is " +
                         std::to_string(k.size()) + "x" + std::to_string(k.size()));
    }
    const Eigen::VectorXd kchi = k.matrix() * chi;
    const double q = chi.dot(kchi) / chi.squaredNorm();
    return 0.5 * (kchi - q * chi);
}

double rayleigh_quotient(const Eigen::VectorXd& chi, const RateMatrix& k) {
    return chi.dot(k.matrix() * chi) / chi.squaredNorm();
}

namespace {

Eigen::VectorXd rk4_step(const Eigen::VectorXd& chi, const RateMatrix& k, double h) {
    const Eigen::VectorXd k1 = itm_rhs(chi, k);
    const Eigen::VectorXd k2 = itm_rhs(chi + 0.5 * h * k1, k);
    const Eigen::VectorXd k3 = itm_rhs(chi + 0.5 * h * k2, k);
    const Eigen::VectorXd k4 = itm_rhs(chi + h * k3, k);
    Eigen::VectorXd next = chi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!next.allFinite()) {
        throw NumericalError("itm_evolve: non-finite amplitude");
    }
    return next / next.norm();
}

} // namespace

std::vector<ChiState> itm_evolve(const ChiState& chi0, const RateMatrix& k, double t_end, double dt,
                                 const MatrixFunctional& functional) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InputError("itm_evolve: dt must be positive");
    }
    if (!(t_end >= chi0.time())) {
        throw InputError("itm_evolve: t_end precedes the initial time");
    }
    if (chi0.size() != k.size()) {
        throw InputError("itm_evolve: dimension mismatch between chi and K");
    }
    const double span = t_end - chi0.time();
    const auto steps = static_cast<long>(std::ceil(span / dt - 1e-9));
    const double h = steps > 0 ? span / static_cast<double>(steps) : 0.0;

    std::vector<ChiState> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back(chi0);
    Eigen::VectorXd chi = chi0.chi();
    for (long s = 1; s <= steps; ++s) {
        if (functional) {
            const RateMatrix ks = functional(out.back());
            if (ks.size() != k.size()) {
                throw InputError("itm_evolve: functional returned a matrix of the wrong size");
            }
            chi = rk4_step(chi, ks, h);
        } else {
            chi = rk4_step(chi, k, h);
        }
        const double t = s == steps ? t_end : chi0.time() + static_cast<double>(s) * h;
        out.emplace_back(chi, t);
    }
    return out;
}

SteadyState itm_steady_state(const ChiState& chi0, const RateMatrix& k, double dt, double tolerance,
                             long max_steps) {
    if (!(dt > 0.0)) {
        throw InputError("itm_steady_state: dt must be positive");
    }
    Eigen::VectorXd chi = chi0.chi();
    double t = chi0.time();
    double residual = itm_rhs(chi, k).norm();
    long steps = 0;
    while (residual >= tolerance) {
        if (steps >= max_steps) {
            std::ostringstream msg;
            msg << "itm_steady_state: residual " << residual << " after " << steps << " steps";
            throw NumericalError(msg.str());
        }
        chi = rk4_step(chi, k, dt);
        t += dt;
        ++steps;
        residual = itm_rhs(chi, k).norm();
    }
    return SteadyState{ChiState(chi, t), residual, steps};
}

} // namespace mcle::itm
