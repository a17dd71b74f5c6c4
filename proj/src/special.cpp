#include "mcle/maxent.hpp"

#include "mcle/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mcle::maxent {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();

// -γ - ln z - Σ_{k≥1} (-z)^k / (k k!), used for z <= 1.
double gamma0_series(double z) {
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= -z / k;
        const double contrib = term / k;
        sum += contrib;
        if (std::abs(contrib) < eps * std::abs(sum)) {
            break;
        }
    }
    return -std::numbers::egamma - std::log(z) - sum;
}

// e^z Γ(0,z) by the modified Lentz continued fraction, used for z > 1.
double gamma0_scaled_fraction(double z) {
    constexpr double tiny = 1e-300;
    double b = z + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) {
            return h;
        }
    }
    throw NumericalError("incomplete gamma continued fraction did not converge");
}

double log_gamma0(double z) {
    return z <= 1.0 ? std::log(gamma0_series(z)) : -z + std::log(gamma0_scaled_fraction(z));
}

void require_positive(double z, const char* what) {
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw InputError(std::string(what) + ": argument must be positive and finite");
    }
}

} // namespace

double gamma0(double z) {
    require_positive(z, "gamma0");
    return z <= 1.0 ? gamma0_series(z) : std::exp(-z) * gamma0_scaled_fraction(z);
}

double gamma0_scaled(double z) {
    require_positive(z, "gamma0_scaled");
    return z <= 1.0 ? std::exp(z) * gamma0_series(z) : gamma0_scaled_fraction(z);
}

double gamma0_inverse(double g) {
    require_positive(g, "gamma0_inverse");
    return gamma0_inverse_log(std::log(g));
}

double gamma0_inverse_log(double log_g) {
    if (!std::isfinite(log_g)) {
        throw InputError("gamma0_inverse: target must be finite");
    }
    // Solve F(s) = ln Γ(0, e^s) - log_g = 0; F is decreasing with F'(s) = -1/(e^z Γ(0,z)).
    double lo = std::log(1e-300);
    double hi = std::log(1e4);
    const double f_lo = log_gamma0(std::exp(lo)) - log_g;
    const double f_hi = log_gamma0(std::exp(hi)) - log_g;
    if (f_lo < 0.0 || f_hi > 0.0) {
        throw NumericalError("gamma0_inverse: target outside the representable range");
    }

    double s = log_g > 0.0 ? -std::numbers::egamma - std::exp(log_g) : std::log(std::max(-log_g, 1e-3));
    if (!(s > lo && s < hi)) {
        s = 0.5 * (lo + hi);
    }
    for (int iter = 0; iter < 300; ++iter) {
        const double z = std::exp(s);
        const double f = log_gamma0(z) - log_g;
        if (f == 0.0) {
            return z;
        }
        if (f > 0.0) {
            lo = s;
        } else {
            hi = s;
        }
        const double step = f * gamma0_scaled(z);
        double next = s + step;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - s) <= 4 * eps * std::max(1.0, std::abs(s)) || hi - lo <= 4 * eps * std::max(1.0, std::abs(s))) {
            return std::exp(next);
        }
        s = next;
    }
    throw NumericalError("gamma0_inverse did not converge");
}

} // namespace mcle::maxent
