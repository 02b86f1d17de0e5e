#include "chdbc/potential.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "chdbc/errors.hpp"

namespace chdbc {

void ModelParams::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be nonnegative");
    if (!(theta0 >= 0.0)) throw std::invalid_argument("theta0 must be nonnegative");
}

namespace {

void require_open_interval(double phi, const char* what) {
    if (!(std::abs(phi) < 1.0)) {
        throw DomainError(fmt::format("{}: phi = {} outside (-1, 1)", what, phi));
    }
}

} // namespace

double I_val(double phi) {
    require_open_interval(phi, "I_val");
    // Same function; the split form cancels badly near 0, this one near +-1.
    if (std::abs(phi) < 0.5) return std::log1p(-phi * phi) + 2.0 * phi * std::atanh(phi);
    return (1.0 + phi) * std::log1p(phi) + (1.0 - phi) * std::log1p(-phi);
}

double I_prime(double phi) {
    require_open_interval(phi, "I_prime");
    return std::log1p(phi) - std::log1p(-phi);
}

double I_second(double phi) {
    require_open_interval(phi, "I_second");
    return 2.0 / ((1.0 - phi) * (1.0 + phi));
}

double flory_huggins_F(double phi, double theta0) { return I_val(phi) - 0.5 * theta0 * phi * phi; }

double polynomial_F(double phi) {
    const double a = phi * phi - 1.0;
    return 0.25 * a * a;
}

} // namespace chdbc
