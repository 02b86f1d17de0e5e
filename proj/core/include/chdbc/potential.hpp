#pragma once

namespace chdbc {

/// Physical parameters of the Cahn-Hilliard system with dynamic walls.
struct ModelParams {
    double epsilon = 0.1; ///< interface width
    double kappa = 1.0;   ///< surface diffusion
    double theta0 = 3.0;  ///< Flory-Huggins quadratic coefficient

    /// Throws std::invalid_argument on epsilon <= 0, kappa < 0 or theta0 < 0.
    void validate() const;
};

/// Convex entropy I(phi) = (1+phi) ln(1+phi) + (1-phi) ln(1-phi) on (-1, 1).
/// Throws DomainError when |phi| >= 1 (no clamping).
double I_val(double phi);
double I_prime(double phi);
/// I''(phi) = 2 / (1 - phi^2)
double I_second(double phi);

/// Flory-Huggins density I(phi) - theta0/2 phi^2; the same form serves as
/// the wall density G.
double flory_huggins_F(double phi, double theta0);

/// Quartic double well (phi^2 - 1)^2 / 4; evaluation only.
double polynomial_F(double phi);

} // namespace chdbc
