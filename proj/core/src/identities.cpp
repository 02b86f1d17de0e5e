#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "chdbc/elliptic.hpp"
#include "chdbc/verify.hpp"

namespace chdbc {

Check check_at_most(std::string name, double value, double tolerance) {
    return {std::move(name), value, tolerance, value <= tolerance};
}

bool SuiteReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void SuiteReport::print(std::ostream& os) const {
    os << fmt::format("== {} ==\n", name);
    for (const Check& c : checks) {
        os << fmt::format("  [{}] {:<52} {:.3e} (tol {:.1e})\n", c.pass ? "PASS" : "FAIL", c.name,
                          c.value, c.tolerance);
    }
}

namespace {

BulkField random_bulk(const Mesh& mesh, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    BulkField f(mesh);
    for (double& v : f.values()) v = unif(rng);
    return f;
}

BoundaryField random_wall(const Mesh& mesh, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    BoundaryField f(mesh);
    for (double& v : f.values()) v = unif(rng);
    return f;
}

BulkField without_mean(BulkField f) {
    const double m = mean(f);
    for (double& v : f.values()) v -= m;
    return f;
}

BoundaryField without_mean(BoundaryField f) {
    const double m = boundary_mean(f);
    for (double& v : f.values()) v -= m;
    return f;
}

// |a - b| relative to the size of the terms that were summed.
double rel(double a, double b, double scale) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), scale});
}

double abs_integral(const BulkField& f) {
    BulkField g = f;
    for (double& v : g.values()) v = std::abs(v);
    return mean(g);
}

} // namespace

SuiteReport operator_identity_suite(std::span<const int> sizes, int pairs, std::uint64_t seed) {
    SuiteReport report{"operator identities", {}};
    std::mt19937_64 rng(seed);
    for (const int n : sizes) {
        const Mesh mesh(n);
        double sbp = 0.0;
        double energy = 0.0;
        double norm = 0.0;
        double symmetry = 0.0;
        double annihilation = 0.0;
        for (int k = 0; k < pairs; ++k) {
            const BulkField psi = random_bulk(mesh, rng);
            const BulkField phi = random_bulk(mesh, rng);
            const BoundaryField below = random_wall(mesh, rng);
            const BoundaryField above = random_wall(mesh, rng);

            // (psi, Delta_h phi) = -(grad psi, grad phi) + (D~y phi_N, psi_N) - (D~y phi_0, psi_0)
            const double lhs = inner(psi, laplacian_with_ghosts(phi, below, above));
            const double g = grad_inner(psi, phi);
            const double top =
                boundary_inner(normal_derivative_top(above, phi.row(n - 1)), psi.row(n));
            const double bottom =
                boundary_inner(normal_derivative_bottom(phi.row(1), below), psi.row(0));
            sbp = std::max(sbp, rel(lhs, -g + top - bottom,
                                    std::abs(g) + std::abs(top) + std::abs(bottom)));

            const BulkField l_phi = apply_Lh(phi);
            energy = std::max(energy, rel(inner(psi, l_phi), g, 0.0));
            norm = std::max(norm, rel(grad_norm_sq(phi), inner(phi, l_phi), 0.0));
            symmetry = std::max(symmetry, rel(inner(psi, l_phi), inner(apply_Lh(psi), phi), 0.0));
            annihilation = std::max(annihilation, std::abs(mean(l_phi)) / abs_integral(l_phi));
        }
        report.checks.push_back(check_at_most(fmt::format("summation by parts, N={}", n), sbp, 1e-12));
        report.checks.push_back(
            check_at_most(fmt::format("(psi, L_h phi) = (grad psi, grad phi), N={}", n), energy, 1e-12));
        report.checks.push_back(
            check_at_most(fmt::format("grad_norm_sq(f) = (f, L_h f), N={}", n), norm, 1e-12));
        report.checks.push_back(check_at_most(fmt::format("L_h symmetric, N={}", n), symmetry, 1e-12));
        report.checks.push_back(
            check_at_most(fmt::format("mean(L_h f) = 0, N={}", n), annihilation, 1e-12));
    }
    return report;
}

SuiteReport elliptic_inverse_suite(std::span<const int> sizes, int pairs, std::uint64_t seed) {
    SuiteReport report{"elliptic inverses", {}};
    std::mt19937_64 rng(seed);
    for (const int n : sizes) {
        const Mesh mesh(n);
        const auto& ws = EllipticWorkspace::for_mesh(mesh);
        double forward = 0.0;
        double backward = 0.0;
        double wall = 0.0;
        for (int k = 0; k < pairs; ++k) {
            const BulkField f = without_mean(random_bulk(mesh, rng));
            const BulkField psi = ws.solve_Lh(f);
            forward = std::max(forward, std::sqrt(norm2_sq(apply_Lh(psi) - f) / norm2_sq(f)));

            const BulkField u = without_mean(random_bulk(mesh, rng));
            const BulkField back = ws.solve_Lh(apply_Lh(u));
            backward = std::max(backward, std::sqrt(norm2_sq(back - u) / norm2_sq(u)));

            const BoundaryField g = without_mean(random_wall(mesh, rng));
            const BoundaryField v = ws.solve_dx2_gamma(g);
            wall = std::max(wall, std::sqrt(boundary_norm2_sq(-1.0 * dx2_gamma(v) - g) /
                                            boundary_norm2_sq(g)));
        }
        report.checks.push_back(check_at_most(fmt::format("L_h solve_Lh(f) = f, N={}", n), forward, 1e-10));
        report.checks.push_back(
            check_at_most(fmt::format("solve_Lh(L_h u) = u, N={}", n), backward, 1e-10));
        report.checks.push_back(
            check_at_most(fmt::format("-D_x^2 solve_dx2_gamma(g) = g, N={}", n), wall, 1e-10));

        double eigen = 0.0;
        // Modes with 2k >= N alias onto lower ones and are skipped.
        for (int k = 1; k <= 3 && 2 * k < n; ++k) {
            const double sk = std::sin(std::numbers::pi * k * mesh.h());
            const double lambda = 4.0 * sk * sk / (mesh.h() * mesh.h());
            const BulkField f = BulkField::sample(
                mesh, [k](double x, double) { return std::cos(2.0 * std::numbers::pi * k * x); });
            const BulkField psi = ws.solve_Lh(f);
            const BulkField exact = (1.0 / lambda) * f;
            eigen = std::max(eigen, std::sqrt(norm2_sq(psi - exact) / norm2_sq(exact)));
        }
        report.checks.push_back(
            check_at_most(fmt::format("cos(2 pi k x) / lambda_k, k=1..3, N={}", n), eigen, 1e-12));
    }
    return report;
}

} // namespace chdbc
