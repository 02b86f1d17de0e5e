#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "chdbc/verify.hpp"

namespace chdbc {

BulkField correction_field(double mass_drift, const Mesh& mesh) {
    return BulkField::sample(mesh, [mass_drift](double, double y) {
        return mass_drift * (1.0 - std::cos(2.0 * std::numbers::pi * y));
    });
}

SuiteReport verify_correction_identities(const Mesh& mesh, std::span<const double> drifts,
                                         std::uint64_t seed) {
    const int n = mesh.n();
    const double h = mesh.h();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    double worst_mean = 0.0;
    double worst_shift = 0.0;
    double worst_wall = 0.0;
    double worst_normal = 0.0;
    for (const double drift : drifts) {
        const double scale = std::max(1.0, std::abs(drift));
        const BulkField d = correction_field(drift, mesh);
        worst_mean = std::max(worst_mean, std::abs(mean(d) - drift) / scale);

        // A random field whose mean exceeds a reference by `drift`: removing
        // the correction must land back on the reference mean.
        BulkField phi(mesh);
        for (double& v : phi.values()) v = unif(rng);
        const double reference = mean(phi);
        phi += d;
        worst_shift = std::max(worst_shift, std::abs(mean(phi - d) - reference) / scale);

        for (int i = 0; i < n; ++i) {
            worst_wall = std::max({worst_wall, std::abs(d(i, 0)) / scale, std::abs(d(i, n)) / scale});
        }

        // Ghost rows come from the same closed form, one node beyond each wall.
        const double pi2 = 2.0 * std::numbers::pi;
        const BoundaryField below(mesh, drift * (1.0 - std::cos(pi2 * (-h))));
        const BoundaryField above(mesh, drift * (1.0 - std::cos(pi2 * (1.0 + h))));
        const BoundaryField nb = normal_derivative_bottom(d.row(1), below);
        const BoundaryField nt = normal_derivative_top(above, d.row(n - 1));
        for (int i = 0; i < n; ++i) {
            worst_normal = std::max({worst_normal, std::abs(nb(i)) / scale,
                                     std::abs(nt(i)) / scale});
        }
    }

    SuiteReport r{fmt::format("correction identities N={}", n), {}};
    r.checks.push_back(check_at_most(fmt::format("mean(dPhi) = drift, N={}", n), worst_mean, 1e-14));
    r.checks.push_back(
        check_at_most(fmt::format("mean(Phi - dPhi) = reference, N={}", n), worst_shift, 1e-14));
    r.checks.push_back(check_at_most(fmt::format("wall rows zero, N={}", n), worst_wall, 1e-14));
    r.checks.push_back(
        check_at_most(fmt::format("wall normal derivative zero, N={}", n), worst_normal, 1e-14));
    return r;
}

SuiteReport verify_correction_identities(const Mesh& mesh) {
    static constexpr double kDrifts[] = {0.0, 1.0, -0.5, 1e-6, 3.25, -42.0};
    return verify_correction_identities(mesh, kDrifts);
}

} // namespace chdbc
