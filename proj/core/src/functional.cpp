#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "chdbc/elliptic.hpp"
#include "chdbc/errors.hpp"
#include "chdbc/schemes.hpp"

namespace chdbc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kProbeStep = 1e-6;

// Both functionals share the form
//   1/(2 a dt) (|a phi - H|_{-1}^2 + |a phi_B - H_B|_{-1,G}^2 + |a phi_T - H_T|_{-1,G}^2)
//   + E_convex(phi) + A dt/2 |grad(phi - R)|^2 + B dt/2 (|D_x(phi_B - R_B)|^2 + top)
//   - theta0 ((X, phi) + (X_B, phi_B)_G + (X_T, phi_T)_G)
// with (a, H, X, R) the time coefficient, history, explicit part and
// stabilizer reference of the scheme.
struct FunctionalData {
    double a;
    BulkField history;
    BulkField explicit_part;
    BulkField reference;
    double A;
    double B;
};

double evaluate(const BulkField& phi, const FunctionalData& f, const ModelParams& m,
                const SchemeParams& p) {
    const Mesh& mesh = phi.mesh();
    const int n = mesh.n();
    const State s(phi);
    const BulkField inc = f.a * phi - f.history;
    const double m_bulk = mean(inc);
    const double m_bottom = boundary_mean(inc.row(0));
    const double m_top = boundary_mean(inc.row(n));
    const double tol = EllipticWorkspace::kMeanTolerance;
    if (std::abs(m_bulk) > tol || std::abs(m_bottom) > tol || std::abs(m_top) > tol) {
        throw DomainError(fmt::format(
            "candidate outside the admissible set: mass defects {:.3e}, {:.3e}, {:.3e}", m_bulk,
            m_bottom, m_top));
    }
    const double hb = hminus1_norm(inc);
    const double hbot = hminus1_gamma_norm(inc.row(0));
    const double htop = hminus1_gamma_norm(inc.row(n));
    const double kinetic = (hb * hb + hbot * hbot + htop * htop) / (2.0 * f.a * p.dt);

    const EnergyBreakdown e = energy_Eh(s, m);
    const double convex = e.bulk_entropy + e.surface_entropy + e.bulk_gradient + e.surface_gradient;

    double stabilizer = 0.0;
    if (f.A != 0.0) stabilizer += 0.5 * f.A * p.dt * grad_norm_sq(phi - f.reference);
    if (f.B != 0.0) {
        stabilizer += 0.5 * f.B * p.dt *
                      (dx_norm_sq_gamma(phi.row(0) - f.reference.row(0)) +
                       dx_norm_sq_gamma(phi.row(n) - f.reference.row(n)));
    }
    const double linear =
        m.theta0 * (inner(f.explicit_part, phi) +
                    boundary_inner(f.explicit_part.row(0), phi.row(0)) +
                    boundary_inner(f.explicit_part.row(n), phi.row(n)));
    return kinetic + convex + stabilizer - linear;
}

FunctionalData cs1_data(const State& s_n) {
    return {1.0, s_n.phi(), s_n.phi(), s_n.phi(), 0.0, 0.0};
}

FunctionalData bdf2_data(const State& s_n, const State& s_nm1, const SchemeParams& p) {
    require_same_mesh(s_n.mesh(), s_nm1.mesh());
    const BulkField& cur = s_n.phi();
    const BulkField& old = s_nm1.phi();
    return {1.5, 2.0 * cur - 0.5 * old, 2.0 * cur - old, cur, p.A, p.B};
}

double gradcheck(const State& candidate, const FunctionalData& f, const ModelParams& m,
                 const SchemeParams& p) {
    const BulkField& phi = candidate.phi();
    evaluate(phi, f, m, p); // admissibility of the base point
    double worst = 0.0;
    for (const BulkField& v : admissible_directions(candidate.mesh())) {
        const double plus = evaluate(phi + kProbeStep * v, f, m, p);
        const double minus = evaluate(phi - kProbeStep * v, f, m, p);
        worst = std::max(worst, std::abs(plus - minus) / (2.0 * kProbeStep));
    }
    return worst;
}

} // namespace

double functional_Fhn(const State& candidate, const State& s_n, const ModelParams& m,
                      const SchemeParams& p) {
    require_same_mesh(candidate.mesh(), s_n.mesh());
    return evaluate(candidate.phi(), cs1_data(s_n), m, p);
}

double functional_Jhn(const State& candidate, const State& s_n, const State& s_nm1,
                      const ModelParams& m, const SchemeParams& p) {
    require_same_mesh(candidate.mesh(), s_n.mesh());
    return evaluate(candidate.phi(), bdf2_data(s_n, s_nm1, p), m, p);
}

std::vector<BulkField> admissible_directions(const Mesh& mesh) {
    const int n = mesh.n();
    std::vector<BulkField> dirs;
    dirs.push_back(BulkField::sample(
        mesh, [](double x, double y) { return std::cos(2 * kPi * x) * std::cos(kPi * y); }));
    dirs.push_back(BulkField::sample(
        mesh, [](double x, double y) { return std::sin(4 * kPi * x) * (1.0 + y); }));
    dirs.push_back(BulkField::sample(mesh, [](double, double y) { return std::sin(2 * kPi * y); }));
    dirs.push_back(BulkField::sample(mesh, [](double x, double y) {
        return std::sin(2 * kPi * y) * (1.0 + 0.5 * std::cos(2 * kPi * x));
    }));
    BulkField bottom_only(mesh);
    bottom_only.set_row(0, BoundaryField::sample(mesh, [](double x) { return std::cos(2 * kPi * x); }));
    dirs.push_back(std::move(bottom_only));
    BulkField top_only(mesh);
    top_only.set_row(n, BoundaryField::sample(mesh, [](double x) { return std::sin(6 * kPi * x); }));
    dirs.push_back(std::move(top_only));

    for (BulkField& v : dirs) {
        double peak = 0.0;
        for (double x : v.values()) peak = std::max(peak, std::abs(x));
        if (peak > 0.0) v *= 1.0 / peak;
    }
    return dirs;
}

double functional_Fhn_gradcheck(const State& candidate, const State& s_n, const ModelParams& m,
                                const SchemeParams& p) {
    require_same_mesh(candidate.mesh(), s_n.mesh());
    return gradcheck(candidate, cs1_data(s_n), m, p);
}

double functional_Jhn_gradcheck(const State& candidate, const State& s_n, const State& s_nm1,
                                const ModelParams& m, const SchemeParams& p) {
    require_same_mesh(candidate.mesh(), s_n.mesh());
    return gradcheck(candidate, bdf2_data(s_n, s_nm1, p), m, p);
}

} // namespace chdbc
