#include <cmath>

#include "chdbc/elliptic.hpp"
#include "chdbc/errors.hpp"
#include "chdbc/schemes.hpp"
#include "chdbc/summation.hpp"

namespace chdbc {

namespace {

double bulk_integral_of_I(const BulkField& phi) {
    const Mesh& mesh = phi.mesh();
    const auto n = static_cast<std::size_t>(mesh.n());
    const auto values = phi.values();
    const double s = pairwise_sum(values.size(), [&](std::size_t k) {
        return mesh.weight(static_cast<int>(k / n)) * I_val(values[k]);
    });
    return mesh.h() * mesh.h() * s;
}

double wall_integral_of_I(const BoundaryField& f) {
    const auto values = f.values();
    return f.mesh().h() * pairwise_sum(values.size(), [&](std::size_t k) { return I_val(values[k]); });
}

} // namespace

Masses masses_of(const State& s) {
    return {mean(s.phi()), boundary_mean(s.bottom()), boundary_mean(s.top())};
}

EnergyBreakdown energy_Eh(const State& s, const ModelParams& m) {
    const BoundaryField bottom = s.bottom();
    const BoundaryField top = s.top();
    EnergyBreakdown e;
    e.bulk_entropy = bulk_integral_of_I(s.phi());
    e.surface_entropy = wall_integral_of_I(bottom) + wall_integral_of_I(top);
    e.quadratic = -0.5 * m.theta0 *
                  (norm2_sq(s.phi()) + boundary_norm2_sq(bottom) + boundary_norm2_sq(top));
    e.bulk_gradient = 0.5 * m.epsilon * m.epsilon * grad_norm_sq(s.phi());
    e.surface_gradient =
        0.5 * m.kappa * m.epsilon * (dx_norm_sq_gamma(bottom) + dx_norm_sq_gamma(top));
    e.total = e.bulk_entropy + e.surface_entropy + e.quadratic + e.bulk_gradient +
              e.surface_gradient;
    return e;
}

double modified_energy(const State& s_np1, const State& s_n, const ModelParams& m,
                       const SchemeParams& p) {
    require_same_mesh(s_np1.mesh(), s_n.mesh());
    const BulkField d = s_np1.phi() - s_n.phi();
    const BoundaryField d_bottom = s_np1.bottom() - s_n.bottom();
    const BoundaryField d_top = s_np1.top() - s_n.top();

    const double hm1_bulk = hminus1_norm(d);
    const double hm1_top = hminus1_gamma_norm(d_top);
    const double hm1_bottom = hminus1_gamma_norm(d_bottom);
    const double h_minus_one =
        hm1_bulk * hm1_bulk + hm1_top * hm1_top + hm1_bottom * hm1_bottom;
    const double l2 = norm2_sq(d) + boundary_norm2_sq(d_top) + boundary_norm2_sq(d_bottom);

    return energy_Eh(s_np1, m).total + h_minus_one / (4.0 * p.dt) + 0.5 * m.theta0 * l2;
}

} // namespace chdbc
