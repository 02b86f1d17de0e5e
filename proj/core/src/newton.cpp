#include "newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "chdbc/errors.hpp"

namespace chdbc::detail {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

// Offsets of the six blocks in the stacked unknown (and residual) vector.
struct Layout {
    int n = 0;
    int m = 0; // N (N + 1)

    explicit Layout(const Mesh& mesh) : n(mesh.n()), m(n * (n + 1)) {}

    int phi(int i, int j) const { return j * n + wrap(i); }
    int mu(int i, int j) const { return m + j * n + wrap(i); }
    int mu_bottom(int i) const { return 2 * m + wrap(i); }
    int mu_top(int i) const { return 2 * m + n + wrap(i); }
    int flux_bottom(int i) const { return 2 * m + 2 * n + wrap(i); }
    int flux_top(int i) const { return 2 * m + 3 * n + wrap(i); }
    int size() const { return 2 * m + 4 * n; }

private:
    int wrap(int i) const { return ((i % n) + n) % n; }
};

// Terms of the residual that do not depend on the unknowns.
struct Constants {
    BulkField bulk_rhs;         // history
    BulkField mu_offset;        // theta0 phi_expl + A dt L_h phi_ref
    BoundaryField bottom_rhs;   // history rows
    BoundaryField top_rhs;
    BoundaryField bottom_offset; // theta0 expl_B - B dt D_x^2 ref_B
    BoundaryField top_offset;
};

Constants make_constants(const StepProblem& pb) {
    const Mesh& mesh = pb.history.mesh();
    const int n = mesh.n();
    const double theta0 = pb.model.theta0;
    const double bdt = pb.B * pb.params.dt;
    Constants c{pb.history,
                theta0 * pb.explicit_part,
                pb.history.row(0),
                pb.history.row(n),
                theta0 * pb.explicit_part.row(0),
                theta0 * pb.explicit_part.row(n)};
    if (pb.A != 0.0) c.mu_offset += (pb.A * pb.params.dt) * apply_Lh(pb.reference);
    if (pb.B != 0.0) {
        c.bottom_offset -= bdt * dx2_gamma(pb.reference.row(0));
        c.top_offset -= bdt * dx2_gamma(pb.reference.row(n));
    }
    return c;
}

Unknowns residual(const StepProblem& pb, const Constants& c, const Unknowns& x) {
    const Mesh& mesh = x.phi.mesh();
    const int n = mesh.n();
    const double h = mesh.h();
    const double dt = pb.params.dt;
    const double a = pb.time_coeff;
    const double bulk_stiff = pb.model.epsilon * pb.model.epsilon + pb.A * dt;
    const double wall_stiff = pb.model.kappa * pb.model.epsilon + pb.B * dt;

    BulkField r_phi = a * x.phi - c.bulk_rhs + dt * apply_Lh(x.mu);

    const BulkField l_phi = apply_Lh(x.phi);
    BulkField r_mu(mesh);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i < n; ++i) {
            r_mu(i, j) = x.mu(i, j) - I_prime(x.phi(i, j)) + c.mu_offset(i, j) -
                         bulk_stiff * l_phi(i, j);
        }
    }
    for (int i = 0; i < n; ++i) {
        r_mu(i, 0) -= (2.0 / h) * x.flux_bottom(i);
        r_mu(i, n) += (2.0 / h) * x.flux_top(i);
    }

    const BoundaryField phi_b = x.phi.row(0);
    const BoundaryField phi_t = x.phi.row(n);
    BoundaryField r_sb = a * phi_b - c.bottom_rhs - dt * dx2_gamma(x.mu_bottom);
    BoundaryField r_st = a * phi_t - c.top_rhs - dt * dx2_gamma(x.mu_top);

    const BoundaryField dxx_b = dx2_gamma(phi_b);
    const BoundaryField dxx_t = dx2_gamma(phi_t);
    BoundaryField r_mb(mesh);
    BoundaryField r_mt(mesh);
    for (int i = 0; i < n; ++i) {
        r_mb(i) = x.mu_bottom(i) - I_prime(phi_b(i)) + c.bottom_offset(i) +
                  wall_stiff * dxx_b(i) + x.flux_bottom(i);
        r_mt(i) = x.mu_top(i) - I_prime(phi_t(i)) + c.top_offset(i) + wall_stiff * dxx_t(i) -
                  x.flux_top(i);
    }
    return {std::move(r_phi), std::move(r_mu), std::move(r_sb),
            std::move(r_st),  std::move(r_mb), std::move(r_mt)};
}

double stacked_norm(const Unknowns& r) {
    return std::sqrt(norm2_sq(r.phi) + norm2_sq(r.mu) + boundary_norm2_sq(r.mu_bottom) +
                     boundary_norm2_sq(r.mu_top) + boundary_norm2_sq(r.flux_bottom) +
                     boundary_norm2_sq(r.flux_top));
}

// L_h stencil for row (i, j) acting on the block starting at col(., .).
template <class Col>
void push_Lh(std::vector<Triplet>& t, int row, int i, int j, int n, double inv_h2, double scale,
             Col col) {
    t.emplace_back(row, col(i, j), 4.0 * inv_h2 * scale);
    t.emplace_back(row, col(i - 1, j), -inv_h2 * scale);
    t.emplace_back(row, col(i + 1, j), -inv_h2 * scale);
    if (j == 0) {
        t.emplace_back(row, col(i, 1), -2.0 * inv_h2 * scale);
    } else if (j == n) {
        t.emplace_back(row, col(i, n - 1), -2.0 * inv_h2 * scale);
    } else {
        t.emplace_back(row, col(i, j - 1), -inv_h2 * scale);
        t.emplace_back(row, col(i, j + 1), -inv_h2 * scale);
    }
}

// Periodic second difference D_x^2 on one wall.
template <class Col>
void push_dx2(std::vector<Triplet>& t, int row, int i, double inv_h2, double scale, Col col) {
    t.emplace_back(row, col(i), -2.0 * inv_h2 * scale);
    t.emplace_back(row, col(i - 1), inv_h2 * scale);
    t.emplace_back(row, col(i + 1), inv_h2 * scale);
}

// Jacobian with a fixed sparsity pattern. Only the -I''(phi) diagonal entries
// change between Newton iterations.
class Jacobian {
public:
    Jacobian(const StepProblem& pb, const Mesh& mesh) : layout_(mesh) {
        const int n = mesh.n();
        const double h = mesh.h();
        const double inv_h2 = 1.0 / (h * h);
        const double dt = pb.params.dt;
        const double a = pb.time_coeff;
        const double bulk_stiff = pb.model.epsilon * pb.model.epsilon + pb.A * dt;
        const double wall_stiff = pb.model.kappa * pb.model.epsilon + pb.B * dt;
        const Layout& L = layout_;
        auto phi_col = [&](int i, int j) { return L.phi(i, j); };
        auto mu_col = [&](int i, int j) { return L.mu(i, j); };

        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(L.size()) * 12);
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i < n; ++i) {
                const int rp = L.phi(i, j);
                t.emplace_back(rp, L.phi(i, j), a);
                push_Lh(t, rp, i, j, n, inv_h2, dt, mu_col);

                const int rm = L.mu(i, j);
                t.emplace_back(rm, L.mu(i, j), 1.0);
                t.emplace_back(rm, L.phi(i, j), 0.0); // -I''(phi) slot
                push_Lh(t, rm, i, j, n, inv_h2, -bulk_stiff, phi_col);
                if (j == 0) t.emplace_back(rm, L.flux_bottom(i), -2.0 / h);
                if (j == n) t.emplace_back(rm, L.flux_top(i), 2.0 / h);
            }
        }
        for (int i = 0; i < n; ++i) {
            const int rsb = L.mu_bottom(i); // wall evolution rows reuse the mu_B block rows
            t.emplace_back(rsb, L.phi(i, 0), a);
            push_dx2(t, rsb, i, inv_h2, -dt, [&](int k) { return L.mu_bottom(k); });
            const int rst = L.mu_top(i);
            t.emplace_back(rst, L.phi(i, n), a);
            push_dx2(t, rst, i, inv_h2, -dt, [&](int k) { return L.mu_top(k); });

            const int rmb = L.flux_bottom(i);
            t.emplace_back(rmb, L.mu_bottom(i), 1.0);
            t.emplace_back(rmb, L.phi(i, 0), 0.0);
            push_dx2(t, rmb, i, inv_h2, wall_stiff, [&](int k) { return L.phi(k, 0); });
            t.emplace_back(rmb, L.flux_bottom(i), 1.0);

            const int rmt = L.flux_top(i);
            t.emplace_back(rmt, L.mu_top(i), 1.0);
            t.emplace_back(rmt, L.phi(i, n), 0.0);
            push_dx2(t, rmt, i, inv_h2, wall_stiff, [&](int k) { return L.phi(k, n); });
            t.emplace_back(rmt, L.flux_top(i), -1.0);
        }

        matrix_.resize(L.size(), L.size());
        matrix_.setFromTriplets(t.begin(), t.end());
        matrix_.makeCompressed();
        base_.assign(matrix_.valuePtr(), matrix_.valuePtr() + matrix_.nonZeros());

        bulk_slots_.resize(mesh.bulk_size());
        for (int j = 0; j <= n; ++j) {
            for (int i = 0; i < n; ++i) {
                bulk_slots_[static_cast<std::size_t>(L.phi(i, j))] = slot(L.mu(i, j), L.phi(i, j));
            }
        }
        bottom_slots_.resize(static_cast<std::size_t>(n));
        top_slots_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            bottom_slots_[static_cast<std::size_t>(i)] = slot(L.flux_bottom(i), L.phi(i, 0));
            top_slots_[static_cast<std::size_t>(i)] = slot(L.flux_top(i), L.phi(i, n));
        }
    }

    void update(const BulkField& phi) {
        double* v = matrix_.valuePtr();
        const auto values = phi.values();
        for (std::size_t k = 0; k < values.size(); ++k) {
            const auto s = bulk_slots_[k];
            v[s] = base_[s] - I_second(values[k]);
        }
        const int n = phi.mesh().n();
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            v[bottom_slots_[ui]] = base_[bottom_slots_[ui]] - I_second(phi(i, 0));
            v[top_slots_[ui]] = base_[top_slots_[ui]] - I_second(phi(i, n));
        }
    }

    const SparseMatrix& matrix() const { return matrix_; }
    const Layout& layout() const { return layout_; }

private:
    std::size_t slot(int row, int col) {
        const double* base = matrix_.valuePtr();
        return static_cast<std::size_t>(&matrix_.coeffRef(row, col) - base);
    }

    Layout layout_;
    SparseMatrix matrix_;
    std::vector<double> base_;
    std::vector<std::size_t> bulk_slots_;
    std::vector<std::size_t> bottom_slots_;
    std::vector<std::size_t> top_slots_;
};

Eigen::VectorXd pack(const Layout& L, const Unknowns& r) {
    Eigen::VectorXd v(L.size());
    const int n = L.n;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i < n; ++i) {
            v[L.phi(i, j)] = r.phi(i, j);
            v[L.mu(i, j)] = r.mu(i, j);
        }
    }
    // Row blocks follow the Jacobian assembly: wall evolution in the mu_B/mu_T
    // rows, wall potentials in the flux rows.
    for (int i = 0; i < n; ++i) {
        v[L.mu_bottom(i)] = r.mu_bottom(i);
        v[L.mu_top(i)] = r.mu_top(i);
        v[L.flux_bottom(i)] = r.flux_bottom(i);
        v[L.flux_top(i)] = r.flux_top(i);
    }
    return v;
}

void axpy_unpack(const Layout& L, double alpha, const Eigen::VectorXd& d, Unknowns& x) {
    const int n = L.n;
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i < n; ++i) {
            x.phi(i, j) += alpha * d[L.phi(i, j)];
            x.mu(i, j) += alpha * d[L.mu(i, j)];
        }
    }
    for (int i = 0; i < n; ++i) {
        x.mu_bottom(i) += alpha * d[L.mu_bottom(i)];
        x.mu_top(i) += alpha * d[L.mu_top(i)];
        x.flux_bottom(i) += alpha * d[L.flux_bottom(i)];
        x.flux_top(i) += alpha * d[L.flux_top(i)];
    }
}

} // namespace

double max_admissible_step(const BulkField& phi, const BulkField& d) {
    double t = std::numeric_limits<double>::infinity();
    const auto p = phi.values();
    const auto q = d.values();
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (q[k] > 0.0) {
            t = std::min(t, (1.0 - p[k]) / q[k]);
        } else if (q[k] < 0.0) {
            t = std::min(t, (-1.0 - p[k]) / q[k]);
        }
    }
    return t;
}

Unknowns initial_unknowns(const StepProblem& pb, BulkField phi) {
    const Mesh& mesh = phi.mesh();
    const int n = mesh.n();
    const Constants c = make_constants(pb);
    const double bulk_stiff = pb.model.epsilon * pb.model.epsilon + pb.A * pb.params.dt;
    const double wall_stiff = pb.model.kappa * pb.model.epsilon + pb.B * pb.params.dt;

    const BulkField l_phi = apply_Lh(phi);
    BulkField mu(mesh);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i < n; ++i) {
            mu(i, j) = I_prime(phi(i, j)) - c.mu_offset(i, j) + bulk_stiff * l_phi(i, j);
        }
    }
    auto wall_mu = [&](const BoundaryField& f, const BoundaryField& offset) {
        const BoundaryField dxx = dx2_gamma(f);
        BoundaryField out(mesh);
        for (int i = 0; i < n; ++i) out(i) = I_prime(f(i)) - offset(i) - wall_stiff * dxx(i);
        return out;
    };
    BoundaryField mu_b = wall_mu(phi.row(0), c.bottom_offset);
    BoundaryField mu_t = wall_mu(phi.row(n), c.top_offset);
    return {std::move(phi), std::move(mu), std::move(mu_b), std::move(mu_t),
            BoundaryField(mesh), BoundaryField(mesh)};
}

double residual_norm(const StepProblem& pb, const Unknowns& x) {
    return stacked_norm(residual(pb, make_constants(pb), x));
}

NewtonOutcome solve_step(const StepProblem& pb, Unknowns x) {
    const Mesh& mesh = x.phi.mesh();
    const Constants c = make_constants(pb);
    const double tol = pb.params.newton_tol * pb.tol_scale;

    std::optional<Jacobian> jac;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;

    for (int it = 0;; ++it) {
        const Unknowns r = residual(pb, c, x);
        const double norm = stacked_norm(r);
        if (!std::isfinite(norm)) {
            throw NewtonDivergence(fmt::format("Newton residual not finite at iteration {}", it));
        }
        if (norm <= tol) return {std::move(x), it, norm, tol};
        if (it >= pb.params.newton_max_iter) {
            throw NewtonDivergence(fmt::format(
                "Newton did not converge in {} iterations (residual {:.3e}, tolerance {:.3e})",
                pb.params.newton_max_iter, norm, tol));
        }

        if (!jac) {
            jac.emplace(pb, mesh);
            lu.analyzePattern(jac->matrix());
        }
        jac->update(x.phi);
        lu.factorize(jac->matrix());
        if (lu.info() != Eigen::Success) {
            throw NewtonDivergence(fmt::format("singular Newton Jacobian at iteration {}", it));
        }
        const Layout& L = jac->layout();
        Eigen::VectorXd d = lu.solve(-pack(L, r));
        if (lu.info() != Eigen::Success || !d.allFinite()) {
            throw NewtonDivergence(fmt::format("Newton linear solve failed at iteration {}", it));
        }

        BulkField d_phi(mesh);
        for (int j = 0; j <= mesh.n(); ++j) {
            for (int i = 0; i < mesh.n(); ++i) d_phi(i, j) = d[L.phi(i, j)];
        }
        const double alpha =
            std::min(1.0, pb.params.safeguard_fraction * max_admissible_step(x.phi, d_phi));
        if (alpha < 1e-12) {
            throw PositivityLoss(
                fmt::format("positivity safeguard shrank the Newton step to {:.3e}", alpha));
        }
        axpy_unpack(L, alpha, d, x);
    }
}

} // namespace chdbc::detail
