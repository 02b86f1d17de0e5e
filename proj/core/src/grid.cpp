#include "chdbc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "chdbc/errors.hpp"
#include "chdbc/summation.hpp"

namespace chdbc {

Mesh::Mesh(int cells) : n_(cells), h_(0.0) {
    if (cells < kMinCells) {
        throw std::invalid_argument("mesh needs at least " + std::to_string(kMinCells) +
                                    " cells per direction, got " + std::to_string(cells));
    }
    h_ = 1.0 / static_cast<double>(cells);
}

std::vector<double> Mesh::x_centers() const {
    std::vector<double> x(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) x[static_cast<std::size_t>(i)] = x_center(i);
    return x;
}

std::vector<double> Mesh::y_nodes() const {
    std::vector<double> y(static_cast<std::size_t>(n_ + 1));
    for (int j = 0; j <= n_; ++j) y[static_cast<std::size_t>(j)] = y_node(j);
    return y;
}

std::vector<double> Mesh::weights() const {
    std::vector<double> w(static_cast<std::size_t>(n_ + 1));
    for (int j = 0; j <= n_; ++j) w[static_cast<std::size_t>(j)] = weight(j);
    return w;
}

void require_same_mesh(const Mesh& a, const Mesh& b) {
    if (!(a == b)) {
        throw MeshMismatch("mesh mismatch: N=" + std::to_string(a.n()) + " vs N=" +
                           std::to_string(b.n()));
    }
}

// --- BulkField -------------------------------------------------------------

BulkField::BulkField(const Mesh& mesh, double value) : mesh_(mesh), v_(mesh.bulk_size(), value) {}

BulkField::BulkField(const Mesh& mesh, std::vector<double> values)
    : mesh_(mesh), v_(std::move(values)) {
    if (v_.size() != mesh_.bulk_size()) {
        throw std::invalid_argument("bulk field needs N*(N+1) = " +
                                    std::to_string(mesh_.bulk_size()) + " values, got " +
                                    std::to_string(v_.size()));
    }
}

BoundaryField BulkField::row(int j) const {
    const auto n = static_cast<std::size_t>(mesh_.n());
    const auto first = v_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(j) * n);
    return BoundaryField(mesh_, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
}

void BulkField::set_row(int j, const BoundaryField& row) {
    require_same_mesh(mesh_, row.mesh());
    for (int i = 0; i < mesh_.n(); ++i) (*this)(i, j) = row(i);
}

bool BulkField::all_finite() const noexcept {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

BulkField& BulkField::operator+=(const BulkField& o) {
    require_same_mesh(mesh_, o.mesh_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
}

BulkField& BulkField::operator-=(const BulkField& o) {
    require_same_mesh(mesh_, o.mesh_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
}

BulkField& BulkField::operator*=(double s) noexcept {
    for (double& x : v_) x *= s;
    return *this;
}

// --- BoundaryField ---------------------------------------------------------

BoundaryField::BoundaryField(const Mesh& mesh, double value)
    : mesh_(mesh), v_(static_cast<std::size_t>(mesh.n()), value) {}

BoundaryField::BoundaryField(const Mesh& mesh, std::vector<double> values)
    : mesh_(mesh), v_(std::move(values)) {
    if (v_.size() != static_cast<std::size_t>(mesh_.n())) {
        throw std::invalid_argument("boundary field needs N = " + std::to_string(mesh_.n()) +
                                    " values, got " + std::to_string(v_.size()));
    }
}

bool BoundaryField::all_finite() const noexcept {
    return std::all_of(v_.begin(), v_.end(), [](double x) { return std::isfinite(x); });
}

BoundaryField& BoundaryField::operator+=(const BoundaryField& o) {
    require_same_mesh(mesh_, o.mesh_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
}

BoundaryField& BoundaryField::operator-=(const BoundaryField& o) {
    require_same_mesh(mesh_, o.mesh_);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
}

BoundaryField& BoundaryField::operator*=(double s) noexcept {
    for (double& x : v_) x *= s;
    return *this;
}

// --- State -----------------------------------------------------------------

State::State(BulkField phi) : phi_(std::move(phi)) {
    const auto v = phi_.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!std::isfinite(v[k])) {
            throw DomainError("state contains a non-finite value at flat index " +
                              std::to_string(k));
        }
        if (!(std::abs(v[k]) < 1.0)) {
            throw DomainError("state leaves (-1, 1) at flat index " + std::to_string(k));
        }
    }
}

State State::from_parts(BulkField phi, const BoundaryField& bottom, const BoundaryField& top) {
    require_same_mesh(phi.mesh(), bottom.mesh());
    require_same_mesh(phi.mesh(), top.mesh());
    const int n = phi.mesh().n();
    for (int i = 0; i < n; ++i) {
        if (phi(i, 0) != bottom(i) || phi(i, n) != top(i)) {
            throw DomainError("wall trace does not match bulk wall row at i=" + std::to_string(i));
        }
    }
    return State(std::move(phi));
}

double State::positivity_margin() const noexcept {
    double m = 1.0;
    for (double x : phi_.values()) m = std::min(m, 1.0 - std::abs(x));
    return m;
}

// --- inner products ---------------------------------------------------------

double inner(const BulkField& f, const BulkField& g) {
    require_same_mesh(f.mesh(), g.mesh());
    const Mesh& mesh = f.mesh();
    const auto n = static_cast<std::size_t>(mesh.n());
    const auto fv = f.values();
    const auto gv = g.values();
    const double s = pairwise_sum(fv.size(), [&](std::size_t k) {
        return mesh.weight(static_cast<int>(k / n)) * fv[k] * gv[k];
    });
    return mesh.h() * mesh.h() * s;
}

double norm2_sq(const BulkField& f) { return inner(f, f); }

double mean(const BulkField& f) {
    const Mesh& mesh = f.mesh();
    const auto n = static_cast<std::size_t>(mesh.n());
    const auto fv = f.values();
    const double s = pairwise_sum(fv.size(), [&](std::size_t k) {
        return mesh.weight(static_cast<int>(k / n)) * fv[k];
    });
    return mesh.h() * mesh.h() * s;
}

double boundary_inner(const BoundaryField& f, const BoundaryField& g) {
    require_same_mesh(f.mesh(), g.mesh());
    const auto fv = f.values();
    const auto gv = g.values();
    return f.mesh().h() * pairwise_sum(fv.size(), [&](std::size_t k) { return fv[k] * gv[k]; });
}

double boundary_norm2_sq(const BoundaryField& f) { return boundary_inner(f, f); }

double boundary_mean(const BoundaryField& f) {
    const auto fv = f.values();
    return f.mesh().h() * pairwise_sum(fv.size(), [&](std::size_t k) { return fv[k]; });
}

// --- operators ---------------------------------------------------------------

namespace {

double dx2_at(const BulkField& f, int i, int j, double inv_h2) {
    return (f(i + 1, j) - 2.0 * f(i, j) + f(i - 1, j)) * inv_h2;
}

} // namespace

BulkField laplacian_with_ghosts(const BulkField& f, const BoundaryField& ghost_below,
                                const BoundaryField& ghost_above) {
    require_same_mesh(f.mesh(), ghost_below.mesh());
    require_same_mesh(f.mesh(), ghost_above.mesh());
    const Mesh& mesh = f.mesh();
    const int n = mesh.n();
    const double inv_h2 = 1.0 / (mesh.h() * mesh.h());
    BulkField out(mesh);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double below = (j == 0) ? ghost_below(i) : f(i, j - 1);
            const double above = (j == n) ? ghost_above(i) : f(i, j + 1);
            out(i, j) = dx2_at(f, i, j, inv_h2) + (above - 2.0 * f(i, j) + below) * inv_h2;
        }
    }
    return out;
}

BulkField laplacian_neumann(const BulkField& f) {
    const int n = f.mesh().n();
    return laplacian_with_ghosts(f, f.row(1), f.row(n - 1));
}

BulkField apply_Lh(const BulkField& f) {
    const Mesh& mesh = f.mesh();
    const int n = mesh.n();
    const double inv_h2 = 1.0 / (mesh.h() * mesh.h());
    BulkField out(mesh);
    for (int i = 0; i < n; ++i) {
        out(i, 0) = -dx2_at(f, i, 0, inv_h2) - 2.0 * (f(i, 1) - f(i, 0)) * inv_h2;
        out(i, n) = -dx2_at(f, i, n, inv_h2) - 2.0 * (f(i, n - 1) - f(i, n)) * inv_h2;
    }
    for (int j = 1; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            out(i, j) = -dx2_at(f, i, j, inv_h2) -
                        (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1)) * inv_h2;
        }
    }
    return out;
}

double grad_inner(const BulkField& f, const BulkField& g) {
    require_same_mesh(f.mesh(), g.mesh());
    const Mesh& mesh = f.mesh();
    const int n = mesh.n();
    const auto un = static_cast<std::size_t>(n);
    // x faces (i+1/2, j): w_j-weighted after averaging back to cell centers.
    const double sx = pairwise_sum(mesh.bulk_size(), [&](std::size_t k) {
        const int i = static_cast<int>(k % un);
        const int j = static_cast<int>(k / un);
        return mesh.weight(j) * (f(i + 1, j) - f(i, j)) * (g(i + 1, j) - g(i, j));
    });
    // y faces (i, j+1/2), j = 0..N-1, unit weights.
    const double sy = pairwise_sum(un * un, [&](std::size_t k) {
        const int i = static_cast<int>(k % un);
        const int j = static_cast<int>(k / un);
        return (f(i, j + 1) - f(i, j)) * (g(i, j + 1) - g(i, j));
    });
    // h^2 * (1/h)^2 cancels.
    return sx + sy;
}

double grad_norm_sq(const BulkField& f) { return grad_inner(f, f); }

BoundaryField dx2_gamma(const BoundaryField& f) {
    const Mesh& mesh = f.mesh();
    const double inv_h2 = 1.0 / (mesh.h() * mesh.h());
    BoundaryField out(mesh);
    for (int i = 0; i < mesh.n(); ++i) {
        out(i) = (f(i + 1) - 2.0 * f(i) + f(i - 1)) * inv_h2;
    }
    return out;
}

double dx_norm_sq_gamma(const BoundaryField& f) {
    const Mesh& mesh = f.mesh();
    const double s = pairwise_sum(static_cast<std::size_t>(mesh.n()), [&](std::size_t k) {
        const int i = static_cast<int>(k);
        const double d = f(i + 1) - f(i);
        return d * d;
    });
    return s / mesh.h();
}

BoundaryField normal_derivative_bottom(const BoundaryField& row1, const BoundaryField& ghost_below) {
    require_same_mesh(row1.mesh(), ghost_below.mesh());
    const Mesh& mesh = row1.mesh();
    BoundaryField out(mesh);
    for (int i = 0; i < mesh.n(); ++i) out(i) = (row1(i) - ghost_below(i)) / (2.0 * mesh.h());
    return out;
}

BoundaryField normal_derivative_top(const BoundaryField& ghost_above, const BoundaryField& row_nm1) {
    require_same_mesh(ghost_above.mesh(), row_nm1.mesh());
    const Mesh& mesh = row_nm1.mesh();
    BoundaryField out(mesh);
    for (int i = 0; i < mesh.n(); ++i) out(i) = (ghost_above(i) - row_nm1(i)) / (2.0 * mesh.h());
    return out;
}

BulkField shift_x(const BulkField& f, int s) {
    const Mesh& mesh = f.mesh();
    BulkField out(mesh);
    for (int j = 0; j <= mesh.n(); ++j) {
        for (int i = 0; i < mesh.n(); ++i) out(i, j) = f(i - s, j);
    }
    return out;
}

BoundaryField shift_x(const BoundaryField& f, int s) {
    BoundaryField out(f.mesh());
    for (int i = 0; i < f.mesh().n(); ++i) out(i) = f(i - s);
    return out;
}

} // namespace chdbc
