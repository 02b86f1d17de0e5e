#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chdbc {

/// Uniform mesh on the unit square, cell-centered in the periodic x-direction
/// and node-based in y.
///
/// Point (i, j) sits at x_i = (i + 1/2) h, y_j = j h with i = 0..N-1 and
/// j = 0..N. The wall rows j = 0 and j = N carry quadrature weight 1/2.
class Mesh {
public:
    static constexpr int kMinCells = 4;

    explicit Mesh(int cells);

    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }

    double x_center(int i) const noexcept { return (i + 0.5) * h_; }
    double y_node(int j) const noexcept { return j * h_; }
    double weight(int j) const noexcept { return (j == 0 || j == n_) ? 0.5 : 1.0; }

    std::vector<double> x_centers() const;
    std::vector<double> y_nodes() const;
    std::vector<double> weights() const;

    std::size_t bulk_size() const noexcept {
        return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_ + 1);
    }

    /// Periodic wrap of an x index into [0, N).
    int wrap(int i) const noexcept {
        const int r = i % n_;
        return r < 0 ? r + n_ : r;
    }

    friend bool operator==(const Mesh& a, const Mesh& b) noexcept { return a.n_ == b.n_; }

private:
    int n_;
    double h_;
};

/// Throws MeshMismatch unless both meshes agree.
void require_same_mesh(const Mesh& a, const Mesh& b);

class BoundaryField;

/// Grid function on all N x (N+1) mesh points, periodic in x.
///
/// Storage is row-major with j outer: value (i, j) lives at j*N + i.
class BulkField {
public:
    explicit BulkField(const Mesh& mesh, double value = 0.0);
    BulkField(const Mesh& mesh, std::vector<double> values);

    template <class F>
    static BulkField sample(const Mesh& mesh, F&& f) {
        BulkField out(mesh);
        for (int j = 0; j <= mesh.n(); ++j) {
            for (int i = 0; i < mesh.n(); ++i) {
                out(i, j) = f(mesh.x_center(i), mesh.y_node(j));
            }
        }
        return out;
    }

    const Mesh& mesh() const noexcept { return mesh_; }

    double operator()(int i, int j) const noexcept { return v_[index(i, j)]; }
    double& operator()(int i, int j) noexcept { return v_[index(i, j)]; }

    std::span<const double> values() const noexcept { return v_; }
    std::span<double> values() noexcept { return v_; }

    BoundaryField row(int j) const;
    void set_row(int j, const BoundaryField& row);

    bool all_finite() const noexcept;

    BulkField& operator+=(const BulkField& o);
    BulkField& operator-=(const BulkField& o);
    BulkField& operator*=(double s) noexcept;

    friend BulkField operator+(BulkField a, const BulkField& b) { return a += b; }
    friend BulkField operator-(BulkField a, const BulkField& b) { return a -= b; }
    friend BulkField operator*(double s, BulkField a) { return a *= s; }
    friend BulkField operator*(BulkField a, double s) { return a *= s; }

    friend bool operator==(const BulkField& a, const BulkField& b) noexcept {
        return a.mesh_ == b.mesh_ && a.v_ == b.v_;
    }

private:
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(mesh_.n()) +
               static_cast<std::size_t>(mesh_.wrap(i));
    }

    Mesh mesh_;
    std::vector<double> v_;
};

/// Grid function on one wall (N points, periodic).
class BoundaryField {
public:
    explicit BoundaryField(const Mesh& mesh, double value = 0.0);
    BoundaryField(const Mesh& mesh, std::vector<double> values);

    template <class F>
    static BoundaryField sample(const Mesh& mesh, F&& f) {
        BoundaryField out(mesh);
        for (int i = 0; i < mesh.n(); ++i) {
            out(i) = f(mesh.x_center(i));
        }
        return out;
    }

    const Mesh& mesh() const noexcept { return mesh_; }

    double operator()(int i) const noexcept { return v_[static_cast<std::size_t>(mesh_.wrap(i))]; }
    double& operator()(int i) noexcept { return v_[static_cast<std::size_t>(mesh_.wrap(i))]; }

    std::span<const double> values() const noexcept { return v_; }
    std::span<double> values() noexcept { return v_; }

    bool all_finite() const noexcept;

    BoundaryField& operator+=(const BoundaryField& o);
    BoundaryField& operator-=(const BoundaryField& o);
    BoundaryField& operator*=(double s) noexcept;

    friend BoundaryField operator+(BoundaryField a, const BoundaryField& b) { return a += b; }
    friend BoundaryField operator-(BoundaryField a, const BoundaryField& b) { return a -= b; }
    friend BoundaryField operator*(double s, BoundaryField a) { return a *= s; }
    friend BoundaryField operator*(BoundaryField a, double s) { return a *= s; }

    friend bool operator==(const BoundaryField& a, const BoundaryField& b) noexcept {
        return a.mesh_ == b.mesh_ && a.v_ == b.v_;
    }

private:
    Mesh mesh_;
    std::vector<double> v_;
};

/// Phase-field configuration. The bulk rows j = 0 and j = N are the wall
/// traces, so bottom() and top() can never disagree with the bulk.
class State {
public:
    /// Validates finiteness and strict separation |phi| < 1.
    explicit State(BulkField phi);

    /// Builds a state from explicit wall fields; they must match the bulk
    /// wall rows bit for bit.
    static State from_parts(BulkField phi, const BoundaryField& bottom, const BoundaryField& top);

    const Mesh& mesh() const noexcept { return phi_.mesh(); }
    const BulkField& phi() const noexcept { return phi_; }
    BoundaryField bottom() const { return phi_.row(0); }
    BoundaryField top() const { return phi_.row(phi_.mesh().n()); }

    /// min over the grid of 1 - |phi|.
    double positivity_margin() const noexcept;

    friend bool operator==(const State& a, const State& b) noexcept { return a.phi_ == b.phi_; }

private:
    BulkField phi_;
};

// --- inner products and norms -------------------------------------------

/// h^2 sum_i sum_j w_j f_ij g_ij
double inner(const BulkField& f, const BulkField& g);
double norm2_sq(const BulkField& f);
/// (f, 1); the domain has unit area so this is also the weighted mean.
double mean(const BulkField& f);

/// h sum_i f_i g_i
double boundary_inner(const BoundaryField& f, const BoundaryField& g);
double boundary_norm2_sq(const BoundaryField& f);
double boundary_mean(const BoundaryField& f);

// --- difference operators ------------------------------------------------

/// Five-point Laplacian with homogeneous Neumann reflection in y.
BulkField laplacian_neumann(const BulkField& f);

/// Five-point Laplacian with caller-supplied ghost rows f(., -1) and f(., N+1).
BulkField laplacian_with_ghosts(const BulkField& f, const BoundaryField& ghost_below,
                                const BoundaryField& ghost_above);

/// Modified negative Laplacian whose wall rows fold in the reflected ghost.
/// Maps every grid function into the weighted-mean-zero subspace.
BulkField apply_Lh(const BulkField& f);

/// Staggered gradient pairing (grad f, grad g); x faces weighted by w_j.
double grad_inner(const BulkField& f, const BulkField& g);
double grad_norm_sq(const BulkField& f);

/// Periodic second difference on a wall.
BoundaryField dx2_gamma(const BoundaryField& f);
/// ||D_x f||^2 on a wall, forward differences paired with h.
double dx_norm_sq_gamma(const BoundaryField& f);

/// Centered normal derivative (f_{i,1} - f_{i,-1}) / 2h at the bottom wall.
BoundaryField normal_derivative_bottom(const BoundaryField& row1, const BoundaryField& ghost_below);
/// Centered normal derivative (f_{i,N+1} - f_{i,N-1}) / 2h at the top wall.
BoundaryField normal_derivative_top(const BoundaryField& ghost_above, const BoundaryField& row_nm1);

/// Cyclic shift by s cells in x: out(i, j) = f(i - s, j).
BulkField shift_x(const BulkField& f, int s);
BoundaryField shift_x(const BoundaryField& f, int s);

} // namespace chdbc
