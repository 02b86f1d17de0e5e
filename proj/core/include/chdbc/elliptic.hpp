#pragma once

#include <memory>
#include <vector>

#include "chdbc/grid.hpp"

namespace chdbc {

/// Precomputed data for inverting L_h and -D_x^2 on one mesh.
///
/// A real FFT diagonalizes the periodic x-direction; each x-wavenumber k then
/// leaves an (N+1)-point tridiagonal system in y. Those systems are stored in
/// their w_j-scaled symmetric form as LDL^T factors. Immutable after
/// construction, so concurrent solves on one workspace are safe.
class EllipticWorkspace {
public:
    /// Absolute tolerance on the mean of a right-hand side.
    static constexpr double kMeanTolerance = 1e-11;
    /// Relative residual accepted by the post-solve check.
    static constexpr double kResidualTolerance = 1e-10;

    explicit EllipticWorkspace(const Mesh& mesh);
    ~EllipticWorkspace();
    EllipticWorkspace(const EllipticWorkspace&) = delete;
    EllipticWorkspace& operator=(const EllipticWorkspace&) = delete;

    /// Shared, lazily built workspace for a mesh size.
    static const EllipticWorkspace& for_mesh(const Mesh& mesh);

    const Mesh& mesh() const noexcept { return mesh_; }

    /// lambda_k = (2 - 2 cos(2 pi k h)) / h^2 for k = 0..N-1.
    const std::vector<double>& eigenvalues() const noexcept { return lambda_; }

    /// Unique weighted-mean-zero psi with L_h psi = f.
    BulkField solve_Lh(const BulkField& f) const;

    /// Unique mean-zero psi with -D_x^2 psi = f on one wall.
    BoundaryField solve_dx2_gamma(const BoundaryField& f) const;

    /// Max relative error of the stored factorizations against apply_Lh on
    /// the probes cos(2 pi k x) cos(pi y) for every k (self-check).
    double factorization_probe_error() const;

private:
    struct Impl;

    Mesh mesh_;
    std::vector<double> lambda_;
    std::unique_ptr<Impl> impl_;
};

BulkField solve_Lh(const BulkField& f);
/// sqrt((f, L_h^{-1} f)) on the weighted-mean-zero space.
double hminus1_norm(const BulkField& f);

BoundaryField solve_dx2_gamma(const BoundaryField& f);
/// sqrt((f, (-D_x^2)^{-1} f)_Gamma) on the mean-zero wall space.
double hminus1_gamma_norm(const BoundaryField& f);

} // namespace chdbc
