#pragma once

// Newton solver shared by both time steppers. Internal to the library.

#include "chdbc/grid.hpp"
#include "chdbc/potential.hpp"
#include "chdbc/schemes.hpp"

namespace chdbc::detail {

/// One implicit step written in the common form
///
///   a phi - history + dt L_h mu = 0                                (all rows)
///   mu = I'(phi) - theta0 phi_expl + eps^2 L_h phi
///        + A dt L_h (phi - phi_ref) + (2/h)[flux_B]_{j=0} - (2/h)[flux_T]_{j=N}
///   a phi_B - history_B - dt D_x^2 mu_B = 0
///   mu_B = I'(phi_B) - theta0 phi_B,expl - (kappa eps + B dt) D_x^2 phi_B
///          + B dt D_x^2 phi_B,ref - flux_B
///   (top wall: same with +flux_T)
///
/// CS1 is a = 1, history = phi_expl = phi^n, A = B = 0. BDF2 is a = 3/2,
/// history = 2 phi^n - phi^{n-1}/2, phi_expl = 2 phi^n - phi^{n-1}.
struct StepProblem {
    ModelParams model;
    SchemeParams params;
    double time_coeff = 1.0;
    double A = 0.0;
    double B = 0.0;
    BulkField history;
    BulkField explicit_part;
    BulkField reference;
    /// max(1, |phi^n|_2); the stopping threshold is newton_tol times this.
    double tol_scale = 1.0;
};

struct Unknowns {
    BulkField phi;
    BulkField mu;
    BoundaryField mu_bottom;
    BoundaryField mu_top;
    BoundaryField flux_bottom;
    BoundaryField flux_top;
};

struct NewtonOutcome {
    Unknowns x;
    int iterations = 0;
    double residual = 0.0;
    double tolerance = 0.0;
};

/// Chemical potentials consistent with phi and zero wall flux.
Unknowns initial_unknowns(const StepProblem& pb, BulkField phi);

/// Mesh-weighted l2 norm of the stacked residual.
double residual_norm(const StepProblem& pb, const Unknowns& x);

NewtonOutcome solve_step(const StepProblem& pb, Unknowns x);

/// Largest t with |phi + t d| < 1 everywhere (infinity if d == 0).
double max_admissible_step(const BulkField& phi, const BulkField& d);

} // namespace chdbc::detail
