#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "chdbc/grid.hpp"
#include "chdbc/potential.hpp"

namespace chdbc {

enum class SchemeKind { cs1, bdf2 };

std::string_view to_string(SchemeKind kind) noexcept;
/// Parses "cs1" or "bdf2"; throws ConfigError otherwise.
SchemeKind parse_scheme(std::string_view name);

/// Time-stepping and Newton controls.
struct SchemeParams {
    double dt = 1e-3;
    double A = 0.0; ///< bulk stabilizer (BDF2 only)
    double B = 0.0; ///< wall stabilizer (BDF2 only)
    double newton_tol = 1e-11;
    int newton_max_iter = 50;
    double safeguard_fraction = 0.9;

    void validate() const;

    /// Smallest A, B for which the BDF2 modified energy is provably nonincreasing.
    static double min_stabilizer(const ModelParams& m) noexcept { return m.theta0 * m.theta0 / 16.0; }
};

/// Bulk weighted mean and the two wall means.
struct Masses {
    double bulk = 0.0;
    double bottom = 0.0;
    double top = 0.0;
};

Masses masses_of(const State& s);

/// Terms of the discrete free energy E_h.
struct EnergyBreakdown {
    double bulk_entropy = 0.0;     ///< (I(phi), 1)
    double surface_entropy = 0.0;  ///< (I(phi_B), 1)_G + (I(phi_T), 1)_G
    double quadratic = 0.0;        ///< -theta0/2 (|phi|^2 + |phi_B|_G^2 + |phi_T|_G^2)
    double bulk_gradient = 0.0;    ///< eps^2/2 |grad_h phi|^2
    double surface_gradient = 0.0; ///< kappa eps/2 (|D_x phi_B|^2 + |D_x phi_T|^2)
    double total = 0.0;
};

EnergyBreakdown energy_Eh(const State& s, const ModelParams& m);

/// Stabilized energy of the BDF2 scheme for the pair (s_np1, s_n).
/// Throws NonZeroMean if the increments are not mass-free.
double modified_energy(const State& s_np1, const State& s_n, const ModelParams& m,
                       const SchemeParams& p);

struct StepDiagnostics {
    BulkField mu;
    BoundaryField mu_bottom;
    BoundaryField mu_top;
    /// Wall flux unknowns of the Newton system:
    /// eps^2 D~y phi^{n+1} + A dt D~y (phi^{n+1} - phi^n) at each wall.
    BoundaryField flux_bottom;
    BoundaryField flux_top;
    /// D~y phi^{n+1} at j = 0 and j = N. Always known for CS1; for BDF2 only
    /// when the wall derivatives of phi^n were supplied.
    std::optional<BoundaryField> ghost_bottom;
    std::optional<BoundaryField> ghost_top;
    int newton_iters = 0;
    double final_residual = 0.0;
    double residual_tolerance = 0.0;
    Masses masses;
    double energy = 0.0;
    std::optional<double> modified_energy;
    /// CS1: E(new) + dt (|grad mu|^2 + |D_x mu_B|^2 + |D_x mu_T|^2) - E(old).
    /// BDF2: modified energy of (new, old) minus that of (old, older).
    double dissipation_residual = 0.0;
    double positivity_margin = 0.0;
};

struct StepResult {
    State state;
    StepDiagnostics diag;
};

/// Full Newton iterate, usable as a warm start.
struct NewtonGuess {
    BulkField phi;
    BulkField mu;
    BoundaryField mu_bottom;
    BoundaryField mu_top;
    BoundaryField flux_bottom;
    BoundaryField flux_top;

    static NewtonGuess from(const StepResult& r);
};

struct WallNormals {
    BoundaryField bottom;
    BoundaryField top;
};

struct StepOptions {
    const NewtonGuess* guess = nullptr;
    /// Wall normal derivatives of phi^n (BDF2 reporting only; the solution
    /// itself does not depend on them).
    const WallNormals* previous_normals = nullptr;
    /// Modified energy of (s_n, s_nm1) if already known (BDF2).
    std::optional<double> previous_modified_energy;
};

/// First-order convex-splitting step. Throws NewtonDivergence or PositivityLoss.
StepResult step_cs1(const State& s_n, const ModelParams& m, const SchemeParams& p,
                    const StepOptions& opts = {});

/// Stabilized BDF2 step from (s_n, s_nm1).
StepResult step_bdf2(const State& s_n, const State& s_nm1, const ModelParams& m,
                     const SchemeParams& p, const StepOptions& opts = {});

// --- variational form ------------------------------------------------------

/// Convex functional whose unique minimizer over the admissible set is the
/// CS1 step from s_n. Throws DomainError if the candidate leaves the set.
double functional_Fhn(const State& candidate, const State& s_n, const ModelParams& m,
                      const SchemeParams& p);

/// BDF2 counterpart of functional_Fhn.
double functional_Jhn(const State& candidate, const State& s_n, const State& s_nm1,
                      const ModelParams& m, const SchemeParams& p);

/// Mass-preserving probe directions (bulk, wall-only and mixed modes), each
/// scaled to unit max norm.
std::vector<BulkField> admissible_directions(const Mesh& mesh);

/// max over admissible_directions of |dF(candidate; v)|, by central differences.
double functional_Fhn_gradcheck(const State& candidate, const State& s_n, const ModelParams& m,
                                const SchemeParams& p);

double functional_Jhn_gradcheck(const State& candidate, const State& s_n, const State& s_nm1,
                                const ModelParams& m, const SchemeParams& p);

// --- time integration --------------------------------------------------------

/// Drives either scheme step by step. BDF2 runs bootstrap with one CS1 step
/// unless constructed with an explicit previous state. The time after step k
/// is t0 + k dt, so a run resumed at step k reports the same times as an
/// unbroken one.
class Integrator {
public:
    Integrator(State initial, const ModelParams& m, const SchemeParams& p, SchemeKind kind,
               double t0 = 0.0, long first_step = 0);
    /// BDF2 resume from (current, previous).
    Integrator(State current, State previous, const ModelParams& m, const SchemeParams& p,
               double t0, long first_step);

    const StepResult& advance();

    const State& current() const noexcept { return current_; }
    const std::optional<State>& previous() const noexcept { return previous_; }
    long step_index() const noexcept { return step_; }
    double time() const noexcept;
    SchemeKind kind() const noexcept { return kind_; }
    const ModelParams& model() const noexcept { return model_; }
    const SchemeParams& params() const noexcept { return params_; }

    /// Modified energy of (current, previous) for BDF2; E_h(current) before
    /// the first step.
    std::optional<double> modified_energy() const noexcept { return modified_energy_; }
    const std::optional<StepResult>& last() const noexcept { return last_; }

private:
    State current_;
    std::optional<State> previous_;
    std::optional<WallNormals> normals_;
    std::optional<double> modified_energy_;
    std::optional<StepResult> last_;
    ModelParams model_;
    SchemeParams params_;
    SchemeKind kind_;
    double t0_;
    long step_;
};

} // namespace chdbc
