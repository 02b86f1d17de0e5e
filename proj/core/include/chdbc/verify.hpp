#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chdbc/grid.hpp"
#include "chdbc/potential.hpp"
#include "chdbc/schemes.hpp"

namespace chdbc {

// --- pass/fail bookkeeping -------------------------------------------------

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Check that value <= tolerance (NaN fails).
Check check_at_most(std::string name, double value, double tolerance);

struct SuiteReport {
    std::string name;
    std::vector<Check> checks;

    bool passed() const;
    void print(std::ostream& os) const;
};

// --- operator and solver identities ------------------------------------------

/// Summation by parts with arbitrary ghost rows, (psi, L_h phi) = (grad psi,
/// grad phi), grad_norm_sq(f) = (f, L_h f), symmetry of L_h and mean
/// annihilation, each as the worst relative defect over `pairs` random pairs
/// per mesh size.
SuiteReport operator_identity_suite(std::span<const int> sizes, int pairs, std::uint64_t seed);

/// Round trips through solve_Lh and solve_dx2_gamma, plus the cosine
/// eigenfunctions k = 1, 2, 3 against their closed-form inverses.
SuiteReport elliptic_inverse_suite(std::span<const int> sizes, int pairs, std::uint64_t seed);

// --- mass correction --------------------------------------------------------

/// drift (1 - cos(2 pi y_j)), constant in i. Zero on both walls, even about
/// each wall, and with weighted mean exactly drift.
BulkField correction_field(double mass_drift, const Mesh& mesh);

/// The three correction identities (mean shift, zero wall rows, zero wall
/// normal derivative) over a sweep of drifts; tolerances scale with
/// max(1, |drift|).
SuiteReport verify_correction_identities(const Mesh& mesh, std::span<const double> drifts,
                                         std::uint64_t seed = 7);
SuiteReport verify_correction_identities(const Mesh& mesh);

// --- structure audit ------------------------------------------------------------

/// One row of the energy series (step 0 is the initial state).
struct StepRecord {
    long step = 0;
    double t = 0.0;
    double energy = 0.0;
    std::optional<double> modified_energy;
    Masses masses;
    double dissipation_residual = 0.0;
    double positivity_margin = 0.0;
    int newton_iters = 0;
};

StepRecord initial_record(const State& s, const ModelParams& m, SchemeKind kind, double t0 = 0.0,
                          long step = 0);
StepRecord record_of(const Integrator& integ);

/// energy.csv header and rows, 17 significant digits.
void write_energy_header(std::ostream& os);
void write_energy_row(std::ostream& os, const StepRecord& r);

struct StructureTolerances {
    double mass_drift = 1e-8;  ///< total drift of each mass over the run
    double dissipation = 1e-10; ///< per-step slack in the (modified) energy law
    double gradcheck = 1e-6;
};

struct StructureOptions {
    int gradcheck_samples = 0; ///< random steps at which the variational residual is checked
    std::uint64_t seed = 1;
    StructureTolerances tol;
};

struct StructureSummary {
    double max_bulk_drift = 0.0;
    double max_bottom_drift = 0.0;
    double max_top_drift = 0.0;
    double max_dissipation_residual = 0.0;
    double min_positivity_margin = 0.0;
    int max_newton_iters = 0;
    double max_gradcheck = 0.0;
};

struct StructureReport {
    SchemeKind scheme = SchemeKind::cs1;
    StepRecord initial;
    std::vector<StepRecord> series; ///< one entry per step
    std::vector<std::pair<long, double>> gradchecks;
    StructureSummary summary;
    StructureTolerances tol;

    SuiteReport checks() const;
    bool passed() const { return checks().passed(); }
    void write_csv(std::ostream& os) const;
};

/// Steps the scheme `steps` times from `initial`, recording the series.
/// Stepper failures are rethrown as StepError carrying the step index.
StructureReport run_structure_suite(const State& initial, const ModelParams& m,
                                    const SchemeParams& p, SchemeKind scheme, int steps,
                                    const StructureOptions& opts = {});

// --- observed order of accuracy -------------------------------------------------

/// Cauchy-difference metric between two trajectories on one mesh sampled at
/// the same instants t_0..t_n (step dt):
///   |e_n|_{-1} + |e_n^B|_{-1,G} + |e_n^T|_{-1,G}
///   + sqrt(dt sum_{k=1..n} (eps^2 |grad e_k|^2 + eps kappa (|D_x e_k^B|^2 + |D_x e_k^T|^2))).
/// Means of the final-time differences are removed before the H^-1 norms;
/// the largest removed magnitude is returned through mean_defect.
double composite_error(std::span<const BulkField> a, std::span<const BulkField> b, double dt,
                       const ModelParams& m, double* mean_defect = nullptr);

/// Coarse-grid image of a fine field with twice the cells: pairwise averages
/// of cell centers in x, injection of nodes in y.
BulkField restrict_to_coarse(const BulkField& fine);

struct ConvergenceLevel {
    int n = 0;
    double dt = 0.0;
    long steps = 0;
};

struct ConvergenceReport {
    std::string header;
    std::string study; ///< "temporal" or "spatial"
    SchemeKind scheme = SchemeKind::cs1;
    std::vector<ConvergenceLevel> levels;
    std::vector<double> errors;       ///< errors[k]: levels k and k + 1
    std::vector<double> mean_defects; ///< removed means per error
    std::vector<double> orders;       ///< log2(errors[k] / errors[k + 1]); NaN if degenerate
    std::vector<std::string> notes;
    double target_order = 0.0;
    double order_low = 0.0;
    double order_high = 0.0;
    bool pass = false;

    /// Order from the finest pair, NaN if unavailable.
    double finest_order() const;
    void print(std::ostream& os) const;
    void write_csv(std::ostream& os) const;
};

/// Errors below this make an order estimate meaningless.
inline constexpr double kDegenerateError = 1e-13;

/// log2(e[k] / e[k+1]) with degenerate pairs reported as NaN.
std::vector<double> observed_orders(std::span<const double> errors);

struct TemporalStudy {
    SchemeKind scheme = SchemeKind::cs1;
    double t_final = 0.05;
    double base_dt = 2e-3;
    int levels = 4;
    SchemeParams params; ///< dt is ignored
    /// Ratio between consecutive time steps; 1 reproduces the same level.
    int refinement = 2;
};

ConvergenceReport temporal_order_study(const State& initial, const ModelParams& m,
                                       const TemporalStudy& study);

enum class SpatialDtRule { h_squared, h };

struct SpatialStudy {
    SchemeKind scheme = SchemeKind::cs1;
    double t_final = 0.01;
    std::vector<int> n_ladder{16, 32, 64};
    double dt_factor = 0.25;
    SpatialDtRule rule = SpatialDtRule::h_squared;
    SchemeParams params; ///< dt is ignored
};

/// The coarsest level uses dt = t_final / ceil(t_final / (dt_factor h^p)) so
/// that t_final is hit exactly; finer levels divide it by 2^p.
ConvergenceReport spatial_order_study(const std::function<double(double, double)>& initial,
                                      const ModelParams& m, const SpatialStudy& study);

// --- threading --------------------------------------------------------------------

/// Worker cap: CHDBC_THREADS if set to a positive integer, else the hardware
/// concurrency (at least 1).
unsigned worker_count();

/// Runs task(0..count-1) on up to worker_count() threads and rethrows the
/// first failure by index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

} // namespace chdbc
