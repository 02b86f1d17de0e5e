#pragma once

#include <iosfwd>

#include "app/config.hpp"

namespace chdbc::app {

/// Process exit codes.
enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 2,
    kSolverError = 3,
    kVerificationFailure = 4,
};

/// Simulates and writes energy.csv plus phi_<step>.csv snapshots to
/// output_dir. Returns kVerificationFailure if any step violates the mass,
/// positivity or energy tolerances.
int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Operator, elliptic and correction identity suites plus a structure run of
/// the configured scheme.
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Temporal or spatial observed-order study.
int cmd_convergence(const RunConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace chdbc::app
