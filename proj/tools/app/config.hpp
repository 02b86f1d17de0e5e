#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <chdbc/potential.hpp>
#include <chdbc/schemes.hpp>
#include <chdbc/verify.hpp>

namespace chdbc::app {

/// Settings shared by the run, verify and convergence commands.
///
/// Files are flat `key = value` lines; `#` starts a comment. Unknown keys
/// and malformed values raise ConfigError.
struct RunConfig {
    int N = 32;
    double dt = 1e-3;
    double t_final = 0.5;
    ModelParams model;
    SchemeKind scheme = SchemeKind::cs1;
    std::optional<double> A; ///< BDF2 only; defaults to theta0^2 / 16
    std::optional<double> B;
    double newton_tol = 1e-11;
    int newton_max_iter = 50;
    double safeguard_fraction = 0.9;
    std::string initial = "cosine:0.3";
    std::string previous; ///< snapshot of the step before `initial` (BDF2 resume)
    long start_step = 0;
    int output_every = 0; ///< 0: only the first and last snapshot
    std::optional<std::filesystem::path> output_dir;
    std::uint64_t seed = 1;

    // verify
    int verify_steps = 100;
    int gradcheck_samples = 5;

    // convergence
    std::string study = "temporal";
    int levels = 4;
    std::vector<int> N_ladder{16, 32, 64};
    double dt_factor = 0.25;
    SpatialDtRule dt_rule = SpatialDtRule::h_squared;

    /// Notes on settings that were accepted but have no effect.
    std::vector<std::string> warnings;

    SchemeParams scheme_params() const;
    /// Number of steps from start_step up to t_final.
    long total_steps() const;
};

RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Applies one key=value assignment.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

} // namespace chdbc::app
