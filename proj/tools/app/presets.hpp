#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include <chdbc/grid.hpp>

namespace chdbc::app {

/// Closed-form initial data for `constant:c` and `cosine:a`; nullopt for
/// presets that are not analytic (random, snapshot).
std::optional<std::function<double(double, double)>> analytic_preset(std::string_view spec);

/// Builds the initial State from a preset spec:
///   constant:c   phi = c
///   cosine:a     phi = a cos(2 pi x) cos(pi y)
///   random:a     uniform in [-a, a], one Neumann relaxation sweep
///   snapshot:p   bulk CSV written by save_state (N must match)
State make_initial(std::string_view spec, const Mesh& mesh, std::uint64_t seed);

} // namespace chdbc::app
