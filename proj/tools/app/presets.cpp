#include "app/presets.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <fmt/format.h>

#include <chdbc/errors.hpp>
#include <chdbc/field_io.hpp>

namespace chdbc::app {

namespace {

struct Preset {
    std::string_view kind;
    std::string_view arg;
};

Preset split(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos || colon + 1 == spec.size()) {
        throw ConfigError(fmt::format("initial '{}': expected <preset>:<value>", spec));
    }
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

double amplitude(const Preset& p) {
    double v = 0.0;
    const char* end = p.arg.data() + p.arg.size();
    const auto [ptr, ec] = std::from_chars(p.arg.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ConfigError(fmt::format("initial {}: cannot parse '{}'", p.kind, p.arg));
    }
    if (!(std::abs(v) < 1.0)) {
        throw ConfigError(fmt::format("initial {}: |{}| must be below 1", p.kind, v));
    }
    return v;
}

} // namespace

std::optional<std::function<double(double, double)>> analytic_preset(std::string_view spec) {
    const Preset p = split(spec);
    if (p.kind == "constant") {
        const double c = amplitude(p);
        return [c](double, double) { return c; };
    }
    if (p.kind == "cosine") {
        const double a = amplitude(p);
        return [a](double x, double y) {
            return a * std::cos(2.0 * std::numbers::pi * x) * std::cos(std::numbers::pi * y);
        };
    }
    if (p.kind == "random" || p.kind == "snapshot") return std::nullopt;
    throw ConfigError(fmt::format("unknown initial preset '{}'", p.kind));
}

State make_initial(std::string_view spec, const Mesh& mesh, std::uint64_t seed) {
    const Preset p = split(spec);
    if (p.kind == "snapshot") {
        State s = load_state(std::filesystem::path(std::string(p.arg)));
        if (!(s.mesh() == mesh)) {
            throw ConfigError(fmt::format("snapshot '{}' has N={}, config has N={}", p.arg,
                                          s.mesh().n(), mesh.n()));
        }
        return s;
    }
    if (p.kind == "random") {
        const double a = std::abs(amplitude(p));
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(-a, a);
        BulkField phi(mesh);
        for (double& v : phi.values()) v = unif(rng);
        // One damped Jacobi sweep; h^2/8 keeps the result inside [-a, a].
        const double h = mesh.h();
        phi += (h * h / 8.0) * laplacian_neumann(phi);
        return State(std::move(phi));
    }
    const auto f = analytic_preset(spec);
    return State(BulkField::sample(mesh, *f));
}

} // namespace chdbc::app
