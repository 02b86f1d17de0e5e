#include "app/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

#include <fmt/format.h>

#include <chdbc/errors.hpp>

namespace chdbc::app {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, std::string_view text) {
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError(fmt::format("{}: cannot parse '{}'", key, text));
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw ConfigError(fmt::format("{}: value must be finite", key));
    }
    return value;
}

double positive(const std::string& key, double v) {
    if (!(v > 0.0)) throw ConfigError(fmt::format("{} must be positive, got {}", key, v));
    return v;
}

double nonnegative(const std::string& key, double v) {
    if (!(v >= 0.0)) throw ConfigError(fmt::format("{} must be nonnegative, got {}", key, v));
    return v;
}

int positive_int(const std::string& key, int v) {
    if (v <= 0) throw ConfigError(fmt::format("{} must be a positive integer, got {}", key, v));
    return v;
}

std::vector<int> parse_ladder(const std::string& key, std::string_view text) {
    std::vector<int> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        out.push_back(positive_int(key, parse_number<int>(key, trim(text.substr(0, comma)))));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    if (out.size() < 2) throw ConfigError(fmt::format("{} needs at least two entries", key));
    return out;
}

void finalize(RunConfig& cfg) {
    if (cfg.N < Mesh::kMinCells) {
        throw ConfigError(fmt::format("N must be at least {}, got {}", Mesh::kMinCells, cfg.N));
    }
    if (cfg.scheme == SchemeKind::cs1 && (cfg.A || cfg.B)) {
        cfg.warnings.emplace_back("A and B only apply to bdf2; ignored for cs1");
    }
    if (cfg.scheme == SchemeKind::cs1 && !cfg.previous.empty()) {
        cfg.warnings.emplace_back("previous only applies to bdf2; ignored for cs1");
    }
    const double floor = SchemeParams::min_stabilizer(cfg.model);
    if (cfg.scheme == SchemeKind::bdf2 && ((cfg.A && *cfg.A < floor) || (cfg.B && *cfg.B < floor))) {
        cfg.warnings.emplace_back(fmt::format(
            "A or B below theta0^2/16 = {}: the modified energy law is not guaranteed", floor));
    }
}

} // namespace

SchemeParams RunConfig::scheme_params() const {
    SchemeParams p;
    p.dt = dt;
    if (scheme == SchemeKind::bdf2) {
        p.A = A.value_or(SchemeParams::min_stabilizer(model));
        p.B = B.value_or(SchemeParams::min_stabilizer(model));
    }
    p.newton_tol = newton_tol;
    p.newton_max_iter = newton_max_iter;
    p.safeguard_fraction = safeguard_fraction;
    return p;
}

long RunConfig::total_steps() const {
    const double raw = t_final / dt;
    const long steps = std::lround(raw);
    if (std::abs(raw - static_cast<double>(steps)) > 1e-9 * std::max(1.0, raw)) {
        throw ConfigError(fmt::format("t_final={} is not a multiple of dt={}", t_final, dt));
    }
    if (steps < start_step) {
        throw ConfigError(fmt::format("start_step={} lies beyond t_final", start_step));
    }
    return steps;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
    const std::string_view v = trim(raw);
    if (v.empty()) throw ConfigError(fmt::format("{}: empty value", key));

    if (key == "N") {
        cfg.N = parse_number<int>(key, v);
    } else if (key == "dt") {
        cfg.dt = positive(key, parse_number<double>(key, v));
    } else if (key == "t_final") {
        cfg.t_final = positive(key, parse_number<double>(key, v));
    } else if (key == "epsilon") {
        cfg.model.epsilon = positive(key, parse_number<double>(key, v));
    } else if (key == "kappa") {
        cfg.model.kappa = nonnegative(key, parse_number<double>(key, v));
    } else if (key == "theta0") {
        cfg.model.theta0 = nonnegative(key, parse_number<double>(key, v));
    } else if (key == "scheme") {
        cfg.scheme = parse_scheme(v);
    } else if (key == "A") {
        cfg.A = nonnegative(key, parse_number<double>(key, v));
    } else if (key == "B") {
        cfg.B = nonnegative(key, parse_number<double>(key, v));
    } else if (key == "newton_tol") {
        cfg.newton_tol = positive(key, parse_number<double>(key, v));
    } else if (key == "newton_max_iter") {
        cfg.newton_max_iter = positive_int(key, parse_number<int>(key, v));
    } else if (key == "safeguard_fraction") {
        const double f = parse_number<double>(key, v);
        if (!(f > 0.0 && f < 1.0)) throw ConfigError("safeguard_fraction must lie in (0, 1)");
        cfg.safeguard_fraction = f;
    } else if (key == "initial") {
        cfg.initial = std::string(v);
    } else if (key == "previous") {
        cfg.previous = std::string(v);
    } else if (key == "start_step") {
        cfg.start_step = parse_number<long>(key, v);
        if (cfg.start_step < 0) throw ConfigError("start_step must be nonnegative");
    } else if (key == "output_every") {
        cfg.output_every = parse_number<int>(key, v);
        if (cfg.output_every < 0) throw ConfigError("output_every must be nonnegative");
    } else if (key == "output_dir") {
        cfg.output_dir = std::filesystem::path(std::string(v));
    } else if (key == "seed") {
        cfg.seed = parse_number<std::uint64_t>(key, v);
    } else if (key == "verify_steps") {
        cfg.verify_steps = positive_int(key, parse_number<int>(key, v));
    } else if (key == "gradcheck_samples") {
        cfg.gradcheck_samples = parse_number<int>(key, v);
        if (cfg.gradcheck_samples < 0) throw ConfigError("gradcheck_samples must be nonnegative");
    } else if (key == "study") {
        if (v != "temporal" && v != "spatial") {
            throw ConfigError(fmt::format("study must be temporal or spatial, got '{}'", v));
        }
        cfg.study = std::string(v);
    } else if (key == "levels") {
        cfg.levels = parse_number<int>(key, v);
        if (cfg.levels < 2) throw ConfigError("levels must be at least 2");
    } else if (key == "N_ladder") {
        cfg.N_ladder = parse_ladder(key, v);
    } else if (key == "dt_factor") {
        cfg.dt_factor = positive(key, parse_number<double>(key, v));
    } else if (key == "dt_rule") {
        if (v == "h2") {
            cfg.dt_rule = SpatialDtRule::h_squared;
        } else if (v == "h") {
            cfg.dt_rule = SpatialDtRule::h;
        } else {
            throw ConfigError(fmt::format("dt_rule must be h2 or h, got '{}'", v));
        }
    } else {
        throw ConfigError(fmt::format("unknown key '{}'", key));
    }
}

RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    auto assign = [&cfg](std::string_view text, const std::string& where) {
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("{}: expected key = value", where));
        }
        const std::string key(trim(text.substr(0, eq)));
        if (key.empty()) throw ConfigError(fmt::format("{}: missing key", where));
        try {
            apply_setting(cfg, key, std::string(text.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}: {}", where, e.what()));
        }
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) continue;
        assign(text, fmt::format("line {}", lineno));
    }
    for (const auto& o : overrides) assign(o, fmt::format("override '{}'", o));
    finalize(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    return parse_config(in, overrides);
}

} // namespace chdbc::app
