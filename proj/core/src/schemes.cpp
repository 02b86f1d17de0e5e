#include "chdbc/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "chdbc/errors.hpp"
#include "newton.hpp"

namespace chdbc {

std::string_view to_string(SchemeKind kind) noexcept {
    return kind == SchemeKind::cs1 ? "cs1" : "bdf2";
}

SchemeKind parse_scheme(std::string_view name) {
    if (name == "cs1") return SchemeKind::cs1;
    if (name == "bdf2") return SchemeKind::bdf2;
    throw ConfigError(fmt::format("unknown scheme '{}' (expected cs1 or bdf2)", name));
}

void SchemeParams::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(A >= 0.0)) throw std::invalid_argument("A must be nonnegative");
    if (!(B >= 0.0)) throw std::invalid_argument("B must be nonnegative");
    if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
    if (newton_max_iter <= 0) throw std::invalid_argument("newton_max_iter must be positive");
    if (!(safeguard_fraction > 0.0 && safeguard_fraction < 1.0)) {
        throw std::invalid_argument("safeguard_fraction must lie in (0, 1)");
    }
}

NewtonGuess NewtonGuess::from(const StepResult& r) {
    return {r.state.phi(),     r.diag.mu,          r.diag.mu_bottom,
            r.diag.mu_top,     r.diag.flux_bottom, r.diag.flux_top};
}

namespace {

detail::Unknowns unknowns_from_guess(const NewtonGuess& g, const Mesh& mesh) {
    require_same_mesh(mesh, g.phi.mesh());
    const auto values = g.phi.values();
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::abs(v) < 1.0; })) {
        throw DomainError("Newton guess leaves (-1, 1)");
    }
    return {g.phi, g.mu, g.mu_bottom, g.mu_top, g.flux_bottom, g.flux_top};
}

// Shared tail of both steppers: package the Newton solution and evaluate
// everything except the dissipation residual.
StepResult finish(const detail::NewtonOutcome& out, const ModelParams& m) {
    const detail::Unknowns& x = out.x;
    State next(x.phi);
    StepDiagnostics d{x.mu,
                      x.mu_bottom,
                      x.mu_top,
                      x.flux_bottom,
                      x.flux_top,
                      std::nullopt,
                      std::nullopt,
                      out.iterations,
                      out.residual,
                      out.tolerance,
                      masses_of(next),
                      energy_Eh(next, m).total,
                      std::nullopt,
                      0.0,
                      next.positivity_margin()};
    return {std::move(next), std::move(d)};
}

double tol_scale(const State& s) { return std::max(1.0, std::sqrt(norm2_sq(s.phi()))); }

} // namespace

StepResult step_cs1(const State& s_n, const ModelParams& m, const SchemeParams& p,
                    const StepOptions& opts) {
    m.validate();
    p.validate();
    detail::StepProblem pb{m, p, 1.0, 0.0, 0.0, s_n.phi(), s_n.phi(), s_n.phi(), tol_scale(s_n)};
    detail::Unknowns x0 = opts.guess ? unknowns_from_guess(*opts.guess, s_n.mesh())
                                     : detail::initial_unknowns(pb, s_n.phi());
    const detail::NewtonOutcome out = detail::solve_step(pb, std::move(x0));

    StepResult r = finish(out, m);
    const double eps2 = m.epsilon * m.epsilon;
    r.diag.ghost_bottom = (1.0 / eps2) * r.diag.flux_bottom;
    r.diag.ghost_top = (1.0 / eps2) * r.diag.flux_top;
    const double dissipation = grad_norm_sq(r.diag.mu) + dx_norm_sq_gamma(r.diag.mu_bottom) +
                               dx_norm_sq_gamma(r.diag.mu_top);
    r.diag.dissipation_residual = r.diag.energy + p.dt * dissipation - energy_Eh(s_n, m).total;
    return r;
}

StepResult step_bdf2(const State& s_n, const State& s_nm1, const ModelParams& m,
                     const SchemeParams& p, const StepOptions& opts) {
    m.validate();
    p.validate();
    require_same_mesh(s_n.mesh(), s_nm1.mesh());
    const BulkField& cur = s_n.phi();
    const BulkField& old = s_nm1.phi();

    detail::StepProblem pb{m,
                           p,
                           1.5,
                           p.A,
                           p.B,
                           2.0 * cur - 0.5 * old,
                           2.0 * cur - old,
                           cur,
                           tol_scale(s_n)};

    detail::Unknowns x0 = [&] {
        if (opts.guess) return unknowns_from_guess(*opts.guess, s_n.mesh());
        // Linear extrapolation, pulled back toward phi^n if it leaves (-1, 1).
        const BulkField slope = cur - old;
        const double t = std::min(
            1.0, p.safeguard_fraction * detail::max_admissible_step(cur, slope));
        return detail::initial_unknowns(pb, cur + t * slope);
    }();
    const detail::NewtonOutcome out = detail::solve_step(pb, std::move(x0));

    StepResult r = finish(out, m);
    if (opts.previous_normals) {
        const double dt_a = p.A * p.dt;
        const double denom = m.epsilon * m.epsilon + dt_a;
        r.diag.ghost_bottom =
            (1.0 / denom) * (r.diag.flux_bottom + dt_a * opts.previous_normals->bottom);
        r.diag.ghost_top = (1.0 / denom) * (r.diag.flux_top + dt_a * opts.previous_normals->top);
    }
    const double e_new = modified_energy(r.state, s_n, m, p);
    const double e_old = opts.previous_modified_energy
                             ? *opts.previous_modified_energy
                             : modified_energy(s_n, s_nm1, m, p);
    r.diag.modified_energy = e_new;
    r.diag.dissipation_residual = e_new - e_old;
    return r;
}

} // namespace chdbc
