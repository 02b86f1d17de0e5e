#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "chdbc/errors.hpp"
#include "chdbc/field_io.hpp"
#include "chdbc/verify.hpp"

namespace chdbc {

StepRecord initial_record(const State& s, const ModelParams& m, SchemeKind kind, double t0,
                          long step) {
    StepRecord r;
    r.step = step;
    r.t = t0;
    r.energy = energy_Eh(s, m).total;
    if (kind == SchemeKind::bdf2) r.modified_energy = r.energy;
    r.masses = masses_of(s);
    r.positivity_margin = s.positivity_margin();
    return r;
}

StepRecord record_of(const Integrator& integ) {
    const StepResult& last = *integ.last();
    StepRecord r;
    r.step = integ.step_index();
    r.t = integ.time();
    r.energy = last.diag.energy;
    r.modified_energy = last.diag.modified_energy;
    r.masses = last.diag.masses;
    r.dissipation_residual = last.diag.dissipation_residual;
    r.positivity_margin = last.diag.positivity_margin;
    r.newton_iters = last.diag.newton_iters;
    return r;
}

void write_energy_header(std::ostream& os) {
    os << "step,t,E_h,E_h_modified,bulk_mass,bottom_mass,top_mass,dissipation_residual,"
          "positivity_margin,newton_iters\n";
}

void write_energy_row(std::ostream& os, const StepRecord& r) {
    os << r.step << ',' << format_double(r.t) << ',' << format_double(r.energy) << ','
       << (r.modified_energy ? format_double(*r.modified_energy) : std::string()) << ','
       << format_double(r.masses.bulk) << ',' << format_double(r.masses.bottom) << ','
       << format_double(r.masses.top) << ',' << format_double(r.dissipation_residual) << ','
       << format_double(r.positivity_margin) << ',' << r.newton_iters << '\n';
}

SuiteReport StructureReport::checks() const {
    SuiteReport r{fmt::format("structure ({}, {} steps)", to_string(scheme), series.size()), {}};
    r.checks.push_back(check_at_most("bulk mass drift", summary.max_bulk_drift, tol.mass_drift));
    r.checks.push_back(check_at_most("bottom mass drift", summary.max_bottom_drift, tol.mass_drift));
    r.checks.push_back(check_at_most("top mass drift", summary.max_top_drift, tol.mass_drift));
    r.checks.push_back(check_at_most(scheme == SchemeKind::cs1 ? "energy law violation"
                                                               : "modified energy increase",
                                     summary.max_dissipation_residual, tol.dissipation));
    Check margin{"positivity margin (must be > 0)", summary.min_positivity_margin, 0.0,
                 summary.min_positivity_margin > 0.0};
    r.checks.push_back(margin);
    if (!gradchecks.empty()) {
        r.checks.push_back(
            check_at_most("variational gradient residual", summary.max_gradcheck, tol.gradcheck));
    }
    return r;
}

void StructureReport::write_csv(std::ostream& os) const {
    write_energy_header(os);
    write_energy_row(os, initial);
    for (const StepRecord& r : series) write_energy_row(os, r);
}

StructureReport run_structure_suite(const State& initial, const ModelParams& m,
                                    const SchemeParams& p, SchemeKind scheme, int steps,
                                    const StructureOptions& opts) {
    StructureReport rep;
    rep.scheme = scheme;
    rep.tol = opts.tol;
    rep.initial = initial_record(initial, m, scheme);
    rep.series.reserve(static_cast<std::size_t>(std::max(steps, 0)));

    // Steps (1-based) at which the variational residual is sampled.
    std::vector<long> sample;
    if (opts.gradcheck_samples > 0 && steps > 0) {
        std::vector<long> all(static_cast<std::size_t>(steps));
        std::iota(all.begin(), all.end(), 1L);
        std::mt19937_64 rng(opts.seed);
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(opts.gradcheck_samples)));
        std::sort(all.begin(), all.end());
        sample = std::move(all);
    }

    Integrator integ(initial, m, p, scheme);
    StructureSummary& s = rep.summary;
    s.min_positivity_margin = rep.initial.positivity_margin;
    s.max_dissipation_residual = -std::numeric_limits<double>::infinity();
    const Masses m0 = rep.initial.masses;
    for (int k = 1; k <= steps; ++k) {
        const bool check = std::binary_search(sample.begin(), sample.end(), static_cast<long>(k));
        std::optional<State> before;
        std::optional<State> before_prev;
        if (check) {
            before = integ.current();
            before_prev = integ.previous();
        }
        try {
            integ.advance();
        } catch (const Error& e) {
            throw StepError(k, e.what());
        }
        const StepRecord r = record_of(integ);
        s.max_bulk_drift = std::max(s.max_bulk_drift, std::abs(r.masses.bulk - m0.bulk));
        s.max_bottom_drift = std::max(s.max_bottom_drift, std::abs(r.masses.bottom - m0.bottom));
        s.max_top_drift = std::max(s.max_top_drift, std::abs(r.masses.top - m0.top));
        s.max_dissipation_residual = std::max(s.max_dissipation_residual, r.dissipation_residual);
        s.min_positivity_margin = std::min(s.min_positivity_margin, r.positivity_margin);
        s.max_newton_iters = std::max(s.max_newton_iters, r.newton_iters);
        rep.series.push_back(r);

        if (check) {
            const State& out = integ.current();
            const double g = (scheme == SchemeKind::bdf2 && before_prev)
                                 ? functional_Jhn_gradcheck(out, *before, *before_prev, m, p)
                                 : functional_Fhn_gradcheck(out, *before, m, p);
            rep.gradchecks.emplace_back(k, g);
            s.max_gradcheck = std::max(s.max_gradcheck, g);
        }
    }
    if (steps <= 0) s.max_dissipation_residual = 0.0;
    return rep;
}

} // namespace chdbc
