#include "app/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chdbc/errors.hpp>
#include <chdbc/field_io.hpp>

#include "app/presets.hpp"

namespace chdbc::app {

namespace {

constexpr double kEnergySlack = 1e-10;

template <class Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const StepError& e) {
        err << "solver error at step " << e.step() << ": " << e.what() << '\n';
        return kSolverError;
    } catch (const Error& e) {
        err << "solver error: " << e.what() << '\n';
        return kSolverError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kSolverError;
    }
}

void print_warnings(const RunConfig& cfg, std::ostream& err) {
    for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    return os;
}

void snapshot(const std::filesystem::path& dir, long step, const State& s) {
    save_state(dir / fmt::format("phi_{}.csv", step), s);
}

bool energy_law_applies(const RunConfig& cfg, const SchemeParams& p) {
    if (cfg.scheme == SchemeKind::cs1) return true;
    const double floor = SchemeParams::min_stabilizer(cfg.model);
    return p.A >= floor && p.B >= floor;
}

} // namespace

int cmd_run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        print_warnings(cfg, err);
        if (!cfg.output_dir) throw ConfigError("run needs output_dir");
        const std::filesystem::path dir = *cfg.output_dir;
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw ConfigError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

        const Mesh mesh(cfg.N);
        const SchemeParams p = cfg.scheme_params();
        const long last = cfg.total_steps();
        State initial = make_initial(cfg.initial, mesh, cfg.seed);

        std::optional<Integrator> integ;
        if (cfg.scheme == SchemeKind::bdf2 && !cfg.previous.empty()) {
            State prev = load_state(cfg.previous);
            require_same_mesh(prev.mesh(), mesh);
            integ.emplace(std::move(initial), std::move(prev), cfg.model, p, 0.0, cfg.start_step);
        } else {
            integ.emplace(std::move(initial), cfg.model, p, cfg.scheme, 0.0, cfg.start_step);
        }

        std::ofstream energy = open_output(dir / "energy.csv");
        write_energy_header(energy);
        StepRecord first =
            initial_record(integ->current(), cfg.model, cfg.scheme, integ->time(), cfg.start_step);
        first.modified_energy = cfg.scheme == SchemeKind::bdf2 ? integ->modified_energy()
                                                               : std::nullopt;
        write_energy_row(energy, first);
        snapshot(dir, cfg.start_step, integ->current());

        const bool check_energy = energy_law_applies(cfg, p);
        int violations = 0;
        auto violation = [&](long step, const std::string& what) {
            ++violations;
            err << fmt::format("structure violation at step {}: {}\n", step, what);
        };

        const auto started = std::chrono::steady_clock::now();
        for (long k = cfg.start_step + 1; k <= last; ++k) {
            try {
                integ->advance();
            } catch (const Error& e) {
                energy.flush();
                throw StepError(k, e.what());
            }
            const StepRecord r = record_of(*integ);
            write_energy_row(energy, r);

            const double mass_tol = 10.0 * p.newton_tol * static_cast<double>(k - cfg.start_step);
            const double drifts[] = {std::abs(r.masses.bulk - first.masses.bulk),
                                     std::abs(r.masses.bottom - first.masses.bottom),
                                     std::abs(r.masses.top - first.masses.top)};
            for (double d : drifts) {
                if (d > mass_tol) violation(k, fmt::format("mass drift {:.3e} > {:.3e}", d, mass_tol));
            }
            if (!(r.positivity_margin > 0.0)) violation(k, "positivity margin not positive");
            if (check_energy && r.dissipation_residual > kEnergySlack) {
                violation(k, fmt::format("energy increase {:.3e}", r.dissipation_residual));
            }
            if (k == last || (cfg.output_every > 0 && k % cfg.output_every == 0)) {
                snapshot(dir, k, integ->current());
            }
        }
        energy.flush();
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const auto& final_state = integ->current();
        fmt::print(out, "{} run: N={} steps {}..{} dt={} in {:.2f}s\n", to_string(cfg.scheme),
                   cfg.N, cfg.start_step, last, cfg.dt, secs);
        fmt::print(out, "  final E_h={:.12g} margin={:.6f} violations={}\n",
                   energy_Eh(final_state, cfg.model).total, final_state.positivity_margin(),
                   violations);
        return violations == 0 ? kSuccess : kVerificationFailure;
    });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        print_warnings(cfg, err);
        static constexpr int kIdentitySizes[] = {8, 16, 32};
        static constexpr int kCorrectionSizes[] = {4, 8, 16, 64};

        std::vector<SuiteReport> suites;
        suites.push_back(operator_identity_suite(kIdentitySizes, 20, cfg.seed));
        suites.push_back(elliptic_inverse_suite(kIdentitySizes, 20, cfg.seed + 1));
        SuiteReport correction{"correction identities", {}};
        for (int n : kCorrectionSizes) {
            for (auto& c : verify_correction_identities(Mesh(n)).checks) correction.checks.push_back(c);
        }
        suites.push_back(std::move(correction));

        const Mesh mesh(cfg.N);
        StructureOptions opts;
        opts.gradcheck_samples = cfg.gradcheck_samples;
        opts.seed = cfg.seed;
        const StructureReport structure =
            run_structure_suite(make_initial(cfg.initial, mesh, cfg.seed), cfg.model,
                                cfg.scheme_params(), cfg.scheme, cfg.verify_steps, opts);
        suites.push_back(structure.checks());

        bool ok = true;
        for (const auto& s : suites) {
            s.print(out);
            ok = ok && s.passed();
        }
        if (cfg.output_dir) {
            std::filesystem::create_directories(*cfg.output_dir);
            std::ofstream os = open_output(*cfg.output_dir / "structure.csv");
            structure.write_csv(os);
        }
        fmt::print(out, "verify: {}\n", ok ? "PASS" : "FAIL");
        return ok ? kSuccess : kVerificationFailure;
    });
}

int cmd_convergence(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        print_warnings(cfg, err);
        SchemeParams p = cfg.scheme_params();
        ConvergenceReport rep;
        if (cfg.study == "temporal") {
            TemporalStudy study;
            study.scheme = cfg.scheme;
            study.t_final = cfg.t_final;
            study.base_dt = cfg.dt;
            study.levels = cfg.levels;
            study.params = p;
            rep = temporal_order_study(make_initial(cfg.initial, Mesh(cfg.N), cfg.seed), cfg.model,
                                       study);
        } else {
            const auto f = analytic_preset(cfg.initial);
            if (!f) throw ConfigError("spatial study needs an analytic initial preset (constant or cosine)");
            SpatialStudy study;
            study.scheme = cfg.scheme;
            study.t_final = cfg.t_final;
            study.n_ladder = cfg.N_ladder;
            study.dt_factor = cfg.dt_factor;
            study.rule = cfg.dt_rule;
            study.params = p;
            rep = spatial_order_study(*f, cfg.model, study);
        }
        rep.print(out);
        if (cfg.output_dir) {
            std::filesystem::create_directories(*cfg.output_dir);
            std::ofstream os = open_output(*cfg.output_dir / "convergence.csv");
            rep.write_csv(os);
        }
        return rep.pass ? kSuccess : kVerificationFailure;
    });
}

} // namespace chdbc::app
