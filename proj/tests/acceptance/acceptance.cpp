// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: chdbc_acceptance [output_dir]

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include <chdbc/errors.hpp>
#include <chdbc/verify.hpp>

#include "app/commands.hpp"
#include "app/config.hpp"

using namespace chdbc;

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kPi = std::numbers::pi;

double cosine_initial(double x, double y) { return 0.3 * std::cos(2 * kPi * x) * std::cos(kPi * y); }

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Tally {
    int failed = 0;

    void line(int id, bool pass, const std::string& what, double secs, double budget) {
        const bool in_time = secs <= budget;
        const bool ok = pass && in_time;
        if (!ok) ++failed;
        std::cout << fmt::format("[{}] criterion {:>2}: {} ({:.2f}s of {:.0f}s{})", ok ? "PASS" : "FAIL", id,
                                 what, secs, budget, in_time ? "" : ", over budget")
                  << std::endl;
    }
};

std::string worst(const SuiteReport& r) {
    double ratio = 0.0;
    std::string name;
    for (const auto& c : r.checks) {
        const double q = c.tolerance > 0 ? c.value / c.tolerance : c.value;
        if (!(q <= ratio)) {
            ratio = q;
            name = c.name;
        }
    }
    return fmt::format("worst {} at {:.3g} of tolerance", name, ratio);
}

State cosine_state(const Mesh& m) { return State(BulkField::sample(m, cosine_initial)); }

ModelParams model() { return ModelParams{0.1, 1.0, 3.0}; }

SchemeParams params(SchemeKind kind) {
    SchemeParams p;
    p.dt = 1e-3;
    if (kind == SchemeKind::bdf2) p.A = p.B = SchemeParams::min_stabilizer(model());
    return p;
}

std::string describe_structure(const StructureReport& r) {
    const auto& s = r.summary;
    return fmt::format("min margin {:.4f}, mass drift {:.2e}/{:.2e}/{:.2e}, max energy residual {:.2e}",
                       s.min_positivity_margin, s.max_bulk_drift, s.max_bottom_drift, s.max_top_drift,
                       s.max_dissipation_residual);
}

std::string describe_orders(const ConvergenceReport& r) {
    std::string out = "errors";
    for (double e : r.errors) out += fmt::format(" {:.3e}", e);
    out += ", orders";
    for (double q : r.orders) out += fmt::format(" {:.3f}", q);
    return out + fmt::format(", target [{}, {}]", r.order_low, r.order_high);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

} // namespace

int main(int argc, char** argv) {
    const std::filesystem::path out_dir =
        argc > 1 ? std::filesystem::path(argv[1]) : std::filesystem::temp_directory_path() / "chdbc_acceptance";
    std::filesystem::create_directories(out_dir);
    Tally tally;
    const ModelParams m = model();

    {
        const int sizes[] = {8, 16, 32, 64};
        auto t0 = Clock::now();
        const SuiteReport ops = operator_identity_suite(sizes, 20, 2024);
        tally.line(1, ops.passed(), "operator identities, 20 pairs at N=8..64: " + worst(ops), seconds_since(t0),
                   5);
        t0 = Clock::now();
        const SuiteReport ell = elliptic_inverse_suite(sizes, 20, 2025);
        tally.line(2, ell.passed(), "elliptic inverses and eigenfunctions: " + worst(ell), seconds_since(t0), 5);
    }

    {
        const auto t0 = Clock::now();
        SuiteReport all{"correction", {}};
        for (int n : {4, 8, 16, 64}) {
            for (auto& c : verify_correction_identities(Mesh(n)).checks) all.checks.push_back(c);
        }
        tally.line(3, all.passed(), "correction field identities at N=4,8,16,64: " + worst(all), seconds_since(t0),
                   1);
    }

    double max_gradcheck = std::nan("");
    {
        const Mesh mesh(32);
        StructureOptions opts;
        opts.gradcheck_samples = 5;
        opts.seed = 5;
        auto t0 = Clock::now();
        try {
            const StructureReport cs1 =
                run_structure_suite(cosine_state(mesh), m, params(SchemeKind::cs1), SchemeKind::cs1, 500, opts);
            tally.line(4, cs1.passed(), "CS1 structure, 500 steps: " + describe_structure(cs1), seconds_since(t0),
                       120);
            max_gradcheck = cs1.summary.max_gradcheck;
            if (cs1.gradchecks.size() != 5) max_gradcheck = std::nan("");
            std::ofstream os(out_dir / "structure_cs1.csv");
            cs1.write_csv(os);
        } catch (const std::exception& e) {
            tally.line(4, false, fmt::format("CS1 structure run failed: {}", e.what()), seconds_since(t0), 120);
        }

        t0 = Clock::now();
        try {
            const StructureReport bdf2 =
                run_structure_suite(cosine_state(mesh), m, params(SchemeKind::bdf2), SchemeKind::bdf2, 500, {});
            tally.line(5, bdf2.passed(), "BDF2 structure, 500 steps: " + describe_structure(bdf2),
                       seconds_since(t0), 180);
            std::ofstream os(out_dir / "structure_bdf2.csv");
            bdf2.write_csv(os);
        } catch (const std::exception& e) {
            tally.line(5, false, fmt::format("BDF2 structure run failed: {}", e.what()), seconds_since(t0), 180);
        }
    }

    for (SchemeKind kind : {SchemeKind::cs1, SchemeKind::bdf2}) {
        const int id = kind == SchemeKind::cs1 ? 6 : 7;
        const auto t0 = Clock::now();
        try {
            TemporalStudy study;
            study.scheme = kind;
            study.params = params(kind);
            const ConvergenceReport r = temporal_order_study(cosine_state(Mesh(64)), m, study);
            std::ofstream os(out_dir / fmt::format("temporal_{}.csv", to_string(kind)));
            r.write_csv(os);
            tally.line(id, r.pass, fmt::format("{} temporal order: {}", to_string(kind), describe_orders(r)),
                       seconds_since(t0), 600);
        } catch (const std::exception& e) {
            tally.line(id, false, fmt::format("{} temporal study failed: {}", to_string(kind), e.what()),
                       seconds_since(t0), 600);
        }
    }

    {
        const auto t0 = Clock::now();
        try {
            SpatialStudy study;
            study.params = params(SchemeKind::cs1);
            const ConvergenceReport r = spatial_order_study(cosine_initial, m, study);
            std::ofstream os(out_dir / "spatial_cs1.csv");
            r.write_csv(os);
            tally.line(8, r.pass, "CS1 spatial order: " + describe_orders(r), seconds_since(t0), 600);
        } catch (const std::exception& e) {
            tally.line(8, false, fmt::format("CS1 spatial study failed: {}", e.what()), seconds_since(t0), 600);
        }
    }

    tally.line(9, max_gradcheck <= 1e-6,
               fmt::format("variational residual at 5 sampled CS1 steps: max {:.3e} (tolerance 1e-6)", max_gradcheck),
               0.0, 1);

    {
        const auto t0 = Clock::now();
        bool same = false;
        std::string what;
        try {
            std::string files[2];
            for (int k = 0; k < 2; ++k) {
                std::istringstream cfg_text("N = 32\ndt = 1e-3\nt_final = 0.5\nscheme = cs1\ninitial = cosine:0.3\n"
                                            "epsilon = 0.1\nkappa = 1\ntheta0 = 3\n");
                app::RunConfig cfg = app::parse_config(cfg_text);
                cfg.output_dir = out_dir / fmt::format("repeat_{}", k);
                std::ostringstream sink_out, sink_err;
                const int code = app::cmd_run(cfg, sink_out, sink_err);
                if (code != app::kSuccess) throw std::runtime_error(fmt::format("run exited {}", code));
                files[k] = slurp(*cfg.output_dir / "energy.csv");
            }
            same = !files[0].empty() && files[0] == files[1];
            what = fmt::format("two 500-step CS1 runs, energy.csv {} ({} bytes)", same ? "identical" : "differs",
                               files[0].size());
        } catch (const std::exception& e) {
            what = fmt::format("repeat run failed: {}", e.what());
        }
        tally.line(10, same, what, seconds_since(t0), 600);
    }

    std::cout << fmt::format("acceptance: {} of 10 criteria failed", tally.failed) << std::endl;
    return tally.failed == 0 ? 0 : 1;
}
