#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "chdbc/elliptic.hpp"
#include "chdbc/errors.hpp"
#include "chdbc/field_io.hpp"
#include "chdbc/verify.hpp"

namespace chdbc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* kHeader =
    "Cauchy refinement study: no closed-form solution is available, so each error is the "
    "difference between consecutive levels of the ladder. The time-integral term uses "
    "sqrt(dt sum_k ...) on the coarser level's time grid.";

// Trajectory of phi at every step 0..steps.
std::vector<BulkField> trajectory(const State& initial, const ModelParams& m,
                                  const SchemeParams& p, SchemeKind scheme, long steps) {
    std::vector<BulkField> out;
    out.reserve(static_cast<std::size_t>(steps + 1));
    out.push_back(initial.phi());
    Integrator integ(initial, m, p, scheme);
    for (long k = 1; k <= steps; ++k) {
        try {
            integ.advance();
        } catch (const Error& e) {
            throw StepError(k, fmt::format("dt={:.6g}, N={}: {}", p.dt, initial.mesh().n(), e.what()));
        }
        out.push_back(integ.current().phi());
    }
    return out;
}

long steps_for(double t_final, double dt) {
    const double raw = t_final / dt;
    const long steps = std::lround(raw);
    if (steps <= 0 || std::abs(raw - static_cast<double>(steps)) > 1e-9 * raw) {
        throw std::invalid_argument(
            fmt::format("t_final={} is not an integer multiple of dt={}", t_final, dt));
    }
    return steps;
}

template <class F>
F remove_mean(F f, double& removed) {
    double m = 0.0;
    if constexpr (std::is_same_v<F, BulkField>) {
        m = mean(f);
    } else {
        m = boundary_mean(f);
    }
    for (double& v : f.values()) v -= m;
    removed = std::max(removed, std::abs(m));
    return f;
}

void finish(ConvergenceReport& r) {
    r.orders = observed_orders(r.errors);
    for (std::size_t k = 0; k < r.errors.size(); ++k) {
        if (r.errors[k] < kDegenerateError) {
            r.notes.push_back(fmt::format("error {} is {:.3e}, below {:.0e}: order undefined", k,
                                          r.errors[k], kDegenerateError));
        }
    }
    const double q = r.finest_order();
    r.pass = std::isfinite(q) && q >= r.order_low && q <= r.order_high;
}

} // namespace

double composite_error(std::span<const BulkField> a, std::span<const BulkField> b, double dt,
                       const ModelParams& m, double* mean_defect) {
    if (a.size() != b.size() || a.empty()) {
        throw std::invalid_argument("composite_error needs two trajectories of equal, nonzero length");
    }
    const Mesh& mesh = a.front().mesh();
    const int n = mesh.n();
    const std::size_t last = a.size() - 1;

    double removed = 0.0;
    const BulkField e = a[last] - b[last];
    const double final_part = hminus1_norm(remove_mean(e, removed)) +
                              hminus1_gamma_norm(remove_mean(e.row(0), removed)) +
                              hminus1_gamma_norm(remove_mean(e.row(n), removed));

    const double eps = m.epsilon;
    double sum = 0.0;
    for (std::size_t k = 1; k <= last; ++k) {
        const BulkField d = a[k] - b[k];
        sum += eps * eps * grad_norm_sq(d) +
               eps * m.kappa * (dx_norm_sq_gamma(d.row(0)) + dx_norm_sq_gamma(d.row(n)));
    }
    if (mean_defect) *mean_defect = removed;
    return final_part + std::sqrt(dt * sum);
}

BulkField restrict_to_coarse(const BulkField& fine) {
    const int nf = fine.mesh().n();
    if (nf % 2 != 0 || nf / 2 < Mesh::kMinCells) {
        throw std::invalid_argument(fmt::format("cannot restrict a mesh with N={}", nf));
    }
    const Mesh coarse(nf / 2);
    BulkField out(coarse);
    for (int j = 0; j <= coarse.n(); ++j) {
        for (int i = 0; i < coarse.n(); ++i) {
            out(i, j) = 0.5 * (fine(2 * i, 2 * j) + fine(2 * i + 1, 2 * j));
        }
    }
    return out;
}

std::vector<double> observed_orders(std::span<const double> errors) {
    std::vector<double> q;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        const double a = errors[k];
        const double b = errors[k + 1];
        q.push_back((a < kDegenerateError || b < kDegenerateError) ? kNaN : std::log2(a / b));
    }
    return q;
}

double ConvergenceReport::finest_order() const { return orders.empty() ? kNaN : orders.back(); }

void ConvergenceReport::print(std::ostream& os) const {
    os << fmt::format("== {} order study ({}) ==\n{}\n", study, to_string(scheme), header);
    for (std::size_t k = 0; k < levels.size(); ++k) {
        os << fmt::format("  level {}: N={} dt={:.6g} steps={}", k, levels[k].n, levels[k].dt,
                          levels[k].steps);
        if (k < errors.size()) {
            os << fmt::format("  error(vs next)={:.6e} mean removed={:.1e}", errors[k],
                              mean_defects[k]);
        }
        if (k < orders.size()) os << fmt::format("  order={:.4f}", orders[k]);
        os << '\n';
    }
    for (const auto& note : notes) os << "  note: " << note << '\n';
    os << fmt::format("  finest-pair order {:.4f}, target {} in [{}, {}]: {}\n", finest_order(),
                      target_order, order_low, order_high, pass ? "PASS" : "FAIL");
}

void ConvergenceReport::write_csv(std::ostream& os) const {
    os << "level,N,dt,steps,error,mean_removed,order\n";
    for (std::size_t k = 0; k < levels.size(); ++k) {
        os << k << ',' << levels[k].n << ',' << format_double(levels[k].dt) << ','
           << levels[k].steps << ',' << (k < errors.size() ? format_double(errors[k]) : "") << ','
           << (k < mean_defects.size() ? format_double(mean_defects[k]) : "") << ','
           << (k < orders.size() ? format_double(orders[k]) : "") << '\n';
    }
}

ConvergenceReport temporal_order_study(const State& initial, const ModelParams& m,
                                       const TemporalStudy& study) {
    if (study.levels < 2) throw std::invalid_argument("temporal study needs at least 2 levels");
    if (study.refinement < 1) throw std::invalid_argument("refinement ratio must be >= 1");

    ConvergenceReport rep;
    rep.header = kHeader;
    rep.study = "temporal";
    rep.scheme = study.scheme;
    rep.target_order = study.scheme == SchemeKind::cs1 ? 1.0 : 2.0;
    rep.order_low = study.scheme == SchemeKind::cs1 ? 0.8 : 1.7;
    rep.order_high = study.scheme == SchemeKind::cs1 ? 1.2 : 2.3;

    double dt = study.base_dt;
    for (int l = 0; l < study.levels; ++l) {
        rep.levels.push_back({initial.mesh().n(), dt, steps_for(study.t_final, dt)});
        dt /= study.refinement;
    }

    std::vector<std::vector<BulkField>> runs(rep.levels.size());
    parallel_for(runs.size(), [&](std::size_t l) {
        SchemeParams p = study.params;
        p.dt = rep.levels[l].dt;
        runs[l] = trajectory(initial, m, p, study.scheme, rep.levels[l].steps);
    });

    for (std::size_t l = 0; l + 1 < runs.size(); ++l) {
        const auto stride = static_cast<std::size_t>(study.refinement);
        std::vector<BulkField> fine;
        for (std::size_t k = 0; k < runs[l + 1].size(); k += stride) fine.push_back(runs[l + 1][k]);
        double removed = 0.0;
        rep.errors.push_back(composite_error(runs[l], fine, rep.levels[l].dt, m, &removed));
        rep.mean_defects.push_back(removed);
    }
    finish(rep);
    return rep;
}

ConvergenceReport spatial_order_study(const std::function<double(double, double)>& initial,
                                      const ModelParams& m, const SpatialStudy& study) {
    const auto& ladder = study.n_ladder;
    if (ladder.size() < 2) throw std::invalid_argument("spatial study needs at least 2 meshes");
    for (std::size_t l = 0; l + 1 < ladder.size(); ++l) {
        if (ladder[l + 1] != 2 * ladder[l]) {
            throw std::invalid_argument("spatial ladder must double N at every level");
        }
    }

    ConvergenceReport rep;
    rep.header = std::string(kHeader) +
                 " Finer solutions are restricted to the coarser mesh by x pair averages and y "
                 "injection.";
    rep.study = "spatial";
    rep.scheme = study.scheme;
    rep.target_order = 2.0;
    rep.order_low = 1.7;
    rep.order_high = 2.3;

    const double h0 = 1.0 / ladder.front();
    const int power = study.rule == SpatialDtRule::h_squared ? 2 : 1;
    const double dt_target = study.dt_factor * std::pow(h0, power);
    const long n0 = static_cast<long>(std::ceil(study.t_final / dt_target - 1e-9));
    const long ratio = power == 2 ? 4 : 2;
    long steps = std::max(1L, n0);
    for (const int n : ladder) {
        rep.levels.push_back({n, study.t_final / static_cast<double>(steps), steps});
        steps *= ratio;
    }
    if (std::abs(rep.levels.front().dt - dt_target) > 1e-12 * dt_target) {
        rep.notes.push_back(fmt::format("coarsest dt adjusted from {:.6g} to {:.6g} to land on t_final",
                                        dt_target, rep.levels.front().dt));
    }

    std::vector<std::vector<BulkField>> runs(rep.levels.size());
    parallel_for(runs.size(), [&](std::size_t l) {
        const Mesh mesh(rep.levels[l].n);
        SchemeParams p = study.params;
        p.dt = rep.levels[l].dt;
        runs[l] = trajectory(State(BulkField::sample(mesh, initial)), m, p, study.scheme,
                             rep.levels[l].steps);
    });

    for (std::size_t l = 0; l + 1 < runs.size(); ++l) {
        std::vector<BulkField> fine;
        for (std::size_t k = 0; k < runs[l + 1].size(); k += static_cast<std::size_t>(ratio)) {
            fine.push_back(restrict_to_coarse(runs[l + 1][k]));
        }
        double removed = 0.0;
        rep.errors.push_back(composite_error(runs[l], fine, rep.levels[l].dt, m, &removed));
        rep.mean_defects.push_back(removed);
    }
    finish(rep);
    return rep;
}

} // namespace chdbc
