#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include <chdbc/errors.hpp>
#include <chdbc/verify.hpp>

#include "oracles.hpp"

using namespace chdbc;

namespace {

constexpr double kPi = std::numbers::pi;

State cosine_state(const Mesh& m, double a) {
    return State(BulkField::sample(
        m, [a](double x, double y) { return a * std::cos(2 * kPi * x) * std::cos(kPi * y); }));
}

} // namespace

TEST(CheckAtMost, NaNFails) {
    EXPECT_TRUE(check_at_most("a", 1.0, 1.0).pass);
    EXPECT_FALSE(check_at_most("b", 1.1, 1.0).pass);
    EXPECT_FALSE(check_at_most("c", std::nan(""), 1.0).pass);
    SuiteReport r{"s", {check_at_most("a", 0.0, 1.0), check_at_most("b", 2.0, 1.0)}};
    EXPECT_FALSE(r.passed());
    std::ostringstream os;
    r.print(os);
    EXPECT_NE(os.str().find("FAIL"), std::string::npos);
}

TEST(IdentitySuites, PassOnSmallMeshes) {
    const int sizes[] = {4, 8, 16};
    const SuiteReport ops = operator_identity_suite(sizes, 5, 1);
    EXPECT_TRUE(ops.passed());
    EXPECT_FALSE(ops.checks.empty());
    const SuiteReport ell = elliptic_inverse_suite(sizes, 5, 2);
    EXPECT_TRUE(ell.passed());
}

TEST(CorrectionField, ClosedFormValues) {
    const Mesh m(8);
    const BulkField c = correction_field(0.25, m);
    for (int i = 0; i < 8; ++i) {
        EXPECT_EQ(c(i, 0), 0.0);
        EXPECT_EQ(c(i, 8), 0.0);
        EXPECT_NEAR(c(i, 4), 0.5, 1e-15); // y = 1/2: 1 - cos(pi) = 2
        EXPECT_NEAR(c(i, 2), 0.25, 1e-15);
    }
    EXPECT_NEAR(oracle::inner(c, BulkField(m, 1.0)), 0.25, 1e-15);
}

TEST(CorrectionField, IdentitiesHoldOnAcceptanceMeshes) {
    for (int n : {4, 8, 16, 64}) {
        const SuiteReport r = verify_correction_identities(Mesh(n));
        EXPECT_TRUE(r.passed()) << "N=" << n;
        EXPECT_GE(r.checks.size(), 3u);
    }
}

TEST(ObservedOrders, RecoversSyntheticRates) {
    for (double q : {1.0, 2.0, 1.5}) {
        std::vector<double> e;
        for (int k = 0; k < 4; ++k) e.push_back(0.3 * std::pow(2.0, -q * k));
        for (double got : observed_orders(e)) EXPECT_NEAR(got, q, 1e-12);
    }
    const std::vector<double> degenerate{1e-3, 1e-14};
    EXPECT_TRUE(std::isnan(observed_orders(degenerate)[0]));
}

TEST(CompositeError, CosineModeClosedForm) {
    const Mesh m(16);
    const ModelParams p{0.1, 2.0, 3.0};
    const double c = 0.01;
    const double dt = 0.5;
    const BulkField e = BulkField::sample(m, [c](double x, double) { return c * std::cos(2 * kPi * x); });
    const std::vector<BulkField> a{BulkField(m), e};
    const std::vector<BulkField> b{BulkField(m), BulkField(m)};
    const double lam = oracle::lambda(m, 1);
    const double final_part = 3.0 * c / std::sqrt(2.0 * lam);
    const double grad = p.epsilon * p.epsilon * c * c * lam / 2 + p.epsilon * p.kappa * c * c * lam;
    double removed = -1.0;
    EXPECT_NEAR(composite_error(a, b, dt, p, &removed), final_part + std::sqrt(dt * grad), 1e-15);
    EXPECT_NEAR(removed, 0.0, 1e-17);
}

TEST(CompositeError, IsASeminorm) {
    std::mt19937_64 rng(9);
    const Mesh m(8);
    const ModelParams p;
    auto traj = [&] {
        std::vector<BulkField> t;
        for (int k = 0; k < 3; ++k) t.push_back(oracle::random_field(m, rng));
        return t;
    };
    const auto a = traj();
    const auto b = traj();
    const auto c = traj();
    const double ab = composite_error(a, b, 0.1, p);
    EXPECT_NEAR(ab, composite_error(b, a, 0.1, p), 1e-14 * ab);
    EXPECT_LE(ab, composite_error(a, c, 0.1, p) + composite_error(c, b, 0.1, p) + 1e-14);
    EXPECT_EQ(composite_error(a, a, 0.1, p), 0.0);
    // Constant offsets are invisible at the final time; gradients ignore them too.
    std::vector<BulkField> shifted = a;
    for (auto& f : shifted) f += BulkField(m, 0.3);
    double removed = 0.0;
    EXPECT_NEAR(composite_error(a, shifted, 0.1, p, &removed), 0.0, 1e-12);
    EXPECT_NEAR(removed, 0.3, 1e-14);
}

TEST(RestrictToCoarse, ExactOnConstantsAndCosine) {
    const Mesh fine(16);
    const BulkField r = restrict_to_coarse(BulkField(fine, 0.7));
    EXPECT_EQ(r.mesh().n(), 8);
    for (double v : r.values()) EXPECT_DOUBLE_EQ(v, 0.7);

    const BulkField f = BulkField::sample(
        fine, [](double x, double y) { return std::cos(2 * kPi * x) * (1 + y * y); });
    const BulkField rc = restrict_to_coarse(f);
    const Mesh coarse(8);
    const double damp = std::cos(kPi * fine.h());
    for (int j = 0; j <= 8; ++j) {
        const double y = coarse.y_node(j);
        for (int i = 0; i < 8; ++i) {
            EXPECT_NEAR(rc(i, j), std::cos(2 * kPi * coarse.x_center(i)) * damp * (1 + y * y), 1e-15);
        }
    }
    EXPECT_THROW(restrict_to_coarse(BulkField(Mesh(6))), std::invalid_argument);
}

TEST(TemporalStudy, UnitRefinementIsDegenerate) {
    TemporalStudy study;
    study.t_final = 4e-3;
    study.base_dt = 2e-3;
    study.levels = 2;
    study.refinement = 1;
    const ConvergenceReport r = temporal_order_study(cosine_state(Mesh(8), 0.3), ModelParams{}, study);
    ASSERT_EQ(r.errors.size(), 1u);
    EXPECT_EQ(r.errors[0], 0.0);
    EXPECT_TRUE(std::isnan(r.finest_order()));
    EXPECT_FALSE(r.pass);
    EXPECT_FALSE(r.notes.empty());
}

TEST(TemporalStudy, RejectsNonIntegerStepCounts) {
    TemporalStudy study;
    study.t_final = 5e-3;
    study.base_dt = 2e-3;
    EXPECT_THROW(temporal_order_study(cosine_state(Mesh(8), 0.3), ModelParams{}, study),
                 std::invalid_argument);
}

TEST(TemporalStudy, ErrorsShrinkOnACoarseMesh) {
    TemporalStudy study;
    study.t_final = 8e-3;
    study.base_dt = 2e-3;
    study.levels = 3;
    const ConvergenceReport r = temporal_order_study(cosine_state(Mesh(8), 0.3), ModelParams{}, study);
    ASSERT_EQ(r.errors.size(), 2u);
    EXPECT_LT(r.errors[1], r.errors[0]);
    EXPECT_EQ(r.levels[2].steps, 16);
    std::ostringstream os;
    r.write_csv(os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "level,N,dt,steps,error,mean_removed,order");
}

TEST(SpatialStudy, StepCountsLandOnFinalTime) {
    SpatialStudy study;
    study.n_ladder = {8, 16};
    study.t_final = 0.01;
    const ConvergenceReport r = spatial_order_study(
        [](double x, double y) { return 0.3 * std::cos(2 * kPi * x) * std::cos(kPi * y); }, ModelParams{},
        study);
    ASSERT_EQ(r.levels.size(), 2u);
    // 0.25 / 64 = 0.00390625 does not divide 0.01: three coarse steps.
    EXPECT_EQ(r.levels[0].steps, 3);
    EXPECT_EQ(r.levels[1].steps, 12);
    EXPECT_FALSE(r.notes.empty());
    EXPECT_TRUE(std::isfinite(r.errors[0]));
    study.n_ladder = {8, 24};
    EXPECT_THROW(spatial_order_study([](double, double) { return 0.0; }, ModelParams{}, study),
                 std::invalid_argument);
}

TEST(StructureSuite, ConstantStateIsExactlySteady) {
    const Mesh m(8);
    const StructureReport r =
        run_structure_suite(State(BulkField(m, 0.2)), ModelParams{}, SchemeParams{}, SchemeKind::cs1, 10);
    EXPECT_TRUE(r.passed());
    EXPECT_EQ(r.series.size(), 10u);
    EXPECT_EQ(r.summary.max_bulk_drift, 0.0);
    EXPECT_EQ(r.summary.max_top_drift, 0.0);
    EXPECT_LE(r.summary.max_dissipation_residual, 0.0);
}

TEST(StructureSuite, CosineRunPassesWithGradchecks) {
    const Mesh m(8);
    const ModelParams p;
    SchemeParams sp;
    sp.A = sp.B = SchemeParams::min_stabilizer(p);
    StructureOptions opts;
    opts.gradcheck_samples = 3;
    for (SchemeKind kind : {SchemeKind::cs1, SchemeKind::bdf2}) {
        const StructureReport r = run_structure_suite(cosine_state(m, 0.3), p, sp, kind, 20, opts);
        EXPECT_TRUE(r.passed()) << to_string(kind);
        ASSERT_EQ(r.gradchecks.size(), 3u);
        for (const auto& [step, g] : r.gradchecks) {
            EXPECT_GE(step, 1);
            EXPECT_LE(step, 20);
            EXPECT_LT(g, 1e-6);
        }
        for (std::size_t k = 0; k < r.series.size(); ++k) EXPECT_EQ(r.series[k].step, static_cast<long>(k + 1));
        std::ostringstream os;
        r.write_csv(os);
        EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
                  "step,t,E_h,E_h_modified,bulk_mass,bottom_mass,top_mass,dissipation_residual,"
                  "positivity_margin,newton_iters");
    }
}

TEST(StructureSuite, FailuresCarryTheStepIndex) {
    const Mesh m(8);
    SchemeParams sp;
    sp.newton_max_iter = 1;
    sp.newton_tol = 1e-15;
    try {
        run_structure_suite(cosine_state(m, 0.9), ModelParams{}, sp, SchemeKind::cs1, 5);
        FAIL() << "expected StepError";
    } catch (const StepError& e) {
        EXPECT_EQ(e.step(), 1);
    }
}
