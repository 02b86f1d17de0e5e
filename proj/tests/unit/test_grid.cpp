#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <chdbc/errors.hpp>
#include <chdbc/grid.hpp>

#include "oracles.hpp"

using namespace chdbc;

namespace {

constexpr double kPi = std::numbers::pi;

BulkField cos_x(const Mesh& m, int k = 1) {
    return BulkField::sample(m, [k](double x, double) { return std::cos(2 * kPi * k * x); });
}

} // namespace

TEST(Mesh, CoordinatesAndWeights) {
    const Mesh m(8);
    EXPECT_DOUBLE_EQ(m.h(), 0.125);
    EXPECT_DOUBLE_EQ(m.x_center(0), 0.0625);
    EXPECT_DOUBLE_EQ(m.x_center(7), 0.9375);
    EXPECT_DOUBLE_EQ(m.y_node(8), 1.0);
    EXPECT_EQ(m.weight(0), 0.5);
    EXPECT_EQ(m.weight(4), 1.0);
    EXPECT_EQ(m.weight(8), 0.5);
    EXPECT_EQ(m.bulk_size(), 72u);
    EXPECT_EQ(m.wrap(-1), 7);
    EXPECT_EQ(m.wrap(8), 0);
}

TEST(Mesh, RejectsTooFewCells) {
    EXPECT_THROW(Mesh(3), std::invalid_argument);
    EXPECT_NO_THROW(Mesh(4));
}

TEST(Fields, MismatchedMeshesThrow) {
    BulkField a(Mesh(8));
    const BulkField b(Mesh(16));
    EXPECT_THROW(a += b, MeshMismatch);
    EXPECT_THROW((void)inner(a, b), MeshMismatch);
    EXPECT_THROW(BulkField(Mesh(8), std::vector<double>(5)), std::invalid_argument);
}

TEST(Fields, PeriodicIndexing) {
    const Mesh m(4);
    BulkField f = BulkField::sample(m, [](double x, double y) { return x + 10 * y; });
    EXPECT_EQ(f(-1, 2), f(3, 2));
    EXPECT_EQ(f(4, 0), f(0, 0));
}

TEST(State, RejectsValuesOutsideOpenInterval) {
    const Mesh m(4);
    BulkField f(m, 0.2);
    f(1, 2) = 1.0;
    EXPECT_THROW(State{f}, DomainError);
    f(1, 2) = -1.0;
    EXPECT_THROW(State{f}, DomainError);
    f(1, 2) = std::nan("");
    EXPECT_THROW(State{f}, DomainError);
}

TEST(State, TracesAreWallRows) {
    const Mesh m(8);
    const State s(BulkField::sample(m, [](double x, double y) { return 0.1 * x + 0.2 * y; }));
    for (int i = 0; i < 8; ++i) {
        EXPECT_EQ(s.bottom()(i), s.phi()(i, 0));
        EXPECT_EQ(s.top()(i), s.phi()(i, 8));
    }
    EXPECT_NO_THROW(State::from_parts(s.phi(), s.bottom(), s.top()));
    BoundaryField off = s.bottom();
    off(3) += 1e-15;
    EXPECT_THROW(State::from_parts(s.phi(), off, s.top()), DomainError);
}

TEST(State, PositivityMargin) {
    const Mesh m(4);
    BulkField f(m, 0.5);
    f(2, 3) = -0.9;
    EXPECT_NEAR(State(f).positivity_margin(), 0.1, 1e-15);
}

TEST(Inner, ConstantHasUnitArea) {
    for (int n : {4, 8, 16, 64}) {
        const Mesh m(n);
        EXPECT_NEAR(mean(BulkField(m, 1.0)), 1.0, 1e-15);
        EXPECT_NEAR(boundary_mean(BoundaryField(m, 1.0)), 1.0, 1e-15);
    }
}

TEST(Inner, CosineSquaredIsOneHalf) {
    const Mesh m(8);
    const BulkField c = cos_x(m);
    EXPECT_NEAR(inner(c, c), 0.5, 1e-15);
    EXPECT_NEAR(inner(c, c), oracle::inner(c, c), 1e-15);
    const BoundaryField w = c.row(0);
    EXPECT_NEAR(boundary_norm2_sq(w), 0.5, 1e-15);
}

TEST(Inner, MatchesNaiveSummation) {
    std::mt19937_64 rng(3);
    for (int n : {4, 8, 16, 32}) {
        const Mesh m(n);
        const BulkField f = oracle::random_field(m, rng);
        const BulkField g = oracle::random_field(m, rng);
        EXPECT_NEAR(inner(f, g), oracle::inner(f, g), 1e-14);
        const BoundaryField a = f.row(2);
        const BoundaryField b = g.row(5);
        EXPECT_NEAR(boundary_inner(a, b), oracle::wall_inner(a, b), 1e-14);
    }
}

TEST(ApplyLh, MatchesDenseStencil) {
    std::mt19937_64 rng(11);
    for (int n : {4, 8, 16}) {
        const Mesh m(n);
        const BulkField f = oracle::random_field(m, rng);
        const Eigen::VectorXd expected = oracle::dense_Lh(m) * oracle::to_vec(f);
        const BulkField got = apply_Lh(f);
        for (std::size_t k = 0; k < got.values().size(); ++k) {
            EXPECT_NEAR(got.values()[k], expected[static_cast<Eigen::Index>(k)], 1e-10 * n * n);
        }
    }
}

TEST(ApplyLh, CosineIsEigenfunction) {
    const Mesh m(8);
    const BulkField c = cos_x(m);
    const BulkField lc = apply_Lh(c);
    const double lambda1 = oracle::lambda(m, 1);
    for (std::size_t k = 0; k < c.values().size(); ++k) {
        EXPECT_NEAR(lc.values()[k], lambda1 * c.values()[k], 1e-12);
    }
}

TEST(ApplyLh, ConstantsAreInKernelAndRangeIsMeanFree) {
    std::mt19937_64 rng(5);
    const Mesh m(16);
    for (double v : apply_Lh(BulkField(m, 0.37)).values()) EXPECT_NEAR(v, 0.0, 1e-12);
    const BulkField lf = apply_Lh(oracle::random_field(m, rng));
    EXPECT_NEAR(mean(lf), 0.0, 1e-12);
}

TEST(GradInner, EqualsLhPairing) {
    std::mt19937_64 rng(17);
    for (int n : {4, 8, 32}) {
        const Mesh m(n);
        const BulkField f = oracle::random_field(m, rng);
        const BulkField g = oracle::random_field(m, rng);
        const double expected = oracle::inner(f, oracle::from_vec(m, oracle::dense_Lh(m) * oracle::to_vec(g)));
        EXPECT_NEAR(grad_inner(f, g), expected, 1e-11 * std::abs(expected) + 1e-12);
        EXPECT_NEAR(grad_norm_sq(f), oracle::inner(f, apply_Lh(f)), 1e-11 * grad_norm_sq(f));
        EXPECT_GE(grad_norm_sq(f), 0.0);
    }
}

TEST(GradInner, CosineGradientEnergy) {
    // |grad cos(2 pi x)|^2 = lambda_1 / 2 with no y contribution.
    const Mesh m(8);
    EXPECT_NEAR(grad_norm_sq(cos_x(m)), oracle::lambda(m, 1) / 2, 1e-12);
    const BulkField y_only = BulkField::sample(m, [](double, double y) { return y; });
    // Each of the N^2 y-faces carries unit slope and area h^2.
    EXPECT_NEAR(grad_norm_sq(y_only), 1.0, 1e-13);
}

TEST(SummationByParts, HoldsWithArbitraryGhostRows) {
    std::mt19937_64 rng(23);
    for (int n : {4, 8, 16}) {
        const Mesh m(n);
        const BulkField psi = oracle::random_field(m, rng);
        const BulkField phi = oracle::random_field(m, rng);
        const BoundaryField below = oracle::random_wall(m, rng);
        const BoundaryField above = oracle::random_wall(m, rng);
        const double lhs = oracle::inner(psi, laplacian_with_ghosts(phi, below, above));
        const double rhs = -grad_inner(psi, phi) +
                           oracle::wall_inner(normal_derivative_top(above, phi.row(n - 1)), psi.row(n)) -
                           oracle::wall_inner(normal_derivative_bottom(phi.row(1), below), psi.row(0));
        EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + grad_norm_sq(phi)));
    }
}

TEST(Laplacian, NeumannReflectionMatchesNegativeLh) {
    std::mt19937_64 rng(29);
    const Mesh m(8);
    const BulkField f = oracle::random_field(m, rng);
    const BulkField a = laplacian_neumann(f);
    const BulkField b = apply_Lh(f);
    for (std::size_t k = 0; k < a.values().size(); ++k) EXPECT_NEAR(a.values()[k], -b.values()[k], 1e-10);
    const BulkField ghosts = laplacian_with_ghosts(f, f.row(1), f.row(m.n() - 1));
    EXPECT_EQ(ghosts, a);
}

TEST(Laplacian, WallRowsWithGhostSplitIntoLhAndFlux) {
    // Delta_h phi at j=0 equals -L_h phi - (2/h) D~y phi_0.
    std::mt19937_64 rng(31);
    const Mesh m(8);
    const double h = m.h();
    const BulkField f = oracle::random_field(m, rng);
    const BoundaryField below = oracle::random_wall(m, rng);
    const BoundaryField above = oracle::random_wall(m, rng);
    const BulkField lap = laplacian_with_ghosts(f, below, above);
    const BulkField lh = apply_Lh(f);
    const BoundaryField gb = normal_derivative_bottom(f.row(1), below);
    const BoundaryField gt = normal_derivative_top(above, f.row(7));
    for (int i = 0; i < 8; ++i) {
        EXPECT_NEAR(lap(i, 0), -lh(i, 0) - 2.0 / h * gb(i), 1e-10);
        EXPECT_NEAR(lap(i, 8), -lh(i, 8) + 2.0 / h * gt(i), 1e-10);
    }
}

TEST(WallOperators, SecondDifferenceAndDirichletEnergy) {
    std::mt19937_64 rng(37);
    const Mesh m(16);
    const BoundaryField c = cos_x(m).row(0);
    const BoundaryField d = dx2_gamma(c);
    for (int i = 0; i < 16; ++i) EXPECT_NEAR(d(i), -oracle::lambda(m, 1) * c(i), 1e-11);
    const BoundaryField f = oracle::random_wall(m, rng);
    EXPECT_NEAR(dx_norm_sq_gamma(f), -oracle::wall_inner(f, dx2_gamma(f)), 1e-11 * dx_norm_sq_gamma(f));
}

TEST(Shift, CommutesWithOperatorsAndPreservesNorms) {
    std::mt19937_64 rng(41);
    const Mesh m(8);
    const BulkField f = oracle::random_field(m, rng);
    for (int s : {1, 3, -2}) {
        const BulkField g = shift_x(f, s);
        EXPECT_EQ(g(s, 4), f(0, 4));
        EXPECT_DOUBLE_EQ(norm2_sq(g), norm2_sq(f));
        const BulkField a = apply_Lh(g);
        const BulkField b = shift_x(apply_Lh(f), s);
        for (std::size_t k = 0; k < a.values().size(); ++k) EXPECT_NEAR(a.values()[k], b.values()[k], 1e-12);
    }
}
