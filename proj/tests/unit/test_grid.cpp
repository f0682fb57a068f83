#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "singlim/grid.hpp"

using namespace singlim;

TEST(Grid, OneDimensionalSpacingAndNodeCount) {
    const Grid g = make_uniform_grid(-2.0, 2.0, 8);
    EXPECT_EQ(g.dim(), 1);
    EXPECT_EQ(g.node_count(), 9u);
    EXPECT_DOUBLE_EQ(g.h(0), 0.5);
}

TEST(Grid, NodesIncludeTheBoundary) {
    const Grid g = make_uniform_grid(-1.0, 1.0, 4);
    const double expected[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(g.node(k)[0], expected[k]);
    EXPECT_TRUE(g.is_boundary(0));
    EXPECT_TRUE(g.is_boundary(4));
    EXPECT_FALSE(g.is_boundary(2));
}

TEST(Grid, TwoDimensionalNodeCountAndIndexing) {
    const double lo[] = {0.0, 0.0}, hi[] = {1.0, 1.0};
    const int cells[] = {4, 4};
    const Grid g = make_uniform_grid(lo, hi, cells);
    EXPECT_EQ(g.node_count(), 25u);
    EXPECT_DOUBLE_EQ(g.cell_volume(), 1.0 / 16.0);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
        const auto [i, j] = g.multi_index(k);
        EXPECT_EQ(g.index(i, j), k);
        EXPECT_EQ(g.is_boundary(k), i == 0 || j == 0 || i == 4 || j == 4);
    }
    EXPECT_DOUBLE_EQ(g.node(g.index(1, 3))[0], 0.25);
    EXPECT_DOUBLE_EQ(g.node(g.index(1, 3))[1], 0.75);
}

TEST(Grid, RejectsDegenerateInput) {
    EXPECT_THROW(make_uniform_grid(1.0, 1.0, 8), InvalidArgument);
    EXPECT_THROW(make_uniform_grid(2.0, 1.0, 8), InvalidArgument);
    EXPECT_THROW(make_uniform_grid(0.0, 1.0, 3), InvalidArgument);
}

TEST(GridFunction, RejectsNonFiniteValuesAndSizeMismatch) {
    const Grid g = make_uniform_grid(0.0, 1.0, 4);
    std::vector<double> v(5, 0.0);
    v[2] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(GridFunction(g, v), InvalidArgument);
    v[2] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(GridFunction(g, v), InvalidArgument);
    EXPECT_THROW(GridFunction(g, std::vector<double>(4, 0.0)), InvalidArgument);
}

TEST(GridFunction, SampleAndNorms) {
    const Grid g = make_uniform_grid(-1.0, 1.0, 4);
    const GridFunction u = GridFunction::sample(g, [](const Point& p) { return p[0] * 3.0; });
    EXPECT_DOUBLE_EQ(u.max_abs(), 3.0);
    EXPECT_DOUBLE_EQ(u.min(), -3.0);
    EXPECT_DOUBLE_EQ(u.max(), 3.0);
    EXPECT_DOUBLE_EQ(max_abs_difference(u, GridFunction::zeros(g)), 3.0);
}

TEST(Box, ContainmentAndDistance) {
    const Box b{1, {-1.0, 0.0}, {1.0, 0.0}};
    EXPECT_TRUE(b.contains({1.0, 0.0}));
    EXPECT_FALSE(b.contains({1.0 + 1e-12, 0.0}));
    EXPECT_DOUBLE_EQ(b.distance_to_boundary({0.25, 0.0}), 0.75);
    EXPECT_DOUBLE_EQ(b.distance_to_boundary({1.5, 0.0}), 0.5);
    EXPECT_TRUE(b.strictly_inside(Box{1, {-2.0, 0.0}, {2.0, 0.0}}));
    EXPECT_FALSE(b.strictly_inside(Box{1, {-1.0, 0.0}, {2.0, 0.0}}));
}

TEST(Truncation, Examples) {
    EXPECT_DOUBLE_EQ(truncation(5.0, 2.0), 2.0);
    EXPECT_DOUBLE_EQ(truncation_excess(5.0, 2.0), 3.0);
    EXPECT_DOUBLE_EQ(truncation(-5.0, 2.0), -2.0);
    EXPECT_DOUBLE_EQ(truncation_excess(-5.0, 2.0), -3.0);
    EXPECT_DOUBLE_EQ(truncation(1.0, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(truncation_excess(1.0, 2.0), 0.0);
}

TEST(Truncation, SplitsEveryValue) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> s_dist(-50.0, 50.0);
    std::uniform_real_distribution<double> k_dist(1e-3, 30.0);
    for (int trial = 0; trial < 10000; ++trial) {
        const double s = s_dist(rng), k = k_dist(rng);
        EXPECT_DOUBLE_EQ(truncation(s, k) + truncation_excess(s, k), s);
        EXPECT_LE(std::abs(truncation(s, k)), k);
    }
}

TEST(Ellipticity, IdentityAndDiagonalFields) {
    const Grid g = make_uniform_grid(0.0, 1.0, 4);
    const Ellipticity id = check_ellipticity(CoefficientField::identity(g));
    EXPECT_DOUBLE_EQ(id.alpha, 1.0);
    EXPECT_DOUBLE_EQ(id.beta, 1.0);

    const double lo[] = {0.0, 0.0}, hi[] = {1.0, 1.0};
    const int cells[] = {4, 4};
    const Grid g2 = make_uniform_grid(lo, hi, cells);
    const Ellipticity d = check_ellipticity(CoefficientField::constant(g2, {2.0, 0.0, 0.0, 0.5}));
    EXPECT_DOUBLE_EQ(d.alpha, 0.5);
    EXPECT_DOUBLE_EQ(d.beta, 2.0);
}

TEST(Ellipticity, FullMatrixEigenvalues) {
    const double lo[] = {0.0, 0.0}, hi[] = {1.0, 1.0};
    const int cells[] = {4, 4};
    const Grid g = make_uniform_grid(lo, hi, cells);
    // Eigenvalues of [[2, 1], [1, 2]] are 1 and 3.
    const Ellipticity e = check_ellipticity(CoefficientField::constant(g, {2.0, 1.0, 1.0, 2.0}));
    EXPECT_NEAR(e.alpha, 1.0, 1e-14);
    EXPECT_NEAR(e.beta, 3.0, 1e-14);
}

TEST(Ellipticity, Violations) {
    const double lo[] = {0.0, 0.0}, hi[] = {1.0, 1.0};
    const int cells[] = {4, 4};
    const Grid g = make_uniform_grid(lo, hi, cells);
    const CoefficientField negative = CoefficientField::sample(g, [](const Point& p) {
        return p[0] == 0.5 && p[1] == 0.5 ? CoefficientMatrix{1.0, 0.0, 0.0, -0.1}
                                          : CoefficientMatrix{};
    });
    EXPECT_THROW(check_ellipticity(negative), EllipticityViolation);
    EXPECT_THROW(check_ellipticity(CoefficientField::constant(g, {1.0, 0.2, 0.1, 1.0})),
                 EllipticityViolation);
}

TEST(Datum, IndicatorTakesInsideValueOnItsBoundary) {
    const Grid g = make_uniform_grid(-2.0, 2.0, 8);
    const GridFunction f =
        sample_datum(IndicatorDatum{3.0, Box{1, {-1.0, 0.0}, {1.0, 0.0}}}, g);
    const double expected[] = {0, 0, 3, 3, 3, 3, 3, 0, 0};
    for (std::size_t k = 0; k < 9; ++k) EXPECT_DOUBLE_EQ(f[k], expected[k]);
}

TEST(ProblemSpec, ValidatesInvariants) {
    const Grid g = make_uniform_grid(-2.0, 2.0, 8);
    const CoefficientField id = CoefficientField::identity(g);
    const IndicatorDatum inner{1.0, Box{1, {-1.0, 0.0}, {1.0, 0.0}}};
    const IndicatorDatum touching{1.0, Box{1, {-2.0, 0.0}, {1.0, 0.0}}};

    EXPECT_NO_THROW(ProblemSpec(g, id, inner, 3.0, SupportKind::compactly_contained));
    EXPECT_THROW(ProblemSpec(g, id, touching, 3.0, SupportKind::compactly_contained),
                 InvalidArgument);
    EXPECT_NO_THROW(ProblemSpec(g, id, touching, 3.0, SupportKind::general));
    EXPECT_THROW(ProblemSpec(g, id, inner, 0.0, SupportKind::general), InvalidArgument);
    EXPECT_THROW(ProblemSpec(g, id, ConstantDatum{-1.0}, 1.0, SupportKind::general),
                 InvalidArgument);

    const ProblemSpec spec(g, id, inner, 3.0, SupportKind::compactly_contained);
    ASSERT_NE(spec.support_box(), nullptr);
    EXPECT_DOUBLE_EQ(spec.support_box()->hi[0], 1.0);
    const ProblemSpec higher = spec.with_gamma(40.0);
    EXPECT_DOUBLE_EQ(higher.gamma(), 40.0);
    EXPECT_DOUBLE_EQ(max_abs_difference(higher.f(), spec.f()), 0.0);
}
