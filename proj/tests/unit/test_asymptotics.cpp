#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "singlim/asymptotics.hpp"

using namespace singlim;

namespace {

ProblemSpec inner_source_spec(int cells, double gamma) {
    const Grid g = make_uniform_grid(-2.0, 2.0, cells);
    return ProblemSpec(g, CoefficientField::identity(g),
                       IndicatorDatum{1.0, Box{1, {-1.0, 0.0}, {1.0, 0.0}}}, gamma,
                       SupportKind::compactly_contained);
}

}  // namespace

TEST(ZDiagnostic, ClosedForms) {
    const Grid g = make_uniform_grid(-1.0, 1.0, 4);
    const GridFunction one = GridFunction::sample(g, [](const Point&) { return 1.0; });
    const auto z = z_diagnostic(one, 7.0);
    for (double v : z) EXPECT_NEAR(v, std::log(8.0), 1e-15);

    // u = sqrt(1 - t^2) at t = 0 for n = 3 gives log 4.
    const GridFunction u =
        GridFunction::sample(g, [](const Point& p) { return std::sqrt(1.0 - p[0] * p[0]); });
    const auto zu = z_diagnostic(u, 3.0);
    EXPECT_NEAR(zu[2], std::log(4.0), 1e-15);
    EXPECT_EQ(zu[0], INFINITY);
}

TEST(ZDiagnostic, FittedConstant) {
    const Grid g = make_uniform_grid(-1.0, 1.0, 4);
    const GridFunction f = GridFunction::sample(g, [](const Point&) { return 1.0; });
    const std::vector<double> z{-1.0, 0.5, 2.0, -3.0, INFINITY};
    EXPECT_DOUBLE_EQ(fitted_lower_bound_constant(z, f, Box{1, {-0.6, 0.0}, {0.6, 0.0}}), 2.0);
    EXPECT_DOUBLE_EQ(fitted_lower_bound_constant(z, f, Box{1, {0.4, 0.0}, {0.6, 0.0}}), 0.0);
}

TEST(ZDiagnostic, BoundedAlongASweep) {
    const Grid g = make_uniform_grid(-1.0, 1.0, 256);
    const ProblemSpec spec(g, CoefficientField::identity(g), ConstantDatum{1.0}, 3.0,
                           SupportKind::strictly_positive);
    SweepOptions opts;
    opts.n_list = {10.0, 40.0, 160.0};
    opts.compacta = {Box{1, {-0.5, 0.0}, {0.5, 0.0}}};
    const SweepReport rep = run_sweep(spec, opts);
    for (const SweepRow& row : rep.rows) {
        ASSERT_TRUE(row.ok) << row.error;
        ASSERT_TRUE(row.fitted_m.has_value());
        EXPECT_LT(*row.fitted_m, 5.0) << row.n;
    }
}

TEST(H1, LinearFunction) {
    const Grid g = make_uniform_grid(0.0, 2.0, 10);
    const GridFunction v = GridFunction::sample(g, [](const Point& p) { return 3.0 * p[0]; });
    EXPECT_NEAR(h1_seminorm(v), 3.0 * std::sqrt(2.0), 1e-12);
}

TEST(Sweep, RowsInOrderWithFailuresRecorded) {
    const ProblemSpec spec = inner_source_spec(128, 3.0);
    SweepOptions opts;
    opts.n_list = {5.0, 20.0};
    opts.mass_regions = {Box{1, {-0.9, 0.0}, {0.9, 0.0}}};
    opts.shell_distances = {0.1};
    const SweepReport ok = run_sweep(spec, opts);
    ASSERT_EQ(ok.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(ok.rows[0].n, 5.0);
    EXPECT_TRUE(ok.rows[1].ok);
    EXPECT_EQ(ok.rows[1].local_masses.size(), 1u);
    ASSERT_TRUE(ok.limit_n.has_value());
    EXPECT_DOUBLE_EQ(*ok.limit_n, 20.0);
    EXPECT_TRUE(ok.histogram.has_value());

    opts.solver.newton.max_iterations = 1;
    const SweepReport bad = run_sweep(spec, opts);
    for (const SweepRow& row : bad.rows) {
        EXPECT_FALSE(row.ok);
        EXPECT_FALSE(row.error.empty());
    }
    EXPECT_FALSE(bad.limit_n.has_value());
}

TEST(Histogram, TotalsAndShells) {
    const ProblemSpec spec = inner_source_spec(256, 40.0);
    const SingularSolution sol = solve_singular(spec, default_m_schedule());
    const MeasureHistogram h = measure_histogram(sol.u, spec, 40.0, {0.05, 0.5, 10.0});
    double sum = 0.0;
    for (std::size_t k = 0; k < h.cell_masses.size(); ++k) sum += h.cell_masses[k];
    EXPECT_NEAR(h.total, sum, 1e-12 * sum);
    EXPECT_NEAR(h.total, sol.total_mass, 1e-9 * sum);
    EXPECT_LE(h.shell_fractions[0], h.shell_fractions[1]);
    EXPECT_NEAR(h.shell_fractions[2], 1.0, 1e-12);
}

TEST(Histogram, ZeroDatum) {
    const Grid g = make_uniform_grid(-2.0, 2.0, 64);
    const ProblemSpec spec(g, CoefficientField::identity(g),
                           IndicatorDatum{0.0, Box{1, {-1.0, 0.0}, {1.0, 0.0}}}, 3.0,
                           SupportKind::general);
    const MeasureHistogram h = measure_histogram(GridFunction::zeros(g), spec, 3.0, {0.1});
    EXPECT_EQ(h.total, 0.0);
    EXPECT_EQ(h.cell_masses.max_abs(), 0.0);
}

TEST(Histogram, RequiresAnIndicator) {
    const Grid g = make_uniform_grid(-1.0, 1.0, 32);
    const ProblemSpec spec(g, CoefficientField::identity(g), ConstantDatum{1.0}, 3.0,
                           SupportKind::strictly_positive);
    EXPECT_THROW(measure_histogram(GridFunction::zeros(g), spec, 3.0, {0.1}), InvalidArgument);
}

TEST(LimitCheck, SingleAtomReproducesItsTent) {
    const Grid g = make_uniform_grid(-2.0, 2.0, 64);
    const CoefficientField id = CoefficientField::identity(g);
    const SparseOperator op = assemble(g, id);
    const std::size_t node = 40;  // t = 0.5
    std::vector<double> raw(g.node_count(), 0.0);
    raw[node] = 1.5;
    const GridFunction masses(g, raw);
    const GridFunction tent = solve_measure(op, MeasureData{{Atom{g.node(node), 1.5}}});
    const MeasureHistogram h{masses, 1.5, {}, {}};
    const LimitCheck c = limit_equation_check(tent, h, id);
    ASSERT_EQ(c.atoms.size(), 1u);
    EXPECT_NEAR(c.atoms[0].location[0], 0.5, 1e-14);
    EXPECT_NEAR(c.atoms[0].mass, 1.5, 1e-14);
    EXPECT_LE(c.difference, 1e-10);
    // Closed form of the tent: 1.5 (2 - |t|)(2 + 0.5) / 4 at t >= 0.5.
    EXPECT_NEAR(tent[48], 1.5 * 1.0 * 2.5 / 4.0, 1e-12);
}

TEST(LimitCheck, EmptyMeasure) {
    const Grid g = make_uniform_grid(-2.0, 2.0, 64);
    const MeasureHistogram h{GridFunction::zeros(g), 0.0, {}, {}};
    const LimitCheck c = limit_equation_check(GridFunction::zeros(g), h,
                                              CoefficientField::identity(g));
    EXPECT_TRUE(c.atoms.empty());
    EXPECT_EQ(c.difference, 0.0);
}

TEST(LimitCheck, AdjacentClustersAreInconclusive) {
    const Grid g = make_uniform_grid(-2.0, 2.0, 64);
    std::vector<double> raw(g.node_count(), 0.0);
    raw[30] = 1.0;
    raw[33] = 1.0;
    const GridFunction masses(g, raw);
    const MeasureHistogram h{masses, 2.0, {}, {}};
    EXPECT_THROW(limit_equation_check(GridFunction::zeros(g), h, CoefficientField::identity(g)),
                 CheckInconclusive);
}

TEST(LimitCheck, TwoDimensionalIsInconclusive) {
    const double lo[] = {0.0, 0.0}, hi[] = {1.0, 1.0};
    const int cells[] = {8, 8};
    const Grid g = make_uniform_grid(lo, hi, cells);
    const MeasureHistogram h{GridFunction::zeros(g), 0.0, {}, {}};
    EXPECT_THROW(limit_equation_check(GridFunction::zeros(g), h, CoefficientField::identity(g)),
                 CheckInconclusive);
}

TEST(MassDichotomy, InnerMassVanishesAndSupportShellTakesOver) {
    const ProblemSpec spec = inner_source_spec(512, 3.0);
    SweepOptions opts;
    opts.n_list = {10.0, 160.0};
    opts.mass_regions = {Box{1, {-0.5, 0.0}, {0.5, 0.0}}};
    opts.shell_distances = {0.1};
    const SweepReport rep = run_sweep(spec, opts);
    ASSERT_TRUE(rep.rows[0].ok && rep.rows[1].ok);
    EXPECT_LT(rep.rows[1].local_masses[0], 0.1 * rep.rows[0].local_masses[0]);
    ASSERT_TRUE(rep.histogram.has_value());
    EXPECT_GT(rep.histogram->shell_fractions[0], 0.8);
}

TEST(Conjecture, TwoDimensionalSmoke) {
    const double lo[] = {0.0, 0.0}, hi[] = {1.0, 1.0};
    const int cells[] = {16, 16};
    const Grid g = make_uniform_grid(lo, hi, cells);
    const ProblemSpec spec(g, CoefficientField::identity(g),
                           IndicatorDatum{1.0, Box{2, {0.25, 0.25}, {0.75, 0.75}}}, 10.0,
                           SupportKind::compactly_contained);
    const ConjectureReport r = conjecture_experiment(spec, 10.0);
    EXPECT_TRUE(std::isfinite(r.harmonic_difference));
    EXPECT_TRUE(std::isfinite(r.v_outside));
    EXPECT_GE(r.v_outside, 0.0);
    EXPECT_NEAR(r.harmonic.max(), 1.0, 1e-12);
}
