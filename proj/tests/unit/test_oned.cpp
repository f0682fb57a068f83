#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "singlim/oned.hpp"
#include "singlim/singular_solver.hpp"

using namespace singlim;
using namespace singlim::oned;

namespace {

constexpr double kPi = std::numbers::pi;

// Beta-function form of S_n(1) through lgamma, independent of gamma_fn.
double complete_oracle(double n) {
    const double d = 1.0 / (n - 1.0);
    return std::exp(0.5 * std::log(kPi) + std::lgamma(0.5 + d) - std::lgamma(1.0 + d));
}

// Composite Simpson for S_n(x), x <= 1/2, after h = s^2.
double left_oracle(double x, double n) {
    const double p = (n - 3.0) / (2.0 * (n - 1.0));
    const double b = std::sqrt(x);
    const int m = 20000;
    double sum = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double s = b * k / m;
        const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        sum += w * 2.0 * std::pow(1.0 - s * s, -p);
    }
    return sum * b / (3.0 * m);
}

}  // namespace

TEST(Gamma, KnownValues) {
    EXPECT_NEAR(gamma_fn(1.0), 1.0, 1e-15);
    EXPECT_NEAR(gamma_fn(0.5), 1.772453850905516, 1e-14);
    EXPECT_NEAR(gamma_fn(3.5), 2.5 * 1.5 * 0.5 * std::sqrt(kPi), 1e-13);
    EXPECT_THROW(gamma_fn(0.0), DomainError);
    EXPECT_THROW(gamma_fn(-1.5), DomainError);
}

TEST(Gamma, Recurrence) {
    for (double x = 0.5; x <= 10.0; x += 0.173) {
        EXPECT_NEAR(gamma_fn(x + 1.0) / (x * gamma_fn(x)), 1.0, 1e-11) << x;
    }
}

TEST(SingularIntegral, ExponentVanishesAtThree) {
    for (double x : {0.0, 0.01, 0.25, 0.5, 0.81, 1.0}) {
        EXPECT_NEAR(s_integral(x, 3.0), 2.0 * std::sqrt(x), 1e-12) << x;
    }
}

TEST(SingularIntegral, MatchesTheBetaClosedForm) {
    for (double n : {5.0, 9.0, 33.0, 129.0}) {
        EXPECT_NEAR(SingularIntegral(n).complete(), complete_oracle(n), 1e-9) << n;
        EXPECT_NEAR(s_complete_closed_form(n), complete_oracle(n), 1e-12) << n;
    }
    EXPECT_NEAR(SingularIntegral(INFINITY).complete(), kPi, 1e-10);
    EXPECT_DOUBLE_EQ(s_complete_closed_form(INFINITY), kPi);
}

TEST(SingularIntegral, PartialValuesAgainstDirectQuadrature) {
    for (double n : {4.0, 7.0, 50.0}) {
        for (double x : {0.1, 0.3, 0.5}) {
            EXPECT_NEAR(s_integral(x, n), left_oracle(x, n), 1e-10) << n << " " << x;
        }
    }
}

TEST(SingularIntegral, StrictlyIncreasingAndRejectsBadInput) {
    const SingularIntegral s(12.0);
    double prev = -1.0;
    for (int k = 0; k <= 200; ++k) {
        const double v = s(k / 200.0);
        EXPECT_GT(v, prev);
        prev = v;
    }
    EXPECT_THROW(s(-0.1), DomainError);
    EXPECT_THROW(s(1.1), DomainError);
    EXPECT_THROW(SingularIntegral(2.5), DomainError);
    EXPECT_THROW(s.inverse(s.complete() * 1.01), DomainError);
}

TEST(SingularIntegral, Inverse) {
    EXPECT_DOUBLE_EQ(s_inverse(0.0, 9.0), 0.0);
    EXPECT_NEAR(s_inverse(1.0, 3.0), 0.25, 1e-12);
    EXPECT_NEAR(s_inverse(1.5, 3.0), 0.5625, 1e-12);
    EXPECT_NEAR(s_inverse(s_integral(0.7, 7.0), 7.0), 0.7, 1e-9);
}

TEST(SingularIntegral, RoundTrip) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double n : {3.0, 4.0, 10.0, 100.0, 400.0}) {
        const SingularIntegral s(n);
        for (int k = 0; k < 50; ++k) {
            const double y = unit(rng) * s.complete();
            EXPECT_NEAR(s(s.inverse(y)), y, 1e-9) << n;
            EXPECT_NEAR(s.inverse(y) + s.inverse_complement(y), 1.0, 1e-14);
        }
    }
}

TEST(ClosedForms, AlphaAndFirstZero) {
    EXPECT_NEAR(alpha_n(1.0, 3.0), 1.0, 1e-14);
    EXPECT_NEAR(first_zero(2.0, 3.0), 2.0, 1e-14);
    for (double n : {3.0, 5.0, 17.0, 400.0}) {
        for (double r : {0.5, 1.0, 3.0}) {
            const double a = alpha_n(r, n);
            const double c = std::exp((n + 1.0) * std::log(a)) / (n - 1.0);
            EXPECT_NEAR(first_zero(c, n), r, 1e-10 * r) << n << " " << r;
        }
        EXPECT_NEAR(c_upper(n), 4.0 * c_lower(n), 1e-15);
        EXPECT_NEAR(first_zero(c_lower(n), n), 1.0, 1e-14);
        EXPECT_NEAR(first_zero(c_upper(n), n), 2.0, 1e-14);
    }
    // alpha^(n+1)/(n+1) tends to 2/pi^2.
    const double a = alpha_n(1.0, 400.0);
    EXPECT_NEAR(std::exp(401.0 * std::log(a)) / 401.0, 2.0 / (kPi * kPi), 1e-3);
}

TEST(ProfileW, ClosedFormAtThree) {
    EXPECT_DOUBLE_EQ(profile_w(0.0, 7.0, 0.5), 1.0);
    EXPECT_NEAR(profile_w(1.0, 3.0, 1.0), std::sqrt(0.5), 1e-12);
    for (double t = 0.0; t < std::sqrt(2.0); t += 0.05) {
        EXPECT_NEAR(profile_w(t, 3.0, 1.0), std::sqrt(1.0 - t * t / 2.0), 1e-11) << t;
    }
}

TEST(ProfileW, VanishesAtTheFirstZero) {
    for (double n : {3.0, 6.0, 40.0, 400.0}) {
        for (double c : {0.3, 1.0}) {
            EXPECT_NEAR(profile_w(first_zero(c, n), n, c), 0.0, 1e-8) << n;
        }
        EXPECT_THROW(profile_w(first_zero(1.0, n) * 1.01, n, 1.0), DomainError);
        EXPECT_THROW(profile_w(-0.1, n, 1.0), DomainError);
    }
}

TEST(ProfileW, SatisfiesTheOde) {
    const double step = 1e-4;
    for (double n : {3.0, 5.0, 20.0, 100.0}) {
        const double c = 0.4;
        const SingularIntegral s(n);
        const double tz = first_zero(c, n);
        for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double t = frac * tz;
            const double w = profile_w(t, c, s);
            const double second =
                (profile_w(t + step, c, s) - 2.0 * w + profile_w(t - step, c, s)) / (step * step);
            const double rhs = -1.0 / (c * (n - 1.0) * std::pow(w, n));
            EXPECT_NEAR(second / rhs, 1.0, 1e-4) << n << " " << t;
        }
    }
}

TEST(ProfileW, DecreasingConcaveAndIncreasingInC) {
    for (double n : {4.0, 30.0}) {
        const SingularIntegral s(n);
        double prev = 2.0;
        for (int k = 0; k <= 50; ++k) {
            const double t = first_zero(0.5, n) * k / 50.0;
            const double w = profile_w(t, 0.5, s);
            EXPECT_LT(w, prev);
            prev = w;
        }
        for (double t : {0.2, 0.6, 0.9}) {
            EXPECT_LT(profile_w(t, 0.5, s), profile_w(t, 0.6, s));
            EXPECT_LT(profile_w(t, 0.6, s), profile_w(t, 2.0, s));
            const double slope_gap = profile_w_slope(t + 0.05, 0.5, s) - profile_w_slope(t, 0.5, s);
            EXPECT_LT(slope_gap, 0.0);
        }
    }
}

TEST(ProfileW, SlopeMatchesDifferenceQuotient) {
    const double step = 1e-6;
    for (double n : {3.0, 9.0, 60.0}) {
        const SingularIntegral s(n);
        for (double t : {0.3, 0.8}) {
            const double fd = (profile_w(t + step, 0.7, s) - profile_w(t - step, 0.7, s)) / (2 * step);
            EXPECT_NEAR(profile_w_slope(t, 0.7, s), fd, 1e-7) << n;
        }
    }
}

TEST(FindCn, ThreeIsExactlyOne) {
    const MatchingRoot r = find_cn(3.0);
    EXPECT_NEAR(r.c, 1.0, 1e-8);
    EXPECT_NEAR(std::pow(profile_w(1.0, 3.0, 1.0), 4.0), 0.25, 1e-12);
    EXPECT_NEAR(matching_residual(1.0, 3.0), 0.0, 1e-12);
}

TEST(FindCn, BracketedAndMonotone) {
    for (double n : {5.0, 9.0, 33.0, 100.0}) {
        const MatchingRoot r = find_cn(n);
        EXPECT_GT(r.c, c_lower(n)) << n;
        EXPECT_LE(r.c, c_upper(n)) << n;
        EXPECT_LE(std::abs(r.residual), 1e-10) << n;
        EXPECT_TRUE(r.monotone_on_samples) << n;
        EXPECT_LT(matching_residual(c_lower(n) * (1.0 + 1e-6), n), 0.0);
        double prev = -INFINITY;
        for (int k = 0; k <= 20; ++k) {
            const double c = c_lower(n) * (1.0 + 1e-6) + (c_upper(n) - c_lower(n)) * k / 20.0;
            const double f = matching_residual(c, n);
            EXPECT_GT(f, prev) << n << " " << c;
            prev = f;
        }
    }
}

TEST(FindCn, ApproachesTheLimitConstant) {
    EXPECT_NEAR(find_cn(400.0).c, 2.0 / (kPi * kPi), 0.01);
}

TEST(PiecewiseY, JoinsSmoothly) {
    EXPECT_NEAR(piecewise_y(1.5, 3.0, 1.0), std::sqrt(0.5) * 0.5, 1e-12);
    for (double n : {3.0, 7.0, 50.0}) {
        const MatchingRoot r = find_cn(n);
        const SingularIntegral s(n);
        EXPECT_EQ(piecewise_y(2.0, r.c, s), 0.0);
        const double left = profile_w_slope(1.0, r.c, s);
        const double right = -profile_w(1.0, r.c, s);
        EXPECT_NEAR(left, right, 1e-7) << n;
        EXPECT_THROW(piecewise_y(2.1, r.c, s), DomainError);
    }
}

TEST(LimitProfiles, ClosedForms) {
    const LimitProfile five = limit_profiles(1.0, Geometry::interval);
    EXPECT_NEAR(five.v(0.0), 2.0 / (kPi * kPi), 1e-15);
    EXPECT_DOUBLE_EQ(five.g(0.0), 1.0);
    EXPECT_NEAR(five.g(1.0), 0.0, 1e-15);
    EXPECT_NEAR(five.g(-1.0), 0.0, 1e-15);
    const LimitProfile wide = limit_profiles(3.0, Geometry::interval);
    EXPECT_NEAR(wide.v(0.0), 18.0 / (kPi * kPi), 1e-14);

    const LimitProfile six = limit_profiles(2.0, Geometry::inner_source);
    EXPECT_EQ(six.v(1.5), 0.0);
    EXPECT_DOUBLE_EQ(six.u(1.5), 0.5);
    EXPECT_DOUBLE_EQ(six.u(-0.3), 1.0);
    EXPECT_NEAR(six.v(0.5), 2.0 / (kPi * kPi) * 0.5, 1e-15);
}

TEST(OneDProfile, GammaThreeClosedForms) {
    const OneDProfile interval = OneDProfile::interval(3.0, 1.0);
    EXPECT_NEAR(interval.alpha(), 1.0, 1e-14);
    for (double t : {0.0, 0.3, -0.6, 0.95}) {
        EXPECT_NEAR(interval.u(t), std::sqrt(1.0 - t * t), 1e-11) << t;
        EXPECT_NEAR(interval.v(t), std::pow(1.0 - t * t, 2.0) / 4.0, 1e-11) << t;
    }
    EXPECT_EQ(interval.u(1.0), 0.0);

    // -u'' = chi/u^3 on (-2, 2): u = 2^(1/4) sqrt(1 - t^2/2) inside, linear outside.
    const OneDProfile inner = OneDProfile::inner_source(3.0);
    const double a = std::pow(2.0, 0.25);
    EXPECT_NEAR(inner.alpha(), a, 1e-8);
    EXPECT_NEAR(inner.u(0.5), a * std::sqrt(1.0 - 0.125), 1e-8);
    EXPECT_NEAR(inner.u(-1.5), a * std::sqrt(0.5) * 0.5, 1e-8);
    EXPECT_NEAR(inner.u(2.0), 0.0, 1e-15);
    const auto table = inner.shape_table(5);
    ASSERT_EQ(table.size(), 5u);
    EXPECT_DOUBLE_EQ(table.front(), 1.0);
    EXPECT_NEAR(table.back(), 0.0, 1e-15);
}

TEST(OneDProfile, AgreesWithTheSingularSolver) {
    const Grid g = make_uniform_grid(-1.0, 1.0, 1024);
    for (double n : {3.0, 5.0, 9.0}) {
        const ProblemSpec spec(g, CoefficientField::identity(g), ConstantDatum{1.0}, n,
                               SupportKind::strictly_positive);
        const SingularSolution sol = solve_singular(spec, default_m_schedule());
        const OneDProfile profile = OneDProfile::interval(n, 1.0);
        double worst = 0.0;
        for (std::size_t k = 0; k < g.node_count(); ++k) {
            const double t = g.node(k)[0];
            if (std::abs(t) > 0.9) continue;
            worst = std::max(worst, std::abs(sol.u[k] / profile.alpha() - profile.shape(t)));
        }
        EXPECT_LE(worst, 2e-3) << n;
    }
}
