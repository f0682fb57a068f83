#pragma once

#include <vector>

#include "singlim/errors.hpp"

namespace singlim::oned {

/// Gamma function for real x > 0. Throws DomainError otherwise.
double gamma_fn(double x);

/// S_n(x) = int_0^x h^(-1/2) (1 - h)^(-(n-3)/(2(n-1))) dh on [0, 1].
///
/// Both endpoint singularities are removed before integrating: h = s^2 on
/// [0, 1/2] and 1 - h = tau^(2(n-1)/(n+1)) on [1/2, 1], after which both
/// integrands are bounded and the adaptive Simpson rule converges. The object
/// caches the two half integrals, so reuse it for many evaluations at one n.
/// n = +inf selects the limiting integrand h^(-1/2) (1 - h)^(-1/2).
class SingularIntegral {
public:
    explicit SingularIntegral(double n, double tolerance = 1e-13);

    double n() const noexcept { return n_; }
    double operator()(double x) const;
    /// S_n(1) by quadrature.
    double complete() const noexcept { return left_half_ + right_half_; }

    /// x with S_n(x) = y.
    double inverse(double y) const;
    /// 1 - x with S_n(x) = y, accurate in relative terms as x -> 1.
    double inverse_complement(double y) const;

private:
    struct Split {
        double x;
        double complement;
    };
    Split invert(double y) const;
    double left(double s) const;   // int_0^s 2 (1 - r^2)^(-p) dr
    double right(double t) const;  // int_0^t q (1 - r^q)^(-1/2) dr

    double n_;
    double p_;  // (n-3)/(2(n-1))
    double q_;  // 2(n-1)/(n+1)
    double tol_;
    double left_half_ = 0.0;
    double right_half_ = 0.0;
    double tau_half_ = 0.0;
};

double s_integral(double x, double n);
double s_inverse(double y, double n);

/// sqrt(pi) Gamma(1/2 + 1/(n-1)) / Gamma(n/(n-1)).
double s_complete_closed_form(double n);

/// alpha_n making the first zero of the rescaled Cauchy solution equal R.
double alpha_n(double radius, double n);
/// First zero T of w for the parametrisation alpha^(n+1) = c (n-1).
double first_zero(double c, double n);
/// c giving T = radius, i.e. alpha_n(radius, n)^(n+1) / (n-1).
double c_for_radius(double radius, double n);

/// Lower bracket c_n (T = 1) and upper bracket 4 c_n (T = 2).
double c_lower(double n);
double c_upper(double n);

/// w(t) solving -w'' = 1 / (c (n-1) w^n), w(0) = 1, w'(0) = 0, on [0, T].
double profile_w(double t, double n, double c);
double profile_w(double t, double c, const SingularIntegral& s);
/// w'(t) from the first integral of the ODE.
double profile_w_slope(double t, double n, double c);
double profile_w_slope(double t, double c, const SingularIntegral& s);
/// (n+1) log w(t); finite for t < T.
double log_profile_power(double t, double c, const SingularIntegral& s);

/// F(c) = w_c(1)^(n+1) - 2/(c (n-1)^2) S^-1(sqrt(2/c)); zero exactly when
/// the linear continuation of w past t = 1 vanishes at t = 2.
double matching_residual(double c, double n);
double matching_residual(double c, const SingularIntegral& s);

struct MatchingRoot {
    double c = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double residual = 0.0;
    int iterations = 0;
    /// F increasing on the sampled points of the bracket.
    bool monotone_on_samples = false;
};

/// Root of matching_residual in (c_lower (1 + 1e-6), c_upper].
/// Throws ConstructionFailure when the bracket holds no sign change.
MatchingRoot find_cn(double n);

/// w on [0, 1] continued linearly as w(1)(2 - t) on (1, 2].
double piecewise_y(double t, double n, double c);
double piecewise_y(double t, double c, const SingularIntegral& s);

enum class Geometry {
    interval,      ///< f = 1 on (-R, R)
    inner_source,  ///< f = indicator of (-1, 1) on (-2, 2)
};

/// Closed-form limits as n -> infinity.
struct LimitProfile {
    Geometry geometry = Geometry::interval;
    double radius = 1.0;  ///< R for the interval; 2 for the inner source

    /// Limit of w_n^(n+1) (resp. y_n^(n+1)).
    double g(double t) const;
    double v(double t) const;
    double u(double t) const;
};

LimitProfile limit_profiles(double radius, Geometry geometry);

/// Finite-n solution of one of the two 1-D model problems, evaluated through
/// the exact quadrature relations.
class OneDProfile {
public:
    /// -u'' = 1/u^n on (-R, R).
    static OneDProfile interval(double n, double radius);
    /// -u'' = indicator(-1,1) / u^n on (-2, 2); solves for c_n.
    static OneDProfile inner_source(double n);

    double n() const noexcept { return integral_.n(); }
    Geometry geometry() const noexcept { return geometry_; }
    double c() const noexcept { return c_; }
    double alpha() const noexcept { return alpha_; }
    double first_zero() const noexcept { return first_zero_; }
    /// Half-width of the domain.
    double radius() const noexcept { return radius_; }

    /// Normalised profile (w for the interval, y for the inner source), even in t.
    double shape(double t) const;
    double u(double t) const;
    /// u^(n+1)/(n+1) evaluated in the log domain.
    double v(double t) const;

    /// Tabulated shape on [0, radius] with `samples` equispaced points.
    std::vector<double> shape_table(int samples) const;

private:
    OneDProfile(Geometry geometry, double c, double radius, SingularIntegral integral);
    double log_shape_power(double t) const;

    Geometry geometry_;
    double c_;
    double radius_;
    SingularIntegral integral_;
    double alpha_;
    double first_zero_;
};

}  // namespace singlim::oned
