#include "singlim/oned.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace singlim::oned {
namespace {

constexpr double kPi = std::numbers::pi;

// Recursive adaptive Simpson with the Richardson correction.
template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    if (b <= a) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 60);
}

// Safeguarded Newton for a monotone increasing `value` on [lo, hi].
template <class Value, class Slope>
double solve_increasing(const Value& value, const Slope& slope, double target, double lo, double hi,
                        double guess, double tol) {
    double x = std::clamp(guess, lo, hi);
    for (int it = 0; it < 100; ++it) {
        const double r = value(x) - target;
        if (std::abs(r) <= tol) return x;
        if (r < 0.0) lo = x; else hi = x;
        double next = x - r / slope(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

void require_order(double n) {
    if (!(n >= 3.0)) {
        std::ostringstream msg;
        msg << "1-D construction needs n >= 3, got " << n;
        throw DomainError(msg.str());
    }
}

}  // namespace

double gamma_fn(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        std::ostringstream msg;
        msg << "gamma_fn: argument must be positive and finite, got " << x;
        throw DomainError(msg.str());
    }
    return std::tgamma(x);
}

SingularIntegral::SingularIntegral(double n, double tolerance) : n_(n), tol_(tolerance) {
    require_order(n);
    if (std::isinf(n)) {
        p_ = 0.5;
        q_ = 2.0;
    } else {
        p_ = (n - 3.0) / (2.0 * (n - 1.0));
        q_ = 2.0 * (n - 1.0) / (n + 1.0);
    }
    tau_half_ = std::pow(0.5, 1.0 / q_);
    left_half_ = left(std::sqrt(0.5));
    right_half_ = right(tau_half_);
}

double SingularIntegral::left(double s) const {
    const double p = p_;
    auto integrand = [p](double r) { return 2.0 * std::exp(-p * std::log1p(-r * r)); };
    return adaptive_simpson(integrand, 0.0, s, tol_);
}

double SingularIntegral::right(double t) const {
    const double q = q_;
    auto integrand = [q](double r) {
        if (r <= 0.0) return q;
        return q / std::sqrt(-std::expm1(q * std::log(r)));
    };
    return adaptive_simpson(integrand, 0.0, t, tol_);
}

double SingularIntegral::operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
        std::ostringstream msg;
        msg << "S_n: argument " << x << " outside [0, 1]";
        throw DomainError(msg.str());
    }
    if (x <= 0.5) return left(std::sqrt(x));
    const double tau = std::pow(1.0 - x, 1.0 / q_);
    return left_half_ + (right_half_ - right(tau));
}

SingularIntegral::Split SingularIntegral::invert(double y) const {
    const double total = complete();
    if (!(y >= 0.0) || y > total * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "S_n inverse: value " << y << " outside [0, " << total << "]";
        throw DomainError(msg.str());
    }
    y = std::min(y, total);
    const double tol = 4.0 * tol_;
    if (y <= left_half_) {
        const double p = p_;
        auto value = [this](double s) { return left(s); };
        auto slope = [p](double s) { return 2.0 * std::exp(-p * std::log1p(-s * s)); };
        const double s = solve_increasing(value, slope, y, 0.0, std::sqrt(0.5), 0.5 * y, tol);
        return {s * s, 1.0 - s * s};
    }
    // Solve right(tau) = S(1) - y, then 1 - x = tau^q.
    const double q = q_;
    const double target = total - y;
    auto value = [this](double t) { return right(t); };
    auto slope = [q](double t) {
        return t <= 0.0 ? q : q / std::sqrt(-std::expm1(q * std::log(t)));
    };
    const double tau = solve_increasing(value, slope, target, 0.0, tau_half_, target / q, tol);
    const double complement = tau > 0.0 ? std::exp(q * std::log(tau)) : 0.0;
    return {1.0 - complement, complement};
}

double SingularIntegral::inverse(double y) const {
    return invert(y).x;
}

double SingularIntegral::inverse_complement(double y) const {
    return invert(y).complement;
}

double s_integral(double x, double n) {
    return SingularIntegral(n)(x);
}

double s_inverse(double y, double n) {
    return SingularIntegral(n).inverse(y);
}

double s_complete_closed_form(double n) {
    require_order(n);
    if (std::isinf(n)) return kPi;
    const double d = 1.0 / (n - 1.0);
    return std::sqrt(kPi) * gamma_fn(0.5 + d) / gamma_fn(1.0 + d);
}

double c_lower(double n) {
    const double s1 = s_complete_closed_form(n);
    return 2.0 / (s1 * s1);
}

double c_upper(double n) {
    return 4.0 * c_lower(n);
}

double first_zero(double c, double n) {
    if (!(c > 0.0)) throw DomainError("first_zero: c must be positive");
    return std::sqrt(0.5 * c) * s_complete_closed_form(n);
}

double c_for_radius(double radius, double n) {
    if (!(radius > 0.0)) throw DomainError("c_for_radius: radius must be positive");
    return radius * radius * c_lower(n);
}

double alpha_n(double radius, double n) {
    // alpha^(n+1) = c (n-1) with T(c) = radius.
    const double c = c_for_radius(radius, n);
    return std::exp((std::log(c) + std::log(n - 1.0)) / (n + 1.0));
}

namespace {

double check_time(double t, double c, const SingularIntegral& s) {
    const double tz = first_zero(c, s.n());
    if (!(t >= 0.0) || t > tz * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "1-D profile: t = " << t << " outside [0, T = " << tz << "]";
        throw DomainError(msg.str());
    }
    // Measure time in units of the closed-form T so that t = T lands exactly
    // on the quadrature value of S_n(1); the two agree to quadrature accuracy.
    return s.complete() * std::min(t / tz, 1.0);
}

}  // namespace

double profile_w(double t, double c, const SingularIntegral& s) {
    const double complement = s.inverse_complement(check_time(t, c, s));
    if (complement <= 0.0) return 0.0;
    return std::exp(std::log(complement) / (s.n() - 1.0));
}

double profile_w(double t, double n, double c) {
    return profile_w(t, c, SingularIntegral(n));
}

double log_profile_power(double t, double c, const SingularIntegral& s) {
    const double complement = s.inverse_complement(check_time(t, c, s));
    const double n = s.n();
    if (complement <= 0.0) return -std::numeric_limits<double>::infinity();
    return (n + 1.0) / (n - 1.0) * std::log(complement);
}

double profile_w_slope(double t, double c, const SingularIntegral& s) {
    const double y = check_time(t, c, s);
    const double complement = s.inverse_complement(y);
    const double x = 1.0 - complement;
    if (complement <= 0.0) return -std::numeric_limits<double>::infinity();
    // w'^2 = 2/(c (n-1)^2) (w^(1-n) - 1) and w^(1-n) - 1 = x / (1 - x).
    return -std::sqrt(2.0 / c) / (s.n() - 1.0) * std::sqrt(x / complement);
}

double profile_w_slope(double t, double n, double c) {
    return profile_w_slope(t, c, SingularIntegral(n));
}

double matching_residual(double c, const SingularIntegral& s) {
    const double n = s.n();
    const double complement = s.inverse_complement(check_time(1.0, c, s));
    const double x = 1.0 - complement;
    const double w_power =
        complement > 0.0 ? std::exp((n + 1.0) / (n - 1.0) * std::log(complement)) : 0.0;
    return w_power - 2.0 * x / (c * (n - 1.0) * (n - 1.0));
}

double matching_residual(double c, double n) {
    return matching_residual(c, SingularIntegral(n));
}

MatchingRoot find_cn(double n) {
    const SingularIntegral s(n);
    MatchingRoot root;
    root.lower = c_lower(n);
    root.upper = c_upper(n);

    double lo = root.lower * (1.0 + 1e-6);
    double hi = root.upper;
    double f_lo = matching_residual(lo, s);
    double f_hi = matching_residual(hi, s);
    if (!(f_lo < 0.0 && f_hi >= 0.0)) {
        std::ostringstream msg;
        msg << "find_cn: no sign change for n = " << n << " (F(" << lo << ") = " << f_lo
            << ", F(" << hi << ") = " << f_hi << ")";
        throw ConstructionFailure(msg.str());
    }

    double prev = f_lo;
    root.monotone_on_samples = true;
    constexpr int kSamples = 9;
    for (int k = 1; k < kSamples; ++k) {
        const double c = lo + (hi - lo) * k / (kSamples - 1);
        const double f = matching_residual(c, s);
        if (!(f > prev)) root.monotone_on_samples = false;
        prev = f;
    }

    int it = 0;
    while (hi - lo > 1e-6 && it < 200) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = matching_residual(mid, s);
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        ++it;
    }

    // Secant polish kept inside the bracket (Illinois variant).
    double c = hi;
    double f_c = f_hi;
    int side = 0;
    for (int k = 0; k < 100 && std::abs(f_c) > 1e-15; ++k, ++it) {
        c = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if (!(c > lo && c < hi)) c = 0.5 * (lo + hi);
        f_c = matching_residual(c, s);
        if (f_c < 0.0) {
            lo = c;
            f_lo = f_c;
            if (side == -1) f_hi *= 0.5;
            side = -1;
        } else {
            hi = c;
            f_hi = f_c;
            if (side == 1) f_lo *= 0.5;
            side = 1;
        }
        if (hi - lo <= 1e-15 * hi) break;
    }
    root.c = c;
    root.residual = f_c;
    root.iterations = it;
    return root;
}

double piecewise_y(double t, double c, const SingularIntegral& s) {
    if (!(t >= 0.0 && t <= 2.0)) {
        std::ostringstream msg;
        msg << "piecewise_y: t = " << t << " outside [0, 2]";
        throw DomainError(msg.str());
    }
    if (t <= 1.0) return profile_w(t, c, s);
    return profile_w(1.0, c, s) * (2.0 - t);
}

double piecewise_y(double t, double n, double c) {
    return piecewise_y(t, c, SingularIntegral(n));
}

double LimitProfile::g(double t) const {
    const double a = std::abs(t);
    const double half = geometry == Geometry::interval ? radius : 1.0;
    if (a >= half) return 0.0;
    const double cs = std::cos(kPi * t / (2.0 * half));
    return cs * cs;
}

double LimitProfile::v(double t) const {
    const double half = geometry == Geometry::interval ? radius : 1.0;
    return 2.0 * half * half / (kPi * kPi) * g(t);
}

double LimitProfile::u(double t) const {
    const double a = std::abs(t);
    if (geometry == Geometry::interval) return a < radius ? 1.0 : 0.0;
    if (a <= 1.0) return 1.0;
    return std::max(2.0 - a, 0.0);
}

LimitProfile limit_profiles(double radius, Geometry geometry) {
    if (geometry == Geometry::inner_source) return {geometry, 2.0};
    if (!(radius > 0.0)) throw DomainError("limit_profiles: radius must be positive");
    return {geometry, radius};
}

OneDProfile::OneDProfile(Geometry geometry, double c, double radius, SingularIntegral integral)
    : geometry_(geometry),
      c_(c),
      radius_(radius),
      integral_(std::move(integral)),
      alpha_(std::exp((std::log(c) + std::log(integral_.n() - 1.0)) / (integral_.n() + 1.0))),
      first_zero_(oned::first_zero(c, integral_.n())) {}

OneDProfile OneDProfile::interval(double n, double radius) {
    return OneDProfile(Geometry::interval, c_for_radius(radius, n), radius, SingularIntegral(n));
}

OneDProfile OneDProfile::inner_source(double n) {
    const auto root = find_cn(n);
    return OneDProfile(Geometry::inner_source, root.c, 2.0, SingularIntegral(n));
}

double OneDProfile::shape(double t) const {
    const double a = std::min(std::abs(t), radius_);
    if (geometry_ == Geometry::interval) return a >= radius_ ? 0.0 : profile_w(a, c_, integral_);
    return piecewise_y(a, c_, integral_);
}

double OneDProfile::u(double t) const {
    return alpha_ * shape(t);
}

double OneDProfile::log_shape_power(double t) const {
    const double a = std::min(std::abs(t), radius_);
    const double n = integral_.n();
    if (geometry_ == Geometry::interval) {
        if (a >= radius_) return -std::numeric_limits<double>::infinity();
        return log_profile_power(a, c_, integral_);
    }
    if (a <= 1.0) return log_profile_power(a, c_, integral_);
    if (a >= 2.0) return -std::numeric_limits<double>::infinity();
    return log_profile_power(1.0, c_, integral_) + (n + 1.0) * std::log(2.0 - a);
}

double OneDProfile::v(double t) const {
    const double n = integral_.n();
    const double lp = log_shape_power(t);
    if (std::isinf(lp)) return 0.0;
    return std::exp(std::log(c_ * (n - 1.0) / (n + 1.0)) + lp);
}

std::vector<double> OneDProfile::shape_table(int samples) const {
    if (samples < 2) throw DomainError("shape_table: need at least 2 samples");
    std::vector<double> table(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        table[static_cast<std::size_t>(k)] = shape(radius_ * k / (samples - 1));
    }
    return table;
}

}  // namespace singlim::oned
