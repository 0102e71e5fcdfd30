#pragma once

// The measure tilted by e^{theta u S_u}. Under it the indicators stay independent and
// T_i has the two-branch law below (y = c_i u, a = t/u):
//   P(T_i <= t) = (1 - e^{-a y}) / den(y)                       t <= u
//   P(T_i <= t) = 1 - (1 - p_hit) e^{-c_i (t - u)}              t >  u

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

// pchip in this Boost release calls isnan unqualified; math.h puts it in the global scope
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include "thinlevy/errors.hpp"
#include "thinlevy/expansion.hpp"
#include "thinlevy/model.hpp"
#include "thinlevy/params.hpp"
#include "thinlevy/rate.hpp"

namespace thinlevy {

struct TiltedIndicatorLaw {
    std::int64_t i;
    double u;
    double theta;
    double p_hit;
    double c;

    static TiltedIndicatorLaw make(std::int64_t i, double u, double theta, const ModelParams& p) {
        if (!(u > 0)) throw DomainError("tilt", "u must be positive");
        if (!(theta > -1.0)) throw DomainError("tilt", "theta must exceed -1");
        double c = coeff(i, p);
        return {i, u, theta, kernel_h(c * u, 1.0, theta), c};
    }

    double cdf(double t) const {
        if (!(t > 0)) return 0.0;
        if (t <= u) return kernel_h(c * u, t / u, theta);
        return 1.0 - (1.0 - p_hit) * std::exp(-c * (t - u));
    }

    // inverse CDF, U in (0,1)
    double quantile(double U) const {
        if (U <= p_hit) return -std::log1p(-U * kernel_den(c * u, theta)) / c;
        return u - std::log((1.0 - U) / (1.0 - p_hit)) / c;
    }
};

inline double tilted_cdf(std::int64_t i, double t, double u, double theta, const ModelParams& p) {
    if (!(t >= 0)) throw DomainError("tilt", "t must be >= 0");
    return TiltedIndicatorLaw::make(i, u, theta, p).cdf(t);
}

namespace detail {

inline void check_time(double t, double u) {
    if (!(u > 0)) throw DomainError("tilt", "u must be positive");
    if (!(t >= 0 && t <= u)) throw DomainError("tilt", "t must lie in [0,u]");
}

// (e^{-a y} - e^{-y}) / den: tilted probability that T_i falls in (t, u]
template <class T>
T kernel_hJ(T y, double a, double theta) {
    return (xexp(-a * y) - xexp(-y)) / kernel_den(y, theta);
}

template <class T>
T kernel_one_minus_hJ(T y, double a, double theta) {
    return (-xexpm1(-a * y) + xexp(-(1.0 + theta) * y)) / kernel_den(y, theta);
}

} // namespace detail

// Moment sums over i >= first_index. The simulator reuses them for the indicators it does
// not draw individually.
struct MomentSums {
    double theta;
    ModelParams p;
    TruncationPolicy tr;
    std::int64_t first_index = 2;
    double radius = analytic_radius(theta);

    // sum_i c_i (P(T_i <= t) - c_i t)
    double mean_part(double t, double u) const {
        detail::check_time(t, u);
        double a = t / u, th = theta;
        auto k1 = [a, th](auto y) { return y * (kernel_h(y, a, th) - a * y); };
        return index_sum(k1, u, p, tr, {radius, 3, first_index}).value / u;
    }

    // sum_i c_i^2 P(T_i <= s)(1 - P(T_i <= t)), s <= t
    double cov_part(double s, double t, double u) const {
        detail::check_time(s, u);
        detail::check_time(t, u);
        if (s > t) std::swap(s, t);
        double as = s / u, at = t / u, th = theta;
        auto k = [as, at, th](auto y) { return y * y * kernel_h(y, as, th) * kernel_one_minus_h(y, at, th); };
        return index_sum(k, u, p, tr, {radius, 3, first_index}).value / (u * u);
    }

    double var_increment(double t, double u) const {
        detail::check_time(t, u);
        double a = t / u, th = theta;
        auto k4 = [a, th](auto y) {
            return y * y * detail::kernel_hJ(y, a, th) * detail::kernel_one_minus_hJ(y, a, th);
        };
        return index_sum(k4, u, p, tr, {radius, 3, first_index}).value / (u * u);
    }

    // Cov[S_t, S_u - S_t] = -sum c_i^2 P(T_i <= t) P(t < T_i <= u)
    double cov_increment(double t, double u) const {
        detail::check_time(t, u);
        double a = t / u, th = theta;
        auto k5 = [a, th](auto y) { return y * y * kernel_h(y, a, th) * detail::kernel_hJ(y, a, th); };
        return -index_sum(k5, u, p, tr, {radius, 3, first_index}).value / (u * u);
    }

    // sum_i c_i^3 E|B_i - p_i|^3 at time t, the Lyapunov numerator of the Gaussian approximation
    double third_abs_moment(double t, double u) const {
        detail::check_time(t, u);
        double a = t / u, th = theta;
        auto k = [a, th](auto y) {
            auto h = kernel_h(y, a, th);
            auto g = kernel_one_minus_h(y, a, th);
            return y * y * y * h * g * (h * h + g * g);
        };
        return index_sum(k, u, p, tr, {radius, 4, first_index}).value / (u * u * u);
    }
};

inline double tilted_mean_exact(double t, double u, double theta, const ModelParams& p, const TruncationPolicy& tr = {}) {
    return 1.0 + p.beta_tilde * t + MomentSums{theta, p, tr}.mean_part(t, u);
}

inline double tilted_var_exact(double t, double u, double theta, const ModelParams& p, const TruncationPolicy& tr = {}) {
    return MomentSums{theta, p, tr}.cov_part(t, t, u);
}

inline double tilted_var_increment_exact(double t, double u, double theta, const ModelParams& p,
                                         const TruncationPolicy& tr = {}) {
    return MomentSums{theta, p, tr}.var_increment(t, u);
}

inline double tilted_cov_exact(double t, double u, double theta, const ModelParams& p, const TruncationPolicy& tr = {}) {
    return MomentSums{theta, p, tr}.cov_increment(t, u);
}

inline double tilted_mean_exact(double t, const RefinedTilt& rt, const ModelParams& p, const TruncationPolicy& tr = {}) {
    return tilted_mean_exact(t, rt.u, rt.theta_star_u, p, tr);
}
inline double tilted_var_exact(double t, const RefinedTilt& rt, const ModelParams& p, const TruncationPolicy& tr = {}) {
    return tilted_var_exact(t, rt.u, rt.theta_star_u, p, tr);
}
inline double tilted_var_increment_exact(double t, const RefinedTilt& rt, const ModelParams& p,
                                         const TruncationPolicy& tr = {}) {
    return tilted_var_increment_exact(t, rt.u, rt.theta_star_u, p, tr);
}
inline double tilted_cov_exact(double t, const RefinedTilt& rt, const ModelParams& p, const TruncationPolicy& tr = {}) {
    return tilted_cov_exact(t, rt.u, rt.theta_star_u, p, tr);
}

// Shape functions. All are (tau-1) int_0^inf F(v) v^-w dv in the y variable.

namespace detail {
inline void check_shape_args(double a, double theta) {
    if (!(a >= 0 && a <= 1)) throw DomainError("tilt", "a must lie in [0,1]");
    if (!(theta > -1.0) || !std::isfinite(theta)) throw DomainError("tilt", "theta must be finite and exceed -1");
}
} // namespace detail

inline double shape_IE(double a, double theta, const ModelParams& p, const QuadratureSpec& qs = {}) {
    detail::check_shape_args(a, theta);
    if (a == 0) return 0.0;
    auto f = [a, theta](auto v) { return kernel_h(v, a, theta) - a * v; };
    auto rem = [a, theta](double v) {
        return (std::exp(-v) - std::exp(-(1.0 + theta) * v) - std::exp(-a * v)) / kernel_den(v, theta);
    };
    WeightSpec ws{p.tau - 1.0, 2, analytic_radius(theta), {1.0, -a, 0.0}};
    return (p.tau - 1.0) * weighted_integral(f, rem, ws, qs).value;
}

inline double shape_IV(double a, double theta, const ModelParams& p, const QuadratureSpec& qs = {}) {
    detail::check_shape_args(a, theta);
    if (a == 0) return 0.0;
    auto f = [a, theta](auto v) { return kernel_h(v, a, theta) * kernel_one_minus_h(v, a, theta); };
    WeightSpec ws{p.tau - 2.0, 1, analytic_radius(theta), {}};
    return (p.tau - 1.0) * weighted_integral(f, f, ws, qs).value;
}

inline double shape_JV(double a, double theta, const ModelParams& p, const QuadratureSpec& qs = {}) {
    detail::check_shape_args(a, theta);
    if (a == 1) return 0.0;
    auto f = [a, theta](auto v) { return detail::kernel_hJ(v, a, theta) * detail::kernel_one_minus_hJ(v, a, theta); };
    WeightSpec ws{p.tau - 2.0, 1, analytic_radius(theta), {}};
    return (p.tau - 1.0) * weighted_integral(f, f, ws, qs).value;
}

inline double shape_GV(double a, double theta, const ModelParams& p, const QuadratureSpec& qs = {}) {
    detail::check_shape_args(a, theta);
    if (a == 0 || a == 1) return 0.0;
    auto f = [a, theta](auto v) { return kernel_h(v, a, theta) * detail::kernel_hJ(v, a, theta); };
    WeightSpec ws{p.tau - 2.0, 2, analytic_radius(theta), {}};
    return (p.tau - 1.0) * weighted_integral(f, f, ws, qs).value;
}

// small-a limit of I_V(a) / a^{tau-3}: (tau-1) int (1-e^-y) e^-y y^{-(tau-2)} dy
inline double shape_IV_small_a_constant(const ModelParams& p, const QuadratureSpec& qs = {}) {
    auto f = [](auto y) { return -xexpm1(-y) * xexp(-y); };
    WeightSpec ws{p.tau - 2.0, 1, entire_radius, {}};
    return (p.tau - 1.0) * weighted_integral(f, f, ws, qs).value;
}

// I_E, I_V, J_V, G_V on a uniform a-grid with monotone cubic interpolation in between.
class ShapeTable {
public:
    static constexpr int default_points = 201;

    ShapeTable(double theta, const ModelParams& p, int points = default_points, const QuadratureSpec& qs = {})
        : theta_(theta) {
        if (points < 2) throw DomainError("tilt", "shape grid needs at least two points");
        a_.resize(points);
        for (int j = 0; j < points; ++j) a_[j] = static_cast<double>(j) / (points - 1);
        a_.back() = 1.0;
        for (auto& c : cols_) c.resize(points);
        for (int j = 0; j < points; ++j) {
            cols_[0][j] = shape_IE(a_[j], theta, p, qs);
            cols_[1][j] = shape_IV(a_[j], theta, p, qs);
            cols_[2][j] = shape_JV(a_[j], theta, p, qs);
            cols_[3][j] = shape_GV(a_[j], theta, p, qs);
        }
        for (int k = 0; k < 4; ++k) {
            auto x = a_;
            auto y = cols_[k];
            interp_[k].emplace_back(std::move(x), std::move(y));
        }
    }

    double theta() const { return theta_; }
    const std::vector<double>& grid() const { return a_; }
    const std::vector<double>& IE_values() const { return cols_[0]; }
    const std::vector<double>& IV_values() const { return cols_[1]; }
    const std::vector<double>& JV_values() const { return cols_[2]; }
    const std::vector<double>& GV_values() const { return cols_[3]; }

    double IE(double a) const { return eval(0, a); }
    double IV(double a) const { return eval(1, a); }
    double JV(double a) const { return eval(2, a); }
    double GV(double a) const { return eval(3, a); }

private:
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;

    double eval(int k, double a) const {
        if (!(a >= 0 && a <= 1)) throw DomainError("tilt", "a must lie in [0,1]");
        return interp_[k].front()(a);
    }

    double theta_;
    std::vector<double> a_;
    std::array<std::vector<double>, 4> cols_;
    std::array<std::vector<Pchip>, 4> interp_;   // pchip is not default constructible
};

// Scalings that turn (S_t - E S_t, S_u - S_t - E[...]) into unit-variance coordinates.
struct JointScaling {
    double l1_scale;   // I_V(a)^{-1/2} u^{-(tau-3)/2}
    double l2_scale;   // J_V(a)^{-1/2} u^{-(tau-3)/2}, 0 when J_V(a) = 0
};

inline JointScaling joint_scaling(double t, double u, double theta_shape, const ModelParams& p) {
    detail::check_time(t, u);
    if (t == 0) throw DomainError("tilt", "the standardized pair is undefined at t = 0");
    double a = t / u;
    double un = std::pow(u, -(p.tau - 3.0) / 2.0);
    double iv = shape_IV(a, theta_shape, p), jv = shape_JV(a, theta_shape, p);
    return {un / std::sqrt(iv), jv > 0 ? un / std::sqrt(jv) : 0.0};
}

// log E~[exp(l1~ (S_t - E S_t) + l2~ (S_u - S_t - E[S_u - S_t]))], computed as the exact product
// over indicators. Standardized with the shape functions at the tilt in force.
inline double joint_mgf_tilted(double lambda1, double lambda2, double t, double u, double theta,
                               const ModelParams& p, const TruncationPolicy& tr = {}) {
    JointScaling sc = joint_scaling(t, u, theta, p);
    double l1 = lambda1 * sc.l1_scale / u, l2 = lambda2 * sc.l2_scale / u;
    if (lambda2 != 0 && sc.l2_scale == 0) throw DomainError("tilt", "increment has zero variance at t = u");
    if (lambda1 == 0 && lambda2 == 0) return 0.0;
    double a = t / u;
    auto F = [a, theta, l1, l2](auto y) {
        auto p1 = kernel_h(y, a, theta);
        auto p2 = detail::kernel_hJ(y, a, theta);
        // log1p(X) - X + (X - linear part), each piece free of cancellation
        auto X = xexpm1(l1 * y) * p1 + xexpm1(l2 * y) * p2;
        return xlog1pmx(X) + p1 * xexpm1mx(l1 * y) + p2 * xexpm1mx(l2 * y);
    };
    // 1 + p1 (e^x - 1) + p2 (e^z - 1) is a mixture of positive numbers when p1 + p2 <= 1
    double r = std::min(analytic_radius(theta),
                        std::abs(l1) + std::abs(l2) > 0 ? 1.0 / (std::abs(l1) + std::abs(l2)) : entire_radius);
    auto s = index_sum(F, u, p, tr, {r, 3, 2});
    if (!std::isfinite(s.value)) throw DomainError("tilt", "per-indicator MGF factor is not positive");
    return s.value;
}

inline double joint_mgf_tilted(double lambda1, double lambda2, double t, const RefinedTilt& rt,
                               const ModelParams& p, const TruncationPolicy& tr = {}) {
    return joint_mgf_tilted(lambda1, lambda2, t, rt.u, rt.theta_star_u, p, tr);
}

} // namespace thinlevy
