#pragma once

// Exact sums over the indicator index and power-weighted integrals of model kernels.
//
// Every kernel K(y) used here (y = c_i u) vanishes like y^k0 at the origin and is analytic
// in a disk whose radius is set by the zeros of e^{(1+theta)y} - e^{theta y} + 1. Near the
// origin we therefore work with Taylor coefficients sampled on a Cauchy circle, which avoids
// the catastrophic cancellation of evaluating the kernels directly for small y.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <type_traits>
#include <vector>

#include "thinlevy/errors.hpp"
#include "thinlevy/numerics/quadrature.hpp"
#include "thinlevy/numerics/series.hpp"
#include "thinlevy/numerics/summation.hpp"
#include "thinlevy/numerics/tail_sum.hpp"
#include "thinlevy/params.hpp"

namespace thinlevy {

inline constexpr double entire_radius = 1.5;

// Largest radius (on a geometric ladder from 1.5) free of zeros of
// e^{(1+theta)y} - e^{theta y} + 1. Non-finite theta means "entire kernel".
inline double analytic_radius(double theta) {
    if (!std::isfinite(theta)) return entire_radius;
    auto g = [theta](cplx y) { return std::exp((1.0 + theta) * y) - std::exp(theta * y) + 1.0; };
    double r = entire_radius;
    for (int j = 0; j < 80; ++j, r *= 0.85) {
        if (winding_number(g, r) != 0) continue;
        double mn = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 256; ++k) {
            double a = 2.0 * std::numbers::pi * (k + 0.5) / 256;
            mn = std::min(mn, std::abs(g(cplx(r * std::cos(a), r * std::sin(a)))));
        }
        if (mn > 1e-3) return r;
    }
    throw ConvergenceError("model", "no analytic disk found for the kernel");
}

struct LocalSeries {
    double r;                  // sampling radius
    std::vector<cplx> coeff;   // Taylor coefficients e_k
};

inline constexpr int series_points = 256;

// Taylor coefficients of f, shrinking the circle until the sampled coefficients decay
// (a singularity inside the circle shows up as non-decaying e_k r^k).
template <class F>
LocalSeries local_series(F&& f, double r_free) {
    double r = 0.6 * r_free;
    for (int attempt = 0; attempt < 12; ++attempt, r *= 0.7) {
        auto c = taylor_coefficients(f, r, series_points);
        double peak = 0, late = 0;
        double rk = 1;
        for (int k = 0; k < series_points; ++k, rk *= r) {
            double m = std::abs(c[k]) * rk;
            if (k < series_points * 3 / 4) peak = std::max(peak, m);
            else late = std::max(late, m);
        }
        if (std::isfinite(peak) && late <= 1e-13 * peak + 1e-300) return {r, std::move(c)};
    }
    throw ConvergenceError("model", "kernel Taylor coefficients do not decay on any circle");
}

template <class V>
struct IndexSum {
    V value{};
    V direct{};         // sum over first_index..N
    V compensation{};   // analytic tail sum over i > N
    std::int64_t N = 0;
    double est_error = 0;
};

struct SumSpec {
    double r_free = entire_radius;  // analytic radius of the kernel
    int k0 = 3;                     // kernel = O(y^k0); needs k0 alpha > 1
    std::int64_t first_index = 2;
};

// sum_{i >= first_index} f(c_i u) with c_i = i^-alpha. f must accept double and complex.
template <class F>
auto index_sum(F&& f, double u, const ModelParams& p, const TruncationPolicy& tr, const SumSpec& spec)
    -> IndexSum<std::conditional_t<std::is_same_v<std::decay_t<decltype(f(1.0))>, double>, double, cplx>> {
    using V = std::conditional_t<std::is_same_v<std::decay_t<decltype(f(1.0))>, double>, double, cplx>;
    if (!(u > 0)) throw DomainError("model", "horizon u must be positive");
    if (!(spec.k0 * p.alpha > 1.0)) throw DomainError("model", "kernel order too low for a convergent sum");
    constexpr double eps = std::numeric_limits<double>::epsilon();

    LocalSeries ls = local_series(f, spec.r_free);
    const double y_sw = 0.75 * ls.r;
    double n_series = std::ceil(std::pow(u / y_sw, p.tau - 1.0));
    double n_need = std::max({static_cast<double>(tr.n_terms(u, p)), n_series,
                              static_cast<double>(spec.first_index - 1)});
    if (n_need > static_cast<double>(tr.max_terms))
        throw TruncationError("model", "exact sum would need more than max_terms indicators");
    const std::int64_t N = static_cast<std::int64_t>(n_need);

    IndexSum<V> out;
    out.N = N;
    NeumaierSum<V> acc;
    double mag = 0;
    // smallest terms first
    for (std::int64_t i = N; i >= spec.first_index; --i) {
        double y = u * std::pow(static_cast<double>(i), -p.alpha);
        V v = f(y);
        acc += v;
        mag += std::abs(v);
    }
    out.direct = acc.value();

    // tail: sum_k e_k sum_{i>N} y_i^k = sum_k e_k y_N^k * sum_{i>N} (i/N)^{-k alpha}
    const double yN = u * std::pow(static_cast<double>(N), -p.alpha);
    NeumaierSum<V> comp;
    double last = 0, cmag = 0;
    int small_run = 0;
    double ypow = std::pow(yN, spec.k0);
    for (int k = spec.k0; k < series_points; ++k, ypow *= yN) {
        double ts = power_tail_scaled(k * p.alpha, N);
        V e;
        if constexpr (std::is_same_v<V, double>) e = ls.coeff[k].real();
        else e = ls.coeff[k];
        V term = e * (ypow * ts);
        comp += term;
        double at = std::abs(term);
        cmag += at;
        last = at;
        if (at <= 1e-18 * (std::abs(comp.value()) + mag)) {
            if (++small_run >= 3) break;
        } else {
            small_run = 0;
        }
    }
    out.compensation = comp.value();
    double trunc_err = 4 * last + 16 * eps * cmag;
    if (tr.compensate_tail) {
        out.value = out.direct + out.compensation;
        out.est_error = trunc_err + 16 * eps * mag;
    } else {
        out.value = out.direct;
        out.est_error = std::abs(out.compensation) + trunc_err + 16 * eps * mag;
    }
    if (out.est_error > tr.max_tail_error)
        throw TruncationError("model", "certified tail bound exceeds the caller limit");
    return out;
}

// Polynomial growth of a kernel at infinity: F(y) = p0 + p1 y + p2 y^2 + rem(y), rem -> 0
// exponentially.
struct PolyTail {
    double p0 = 0, p1 = 0, p2 = 0;
};

struct WeightSpec {
    double w;                       // weight y^-w
    int k0;                         // F = O(y^k0) at 0, needs k0 + 1 - w > 0
    double r_free = entire_radius;
    PolyTail poly{};
};

// int_0^inf F(y) y^-w dy. Head [0, y0] from the Taylor series of F, tail from adaptive
// quadrature of rem plus the closed-form integral of the polynomial part.
template <class F, class Rem>
QuadResult weighted_integral(F&& f, Rem&& rem, const WeightSpec& ws, const QuadratureSpec& qs = {}) {
    const double w = ws.w;
    if (!(ws.k0 + 1.0 - w > 0)) throw DomainError("model", "weighted integral diverges at 0");
    if ((ws.poly.p2 != 0 && !(w > 3)) || (ws.poly.p1 != 0 && !(w > 2)) || (ws.poly.p0 != 0 && !(w > 1)))
        throw DomainError("model", "weighted integral diverges at infinity");
    LocalSeries ls = local_series(f, ws.r_free);
    const double y0 = 0.5 * ls.r;

    NeumaierSum<> head;
    double last = 0;
    double ypow = std::pow(y0, ws.k0 + 1.0 - w);
    for (int k = ws.k0; k < series_points; ++k, ypow *= y0) {
        double t = ls.coeff[k].real() * ypow / (k + 1.0 - w);
        head += t;
        last = std::abs(t);
        if (k > ws.k0 + 8 && last < 1e-20 * std::abs(head.value())) break;
    }

    auto g = [&](double t) {
        if (t <= 0) return 0.0;
        double y = y0 / t;
        double v = rem(y);
        if (v == 0.0) return 0.0;
        double r = v * std::pow(y, -w) * y0 / (t * t);
        return std::isfinite(r) ? r : 0.0;
    };
    QuadResult tail = integrate_interval(g, 0.0, 1.0, qs);
    double poly = 0;
    if (ws.poly.p0 != 0) poly += ws.poly.p0 * std::pow(y0, 1.0 - w) / (w - 1.0);
    if (ws.poly.p1 != 0) poly += ws.poly.p1 * std::pow(y0, 2.0 - w) / (w - 2.0);
    if (ws.poly.p2 != 0) poly += ws.poly.p2 * std::pow(y0, 3.0 - w) / (w - 3.0);
    double value = head.value() + tail.value + poly;
    double err = tail.error + 4 * last + 1e-15 * (std::abs(head.value()) + std::abs(poly));
    return {value, err, tail.subdivisions};
}

} // namespace thinlevy
