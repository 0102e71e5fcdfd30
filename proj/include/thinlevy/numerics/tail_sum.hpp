#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "thinlevy/errors.hpp"
#include "thinlevy/numerics/quadrature.hpp"
#include "thinlevy/numerics/summation.hpp"

namespace thinlevy {

// sum_{i>N} (i/N)^-s for s > 1: a short direct stretch, then Euler-Maclaurin to the B6
// term. Scaled by N^s so that large s does not underflow.
inline double power_tail_scaled(double s, std::int64_t N) {
    if (!(s > 1.0)) throw DomainError("numerics", "power_tail needs s > 1");
    if (N < 1) throw DomainError("numerics", "power_tail needs N >= 1");
    NeumaierSum<> acc;
    const double Nd = static_cast<double>(N);
    std::int64_t M = std::max<std::int64_t>(N, 1000);
    for (std::int64_t i = M; i > N; --i) acc += std::pow(static_cast<double>(i) / Nd, -s);
    const double m = static_cast<double>(M);
    const double g = std::pow(m / Nd, -s);  // (M/N)^-s
    if (g == 0.0) return acc.value();
    double em = m * g / (s - 1.0) - 0.5 * g + s / 12.0 * g / m
              - s * (s + 1) * (s + 2) / 720.0 * g / (m * m * m)
              + s * (s + 1) * (s + 2) * (s + 3) * (s + 4) / 30240.0 * g / (m * m * m * m * m);
    acc += em;
    return acc.value();
}

// sum_{i>N} i^-s for s > 1.
inline double power_tail(double s, std::int64_t N) {
    return power_tail_scaled(s, N) * std::pow(static_cast<double>(N), -s);
}

struct TailSum {
    double value;
    double error_bound;
};

// sum_{i>N} c_i^a exp(-b c_i u) with c_i = i^-alpha and alpha = 1/(tau-1).
// The integral part is closed form (lower incomplete gamma); Euler-Maclaurin keeps the
// g(N)/2 and g'(N)/12 corrections and bounds the rest by 2 zeta(3)/(2 pi)^3 * int |g'''|.
inline TailSum tail_power_exp_sum(double a, double b, double u, std::int64_t N, double tau) {
    if (!(tau > 3.0 && tau < 4.0)) throw DomainError("numerics", "tau must lie in (3,4)");
    if (!(a > tau - 1.0)) throw DomainError("numerics", "tail_power_exp_sum needs a > tau - 1");
    if (!(b >= 0.0) || !(u > 0.0)) throw DomainError("numerics", "tail_power_exp_sum needs b >= 0, u > 0");
    if (N < 1) throw DomainError("numerics", "tail_power_exp_sum needs N >= 1");
    const double alpha = 1.0 / (tau - 1.0);
    const double s = a * alpha;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (b == 0.0) {
        double v = power_tail(s, N);
        return {v, 8 * eps * std::abs(v)};
    }
    const double bu = b * u;
    const double Nd = static_cast<double>(N);
    const double zN = bu * std::pow(Nd, -alpha);
    if (zN > 700.0 && a - tau + 1.0 < zN) {
        // every term is below exp(-700) relative to anything we could add it to
        return {0.0, 0.0};
    }
    const double integral = (tau - 1.0) * std::pow(bu, tau - 1.0 - a) *
                            boost::math::tgamma_lower(a - tau + 1.0, zN);

    // g = exp(phi), phi = -s ln x - bu x^-alpha
    auto derivs = [&](double x, double& g, double& g1, double& g3) {
        double xa = std::pow(x, -alpha);
        g = std::pow(x, -s) * std::exp(-bu * xa);
        double p1 = -s / x + alpha * bu * xa / x;
        double p2 = s / (x * x) - alpha * (alpha + 1) * bu * xa / (x * x);
        double p3 = -2 * s / (x * x * x) + alpha * (alpha + 1) * (alpha + 2) * bu * xa / (x * x * x);
        g1 = g * p1;
        g3 = g * (p3 + 3 * p1 * p2 + p1 * p1 * p1);
    };
    double gN, g1N, g3N;
    derivs(Nd, gN, g1N, g3N);
    double value = integral - 0.5 * gN - g1N / 12.0;

    auto abs_g3 = [&](double t) {  // x = N + t
        double g, g1, g3;
        derivs(Nd + t, g, g1, g3);
        return std::abs(g3);
    };
    QuadratureSpec qs{1e-300, 1e-6, 4000};
    SemilineHints hints{std::max(1.0, Nd), 0.0, s + 3.0, false};
    double int_g3 = integrate_semiline(abs_g3, qs, hints).value;
    constexpr double c3 = 2.0 * 1.2020569031595942853997 / (8.0 * 3.14159265358979323846 * 3.14159265358979323846 * 3.14159265358979323846);
    double bound = 1.01 * c3 * int_g3 + 16 * eps * (std::abs(integral) + std::abs(value));
    return {value, bound};
}

} // namespace thinlevy
