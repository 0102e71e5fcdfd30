#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "thinlevy/errors.hpp"
#include "thinlevy/expansion.hpp"
#include "thinlevy/params.hpp"

namespace thinlevy {

inline double coeff(std::int64_t i, const ModelParams& p) {
    if (i < 2) throw DomainError("model", "coefficient index must be >= 2");
    return std::pow(static_cast<double>(i), -p.alpha);
}

// Kernels in the y = c_i u variable. T is double or complex.

// 1 - e^-y + e^{-(1+theta) y}: the tilted normaliser divided by e^{theta y}
template <class T>
T kernel_den(T y, double theta) {
    return -xexpm1(-y) + xexp(-(1.0 + theta) * y);
}

// tilted probability that T_i <= a u (a in [0,1]), written in y = c_i u
template <class T>
T kernel_h(T y, double a, double theta) {
    return -xexpm1(-a * y) / kernel_den(y, theta);
}

template <class T>
T kernel_one_minus_h(T y, double a, double theta) {
    return (xexp(-a * y) - xexp(-y) + xexp(-(1.0 + theta) * y)) / kernel_den(y, theta);
}

// log E[exp(theta y (I - c t))] at t = u for one indicator, i.e. f in the y variable:
// log(1 + e^-y (e^{-theta y} - 1)) + theta y - theta y^2
template <class T>
T f_hat(T y, double theta) {
    return xlog1p(xexp(-y) * xexpm1(-theta * y)) + theta * y - theta * y * y;
}

// f_hat minus its polynomial part theta y - theta y^2
inline double f_hat_rem(double y, double theta) {
    return std::log1p(std::exp(-y) * std::expm1(-theta * y));
}

struct FSplit {
    double f1, f2, f3;
    double value() const { return f1 + f2 + f3; }
};

// f(x; theta) in the original x variable (x = i / u^{tau-1}, y = x^-alpha), split into the
// log term, the linear term and the quadratic term.
inline FSplit f_integrand_split(double x, double theta, const ModelParams& p) {
    if (!(theta > -1.0)) throw DomainError("model", "theta must exceed -1");
    if (!(x > 0)) throw DomainError("model", "x must be positive");
    double y = std::pow(x, -p.alpha);
    return {f_hat_rem(y, theta), theta * y, -theta * y * y};
}

inline double f_integrand(double x, double theta, const ModelParams& p) {
    double y = std::pow(x, -p.alpha);
    if (!(theta > -1.0)) throw DomainError("model", "theta must exceed -1");
    if (!(x > 0)) throw DomainError("model", "x must be positive");
    // small y: the three terms cancel to O(y^3); f_hat in y keeps the sum together
    return f_hat(y, theta);
}

struct LogMgf {
    double value;          // log E[exp(theta u S_u)]
    double linear;         // theta u (1 + beta u)
    double direct;         // sum_{i=2}^{N} f(i/u^{tau-1}; theta)
    double compensation;   // analytic tail over i > N (0 if disabled)
    std::int64_t N;
    double est_error;
};

inline LogMgf log_mgf_exact(double u, double theta, const ModelParams& p, const TruncationPolicy& tr = {}) {
    if (!(theta > -1.0)) throw DomainError("model", "theta must exceed -1");
    if (!(u > 0)) throw DomainError("model", "u must be positive");
    auto f = [theta](auto y) { return f_hat(y, theta); };
    auto s = index_sum(f, u, p, tr, {analytic_radius(theta), 3, 2});
    double lin = theta * u * (1.0 + p.beta_tilde * u);
    double comp = tr.compensate_tail ? s.compensation : 0.0;
    return {lin + s.direct + comp, lin, s.direct, comp, s.N, s.est_error};
}

// E[S_t] = 1 + beta t + sum_i c_i (1 - e^{-c_i t} - c_i t)
inline double mean_original_exact(double t, const ModelParams& p, const TruncationPolicy& tr = {}) {
    if (!(t >= 0)) throw DomainError("model", "t must be >= 0");
    if (t == 0) return 1.0;
    auto k = [](auto y) { return y * (-xexpm1(-y) - y); };
    auto s = index_sum(k, t, p, tr, {entire_radius, 3, 2});
    return 1.0 + p.beta_tilde * t + s.value / t;
}

} // namespace thinlevy
