#pragma once

// The limiting variational problem: Lambda(theta) = int_0^inf f(x; theta) dx and its
// derivatives, the minimiser theta*, and the finite-u refinement theta*_u.
//
// All integrals run in y = x^-alpha, where dx = (tau-1) y^-tau dy.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "thinlevy/errors.hpp"
#include "thinlevy/expansion.hpp"
#include "thinlevy/model.hpp"
#include "thinlevy/numerics/roots.hpp"
#include "thinlevy/params.hpp"

namespace thinlevy {

inline constexpr int max_lambda_order = 6;

// Integer coefficients of f^(r) = y^r sum_i a_{r,i} q^i with q = (1-e^-y)/den.
// Built from a_{1,1} = 1 (f' = y q - y^2, the -y^2 drops out after one more derivative)
// and a_{r+1,j} = j a_{r,j} - (j-1) a_{r,j-1}.
inline std::vector<std::int64_t> derivative_coefficients(int r) {
    if (r < 2 || r > max_lambda_order) throw DomainError("rate", "derivative order must be in [2,6]");
    std::vector<std::int64_t> a(r + 1, 0);
    a[1] = 1;
    for (int k = 1; k < r; ++k) {
        std::vector<std::int64_t> b(r + 1, 0);
        for (int j = 1; j <= k + 1; ++j) b[j] = j * a[j] - (j - 1) * a[j - 1];
        a = std::move(b);
    }
    return a;
}

namespace detail {

// Same polynomial rewritten in s = 1 - q: sum_k b_k s^k. Used when q is close to 1 so the
// alternating q-sum would cancel.
inline std::vector<double> coefficients_in_s(const std::vector<std::int64_t>& a) {
    const int n = static_cast<int>(a.size()) - 1;
    std::vector<double> b(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) {
        double binom = 1;
        for (int k = 0; k <= i; ++k) {
            b[k] += a[i] * binom * ((k % 2) ? -1.0 : 1.0);
            binom = binom * (i - k) / (k + 1);
        }
    }
    return b;
}

template <class T>
T derivative_kernel(T y, double theta, const std::vector<std::int64_t>& a, const std::vector<double>& b) {
    T den = kernel_den(y, theta);
    T q = -xexpm1(-y) / den;
    T poly{};
    if constexpr (std::is_same_v<T, double>) {
        if (q >= 0.5) {
            T s = xexp(-(1.0 + theta) * y) / den;
            for (int k = static_cast<int>(b.size()) - 1; k >= 0; --k) poly = poly * s + b[k];
            return std::pow(y, static_cast<double>(a.size() - 1)) * poly;
        }
    }
    for (int k = static_cast<int>(a.size()) - 1; k >= 1; --k) poly = (poly + static_cast<double>(a[k])) * q;
    T yr = 1.0;
    for (std::size_t k = 1; k < a.size(); ++k) yr *= y;
    return yr * poly;
}

inline void check_theta(double theta) {
    if (!(theta > -1.0) || !std::isfinite(theta)) throw DomainError("rate", "theta must be finite and exceed -1");
}

} // namespace detail

inline double lambda(double theta, const ModelParams& p, const QuadratureSpec& qs = {}) {
    detail::check_theta(theta);
    if (theta == 0.0) return 0.0;
    auto f = [theta](auto y) { return f_hat(y, theta); };
    auto rem = [theta](double y) { return f_hat_rem(y, theta); };
    WeightSpec ws{p.tau, 3, analytic_radius(theta), {0.0, theta, -theta}};
    return (p.tau - 1.0) * weighted_integral(f, rem, ws, qs).value;
}

inline double lambda_deriv(double theta, int r, const ModelParams& p, const QuadratureSpec& qs = {}) {
    detail::check_theta(theta);
    if (r < 1 || r > max_lambda_order) throw DomainError("rate", "derivative order must be in [1,6]");
    const double rf = analytic_radius(theta);
    if (r == 1) {
        auto f = [theta](auto y) { return y * (-xexpm1(-y)) / kernel_den(y, theta) - y * y; };
        auto rem = [theta](double y) { return -y * std::exp(-(1.0 + theta) * y) / kernel_den(y, theta); };
        WeightSpec ws{p.tau, 3, rf, {0.0, 1.0, -1.0}};
        return (p.tau - 1.0) * weighted_integral(f, rem, ws, qs).value;
    }
    const auto a = derivative_coefficients(r);
    const auto b = detail::coefficients_in_s(a);
    auto f = [&](auto y) { return detail::derivative_kernel(y, theta, a, b); };
    auto rem = [&](double y) { return detail::derivative_kernel(y, theta, a, b); };
    WeightSpec ws{p.tau, std::max(3, r + 1), rf, {}};
    return (p.tau - 1.0) * weighted_integral(f, rem, ws, qs).value;
}

struct RateSolution {
    double theta_star;
    double big_I;               // -Lambda(theta*)
    double lambda_pp_at_star;   // Lambda''(theta*)
    double lambda_p_at_zero;    // Lambda'(0) = mu_S
    QuadratureSpec quad;
};

inline constexpr double theta_root_tol = 1e-11;

inline RateSolution solve_theta_star(const ModelParams& p, const QuadratureSpec& qs = {}) {
    auto g = [&](double th) { return lambda_deriv(th, 1, p, qs); };
    double d0 = g(0.0);
    if (!(d0 < 0)) throw BracketError("rate", "Lambda'(0) is not negative");
    RootResult rr = find_root_increasing(g, 0.0, 1.0, theta_root_tol);
    RateSolution rs{rr.x, -lambda(rr.x, p, qs), lambda_deriv(rr.x, 2, p, qs), d0, qs};
    if (!(rs.theta_star > 0) || !(rs.big_I > 0) || !(rs.lambda_pp_at_star > 0))
        throw ConvergenceError("rate", "variational solution violates theta* > 0, I > 0, Lambda'' > 0");
    return rs;
}

// u^{2-tau} (zeta(alpha) + (beta - zeta(2 alpha) + 1) u)
inline double epsilon_u(double u, const ModelParams& p) {
    if (!(u > 0)) throw DomainError("rate", "u must be positive");
    return std::pow(u, 2.0 - p.tau) * (p.zeta_alpha + (p.beta_tilde - p.zeta_2alpha + 1.0) * u);
}

struct RefinedTilt {
    double u;
    double eps_u;
    double theta_star_u;
    double exponent;   // u^{tau-1} [Lambda(theta*_u) + theta*_u eps_u]
};

// theta solving Lambda'(theta) = -eps. eps > 0 pushes the root below theta*.
inline double solve_shifted_theta(double eps, const ModelParams& p, const RateSolution& rs) {
    auto g = [&](double th) { return lambda_deriv(th, 1, p, rs.quad) + eps; };
    if (eps == 0.0) return rs.theta_star;
    if (eps < 0) return find_root_increasing(g, rs.theta_star, rs.theta_star + 1.0, theta_root_tol).x;
    double lo = rs.theta_star;
    for (int k = 0;; ++k) {
        lo = -1.0 + (lo + 1.0) * 0.5;
        if (g(lo) <= 0) break;
        if (k > 40) throw BracketError("rate", "-eps_u lies below the range of Lambda' on (-1, theta*)");
    }
    double hi = rs.theta_star;
    return find_root_increasing(g, lo, hi, theta_root_tol).x;
}

inline RefinedTilt solve_theta_star_u(double u, const ModelParams& p, const RateSolution& rs) {
    double eps = epsilon_u(u, p);
    double th = solve_shifted_theta(eps, p, rs);
    return {u, eps, th, p.U(u) * (lambda(th, p, rs.quad) + th * eps)};
}

struct KappaLeading {
    double kappa_10;   // multiplies u
    double kappa_01;   // multiplies u^2
};

inline KappaLeading kappa_leading(const ModelParams& p, const RateSolution& rs) {
    return {rs.theta_star * p.zeta_alpha, rs.theta_star * (p.beta_tilde + 1.0 - p.zeta_2alpha)};
}

// log of D u^{-(tau-1)/2} e^{exponent}
inline double log_tail_probability_asymptotic(const RefinedTilt& rt, const ModelParams& p, double D) {
    if (!(D > 0)) throw DomainError("rate", "prefactor D must be positive");
    return std::log(D) - 0.5 * (p.tau - 1.0) * std::log(rt.u) + rt.exponent;
}

inline double tail_probability_asymptotic(const RefinedTilt& rt, const ModelParams& p, double D) {
    return std::exp(log_tail_probability_asymptotic(rt, p, D));
}

} // namespace thinlevy
