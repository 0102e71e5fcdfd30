#pragma once

// Characteristic function of S_t under the tilt, in the frequency variable k for which
// omega = 2 pi k u^{-(tau-3)/2}, and Fourier inversion back to the density of S_t.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "thinlevy/errors.hpp"
#include "thinlevy/expansion.hpp"
#include "thinlevy/model.hpp"
#include "thinlevy/params.hpp"
#include "thinlevy/rate.hpp"

namespace thinlevy {

namespace detail {

inline double frequency_scale(double u, const ModelParams& p) {
    return 2.0 * std::numbers::pi * std::pow(u, -(p.tau - 3.0) / 2.0);
}

inline void check_char_args(double t, double u) {
    if (!(u > 0)) throw DomainError("density", "u must be positive");
    if (!(t >= 0 && t <= u)) throw DomainError("density", "t must lie in [0,u]");
}

} // namespace detail

// log E~[exp(2 pi i k u^{-(tau-3)/2} S_t)]
inline cplx log_char_fn_tilted(double k, double t, double u, double theta, const ModelParams& p,
                               const TruncationPolicy& tr = {}) {
    detail::check_char_args(t, u);
    const double kappa = k * detail::frequency_scale(u, p);
    if (kappa == 0.0) return 0.0;
    const double a = t / u, w = kappa / u;
    // log(1 + h (e^{i w y} - 1)) - i w a y^2, split so that nothing cancels near y = 0
    auto F = [a, theta, w](auto y) {
        auto h = kernel_h(y, a, theta);
        cplx iwy = cplx(0.0, w) * y;
        cplx X = h * xexpm1(iwy);
        return cplx(xlog1pmx(X) + h * xexpm1mx(iwy) + iwy * (h - a * y));
    };
    double r = std::min(analytic_radius(theta), 1.0 / std::abs(w));
    auto s = index_sum(F, u, p, tr, {r, 3, 2});
    return cplx(0.0, kappa * (1.0 + p.beta_tilde * t)) + s.value;
}

inline cplx char_fn_tilted(double k, double t, double u, double theta, const ModelParams& p,
                           const TruncationPolicy& tr = {}) {
    return std::exp(log_char_fn_tilted(k, t, u, theta, p, tr));
}

inline cplx char_fn_tilted(double k, double t, const RefinedTilt& rt, const ModelParams& p,
                           const TruncationPolicy& tr = {}) {
    return char_fn_tilted(k, t, rt.u, rt.theta_star_u, p, tr);
}

// log |char fn| from the product of two-point moduli:
// |1 - h + h e^{i phi}|^2 = 1 - 4 h (1-h) sin^2(phi/2)
inline double log_char_fn_modulus(double k, double t, double u, double theta, const ModelParams& p,
                                  const TruncationPolicy& tr = {}) {
    detail::check_char_args(t, u);
    const double kappa = k * detail::frequency_scale(u, p);
    if (kappa == 0.0) return 0.0;
    const double a = t / u, w = kappa / u;
    auto F = [a, theta, w](auto y) {
        auto sn = xsin(0.5 * w * y);
        return 0.5 * xlog1p(-4.0 * kernel_h(y, a, theta) * kernel_one_minus_h(y, a, theta) * sn * sn);
    };
    double r = std::min(analytic_radius(theta), 1.0 / std::abs(w));
    return index_sum(F, u, p, tr, {r, 3, 2}).value;
}

struct InversionSpec {
    double k_max;
    int n_nodes;
    double decay_c;     // |char fn(k)| <= e^{-c |k|^{tau-2}} calibrated at k = 1
    double tail_tol;
};

struct BDConstants {
    double B;
    double D;
};

// B = (2 pi I_V(1))^{-1/2}, D = B / theta*
inline BDConstants constants_B_D(const RateSolution& rs, double IV_at_one) {
    if (!(IV_at_one > 0)) throw DomainError("density", "I_V(1) must be positive");
    double B = 1.0 / std::sqrt(2.0 * std::numbers::pi * IV_at_one);
    return {B, B / rs.theta_star};
}

// Density of S_t by inverting the cached characteristic function on Gauss-Legendre panels
// over [0, k_max] (the negative half follows by conjugate symmetry).
class DensityInverter {
public:
    static constexpr int panel_points = 16;

    DensityInverter(double t, double u, double theta, const ModelParams& p, const TruncationPolicy& tr = {},
                    double tail_tol = 1e-12, int panels = 12)
        : t_(t), u_(u), theta_(theta), p_(p) {
        detail::check_char_args(t, u);
        if (t == 0) throw DomainError("density", "S_0 = 1 has no density");
        if (panels < 1 || !(tail_tol > 0 && tail_tol < 1)) throw DomainError("density", "bad inversion settings");
        double c = -log_char_fn_modulus(1.0, t, u, theta, p, tr);
        if (!(c > 0)) throw ConvergenceError("density", "characteristic function does not decay at k = 1");
        double kmax = std::pow(std::log(1.0 / tail_tol) / c, 1.0 / (p.tau - 2.0));
        spec_ = {kmax, panels * panel_points, c, tail_tol};

        using GL = boost::math::quadrature::gauss<double, panel_points>;
        const auto& x = GL::abscissa();
        const auto& wt = GL::weights();
        const double hw = 0.5 * kmax / panels;
        for (int j = 0; j < panels; ++j) {
            double mid = (2 * j + 1) * hw;
            auto push = [&](double xx, double ww) {
                double k = mid + hw * xx;
                k_.push_back(k);
                w_.push_back(hw * ww);
                phi_.push_back(char_fn_tilted(k, t, u, theta, p, tr));
            };
            // boost stores the non-negative half of a symmetric rule
            for (std::size_t m = 0; m < x.size(); ++m) {
                if (x[m] == 0.0) {
                    push(0.0, wt[m]);
                } else {
                    push(-x[m], wt[m]);
                    push(x[m], wt[m]);
                }
            }
        }
        // true modulus at k_max is far below the calibrated bound in the Gaussian regime;
        // record the bound the cut-off was chosen against
        tail_bound_ = std::exp(-c * std::pow(kmax, p.tau - 2.0));
    }

    const InversionSpec& spec() const { return spec_; }
    double tail_bound() const { return tail_bound_; }
    bool outside_proven_window() const { return t_ < 0.5 * u_; }

    double density(double s) const { return smoothed_density(s, 0.0); }

    // density convolved with a N(0, h^2) kernel: multiplies the char fn by e^{-h^2 omega^2 / 2}
    double smoothed_density(double s, double h) const {
        const double sc = detail::frequency_scale(u_, p_);
        NeumaierSum<> acc;
        for (std::size_t j = 0; j < k_.size(); ++j) {
            double om = sc * k_[j];
            double damp = h > 0 ? std::exp(-0.5 * h * h * om * om) : 1.0;
            cplx e = std::polar(1.0, -om * s);
            acc += w_[j] * damp * (phi_[j] * e).real();
        }
        return 2.0 * std::pow(u_, -(p_.tau - 3.0) / 2.0) * acc.value();
    }

private:
    double t_, u_, theta_;
    ModelParams p_;
    InversionSpec spec_{};
    double tail_bound_ = 0;
    std::vector<double> k_, w_;
    std::vector<cplx> phi_;
};

inline double density_tilted(double s, double t, double u, double theta, const ModelParams& p,
                             const TruncationPolicy& tr = {}) {
    return DensityInverter(t, u, theta, p, tr).density(s);
}

} // namespace thinlevy
