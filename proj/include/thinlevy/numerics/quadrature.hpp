#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "thinlevy/errors.hpp"
#include "thinlevy/numerics/summation.hpp"

namespace thinlevy {

struct QuadratureSpec {
    double abs_tol = 1e-14;
    double rel_tol = 1e-13;
    int max_subdivisions = 2000;

    void check() const {
        if (!(abs_tol > 0) || !(rel_tol > 0) || max_subdivisions < 1)
            throw DomainError("numerics", "QuadratureSpec needs positive tolerances and budget");
    }
};

struct QuadResult {
    double value;
    double error;
    int subdivisions;
};

namespace detail {

// 15-point Kronrod abscissae/weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> gk_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * gk_wk[7], rg = fc * gk_wg[3];
    double resabs = std::abs(rk);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        double dx = h * gk_x[j];
        f1[j] = f(c - dx);
        f2[j] = f(c + dx);
        rk += gk_wk[j] * (f1[j] + f2[j]);
        resabs += gk_wk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) rg += gk_wg[j / 2] * (f1[j] + f2[j]);
    }
    double mean = 0.5 * rk;
    double resasc = gk_wk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += gk_wk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    resasc *= std::abs(h);
    resabs *= std::abs(h);
    double value = rk * h;
    double err = std::abs((rk - rg) * h);
    // QUADPACK's scaling of the raw Kronrod-Gauss difference.
    if (resasc != 0 && err != 0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50 * eps))
        err = std::max(50 * eps * resabs, err);
    if (!std::isfinite(value))
        throw ConvergenceError("numerics", "non-finite integrand value");
    return {a, b, value, err};
}

} // namespace detail

// Globally adaptive Gauss-Kronrod on a finite interval.
template <class F>
QuadResult integrate_interval(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.check();
    if (a == b) return {0.0, 0.0, 0};
    std::vector<detail::Panel> heap{detail::gk15(f, a, b)};
    double total = heap[0].value, err = heap[0].error;
    int n = 1;
    while (err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (n >= spec.max_subdivisions)
            throw ConvergenceError("numerics", "subdivision budget exhausted in adaptive quadrature");
        std::pop_heap(heap.begin(), heap.end());
        detail::Panel p = heap.back();
        double m = 0.5 * (p.a + p.b);
        if (!(m > std::min(p.a, p.b) && m < std::max(p.a, p.b))) {
            std::push_heap(heap.begin(), heap.end());
            break;  // cannot split further
        }
        heap.back() = detail::gk15(f, p.a, m);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(detail::gk15(f, m, p.b));
        std::push_heap(heap.begin(), heap.end());
        ++n;
        NeumaierSum<> tv, te;
        for (const auto& q : heap) {
            tv += q.value;
            te += q.error;
        }
        total = tv.value();
        err = te.value();
    }
    return {total, err, n};
}

// Endpoint behaviour of an integrand on (0, inf): f ~ x^power_at_zero near 0 and
// f ~ x^-decay_at_inf at infinity (use exp_decay for faster-than-power decay).
struct SemilineHints {
    double split = 1.0;
    double power_at_zero = 0.0;  // > -1
    double decay_at_inf = 2.0;   // > 1
    bool exp_decay = false;
};

// Integral over (0, inf). [0, split] uses x = split t^m with m = 1/(1+p) which makes a
// pure power x^p constant in t; [split, inf) uses x = split t^-m with m chosen the same way.
template <class F>
QuadResult integrate_semiline(F&& f, const QuadratureSpec& spec = {}, const SemilineHints& hints = {}) {
    spec.check();
    if (!(hints.power_at_zero > -1.0))
        throw DomainError("numerics", "integrand not integrable at 0 (power <= -1)");
    if (!hints.exp_decay && !(hints.decay_at_inf > 1.0))
        throw DomainError("numerics", "integrand not integrable at infinity (decay <= 1)");
    const double s = hints.split;
    const double m0 = std::min(20.0, 1.0 / (1.0 + hints.power_at_zero));
    const double m1 = hints.exp_decay ? 1.0 : std::min(20.0, std::max(1.0, 1.0 / (hints.decay_at_inf - 1.0)));
    auto g0 = [&](double t) {
        if (t <= 0) return 0.0;
        double x = s * std::pow(t, m0);
        return f(x) * s * m0 * std::pow(t, m0 - 1.0);
    };
    auto g1 = [&](double t) {
        if (t <= 0) return 0.0;
        double x = s * std::pow(t, -m1);
        if (!std::isfinite(x)) return 0.0;
        double v = f(x) * s * m1 * std::pow(t, -m1 - 1.0);
        return std::isfinite(v) ? v : 0.0;
    };
    QuadratureSpec half = spec;
    half.abs_tol = 0.5 * spec.abs_tol;
    QuadResult a = integrate_interval(g0, 0.0, 1.0, half);
    QuadResult b = integrate_interval(g1, 0.0, 1.0, half);
    return {a.value + b.value, a.error + b.error, a.subdivisions + b.subdivisions};
}

} // namespace thinlevy
