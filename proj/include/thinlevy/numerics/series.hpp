#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace thinlevy {

using cplx = std::complex<double>;

// exp/expm1/log1p that accept both double and complex arguments, so model kernels can be
// written once and evaluated on the Cauchy circle.
inline double xexp(double x) { return std::exp(x); }
inline cplx xexp(cplx z) { return std::exp(z); }
inline double xexpm1(double x) { return std::expm1(x); }
inline cplx xexpm1(cplx z) {
    double x = z.real(), y = z.imag();
    if (std::abs(x) < 1.0 && std::abs(y) < 1.0) {
        double s = std::sin(0.5 * y);
        return {std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y)};
    }
    return std::exp(z) - 1.0;
}
inline double xlog1p(double x) { return std::log1p(x); }
inline cplx xlog1p(cplx z) {
    double x = z.real(), y = z.imag();
    // |1+z|^2 = 1 + (2x + x^2 + y^2)
    return {0.5 * std::log1p(2.0 * x + x * x + y * y), std::atan2(y, 1.0 + x)};
}
inline double xlog(double x) { return std::log(x); }
inline cplx xlog(cplx z) { return std::log(z); }
inline double xcos(double x) { return std::cos(x); }
inline cplx xcos(cplx z) { return std::cos(z); }
inline double xsin(double x) { return std::sin(x); }
inline cplx xsin(cplx z) { return std::sin(z); }

// e^z - 1 - z and log(1+z) - z without the cancellation at small |z|
template <class T>
T xexpm1mx(T z) {
    if (std::abs(z) >= 0.7) return xexpm1(z) - z;
    T term = z * z * 0.5, sum = term;
    for (int k = 3; k < 40; ++k) {
        term *= z / static_cast<double>(k);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}
template <class T>
T xlog1pmx(T z) {
    if (std::abs(z) >= 0.25) return xlog1p(z) - z;
    T zk = z * z, sum = -0.5 * zk;
    for (int k = 3; k < 60; ++k) {
        zk *= -z;
        T term = -zk / static_cast<double>(k);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// Taylor coefficients of an analytic F at 0 from n samples on |y| = r (plain DFT; n is small).
template <class F>
std::vector<cplx> taylor_coefficients(F&& f, double r, int n) {
    std::vector<cplx> vals(n), out(n), tw(n);
    for (int j = 0; j < n; ++j) {
        double ang = 2.0 * std::numbers::pi * j / n;
        tw[j] = cplx(std::cos(ang), std::sin(ang));
        vals[j] = cplx(f(cplx(r * tw[j].real(), r * tw[j].imag())));
    }
    double rk = 1.0;
    for (int k = 0; k < n; ++k, rk *= r) {
        cplx acc = 0;
        for (int j = 0; j < n; ++j) acc += vals[j] * std::conj(tw[(static_cast<long>(j) * k) % n]);
        out[k] = acc / (static_cast<double>(n) * rk);
    }
    return out;
}

// Winding number of an entire g around |y| = r (counts its zeros in the disk).
template <class G>
int winding_number(G&& g, double r, int m = 512) {
    double total = 0;
    cplx prev = g(cplx(r, 0.0));
    for (int j = 1; j <= m; ++j) {
        double ang = 2.0 * std::numbers::pi * j / m;
        cplx cur = g(cplx(r * std::cos(ang), r * std::sin(ang)));
        total += std::arg(cur / prev);
        prev = cur;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

} // namespace thinlevy
