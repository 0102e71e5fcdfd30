#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "thinlevy/errors.hpp"

namespace thinlevy {

struct RootResult {
    double x;
    double fx;
    double lo, hi;   // final bracket, lo <= x <= hi
    int evaluations;
};

struct RootOptions {
    int secant_steps = 50;
    int max_expansions = 60;
    int max_bisections = 200;
};

// Root of an increasing function. If g(hi) < 0 the bracket grows upward (width doubles)
// until a sign change appears. Illinois-type regula falsi first, plain bisection after.
template <class G>
RootResult find_root_increasing(G&& g, double lo, double hi, double tol = 1e-10,
                                const RootOptions& opt = {}) {
    if (!(hi > lo)) throw BracketError("numerics", "empty bracket");
    int evals = 0;
    auto eval = [&](double x) { ++evals; return g(x); };
    double fa = eval(lo);
    if (std::abs(fa) <= tol) return {lo, fa, lo, lo, evals};
    if (fa > 0) throw BracketError("numerics", "g(lo) > 0 for an increasing function");
    double fb = eval(hi);
    for (int k = 0; fb < 0; ++k) {
        if (k >= opt.max_expansions || !std::isfinite(fb))
            throw BracketError("numerics", "no sign change after bracket expansion");
        double w = hi - lo;
        lo = hi;
        fa = fb;
        hi = lo + 2 * w;
        fb = eval(hi);
    }
    if (std::abs(fb) <= tol) return {hi, fb, hi, hi, evals};

    double a = lo, b = hi;
    double best = std::abs(fa) < std::abs(fb) ? a : b;
    double fbest = std::abs(fa) < std::abs(fb) ? fa : fb;
    // keep the true function values for the bracket; ga/gb are the Illinois-scaled ones
    double ga = fa, gb = fb;
    int side = 0;
    auto consider = [&](double x, double fx) {
        if (std::abs(fx) < std::abs(fbest)) { best = x; fbest = fx; }
    };
    for (int it = 0; it < opt.secant_steps; ++it) {
        double c = (a * gb - b * ga) / (gb - ga);
        if (!(c > a && c < b)) c = 0.5 * (a + b);
        double fc = eval(c);
        consider(c, fc);
        if (std::abs(fc) <= tol) return {c, fc, a, b, evals};
        if (fc < 0) {
            a = c; ga = fc;
            if (side == -1) gb *= 0.5;
            side = -1;
        } else {
            b = c; gb = fc;
            if (side == +1) ga *= 0.5;
            side = +1;
        }
        if (b - a <= 4 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)))
            break;
    }
    for (int it = 0; it < opt.max_bisections; ++it) {
        double c = 0.5 * (a + b);
        if (!(c > a && c < b)) break;
        double fc = eval(c);
        consider(c, fc);
        if (std::abs(fc) <= tol) return {c, fc, a, b, evals};
        if (fc < 0) a = c; else b = c;
    }
    if (std::abs(fbest) <= tol) return {best, fbest, std::min(a, best), std::max(b, best), evals};
    throw ConvergenceError("numerics", "root tolerance not reachable at double precision");
}

} // namespace thinlevy
