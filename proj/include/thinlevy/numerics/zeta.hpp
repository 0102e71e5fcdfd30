#pragma once

#include <cmath>
#include <cstdint>

#include "thinlevy/errors.hpp"
#include "thinlevy/numerics/summation.hpp"

namespace thinlevy {

struct ZetaEval {
    double s;
    double value;
    std::int64_t truncation_N;
    double est_error;
};

namespace detail {

// Z_N(s) = sum_{n<=N} n^-s - N^{1-s}/(1-s) - N^-s / 2.
inline double zeta_partial(double s, std::int64_t N) {
    NeumaierSum<> acc;
    // small terms first
    for (std::int64_t n = N; n >= 1; --n) acc += std::pow(static_cast<double>(n), -s);
    double Nd = static_cast<double>(N);
    acc += -std::pow(Nd, 1.0 - s) / (1.0 - s);
    acc += -0.5 * std::pow(Nd, -s);
    return acc.value();
}

} // namespace detail

// Analytic continuation of zeta on (-1, inf) \ {1} through the Euler-Maclaurin bracket.
// The bracket at N has leading error -(s/12) N^{-s-1}; one Richardson step with 2N
// removes it and |R - Z_2N| serves as the error estimate.
inline ZetaEval zeta_continued(double s, std::int64_t N = 100000) {
    if (!(s > -1.0) || s == 1.0 || !std::isfinite(s))
        throw DomainError("numerics", "zeta_continued needs s in (-1, inf) without s = 1");
    if (N < 1) throw DomainError("numerics", "zeta_continued needs N >= 1");
    double z1 = detail::zeta_partial(s, N);
    double z2 = detail::zeta_partial(s, 2 * N);
    double f = std::pow(2.0, s + 1.0);
    double r = (f * z2 - z1) / (f - 1.0);
    double err = std::abs(r - z2);
    return {s, r, N, err};
}

} // namespace thinlevy
