#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "thinlevy/errors.hpp"
#include "thinlevy/numerics/zeta.hpp"

namespace thinlevy {

// (tau, alpha = 1/(tau-1), beta~) plus the two continued zeta values every module needs.
struct ModelParams {
    double tau = 3.5;
    double alpha = 0.4;
    double beta_tilde = 0.0;
    double zeta_alpha = 0.0;    // zeta(alpha)
    double zeta_2alpha = 0.0;   // zeta(2 alpha)

    static ModelParams make(double tau, double beta_tilde = 0.0, std::int64_t zeta_N = 100000) {
        if (!(tau > 3.0 && tau < 4.0))
            throw DomainError("model", "tau must lie strictly inside (3,4)");
        if (!std::isfinite(beta_tilde)) throw DomainError("model", "beta_tilde must be finite");
        ModelParams p;
        p.tau = tau;
        p.alpha = 1.0 / (tau - 1.0);
        p.beta_tilde = beta_tilde;
        p.zeta_alpha = zeta_continued(p.alpha, zeta_N).value;
        p.zeta_2alpha = zeta_continued(2.0 * p.alpha, zeta_N).value;
        return p;
    }

    // u^{tau-1}
    double U(double u) const { return std::pow(u, tau - 1.0); }
    ModelParams with_beta(double b) const { ModelParams q = *this; q.beta_tilde = b; return q; }
};

// How far the exact sums over i run before the analytic tail takes over.
struct TruncationPolicy {
    double K = 8.0;                 // N(u) >= ceil(K u^{tau-1})
    bool compensate_tail = true;
    double max_tail_error = std::numeric_limits<double>::infinity();
    std::int64_t max_terms = 400'000'000;

    std::int64_t n_terms(double u, const ModelParams& p) const {
        if (!(K >= 1.0)) throw DomainError("model", "truncation K must be >= 1");
        double n = std::ceil(K * p.U(u));
        return std::max<std::int64_t>(2, static_cast<std::int64_t>(std::min(n, 9e18)));
    }
};

} // namespace thinlevy
