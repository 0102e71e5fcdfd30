// Prints theta*, I and the refined tilt for a few horizons, then one importance-sampling
// estimate next to the asymptotic formula.

#include <cstdio>

#include "thinlevy/density.hpp"
#include "thinlevy/montecarlo.hpp"
#include "thinlevy/rate.hpp"
#include "thinlevy/tilt.hpp"

using namespace thinlevy;

int main() {
    ModelParams p = ModelParams::make(3.5);
    RateSolution rs = solve_theta_star(p);
    std::printf("tau=%.2f theta*=%.10f I=%.10f Lambda''=%.10f\n", p.tau, rs.theta_star, rs.big_I,
                rs.lambda_pp_at_star);
    for (double u : {10.0, 50.0, 100.0}) {
        RefinedTilt rt = solve_theta_star_u(u, p, rs);
        std::printf("u=%-5g eps_u=%.6f theta*_u=%.6f exponent=%.6g\n", u, rt.eps_u, rt.theta_star_u, rt.exponent);
    }
    BDConstants bd = constants_B_D(rs, shape_IV(1.0, rs.theta_star, p));
    RefinedTilt rt = solve_theta_star_u(4.0, p, rs);
    Estimate is = estimate_tail_is(rt, p, 20000, 42);
    std::printf("u=4 log P: importance sampling %.4f (rel se %.3f), asymptotic %.4f\n", is.log_value, is.rel_error,
                log_tail_probability_asymptotic(rt, p, bd.D));
}
