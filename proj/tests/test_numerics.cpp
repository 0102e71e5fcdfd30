#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <gtest/gtest.h>

#include "thinlevy/numerics/quadrature.hpp"
#include "thinlevy/numerics/roots.hpp"
#include "thinlevy/numerics/summation.hpp"
#include "thinlevy/numerics/tail_sum.hpp"
#include "thinlevy/numerics/zeta.hpp"
#include "thinlevy/rate.hpp"

using namespace thinlevy;

namespace {

// Euler-Maclaurin bracket with the next two Bernoulli corrections, evaluated at 10^6.
double zeta_em_oracle(double s) {
    const long N = 1000000;
    NeumaierSum<> acc;
    for (long n = N; n >= 1; --n) acc += std::pow(double(n), -s);
    double Nd = N;
    acc += -std::pow(Nd, 1 - s) / (1 - s);
    acc += -0.5 * std::pow(Nd, -s);
    acc += s / 12.0 * std::pow(Nd, -s - 1);
    acc += -s * (s + 1) * (s + 2) / 720.0 * std::pow(Nd, -s - 3);
    return acc.value();
}

}  // namespace

TEST(Zeta, ZeroIsMinusHalfForEveryN) {
    for (long N : {1L, 2L, 17L, 1000L, 100000L}) EXPECT_EQ(zeta_continued(0.0, N).value, -0.5);
}

TEST(Zeta, AtTwoMatchesBasel) {
    auto z = zeta_continued(2.0, 100000);
    EXPECT_NEAR(z.value, std::numbers::pi * std::numbers::pi / 6.0, 1e-8);
}

TEST(Zeta, InsideCriticalStripMatchesHigherOrderOracle) {
    for (double s : {0.4, 0.8}) {
        double oracle = zeta_em_oracle(s);
        EXPECT_NEAR(zeta_continued(s, 100000).value, oracle, 1e-8) << "s=" << s;
        EXPECT_NEAR(oracle, boost::math::zeta(s), 1e-10) << "s=" << s;
    }
}

TEST(Zeta, ConvergentRegionWithinEstimatedError) {
    for (double s : {1.5, 2.0, 3.0}) {
        for (long N : {1000L, 4000L, 20000L}) {
            auto z = zeta_continued(s, N);
            EXPECT_LE(std::abs(z.value - boost::math::zeta(s)), z.est_error + 1e-14) << s << " " << N;
        }
    }
}

TEST(Zeta, ErrorEstimateShrinksWithN) {
    for (double s : {0.4, 0.8, 1.5}) {
        double prev = zeta_continued(s, 500).est_error;
        for (long N : {1000L, 2000L, 4000L}) {
            double e = zeta_continued(s, N).est_error;
            EXPECT_LT(e, prev) << s;
            prev = e;
        }
    }
}

TEST(Zeta, NegativeOnUnitInterval) {
    for (double s : {0.35, 0.40, 0.45, 0.8, 0.9}) EXPECT_LT(zeta_continued(s, 20000).value, 0.0);
}

TEST(Zeta, DomainErrors) {
    EXPECT_THROW(zeta_continued(1.0), DomainError);
    EXPECT_THROW(zeta_continued(-1.0), DomainError);
    EXPECT_THROW(zeta_continued(-2.5), DomainError);
    EXPECT_THROW(zeta_continued(0.5, 0), DomainError);
}

TEST(Quadrature, SemilineClosedForms) {
    QuadratureSpec qs{1e-13, 1e-12, 2000};
    EXPECT_NEAR(integrate_semiline([](double x) { return std::exp(-x); }, qs, {1, 0, 2, true}).value, 1.0, 1e-12);
    EXPECT_NEAR(integrate_semiline([](double x) { return std::exp(-x) / std::sqrt(x); }, qs, {1, -0.5, 2, true}).value,
                std::sqrt(std::numbers::pi), 1e-11);
    EXPECT_NEAR(integrate_semiline([](double x) { return std::sqrt(x) * std::exp(-x); }, qs, {1, 0.5, 2, true}).value,
                std::tgamma(1.5), 1e-12);
    EXPECT_NEAR(integrate_semiline([](double x) { return 1.0 / ((1 + x) * (1 + x)); }, qs, {1, 0, 2, false}).value, 1.0,
                1e-12);
    EXPECT_NEAR(integrate_semiline([](double x) { return 1.0 / (1 + x * x); }, qs, {1, 0, 2, false}).value,
                std::numbers::pi / 2, 1e-12);
    // int_0^inf x^{p-1}/(1+x) = pi / sin(pi p), p = 0.7
    EXPECT_NEAR(integrate_semiline([](double x) { return std::pow(x, -0.3) / (1 + x); }, qs, {1, -0.3, 1.3, false}).value,
                std::numbers::pi / std::sin(0.7 * std::numbers::pi), 1e-10);
}

TEST(Quadrature, SqrtSingularityAgainstTrapezoidOracle) {
    // x = t^2 removes the singularity; a fine trapezoid on the smooth form is the oracle
    auto g = [](double t) { return 2.0 * std::exp(-t * t); };
    const int n = 200000;
    const double T = 12.0, h = T / n;
    NeumaierSum<> acc;
    for (int j = 0; j <= n; ++j) acc += (j == 0 || j == n ? 0.5 : 1.0) * g(j * h);
    double trap = acc.value() * h;
    double v = integrate_semiline([](double x) { return std::exp(-x) / std::sqrt(x); }, {1e-13, 1e-12, 2000},
                                  {1, -0.5, 2, true}).value;
    EXPECT_NEAR(v, trap, 1e-10);
}

TEST(Quadrature, PowerSingularityOnUnitInterval) {
    const double alpha = 0.4;
    auto f = [alpha](double x) { return x <= 1.0 ? std::pow(x, -2 * alpha) : 0.0; };
    double v = integrate_semiline(f, {1e-12, 1e-12, 2000}, {1.0, -2 * alpha, 2, false}).value;
    EXPECT_NEAR(v, 1.0 / (1.0 - 2 * alpha), 1e-10);
}

TEST(Quadrature, BudgetExhaustionThrows) {
    auto f = [](double x) { return std::sin(1.0 / x); };
    EXPECT_THROW(integrate_interval(f, 1e-6, 1.0, {1e-15, 1e-15, 5}), ConvergenceError);
}

TEST(Quadrature, SpecValidation) {
    EXPECT_THROW((QuadratureSpec{0.0, 1e-10, 10}.check()), DomainError);
    EXPECT_THROW((QuadratureSpec{1e-10, 1e-10, 0}.check()), DomainError);
}

TEST(Roots, Linear) {
    auto r = find_root_increasing([](double x) { return x - 1; }, 0, 2);
    EXPECT_NEAR(r.x, 1.0, 1e-10);
}

TEST(Roots, CubicAgainstBisectionOracle) {
    auto g = [](double x) { return x * x * x - 2; };
    double lo = 0, hi = 2;
    for (int k = 0; k < 200; ++k) {
        double m = 0.5 * (lo + hi);
        (g(m) < 0 ? lo : hi) = m;
    }
    auto r = find_root_increasing(g, 0, 2, 1e-12);
    EXPECT_NEAR(r.x, std::cbrt(2.0), 1e-12);
    EXPECT_NEAR(r.x, 0.5 * (lo + hi), 1e-12);
    EXPECT_LE(std::abs(r.fx), 1e-12);
    EXPECT_LE(r.lo, r.x);
    EXPECT_GE(r.hi, r.x);
}

TEST(Roots, ExpandsBracketUpward) {
    auto r = find_root_increasing([](double x) { return x - 50; }, 0, 1);
    EXPECT_NEAR(r.x, 50.0, 1e-10);
    EXPECT_LE(r.lo, r.x);
    EXPECT_GE(r.hi, r.x);
}

TEST(Roots, BracketErrors) {
    EXPECT_THROW(find_root_increasing([](double x) { return x + 1; }, 0, 1), BracketError);
    EXPECT_THROW(find_root_increasing([](double) { return -1.0; }, 0, 1, 1e-10, {50, 8, 200}), BracketError);
    EXPECT_THROW(find_root_increasing([](double x) { return x; }, 1, 1), BracketError);
}

TEST(Roots, LambdaPrimeAgainstGridScan) {
    auto p = ModelParams::make(3.5);
    auto g = [&](double th) { return lambda_deriv(th, 1, p); };
    double prev = g(0.0), lo = -1, hi = -1;
    for (int k = 1; k <= 100; ++k) {
        double th = 0.05 * k, v = g(th);
        if (prev < 0 && v >= 0) {
            lo = th - 0.05;
            hi = th;
            break;
        }
        prev = v;
    }
    ASSERT_GT(hi, 0);
    auto r = find_root_increasing(g, 0.0, 1.0, 1e-11);
    EXPECT_GE(r.x, lo);
    EXPECT_LE(r.x, hi);
    EXPECT_LE(std::abs(g(r.x)), 1e-10);
}

TEST(TailSum, PureBrokenPowerAgainstZetaOracle) {
    // a = 3, b = 0, tau = 3.5: sum_{i > 10^6} i^{-1.2} = zeta(1.2) - sum_{i <= 10^6} i^{-1.2}
    const long N = 1000000;
    NeumaierSum<> head;
    for (long i = N; i >= 1; --i) head += std::pow(double(i), -1.2);
    double oracle = boost::math::zeta(1.2) - head.value();
    auto t = tail_power_exp_sum(3.0, 0.0, 1.0, N, 3.5);
    EXPECT_NEAR(t.value / oracle, 1.0, 1e-6);
}

TEST(TailSum, ExponentialKill) {
    auto t = tail_power_exp_sum(3.0, 1e9, 10.0, 1000, 3.5);
    EXPECT_EQ(t.value, 0.0);
}

TEST(TailSum, DomainErrors) {
    EXPECT_THROW(tail_power_exp_sum(2.5, 1.0, 1.0, 10, 3.5), DomainError);
    EXPECT_THROW(tail_power_exp_sum(3.0, -1.0, 1.0, 10, 3.5), DomainError);
}

namespace {

// direct sum over N < i <= M plus an Euler-Maclaurin remainder whose integral comes from
// boost's exp-sinh quadrature
double brute_tail(double a, double b, double u, long N, double tau, long M) {
    double alpha = 1 / (tau - 1), s = a * alpha, bu = b * u;
    auto g = [=](double x) { return std::pow(x, -s) * std::exp(-bu * std::pow(x, -alpha)); };
    NeumaierSum<> acc;
    for (long i = M; i > N; --i) acc += g(double(i));
    boost::math::quadrature::exp_sinh<double> es;
    double Md = double(M);
    acc += es.integrate([&](double x) { return g(Md + x); });
    double g1 = g(Md) * (-s / Md + bu * alpha * std::pow(Md, -alpha - 1));
    acc += -0.5 * g(Md) - g1 / 12.0;
    return acc.value();
}

}  // namespace

TEST(TailSum, PowerTimesExponentialWithinCertifiedBound) {
    auto t = tail_power_exp_sum(3.0, 1.0, 10.0, 1000, 3.5);
    double brute = brute_tail(3.0, 1.0, 10.0, 1000, 3.5, 200000);
    EXPECT_LE(std::abs(t.value - brute), t.error_bound + 1e-13 * std::abs(brute));
    EXPECT_LT(t.error_bound, 1e-6 * t.value);
}

TEST(TailSum, BoundNeverViolatedOnRandomGrid) {
    std::mt19937_64 gen(12345);
    std::uniform_real_distribution<double> ua(3.0, 9.0), ub(0.0, 3.0), uu(0.5, 20.0), ut(3.1, 3.9);
    std::uniform_int_distribution<long> un(2, 400);
    for (int trial = 0; trial < 30; ++trial) {
        double tau = ut(gen), a = ua(gen), b = ub(gen), u = uu(gen);
        long N = un(gen);
        if (!(a > tau - 1)) continue;
        auto t = tail_power_exp_sum(a, b, u, N, tau);
        double brute = brute_tail(a, b, u, N, tau, 100000);
        EXPECT_LE(std::abs(t.value - brute), t.error_bound + 1e-12 * std::abs(brute))
            << "tau=" << tau << " a=" << a << " b=" << b << " u=" << u << " N=" << N;
    }
}

TEST(Summation, NeumaierBeatsNaiveOnCancellation) {
    NeumaierSum<> s;
    s += 1.0;
    s += 1e100;
    s += 1.0;
    s += -1e100;
    EXPECT_EQ(s.value(), 2.0);
}
