#include <cmath>
#include <complex>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "thinlevy/model.hpp"

using namespace thinlevy;

namespace {

// Taylor coefficients of f_hat(y; theta) at y = 0 for k = 3..7, derived symbolically.
// f_hat / y^3
long double fhat_series_reduced(long double y, long double t) {
    long double c3 = t * (t - 1) / 2;
    long double c4 = t * (2 * t * t - 9 * t + 2) / 12;
    long double c5 = t * (t - 1) * (t * t - 13 * t + 1) / 24;
    long double c6 = t * (6 * t * t * t * t - 225 * t * t * t + 620 * t * t - 225 * t + 6) / 720;
    long double c7 = t * (t - 1) * (t * t * t * t - 92 * t * t * t + 483 * t * t - 92 * t + 1) / 720;
    return c3 + y * (c4 + y * (c5 + y * (c6 + y * c7)));
}

long double fhat_series(long double y, long double t) { return y * y * y * fhat_series_reduced(y, t); }

// one indicator's log E[exp(theta y (1{T <= u} - y))], straight from the two-point law
long double fhat_direct(long double y, long double t) {
    // log(p e^{t y (1-y)} + (1-p) e^{-t y^2}) with the e^{t y - t y^2} factored out
    long double p = -expm1l(-y);
    return t * y - t * y * y + logl(p + expl(-(1 + t) * y));
}

long double fhat_oracle(long double y, long double t) {
    return y < 1e-2L ? fhat_series(y, t) : fhat_direct(y, t);
}

// (tau-1) int_0^inf f_hat(y) y^-tau dy with boost's exp-sinh rule
double lambda_oracle(double theta, double tau) {
    boost::math::quadrature::exp_sinh<long double> es;
    long double T = tau;
    auto g = [&](long double y) -> long double {
        if (y < 1e-2L) return fhat_series_reduced(y, theta) * powl(y, 3 - T);
        if (y > 1e30L) return -(long double)theta * powl(y, 2 - T);
        return fhat_direct(y, theta) * powl(y, -T);
    };
    return double((T - 1) * es.integrate(g));
}

}  // namespace

TEST(Model, Coefficients) {
    auto p = ModelParams::make(3.5);
    EXPECT_DOUBLE_EQ(coeff(2, p), std::pow(2.0, -0.4));
    EXPECT_DOUBLE_EQ(coeff(1000, p), std::pow(1000.0, -0.4));
    EXPECT_THROW(coeff(1, p), DomainError);
    EXPECT_THROW(coeff(0, p), DomainError);
}

TEST(Model, ParamsValidation) {
    EXPECT_THROW(ModelParams::make(3.0), DomainError);
    EXPECT_THROW(ModelParams::make(4.0), DomainError);
    EXPECT_THROW(ModelParams::make(2.5), DomainError);
    EXPECT_THROW(ModelParams::make(3.5, std::nan("")), DomainError);
    auto p = ModelParams::make(3.25);
    EXPECT_DOUBLE_EQ(p.alpha, 1.0 / 2.25);
    EXPECT_NEAR(p.U(2.0), std::pow(2.0, 2.25), 1e-15);
}

TEST(Model, FhatMatchesTwoPointLaw) {
    for (double th : {-0.5, 0.3, 1.0, 1.64, 5.0})
        for (double y : {0.05, 0.3, 1.0, 2.5, 7.0, 20.0}) {
            double v = f_hat(y, th);
            double o = double(fhat_direct(y, th));
            EXPECT_NEAR(v, o, 1e-13 * std::max(1.0, std::abs(o))) << th << " " << y;
        }
}

TEST(Model, FhatSmallArgumentMatchesSeries) {
    // f_hat = O(y^3); the direct formula cancels, the series is exact to y^8
    for (double th : {0.5, 1.64, 3.0})
        for (double y : {1e-3, 3e-3, 1e-2}) {
            double s = double(fhat_series(y, th));
            EXPECT_NEAR(f_hat(y, th), s, 1e-9 * std::abs(s) + 1e-22) << th << " " << y;
        }
}

TEST(Model, KernelsAreProbabilities) {
    for (double th : {-0.5, 0.0, 1.64, 6.7})
        for (double a : {0.0, 0.25, 0.5, 1.0})
            for (double y : {1e-6, 0.1, 1.0, 10.0, 80.0}) {
                double h = kernel_h(y, a, th), g = kernel_one_minus_h(y, a, th);
                EXPECT_GE(h, 0.0);
                EXPECT_LE(h, 1.0);
                EXPECT_NEAR(h + g, 1.0, 1e-14);
            }
    EXPECT_EQ(kernel_h(2.0, 0.0, 1.0), 0.0);
}

TEST(Model, TiltedHitProbabilityClosedForm) {
    // P~(T <= u) = (1 - e^-y) e^{theta y} / ((1 - e^-y) e^{theta y} + e^-y)
    for (double th : {0.5, 1.64})
        for (double y : {0.2, 1.0, 4.0}) {
            double q = -std::expm1(-y) * std::exp(th * y);
            EXPECT_NEAR(kernel_h(y, 1.0, th), q / (q + std::exp(-y)), 1e-14);
        }
}

TEST(Model, ComplexKernelsAgreeOnRealAxis) {
    for (double y : {0.1, 1.0, 5.0}) {
        cplx z(y, 0.0);
        EXPECT_NEAR(std::abs(f_hat(z, 1.2) - f_hat(y, 1.2)), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(kernel_h(z, 0.3, 1.2) - kernel_h(y, 0.3, 1.2)), 0.0, 1e-14);
    }
}

TEST(Model, IntegrandSplitSumsToWhole) {
    auto p = ModelParams::make(3.5);
    for (double x : {0.01, 0.5, 3.0}) {
        auto s = f_integrand_split(x, 1.3, p);
        EXPECT_NEAR(s.value(), f_integrand(x, 1.3, p), 1e-12 * std::max(1.0, std::abs(s.f2)));
    }
    EXPECT_THROW(f_integrand(1.0, -1.0, p), DomainError);
    EXPECT_THROW(f_integrand(0.0, 1.0, p), DomainError);
}

TEST(Model, LogMgfDirectPartMatchesLongDoubleSum) {
    auto p = ModelParams::make(3.5);
    const double u = 5.0, th = 0.8;
    auto L = log_mgf_exact(u, th, p);
    long double acc = 0;
    for (long i = L.N; i >= 2; --i) acc += fhat_oracle(u * powl((long double)i, -(long double)p.alpha), th);
    EXPECT_NEAR(L.direct, double(acc), 1e-12 * std::abs(double(acc)));
    EXPECT_DOUBLE_EQ(L.linear, th * u);
}

// Mellin identity: sum_{i>=1} f_hat(c_i u) = u^{tau-1} Lambda + theta (u zeta(alpha) - u^2 zeta(2 alpha)) + tiny,
// so the i >= 2 sum is that minus the i = 1 term.
TEST(Model, LogMgfMatchesMellinIdentity) {
    for (double tau : {3.2, 3.5, 3.8}) {
        auto p = ModelParams::make(tau);
        for (double th : {0.5, 1.5}) {
            const double u = 20.0;
            double lam = lambda_oracle(th, tau);
            double mel = th * u + p.U(u) * lam + th * (u * p.zeta_alpha - u * u * p.zeta_2alpha) - f_hat(u, th);
            auto L = log_mgf_exact(u, th, p);
            EXPECT_NEAR(L.value, mel, 1e-10 * std::abs(mel)) << "tau=" << tau << " theta=" << th;
        }
    }
}

TEST(Model, LogMgfIndependentOfTruncation) {
    auto p = ModelParams::make(3.5);
    TruncationPolicy a, b;
    b.K = 40;
    auto La = log_mgf_exact(8.0, 1.2, p, a), Lb = log_mgf_exact(8.0, 1.2, p, b);
    EXPECT_GT(Lb.N, La.N);
    EXPECT_NEAR(La.value, Lb.value, 1e-11 * std::abs(La.value));
}

TEST(Model, UncompensatedTailIsWorseAndFlagged) {
    auto p = ModelParams::make(3.5);
    TruncationPolicy off;
    off.compensate_tail = false;
    auto on = log_mgf_exact(8.0, 1.2, p), raw = log_mgf_exact(8.0, 1.2, p, off);
    EXPECT_EQ(raw.compensation, 0.0);
    EXPECT_GT(raw.est_error, std::abs(on.value - raw.value) * 0.5);
    EXPECT_GT(std::abs(on.value - raw.value), 100 * on.est_error);
    TruncationPolicy strict = off;
    strict.max_tail_error = 1e-12;
    EXPECT_THROW(log_mgf_exact(8.0, 1.2, p, strict), TruncationError);
}

TEST(Model, LogMgfAtZeroTiltVanishes) {
    auto p = ModelParams::make(3.5);
    EXPECT_NEAR(log_mgf_exact(6.0, 0.0, p).value, 0.0, 1e-13);
}

// E[S_t] = 1 + beta t + (1/t) sum_{i>=2} G(c_i t), G(y) = y(1 - e^-y) - y^2, and the same Mellin
// argument gives (tau-1) t^{tau-2} int G y^-tau + zeta(alpha) - t zeta(2 alpha) - G(t)/t.
TEST(Model, OriginalMeanMatchesMellinIdentity) {
    boost::math::quadrature::exp_sinh<long double> es;
    for (double tau : {3.2, 3.5, 3.8}) {
        auto p = ModelParams::make(tau, 0.3);
        long double T = tau;
        auto g = [&](long double y) -> long double {
            if (y < 1e-2L) return powl(y, 3 - T) * (-0.5L + y / 6 - y * y / 24 + y * y * y / 120);
            if (y > 1e30L) return -powl(y, 2 - T);
            return (y * (-expm1l(-y)) - y * y) * powl(y, -T);
        };
        double IG = double((T - 1) * es.integrate(g));
        for (double t : {20.0, 40.0}) {
            double G = t * (-std::expm1(-t)) - t * t;
            double mel = 1 + 0.3 * t + IG * std::pow(t, tau - 2) + p.zeta_alpha - t * p.zeta_2alpha - G / t;
            EXPECT_NEAR(mean_original_exact(t, p), mel, 1e-11 * std::abs(mel)) << tau << " " << t;
        }
    }
}

TEST(Model, OriginalMeanEdgeCases) {
    auto p = ModelParams::make(3.5);
    EXPECT_EQ(mean_original_exact(0.0, p), 1.0);
    EXPECT_THROW(mean_original_exact(-1.0, p), DomainError);
    EXPECT_THROW(log_mgf_exact(0.0, 1.0, p), DomainError);
    EXPECT_THROW(log_mgf_exact(1.0, -1.5, p), DomainError);
}
