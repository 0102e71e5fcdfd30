#include <cmath>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include "thinlevy/tilt.hpp"

using namespace thinlevy;

namespace {

// Tilted law of T_i straight from the reweighting e^{theta y 1{T <= u}} of Exp(c_i).
double tilted_cdf_oracle(double c, double t, double u, double th) {
    double y = c * u;
    double Z = -std::expm1(-y) * std::exp(th * y) + std::exp(-y);
    if (t <= u) return -std::expm1(-c * t) * std::exp(th * y) / Z;
    return (-std::expm1(-y) * std::exp(th * y) + std::exp(-y) - std::exp(-c * t)) / Z;
}

long double h_ld(long double v, long double a, long double th) {
    return -expm1l(-a * v) / (-expm1l(-v) + expl(-(1 + th) * v));
}

// (h(v,a) - a v) / v^2 for small v, symbolic coefficients k = 2..5
long double ie_series_reduced(long double v, long double a, long double t) {
    long double c2 = -a * (a - 2 * t) / 2;
    long double c3 = a * (a * a - 3 * a * t + 3 * t * t - 6 * t) / 6;
    long double c4 = -a * (a * a * a - 4 * a * a * t + 6 * a * t * t - 12 * a * t - 4 * t * t * t + 36 * t * t - 12 * t) / 24;
    long double c5 = a *
                     (a * a * a * a - 5 * a * a * a * t + 10 * a * a * t * t - 20 * a * a * t - 10 * a * t * t * t +
                      90 * a * t * t - 30 * a * t + 5 * t * t * t * t - 140 * t * t * t + 210 * t * t - 20 * t) /
                     120;
    return c2 + v * (c3 + v * (c4 + v * c5));
}

double IE_oracle(double a, double th, double tau) {
    boost::math::quadrature::exp_sinh<long double> es;
    long double T = tau;
    auto g = [&](long double v) -> long double {
        if (v < 1e-3L) return ie_series_reduced(v, a, th) * powl(v, 3 - T);
        if (v > 1e30L) return -a * powl(v, 2 - T);
        return (h_ld(v, a, th) - a * v) * powl(v, 1 - T);
    };
    return double((T - 1) * es.integrate(g));
}

double IV_oracle(double a, double th, double tau) {
    boost::math::quadrature::exp_sinh<long double> es;
    long double T = tau;
    auto g = [&](long double v) -> long double {
        if (v < 1e-300L || v > 1e30L) return 0;
        long double h = h_ld(v, a, th);
        return h * (1 - h) * powl(v, 2 - T);
    };
    return double((T - 1) * es.integrate(g));
}

}  // namespace

TEST(TiltedLaw, CdfMatchesReweighting) {
    auto p = ModelParams::make(3.5);
    for (std::int64_t i : {2, 7, 1000}) {
        auto law = TiltedIndicatorLaw::make(i, 10.0, 1.6, p);
        for (double t : {0.5, 3.0, 10.0, 12.0, 40.0}) {
            double o = tilted_cdf_oracle(coeff(i, p), t, 10.0, 1.6);
            EXPECT_NEAR(law.cdf(t), o, 1e-14) << i << " " << t;
            EXPECT_NEAR(tilted_cdf(i, t, 10.0, 1.6, p), o, 1e-14);
        }
        EXPECT_EQ(law.cdf(0.0), 0.0);
        EXPECT_NEAR(law.cdf(10.0), law.p_hit, 1e-15);
    }
}

TEST(TiltedLaw, QuantileInvertsCdf) {
    auto p = ModelParams::make(3.2);
    for (std::int64_t i : {2, 50, 100000}) {
        auto law = TiltedIndicatorLaw::make(i, 20.0, 6.7, p);
        for (double U : {1e-9, 0.01, 0.3, law.p_hit, 0.5 * (1 + law.p_hit), 0.999999}) {
            double t = law.quantile(U);
            EXPECT_NEAR(law.cdf(t), U, 1e-12 * std::max(1.0, U)) << i << " " << U;
        }
    }
}

TEST(TiltedLaw, Validation) {
    auto p = ModelParams::make(3.5);
    EXPECT_THROW(TiltedIndicatorLaw::make(1, 1.0, 1.0, p), DomainError);
    EXPECT_THROW(TiltedIndicatorLaw::make(2, 0.0, 1.0, p), DomainError);
    EXPECT_THROW(TiltedIndicatorLaw::make(2, 1.0, -1.0, p), DomainError);
    EXPECT_THROW(tilted_cdf(2, -1.0, 1.0, 1.0, p), DomainError);
}

TEST(Shapes, IEMatchesQuadratureOracle) {
    for (double tau : {3.2, 3.5, 3.8}) {
        auto p = ModelParams::make(tau);
        for (double th : {0.7, 1.6, 6.7})
            for (double a : {0.01, 0.25, 0.5, 0.9}) {
                double o = IE_oracle(a, th, tau);
                EXPECT_NEAR(shape_IE(a, th, p), o, 1e-9 * std::max(1.0, std::abs(o))) << tau << " " << th << " " << a;
            }
    }
}

TEST(Shapes, IVMatchesQuadratureOracle) {
    for (double tau : {3.2, 3.5, 3.8}) {
        auto p = ModelParams::make(tau);
        for (double th : {0.7, 1.6})
            for (double a : {0.01, 0.5, 1.0}) {
                double o = IV_oracle(a, th, tau);
                EXPECT_NEAR(shape_IV(a, th, p), o, 1e-9 * o) << tau << " " << th << " " << a;
            }
    }
}

TEST(Shapes, EndpointAtUnitTimeIsLambdaSlope) {
    // the a = 1 kernel is the derivative kernel of Lambda, so I_E(1; theta) = Lambda'(theta)
    auto p = ModelParams::make(3.5);
    for (double th : {0.5, 1.0, 3.0}) EXPECT_NEAR(shape_IE(1.0, th, p), lambda_deriv(th, 1, p), 1e-9);
    auto rs = solve_theta_star(p);
    EXPECT_LE(std::abs(shape_IE(1.0, rs.theta_star, p)), 1e-8);
}

TEST(Shapes, Endpoints) {
    auto p = ModelParams::make(3.5);
    EXPECT_EQ(shape_IE(0.0, 1.6, p), 0.0);
    EXPECT_EQ(shape_IV(0.0, 1.6, p), 0.0);
    EXPECT_EQ(shape_JV(1.0, 1.6, p), 0.0);
    EXPECT_EQ(shape_GV(0.0, 1.6, p), 0.0);
    EXPECT_EQ(shape_GV(1.0, 1.6, p), 0.0);
    // J_V(0) is the whole variance I_V(1)
    EXPECT_NEAR(shape_JV(0.0, 1.6, p), shape_IV(1.0, 1.6, p), 1e-10);
    EXPECT_THROW(shape_IE(1.5, 1.6, p), DomainError);
    EXPECT_THROW(shape_IV(0.5, -2.0, p), DomainError);
}

TEST(Shapes, ShapeVarianceAdditivity) {
    // I_V(1) = I_V(a) + J_V(a) - 2 G_V(a), the limit of Var(S_u) = Var S_t + Var incr + 2 Cov
    auto p = ModelParams::make(3.5);
    for (double a : {0.2, 0.5, 0.8})
        EXPECT_NEAR(shape_IV(a, 1.6, p) + shape_JV(a, 1.6, p) - 2 * shape_GV(a, 1.6, p), shape_IV(1.0, 1.6, p), 1e-9);
}

TEST(Shapes, SmallTimeVarianceConstant) {
    for (double tau : {3.2, 3.5, 3.8}) {
        auto p = ModelParams::make(tau);
        double s = tau - 2;
        double exact = (tau - 1) * std::tgamma(1 - s) * (1 - std::pow(2.0, s - 1));
        EXPECT_NEAR(shape_IV_small_a_constant(p), exact, 1e-10 * exact);
        auto rs = solve_theta_star(p);
        double ratio = shape_IV(0.005, rs.theta_star, p) / std::pow(0.005, tau - 3);
        EXPECT_NEAR(ratio / exact, 1.0, 0.05) << tau;
    }
}

TEST(Shapes, MeanProfileConcave) {
    auto p = ModelParams::make(3.5);
    auto rs = solve_theta_star(p);
    std::vector<double> v;
    for (int k = 0; k <= 40; ++k) v.push_back(shape_IE(k / 40.0, rs.theta_star, p));
    for (int k = 1; k < 40; ++k) EXPECT_LT(v[k + 1] - 2 * v[k] + v[k - 1], 0.0) << k;
    EXPECT_GT(v[1] - v[0], 0.0);
    EXPECT_LT(v[40] - v[39], 0.0);
}

TEST(ShapeTable, GridValuesAndInterpolation) {
    auto p = ModelParams::make(3.5);
    ShapeTable tab(1.6, p, 41);
    ASSERT_EQ(tab.grid().size(), 41u);
    EXPECT_EQ(tab.grid().front(), 0.0);
    EXPECT_EQ(tab.grid().back(), 1.0);
    EXPECT_NEAR(tab.IE(0.5), shape_IE(0.5, 1.6, p), 1e-13);
    for (double a : {0.113, 0.52, 0.871}) {
        EXPECT_NEAR(tab.IE(a), shape_IE(a, 1.6, p), 1e-3 * std::abs(shape_IE(a, 1.6, p)));
        EXPECT_NEAR(tab.JV(a), shape_JV(a, 1.6, p), 1e-3 * shape_JV(a, 1.6, p));
        EXPECT_NEAR(tab.GV(a), shape_GV(a, 1.6, p), 1e-3 * shape_GV(a, 1.6, p));
    }
    EXPECT_THROW(tab.IV(1.2), DomainError);
    EXPECT_THROW(ShapeTable(1.6, p, 1), DomainError);
}

// Sums over i >= 1 of the exact moments reduce to the shape integrals (no polynomial part,
// so the Mellin expansion has only the power term plus a remainder exponentially small in t);
// removing i = 1 gives the i >= 2 sums.
TEST(TiltedMoments, MeanMatchesMellinIdentity) {
    for (double tau : {3.2, 3.5, 3.8}) {
        auto p = ModelParams::make(tau, 0.2);
        const double u = 60, th = 1.3;
        for (double a : {0.25, 0.5, 1.0}) {
            double t = a * u;
            double h1 = double(h_ld(u, a, th));
            double mel = 1 + 0.2 * t + std::pow(u, tau - 2) * IE_oracle(a, th, tau) + p.zeta_alpha - t * p.zeta_2alpha -
                         (h1 - t);
            EXPECT_NEAR(tilted_mean_exact(t, u, th, p), mel, 1e-9 * std::max(1.0, std::abs(mel)) + std::exp(-t))
                << tau << " " << a;
        }
    }
}

TEST(TiltedMoments, VarianceMatchesMellinIdentity) {
    for (double tau : {3.2, 3.5, 3.8}) {
        auto p = ModelParams::make(tau);
        const double u = 60, th = 1.3;
        for (double a : {0.25, 1.0}) {
            double h1 = double(h_ld(u, a, th));
            double mel = std::pow(u, tau - 3) * IV_oracle(a, th, tau) - h1 * (1 - h1);
            EXPECT_NEAR(tilted_var_exact(a * u, u, th, p), mel, 1e-9 * mel + std::exp(-a * u)) << tau << " " << a;
        }
    }
}

TEST(TiltedMoments, VarianceAdditivity) {
    for (double tau : {3.2, 3.5, 3.8}) {
        auto p = ModelParams::make(tau);
        auto rs = solve_theta_star(p);
        auto rt = solve_theta_star_u(20.0, p, rs);
        double vu = tilted_var_exact(20.0, rt, p);
        for (double t : {5.0, 10.0, 15.0}) {
            double s = tilted_var_exact(t, rt, p) + tilted_var_increment_exact(t, rt, p) + 2 * tilted_cov_exact(t, rt, p);
            EXPECT_NEAR(s, vu, 1e-12 * vu) << tau << " " << t;
        }
    }
}

TEST(TiltedMoments, ZeroTiltReducesToOriginalMean) {
    auto p = ModelParams::make(3.5, 0.1);
    // at theta = 0 the tilt is trivial, so the mean at t <= u is the original mean
    for (double t : {4.0, 10.0}) EXPECT_NEAR(tilted_mean_exact(t, 10.0, 0.0, p), mean_original_exact(t, p), 1e-10 * t);
}

TEST(TiltedMoments, TimeValidation) {
    auto p = ModelParams::make(3.5);
    EXPECT_THROW(tilted_mean_exact(11.0, 10.0, 1.0, p), DomainError);
    EXPECT_THROW(tilted_var_exact(-1.0, 10.0, 1.0, p), DomainError);
    EXPECT_THROW(joint_scaling(0.0, 10.0, 1.0, p), DomainError);
}

TEST(JointMgf, QuadraticForSmallArguments) {
    auto p = ModelParams::make(3.5);
    const double u = 20, t = 8, th = 1.5;
    auto sc = joint_scaling(t, u, th, p);
    double v1 = tilted_var_exact(t, u, th, p), v2 = tilted_var_increment_exact(t, u, th, p),
           c = tilted_cov_exact(t, u, th, p);
    for (auto [l1, l2] : {std::pair{1e-2, 0.0}, std::pair{0.0, 1e-2}, std::pair{1e-2, -2e-2}}) {
        double x = l1 * sc.l1_scale, z = l2 * sc.l2_scale;
        double quad = 0.5 * (x * x * v1 + 2 * x * z * c + z * z * v2);
        EXPECT_NEAR(joint_mgf_tilted(l1, l2, t, u, th, p), quad, 0.05 * quad) << l1 << " " << l2;
    }
    EXPECT_EQ(joint_mgf_tilted(0.0, 0.0, t, u, th, p), 0.0);
    EXPECT_THROW(joint_mgf_tilted(0.0, 1.0, u, u, th, p), DomainError);
}

TEST(JointMgf, GaussianAtLargeHorizon) {
    auto p = ModelParams::make(3.5);
    auto rs = solve_theta_star(p);
    auto rt = solve_theta_star_u(100.0, p, rs);
    for (double l : {-1.0, -0.5, 0.5, 1.0}) EXPECT_NEAR(joint_mgf_tilted(l, 0.0, 100.0, rt, p), 0.5 * l * l, 0.05);
}
