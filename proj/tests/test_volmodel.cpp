#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "flowdual/volmodel.hpp"

using namespace flowdual;

namespace {

std::vector<VolModel> forms() {
    TimeScaledVol ts;
    ts.time_coeffs = {1.0, 0.2};
    ts.base = 0.25;
    ts.frequency = 1.5;
    ts.cos_coeffs = {0.03};
    ts.sin_coeffs = {-0.02, 0.01};
    return {VolModel::constant(0.3), VolModel::tanh_smile(0.3, 0.1, 2.0, 0.5, 1.1),
            VolModel::time_scaled(ts)};
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST(VolModel, ConstantValues) {
    const VolValues v = VolModel::constant(0.3).eval(0.4, 2.5);
    EXPECT_DOUBLE_EQ(v.sigma, 0.3);
    EXPECT_DOUBLE_EQ(v.dsigma, 0.0);
    EXPECT_DOUBLE_EQ(v.eta, 0.75);
    EXPECT_DOUBLE_EQ(v.deta, 0.3);
}

TEST(VolModel, TanhAtAnchor) {
    const double a = 0.3, b = 0.1, c = 2.0, x0 = 1.2;
    const VolValues v = VolModel::tanh_smile(a, b, c, 0.0, x0).eval(0.0, x0);
    EXPECT_DOUBLE_EQ(v.sigma, a);
    EXPECT_NEAR(v.dsigma, b * c / x0, 1e-15);
}

TEST(VolModel, DerivativesMatchFiniteDifferences) {
    for (const VolModel& m : forms()) {
        for (double t : {0.0, 0.3, 0.9}) {
            for (double x : {0.5, 0.9, 1.0, 1.3, 2.0}) {
                const double h = 1e-5 * x;
                const double fd = (m.sigma(t, x + h) - m.sigma(t, x - h)) / (2 * h);
                const VolValues v = m.eval(t, x);
                EXPECT_NEAR(v.dsigma, fd, 1e-6 * std::max(std::abs(fd), 1e-3)) << t << " " << x;
                EXPECT_NEAR(v.deta, v.sigma + x * v.dsigma, 1e-15);
                const double h2 = 1e-4 * x;
                const double fd2 = (m.sigma(t, x + h2) - 2 * m.sigma(t, x) + m.sigma(t, x - h2)) / (h2 * h2);
                EXPECT_NEAR(m.d2sigma(t, x), fd2, 1e-4 * std::max(std::abs(fd2), 1.0));
            }
        }
    }
}

TEST(VolModel, Validation) {
    EXPECT_THROW(VolModel::tanh_smile(0.1, 0.2, 1.0, 0.0, 1.0), Error);
    EXPECT_THROW(VolModel::constant(-0.1), Error);
    EXPECT_THROW(VolModel::constant(0.3).eval(0.0, 0.0), Error);
}

TEST(VolClass, ConstantSups) {
    const auto ts = linspace(0.0, 1.0, 5);
    const auto xs = linspace(0.2, 5.0, 41);
    const ClassReport r = vol_class_check(VolModel::constant(0.25), ts, xs);
    EXPECT_DOUBLE_EQ(r.sups[0], 0.25);
    EXPECT_NEAR(r.sups[1], 0.0, 1e-12);
    EXPECT_NEAR(r.sups[2], 0.0, 1e-6);
    EXPECT_NEAR(r.sups[3], 0.0, 1e-4);
    EXPECT_TRUE(r.pass);
}

TEST(VolClass, TanhWithoutAmplitudeIsConstant) {
    const auto ts = linspace(0.0, 1.0, 5);
    const auto xs = linspace(0.2, 5.0, 41);
    const ClassReport r = vol_class_check(VolModel::tanh_smile(0.3, 0.0, 2.0, 0.0, 1.0), ts, xs);
    EXPECT_DOUBLE_EQ(r.sups[0], 0.3);
    EXPECT_NEAR(r.sups[1], 0.0, 1e-12);
}

TEST(VolClass, TanhSmileMember) {
    const auto ts = linspace(0.0, 1.0, 11);
    const auto xs = linspace(0.05, 20.0, 401);
    const ClassReport r = vol_class_check(VolModel::tanh_smile(0.3, 0.1, 2.0, 0.0, 1.0), ts, xs);
    EXPECT_TRUE(r.positive);
    EXPECT_TRUE(r.bounded);
    EXPECT_TRUE(r.stable);
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.eta_at_xmin, 0.05);
}
