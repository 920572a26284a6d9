#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "esadapt/manipulator.hpp"
#include "esadapt/validation.hpp"

using namespace esadapt;
using std::numbers::pi;

namespace {
const ManipulatorParams kArm{};
}

TEST(Inertia, DefaultArmAtZero) {
    const Mat2 H = inertia_matrix(kArm, {0.0, 0.0});
    EXPECT_NEAR(H(0, 0), 15.0, 1e-4);
    EXPECT_NEAR(H(0, 1), 4.1667, 1e-4);
    EXPECT_NEAR(H(1, 0), 4.1667, 1e-4);
    EXPECT_NEAR(H(1, 1), 1.6667, 1e-4);
}

TEST(Inertia, OffDiagonalAtElbowPi) {
    EXPECT_NEAR(inertia_matrix(kArm, {0.0, pi})(0, 1), -0.8333, 1e-4);
}

TEST(Inertia, H22IgnoresConfiguration) {
    const double h22 = kArm.m2 * kArm.lc2 * kArm.lc2 + kArm.I2;
    for (double q1 : {-2.0, 0.3, 3.0})
        for (double q2 : {-3.1, 0.0, 1.7}) EXPECT_DOUBLE_EQ(inertia_matrix(kArm, {q1, q2})(1, 1), h22);
}

TEST(Inertia, SymmetricPositiveDefiniteOnGrid) {
    const auto r = checks::inertia_grid(kArm, 50);
    EXPECT_TRUE(r.passed) << r.detail;
    EXPECT_GT(r.measured, 0.0);
}

TEST(Coriolis, VanishesWithStraightElbow) {
    EXPECT_TRUE(coriolis_matrix(kArm, {0.7, 0.0}, {2.0, -3.0}).isZero(1e-15));
}

TEST(Coriolis, QuarterTurnElbow) {
    const Mat2 C = coriolis_matrix(kArm, {0.0, pi / 2}, {1.0, 1.0});
    EXPECT_NEAR(C(0, 0), -2.5, 1e-12);
    EXPECT_NEAR(C(0, 1), -5.0, 1e-12);
    EXPECT_NEAR(C(1, 0), 2.5, 1e-12);
    EXPECT_NEAR(C(1, 1), 0.0, 1e-12);
}

TEST(Coriolis, SkewSymmetryAlongRandomTrajectories) {
    EXPECT_LT(checks::skew_residual(kArm, 10, 1e-6), 1e-6);
    EXPECT_LT(checks::skew_residual(kArm, 10, 1e-6, 7), 1e-6);
}

TEST(Gravity, KnownConfigurations) {
    const Vec2 g0 = gravity_vector(kArm, {0.0, 0.0});
    EXPECT_NEAR(g0[0], 147.0, 1e-12);
    EXPECT_NEAR(g0[1], 24.5, 1e-12);
    EXPECT_TRUE(gravity_vector(kArm, {pi / 2, 0.0}).isZero(1e-12));
    const Vec2 g2 = gravity_vector(kArm, {0.0, pi / 2});
    EXPECT_NEAR(g2[0], 98.0, 1e-12);
    EXPECT_NEAR(g2[1], 0.0, 1e-12);
}

TEST(PlantDerivative, CompensatedTorqueHoldsStill) {
    const PlantState s{{0.4, -1.1}, {0.3, 0.8}, 0.0};
    const Vec2 tau = coriolis_matrix(kArm, s.q, s.qdot) * s.qdot + gravity_vector(kArm, s.q);
    const Vec4 d = plant_derivative(kArm, s, tau, NoUncertainty{});
    EXPECT_DOUBLE_EQ(d[0], 0.3);
    EXPECT_DOUBLE_EQ(d[1], 0.8);
    EXPECT_NEAR(d[2], 0.0, 1e-12);
    EXPECT_NEAR(d[3], 0.0, 1e-12);
}

TEST(PlantDerivative, GravityUncertaintyAtRest) {
    const PlantState s{{0.0, 0.0}, {0.0, 0.0}, 0.0};
    const Vec2 tau = gravity_vector(kArm, s.q);
    const Vec4 d = plant_derivative(kArm, s, tau, GravityUncertainty::constant(-1.0, -3.0));
    EXPECT_NEAR(d[2], -147.0, 1e-9);
    EXPECT_NEAR(d[3], -73.5, 1e-9);
}

TEST(Uncertainty, TimeVaryingAtOrigin) {
    const TimeVaryingUncertainty tv{{Waveform::sine(1.0, -0.14, 0.01), Waveform::cosine(1.0, -0.12, 0.01)}};
    const Vec2 db = uncertainty_term(kArm, tv, 0.0, {0.3, 0.2});
    EXPECT_DOUBLE_EQ(db[0], 1.0);
    EXPECT_DOUBLE_EQ(db[1], 0.88);
    const Vec2 truth = true_parameters(tv, 0.0);
    EXPECT_DOUBLE_EQ(truth[0], 1.0);
    EXPECT_DOUBLE_EQ(truth[1], 0.88);
}

TEST(Uncertainty, MixedRejectsEtaAboveBound) {
    MixedUncertainty m;
    m.delta = Mat2::Identity();
    m.eta = {Waveform::sine(0.0, 0.2, 0.5), Waveform::constant(0.0)};
    m.c1 = 0.1;
    EXPECT_THROW(validate_uncertainty(m, 100.0, 1000), ValidationError);
    m.c1 = 0.25;
    EXPECT_NO_THROW(validate_uncertainty(m, 100.0, 1000));
}

TEST(PlantDerivative, SingularInertiaRejected) {
    ManipulatorParams p;
    p.m1 = p.m2 = 0.0;
    p.I1 = p.I2 = 0.0;
    EXPECT_THROW(plant_derivative(p, PlantState{{0, 0}, {0, 0}, 0}, {0, 0}, NoUncertainty{}), SingularInertia);
}

TEST(Params, InvalidMassRejected) {
    ManipulatorParams p;
    p.m2 = -1.0;
    EXPECT_THROW(p.validate(), ValidationError);
}
