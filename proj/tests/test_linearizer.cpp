#include <random>

#include <gtest/gtest.h>

#include "esadapt/linearizer.hpp"

using namespace esadapt;

TEST(Lyapunov, UnitGainsGiveKnownBlocks) {
    const auto dyn = build_error_dynamics(ControllerGains::uniform({2, 2}, 1.0), {2, 2});
    MatrixXd expected = MatrixXd::Zero(4, 4);
    expected.block(0, 0, 2, 2) << 1.5, 0.5, 0.5, 1.0;
    expected.block(2, 2, 2, 2) << 1.5, 0.5, 0.5, 1.0;
    EXPECT_LT((dyn.P - expected).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(dyn.lyapunov_residual(), 1e-10);
}

TEST(Lyapunov, SelectorMatrix) {
    const auto dyn = build_error_dynamics(ControllerGains::uniform({2, 2}, 1.0), {2, 2});
    MatrixXd B(4, 2);
    B << 0, 0, 1, 0, 0, 0, 0, 1;
    EXPECT_EQ(dyn.Btilde, B);
}

TEST(Lyapunov, UnstableGainRejected) {
    auto gains = ControllerGains::uniform({2, 2}, 1.0);
    gains.rows[0](0) = -1.0;
    EXPECT_FALSE(is_hurwitz(gains));
    EXPECT_THROW(build_error_dynamics(gains, {2, 2}), NotHurwitz);
}

TEST(Lyapunov, MismatchedDimensions) {
    EXPECT_THROW(build_error_dynamics(ControllerGains::uniform({2, 2}, 1.0), {2, 3}), DimensionMismatch);
    EXPECT_THROW(build_error_dynamics(ControllerGains::uniform({2}, 1.0), {2, 2}), DimensionMismatch);
}

TEST(Lyapunov, RandomHurwitzGainsCertify) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pick(0.1, 20.0);
    for (int trial = 0; trial < 50; ++trial) {
        ControllerGains g;
        for (int r : {1, 2, 3}) {
            VectorXd k(r);
            if (r == 1) k << pick(rng);
            if (r == 2) k << pick(rng), pick(rng);
            if (r == 3) {
                const double a = pick(rng), b = pick(rng);
                k << a * b, a * b + a + b, a + b + 1.0;  // (s + 1)(s + a)(s + b)
            }
            g.rows.push_back(k);
        }
        const auto dyn = build_error_dynamics(g, {1, 2, 3});
        EXPECT_LT(dyn.lyapunov_residual(), 1e-9);
        const Eigen::SelfAdjointEigenSolver<MatrixXd> es(dyn.P);
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
        EXPECT_TRUE(dyn.P.isApprox(dyn.P.transpose()));
    }
}

TEST(Companion, LastRowHoldsNegatedGains) {
    VectorXd k(3);
    k << 2.0, 3.0, 4.0;
    MatrixXd expected(3, 3);
    expected << 0, 1, 0, 0, 0, 1, -2, -3, -4;
    EXPECT_EQ(companion_block(k), expected);
}

TEST(ErrorState, ZeroWhenTracking) {
    VectorXd y(2);
    y << 0.3, -0.2;
    const auto z = pack_error_state({y, y}, {y, y}, {2, 2});
    EXPECT_TRUE(z.z.isZero());
}

TEST(ErrorState, PackingOrder) {
    VectorXd y1(2), y2(2), zero = VectorXd::Zero(2);
    y1 << 0.1, 0.0;
    y2 << -0.2, 0.3;
    const auto z = pack_error_state({y1, y2}, {zero, zero}, {2, 2});
    VectorXd expected(4);
    expected << 0.1, 0.0, -0.2, 0.3;
    EXPECT_EQ(z.z, expected);
    EXPECT_DOUBLE_EQ(z.component(1, 1), 0.3);
    const auto parts = z.unpack();
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[1], y2);
}

TEST(ErrorState, WrongStackLength) {
    VectorXd y(3);
    y.setZero();
    EXPECT_THROW(pack_error_state({y, y}, {y, y}, {2, 2}), DimensionMismatch);
}
