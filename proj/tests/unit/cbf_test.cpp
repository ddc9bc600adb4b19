#include <cmath>

#include <gtest/gtest.h>

#include "cbf_teleop/cbf.hpp"
#include "cbf_teleop/qp.hpp"
#include "cbf_teleop/rng.hpp"
#include "cbf_teleop/verify.hpp"

using namespace cbf_teleop;

namespace {

StateVec at(Vec2 x1, Vec2 x2 = Vec2::Zero()) {
    StateVec s;
    s.position = x1;
    s.velocity = x2;
    return s;
}

const Obstacle kOrigin{Vec2::Zero(), 0.5};

}  // namespace

TEST(Barrier, PositiveOutsideSafetyDisc) { EXPECT_DOUBLE_EQ(barrier(Vec2(1, 0), kOrigin, 0.25), 0.4375); }

TEST(Barrier, ZeroOnBoundary) { EXPECT_DOUBLE_EQ(barrier(Vec2(0.75, 0), kOrigin, 0.25), 0.0); }

TEST(Barrier, NegativeUnderPenetration) { EXPECT_DOUBLE_EQ(barrier(Vec2(0.5, 0), kOrigin, 0.25), -0.3125); }

TEST(LieDerivatives, ApproachingAlongAxis) {
    const BarrierEval e = lie_derivatives(at(Vec2(1, 0), Vec2(-1, 0)), kOrigin, 0.25);
    EXPECT_DOUBLE_EQ(e.h, 0.4375);
    EXPECT_DOUBLE_EQ(e.lf_h, -2.0);
    EXPECT_DOUBLE_EQ(e.lf2_h_drift, 2.0);
    EXPECT_EQ(e.lg_lf_h, Vec2(2, 0));
}

TEST(LieDerivatives, StationaryUavHasNoDrift) {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const BarrierEval e = lie_derivatives(at(Vec2(rng.uniform(-9, 9), rng.uniform(-9, 9))), kOrigin, 0.25);
        EXPECT_EQ(e.lf_h, 0.0);
        EXPECT_EQ(e.lf2_h_drift, 0.0);
    }
}

TEST(LieDerivatives, TangentialMotion) {
    const BarrierEval e = lie_derivatives(at(Vec2(1, 0), Vec2(0, 3)), kOrigin, 0.25);
    EXPECT_DOUBLE_EQ(e.lf_h, 0.0);
    EXPECT_DOUBLE_EQ(e.lf2_h_drift, 18.0);
    EXPECT_EQ(e.lg_lf_h, Vec2(2, 0));
}

TEST(LieDerivatives, MatchFiniteDifferences) {
    const CheckResult r = check_lie_derivatives(1000, 7);
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(BuildConstraints, EcbfRowFromLieDerivatives) {
    const Obstacle obstacles[] = {kOrigin};
    const auto rows = build_constraints(at(Vec2(1, 0), Vec2(-1, 0)), obstacles, 0.25, EcbfGains{});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].a, Vec2(2, 0));
    EXPECT_DOUBLE_EQ(rows[0].b, 3.125);
}

TEST(BuildConstraints, DeepInteriorRowIsSlack) {
    const Obstacle obstacles[] = {kOrigin};
    const auto rows = build_constraints(at(Vec2(20, 0)), obstacles, 0.25, EcbfGains{});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_LT(rows[0].b, -700.0);
    EXPECT_GE(rows[0].residual(Vec2::Zero()), 0.0);
}

TEST(BuildConstraints, NoObstaclesNoRows) {
    EXPECT_TRUE(build_constraints(at(Vec2(1, 1)), {}, 0.25, EcbfGains{}).empty());
}

TEST(BuildConstraints, OneRowPerObstacleInOrder) {
    const Obstacle obstacles[] = {{Vec2(3, 0), 0.5}, {Vec2(0, 3), 0.5}, {Vec2(-3, 0), 0.5}};
    const auto rows = build_constraints(at(Vec2::Zero()), obstacles, 0.25, EcbfGains{});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].a, Vec2(-6, 0));
    EXPECT_EQ(rows[1].a, Vec2(0, -6));
    EXPECT_EQ(rows[2].a, Vec2(6, 0));
}

TEST(BuildConstraints, FilteredFlightKeepsBarrierNonNegative) {
    // Head-on approach at 4 m/s under the filtered command, finely sampled.
    const Obstacle obstacles[] = {kOrigin};
    DynamicsParams p;
    p.dt = 0.001;
    StateVec s = at(Vec2(-5, 0.05), Vec2(4, 0));
    double min_h = 1e9;
    for (int k = 0; k < 8000; ++k) {
        const auto rows = build_constraints(s, obstacles, 0.25, EcbfGains{});
        const ControlInput u_ref = compute_u_ref(Vec2(4, 0), s.velocity, DynamicsParams{});
        const QpSolution sol = solve_projection(u_ref, rows);
        s = step(s, sol.u, YawInput::None, p);
        min_h = std::min(min_h, barrier(s.position, kOrigin, 0.25));
    }
    EXPECT_GE(min_h, 0.0);
}

TEST(WallConstraints, FourRowsLinearBarrier) {
    const auto rows = wall_constraints(at(Vec2(5, 5), Vec2(1, -1)), 25, 15, 0.25, EcbfGains{});
    ASSERT_EQ(rows.size(), 4u);
    // Left wall: h = x - r, lf = vx, a = (1, 0), b = -(k1 h + k2 lf).
    EXPECT_EQ(rows[0].a, Vec2(1, 0));
    EXPECT_DOUBLE_EQ(rows[0].b, -(2.0 * 4.75 + 3.0 * 1.0));
    EXPECT_EQ(rows[1].a, Vec2(-1, 0));
    EXPECT_EQ(rows[2].a, Vec2(0, 1));
    EXPECT_EQ(rows[3].a, Vec2(0, -1));
}

TEST(Culling, DropsOnlyFarSlackRows) {
    const Obstacle obstacles[] = {{Vec2(1, 0), 0.5}, {Vec2(40, 0), 0.5}};
    const StateVec s = at(Vec2::Zero(), Vec2(1, 0));
    const auto rows = build_constraints(s, obstacles, 0.25, EcbfGains{});
    const CulledConstraints c = cull_constraints(s, obstacles, rows, 10.0, 10.0);
    ASSERT_EQ(c.kept.size(), 1u);
    EXPECT_EQ(c.kept_index[0], 0u);
    ASSERT_EQ(c.culled.size(), 1u);
}

TEST(Culling, KeepsFarRowThatCanBind) {
    // Far but closing at 18 m/s: the row still binds inside the u_max disc.
    const Obstacle obstacles[] = {{Vec2(12, 0), 0.5}};
    const StateVec s = at(Vec2::Zero(), Vec2(18, 0));
    const auto rows = build_constraints(s, obstacles, 0.25, EcbfGains{});
    ASSERT_GE(rows[0].b, -rows[0].a.norm() * 10.0);
    const CulledConstraints c = cull_constraints(s, obstacles, rows, 10.0, 10.0);
    EXPECT_EQ(c.kept.size(), 1u);
}

TEST(GainValidation, Examples) {
    const GainCheck good = validate_gains({2, 3});
    EXPECT_TRUE(good.ok);
    EXPECT_NEAR(std::min(good.pole_a.real(), good.pole_b.real()), -2.0, 1e-12);
    EXPECT_NEAR(std::max(good.pole_a.real(), good.pole_b.real()), -1.0, 1e-12);
    EXPECT_FALSE(validate_gains({0, 1}).ok);
    EXPECT_FALSE(validate_gains({-1, 1}).ok);
    EXPECT_FALSE(validate_gains({1, 0}).ok);
    EXPECT_FALSE(validate_gains({std::nan(""), 1}).ok);
    EXPECT_FALSE(validate_gains({-1, 1}).message.empty());
}

TEST(GainValidation, AgreesWithDirectRoots) {
    const CheckResult r = check_gain_validation(20000, 11);
    EXPECT_TRUE(r.passed) << r.detail;
}
