#include <gtest/gtest.h>

#include "cbf_teleop/qp.hpp"
#include "cbf_teleop/verify.hpp"

using namespace cbf_teleop;

namespace {

ControlInput u(double x, double y) { return ControlInput{Vec2(x, y)}; }

}  // namespace

TEST(Projection, FeasibleReferenceIsReturnedUnchanged) {
    const LinearConstraint rows[] = {{Vec2(2, 0), 3.125}};
    const QpSolution s = solve_projection(u(5, 0), rows);
    EXPECT_EQ(s.status, QpStatus::Unconstrained);
    EXPECT_EQ(s.u.u, Vec2(5, 0));
    EXPECT_TRUE(s.active_set.empty());
    EXPECT_EQ(s.slack, 0.0);
}

TEST(Projection, SingleHalfPlane) {
    const LinearConstraint rows[] = {{Vec2(2, 0), 3.125}};
    const QpSolution s = solve_projection(u(0, 0), rows);
    EXPECT_EQ(s.status, QpStatus::Optimal);
    EXPECT_DOUBLE_EQ(s.u.u.x(), 1.5625);
    EXPECT_DOUBLE_EQ(s.u.u.y(), 0.0);
    EXPECT_EQ(s.active_set, std::vector<std::size_t>{0});
}

TEST(Projection, CornerOfTwoConstraints) {
    const LinearConstraint rows[] = {{Vec2(1, 0), 1}, {Vec2(0, 1), 1}};
    const QpSolution s = solve_projection(u(0, 0), rows);
    EXPECT_EQ(s.status, QpStatus::Optimal);
    EXPECT_DOUBLE_EQ(s.u.u.x(), 1.0);
    EXPECT_DOUBLE_EQ(s.u.u.y(), 1.0);
    EXPECT_EQ(s.active_set, (std::vector<std::size_t>{0, 1}));
}

TEST(Projection, RedundantRowDoesNotChangeAnswer) {
    const LinearConstraint rows[] = {{Vec2(2, 0), 3.125}, {Vec2(1, 0), 0.5}};
    const QpSolution s = solve_projection(u(0, 0), rows);
    EXPECT_DOUBLE_EQ(s.u.u.x(), 1.5625);
    EXPECT_EQ(s.active_set, std::vector<std::size_t>{0});
}

TEST(Projection, ZeroRows) {
    const LinearConstraint ok_row[] = {{Vec2::Zero(), -1.0}};
    EXPECT_EQ(solve_projection(u(3, 4), ok_row).status, QpStatus::Unconstrained);
    const LinearConstraint bad_row[] = {{Vec2::Zero(), 1.0}};
    EXPECT_EQ(solve_projection(u(3, 4), bad_row).status, QpStatus::Relaxed);
}

TEST(Projection, Idempotent) {
    Rng rng(31);
    for (int i = 0; i < 300; ++i) {
        const QpInstance q = random_qp_instance(rng);
        const QpSolution s = solve_projection(q.u_ref, q.rows);
        const QpSolution again = solve_projection(s.u, q.rows);
        EXPECT_LT((again.u.u - s.u.u).norm(), 1e-12);
    }
}

TEST(Projection, FeasibleWithinToleranceAndKkt) {
    Rng rng(32);
    for (int i = 0; i < 1000; ++i) {
        const QpInstance q = random_qp_instance(rng);
        const QpSolution s = solve_projection(q.u_ref, q.rows);
        ASSERT_NE(s.status, QpStatus::Relaxed);
        for (const LinearConstraint& row : q.rows) EXPECT_GE(row.residual(s.u.u), -kFeasibilityTol);
        const KktResidual kkt = kkt_residual(s, q.u_ref, q.rows);
        EXPECT_LE(kkt.residual, 1e-8);
        for (double m : kkt.multipliers) EXPECT_GE(m, 0.0);
        for (std::size_t i : s.active_set) EXPECT_NEAR(q.rows[i].residual(s.u.u), 0.0, 1e-9);
    }
}

TEST(Projection, NoFeasibleGridPointBeatsTheSolution) {
    const CheckResult r = check_qp_exactness(1000, 2024);
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Projection, AxisAlignedInstancesMatchOracleWithinGridDiagonal) {
    // With axis-aligned normals the optimum's nearest feasible grid node is
    // at most one cell away, so the oracle distance bound holds exactly.
    Rng rng(44);
    for (int i = 0; i < 200; ++i) {
        const Vec2 p(rng.uniform(-5, 5), rng.uniform(-5, 5));
        std::vector<LinearConstraint> rows;
        const Vec2 normals[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const Vec2& n : normals) {
            if (rng.uniform01() < 0.6) rows.push_back({n, n.dot(p) - rng.uniform(0, 3)});
        }
        const ControlInput ref = u(rng.uniform(-10, 10), rng.uniform(-10, 10));
        const QpSolution s = solve_projection(ref, rows);
        const auto o = oracle_solve(ref, rows, 20, 0.01);
        ASSERT_TRUE(o.has_value());
        EXPECT_LE((s.u.u - *o).norm(), 0.015);
    }
}

TEST(Oracle, HalfPlaneExample) {
    const LinearConstraint rows[] = {{Vec2(2, 0), 3.125}};
    const auto o = oracle_solve(u(0, 0), rows, 10, 0.01);
    ASSERT_TRUE(o.has_value());
    EXPECT_NEAR(o->x(), 1.57, 1e-9);
    EXPECT_NEAR(o->y(), 0.0, 1e-9);
    EXPECT_LE((*o - Vec2(1.5625, 0)).norm(), 0.015);
}

TEST(Oracle, NoConstraintsRoundsToGrid) {
    const auto o = oracle_solve(u(1.234, -5.678), {}, 10, 0.01);
    ASSERT_TRUE(o.has_value());
    EXPECT_NEAR(o->x(), 1.23, 1e-9);
    EXPECT_NEAR(o->y(), -5.68, 1e-9);
}

TEST(Oracle, HalfPlaneOutsideBoxIsInfeasible) {
    const LinearConstraint rows[] = {{Vec2(1, 0), 20}};
    EXPECT_FALSE(oracle_solve(u(0, 0), rows, 10, 0.01).has_value());
}

TEST(Relaxed, FeasibleInputMatchesProjection) {
    const LinearConstraint rows[] = {{Vec2(2, 0), 3.125}, {Vec2(0, 1), -1}};
    const QpSolution a = solve_projection(u(0, 0), rows);
    const QpSolution b = solve_relaxed(u(0, 0), rows);
    EXPECT_EQ(a.u.u, b.u.u);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(b.slack, 0.0);
}

TEST(Relaxed, OpposedHalfPlanesMeetAtMidpoint) {
    const LinearConstraint rows[] = {{Vec2(1, 0), 1}, {Vec2(-1, 0), 1}};
    const QpSolution s = solve_relaxed(u(0, 0), rows);
    EXPECT_EQ(s.status, QpStatus::Relaxed);
    EXPECT_NEAR(s.u.u.x(), 0.0, 1e-9);
    EXPECT_NEAR(s.u.u.y(), 0.0, 1e-9);
    EXPECT_NEAR(s.slack, 1.0, 1e-9);
    const QpSolution via_projection = solve_projection(u(0, 0), rows);
    EXPECT_EQ(via_projection.status, QpStatus::Relaxed);
    EXPECT_NEAR(via_projection.slack, 1.0, 1e-9);
}

TEST(Relaxed, ConflictingBoundsOpenSymmetrically) {
    // x >= 3 and x <= 1 cannot both hold; the shared slack opens both to x = 2.
    const LinearConstraint rows[] = {{Vec2(1, 0), 3}, {Vec2(-1, 0), -1}};
    const QpSolution s = solve_relaxed(u(0, 0), rows);
    EXPECT_EQ(s.status, QpStatus::Relaxed);
    EXPECT_NEAR(s.u.u.x(), 2.0, 1e-9);
    EXPECT_NEAR(s.u.u.y(), 0.0, 1e-9);
    EXPECT_NEAR(s.slack, 1.0, 1e-9);
}

TEST(Relaxed, FeasibleBandProjectsToNearEdge) {
    // 1 <= x <= 3
    const LinearConstraint rows[] = {{Vec2(1, 0), 1}, {Vec2(-1, 0), -3}};
    const QpSolution s = solve_relaxed(u(0, 0), rows);
    EXPECT_NE(s.status, QpStatus::Relaxed);
    EXPECT_DOUBLE_EQ(s.u.u.x(), 1.0);
    EXPECT_EQ(s.slack, 0.0);
}

TEST(Relaxed, SlackIsMinimalForLargePenalty) {
    // Triangle with no common point: x >= 1, y >= 1, x + y <= 1.
    const LinearConstraint rows[] = {{Vec2(1, 0), 1}, {Vec2(0, 1), 1}, {Vec2(-1, -1), -1}};
    const QpSolution s = solve_relaxed(u(0, 0), rows);
    EXPECT_EQ(s.status, QpStatus::Relaxed);
    // Smallest shared slack making the rows consistent: 1 - 2d >= ... gives d = 1/3.
    EXPECT_NEAR(s.slack, 1.0 / 3.0, 1e-4);
    for (const LinearConstraint& row : rows) EXPECT_GE(row.residual(s.u.u), -s.slack - 1e-9);
}

TEST(QpStatusText, RoundTrip) {
    for (QpStatus st : {QpStatus::Optimal, QpStatus::Relaxed, QpStatus::Unconstrained}) {
        EXPECT_EQ(qp_status_from_string(to_string(st)), st);
    }
    EXPECT_FALSE(qp_status_from_string("bogus").has_value());
}
