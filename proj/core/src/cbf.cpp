#include "cbf_teleop/cbf.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

namespace cbf_teleop {

double barrier(const Vec2& position, const Obstacle& obstacle, double uav_radius) {
    const double r = uav_radius + obstacle.radius;
    return (position - obstacle.center).squaredNorm() - r * r;
}

BarrierEval lie_derivatives(const StateVec& state, const Obstacle& obstacle, double uav_radius) {
    const Vec2 offset = state.position - obstacle.center;
    BarrierEval eval;
    eval.h = barrier(state.position, obstacle, uav_radius);
    eval.lf_h = 2.0 * offset.dot(state.velocity);
    eval.lf2_h_drift = 2.0 * state.velocity.squaredNorm();
    eval.lg_lf_h = 2.0 * offset;
    return eval;
}

std::vector<LinearConstraint> build_constraints(const StateVec& state, std::span<const Obstacle> obstacles,
                                                double uav_radius, const EcbfGains& gains) {
    std::vector<LinearConstraint> rows;
    rows.reserve(obstacles.size());
    for (const Obstacle& obstacle : obstacles) {
        const BarrierEval e = lie_derivatives(state, obstacle, uav_radius);
        rows.push_back({e.lg_lf_h, -(e.lf2_h_drift + gains.k1 * e.h + gains.k2 * e.lf_h)});
    }
    return rows;
}

std::vector<LinearConstraint> wall_constraints(const StateVec& state, double width, double height, double uav_radius,
                                               const EcbfGains& gains) {
    const Vec2& p = state.position;
    const Vec2& v = state.velocity;
    auto row = [&](const Vec2& normal, double h, double lf_h) {
        return LinearConstraint{normal, -(gains.k1 * h + gains.k2 * lf_h)};
    };
    return {
        row({1.0, 0.0}, p.x() - uav_radius, v.x()),
        row({-1.0, 0.0}, width - uav_radius - p.x(), -v.x()),
        row({0.0, 1.0}, p.y() - uav_radius, v.y()),
        row({0.0, -1.0}, height - uav_radius - p.y(), -v.y()),
    };
}

CulledConstraints cull_constraints(const StateVec& state, std::span<const Obstacle> obstacles,
                                   std::span<const LinearConstraint> constraints, double cull_radius, double u_max) {
    assert(obstacles.size() == constraints.size());
    CulledConstraints out;
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const LinearConstraint& row = constraints[i];
        const bool far = (state.position - obstacles[i].center).norm() > cull_radius;
        // min over |u| <= u_max of a.u is -|a| u_max
        const bool slack_everywhere = row.b < -row.a.norm() * u_max;
        if (far && slack_everywhere) {
            out.culled.push_back(row);
        } else {
            out.kept.push_back(row);
            out.kept_index.push_back(i);
        }
    }
    return out;
}

std::pair<std::complex<double>, std::complex<double>> characteristic_roots(const EcbfGains& gains) {
    const double disc = gains.k2 * gains.k2 - 4.0 * gains.k1;
    if (disc < 0.0) {
        const double im = std::sqrt(-disc) / 2.0;
        return {{-gains.k2 / 2.0, im}, {-gains.k2 / 2.0, -im}};
    }
    // q = -(k2 + sign(k2) sqrt(disc)) / 2 avoids cancellation; roots q and k1/q.
    const double q = -0.5 * (gains.k2 + std::copysign(std::sqrt(disc), gains.k2));
    if (q == 0.0) return {{0.0, 0.0}, {0.0, 0.0}};
    return {{q, 0.0}, {gains.k1 / q, 0.0}};
}

GainCheck validate_gains(const EcbfGains& gains) {
    GainCheck check;
    std::tie(check.pole_a, check.pole_b) = characteristic_roots(gains);
    if (!std::isfinite(gains.k1) || !std::isfinite(gains.k2)) {
        check.message = "gains must be finite";
        return check;
    }
    std::ostringstream why;
    if (gains.k1 <= 0.0) why << "k1=" << gains.k1 << " must be > 0 (s^2 + k2 s + k1 not Hurwitz)";
    if (gains.k2 <= 0.0) {
        if (why.tellp() > 0) why << "; ";
        why << "k2=" << gains.k2 << " must be > 0 (s^2 + k2 s + k1 not Hurwitz)";
    }
    check.ok = why.tellp() == 0;
    check.message = why.str();

    // Both roots in the open left half-plane must agree with the sign test.
    const bool roots_stable = check.pole_a.real() < 0.0 && check.pole_b.real() < 0.0;
    if (roots_stable != check.ok) {
        check.ok = false;
        if (check.message.empty()) check.message = "characteristic roots not strictly stable";
    }
    return check;
}

}  // namespace cbf_teleop
