#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbf_teleop/dynamics.hpp"

namespace cbf_teleop {

/// Exponential CBF gain row K = [k1, k2] for the relative-degree-2 barrier.
struct EcbfGains {
    double k1 = 2.0;  // 1/s^2, gain on h
    double k2 = 3.0;  // 1/s, gain on L_f h
};

struct Obstacle {
    Vec2 center = Vec2::Zero();
    double radius = 0.5;
};

/// Barrier value and its Lie derivatives along the double integrator.
struct BarrierEval {
    double h = 0.0;            // m^2
    double lf_h = 0.0;         // m^2/s
    double lf2_h_drift = 0.0;  // m^2/s^2
    Vec2 lg_lf_h = Vec2::Zero();
};

/// Half-plane a . u >= b over the acceleration command.
struct LinearConstraint {
    Vec2 a = Vec2::Zero();
    double b = 0.0;

    double residual(const Vec2& u) const { return a.dot(u) - b; }
};

/// h = |x1 - c|^2 - (uav_radius + obstacle radius)^2
double barrier(const Vec2& position, const Obstacle& obstacle, double uav_radius);

BarrierEval lie_derivatives(const StateVec& state, const Obstacle& obstacle, double uav_radius);

/// One ECBF half-plane per obstacle, in obstacle order:
///   a = L_g L_f h,  b = -(L_f^2 h + k1 h + k2 L_f h).
std::vector<LinearConstraint> build_constraints(const StateVec& state, std::span<const Obstacle> obstacles,
                                                double uav_radius, const EcbfGains& gains);

/// ECBF rows keeping the UAV disc inside [0, width] x [0, height]. Each wall
/// barrier is linear in position (h = signed clearance), so L_f^2 h = 0.
/// Order: left, right, bottom, top.
std::vector<LinearConstraint> wall_constraints(const StateVec& state, double width, double height, double uav_radius,
                                               const EcbfGains& gains);

/// Constraint list with far-away rows removed. A row is dropped only if the
/// obstacle center is beyond `cull_radius` AND b < -|a| * u_max, i.e. every
/// command inside the u_max disc already satisfies it. `kept` maps each
/// returned row back to its obstacle index, and `culled` holds the dropped
/// rows so callers can re-check them against the final solution.
struct CulledConstraints {
    std::vector<LinearConstraint> kept;
    std::vector<std::size_t> kept_index;
    std::vector<LinearConstraint> culled;
};

CulledConstraints cull_constraints(const StateVec& state, std::span<const Obstacle> obstacles,
                                   std::span<const LinearConstraint> constraints, double cull_radius, double u_max);

struct GainCheck {
    bool ok = false;
    std::string message;  // names the offending gain when !ok
    std::complex<double> pole_a;
    std::complex<double> pole_b;
};

/// Hurwitz check on s^2 + k2 s + k1. The sign test decides; the explicit
/// roots are computed as a cross-check and returned for reporting.
GainCheck validate_gains(const EcbfGains& gains);

/// Roots of s^2 + k2 s + k1.
std::pair<std::complex<double>, std::complex<double>> characteristic_roots(const EcbfGains& gains);

}  // namespace cbf_teleop
