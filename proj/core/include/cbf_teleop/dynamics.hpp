#pragma once

#include <cmath>
#include <numbers>

#include "cbf_teleop/vec2.hpp"

namespace cbf_teleop {

/// Planar UAV state: position, velocity and heading.
struct StateVec {
    Vec2 position = Vec2::Zero();  // m
    Vec2 velocity = Vec2::Zero();  // m/s
    double yaw = 0.0;              // rad, wrapped to (-pi, pi]

    bool valid() const;
};

/// Acceleration command for the double integrator, m/s^2.
struct ControlInput {
    Vec2 u = Vec2::Zero();
};

struct DynamicsParams {
    double dt = 0.02;                          // s
    double u_max = 10.0;                       // m/s^2
    double yaw_rate = std::numbers::pi / 4.0;  // rad/s

    bool valid() const { return dt > 0.0 && u_max > 0.0 && yaw_rate > 0.0; }
};

/// Stylus rate-control mapping. kv is in (m/s)/cm, distances in cm.
struct InputMap {
    double kv = 2.0;
    double deadzone = 1.0;
    double stylus_max = 5.0;

    bool valid() const { return kv > 0.0 && deadzone >= 0.0 && deadzone < stylus_max; }
    double max_speed() const { return kv * (stylus_max - deadzone); }
};

enum class YawInput : int { Clockwise = -1, None = 0, CounterClockwise = 1 };

/// One sample of the operator interface. The stylus is expressed in the body
/// frame (x forward, y left) in centimeters.
struct OperatorCommand {
    Vec2 stylus = Vec2::Zero();
    YawInput yaw_input = YawInput::None;
    bool inspect_pressed = false;

    /// Builds a command with the stylus saturated to `map.stylus_max`.
    static OperatorCommand saturated(const Vec2& stylus, YawInput yaw, bool inspect, const InputMap& map);

    bool operator==(const OperatorCommand&) const = default;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Converts a stylus displacement to a world-frame desired velocity. Inside
/// the deadzone the result is exactly zero; outside, kv scales only the
/// excess beyond the deadzone so the map is continuous at the boundary.
Vec2 map_stylus_to_desired_velocity(const OperatorCommand& cmd, double yaw, const InputMap& map);

/// Inverse of the excess mapping for a world-frame velocity: returns the body
/// frame stylus that would produce `velocity` at heading `yaw` (unsaturated).
Vec2 stylus_for_velocity(const Vec2& velocity, double yaw, const InputMap& map);

/// u_ref = (x2d - x2) / dt, clamped to u_max with direction preserved.
ControlInput compute_u_ref(const Vec2& desired_velocity, const Vec2& velocity, const DynamicsParams& params);

/// Advances the plant by one control period.
StateVec step(const StateVec& state, const ControlInput& u, YawInput yaw_input, const DynamicsParams& params);

}  // namespace cbf_teleop
