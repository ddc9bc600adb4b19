#include "cbf_teleop/dynamics.hpp"

namespace cbf_teleop {

bool StateVec::valid() const {
    return all_finite(position) && all_finite(velocity) && std::isfinite(yaw) && yaw > -std::numbers::pi &&
           yaw <= std::numbers::pi;
}

OperatorCommand OperatorCommand::saturated(const Vec2& stylus, YawInput yaw, bool inspect, const InputMap& map) {
    return OperatorCommand{clamp_norm(stylus, map.stylus_max), yaw, inspect};
}

double wrap_angle(double angle) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double wrapped = std::remainder(angle, two_pi);  // [-pi, pi]
    if (wrapped <= -std::numbers::pi) wrapped += two_pi;
    return wrapped;
}

Vec2 map_stylus_to_desired_velocity(const OperatorCommand& cmd, double yaw, const InputMap& map) {
    const double displacement = cmd.stylus.norm();
    if (displacement <= map.deadzone) return Vec2::Zero();
    const Vec2 body = cmd.stylus * (map.kv * (displacement - map.deadzone) / displacement);
    return rotate(body, yaw);
}

Vec2 stylus_for_velocity(const Vec2& velocity, double yaw, const InputMap& map) {
    const double speed = velocity.norm();
    if (speed == 0.0) return Vec2::Zero();
    const Vec2 body = rotate(velocity, -yaw);
    return body * ((map.deadzone + speed / map.kv) / speed);
}

ControlInput compute_u_ref(const Vec2& desired_velocity, const Vec2& velocity, const DynamicsParams& params) {
    const Vec2 raw = (desired_velocity - velocity) / params.dt;
    return ControlInput{clamp_norm(raw, params.u_max)};
}

StateVec step(const StateVec& state, const ControlInput& u, YawInput yaw_input, const DynamicsParams& params) {
    // Exact zero-order-hold solution of the double integrator over one period.
    const double dt = params.dt;
    StateVec next;
    next.velocity = state.velocity + u.u * dt;
    next.position = state.position + state.velocity * dt + 0.5 * dt * dt * u.u;
    next.yaw = wrap_angle(state.yaw + static_cast<int>(yaw_input) * params.yaw_rate * params.dt);
    return next;
}

}  // namespace cbf_teleop
