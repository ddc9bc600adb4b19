#include "cbf_teleop/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbf_teleop {

namespace {

std::optional<Vec2> choose_goal(const OperatorObservation& obs, const std::optional<Vec2>& current) {
    if (current && std::find(obs.targets_remaining.begin(), obs.targets_remaining.end(), *current) !=
                       obs.targets_remaining.end())
        return current;
    std::optional<Vec2> best;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const Vec2& t : obs.targets_remaining) {
        const double d = (t - obs.state.position).norm();
        if (d < best_distance) {
            best_distance = d;
            best = t;
        }
    }
    return best;
}

OperatorCommand delayed(OperatorCommand cmd, const OperatorParams& params, PolicyState& state) {
    if (params.latency_ticks == 0) return cmd;
    while (state.pending.size() < static_cast<std::size_t>(params.latency_ticks)) state.pending.push_back({});
    state.pending.push_back(cmd);
    OperatorCommand out = state.pending.front();
    state.pending.pop_front();
    return out;
}

OperatorCommand operator_step(const OperatorObservation& obs, const OperatorParams& params, const InputMap& map,
                              PolicyState& state, double alpha_force) {
    state.goal = choose_goal(obs, state.goal);
    bool inspect = false;
    Vec2 stylus = policy_stylus(obs, params, map, state.goal, inspect);
    if (alpha_force > 0.0) {
        const Vec2 target = alpha_force * obs.force;
        if (params.admittance_tau > 0.0) {
            state.yield += (1.0 - std::exp(-obs.dt / params.admittance_tau)) * (target - state.yield);
        } else {
            state.yield = target;
        }
        stylus += rotate(state.yield, -obs.state.yaw);
    }
    return delayed(OperatorCommand::saturated(stylus, YawInput::None, inspect, map), params, state);
}

}  // namespace

Vec2 policy_stylus(const OperatorObservation& obs, const OperatorParams& params, const InputMap& map,
                   const std::optional<Vec2>& goal, bool& inspect) {
    inspect = false;
    if (!goal) return Vec2::Zero();
    const Vec2 to_goal = *goal - obs.state.position;
    const double distance = to_goal.norm();
    if (distance <= params.waypoint_tolerance) {
        // Hold still over the target; press once slow enough.
        inspect = obs.state.velocity.norm() <= params.hover_speed_max;
        return Vec2::Zero();
    }
    const double speed = std::min(params.aggressiveness * params.cruise_speed, params.approach_gain * distance);
    const Vec2 direction_body = rotate(to_goal / distance, -obs.state.yaw);
    return direction_body * (map.deadzone + params.gain_p * speed);
}

OperatorCommand waypoint_operator_step(const OperatorObservation& obs, const OperatorParams& params,
                                       const InputMap& map, PolicyState& state) {
    return operator_step(obs, params, map, state, 0.0);
}

OperatorCommand force_following_operator_step(const OperatorObservation& obs, const OperatorParams& params,
                                              const InputMap& map, PolicyState& state) {
    return operator_step(obs, params, map, state, params.alpha_force);
}

std::variant<OperatorCommand, ReplayExhausted> replay_operator(std::span<const OperatorCommand> commands,
                                                               std::uint64_t tick) {
    if (tick >= commands.size()) return ReplayExhausted{tick};
    return commands[tick];
}

}  // namespace cbf_teleop
