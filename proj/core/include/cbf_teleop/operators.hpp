#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "cbf_teleop/dynamics.hpp"

namespace cbf_teleop {

/// What a scripted operator perceives at the start of a tick.
struct OperatorObservation {
    StateVec state;
    Vec2 force = Vec2::Zero();  // feedback force rendered on the previous tick, N
    std::vector<Vec2> targets_remaining;
    std::uint64_t tick = 0;
    double dt = 0.02;  // control period, s
};

struct OperatorParams {
    double gain_p = 0.5;              // stylus cm beyond the deadzone per m/s of commanded speed
    double waypoint_tolerance = 0.3;  // m
    double aggressiveness = 1.0;      // >= 1, scales cruise_speed
    double alpha_force = 0.0;         // cm of stylus per N of felt force; 0 ignores force
    double admittance_tau = 0.3;      // s, first-order lag of the hand yielding to force; 0 = instantaneous
    double cruise_speed = 2.0;        // m/s
    double approach_gain = 1.0;       // 1/s, speed = approach_gain * distance near a target
    double hover_speed_max = 0.5;     // m/s, below this the operator presses inspect
    int latency_ticks = 0;            // command delay

    bool valid() const {
        return gain_p > 0.0 && waypoint_tolerance > 0.0 && aggressiveness >= 1.0 && alpha_force >= 0.0 &&
               admittance_tau >= 0.0 && cruise_speed > 0.0 && approach_gain > 0.0 && hover_speed_max >= 0.0 && latency_ticks >= 0;
    }
};

/// Mutable policy memory owned by the session loop.
struct PolicyState {
    std::optional<Vec2> goal;  // target currently pursued
    Vec2 yield = Vec2::Zero();  // world-frame stylus offset from felt force, cm
    std::deque<OperatorCommand> pending;
};

/// Obstacle-blind pursuit of the nearest remaining target: flies at
/// aggressiveness * cruise_speed, slows as approach_gain * distance, and
/// presses inspect once within waypoint_tolerance and below hover speed.
OperatorCommand waypoint_operator_step(const OperatorObservation& obs, const OperatorParams& params,
                                       const InputMap& map, PolicyState& state);

/// Waypoint command plus an admittance term: the stylus yields by
/// alpha_force cm per newton along the felt force, before saturation. With
/// admittance_tau > 0 the yield follows alpha_force * force through a
/// first-order lag instead of jumping to it.
OperatorCommand force_following_operator_step(const OperatorObservation& obs, const OperatorParams& params,
                                              const InputMap& map, PolicyState& state);

/// Unsaturated body-frame stylus the policy wants for this observation,
/// before latency. Exposed for property tests of the admittance term.
Vec2 policy_stylus(const OperatorObservation& obs, const OperatorParams& params, const InputMap& map,
                   const std::optional<Vec2>& goal, bool& inspect);

struct ReplayExhausted {
    std::uint64_t tick = 0;
};

/// Logged command for `tick`, verbatim, or ReplayExhausted past the end.
std::variant<OperatorCommand, ReplayExhausted> replay_operator(std::span<const OperatorCommand> commands,
                                                               std::uint64_t tick);

}  // namespace cbf_teleop
