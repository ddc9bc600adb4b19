#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cbf_teleop/config.hpp"
#include "cbf_teleop/metrics.hpp"

namespace cbf_teleop::wire {

/// Every message is one JSON text frame with "v" set to this string and a
/// "type" tag. Units: positions m, velocities m/s, controls m/s^2, force N,
/// stylus cm, angles rad, times s.
inline constexpr std::string_view kProtocolVersion = "cbf-teleop/1";

// client -> server

struct Input {
    std::uint64_t seq = 0;
    Vec2 stylus = Vec2::Zero();
    YawInput yaw_input = YawInput::None;
    bool inspect = false;
};

struct StartTrial {
    Condition condition = Condition::HSA;
    std::uint64_t seed = 1;
};

struct Abort {};

using ClientMessage = std::variant<Input, StartTrial, Abort>;

// server -> client

struct TargetStatus {
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
    bool inspected = false;
};

struct State {
    std::uint64_t tick = 0;
    double t = 0.0;
    Vec2 x1 = Vec2::Zero();
    Vec2 x2 = Vec2::Zero();
    double yaw = 0.0;
    Vec2 u_ref = Vec2::Zero();
    Vec2 u_cbf = Vec2::Zero();
    Vec2 u_applied = Vec2::Zero();
    Vec2 force = Vec2::Zero();
    double h_min = 0.0;
    std::vector<TargetStatus> targets;
    TrialPhase phase = TrialPhase::Idle;
};

struct TrialEnd {
    TrialPhase outcome = TrialPhase::Succeeded;
    std::optional<Metrics> metrics;
    std::optional<std::string> note;
};

struct Error {
    std::string reason;  // "version", "malformed", "unknown-type", "state", "config", "overrun"
    std::string detail;
};

/// Sent once after StartTrial so a client can draw the arena.
struct World {
    Condition condition = Condition::HSA;
    std::uint64_t seed = 0;
    double dt = 0.0;
    Environment environment;
};

using ServerMessage = std::variant<State, TrialEnd, Error, World>;

/// Decoding failure; reason() is the Error.reason a server should send.
class WireError : public std::runtime_error {
public:
    WireError(std::string reason, const std::string& detail)
        : std::runtime_error(reason + ": " + detail), reason_(std::move(reason)) {}
    const std::string& reason() const { return reason_; }

private:
    std::string reason_;
};

std::string encode(const ClientMessage& message);
std::string encode(const ServerMessage& message);

ClientMessage decode_client(std::string_view text);  // throws WireError
ServerMessage decode_server(std::string_view text);  // throws WireError

/// State snapshot for a record the session just produced.
State make_state(const StepRecord& record, const Environment& env, const TrialState& trial);

}  // namespace cbf_teleop::wire
