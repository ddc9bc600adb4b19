#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "cbf_teleop/cbf.hpp"
#include "cbf_teleop/operators.hpp"
#include "cbf_teleop/paradigm.hpp"
#include "cbf_teleop/qp.hpp"
#include "cbf_teleop/world.hpp"

namespace cbf_teleop {

using Json = nlohmann::ordered_json;

enum class OperatorKind { Waypoint, ForceFollowing, Live, Replay };

/// Operator selection. Text form, as accepted by --operator:
///   waypoint[:key=value,...]   force[:key=value,...]   live   replay:PATH
/// keys: aggr, alpha, tau, cruise, gain_p, tol, approach, hover, latency
struct OperatorSpec {
    OperatorKind kind = OperatorKind::Waypoint;
    OperatorParams params;
    std::string replay_path;

    static OperatorSpec parse(std::string_view text);  // throws ConfigError
    std::string to_text() const;
};

struct FilterConfig {
    double cull_radius = 10.0;  // m; 0 disables culling
    double relax_penalty = kDefaultRelaxPenalty;
    bool walls = false;  // add the four arena walls as barrier constraints
};

struct SessionConfig {
    Condition condition = Condition::HSA;
    std::uint64_t seed = 1;
    EnvironmentParams environment;
    std::optional<std::string> scenario_path;  // overrides generation when set
    DynamicsParams dynamics;
    InputMap input_map;
    EcbfGains gains;
    ParadigmConfig paradigm;
    TrialParams trial;
    FilterConfig filter;
    std::uint64_t tick_cap = 60000;
    OperatorSpec op;
    std::optional<std::string> log_path;

    /// Throws ConfigError naming the first invalid sub-config.
    void validate() const;
};

/// Parses a config document; unknown keys anywhere are errors. Missing keys
/// keep their defaults.
SessionConfig session_config_from_json(const Json& doc);
SessionConfig load_session_config(const std::filesystem::path& path);
Json to_json(const SessionConfig& config);

/// Scenario files hold a concrete Environment.
Json to_json(const Environment& env);
Environment environment_from_json(const Json& doc);
Environment load_scenario(const std::filesystem::path& path);
void save_scenario(const Environment& env, const std::filesystem::path& path);

/// Resolves the environment for a session: the scenario file when given,
/// otherwise generation from (environment params, seed).
Environment build_environment(const SessionConfig& config);

/// Parses a JSON file; throws ConfigError naming the file on failure.
Json read_json_file(const std::filesystem::path& path);

Json vec_to_json(const Vec2& v);
Vec2 vec_from_json(const Json& j);

}  // namespace cbf_teleop
