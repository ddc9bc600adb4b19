#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cbf_teleop/config.hpp"
#include "cbf_teleop/metrics.hpp"
#include "cbf_teleop/trial_log.hpp"

namespace cbf_teleop {

/// Builds every barrier row for a state (obstacles, then walls when enabled)
/// and solves the minimal-deviation QP. Far obstacles are culled only when
/// their row cannot bind inside the u_max disc; the solution is then checked
/// against the culled rows and re-solved on the full set if any is violated,
/// so the answer always equals the full-set solution.
class SafetyFilter {
public:
    SafetyFilter(const Environment& env, const EcbfGains& gains, const FilterConfig& filter,
                 const DynamicsParams& dynamics);

    std::vector<LinearConstraint> constraints(const StateVec& state) const;
    QpSolution solve(const StateVec& state, const ControlInput& u_ref) const;

private:
    const Environment* env_;
    EcbfGains gains_;
    FilterConfig filter_;
    DynamicsParams dynamics_;
};

struct TickOutput {
    StepRecord record;
    std::vector<LogEvent> events;
    bool ended = false;
};

/// One trial: owns all mutable state and runs the per-tick pipeline
///   observe -> operator -> input map -> u_ref -> constraints -> QP ->
///   condition dispatch -> force -> plant step -> contact/lifecycle -> metrics.
/// Single-threaded by contract.
class Session {
public:
    Session(SessionConfig config, Environment env);
    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    OperatorObservation observe() const;
    TickOutput tick(const OperatorCommand& command);

    /// Ends a trial early (disconnect, replay exhausted, abort message).
    void abort(const std::string& reason);

    bool ended() const { return is_terminal(trial_.phase); }
    const StateVec& state() const { return state_; }
    const TrialState& trial() const { return trial_; }
    const Environment& environment() const { return env_; }
    const SessionConfig& config() const { return config_; }
    std::uint64_t tick_count() const { return tick_; }
    double min_h() const { return min_h_; }
    int relaxed_events() const { return relaxed_events_; }
    const Vec2& last_force() const { return last_force_; }
    const MetricsAccumulator& accumulator() const { return acc_; }

    /// Final metrics, or the reason they are unavailable.
    std::variant<Metrics, std::string> metrics() const;
    LogEnd log_end() const;

private:
    SessionConfig config_;
    Environment env_;
    SafetyFilter filter_;
    StateVec state_;
    TrialState trial_;
    MetricsAccumulator acc_;
    std::uint64_t tick_ = 0;
    Vec2 last_force_ = Vec2::Zero();
    double min_h_ = kNoObstacleBarrier;
    int relaxed_events_ = 0;
    std::optional<std::string> abort_reason_;
};

/// Produces commands for headless sessions from an OperatorSpec.
class OperatorDriver {
public:
    explicit OperatorDriver(const OperatorSpec& spec, const InputMap& map,
                            std::vector<OperatorCommand> replay_commands = {});
    /// nullopt once a replay log is exhausted.
    std::optional<OperatorCommand> next(const OperatorObservation& obs);

private:
    OperatorSpec spec_;
    InputMap map_;
    PolicyState policy_;
    std::vector<OperatorCommand> replay_;
};

struct HeadlessOptions {
    std::optional<Environment> environment;       // overrides build_environment(config)
    std::vector<OperatorCommand> replay_commands;  // for OperatorKind::Replay
    std::function<void(const StepRecord&)> on_step;
    std::function<void(const LogEvent&)> on_event;
};

struct HeadlessResult {
    TrialState trial;
    std::optional<Metrics> metrics;
    std::optional<std::string> metrics_error;
    std::optional<std::string> log_path;
    std::uint64_t ticks = 0;
    double min_h = kNoObstacleBarrier;
    int relaxed_events = 0;
};

/// Runs one trial to completion at logical time, writing the log to
/// config.log_path when set. Fully deterministic.
HeadlessResult run_headless(const SessionConfig& config, const HeadlessOptions& options = {});

/// Commands recorded in a log, indexed by tick.
std::vector<OperatorCommand> logged_commands(const TrialLog& log);

/// Session config and environment recorded in a log header.
SessionConfig config_from_log(const TrialLog& log);
Environment environment_from_log(const TrialLog& log);

struct ReplayReport {
    std::uint64_t logged_ticks = 0;
    std::uint64_t replayed_ticks = 0;
    std::optional<std::uint64_t> first_mismatch;  // tick whose state differs
    TrialPhase logged_phase = TrialPhase::Idle;
    TrialPhase replayed_phase = TrialPhase::Idle;

    bool identical() const {
        return !first_mismatch && logged_ticks == replayed_ticks && logged_phase == replayed_phase;
    }
};

/// Re-runs a logged trial from its recorded config, environment and command
/// stream and compares the state trajectory bit for bit. Writes the new log
/// to out when given.
ReplayReport replay_log(const std::filesystem::path& log_path, const std::optional<std::string>& out = std::nullopt);

}  // namespace cbf_teleop
