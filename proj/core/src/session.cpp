#include "cbf_teleop/session.hpp"

#include <sstream>

namespace cbf_teleop {

SafetyFilter::SafetyFilter(const Environment& env, const EcbfGains& gains, const FilterConfig& filter,
                           const DynamicsParams& dynamics)
    : env_(&env), gains_(gains), filter_(filter), dynamics_(dynamics) {}

std::vector<LinearConstraint> SafetyFilter::constraints(const StateVec& state) const {
    std::vector<LinearConstraint> rows = build_constraints(state, env_->obstacles, env_->uav_radius, gains_);
    if (filter_.walls) {
        const auto walls = wall_constraints(state, env_->width, env_->height, env_->uav_radius, gains_);
        rows.insert(rows.end(), walls.begin(), walls.end());
    }
    return rows;
}

QpSolution SafetyFilter::solve(const StateVec& state, const ControlInput& u_ref) const {
    const std::vector<LinearConstraint> rows = constraints(state);
    if (filter_.cull_radius <= 0.0) return solve_projection(u_ref, rows);

    const std::size_t n_obstacles = env_->obstacles.size();
    CulledConstraints culled = cull_constraints(
        state, env_->obstacles, std::span(rows).first(n_obstacles), filter_.cull_radius, dynamics_.u_max);
    for (std::size_t i = n_obstacles; i < rows.size(); ++i) {
        culled.kept.push_back(rows[i]);
        culled.kept_index.push_back(i);
    }
    QpSolution solution = solve_projection(u_ref, culled.kept);
    bool exact = solution.status != QpStatus::Relaxed;
    for (const LinearConstraint& row : culled.culled) {
        if (row.residual(solution.u.u) < -kFeasibilityTol) exact = false;
    }
    if (!exact) return solve_projection(u_ref, rows);
    for (std::size_t& index : solution.active_set) index = culled.kept_index[index];
    return solution;
}

Session::Session(SessionConfig config, Environment env)
    : config_(std::move(config)),
      env_(std::move(env)),
      filter_(env_, config_.gains, config_.filter, config_.dynamics),
      trial_(TrialState::for_environment(env_)) {
    config_.validate();
    state_.position = env_.spawn.position;
    state_.yaw = wrap_angle(env_.spawn.yaw);
}

OperatorObservation Session::observe() const {
    OperatorObservation obs;
    obs.state = state_;
    obs.force = last_force_;
    obs.tick = tick_;
    obs.dt = config_.dynamics.dt;
    for (std::size_t i = 0; i < env_.targets.size(); ++i) {
        if (!trial_.inspected[i]) obs.targets_remaining.push_back(env_.targets[i].center);
    }
    return obs;
}

TickOutput Session::tick(const OperatorCommand& raw_command) {
    TickOutput out;
    const double dt = config_.dynamics.dt;
    const double tick_time = static_cast<double>(tick_) * dt;
    const OperatorCommand command = OperatorCommand::saturated(raw_command.stylus, raw_command.yaw_input,
                                                               raw_command.inspect_pressed, config_.input_map);

    const Vec2 desired = map_stylus_to_desired_velocity(command, state_.yaw, config_.input_map);
    const ControlInput u_ref = compute_u_ref(desired, state_.velocity, config_.dynamics);
    const QpSolution solution = filter_.solve(state_, u_ref);
    const ParadigmOutput dispatch = apply_condition(config_.condition, u_ref, solution.u, config_.paradigm);
    const StateVec next = step(state_, dispatch.u_applied, command.yaw_input, config_.dynamics);
    const ContactReport contact = contact_query(next.position, env_);

    if (solution.status == QpStatus::Relaxed) {
        ++relaxed_events_;
        out.events.push_back({"safety-relaxed", tick_, Json{{"slack", solution.slack}}});
    }

    const TrialPhase before = trial_.phase;
    const bool will_run = before == TrialPhase::Running || (before == TrialPhase::Idle && !desired.isZero(0.0));
    std::optional<InspectionEvent> inspection;
    if (command.inspect_pressed && will_run) {
        const InspectionResult result = attempt_inspection(next, env_, trial_, config_.trial);
        inspection = result.event;
        if (result.rejection) {
            out.events.push_back({"inspection-rejected", tick_, Json{{"reason", to_string(*result.rejection)}}});
        } else if (result.event) {
            out.events.push_back({"inspected", tick_, Json{{"target", result.event->target_index}}});
        }
    }
    trial_ = update_trial(trial_, desired, contact, inspection, tick_time, dt, config_.trial);
    if (trial_.phase == TrialPhase::Failed && before != TrialPhase::Failed)
        out.events.push_back({"crash", tick_, Json{{"cause", *trial_.failure_cause}}});

    state_ = next;
    last_force_ = dispatch.force;
    min_h_ = std::min(min_h_, contact.h_min);

    StepRecord& r = out.record;
    r.tick = tick_;
    r.t = tick_time;
    r.x1 = next.position;
    r.x2 = next.velocity;
    r.yaw = next.yaw;
    r.command = command;
    r.u_ref = u_ref;
    r.u_cbf = solution.u;
    r.u_applied = dispatch.u_applied;
    r.force = dispatch.force;
    r.h_min = contact.h_min;
    r.in_contact = contact.in_contact;
    r.qp_status = solution.status;
    r.condition = config_.condition;

    if (trial_.started && !is_terminal(before)) acc_ = accumulate_step(acc_, r, dt);

    ++tick_;
    trial_.tick = tick_;
    if (!is_terminal(trial_.phase) && tick_ >= config_.tick_cap) {
        trial_.phase = TrialPhase::TimedOut;
        trial_.t_end = static_cast<double>(tick_) * dt;
        out.events.push_back({"timeout", r.tick, Json{{"tick_cap", config_.tick_cap}}});
    }
    r.phase = trial_.phase;
    out.ended = is_terminal(trial_.phase);
    return out;
}

void Session::abort(const std::string& reason) {
    if (is_terminal(trial_.phase)) return;
    trial_.phase = TrialPhase::Aborted;
    trial_.t_end = static_cast<double>(tick_) * config_.dynamics.dt;
    abort_reason_ = reason;
}

std::variant<Metrics, std::string> Session::metrics() const {
    try {
        return finalize(acc_, trial_);
    } catch (const DegenerateTrialError& e) {
        return std::string(e.what());
    }
}

LogEnd Session::log_end() const {
    LogEnd end;
    end.phase = trial_.phase;
    const auto m = metrics();
    if (const Metrics* metrics = std::get_if<Metrics>(&m)) {
        end.metrics = *metrics;
    } else {
        end.note = std::get<std::string>(m);
    }
    if (abort_reason_) end.note = end.note ? *end.note + "; aborted: " + *abort_reason_ : "aborted: " + *abort_reason_;
    return end;
}

OperatorDriver::OperatorDriver(const OperatorSpec& spec, const InputMap& map,
                               std::vector<OperatorCommand> replay_commands)
    : spec_(spec), map_(map), replay_(std::move(replay_commands)) {}

std::optional<OperatorCommand> OperatorDriver::next(const OperatorObservation& obs) {
    switch (spec_.kind) {
        case OperatorKind::Waypoint: return waypoint_operator_step(obs, spec_.params, map_, policy_);
        case OperatorKind::ForceFollowing: return force_following_operator_step(obs, spec_.params, map_, policy_);
        case OperatorKind::Replay: {
            const auto result = replay_operator(replay_, obs.tick);
            if (const auto* cmd = std::get_if<OperatorCommand>(&result)) return *cmd;
            return std::nullopt;
        }
        case OperatorKind::Live: break;
    }
    throw ConfigError("operator: live sessions need the server (cbf_teleop serve)");
}

std::vector<OperatorCommand> logged_commands(const TrialLog& log) {
    std::vector<OperatorCommand> commands;
    commands.reserve(log.records.size());
    for (const StepRecord& r : log.records) commands.push_back(r.command);
    return commands;
}

SessionConfig config_from_log(const TrialLog& log) { return session_config_from_json(log.header.at("config")); }

Environment environment_from_log(const TrialLog& log) { return environment_from_json(log.header.at("environment")); }

HeadlessResult run_headless(const SessionConfig& config, const HeadlessOptions& options) {
    config.validate();
    std::vector<OperatorCommand> replay = options.replay_commands;
    std::optional<Environment> env = options.environment;
    if (config.op.kind == OperatorKind::Replay && replay.empty()) {
        const TrialLog source = read_log(config.op.replay_path);
        replay = logged_commands(source);
        if (!env) env = environment_from_log(source);
    }
    Session session(config, env ? std::move(*env) : build_environment(config));
    OperatorDriver driver(config.op, config.input_map, std::move(replay));

    std::optional<TrialLogWriter> writer;
    if (config.log_path) writer.emplace(*config.log_path, make_log_header(config, session.environment()));

    while (!session.ended()) {
        const OperatorObservation obs = session.observe();
        const std::optional<OperatorCommand> command = driver.next(obs);
        if (!command) {
            session.abort("replay exhausted at tick " + std::to_string(obs.tick));
            break;
        }
        const TickOutput out = session.tick(*command);
        for (const LogEvent& e : out.events) {
            if (writer) writer->event(e);
            if (options.on_event) options.on_event(e);
        }
        if (writer) writer->step(out.record);
        if (options.on_step) options.on_step(out.record);
    }
    if (writer) writer->end(session.log_end());

    HeadlessResult result;
    result.trial = session.trial();
    const auto metrics = session.metrics();
    if (const Metrics* m = std::get_if<Metrics>(&metrics)) {
        result.metrics = *m;
    } else {
        result.metrics_error = std::get<std::string>(metrics);
    }
    result.log_path = config.log_path;
    result.ticks = session.tick_count();
    result.min_h = session.min_h();
    result.relaxed_events = session.relaxed_events();
    return result;
}

ReplayReport replay_log(const std::filesystem::path& log_path, const std::optional<std::string>& out) {
    const TrialLog source = read_log(log_path);
    SessionConfig config = config_from_log(source);
    config.op = OperatorSpec{};
    config.op.kind = OperatorKind::Replay;
    config.op.replay_path = log_path.string();
    config.log_path = out;

    HeadlessOptions options;
    options.environment = environment_from_log(source);
    options.replay_commands = logged_commands(source);
    ReplayReport report;
    report.logged_ticks = source.records.size();
    if (source.end) report.logged_phase = source.end->phase;
    options.on_step = [&](const StepRecord& r) {
        const std::uint64_t i = report.replayed_ticks++;
        if (report.first_mismatch) return;
        if (i >= source.records.size()) {
            report.first_mismatch = r.tick;
            return;
        }
        const StepRecord& logged = source.records[i];
        if (logged.x1 != r.x1 || logged.x2 != r.x2 || logged.yaw != r.yaw || logged.phase != r.phase)
            report.first_mismatch = r.tick;
    };
    const HeadlessResult result = run_headless(config, options);
    report.replayed_phase = result.trial.phase;
    return report;
}

}  // namespace cbf_teleop
