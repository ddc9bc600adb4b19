#include "cbf_teleop/world.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cbf_teleop/rng.hpp"

namespace cbf_teleop {

void EnvironmentParams::validate() const {
    std::ostringstream why;
    if (!(width > 0.0 && height > 0.0)) why << "arena width/height must be > 0; ";
    if (obstacle_count < 0 || target_count < 0) why << "counts must be >= 0; ";
    if (!(obstacle_radius > 0.0)) why << "obstacle_radius must be > 0; ";
    if (!(target_radius > 0.0)) why << "target_radius must be > 0; ";
    if (!(uav_radius > 0.0)) why << "uav_radius must be > 0; ";
    if (corridor_min < 0.0 || target_clearance < 0.0 || target_separation < 0.0 || spawn_clearance < 0.0 ||
        target_spawn_min < 0.0)
        why << "clearances must be >= 0; ";
    if (max_attempts < 0) why << "max_attempts must be >= 0; ";
    if (spawn.position.x() < uav_radius || spawn.position.x() > width - uav_radius ||
        spawn.position.y() < uav_radius || spawn.position.y() > height - uav_radius)
        why << "spawn must lie inside the arena; ";
    if (!why.str().empty()) throw ConfigError("environment: " + why.str().substr(0, why.str().size() - 2));
}

bool Environment::operator==(const Environment& other) const {
    if (width != other.width || height != other.height || uav_radius != other.uav_radius || seed != other.seed ||
        spawn.position != other.spawn.position || spawn.yaw != other.spawn.yaw ||
        obstacles.size() != other.obstacles.size() || targets.size() != other.targets.size())
        return false;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        if (obstacles[i].center != other.obstacles[i].center || obstacles[i].radius != other.obstacles[i].radius)
            return false;
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (targets[i].center != other.targets[i].center || targets[i].radius != other.targets[i].radius ||
            targets[i].inspected != other.targets[i].inspected)
            return false;
    }
    return true;
}

namespace {

double obstacle_spacing(const EnvironmentParams& p) { return 2.0 * p.obstacle_radius + p.corridor_min; }
double target_standoff(const EnvironmentParams& p) { return p.uav_radius + p.obstacle_radius + p.target_clearance; }
double spawn_standoff(const EnvironmentParams& p) { return p.uav_radius + p.obstacle_radius + p.spawn_clearance; }

// Centers at least `spacing` apart have disjoint discs of radius spacing/2,
// all inside the arena of admissible centers grown by spacing/2. Their
// total area cannot exceed that rectangle's.
int area_bound(const EnvironmentParams& p) {
    const double half = obstacle_spacing(p) / 2.0;
    const double w = std::max(0.0, p.width - 2.0 * p.obstacle_radius) + 2.0 * half;
    const double h = std::max(0.0, p.height - 2.0 * p.obstacle_radius) + 2.0 * half;
    const double disc = std::numbers::pi * half * half;
    if (disc <= 0.0) return std::numeric_limits<int>::max();
    return static_cast<int>(std::floor(w * h / disc));
}

bool obstacle_fits(const Vec2& c, const std::vector<Obstacle>& placed, const EnvironmentParams& p) {
    if ((c - p.spawn.position).norm() < spawn_standoff(p)) return false;
    const double spacing = obstacle_spacing(p);
    for (const Obstacle& o : placed) {
        if ((o.center - c).norm() < spacing) return false;
    }
    return true;
}

bool target_fits(const Vec2& c, const std::vector<Obstacle>& obstacles, const std::vector<Target>& placed,
                 const EnvironmentParams& p) {
    if ((c - p.spawn.position).norm() < p.target_spawn_min) return false;
    const double standoff = target_standoff(p);
    for (const Obstacle& o : obstacles) {
        if ((o.center - c).norm() < standoff) return false;
    }
    for (const Target& t : placed) {
        if ((t.center - c).norm() < p.target_separation) return false;
    }
    return true;
}

}  // namespace

Environment generate_environment(const EnvironmentParams& params, std::uint64_t seed) {
    params.validate();
    const std::int64_t total = params.obstacle_count + params.target_count;
    std::int64_t budget = params.max_attempts > 0 ? params.max_attempts : 10 * total * 1000;

    if (params.obstacle_count > area_bound(params)) {
        std::ostringstream msg;
        msg << "overcrowded: obstacle " << area_bound(params) << " of " << params.obstacle_count
            << " cannot be placed (area bound: at most " << area_bound(params) << " obstacles fit at spacing "
            << obstacle_spacing(params) << " m)";
        throw OvercrowdedError(msg.str());
    }

    Environment env;
    env.width = params.width;
    env.height = params.height;
    env.uav_radius = params.uav_radius;
    env.seed = seed;
    env.spawn = params.spawn;

    Rng rng(seed);
    const double r = params.obstacle_radius;
    for (int i = 0; i < params.obstacle_count; ++i) {
        bool placed = false;
        while (budget > 0 && !placed) {
            --budget;
            const Vec2 c(rng.uniform(r, params.width - r), rng.uniform(r, params.height - r));
            if (obstacle_fits(c, env.obstacles, params)) {
                env.obstacles.push_back({c, r});
                placed = true;
            }
        }
        if (!placed) {
            std::ostringstream msg;
            msg << "overcrowded: obstacle " << i << " of " << params.obstacle_count << " not placed within "
                << (params.max_attempts > 0 ? params.max_attempts : 10 * total * 1000) << " samples";
            throw OvercrowdedError(msg.str());
        }
    }
    const double tr = params.target_radius;
    for (int i = 0; i < params.target_count; ++i) {
        bool placed = false;
        while (budget > 0 && !placed) {
            --budget;
            const Vec2 c(rng.uniform(tr, params.width - tr), rng.uniform(tr, params.height - tr));
            if (target_fits(c, env.obstacles, env.targets, params)) {
                env.targets.push_back({c, tr, false});
                placed = true;
            }
        }
        if (!placed) {
            std::ostringstream msg;
            msg << "overcrowded: target " << i << " of " << params.target_count << " not placed";
            throw OvercrowdedError(msg.str());
        }
    }
    return env;
}

std::vector<std::string> check_environment(const Environment& env, const EnvironmentParams& params) {
    std::vector<std::string> problems;
    auto report = [&](const std::string& what, std::size_t i) {
        problems.push_back(what + " (index " + std::to_string(i) + ")");
    };
    for (std::size_t i = 0; i < env.obstacles.size(); ++i) {
        const Obstacle& o = env.obstacles[i];
        if (!(o.radius > 0.0)) report("obstacle radius not positive", i);
        if (o.center.x() < o.radius || o.center.x() > env.width - o.radius || o.center.y() < o.radius ||
            o.center.y() > env.height - o.radius)
            report("obstacle outside arena", i);
        for (std::size_t j = i + 1; j < env.obstacles.size(); ++j) {
            const double gap = (o.center - env.obstacles[j].center).norm() - o.radius - env.obstacles[j].radius;
            if (gap < params.corridor_min) report("obstacle corridor below minimum", i);
        }
    }
    for (std::size_t i = 0; i < env.targets.size(); ++i) {
        const Target& t = env.targets[i];
        if (!(t.radius > 0.0)) report("target radius not positive", i);
        if (t.center.x() < 0.0 || t.center.x() > env.width || t.center.y() < 0.0 || t.center.y() > env.height)
            report("target outside arena", i);
        for (const Obstacle& o : env.obstacles) {
            if ((t.center - o.center).norm() < env.uav_radius + o.radius + params.target_clearance) {
                report("target too close to an obstacle", i);
                break;
            }
        }
    }
    for (std::size_t i = 0; i < env.obstacles.size(); ++i) {
        if (barrier(env.spawn.position, env.obstacles[i], env.uav_radius) <= 0.0) report("spawn not safe", i);
    }
    return problems;
}

ContactReport contact_query(const Vec2& position, const Environment& env) {
    ContactReport report;
    for (std::size_t i = 0; i < env.obstacles.size(); ++i) {
        const Obstacle& o = env.obstacles[i];
        report.h_min = std::min(report.h_min, barrier(position, o, env.uav_radius));
        const double r = env.uav_radius + o.radius;
        const double distance = (position - o.center).norm();
        if (distance <= r) {
            report.in_contact = true;
            report.contact_indices.push_back(i);
            report.max_penetration = std::max(report.max_penetration, r - distance);
        }
    }
    return report;
}

const char* to_string(TrialPhase phase) {
    switch (phase) {
        case TrialPhase::Idle: return "idle";
        case TrialPhase::Running: return "running";
        case TrialPhase::Succeeded: return "succeeded";
        case TrialPhase::Failed: return "failed";
        case TrialPhase::TimedOut: return "timed_out";
        case TrialPhase::Aborted: return "aborted";
    }
    return "?";
}

std::optional<TrialPhase> trial_phase_from_string(std::string_view text) {
    for (TrialPhase p : {TrialPhase::Idle, TrialPhase::Running, TrialPhase::Succeeded, TrialPhase::Failed,
                         TrialPhase::TimedOut, TrialPhase::Aborted}) {
        if (text == to_string(p)) return p;
    }
    return std::nullopt;
}

TrialState TrialState::for_environment(const Environment& env) {
    TrialState trial;
    trial.inspected.assign(env.targets.size(), false);
    for (std::size_t i = 0; i < env.targets.size(); ++i) {
        if (env.targets[i].inspected) {
            trial.inspected[i] = true;
            ++trial.inspected_count;
        }
    }
    return trial;
}

const char* to_string(InspectionRejection reason) {
    switch (reason) {
        case InspectionRejection::NoTargetInRange: return "no-target-in-range";
        case InspectionRejection::MovingTooFast: return "moving-too-fast";
        case InspectionRejection::AlreadyInspected: return "already-inspected";
    }
    return "?";
}

InspectionResult attempt_inspection(const StateVec& state, const Environment& env, const TrialState& trial,
                                    const TrialParams& params) {
    std::optional<std::size_t> nearest;
    double nearest_distance = std::numeric_limits<double>::infinity();
    bool over_inspected = false;
    for (std::size_t i = 0; i < env.targets.size(); ++i) {
        const double distance = (state.position - env.targets[i].center).norm();
        if (distance > env.targets[i].radius) continue;
        if (trial.inspected[i]) {
            over_inspected = true;
        } else if (distance < nearest_distance) {
            nearest = i;
            nearest_distance = distance;
        }
    }
    if (!nearest) {
        return {std::nullopt,
                over_inspected ? InspectionRejection::AlreadyInspected : InspectionRejection::NoTargetInRange};
    }
    if (state.velocity.norm() > params.hover_speed_max) return {std::nullopt, InspectionRejection::MovingTooFast};
    return {InspectionEvent{*nearest}, std::nullopt};
}

TrialState update_trial(TrialState trial, const Vec2& desired_velocity, const ContactReport& report,
                        std::optional<InspectionEvent> inspection, double tick_time, double dt,
                        const TrialParams& params) {
    if (is_terminal(trial.phase)) return trial;
    if (trial.phase == TrialPhase::Idle) {
        if (desired_velocity.isZero(0.0)) return trial;
        trial.phase = TrialPhase::Running;
        trial.started = true;
        trial.t_start = tick_time;
    }
    const double tick_end = tick_time + dt;
    if (report.max_penetration > params.crash_depth) {
        std::ostringstream cause;
        cause << "crashed: penetration " << report.max_penetration << " m exceeds crash depth " << params.crash_depth
              << " m (obstacle";
        for (std::size_t i : report.contact_indices) cause << ' ' << i;
        cause << ')';
        trial.phase = TrialPhase::Failed;
        trial.failure_cause = cause.str();
        trial.t_end = tick_end;
        return trial;
    }
    if (inspection && inspection->target_index < trial.inspected.size() && !trial.inspected[inspection->target_index]) {
        trial.inspected[inspection->target_index] = true;
        ++trial.inspected_count;
    }
    if (trial.inspected_count == static_cast<int>(trial.inspected.size())) {
        trial.phase = TrialPhase::Succeeded;
        trial.t_end = tick_end;
    }
    return trial;
}

}  // namespace cbf_teleop
