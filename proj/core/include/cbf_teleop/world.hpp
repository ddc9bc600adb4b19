#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbf_teleop/cbf.hpp"

namespace cbf_teleop {

struct Target {
    Vec2 center = Vec2::Zero();
    double radius = 0.5;
    bool inspected = false;
};

struct Pose {
    Vec2 position = Vec2::Zero();
    double yaw = 0.0;
};

/// Generation parameters for the procedural forest.
struct EnvironmentParams {
    double width = 25.0;
    double height = 15.0;
    int obstacle_count = 45;
    double obstacle_radius = 0.5;
    int target_count = 4;
    double target_radius = 0.5;
    double uav_radius = 0.25;
    double corridor_min = 1.0;       // obstacle surface to surface
    double target_clearance = 0.5;   // beyond uav + obstacle radius
    double target_separation = 2.0;  // between target centers
    double spawn_clearance = 1.0;    // obstacle surface to UAV surface at spawn
    double target_spawn_min = 3.0;   // spawn to target center
    Pose spawn{Vec2(1.0, 7.5), 0.0};
    std::int64_t max_attempts = 0;  // total samples; 0 means 10 * count * 1000

    void validate() const;  // throws ConfigError
};

struct Environment {
    double width = 25.0;
    double height = 15.0;
    std::vector<Obstacle> obstacles;
    std::vector<Target> targets;
    double uav_radius = 0.25;
    std::uint64_t seed = 0;
    Pose spawn;

    bool operator==(const Environment& other) const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when rejection sampling cannot place an entity.
class OvercrowdedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rejection-sampling placement from Rng(seed); obstacles first, then
/// targets, each in index order. Identical (params, seed) give identical
/// environments.
Environment generate_environment(const EnvironmentParams& params, std::uint64_t seed);

/// Lists every violated environment invariant; empty when valid.
std::vector<std::string> check_environment(const Environment& env, const EnvironmentParams& params);

/// h_min value reported when there are no obstacles.
inline constexpr double kNoObstacleBarrier = std::numeric_limits<double>::max();

struct ContactReport {
    double h_min = kNoObstacleBarrier;  // m^2
    bool in_contact = false;
    double max_penetration = 0.0;  // m
    std::vector<std::size_t> contact_indices;
};

ContactReport contact_query(const Vec2& position, const Environment& env);

enum class TrialPhase { Idle, Running, Succeeded, Failed, TimedOut, Aborted };

const char* to_string(TrialPhase phase);
std::optional<TrialPhase> trial_phase_from_string(std::string_view text);
inline bool is_terminal(TrialPhase p) { return p != TrialPhase::Idle && p != TrialPhase::Running; }

struct TrialState {
    TrialPhase phase = TrialPhase::Idle;
    bool started = false;  // set by idle -> running, kept through terminal phases
    std::uint64_t tick = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    int inspected_count = 0;
    std::vector<bool> inspected;  // per target
    std::optional<std::string> failure_cause;

    static TrialState for_environment(const Environment& env);
};

struct TrialParams {
    double crash_depth = 0.05;     // m of penetration that counts as lost flight
    double hover_speed_max = 0.5;  // m/s
};

struct InspectionEvent {
    std::size_t target_index = 0;
};

enum class InspectionRejection { NoTargetInRange, MovingTooFast, AlreadyInspected };
const char* to_string(InspectionRejection reason);

struct InspectionResult {
    std::optional<InspectionEvent> event;
    std::optional<InspectionRejection> rejection;
};

/// Succeeds for the nearest uninspected target whose acceptance radius
/// contains the UAV, provided the UAV is slower than hover_speed_max.
InspectionResult attempt_inspection(const StateVec& state, const Environment& env, const TrialState& trial,
                                    const TrialParams& params);

/// Lifecycle transition for one tick spanning [tick_time, tick_time + dt].
/// idle -> running on the first nonzero desired velocity; running -> failed
/// when penetration exceeds crash_depth; running -> succeeded when every
/// target is inspected. Failure wins over success in the same tick. Terminal
/// phases are left untouched.
TrialState update_trial(TrialState trial, const Vec2& desired_velocity, const ContactReport& report,
                        std::optional<InspectionEvent> inspection, double tick_time, double dt,
                        const TrialParams& params);

}  // namespace cbf_teleop
