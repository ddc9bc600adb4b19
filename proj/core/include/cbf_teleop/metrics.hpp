#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "cbf_teleop/paradigm.hpp"
#include "cbf_teleop/qp.hpp"
#include "cbf_teleop/world.hpp"

namespace cbf_teleop {

/// One control tick. Command fields are what the pipeline computed from the
/// state at the start of the tick; position/velocity/yaw and the contact
/// fields describe the state after the plant step. t = tick * dt is the
/// start of the tick.
struct StepRecord {
    std::uint64_t tick = 0;
    double t = 0.0;
    Vec2 x1 = Vec2::Zero();
    Vec2 x2 = Vec2::Zero();
    double yaw = 0.0;
    OperatorCommand command;
    ControlInput u_ref;
    ControlInput u_cbf;
    ControlInput u_applied;
    Vec2 force = Vec2::Zero();
    double h_min = kNoObstacleBarrier;
    bool in_contact = false;
    QpStatus qp_status = QpStatus::Unconstrained;
    Condition condition = Condition::NA;
    TrialPhase phase = TrialPhase::Idle;  // after this tick's lifecycle update

    bool operator==(const StepRecord& other) const;
};

struct MetricsAccumulator {
    double distance = 0.0;                 // integral of |x2| dt, m
    double collision_time = 0.0;           // s
    double disagreement_integral = 0.0;    // integral of |u_cbf - u_ref| dt, m/s
    std::uint64_t ticks = 0;
};

struct Metrics {
    double v_avg = 0.0;         // m/s
    double t_collision = 0.0;   // s
    double disagreement = 0.0;  // m/s^2, time average
    double duration = 0.0;      // s
    TrialPhase outcome = TrialPhase::Succeeded;
    std::optional<std::string> failure_cause;
    bool excluded_from_performance = false;  // only successful trials count
};

class DegenerateTrialError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adds one running tick of length dt to the integrals.
MetricsAccumulator accumulate_step(MetricsAccumulator acc, const StepRecord& record, double dt);

/// Divides the integrals by t_end - t_start. Throws DegenerateTrialError for
/// trials that never started or have zero duration.
Metrics finalize(const MetricsAccumulator& acc, const TrialState& trial);

}  // namespace cbf_teleop
