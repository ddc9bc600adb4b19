#include "cbf_teleop/metrics.hpp"

namespace cbf_teleop {

bool StepRecord::operator==(const StepRecord& o) const {
    return tick == o.tick && t == o.t && x1 == o.x1 && x2 == o.x2 && yaw == o.yaw && command == o.command &&
           u_ref.u == o.u_ref.u && u_cbf.u == o.u_cbf.u && u_applied.u == o.u_applied.u && force == o.force &&
           h_min == o.h_min && in_contact == o.in_contact && qp_status == o.qp_status && condition == o.condition &&
           phase == o.phase;
}

MetricsAccumulator accumulate_step(MetricsAccumulator acc, const StepRecord& record, double dt) {
    acc.distance += record.x2.norm() * dt;
    if (record.in_contact) acc.collision_time += dt;
    acc.disagreement_integral += (record.u_cbf.u - record.u_ref.u).norm() * dt;
    ++acc.ticks;
    return acc;
}

Metrics finalize(const MetricsAccumulator& acc, const TrialState& trial) {
    if (trial.phase == TrialPhase::Idle || !trial.started) throw DegenerateTrialError("trial never started");
    if (trial.phase == TrialPhase::Running) throw DegenerateTrialError("trial has not ended");
    const double duration = trial.t_end - trial.t_start;
    if (!(duration > 0.0)) throw DegenerateTrialError("trial duration is zero");
    Metrics m;
    m.duration = duration;
    m.v_avg = acc.distance / duration;
    m.t_collision = acc.collision_time;
    m.disagreement = acc.disagreement_integral / duration;
    m.outcome = trial.phase;
    m.failure_cause = trial.failure_cause;
    m.excluded_from_performance = trial.phase != TrialPhase::Succeeded;
    return m;
}

}  // namespace cbf_teleop
