#pragma once

#include <optional>
#include <string_view>

#include "cbf_teleop/dynamics.hpp"

namespace cbf_teleop {

/// Teleoperation conditions: which command drives the plant and whether the
/// filter deviation is fed back as force.
///   NA  : u_ref, no force        HSC : u_ref, force
///   SA  : u_cbf, no force        HSA : u_cbf, force
enum class Condition { NA, HSC, SA, HSA };

const char* to_string(Condition condition);  // "na", "hsc", "sa", "hsa"
std::optional<Condition> condition_from_string(std::string_view text);

inline bool drives_filtered(Condition c) { return c == Condition::SA || c == Condition::HSA; }
inline bool renders_force(Condition c) { return c == Condition::HSC || c == Condition::HSA; }

struct ParadigmConfig {
    double kf = 0.5;     // N per m/s^2
    double f_max = 3.0;  // N

    bool valid() const { return kf >= 0.0 && f_max > 0.0; }
};

struct ParadigmOutput {
    ControlInput u_applied;
    Vec2 force = Vec2::Zero();  // N
};

/// F = clamp(kf (u_cbf - u_ref), f_max)
Vec2 feedback_force(const ControlInput& u_ref, const ControlInput& u_cbf, const ParadigmConfig& cfg);

ParadigmOutput apply_condition(Condition condition, const ControlInput& u_ref, const ControlInput& u_cbf,
                               const ParadigmConfig& cfg);

}  // namespace cbf_teleop
