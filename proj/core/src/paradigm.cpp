#include "cbf_teleop/paradigm.hpp"

namespace cbf_teleop {

const char* to_string(Condition condition) {
    switch (condition) {
        case Condition::NA: return "na";
        case Condition::HSC: return "hsc";
        case Condition::SA: return "sa";
        case Condition::HSA: return "hsa";
    }
    return "?";
}

std::optional<Condition> condition_from_string(std::string_view text) {
    if (text == "na" || text == "NA") return Condition::NA;
    if (text == "hsc" || text == "HSC") return Condition::HSC;
    if (text == "sa" || text == "SA") return Condition::SA;
    if (text == "hsa" || text == "HSA") return Condition::HSA;
    return std::nullopt;
}

Vec2 feedback_force(const ControlInput& u_ref, const ControlInput& u_cbf, const ParadigmConfig& cfg) {
    return clamp_norm(cfg.kf * (u_cbf.u - u_ref.u), cfg.f_max);
}

ParadigmOutput apply_condition(Condition condition, const ControlInput& u_ref, const ControlInput& u_cbf,
                               const ParadigmConfig& cfg) {
    ParadigmOutput out;
    out.u_applied = drives_filtered(condition) ? u_cbf : u_ref;
    if (renders_force(condition)) out.force = feedback_force(u_ref, u_cbf, cfg);
    return out;
}

}  // namespace cbf_teleop
