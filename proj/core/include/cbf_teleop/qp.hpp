#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cbf_teleop/cbf.hpp"

namespace cbf_teleop {

enum class QpStatus { Optimal, Relaxed, Unconstrained };

const char* to_string(QpStatus status);
std::optional<QpStatus> qp_status_from_string(std::string_view text);

struct QpSolution {
    ControlInput u;
    std::vector<std::size_t> active_set;
    QpStatus status = QpStatus::Unconstrained;
    double slack = 0.0;
};

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kDefaultRelaxPenalty = 1e4;

/// Minimizes 1/2 |u - u_ref|^2 subject to a_i . u >= b_i by exact active-set
/// enumeration over the two decision variables. Falls back to solve_relaxed
/// when the constraints have no common point.
QpSolution solve_projection(const ControlInput& u_ref, std::span<const LinearConstraint> constraints);

/// Shared-slack relaxation: minimizes 1/2 |u - u_ref|^2 + penalty * delta^2
/// subject to a_i . u >= b_i - delta, delta >= 0. Feasible problems return
/// the solve_projection result unchanged.
QpSolution solve_relaxed(const ControlInput& u_ref, std::span<const LinearConstraint> constraints,
                         double penalty = kDefaultRelaxPenalty);

/// Brute-force reference solver: the feasible point of the grid
/// {-box + k * resolution} nearest to u_ref, or nullopt when no grid point is
/// feasible. Test and verification use only.
std::optional<Vec2> oracle_solve(const ControlInput& u_ref, std::span<const LinearConstraint> constraints,
                                 double box, double resolution);

/// Nonnegative multipliers lambda minimizing |(u - u_ref) - sum lambda_i a_i|
/// over the active rows, and that residual norm. Used for KKT checks.
struct KktResidual {
    std::vector<double> multipliers;
    double residual = 0.0;
};
KktResidual kkt_residual(const QpSolution& solution, const ControlInput& u_ref,
                         std::span<const LinearConstraint> constraints);

}  // namespace cbf_teleop
