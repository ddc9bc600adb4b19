#pragma once

#include <Eigen/Dense>

namespace cbf_teleop {

using Vec2 = Eigen::Vector2d;

inline Vec2 rotate(const Vec2& v, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

// Scales v down to length `limit` if it is longer, keeping its direction.
inline Vec2 clamp_norm(const Vec2& v, double limit) {
    const double n = v.norm();
    if (n <= limit) return v;
    return v * (limit / n);
}

inline bool all_finite(const Vec2& v) { return std::isfinite(v.x()) && std::isfinite(v.y()); }

}  // namespace cbf_teleop
