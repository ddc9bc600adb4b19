#include "cbf_teleop/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbf_teleop {

const char* to_string(QpStatus status) {
    switch (status) {
        case QpStatus::Optimal: return "optimal";
        case QpStatus::Relaxed: return "relaxed";
        case QpStatus::Unconstrained: return "unconstrained";
    }
    return "?";
}

std::optional<QpStatus> qp_status_from_string(std::string_view text) {
    if (text == "optimal") return QpStatus::Optimal;
    if (text == "relaxed") return QpStatus::Relaxed;
    if (text == "unconstrained") return QpStatus::Unconstrained;
    return std::nullopt;
}

namespace {

struct Candidate {
    Vec2 u;
    double distance2;
};

// Row a.u >= b - shift, with shift the relaxation slack (0 for the plain QP).
bool feasible(const Vec2& u, std::span<const LinearConstraint> rows, double shift) {
    for (const LinearConstraint& row : rows) {
        if (row.a.dot(u) - (row.b - shift) < -kFeasibilityTol) return false;
    }
    return true;
}

bool zero_row(const LinearConstraint& row) { return row.a.x() == 0.0 && row.a.y() == 0.0; }

// Exact projection of u_ref onto {u : a_i.u >= b_i - shift}. Returns nullopt
// when no enumerated candidate is feasible, which for a convex polygon means
// the intersection is empty (the projection of u_ref would otherwise be a
// candidate).
std::optional<Vec2> enumerate(const Vec2& u_ref, std::span<const LinearConstraint> rows, double shift) {
    for (const LinearConstraint& row : rows) {
        if (zero_row(row) && row.b - shift > kFeasibilityTol) return std::nullopt;
    }
    if (feasible(u_ref, rows, shift)) return u_ref;

    std::optional<Candidate> best;
    auto consider = [&](const Vec2& u) {
        const double d2 = (u - u_ref).squaredNorm();
        if (best && d2 >= best->distance2) return;
        if (!feasible(u, rows, shift)) return;
        best = Candidate{u, d2};
    };

    // A single active row at the optimum must be violated by u_ref; a pair
    // must contain at least one violated row, otherwise projecting onto the
    // pair alone would return u_ref.
    std::vector<std::size_t> violated;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (zero_row(rows[i])) continue;
        const double gap = (rows[i].b - shift) - rows[i].a.dot(u_ref);
        if (gap > 0.0) {
            violated.push_back(i);
            consider(u_ref + rows[i].a * (gap / rows[i].a.squaredNorm()));
        }
    }

    for (std::size_t i : violated) {
        const LinearConstraint& p = rows[i];
        const double rp = (p.b - shift) - p.a.dot(u_ref);
        for (std::size_t j = 0; j < rows.size(); ++j) {
            if (j == i || zero_row(rows[j])) continue;
            const LinearConstraint& q = rows[j];
            const bool q_violated = (q.b - shift) - q.a.dot(u_ref) > 0.0;
            if (q_violated && j < i) continue;  // pair already visited from j
            // u = u_ref + lp a_p + lq a_q with both rows tight: G [lp lq]' = r.
            const double gpp = p.a.squaredNorm();
            const double gqq = q.a.squaredNorm();
            const double gpq = p.a.dot(q.a);
            const double det = gpp * gqq - gpq * gpq;
            if (det <= 1e-12 * gpp * gqq) continue;  // parallel rows: covered by singles
            const double rq = (q.b - shift) - q.a.dot(u_ref);
            const double lp = (gqq * rp - gpq * rq) / det;
            const double lq = (gpp * rq - gpq * rp) / det;
            if (lp < 0.0 || lq < 0.0) continue;  // not a KKT point
            consider(u_ref + p.a * lp + q.a * lq);
        }
    }
    if (!best) return std::nullopt;
    return best->u;
}

std::vector<std::size_t> active_rows(const Vec2& u, std::span<const LinearConstraint> rows, double shift) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (zero_row(rows[i])) continue;
        const double scale = std::max(1.0, rows[i].a.norm());
        if (std::abs(rows[i].a.dot(u) - (rows[i].b - shift)) <= kFeasibilityTol * scale) active.push_back(i);
    }
    return active;
}

}  // namespace

QpSolution solve_projection(const ControlInput& u_ref, std::span<const LinearConstraint> constraints) {
    if (feasible(u_ref.u, constraints, 0.0)) {
        bool zero_rows_ok = true;
        for (const auto& row : constraints) zero_rows_ok = zero_rows_ok && !(zero_row(row) && row.b > 0.0);
        if (zero_rows_ok) return QpSolution{u_ref, {}, QpStatus::Unconstrained, 0.0};
    }
    const std::optional<Vec2> u = enumerate(u_ref.u, constraints, 0.0);
    if (!u) return solve_relaxed(u_ref, constraints);
    return QpSolution{ControlInput{*u}, active_rows(*u, constraints, 0.0), QpStatus::Optimal, 0.0};
}

QpSolution solve_relaxed(const ControlInput& u_ref, std::span<const LinearConstraint> constraints, double penalty) {
    if (const std::optional<Vec2> u = enumerate(u_ref.u, constraints, 0.0)) {
        if (*u == u_ref.u) return QpSolution{u_ref, {}, QpStatus::Unconstrained, 0.0};
        return QpSolution{ControlInput{*u}, active_rows(*u, constraints, 0.0), QpStatus::Optimal, 0.0};
    }

    // u_ref itself is feasible once delta covers the largest violation.
    double delta_max = 0.0;
    for (const auto& row : constraints) delta_max = std::max(delta_max, row.b - row.a.dot(u_ref.u));
    double lo = 0.0;
    double hi = delta_max;
    // Smallest slack for which the relaxed polygon is nonempty.
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (enumerate(u_ref.u, constraints, mid) ? hi : lo) = mid;
    }
    const double delta_min = hi;

    // The objective is convex in delta: golden-section search on
    // [delta_min, delta_max] with the exact projection as inner solve.
    auto cost = [&](double delta) {
        const std::optional<Vec2> u = enumerate(u_ref.u, constraints, delta);
        if (!u) return std::numeric_limits<double>::infinity();
        return 0.5 * (*u - u_ref.u).squaredNorm() + penalty * delta * delta;
    };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = delta_min;
    double b = delta_max;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = cost(c);
    double fd = cost(d);
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, b); ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d);
        }
    }
    double delta = delta_min;
    double best = cost(delta_min);
    for (double candidate : {a, b, c, d}) {
        const double value = cost(candidate);
        if (value < best) {
            best = value;
            delta = candidate;
        }
    }
    const Vec2 u = enumerate(u_ref.u, constraints, delta).value_or(u_ref.u);
    return QpSolution{ControlInput{u}, active_rows(u, constraints, delta), QpStatus::Relaxed, delta};
}

std::optional<Vec2> oracle_solve(const ControlInput& u_ref, std::span<const LinearConstraint> constraints,
                                 double box, double resolution) {
    // Exhaustive over grid columns. Within a column x the feasible y values
    // form an interval; it is computed per row, then every grid y near its
    // endpoints is re-checked directly against all rows so rounding in the
    // interval arithmetic cannot admit an infeasible point.
    const long n = std::lround(2.0 * box / resolution);
    auto coord = [&](long k) { return -box + static_cast<double>(k) * resolution; };
    auto point_ok = [&](double x, double y) {
        for (const auto& row : constraints) {
            if (row.a.x() * x + row.a.y() * y - row.b < 0.0) return false;
        }
        return true;
    };

    std::optional<Vec2> best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (long i = 0; i <= n; ++i) {
        const double x = coord(i);
        double y_lo = -box;
        double y_hi = box;
        bool empty = false;
        for (const auto& row : constraints) {
            const double rhs = row.b - row.a.x() * x;  // a_y * y >= rhs
            if (row.a.y() > 0.0) {
                y_lo = std::max(y_lo, rhs / row.a.y());
            } else if (row.a.y() < 0.0) {
                y_hi = std::min(y_hi, rhs / row.a.y());
            } else if (rhs > 0.0) {
                empty = true;
            }
        }
        if (empty || y_lo > y_hi + resolution) continue;
        // Grid index range [k_lo, k_hi] inside the interval, widened by one
        // and then tightened by direct evaluation.
        long k_lo = std::max(0L, static_cast<long>(std::floor((y_lo + box) / resolution)) - 1);
        long k_hi = std::min(n, static_cast<long>(std::ceil((y_hi + box) / resolution)) + 1);
        while (k_lo <= k_hi && !point_ok(x, coord(k_lo))) ++k_lo;
        while (k_hi >= k_lo && !point_ok(x, coord(k_hi))) --k_hi;
        if (k_lo > k_hi) continue;
        const long k_near = std::clamp(std::lround((u_ref.u.y() + box) / resolution), k_lo, k_hi);
        const double y = coord(k_near);
        const double d2 = (Vec2(x, y) - u_ref.u).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = Vec2(x, y);
        }
    }
    return best;
}

KktResidual kkt_residual(const QpSolution& solution, const ControlInput& u_ref,
                         std::span<const LinearConstraint> constraints) {
    const Vec2 step = solution.u.u - u_ref.u;
    KktResidual out;
    const auto& active = solution.active_set;
    out.multipliers.assign(active.size(), 0.0);
    if (active.empty()) {
        out.residual = step.norm();
        return out;
    }
    // Nonnegative least squares over at most a handful of columns in 2D: try
    // every subset of size <= 2 and keep the best nonnegative fit.
    double best = step.norm();
    for (std::size_t i = 0; i < active.size(); ++i) {
        const Vec2& ai = constraints[active[i]].a;
        const double li = ai.dot(step) / ai.squaredNorm();
        if (li >= 0.0) {
            const double r = (step - li * ai).norm();
            if (r < best) {
                best = r;
                std::fill(out.multipliers.begin(), out.multipliers.end(), 0.0);
                out.multipliers[i] = li;
            }
        }
        for (std::size_t j = i + 1; j < active.size(); ++j) {
            const Vec2& aj = constraints[active[j]].a;
            Eigen::Matrix2d m;
            m << ai, aj;
            if (std::abs(m.determinant()) <= 1e-12 * ai.norm() * aj.norm()) continue;
            const Eigen::Vector2d l = m.fullPivLu().solve(step);
            if (l.x() < 0.0 || l.y() < 0.0) continue;
            const double r = (step - m * l).norm();
            if (r < best) {
                best = r;
                std::fill(out.multipliers.begin(), out.multipliers.end(), 0.0);
                out.multipliers[i] = l.x();
                out.multipliers[j] = l.y();
            }
        }
    }
    out.residual = best;
    return out;
}

}  // namespace cbf_teleop
