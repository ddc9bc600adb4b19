#include "cbf_teleop/verify.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "cbf_teleop/qp.hpp"
#include "cbf_teleop/world.hpp"

namespace cbf_teleop {

namespace {

constexpr double kOracleBox = 20.0;
constexpr double kOracleResolution = 0.01;

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

// Independent evaluation of the obstacle barrier in extended precision.
long double barrier_ld(long double x, long double y, long double cx, long double cy, long double r) {
    const long double dx = x - cx;
    const long double dy = y - cy;
    return dx * dx + dy * dy - r * r;
}

double rel_error(double analytic, long double reference) {
    const long double scale = std::max<long double>({std::fabs(reference), std::fabs(static_cast<long double>(analytic)), 1.0L});
    return static_cast<double>(std::fabs(analytic - reference) / scale);
}

}  // namespace

QpInstance random_qp_instance(Rng& rng) {
    QpInstance q;
    q.u_ref.u = Vec2(rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0));
    const Vec2 p(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
    const int m = 1 + static_cast<int>(rng.uniform01() * 8.0);
    for (int i = 0; i < m; ++i) {
        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const Vec2 a = rng.uniform(0.5, 3.0) * Vec2(std::cos(theta), std::sin(theta));
        q.rows.push_back({a, a.dot(p) - rng.uniform(0.0, 3.0)});
    }
    return q;
}

CheckResult check_qp_oracle(int instances, std::uint64_t seed) {
    CheckResult r;
    r.name = "qp-oracle-equivalence";
    Stopwatch watch;
    Rng rng(seed);
    int far = 0;
    int kkt_bad = 0;
    int infeasible = 0;
    double worst = 0.0;
    double worst_kkt = 0.0;
    for (int k = 0; k < instances; ++k) {
        const QpInstance q = random_qp_instance(rng);
        const QpSolution s = solve_projection(q.u_ref, q.rows);
        const auto oracle = oracle_solve(q.u_ref, q.rows, kOracleBox, kOracleResolution);
        if (!oracle) {
            ++infeasible;
            continue;
        }
        const double d = (s.u.u - *oracle).norm();
        worst = std::max(worst, d);
        far += d > 0.015;
        const double kkt = kkt_residual(s, q.u_ref, q.rows).residual;
        worst_kkt = std::max(worst_kkt, kkt);
        kkt_bad += kkt > 1e-8;
    }
    r.seconds = watch.seconds();
    r.passed = far == 0 && kkt_bad == 0 && infeasible == 0 && r.seconds < 10.0;
    std::ostringstream os;
    os << instances << " instances: " << far << " beyond 0.015 (worst " << worst << "), " << kkt_bad
       << " KKT > 1e-8 (worst " << worst_kkt << "), " << infeasible << " oracle-infeasible";
    r.detail = os.str();
    return r;
}

CheckResult check_qp_exactness(int instances, std::uint64_t seed) {
    CheckResult r;
    r.name = "qp-exactness";
    Stopwatch watch;
    Rng rng(seed);
    int bad = 0;
    double worst_kkt = 0.0;
    double worst_infeasibility = 0.0;
    double worst_gain = 0.0;  // how much closer the oracle got than the solver
    for (int k = 0; k < instances; ++k) {
        const QpInstance q = random_qp_instance(rng);
        const QpSolution s = solve_projection(q.u_ref, q.rows);
        const auto oracle = oracle_solve(q.u_ref, q.rows, kOracleBox, kOracleResolution);
        const double kkt = kkt_residual(s, q.u_ref, q.rows).residual;
        double infeasibility = 0.0;
        for (const LinearConstraint& row : q.rows) infeasibility = std::max(infeasibility, -row.residual(s.u.u));
        const double gain = oracle ? (s.u.u - q.u_ref.u).norm() - (*oracle - q.u_ref.u).norm() : 0.0;
        worst_kkt = std::max(worst_kkt, kkt);
        worst_infeasibility = std::max(worst_infeasibility, infeasibility);
        worst_gain = std::max(worst_gain, gain);
        bad += kkt > 1e-8 || infeasibility > kFeasibilityTol || gain > 1e-9 || s.status == QpStatus::Relaxed;
    }
    r.seconds = watch.seconds();
    r.passed = bad == 0;
    std::ostringstream os;
    os << instances << " instances: worst KKT " << worst_kkt << ", worst infeasibility " << worst_infeasibility
       << ", worst oracle improvement " << worst_gain;
    r.detail = os.str();
    return r;
}

CheckResult check_lie_derivatives(int states, std::uint64_t seed) {
    CheckResult r;
    r.name = "lie-derivatives";
    Stopwatch watch;
    Rng rng(seed);
    const double uav_radius = 0.25;
    const long double eps = 1e-3L;
    double worst = 0.0;
    for (int k = 0; k < states; ++k) {
        StateVec s;
        s.position = Vec2(rng.uniform(0.0, 25.0), rng.uniform(0.0, 15.0));
        s.velocity = Vec2(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
        const Obstacle o{Vec2(rng.uniform(0.0, 25.0), rng.uniform(0.0, 15.0)), 0.5};
        const BarrierEval e = lie_derivatives(s, o, uav_radius);

        const long double x = s.position.x(), y = s.position.y();
        const long double vx = s.velocity.x(), vy = s.velocity.y();
        const long double cx = o.center.x(), cy = o.center.y();
        const long double rr = static_cast<long double>(uav_radius) + o.radius;
        auto h_at = [&](long double px, long double py) { return barrier_ld(px, py, cx, cy, rr); };

        // Along the drift x1' = x2, x2' = 0 the barrier follows x1 + s x2.
        const long double hp = h_at(x + eps * vx, y + eps * vy);
        const long double h0 = h_at(x, y);
        const long double hm = h_at(x - eps * vx, y - eps * vy);
        const long double lf_fd = (hp - hm) / (2 * eps);
        const long double lf2_fd = (hp - 2 * h0 + hm) / (eps * eps);
        // L_g L_f h = d(L_f h)/d x2 = grad_x1 h.
        const long double gx = (h_at(x + eps, y) - h_at(x - eps, y)) / (2 * eps);
        const long double gy = (h_at(x, y + eps) - h_at(x, y - eps)) / (2 * eps);

        worst = std::max({worst, rel_error(e.h, h0), rel_error(e.lf_h, lf_fd), rel_error(e.lf2_h_drift, lf2_fd),
                          rel_error(e.lg_lf_h.x(), gx), rel_error(e.lg_lf_h.y(), gy)});
    }
    r.seconds = watch.seconds();
    r.passed = worst <= 1e-6;
    std::ostringstream os;
    os << states << " states: worst relative error " << worst;
    r.detail = os.str();
    return r;
}

CheckResult check_gain_validation(int samples, std::uint64_t seed) {
    CheckResult r;
    r.name = "gain-validation";
    Stopwatch watch;
    std::ostringstream os;
    bool ok = validate_gains({2.0, 3.0}).ok && !validate_gains({0.0, 1.0}).ok && !validate_gains({-1.0, 1.0}).ok;
    if (!ok) os << "fixed cases disagree; ";
    Rng rng(seed);
    int disagreements = 0;
    for (int k = 0; k < samples; ++k) {
        const double k1 = rng.uniform(-5.0, 5.0);
        const double k2 = rng.uniform(-5.0, 5.0);
        const std::complex<double> disc = std::sqrt(std::complex<double>(k2 * k2 - 4.0 * k1, 0.0));
        const std::complex<double> s1 = (-k2 + disc) / 2.0;
        const std::complex<double> s2 = (-k2 - disc) / 2.0;
        const bool stable = s1.real() < 0.0 && s2.real() < 0.0;
        disagreements += stable != validate_gains({k1, k2}).ok;
    }
    r.seconds = watch.seconds();
    r.passed = ok && disagreements == 0;
    os << samples << " random gains: " << disagreements << " disagreements with direct roots";
    r.detail = os.str();
    return r;
}

CheckResult check_environment_determinism(int seeds) {
    CheckResult r;
    r.name = "environment-determinism";
    Stopwatch watch;
    const EnvironmentParams params;
    int mismatches = 0;
    int invalid = 0;
    int collisions = 0;
    Environment previous;
    for (int s = 1; s <= seeds; ++s) {
        const Environment a = generate_environment(params, static_cast<std::uint64_t>(s));
        const Environment b = generate_environment(params, static_cast<std::uint64_t>(s));
        mismatches += !(a == b);
        invalid += !check_environment(a, params).empty();
        if (s > 1) collisions += a.obstacles.front().center == previous.obstacles.front().center;
        previous = a;
    }
    r.seconds = watch.seconds();
    r.passed = mismatches == 0 && invalid == 0 && collisions == 0;
    std::ostringstream os;
    os << seeds << " seeds: " << mismatches << " non-reproducible, " << invalid << " invalid, " << collisions
       << " identical to the previous seed";
    r.detail = os.str();
    return r;
}

std::vector<CheckResult> run_verification() {
    return {check_qp_oracle(), check_qp_exactness(), check_lie_derivatives(), check_gain_validation(),
            check_environment_determinism()};
}

std::string format_check(const CheckResult& result) {
    std::ostringstream os;
    os.precision(3);
    os << (result.passed ? "PASS " : "FAIL ") << result.name << " (" << std::fixed << result.seconds << " s) "
       << result.detail;
    return os.str();
}

}  // namespace cbf_teleop
