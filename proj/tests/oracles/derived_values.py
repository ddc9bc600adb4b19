"""Independent reference values for the frozen expectations in the unit tests.

Symbolic work uses sympy, QPs use cvxpy, grid search uses numpy. Nothing here
imports the C++ code. Run: python3 tests/oracles/derived_values.py
"""
import json
from fractions import Fraction as F

import cvxpy as cp
import numpy as np
import sympy as sp

out = {}

# Input map: speed = kv * (|s| - deadzone) along s, rotated by yaw.
kv, dz = F(2), F(1)
out["desired_speed_stylus_3cm"] = float(kv * (3 - dz))

# Reference control, clamped to u_max.
out["u_ref_small_error"] = float((F(1) - F(9, 10)) / F(2, 100))
out["u_ref_unclamped"] = float((F(4) - 0) / F(2, 100))

# Exact zero-order hold of the double integrator.
dt = F(2, 100)
out["zoh_x1_unit_accel"] = float(F(1, 2) * dt * dt * 1)
out["zoh_x2_unit_accel"] = float(dt * 1)
out["yaw_after_one_tick"] = str(sp.pi / 4 * sp.Rational(2, 100))

# Barrier and Lie derivatives, symbolic.
x, y, vx, vy, cx, cy, r = sp.symbols("x y vx vy cx cy r", real=True)
h = (x - cx) ** 2 + (y - cy) ** 2 - r**2
lf = sp.diff(h, x) * vx + sp.diff(h, y) * vy
lf2 = sp.diff(lf, x) * vx + sp.diff(lf, y) * vy
lglf = (sp.diff(lf, vx), sp.diff(lf, vy))
rr = sp.Rational(3, 4)
sub = {x: 1, y: 0, vx: -1, vy: 0, cx: 0, cy: 0, r: rr}
out["h_at_1"] = float(h.subs(sub))
out["h_at_half"] = float(h.subs({x: sp.Rational(1, 2), y: 0, cx: 0, cy: 0, r: rr}))
out["lie_example"] = [float(e.subs(sub)) for e in (h, lf, lf2, *lglf)]
sub_perp = {x: 1, y: 0, vx: 0, vy: 3, cx: 0, cy: 0, r: rr}
out["lie_orthogonal"] = [float(e.subs(sub_perp)) for e in (lf, lf2, *lglf)]
k1, k2 = 2, 3
b = -(lf2 + k1 * h + k2 * lf).subs(sub)
out["ecbf_b"] = float(b)
s = sp.symbols("s")
out["poles_2_3"] = sorted(float(p) for p in sp.solve(s**2 + k2 * s + k1, s))


def qp(u_ref, rows, penalty=None):
    u = cp.Variable(2)
    if penalty is None:
        cons = [np.array(a) @ u >= bb for a, bb in rows]
        cp.Problem(cp.Minimize(0.5 * cp.sum_squares(u - np.array(u_ref))), cons).solve(solver=cp.CLARABEL)
        return [float(v) for v in u.value]
    d = cp.Variable(nonneg=True)
    cons = [np.array(a) @ u >= bb - d for a, bb in rows]
    cp.Problem(cp.Minimize(0.5 * cp.sum_squares(u - np.array(u_ref)) + penalty * d**2), cons).solve(
        solver=cp.CLARABEL
    )
    return [float(v) for v in u.value] + [float(d.value)]


out["qp_half_plane"] = qp([0, 0], [([2, 0], 3.125)])
out["qp_corner"] = qp([0, 0], [([1, 0], 1), ([0, 1], 1)])
out["qp_relaxed_opposed"] = qp([0, 0], [([1, 0], 1), ([-1, 0], 1)], penalty=1e4)
# Rows read as a.u >= b: x >= 3 and x <= 1 conflict, so the shared slack opens
# both to x = 2. The band 1 <= x <= 3 in the same convention is the pair below.
out["qp_band_literal_relaxed"] = qp([0, 0], [([1, 0], 3), ([-1, 0], -1)], penalty=1e4)
out["qp_band"] = qp([0, 0], [([1, 0], 1), ([-1, 0], -3)])

# Nearest feasible point of the 0.01 grid on [-10, 10]^2.
g = np.round(np.arange(-1000, 1001) * 0.01, 10)
X, Y = np.meshgrid(g, g, indexing="ij")
feasible = 2 * X >= 3.125
d2 = np.where(feasible, X**2 + Y**2, np.inf)
i = np.unravel_index(np.argmin(d2), d2.shape)
out["oracle_half_plane"] = [float(X[i]), float(Y[i])]

# Feedback force, clamped to f_max.
out["hsa_force"] = float(F(1, 2) * (F(15625, 10000) - 0))

# Contact.
out["contact_h_at_1m"] = float(F(1) - F(3, 4) ** 2)
out["penetration_at_072"] = float(F(3, 4) - F(72, 100))

# Metrics.
out["v_avg_const"] = float(F(500) * 2 * dt / (500 * dt))
out["t_collision_10_ticks"] = float(10 * dt)
# Speed and disagreement are time averages; collision time stays a total.
out["finalize"] = [float(F(20) / 10), float(F(2, 10)), float(F(5) / 10)]

# Packing bound: every obstacle needs a disc of radius r + corridor/2 to itself.
need = 10000 * np.pi * (0.5 + 0.5 / 2) ** 2
out["overcrowded_area_needed"] = need
out["arena_area"] = 25 * 15

# Operators.
out["aggr3_speed"] = 3 * 2
out["admittance_shift_cm"] = 2 * 1

print(json.dumps(out, indent=1))
