"""
The ground state as initial data: e^{it} Q solves the equation, yet |u(t)| drifts away from Q.

In the L2-supercritical regime the standing wave is linearly unstable.  The
split-step scheme does not fix Q exactly; its O(dt^2) defect seeds the
unstable mode, which then grows like exp(lambda t) with lambda near 2.8 at
(N, s, p) = (2, 3/4, 3).  Halving dt lowers the curve by a factor of four
but leaves its slope unchanged, which is how the growth is told apart from
a numerical instability.
"""
import logging

import numpy as np

from fnls import evolve, make_grid, PhysParams, solve_ground_state
from fnls.spectral import norm_l2

logging.getLogger("fnls.spectral").setLevel(logging.ERROR)

params = PhysParams(2, 0.75, 3.0)
grid = make_grid(2, 256, 20.0)
Q = solve_ground_state(params, grid).profile
nq = norm_l2(Q, grid)

curves = {}
for dt in (2e-3, 1e-3):
    rows = []
    evolve(Q, grid, params, 4.0, dt, sample_every=int(round(0.5 / dt)),
           callback=lambda s: rows.append((s.time, norm_l2(np.abs(s.field) - Q, grid) / nq)))
    curves[dt] = np.array(rows)

print(f"{'t':>5} {'dt = 2e-3':>11} {'dt = 1e-3':>11}")
for (t, a), (_, b) in zip(curves[2e-3], curves[1e-3]):
    print(f"{t:5.1f} {a:11.2e} {b:11.2e}")
for dt, c in curves.items():
    late = c[(c[:, 0] >= 0.5) & (c[:, 1] < 1e-2)]
    print(f"dt = {dt:g}: fitted growth rate {np.polyfit(late[:, 0], np.log(late[:, 1]), 1)[0]:.2f}")
