"""
Scattering versus blowup on either side of the ground-state threshold.

Two runs from u0 = c Q.  Below threshold (c = 0.5) the solution disperses:
with an absorbing sponge the potential energy ||u||_4^4 decays and the
Strichartz-type accumulator saturates.  Above threshold (c = 1.5) the
kinetic term ||D^s u||^2 grows by 25x in well under one time unit and the
monitor halts the run.  Past the first focusing event the grid no longer
resolves the solution (the spectral-tail flag says so), so the halt time,
not the later record, is the meaningful output.

The sub-threshold run is shortened to T = 8 here (about a minute on one
core); the acceptance suite runs it to T = 20.
"""
import logging

from fnls import EvolutionOptions, Monitor, VirialConfig, detect_outcome, evolve, make_grid, PhysParams
from fnls import conservation_drift, solve_ground_state

logging.getLogger("fnls.spectral").setLevel(logging.ERROR)

params = PhysParams(2, 0.75, 3.0)
grid = make_grid(2, 256, 20.0)
ground = solve_ground_state(params, grid)
virial = VirialConfig.for_grid(grid, nodes=20)


def run(c, T, sponge, sample_every):
    mon = Monitor(grid, params, ground, virial, rate_every=10**9)
    traj = evolve(ground.multiple(c), grid, params, T, 1e-3, EvolutionOptions(sponge=sponge), mon, sample_every)
    return traj, mon.history


for c, T, sponge in ((0.5, 8.0, True), (1.5, 2.0, False)):
    traj, hist = run(c, T, sponge, 250 if sponge else 10)
    print(f"\nu0 = {c} Q, sponge {'on' if sponge else 'off'}: halted {traj.halt_reason.value} at t = {traj.state.time:.2f}")
    print(f"{'t':>6} {'mass':>9} {'||D^s u||^2':>12} {'||u||_4^4':>10} {'strichartz':>11} {'virial':>9}")
    for rec in hist[:: max(1, len(hist) // 12)] + [hist[-1]]:
        print(f"{rec.time:6.2f} {rec.mass:9.5f} {rec.hs_seminorm_sq:12.4f} {rec.lp1_norm:10.4f} "
              f"{rec.strichartz_accum:11.5f} {rec.virial:9.3f}")
    print("detector:", ", ".join(sorted(detect_outcome(hist, params, ground, overflow=False))))
    if sponge:
        print(f"mass absorbed by the sponge: {100 * conservation_drift(hist, sponge=True).mass_loss:.1f}%")
