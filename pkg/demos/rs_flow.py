"""Zeros of the tau function move as Ruijsenaars-Schneider particles.

Follows the roots of det(u - U0 + t1 Y0) and compares them with the canonical
integration of the first RS flow started from the quantum energies.

Run: python3 demos/rs_flow.py [output.csv]
"""
import sys

import numpy as np

from mastertau import rs
from mastertau.model import SpinChainSpec
from mastertau.spinchain import spectrum

spec = SpinChainSpec.random(2, 3, seed=1)
rec = spectrum(spec, with_tau=False)[3]
state = rs.RSPhase(np.array(spec.u), -rec.H)

times = np.linspace(0.0, 0.5, 11)
roots = rs.track_roots(rec, spec, times)
traj = rs.integrate(state, 1, times)
print("weight sector:", rec.m)
print(f"{'t1':>5}  {'max |integrator - roots|':>25}  {'tr Y drift':>11}  {'tr Y^2 drift':>12}")
Y0 = rs.lax(state).Y
for k, t in enumerate(times):
    Y = rs.lax(traj.state(k)).Y
    d1 = abs(np.trace(Y) - np.trace(Y0))
    d2 = abs(np.trace(Y @ Y) - np.trace(Y0 @ Y0))
    print(f"{t:5.2f}  {np.abs(traj.q[k] - roots[k]).max():25.1e}  {d1:11.1e}  {d2:12.1e}")

print("\nLax residuals:", {k: f"{v:.1e}" for k, v in rs.lax_residual(state, samples=5).items()})
if len(sys.argv) > 1:
    rs.write_trajectory_csv(sys.argv[1], times, roots)
    print("trajectory written to", sys.argv[1])
