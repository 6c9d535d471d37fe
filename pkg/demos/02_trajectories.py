"""Streamlines of the emergent velocity field behind a double slit.

A small ensemble is started from the initial intensity and carried by the
flow.  Paths never cross, none crosses the symmetry axis, and the final
positions pile up on the interference maxima.
"""
import numpy as np

from emergentqm import EnsembleSpec, ExperimentConfig, IntegratorSpec, run_ensemble
from emergentqm.dynamics import binned_density_masses

cfg = ExperimentConfig.two_slit(separation=5.0, sigma0=0.5, x_min=-30, x_max=30)
t_end = 6.0
res = run_ensemble(cfg, EnsembleSpec(2000, seed=1, bins=40), IntegratorSpec(0.005, 0.0, t_end, 200))

finals = np.array([tr.x[-1] for tr in res.trajectories])
starts = res.initial
print(f"{len(finals)} trajectories to t={t_end}; terminated at nodes: {int(res.terminated.sum())}")
print("order preserved:", bool(np.all(np.diff(finals[np.argsort(starts)]) > 0)))
print("axis crossings:", int(np.sum(np.sign(starts) != np.sign(finals))))

ref = binned_density_masses(cfg, t_end, res.histogram.edges)
emp = res.histogram.masses()
print(f"L1 distance to |psi|^2 at t={t_end}: {np.abs(emp - ref).sum():.4f}\n")
scale = 60 / max(emp.max(), ref.max())
for c, e, r in zip(res.histogram.centers, emp, ref):
    if abs(c) > 20:
        continue
    bar = "#" * int(round(e * scale))
    mark = int(round(r * scale))
    line = list(bar.ljust(mark + 1))
    line[mark] = "|"
    print(f"{c:7.1f} {''.join(line)}")
print("\n# = transported particles, | = Born density")
