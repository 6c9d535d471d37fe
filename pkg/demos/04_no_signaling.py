"""A phase you cannot control sends no message.

If a sender could fix the relative phase chi between the two slits, the
receiver's screen would show fringes in one place or another: a signal.
When chi is random from run to run, the fringes wash out to the incoherent
sum, whatever the sender does.
"""
import numpy as np

from emergentqm import ExperimentConfig
from emergentqm.nosignal import coherent_reference, no_signaling_verdict, signaling_distance

cfg = ExperimentConfig.two_slit()
t = 10.0
for chi in (0.0, np.pi / 2, np.pi):
    d = signaling_distance(coherent_reference(cfg, 0.0, t), coherent_reference(cfg, chi, t))
    print(f"fixed chi={chi:5.3f}: L1 from the chi=0 pattern = {d:.3f}")

for n in (1_000, 10_000, 100_000):
    v, _, _ = no_signaling_verdict(cfg, n, seed=2016)
    print(f"N={n:>7}: random-phase pattern vs incoherent sum L1 = {v.random_vs_incoherent:.4f}  "
          f"-> {'PASS' if v.passed else 'FAIL'}")
