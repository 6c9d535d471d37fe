"""Who detects first?  Two ways of looking at a symmetric EPR setup.

A source halfway between two detectors emits two photons.  In the
apparatus rest frame both are detected at t = 4.  Boosting only the two
detection events into a moving frame gives an ordering that depends on
the frame.  Boosting the whole apparatus (source, detectors and the
emission) and asking about its own rest frame always gives simultaneity.
"""
from emergentqm.relativity import Apparatus, Boost, naive_ordering, whole_apparatus_ordering

app = Apparatus()
print(f"{'beta':>6} {'naive ordering':>16} {'dt_naive':>10} {'whole apparatus':>17}")
for i in range(-4, 5):
    b = Boost(0.2 * i)
    nav = naive_ordering(app, b)
    whole = whole_apparatus_ordering(app, b)
    print(f"{b.beta:6.1f} {nav.ordering.value:>16} {nav.delta_t:10.4f} {whole.ordering.value:>17}")
