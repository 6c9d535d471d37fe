"""1+1 dimensional special relativity for EPR detection ordering (c = 1).

Two pipelines are provided on purpose.  The naive one boosts only the two
detection events and compares their new time coordinates.  The whole-apparatus
one boosts source, detectors and emission constraint together and asks about
simultaneity in the apparatus rest frame, which does not depend on the frame
the description is routed through.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SIMULTANEITY_TOL = 1e-12


@dataclass(frozen=True)
class Event:
    t: float
    x: float


@dataclass(frozen=True)
class Boost:
    beta: float

    def __post_init__(self):
        if not abs(self.beta) < 1.0:
            raise ValueError(f"boost speed must satisfy |beta| < 1, got {self.beta}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt((1.0 - self.beta) * (1.0 + self.beta))

    @property
    def rapidity(self) -> float:
        return math.atanh(self.beta)

    def inverse(self) -> "Boost":
        return Boost(-self.beta)

    def then(self, other: "Boost") -> "Boost":
        """Boost equivalent to applying ``self`` first and ``other`` second."""
        b1, b2 = self.beta, other.beta
        return Boost((b1 + b2) / (1.0 + b1 * b2))


def boost_event(e: Event, b: Boost) -> Event:
    g = b.gamma
    return Event(g * (e.t - b.beta * e.x), g * (e.x - b.beta * e.t))


def interval(e1: Event, e2: Event) -> float:
    """Signed interval (dt)^2 - (dx)^2; negative for spacelike separation."""
    dt = e2.t - e1.t
    dx = e2.x - e1.x
    return dt * dt - dx * dx


@dataclass(frozen=True)
class Apparatus:
    """Source and detectors at rest in the apparatus rest frame.

    ``source`` and the detector positions are rest-frame coordinates.
    ``rest_boost`` maps rest-frame coordinates onto the frame the apparatus is
    currently described in (zero when described at rest).
    """

    source: Event = Event(0.0, 0.0)
    detector_left: float = -4.0
    detector_right: float = 4.0
    rest_boost: Boost = field(default_factory=lambda: Boost(0.0))

    def __post_init__(self):
        if not self.detector_left < self.source.x < self.detector_right:
            raise ValueError("need detector_left < source.x < detector_right")
        if self.source.t < 0:
            raise ValueError("emission must happen at t0 >= 0 in the rest frame")

    def to_description(self, e: Event) -> Event:
        """Rest-frame event expressed in the description frame."""
        return boost_event(e, self.rest_boost)

    def to_rest(self, e: Event) -> Event:
        return boost_event(e, self.rest_boost.inverse())


@dataclass(frozen=True)
class DetectionPair:
    left: Event
    right: Event
    frame_beta: float = 0.0


def epr_detections(app: Apparatus) -> DetectionPair:
    """Detection events in the apparatus rest frame (photons move at +-1)."""
    s = app.source
    left = Event(s.t + (s.x - app.detector_left), app.detector_left)
    right = Event(s.t + (app.detector_right - s.x), app.detector_right)
    return DetectionPair(left, right, 0.0)


class Ordering(enum.Enum):
    LEFT_FIRST = "left_first"
    RIGHT_FIRST = "right_first"
    SIMULTANEOUS = "simultaneous"

    @property
    def sign(self) -> int:
        return {"right_first": 1, "left_first": -1, "simultaneous": 0}[self.value]


@dataclass(frozen=True)
class OrderingReport:
    ordering: Ordering
    delta_t: float          # t'_left - t'_right
    left: Event
    right: Event


def _classify(delta_t: float, tol: float) -> Ordering:
    if abs(delta_t) <= tol:
        return Ordering.SIMULTANEOUS
    return Ordering.RIGHT_FIRST if delta_t > 0 else Ordering.LEFT_FIRST


def ordering_in_frame(pair: DetectionPair, b: Boost, tol: float = SIMULTANEITY_TOL) -> OrderingReport:
    left = boost_event(pair.left, b)
    right = boost_event(pair.right, b)
    dt = left.t - right.t
    return OrderingReport(_classify(dt, tol), dt, left, right)


def co_transform_apparatus(app: Apparatus, b: Boost) -> Apparatus:
    """Describe the whole apparatus from a frame boosted by ``b``.

    The rest-frame data (source, detectors, emission time) travel with the
    apparatus; only the map from the new description frame to the rest frame
    changes.
    """
    return Apparatus(app.source, app.detector_left, app.detector_right,
                     app.rest_boost.then(b))


def rest_frame_detections(app: Apparatus) -> DetectionPair:
    """Detections routed through the description frame and back to the rest frame."""
    pair = epr_detections(app)
    left = app.to_rest(app.to_description(pair.left))
    right = app.to_rest(app.to_description(pair.right))
    return DetectionPair(left, right, 0.0)


def naive_ordering(app: Apparatus, b: Boost, tol: float = SIMULTANEITY_TOL) -> OrderingReport:
    """Boost only the detection events of the apparatus as described now."""
    pair = epr_detections(app)
    described = DetectionPair(app.to_description(pair.left), app.to_description(pair.right))
    return ordering_in_frame(described, b, tol)


def whole_apparatus_ordering(app: Apparatus, b: Boost, tol: float = SIMULTANEITY_TOL) -> OrderingReport:
    """Co-transform the apparatus and report ordering in its own rest frame."""
    moved = co_transform_apparatus(app, b)
    pair = rest_frame_detections(moved)
    dt = pair.left.t - pair.right.t
    return OrderingReport(_classify(dt, tol), dt, pair.left, pair.right)


@dataclass(frozen=True)
class SimultaneityRow:
    beta: float
    t_left: float
    t_right: float
    delta_t: float
    ordering: Ordering
    interval: float


def simultaneity_report(app: Apparatus, betas: Sequence[float],
                        tol: float = SIMULTANEITY_TOL) -> list[SimultaneityRow]:
    """Ordering of the rest-frame detection pair as seen from each boosted frame.

    ``interval`` is the invariant interval between the two detections.
    """
    pair = epr_detections(app)
    rows = []
    for beta in betas:
        rep = ordering_in_frame(pair, Boost(float(beta)), tol)
        rows.append(SimultaneityRow(float(beta), rep.left.t, rep.right.t, rep.delta_t,
                                    rep.ordering, interval(rep.left, rep.right)))
    return rows


def simultaneity_beta(pair: DetectionPair) -> float:
    """Frame velocity in which the two detections have equal time coordinates."""
    dt = pair.left.t - pair.right.t
    dx = pair.left.x - pair.right.x
    beta = dt / dx
    if not abs(beta) < 1:
        raise ValueError("detections are not spacelike separated")
    return beta


def random_boosts(rng: np.random.Generator, n: int, max_speed: float = 0.99) -> list[Boost]:
    return [Boost(b) for b in rng.uniform(-max_speed, max_speed, n)]
