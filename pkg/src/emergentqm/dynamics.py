"""Streamlines of the emergent velocity field and the particle acceleration.

Trajectories are integrated with a fixed-step classical Runge-Kutta scheme and
are vectorised over ensemble members.  A member whose stage evaluation falls
below the node guard is frozen at its last position and flagged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ExperimentConfig,
    NodeRegion,
    build_channels,
    conditional_probabilities,
    grid_node_threshold,
    p_total,
    reference_grid,
    slit_fields,
    velocity_from_slit_fields,
)


@dataclass(frozen=True)
class IntegratorSpec:
    dt: float = 1e-3
    t_start: float = 0.0
    t_end: float = 1.0
    record_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    def step_times(self) -> np.ndarray:
        """Grid t_start + k dt, closed with t_end (the final step may be partial)."""
        n = max(1, math.ceil((self.t_end - self.t_start) / self.dt - 1e-9))
        times = self.t_start + self.dt * np.arange(n + 1)
        times[-1] = self.t_end
        return times


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    terminated_early: bool = False
    reason: str | None = None


class EmergentFlow:
    """Velocity field v_tot of a configuration with a per-time node guard.

    The guard at time t is NODE_RTOL times the largest P_tot over the domain
    grid of ``guard_points`` points; it is cached per time value.
    """

    def __init__(self, config: ExperimentConfig, guard_points: int = 2001):
        self.config = config
        self.guard_points = guard_points
        self._guard: dict[float, float] = {}

    def threshold(self, t: float) -> float:
        t = float(t)
        eps = self._guard.get(t)
        if eps is None:
            eps = grid_node_threshold(self.config, t, self.guard_points)
            self._guard[t] = eps
        return eps

    def velocity(self, x, t: float):
        """v_tot at positions x and scalar time t; NaN inside the node guard."""
        J, p = velocity_from_slit_fields(*slit_fields(self.config, x, t))
        guard = p <= self.threshold(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(guard, np.nan, J / np.where(guard, 1.0, p))

    def rk4(self, x, t: float, dt: float):
        """One RK4 step; entries whose stages hit the guard come back NaN."""
        k1 = self.velocity(x, t)
        k2 = self.velocity(x + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = self.velocity(x + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = self.velocity(x + dt * k3, t + dt)
        return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step(flow: EmergentFlow, x, t: float, dt: float):
    x_new = flow.rk4(np.asarray(x, dtype=float), t, dt)
    if np.any(np.isnan(x_new)):
        raise NodeRegion(f"RK4 stage entered the node guard near t={t:g}")
    return x_new


@dataclass
class _Integration:
    times: np.ndarray
    positions: np.ndarray          # (n_records, N)
    terminated: np.ndarray         # (N,) bool
    stop_time: np.ndarray          # (N,) time of the last valid position


def _integrate(flow: EmergentFlow, x0, spec: IntegratorSpec) -> _Integration:
    x = np.array(x0, dtype=float, ndmin=1)
    times = spec.step_times()
    keep = np.zeros(len(times), dtype=bool)
    keep[::spec.record_every] = True
    keep[-1] = True
    records = [x.copy()]
    alive = np.ones(x.shape, dtype=bool)
    stop_time = np.full(x.shape, times[-1])
    for k in range(1, len(times)):
        t0, t1 = times[k - 1], times[k]
        if alive.any():
            x_new = flow.rk4(x[alive], t0, t1 - t0)
            bad = np.isnan(x_new)
            idx = np.flatnonzero(alive)
            x[idx[~bad]] = x_new[~bad]
            stop_time[idx[bad]] = t0
            alive[idx[bad]] = False
        if keep[k]:
            records.append(x.copy())
    return _Integration(times[keep], np.array(records), ~alive, stop_time)


def _trajectory(run: _Integration, i: int) -> Trajectory:
    if not run.terminated[i]:
        return Trajectory(run.times, run.positions[:, i])
    n = np.searchsorted(run.times, run.stop_time[i], side="right")
    t = run.times[:n]
    return Trajectory(t, run.positions[:n, i], True,
                      f"node guard entered after t={run.stop_time[i]:.17g}")


def integrate_trajectory(flow: EmergentFlow, x0: float, spec: IntegratorSpec) -> Trajectory:
    return _trajectory(_integrate(flow, [x0], spec), 0)


def integrate_many(flow: EmergentFlow, x0, spec: IntegratorSpec) -> list[Trajectory]:
    run = _integrate(flow, x0, spec)
    return [_trajectory(run, i) for i in range(run.positions.shape[1])]


# ---------------------------------------------------------------- ensembles

@dataclass(frozen=True)
class EnsembleSpec:
    """Initial positions: explicit ``positions`` or ``count`` draws from P_tot.

    ``sampling="stratified"`` places one inverse-CDF draw in each of ``count``
    equal-probability strata; ``"iid"`` draws independent uniforms.
    """

    count: int = 1000
    seed: int = 0
    sampling: str = "stratified"
    positions: tuple[float, ...] | None = None
    bins: int = 60
    grid_points: int = 4001

    def __post_init__(self):
        if self.positions is None and self.count < 1:
            raise ValueError("count must be >= 1")
        if self.sampling not in ("stratified", "iid"):
            raise ValueError(f"unknown sampling {self.sampling!r}")
        if self.bins < 1:
            raise ValueError("bins must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class ScreenHistogram:
    edges: np.ndarray
    counts: np.ndarray

    def merge(self, other: "ScreenHistogram") -> "ScreenHistogram":
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("cannot merge histograms with different binning")
        return ScreenHistogram(self.edges, self.counts + other.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def masses(self) -> np.ndarray:
        return self.counts / max(self.total, 1)

    def density(self) -> np.ndarray:
        return self.masses() / np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


@dataclass
class EnsembleResult:
    initial: np.ndarray
    final: np.ndarray
    terminated: np.ndarray
    trajectories: list[Trajectory]
    histogram: ScreenHistogram
    seed: int = 0
    extra: dict = field(default_factory=dict)


def sample_initial_positions(config: ExperimentConfig, t: float, espec: EnsembleSpec) -> np.ndarray:
    """Inverse-CDF samples of P_tot(., t) on the domain grid, reproducible from the seed."""
    if espec.positions is not None:
        return np.array(espec.positions, dtype=float)
    xs = reference_grid(config, espec.grid_points)
    p = p_total(build_channels(config, xs, np.full_like(xs, t)))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(xs))])
    cdf /= cdf[-1]
    rng = np.random.default_rng(espec.seed)
    n = espec.count
    if espec.sampling == "stratified":
        q = (np.arange(n) + rng.random(n)) / n
    else:
        q = rng.random(n)
    return np.interp(q, cdf, xs)


def binned_density_masses(config: ExperimentConfig, t: float, edges: np.ndarray,
                          nodes: int = 16) -> np.ndarray:
    """Probability of each bin under P_tot(., t), normalised over the binned range."""
    g, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = edges[:-1, None], edges[1:, None]
    xs = 0.5 * (hi - lo) * g + 0.5 * (hi + lo)
    p = p_total(build_channels(config, xs, np.full_like(xs, t)))
    mass = 0.5 * (hi[:, 0] - lo[:, 0]) * (p * w).sum(axis=1)
    return mass / mass.sum()


def run_ensemble(config: ExperimentConfig, espec: EnsembleSpec, ispec: IntegratorSpec,
                 flow: EmergentFlow | None = None) -> EnsembleResult:
    flow = flow or EmergentFlow(config)
    x0 = sample_initial_positions(config, ispec.t_start, espec)
    run = _integrate(flow, x0, ispec)
    final = run.positions[-1]
    edges = np.linspace(config.x_min, config.x_max, espec.bins + 1)
    counts = np.histogram(final[~run.terminated], bins=edges)[0]
    trajs = [_trajectory(run, i) for i in range(len(x0))]
    return EnsembleResult(x0, final, run.terminated, trajs,
                          ScreenHistogram(edges, counts), espec.seed)


# ---------------------------------------------------------------- acceleration

@dataclass(frozen=True)
class AccelerationSample:
    a_tot: np.ndarray
    diverged: np.ndarray


def assemble_acceleration(P, w, dP, dw):
    """Quotient-rule time derivative of sum(w P) / sum(P) over the channel axis 0.

    ``dP`` and ``dw`` are the time derivatives of the per-channel densities
    and velocities.
    """
    P, w, dP, dw = (np.asarray(a, dtype=float) for a in (P, w, dP, dw))
    sP = P.sum(axis=0)
    sJ = (w * P).sum(axis=0)
    sdP = dP.sum(axis=0)
    inner = (P * dw + w * dP).sum(axis=0)
    return (inner * sP - sJ * sdP) / (sP * sP)


def _channel_PW(config, x, t):
    ch = build_channels(config, x, t)
    return conditional_probabilities(ch), ch.velocity


def acceleration_total(config: ExperimentConfig, x, t, h_x: float = 1e-4, h_t: float = 1e-4,
                       eps_node: float | None = None) -> AccelerationSample:
    """Acceleration from per-channel P(w_i), w_i and their material derivatives.

    d/dt = d/dt|_x + v_tot d/dx, each partial by central differences.  Points
    whose stencil touches the node guard are flagged ``diverged`` and get NaN.
    ``eps_node`` defaults to the domain-grid guard at each distinct time.
    """
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    P, w = _channel_PW(config, x, t)
    Ptp, wtp = _channel_PW(config, x, t + h_t)
    Ptm, wtm = _channel_PW(config, x, t - h_t)
    Pxp, wxp = _channel_PW(config, x + h_x, t)
    Pxm, wxm = _channel_PW(config, x - h_x, t)

    if eps_node is None:
        eps = _guard_for_times(config, t, h_t)
    else:
        eps = eps_node
    sums = [a.sum(axis=0) for a in (P, Ptp, Ptm, Pxp, Pxm)]
    diverged = np.zeros(x.shape, dtype=bool)
    for s in sums:
        diverged |= s <= eps

    with np.errstate(divide="ignore", invalid="ignore"):
        v = (w * P).sum(axis=0) / sums[0]
        dP = (Ptp - Ptm) / (2 * h_t) + v * (Pxp - Pxm) / (2 * h_x)
        dw = (wtp - wtm) / (2 * h_t) + v * (wxp - wxm) / (2 * h_x)
        a = assemble_acceleration(P, w, dP, dw)
    return AccelerationSample(np.where(diverged, np.nan, a), diverged)


def _guard_for_times(config, t, h_t):
    out = np.empty(t.shape)
    for tv in np.unique(t):
        eps = max(grid_node_threshold(config, tv + s) for s in (-h_t, 0.0, h_t))
        out[t == tv] = eps
    return out


def acceleration_reference(config: ExperimentConfig, x, t, h: float = 1e-4,
                           eps_node: float | None = None):
    """dv/dt + v dv/dx of v_tot by central differences; raises NodeRegion in the guard."""
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    eps = _guard_for_times(config, t, h) if eps_node is None else eps_node

    def vel(xx, tt):
        ch = build_channels(config, xx, tt)
        P = conditional_probabilities(ch)
        p = p_total(ch, P)
        if np.any(p <= eps):
            raise NodeRegion("finite-difference stencil entered the node guard")
        return (ch.velocity * P).sum(axis=0) / p

    v = vel(x, t)
    dv_dt = (vel(x, t + h) - vel(x, t - h)) / (2 * h)
    dv_dx = (vel(x + h, t) - vel(x - h, t)) / (2 * h)
    return dv_dt + v * dv_dx
