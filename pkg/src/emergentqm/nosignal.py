"""Monte Carlo check that an uncontrollable relative phase carries no signal.

Each run imposes a relative phase chi on slit 2 and records one arrival
position drawn from the coherent screen pattern for that chi.  A fixed chi
reproduces the fringes, so a sender who controlled chi could steer the
pattern.  A chi that is uniformly random per run averages the cross term
away and leaves the incoherent sum R1^2 + R2^2.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import ExperimentConfig, packet_amplitude
from .oracle import psi_slit

BLOCK_SIZE = 1024
DEFAULT_BINS = 32


@dataclass(frozen=True)
class InterventionSpec:
    mode: str = "random"
    chi: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("fixed", "random"):
            raise ValueError(f"unknown intervention mode {self.mode!r}")
        if not np.isfinite(self.chi):
            raise ValueError("chi must be finite")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ScreenDistribution:
    edges: np.ndarray
    masses: np.ndarray
    runs: int = 0

    def __post_init__(self):
        if len(self.edges) != len(self.masses) + 1:
            raise ValueError("need len(edges) == len(masses) + 1")
        if np.any(self.masses < 0):
            raise ValueError("bin masses must be non-negative")

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def screen_edges(config: ExperimentConfig, bins: int = DEFAULT_BINS) -> np.ndarray:
    return np.linspace(config.x_min, config.x_max, bins + 1)


def _require_two_slits(config: ExperimentConfig):
    if config.n != 2:
        raise ValueError("phase interventions need a two-slit configuration")


def _bin_integrals(config: ExperimentConfig, t: float, edges: np.ndarray, nodes: int = 24):
    """Per-bin integrals of R1^2 + R2^2 and of the cross amplitude 2 psi1* psi2.

    The phase offset of slit 2 is left out, so the coherent density for a
    relative phase chi is ``incoh + Re(exp(i chi) * cross)`` per bin.
    """
    _require_two_slits(config)
    g, w = np.polynomial.legendre.leggauss(nodes)
    lo, hi = edges[:-1, None], edges[1:, None]
    xs = 0.5 * (hi - lo) * g + 0.5 * (hi + lo)
    c = config.constants
    s1, s2 = config.slits[0], replace(config.slits[1], phase_offset=0.0)
    psi1 = psi_slit(s1, c, xs, t)
    psi2 = psi_slit(s2, c, xs, t)
    half = 0.5 * (hi[:, 0] - lo[:, 0])
    incoh = half * ((np.abs(psi1) ** 2 + np.abs(psi2) ** 2) * w).sum(axis=1)
    cross = half * ((2.0 * np.conj(psi1) * psi2) * w).sum(axis=1)
    return incoh, cross


def _normalise(mass: np.ndarray) -> np.ndarray:
    mass = np.clip(mass, 0.0, None)
    return mass / mass.sum()


def coherent_reference(config: ExperimentConfig, chi: float, t: float,
                       bins: int = DEFAULT_BINS) -> ScreenDistribution:
    """Binned, normalised P_tot(., t) with relative phase ``chi`` on slit 2."""
    edges = screen_edges(config, bins)
    incoh, cross = _bin_integrals(config, t, edges)
    return ScreenDistribution(edges, _normalise(incoh + np.real(np.exp(1j * chi) * cross)))


def incoherent_reference(config: ExperimentConfig, t: float,
                         bins: int = DEFAULT_BINS) -> ScreenDistribution:
    """Binned, normalised R1^2 + R2^2 at time t."""
    edges = screen_edges(config, bins)
    incoh, _ = _bin_integrals(config, t, edges)
    return ScreenDistribution(edges, _normalise(incoh))


def incoherent_density(config: ExperimentConfig, x, t):
    c = config.constants
    return sum(packet_amplitude(s, c, x, t) ** 2 for s in config.slits)


def run_variates(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniform pairs (u_chi, u_position) for runs ``start`` .. ``stop - 1``.

    Runs are grouped in blocks of BLOCK_SIZE; block b draws from its own
    SeedSequence child (seed, b), so run i's variates depend only on (seed, i).
    """
    out = np.empty((stop - start, 2))
    b0, b1 = start // BLOCK_SIZE, (stop - 1) // BLOCK_SIZE
    for b in range(b0, b1 + 1):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b,)))
        block = rng.random((BLOCK_SIZE, 2))
        lo = max(start, b * BLOCK_SIZE)
        hi = min(stop, (b + 1) * BLOCK_SIZE)
        out[lo - start:hi - start] = block[lo - b * BLOCK_SIZE:hi - b * BLOCK_SIZE]
    return out


def run_intervention_ensemble(config: ExperimentConfig, ispec: InterventionSpec, runs: int,
                              t: float, bins: int = DEFAULT_BINS,
                              chunk: int = 16 * BLOCK_SIZE) -> ScreenDistribution:
    """Empirical screen distribution over ``runs`` independent interventions."""
    if runs < 1:
        raise ValueError("need at least one run")
    edges = screen_edges(config, bins)
    incoh, cross = _bin_integrals(config, t, edges)
    counts = np.zeros(bins, dtype=np.int64)
    for start in range(0, runs, chunk):
        stop = min(runs, start + chunk)
        u = run_variates(ispec.seed, start, stop)
        if ispec.mode == "random":
            chi = 2.0 * np.pi * u[:, 0]
        else:
            chi = np.full(stop - start, ispec.chi)
        mass = np.clip(incoh + np.real(np.exp(1j * chi)[:, None] * cross), 0.0, None)
        cdf = np.cumsum(mass, axis=1)
        cdf /= cdf[:, -1:]
        which = (cdf < u[:, 1:2]).sum(axis=1)
        counts += np.bincount(np.minimum(which, bins - 1), minlength=bins)
    return ScreenDistribution(edges, counts / runs, runs)


def signaling_distance(a: ScreenDistribution, b: ScreenDistribution) -> float:
    """L1 distance between two distributions on the same bins."""
    if a.edges.shape != b.edges.shape or not np.array_equal(a.edges, b.edges):
        raise ValueError("distributions use different binning")
    return float(np.abs(a.masses - b.masses).sum())


@dataclass(frozen=True)
class NoSignalingVerdict:
    passed: bool
    threshold: float
    runs: int
    seed: int
    chi: float
    t: float
    random_vs_incoherent: float
    fixed_vs_coherent: float
    fixed_vs_incoherent: float
    coherent_vs_incoherent: float

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "threshold": self.threshold,
            "N": self.runs,
            "seed": self.seed,
            "chi": self.chi,
            "t": self.t,
            "distances": {
                "random_vs_incoherent": self.random_vs_incoherent,
                "fixed_vs_coherent": self.fixed_vs_coherent,
                "fixed_vs_incoherent": self.fixed_vs_incoherent,
                "coherent_vs_incoherent": self.coherent_vs_incoherent,
            },
        }


def no_signaling_verdict(config: ExperimentConfig, runs: int, seed: int, threshold: float = 0.02,
                         chi: float = 0.0, t: float = 10.0, bins: int = DEFAULT_BINS):
    """PASS when both empirical patterns sit within ``threshold`` of their references.

    Returns ``(verdict, random-phase empirical, incoherent reference)``.  The
    fixed-phase ensemble uses the seed child ``seed + 1`` so the two samples
    are independent.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    incoherent = incoherent_reference(config, t, bins)
    coherent = coherent_reference(config, chi, t, bins)
    rand = run_intervention_ensemble(config, InterventionSpec("random", 0.0, seed), runs, t, bins)
    fixed_seed = (seed + 1) % 2**64
    fixed = run_intervention_ensemble(config, InterventionSpec("fixed", chi, fixed_seed), runs, t, bins)
    d_rand = signaling_distance(rand, incoherent)
    d_fixed = signaling_distance(fixed, coherent)
    verdict = NoSignalingVerdict(
        passed=bool(d_rand <= threshold and d_fixed <= threshold),
        threshold=float(threshold), runs=int(runs), seed=int(seed), chi=float(chi), t=float(t),
        random_vs_incoherent=d_rand,
        fixed_vs_coherent=d_fixed,
        fixed_vs_incoherent=signaling_distance(fixed, incoherent),
        coherent_vs_incoherent=signaling_distance(coherent, incoherent),
    )
    return verdict, rand, incoherent
