"""Channel decomposition of the emergent velocity field for n-slit interference.

Each slit j carries a free Gaussian packet with amplitude R_j and action phase
S_j.  The packet contributes three velocity channels: a forward channel moving
with the phase-gradient velocity v_j, and a pair of osmotic channels moving with
+u_j and -u_j.  Every channel also carries a unit phasor in an abstract phase
plane; the dot product of two phasors is the cosine of their phase difference.
Total intensity, current and velocity follow by summing over all 3n channels.

All functions broadcast over numpy arrays of positions ``x`` and times ``t``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

NODE_RTOL = 1e-12


class NodeRegion(ArithmeticError):
    """Raised when a velocity is requested where the total intensity vanishes."""


@dataclass(frozen=True)
class ModelConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and np.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if not (self.mass > 0 and np.isfinite(self.mass)):
            raise ValueError(f"mass must be positive, got {self.mass}")

    @property
    def diffusion(self) -> float:
        return self.hbar / (2.0 * self.mass)


@dataclass(frozen=True)
class SlitPacket:
    """Gaussian beam leaving one slit.

    ``center`` and ``group_velocity`` are transverse; ``phase_offset`` is a
    constant phase (radians) added to the packet, used for phase interventions.
    """

    center: float
    group_velocity: float = 0.0
    initial_width: float = 0.5
    phase_offset: float = 0.0

    def __post_init__(self):
        if not (self.initial_width > 0 and np.isfinite(self.initial_width)):
            raise ValueError(f"initial_width must be positive, got {self.initial_width}")
        for name in ("center", "group_velocity", "phase_offset"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def wavenumber(self, c: ModelConstants) -> float:
        return c.mass * self.group_velocity / c.hbar


@dataclass(frozen=True)
class ExperimentConfig:
    slits: tuple[SlitPacket, ...]
    constants: ModelConstants = field(default_factory=ModelConstants)
    x_min: float = -30.0
    x_max: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "slits", tuple(self.slits))
        if len(self.slits) < 1:
            raise ValueError("at least one slit is required")
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be smaller than x_max")
        centers = [s.center for s in self.slits]
        if len(set(centers)) != len(centers):
            raise ValueError("slit centers must be pairwise distinct")

    @property
    def n(self) -> int:
        return len(self.slits)

    @classmethod
    def two_slit(cls, separation=5.0, sigma0=0.5, velocity=0.0, chi=0.0,
                 constants=None, x_min=-30.0, x_max=30.0) -> "ExperimentConfig":
        """Mirror-symmetric double slit, with ``chi`` applied to slit 2."""
        half = 0.5 * separation
        slits = (
            SlitPacket(-half, velocity, sigma0, 0.0),
            SlitPacket(half, -velocity, sigma0, chi),
        )
        return cls(slits, constants or ModelConstants(), x_min, x_max)

    def with_phase(self, index: int, chi: float) -> "ExperimentConfig":
        """Copy with the phase offset of slit ``index`` (0-based) set to ``chi``."""
        slits = list(self.slits)
        slits[index] = replace(slits[index], phase_offset=float(chi))
        return replace(self, slits=tuple(slits))


# ---------------------------------------------------------------- packets

def _spread(slit: SlitPacket, c: ModelConstants, t):
    """Dimensionless time tau, width sigma_t and center xi at time t."""
    t = np.asarray(t, dtype=float)
    tau = c.hbar * t / (2.0 * c.mass * slit.initial_width**2)
    sigma_t = slit.initial_width * np.sqrt(1.0 + tau * tau)
    xi = slit.center + slit.group_velocity * t
    return tau, sigma_t, xi


def packet_amplitude(slit: SlitPacket, c: ModelConstants, x, t):
    _, sigma_t, xi = _spread(slit, c, t)
    d = np.asarray(x, dtype=float) - xi
    return (2.0 * np.pi * sigma_t**2) ** -0.25 * np.exp(-d * d / (4.0 * sigma_t**2))


def _phase_angle(slit, c, x, t, tau, sigma_t, d):
    k = slit.wavenumber(c)
    return (
        d * d * tau / (4.0 * sigma_t**2)
        + k * (x - slit.center)
        - c.hbar * k * k * t / (2.0 * c.mass)
        - 0.5 * np.arctan(tau)
    )


def packet_phase(slit: SlitPacket, c: ModelConstants, x, t):
    """Action phase S of the freely evolving packet (unwrapped, continuous in x).

    Excludes the constant ``phase_offset``; the phase is zero at the packet
    center at t = 0.
    """
    tau, sigma_t, xi = _spread(slit, c, t)
    x = np.asarray(x, dtype=float)
    return c.hbar * _phase_angle(slit, c, x, np.asarray(t, dtype=float), tau, sigma_t, x - xi)


@dataclass(frozen=True)
class PacketEvaluation:
    amplitude: np.ndarray
    phase: np.ndarray
    forward_velocity: np.ndarray
    osmotic_velocity: np.ndarray


def packet_eval(slit: SlitPacket, c: ModelConstants, x, t) -> PacketEvaluation:
    """R, S and the convective / osmotic velocities from analytic derivatives."""
    tau, sigma_t, xi = _spread(slit, c, t)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    d = x - xi
    var4 = 4.0 * sigma_t**2
    scale = c.hbar / (2.0 * c.mass * sigma_t**2)
    u = scale * d
    return PacketEvaluation(
        amplitude=(0.5 * np.pi * var4) ** -0.25 * np.exp(-d * d / var4),
        phase=c.hbar * _phase_angle(slit, c, x, t, tau, sigma_t, d),
        forward_velocity=slit.group_velocity + tau * u,
        osmotic_velocity=u,
    )


# ---------------------------------------------------------------- channels

class ChannelKind(enum.IntEnum):
    FORWARD = 0
    OSMOTIC_PLUS = 1
    OSMOTIC_MINUS = 2


@dataclass(frozen=True)
class ChannelField:
    slit_index: int          # 1-based, as in the config keys
    kind: ChannelKind
    amplitude: np.ndarray
    phase_angle: np.ndarray
    velocity: np.ndarray
    phasor: tuple = field(repr=False, default=None)

    def __post_init__(self):
        if self.phasor is None:
            object.__setattr__(
                self, "phasor", (np.cos(self.phase_angle), np.sin(self.phase_angle)))


@dataclass(frozen=True)
class ChannelSet:
    """The 3n channels at a set of sample points, slit-major and kind-minor.

    Every array has shape ``(3n,) + sample_shape``.  ``cos``/``sin`` are the
    components of each channel's unit phasor; they are built from the slit
    phase directly so that osmotic partners are exact negatives of each other.
    """

    slit_index: np.ndarray
    kind: np.ndarray
    amplitude: np.ndarray
    phase_angle: np.ndarray
    velocity: np.ndarray
    cos: np.ndarray
    sin: np.ndarray

    def __len__(self) -> int:
        return len(self.kind)

    def __getitem__(self, i: int) -> ChannelField:
        return ChannelField(
            slit_index=int(self.slit_index[i]),
            kind=ChannelKind(int(self.kind[i])),
            amplitude=self.amplitude[i],
            phase_angle=self.phase_angle[i],
            velocity=self.velocity[i],
            phasor=(self.cos[i], self.sin[i]),
        )

    def __iter__(self) -> Iterator[ChannelField]:
        return (self[i] for i in range(len(self)))

    @property
    def n_slits(self) -> int:
        return len(self) // 3


def channels_from_slit_fields(R, theta, v, u) -> ChannelSet:
    """Assemble channels from per-slit arrays of shape ``(n,) + sample_shape``.

    ``theta`` is the full phase angle S_j/hbar + chi_j of each slit.
    """
    R, theta, v, u = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (R, theta, v, u)))
    n = R.shape[0]
    shape = (3 * n,) + R.shape[1:]
    c, s = np.cos(theta), np.sin(theta)
    half = 0.5 * R

    amp = np.empty(shape)
    ang = np.empty(shape)
    vel = np.empty(shape)
    cos = np.empty(shape)
    sin = np.empty(shape)
    amp[0::3], amp[1::3], amp[2::3] = R, half, half
    ang[0::3], ang[1::3], ang[2::3] = theta, theta + 0.5 * np.pi, theta - 0.5 * np.pi
    vel[0::3], vel[1::3], vel[2::3] = v, u, -u
    # e^{i(theta +- pi/2)} = +-i e^{i theta}
    cos[0::3], cos[1::3], cos[2::3] = c, -s, s
    sin[0::3], sin[1::3], sin[2::3] = s, c, -c

    return ChannelSet(
        slit_index=np.repeat(np.arange(1, n + 1), 3),
        kind=np.tile(np.array([0, 1, 2]), n),
        amplitude=amp, phase_angle=ang, velocity=vel, cos=cos, sin=sin,
    )


def slit_fields(config: ExperimentConfig, x, t):
    """Per-slit (R, theta, v, u) stacked along a leading slit axis."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    shape = np.broadcast_shapes(x.shape, t.shape)
    c = config.constants
    out = np.empty((4, config.n) + shape)
    for j, slit in enumerate(config.slits):
        e = packet_eval(slit, c, x, t)
        out[0, j] = e.amplitude
        out[1, j] = e.phase / c.hbar + slit.phase_offset
        out[2, j] = e.forward_velocity
        out[3, j] = e.osmotic_velocity
    return out[0], out[1], out[2], out[3]


def build_channels(config: ExperimentConfig, x, t) -> ChannelSet:
    return channels_from_slit_fields(*slit_fields(config, x, t))


def channel_cos(i: ChannelField, j: ChannelField):
    return i.phasor[0] * j.phasor[0] + i.phasor[1] * j.phasor[1]


def _phasor_sum(channels: ChannelSet):
    # Sum the osmotic pair first so it cancels exactly, then add the forward term.
    a, cs, sn = channels.amplitude, channels.cos, channels.sin
    ac, as_ = a * cs, a * sn
    C = ac[0::3] + (ac[1::3] + ac[2::3])
    S = as_[0::3] + (as_[1::3] + as_[2::3])
    return C.sum(axis=0), S.sum(axis=0)


def conditional_probabilities(channels: ChannelSet) -> np.ndarray:
    """P(w_i) = R_i * sum_j R_j cos(theta_i - theta_j) for every channel i.

    Uses the distributive form R_i * (phasor_i . sum_j R_j phasor_j).
    """
    C, S = _phasor_sum(channels)
    return channels.amplitude * (channels.cos * C + channels.sin * S)


def conditional_probability(i: int, channels: ChannelSet):
    return conditional_probabilities(channels)[i]


def p_total(channels: ChannelSet, probabilities=None):
    P = conditional_probabilities(channels) if probabilities is None else probabilities
    # forward channels only: osmotic partners cancel pairwise
    return P[0::3].sum(axis=0) + (P[1::3] + P[2::3]).sum(axis=0)


def j_total(channels: ChannelSet, probabilities=None):
    P = conditional_probabilities(channels) if probabilities is None else probabilities
    return (channels.velocity * P).sum(axis=0)


def velocity_from_slit_fields(R, theta, v, u):
    """(J_tot, P_tot) from per-slit fields without materialising the channels.

    Same channel sums as p_total / j_total, grouped per slit: the osmotic pair
    contributes u * P(u+) + (-u) * P(u-) = 2 u P(u+) to the current and nothing
    to the intensity.
    """
    c, s = np.cos(theta), np.sin(theta)
    C = (R * c).sum(axis=0)
    S = (R * s).sum(axis=0)
    p_fwd = R * (c * C + s * S)
    p_osm = R * (c * S - s * C)   # 2 P(u+)
    return (v * p_fwd + u * p_osm).sum(axis=0), p_fwd.sum(axis=0)


def node_threshold(p_tot_max: float) -> float:
    """Intensity below which the velocity field is treated as undefined."""
    return NODE_RTOL * float(p_tot_max)


def velocity_total(channels: ChannelSet, eps_node: float = 0.0):
    P = conditional_probabilities(channels)
    p = p_total(channels, P)
    if np.any(p <= eps_node):
        raise NodeRegion(f"total intensity at or below node guard {eps_node:g}")
    return j_total(channels, P) / p


def two_slit_velocity(R1, R2, v1, v2, u1, u2, phi, eps_node: float = 0.0):
    """Closed two-slit form of the emergent velocity.

    ``phi`` is the phase of slit 2 relative to slit 1, theta_2 - theta_1, with
    u the osmotic velocity -(hbar/m) dR/dx / R.
    """
    cphi, sphi = np.cos(phi), np.sin(phi)
    den = R1 * R1 + R2 * R2 + 2.0 * R1 * R2 * cphi
    if np.any(den <= eps_node):
        raise NodeRegion(f"two-slit intensity at or below node guard {eps_node:g}")
    num = (R1 * R1 * v1 + R2 * R2 * v2 + R1 * R2 * (v1 + v2) * cphi
           + R1 * R2 * (u1 - u2) * sphi)
    return num / den


@dataclass(frozen=True)
class FieldSample:
    """Assembled field; v_tot and kappa are NaN where ``node`` is set."""

    per_channel_P: np.ndarray
    P_tot: np.ndarray
    J_tot: np.ndarray
    v_tot: np.ndarray
    kappa: np.ndarray
    node: np.ndarray


def field_sample(config: ExperimentConfig, x, t, eps_node: float | None = None) -> FieldSample:
    """Evaluate the emergent field at (x, t).

    When ``eps_node`` is None the guard is taken relative to the largest
    intensity among the requested points.
    """
    ch = build_channels(config, x, t)
    P = conditional_probabilities(ch)
    p = p_total(ch, P)
    J = j_total(ch, P)
    if eps_node is None:
        eps_node = node_threshold(np.max(p)) if p.size else 0.0
    node = p <= eps_node
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(node, np.nan, J / np.where(node, 1.0, p))
    c = config.constants
    return FieldSample(P, p, J, v, c.mass * v / c.hbar, node)


def reference_grid(config: ExperimentConfig, points: int = 2001) -> np.ndarray:
    return np.linspace(config.x_min, config.x_max, points)


def grid_node_threshold(config: ExperimentConfig, t, points: int = 2001) -> float:
    """Node guard at time t: NODE_RTOL times the peak intensity on the domain grid."""
    _, p = velocity_from_slit_fields(*slit_fields(config, reference_grid(config, points), t))
    return node_threshold(p.max())


def relative_phase(channels: ChannelSet, i: int = 0, j: int = 1):
    """theta_j - theta_i for slits i, j (0-based), as used by two_slit_velocity."""
    return channels.phase_angle[3 * j] - channels.phase_angle[3 * i]


def slit_pair_arguments(config: ExperimentConfig, x, t):
    """Arguments (R1, R2, v1, v2, u1, u2, phi) of two_slit_velocity for a 2-slit config."""
    if config.n != 2:
        raise ValueError("two-slit configuration required")
    R, theta, v, u = slit_fields(config, x, t)
    return R[0], R[1], v[0], v[1], u[0], u[1], theta[1] - theta[0]

