"""Standard wavefunction reference for the channel model.

Builds each slit's free Gaussian directly as a complex closed form and derives
the Born density, the probability current and the Bohmian velocity from it.
Nothing here reuses the channel bookkeeping in :mod:`emergentqm.core`, so the
two can certify each other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ExperimentConfig,
    ModelConstants,
    NodeRegion,
    SlitPacket,
    build_channels,
    j_total,
    p_total,
    packet_amplitude,
    packet_phase,
)


@dataclass(frozen=True)
class WaveSample:
    psi: np.ndarray
    grad_psi: np.ndarray


@dataclass(frozen=True)
class GradientScheme:
    mode: str = "analytic"
    h: float = 1e-4

    def __post_init__(self):
        if self.mode not in ("analytic", "central-difference"):
            raise ValueError(f"unknown gradient mode {self.mode!r}")
        if not self.h > 0:
            raise ValueError("step h must be positive")


ANALYTIC = GradientScheme()


def _gaussian(slit: SlitPacket, c: ModelConstants, x, t):
    """Complex Gaussian psi and d(psi)/dx from the free propagator solution."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    s0 = slit.initial_width
    k = slit.wavenumber(c)
    alpha = 1.0 + 1j * c.hbar * t / (2.0 * c.mass * s0 * s0)
    d = x - slit.center - slit.group_velocity * t
    expo = (-d * d / (4.0 * s0 * s0 * alpha)
            + 1j * (k * (x - slit.center) - c.hbar * k * k * t / (2.0 * c.mass)
                    + slit.phase_offset))
    psi = (2.0 * np.pi * s0 * s0) ** -0.25 / np.sqrt(alpha) * np.exp(expo)
    dlog = -d / (2.0 * s0 * s0 * alpha) + 1j * k
    return psi, psi * dlog


def psi_slit(slit: SlitPacket, c: ModelConstants, x, t, path: str = "closed-form"):
    """Wavefunction of one slit's packet.

    ``path="closed-form"`` evaluates the complex Gaussian; ``path="polar"``
    composes R * exp(iS/hbar) from the amplitude and phase formulas.
    """
    if path == "closed-form":
        return _gaussian(slit, c, x, t)[0]
    if path == "polar":
        R = packet_amplitude(slit, c, x, t)
        S = packet_phase(slit, c, x, t)
        return R * np.exp(1j * (S / c.hbar + slit.phase_offset))
    raise ValueError(f"unknown path {path!r}")


def wave_sample(config: ExperimentConfig, x, t, scheme: GradientScheme = ANALYTIC) -> WaveSample:
    x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    c = config.constants
    psi = np.zeros(x.shape, dtype=complex)
    grad = np.zeros(x.shape, dtype=complex)
    for slit in config.slits:
        p, g = _gaussian(slit, c, x, t)
        psi += p
        if scheme.mode == "analytic":
            grad += g
        else:
            h = scheme.h
            grad += (_gaussian(slit, c, x + h, t)[0] - _gaussian(slit, c, x - h, t)[0]) / (2 * h)
    return WaveSample(psi, grad)


def psi_total(config: ExperimentConfig, x, t):
    return wave_sample(config, x, t).psi


def born_density(config: ExperimentConfig, x, t):
    psi = psi_total(config, x, t)
    return psi.real**2 + psi.imag**2


def quantum_current(config: ExperimentConfig, x, t, scheme: GradientScheme = ANALYTIC):
    """J = Re{psi* (-i hbar d/dx) psi} / m."""
    w = wave_sample(config, x, t, scheme)
    c = config.constants
    return (c.hbar / c.mass) * np.imag(np.conj(w.psi) * w.grad_psi)


def bohm_velocity(config: ExperimentConfig, x, t, scheme: GradientScheme = ANALYTIC,
                  eps_node: float = 0.0):
    w = wave_sample(config, x, t, scheme)
    rho = w.psi.real**2 + w.psi.imag**2
    if np.any(rho <= eps_node):
        raise NodeRegion(f"|psi|^2 at or below node guard {eps_node:g}")
    c = config.constants
    return (c.hbar / c.mass) * np.imag(np.conj(w.psi) * w.grad_psi) / rho


def _incoherent(config: ExperimentConfig, x, t):
    rho = 0.0
    cur = 0.0
    c = config.constants
    for slit in config.slits:
        p, g = _gaussian(slit, c, x, t)
        rho = rho + np.abs(p) ** 2
        cur = cur + (c.hbar / c.mass) * np.imag(np.conj(p) * g)
    return rho, cur


def _fields(config: ExperimentConfig, x, t, source: str):
    if source == "channels":
        ch = build_channels(config, x, t)
        return p_total(ch), j_total(ch)
    if source == "oracle":
        return born_density(config, x, t), quantum_current(config, x, t)
    if source == "incoherent":
        return _incoherent(config, x, t)
    raise ValueError(f"unknown field source {source!r}")


def continuity_residual(config: ExperimentConfig, x, t, h_x: float, h_t: float,
                        source: str = "channels"):
    """Central-difference estimate of dP/dt + dJ/dx.

    ``source`` picks the density/current pair: ``"channels"`` (P_tot, J_tot of
    the channel model), ``"oracle"`` (|psi|^2 and the quantum current) or
    ``"incoherent"`` (sum of the single-packet densities and currents).
    """
    if not (h_x > 0 and h_t > 0):
        raise ValueError("steps must be positive")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    p_plus, _ = _fields(config, x, t + h_t, source)
    p_minus, _ = _fields(config, x, t - h_t, source)
    _, j_plus = _fields(config, x + h_x, t, source)
    _, j_minus = _fields(config, x - h_x, t, source)
    return (p_plus - p_minus) / (2 * h_t) + (j_plus - j_minus) / (2 * h_x)
