import numpy as np
import pytest

from emergentqm.core import (
    ExperimentConfig,
    ModelConstants,
    NodeRegion,
    SlitPacket,
    build_channels,
    j_total,
    p_total,
    packet_amplitude,
    velocity_total,
)
from emergentqm.oracle import (
    GradientScheme,
    bohm_velocity,
    born_density,
    continuity_residual,
    psi_slit,
    psi_total,
    quantum_current,
)

UNIT = ModelConstants()


def test_modulus_matches_amplitude():
    rng = np.random.default_rng(3)
    slit = SlitPacket(0.7, -0.4, 0.45, 1.2)
    x = rng.uniform(-4, 4, 200)
    t = rng.uniform(0, 6, 200)
    np.testing.assert_allclose(np.abs(psi_slit(slit, UNIT, x, t)), packet_amplitude(slit, UNIT, x, t),
                               rtol=1e-13, atol=1e-300)


def test_initial_value_at_center():
    slit = SlitPacket(1.0, 0.0, 0.5, 0.8)
    psi = psi_slit(slit, UNIT, 1.0, 0.0)
    assert abs(psi) == pytest.approx((2 * np.pi * 0.25) ** -0.25, rel=1e-15)
    assert np.angle(psi) == pytest.approx(0.8, abs=1e-15)


def test_closed_form_and_polar_agree():
    slit = SlitPacket(-0.5, 0.9, 0.6, 2.0)
    x = np.linspace(-5, 8, 301)
    for t in (0.0, 0.7, 3.0, 9.0):
        a = psi_slit(slit, UNIT, x, t)
        b = psi_slit(slit, UNIT, x, t, path="polar")
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12 * np.abs(a).max())


def test_psi_total_examples():
    one = ExperimentConfig((SlitPacket(0.2, 0.1, 0.5),), UNIT)
    x = np.linspace(-3, 3, 11)
    np.testing.assert_array_equal(psi_total(one, x, 1.0), psi_slit(one.slits[0], UNIT, x, 1.0))
    sym = ExperimentConfig.two_slit()
    R = packet_amplitude(sym.slits[0], UNIT, 0.0, 2.0)
    assert born_density(sym, 0.0, 2.0) == pytest.approx(4 * R * R, rel=1e-13)


def test_born_density_examples():
    cfg = ExperimentConfig.two_slit(chi=np.pi)
    assert born_density(cfg, 0.0, 1.5) == pytest.approx(0.0, abs=1e-30)
    one = ExperimentConfig((SlitPacket(0.0, 0.0, 0.5),), UNIT)
    t = 2.0
    sigma_t = 0.5 * np.sqrt(1 + (t / (2 * 0.25)) ** 2)
    assert born_density(one, 0.0, t) == pytest.approx((2 * np.pi * sigma_t**2) ** -0.5, rel=1e-14)


def test_density_and_current_match_channels():
    cfg = ExperimentConfig.two_slit(chi=0.3, velocity=0.5)
    X, T = np.meshgrid(np.linspace(-12, 12, 241), np.linspace(0, 6, 13))
    ch = build_channels(cfg, X, T)
    rho = born_density(cfg, X, T)
    np.testing.assert_allclose(p_total(ch), rho, rtol=0, atol=1e-13 * rho.max())
    cur = quantum_current(cfg, X, T)
    np.testing.assert_allclose(j_total(ch), cur, rtol=0, atol=1e-12 * np.abs(cur).max())


def test_single_packet_bohm_velocity():
    slit = SlitPacket(0.5, 0.8, 0.5)
    one = ExperimentConfig((slit,), UNIT)
    t = 1.7
    xi = 0.5 + 0.8 * t
    assert bohm_velocity(one, xi, t) == pytest.approx(0.8, rel=1e-14)
    x = np.linspace(xi - 2, xi + 2, 9)
    tau = t / (2 * 0.25)
    dsig_over_sig = (tau / (1 + tau * tau)) * (1 / (2 * 0.25))
    np.testing.assert_allclose(bohm_velocity(one, x, t), 0.8 + (x - xi) * dsig_over_sig, rtol=1e-13)


def test_current_is_density_times_velocity():
    cfg = ExperimentConfig.two_slit(chi=1.0)
    x = np.linspace(-6, 6, 61)
    np.testing.assert_allclose(quantum_current(cfg, x, 2.0),
                               born_density(cfg, x, 2.0) * bohm_velocity(cfg, x, 2.0), rtol=1e-12, atol=1e-15)
    one = ExperimentConfig((SlitPacket(0.0, 0.6, 0.5),), UNIT)
    R = packet_amplitude(one.slits[0], UNIT, x, 2.0)
    np.testing.assert_allclose(quantum_current(one, x, 2.0), R * R * bohm_velocity(one, x, 2.0), rtol=1e-12)


def test_bohm_velocity_equals_channel_velocity():
    cfg = ExperimentConfig.two_slit(chi=0.5)
    x = np.linspace(-8, 8, 161)
    np.testing.assert_allclose(velocity_total(build_channels(cfg, x, 3.0)), bohm_velocity(cfg, x, 3.0),
                               rtol=1e-10, atol=1e-12)


def test_central_difference_gradient_close_to_analytic():
    cfg = ExperimentConfig.two_slit()
    x = np.linspace(-5, 5, 21) + 0.013
    a = bohm_velocity(cfg, x, 1.0)
    b = bohm_velocity(cfg, x, 1.0, GradientScheme("central-difference", 1e-4))
    np.testing.assert_allclose(a, b, atol=1e-6)
    with pytest.raises(ValueError):
        GradientScheme("spline")


def test_bohm_velocity_node_guard():
    cfg = ExperimentConfig.two_slit(chi=np.pi)
    with pytest.raises(NodeRegion):
        bohm_velocity(cfg, 0.0, 1.0, eps_node=1e-12)


def test_continuity_second_order():
    cfg = ExperimentConfig.two_slit(chi=0.2)
    x = np.linspace(-5, 5, 11)
    r = [np.abs(continuity_residual(cfg, x, 2.0, h, h)).max() for h in (0.04, 0.02)]
    assert r[0] / r[1] == pytest.approx(4.0, abs=0.5)


def test_continuity_single_packet_and_incoherent():
    one = ExperimentConfig((SlitPacket(0.0, 0.0, 0.5),), UNIT)
    x = np.linspace(-2, 2, 21)
    assert np.abs(continuity_residual(one, x, 1.0, 1e-3, 1e-3)).max() <= 1e-6
    cfg = ExperimentConfig.two_slit(velocity=0.3)
    for src in ("oracle", "incoherent"):
        assert np.abs(continuity_residual(cfg, x, 1.0, 1e-3, 1e-3, source=src)).max() <= 1e-6
