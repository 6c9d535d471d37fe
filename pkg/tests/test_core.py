import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from emergentqm.core import (
    ChannelKind,
    ExperimentConfig,
    ModelConstants,
    NodeRegion,
    SlitPacket,
    build_channels,
    channel_cos,
    channels_from_slit_fields,
    conditional_probabilities,
    conditional_probability,
    field_sample,
    j_total,
    p_total,
    packet_amplitude,
    packet_eval,
    packet_phase,
    slit_fields,
    two_slit_velocity,
    velocity_from_slit_fields,
    velocity_total,
)

UNIT = ModelConstants()


def test_packet_amplitude_peak_at_t0():
    slit = SlitPacket(0.0, 0.0, 1.0)
    assert packet_amplitude(slit, UNIT, 0.0, 0.0) == pytest.approx((2 * np.pi) ** -0.25, rel=1e-15)
    assert packet_amplitude(slit, UNIT, 0.0, 0.0) == pytest.approx(0.63162, abs=1e-5)


def test_packet_amplitude_after_spreading():
    # tau = 1 at t = 2 for sigma0 = 1, so sigma_t = sqrt(2)
    slit = SlitPacket(1.5, 0.3, 1.0)
    xi = 1.5 + 0.3 * 2.0
    assert packet_amplitude(slit, UNIT, xi, 2.0) == pytest.approx((4 * np.pi) ** -0.25, rel=1e-14)


def test_packet_amplitude_tails():
    slit = SlitPacket(0.0, 0.0, 0.5)
    assert packet_amplitude(slit, UNIT, np.array([-1e3, 1e3]), 1.0).max() == 0.0


def test_initial_phase_gradient_is_group_velocity():
    slit = SlitPacket(0.4, 1.7, 0.6)
    x = np.linspace(-2, 2, 9)
    ev = packet_eval(slit, UNIT, x, 0.0)
    np.testing.assert_allclose(ev.forward_velocity, 1.7, rtol=0, atol=1e-15)
    h = 1e-5
    dS = (packet_phase(slit, UNIT, x + h, 0.0) - packet_phase(slit, UNIT, x - h, 0.0)) / (2 * h)
    np.testing.assert_allclose(dS, 1.7, atol=1e-8)


def test_far_field_phase_is_quadratic():
    slit = SlitPacket(0.0, 0.0, 0.5)
    t = 400.0
    x = np.linspace(-20, 20, 41)
    S = packet_phase(slit, UNIT, x, t)
    S0 = packet_phase(slit, UNIT, 0.0, t)
    np.testing.assert_allclose(S - S0, x * x / (2 * t), rtol=1e-5)


def test_symmetric_phases_on_axis():
    cfg = ExperimentConfig.two_slit(velocity=0.4)
    a, b = cfg.slits
    assert packet_phase(a, UNIT, 0.0, 3.0) == pytest.approx(packet_phase(b, UNIT, 0.0, 3.0), abs=1e-14)


def test_osmotic_velocity_examples():
    slit = SlitPacket(0.0, 0.0, 1.0)
    assert packet_eval(slit, UNIT, 0.0, 0.0).osmotic_velocity == 0.0
    assert packet_eval(slit, UNIT, 1.0, 0.0).osmotic_velocity == pytest.approx(0.5, rel=1e-15)
    left = packet_eval(slit, UNIT, -1.0, 0.0)
    right = packet_eval(slit, UNIT, 1.0, 0.0)
    assert left.osmotic_velocity == -right.osmotic_velocity
    assert left.forward_velocity == right.forward_velocity


def test_osmotic_velocity_is_log_gradient():
    slit = SlitPacket(0.5, -0.2, 0.7)
    x = np.linspace(-2, 3, 11)
    t = 1.3
    h = 1e-5
    dlogR = (np.log(packet_amplitude(slit, UNIT, x + h, t))
             - np.log(packet_amplitude(slit, UNIT, x - h, t))) / (2 * h)
    u = packet_eval(slit, UNIT, x, t).osmotic_velocity
    np.testing.assert_allclose(u, -(UNIT.hbar / UNIT.mass) * dlogR, atol=1e-8)


def test_channel_counts_and_pairs():
    one = ExperimentConfig((SlitPacket(0.0),), UNIT)
    ch = build_channels(one, 0.7, 1.0)
    assert len(ch) == 3
    fwd, up, um = list(ch)
    assert [c.kind for c in (fwd, up, um)] == [ChannelKind.FORWARD, ChannelKind.OSMOTIC_PLUS,
                                               ChannelKind.OSMOTIC_MINUS]
    assert up.amplitude == um.amplitude == pytest.approx(fwd.amplitude / 2)
    assert up.velocity == -um.velocity
    assert len(build_channels(ExperimentConfig.two_slit(), 0.0, 1.0)) == 6


def test_remote_channels_vanish():
    ch = build_channels(ExperimentConfig.two_slit(), 1e3, 0.5)
    assert np.all(ch.amplitude == 0.0)


def test_channel_cos_examples():
    ch = build_channels(ExperimentConfig.two_slit(chi=0.9), 1.3, 2.0)
    assert channel_cos(ch[0], ch[0]) == pytest.approx(1.0, abs=1e-15)
    assert channel_cos(ch[0], ch[1]) == pytest.approx(0.0, abs=1e-15)
    assert channel_cos(ch[0], ch[2]) == pytest.approx(0.0, abs=1e-15)
    expected = math.cos(float(ch[0].phase_angle - ch[3].phase_angle))
    assert channel_cos(ch[0], ch[3]) == pytest.approx(expected, abs=1e-14)


def test_conditional_probability_examples():
    R1, R2 = 0.8, 0.5
    th = np.array([[0.3], [1.4]])
    ch = channels_from_slit_fields(np.array([[R1], [R2]]), th, np.zeros((2, 1)), np.ones((2, 1)))
    phi = th[1, 0] - th[0, 0]
    assert conditional_probability(1, ch)[0] == pytest.approx(R1 * R2 / 2 * math.sin(phi), abs=1e-15)
    assert conditional_probability(0, ch)[0] == pytest.approx(R1 * R1 + R1 * R2 * math.cos(phi), abs=1e-15)

    single = channels_from_slit_fields(np.array([[0.6]]), np.array([[2.0]]), np.ones((1, 1)), np.ones((1, 1)))
    P = conditional_probabilities(single)
    assert P[0, 0] == pytest.approx(0.36, abs=1e-15)
    assert P[1, 0] == 0.0 and P[2, 0] == 0.0


def test_axis_forward_probability():
    cfg = ExperimentConfig.two_slit(chi=0.7)
    ch = build_channels(cfg, 0.0, 2.0)
    R = float(ch.amplitude[0])
    phi = float(ch.phase_angle[3] - ch.phase_angle[0])
    assert conditional_probabilities(ch)[0] == pytest.approx(R * R * (1 + math.cos(phi)), rel=1e-13)


def _pair(R1, R2, phi, v=(0.0, 0.0), u=(0.0, 0.0)):
    return channels_from_slit_fields(np.array([R1, R2]), np.array([0.0, phi]),
                                     np.array(v, dtype=float), np.array(u, dtype=float))


def test_p_total_interference_extremes():
    assert p_total(_pair(0.7, 0.7, np.pi)) == pytest.approx(0.0, abs=1e-16)
    assert p_total(_pair(0.7, 0.7, 0.0)) == pytest.approx(4 * 0.49, rel=1e-15)


def test_j_total_examples():
    single = channels_from_slit_fields(np.array([0.6]), np.array([0.2]), np.array([1.5]), np.array([0.3]))
    assert j_total(single) == pytest.approx(0.36 * 1.5, rel=1e-15)
    R, v1, v2, u1, u2 = 0.6, 0.4, -1.1, 0.9, -0.3
    ch = _pair(R, R, np.pi / 2, (v1, v2), (u1, u2))
    assert j_total(ch) == pytest.approx(R * R * v1 + R * R * v2 + R * R * (u1 - u2), rel=1e-14)


def test_velocity_total_examples():
    one = ExperimentConfig((SlitPacket(0.3, 0.8, 0.6),), UNIT)
    x = np.linspace(-1, 2, 7)
    ev = packet_eval(one.slits[0], UNIT, x, 1.1)
    np.testing.assert_allclose(velocity_total(build_channels(one, x, 1.1)), ev.forward_velocity, rtol=1e-14)
    v1, v2, u1, u2 = 0.4, -1.1, 0.9, -0.3
    ch = _pair(0.5, 0.5, np.pi / 2, (v1, v2), (u1, u2))
    assert velocity_total(ch) == pytest.approx((v1 + v2 + u1 - u2) / 2, rel=1e-14)


def test_two_slit_velocity_limits():
    assert two_slit_velocity(0.7, 0.0, 1.3, -2.0, 0.4, 0.1, 1.0) == pytest.approx(1.3, rel=1e-15)
    for phi in (0.0, 1.0, 2.5, -2.0):
        assert two_slit_velocity(0.5, 0.5, 0.8, 0.8, 0.3, 0.3, phi) == pytest.approx(0.8, rel=1e-14)
    with pytest.raises(NodeRegion):
        two_slit_velocity(0.5, 0.5, 0.0, 0.0, 0.0, 0.0, np.pi, eps_node=1e-12)


def test_node_guard_raises():
    ch = _pair(0.7, 0.7, np.pi)
    with pytest.raises(NodeRegion):
        velocity_total(ch, eps_node=1e-12)


def test_phasor_form_equals_pairwise_sum():
    cfg = ExperimentConfig((SlitPacket(-3, 0.2, 0.5, 0.0), SlitPacket(0.5, -0.1, 0.7, 1.0),
                            SlitPacket(3, 0.0, 0.4, 2.0)), UNIT)
    x = np.linspace(-5, 5, 23)
    ch = build_channels(cfg, x, 1.7)
    P = conditional_probabilities(ch)
    chans = list(ch)
    for i, ci in enumerate(chans):
        direct = sum(ci.amplitude * cj.amplitude * channel_cos(ci, cj) for cj in chans)
        np.testing.assert_allclose(P[i], direct, rtol=1e-12, atol=1e-15)


def test_lean_velocity_path_matches_channels():
    cfg = ExperimentConfig.two_slit(chi=0.4, velocity=0.3)
    x = np.linspace(-8, 8, 101)
    J, p = velocity_from_slit_fields(*slit_fields(cfg, x, 2.5))
    ch = build_channels(cfg, x, 2.5)
    np.testing.assert_allclose(J, j_total(ch), rtol=1e-13, atol=1e-16)
    np.testing.assert_allclose(p, p_total(ch), rtol=1e-13, atol=1e-16)


def test_field_sample_flags_nodes():
    cfg = ExperimentConfig.two_slit(chi=np.pi)
    f = field_sample(cfg, np.array([0.0, 1.0]), 1.0)
    assert f.node[0] and not f.node[1]
    assert np.isnan(f.v_tot[0]) and np.isnan(f.kappa[0])
    assert f.kappa[1] == pytest.approx(f.v_tot[1] * UNIT.mass / UNIT.hbar)


def test_config_validation():
    with pytest.raises(ValueError):
        SlitPacket(0.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        ModelConstants(hbar=0.0)
    with pytest.raises(ValueError):
        ExperimentConfig((SlitPacket(0.0), SlitPacket(0.0)), UNIT)


amp = st.floats(0.01, 1.0)
ang = st.floats(0.0, 2 * np.pi)
vel = st.floats(-5.0, 5.0)


@settings(max_examples=200, deadline=None)
@given(amp, amp, ang, ang, vel, vel, vel, vel)
def test_osmotic_pairs_cancel_in_intensity(R1, R2, t1, t2, v1, v2, u1, u2):
    ch = channels_from_slit_fields(np.array([R1, R2]), np.array([t1, t2]),
                                   np.array([v1, v2]), np.array([u1, u2]))
    P = conditional_probabilities(ch)
    assert P[1] == -P[2] and P[4] == -P[5]
    psi = R1 * np.exp(1j * t1) + R2 * np.exp(1j * t2)
    assert p_total(ch, P) == pytest.approx(abs(psi) ** 2, rel=1e-9, abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(-6, 6), st.floats(0.0, 8.0), st.floats(-1.0, 1.0))
def test_mirror_parity(x, t, v):
    cfg = ExperimentConfig.two_slit(velocity=v)
    a = field_sample(cfg, np.array([x, -x]), t, eps_node=0.0)
    assert a.P_tot[0] == pytest.approx(a.P_tot[1], rel=1e-10, abs=1e-300)
    if a.P_tot[0] > 1e-12:
        assert a.v_tot[0] == pytest.approx(-a.v_tot[1], rel=1e-8, abs=1e-10)
