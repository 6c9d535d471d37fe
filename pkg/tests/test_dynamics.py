import numpy as np
import pytest

from emergentqm.core import ExperimentConfig, ModelConstants, NodeRegion, SlitPacket
from emergentqm.dynamics import (
    EmergentFlow,
    EnsembleSpec,
    IntegratorSpec,
    ScreenHistogram,
    acceleration_reference,
    acceleration_total,
    assemble_acceleration,
    integrate_many,
    integrate_trajectory,
    run_ensemble,
    sample_initial_positions,
    step,
)
from emergentqm.validation import dilation_law, find_node, generic_node_config

UNIT = ModelConstants()


def single(center=0.0, v=0.0, sigma=0.5):
    return ExperimentConfig((SlitPacket(center, v, sigma),), UNIT)


def test_step_at_rest_center():
    flow = EmergentFlow(single(0.3))
    assert step(flow, np.array([0.3]), 0.0, 0.01)[0] == pytest.approx(0.3, abs=1e-15)


def test_step_moving_center():
    flow = EmergentFlow(single(0.0, 1.2))
    assert step(flow, np.array([0.0]), 0.0, 0.01)[0] == pytest.approx(0.012, abs=1e-15)


def test_rk4_fourth_order():
    slit = SlitPacket(0.0, 0.5, 0.5)
    flow = EmergentFlow(ExperimentConfig((slit,), UNIT))
    errs = []
    for dt in (0.1, 0.05):
        tr = integrate_trajectory(flow, 0.8, IntegratorSpec(dt, 0.0, 2.0, 1))
        errs.append(abs(tr.x[-1] - dilation_law(slit, UNIT, 0.8, 2.0)))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.1)


def test_step_raises_in_node_guard():
    cfg = ExperimentConfig.two_slit(chi=np.pi)
    with pytest.raises(NodeRegion):
        step(EmergentFlow(cfg), np.array([0.0]), 1.0, 0.01)


def test_axis_symmetry_and_no_crossing():
    cfg = ExperimentConfig.two_slit()
    spec = IntegratorSpec(0.005, 0.0, 4.0, 10)
    on_axis, right = integrate_many(EmergentFlow(cfg), [0.0, 0.4], spec)
    assert np.all(on_axis.x == 0.0)
    assert np.all(right.x > 0)


def test_dilation_law():
    slit = SlitPacket(-0.4, 0.3, 0.6)
    flow = EmergentFlow(ExperimentConfig((slit,), UNIT))
    for x0 in (-1.5, 0.0, 1.1):
        tr = integrate_trajectory(flow, x0, IntegratorSpec(1e-3, 0.0, 3.0, 50))
        np.testing.assert_allclose(tr.x, dilation_law(slit, UNIT, x0, tr.t), atol=1e-6)


def test_integrator_spec_partial_last_step():
    times = IntegratorSpec(0.3, 0.0, 1.0).step_times()
    np.testing.assert_allclose(times, [0.0, 0.3, 0.6, 0.9, 1.0])
    with pytest.raises(ValueError):
        IntegratorSpec(0.1, 1.0, 1.0)


def test_trajectory_terminates_at_node():
    cfg = ExperimentConfig.two_slit(chi=np.pi)
    tr = integrate_trajectory(EmergentFlow(cfg), 0.0, IntegratorSpec(0.01, 0.5, 1.0))
    assert tr.terminated_early
    assert "node" in tr.reason
    assert len(tr.t) == 1


def test_single_explicit_position_matches_trajectory():
    cfg = ExperimentConfig.two_slit()
    ispec = IntegratorSpec(0.01, 0.0, 1.0, 10)
    res = run_ensemble(cfg, EnsembleSpec(positions=(1.7,)), ispec)
    tr = integrate_trajectory(EmergentFlow(cfg), 1.7, ispec)
    np.testing.assert_array_equal(res.trajectories[0].x, tr.x)


def test_ensemble_determinism():
    cfg = ExperimentConfig.two_slit()
    ispec = IntegratorSpec(0.01, 0.0, 1.0, 10)
    a = run_ensemble(cfg, EnsembleSpec(50, seed=9), ispec)
    b = run_ensemble(cfg, EnsembleSpec(50, seed=9), ispec)
    c = run_ensemble(cfg, EnsembleSpec(50, seed=10), ispec)
    assert a.final.tobytes() == b.final.tobytes()
    assert a.final.tobytes() != c.final.tobytes()


def test_stratified_samples_follow_density():
    cfg = ExperimentConfig.two_slit()
    x = sample_initial_positions(cfg, 0.0, EnsembleSpec(4000, seed=1))
    assert np.all(np.diff(x) > 0)
    assert abs(np.mean(x)) < 0.05
    assert np.std(x) == pytest.approx(np.sqrt(2.5**2 + 0.25), rel=0.01)


def test_histogram_merge():
    e = np.linspace(0, 1, 5)
    h = ScreenHistogram(e, np.array([1, 2, 3, 4])).merge(ScreenHistogram(e, np.array([1, 0, 0, 1])))
    np.testing.assert_array_equal(h.counts, [2, 2, 3, 5])
    assert h.masses().sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        h.merge(ScreenHistogram(np.linspace(0, 2, 5), np.zeros(4)))


def test_quotient_rule_assembly():
    # smooth synthetic channel data, time derivative taken numerically
    def channels(t):
        P = np.array([1.0 + 0.3 * np.sin(t), 0.5 * np.cos(2 * t) + 0.8, -0.2 * np.sin(3 * t)])
        w = np.array([np.cos(t), 2.0 + t * t, -1.0 + 0.5 * t])
        return P, w

    def dt_channels(t):
        dP = np.array([0.3 * np.cos(t), -np.sin(2 * t), -0.6 * np.cos(3 * t)])
        dw = np.array([-np.sin(t), 2 * t, 0.5])
        return dP, dw

    t0 = 0.7
    a = assemble_acceleration(*channels(t0), *dt_channels(t0))
    errs = []
    for h in (1e-2, 5e-3):
        vp = (lambda P, w: (w * P).sum() / P.sum())(*channels(t0 + h))
        vm = (lambda P, w: (w * P).sum() / P.sum())(*channels(t0 - h))
        errs.append(abs(a - (vp - vm) / (2 * h)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_acceleration_zero_at_resting_center():
    cfg = single(0.2)
    assert acceleration_total(cfg, 0.2, 1.0, 1e-3, 1e-3).a_tot == pytest.approx(0.0, abs=1e-9)
    assert acceleration_reference(cfg, 0.2, 1.0, 1e-3) == pytest.approx(0.0, abs=1e-9)


def test_acceleration_parity():
    cfg = ExperimentConfig.two_slit()
    x = np.array([0.8, 1.9, 3.1])
    a = acceleration_total(cfg, np.concatenate([x, -x]), 2.0, 1e-3, 1e-3).a_tot
    np.testing.assert_allclose(a[:3], -a[3:], rtol=1e-6)
    b = acceleration_reference(cfg, np.concatenate([x, -x]), 2.0, 1e-3)
    np.testing.assert_allclose(b[:3], -b[3:], rtol=1e-6)


def test_acceleration_agrees_with_reference():
    cfg = ExperimentConfig.two_slit(chi=0.6)
    rng = np.random.default_rng(5)
    x = rng.uniform(-4, 4, 20)
    t = rng.uniform(0.5, 3, 20)
    d = []
    for h in (1e-2, 5e-3):
        d.append(np.abs(acceleration_total(cfg, x, t, h, h).a_tot - acceleration_reference(cfg, x, t, h)).max())
    assert d[0] / d[1] == pytest.approx(4.0, abs=1.0)


def test_acceleration_grows_toward_node():
    cfg = generic_node_config()
    xn, tn, resid = find_node(cfg)
    assert resid < 1e-12
    mags = [abs(float(acceleration_total(cfg, xn + d, tn, d * 1e-2, d * 1e-2, eps_node=0.0).a_tot))
            for d in 0.2 * 0.5 ** np.arange(6)]
    assert all(b > a for a, b in zip(mags, mags[1:]))


def test_acceleration_flags_guard():
    cfg = ExperimentConfig.two_slit(chi=np.pi)
    s = acceleration_total(cfg, np.array([0.0, 1.0]), 1.0, 1e-3, 1e-3)
    assert s.diverged[0] and not s.diverged[1]
    assert np.isnan(s.a_tot[0])
    with pytest.raises(NodeRegion):
        acceleration_reference(cfg, 0.0, 1.0, 1e-3)
