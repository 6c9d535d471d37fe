"""Self-validation suite: the model's invariants checked against the oracle.

Every check is deterministic given the run config and seed, and reports
numbers only (no timings), so two runs produce identical summaries.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .core import (
    NODE_RTOL,
    ExperimentConfig,
    ModelConstants,
    SlitPacket,
    build_channels,
    channels_from_slit_fields,
    j_total,
    p_total,
    slit_pair_arguments,
    two_slit_velocity,
    velocity_total,
)
from .dynamics import (
    EmergentFlow,
    EnsembleSpec,
    IntegratorSpec,
    acceleration_reference,
    acceleration_total,
    binned_density_masses,
    integrate_many,
    run_ensemble,
    sample_initial_positions,
)
from .nosignal import no_signaling_verdict
from .oracle import GradientScheme, bohm_velocity, born_density, continuity_residual, quantum_current, wave_sample
from .relativity import (
    Apparatus,
    Boost,
    Event,
    Ordering,
    boost_event,
    interval,
    naive_ordering,
    whole_apparatus_ordering,
)


def _check(name, passed, **metrics):
    return {"name": name, "pass": bool(passed), **metrics}


def _grid(config: ExperimentConfig, t_min=0.0, t_max=10.0, nx=400, nt=50):
    x = np.linspace(config.x_min, config.x_max, nx)
    t = np.linspace(t_min, t_max, nt)
    return np.meshgrid(x, t)


def _guarded(config, X, T):
    """Mask of grid points above the per-time node guard (grid max of P_tot)."""
    p = born_density(config, X, T)
    eps = NODE_RTOL * p.max(axis=1, keepdims=True)
    return p > eps


# ---------------------------------------------------------------- model checks

def check_guidance(config: ExperimentConfig, tol=1e-9, fd_tol=1e-4, t_max=10.0):
    X, T = _grid(config, 0.0, t_max)
    keep = _guarded(config, X, T)
    x, t = X[keep], T[keep]
    v = velocity_total(build_channels(config, x, t))
    vb = bohm_velocity(config, x, t)
    dev = float(np.max(np.abs(v - vb) / (np.abs(vb) + 1.0)))
    vfd = bohm_velocity(config, x, t, GradientScheme("central-difference", 1e-4))
    dev_fd = float(np.max(np.abs(v - vfd) / (np.abs(vfd) + 1.0)))
    return _check("guidance_equivalence", dev <= tol and dev_fd <= fd_tol,
                  max_rel_dev=dev, tolerance=tol, max_rel_dev_central_difference=dev_fd,
                  fd_tolerance=fd_tol, points=int(keep.sum()), excluded=int((~keep).sum()))


def _extended(*arrays):
    return [np.asarray(a, dtype=np.longdouble) for a in arrays]


def check_reduction(config: ExperimentConfig, seed: int, draws=10_000, tol=1e-12, t_max=10.0):
    """Channel sum against the closed two-slit velocity, random inputs and physical grid.

    The closed form is evaluated in extended precision: near a node its
    intensity R1^2 + R2^2 + 2 R1 R2 cos(phi) cancels, and in double precision
    that rounding alone exceeds the tolerance.  Deviations are measured as
    |dv| / (|v| + 1) so that draws with v close to 0 stay meaningful.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    R = rng.uniform(0.01, 1.0, (2, draws))
    theta = rng.uniform(0.0, 2 * np.pi, (2, draws))
    vv = rng.uniform(-5.0, 5.0, (2, draws))
    uu = rng.uniform(-5.0, 5.0, (2, draws))
    v6 = velocity_total(channels_from_slit_fields(R, theta, vv, uu))
    R, theta, vv, uu = _extended(R, theta, vv, uu)
    v7 = two_slit_velocity(R[0], R[1], vv[0], vv[1], uu[0], uu[1], theta[1] - theta[0])
    rand_dev = float(np.max(np.abs(v6 - v7) / (np.abs(v7) + 1.0)))
    v7_double = two_slit_velocity(*(a.astype(float) for a in (R[0], R[1], vv[0], vv[1], uu[0], uu[1])),
                                  (theta[1] - theta[0]).astype(float))
    double_dev = float(np.max(np.abs(v6 - v7_double) / (np.abs(v7_double) + 1.0)))

    X, T = _grid(config, 0.0, t_max)
    keep = _guarded(config, X, T)
    x, t = X[keep], T[keep]
    grid_v6 = velocity_total(build_channels(config, x, t))
    grid_v7 = two_slit_velocity(*_extended(*slit_pair_arguments(config, x, t)))
    grid_dev = float(np.max(np.abs(grid_v6 - grid_v7) / (np.abs(grid_v7) + 1.0)))
    return _check("two_slit_reduction", rand_dev <= tol and grid_dev <= tol,
                  random_max_rel_dev=rand_dev, grid_max_rel_dev=grid_dev, tolerance=tol,
                  random_max_rel_dev_double_reference=double_dev, draws=draws)


def check_identities(config: ExperimentConfig, j_tol=1e-9, p_tol=1e-12, t_max=10.0):
    X, T = _grid(config, 0.0, t_max)
    ch = build_channels(config, X, T)
    P = p_total(ch)
    J = j_total(ch)
    rho = born_density(config, X, T)
    cur = quantum_current(config, X, T)
    dj = float(np.max(np.abs(J - cur)) / np.max(np.abs(cur)))
    dp = float(np.max(np.abs(P - rho)) / np.max(P))
    return _check("current_intensity_identities", dj <= j_tol and dp <= p_tol,
                  current_rel_dev=dj, current_tolerance=j_tol,
                  intensity_rel_dev=dp, intensity_tolerance=p_tol)


def check_continuity(config: ExperimentConfig, t=2.0, steps=(0.08, 0.04, 0.02, 0.01)):
    """Residual of dP/dt + dJ/dx must fall by 4 (+-0.5) per step halving."""
    x = np.linspace(-6.0, 6.0, 13)
    res = [float(np.max(np.abs(continuity_residual(config, x, t, h, h)))) for h in steps]
    ratios = [res[i] / res[i + 1] for i in range(len(res) - 1)]
    ok = all(abs(r - 4.0) <= 0.5 for r in ratios)
    return _check("continuity_second_order", ok, steps=list(steps), residuals=res, ratios=ratios)


def generic_node_config() -> ExperimentConfig:
    """Two unequal packets in antiphase; their superposition has an isolated node."""
    return ExperimentConfig((SlitPacket(-2.5, 0.0, 0.5, 0.0), SlitPacket(2.5, 0.0, 0.55, math.pi)),
                            ModelConstants())


def find_node(config: ExperimentConfig, guess=(0.0, 2.56), iters=50):
    """Newton iteration on (Re psi, Im psi) = 0 over (x, t)."""
    def F(z):
        psi = wave_sample(config, z[0], z[1]).psi
        return np.array([psi.real, psi.imag], dtype=float).ravel()

    z = np.array(guess, dtype=float)
    h = 1e-7
    for _ in range(iters):
        f = F(z)
        jac = np.empty((2, 2))
        for k in range(2):
            dz = np.zeros(2)
            dz[k] = h
            jac[:, k] = (F(z + dz) - F(z - dz)) / (2 * h)
        dz = np.linalg.solve(jac, f)
        z = z - dz
        if np.max(np.abs(dz)) < 1e-14:
            break
    return float(z[0]), float(z[1]), float(np.max(np.abs(F(z))))


def check_acceleration(config: ExperimentConfig, steps=(1e-2, 5e-3, 2.5e-3), approach=10):
    # second-order agreement off nodes
    X, T = np.meshgrid(np.linspace(-6.0, 6.0, 25), np.array([1.0, 2.0, 3.0]))
    p = p_total(build_channels(config, X, T))
    keep = p > 1e-3 * p.max()
    x, t = X[keep], T[keep]
    diffs = []
    for h in steps:
        a = acceleration_total(config, x, t, h, h).a_tot
        b = acceleration_reference(config, x, t, h)
        diffs.append(float(np.max(np.abs(a - b))))
    ratios = [diffs[i] / diffs[i + 1] for i in range(len(diffs) - 1)]
    second_order = all(abs(r - 4.0) <= 1.0 for r in ratios)

    # approach to an isolated node
    node_cfg = generic_node_config()
    xn, tn, resid = find_node(node_cfg)
    deltas = 0.2 * 0.5 ** np.arange(approach)
    mags = []
    for d in deltas:
        h = d * 1e-2
        a = acceleration_total(node_cfg, xn + d, tn, h, h, eps_node=0.0).a_tot
        mags.append(float(abs(a)))
    increasing = all(mags[i + 1] > mags[i] for i in range(len(mags) - 1))
    return _check("acceleration_consistency", second_order and increasing,
                  steps=list(steps), max_abs_diff=diffs, ratios=ratios,
                  node_x=xn, node_t=tn, node_residual=resid,
                  approach_offsets=deltas.tolist(), approach_abs_a=mags,
                  strictly_increasing=increasing)


def dilation_law(slit: SlitPacket, c: ModelConstants, x0, t):
    tau = c.hbar * t / (2.0 * c.mass * slit.initial_width ** 2)
    return slit.center + slit.group_velocity * t + (x0 - slit.center) * np.sqrt(1.0 + tau * tau)


def check_trajectories(config: ExperimentConfig, seed: int, n_order=100, n_ensemble=10_000,
                       t_order=10.0, t_ensemble=2.0, bins=60, dt=1e-3,
                       dilation_tol=1e-6, l1_tol=0.02):
    # non-crossing
    starts = sample_initial_positions(config, 0.0, EnsembleSpec(n_order, seed, "stratified"))
    starts = np.sort(starts)
    flow = EmergentFlow(config)
    trajs = integrate_many(flow, starts, IntegratorSpec(dt, 0.0, t_order, 100))
    finished = [tr for tr in trajs if not tr.terminated_early]
    xs = np.array([tr.x for tr in finished])
    gaps = np.diff(xs, axis=0)
    min_gap = float(gaps.min()) if gaps.size else float("nan")
    ordered = bool(gaps.size and np.all(gaps > 0))

    # single packet against the closed form
    c = config.constants
    slit = SlitPacket(0.3, 0.7, 0.5, 0.0)
    single = ExperimentConfig((slit,), c, -30.0, 30.0)
    x0 = np.linspace(-1.0, 1.6, 7)
    spec = IntegratorSpec(dt, 0.0, 5.0, 1)
    runs = integrate_many(EmergentFlow(single), x0, spec)
    dil = max(float(np.max(np.abs(tr.x - dilation_law(slit, c, x, tr.t)))) for tr, x in zip(runs, x0))

    # ensemble transport
    espec = EnsembleSpec(n_ensemble, seed, "stratified", bins=bins)
    res = run_ensemble(config, espec, IntegratorSpec(dt, 0.0, t_ensemble, 1000))
    ref = binned_density_masses(config, t_ensemble, res.histogram.edges)
    l1 = float(np.abs(res.histogram.masses() - ref).sum())
    ok = ordered and dil <= dilation_tol and l1 <= l1_tol
    return _check("trajectory_properties", ok,
                  ordered=ordered, min_gap=min_gap, ordered_count=len(finished),
                  terminated=n_order - len(finished),
                  dilation_max_abs_dev=dil, dilation_tolerance=dilation_tol,
                  ensemble_N=n_ensemble, ensemble_t_end=t_ensemble, ensemble_bins=bins,
                  ensemble_l1=l1, l1_tolerance=l1_tol,
                  ensemble_terminated=int(res.terminated.sum()))


def fringe_spacing(config: ExperimentConfig, t: float, expected: float, points=48001):
    """Mean spacing of the intensity maxima within 2.5 fringes of the centre."""
    x = np.linspace(-2.4 * expected, 2.4 * expected, points)
    p = born_density(config, x, t)
    i = np.flatnonzero((p[1:-1] > p[:-2]) & (p[1:-1] >= p[2:])) + 1
    a, b, c = p[i - 1], p[i], p[i + 1]
    xm = x[i] + 0.5 * (x[1] - x[0]) * (a - c) / (a - 2 * b + c)
    return float(np.mean(np.diff(xm))), xm


def check_fringes(separation=5.0, sigma0=0.1, t=20.0, tol=0.02):
    config = ExperimentConfig.two_slit(separation=separation, sigma0=sigma0, x_min=-200, x_max=200)
    c = config.constants
    expected = 2 * math.pi * c.hbar * t / (c.mass * separation)
    spacing, maxima = fringe_spacing(config, t, expected)
    rel = spacing / expected - 1.0
    return _check("far_field_fringes", abs(rel) <= tol and len(maxima) >= 3,
                  measured_spacing=spacing, expected_spacing=expected, rel_error=rel,
                  tolerance=tol, maxima=maxima.tolist(), sigma0=sigma0, t=t)


def check_relativity(app: Apparatus, betas, seed: int, n_random=100):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(8,)))
    worst = 0.0
    for _ in range(n_random):
        b = Boost(rng.uniform(-0.99, 0.99))
        e1 = Event(*rng.uniform(-10, 10, 2))
        e2 = Event(*rng.uniform(-10, 10, 2))
        s = interval(e1, e2)
        s2 = interval(boost_event(e1, b), boost_event(e2, b))
        worst = max(worst, abs(s2 - s) / max(1.0, abs(s)))
    worked = boost_event(Event(5.0, 3.0), Boost(0.6))
    worked_err = max(abs(worked.t - 4.0), abs(worked.x - 0.0))

    sym = replace(app, rest_boost=Boost(0.0))
    if not math.isclose(sym.source.x - sym.detector_left, sym.detector_right - sym.source.x):
        mid = 0.5 * (app.detector_left + app.detector_right)
        sym = Apparatus(Event(app.source.t, mid), app.detector_left, app.detector_right)
    signs = []
    sign_ok = True
    whole_ok = True
    naive_kinds = set()
    for beta in betas:
        b = Boost(float(beta))
        nav = naive_ordering(sym, b)
        whole = whole_apparatus_ordering(sym, b)
        expected = int(np.sign(beta))
        signs.append(nav.ordering.sign)
        sign_ok &= nav.ordering.sign == expected
        whole_ok &= whole.ordering is Ordering.SIMULTANEOUS
        naive_kinds.add(nav.ordering)
    contrast = len(naive_kinds) > 1
    ok = worst <= 1e-10 and worked_err <= 1e-12 and sign_ok and whole_ok and contrast
    return _check("relativity", ok,
                  interval_max_rel_dev=worst, worked_boost=[worked.t, worked.x],
                  worked_boost_error=worked_err, betas=[float(b) for b in betas],
                  naive_signs=signs, sign_matches_beta=bool(sign_ok),
                  whole_apparatus_simultaneous=bool(whole_ok),
                  naive_frame_dependent=bool(contrast))


def check_nosignaling(config: ExperimentConfig, runs: int, seed: int, threshold=0.02,
                      chi=0.0, t=10.0, bins=32, contrast=0.3):
    verdict, _, _ = no_signaling_verdict(config, runs, seed, threshold, chi, t, bins)
    d = verdict.to_dict()
    ok = verdict.passed and verdict.fixed_vs_incoherent >= contrast
    return _check("no_signaling", ok, verdict=d, fringe_contrast_min=contrast)


# ---------------------------------------------------------------- suite

def validation_suite(rc) -> dict:
    """Run every check for a parsed RunConfig; returns the JSON-ready summary."""
    exp = rc.experiment
    if exp.n != 2:
        raise ValueError("the validation suite needs a two-slit configuration")
    seed = rc.seed
    checks = [
        check_guidance(exp),
        check_reduction(exp, seed),
        check_identities(exp),
        check_continuity(exp),
        check_acceleration(exp),
        check_trajectories(exp, seed),
        check_fringes(),
        check_relativity(rc.apparatus, rc.betas, seed),
        check_nosignaling(exp, rc.intervention_runs, seed, rc.intervention_threshold,
                          rc.intervention.chi, rc.intervention_t, rc.intervention_bins),
    ]
    return {"seed": seed, "pass": all(c["pass"] for c in checks),
            "checks": {c["name"]: c for c in checks}}
