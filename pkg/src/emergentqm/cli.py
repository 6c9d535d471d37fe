"""Command line front end.

    emergentqm <field|trajectories|screen|epr|nosignal|validate> --config PATH
               [--out DIR] [--seed N] [--format csv|json]

Exit status: 0 on success, 1 when a verdict or validation fails (artifacts are
kept) or a computation errors out (partial artifacts are removed), 2 on a
usage or configuration error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, parse_config
from .core import field_sample, grid_node_threshold
from .dynamics import (
    EmergentFlow,
    IntegratorSpec,
    acceleration_total,
    binned_density_masses,
    run_ensemble,
)
from .nosignal import (
    InterventionSpec,
    coherent_reference,
    no_signaling_verdict,
    run_intervention_ensemble,
)
from .output import Table, dumps_json, emit_output
from .relativity import Boost, interval, naive_ordering
from .validation import validation_suite

SUBCOMMANDS = ("field", "trajectories", "screen", "epr", "nosignal", "validate")

FIELD_COLUMNS = ("x", "t", "P_tot", "J_tot", "v_tot", "kappa", "a_tot", "node_flag")
TRAJECTORY_COLUMNS = ("traj_id", "t", "x", "terminated", "reason")
SCREEN_COLUMNS = ("bin_center", "density")
EPR_COLUMNS = ("beta", "t_left", "t_right", "delta_t", "ordering", "interval")
NOSIGNAL_COLUMNS = ("bin_center", "empirical", "reference", "abs_diff")


class Artifacts:
    """Collects output files; all of them are written together at the end."""

    def __init__(self, out: Path, fmt: str):
        self.out = out
        self.fmt = fmt
        self.files: dict[str, bytes] = {}

    def table(self, stem: str, table: Table):
        self.files[f"{stem}.{self.fmt}"] = emit_output(table, self.fmt)

    def json(self, name: str, payload):
        self.files[name] = dumps_json(payload)

    def write(self):
        """Write every file via a temporary name; on failure nothing is left behind."""
        self.out.mkdir(parents=True, exist_ok=True)
        done = []
        try:
            for name, data in self.files.items():
                tmp = self.out / (name + ".tmp")
                done.append(tmp)
                tmp.write_bytes(data)
            for name in self.files:
                os.replace(self.out / (name + ".tmp"), self.out / name)
                done.append(self.out / name)
        except BaseException:
            for path in done:
                path.unlink(missing_ok=True)
            raise
        return [self.out / n for n in self.files]


# ---------------------------------------------------------------- subcommands

def cmd_field(rc: RunConfig, art: Artifacts) -> bool:
    exp, g = rc.experiment, rc.grid
    xs = np.linspace(exp.x_min, exp.x_max, g.nx)
    ts = np.linspace(g.t_min, g.t_max, g.nt)
    rows = []
    for t in ts:
        f = field_sample(exp, xs, np.full_like(xs, t), grid_node_threshold(exp, t))
        a = acceleration_total(exp, xs, np.full_like(xs, t), g.h, g.h).a_tot
        a = np.where(f.node, np.nan, a)
        for i, x in enumerate(xs):
            rows.append((x, t, f.P_tot[i], f.J_tot[i], f.v_tot[i], f.kappa[i], a[i], bool(f.node[i])))
    art.table("field", Table(FIELD_COLUMNS, rows, rc.seed))
    return True


def cmd_trajectories(rc: RunConfig, art: Artifacts) -> bool:
    res = run_ensemble(rc.experiment, rc.ensemble, rc.integrator)
    rows = []
    for i, tr in enumerate(res.trajectories):
        reason = tr.reason or ""
        for t, x in zip(tr.t, tr.x):
            rows.append((i, t, x, tr.terminated_early, reason))
    art.table("trajectories", Table(TRAJECTORY_COLUMNS, rows, rc.seed))
    return True


def cmd_screen(rc: RunConfig, art: Artifacts) -> bool:
    res = run_ensemble(rc.experiment, rc.ensemble, rc.integrator)
    h = res.histogram
    rows = list(zip(h.centers, h.density()))
    art.table("screen", Table(SCREEN_COLUMNS, rows, rc.seed))
    return True


def cmd_epr(rc: RunConfig, art: Artifacts) -> bool:
    app = rc.apparatus
    rows = []
    for beta in rc.betas:
        rep = naive_ordering(app, Boost(beta))
        rows.append((beta, rep.left.t, rep.right.t, rep.delta_t, rep.ordering.value,
                     interval(rep.left, rep.right)))
    art.table("epr", Table(EPR_COLUMNS, rows, rc.seed))
    return True


def cmd_nosignal(rc: RunConfig, art: Artifacts) -> bool:
    exp = rc.experiment
    chi, t, bins = rc.intervention.chi, rc.intervention_t, rc.intervention_bins
    verdict, rand, incoherent = no_signaling_verdict(
        exp, rc.intervention_runs, rc.seed, rc.intervention_threshold, chi, t, bins)
    if rc.intervention.mode == "random":
        empirical, reference = rand, incoherent
    else:
        fixed_seed = (rc.seed + 1) % 2**64
        empirical = run_intervention_ensemble(exp, InterventionSpec("fixed", chi, fixed_seed),
                                              rc.intervention_runs, t, bins)
        reference = coherent_reference(exp, chi, t, bins)
    rows = [(c, e, r, abs(e - r)) for c, e, r in
            zip(reference.centers, empirical.masses, reference.masses)]
    art.table("nosignal", Table(NOSIGNAL_COLUMNS, rows, rc.seed))
    payload = verdict.to_dict()
    payload["mode"] = rc.intervention.mode
    if rc.trajectory_check:
        payload["trajectory_check"] = _trajectory_cross_check(rc)
    art.json("nosignal.json", payload)
    return verdict.passed


def _trajectory_cross_check(rc: RunConfig) -> dict:
    """Transport an ensemble with phase chi fixed and compare with the coherent bins."""
    exp = rc.experiment.with_phase(1, rc.intervention.chi)
    t = rc.intervention_t
    ispec = IntegratorSpec(rc.integrator.dt, 0.0, t, max(1, int(round(t / rc.integrator.dt))))
    espec = replace(rc.ensemble, bins=rc.intervention_bins)
    res = run_ensemble(exp, espec, ispec, EmergentFlow(exp))
    ref = binned_density_masses(exp, t, res.histogram.edges)
    return {"N": int(len(res.initial)), "l1_vs_coherent": float(np.abs(res.histogram.masses() - ref).sum()),
            "terminated": int(res.terminated.sum())}


def cmd_validate(rc: RunConfig, art: Artifacts) -> bool:
    summary = validation_suite(rc)
    art.json("validate.json", summary)
    return summary["pass"]


COMMANDS = {
    "field": cmd_field,
    "trajectories": cmd_trajectories,
    "screen": cmd_screen,
    "epr": cmd_epr,
    "nosignal": cmd_nosignal,
    "validate": cmd_validate,
}


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="emergentqm",
                                description="Emergent-velocity double-slit and EPR toolkit.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, type=Path, help="flat 'section.key = value' file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--seed", type=int, default=None, help="override run.seed")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="table format (default: output.format)")
    return p


def load_config(path: Path, seed: int | None) -> RunConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError([f"{path}: cannot read config ({exc})"]) from exc
    rc = parse_config(text)
    if seed is not None:
        rc = rc.with_seed(seed)
    return rc


def run_subcommand(name: str, rc: RunConfig, out: Path, fmt: str | None = None) -> int:
    art = Artifacts(Path(out), fmt or rc.format)
    try:
        ok = COMMANDS[name](rc, art)
        art.write()
    except Exception as exc:  # computation failed: nothing partial is left behind
        print(f"emergentqm {name}: error: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = load_config(args.config, args.seed)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 2
    return run_subcommand(args.subcommand, rc, args.out, args.format)


if __name__ == "__main__":
    sys.exit(main())
