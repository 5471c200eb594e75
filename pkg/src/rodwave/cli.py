"""Command-line harness: single runs, threshold computation, sweeps, Picard
studies and FEM-vs-spectral comparisons.

Exit-code policy: mathematical outcomes (blow-up, hypothesis not met,
non-contraction) are data and exit 0; only infrastructure failures
(bad config, missing files) are nonzero.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, diagnostics, picard as picard_mod, spectral, thresholds as thr
from .config import ConfigError, RunConfig, SWEEPABLE, config_dict, load
from .fem import Mesh1D, assemble
from .model import make_initial_data, profile_function, validate
from .timestepping import NewtonDiverged, run

CSV_COLUMNS = ["t", "l2_u", "h1semi_u", "lp_u_p", "l2_ut", "l2g1_ut",
               "E", "H", "L", "identity_residual"]


def _write_trajectory_csv(path: Path, reports) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rep in reports:
            writer.writerow([repr(float(getattr(rep, col))) for col in CSV_COLUMNS])


def _thresholds_dict(constants: thr.ThresholdConstants) -> dict:
    out = {"B": constants.B, "alpha1": constants.alpha1, "d": constants.d,
           "p": constants.p, "space": constants.space,
           "provenance": constants.provenance}
    if constants.alpha2_at is not None:
        out["alpha2"] = constants.alpha2_at.value
        out["alpha2_at_boundary"] = constants.alpha2_at.at_boundary
    return out


def _fit_or_none(traj, window_frac):
    """Growth fit on log L (falling back to log ||u||_p^p) over a fractional window."""
    t0, t1 = traj.reports[0].t, traj.reports[-1].t
    window = (t0 + window_frac[0] * (t1 - t0), t0 + window_frac[1] * (t1 - t0))
    for channel in ("L", "lp_u_p"):
        try:
            fit = diagnostics.growth_fit(traj, channel, window)
            return fit, channel
        except diagnostics.NonpositiveSamples:
            continue
    return None, None


def _execute_run(cfg: RunConfig, seed: int):
    """Shared body of cmd_run and each sweep cell."""
    mesh = Mesh1D.uniform(cfg.mesh_n)
    constants = thr.compute_thresholds(cfg.model.p, mesh,
                                       space=cfg.diagnostics.space, seed=seed)
    init = make_initial_data(cfg.initial.profile, mesh,
                             amplitude=cfg.initial.amplitude,
                             velocity_profile=cfg.initial.velocity_profile,
                             velocity_amplitude=cfg.initial.velocity_amplitude)
    error = ""
    try:
        traj = run(init, mesh, cfg.model, cfg.step,
                   thresholds=constants, aux_cfg=cfg.diagnostics.aux())
    except NewtonDiverged as exc:
        traj = exc.partial_trajectory
        error = str(exc)
    fit, fit_channel = _fit_or_none(traj, cfg.diagnostics.fit_window)
    return traj, constants, fit, fit_channel, error


def cmd_run(cfg: RunConfig, out_dir: Path, seed: int) -> int:
    report = validate(cfg.model, n_dim=1)
    if not report.passed:
        details = "; ".join(f"{c.name}: {c.detail}" for c in report.failures())
        print(f"invalid model parameters: {details}", file=sys.stderr)
        return 2

    started = time.perf_counter()
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        traj, constants, fit, fit_channel, error = _execute_run(cfg, seed)
    except Exception as exc:  # manifest is written even when the run fails
        manifest = {
            "artifact_version": __version__,
            "config": config_dict(cfg),
            "termination": "failed",
            "error": f"{type(exc).__name__}: {exc}",
            "wall_clock_s": time.perf_counter() - started,
        }
        with open(out_dir / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2)
        print(f"run failed: {exc}", file=sys.stderr)
        return 3
    _write_trajectory_csv(out_dir / "trajectory.csv", traj.reports)
    with open(out_dir / "thresholds.json", "w") as fh:
        json.dump(_thresholds_dict(constants), fh, indent=2)

    violations = None
    try:
        violations = len(diagnostics.vitillaro_floor_check(traj, constants))
    except diagnostics.HypothesisNotMet:
        pass
    manifest = {
        "artifact_version": __version__,
        "config": config_dict(cfg),
        "thresholds": _thresholds_dict(constants),
        "termination": traj.termination,
        "error": error,
        "mu_hat": fit.mu_hat if fit else None,
        "r_squared": fit.r_squared if fit else None,
        "fit_channel": fit_channel,
        "identity_residual_max": max(
            (rep.identity_residual for rep in traj.reports
             if math.isfinite(rep.identity_residual)), default=None),
        "vitillaro_violations": violations,
        "n_samples": len(traj.reports),
        "wall_clock_s": time.perf_counter() - started,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    print(f"run complete: termination={traj.termination} samples={len(traj.reports)}"
          + (f" mu_hat={fit.mu_hat:.6g}" if fit else ""))
    return 0


def cmd_thresholds(p: float, mesh_n: int, space: str, out_dir: Path, seed: int,
                   inject_b: float | None = None) -> int:
    if p <= 2.0:
        print("p > 2 required", file=sys.stderr)
        return 2
    if inject_b is not None:
        alpha1, d = thr.well_constants(inject_b, p)
        constants = thr.ThresholdConstants(
            B=inject_b, alpha1=alpha1, d=d, p=p, space=space,
            provenance={"injected": True})
    else:
        mesh = Mesh1D.uniform(mesh_n)
        constants = thr.compute_thresholds(p, mesh, space=space, seed=seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = _thresholds_dict(constants)
    with open(out_dir / "thresholds.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    print(json.dumps(payload, indent=2))
    return 0


def _sweep_cells(cfg: RunConfig) -> list[dict]:
    grid = {k: cfg.sweep[k] for k in SWEEPABLE if k in cfg.sweep}
    if not grid:
        grid = {"amplitude": [cfg.initial.amplitude]}
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*grid.values())]


def _cell_config(cfg: RunConfig, cell: dict) -> RunConfig:
    model_updates = {k: v for k, v in cell.items() if k in ("alpha", "r", "p", "m")}
    out = cfg
    if model_updates:
        out = replace(out, model=replace(cfg.model, **model_updates))
    if "amplitude" in cell:
        out = replace(out, initial=replace(cfg.initial, amplitude=cell["amplitude"]))
    return out


def _sweep_worker(args):
    index, cfg, cell, seed = args
    row = {"index": index, **{k: repr(v) for k, v in cell.items()}}
    try:
        run_cfg = _cell_config(cfg, cell)
        traj, constants, fit, _, error = _execute_run(run_cfg, seed)
        rep0 = traj.reports[0]
        row.update({
            "E0": repr(rep0.E),
            "h1semi0": repr(rep0.h1semi_u),
            "E0_lt_d": repr(rep0.E < constants.d),
            "grad0_gt_alpha1": repr(rep0.h1semi_u > constants.alpha1),
            "termination": traj.termination,
            "mu_hat": repr(fit.mu_hat) if fit else "",
            "r_squared": repr(fit.r_squared) if fit else "",
            "error": error,
        })
    except Exception as exc:  # per-cell failures never abort the sweep
        row.update({"E0": "", "h1semi0": "", "E0_lt_d": "", "grad0_gt_alpha1": "",
                    "termination": "failed", "mu_hat": "", "r_squared": "",
                    "error": f"{type(exc).__name__}: {exc}"})
    return index, row


def cmd_sweep(cfg: RunConfig, out_dir: Path, jobs: int, seed: int) -> int:
    cells = _sweep_cells(cfg)
    tasks = [(i, cfg, cell, seed) for i, cell in enumerate(cells)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_worker, tasks))
    else:
        results = [_sweep_worker(t) for t in tasks]
    results.sort(key=lambda pair: pair[0])   # merge by cell index, not completion order

    varied = list(cells[0].keys())
    columns = (["index"] + varied
               + ["E0", "h1semi0", "E0_lt_d", "grad0_gt_alpha1",
                  "termination", "mu_hat", "r_squared", "error"])
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for _, row in results:
            writer.writerow(row)
    print(f"sweep complete: {len(cells)} cells -> {out_dir / 'sweep.csv'}")
    return 0


def cmd_picard(cfg: RunConfig, out_dir: Path) -> int:
    mesh = Mesh1D.uniform(cfg.mesh_n)
    init = make_initial_data(cfg.initial.profile, mesh,
                             amplitude=cfg.initial.amplitude,
                             velocity_profile=cfg.initial.velocity_profile,
                             velocity_amplitude=cfg.initial.velocity_amplitude)
    ops = assemble(mesh)
    payload = {"horizons": []}
    for T in cfg.picard.horizons:
        ctl = replace(cfg.step, t_end=T, output_every=1)
        result = picard_mod.picard_iterate(init, mesh, cfg.model, ctl,
                                           k_max=cfg.picard.k_max,
                                           tol=cfg.picard.tol, ops=ops)
        payload["horizons"].append({
            "T": T,
            "distances": result.distances,
            "ratios": result.ratios,
            "median_ratio": float(np.median(result.ratios)) if result.ratios else None,
            "R_ball": result.R_ball,
            "converged": result.converged,
        })
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "picard.json", "w") as fh:
        json.dump(payload, fh, indent=2)
    print(json.dumps(payload, indent=2))
    return 0


def cmd_oracle_compare(cfg: RunConfig, out_dir: Path) -> int:
    mesh = Mesh1D.uniform(cfg.mesh_n)
    init = make_initial_data(cfg.initial.profile, mesh,
                             amplitude=cfg.initial.amplitude,
                             velocity_profile=cfg.initial.velocity_profile,
                             velocity_amplitude=cfg.initial.velocity_amplitude)
    traj = run(init, mesh, cfg.model, cfg.step)

    f0, _ = profile_function(cfg.initial.profile)
    f1, _ = profile_function(cfg.initial.velocity_profile)
    a0, a1 = cfg.initial.amplitude, cfg.initial.velocity_amplitude
    u0 = lambda x: a0 * f0(x)
    u1 = lambda x: a1 * f1(x)

    rows = []
    for n_modes in cfg.oracle.n_modes:
        basis = spectral.build_basis(n_modes, generator=cfg.oracle.generator)
        spec_traj = spectral.run_spectral(basis, cfg.model, u0, u1,
                                          t_eval=traj.times, tol=cfg.oracle.ode_tol)
        gap = float(np.max(spectral.fem_spectral_gap(traj, spec_traj)))
        rows.append((n_modes, gap))

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "oracle_gaps.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_modes", "sup_l2_gap"])
        for n_modes, gap in rows:
            writer.writerow([n_modes, repr(gap)])
    for n_modes, gap in rows:
        print(f"n_modes={n_modes:3d}  sup L2 gap = {gap:.6e}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rodwave",
        description="Numerical laboratory for the damped tip-mass wave equation")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="TOML config file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="rng seed override")

    sp_run = sub.add_parser("run", help="single simulation with diagnostics")
    add_common(sp_run)

    sp_thr = sub.add_parser("thresholds", help="potential-well constants")
    sp_thr.add_argument("--p", type=float, required=True)
    sp_thr.add_argument("--mesh-n", type=int, default=256)
    sp_thr.add_argument("--space", default="H01", choices=["H01", "H1_Gamma0"])
    sp_thr.add_argument("--out", default="out")
    sp_thr.add_argument("--seed", type=int, default=0)
    sp_thr.add_argument("--inject-b", type=float, default=None,
                        help="skip the ascent and derive constants from this B")

    sp_sweep = sub.add_parser("sweep", help="grid of runs, summary CSV")
    add_common(sp_sweep)
    sp_sweep.add_argument("--jobs", type=int, default=1)

    sp_pic = sub.add_parser("picard", help="contraction-mapping study")
    add_common(sp_pic)

    sp_oc = sub.add_parser("oracle-compare", help="FEM vs spectral oracle gaps")
    add_common(sp_oc)

    args = parser.parse_args(argv)

    if args.command == "thresholds":
        return cmd_thresholds(args.p, args.mesh_n, args.space,
                              Path(args.out), args.seed, inject_b=args.inject_b)

    try:
        cfg = load(args.config)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out) if args.out else Path(cfg.out_dir)
    seed = args.seed if args.seed is not None else cfg.seed

    try:
        if args.command == "run":
            return cmd_run(cfg, out_dir, seed)
        if args.command == "sweep":
            return cmd_sweep(cfg, out_dir, args.jobs, seed)
        if args.command == "picard":
            return cmd_picard(cfg, out_dir)
        if args.command == "oracle-compare":
            return cmd_oracle_compare(cfg, out_dir)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
