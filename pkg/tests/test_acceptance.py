"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Criteria 1-11 exercise the simulation package; criterion 12 exercises the
separate plotting package on this suite's own artifacts and is skipped when
that package is not installed.
"""
import csv
import json
import math

import numpy as np
import pytest

from rodwave import cli
from rodwave import diagnostics as dg
from rodwave import picard, spectral
from rodwave import thresholds as thr
from rodwave.fem import Mesh1D, assemble, odd_power
from rodwave.model import ModelParams, make_initial_data, profile_function
from rodwave.timestepping import StepControl, run


def report(number, name, passed=True):
    status = "PASS" if passed else "FAIL"
    print(f"criterion {number:02d} ({name}): {status}")
    assert passed


@pytest.fixture(scope="module")
def growth_artifacts():
    """Shared growth-regime run: E(0) < d, ||grad u0|| > alpha1, blow-up path."""
    mesh = Mesh1D.uniform(128)
    params = ModelParams(alpha=0.05, r=0.5, p=4.0, m=2.0)
    constants = thr.compute_thresholds(4.0, mesh, space="H1_Gamma0")
    init = make_initial_data("linear_ramp", mesh, amplitude=3.0)
    ctl = StepControl(dt=1e-4, t_end=0.6, blowup_guard=1e3)
    traj = run(init, mesh, params, ctl, thresholds=constants,
               aux_cfg=dg.AuxiliaryConfig())
    return traj, constants, params


def test_criterion_01_conservation():
    mesh = Mesh1D.uniform(64)
    params = ModelParams(alpha=0.0, r=0.0, p=4.0, m=2.0, source_enabled=False)
    init = make_initial_data("sine_halfwave", mesh)
    traj = run(init, mesh, params, StepControl(dt=1e-3, t_end=1.0))
    E = np.array([rep.E for rep in traj.reports])
    drift = float(np.max(np.abs(E - E[0])))
    report(1, "conservation", drift <= 1e-8)


def test_criterion_02_energy_identity_order():
    mesh = Mesh1D.uniform(64)
    params = ModelParams(alpha=0.1, r=1.0, p=4.0, m=2.0)
    init = make_initial_data("sine_halfwave", mesh)

    def residual(dt):
        traj = run(init, mesh, params, StepControl(dt=dt, t_end=0.5))
        return dg.identity_residual(traj.states, traj.ops, params)

    r1 = residual(1e-3)
    r2 = residual(5e-4)
    ratio = r1 / r2
    report(2, "energy identity", r1 <= 1e-5 and 3.2 <= ratio <= 4.8)


def test_criterion_03_dissipation_sign():
    mesh = Mesh1D.uniform(64)
    params = ModelParams(alpha=1.0, r=1.0, p=4.0, m=3.0, source_enabled=False)
    init = make_initial_data("sine_halfwave", mesh,
                             velocity_profile="sine_halfwave")
    ctl = StepControl(dt=1e-3, t_end=1.0)
    traj = run(init, mesh, params, ctl)
    E = np.array([rep.E for rep in traj.reports])
    report(3, "dissipation sign", bool(np.all(np.diff(E) <= 10.0 * ctl.newton_tol)))


def test_criterion_04_threshold_identities():
    mesh = Mesh1D.uniform(256)
    constants = thr.compute_thresholds(4.0, mesh, space="H1_Gamma0")
    ok = (abs(constants.alpha1 - constants.B ** (-2.0)) <= 1e-12
          and abs(constants.d - 0.25 * constants.alpha1 ** 2) <= 1e-12
          and abs(thr.well_function(constants.alpha1, constants.B, 4.0)
                  - constants.d) <= 1e-12)
    B2 = thr.embedding_constant(2.0, mesh, space="H1_Gamma0")
    ok = ok and abs(B2 - 2.0 / math.pi) <= 1e-3
    report(4, "threshold identities", ok)


def test_criterion_05_exponential_growth(growth_artifacts):
    traj, constants, params = growth_artifacts
    reps = traj.reports
    E0 = reps[0].E
    H = np.array([rep.H for rep in reps])
    L = np.array([rep.L for rep in reps])
    lpp = np.array([rep.lp_u_p for rep in reps])

    hypotheses = E0 < constants.d and reps[0].h1semi_u > constants.alpha1
    chain = (H[0] > 0.0
             and bool(np.all(H >= H[0] - 1e-12))
             and bool(np.all(H <= lpp / params.p + 1e-12)))
    floors = dg.vitillaro_floor_check(traj, constants, tol=1e-3) == []
    T = reps[-1].t
    fit = dg.growth_fit(traj, "L", (0.2 * T, 0.9 * T))
    fitted = fit.mu_hat > 0.0 and fit.r_squared >= 0.99
    l_bound = bool(np.all(L <= lpp / params.p + 1e-12))
    report(5, "exponential growth", hypotheses and chain and floors
           and fitted and l_bound)


def test_criterion_06_well_confinement():
    mesh = Mesh1D.uniform(128)
    params = ModelParams(alpha=0.05, r=0.5, p=4.0, m=2.0)
    constants = thr.compute_thresholds(4.0, mesh, space="H1_Gamma0")
    init = make_initial_data("linear_ramp", mesh, amplitude=1.0)
    traj = run(init, mesh, params, StepControl(dt=1e-3, t_end=10.0),
               thresholds=constants)
    reps = traj.reports
    inside_well = (reps[0].E < constants.d
                   and reps[0].h1semi_u < constants.alpha1)
    lp = np.array([rep.lp_u_p for rep in reps]) ** 0.25
    report(6, "well confinement", inside_well
           and traj.termination == "t_end"
           and float(np.max(lp)) <= 2.0 * lp[0])


def test_criterion_07_oracle_agreement():
    mesh = Mesh1D.uniform(512)
    params = ModelParams(alpha=0.05, r=0.5, p=4.0, m=2.0)
    init = make_initial_data("sine_fullwave", mesh)
    traj = run(init, mesh, params, StepControl(dt=5e-4, t_end=0.5))
    f0, _ = profile_function("sine_fullwave")
    f1, _ = profile_function("zero")
    gaps = []
    for n in (2, 4, 6, 8):
        basis = spectral.build_basis(n)
        st = spectral.run_spectral(basis, params, f0, f1, traj.times, tol=1e-10)
        gaps.append(float(np.max(spectral.fem_spectral_gap(traj, st))))
    monotone = all(a > b for a, b in zip(gaps, gaps[1:]))
    report(7, "oracle agreement", monotone and gaps[-1] <= 1e-3)


def test_criterion_08_shift_equivalence():
    params = ModelParams(alpha=0.05, r=0.5, p=4.0, m=4.0)
    f0, _ = profile_function("sine_halfwave")
    f1, _ = profile_function("zero")
    basis = spectral.build_basis(6)
    t_eval = np.linspace(0.0, 0.5, 101)
    d = spectral.run_spectral(basis, params, f0, f1, t_eval, mode="direct")
    s = spectral.run_spectral(basis, params, f0, f1, t_eval, mode="shifted")
    gap = spectral.shift_equivalence_check(d, s)
    report(8, "shift equivalence", gap <= 1e-7)


def test_criterion_09_picard_contraction():
    mesh = Mesh1D.uniform(64)
    ops = assemble(mesh)
    params = ModelParams(alpha=0.05, r=0.5, p=4.0, m=2.0)
    init = make_initial_data("sine_halfwave", mesh)
    tol = 1e-10

    ctl = StepControl(dt=1e-3, t_end=0.02)
    res = picard.picard_iterate(init, mesh, params, ctl, k_max=10, tol=tol,
                                ops=ops)
    contracting = res.converged and all(r < 1.0 for r in res.ratios)
    direct = run(init, mesh, params, ctl, ops=ops)
    limit_ok = picard.yt_distance(res.iterates[-1], direct.states, ops,
                                  params.m) <= 10.0 * tol

    medians = []
    for T in (0.02, 0.08, 0.32):
        r = picard.picard_iterate(init, mesh, params,
                                  StepControl(dt=1e-3, t_end=T),
                                  k_max=10, tol=tol, ops=ops)
        medians.append(float(np.median(r.ratios)))
    trend = medians[0] <= medians[1] <= medians[2]
    report(9, "picard contraction", contracting and limit_ok and trend)


def test_criterion_10_monotonicity_inequality():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(10_000) * 5.0
    b = rng.standard_normal(10_000) * 5.0
    ok = True
    for m in (2.0, 2.5, 3.0, 4.0):
        prod = (odd_power(a, m) - odd_power(b, m)) * (a - b)
        ok = ok and bool(np.all(prod >= 0.0))
        zero = prod == 0.0
        ok = ok and bool(np.all(np.abs(a[zero] - b[zero]) <= 1e-14))
        ok = ok and (odd_power(1.3, m) - odd_power(1.3, m)) * 0.0 == 0.0
    report(10, "monotonicity inequality", ok)


def test_criterion_11_sweep_determinism(tmp_path):
    cfg = tmp_path / "sweep.toml"
    cfg.write_text("""
[model]
alpha = 0.05
r = 0.5
p = 4.0
m = 2.0

[mesh]
n_elem = 32

[initial]
profile = "linear_ramp"

[step]
dt = 1e-3
t_end = 0.05

[sweep]
amplitude = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]
alpha = [0.0, 0.05]
""")
    out1, out8 = tmp_path / "j1", tmp_path / "j8"
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(out1),
                     "--jobs", "1"]) == 0
    assert cli.main(["sweep", "--config", str(cfg), "--out", str(out8),
                     "--jobs", "8"]) == 0
    identical = (out1 / "sweep.csv").read_bytes() == (out8 / "sweep.csv").read_bytes()
    report(11, "sweep determinism", identical)


def test_criterion_12_plot_rendering(growth_artifacts, tmp_path):
    plotkit = pytest.importorskip("plotkit")
    from plotkit.cli import main as plot_main
    from plotkit.schema import SchemaError

    traj, constants, params = growth_artifacts
    traj_csv = tmp_path / "trajectory.csv"
    cli._write_trajectory_csv(traj_csv, traj.reports)
    thr_json = tmp_path / "thresholds.json"
    thr_json.write_text(json.dumps(cli._thresholds_dict(constants)))
    sweep_csv = tmp_path / "sweep.csv"
    with open(sweep_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "amplitude", "E0", "h1semi0", "E0_lt_d",
                         "grad0_gt_alpha1", "termination", "mu_hat",
                         "r_squared", "error"])
        writer.writerow([0, 3.0, repr(traj.reports[0].E),
                         repr(traj.reports[0].h1semi_u), "True", "True",
                         traj.termination, "2.4", "0.999", ""])

    ok = True
    for kind, src in (("energy", traj_csv), ("growth", traj_csv),
                      ("phase", sweep_csv)):
        out = tmp_path / f"{kind}.png"
        args = ["plot", "--kind", kind, "--in", str(src), "--out", str(out)]
        if kind == "phase":
            args += ["--thresholds", str(thr_json)]
        ok = ok and plot_main(args) == 0 and out.exists() and out.stat().st_size > 0

    # schema rejection must name the offending column
    bad_csv = tmp_path / "bad.csv"
    text = traj_csv.read_text().replace("l2_u,", "l2norm,", 1)
    bad_csv.write_text(text)
    with pytest.raises(SchemaError, match="l2_u"):
        from plotkit.schema import validate_trajectory
        validate_trajectory(bad_csv)
    report(12, "plot rendering", ok)
