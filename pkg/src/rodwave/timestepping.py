"""Implicit-midpoint time integration of the semidiscrete tip-mass system.

(M + Bg) dv/dt = -K u - alpha K v - G(v) + S(u),   du/dt = v,

with G the tip damping acting on the last dof and S the nonlinear source load.
The midpoint unknown is v_{n+1}; u_{n+1} follows from the trapezoidal update,
so each Newton solve is a single tridiagonal banded system.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import fem
from .fem import AssembledOperators, Mesh1D, assemble
from .model import InitialData, ModelParams


class NewtonDiverged(RuntimeError):
    """Newton iteration cap reached; carries the last residual (and, when raised
    out of run(), the partial trajectory)."""

    def __init__(self, t: float, residual: float):
        super().__init__(f"Newton diverged at t = {t:.6g}, residual = {residual:.3g}")
        self.t = t
        self.residual = residual
        self.partial_trajectory = None


class BlowupDetected(RuntimeError):
    """Displacement exceeded the blow-up guard; an experiment outcome, not a crash."""

    def __init__(self, t: float, sup_u: float, state=None):
        super().__init__(f"blow-up guard reached at t = {t:.6g}, sup|u| = {sup_u:.3g}")
        self.t = t
        self.sup_u = sup_u
        self.state = state


@dataclass(frozen=True)
class StepControl:
    dt: float
    t_end: float
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    output_every: int = 1
    blowup_guard: float = 1e8

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.newton_tol <= 0.0:
            raise ValueError("newton_tol must be positive")


@dataclass(frozen=True)
class State:
    """Reduced nodal displacement/velocity at one time (clamped dof eliminated)."""

    t: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.u.shape != self.v.shape:
            raise ValueError("u and v must have identical lengths")


@dataclass
class Trajectory:
    states: list
    reports: list
    termination: str           # "t_end" | "blowup" | "newton_diverged"
    params: ModelParams
    ctl: StepControl
    ops: AssembledOperators

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


def step(state: State, ops: AssembledOperators, params: ModelParams,
         ctl: StepControl, frozen_source: np.ndarray | None = None) -> State:
    """One implicit-midpoint step solved by Newton on v_{n+1}.

    frozen_source, when given, is the nodal displacement whose source load
    replaces the live S(u*) (the fixed-point map of the contraction study);
    it is constant during the Newton iteration.
    """
    dt = ctl.dt
    un, vn = state.u, state.v
    alpha, r, m, p = params.alpha, params.r, params.m, params.p
    use_live_source = params.source_enabled and frozen_source is None

    if frozen_source is not None and params.source_enabled:
        s_frozen = fem.source_load(frozen_source, p, ops)
    else:
        s_frozen = None

    # Residuals of blowing-up runs scale with the forcing; converge relative to it.
    force_scale = 1.0 + dt * (
        _inf(ops.K @ un) + alpha * _inf(ops.K @ vn)
        + (_inf(fem.source_load(un, p, ops)) if use_live_source else 0.0))
    tol = ctl.newton_tol * force_scale

    w = vn.copy()
    A = ops.A
    res_norm = np.inf
    for _ in range(ctl.newton_max_iter):
        vs = 0.5 * (vn + w)
        us = un + 0.5 * dt * vs
        sup_us = _inf(us)
        if sup_us > 10.0 * ctl.blowup_guard:
            raise BlowupDetected(state.t + dt, sup_us)

        F = A @ (w - vn) + dt * (ops.K @ us + alpha * (ops.K @ vs))
        F[-1] += dt * fem.boundary_damping(vs[-1], r, m)
        if use_live_source:
            F -= dt * fem.source_load(us, p, ops)
        elif s_frozen is not None:
            F -= dt * s_frozen
        if not np.all(np.isfinite(F)):
            raise NewtonDiverged(state.t + dt, np.inf)

        res_norm = _inf(F)
        if res_norm <= tol:
            break

        J = ops.A_band + dt * (0.25 * dt + 0.5 * alpha) * ops.K_band
        J = J.copy()
        J[1, -1] += 0.5 * dt * fem.boundary_damping_jacobian(vs[-1], r, m)
        if use_live_source:
            J -= 0.25 * dt * dt * fem.source_jacobian_band(us, p, ops)
        w = w + solve_banded((1, 1), J, -F)
    else:
        raise NewtonDiverged(state.t + dt, res_norm)

    u_new = un + 0.5 * dt * (vn + w)
    new = State(t=state.t + dt, u=u_new, v=w)
    sup_u = _inf(u_new)
    if sup_u > ctl.blowup_guard:
        raise BlowupDetected(new.t, sup_u, state=new)
    return new


def _inf(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def reduce_initial(init: InitialData) -> State:
    return State(t=0.0, u=init.u0[1:].astype(float).copy(),
                 v=init.u1[1:].astype(float).copy())


def run(init: InitialData, mesh: Mesh1D, params: ModelParams, ctl: StepControl,
        thresholds=None, aux_cfg=None, ops: AssembledOperators | None = None) -> Trajectory:
    """Advance to t_end (or the blow-up guard), sampling every output_every steps.

    Energy reports are attached per sample; H and L require threshold constants.
    NewtonDiverged propagates with the partial trajectory attached.
    """
    if ops is None:
        ops = assemble(mesh)
    state = reduce_initial(init)
    samples = [state]
    n_steps = int(round(ctl.t_end / ctl.dt)) if ctl.t_end > 0 else 0

    termination = "t_end"
    try:
        for k in range(1, n_steps + 1):
            state = step(state, ops, params, ctl)
            if k % ctl.output_every == 0 or k == n_steps:
                samples.append(state)
    except BlowupDetected as exc:
        if exc.state is not None and (not samples or samples[-1].t < exc.state.t):
            samples.append(exc.state)
        termination = "blowup"
    except NewtonDiverged as exc:
        exc.partial_trajectory = _finalize(samples, "newton_diverged",
                                           params, ctl, ops, thresholds, aux_cfg)
        raise

    return _finalize(samples, termination, params, ctl, ops, thresholds, aux_cfg)


def _finalize(samples, termination, params, ctl, ops, thresholds, aux_cfg) -> Trajectory:
    from . import diagnostics  # runtime import: diagnostics consumes State

    reports = diagnostics.report_series(samples, ops, params,
                                        thresholds=thresholds, aux_cfg=aux_cfg)
    return Trajectory(states=samples, reports=reports, termination=termination,
                      params=params, ctl=ctl, ops=ops)
