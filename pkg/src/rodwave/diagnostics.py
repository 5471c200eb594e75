"""Energy functionals, the energy-identity residual, well floors and growth fits.

Channel conventions (all on the reduced dof vector, clamped node implicit):
  l2_u      = ||u||_2           via the consistent mass matrix
  h1semi_u  = ||u_x||_2         via the stiffness matrix
  lp_u_p    = ||u||_p^p         via element Gauss quadrature
  l2_ut     = ||u_t||_2
  l2g1_ut   = |u_t(1)|          the tip trace norm
  E         = h1semi^2/2 - lp_u_p/p + l2_ut^2/2 + l2g1_ut^2/2
(The source term enters E only when the source is enabled.)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import fem, thresholds as thr
from .fem import AssembledOperators
from .model import ModelParams


class NonpositiveWellGap(ValueError):
    """H(0) = d - E(0) <= 0: the growth bookkeeping does not apply."""


class HypothesisNotMet(ValueError):
    pass


class NonpositiveSamples(ValueError):
    pass


@dataclass
class EnergyReport:
    t: float
    l2_u: float
    h1semi_u: float
    lp_u_p: float
    l2_ut: float
    l2g1_ut: float
    E: float
    H: float = math.nan
    L: float = math.nan
    identity_residual: float = math.nan


@dataclass(frozen=True)
class AuxiliaryConfig:
    """Perturbation size for the auxiliary function L."""

    epsilon: float = 1e-2
    auto_epsilon: bool = True

    def __post_init__(self):
        if not self.auto_epsilon and self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive when fixed")


def energy(state, ops: AssembledOperators, params: ModelParams) -> EnergyReport:
    """All norm channels and the energy of one state (H, L left unset)."""
    u, v = state.u, state.v
    l2_u = math.sqrt(max(float(u @ (ops.M @ u)), 0.0))
    h1 = math.sqrt(max(float(u @ (ops.K @ u)), 0.0))
    lpp = fem.lp_norm_p(u, params.p, ops)
    l2_ut = math.sqrt(max(float(v @ (ops.M @ v)), 0.0))
    trace = abs(float(v[-1]))
    e = 0.5 * h1 * h1 + 0.5 * l2_ut * l2_ut + 0.5 * trace * trace
    if params.source_enabled:
        e -= lpp / params.p
    return EnergyReport(t=state.t, l2_u=l2_u, h1semi_u=h1, lp_u_p=lpp,
                        l2_ut=l2_ut, l2g1_ut=trace, E=e)


def _perturbation(state, ops: AssembledOperators, params: ModelParams) -> float:
    """The epsilon-weighted part of L: int(u_t u) + u_t(1) u(1) + (alpha/2)||u_x||^2."""
    u, v = state.u, state.v
    return (float(v @ (ops.M @ u)) + float(v[-1] * u[-1])
            + 0.5 * params.alpha * float(u @ (ops.K @ u)))


def choose_epsilon(state0, H0: float, cfg: AuxiliaryConfig,
                   ops: AssembledOperators, params: ModelParams) -> float:
    """Fixed epsilon, or the auto rule guaranteeing L(0) >= H(0)/2."""
    if H0 <= 0.0:
        raise NonpositiveWellGap(f"H(0) = {H0:.6g} <= 0")
    if not cfg.auto_epsilon:
        return cfg.epsilon
    u, v = state0.u, state0.v
    denom = (abs(float(v @ (ops.M @ u))) + abs(float(v[-1] * u[-1]))
             + 0.5 * params.alpha * float(u @ (ops.K @ u)) + 1.0)
    return min(cfg.epsilon, H0 / (2.0 * denom))


def auxiliary_L(state, report: EnergyReport, cfg: AuxiliaryConfig,
                constants: thr.ThresholdConstants, ops: AssembledOperators,
                params: ModelParams, epsilon: float | None = None) -> float:
    """L = H + eps*(int u_t u + u_t(1)u(1) + (alpha/2)||u_x||^2), H = d - E."""
    H = constants.d - report.E
    if epsilon is None:
        epsilon = choose_epsilon(state, H, cfg, ops, params)
    return H + epsilon * _perturbation(state, ops, params)


def identity_residual(states, ops: AssembledOperators, params: ModelParams,
                      source_states=None) -> float:
    """Energy-identity defect over a sampled segment, trapezoid rule in time.

    R = [E_quad]_s^t + alpha*int||u_xt||^2 + r*int|u_t(1)|^m - int(S(u_src), u_t),
    normalized by max(1, |E(s)|).  source_states defaults to the segment itself
    (live source); pass the frozen displacement history for the fixed-point map.
    """
    if len(states) < 2:
        raise ValueError("segment needs at least 2 samples")
    res = _cumulative_identity(states, ops, params, source_states)
    return float(res[-1])


def _cumulative_identity(states, ops, params, source_states=None) -> np.ndarray:
    t = np.array([s.t for s in states])
    quad = np.empty(len(states))
    visc = np.empty(len(states))
    tipd = np.empty(len(states))
    work = np.empty(len(states))
    src = states if source_states is None else source_states
    for k, s in enumerate(states):
        u, v = s.u, s.v
        quad[k] = 0.5 * (float(u @ (ops.K @ u)) + float(v @ (ops.M @ v)) + v[-1] ** 2)
        visc[k] = float(v @ (ops.K @ v))
        tipd[k] = abs(v[-1]) ** params.m
        if params.source_enabled:
            work[k] = float(fem.source_load(src[k].u, params.p, ops) @ v)
        else:
            work[k] = 0.0

    def cumtrap(y):
        out = np.zeros_like(y)
        out[1:] = np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))
        return out

    e0_src = fem.lp_norm_p(states[0].u, params.p, ops) / params.p if params.source_enabled else 0.0
    e0 = quad[0] - e0_src
    r_abs = np.abs((quad - quad[0])
                   + params.alpha * cumtrap(visc)
                   + params.r * cumtrap(tipd)
                   - cumtrap(work))
    return r_abs / max(1.0, abs(e0))


@dataclass(frozen=True)
class Violation:
    index: int
    t: float
    h1semi_u: float
    lp_u: float


def vitillaro_floor_check(traj, constants: thr.ThresholdConstants,
                          tol: float = 1e-3) -> list[Violation]:
    """Flag samples breaking the lower bounds ||u_x|| >= alpha2, ||u||_p >= B*alpha2.

    Preconditions E(0) < d and ||u_x(0)|| > alpha1 are enforced; alpha2 is the
    well-function root at the initial energy level.
    """
    reports = traj.reports
    if not reports:
        raise HypothesisNotMet("empty trajectory")
    E0 = reports[0].E
    if not (E0 < constants.d):
        raise HypothesisNotMet(f"E(0) = {E0:.6g} >= d = {constants.d:.6g}")
    if not (reports[0].h1semi_u > constants.alpha1):
        raise HypothesisNotMet(
            f"||u_x(0)|| = {reports[0].h1semi_u:.6g} <= alpha1 = {constants.alpha1:.6g}")

    a2 = thr.alpha2(E0, constants.B, constants.p).value
    floor_h1 = (1.0 - tol) * a2
    floor_lp = (1.0 - tol) * constants.B * a2
    p = constants.p
    out = []
    for k, rep in enumerate(reports):
        lp_u = rep.lp_u_p ** (1.0 / p)
        if rep.h1semi_u < floor_h1 or lp_u < floor_lp:
            out.append(Violation(index=k, t=rep.t, h1semi_u=rep.h1semi_u, lp_u=lp_u))
    return out


@dataclass(frozen=True)
class GrowthFit:
    mu_hat: float
    intercept: float
    r_squared: float
    n_samples: int


def growth_fit(traj, channel: str, window: tuple[float, float]) -> GrowthFit:
    """Least-squares line on (t, log channel) restricted to the time window."""
    if channel not in ("L", "lp_u_p"):
        raise ValueError(f"unknown growth channel {channel!r}")
    t = np.array([rep.t for rep in traj.reports])
    y = np.array([getattr(rep, channel) for rep in traj.reports])
    mask = (t >= window[0]) & (t <= window[1])
    t, y = t[mask], y[mask]
    if t.size < 2:
        raise NonpositiveSamples("window contains fewer than 2 samples")
    if np.any(~np.isfinite(y)) or np.any(y <= 0.0):
        raise NonpositiveSamples("channel must be strictly positive on the window")
    logy = np.log(y)
    mu, intercept = np.polyfit(t, logy, 1)
    fit = mu * t + intercept
    ss_res = float(np.sum((logy - fit) ** 2))
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return GrowthFit(mu_hat=float(mu), intercept=float(intercept),
                     r_squared=r2, n_samples=int(t.size))


def report_series(states, ops: AssembledOperators, params: ModelParams,
                  thresholds: thr.ThresholdConstants | None = None,
                  aux_cfg: AuxiliaryConfig | None = None) -> list[EnergyReport]:
    """Per-sample reports with cumulative identity residual and, when threshold
    constants are attached and H(0) > 0, the H and L channels."""
    reports = [energy(s, ops, params) for s in states]
    if len(states) >= 2:
        res = _cumulative_identity(states, ops, params)
        for rep, rk in zip(reports, res):
            rep.identity_residual = float(rk)
    elif reports:
        reports[0].identity_residual = 0.0

    if thresholds is not None:
        for rep in reports:
            rep.H = thresholds.d - rep.E
        H0 = reports[0].H
        if aux_cfg is not None and H0 > 0.0:
            eps = choose_epsilon(states[0], H0, aux_cfg, ops, params)
            for rep, s in zip(reports, states):
                rep.L = rep.H + eps * _perturbation(s, ops, params)
    return reports
