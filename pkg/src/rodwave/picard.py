"""Empirical contraction study of the frozen-source solution map.

Phi(u) solves the tip-mass problem with the source frozen at |u|^(p-2)u from a
given displacement history; successive distances are measured in the mixed
space-time norm combining max-in-time energy, the tip damping channel and the
time-integrated velocity gradient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from . import fem
from .fem import AssembledOperators, Mesh1D, assemble
from .model import InitialData, ModelParams
from .timestepping import State, StepControl, reduce_initial, step


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class YTNorm:
    value: float
    max_energy: float       # max_t (||v_t||_2^2 + ||v_x||_2^2)
    boundary_lm_sq: float    # ||v_t||^2_{L^m((0,T) x Gamma1)}
    visc_integral: float     # int_0^T ||v_xt||_2^2


@dataclass
class PicardRun:
    iterates: list            # list of per-step State lists
    distances: list[float]
    ratios: list[float]
    T_horizon: float
    R_ball: float             # max Y_T norm observed among iterates
    converged: bool


def yt_norm(states, ops: AssembledOperators, m: float) -> YTNorm:
    """Discrete Y_T norm of a sampled trajectory (trapezoid rule in time)."""
    t = np.array([s.t for s in states])
    energy = np.empty(t.size)
    visc = np.empty(t.size)
    tip = np.empty(t.size)
    for k, s in enumerate(states):
        energy[k] = float(s.v @ (ops.M @ s.v)) + float(s.u @ (ops.K @ s.u))
        visc[k] = float(s.v @ (ops.K @ s.v))
        tip[k] = abs(s.v[-1]) ** m
    max_energy = float(np.max(energy))
    lm = float(trapezoid(tip, t)) ** (2.0 / m)
    vi = float(trapezoid(visc, t))
    return YTNorm(value=float(np.sqrt(max_energy + lm + vi)),
                  max_energy=max_energy, boundary_lm_sq=lm, visc_integral=vi)


def yt_distance(states_a, states_b, ops: AssembledOperators, m: float) -> float:
    """Y_T norm of the difference of two trajectories on the same grid."""
    if len(states_a) != len(states_b):
        raise GridMismatch("trajectories have different lengths")
    diff = []
    for a, b in zip(states_a, states_b):
        if abs(a.t - b.t) > 1e-9 * (1.0 + abs(a.t)):
            raise GridMismatch(f"time grids differ at t = {a.t} vs {b.t}")
        diff.append(State(t=a.t, u=a.u - b.u, v=a.v - b.v))
    return yt_norm(diff, ops, m).value


def phi_trajectory(init: InitialData, ctl: StepControl) -> list:
    """Zeroth iterate u0 + t*u1, the shift function sampled on the step grid."""
    s0 = reduce_initial(init)
    n_steps = int(round(ctl.t_end / ctl.dt))
    return [State(t=k * ctl.dt, u=s0.u + (k * ctl.dt) * s0.v, v=s0.v.copy())
            for k in range(n_steps + 1)]


def apply_Phi(u_states, init: InitialData, ops: AssembledOperators,
              params: ModelParams, ctl: StepControl) -> list:
    """Solve the problem with the source frozen along u_states (sampled every step)."""
    n_steps = int(round(ctl.t_end / ctl.dt))
    if len(u_states) != n_steps + 1:
        raise GridMismatch(
            f"frozen trajectory has {len(u_states)} samples, expected {n_steps + 1}")
    state = reduce_initial(init)
    out = [state]
    for k in range(n_steps):
        u_mid = 0.5 * (u_states[k].u + u_states[k + 1].u)
        state = step(state, ops, params, ctl, frozen_source=u_mid)
        out.append(state)
    return out


def picard_iterate(init: InitialData, mesh: Mesh1D, params: ModelParams,
                   ctl: StepControl, k_max: int = 8, tol: float = 1e-10,
                   ops: AssembledOperators | None = None) -> PicardRun:
    """Iterate u <- Phi(u) from the shift trajectory; non-convergence is data."""
    if k_max < 2:
        raise ValueError("k_max >= 2 required")
    if ops is None:
        ops = assemble(mesh)
    current = phi_trajectory(init, ctl)
    iterates = [current]
    distances: list[float] = []
    converged = False
    for _ in range(k_max):
        nxt = apply_Phi(current, init, ops, params, ctl)
        distances.append(yt_distance(nxt, current, ops, params.m))
        iterates.append(nxt)
        current = nxt
        if distances[-1] <= tol:
            converged = True
            break
    ratios = [distances[k + 1] / distances[k]
              for k in range(len(distances) - 1) if distances[k] > 0.0]
    r_ball = max(yt_norm(it, ops, params.m).value for it in iterates)
    return PicardRun(iterates=iterates, distances=distances, ratios=ratios,
                     T_horizon=ctl.t_end, R_ball=r_ball, converged=converged)
