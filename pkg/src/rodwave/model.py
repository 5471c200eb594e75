"""Continuous-problem description: coefficients, hypothesis checks, initial profiles.

The rod occupies (0, 1), is clamped at x = 0 and carries a tip mass at x = 1.
The interior equation is u_tt - u_xx - alpha*u_xxt = |u|^(p-2)*u and the tip
obeys Newton's law with damping r*|u_t|^(m-2)*u_t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Domain1D:
    """Unit rod with clamped end gamma0 and tip-mass end gamma1."""

    length: float = 1.0
    gamma0: float = 0.0
    gamma1: float = 1.0


@dataclass(frozen=True)
class ModelParams:
    """PDE coefficients.

    alpha: strain-rate (viscoelastic) damping coefficient, >= 0.
    r:     tip damping coefficient, >= 0 (r = 0 is a permitted degenerate case
           unless strict_theorem_mode is set).
    p:     source exponent, real > 2.
    m:     tip damping exponent, real >= 2.
    source_enabled: turning the source off gives the linear damped wave
           equation; used by conservation/dissipation experiments.
    """

    alpha: float
    r: float
    p: float
    m: float
    strict_theorem_mode: bool = False
    source_enabled: bool = True


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[HypothesisCheck, ...]
    qbar: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[HypothesisCheck]:
        return [c for c in self.checks if not c.passed]


def critical_trace_exponent(n_dim: int) -> float:
    """Largest q with H^1 trace control on the boundary: 2(N-1)/(N-2), inf for N <= 2."""
    if n_dim >= 3:
        return 2.0 * (n_dim - 1) / (n_dim - 2)
    return math.inf


def validate(params: ModelParams, n_dim: int = 1, growth: bool = False) -> ValidationReport:
    """Check the local-existence hypotheses (and optionally the growth hypothesis m < p).

    Never raises; returns a report with one entry per hypothesis.
    """
    qbar = critical_trace_exponent(n_dim)
    checks = []

    checks.append(HypothesisCheck(
        "alpha_nonnegative", params.alpha >= 0.0, f"alpha = {params.alpha}"))
    checks.append(HypothesisCheck(
        "r_nonnegative", params.r >= 0.0, f"r = {params.r}"))
    if params.strict_theorem_mode:
        checks.append(HypothesisCheck(
            "r_positive_strict", params.r > 0.0,
            f"r = {params.r}; r > 0 required in strict mode"))

    checks.append(HypothesisCheck(
        "p_supercritical", params.p > 2.0,
        "p > 2 required for source nonlinearity" if params.p <= 2.0 else f"p = {params.p}"))
    checks.append(HypothesisCheck(
        "p_below_trace_critical", params.p <= qbar, f"p = {params.p}, qbar = {qbar}"))

    # m range: max(2, qbar/(qbar+1-p)) <= m <= qbar.  The general-N formula is
    # evaluated directly; qbar = inf makes the ratio tend to 1 and the upper
    # bound vacuous.
    if math.isinf(qbar):
        m_lower_ratio = 1.0
    else:
        denom = qbar + 1.0 - params.p
        m_lower_ratio = math.inf if denom <= 0.0 else qbar / denom
    m_lower = max(2.0, m_lower_ratio)
    checks.append(HypothesisCheck(
        "m_lower_bound", params.m >= m_lower, f"m = {params.m}, lower bound = {m_lower}"))
    checks.append(HypothesisCheck(
        "m_upper_bound", params.m <= qbar, f"m = {params.m}, qbar = {qbar}"))

    if growth:
        checks.append(HypothesisCheck(
            "growth_m_lt_p", params.m < params.p,
            f"m = {params.m}, p = {params.p}; growth regime requires m < p"))

    return ValidationReport(checks=tuple(checks), qbar=qbar)


@dataclass(frozen=True)
class InitialData:
    """Nodal displacement and velocity on the full mesh (clamped node included)."""

    u0: np.ndarray
    u1: np.ndarray

    def __post_init__(self):
        if self.u0.shape != self.u1.shape:
            raise ValueError("u0 and u1 must have matching shapes")
        if self.u0[0] != 0.0:
            raise ValueError("u0 must vanish at the clamped end x = 0")


def _zero(x):
    return np.zeros_like(x)


def _dzero(x):
    return np.zeros_like(x)


# name -> (profile, derivative); every profile vanishes at x = 0
PROFILES = {
    "zero": (_zero, _dzero),
    "linear_ramp": (lambda x: np.asarray(x, dtype=float).copy(),
                    lambda x: np.ones_like(np.asarray(x, dtype=float))),
    "sine_halfwave": (lambda x: np.sin(0.5 * np.pi * np.asarray(x)),
                      lambda x: 0.5 * np.pi * np.cos(0.5 * np.pi * np.asarray(x))),
    "sine_fullwave": (lambda x: np.sin(np.pi * np.asarray(x)),
                      lambda x: np.pi * np.cos(np.pi * np.asarray(x))),
}


def profile_function(name: str):
    """Return (f, f') callables for a named profile."""
    try:
        return PROFILES[name]
    except KeyError:
        known = ", ".join(sorted(PROFILES))
        raise ValueError(f"unknown profile {name!r}; known profiles: {known}") from None


def make_initial_data(profile: str, mesh, amplitude: float = 1.0,
                      velocity_profile: str = "zero",
                      velocity_amplitude: float = 1.0) -> InitialData:
    """Nodal interpolation of named displacement/velocity profiles.

    `amplitude` scales the displacement (the scaled(profile, A) form);
    `velocity_amplitude` scales the velocity profile.
    """
    f0, _ = profile_function(profile)
    f1, _ = profile_function(velocity_profile)
    u0 = amplitude * f0(mesh.nodes)
    u1 = velocity_amplitude * f1(mesh.nodes)
    u0[0] = 0.0  # exact clamped-end compatibility
    return InitialData(u0=u0, u1=u1)
