"""Small spectral Galerkin solver used as an independent cross-check.

The basis is built from monomial or sine generators vanishing at x = 0 and
orthonormalized (modified Gram-Schmidt with re-orthogonalization) in the
combined inner product <f, g> = int_0^1 fg dx + f(1)g(1), so the coefficient ODE system is
in normal form.  An optional change of variables v~ = v - (u0 + t u1) starts
the coefficients from zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import math

import numpy as np
from scipy.integrate import trapezoid
from scipy.integrate import solve_ivp

from .fem import odd_power
from .model import ModelParams


class RankDeficient(ValueError):
    pass


class GridMismatch(ValueError):
    pass


def _generator_values(kind: str, n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Raw generator values and derivatives at x, shapes (n, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = np.arange(1, n + 1)[:, None]
    if kind == "monomials":
        vals = x[None, :] ** k
        derivs = k * x[None, :] ** (k - 1)
    elif kind == "dirichlet_neumann_sines":
        om = (k - 0.5) * np.pi
        vals = np.sin(om * x[None, :])
        derivs = om * np.cos(om * x[None, :])
    else:
        raise ValueError(f"unknown generator {kind!r}")
    return vals, derivs


@dataclass(frozen=True)
class SpectralBasis:
    """Orthonormalized combination of raw generators.

    C maps raw generators to basis functions: w_i = sum_k C[i,k] gen_k.
    Precomputed on a Gauss-Legendre grid: values W, derivatives Wx, traces tau,
    stiffness K, interior-only mass M_omega.
    """

    n_modes: int
    generator: str
    C: np.ndarray = field(repr=False)
    xq: np.ndarray = field(repr=False)
    wq: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    Wx: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    M_omega: np.ndarray = field(repr=False)

    def evaluate(self, x, coeffs: np.ndarray | None = None) -> np.ndarray:
        """Basis values at arbitrary x (n_modes, len(x)), or the combination coeffs @ basis."""
        vals, _ = _generator_values(self.generator, self.n_modes, x)
        wvals = self.C @ vals
        return wvals if coeffs is None else coeffs @ wvals

    def gram(self) -> np.ndarray:
        """Recomputed combined-inner-product Gram matrix (identity up to roundoff)."""
        return (self.W * self.wq) @ self.W.T + np.outer(self.tau, self.tau)

    def project(self, f) -> np.ndarray:
        """Coefficients of the combined-inner-product projection of a callable f."""
        fq = f(self.xq)
        return self.W @ (self.wq * fq) + self.tau * float(f(np.array([1.0]))[0])


def build_basis(n_modes: int, generator: str = "monomials",
                n_quad: int = 200) -> SpectralBasis:
    """Gram-Schmidt in the combined inner product (modified, two passes)."""
    if n_modes < 1:
        raise ValueError("n_modes >= 1 required")
    xi, w = np.polynomial.legendre.leggauss(n_quad)
    xq = 0.5 * (xi + 1.0)
    wq = 0.5 * w

    V, Vx = _generator_values(generator, n_modes, xq)
    tau_raw, _ = _generator_values(generator, n_modes, np.array([1.0]))
    tau_raw = tau_raw[:, 0]

    # Modified Gram-Schmidt on the sampled values, applied twice; working on
    # the samples (not on a coefficient matrix) avoids the catastrophic
    # cancellation of ill-conditioned monomial generators.
    W = V.copy()
    Wx = Vx.copy()
    tau = tau_raw.copy()
    C = np.eye(n_modes)

    def inner(i, j):
        return float(np.sum(wq * W[i] * W[j])) + tau[i] * tau[j]

    for i in range(n_modes):
        for _ in range(2):
            for j in range(i):
                c = inner(i, j)
                W[i] -= c * W[j]
                Wx[i] -= c * Wx[j]
                tau[i] -= c * tau[j]
                C[i] -= c * C[j]
        nrm = math.sqrt(inner(i, i))
        if nrm < 1e-13:
            raise RankDeficient("generators are numerically dependent")
        W[i] /= nrm
        Wx[i] /= nrm
        tau[i] /= nrm
        C[i] /= nrm
    K = (Wx * wq) @ Wx.T
    M_omega = (W * wq) @ W.T
    return SpectralBasis(n_modes=n_modes, generator=generator, C=C,
                         xq=xq, wq=wq, W=W, Wx=Wx, tau=tau, K=K, M_omega=M_omega)


@dataclass(frozen=True)
class ShiftFunction:
    """phi(t) = (a0 + t a1) . w, built from the projected initial data, so the
    shifted system is an exact change of variables of the direct one."""

    basis: SpectralBasis
    a0: np.ndarray
    a1: np.ndarray

    def coeffs(self, t: float) -> np.ndarray:
        return self.a0 + t * self.a1

    def values(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.basis.evaluate(np.asarray(x, dtype=float), self.coeffs(t))


def spectral_rhs(g: np.ndarray, gp: np.ndarray, basis: SpectralBasis,
                 params: ModelParams, mode: str = "direct",
                 shift: ShiftFunction | None = None, t: float = 0.0) -> np.ndarray:
    """Coefficient accelerations g'' of the normal-form Galerkin system."""
    if mode == "shifted":
        if shift is None:
            raise ValueError("shifted mode needs a ShiftFunction")
        g = g + shift.coeffs(t)
        gp = gp + shift.a1
    elif mode != "direct":
        raise ValueError(f"unknown mode {mode!r}")

    stiff = basis.K @ g
    damp = params.alpha * (basis.K @ gp)
    vt1 = float(basis.tau @ gp)
    if params.source_enabled:
        vq = g @ basis.W
        src = basis.W @ (basis.wq * odd_power(vq, params.p))
    else:
        src = 0.0

    out = -stiff - damp + src
    out -= (params.r * odd_power(vt1, params.m)) * basis.tau
    return out


@dataclass
class SpectralTrajectory:
    basis: SpectralBasis
    t: np.ndarray
    G: np.ndarray    # (n_samples, n_modes) coefficients
    Gp: np.ndarray
    mode: str
    shift: ShiftFunction | None = None

    def total_coeffs(self, k: int) -> np.ndarray:
        """Coefficients of the full solution v (shift folded back in)."""
        g = self.G[k]
        if self.mode == "shifted":
            g = g + self.shift.coeffs(self.t[k])
        return g

    def values_at(self, k: int, x: np.ndarray) -> np.ndarray:
        """Reconstructed solution v (including the shift) at sample k."""
        return self.basis.evaluate(np.asarray(x, dtype=float), self.total_coeffs(k))

    def values_on_quad(self, k: int) -> np.ndarray:
        return self.total_coeffs(k) @ self.basis.W


def run_spectral(basis: SpectralBasis, params: ModelParams, u0, u1,
                 t_eval: np.ndarray, mode: str = "direct",
                 tol: float = 1e-10) -> SpectralTrajectory:
    """Integrate the coefficient system with an embedded Runge-Kutta pair.

    u0, u1 are callables; their combined-inner-product projections are either
    the initial coefficients (direct mode) or the shift function, with the
    unknown coefficients starting from zero (shifted mode).
    """
    n = basis.n_modes
    t_eval = np.asarray(t_eval, dtype=float)
    shift = None
    a0, a1 = basis.project(u0), basis.project(u1)
    if mode == "direct":
        y0 = np.concatenate([a0, a1])
    elif mode == "shifted":
        shift = ShiftFunction(basis=basis, a0=a0, a1=a1)
        y0 = np.zeros(2 * n)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    def rhs(t, y):
        g, gp = y[:n], y[n:]
        gpp = spectral_rhs(g, gp, basis, params, mode=mode, shift=shift, t=t)
        return np.concatenate([gp, gpp])

    sol = solve_ivp(rhs, (t_eval[0], t_eval[-1]), y0, method="RK45",
                    t_eval=t_eval, rtol=tol, atol=tol, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"spectral ODE solve failed: {sol.message}")
    Y = sol.y.T
    return SpectralTrajectory(basis=basis, t=sol.t, G=Y[:, :n].copy(),
                              Gp=Y[:, n:].copy(), mode=mode, shift=shift)


def shift_equivalence_check(direct: SpectralTrajectory, shifted: SpectralTrajectory) -> float:
    """sup over samples of ||v_direct - (v~ + phi)||_{L2(0,1)}."""
    if direct.basis is not shifted.basis and direct.basis.n_modes != shifted.basis.n_modes:
        raise GridMismatch("trajectories use different bases")
    if direct.t.shape != shifted.t.shape or not np.allclose(direct.t, shifted.t):
        raise GridMismatch("trajectories use different time grids")
    wq = direct.basis.wq
    worst = 0.0
    for k in range(direct.t.size):
        diff = direct.values_on_quad(k) - shifted.values_on_quad(k)
        worst = max(worst, float(np.sqrt(np.sum(wq * diff ** 2))))
    return worst


def fem_spectral_gap(fem_traj, spec_traj: SpectralTrajectory) -> np.ndarray:
    """Per-sample L2(0,1) distance between the FEM interpolant and the spectral solution.

    Integrated on the spectral quadrature grid; the P1 interpolant is evaluated
    there exactly by linear interpolation.  Sample times must match.
    """
    mesh = fem_traj.ops.mesh
    t_fem = fem_traj.times
    if t_fem.shape != spec_traj.t.shape or not np.allclose(t_fem, spec_traj.t):
        raise GridMismatch("FEM and spectral trajectories use different time grids")
    xq = spec_traj.basis.xq
    wq = spec_traj.basis.wq
    gaps = np.empty(t_fem.size)
    for k, state in enumerate(fem_traj.states):
        u_fem = np.interp(xq, mesh.nodes, np.concatenate(([0.0], state.u)))
        v = spec_traj.values_on_quad(k)
        gaps[k] = np.sqrt(np.sum(wq * (u_fem - v) ** 2))
    return gaps


def spectral_identity_residual(traj: SpectralTrajectory, params: ModelParams) -> float:
    """Energy-identity defect of a direct-mode spectral run (trapezoid in time)."""
    if traj.mode != "direct":
        raise ValueError("identity residual is computed on direct-mode runs")
    b = traj.basis
    t = traj.t
    ns = t.size
    quad = np.empty(ns)
    visc = np.empty(ns)
    tipd = np.empty(ns)
    work = np.empty(ns)
    for k in range(ns):
        g, gp = traj.G[k], traj.Gp[k]
        vt1 = float(b.tau @ gp)
        grad2 = float(g @ (b.K @ g))
        vt2 = float(gp @ (b.M_omega @ gp))
        quad[k] = 0.5 * (grad2 + vt2 + vt1 ** 2)
        visc[k] = float(gp @ (b.K @ gp))
        tipd[k] = abs(vt1) ** params.m
        if params.source_enabled:
            vq = g @ b.W
            vtq = gp @ b.W
            work[k] = float(np.sum(b.wq * odd_power(vq, params.p) * vtq))
        else:
            work[k] = 0.0
    resid = ((quad[-1] - quad[0])
             + params.alpha * trapezoid(visc, t)
             + params.r * trapezoid(tipd, t)
             - trapezoid(work, t))
    lp0 = float(np.sum(b.wq * np.abs(traj.G[0] @ b.W) ** params.p)) if params.source_enabled else 0.0
    e0 = quad[0] - lp0 / params.p
    return abs(resid) / max(1.0, abs(e0))
