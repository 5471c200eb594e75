"""Potential-well constants: embedding constant B, alpha1, well depth d, alpha2.

B maximizes ||u||_p over the discrete unit sphere ||u_x||_2 = 1, either with
both ends clamped (H01) or with only the left end clamped (H1_Gamma0, the
space the tip-mass problem actually lives in).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import fem
from .fem import Mesh1D


class NonConvergence(RuntimeError):
    pass


class HypothesisNotMet(ValueError):
    pass


@dataclass(frozen=True)
class Alpha2Result:
    value: float
    at_boundary: bool = False
    residual: float = 0.0

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class ThresholdConstants:
    B: float
    alpha1: float
    d: float
    p: float
    space: str
    alpha2_at: Alpha2Result | None = None
    provenance: dict = field(default_factory=dict)


def well_constants(B: float, p: float) -> tuple[float, float]:
    """alpha1 = B^(-p/(p-2)) and d = (1/2 - 1/p) alpha1^2."""
    if B <= 0.0 or p <= 2.0:
        raise ValueError("need B > 0 and p > 2")
    alpha1 = B ** (-p / (p - 2.0))
    d = (0.5 - 1.0 / p) * alpha1 ** 2
    return alpha1, d


def well_function(lam: float, B: float, p: float) -> float:
    """g(lambda) = lambda^2/2 - (B^p/p) lambda^p; g(alpha1) = d, decreasing beyond."""
    return 0.5 * lam ** 2 - (B ** p / p) * lam ** p


def alpha2(E0: float, B: float, p: float, tol: float = 1e-12,
           boundary_tol: float = 1e-12) -> Alpha2Result:
    """Root lambda > alpha1 of g(lambda) = E0, by bisection.

    E0 = d degenerates to alpha1 (flagged); E0 > d is a hypothesis failure.
    """
    alpha1, d = well_constants(B, p)
    if E0 > d + boundary_tol:
        raise HypothesisNotMet(f"E0 = {E0:.6g} >= d = {d:.6g}")
    if E0 >= d - boundary_tol:
        return Alpha2Result(value=alpha1, at_boundary=True,
                            residual=abs(well_function(alpha1, B, p) - E0))

    hi = 2.0 * alpha1
    while well_function(hi, B, p) > E0:
        hi *= 2.0
        if hi > 1e30:
            raise NonConvergence("failed to bracket the alpha2 root")
    lo = alpha1
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if well_function(mid, B, p) > E0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    return Alpha2Result(value=lam, residual=abs(well_function(lam, B, p) - E0))


def _space_ops(mesh: Mesh1D, space: str):
    """Reduced stiffness/quadrature for the chosen discrete space.

    H1_Gamma0 reuses the standard reduction (left node clamped); H01
    additionally eliminates the right node.
    """
    ops = fem.assemble(mesh)
    if space == "H1_Gamma0":
        K = ops.K
        pad = lambda u: u
        strip = lambda s: s
    elif space == "H01":
        K = ops.K[:-1, :-1].tocsr()
        pad = lambda u: np.concatenate([u, [0.0]])
        strip = lambda s: s[:-1]
    else:
        raise ValueError(f"unknown space {space!r}; use 'H01' or 'H1_Gamma0'")
    return ops, K, pad, strip


def embedding_constant(p: float, mesh: Mesh1D, space: str = "H01",
                       n_restarts: int = 8, seed: int = 0,
                       max_iter: int = 2000, gtol: float = 1e-13,
                       provenance: dict | None = None) -> float:
    """Discrete best constant of the H^1 -> L^p embedding on the mesh.

    Projected gradient ascent of ||u||_p on the sphere u'K u = 1, with a
    stiffness-preconditioned direction, backtracking, and seeded random
    restarts.  p = 2 is accepted here for reference eigenvalue checks even
    though the model itself requires p > 2.
    """
    if p < 2.0:
        raise ValueError("p >= 2 required")
    ops, K, pad, strip = _space_ops(mesh, space)
    lu = splu(K.tocsc())
    rng = np.random.default_rng(seed)

    def objective(u):
        return fem.lp_norm_p(pad(u), p, ops)

    def gradient(u):
        # d/du_j of int|u_h|^p is p * int |u_h|^(p-2) u_h phi_j
        return p * strip(fem.source_load(pad(u), p, ops))

    def normalize(u):
        nrm = math.sqrt(float(u @ (K @ u)))
        if nrm == 0.0:
            raise ValueError("zero candidate")
        return u / nrm

    best = -np.inf
    total_iters = 0
    converged_any = False
    for restart in range(n_restarts):
        u = normalize(rng.standard_normal(K.shape[0]))
        f = objective(u)
        step_len = 1.0
        for it in range(max_iter):
            g = lu.solve(gradient(u))           # ascent direction in the K metric
            gnorm = math.sqrt(max(float(g @ (K @ g)), 0.0))
            if gnorm > 0.0:
                g = g / gnorm                   # unit step regardless of |u|^(p-1) scaling
            f_before = f
            while step_len > 1e-14:
                cand = normalize(u + step_len * g)
                fc = objective(cand)
                if fc > f:
                    u, f = cand, fc
                    step_len = min(step_len * 2.0, 1.0)
                    break
                step_len *= 0.5
            total_iters += 1
            if f - f_before <= gtol * max(1.0, abs(f)):
                converged_any = True
                break
        best = max(best, f)

    if not converged_any:
        raise NonConvergence("projected ascent exhausted its restart budget")
    B = best ** (1.0 / p)
    if provenance is not None:
        provenance.update({"mesh_n": mesh.n_elem, "space": space, "p": p,
                           "restarts": n_restarts, "seed": seed,
                           "ascent_iterations": total_iters, "gtol": gtol})
    return float(B)


def compute_thresholds(p: float, mesh: Mesh1D, space: str = "H01",
                       E0: float | None = None, seed: int = 0,
                       n_restarts: int = 8) -> ThresholdConstants:
    """B, alpha1, d (and alpha2 when an initial energy is supplied), with provenance."""
    if p <= 2.0:
        raise ValueError("p > 2 required")
    prov: dict = {"alpha2_construction": "root of g(lam)=E0 beyond alpha1, bisection 1e-12"}
    B = embedding_constant(p, mesh, space=space, seed=seed,
                           n_restarts=n_restarts, provenance=prov)
    alpha1, d = well_constants(B, p)
    a2 = None
    if E0 is not None and E0 < d:
        a2 = alpha2(E0, B, p)
    return ThresholdConstants(B=B, alpha1=alpha1, d=d, p=p, space=space,
                              alpha2_at=a2, provenance=prov)
