"""P1 finite-element Galerkin system on (0, 1).

Matrices are assembled on the full node set and reduced by eliminating the
clamped degree of freedom at x = 0 (row/column elimination, which keeps the
mass matrix positive definite and the discrete energy balance exact).
Reduced dof j corresponds to node j + 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class DegenerateElement(ValueError):
    pass


@dataclass(frozen=True)
class Mesh1D:
    """Strictly increasing nodes with nodes[0] = 0 and nodes[-1] = 1."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("mesh needs at least 2 elements")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ValueError("mesh must span [0, 1]")
        if np.any(np.diff(nodes) <= 0.0):
            raise DegenerateElement("element lengths must be positive")

    @classmethod
    def uniform(cls, n_elem: int) -> "Mesh1D":
        return cls(np.linspace(0.0, 1.0, n_elem + 1))

    @property
    def n_elem(self) -> int:
        return self.nodes.size - 1

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)


def _tridiag_band(mat: sp.spmatrix) -> np.ndarray:
    """(3, n) banded storage (solve_banded layout) of a tridiagonal matrix."""
    a = mat.toarray()
    n = a.shape[0]
    ab = np.zeros((3, n))
    ab[1] = np.diag(a)
    if n > 1:
        ab[0, 1:] = np.diag(a, 1)
        ab[2, :-1] = np.diag(a, -1)
    return ab


@dataclass(frozen=True)
class AssembledOperators:
    """Reduced mass/stiffness/tip operators plus element quadrature data."""

    mesh: Mesh1D
    M: sp.csr_matrix          # interior mass, int(phi_i phi_j)
    K: sp.csr_matrix          # stiffness, int(phi_i' phi_j')
    Bg: sp.csr_matrix         # tip point mass, 1 at the last dof
    quadrature_order: int
    M_band: np.ndarray = field(repr=False, default=None)
    K_band: np.ndarray = field(repr=False, default=None)
    A_band: np.ndarray = field(repr=False, default=None)   # M + Bg
    qx: np.ndarray = field(repr=False, default=None)        # (n_elem, q) Gauss points
    qw: np.ndarray = field(repr=False, default=None)        # (n_elem, q) Gauss weights
    shape_left: np.ndarray = field(repr=False, default=None)
    shape_right: np.ndarray = field(repr=False, default=None)

    @property
    def n_dof(self) -> int:
        return self.M.shape[0]

    @property
    def A(self) -> sp.csr_matrix:
        return (self.M + self.Bg).tocsr()


def assemble(mesh: Mesh1D, quadrature_order: int = 4) -> AssembledOperators:
    """Assemble reduced P1 operators with per-element Gauss data for nonlinear terms."""
    n = mesh.n_nodes
    h = mesh.h
    if np.any(h <= 0.0):
        raise DegenerateElement("element lengths must be positive")

    lo = np.arange(n - 1)
    hi = lo + 1
    rows = np.concatenate([lo, lo, hi, hi])
    cols = np.concatenate([lo, hi, lo, hi])

    m_vals = np.concatenate([h / 3.0, h / 6.0, h / 6.0, h / 3.0])
    k_vals = np.concatenate([1.0 / h, -1.0 / h, -1.0 / h, 1.0 / h])
    M_full = sp.coo_matrix((m_vals, (rows, cols)), shape=(n, n)).tocsr()
    K_full = sp.coo_matrix((k_vals, (rows, cols)), shape=(n, n)).tocsr()

    M = M_full[1:, 1:].tocsr()
    K = K_full[1:, 1:].tocsr()
    Bg = sp.csr_matrix(([1.0], ([n - 2], [n - 2])), shape=(n - 1, n - 1))

    xi, w = np.polynomial.legendre.leggauss(quadrature_order)
    mid = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
    qx = mid[:, None] + 0.5 * h[:, None] * xi[None, :]
    qw = 0.5 * h[:, None] * w[None, :]
    shape_right = 0.5 * (1.0 + xi)   # hat of the right node on the reference element
    shape_left = 0.5 * (1.0 - xi)

    M_band = _tridiag_band(M)
    K_band = _tridiag_band(K)
    A_band = M_band.copy()
    A_band[1, -1] += 1.0

    return AssembledOperators(
        mesh=mesh, M=M, K=K, Bg=Bg, quadrature_order=quadrature_order,
        M_band=M_band, K_band=K_band, A_band=A_band,
        qx=qx, qw=qw, shape_left=shape_left, shape_right=shape_right)


def _full_nodal(u: np.ndarray) -> np.ndarray:
    """Prepend the clamped zero to a reduced vector."""
    return np.concatenate(([0.0], u))


def element_values(u: np.ndarray, ops: AssembledOperators) -> np.ndarray:
    """P1 interpolant of a reduced vector at the element Gauss points, shape (n_elem, q)."""
    uf = _full_nodal(u)
    return uf[:-1, None] * ops.shape_left[None, :] + uf[1:, None] * ops.shape_right[None, :]


def odd_power(u, p: float):
    """sgn(u)|u|^(p-1), the source nonlinearity |u|^(p-2) u for real p."""
    return np.sign(u) * np.abs(u) ** (p - 1.0)


def source_load(u: np.ndarray, p: float, ops: AssembledOperators) -> np.ndarray:
    """S_j(u) = int |u_h|^(p-2) u_h phi_j dx by per-element Gauss quadrature."""
    fq = odd_power(element_values(u, ops), p) * ops.qw
    n = ops.mesh.n_nodes
    s = np.zeros(n)
    np.add.at(s, np.arange(n - 1), fq @ ops.shape_left)
    np.add.at(s, np.arange(1, n), fq @ ops.shape_right)
    return s[1:]


def source_jacobian_band(u: np.ndarray, p: float, ops: AssembledOperators) -> np.ndarray:
    """Banded (p-1)|u_h|^(p-2)-weighted mass matrix, the derivative of source_load."""
    g = (p - 1.0) * np.abs(element_values(u, ops)) ** (p - 2.0) * ops.qw
    d_ll = g @ (ops.shape_left * ops.shape_left)
    d_lr = g @ (ops.shape_left * ops.shape_right)
    d_rr = g @ (ops.shape_right * ops.shape_right)

    n = ops.mesh.n_nodes
    diag = np.zeros(n)
    np.add.at(diag, np.arange(n - 1), d_ll)
    np.add.at(diag, np.arange(1, n), d_rr)

    ab = np.zeros((3, n - 1))
    ab[1] = diag[1:]
    ab[0, 1:] = d_lr[1:]    # superdiagonal of the reduced system
    ab[2, :-1] = d_lr[1:]
    return ab


def lp_norm_p(u: np.ndarray, p: float, ops: AssembledOperators) -> float:
    """int |u_h|^p dx by per-element Gauss quadrature."""
    uq = element_values(u, ops)
    return float(np.sum(ops.qw * np.abs(uq) ** p))


def boundary_damping(v_gamma1: float, r: float, m: float) -> float:
    """Tip damping force r |v|^(m-2) v at the gamma1 node."""
    return r * float(odd_power(v_gamma1, m))


def boundary_damping_jacobian(v_gamma1: float, r: float, m: float,
                              eta: float = 1e-12) -> float:
    """Derivative of the regularized tip damping, r (m-1) (v^2 + eta^2)^((m-2)/2).

    The regularizer only enters the Jacobian; the residual always uses the
    exact force.  For 2 < m < 3 the exact derivative is singular at v = 0.
    """
    return r * (m - 1.0) * float((v_gamma1 ** 2 + eta ** 2) ** (0.5 * (m - 2.0)))
