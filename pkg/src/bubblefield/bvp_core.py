"""Linear two-point BVP solvers: block-midpoint scheme and multiple shooting.

Both solvers reduce to the same block-bidiagonal linear system with one
full bottom boundary row,

    [ S_1  R_1                  ] [y_1]   [q_1]
    [      S_2  R_2             ] [y_2]   [q_2]
    [           ...             ] [...] = [...]
    [                S_N   R_N  ] [y_N]   [q_N]
    [ B_a  ...   B_{b-1}   B_b  ] [y_N+1] [ d ]

solved by forward block elimination (O(N n^3)) with explicit pivot checks
and iterative refinement against the assembled residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import IntegrationFailure, MeshTooCoarse, SingularSystem

# Pivot threshold, relative to the largest assembled block entry.
PIVOT_RTOL = 1e-12
# Target relative residual of the assembled system after refinement.
RESIDUAL_RTOL = 1e-10


@dataclass
class Mesh:
    """Strictly increasing parameter nodes t_1 < ... < t_{N+1}."""

    nodes: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.size < 2:
            raise MeshTooCoarse("mesh needs at least one interval (two nodes)")
        if not np.all(np.diff(self.nodes) > 0):
            raise ValueError("mesh nodes must be strictly increasing")

    @staticmethod
    def uniform(a: float, b: float, n_intervals: int) -> "Mesh":
        if n_intervals < 1:
            raise MeshTooCoarse("n_intervals must be >= 1")
        return Mesh(np.linspace(a, b, n_intervals + 1))

    @property
    def n_intervals(self) -> int:
        return self.nodes.size - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])


@dataclass
class LinearBVP:
    """y' = A(t) y + q(t) on [a, b] with B_a y(a) + B_b y(b) = d."""

    dim: int
    A: Callable[[float], np.ndarray]
    q: Callable[[float], np.ndarray]
    B_a: np.ndarray
    B_b: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        n = self.dim
        if n < 1:
            raise ValueError("dim must be >= 1")
        self.B_a = np.asarray(self.B_a, dtype=float).reshape(n, n)
        self.B_b = np.asarray(self.B_b, dtype=float).reshape(n, n)
        self.d = np.asarray(self.d, dtype=float).reshape(n)

    def eval_A(self, t: float) -> np.ndarray:
        return np.asarray(self.A(t), dtype=float).reshape(self.dim, self.dim)

    def eval_q(self, t: float) -> np.ndarray:
        return np.asarray(self.q(t), dtype=float).reshape(self.dim)


@dataclass
class ExtendedBoundary:
    """Optional coupling of the second-to-last node in the boundary row."""

    B_bm1: np.ndarray

    @staticmethod
    def zero(n: int) -> "ExtendedBoundary":
        return ExtendedBoundary(np.zeros((n, n)))


@dataclass
class Trajectory:
    """Node values of a solved BVP, plus the assembled-system residual."""

    mesh: Mesh
    values: np.ndarray                    # (N+1, n)
    residual: float = field(default=np.nan)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.mesh.nodes.size:
            raise ValueError("one value vector per mesh node required")


def _batched_gauss_solve(A: np.ndarray, B: np.ndarray, pivot_floor: float,
                         what: str) -> np.ndarray:
    """Solve A[i] X[i] = B[i] for a stack of small systems.

    Gaussian elimination with partial pivoting, vectorized over the stack;
    raises SingularSystem when any pivot falls below ``pivot_floor``.
    """
    A = np.array(A, dtype=float, copy=True)
    B = np.array(B, dtype=float, copy=True)
    m, n, _ = A.shape
    rows = np.arange(m)
    for col in range(n):
        piv_idx = col + np.argmax(np.abs(A[:, col:, col]), axis=1)
        for M in (A, B):
            tmp = M[rows, piv_idx].copy()
            M[rows, piv_idx] = M[rows, col]
            M[rows, col] = tmp
        piv = A[:, col, col]
        small = np.abs(piv).min()
        if not np.isfinite(small) or small < pivot_floor:
            raise SingularSystem(
                f"{what}: pivot {small:.3e} below floor {pivot_floor:.3e}")
        if col + 1 < n:
            fac = A[:, col + 1:, col] / piv[:, None]
            A[:, col + 1:, :] -= fac[:, :, None] * A[:, col, None, :]
            B[:, col + 1:, :] -= fac[:, :, None] * B[:, col, None, :]
    X = np.zeros_like(B)
    for col in range(n - 1, -1, -1):
        acc = B[:, col, :].copy()
        if col + 1 < n:
            acc -= np.einsum("ij,ijk->ik", A[:, col, col + 1:], X[:, col + 1:, :])
        X[:, col, :] = acc / A[:, col, col][:, None]
    return X


def _solve_bidiagonal_bottom(S, R, rhs, B_a, B_bm1, B_b, d):
    """Eliminate the block-bidiagonal system with full bottom row.

    Forward elimination expresses y_{i+1} = Phi_i y_i + psi_i, compresses
    the boundary row onto y_1, and back-substitutes.
    """
    N, n, _ = S.shape
    scale = max(np.abs(S).max(), np.abs(R).max(), np.abs(B_a).max(),
                np.abs(B_bm1).max(), np.abs(B_b).max(), 1.0)
    floor = PIVOT_RTOL * scale

    Phi = _batched_gauss_solve(R, -S, floor, "interval blocks")
    psi = _batched_gauss_solve(R, rhs[:, :, None], floor, "interval blocks")[..., 0]

    G = np.empty((N + 1, n, n))
    g = np.empty((N + 1, n))
    G[0] = np.eye(n)
    g[0] = 0.0
    for i in range(N):
        G[i + 1] = Phi[i] @ G[i]
        g[i + 1] = Phi[i] @ g[i] + psi[i]
    if not (np.isfinite(G).all() and np.isfinite(g).all()):
        raise SingularSystem("forward elimination overflowed; "
                             "system has a strong dichotomy")

    M = B_a + B_bm1 @ G[N - 1] + B_b @ G[N]
    rhs_M = d - B_bm1 @ g[N - 1] - B_b @ g[N]
    y0 = _batched_gauss_solve(M[None], rhs_M[None, :, None], floor,
                              "boundary system")[0, :, 0]
    return np.einsum("inm,m->in", G, y0) + g


def _block_residual(S, R, rhs, B_a, B_bm1, B_b, d, y):
    """Residual of the assembled system and its natural scale."""
    res_blocks = (np.einsum("ipq,iq->ip", S, y[:-1])
                  + np.einsum("ipq,iq->ip", R, y[1:]) - rhs)
    res_bc = B_a @ y[0] + B_bm1 @ y[-2] + B_b @ y[-1] - d
    block_scale = max(np.abs(S).max(), np.abs(R).max(), np.abs(B_a).max(),
                      np.abs(B_bm1).max(), np.abs(B_b).max())
    scale = block_scale * max(np.abs(y).max(), 1.0) + max(np.abs(rhs).max(),
                                                          np.abs(d).max(), 1.0)
    return res_blocks, res_bc, scale


def _solve_refined(S, R, rhs, B_a, B_bm1, B_b, d):
    """Solve and iteratively refine until the relative residual is small."""
    y = _solve_bidiagonal_bottom(S, R, rhs, B_a, B_bm1, B_b, d)
    rel = np.inf
    for _ in range(3):
        res_blocks, res_bc, scale = _block_residual(S, R, rhs, B_a, B_bm1,
                                                    B_b, d, y)
        rel = max(np.abs(res_blocks).max(), np.abs(res_bc).max()) / scale
        if rel <= 1e-13:
            break
        e = _solve_bidiagonal_bottom(S, R, res_blocks, B_a, B_bm1, B_b, res_bc)
        y = y - e
    if not np.isfinite(rel) or rel > RESIDUAL_RTOL:
        raise SingularSystem(
            f"assembled-system residual {rel:.3e} exceeds {RESIDUAL_RTOL:.1e}")
    return y, rel


def solve_block_midpoint(bvp: LinearBVP, mesh: Mesh,
                         ext: ExtendedBoundary | None = None) -> Trajectory:
    """Solve the BVP with the midpoint discretization.

    Interval i couples y_i and y_{i+1} through

        (y_{i+1} - y_i)/h_i = A(t_{i+1/2}) (y_i + y_{i+1})/2 + q(t_{i+1/2}),

    i.e. S_i = -h_i^{-1} I - A/2 and R_i = h_i^{-1} I - A/2.
    """
    n = bvp.dim
    N = mesh.n_intervals
    if N < 1:
        raise MeshTooCoarse("need at least one interval")
    B_bm1 = ext.B_bm1 if ext is not None else np.zeros((n, n))
    B_bm1 = np.asarray(B_bm1, dtype=float).reshape(n, n)

    tm = mesh.midpoints
    A_mid = np.array([bvp.eval_A(t) for t in tm])
    q_mid = np.array([bvp.eval_q(t) for t in tm])
    hinv = 1.0 / mesh.h
    eye = np.eye(n)
    S = -hinv[:, None, None] * eye - 0.5 * A_mid
    R = hinv[:, None, None] * eye - 0.5 * A_mid

    y, rel = _solve_refined(S, R, q_mid, bvp.B_a, B_bm1, bvp.B_b, bvp.d)
    return Trajectory(mesh=mesh, values=y, residual=rel)


def _rk4_interval(bvp: LinearBVP, t0: np.ndarray, h: np.ndarray,
                  n_sub: int = 4):
    """Propagate fundamental matrices and particular solutions per interval.

    Y' = A(t) Y with Y(t_i) = I and v' = A(t) v + q(t) with v(t_i) = 0,
    classical RK4 with ``n_sub`` fixed substeps per interval.
    """
    N = t0.size
    n = bvp.dim
    Y = np.broadcast_to(np.eye(n), (N, n, n)).copy()
    v = np.zeros((N, n))

    def eval_all(ts):
        A = np.array([bvp.eval_A(t) for t in ts])
        q = np.array([bvp.eval_q(t) for t in ts])
        return A, q

    hs = h / n_sub
    for k in range(n_sub):
        ta = t0 + k * hs
        tb = ta + 0.5 * hs
        tc = ta + hs
        Aa, qa = eval_all(ta)
        Ab, qb = eval_all(tb)
        Ac, qc = eval_all(tc)

        def f(A, q, Y, v):
            return np.einsum("ipq,iqr->ipr", A, Y), \
                np.einsum("ipq,iq->ip", A, v) + q

        k1Y, k1v = f(Aa, qa, Y, v)
        k2Y, k2v = f(Ab, qb, Y + 0.5 * hs[:, None, None] * k1Y,
                     v + 0.5 * hs[:, None] * k1v)
        k3Y, k3v = f(Ab, qb, Y + 0.5 * hs[:, None, None] * k2Y,
                     v + 0.5 * hs[:, None] * k2v)
        k4Y, k4v = f(Ac, qc, Y + hs[:, None, None] * k3Y,
                     v + hs[:, None] * k3v)
        Y = Y + (hs[:, None, None] / 6.0) * (k1Y + 2 * k2Y + 2 * k3Y + k4Y)
        v = v + (hs[:, None] / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (np.isfinite(Y).all() and np.isfinite(v).all()):
            raise IntegrationFailure("interval integration produced "
                                     "non-finite values")
    return Y, v


def solve_multiple_shooting(bvp: LinearBVP, mesh: Mesh) -> Trajectory:
    """Solve the BVP by multiple shooting.

    Per interval the fundamental matrix Gamma_i = Y_i(t_{i+1}) and the
    particular value w_i = v_i(t_{i+1}) give the matching conditions
    s_{i+1} = Gamma_i s_i + w_i, closed by B_a s_1 + B_b s_{N+1} = d.
    The matching system is the same block-bidiagonal shape as the
    midpoint scheme with S_i = -Gamma_i, R_i = I.
    """
    n = bvp.dim
    N = mesh.n_intervals
    if N < 1:
        raise MeshTooCoarse("need at least one interval")
    Gamma, w = _rk4_interval(bvp, mesh.nodes[:-1], mesh.h)
    eye = np.broadcast_to(np.eye(n), (N, n, n))
    y, rel = _solve_refined(-Gamma, eye.copy(), w, bvp.B_a,
                            np.zeros((n, n)), bvp.B_b, bvp.d)
    return Trajectory(mesh=mesh, values=y, residual=rel)
