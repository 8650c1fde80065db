"""Near-field bubble shape model: arc-length ODE system and Newton solver.

State is y = (r, z, theta): radial coordinate, height and elevation angle
of the meridian, parameterized by arc length s. Three right-hand-side
variants share dr/ds = cos(theta), dz/ds = sin(theta) and differ in

    dtheta/ds = drive - sin(theta)/r

with drive = 2 + beta*z            (beta form)
           = dp/alpha              (experiment form)
           = (rho*g*z - p_E)/alpha (e-field form)

The nonlinear solve freezes the Jacobian at the current iterate, hands the
resulting linear BVP to bvp_core, and repeats (damped Newton).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import bvp_core
from .errors import (AxisSingularity, NewtonDivergence, NoClosure,
                     SingularSystem, ZeroSurfaceTension)

# Radial floor below which sin(theta)/r switches to its symmetric-apex limit.
R_FLOOR = 1e-9

EFIELD_FORMS = ("sin", "eps-sin2")


@dataclass(frozen=True)
class EFieldParams:
    """Uniform-field pressure parameters.

    ``form`` selects the pressure law used inside the ODE:
    "sin" is p_E = (9/8) |E0|^2 sin(theta) (the experiment-table law),
    "eps-sin2" is p_E = (9/8) eps |E0|^2 sin^2(theta) (the canonical law).
    """

    E0_sq: float
    epsilon: float = 1.0
    form: str = "sin"

    def __post_init__(self):
        if self.E0_sq < 0:
            raise ValueError("E0_sq must be >= 0")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.form not in EFIELD_FORMS:
            raise ValueError(f"unknown e-field form {self.form!r}")


@dataclass(frozen=True)
class NearFieldParams:
    """Parameters selecting and feeding one right-hand-side variant.

    Exactly one of ``beta``, ``delta_p_over_alpha``, ``efield`` must be
    set; it picks the drive term of dtheta/ds.
    """

    a: float = 0.01
    delta_p_over_alpha: Optional[float] = None
    beta: Optional[float] = None
    efield: Optional[EFieldParams] = None
    rho: float = 0.0
    g: float = 0.0
    alpha: float = 1.0
    sigma: Optional[float] = None
    R_t: Optional[float] = None

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("a must be > 0")
        n_set = sum(x is not None
                    for x in (self.beta, self.delta_p_over_alpha, self.efield))
        if n_set != 1:
            raise ValueError("exactly one of beta, delta_p_over_alpha, "
                             "efield must be set")
        if self.efield is not None and self.alpha <= 0:
            raise ValueError("alpha must be > 0 for the e-field variant")

    @property
    def variant(self) -> str:
        if self.beta is not None:
            return "beta"
        if self.delta_p_over_alpha is not None:
            return "experiment"
        return "efield"


@dataclass(frozen=True)
class ProfileState:
    r: float
    z: float
    theta: float


@dataclass
class BubbleProfile:
    """Sampled meridian curve (s, r(s), z(s), theta(s))."""

    s: np.ndarray
    values: np.ndarray            # (len(s), 3) columns r, z, theta
    L: float
    variant: str
    newton_updates: list = field(default_factory=list)

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.s.size < 2 or self.values.shape != (self.s.size, 3):
            raise ValueError("profile needs >= 2 samples of (r, z, theta)")
        if not np.all(np.diff(self.s) > 0):
            raise ValueError("arc-length samples must be strictly increasing")

    @property
    def r(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def z(self) -> np.ndarray:
        return self.values[:, 1]

    @property
    def theta(self) -> np.ndarray:
        return self.values[:, 2]

    @property
    def samples(self):
        return list(zip(self.s, (ProfileState(*v) for v in self.values)))


def _drive_and_dz_dth(y: np.ndarray, p: NearFieldParams):
    """Drive term of dtheta/ds and its z- and theta-derivatives."""
    z = y[..., 1]
    th = y[..., 2]
    if p.variant == "beta":
        drive = 2.0 + p.beta * z
        d_dz = np.full_like(z, p.beta)
        d_dth = np.zeros_like(z)
    elif p.variant == "experiment":
        drive = np.full_like(z, p.delta_p_over_alpha)
        d_dz = np.zeros_like(z)
        d_dth = np.zeros_like(z)
    else:
        ef = p.efield
        if ef.form == "sin":
            pE = 1.125 * ef.E0_sq * np.sin(th)
            dpE = 1.125 * ef.E0_sq * np.cos(th)
        else:
            pE = 1.125 * ef.epsilon * ef.E0_sq * np.sin(th) ** 2
            dpE = 1.125 * ef.epsilon * ef.E0_sq * np.sin(2.0 * th)
        drive = (p.rho * p.g * z - pE) / p.alpha
        d_dz = np.full_like(z, p.rho * p.g / p.alpha)
        d_dth = -dpE / p.alpha
    return drive, d_dz, d_dth


def _rhs_array(y: np.ndarray, p: NearFieldParams) -> np.ndarray:
    """Vectorized right-hand side with the apex limit below R_FLOOR."""
    r = y[..., 0]
    th = y[..., 2]
    sin, cos = np.sin(th), np.cos(th)
    drive, _, _ = _drive_and_dz_dth(y, p)
    apex = np.abs(r) < R_FLOOR
    safe_r = np.where(apex, 1.0, r)
    curv = np.where(apex, 0.5 * drive, drive - sin / safe_r)
    return np.stack([cos, sin, curv], axis=-1)


def _jac_array(y: np.ndarray, p: NearFieldParams) -> np.ndarray:
    """Vectorized Jacobian of the right-hand side w.r.t. (r, z, theta)."""
    r = y[..., 0]
    th = y[..., 2]
    sin, cos = np.sin(th), np.cos(th)
    drive, d_dz, d_dth = _drive_and_dz_dth(y, p)
    apex = np.abs(r) < R_FLOOR
    safe_r = np.where(apex, 1.0, r)
    J = np.zeros(y.shape[:-1] + (3, 3))
    J[..., 0, 2] = -sin
    J[..., 1, 2] = cos
    J[..., 2, 0] = np.where(apex, 0.0, sin / safe_r ** 2)
    J[..., 2, 1] = np.where(apex, 0.5 * d_dz, d_dz)
    J[..., 2, 2] = np.where(apex, 0.5 * d_dth, d_dth - cos / safe_r)
    return J


def _as_state_array(state) -> np.ndarray:
    if isinstance(state, ProfileState):
        return np.array([state.r, state.z, state.theta], dtype=float)
    return np.asarray(state, dtype=float).reshape(3)


def rhs(state, p: NearFieldParams, *, apex_limit: bool = True) -> np.ndarray:
    """(dr/ds, dz/ds, dtheta/ds) at a state.

    With ``apex_limit=False`` a state below the radial floor raises
    AxisSingularity instead of using the regularized curvature.
    """
    y = _as_state_array(state)
    if not apex_limit and abs(y[0]) < R_FLOOR:
        raise AxisSingularity(f"r={y[0]:.3e} below floor {R_FLOOR:.1e}")
    return _rhs_array(y, p)


def jacobian(state, p: NearFieldParams, *, apex_limit: bool = True) -> np.ndarray:
    """Partial derivatives of rhs w.r.t. (r, z, theta) at a state."""
    y = _as_state_array(state)
    if not apex_limit and abs(y[0]) < R_FLOOR:
        raise AxisSingularity(f"r={y[0]:.3e} below floor {R_FLOOR:.1e}")
    return _jac_array(y, p)


def bond_number(rho: float, g: float, R_t: float, sigma: float) -> float:
    """Bond number -rho g R_t^2 / sigma."""
    if sigma == 0:
        raise ZeroSurfaceTension("sigma must be nonzero")
    return -rho * g * R_t ** 2 / sigma


BOUNDARY_MODES = ("ivp", "theta-end", "closure")


def _boundary_rows(mode: str, a: float, theta_start: float, theta_end: float):
    B_a = np.zeros((3, 3))
    B_b = np.zeros((3, 3))
    if mode == "ivp":
        B_a[:] = np.eye(3)
        d = np.array([a, 0.0, theta_start])
    elif mode == "theta-end":
        B_a[0, 0] = 1.0
        B_a[1, 1] = 1.0
        B_b[2, 2] = 1.0
        d = np.array([a, 0.0, theta_end])
    elif mode == "closure":
        B_a[0, 0] = 1.0
        B_a[1, 1] = 1.0
        B_b[2, 0] = 1.0
        d = np.array([a, 0.0, 0.0])
    else:
        raise ValueError(f"unknown boundary mode {mode!r}; "
                         f"expected one of {BOUNDARY_MODES}")
    return B_a, B_b, d


def _rk4_seed(p: NearFieldParams, s: np.ndarray, y0: np.ndarray) -> np.ndarray:
    """Forward integration of the nonlinear system as a Newton seed."""
    y = np.empty((s.size, 3))
    y[0] = y0
    for i in range(s.size - 1):
        h = s[i + 1] - s[i]
        yi = y[i]
        k1 = _rhs_array(yi, p)
        k2 = _rhs_array(yi + 0.5 * h * k1, p)
        k3 = _rhs_array(yi + 0.5 * h * k2, p)
        k4 = _rhs_array(yi + h * k3, p)
        y[i + 1] = yi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def _arc_seed(p: NearFieldParams, s: np.ndarray, a: float,
              th0: float, th1: float) -> np.ndarray:
    """Circular-arc interpolant between the boundary angles."""
    L = s[-1] - s[0]
    th = th0 + (th1 - th0) * (s - s[0]) / L
    ds = np.diff(s)
    r = a + np.concatenate([[0.0], np.cumsum(np.cos(th[:-1]) * ds)])
    z = np.concatenate([[0.0], np.cumsum(np.sin(th[:-1]) * ds)])
    r = np.maximum(r, R_FLOOR)
    return np.stack([r, z, th], axis=-1)


def _nonlinear_residual(y, h, p, B_a, B_b, d):
    mid = 0.5 * (y[:-1] + y[1:])
    F = (y[1:] - y[:-1]) / h[:, None] - _rhs_array(mid, p)
    bc = B_a @ y[0] + B_b @ y[-1] - d
    return max(np.abs(F).max(), np.abs(bc).max())


def solve_profile(p: NearFieldParams, L: float, N: int, *,
                  boundary: str = "ivp",
                  theta_start: float = math.pi / 2,
                  theta_end: float = math.pi,
                  initial_guess: Optional[np.ndarray] = None,
                  tol: float = 1e-9,
                  max_iter: int = 50) -> BubbleProfile:
    """Newton-solve the nonlinear profile BVP on a uniform arc mesh.

    ``boundary`` picks the three imposed conditions:
      "ivp":       r(0)=a, z(0)=0, theta(0)=theta_start
      "theta-end": r(0)=a, z(0)=0, theta(L)=theta_end
      "closure":   r(0)=a, z(0)=0, r(L)=0

    Each Newton step linearizes the right-hand side at the iterate and
    solves the resulting linear BVP with the block-midpoint scheme.
    """
    if L <= 0:
        raise ValueError("L must be > 0")
    if N < 10:
        raise ValueError("N must be >= 10")
    mesh = bvp_core.Mesh.uniform(0.0, L, N)
    s = mesh.nodes
    h = mesh.h
    B_a, B_b, d = _boundary_rows(boundary, p.a, theta_start, theta_end)

    if initial_guess is not None:
        y = np.asarray(initial_guess, dtype=float)
        if y.shape != (N + 1, 3):
            raise ValueError("initial_guess must have shape (N+1, 3)")
        y = y.copy()
    elif boundary == "ivp":
        y = _rk4_seed(p, s, np.array([p.a, 0.0, theta_start]))
    else:
        y = _arc_seed(p, s, p.a, theta_start, theta_end)

    # Secondary exit: the iterate already satisfies the discrete system to
    # well below tol (update norms then only reflect linear-solve roundoff).
    res_exit = 0.01 * tol
    updates: list = []
    res = _nonlinear_residual(y, h, p, B_a, B_b, d)
    for _ in range(max_iter):
        if res <= res_exit:
            return BubbleProfile(s=s, values=y, L=L, variant=p.variant,
                                 newton_updates=updates)
        mid = 0.5 * (y[:-1] + y[1:])
        A_tab = _jac_array(mid, p)
        q_tab = _rhs_array(mid, p) - np.einsum("ipq,iq->ip", A_tab, mid)
        t0 = s[0]
        hstep = h[0]

        def lookup(t, tab):
            i = int((t - t0) / hstep)
            return tab[min(max(i, 0), N - 1)]

        bvp = bvp_core.LinearBVP(dim=3,
                                 A=lambda t: lookup(t, A_tab),
                                 q=lambda t: lookup(t, q_tab),
                                 B_a=B_a, B_b=B_b, d=d)
        try:
            lin = bvp_core.solve_block_midpoint(bvp, mesh)
        except SingularSystem as exc:
            raise NewtonDivergence(
                f"linearized system became singular: {exc}") from exc
        dy = lin.values - y

        lam = 1.0
        accepted = False
        for _ in range(9):
            y_try = y + lam * dy
            res_try = _nonlinear_residual(y_try, h, p, B_a, B_b, d)
            if res_try < res or res_try < tol:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            y_try = y + lam * dy
            res_try = _nonlinear_residual(y_try, h, p, B_a, B_b, d)
        y, res = y_try, res_try
        updates.append(float(np.abs(lam * dy).max()))
        if updates[-1] <= tol:
            return BubbleProfile(s=s, values=y, L=L, variant=p.variant,
                                 newton_updates=updates)
    raise NewtonDivergence(
        f"no convergence in {max_iter} iterations (residual {res:.3e}); "
        "L may be far from a valid bubble length")


def _rescale_guess(profile: BubbleProfile, s_new: np.ndarray) -> np.ndarray:
    """Arc-length-rescale a converged profile onto a new mesh."""
    s_old = profile.s * (s_new[-1] / profile.s[-1])
    return np.stack([np.interp(s_new, s_old, profile.values[:, k])
                     for k in range(3)], axis=-1)


def continue_in_L(p: NearFieldParams, L0: float,
                  stop: Optional[Callable[[BubbleProfile], bool]] = None, *,
                  dt: float = 1e-3,
                  boundary: str = "ivp",
                  theta_start: float = math.pi / 2,
                  theta_end: float = math.pi,
                  factor: float = 1.05,
                  tol_r: Optional[float] = None,
                  max_factor: float = 100.0):
    """Grow L geometrically until the bubble closes; refine by bisection.

    The default criterion is radial closure |r(L)| <= tol_r with
    tol_r = 1e-3 * max_r(profile); when r(L) changes sign between ladder
    steps the crossing is bisected. A custom ``stop`` callable short-
    circuits the ladder as soon as it returns True.

    Returns (profile, L_final). Raises NoClosure past max_factor * L0 and
    returns the last converged profile if Newton diverges mid-ladder.
    """
    if L0 <= 0:
        raise ValueError("L0 must be > 0")

    def solve_at(L, guess=None):
        N = max(10, int(round(L / dt)))
        # the forward-integration seed beats a rescaled profile in ivp mode
        ig = None if (guess is None or boundary == "ivp") else _rescale_guess(
            guess, np.linspace(0.0, L, N + 1))
        return solve_profile(p, L, N, boundary=boundary,
                             theta_start=theta_start, theta_end=theta_end,
                             initial_guess=ig)

    def r_end(profile):
        return profile.values[-1, 0]

    def default_met(profile):
        return abs(r_end(profile)) <= (tol_r if tol_r is not None
                                       else 1e-3 * profile.r.max())

    prof = solve_at(L0)
    if stop is not None and stop(prof):
        return prof, L0
    if stop is None and default_met(prof):
        return prof, L0

    L_prev, prof_prev = L0, prof
    L = L0
    while L <= max_factor * L0:
        L = L_prev * factor
        # on divergence shrink the ladder step toward the last good L
        prof = None
        for _ in range(7):
            try:
                prof = solve_at(L, guess=prof_prev)
                break
            except NewtonDivergence:
                L = 0.5 * (L_prev + L)
        if prof is None:
            return prof_prev, L_prev
        if stop is not None:
            if stop(prof):
                return prof, L
        else:
            if default_met(prof):
                return prof, L
            if r_end(prof_prev) * r_end(prof) < 0:
                lo, hi = (L_prev, L)
                plo, phi = prof_prev, prof
                for _ in range(60):
                    Lm = 0.5 * (lo + hi)
                    try:
                        pm = solve_at(Lm, guess=plo)
                    except NewtonDivergence:
                        hi = Lm   # best effort: retreat toward the good side
                        continue
                    if default_met(pm):
                        return pm, Lm
                    if r_end(plo) * r_end(pm) < 0:
                        hi, phi = Lm, pm
                    else:
                        lo, plo = Lm, pm
                return phi, hi
        L_prev, prof_prev = L, prof
    raise NoClosure(f"no closure for L up to {max_factor:g} * L0")
