"""Damped Newton solver for the reduced Allen-Cahn equation

    -u_ss - u_tt - ((m-1)/s) u_s - ((m-1)/t) u_t = u - u^3

on the triangle {0 <= t <= s <= R}, with u = 0 on the diagonal, even
reflection across t = 0, and Dirichlet data H(y)H(z) on the outer edge.
The solved field is odd-reflected onto the full quadrant and all first and
second derivative fields are produced with second-order stencils.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from saddlecheck.grid import Grid, NODE_AXIS, build_grid
from saddlecheck.params import DimensionParams, SQRT2, st_to_yz
from saddlecheck.scalars import heteroclinic, hh_supersolution


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-10          # max-norm of the discrete residual
    max_newton_iters: int = 40
    damping_halvings: int = 30
    linear_tol: float = 1e-10          # relative residual of the inner solve

    def __post_init__(self) -> None:
        if self.newton_tol <= 0.0:
            raise ValueError("newton_tol must be positive")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be >= 1")


@dataclass(frozen=True)
class SaddleSolution:
    """Solved field on the full quadrant [0,R]^2 plus derivative fields.

    All arrays are (N+1, N+1), indexed [i, j] = (s = i*h, t = j*h).  The
    field u is odd under (s,t) <-> (t,s) by construction; derivative fields
    are second-order accurate except in the flagged outer band where
    one-sided stencils are used.
    """

    params: DimensionParams
    grid: Grid
    u: np.ndarray = field(repr=False)
    u_s: np.ndarray | None = field(default=None, repr=False)
    u_t: np.ndarray | None = field(default=None, repr=False)
    u_ss: np.ndarray | None = field(default=None, repr=False)
    u_st: np.ndarray | None = field(default=None, repr=False)
    u_tt: np.ndarray | None = field(default=None, repr=False)
    u_y: np.ndarray | None = field(default=None, repr=False)
    u_z: np.ndarray | None = field(default=None, repr=False)
    onesided_band: np.ndarray | None = field(default=None, repr=False)
    residual_norm: float = math.nan
    newton_iters: int = 0


class NewtonError(RuntimeError):
    """Newton iteration failed to converge or the line search stalled."""


def cubic_nonlinearity(u):
    return u - u**3


def outer_boundary_values(grid: Grid):
    """Dirichlet data H(y)H(z) on s = R (a supersolution, approached
    exponentially by the true solution)."""
    t = grid.coords
    y, z = st_to_yz(grid.R, t)
    return hh_supersolution(y, z)


def initial_guess(grid: Grid) -> np.ndarray:
    """Subsolution-shaped initial iterate H(0.45 y)H(0.45 z) with boundary
    data imposed, on the full quadrant (odd-reflected)."""
    S, T = grid.meshgrid()
    y, z = st_to_yz(S, T)
    U = np.asarray(hh_supersolution(0.45 * y, 0.45 * z))
    return impose_boundary(U, grid)


def impose_boundary(U: np.ndarray, grid: Grid) -> np.ndarray:
    """Zero the diagonal, set outer Dirichlet data, odd-reflect to t > s."""
    U = U.copy()
    np.fill_diagonal(U, 0.0)
    U[grid.N, :] = outer_boundary_values(grid)
    U[grid.N, grid.N] = 0.0
    i, j = np.meshgrid(np.arange(grid.N + 1), np.arange(grid.N + 1), indexing="ij")
    upper = j > i
    U[upper] = -U.T[upper]
    return U


def apply_operator(U: np.ndarray, params: DimensionParams, grid: Grid,
                   nonlinearity: Callable = cubic_nonlinearity) -> np.ndarray:
    """Discrete residual -Delta_h u - drift_h u - g(u) at the unknown nodes.

    U is a full-quadrant field; values at fixed nodes are taken from U as
    given, so exact fixed points (u = 0, u = +-1 with matching data) return
    an identically zero residual.  On the axis t = 0 the drift term uses the
    even-reflection limit (m-1) u_tt.  Returns an (N+1, N+1) array that is
    zero at non-unknown nodes.
    """
    h = grid.h
    drift = params.drift
    ii, jj = grid.ii, grid.jj
    s = ii * h
    c = U[ii, jj]
    east, west = U[ii + 1, jj], U[ii - 1, jj]
    res = -(east - 2.0 * c + west) / h**2 - drift / s * (east - west) / (2.0 * h)

    axis = jj == 0
    inte = ~axis
    ia, ja = ii[axis], jj[axis]
    ib, jb = ii[inte], jj[inte]
    t = jb * h
    north, south = U[ib, jb + 1], U[ib, jb - 1]
    cb = U[ib, jb]
    res[inte] += (-(north - 2.0 * cb + south) / h**2
                  - drift / t * (north - south) / (2.0 * h))
    # t = 0: -(u_tt + (m-1) u_t / t) -> -m u_tt with the even ghost u(s,-h) = u(s,h)
    res[axis] += -2.0 * params.m * (U[ia, 1] - U[ia, 0]) / h**2

    res -= nonlinearity(U[ii, jj])
    out = np.zeros_like(U)
    out[ii, jj] = res
    return out


def _jacobian_structure(params: DimensionParams, grid: Grid):
    """Constant off-diagonal part of the Jacobian and the constant diagonal
    contribution (everything except the nonlinearity derivative)."""
    h = grid.h
    drift = params.drift
    ii, jj = grid.ii, grid.jj
    n = grid.n_unknowns
    rows, cols, vals = [], [], []
    s = ii * h
    diag_const = np.full(n, 4.0 / h**2)
    axis = jj == 0
    diag_const[axis] = 2.0 / h**2 + 2.0 * params.m / h**2

    def add(ni, nj, coeff, mask):
        neigh = grid.unknown_index[ni[mask], nj[mask]]
        ok = neigh >= 0
        rows.append(np.nonzero(mask)[0][ok])
        cols.append(neigh[ok])
        vals.append(coeff[mask][ok])

    all_mask = np.ones_like(ii, dtype=bool)
    add(ii + 1, jj, -1.0 / h**2 - drift / (2.0 * h * s), all_mask)
    add(ii - 1, jj, -1.0 / h**2 + drift / (2.0 * h * s), all_mask)

    t = jj * h
    with np.errstate(divide="ignore"):
        cn = np.where(axis, -2.0 * params.m / h**2,
                      -1.0 / h**2 - drift / (2.0 * h * np.where(axis, 1.0, t)))
        cs = -1.0 / h**2 + drift / (2.0 * h * np.where(axis, 1.0, t))
    add(ii, jj + 1, cn, all_mask)
    add(ii, jj - 1, cs, ~axis)

    off = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return off, diag_const


def newton_solve(params: DimensionParams, config: SolverConfig,
                 grid: Grid) -> SaddleSolution:
    """Solve for the saddle solution by damped Newton iteration.

    Deterministic: identical inputs produce bitwise-identical fields.
    Raises NewtonError on non-convergence or line-search failure.
    """
    U = initial_guess(grid)
    ii, jj = grid.ii, grid.jj
    off, diag_const = _jacobian_structure(params, grid)

    def residual_vec(Ufull):
        return apply_operator(Ufull, params, grid)[ii, jj]

    res = residual_vec(U)
    norm = float(np.abs(res).max())
    iters = 0
    while norm > config.newton_tol:
        if iters >= config.max_newton_iters:
            raise NewtonError(
                f"no convergence after {iters} iterations; last residual {norm:.3e}"
            )
        u_vec = U[ii, jj]
        J = (off + sp.diags(diag_const - 1.0 + 3.0 * u_vec**2)).tocsc()
        delta = spla.splu(J).solve(-res)
        lin_res = float(np.linalg.norm(J @ delta + res) / max(np.linalg.norm(res), 1e-300))
        if lin_res > config.linear_tol:
            raise NewtonError(f"inner linear solve stalled (relative residual {lin_res:.3e})")

        lam = 1.0
        for _ in range(config.damping_halvings + 1):
            Utry = U.copy()
            Utry[ii, jj] = u_vec + lam * delta
            Utry = impose_boundary(Utry, grid)
            res_try = residual_vec(Utry)
            norm_try = float(np.abs(res_try).max())
            if norm_try < norm or norm <= config.newton_tol:
                break
            lam *= 0.5
        else:
            raise NewtonError(f"line search failed at residual {norm:.3e}")
        U, res, norm = Utry, res_try, norm_try
        iters += 1

    sol = SaddleSolution(params=params, grid=grid, u=U,
                         residual_norm=norm, newton_iters=iters)
    return compute_derivatives(sol)


# ---------------------------------------------------------------------------
# derivative stencils on the full quadrant
# ---------------------------------------------------------------------------

def _d1(U: np.ndarray, h: float, axis: int) -> np.ndarray:
    """First derivative: central with an even ghost at index 0, one-sided
    second order at index N."""
    A = U if axis == 0 else U.T
    out = np.empty_like(A)
    out[1:-1] = (A[2:] - A[:-2]) / (2.0 * h)
    out[0] = 0.0  # even reflection: (A[1] - A[1]) / 2h
    out[-1] = (3.0 * A[-1] - 4.0 * A[-2] + A[-3]) / (2.0 * h)
    return out if axis == 0 else out.T


def _d2(U: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second derivative: central with an even ghost at index 0, one-sided
    second order at index N."""
    A = U if axis == 0 else U.T
    out = np.empty_like(A)
    out[1:-1] = (A[2:] - 2.0 * A[1:-1] + A[:-2]) / h**2
    out[0] = 2.0 * (A[1] - A[0]) / h**2
    out[-1] = (2.0 * A[-1] - 5.0 * A[-2] + 4.0 * A[-3] - A[-4]) / h**2
    return out if axis == 0 else out.T


def compute_derivatives(sol: SaddleSolution) -> SaddleSolution:
    """Fill all derivative fields of a solved solution.

    u_y and u_z come from rotated stencils at rotated-interior nodes and fall
    back to chain-rule combinations on the outer edges; nodes within 2h of
    the outer boundary are flagged in onesided_band.
    """
    grid, h = sol.grid, sol.grid.h
    U = sol.u
    u_s = _d1(U, h, axis=0)
    u_t = _d1(U, h, axis=1)
    u_ss = _d2(U, h, axis=0)
    u_tt = _d2(U, h, axis=1)
    u_st = _d1(u_s, h, axis=1)

    u_y = (u_s + u_t) / SQRT2
    u_z = (u_s - u_t) / SQRT2
    # rotated central stencils, with even ghosts across both axes
    P = np.pad(U, 1, mode="reflect")  # P[i, j] = U[i-1, j-1], reflected edges
    u_y[:-1, :-1] = (P[2:-1, 2:-1] - P[:-3, :-3]) / (2.0 * SQRT2 * h)
    u_z[:-1, :-1] = (P[2:-1, :-3] - P[:-3, 2:-1]) / (2.0 * SQRT2 * h)

    band = np.zeros_like(U, dtype=bool)
    band[-3:, :] = True
    band[:, -3:] = True

    fields = dict(u_s=u_s, u_t=u_t, u_ss=u_ss, u_st=u_st, u_tt=u_tt,
                  u_y=u_y, u_z=u_z, onesided_band=band)
    return replace(sol, **fields)


def residual_yz_form(sol: SaddleSolution, guard: float | None = None):
    """Cross-check residual in the rotated frame

        -u_yy - u_zz - (2(m-1)/(y^2-z^2)) (y u_y - z u_z) - u + u^3,

    using diagonal stencils.  y^2 - z^2 = 2 s t vanishes on the axes, so nodes
    with min(s, t) below the guard (default h) are masked out.  Returns
    (field, mask).
    """
    grid, h = sol.grid, sol.grid.h
    if guard is None:
        guard = h
    U = sol.u
    P = np.pad(U, 1, mode="reflect")
    u_yy = np.zeros_like(U)
    u_zz = np.zeros_like(U)
    u_yy[:-1, :-1] = (P[2:-1, 2:-1] - 2.0 * P[1:-2, 1:-2] + P[:-3, :-3]) / (2.0 * h**2)
    u_zz[:-1, :-1] = (P[2:-1, :-3] - 2.0 * P[1:-2, 1:-2] + P[:-3, 2:-1]) / (2.0 * h**2)

    S, T = grid.meshgrid()
    y, z = st_to_yz(S, T)
    mask = (np.minimum(S, T) >= guard - 1e-12) & (S < grid.R - h / 2) & (T < grid.R - h / 2)
    denom = np.where(mask, y**2 - z**2, 1.0)
    uyd = np.where(mask, compute_field(sol, "u_y"), 0.0)
    uzd = np.where(mask, compute_field(sol, "u_z"), 0.0)
    res = (-u_yy - u_zz
           - 2.0 * sol.params.drift / denom * (y * uyd - z * uzd)
           - U + U**3)
    return np.where(mask, res, 0.0), mask


def compute_field(sol: SaddleSolution, name: str) -> np.ndarray:
    arr = getattr(sol, name)
    if arr is None:
        raise ValueError(f"derivative field {name} not computed yet")
    return arr


# ---------------------------------------------------------------------------
# exact-solution oracle (planar sine-Gordon analogue)
# ---------------------------------------------------------------------------

def sine_gordon_saddle(s, t):
    """Exact planar saddle of -Delta u = sin(u):
    4*arctan(cosh(s/sqrt 2)/cosh(t/sqrt 2)) - pi; vanishes on s = t."""
    return 4.0 * np.arctan(np.cosh(np.asarray(s) / SQRT2)
                           / np.cosh(np.asarray(t) / SQRT2)) - math.pi


def validate_exact(grid: Grid) -> dict:
    """Discrete residual of the exact sine-Gordon saddle at spacing h and
    h/2, plus the observed convergence rate (should be close to 2)."""
    params = DimensionParams(m=1)

    def max_residual(g: Grid) -> float:
        S, T = g.meshgrid()
        U = sine_gordon_saddle(S, T)
        res = apply_operator(U, params, g, nonlinearity=np.sin)
        return float(np.abs(res).max())

    fine = build_grid(grid.R, grid.h / 2.0)
    res_h = max_residual(grid)
    res_h2 = max_residual(fine)
    rate = math.log2(res_h / res_h2)
    return {"h": grid.h, "residual_h": res_h, "residual_h_half": res_h2, "rate": rate}
