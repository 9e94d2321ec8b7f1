"""Uniform grid on the truncated triangle {0 <= t <= s <= R}.

Node classification: the diagonal s = t carries homogeneous Dirichlet data
(the solution vanishes on the cone), the outer edge s = R carries Dirichlet
data supplied by the solver, the axis t = 0 is an unknown line handled with
even-reflection ghosts, and everything else is a plain interior unknown.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NODE_OUTSIDE = -1
NODE_INTERIOR = 0
NODE_AXIS = 1
NODE_DIAGONAL = 2
NODE_OUTER = 3


@dataclass(frozen=True)
class Grid:
    R: float
    h: float
    N: int
    kind: np.ndarray = field(repr=False)       # (N+1, N+1) int8, [i, j] = (s, t)
    unknown_index: np.ndarray = field(repr=False)  # (N+1, N+1) int64, -1 where fixed
    ii: np.ndarray = field(repr=False)         # s-indices of unknowns
    jj: np.ndarray = field(repr=False)         # t-indices of unknowns

    @property
    def coords(self) -> np.ndarray:
        """1-D array of node coordinates along either axis."""
        return np.arange(self.N + 1) * self.h

    @property
    def n_unknowns(self) -> int:
        return self.ii.size

    @property
    def mask_triangle(self) -> np.ndarray:
        """Boolean (N+1, N+1) mask of nodes with t <= s."""
        idx = np.arange(self.N + 1)
        return idx[None, :] <= idx[:, None]

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """Full-quadrant coordinate arrays S[i, j] = i*h, T[i, j] = j*h."""
        c = self.coords
        return np.meshgrid(c, c, indexing="ij")


def build_grid(R: float, h: float) -> Grid:
    """Build the triangle grid; R/h must be an integer."""
    if h <= 0.0 or h > 0.2:
        raise ValueError(f"spacing must satisfy 0 < h <= 0.2, got h={h}")
    if R < 8.0:
        raise ValueError(f"truncation radius must be >= 8, got R={R}")
    ratio = R / h
    N = int(round(ratio))
    if abs(ratio - N) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"R/h must be an integer, got R={R}, h={h} (R/h={ratio})")

    kind = np.full((N + 1, N + 1), NODE_OUTSIDE, dtype=np.int8)
    idx = np.arange(N + 1)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    tri = jj <= ii
    kind[tri] = NODE_INTERIOR
    kind[(jj == 0) & tri] = NODE_AXIS
    kind[(ii == jj)] = NODE_DIAGONAL
    kind[(ii == N) & tri & (jj < N)] = NODE_OUTER

    unknown = (kind == NODE_INTERIOR) | (kind == NODE_AXIS)
    unknown_index = np.full((N + 1, N + 1), -1, dtype=np.int64)
    ui, uj = np.nonzero(unknown)
    unknown_index[ui, uj] = np.arange(ui.size)

    return Grid(R=float(R), h=float(h), N=N, kind=kind,
                unknown_index=unknown_index, ii=ui, jj=uj)
