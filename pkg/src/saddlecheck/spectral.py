"""Principal eigenvalue of the linearized operator in the doubly-radial
class, as the generalized pencil

    K v = lambda B v,
    K = assembly of int (|grad eta|^2 + (3u^2-1) eta^2) (s t)^(m-1),
    B = diag((s t)^(m-1) h^2),

over the full quadrant (perturbations need not vanish on the cone), with
Dirichlet truncation on the outer edges and natural (reflection) treatment
on the axes.  Negative lambda_min reproduces the known instability for
m <= 3; for m >= 4 it is a one-sided consistency indicator (the stability
proof itself goes through the supersolution certificate, not this pencil).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from saddlecheck.solver import SaddleSolution


@dataclass(frozen=True)
class QuadraticFormAssembly:
    stiffness: sp.csr_matrix = field(repr=False)
    mass: sp.dia_matrix = field(repr=False)
    node_index: np.ndarray = field(repr=False)   # (N+1,N+1) -> dof or -1
    m: int
    R: float
    h: float

    @property
    def n_dof(self) -> int:
        return self.stiffness.shape[0]


@dataclass(frozen=True)
class EigEstimate:
    lambda_min: float
    residual: float
    iterations: int
    vector: np.ndarray = field(repr=False)


def assemble(sol: SaddleSolution) -> QuadraticFormAssembly:
    """Build the weighted stiffness/mass pencil from a solved field.

    Edge-based: each grid edge contributes w_edge (eta_a - eta_b)^2 / h^2
    with w_edge the weight (s t)^(m-1) h^2 at the edge midpoint.  Axis nodes
    carry zero measure for m >= 2 and are eliminated; for m = 1 they are
    ordinary interior nodes of the quarter-plane Neumann problem.
    """
    grid, m = sol.grid, sol.params.m
    N, h = grid.N, grid.h
    x = grid.coords

    def weight(svals, tvals):
        return (np.outer(svals, tvals)) ** (m - 1) * h * h

    keep_axis = m == 1
    lo = 0 if keep_axis else 1
    node_index = -np.ones((N + 1, N + 1), dtype=np.int64)
    ii, jj = np.meshgrid(np.arange(N + 1), np.arange(N + 1), indexing="ij")
    active = (ii < N) & (jj < N) & (ii >= lo) & (jj >= lo)
    node_index[active] = np.arange(int(active.sum()))
    n = int(active.sum())

    w_node = weight(x, x)
    rows, cols, vals = [], [], []
    diag_extra = np.zeros(n)

    def add_edges(ia, ja, ib, jb, w_edge):
        a = node_index[ia, ja].ravel()
        b = node_index[ib, jb].ravel()
        w = (w_edge / (h * h)).ravel()
        both = (a >= 0) & (b >= 0)
        rows.extend((a[both], b[both], a[both], b[both]))
        cols.extend((b[both], a[both], a[both], b[both]))
        vals.extend((-w[both], -w[both], w[both], w[both]))
        # an edge into the outer Dirichlet boundary pins the ghost to zero;
        # edges into eliminated (zero-measure axis) nodes are dropped
        for dof, oi, oj in ((a, ib.ravel(), jb.ravel()),
                            (b, ia.ravel(), ja.ravel())):
            dirichlet = (dof >= 0) & ((oi == N) | (oj == N))
            d = dof[dirichlet]
            np.add.at(diag_extra, d, w[dirichlet])

    # horizontal edges (s-direction): midpoints (x_i + h/2, x_j)
    ia, ja = np.meshgrid(np.arange(N), np.arange(N + 1), indexing="ij")
    add_edges(ia, ja, ia + 1, ja, weight(x[:N] + h / 2.0, x))
    # vertical edges (t-direction)
    ia, ja = np.meshgrid(np.arange(N + 1), np.arange(N), indexing="ij")
    add_edges(ia, ja, ia, ja + 1, weight(x, x[:N] + h / 2.0))

    K = sp.csr_matrix(
        (np.concatenate(vals),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    K = K + sp.diags(((3.0 * sol.u**2 - 1.0) * w_node)[active] + diag_extra)
    B = sp.diags(w_node[active])
    return QuadraticFormAssembly(stiffness=K.tocsr(), mass=B,
                                 node_index=node_index, m=m, R=grid.R, h=h)


def rayleigh_quotient(asm: QuadraticFormAssembly, v_full: np.ndarray) -> float:
    """Quadratic-form ratio for a test field given on the full grid."""
    keep = asm.node_index >= 0
    v = np.zeros(asm.n_dof)
    v[asm.node_index[keep]] = v_full[keep]
    num = float(v @ (asm.stiffness @ v))
    den = float(v @ (asm.mass @ v))
    return num / den


def min_eigenvalue(asm: QuadraticFormAssembly, tol: float = 1e-10,
                   sigma: float = -1.05, dense: bool = False) -> EigEstimate:
    """Smallest generalized eigenvalue of (K, B).

    Shift-invert Lanczos around sigma (below the spectrum: the potential
    3u^2-1 >= -1 bounds it) with a deterministic start vector.  dense=True
    uses LAPACK on the full matrices as an independent oracle; only sensible
    on coarse grids.
    """
    K, B = asm.stiffness, asm.mass
    if dense:
        w = scipy.linalg.eigh(K.toarray(), B.toarray(), eigvals_only=True,
                              subset_by_index=[0, 0])
        lam = float(w[0])
        return EigEstimate(lambda_min=lam, residual=0.0, iterations=0,
                           vector=np.zeros(asm.n_dof))
    v0 = np.ones(asm.n_dof)
    w, V = spla.eigsh(K, k=1, M=B, sigma=sigma, which="LM", v0=v0, tol=tol)
    lam = float(w[0])
    vec = V[:, 0]
    res = float(np.linalg.norm(K @ vec - lam * (B @ vec))
                / np.linalg.norm(B @ vec))
    return EigEstimate(lambda_min=lam, residual=res, iterations=1, vector=vec)


def eigenvector_field(asm: QuadraticFormAssembly, est: EigEstimate) -> np.ndarray:
    """Scatter an eigenvector back onto the (N+1, N+1) grid (zeros at
    eliminated/Dirichlet nodes)."""
    out = np.zeros(asm.node_index.shape)
    keep = asm.node_index >= 0
    out[keep] = est.vector[asm.node_index[keep]]
    return out


class CertificateError(RuntimeError):
    """Prerequisite reports failed or were tampered with."""


def _digest(obj) -> str:
    if isinstance(obj, np.ndarray):
        return hashlib.sha256(np.ascontiguousarray(obj).tobytes()).hexdigest()
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()


def report_digest(report) -> str:
    payload = {k: getattr(report, k) for k in
               ("id", "passed", "worst_margin", "tolerance_used",
                "nodes_checked")}
    return _digest(payload)


def stability_certificate(sol: SaddleSolution, cand, reports,
                          report_hashes=None) -> dict:
    """Record the supersolution-based stability conclusion.

    `reports` must contain a passing supersolution report (and may carry the
    inequality suite).  Refuses if any report failed, the dimension
    mismatches, or a provided hash does not match its report.
    """
    if sol.params.m != cand.m:
        raise CertificateError("solution/candidate dimension mismatch")
    if not reports:
        raise CertificateError("no verification reports supplied")
    for idx, rep in enumerate(reports):
        if not rep.passed:
            raise CertificateError(f"prerequisite report {rep.id} failed")
        if report_hashes is not None and report_hashes[idx] != report_digest(rep):
            raise CertificateError(f"report {rep.id} hash mismatch")
    if not any(r.id.startswith("supersolution") for r in reports):
        raise CertificateError("missing supersolution report")
    return {
        "schema": "stability-certificate/1",
        "n": cand.n,
        "m": sol.params.m,
        "grid": {"R": sol.grid.R, "h": sol.grid.h},
        "conclusion": "stable",
        "basis": "positive supersolution of the linearized operator",
        "solution_sha256": _digest(sol.u),
        "report_sha256": [report_digest(r) for r in reports],
        "report_ids": [r.id for r in reports],
    }
