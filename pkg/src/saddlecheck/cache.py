"""Versioned on-disk cache for solved fields.

A cache entry is a single ``.npz`` holding the solved field plus a JSON
header (format version, dimension, grid, solver metadata) and a SHA-256
content hash.  Any header or hash mismatch is treated as a miss and forces a
re-solve; loading never silently returns stale or corrupted data.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from saddlecheck.grid import build_grid
from saddlecheck.params import DimensionParams
from saddlecheck.solver import (SaddleSolution, SolverConfig,
                                compute_derivatives, newton_solve)

CACHE_FORMAT = 1
CACHE_ENV_VAR = "SADDLECHECK_CACHE_DIR"


class CacheMismatch(RuntimeError):
    """Cache entry exists but its header or content hash does not match."""


def cache_dir(override: str | os.PathLike | None = None) -> Path:
    """Resolve the cache directory: explicit argument, then the
    SADDLECHECK_CACHE_DIR environment variable, then ./.saddlecheck_cache."""
    if override is not None:
        return Path(override)
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return Path(".saddlecheck_cache")


def solution_key(m: int, R: float, h: float, newton_tol: float) -> str:
    return f"sol_m{m}_R{R:g}_h{h:g}_tol{newton_tol:g}"


def _header(sol: SaddleSolution, config: SolverConfig) -> dict:
    return {
        "format": CACHE_FORMAT,
        "m": sol.params.m,
        "R": sol.grid.R,
        "h": sol.grid.h,
        "N": sol.grid.N,
        "newton_tol": config.newton_tol,
        "residual_norm": sol.residual_norm,
        "newton_iters": sol.newton_iters,
    }


def _content_hash(header: dict, u: np.ndarray) -> str:
    digest = hashlib.sha256()
    digest.update(json.dumps(header, sort_keys=True).encode())
    digest.update(np.ascontiguousarray(u).tobytes())
    return digest.hexdigest()


def save_solution(sol: SaddleSolution, config: SolverConfig,
                  directory: str | os.PathLike | None = None) -> Path:
    """Write the solution to the cache; returns the entry path.

    Only the field itself is stored; derivative fields are recomputed on
    load (they are deterministic functions of the field).
    """
    root = cache_dir(directory)
    root.mkdir(parents=True, exist_ok=True)
    header = _header(sol, config)
    header["sha256"] = _content_hash(header, sol.u)
    path = root / (solution_key(sol.params.m, sol.grid.R, sol.grid.h,
                                config.newton_tol) + ".npz")
    tmp = path.with_suffix(".npz.tmp")
    with open(tmp, "wb") as fh:
        np.savez(fh, u=sol.u, header=np.bytes_(json.dumps(header,
                                                          sort_keys=True)))
    os.replace(tmp, path)
    return path


def load_solution(path: str | os.PathLike) -> SaddleSolution:
    """Load and revalidate a cache entry; raises CacheMismatch on any
    format, header, or hash discrepancy."""
    with np.load(path) as data:
        try:
            header = json.loads(bytes(data["header"]).decode())
            u = data["u"]
        except KeyError as exc:
            raise CacheMismatch(f"{path}: missing entry {exc}") from exc
    if header.get("format") != CACHE_FORMAT:
        raise CacheMismatch(f"{path}: format {header.get('format')!r}, "
                            f"expected {CACHE_FORMAT}")
    expected = header.pop("sha256", None)
    if _content_hash(header, u) != expected:
        raise CacheMismatch(f"{path}: content hash mismatch")
    grid = build_grid(header["R"], header["h"])
    if u.shape != (grid.N + 1, grid.N + 1):
        raise CacheMismatch(f"{path}: field shape {u.shape} does not match "
                            f"grid N={grid.N}")
    sol = SaddleSolution(params=DimensionParams(m=header["m"]), grid=grid,
                         u=u, residual_norm=header["residual_norm"],
                         newton_iters=header["newton_iters"])
    return compute_derivatives(sol)


def load_or_solve(m: int, R: float, h: float,
                  config: SolverConfig | None = None,
                  directory: str | os.PathLike | None = None,
                  refresh: bool = False) -> tuple[SaddleSolution, bool]:
    """Return (solution, came_from_cache), re-solving on miss or mismatch."""
    config = config or SolverConfig()
    path = cache_dir(directory) / (solution_key(m, R, h, config.newton_tol)
                                   + ".npz")
    if not refresh and path.exists():
        try:
            return load_solution(path), True
        except (CacheMismatch, json.JSONDecodeError, ValueError, OSError):
            pass  # fall through to a fresh solve
    grid = build_grid(R, h)
    sol = newton_solve(DimensionParams(m=m), config, grid)
    sol = compute_derivatives(sol)
    save_solution(sol, config, directory)
    return sol, False
