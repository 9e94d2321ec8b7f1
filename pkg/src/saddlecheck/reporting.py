"""Run reports and field exports.

Three output formats, all deterministic:

* JSON report (schema ``saddlecheck-report/1``): config echo, per-stage
  payloads, and wall-clock timings kept under a separate "timing" key so
  reports from identical runs are byte-identical outside that key.
* CSV field dumps: row-major, ``%.17g`` formatting (lossless float64
  round-trip), self-describing header line.
* SVG maps: quantized, run-length-encoded heatmaps and three-color sign
  maps with a fixed color scale and legend; pure text output, diffable.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from saddlecheck.candidate import (css_over_gap, ct_over_cs, l_phi,
                                   lambda_coeff, region_classify,
                                   REGION_E1, REGION_E3, t_ratio)
from saddlecheck.checks import CheckReport
from saddlecheck.params import CandidateParams
from saddlecheck.solver import SaddleSolution
from saddlecheck.spectral import EigEstimate
from saddlecheck.rigor import ProofResult

REPORT_SCHEMA = "saddlecheck-report/1"


# ---------------------------------------------------------------------------
# JSON report
# ---------------------------------------------------------------------------

def check_report_to_dict(rep: CheckReport) -> dict:
    return {
        "id": rep.id,
        "description": rep.description,
        "passed": bool(rep.passed),
        "worst_margin": float(rep.worst_margin),
        "worst_point": [float(x) for x in rep.worst_point],
        "nodes_checked": int(rep.nodes_checked),
        "nodes_excluded": int(rep.nodes_excluded),
        "tolerance_used": float(rep.tolerance_used),
    }


def eig_to_dict(est: EigEstimate) -> dict:
    return {
        "lambda_min": float(est.lambda_min),
        "residual": float(est.residual),
        "iterations": int(est.iterations),
    }


def proof_to_dict(res: ProofResult, claim: str) -> dict:
    return {
        "claim": claim,
        "status": res.status,
        "boxes_examined": int(res.boxes_examined),
        "min_undecided_width": float(res.min_undecided_width),
        "undecided_boxes": int(len(res.frontier)),
    }


def solver_to_dict(sol: SaddleSolution) -> dict:
    return {
        "m": sol.params.m,
        "R": sol.grid.R,
        "h": sol.grid.h,
        "residual_norm": float(sol.residual_norm),
        "newton_iters": int(sol.newton_iters),
    }


def build_report(config: dict, stages: dict, timing: dict) -> dict:
    """Assemble the self-contained run report.

    ``stages`` values must already be JSON-serializable dictionaries (use the
    *_to_dict helpers); ``timing`` maps stage name to wall seconds and is the
    only part allowed to differ between reruns of an identical config.
    """
    return {
        "schema": REPORT_SCHEMA,
        "config": dict(sorted(config.items())),
        "stages": stages,
        "timing": timing,
    }


def report_passed(report: dict) -> bool:
    """True iff every recorded verification in the report passed."""
    ok = True
    for name, stage in report["stages"].items():
        if name in ("suite", "supersolution"):
            ok &= all(c["passed"] for c in stage["checks"])
        elif name == "rigor":
            ok &= all(p["status"] == "proven" for p in stage["proofs"])
        elif name == "spectrum":
            ok &= bool(stage.get("sign_consistent", True))
    return ok


def write_report(report: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return path


def read_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# CSV field dumps
# ---------------------------------------------------------------------------

def export_csv(field: np.ndarray, name: str, h: float,
               path: str | Path) -> Path:
    """Row-major dump with a self-describing header; %.17g entries
    round-trip float64 bitwise."""
    field = np.asarray(field, dtype=float)
    if field.size == 0:
        raise ValueError(f"refusing to export empty field {name!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", name, "rows", field.shape[0],
                     "cols", field.shape[1], "h", "%.17g" % h])
    for row in field:
        writer.writerow(["%.17g" % v for v in row])
    path.write_text(buf.getvalue())
    return path


def import_csv(path: str | Path) -> tuple[np.ndarray, dict]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader)
        meta = {"name": head[1], "rows": int(head[3]), "cols": int(head[5]),
                "h": float(head[7])}
        field = np.array([[float(v) for v in row] for row in reader])
    if field.shape != (meta["rows"], meta["cols"]):
        raise ValueError(f"{path}: shape {field.shape} does not match header")
    return field, meta


# ---------------------------------------------------------------------------
# SVG maps
# ---------------------------------------------------------------------------

_SIGN_COLORS = {-1: "#3b6bb5", 0: "#e8e8e8", 1: "#c24a3a"}
_RAMP = ["#30123b", "#3f3994", "#455ed2", "#3e8efa", "#28bceb", "#18dcc3",
         "#35f394", "#6dfe62", "#a4fc3c", "#d1e835", "#f3c63a", "#fe9b2d",
         "#f36315", "#d93806", "#b11901", "#7a0403"]

_CELL = 3  # px per plotted cell
_MAX_CELLS = 220


def _stride(n: int) -> int:
    return max(1, int(np.ceil(n / _MAX_CELLS)))


def _svg_grid(colors: np.ndarray, title: str, legend: list[tuple[str, str]]
              ) -> str:
    """Render a (rows, cols) array of color strings (empty = skip) as
    row-wise run-length-encoded SVG rects, plus a title and legend."""
    rows, cols = colors.shape
    width = cols * _CELL + 150
    height = max(rows * _CELL + 40, 40 + 18 * (len(legend) + 1))
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}">',
           f'<text x="10" y="20" font-family="monospace" font-size="14">'
           f'{title}</text>']
    y0 = 30
    for i in range(rows):
        j = 0
        while j < cols:
            c = colors[i, j]
            if not c:
                j += 1
                continue
            j2 = j
            while j2 + 1 < cols and colors[i, j2 + 1] == c:
                j2 += 1
            out.append(f'<rect x="{j * _CELL}" y="{y0 + i * _CELL}" '
                       f'width="{(j2 - j + 1) * _CELL}" height="{_CELL}" '
                       f'fill="{c}"/>')
            j = j2 + 1
    lx = cols * _CELL + 12
    for k, (color, label) in enumerate(legend):
        ly = y0 + 18 * k
        out.append(f'<rect x="{lx}" y="{ly}" width="12" height="12" '
                   f'fill="{color}"/>')
        out.append(f'<text x="{lx + 18}" y="{ly + 11}" '
                   f'font-family="monospace" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _orient(arr: np.ndarray) -> np.ndarray:
    """Plot with s rightward and t upward: transpose and flip rows."""
    return arr.T[::-1]


def svg_sign_map(field: np.ndarray, mask: np.ndarray, title: str,
                 path: str | Path, tau: float = 0.0) -> Path:
    """Three-color sign map (negative / within tau / positive) of the field
    on the masked nodes; unmasked nodes are left blank."""
    k = _stride(field.shape[0])
    f = _orient(field[::k, ::k])
    m = _orient(np.asarray(mask)[::k, ::k])
    sign = np.zeros(f.shape, dtype=np.int8)
    sign[f > tau] = 1
    sign[f < -tau] = -1
    colors = np.where(m, np.vectorize(_SIGN_COLORS.get)(sign), "")
    legend = [(_SIGN_COLORS[-1], "negative"),
              (_SIGN_COLORS[0], f"|value| <= {tau:g}"),
              (_SIGN_COLORS[1], "positive")]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_svg_grid(colors, title, legend))
    return path


def svg_heatmap(field: np.ndarray, mask: np.ndarray, title: str,
                path: str | Path, vmin: float, vmax: float) -> Path:
    """Sixteen-level quantized heatmap with a fixed [vmin, vmax] scale."""
    if not vmax > vmin:
        raise ValueError("vmax must exceed vmin")
    k = _stride(field.shape[0])
    f = _orient(field[::k, ::k])
    m = _orient(np.asarray(mask)[::k, ::k]) & np.isfinite(f)
    lev = np.clip(np.nan_to_num(f, nan=vmin) - vmin, 0.0, vmax - vmin)
    idx = np.minimum((lev / (vmax - vmin) * len(_RAMP)).astype(int),
                     len(_RAMP) - 1)
    colors = np.where(m, np.array(_RAMP)[idx], "")
    legend = [(_RAMP[0], f"{vmin:g}"),
              (_RAMP[len(_RAMP) // 2], f"{(vmin + vmax) / 2:g}"),
              (_RAMP[-1], f"{vmax:g}")]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_svg_grid(colors, title, legend))
    return path


def export_signmaps(sol: SaddleSolution, cand: CandidateParams,
                    outdir: str | Path) -> list[Path]:
    """The six standard diagnostic maps for the supersolution argument:
    coefficient ratios, the directional-convexity ratio T, the operator
    value on the inner wedge and on the small-t strip, and the C_tt sign."""
    outdir = Path(outdir)
    grid = sol.grid
    S, T = grid.meshgrid()
    tri = grid.mask_triangle & (S > T) & (S > 0) & (T > 0)
    lphi, lmask = l_phi(sol, cand)
    region = region_classify(S, T)
    s_safe = np.where(tri, S, 2.0)
    t_safe = np.where(tri, T, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_ts = np.where(tri, ct_over_cs(s_safe, t_safe, cand), np.nan)
        ratio_gap = np.where(tri, css_over_gap(s_safe, t_safe, cand), np.nan)
        lam = lambda_coeff(s_safe, t_safe, cand)
        r = np.clip(1.0 - lam, 0.0, 1.0 - 1e-9)
        tval, tok = t_ratio(s_safe, t_safe, r, cand)
    paths = [
        svg_heatmap(ratio_ts, tri & np.isfinite(ratio_ts),
                    "C_t / C_s", outdir / "map-ct-over-cs.svg", 0.0, 2.0),
        svg_heatmap(ratio_gap, tri & np.isfinite(ratio_gap),
                    "C_ss / (C_st - C_tt)", outdir / "map-css-over-gap.svg",
                    0.0, 2.0),
        svg_heatmap(tval, tri & tok & np.isfinite(tval),
                    "T(1 - lambda)", outdir / "map-t-ratio.svg", 0.0, 1.0),
        svg_sign_map(lphi, lmask & (region == REGION_E1),
                     "L Phi on inner wedge", outdir / "map-lphi-e1.svg"),
        svg_sign_map(lphi, lmask & (region == REGION_E3),
                     "L Phi on small-t strip", outdir / "map-lphi-e3.svg"),
        svg_sign_map(np.where(tri, _ctt(s_safe, t_safe, cand), 0.0), tri,
                     "sign of C_tt", outdir / "map-ctt-sign.svg"),
    ]
    return paths


def _ctt(S, T, cand):
    from saddlecheck.candidate import coefficient_set
    return coefficient_set(S, T, cand).c_tt
