"""Command-line pipeline: solve -> verify -> spectrum -> rigor -> report.

Configuration comes from an INI file (section [run]) with command-line flags
taking precedence.  Exit status is 0 iff every requested verification
passed; the last stdout line is always machine-parseable:

    RESULT <pass|fail> stages=<csv> failures=<k>
"""

from __future__ import annotations

import argparse
import configparser
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from saddlecheck.cache import load_or_solve
from saddlecheck.checks import run_inequality_suite, verify_supersolution
from saddlecheck.params import CandidateParams, DimensionParams
from saddlecheck.reporting import (build_report, check_report_to_dict,
                                   eig_to_dict, export_csv, export_signmaps,
                                   proof_to_dict, report_passed,
                                   solver_to_dict, write_report)
from saddlecheck.rigor import HalfPlane, builtin_expressions, prove_nonpositive
from saddlecheck.solver import SolverConfig
from saddlecheck.spectral import (assemble, min_eigenvalue, report_digest,
                                  stability_certificate)

ALL_STAGES = ("solve", "suite", "supersolution", "spectrum", "rigor")


@dataclass(frozen=True)
class RunConfig:
    m: int = 4
    R: float = 12.0
    h: float = 0.05
    tol: float = 1e-10                 # Newton residual tolerance
    stages: tuple = ALL_STAGES
    out: str = "out"
    cache: str | None = None           # None -> env var / default directory
    threads: int = 1
    rigor_max_boxes: int = 2_000_000

    @property
    def n(self) -> int:
        return 2 * self.m

    def validated(self) -> "RunConfig":
        DimensionParams(m=self.m)  # range check
        unknown = set(self.stages) - set(ALL_STAGES)
        if unknown:
            raise ValueError(f"unknown stages: {sorted(unknown)}")
        needs_candidate = {"suite", "supersolution", "rigor"} & set(self.stages)
        if needs_candidate and self.n not in (8, 10, 12):
            raise ValueError(f"stages {sorted(needs_candidate)} need "
                             f"n in {{8, 10, 12}}, got n={self.n}")
        return self


def _config_from_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(path)
    section = parser["run"] if parser.has_section("run") else parser.defaults()
    out = {}
    for key, raw in dict(section).items():
        if key in ("m", "threads", "rigor_max_boxes"):
            out[key] = int(raw)
        elif key in ("r", "h", "tol"):
            out["R" if key == "r" else key] = float(raw)
        elif key == "stages":
            out["stages"] = tuple(s.strip() for s in raw.split(","))
        elif key in ("out", "cache"):
            out[key] = raw
        else:
            raise ValueError(f"unknown config key {key!r}")
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the INI file, then explicit flags."""
    values = {}
    if getattr(args, "config", None):
        values.update(_config_from_file(args.config))
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    if getattr(args, "n", None) is not None:
        if args.n % 2:
            raise ValueError(f"--n must be even, got {args.n}")
        values["m"] = args.n // 2
    if isinstance(values.get("stages"), str):
        values["stages"] = tuple(s.strip() for s in values["stages"].split(","))
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------

def run_stages(cfg: RunConfig, log=print) -> dict:
    """Execute the requested stages in dependency order; returns the report
    dictionary (also carries 'failures', a list of failed item names)."""
    stages: dict = {}
    timing: dict = {}
    failures: list[str] = []
    cand = CandidateParams(n=cfg.n) if cfg.n in (8, 10, 12) else None
    solver_cfg = SolverConfig(newton_tol=cfg.tol)

    t0 = time.perf_counter()
    sol, cached = load_or_solve(cfg.m, cfg.R, cfg.h, solver_cfg,
                                directory=cfg.cache)
    timing["solve"] = time.perf_counter() - t0
    stages["solve"] = solver_to_dict(sol) | {"from_cache": cached}
    log(f"solve: m={cfg.m} R={cfg.R:g} h={cfg.h:g} "
        f"residual={sol.residual_norm:.3e} "
        f"({'cache' if cached else f'{sol.newton_iters} Newton iters'})")

    suite_reports = []
    if "suite" in cfg.stages:
        t0 = time.perf_counter()
        suite_reports = run_inequality_suite(sol)
        timing["suite"] = time.perf_counter() - t0
        stages["suite"] = {"checks": [check_report_to_dict(r)
                                      for r in suite_reports]}
        for rep in suite_reports:
            log("  " + rep.summary())
            if not rep.passed:
                failures.append(f"suite:{rep.id}")

    super_report = None
    if "supersolution" in cfg.stages:
        t0 = time.perf_counter()
        super_report = verify_supersolution(sol, cand)
        timing["supersolution"] = time.perf_counter() - t0
        stages["supersolution"] = {"checks":
                                   [check_report_to_dict(super_report)]}
        log("  " + super_report.summary())
        if not super_report.passed:
            failures.append("supersolution")

    if "spectrum" in cfg.stages:
        t0 = time.perf_counter()
        est = min_eigenvalue(assemble(sol))
        timing["spectrum"] = time.perf_counter() - t0
        expect_stable = cfg.m >= 4
        consistent = (est.lambda_min > -0.01 if expect_stable
                      else est.lambda_min < -0.001)
        stages["spectrum"] = eig_to_dict(est) | {
            "expect_stable": expect_stable, "sign_consistent": consistent}
        log(f"spectrum: lambda_min={est.lambda_min:+.6f} "
            f"({'consistent' if consistent else 'INCONSISTENT'})")
        if not consistent:
            failures.append("spectrum")

    if "rigor" in cfg.stages:
        t0 = time.perf_counter()
        proofs = run_rigor(cfg)
        timing["rigor"] = time.perf_counter() - t0
        stages["rigor"] = {"proofs": proofs}
        for p in proofs:
            log(f"rigor: {p['claim']}: {p['status']} "
                f"({p['boxes_examined']} boxes)")
            if p["status"] != "proven":
                failures.append(f"rigor:{p['claim']}")

    if super_report is not None and super_report.passed and not failures:
        all_reports = suite_reports + [super_report]
        stages["certificate"] = stability_certificate(
            sol, cand, all_reports,
            [report_digest(r) for r in all_reports])

    report = build_report(_config_echo(cfg), stages, timing)
    report["failures"] = failures
    return report


def run_rigor(cfg: RunConfig) -> list[dict]:
    """Interval proofs: defect nonpositivity (gap coordinates cover the
    requested wedge), and the three coefficient sign claims for n = 8."""
    cat = builtin_expressions(cfg.n)
    proofs = []
    res = prove_nonpositive(
        cat["defect_gap"], ["a", "u", "z"],
        [[0.01, 0.45], [0.01, 11.99], [0.01, 12.0]],
        fixed={"d": float(cfg.m - 1)}, frozen_dims=("a",),
        min_width=1e-6, max_boxes=cfg.rigor_max_boxes)
    proofs.append(proof_to_dict(res, "defect<=0"))
    if cfg.n == 8:
        for claim in ("c_s", "c_ss", "c_st"):
            res = prove_nonpositive(cat[claim], ["s", "t"],
                                    [[0.2, 20.0], [0.2, 20.0]],
                                    constraints=[HalfPlane(0, 1, 0.05)],
                                    max_boxes=cfg.rigor_max_boxes)
            proofs.append(proof_to_dict(res, f"{claim}<0"))
    return proofs


def _config_echo(cfg: RunConfig) -> dict:
    return {"m": cfg.m, "n": cfg.n, "R": cfg.R, "h": cfg.h, "tol": cfg.tol,
            "stages": list(cfg.stages), "out": cfg.out,
            "threads": cfg.threads}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with a [run] section")
    p.add_argument("--m", type=int, help="factor dimension (n = 2m)")
    p.add_argument("--n", type=int, help="ambient dimension (even)")
    p.add_argument("--R", type=float, help="truncation radius")
    p.add_argument("--h", type=float, help="grid spacing (R/h integer)")
    p.add_argument("--tol", type=float, help="Newton residual tolerance")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cache", help="solution cache directory "
                                   "(default: $SADDLECHECK_CACHE_DIR)")
    p.add_argument("--threads", type=int, help="thread cap for solver pools")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saddlecheck",
        description="Solve and verify Allen-Cahn saddle solutions in the "
                    "doubly-radial reduction.")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "solve": "solve the reduced PDE and cache the field",
        "verify": "run the inequality suite and the supersolution check",
        "spectrum": "estimate the principal eigenvalue",
        "rigor": "interval proofs of the closed-form sign claims",
        "report": "execute requested stages and write the JSON report",
        "plot": "emit the six diagnostic SVG maps",
        "run": "full pipeline (solve, suite, supersolution, spectrum, rigor)",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name in ("report", "run"):
            p.add_argument("--stages",
                           help="comma-separated subset of: "
                                + ",".join(ALL_STAGES))
    return parser


_COMMAND_STAGES = {
    "solve": ("solve",),
    "verify": ("solve", "suite", "supersolution"),
    "spectrum": ("solve", "spectrum"),
    "rigor": ("solve", "rigor"),
    "plot": ("solve",),
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command in _COMMAND_STAGES:
            cfg = replace(cfg, stages=_COMMAND_STAGES[args.command])
        cfg = cfg.validated()
        report = run_stages(cfg)
        out = Path(cfg.out)
        if args.command in ("report", "run"):
            path = write_report(report, out / "report.json")
            print(f"report: {path}")
        if args.command == "plot":
            sol, _ = load_or_solve(cfg.m, cfg.R, cfg.h,
                                   SolverConfig(newton_tol=cfg.tol),
                                   directory=cfg.cache)
            paths = export_signmaps(sol, CandidateParams(n=cfg.n), out)
            export_csv(sol.u, "u", cfg.h, out / "u.csv")
            for p in paths:
                print(f"plot: {p}")
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("RESULT fail stages= failures=1")
        return 2
    failures = report["failures"]
    status = "pass" if not failures else "fail"
    print(f"RESULT {status} stages={','.join(cfg.stages)} "
          f"failures={len(failures)}")
    return 0 if not failures else 1


if __name__ == "__main__":
    sys.exit(main())
