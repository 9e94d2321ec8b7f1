"""Grid verification suite: the catalog of pointwise inequalities satisfied
by the saddle solution, plus the supersolution condition for the stability
candidate.

Each check evaluates a closed-form combination of solution fields over an
explicit node set and reports its worst margin.  All inequalities are exact
in the continuum, so the tolerance model is tau = kappa * h^2 * scale with
scale the local magnitude of the participating terms (discretization error
is second order).  Failures are reports, not exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from saddlecheck.candidate import CandidateParams, l_phi, phi_field, region_classify
from saddlecheck.params import st_to_yz, SQRT2
from saddlecheck.scalars import (double_well, g_profile, heteroclinic,
                                 hh_supersolution, rho)
from saddlecheck.solver import SaddleSolution

KAPPA_DEFAULT = 10.0
TOL_FLOOR = 1e-12

# Physical width excluded at the truncation edge.  The Dirichlet data there
# is the product supersolution, whose deficit relative to the true solution
# decays only like e^(-s) into the domain; within ~2.5 length units the
# solution error still exceeds the h^2 tolerance scale of the tight checks.
OUTER_MARGIN = 2.5

# Constant for the weighted deficit bound phi <= C (1/t - 1/s) H(y) rho(z)
# on z > 1.  C is fixed by requiring the z = 1 trace to follow from the
# unweighted bound 4 H(y)(H(z) + z H'(z))/(y^2 - z^2), which is the anchor of
# the maximum-principle argument; with rho normalized by rho(0) = 0,
# rho'(0) = 2/3 this gives C ~= 5.19.
def _deficit_rho_constant() -> float:
    h1 = float(np.asarray(heteroclinic(1.0)))
    hp1 = float(np.asarray(heteroclinic(1.0, 1)))
    return 4.0 * (h1 + hp1) / (2.0 * SQRT2 * float(rho(1.0)))


@dataclass(frozen=True)
class CheckReport:
    id: str
    description: str
    passed: bool
    worst_margin: float
    worst_point: tuple
    nodes_checked: int
    nodes_excluded: int
    tolerance_used: float
    extras: dict = field(default_factory=dict)

    def summary(self) -> str:
        flag = "pass" if self.passed else "FAIL"
        return (f"[{flag}] {self.id}: worst {self.worst_margin:+.3e} "
                f"(tol {self.tolerance_used:.1e}) at {self.worst_point}, "
                f"{self.nodes_checked} nodes")


def tri_mask(grid, cone: int = 2, axis: int = 2,
             outer: float = OUTER_MARGIN) -> np.ndarray:
    """Triangle nodes at least `cone` nodes above the diagonal, `axis` nodes
    off the t=0 axis, and `outer` length units inside the truncation edge.
    cone=0 includes the diagonal itself."""
    n = grid.N + 1
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    outer_nodes = max(int(round(outer / grid.h)), 3)
    return (i - j >= cone) & (j >= axis) & (i <= grid.N - outer_nodes)


def cone_interp(sol: SaddleSolution, F: np.ndarray) -> np.ndarray:
    """Interpolate the diagonal trace of a field at the cone foot of each
    node: the point on s=t with the same y-coordinate, i.e. s'=t'=(s+t)/2."""
    grid = sol.grid
    k = np.arange(grid.N + 1)
    S, T = grid.meshgrid()
    return np.interp((S + T) / 2.0, k * grid.h, F[k, k])


def _fields(sol: SaddleSolution):
    g = sol.grid
    S, T = g.meshgrid()
    y, z = st_to_yz(S, T)
    return S, T, y, z


def _sqrt_pos(x):
    return np.sqrt(np.maximum(x, 0.0))


def _build_suite(sol: SaddleSolution):
    """Return list of (id, description, margin, scale, mask, kappa_mult).

    margin >= 0 is the satisfied direction for every entry; scale is the sum
    of term magnitudes used by the tolerance model.
    """
    g = sol.grid
    m = sol.params.m
    d = float(m - 1)           # drift coefficient, 3 in the base dimension
    c2 = (m - 1) / 2.0         # the (n-2)/4 coefficient with n = 2m
    S, T, y, z = _fields(sol)
    u, us, ut = sol.u, sol.u_s, sol.u_t
    uss, ust, utt = sol.u_ss, sol.u_st, sol.u_tt
    uy, uz = sol.u_y, sol.u_z

    std = tri_mask(g)                      # 2nd derivatives / 1/t factors
    first = tri_mask(g, cone=1, axis=1)    # first derivatives only
    with_diag = tri_mask(g, cone=0, axis=1)

    inv_t2s2 = np.zeros_like(u)
    msk = (S > 0) & (T > 0)
    inv_t2s2[msk] = 1.0 / T[msk] ** 2 - 1.0 / S[msk] ** 2
    inv_ts = np.zeros_like(u)
    inv_ts[msk] = 1.0 / T[msk] - 1.0 / S[msk]

    suite = []

    def add(cid, desc, margin, scale, mask, kappa_mult=1.0):
        suite.append((cid, desc, margin, scale, mask, kappa_mult))

    # 1. energy-gradient (Modica-type) bound
    grad2 = 0.5 * (us**2 + ut**2)
    add("01-modica", "F(u) - |grad u|^2/2 >= 0",
        double_well(u) - grad2, double_well(u) + grad2, first)

    # 2. t u_s + s u_t <= 0 (equality on the diagonal)
    add("02-tus-sut", "-(t u_s + s u_t) >= 0",
        -(T * us + S * ut), np.abs(T * us) + np.abs(S * ut), with_diag)

    # 3. 0 <= u_s + u_t <= (2z/(y+z)) u_s.  The factor comes from
    # |u_t| >= (t/s) u_s (a consequence of check 2): u_s + u_t <=
    # ((s-t)/s) u_s = (2z/(y+z)) u_s, with equality in the axis limit.
    m3a = us + ut
    m3b = 2.0 * z / (y + z + 1e-300) * us - (us + ut)
    add("03-usut-decay", "u_s+u_t in [0, (2z/(y+z)) u_s]",
        np.minimum(m3a, m3b), np.abs(us) + np.abs(ut), first)

    # 4. explicit exponential decay of u_s
    bound4 = 2.0 * (np.exp(0.85 * T) + 4.9 / _sqrt_pos(T + (T <= 0))) * np.exp(-0.85 * S)
    add("04-us-decay", "2(e^{0.85t}+4.9/sqrt t)e^{-0.85s} - u_s >= 0",
        bound4 - us, bound4 + np.abs(us), tri_mask(g, cone=1))

    # 5. u_s/s - u_ss >= 0
    t5 = np.where(msk, us / np.where(msk, S, 1.0), 0.0)
    add("05-uss", "u_s/s - u_ss >= 0", t5 - uss, np.abs(t5) + np.abs(uss), std)

    # 6. u_s/s + u_t/t - u_ss - u_tt >= 0
    t6 = np.where(msk, ut / np.where(msk, T, 1.0), 0.0)
    add("06-laplace-split", "u_s/s + u_t/t - u_ss - u_tt >= 0",
        t5 + t6 - uss - utt,
        np.abs(t5) + np.abs(t6) + np.abs(uss) + np.abs(utt), std)

    # 7. u_s+u_t <= (1/t^2 - 1/s^2)(2(u_s-u_t) + sqrt(u_s-u_t))
    rhs7 = inv_t2s2 * (2.0 * (us - ut) + _sqrt_pos(us - ut))
    add("07-usut-bound", "(1/t^2-1/s^2)(2(u_s-u_t)+sqrt(u_s-u_t)) - (u_s+u_t) >= 0",
        rhs7 - (us + ut), np.abs(rhs7) + np.abs(us + ut), std)

    # 8. u - u^3 + u_ss >= 0
    add("08-u-u3-uss", "u - u^3 + u_ss >= 0",
        u - u**3 + uss, np.abs(u - u**3) + np.abs(uss), std)

    # 9. sqrt2 u_s u + u_ss >= 0
    add("09-uus", "sqrt2 u_s u + u_ss >= 0",
        SQRT2 * us * u + uss, SQRT2 * np.abs(us * u) + np.abs(uss), std)

    # 10. sqrt2 u_t u + u_st <= 0
    add("10-utust", "-(sqrt2 u_t u + u_st) >= 0",
        -(SQRT2 * ut * u + ust), SQRT2 * np.abs(ut * u) + np.abs(ust), std)

    # 11. 2(u_s+u_t) + u_st + u_ss >= 0
    add("11-2us-ust-uss", "2(u_s+u_t) + u_st + u_ss >= 0",
        2.0 * (us + ut) + ust + uss,
        2.0 * np.abs(us + ut) + np.abs(ust) + np.abs(uss), std)

    # 12. 2(u_s+u_t) - u_st - u_tt >= 0
    add("12-2us-ust-utt", "2(u_s+u_t) - u_st - u_tt >= 0",
        2.0 * (us + ut) - ust - utt,
        2.0 * np.abs(us + ut) + np.abs(ust) + np.abs(utt), std)

    # 13. u/y + u/z - u_y - u_z >= 0, and u >= y u_y
    zsafe = np.where(z > 0, z, 1.0)
    m13a = np.where(z > 0, u / np.where(y > 0, y, 1.0) + u / zsafe - uy - uz, 0.0)
    m13b = u - y * uy
    add("13-radial", "u/y + u/z - u_y - u_z >= 0 and u - y u_y >= 0",
        np.minimum(m13a, m13b),
        np.abs(u / zsafe) + np.abs(uy) + np.abs(uz) + np.abs(y * uy), std)

    # 14. u_z - y u_yz >= 0 on the cone (z = 0); diagonal trace with a
    # looser tolerance since the cross term needs a one-sided read.
    k = np.arange(g.N + 1)
    uz_diag = uz[k, k]
    uyz_diag = np.zeros_like(uz_diag)
    uyz_diag[1:-1] = (uz_diag[2:] - uz_diag[:-2]) / (2.0 * SQRT2 * g.h)
    m14 = np.full_like(u, np.inf)
    s14 = np.zeros_like(u)
    np.fill_diagonal(m14, uz_diag - SQRT2 * k * g.h * uyz_diag)
    np.fill_diagonal(s14, np.abs(uz_diag) + np.abs(SQRT2 * k * g.h * uyz_diag))
    mask14 = np.zeros_like(u, dtype=bool)
    np.fill_diagonal(mask14, (k >= 2) & (k <= g.N - 3))
    add("14-cone-uz", "u_z - y u_yz >= 0 on the cone",
        m14, s14, mask14, kappa_mult=4.0)

    # 15. -u_t/t + u_st + u_tt >= 0
    add("15-ut-over-t", "-u_t/t + u_st + u_tt >= 0",
        -t6 + ust + utt, np.abs(t6) + np.abs(ust) + np.abs(utt), std)

    # 16. (m-1)(1/t - 1/s) u_s + u_ss + 2 u_st >= 0
    add("16-uss-2ust", "(m-1)(1/t-1/s) u_s + u_ss + 2u_st >= 0",
        d * inv_ts * us + uss + 2.0 * ust,
        d * np.abs(inv_ts * us) + np.abs(uss) + 2.0 * np.abs(ust), std)

    # 17. (m-1)(1/t - 1/s)(u_s - u_t) + 2u_st + u_ss + u_tt >= 0
    add("17-ust-uss", "(m-1)(1/t-1/s)(u_s-u_t) + 2u_st + u_ss + u_tt >= 0",
        d * inv_ts * (us - ut) + 2.0 * ust + uss + utt,
        d * np.abs(inv_ts * (us - ut)) + 2.0 * np.abs(ust)
        + np.abs(uss) + np.abs(utt), std)

    # 18. u_st + u_ss + (1/t^2-1/s^2)(2(u_s-u_t)+sqrt(u_s-u_t)) >= 0
    add("18-a1", "u_st + u_ss + (1/t^2-1/s^2)(2(u_s-u_t)+sqrt(u_s-u_t)) >= 0",
        ust + uss + rhs7, np.abs(ust) + np.abs(uss) + np.abs(rhs7), std)

    # 19. u_s u + u_ss >= 0
    add("19-usu-uss", "u_s u + u_ss >= 0",
        us * u + uss, np.abs(us * u) + np.abs(uss), std)

    # 20. -u_t u - u_st >= 0
    add("20-utu-ust", "-u_t u - u_st >= 0",
        -ut * u - ust, np.abs(ut * u) + np.abs(ust), std)

    # 21. ((n-2)/4)(1/t - 1/s) u_s + u_ss + u_st >= 0
    add("21-half-uss-ust", "((n-2)/4)(1/t-1/s) u_s + u_ss + u_st >= 0",
        c2 * inv_ts * us + uss + ust,
        c2 * np.abs(inv_ts * us) + np.abs(uss) + np.abs(ust), std)

    # 22. ((n-2)/4)(1/s - 1/t) u_t - u_st - u_tt >= 0
    add("22-half-ust-utt", "((n-2)/4)(1/s-1/t) u_t - u_st - u_tt >= 0",
        -c2 * inv_ts * ut - ust - utt,
        c2 * np.abs(inv_ts * ut) + np.abs(ust) + np.abs(utt), std)

    # 23. u_s + u_t - u_st - u_tt >= 0
    add("23-st-tt", "u_s + u_t - u_st - u_tt >= 0",
        us + ut - ust - utt,
        np.abs(us + ut) + np.abs(ust) + np.abs(utt), std)

    # 24. u_s + u_t + u_st + u_ss >= 0
    add("24-us-ut-ust", "u_s + u_t + u_st + u_ss >= 0",
        us + ut + ust + uss,
        np.abs(us + ut) + np.abs(ust) + np.abs(uss), std)

    # 25. bootstrapped bound and its corollary
    rhs25 = inv_t2s2 * (us - ut + 0.5 * _sqrt_pos(us - ut))
    m25a = rhs25 - (us + ut)
    m25b = rhs25 + ust + uss
    add("25-bootstrap", "u_s+u_t <= (1/t^2-1/s^2)(u_s-u_t+sqrt(u_s-u_t)/2); "
        "same bound + u_st + u_ss >= 0",
        np.minimum(m25a, m25b),
        np.abs(rhs25) + np.abs(us + ut) + np.abs(ust) + np.abs(uss), std)

    # 26. dE/dz >= 0 for E = u^2 + 2u_s, and the cone-anchored lower bound
    m26a = us * u - ut * u + uss - ust
    us_cone = cone_interp(sol, us)
    m26b = 2.0 * us + u**2 - 2.0 * us_cone
    add("26-E-monotone", "d(u^2+2u_s)/dz >= 0 and 2u_s + u^2 - 2u_s(y,0) >= 0",
        np.minimum(m26a, m26b),
        np.abs(us * u) + np.abs(ut * u) + np.abs(uss) + np.abs(ust)
        + 2.0 * np.abs(us) + 2.0 * np.abs(us_cone) + u**2, std)

    # 27. deficit phi = H(y)H(z) - u: nonnegative and two upper bounds
    phi = hh_supersolution(y, z) - u
    denom = np.where(msk, y**2 - z**2, 1.0)
    Hy = np.asarray(heteroclinic(y))
    b27a = 8.0 * Hy * np.asarray(g_profile(z)) / denom   # 4H(y)(H(z)+zH'(z))
    m27 = np.minimum(phi, b27a - phi)
    zgt1 = z > 1.0
    rho_z = np.zeros_like(u)
    rho_z[zgt1] = rho(z[zgt1])
    b27b = _deficit_rho_constant() * inv_ts * Hy * rho_z
    m27 = np.where(zgt1, np.minimum(m27, b27b - phi), m27)
    add("27-deficit", "0 <= H(y)H(z)-u <= 4H(y)(H+zH')/(y^2-z^2); "
        "<= C (1/t-1/s)H(y)rho(z) for z>1",
        m27, phi + np.abs(b27a), std)

    # 28. subsolution bound u >= H(0.45y)H(0.45z)
    sub = np.asarray(hh_supersolution(0.45 * y, 0.45 * z))
    add("28-subsolution", "u - H(0.45y)H(0.45z) >= 0",
        u - sub, np.abs(u) + sub, first)

    # 29. lower bound on the Laplacian combination (controls |u_tt|)
    lhs29 = uss + utt + d * t5 + d * t6
    rhs29 = -u * (2.0 * us + 1.0 - 2.0 * us_cone)
    add("29-utt-bound", "u_ss+u_tt+(m-1)(u_s/s+u_t/t) + u(2u_s+1-2u_s(y,0)) >= 0",
        lhs29 - rhs29, np.abs(lhs29) + np.abs(rhs29), std)

    return suite


def run_inequality_suite(sol: SaddleSolution, kappa: float = KAPPA_DEFAULT):
    """Evaluate every catalog inequality; returns a list of CheckReport."""
    if sol.u_s is None:
        raise ValueError("solution lacks derivative fields")
    h = sol.grid.h
    reports = []
    total_nodes = int(sol.grid.mask_triangle.sum())
    for cid, desc, margin, scale, mask, kmult in _build_suite(sol):
        tol = np.maximum(kappa * kmult * h * h * scale, TOL_FLOOR)
        slack = np.where(mask, margin + tol, np.inf)
        i, j = np.unravel_index(np.argmin(slack), slack.shape)
        reports.append(CheckReport(
            id=cid, description=desc,
            passed=bool(slack[i, j] >= 0.0),
            worst_margin=float(margin[i, j]),
            worst_point=(float(i * h), float(j * h)),
            nodes_checked=int(mask.sum()),
            nodes_excluded=total_nodes - int(mask.sum()),
            tolerance_used=float(tol[i, j]),
        ))
    return reports


def verify_supersolution(sol: SaddleSolution, cand: CandidateParams,
                         tol: float = 1e-8,
                         phi_floor: float = 0.0) -> CheckReport:
    """Check L Phi <= tol and Phi > phi_floor at interior nodes; extras carry
    worst margins per region (E1/E2/E3)."""
    lp, mask = l_phi(sol, cand)
    ph, _ = phi_field(sol, cand)
    h = sol.grid.h
    S, T = sol.grid.meshgrid()
    regions = region_classify(S, T)
    extras = {}
    for label, rid in (("E1", 1), ("E2", 2), ("E3", 3)):
        rm = mask & (regions == rid)
        extras[f"worst_lphi_{label}"] = float(lp[rm].max()) if rm.any() else None
    extras["min_phi"] = float(ph[mask].min())
    worst = float(lp[mask].max())
    i, j = np.unravel_index(np.argmax(np.where(mask, lp, -np.inf)), lp.shape)
    passed = worst <= tol and extras["min_phi"] > phi_floor
    return CheckReport(
        id=f"supersolution-n{cand.n}",
        description="L Phi <= 0 and Phi > 0 at interior nodes",
        passed=passed, worst_margin=-worst, worst_point=(float(i * h), float(j * h)),
        nodes_checked=int(mask.sum()), nodes_excluded=0,
        tolerance_used=tol, extras=extras)


def sign_map(field_arr: np.ndarray, grid, tau: float = 0.0) -> np.ndarray:
    """Per-node sign classification: -1, 0 (within tau), +1."""
    out = np.zeros(field_arr.shape, dtype=np.int8)
    out[field_arr > tau] = 1
    out[field_arr < -tau] = -1
    return out
