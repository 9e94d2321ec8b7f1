"""Comparison-function candidate Phi = f u_s + h u_t + Phi_0 and its
coefficient fields for the linearized operator L = Delta_m + (1 - 3u^2).

A product rule plus the differentiated equation collapses L(Phi) to

    L Phi = C_s u_s + C_t u_t + C_ss u_ss + C_st u_st + C_tt u_tt + L Phi_0,

with C_s = Delta_m f + ((m-1)/s^2) f, C_ss = 2 f_s, C_tt = 2 h_t,
C_st = 2 f_t + 2 h_s, and C_t the s<->t mirror of C_s.  Stability follows
once Phi > 0 and L Phi <= 0, so the verifier needs tight point values of the
five C coefficients.  Partial derivatives of f are produced two independent
ways: symbolically (differentiated and compiled once per dimension) and by
forward-mode second-order jets on the same generic formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from saddlecheck import jets
from saddlecheck.grid import NODE_INTERIOR
from saddlecheck.params import CandidateParams, SQRT2


def f_generic(s, t, cand: CandidateParams):
    """The anisotropic decay profile f(s,t).

    Works on plain arrays or on Jet2 values.  The leading factor interpolates
    between the cone direction and the s-axis; the power enforces the decay
    rate (s+t)^-(n-3)/2 that sits strictly between the indicial rates at
    infinity.  n = 8 carries an extra short-range term and a sqrt(2) factor.
    """
    radial = jets.sqrt(s * s + t * t)
    if cand.has_exp_term:
        core = (jets.tanh(s / t) * SQRT2 * s / radial
                + (1.0 / 4.2) * (1.0 - jets.exp(-s / (2.0 * t))))
    else:
        core = jets.tanh(s / t) * s / radial
    return core * (s + t) ** (-cand.decay_exponent)


def phi0_generic(s, t, cand: CandidateParams):
    """Additive far-field corrector Phi_0, symmetric in (s,t).  Its leading
    harmonic-like term is tuned to dominate the e^(t-s) tail that f u_s + h u_t
    alone fails to control."""
    c, p = cand.phi0_coeff, cand.phi0_exponent
    return c * (s ** (-p) * jets.exp(-t / 3.0) + t ** (-p) * jets.exp(-s / 3.0))


@lru_cache(maxsize=8)
def _compiled_partials(n: int):
    """Symbolic partials of f through second order, compiled to numpy.
    Returns callables (f, f_s, f_t, f_ss, f_st, f_tt) of (s, t)."""
    cand = CandidateParams(n=n)
    s, t = sp.symbols("s t", positive=True)
    radial = sp.sqrt(s**2 + t**2)
    if cand.has_exp_term:
        core = (sp.tanh(s / t) * sp.sqrt(2) * s / radial
                + sp.Rational(10, 42) * (1 - sp.exp(-s / (2 * t))))
    else:
        core = sp.tanh(s / t) * s / radial
    expr = core * (s + t) ** (-sp.Rational(n - 3, 2))
    orders = [expr,
              sp.diff(expr, s), sp.diff(expr, t),
              sp.diff(expr, s, 2), sp.diff(expr, s, t), sp.diff(expr, t, 2)]
    return tuple(sp.lambdify((s, t), e, modules="numpy") for e in orders)


def f_partials(s, t, cand: CandidateParams, route: str = "symbolic"):
    """(f, f_s, f_t, f_ss, f_st, f_tt) at (s, t) by the requested route."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if route == "symbolic":
        fns = _compiled_partials(cand.n)
        return tuple(np.asarray(fn(s, t), dtype=float) for fn in fns)
    if route == "jet":
        j = f_generic(jets.Jet2.variable_s(s, t), jets.Jet2.variable_t(s, t), cand)
        return (j.v, j.ds, j.dt, j.dss, j.dst, j.dtt)
    raise ValueError(f"unknown derivative route {route!r}")


@dataclass(frozen=True)
class CoefficientSet:
    """Point values of the five coefficient fields at (s, t)."""
    c_s: np.ndarray
    c_t: np.ndarray
    c_ss: np.ndarray
    c_st: np.ndarray
    c_tt: np.ndarray


def coefficient_set(s, t, cand: CandidateParams, route: str = "symbolic") -> CoefficientSet:
    """All five C coefficients, using h(s,t) = -f(t,s) so that every h
    partial is a mirrored f partial."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    d = cand.m - 1
    f, fs, ft, fss, fst, ftt = f_partials(s, t, cand, route)
    g, gs, gt, gss, gst, gtt = f_partials(t, s, cand, route)  # f and partials at (t, s)
    # h(s,t) = -f(t,s): h_s = -g_t, h_t = -g_s, h_ss = -g_tt, h_st = -g_st, h_tt = -g_ss
    c_s = fss + ftt + d / s * fs + d / t * ft + d / s**2 * f
    c_t = -(gss + gtt + d / s * gt + d / t * gs + d / t**2 * g)
    c_ss = 2.0 * fs
    c_tt = -2.0 * gs
    c_st = 2.0 * ft - 2.0 * gt
    return CoefficientSet(c_s=c_s, c_t=c_t, c_ss=c_ss, c_st=c_st, c_tt=c_tt)


def l_phi0_summand(s, t, u_value, cand: CandidateParams):
    """L applied to the single summand c*s^(-p)*e^(-t/3).

    Closed form: the radial part contributes c*(p^2 + p - (m-1)p) s^(-p-2)
    e^(-t/3) (identically zero when p = m-1, i.e. n = 10, 12); the rest is
    psi * (1/9 + 1 - (m-1)/(3t) - 3u^2).
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    c, p, d = cand.phi0_coeff, cand.phi0_exponent, cand.m - 1
    psi = c * s ** (-p) * np.exp(-t / 3.0)
    lead = c * (p * p + p - d * p) * s ** (-p - 2.0) * np.exp(-t / 3.0)
    return lead + psi * (1.0 / 9.0 + 1.0 - d / (3.0 * t) - 3.0 * np.asarray(u_value) ** 2)


def l_phi0(s, t, u_value, cand: CandidateParams):
    """L Phi_0 with both symmetric summands (u is symmetric up to sign, and
    only u^2 enters)."""
    return (l_phi0_summand(s, t, u_value, cand)
            + l_phi0_summand(t, s, u_value, cand))


def phi_field(sol, cand: CandidateParams, include_phi0: bool = True):
    """Phi = f u_s + h u_t + Phi_0 on the triangle.  Returns (field, mask);
    the field is only meaningful where the mask (interior nodes) is set."""
    _require_match(sol, cand)
    grid = sol.grid
    mask = grid.kind == NODE_INTERIOR
    S, T = grid.meshgrid()
    s = np.where(mask, S, 1.0)
    t = np.where(mask, T, 1.0)
    f = f_partials(s, t, cand)[0]
    h = -f_partials(t, s, cand)[0]
    out = f * sol.u_s + h * sol.u_t
    if include_phi0:
        out += np.asarray(phi0_generic(s, t, cand))
    return np.where(mask, out, 0.0), mask


def l_phi(sol, cand: CandidateParams, include_phi0: bool = True,
          route: str = "symbolic"):
    """L Phi assembled from the coefficient identity at interior nodes.
    Returns (field, mask)."""
    _require_match(sol, cand)
    grid = sol.grid
    mask = grid.kind == NODE_INTERIOR
    S, T = grid.meshgrid()
    s = np.where(mask, S, 2.0)
    t = np.where(mask, T, 1.0)
    cs = coefficient_set(s, t, cand, route)
    out = (cs.c_s * sol.u_s + cs.c_t * sol.u_t + cs.c_ss * sol.u_ss
           + cs.c_st * sol.u_st + cs.c_tt * sol.u_tt)
    if include_phi0:
        out += l_phi0(s, t, sol.u, cand)
    return np.where(mask, out, 0.0), mask


def _require_match(sol, cand: CandidateParams) -> None:
    if sol.params.m != cand.m:
        raise ValueError(
            f"solution has m={sol.params.m} but candidate expects m={cand.m}")


# ---------------------------------------------------------------------------
# region and ratio diagnostics
# ---------------------------------------------------------------------------

REGION_E1 = 1
REGION_E2 = 2
REGION_E3 = 3


def region_classify(s, t):
    """Partition of the triangle: E1 = {0.65 s < t < s, t > 1/2},
    E3 = {t < 1/2}, E2 = the rest (1/2 <= t <= 0.65 s)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.full(np.broadcast(s, t).shape, REGION_E2, dtype=np.int8)
    out[np.broadcast_to(t < 0.5, out.shape)] = REGION_E3
    e1 = (t > 0.65 * s) & (t < s) & (t > 0.5)
    out[np.broadcast_to(e1, out.shape)] = REGION_E1
    return out


def lambda_coeff(s, t, cand: CandidateParams):
    """lambda = ((n-2)/4)(1/t - 1/s), the weight in the directional convexity
    bound lambda*u_s + u_st + u_ss >= 0."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return (cand.n - 2) / 4.0 * (1.0 / t - 1.0 / s)


def t_ratio(s, t, r, cand: CandidateParams):
    """T(r) = (1-r) C_ss / (C_s + (1-r) max(C_st - C_ss, 0) - r C_t).

    Returns (value, ok); ok is False where the denominator is >= 0, in which
    case the ratio is reported as nan rather than clamped.
    """
    cs = coefficient_set(s, t, cand)
    r = np.asarray(r, dtype=float)
    denom = cs.c_s + (1.0 - r) * np.maximum(cs.c_st - cs.c_ss, 0.0) - r * cs.c_t
    ok = denom < 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(ok, (1.0 - r) * cs.c_ss / np.where(ok, denom, 1.0), np.nan)
    return val, ok


def ct_over_cs(s, t, cand: CandidateParams):
    cs = coefficient_set(s, t, cand)
    return cs.c_t / cs.c_s


def css_over_gap(s, t, cand: CandidateParams):
    cs = coefficient_set(s, t, cand)
    return cs.c_ss / (cs.c_st - cs.c_tt)
