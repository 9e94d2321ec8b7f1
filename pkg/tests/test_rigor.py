"""Outward-rounded interval arithmetic, expression catalog, symbolic
differentiation, and the branch-and-bound nonpositivity prover."""

import numpy as np
import pytest

from saddlecheck.candidate import coefficient_set
from saddlecheck.params import CandidateParams
from saddlecheck.rigor import (ExprNode, HalfPlane, IntervalArray,
                               builtin_expressions, defect_expression,
                               defect_gap_expression, differentiate, nexp,
                               prove_nonpositive)

RNG = np.random.default_rng(917)

# frozen oracle for the scaled subsolution defect at (a, y, z) = (0.3, 3, 0.5)
# with drift coefficient d = 3; value computed by 50-digit arbitrary-precision
# evaluation of the definition
DEFECT_ORACLE = -0.2497967676318935697


def _point_env(names, values):
    return dict(zip(names, values))


def test_interval_arithmetic_soundness_bulk():
    # 1e5 random (box, point-in-box) pairs per catalog entry: every pointwise
    # value must land inside the box enclosure
    cat = builtin_expressions(8)
    n_boxes, n_samples = 2000, 50
    for name in ("c_s", "c_ss", "c_st", "c_tt", "c_t", "f", "h"):
        expr = cat[name]
        t_lo = RNG.uniform(0.2, 18.0, n_boxes)
        t_w = RNG.uniform(1e-4, 0.3, n_boxes)
        s_lo = t_lo + t_w + RNG.uniform(0.05, 5.0, n_boxes)
        s_w = RNG.uniform(1e-4, 0.3, n_boxes)
        env = {"s": IntervalArray.from_bounds(s_lo, s_lo + s_w),
               "t": IntervalArray.from_bounds(t_lo, t_lo + t_w)}
        iv = expr.evaluate(env)
        fs = s_lo[:, None] + s_w[:, None] * RNG.uniform(0, 1, (n_boxes, n_samples))
        ft = t_lo[:, None] + t_w[:, None] * RNG.uniform(0, 1, (n_boxes, n_samples))
        vals = expr.evaluate({"s": fs, "t": ft})
        ok = (vals >= iv.lo[:, None]) & (vals <= iv.hi[:, None])
        assert np.all(ok | iv.bad[:, None]), name
        assert not iv.bad.any(), name


def test_catalog_size_and_point_agreement():
    cat = builtin_expressions(8)
    assert len(cat) >= 9
    for key in ("f", "h", "c_s", "c_t", "c_ss", "c_st", "c_tt",
                "defect", "defect_gap", "phi0_radial"):
        assert key in cat
    cs = coefficient_set(2.0, 1.0, CandidateParams(n=8))
    env = {"s": 2.0, "t": 1.0}
    for key, want in (("c_s", cs.c_s), ("c_t", cs.c_t), ("c_ss", cs.c_ss),
                      ("c_st", cs.c_st), ("c_tt", cs.c_tt)):
        assert cat[key].evaluate(env) == pytest.approx(want, rel=1e-12)


def test_cross_coefficient_vanishes_on_diagonal_interval():
    # C_st(t, t) = 0 analytically; the interval enclosure at a point input
    # must straddle zero with near-roundoff width
    cat = builtin_expressions(8)
    for tt in (0.7, 1.3, 4.0):
        pt = IntervalArray.point(np.array([tt]))
        iv = cat["c_st"].evaluate({"s": pt, "t": pt})
        assert iv.lo[0] <= 0.0 <= iv.hi[0]
        assert iv.hi[0] - iv.lo[0] <= 1e-10


def test_defect_frozen_oracle_and_gap_form_agreement():
    defect = defect_expression()
    gap = defect_gap_expression()
    got = defect.evaluate({"a": 0.3, "y": 3.0, "z": 0.5, "d": 3.0})
    assert got == pytest.approx(DEFECT_ORACLE, rel=1e-14)
    got_gap = gap.evaluate({"a": 0.3, "u": 2.5, "z": 0.5, "d": 3.0})
    assert got_gap == pytest.approx(DEFECT_ORACLE, rel=1e-12)
    # dense random agreement between the two parametrizations
    a = RNG.uniform(0.01, 0.45, 3000)
    z = RNG.uniform(0.01, 12.0, 3000)
    u = RNG.uniform(0.01, 12.0, 3000)
    v1 = defect.evaluate({"a": a, "y": z + u, "z": z, "d": 3.0})
    v2 = gap.evaluate({"a": a, "u": u, "z": z, "d": 3.0})
    assert np.max(np.abs(v1 - v2) / np.maximum(np.abs(v1), 1e-300)) < 1e-9


def test_differentiate_matches_finite_differences():
    gap = defect_gap_expression()
    names = ("a", "u", "z")
    base = {"a": 0.31, "u": 1.7, "z": 0.9, "d": 3.0}
    eps = 1e-6
    for nm in names:
        g = differentiate(gap, nm)
        hi = dict(base)
        lo = dict(base)
        hi[nm] += eps
        lo[nm] -= eps
        fd = (gap.evaluate(hi) - gap.evaluate(lo)) / (2 * eps)
        assert g.evaluate(base) == pytest.approx(fd, rel=1e-6), nm


def test_differentiate_shares_subtrees():
    # d/dx exp(x) must reuse the original exp node, so one memo pass covers
    # both the function and its derivative
    x = ExprNode.var("x")
    e = nexp(x)
    de = differentiate(e, "x")
    stack, found = [de], False
    while stack:
        node = stack.pop()
        if node is e:
            found = True
            break
        stack.extend(node.children)
    assert found


def test_prover_toy_claims():
    x = ExprNode.var("x")
    # max of x(1-x) is 1/4: provable with slack, undecided without
    expr = x * (1.0 - x) - 0.26
    res = prove_nonpositive(expr, ["x"], [[0.0, 1.0]])
    assert res.proven
    assert res.min_undecided_width == 0.0
    bad = prove_nonpositive(x * (1.0 - x) - 0.24, ["x"], [[0.0, 1.0]],
                            max_boxes=20_000)
    assert not bad.proven
    # the surviving frontier hugs the true maximizer x = 1/2
    assert np.all(bad.frontier[:, 0, 0] < 0.5 + 0.1)
    assert np.all(bad.frontier[:, 0, 1] > 0.5 - 0.1)


def test_prover_halfplane_constraint():
    s, t = ExprNode.var("s"), ExprNode.var("t")
    # t - s <= 0 holds only thanks to the clip s >= t + 0.05
    res = prove_nonpositive(t - s, ["s", "t"], [[0.0, 2.0], [0.0, 2.0]],
                            constraints=(HalfPlane(0, 1, 0.05),))
    assert res.proven


def test_prover_fixed_and_frozen_dims():
    cat = builtin_expressions(8)
    gap = cat["defect_gap"]
    res = prove_nonpositive(
        gap, ["a", "u", "z"],
        [[0.01, 0.45], [0.5, 2.0], [0.5, 2.0]],
        fixed={"d": 3.0}, frozen_dims=("a",), min_width=1e-6)
    assert res.proven
    # frozen dimension is never split: frontier-free proof with modest effort
    assert res.boxes_examined < 50_000


def test_prover_deterministic():
    cat = builtin_expressions(8)
    kw = dict(names=["s", "t"], box=[[1.0, 4.0], [0.5, 2.0]],
              constraints=(HalfPlane(0, 1, 0.05),))
    r1 = prove_nonpositive(cat["c_ss"], **kw)
    r2 = prove_nonpositive(cat["c_ss"], **kw)
    assert r1.proven and r2.proven
    assert r1.boxes_examined == r2.boxes_examined


def test_prover_monotone_in_margin():
    # demanding a deeper margin can only cost more boxes
    cat = builtin_expressions(8)
    kw = dict(names=["s", "t"], box=[[1.0, 4.0], [0.5, 2.0]],
              constraints=(HalfPlane(0, 1, 0.05),))
    loose = prove_nonpositive(cat["c_ss"], margin=0.0, **kw)
    tight = prove_nonpositive(cat["c_ss"], margin=1e-5, **kw)
    assert loose.proven and tight.proven
    assert tight.boxes_examined >= loose.boxes_examined


def test_interval_division_by_zero_flags_bad():
    num = IntervalArray.from_bounds(np.array([1.0]), np.array([2.0]))
    den = IntervalArray.from_bounds(np.array([-1.0]), np.array([1.0]))
    out = num / den
    assert out.bad[0]
    assert out.lo[0] == -np.inf and out.hi[0] == np.inf
