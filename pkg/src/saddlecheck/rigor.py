"""Interval-arithmetic branch-and-bound prover for the closed-form sign
claims: the subsolution defect and the candidate coefficient fields.

Intervals are vectorized (arrays of boxes evaluated at once) with outward
rounding by two ulps around every primitive operation.  Partial operations
(division through zero, roots/powers of nonpositive bases) mark a box "bad"
instead of failing; bad boxes are simply split further.  A claim is proven
when every surviving leaf box has an enclosure with hi <= -margin.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy as sp

_NEG = np.float64(-np.inf)
_POS = np.float64(np.inf)


def _down(x):
    with np.errstate(over="ignore"):
        return np.nextafter(np.nextafter(x, _NEG), _NEG)


def _up(x):
    with np.errstate(over="ignore"):
        return np.nextafter(np.nextafter(x, _POS), _POS)


@dataclass(frozen=True)
class IntervalArray:
    """Axis-aligned enclosures [lo, hi] with a per-entry failure flag."""
    lo: np.ndarray
    hi: np.ndarray
    bad: np.ndarray

    @staticmethod
    def from_bounds(lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return IntervalArray(lo, hi, np.zeros(lo.shape, dtype=bool))

    @staticmethod
    def point(x):
        x = np.asarray(x, dtype=float)
        return IntervalArray(x.copy(), x.copy(), np.zeros(x.shape, dtype=bool))

    def _wrap(self, lo, hi, bad=None):
        b = self.bad if bad is None else bad
        lo = np.where(b, -np.inf, _down(lo))
        hi = np.where(b, np.inf, _up(hi))
        return IntervalArray(lo, hi, b)

    def __add__(self, o):
        o = _lift(o, self)
        return self._wrap(self.lo + o.lo, self.hi + o.hi, self.bad | o.bad)

    def __sub__(self, o):
        o = _lift(o, self)
        return self._wrap(self.lo - o.hi, self.hi - o.lo, self.bad | o.bad)

    def __neg__(self):
        return IntervalArray(-self.hi, -self.lo, self.bad)

    def __mul__(self, o):
        o = _lift(o, self)
        cands = np.stack([self.lo * o.lo, self.lo * o.hi,
                          self.hi * o.lo, self.hi * o.hi])
        cands = np.nan_to_num(cands, nan=0.0)  # 0 * inf only from bad lanes
        return self._wrap(cands.min(axis=0), cands.max(axis=0),
                          self.bad | o.bad)

    def __truediv__(self, o):
        o = _lift(o, self)
        bad = self.bad | o.bad | ((o.lo <= 0.0) & (o.hi >= 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = IntervalArray(
                np.where(bad, -np.inf, np.minimum(1.0 / o.lo, 1.0 / o.hi)),
                np.where(bad, np.inf, np.maximum(1.0 / o.lo, 1.0 / o.hi)),
                bad)
        return self * inv

    def __pow__(self, p):
        p = float(p)
        bad = self.bad | (self.lo <= 0.0)
        with np.errstate(invalid="ignore"):
            a, b = self.lo**p, self.hi**p
        return self._wrap(np.minimum(a, b), np.maximum(a, b), bad)

    def exp(self):
        return self._wrap(np.exp(self.lo), np.exp(self.hi))

    def tanh(self):
        return self._wrap(np.tanh(self.lo), np.tanh(self.hi))

    def sqrt(self):
        bad = self.bad | (self.lo < 0.0)
        with np.errstate(invalid="ignore"):
            return self._wrap(np.sqrt(np.maximum(self.lo, 0.0)),
                              np.sqrt(np.maximum(self.hi, 0.0)), bad)

    def log(self):
        bad = self.bad | (self.lo <= 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            return self._wrap(np.log(np.maximum(self.lo, 1e-300)),
                              np.log(np.maximum(self.hi, 1e-300)), bad)


def _lift(x, like: IntervalArray) -> IntervalArray:
    if isinstance(x, IntervalArray):
        return x
    return IntervalArray.point(np.full_like(like.lo, float(x)))


# ---------------------------------------------------------------------------
# expression trees
# ---------------------------------------------------------------------------

_UNARY = {"exp": np.exp, "tanh": np.tanh, "sqrt": np.sqrt, "log": np.log}


class ExprNode:
    """Expression DAG over {const, var, +, -, *, /, pow, exp, tanh, sqrt,
    log}, evaluable over floats or IntervalArray with memoized sharing."""

    __slots__ = ("kind", "children", "value", "name")

    def __init__(self, kind, children=(), value=None, name=None):
        self.kind = kind
        self.children = children
        self.value = value
        self.name = name

    # -- construction -----------------------------------------------------
    @staticmethod
    def const(c):
        return ExprNode("const", value=float(c))

    @staticmethod
    def var(name):
        return ExprNode("var", name=name)

    def _lift(self, o):
        return o if isinstance(o, ExprNode) else ExprNode.const(o)

    def __add__(self, o):
        return ExprNode("add", (self, self._lift(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return ExprNode("sub", (self, self._lift(o)))

    def __rsub__(self, o):
        return ExprNode("sub", (self._lift(o), self))

    def __mul__(self, o):
        return ExprNode("mul", (self, self._lift(o)))

    __rmul__ = __mul__

    def __truediv__(self, o):
        return ExprNode("div", (self, self._lift(o)))

    def __rtruediv__(self, o):
        return ExprNode("div", (self._lift(o), self))

    def __neg__(self):
        return ExprNode("sub", (ExprNode.const(0.0), self))

    def __pow__(self, p):
        return ExprNode("pow", (self,), value=float(p))

    # -- evaluation ---------------------------------------------------------
    def evaluate(self, env, memo=None):
        """Evaluate over whatever value type env supplies (floats, ndarrays,
        IntervalArray, Jet2...)."""
        if memo is None:
            memo = {}
        key = id(self)
        if key in memo:
            return memo[key]
        k = self.kind
        if k == "const":
            first = next(iter(env.values()))
            if isinstance(first, IntervalArray):
                out = _lift(self.value, first)
            else:
                out = self.value
        elif k == "var":
            out = env[self.name]
        else:
            args = [c.evaluate(env, memo) for c in self.children]
            if k == "add":
                out = args[0] + args[1]
            elif k == "sub":
                out = args[0] - args[1]
            elif k == "mul":
                out = args[0] * args[1]
            elif k == "div":
                out = args[0] / args[1]
            elif k == "pow":
                out = args[0] ** self.value
            elif k in _UNARY:
                a = args[0]
                out = getattr(a, k)() if isinstance(a, IntervalArray) else _UNARY[k](a)
            else:
                raise ValueError(f"unknown node kind {k!r}")
        memo[key] = out
        return out

    def variables(self):
        out = set()
        stack = [self]
        while stack:
            n = stack.pop()
            if n.kind == "var":
                out.add(n.name)
            stack.extend(n.children)
        return out


def nexp(x):
    return ExprNode("exp", (x,))


def ntanh(x):
    return ExprNode("tanh", (x,))


def nsqrt(x):
    return ExprNode("sqrt", (x,))


def nlog(x):
    return ExprNode("log", (x,))


def _smart_add(a, b):
    if a.kind == "const" and a.value == 0.0:
        return b
    if b.kind == "const" and b.value == 0.0:
        return a
    if a.kind == "const" and b.kind == "const":
        return ExprNode.const(a.value + b.value)
    return a + b


def _smart_sub(a, b):
    if b.kind == "const" and b.value == 0.0:
        return a
    if a.kind == "const" and b.kind == "const":
        return ExprNode.const(a.value - b.value)
    return a - b


def _smart_mul(a, b):
    for x, y in ((a, b), (b, a)):
        if x.kind == "const":
            if x.value == 0.0:
                return ExprNode.const(0.0)
            if x.value == 1.0:
                return y
    if a.kind == "const" and b.kind == "const":
        return ExprNode.const(a.value * b.value)
    return a * b


def _smart_div(a, b):
    if a.kind == "const" and a.value == 0.0:
        return ExprNode.const(0.0)
    if b.kind == "const" and b.value == 1.0:
        return a
    return a / b


def differentiate(expr: ExprNode, name: str, memo=None) -> ExprNode:
    """Symbolic partial derivative as a new DAG.

    Unary results reuse the original subtree (e.g. d/dx exp(g) multiplies by
    the *same* exp node), so a shared evaluation memo computes the function
    and all of its partials in one pass.
    """
    if memo is None:
        memo = {}
    key = id(expr)
    if key in memo:
        return memo[key]
    k = expr.kind
    if k == "const":
        out = ExprNode.const(0.0)
    elif k == "var":
        out = ExprNode.const(1.0 if expr.name == name else 0.0)
    else:
        d = [differentiate(c, name, memo) for c in expr.children]
        a = expr.children[0]
        if k == "add":
            out = _smart_add(d[0], d[1])
        elif k == "sub":
            out = _smart_sub(d[0], d[1])
        elif k == "mul":
            b = expr.children[1]
            out = _smart_add(_smart_mul(d[0], b), _smart_mul(a, d[1]))
        elif k == "div":
            b = expr.children[1]
            out = _smart_sub(_smart_div(d[0], b),
                             _smart_div(_smart_mul(a, d[1]), _smart_mul(b, b)))
        elif k == "pow":
            p = expr.value
            inner = a if p == 2.0 else ExprNode("pow", (a,), value=p - 1.0)
            out = _smart_mul(ExprNode.const(p), _smart_mul(inner, d[0]))
        elif k == "exp":
            out = _smart_mul(expr, d[0])
        elif k == "tanh":
            out = _smart_mul(_smart_sub(ExprNode.const(1.0),
                                        _smart_mul(expr, expr)), d[0])
        elif k == "sqrt":
            out = _smart_div(d[0], _smart_mul(ExprNode.const(2.0), expr))
        elif k == "log":
            out = _smart_div(d[0], a)
        else:
            raise ValueError(f"unknown node kind {k!r}")
    memo[key] = out
    return out


def from_sympy(expr, cache=None) -> ExprNode:
    """Convert a sympy expression into an ExprNode DAG (shared subtrees)."""
    if cache is None:
        cache = {}
    key = expr
    if key in cache:
        return cache[key]
    if expr.is_Symbol:
        node = ExprNode.var(expr.name)
    elif expr.is_Number:
        node = ExprNode.const(float(expr))
    elif expr.is_Add:
        args = [from_sympy(a, cache) for a in expr.args]
        node = args[0]
        for a in args[1:]:
            node = node + a
    elif expr.is_Mul:
        args = [from_sympy(a, cache) for a in expr.args]
        node = args[0]
        for a in args[1:]:
            node = node * a
    elif expr.is_Pow:
        base, p = expr.args
        if p.is_Number:
            pf = float(p)
            b = from_sympy(base, cache)
            if pf == -1.0:
                node = ExprNode.const(1.0) / b
            elif pf == 0.5:
                node = nsqrt(b)
            elif pf == int(pf) and abs(pf) <= 8:
                # integer powers by repeated squaring keep enclosures tight
                k = abs(int(pf))
                acc = b
                node = None
                while k:
                    if k & 1:
                        node = acc if node is None else node * acc
                    k >>= 1
                    if k:
                        acc = acc * acc
                if pf < 0:
                    node = ExprNode.const(1.0) / node
            else:
                node = b ** pf
        else:
            node = nexp(from_sympy(p * sp.log(base), cache))
    elif isinstance(expr, sp.tanh):
        node = ntanh(from_sympy(expr.args[0], cache))
    elif isinstance(expr, sp.exp):
        node = nexp(from_sympy(expr.args[0], cache))
    elif isinstance(expr, sp.log):
        node = nlog(from_sympy(expr.args[0], cache))
    else:
        raise ValueError(f"unsupported sympy node {type(expr)}")
    cache[key] = node
    return node


# ---------------------------------------------------------------------------
# claim catalog
# ---------------------------------------------------------------------------

def _even_square_deficit(x: ExprNode) -> ExprNode:
    """1 - tanh(x/sqrt2)^2 in the cancellation-free form
    4 e^(-2w) / (1 + e^(-2w))^2, w = x / sqrt2."""
    e = nexp(ExprNode.const(-np.sqrt(2.0)) * x)
    one = ExprNode.const(1.0)
    return 4.0 * e / ((one + e) * (one + e))


def defect_expression() -> ExprNode:
    """Subsolution defect of H(a y)H(a z) in scaled variables (a, y, z),
    drift coefficient taken from the variable d = m - 1.

    Uses the rearrangement
       potential = Hy Hz (-(1-a^2) p - (Hy^2 - a^2) q),
       drift bracket = y Hz p - z Hy q,          p = 1-Hy^2, q = 1-Hz^2,
    which avoids the catastrophic cancellations of the printed form at large
    arguments.
    """
    a, y, z, d = (ExprNode.var(n) for n in "ayzd")
    s2 = ExprNode.const(np.sqrt(2.0))
    hy = ntanh(y / s2)
    hz = ntanh(z / s2)
    p = _even_square_deficit(y)
    q = _even_square_deficit(z)
    a2 = a * a
    potential = hy * hz * (ExprNode.const(0.0) - (1.0 - a2) * p
                           - (hy * hy - a2) * q)
    bracket = y * hz * p - z * hy * q
    drift = ExprNode.const(0.0) - d * s2 * a2 / (y * y - z * z) * bracket
    return potential + drift


def defect_gap_expression() -> ExprNode:
    """Subsolution defect in gap coordinates (a, u, z) with u = y - z > 0.

    Same quantity as ``defect_expression`` but with the two removable
    cancellations of the drift term eliminated algebraically:

      * the denominator y^2 - z^2 becomes u (2z + u) exactly, and
      * the bracket y Hz p(y) - z Hy q(z) equals
            4E [u eps (1 - E^2) - z (1 - eps)(1 + eps E^2)] / D,
        D = (1 + E)^2 (1 + eps E)^2,  E = e^(-sqrt2 z),  eps = e^(-sqrt2 u),
        so the factor u divides out before any interval subtraction.

    Every remaining subtraction is between quantities of different scales,
    which keeps enclosure widths proportional to box widths even on boxes
    hugging the diagonal u -> 0 or deep in the exponential tail.

    The defect is linear in a^2, so the expression is arranged as
    base(u, z) + a^2 * coef(u, z) with a single occurrence of ``a``: interval
    evaluation is then exact in the a-direction (the extreme value sits at an
    endpoint), and the branch-and-bound effectively only refines (u, z).
    """
    a, u, z, d = (ExprNode.var(n) for n in ("a", "u", "z", "d"))
    s2 = ExprNode.const(np.sqrt(2.0))
    one = ExprNode.const(1.0)
    big_e = nexp(ExprNode.const(-np.sqrt(2.0)) * z)
    eps = nexp(ExprNode.const(-np.sqrt(2.0)) * u)
    eE = eps * big_e
    hz = (one - big_e) / (one + big_e)
    hy = (one - eE) / (one + eE)
    q = 4.0 * big_e / ((one + big_e) * (one + big_e))
    p = 4.0 * eE / ((one + eE) * (one + eE))
    n_over_u = (eps * (one - big_e * big_e)
                - z * (one + eps * big_e * big_e) * ((one - eps) / u))
    denom = ((one + big_e) * (one + big_e) * (one + eE) * (one + eE)
             * (2.0 * z + u))
    drift_coef = d * s2 * 4.0 * big_e * n_over_u / denom
    base = ExprNode.const(0.0) - hy * hz * (p + hy * hy * q)
    coef = hy * hz * (p + q) - drift_coef
    return base + (a * a) * coef


def _candidate_sympy(n: int):
    from saddlecheck.params import CandidateParams
    cand = CandidateParams(n=n)
    s, t = sp.symbols("s t", positive=True)
    radial = sp.sqrt(s**2 + t**2)
    if cand.has_exp_term:
        core = (sp.tanh(s / t) * sp.sqrt(2) * s / radial
                + sp.Rational(10, 42) * (1 - sp.exp(-s / (2 * t))))
    else:
        core = sp.tanh(s / t) * s / radial
    return s, t, core * (s + t) ** (-sp.Rational(n - 3, 2))


def builtin_expressions(n: int = 8) -> dict:
    """Expression-tree catalog for dimension n: the profile f and its mirror
    h, the five coefficient fields, the subsolution defect, and the radial
    part of the corrector Laplacian."""
    s, t, f = _candidate_sympy(n)
    d = n // 2 - 1
    fs, ft = sp.diff(f, s), sp.diff(f, t)
    fss, fst, ftt = sp.diff(f, s, 2), sp.diff(f, s, t), sp.diff(f, t, 2)
    c_s = fss + ftt + d * fs / s + d * ft / t + d * f / s**2
    c_ss = 2 * fs
    # h(s, t) = -f(t, s); as a sympy object the swap is already composed,
    # so plain derivatives of g are the slot-correct h partials.
    g = f.subs({s: t, t: s}, simultaneous=True)
    c_t = -(sp.diff(g, s, 2) + sp.diff(g, t, 2)
            + d * sp.diff(g, s) / s + d * sp.diff(g, t) / t + d * g / t**2)
    c_tt = -2 * sp.diff(g, t)
    c_st = 2 * ft - 2 * sp.diff(g, s)

    cache = {}
    cat = {name: from_sympy(e, cache) for name, e in
           (("f", f), ("h", -g), ("c_s", c_s), ("c_t", c_t),
            ("c_ss", c_ss), ("c_st", c_st), ("c_tt", c_tt))}
    cat["defect"] = defect_expression()
    cat["defect_gap"] = defect_gap_expression()
    # radial part of L applied to the corrector summand c0 s^-p e^(-t/3):
    # coefficient (p^2 + p - d p) s^(-p-2) e^(-t/3)
    from saddlecheck.params import CandidateParams
    cand = CandidateParams(n=n)
    p = cand.phi0_exponent
    sv, tv = ExprNode.var("s"), ExprNode.var("t")
    cat["phi0_radial"] = (ExprNode.const(cand.phi0_coeff * (p * p + p - d * p))
                          * sv ** (-p - 2.0) * nexp(tv * ExprNode.const(-1 / 3)))
    return cat


# ---------------------------------------------------------------------------
# branch and bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfPlane:
    """Constraint x[greater] >= x[lesser] + delta, used to clip boxes."""
    greater: int
    lesser: int
    delta: float = 0.0


@dataclass(frozen=True)
class ProofResult:
    status: str                       # "proven" | "undecided"
    boxes_examined: int
    min_undecided_width: float
    frontier: np.ndarray = field(repr=False)

    @property
    def proven(self) -> bool:
        return self.status == "proven"


def _clip(boxes: np.ndarray, constraints):
    for c in constraints:
        boxes[:, c.greater, 0] = np.maximum(boxes[:, c.greater, 0],
                                            boxes[:, c.lesser, 0] + c.delta)
        boxes[:, c.lesser, 1] = np.minimum(boxes[:, c.lesser, 1],
                                           boxes[:, c.greater, 1] - c.delta)
    feasible = np.all(boxes[:, :, 0] <= boxes[:, :, 1], axis=1)
    return boxes[feasible], feasible


def prove_nonpositive(expr: ExprNode, names, box, constraints=(),
                      margin: float = 0.0, fixed=None, frozen_dims=(),
                      min_width: float = 1e-4, max_depth: int = 60,
                      max_boxes: int = 400_000) -> ProofResult:
    """Prove expr <= -margin on the box (list of per-variable [lo, hi])
    intersected with the half-plane constraints.

    Bisects the scaled-widest dimension of every undecided box; stops
    refining a box once it falls below min_width or max_depth and reports
    undecided with the surviving frontier.

    Each box is bounded twice and the tighter bound wins: once by direct
    interval evaluation, and once by the mean-value form
    f(c) + grad f(B) . (B - c), which is immune to the dependency blow-up of
    the direct form on narrow boxes.

    Dimensions named in frozen_dims are never bisected; use this for
    variables the expression depends on monotonically-by-construction (e.g.
    a single-occurrence factor), where splitting cannot tighten the bound.
    """
    names = list(names)
    dims = len(names)
    splittable = np.array([nm not in frozen_dims for nm in names])
    active = expr.variables()
    grads = [differentiate(expr, nm) if nm in active else ExprNode.const(0.0)
             for nm in names]
    boxes = np.array(box, dtype=float).reshape(1, dims, 2)
    scale = np.maximum(boxes[0, :, 1] - boxes[0, :, 0], 1e-30)
    boxes, _ = _clip(boxes.copy(), constraints)
    queue = [(boxes, np.zeros(len(boxes), dtype=np.int32))]
    examined = 0
    stuck = []
    chunk = 65536  # bounds peak memory of a vectorized enclosure pass

    while queue:
        boxes, depth = queue.pop()
        if len(boxes) > chunk:
            queue.append((boxes[chunk:], depth[chunk:]))
            boxes, depth = boxes[:chunk], depth[:chunk]
        examined += len(boxes)
        if examined > max_boxes:
            stuck.append(boxes)
            stuck.extend(b for b, _ in queue)
            break
        env = {nm: IntervalArray.from_bounds(boxes[:, k, 0], boxes[:, k, 1])
               for k, nm in enumerate(names)}
        if fixed:
            env.update({nm: _lift(v, env[names[0]]) for nm, v in fixed.items()})
        shared = {}
        iv = expr.evaluate(env, shared)
        hi = np.where(iv.bad, np.inf, iv.hi)
        # mean-value form over the splittable dims: center evaluation plus
        # gradient times half-widths; frozen dims stay as full intervals
        # (the expansion holds for each of their values, so the hull is sound)
        centers = 0.5 * (boxes[:, :, 0] + boxes[:, :, 1])
        cenv = {nm: (IntervalArray.point(centers[:, k]) if splittable[k]
                     else env[nm])
                for k, nm in enumerate(names)}
        if fixed:
            cenv.update({nm: _lift(v, cenv[names[0]])
                         for nm, v in fixed.items()})
        mv = expr.evaluate(cenv)
        for k, g in enumerate(grads):
            if not splittable[k] or (g.kind == "const" and g.value == 0.0):
                continue
            dk = g.evaluate(env, shared)
            delta = (IntervalArray.from_bounds(boxes[:, k, 0], boxes[:, k, 1])
                     - IntervalArray.point(centers[:, k]))
            mv = mv + dk * delta
        hi = np.minimum(hi, np.where(mv.bad, np.inf, mv.hi))
        live = hi > -margin
        boxes, depth = boxes[live], depth[live]
        if not len(boxes):
            continue
        widths = np.where(splittable, (boxes[:, :, 1] - boxes[:, :, 0]) / scale,
                          -np.inf)
        refinable = (widths.max(axis=1) > min_width) & (depth < max_depth)
        if not refinable.all():
            stuck.append(boxes[~refinable])
            boxes, depth = boxes[refinable], depth[refinable]
            widths = widths[refinable]
        if not len(boxes):
            continue
        split_dim = np.argmax(widths, axis=1)
        rng = np.arange(len(boxes))
        mid = 0.5 * (boxes[rng, split_dim, 0] + boxes[rng, split_dim, 1])
        left = boxes.copy()
        right = boxes.copy()
        left[rng, split_dim, 1] = mid
        right[rng, split_dim, 0] = mid
        children = np.concatenate([left, right])
        child_depth = np.concatenate([depth, depth]) + 1
        children, feasible = _clip(children, constraints)
        queue.append((children, child_depth[feasible]))
    frontier = np.concatenate(stuck) if stuck else np.zeros((0, dims, 2))
    width = float(((frontier[:, :, 1] - frontier[:, :, 0]) / scale).max()) \
        if len(frontier) else 0.0
    status = "proven" if len(frontier) == 0 else "undecided"
    return ProofResult(status=status, boxes_examined=examined,
                       min_undecided_width=width, frontier=frontier)
