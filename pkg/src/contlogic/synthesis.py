"""Connective synthesis: lattice approximation of grid functions.

Builds, for a target function tabulated on a dyadic grid, an expression
over value variables using only negation, truncated subtraction, and
dyadic constants, whose value agrees with the target within a requested
epsilon at every grid point.  The construction follows the two-point
interpolant / finite max-of-mins cover: for each ordered pair of grid
points a ramp expression matches (dyadic roundings of) the target at both
points; max over second points then min over first points yields the
approximation.  Certification is on the grid only; off-grid use must
absorb the target's oscillation over one pitch step into epsilon.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import DomainError, StructuralError
from .language import Const, Op, ValueVar
from .values import ZERO, ensure_unit, format_rational, is_dyadic, parse_rational

MAX_SLOPE = 64


@dataclass(frozen=True)
class GridFunction:
    """A [0,1]-valued function tabulated on the dyadic grid of a given pitch."""

    arity: int
    pitch: Fraction
    values: Mapping[tuple, Fraction]

    def __post_init__(self):
        if self.arity < 1:
            raise StructuralError("arity must be at least 1")
        p = ensure_unit(self.pitch)
        if p == 0 or not is_dyadic(p) or (1 / p).denominator != 1:
            raise StructuralError("pitch must be a dyadic unit fraction")
        pts = set(self.grid_points())
        if set(self.values) != pts:
            raise StructuralError("values must cover exactly the grid")
        for v in self.values.values():
            ensure_unit(v)

    def axis(self):
        steps = int(1 / self.pitch)
        return [self.pitch * k for k in range(steps + 1)]

    def grid_points(self):
        return list(itertools.product(self.axis(), repeat=self.arity))

    def step_oscillation(self) -> Fraction:
        """Max change of the target between axis-adjacent grid points."""
        worst = ZERO
        axis = self.axis()
        for pt in self.grid_points():
            for axis_i in range(self.arity):
                k = axis.index(pt[axis_i])
                if k + 1 < len(axis):
                    nxt = pt[:axis_i] + (axis[k + 1],) + pt[axis_i + 1:]
                    worst = max(worst, abs(self.values[pt] - self.values[nxt]))
        return worst

    def to_json(self) -> dict:
        flat = [format_rational(self.values[pt]) for pt in self.grid_points()]
        return {"arity": self.arity, "pitch": format_rational(self.pitch), "values": flat}

    @staticmethod
    def from_json(data: dict) -> "GridFunction":
        arity = int(data["arity"])
        pitch = parse_rational(data["pitch"])
        steps = int(1 / pitch)
        axis = [pitch * k for k in range(steps + 1)]
        pts = list(itertools.product(axis, repeat=arity))
        flat = [parse_rational(v) for v in data["values"]]
        if len(flat) != len(pts):
            raise StructuralError(
                f"expected {len(pts)} grid values, got {len(flat)}")
        return GridFunction(arity, pitch, dict(zip(pts, flat)))


def eval_value_formula(expr, point: Mapping[str, Fraction]) -> Fraction:
    """Evaluate an expression over value variables at a point of [0,1]^n.

    Synthesized expressions share subterms heavily, so evaluation memoizes
    on node identity and is linear in the number of distinct nodes.
    """
    from .values import apply_connective, med

    memo: dict = {}

    def go(node) -> Fraction:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Const):
            value = node.value
        elif isinstance(node, ValueVar):
            if node.name not in point:
                raise StructuralError(f"unbound value variable {node.name!r}")
            value = point[node.name]
        elif isinstance(node, Op):
            vals = [go(a) for a in node.args]
            value = med(vals, node.n) if node.op == "med" else apply_connective(node.op, vals)
        else:
            raise StructuralError(
                "expression must use only value variables, connectives, constants")
        memo[key] = value
        return value

    return go(expr)


def uses_only_neg_monus_constants(expr) -> bool:
    """AST scan: negation, truncated subtraction, dyadic constants, variables."""
    seen: set = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, ValueVar):
            continue
        if isinstance(node, Const):
            if not is_dyadic(node.value):
                return False
            continue
        if isinstance(node, Op) and node.op in ("neg", "monus"):
            stack.extend(node.args)
            continue
        return False
    return True


def value_variables(expr) -> set:
    """Names of the value variables occurring in an expression (DAG-aware)."""
    seen: set = set()
    names: set = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, ValueVar):
            names.add(node.name)
        elif isinstance(node, Op):
            stack.extend(node.args)
    return names


def _round_dyadic(v: Fraction, k: int) -> Fraction:
    """Nearest multiple of 2^-k, half rounded up; monotone in v."""
    scale = 2 ** k
    return Fraction((v * scale * 2 + 1).__floor__() // 2, scale)


def _monus(a, b):
    return Op("monus", (a, b))


def _neg(a):
    return Op("neg", (a,))


def _fold_max(exprs):
    """Balanced max tree; x \\/ y = not((not x) -. ((not x) -. (not y)))."""
    if len(exprs) == 1:
        return exprs[0]
    mid = len(exprs) // 2
    x = _fold_max(exprs[:mid])
    y = _fold_max(exprs[mid:])
    nx, ny = _neg(x), _neg(y)
    return _neg(_monus(nx, _monus(nx, ny)))


def _fold_min(exprs):
    """Balanced min tree; x /\\ y = x -. (x -. y)."""
    if len(exprs) == 1:
        return exprs[0]
    mid = len(exprs) // 2
    x = _fold_min(exprs[:mid])
    y = _fold_min(exprs[mid:])
    return _monus(x, _monus(x, y))


def _constant_fold(expr):
    """Fold all-constant subterms, preserving subterm sharing."""
    from .values import apply_connective, med

    memo: dict = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Op):
            args = tuple(go(a) for a in node.args)
            if all(isinstance(a, Const) for a in args):
                vals = [a.value for a in args]
                folded = med(vals, node.n) if node.op == "med" \
                    else apply_connective(node.op, vals)
                out = Const(folded)
            else:
                out = Op(node.op, args, node.n)
        else:
            out = node
        memo[key] = out
        return out

    return go(expr)


@dataclass
class SynthesisResult:
    expression: object
    max_error: Fraction
    size: int
    requested_epsilon: Fraction
    rounding_exponent: int


def _expr_size(expr) -> int:
    """Distinct-node count; subterm sharing makes the tree count misleading."""
    seen: set = set()

    def go(node):
        if id(node) in seen:
            return
        seen.add(id(node))
        if isinstance(node, Op):
            for a in node.args:
                go(a)

    go(expr)
    return len(seen)


def expression_tree_size(expr) -> int:
    """Size of the expression written out as text (no sharing), exactly."""
    memo: dict = {}

    def go(node) -> int:
        key = id(node)
        if key in memo:
            return memo[key]
        size = 1 + sum(go(a) for a in node.args) if isinstance(node, Op) else 1
        memo[key] = size
        return size

    return go(expr)


def expression_text(expr, max_nodes: int = 200_000) -> Optional[str]:
    """Grammar text of the expression, or None when writing it out is too large."""
    from .language import print_formula

    if expression_tree_size(expr) > max_nodes:
        return None
    return print_formula(expr)


def _two_point_interpolant(x, y, fx_approx, fy_approx, coord: int, pitch: Fraction):
    """Expression in t_<coord> matching the approximations at x and y exactly.

    x and y differ in the chosen coordinate; the descending ramp template
    (A -. m(t -. u)) \\/ B handles A >= B, and its negation handles A < B.
    """
    u, v = x[coord], y[coord]
    a, b = fx_approx, fy_approx
    if u > v:
        u, v, a, b = v, u, b, a
    flip = a < b
    if flip:
        a, b = 1 - a, 1 - b
    # now a >= b on the left endpoint u < v
    if a == 0:
        core = Const(ZERO)
    else:
        # smallest integer m with m*(v-u) >= a
        m = (a / (v - u)).__ceil__()
        if m > MAX_SLOPE:
            raise DomainError(
                f"slope {m} exceeds the cap {MAX_SLOPE} for the pair {x} -> {y}")
        t = ValueVar(f"t{coord}")
        step = _monus(t, Const(u))
        core = Const(a)
        for _ in range(m):
            core = _monus(core, step)
    ramp = _fold_max([core, Const(b)]) if b > 0 else core
    return _neg(ramp) if flip else ramp


def synthesize(target: GridFunction, epsilon,
               step_modulus: Optional[Fraction] = None) -> SynthesisResult:
    """Lattice-construction approximation of the target on its grid.

    The returned expression uses only negation, truncated subtraction and
    dyadic constants in the value variables t0..t(n-1), and differs from
    the target by at most epsilon at every grid point (the achieved error
    is the dyadic rounding error, at most 2^-(k+1) <= epsilon).  The caller
    owns the off-grid contract: epsilon should be at least twice the
    target's oscillation over one pitch step for the expression to be
    meaningful between grid points.  That precondition is enforced only
    when `step_modulus` is supplied explicitly; the grid certificate
    itself never needs it.  A pair needing a slope beyond the cap raises
    a DomainError naming it.
    """
    eps = ensure_unit(epsilon)
    if eps == 0:
        raise DomainError("epsilon must be positive")
    if not is_dyadic(eps):
        raise DomainError("epsilon must be dyadic")
    if step_modulus is not None and eps < 2 * Fraction(step_modulus):
        raise DomainError(
            f"epsilon {format_rational(eps)} is below twice the declared step "
            f"modulus {format_rational(Fraction(step_modulus))}")
    k = 0
    while Fraction(1, 2 ** (k + 1)) > eps:
        k += 1

    pts = target.grid_points()
    approx = {pt: _round_dyadic(target.values[pt], k) for pt in pts}

    def differing_coord(x, y):
        for c in range(target.arity):
            if x[c] != y[c]:
                return c
        return None

    g_rows = []
    for x in pts:
        row = []
        for y in pts:
            c = differing_coord(x, y)
            if c is None:
                continue
            row.append(_two_point_interpolant(x, y, approx[x], approx[y], c, target.pitch))
        if not row:  # single-point grid cannot occur (pitch <= 1 gives >= 2 points)
            row = [Const(approx[x])]
        g_rows.append(_fold_max(row))
    expr = _constant_fold(_fold_min(g_rows))

    worst = max(abs(eval_value_formula(expr, _point_env(pt)) - target.values[pt])
                for pt in pts)
    if worst > eps:
        raise AssertionError("synthesis exceeded the requested error bound")
    return SynthesisResult(expr, worst, _expr_size(expr), eps, k)


def _point_env(pt: Sequence[Fraction]) -> dict:
    return {f"t{i}": v for i, v in enumerate(pt)}


def verify_synthesis(expr, target: GridFunction) -> Fraction:
    """Exact max over grid points of |expression - target|."""
    names = value_variables(expr)
    allowed = {f"t{i}" for i in range(target.arity)}
    if not names <= allowed:
        raise StructuralError(f"expression uses variables {sorted(names - allowed)}")
    return max(abs(eval_value_formula(expr, _point_env(pt)) - target.values[pt])
               for pt in target.grid_points())


# ---------------------------------------------------------------------------
# Negative witness: the monotone-lattice system is 1-Lipschitz


def lattice_closure_vectors(axis: Sequence[Fraction], constants: Sequence[Fraction],
                            depth: int):
    """Value vectors on a 1-variable grid of all {neg, min, max} expressions.

    Seeds are the variable itself and the given constants; closure is taken
    to the stated depth with deduplication by value vector.  Every vector in
    the closure is 1-Lipschitz on the grid, which is the point of the
    negative witness.
    """
    var = tuple(axis)
    seeds = {var} | {tuple(ensure_unit(c) for _ in axis) for c in constants}
    known = dict.fromkeys(seeds, 0)
    frontier = set(seeds)
    for level in range(1, depth + 1):
        new = set()
        snapshot = list(known)
        for u in frontier:
            cand = tuple(1 - x for x in u)
            if cand not in known:
                new.add(cand)
        for u in frontier:
            for v in snapshot:
                for cand in (tuple(map(min, u, v)), tuple(map(max, u, v))):
                    if cand not in known:
                        new.add(cand)
        for cand in new:
            known[cand] = level
        frontier = new
        if not new:
            break
    return list(known)


def best_lattice_error(axis, constants, depth, target_vector) -> Fraction:
    vectors = lattice_closure_vectors(axis, constants, depth)
    return min(max(abs(a - b) for a, b in zip(vec, target_vector)) for vec in vectors)
