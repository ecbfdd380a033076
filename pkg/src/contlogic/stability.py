"""Local stability machinery at finite scale.

Every finite structure is stable in the infinite-sequence sense, so the
quantities reported here are the honest finite data: longest ladders of the
three kinds, the bound N(phi, eps) from the triple condition, median-value
definitions of phi-types with their verified error, monotone definitions
with the 3-eps bound, staged definitions combined through forced limits,
and the two-formula gluing combination.

All searches are deterministic: candidates are tried in carrier order and
the first witness of each strictly better length is kept, so the reported
witness is the lexicographically least maximal one in the documented
exploration order (pair order for the antisymmetric and order kinds,
parameter-sequence order for the triple kind).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import DefinitionAbort, DomainError, StructuralError
from .language import Atom, Op, Var, free_vars
from .structures import (
    FiniteStructure,
    VariableSplit,
    tuple_names,
    tuples_of,
    value_matrix,
)
from .values import ONE, ZERO, flim_prefix, med


# ---------------------------------------------------------------------------
# Phi-types and their metric space


@dataclass(frozen=True)
class PhiTypeVector:
    """A phi-type over M as its exact value vector b -> phi(a, b).

    `values` is indexed by the parameter-tuple enumeration of the split;
    `realizer` is the witnessing x-tuple index when the type is realized.
    """

    values: tuple[Fraction, ...]
    realizer: Optional[int] = None


@dataclass(frozen=True)
class PhiTypeSpace:
    points: tuple[PhiTypeVector, ...]
    metric: tuple[tuple[Fraction, ...], ...]
    realizers: tuple[tuple[int, ...], ...]  # x-tuple indices realizing each point


def phi_type(M: FiniteStructure, phi, split: VariableSplit, a_tuple) -> PhiTypeVector:
    """The phi-type of one x-tuple: the vector of its values at every parameter."""
    xts, yts, vals = value_matrix(M, phi, split)
    xi = xts.index(tuple(a_tuple))
    return PhiTypeVector(vals[xi], realizer=xi)


def phi_type_space(M: FiniteStructure, phi, split: VariableSplit) -> PhiTypeSpace:
    """All realized phi-types, deduplicated, with the sup-difference metric."""
    xts, yts, vals = value_matrix(M, phi, split)
    points: list[PhiTypeVector] = []
    realizers: list[list[int]] = []
    seen: dict = {}
    for xi in range(len(xts)):
        row = vals[xi]
        if row in seen:
            realizers[seen[row]].append(xi)
        else:
            seen[row] = len(points)
            points.append(PhiTypeVector(row, realizer=xi))
            realizers.append([xi])
    n = len(points)
    if points and points[0].values:
        metric = tuple(
            tuple(max(abs(u - v) for u, v in zip(points[i].values, points[j].values))
                  for j in range(n))
            for i in range(n))
    else:
        metric = tuple(tuple(ZERO for _ in range(n)) for _ in range(n))
    return PhiTypeSpace(tuple(points), metric, tuple(tuple(r) for r in realizers))


# ---------------------------------------------------------------------------
# Ladder searches


@dataclass(frozen=True)
class LadderWitness:
    """A ladder with the exact inequalities it satisfies, re-checkable from names."""

    kind: str  # "antisym" | "order" | "triple"
    epsilon: Fraction
    pairs: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    r: Optional[Fraction] = None
    s: Optional[Fraction] = None
    at_searched_bound: bool = False

    def __len__(self) -> int:
        return len(self.pairs)


def _pair_indices(M: FiniteStructure, split: VariableSplit, witness: LadderWitness):
    xts = tuples_of(M, split.x)
    yts = tuples_of(M, split.y)
    x_index = {tuple_names(M, split.x, t): i for i, t in enumerate(xts)}
    y_index = {tuple_names(M, split.y, t): i for i, t in enumerate(yts)}
    return [(x_index[a], y_index[b]) for a, b in witness.pairs]


def revalidate_ladder(M: FiniteStructure, phi, split: VariableSplit,
                      witness: LadderWitness) -> bool:
    """Re-check the stored inequalities of a witness by direct evaluation."""
    xts, yts, vals = value_matrix(M, phi, split)
    pairs = _pair_indices(M, split, witness)
    eps = witness.epsilon
    if witness.kind == "antisym":
        return all(abs(vals[pairs[i][0]][pairs[j][1]] - vals[pairs[j][0]][pairs[i][1]]) >= eps
                   for i in range(len(pairs)) for j in range(i + 1, len(pairs)))
    if witness.kind == "order":
        r, s = witness.r, witness.s
        if r is None or s is None or r > s - eps:
            return False
        return all(vals[pairs[i][0]][pairs[j][1]] <= r and vals[pairs[j][0]][pairs[i][1]] >= s
                   for i in range(len(pairs)) for j in range(i + 1, len(pairs)))
    if witness.kind == "triple":
        return all(abs(vals[pairs[j][0]][pairs[i][1]] - vals[pairs[j][0]][pairs[k][1]]) >= eps
                   for i in range(len(pairs))
                   for j in range(i + 1, len(pairs))
                   for k in range(j + 1, len(pairs)))
    raise StructuralError(f"unknown ladder kind {witness.kind!r}")


def _search_pairwise(nx, ny, admits, max_len):
    """DFS over pairs in index order; returns the first longest pair sequence."""
    best: list = []
    stack: list = []
    hit_bound = [False]

    def extend():
        if max_len is not None and len(stack) >= max_len:
            hit_bound[0] = True
            return
        for a in range(nx):
            for b in range(ny):
                if admits(stack, a, b):
                    stack.append((a, b))
                    if len(stack) > len(best):
                        best[:] = stack
                    extend()
                    stack.pop()
                    if max_len is not None and len(best) >= max_len:
                        return

    extend()
    return list(best), hit_bound[0] and len(best) >= (max_len or 0)


def find_ladder(M: FiniteStructure, phi, split: VariableSplit, epsilon,
                kind: str, max_len: Optional[int] = None) -> LadderWitness:
    """Longest ladder of the requested kind, up to max_len when given.

    antisym: |phi(a_i,b_j) - phi(a_j,b_i)| >= eps for i < j.
    order:   phi(a_i,b_j) <= r and phi(a_j,b_i) >= s for i < j, where the
             pair (r, s) with r <= s - eps is chosen among observed values.
    triple:  |phi(a_j,b_i) - phi(a_j,b_k)| >= eps for i < j < k.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise DomainError("epsilon must be positive")
    xts, yts, vals = value_matrix(M, phi, split)
    nx, ny = len(xts), len(yts)

    def names(pairs):
        return tuple((tuple_names(M, split.x, xts[a]), tuple_names(M, split.y, yts[b]))
                     for a, b in pairs)

    if kind == "antisym":
        def admits(stack, a, b):
            return all(abs(vals[pa][b] - vals[a][pb]) >= eps for pa, pb in stack)

        pairs, bounded = _search_pairwise(nx, ny, admits, max_len)
        return LadderWitness("antisym", eps, names(pairs), at_searched_bound=bounded)

    if kind == "order":
        values = sorted({v for row in vals for v in row})
        best_pairs: list = []
        best_rs = (None, None)
        bounded = False
        for r in values:
            for s in values:
                if s - r < eps:
                    continue

                def admits(stack, a, b, r=r, s=s):
                    return all(vals[pa][b] <= r and vals[a][pb] >= s for pa, pb in stack)

                pairs, hit = _search_pairwise(nx, ny, admits, max_len)
                if len(pairs) > len(best_pairs):
                    best_pairs, best_rs, bounded = pairs, (r, s), hit
        return LadderWitness("order", eps, names(best_pairs),
                             r=best_rs[0], s=best_rs[1], at_searched_bound=bounded)

    if kind == "triple":
        seq, bounded = _longest_triple_sequence(vals, nx, ny, eps, max_len)
        return LadderWitness("triple", eps, names(seq), at_searched_bound=bounded)

    raise StructuralError(f"unknown ladder kind {kind!r}")


def _longest_triple_sequence(vals, nx, ny, eps, max_len):
    """Longest sequence for the triple condition (*).

    Only the parameter components b_t are branched on: the condition couples
    a_j solely at its own middle position j, so a per-position feasible set
    of witnesses a_j is maintained and pruned as the sequence grows.  The
    first a in carrier order is reported for each position.
    """
    best_bs: list = []
    best_feasible: list = []
    bs: list = []
    feasible: list = []  # feasible[j] = list of a-indices usable at middle position j

    def extend():
        nonlocal best_bs, best_feasible
        if max_len is not None and len(bs) >= max_len:
            return True
        hit = False
        for b in range(ny):
            new_feasible = []
            ok = True
            for j in range(1, len(bs)):
                allowed = [a for a in feasible[j]
                           if all(abs(vals[a][bs[i]] - vals[a][b]) >= eps for i in range(j))]
                if not allowed:
                    ok = False
                    break
                new_feasible.append(allowed)
            if not ok:
                continue
            saved = feasible[1:len(bs)]
            for j, allowed in enumerate(new_feasible, start=1):
                feasible[j] = allowed
            bs.append(b)
            feasible.append(list(range(nx)))  # the new last position, unconstrained so far
            if len(bs) > len(best_bs):
                best_bs = list(bs)
                best_feasible = [list(f) for f in feasible]
            hit = extend() or hit
            bs.pop()
            feasible.pop()
            for j, old in enumerate(saved, start=1):
                feasible[j] = old
            if max_len is not None and len(best_bs) >= max_len:
                return hit
        return hit

    hit_bound = extend()
    seq = [(best_feasible[j][0] if 0 < j < len(best_bs) - 1 else 0, b)
           for j, b in enumerate(best_bs)]
    bounded = bool(max_len is not None and len(best_bs) >= max_len and hit_bound)
    return seq, bounded


def compute_N(M: FiniteStructure, phi, split: VariableSplit, epsilon) -> int:
    """Minimal N such that no length-(N+1) sequence satisfies the triple condition.

    Computed relative to M by exhaustive search; length-2 sequences satisfy
    the condition vacuously, so the result is always at least 2.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise DomainError("epsilon must be positive")
    xts, yts, vals = value_matrix(M, phi, split)
    if not xts or not yts:
        raise DomainError("empty structure")
    seq, _ = _longest_triple_sequence(vals, len(xts), len(yts), eps, None)
    return max(len(seq), 2)


# ---------------------------------------------------------------------------
# Median-value definitions


@dataclass
class MedianDefinition:
    """2N-1 parameters whose median of phi-instances tracks a target vector."""

    epsilon: Fraction
    n_value: int
    parameters: tuple  # x-tuple indices, in choice order
    parameter_names: tuple
    target: PhiTypeVector
    observed_error: Fraction
    defined_values: tuple[Fraction, ...]

    def evaluate(self, values_at_parameters: Sequence[Fraction]) -> Fraction:
        return med(list(values_at_parameters), self.n_value)


def _target_vector(M, split, yts, target) -> PhiTypeVector:
    if isinstance(target, PhiTypeVector):
        if len(target.values) != len(yts):
            raise StructuralError("target vector length does not match the parameter carrier")
        return target
    values = tuple(Fraction(v) for v in target)
    if len(values) != len(yts):
        raise StructuralError("target vector length does not match the parameter carrier")
    return PhiTypeVector(values)


def median_definition(M: FiniteStructure, phi, split: VariableSplit, epsilon,
                      target, n_value: Optional[int] = None) -> MedianDefinition:
    """Constructive median-value definition of a target vector within eps.

    Runs the 2N-1 step loop with N = compute_N (which `n_value` may supply
    precomputed): maintain chosen parameters c_i; at each step collect the
    family K of index sets w such that some parameter a has
    |target(a) - phi(c_i, a)| > eps for all i in w (storing the first
    witness per set), and pick the first c in carrier order that moves by
    more than eps against every stored witness.  Aborts when some w reaches
    size N (the target is inconsistent with the ladder bound) or no
    admissible c exists (the target is not realizable from M).  For targets
    realized in M the realizer is admissible at every step, so the
    construction always succeeds.  On success the verified bound
    max_b |med_N(phi(c_i, b)) - target(b)| <= eps is exact.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise DomainError("epsilon must be positive")
    N = compute_N(M, phi, split, eps) if n_value is None else n_value
    if N < 2:
        raise DomainError("the ladder bound N is always at least 2")
    arity = 2 * N - 1
    xts, yts, vals = value_matrix(M, phi, split)
    tgt = _target_vector(M, split, yts, target)
    t = tgt.values

    # index sets w are bitmasks over positions of the chosen prefix
    witnesses: dict[int, int] = {}
    by_witness: dict[int, list[int]] = {}
    chosen: list[int] = []
    for step in range(arity + 1):
        # refresh K for the current chosen prefix; keep earlier witnesses
        for a in range(len(yts)):
            S = 0
            size = 0
            for i, c in enumerate(chosen):
                if abs(t[a] - vals[c][a]) > eps:
                    S |= 1 << i
                    size += 1
            if size >= N:
                bits = tuple(i for i in range(len(chosen)) if S >> i & 1)
                raise DefinitionAbort("ladder-bound-exceeded", step=step,
                                      w=bits[:N],
                                      witness=tuple_names(M, split.y, yts[a]))
            sub = S
            while sub:  # all non-empty submasks of S
                if sub not in witnesses:
                    witnesses[sub] = a
                    by_witness.setdefault(a, []).append(sub)
                sub = (sub - 1) & S
        if step == arity:
            break
        chosen_c = None
        for c in range(len(xts)):
            admissible = True
            for a, masks in by_witness.items():
                near = 0  # prefix positions the candidate fails to move away from, at a
                for i, ci in enumerate(chosen):
                    if abs(vals[ci][a] - vals[c][a]) <= eps:
                        near |= 1 << i
                if near and any(w & near for w in masks):
                    admissible = False
                    break
            if admissible:
                chosen_c = c
                break
        if chosen_c is None:
            raise DefinitionAbort("no-admissible-parameter", step=step)
        chosen.append(chosen_c)

    defined = tuple(med([vals[c][b] for c in chosen], N) for b in range(len(yts)))
    observed = max(abs(d - tv) for d, tv in zip(defined, t)) if defined else ZERO
    if observed > eps:
        raise AssertionError("median bound violated despite passing the ladder checks")
    return MedianDefinition(eps, N, tuple(chosen),
                            tuple(tuple_names(M, split.x, xts[c]) for c in chosen),
                            tgt, observed, defined)


# ---------------------------------------------------------------------------
# Monotone definitions (stability inside a single structure)


@dataclass
class MonotoneDefinition:
    """Monotone combination of phi-instances tracking a target within 3*eps."""

    epsilon: Fraction
    parameters: tuple  # x-tuple indices
    parameter_names: tuple
    records: tuple  # (a_idx, b_idx, r, s) per violation round
    observed_error: Fraction
    candidates: tuple  # u-tuples the sup runs over
    evaluate: Callable[[Sequence[Fraction]], Fraction] = field(repr=False)


def monotone_parameters(M: FiniteStructure, phi, split: VariableSplit, epsilon, target):
    """Parameter list from the violation-elimination loop, with its records.

    Repeatedly find parameters (a, b) where every chosen c has
    phi(c, a) <= phi(c, b) + eps yet target(a) > target(b) + 3*eps; split
    the gap into thirds to place the thresholds r < r + 3*eps < s strictly
    inside (target(b), target(a)), then take the first c in carrier order
    with phi(c, a_i) > s_i and phi(c, b_i) < r_i for every record.  Each
    round permanently eliminates its violating pair, so at most |M|^2
    rounds occur.
    """
    eps = Fraction(epsilon)
    if eps <= 0:
        raise DomainError("epsilon must be positive")
    xts, yts, vals = value_matrix(M, phi, split)
    tgt = _target_vector(M, split, yts, target)
    t = tgt.values

    chosen: list[int] = []
    records: list[tuple] = []
    while True:
        violation = None
        for a in range(len(yts)):
            for b in range(len(yts)):
                if t[a] <= t[b] + 3 * eps:
                    continue
                if all(vals[c][a] <= vals[c][b] + eps for c in chosen):
                    violation = (a, b)
                    break
            if violation:
                break
        if violation is None:
            return chosen, records, tgt
        a, b = violation
        slack = (t[a] - t[b] - 3 * eps) / 3
        r = t[b] + slack
        s = r + 3 * eps + slack
        records.append((a, b, r, s))
        chosen_c = None
        for c in range(len(xts)):
            if all(vals[c][ai] > si and vals[c][bi] < ri for ai, bi, ri, si in records):
                chosen_c = c
                break
        if chosen_c is None:
            raise DefinitionAbort("no-admissible-parameter", step=len(records) - 1,
                                  pair=(tuple_names(M, split.y, yts[a]),
                                        tuple_names(M, split.y, yts[b])))
        chosen.append(chosen_c)


def monotone_definition(M: FiniteStructure, phi, split: VariableSplit, epsilon,
                        target) -> MonotoneDefinition:
    """Continuous increasing combination g with |g(phi(c_i,a)) - target(a)| <= 3*eps.

    g(v) = sup_u h_u(v) f(u) with f the monotone step function
    f(u) = max{target(a) : phi(c_i, a) <= u_i for all i} and h a
    piecewise-linear bump vanishing below u - eps.  The sup is exact over
    the finite candidate set
    of observed value tuples and their coordinatewise +eps shifts: any u
    with f(u) = target(a*) is dominated by the observed tuple of a*, where h
    is no smaller and f no smaller.
    """
    eps = Fraction(epsilon)
    chosen, records, tgt = monotone_parameters(M, phi, split, eps, target)
    xts, yts, vals = value_matrix(M, phi, split)
    t = tgt.values
    n = len(chosen)

    observed = [tuple(vals[c][a] for c in chosen) for a in range(len(yts))]
    candidates = sorted({u for u in observed}
                        | {tuple(min(ui + eps, ONE) for ui in u) for u in observed})

    def f(u: Sequence[Fraction]) -> Fraction:
        best = ZERO
        for a in range(len(yts)):
            if all(vals[c][a] <= ui for c, ui in zip(chosen, u)):
                best = max(best, t[a])
        return best

    f_at = {u: f(u) for u in candidates}

    def h(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
        if not u:
            return ONE
        return min(min(max(vi + eps - ui, ZERO), eps) for ui, vi in zip(u, v)) / eps

    def g(v: Sequence[Fraction]) -> Fraction:
        v = tuple(Fraction(x) for x in v)
        if len(v) != n:
            raise StructuralError(f"g expects a {n}-tuple")
        return max((h(u, v) * f_at[u] for u in candidates), default=ZERO)

    errors = [abs(g(observed[a]) - t[a]) for a in range(len(yts))]
    bound = max(errors) if errors else ZERO
    if bound > 3 * eps:
        raise AssertionError("monotone-definition bound violated")
    return MonotoneDefinition(eps, tuple(chosen),
                              tuple(tuple_names(M, split.x, xts[c]) for c in chosen),
                              tuple(records), bound, tuple(candidates), g)


def monotone_sup_on_grid(defn: MonotoneDefinition, M: FiniteStructure, phi,
                         split: VariableSplit, target, v: Sequence[Fraction],
                         pitch: Fraction) -> Fraction:
    """Reference sup over a full u-grid of the given pitch, for cross-checks."""
    eps = defn.epsilon
    xts, yts, vals = value_matrix(M, phi, split)
    tgt = _target_vector(M, split, yts, target)
    t = tgt.values
    chosen = defn.parameters
    steps = int(1 / pitch)
    axis = [pitch * k for k in range(steps + 1)]

    def f(u):
        best = ZERO
        for a in range(len(yts)):
            if all(vals[c][a] <= ui for c, ui in zip(chosen, u)):
                best = max(best, t[a])
        return best

    def h(u):
        if not u:
            return ONE
        return min(min(max(vi + eps - ui, ZERO), eps) for ui, vi in zip(u, v)) / eps

    return max((h(u) * f(u) for u in itertools.product(axis, repeat=len(chosen))),
               default=ZERO)


# ---------------------------------------------------------------------------
# Staged (global) definitions through forced limits


@dataclass
class StagedDefinition:
    depth: int
    stages: tuple  # MedianDefinition per stage, eps = 2^-n
    final_values: tuple[Fraction, ...]
    errors: tuple[Fraction, ...]
    error_bound: Fraction


def global_definition(M: FiniteStructure, phi, split: VariableSplit, target,
                      depth: int) -> StagedDefinition:
    """Median definitions at eps = 2^-n for n < depth, combined by forced limit.

    For targets whose every stage succeeds (realized targets in particular),
    the per-parameter error of the combined value against the target is at
    most 2^-(depth-1).
    """
    if depth < 1:
        raise DomainError("depth must be at least 1")
    xts, yts, vals = value_matrix(M, phi, split)
    tgt = _target_vector(M, split, yts, target)
    stages = []
    n_cache: dict = {}
    for n in range(depth):
        eps = Fraction(1, 2 ** n)
        if eps not in n_cache:
            n_cache[eps] = compute_N(M, phi, split, eps)
        try:
            stages.append(median_definition(M, phi, split, eps, tgt,
                                            n_value=n_cache[eps]))
        except DefinitionAbort as abort:
            raise DefinitionAbort("stage-failed", stage=n, inner=abort.reason,
                                  **abort.details) from abort
    finals = []
    errors = []
    for b in range(len(yts)):
        trace = flim_prefix([st.defined_values[b] for st in stages])
        finals.append(trace.modified_prefix[-1])
        errors.append(abs(finals[-1] - tgt.values[b]))
    bound = Fraction(1, 2 ** (depth - 1))
    if any(e > bound for e in errors):
        raise AssertionError("staged-definition bound violated")
    return StagedDefinition(depth, tuple(stages), tuple(finals), tuple(errors), bound)


# ---------------------------------------------------------------------------
# Gluing two formulas sharing their first variable


def glue_formula(phi, psi, shared_x: str, fresh: tuple[str, str], fresh_sort: str,
                 sig) -> object:
    """chi(x, y, z, t, w) = (phi /\\ d(t,w)) +. (psi /\\ not d(t,w)).

    Substituting a pair at distance 1 for (t, w) recovers phi; substituting
    a pair at distance 0 recovers psi.  The fresh variable names must be
    unused in both formulas and live in one sort.
    """
    t_name, w_name = fresh
    phi_vars = dict(free_vars(phi))
    psi_vars = dict(free_vars(psi))
    if shared_x not in phi_vars or shared_x not in psi_vars:
        raise StructuralError(f"{shared_x!r} must be free in both formulas")
    if phi_vars[shared_x] != psi_vars[shared_x]:
        raise StructuralError(f"{shared_x!r} has different sorts in the two formulas")
    for other in set(phi_vars) & set(psi_vars) - {shared_x}:
        raise StructuralError(f"formulas share variable {other!r} besides {shared_x!r}")
    if t_name in phi_vars or t_name in psi_vars or w_name in phi_vars or w_name in psi_vars \
            or t_name == w_name:
        raise StructuralError("fresh variables must be new and distinct")
    if fresh_sort not in sig.sorts:
        raise StructuralError(f"unknown sort {fresh_sort!r}")
    d_name = sig.metric_of[fresh_sort]
    d_tw = Atom(d_name, (Var(t_name, fresh_sort), Var(w_name, fresh_sort)))
    return Op("plus_trunc", (Op("min", (phi, d_tw)),
                             Op("min", (psi, Op("neg", (d_tw,))))))
