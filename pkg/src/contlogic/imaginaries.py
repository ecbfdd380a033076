"""Canonical-parameter sorts for a single formula with a declared variable split.

Parameter tuples are quotiented by the pseudo-metric
max over free-tuples of |phi(free, params) - phi(free, params')|;
the expansion adds a sort of classes, its metric symbol, and a predicate
recovering phi through class representatives.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import StructuralError
from .language import (
    Atom,
    Op,
    PLMonotone,
    PredDecl,
    Quant,
    SortDecl,
    Var,
    infer_modulus,
)
from .structures import (
    FiniteStructure,
    VariableSplit,
    eval_formula,
    make_split,
    tuple_names,
    tuples_of,
    validate,
    value_matrix,
)


@dataclass
class ImaginaryExpansion:
    base: FiniteStructure
    formula: object
    split: VariableSplit
    sort_name: str
    metric_name: str
    pred_name: str
    class_members: list  # list of lists of y-tuple indices
    class_names: list
    representatives: list  # y-tuple (of carrier indices) per class
    projection: dict  # y-tuple index -> class index
    expanded: FiniteStructure

    def class_of_tuple(self, yt_index: int) -> int:
        return self.projection[yt_index]


def build_imaginary(M: FiniteStructure, phi, split: VariableSplit,
                    sort_name: str = "S_phi", metric_name: str = "d_phi",
                    pred_name: str = "P_phi") -> ImaginaryExpansion:
    """Expand M with the canonical-parameter sort for phi under the given split.

    The new sort's elements are classes of parameter tuples at pseudo-distance
    zero (equal value rows); the class predicate has identity modulus in the
    class argument and inferred moduli in the free arguments.
    """
    report = validate(M)
    if not report.valid:
        raise StructuralError(f"base structure fails validation: {report.violations[0]}")
    for name in (sort_name, metric_name, pred_name):
        if name in M.sig.functions or name in M.sig.predicates or name in M.sig.metric_sort \
                or name in M.sig.sorts:
            raise StructuralError(f"name {name!r} already used in the signature")

    xts, yts, vals = value_matrix(M, phi, split)
    columns = [tuple(vals[xi][yi] for xi in range(len(xts))) for yi in range(len(yts))]

    class_members: list[list[int]] = []
    projection = {}
    column_to_class: dict = {}
    for yi, col in enumerate(columns):
        if col in column_to_class:
            ci = column_to_class[col]
            class_members[ci].append(yi)
        else:
            ci = len(class_members)
            column_to_class[col] = ci
            class_members.append([yi])
        projection[yi] = ci
    representatives = [members[0] for members in class_members]
    class_names = ["[" + ",".join(tuple_names(M, split.y, yts[rep])) + "]"
                   for rep in representatives]

    def d_phi(ci: int, cj: int) -> Fraction:
        a = columns[representatives[ci]]
        b = columns[representatives[cj]]
        return max(abs(u - v) for u, v in zip(a, b))

    n_classes = len(class_members)
    new_metric = [[d_phi(i, j) for j in range(n_classes)] for i in range(n_classes)]

    x_moduli = tuple(infer_modulus(phi, M.sig, name) for name, _ in split.x)
    pred_decl = PredDecl(pred_name,
                         tuple(s for _, s in split.x) + (sort_name,),
                         x_moduli + (PLMonotone.identity(),))
    new_sig = M.sig.extended(sorts=[SortDecl(sort_name, metric_name)],
                             predicates=[pred_decl])

    pred_table = {}
    for xi, xt in enumerate(xts):
        for ci in range(n_classes):
            pred_table[tuple(xt) + (ci,)] = vals[xi][representatives[ci]]

    carriers = dict(M.carriers)
    carriers[sort_name] = class_names
    metric = {s: M.metric[s] for s in M.sig.sort_names}
    metric[sort_name] = new_metric
    predicates = {name: dict(tbl) for name, tbl in M.predicates.items()}
    predicates[pred_name] = pred_table
    expanded = FiniteStructure(new_sig, carriers, metric,
                               {name: dict(tbl) for name, tbl in M.functions.items()},
                               predicates)
    return ImaginaryExpansion(M, phi, split, sort_name, metric_name, pred_name,
                              class_members, class_names, [yts[r] for r in representatives],
                              projection, expanded)


def tphi_sentences(E: ImaginaryExpansion) -> list[tuple[str, object]]:
    """The three defining sentences of the canonical-parameter theory.

    All three evaluate to exactly 0 on every built expansion.
    """
    phi = E.formula
    split = E.split
    used = {n for n, _ in split.x} | {n for n, _ in split.y}
    z1, z2 = "z_cp1", "z_cp2"
    if z1 in used or z2 in used:
        z1, z2 = "z_cp1_", "z_cp2_"

    def p_phi_atom(zname: str):
        args = tuple(Var(n, s) for n, s in split.x) + (Var(zname, E.sort_name),)
        return Atom(E.pred_name, args)

    def sup_over(vars_, body):
        for name, sort in reversed(vars_):
            body = Quant("sup", name, sort, body)
        return body

    def inf_over(vars_, body):
        for name, sort in reversed(vars_):
            body = Quant("inf", name, sort, body)
        return body

    # sup_zz' | d_phi(z,z') - sup_x |P(x,z) - P(x,z')| |
    inner = sup_over(split.x, Op("absdiff", (p_phi_atom(z1), p_phi_atom(z2))))
    s1 = Quant("sup", z1, E.sort_name,
               Quant("sup", z2, E.sort_name,
                     Op("absdiff", (Atom(E.metric_name,
                                         (Var(z1, E.sort_name), Var(z2, E.sort_name))),
                                    inner))))
    # sup_z inf_y sup_x |phi(x,y) - P(x,z)|
    mismatch = sup_over(split.x, Op("absdiff", (phi, p_phi_atom(z1))))
    s2 = Quant("sup", z1, E.sort_name, inf_over(split.y, mismatch))
    # sup_y inf_z sup_x |phi(x,y) - P(x,z)|
    s3 = sup_over(split.y, Quant("inf", z1, E.sort_name, mismatch))
    return [("metric_matches_sup_difference", s1),
            ("every_class_is_a_parameter", s2),
            ("every_parameter_has_a_class", s3)]


def verify_tphi(E: ImaginaryExpansion):
    """Evaluate the three canonical-parameter sentences on the expansion."""
    rows = []
    for name, sentence in tphi_sentences(E):
        value = eval_formula(E.expanded, {}, sentence)
        rows.append({"name": name, "value": value, "holds": value == 0})
    return all(r["holds"] for r in rows), rows


def automorphisms(M: FiniteStructure):
    """Brute-force sort-preserving automorphisms; carriers capped at 6 elements."""
    for s in M.sig.sort_names:
        if len(M.carriers[s]) > 6:
            raise StructuralError("automorphism search capped at 6-element carriers")
    sorts = M.sig.sort_names
    pools = [itertools.permutations(range(len(M.carriers[s]))) for s in sorts]
    for perms in itertools.product(*pools):
        pi = dict(zip(sorts, perms))
        if _is_automorphism(M, pi):
            yield pi


def _is_automorphism(M: FiniteStructure, pi: Mapping[str, Sequence[int]]) -> bool:
    for s in M.sig.sort_names:
        p = pi[s]
        dm = M.metric[s]
        n = len(M.carriers[s])
        for i in range(n):
            for j in range(n):
                if dm[p[i]][p[j]] != dm[i][j]:
                    return False
    for name, decl in M.sig.functions.items():
        for args, value in M.functions[name].items():
            mapped = tuple(pi[s][a] for s, a in zip(decl.arg_sorts, args))
            if M.fn_value(name, mapped) != pi[decl.target][value]:
                return False
    for name, decl in M.sig.predicates.items():
        for args, value in M.predicates[name].items():
            mapped = tuple(pi[s][a] for s, a in zip(decl.arg_sorts, args))
            if M.pred_value(name, mapped) != value:
                return False
    return True
