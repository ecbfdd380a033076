"""Parser, printer, prenex shape, free variables, modulus inference."""

import random
from fractions import Fraction as F

import pytest

from contlogic.errors import (
    GrammarError,
    SortMismatchError,
    StructuralError,
    UnknownSymbolError,
)
from contlogic.language import (
    Atom,
    Condition,
    Const,
    FuncDecl,
    Op,
    PLMonotone,
    PredDecl,
    Quant,
    Signature,
    SortDecl,
    Var,
    expand_condition,
    free_vars,
    infer_modulus,
    is_prenex,
    parse,
    prenex,
    print_formula,
)

IDENT = PLMonotone.identity()


def simple_sig():
    return Signature(
        [SortDecl("S", "d")],
        functions=[FuncDecl("g", ("S",), "S", (IDENT,))],
        predicates=[
            PredDecl("P", ("S",), (IDENT,)),
            PredDecl("Q", ("S",), (IDENT,)),
            PredDecl("R", ("S", "S"), (IDENT, IDENT)),
        ],
    )


def pra_like_sig():
    return Signature(
        [SortDecl("B", "d")],
        functions=[
            FuncDecl("zero", (), "B", ()),
            FuncDecl("one", (), "B", ()),
            FuncDecl("compl", ("B",), "B", (IDENT,)),
            FuncDecl("meet", ("B", "B"), "B", (IDENT, IDENT)),
            FuncDecl("join", ("B", "B"), "B", (IDENT, IDENT)),
        ],
        predicates=[PredDecl("mu", ("B",), (IDENT,))],
    )


def test_parse_simple_quantifier():
    sig = simple_sig()
    f = parse("sup x. P(x)", sig)
    assert f == Quant("sup", "x", "S", Atom("P", (Var("x", "S"),)))


def test_parse_monus_const():
    sig = simple_sig()
    f = parse("P(x) -. 1/4", sig)
    assert f == Op("monus", (Atom("P", (Var("x", "S"),)), Const(F(1, 4))))


def test_parse_apa_matrix_subformula():
    sig = pra_like_sig()
    f = parse("inf y. |mu(meet(x,y)) - half(mu(x))|", sig)
    assert isinstance(f, Quant) and f.kind == "inf"
    body = f.body
    assert isinstance(body, Op) and body.op == "absdiff"
    left, right = body.args
    assert isinstance(left, Atom) and left.pred == "mu"
    assert left.args[0].func == "meet"
    assert right == Op("half", (Atom("mu", (Var("x", "B"),)),))


def test_parse_errors_are_distinct():
    sig = simple_sig()
    with pytest.raises(GrammarError):
        parse("sup x P(x)", sig)
    with pytest.raises(UnknownSymbolError):
        parse("Nope(x)", sig)
    with pytest.raises(SortMismatchError):
        parse("R(x)", sig)
    with pytest.raises(GrammarError):
        parse("P(x) )", sig)


def test_free_vars():
    sig = simple_sig()
    assert free_vars(parse("sup x. R(x,y)", sig)) == {("y", "S")}
    assert free_vars(parse("P(x) -. Q(x)", sig)) == {("x", "S")}
    assert free_vars(parse("1/2", sig)) == set()


def test_round_trip_on_samples():
    sig = pra_like_sig()
    texts = [
        "sup x. inf y. |mu(meet(y,x)) - half mu(x)|",
        "mu(x) -. 1/4 +. half mu(join(x,y))",
        "not half (mu(x) -. mu(y))",
        "min(mu(x), max(mu(y), 1/2))",
        "med 2(mu(x), mu(y), d(x,y))",
        "sup x. (inf y. mu(meet(x,y))) -. mu(x)",
    ]
    for text in texts:
        f = parse(text, sig)
        assert parse(print_formula(f, sig), sig) == f


def test_round_trip_generated(depth=5):
    sig = simple_sig()
    rng = random.Random(41)
    for _ in range(300):
        f = random_formula(rng, sig, depth)
        assert parse(print_formula(f, sig), sig) == f


def random_formula(rng, sig, depth, scope=()):
    if depth == 0 or (rng.random() < 0.25 and scope):
        choice = rng.randrange(3)
        if choice == 0 or not scope:
            return Const(F(rng.randrange(0, 5), 4))
        v = rng.choice(scope)
        if choice == 1:
            return Atom("P", (Var(v, "S"),))
        return Atom("R", (Var(v, "S"), Var(rng.choice(scope), "S")))
    kind = rng.randrange(6)
    if kind == 0:
        name = f"v{len(scope)}"
        return Quant(rng.choice(["sup", "inf"]), name, "S",
                     random_formula(rng, sig, depth - 1, scope + (name,)))
    if kind == 1:
        return Op("neg", (random_formula(rng, sig, depth - 1, scope),))
    if kind == 2:
        return Op("half", (random_formula(rng, sig, depth - 1, scope),))
    op = rng.choice(["monus", "plus_trunc", "min", "max", "absdiff"])
    return Op(op, (random_formula(rng, sig, depth - 1, scope),
                   random_formula(rng, sig, depth - 1, scope)))


def test_prenex_shapes():
    sig = simple_sig()
    f = prenex(parse("not (sup x. P(x))", sig))
    assert isinstance(f, Quant) and f.kind == "inf"
    assert isinstance(f.body, Op) and f.body.op == "neg"

    f = prenex(parse("(sup x. P(x)) -. 1/4", sig))
    assert isinstance(f, Quant) and f.kind == "sup"

    f = prenex(parse("1/4 -. (sup x. P(x))", sig))
    assert isinstance(f, Quant) and f.kind == "inf"

    for text in [
        "sup x. (inf y. R(x,y)) -. P(x)",
        "not (sup x. P(x) +. (inf y. Q(y)))",
        "half (sup x. half (inf y. R(x,y)))",
        "|sup x. P(x) - inf y. Q(y)|",
    ]:
        g = prenex(parse(text, sig))
        assert is_prenex(g)
        assert {s for _, s in free_vars(g)} <= {"S"}


def test_prenex_free_vars_preserved():
    sig = simple_sig()
    for text in ["(sup x. R(x,y)) -. P(z)", "not (inf x. R(x,y))"]:
        f = parse(text, sig)
        assert free_vars(prenex(f)) == free_vars(f)


def test_infer_modulus_rules():
    sig = simple_sig()
    f = parse("P(x)", sig)
    assert infer_modulus(f, sig, "x") == IDENT

    f = parse("P(x) -. P(x)", sig)
    u = infer_modulus(f, sig, "x")
    assert u.eval(F(1, 4)) == F(1, 2)
    assert u.eval(F(3, 4)) == 1

    f = parse("half P(x)", sig)
    u = infer_modulus(f, sig, "x")
    assert u.eval(F(1, 2)) == F(1, 4)

    f = parse("sup y. R(y,x)", sig)
    assert infer_modulus(f, sig, "x") == IDENT

    with pytest.raises(StructuralError):
        infer_modulus(parse("P(x)", sig), sig, "y")


def test_infer_modulus_soundness_on_validated_structures():
    """Inferred moduli bound the value change under moving one free variable.

    Exhaustive over all pairs of carrier elements substituted for the
    variable, on structures that pass the axiom validator.
    """
    from contlogic.structures import (
        eval_formula,
        gen_halfgraph,
        gen_prob_algebra,
        validate,
    )

    algebra = gen_prob_algebra([F(1, 4), F(3, 4)])
    halfgraph = gen_halfgraph(3)
    assert validate(algebra).valid and validate(halfgraph).valid
    cases = [
        (algebra, "mu(meet(x,y))", "x", {"y"}),
        (algebra, "mu(join(x,compl(x)))", "x", set()),
        (algebra, "half mu(x) +. mu(meet(x,y))", "x", {"y"}),
        (algebra, "sup z. |mu(meet(x,z)) - mu(meet(y,z))|", "x", {"y"}),
        (halfgraph, "phi(x,y) -. phi(y,x)", "x", {"y"}),
    ]
    for M, text, var, others in cases:
        f = parse(text, M.sig)
        u = infer_modulus(f, M.sig, var)
        sorts = dict(free_vars(f))
        sort = sorts[var]
        pools = {o: range(len(M.carriers[sorts[o]])) for o in others}
        import itertools

        for combo in itertools.product(*pools.values()):
            env = dict(zip(pools.keys(), combo))
            n = len(M.carriers[sort])
            for z in range(n):
                for w in range(n):
                    vz = eval_formula(M, {**env, var: z}, f)
                    vw = eval_formula(M, {**env, var: w}, f)
                    assert abs(vz - vw) <= u.eval(M.metric[sort][z][w])


def test_expand_condition():
    sig = simple_sig()
    p = parse("P(x)", sig)
    c = Condition(p, "le", F(1, 4))
    assert expand_condition(c) == Op("monus", (p, Const(F(1, 4))))
    c = Condition(p, "ge", F(0))
    assert expand_condition(c) == Op("monus", (Const(F(0)), p))
    c = Condition(p, "eq0")
    assert expand_condition(c) == p
    with pytest.raises(StructuralError):
        Condition(p, "le", F(1, 3))


def test_multisort_annotations():
    sig = Signature(
        [SortDecl("A", "d_A"), SortDecl("B", "d_B")],
        predicates=[PredDecl("across", ("A", "B"), (IDENT, IDENT))],
    )
    f = parse("sup x. inf y. across(x, y)", sig)
    assert f.sort == "A" and f.body.sort == "B"
    text = print_formula(f, sig)
    assert ":A" in text and ":B" in text
    assert parse(text, sig) == f
    with pytest.raises(SortMismatchError):
        parse("d_A(x, y) -. d_B(x, y)", sig)
    with pytest.raises(SortMismatchError):
        parse("sup x. d_A(x, x) -. d_B(x, x)", sig)
