"""Tests for the exact truth-value layer: connectives, med, flim, PL moduli."""

import random
from fractions import Fraction as F

import pytest

from contlogic.errors import DomainError, StructuralError
from contlogic.values import (
    PLMonotone,
    apply_connective,
    delta_from_inverse,
    flim_prefix,
    format_rational,
    inverse_from_delta,
    is_dyadic,
    med,
    med_by_subsets,
    parse_rational,
    pl_capped_sum,
    pl_compose,
    pl_half,
)


def grid(step_denom=32):
    return [F(k, step_denom) for k in range(step_denom + 1)]


def test_rational_parsing_round_trip():
    assert parse_rational("3/4") == F(3, 4)
    assert parse_rational("1") == F(1)
    assert format_rational(F(1, 2)) == "1/2"
    assert format_rational(F(2)) == "2"
    with pytest.raises(DomainError):
        parse_rational("0.5")
    with pytest.raises(DomainError):
        parse_rational("1/0")
    assert is_dyadic(F(3, 8)) and not is_dyadic(F(1, 3))


def test_connective_values():
    assert apply_connective("monus", [F(3, 4), F(1, 4)]) == F(1, 2)
    assert apply_connective("monus", [F(1, 4), F(3, 4)]) == 0
    assert apply_connective("min", [F(2, 3), F(1, 3)]) == F(1, 3)
    # min through its truncated-subtraction form: x /\ y = x -. (x -. y)
    x, y = F(2, 3), F(1, 3)
    assert apply_connective("monus", [x, apply_connective("monus", [x, y])]) == F(1, 3)
    assert apply_connective("const", [], const_value=F(1, 3)) == F(1, 3)
    with pytest.raises(StructuralError):
        apply_connective("monus", [F(1, 2)])
    with pytest.raises(StructuralError):
        apply_connective("nope", [F(1, 2)])


def test_connective_identity_block_on_grid():
    """The four derived-connective identities, exactly, on a 33x33 grid."""
    for x in grid():
        for y in grid():
            land = min(x, y)
            lor = max(x, y)
            m = apply_connective("monus", [x, y])
            mrev = apply_connective("monus", [y, x])
            assert apply_connective("monus", [x, m]) == land
            assert apply_connective("neg", [apply_connective("min", [1 - x, 1 - y])]) == lor
            assert apply_connective("neg", [apply_connective("monus", [1 - x, y])]) == min(x + y, F(1))
            assert apply_connective("plus_trunc", [m, mrev]) == abs(x - y)


def test_med_examples_and_properties():
    assert med([F(0), F(2, 5), F(1)], 2) == F(2, 5)
    assert med([F(1, 3)] * 3, 2) == F(1, 3)
    assert med([F(0), F(0), F(1), F(1), F(1)], 3) == 1
    assert med_by_subsets([F(0), F(0), F(1), F(1), F(1)], 3) == 1
    with pytest.raises(StructuralError):
        med([F(0), F(1)], 2)
    rng = random.Random(7)
    for _ in range(200):
        n = rng.choice([1, 2, 3])
        vals = [F(rng.randrange(0, 9), 8) for _ in range(2 * n - 1)]
        assert med(vals, n) == med_by_subsets(vals, n)
    # monotone in every argument
    rng2 = random.Random(19)
    for _ in range(100):
        vals = [F(rng2.randrange(0, 9), 8) for _ in range(5)]
        i = rng2.randrange(5)
        bumped = list(vals)
        bumped[i] = min(bumped[i] + F(1, 8), F(1))
        assert med(bumped, 3) >= med(vals, 3)


def test_flim_prefix_examples():
    c = F(2, 5)
    tr = flim_prefix([c, c, c, c])
    assert tr.modified_prefix == (c, c, c, c)
    assert tr.error_bound == F(1, 8)

    tr = flim_prefix([F(0), F(1), F(1), F(1), F(1)])
    assert tr.modified_prefix == (F(0), F(1, 2), F(3, 4), F(7, 8), F(15, 16))

    tr = flim_prefix([F(0), F(1), F(0), F(1), F(0)])
    assert tr.modified_prefix == (F(0), F(1, 2), F(1, 4), F(3, 8), F(5, 16))

    with pytest.raises(StructuralError):
        flim_prefix([])


def test_flim_cauchy_bound_holds():
    rng = random.Random(11)
    for _ in range(100):
        seq = [F(rng.randrange(0, 65), 64) for _ in range(10)]
        mods = flim_prefix(seq).modified_prefix
        for n in range(len(mods)):
            for m in range(n, len(mods)):
                assert abs(mods[n] - mods[m]) <= F(1, 2**n)


def test_flim_stability_property():
    """Prefixes close up to index m keep modified values close at m."""
    rng = random.Random(13)
    for _ in range(100):
        m = 6
        a = [F(rng.randrange(0, 129), 128) for _ in range(m + 1)]
        b = []
        for n, v in enumerate(a):
            delta = F(rng.randrange(-3, 4), 2 ** (m + 3))
            w = min(max(v + delta, F(0)), F(1))
            assert abs(w - v) < F(1, 2**m)
            b.append(w)
        am = flim_prefix(a).modified_prefix
        bm = flim_prefix(b).modified_prefix
        assert abs(am[m] - bm[m]) < F(1, 2**m)


def test_pl_eval_and_algebra():
    ident = PLMonotone.identity()
    assert ident.eval(F(1, 3)) == F(1, 3)
    dbl = PLMonotone(((F(0), F(0)), (F(1, 2), F(1)), (F(1), F(1))))
    assert dbl.eval(F(1, 4)) == F(1, 2)
    assert ident.eval(F(0)) == 0

    assert pl_compose(ident, ident) == ident
    assert pl_capped_sum(ident, ident).eval(F(3, 4)) == 1
    assert pl_capped_sum(ident, ident).eval(F(1, 4)) == F(1, 2)
    assert pl_half(ident).eval(F(1, 2)) == F(1, 4)

    with pytest.raises(StructuralError):
        PLMonotone(((F(0), F(1)), (F(1), F(0))))  # decreasing
    with pytest.raises(StructuralError):
        PLMonotone(((F(1, 4), F(0)), (F(1), F(1))))  # does not start at 0


def test_pl_compose_matches_pointwise():
    rng = random.Random(17)
    for _ in range(50):
        f = random_pl(rng)
        g = random_pl(rng)
        h = pl_compose(f, g)
        for x in grid(16):
            assert h.eval(x) == f.eval(g.eval(x))
        s = pl_capped_sum(f, g)
        for x in grid(16):
            assert s.eval(x) == min(f.eval(x) + g.eval(x), F(1))


def random_pl(rng, inverse=False):
    xs = sorted(rng.sample([F(k, 16) for k in range(1, 16)], rng.randrange(0, 4)))
    xs = [F(0)] + xs + [F(1)]
    start = F(0) if inverse else F(rng.randrange(0, 3), 8)
    ys = [start]
    for _ in xs[1:]:
        ys.append(min(ys[-1] + F(rng.randrange(0, 9), 16), F(1)))
    return PLMonotone(tuple(zip(xs, ys)))


def test_delta_from_inverse_examples():
    ident = PLMonotone.identity()
    delta = delta_from_inverse(ident)
    assert delta(F(1, 4)) == F(1, 4)
    assert delta(F(1)) == 1
    dbl = PLMonotone(((F(0), F(0)), (F(1, 2), F(1)), (F(1), F(1))))
    assert delta_from_inverse(dbl)(F(1, 2)) == F(1, 4)
    with pytest.raises(DomainError):
        delta(F(0))
    with pytest.raises(DomainError):
        delta_from_inverse(PLMonotone.constant(F(1, 2)))


def test_inverse_from_delta_identity_and_round_trip():
    ident = PLMonotone.identity()
    u = inverse_from_delta(ident)
    assert u == ident
    delta = delta_from_inverse(u)
    assert delta(F(1, 2)) == F(1, 2)
    with pytest.raises(DomainError):
        inverse_from_delta(PLMonotone(((F(0), F(0)), (F(1, 2), F(0)), (F(1), F(1)))))


def test_inverse_from_delta_dominates_u0_and_stays_sound():
    """u-hat is continuous, monotone, >= u0, and respecting delta implies respecting u-hat."""
    rng = random.Random(23)
    for _ in range(30):
        delta = random_pl(rng)
        if any(y == 0 for _, y in delta.breakpoints[1:]):
            continue
        uhat = inverse_from_delta(delta)
        assert uhat.is_inverse_modulus()
        # u0(r) = sup{t : delta(t) <= r} is dominated by the envelope
        for r in grid(16):
            u0 = F(0)
            for (x0, y0), (x1, y1) in zip(delta.breakpoints, delta.breakpoints[1:]):
                if y1 <= r:
                    u0 = x1
                elif y0 <= r:
                    u0 = x0 + (r - y0) * (x1 - x0) / (y1 - y0)
            assert uhat.eval(r) >= u0
