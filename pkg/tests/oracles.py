"""Independent oracles and generators shared by the test modules.

The evaluators here deliberately avoid the package's formula and structure
machinery: they compute expected values directly from raw definitions, so
agreement with the main code paths is meaningful.
"""

from fractions import Fraction as F

from contlogic.topometric import FiniteTopometricSpace


def atomless_defect_bruteforce(weights):
    """sup_x inf_y |mu(y & x) - mu(x)/2| over the power-set algebra, via bitmasks."""
    k = len(weights)
    n = 1 << k
    mu = [sum((weights[b] for b in range(k) if m >> b & 1), F(0)) for m in range(n)]
    worst = F(0)
    for x in range(n):
        best = min(abs(mu[y & x] - mu[x] / 2) for y in range(n))
        worst = max(worst, best)
    return worst


def pra_axioms_bruteforce(weights):
    """True iff the five probability-algebra axioms hold exactly, via bitmasks."""
    k = len(weights)
    n = 1 << k
    full = n - 1
    mu = [sum((weights[b] for b in range(k) if m >> b & 1), F(0)) for m in range(n)]

    def d(a, b):
        return mu[a ^ b]

    if mu[full] != 1 or mu[0] != 0:
        return False
    for x in range(n):
        for y in range(n):
            if mu[x] + mu[y] != mu[x | y] + mu[x & y]:
                return False
            if d(x, y) != mu[(x & (full ^ y)) | (y & (full ^ x))]:
                return False
    return True


def random_metric(rng, n, choices):
    """Random symmetric matrix with zero diagonal, closed under shortest paths."""
    dists = [[F(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            dists[i][j] = dists[j][i] = rng.choice(choices)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if dists[i][j] > dists[i][k] + dists[k][j]:
                    dists[i][j] = dists[i][k] + dists[k][j]
    return dists


def random_valid_topometric_space(rng, n=8, eps=F(1, 2)):
    """Random metric plus a closed-set family saturated into a valid lattice."""
    points = tuple(f"p{i}" for i in range(n))
    dists = random_metric(rng, n, [F(1, 4), F(1, 2), F(3, 4), F(1)])
    fam = {frozenset(), frozenset(range(n))}
    for _ in range(4):
        fam.add(frozenset(rng.sample(range(n), rng.randrange(1, n))))
    stub = FiniteTopometricSpace(points, (frozenset(), frozenset(range(n))),
                                 tuple(tuple(row) for row in dists), ())
    changed = True
    while changed:
        changed = False
        for A in list(fam):
            for B in list(fam):
                for C in (A | B, A & B):
                    if C not in fam:
                        fam.add(C)
                        changed = True
        for A in list(fam):
            nb = stub.closed_neighbourhood(A, eps)
            if nb not in fam:
                fam.add(nb)
                changed = True
    return FiniteTopometricSpace(points, tuple(sorted(fam, key=sorted)),
                                 tuple(tuple(row) for row in dists), (eps,)), eps


def classical_eval(carrier, relations, node, env):
    """Naive classical evaluator over a discrete relational description.

    `node` is a nested tuple: ("rel", name, vars), ("not", f), ("and", f, g),
    ("or", f, g), ("forall", v, f), ("exists", v, f).
    """
    tag = node[0]
    if tag == "rel":
        _, name, vars_ = node
        return tuple(env[v] for v in vars_) in relations[name]
    if tag == "not":
        return not classical_eval(carrier, relations, node[1], env)
    if tag == "and":
        return classical_eval(carrier, relations, node[1], env) and \
            classical_eval(carrier, relations, node[2], env)
    if tag == "or":
        return classical_eval(carrier, relations, node[1], env) or \
            classical_eval(carrier, relations, node[2], env)
    if tag == "forall":
        _, v, body = node
        return all(classical_eval(carrier, relations, body, {**env, v: e})
                   for e in carrier)
    if tag == "exists":
        _, v, body = node
        return any(classical_eval(carrier, relations, body, {**env, v: e})
                   for e in carrier)
    raise ValueError(tag)
