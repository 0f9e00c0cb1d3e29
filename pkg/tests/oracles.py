"""Brute-force reference computations on explicit group elements.

Everything here works on finite groups ``Z/d_1 + ... + Z/d_k`` given by their
orders and never calls the lattice code under test.
"""

from itertools import combinations, product
from math import gcd


def orders_of(ambient):
    """Orders of a diagonal (cyclic_sum) presentation."""
    out = []
    for i in range(ambient.rank):
        d = 0
        for v in ambient.relations.basis:
            if v[i] and all(v[j] == 0 for j in range(ambient.rank) if j != i):
                d = abs(v[i])
        if d == 0:
            raise ValueError("oracle needs a finite diagonal presentation")
        out.append(d)
    return tuple(out)


def reduce(v, orders):
    return tuple(x % d for x, d in zip(v, orders))


def span(vectors, orders):
    """All elements of the subgroup generated by ``vectors``."""
    zero = tuple(0 for _ in orders)
    gens = [reduce(v, orders) for v in vectors]
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple((a + b) % d for a, b, d in zip(x, g, orders))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def elements(sub):
    return span(sub.lattice.basis, orders_of(sub.ambient))


def all_elements(orders):
    return frozenset(product(*(range(d) for d in orders)))


def killed_by(k, outer, inner, orders):
    """Number of cosets of ``inner`` in ``outer`` annihilated by ``k``."""
    hits = sum(1 for x in outer if tuple((k * a) % d for a, d in zip(x, orders)) in inner)
    return hits // len(inner)


def type_counts(torsion, k):
    out = 1
    for d in torsion:
        out *= gcd(k, d)
    return out


def matches_type(t, outer, inner, orders):
    """Compare a computed finite type against element counts."""
    if t.free_rank:
        return False
    if len(outer) != t.order * len(inner):
        return False
    n = len(outer) // len(inner)
    return all(killed_by(k, outer, inner, orders) == type_counts(t.torsion, k)
               for k in range(1, n + 1) if n % k == 0)


def closed_sets(steps, witnesses, orders):
    """Closed index sets straight from the definition, on element sets."""
    sigma = len(witnesses)
    wit = [span(w, orders) for w in witnesses]
    xs = [span(s, orders) for s in steps]
    out = []
    for r in range(sigma + 1):
        for s in combinations(range(sigma), r):
            ok = True
            for a in s:
                below = span([v for g in s if g < a for v in wit[g]], orders)
                if not (xs[a] & wit[a]) <= below:
                    ok = False
                    break
            if ok:
                out.append(frozenset(s))
    return out
