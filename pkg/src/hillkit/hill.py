"""Closed index sets, the sum map ``ell`` and the constructions built on them.

For a filtration ``(X_a)`` with witnesses ``(A_a)``, a set ``S`` of indices is
closed when ``X_a & A_a <= sum(A_g for g in S if g < a)`` for every ``a`` in
``S``; ``ell(S)`` is the sum of the witnesses indexed by ``S``.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .core import (
    AmbientObject,
    Homomorphism,
    IntLattice,
    Subobject,
    Vector,
    image,
    join,
    lattice_join,
    lattice_meet,
    leq,
    meet,
    quotient_type,
    solve,
    transpose,
    unit,
)
from .errors import AmbientMismatch, IterationCapError, PreconditionError
from .filtration import Filtration, coordinates_in, require_valid, subquotient

IndexSet = frozenset
DEFAULT_ITERATION_CAP = 1000
DEFAULT_EXHAUSTIVE_BOUND = 12


class HillContext:
    """A validated filtration with witnesses plus memo tables for hulls and
    sums.  Safe to share between threads."""

    def __init__(self, filtration: Filtration, iteration_cap: int = DEFAULT_ITERATION_CAP):
        f = filtration.with_default_witnesses()
        require_valid(f)
        self.filtration = f
        self.ambient: AmbientObject = f.ambient
        self.sigma = f.length
        self.steps = f.steps
        self.witnesses = f.witnesses
        self.iteration_cap = iteration_cap
        # X_a & A_a, the obstruction a closed set must absorb
        self.crit = tuple(meet(f.steps[a], f.witnesses[a]) for a in range(self.sigma))
        self._lock = threading.RLock()
        self._ell: dict[frozenset, Subobject] = {}
        self._hull: dict[int, frozenset] = {}

    def __repr__(self):
        return f"HillContext(sigma={self.sigma}, ambient={self.ambient})"

    def check_indices(self, s: Iterable[int]) -> frozenset:
        s = frozenset(s)
        for a in s:
            if not (isinstance(a, int) and 0 <= a < self.sigma):
                raise PreconditionError(f"index {a!r} out of range 0..{self.sigma - 1}")
        return s

    def witness_generators(self) -> list[Vector]:
        out = []
        for w in self.witnesses:
            out.extend(w.generators)
        return out


def ell(ctx: HillContext, s: Iterable[int]) -> Subobject:
    s = ctx.check_indices(s)
    with ctx._lock:
        hit = ctx._ell.get(s)
    if hit is not None:
        return hit
    lat = ctx.ambient.relations
    for a in sorted(s):
        lat = lattice_join(lat, ctx.witnesses[a].lattice)
    out = Subobject(ctx.ambient, lat)
    with ctx._lock:
        ctx._ell[s] = out
    return out


def _closed_at(ctx: HillContext, a: int, s: frozenset) -> bool:
    return leq(ctx.crit[a], ell(ctx, [g for g in s if g < a]))


def is_closed(ctx: HillContext, s: Iterable[int]) -> bool:
    s = ctx.check_indices(s)
    return all(_closed_at(ctx, a, s) for a in s)


def initial_segment(a: int) -> frozenset:
    return frozenset(range(a))


def cover(ctx: HillContext, y: Subobject, beta: int) -> frozenset:
    """A set ``S <= {0..beta-1}`` with ``y <= ell(S)`` from a descending greedy
    sweep; no minimality is claimed."""
    if y.ambient != ctx.ambient:
        raise AmbientMismatch("subobject is not in the filtered object")
    if not 0 <= beta <= ctx.sigma:
        raise PreconditionError(f"bound {beta} out of range")
    if not leq(y, ctx.steps[beta]):
        raise PreconditionError(f"subobject is not contained in X_{beta}")
    n = ctx.ambient.rank
    residual = list(y.generators)
    chosen = set()
    for g in range(beta - 1, -1, -1):
        xg = ctx.steps[g].lattice
        if all(t in xg for t in residual):
            continue
        chosen.add(g)
        ab = ctx.witnesses[g].lattice.basis
        cols = list(ab) + list(xg.basis)
        mat = transpose(cols, n)
        nxt = []
        for t in residual:
            c = solve(mat, t, ncols=len(cols))
            # t lies in X_{g+1} = X_g + A_g, so the system is solvable
            x = tuple(sum(c[len(ab) + j] * xg.basis[j][i] for j in range(len(xg.basis)))
                      for i in range(n))
            nxt.append(x)
        residual = nxt
    return frozenset(chosen)


def _close(ctx: HillContext, start: frozenset) -> frozenset:
    s = set(start)
    for _ in range(ctx.iteration_cap):
        fs = frozenset(s)
        bad = [a for a in fs if not _closed_at(ctx, a, fs)]
        if not bad:
            return fs
        a = max(bad)
        s |= cover(ctx, ctx.crit[a], a)
    raise IterationCapError(f"hull did not close within {ctx.iteration_cap} rounds")


def hull(ctx: HillContext, seed: Union[Iterable[int], Subobject]) -> frozenset:
    """A closed set containing the seed (or, for a subobject seed, a closed
    ``S`` with ``seed <= ell(S)``)."""
    if isinstance(seed, Subobject):
        start = cover(ctx, seed, ctx.sigma)
    else:
        start = ctx.check_indices(seed)
    if len(start) == 1:
        (b,) = start
        with ctx._lock:
            hit = ctx._hull.get(b)
        if hit is None:
            hit = _close(ctx, start)
            with ctx._lock:
                ctx._hull[b] = hit
        return hit
    if is_closed(ctx, start):
        return start
    return _close(ctx, start)


def closed_core(ctx: HillContext, y: Subobject) -> frozenset:
    """The largest closed set ``K`` with ``ell(K) <= y``."""
    keep = set()
    for a in range(ctx.sigma):
        if leq(ctx.witnesses[a], y) and _closed_at(ctx, a, frozenset(keep)):
            keep.add(a)
    return frozenset(keep)


def image_member(ctx: HillContext, y: Subobject) -> Optional[frozenset]:
    """A closed ``S`` with ``ell(S) == y`` if ``y`` lies in the image lattice."""
    k = closed_core(ctx, y)
    return k if ell(ctx, k) == y else None


# ----------------------------------------------------------------------------
# Induced filtrations of ell(T)/ell(S)
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class InducedFiltration:
    filtration: Filtration
    bijection: dict  # index a in T\S -> step number
    embedding: tuple  # columns = canonical basis of ell(T)
    lower: Subobject
    upper: Subobject


def induced_filtration(ctx: HillContext, s: Iterable[int], t: Iterable[int]) -> InducedFiltration:
    s, t = ctx.check_indices(s), ctx.check_indices(t)
    if not s <= t:
        raise PreconditionError("induced_filtration needs S <= T")
    for name, x in (("S", s), ("T", t)):
        if not is_closed(ctx, x):
            raise PreconditionError(f"{name} is not closed")
    lower, upper = ell(ctx, s), ell(ctx, t)
    obj, emb = subquotient(upper.lattice, lower.lattice)

    def to_obj(sub: Subobject) -> Subobject:
        return obj.sub(coordinates_in(upper.lattice, sub.lattice.basis))

    new = sorted(t - s)
    steps = []
    for a in new:
        steps.append(to_obj(ell(ctx, s | {g for g in t if g < a})))
    steps.append(to_obj(upper))
    wits = tuple(to_obj(join(ctx.witnesses[a], ctx.ambient.zero())) for a in new)
    filt = Filtration(obj, tuple(steps), wits)
    return InducedFiltration(filt, {a: j for j, a in enumerate(new)}, emb, lower, upper)


# ----------------------------------------------------------------------------
# Census
# ----------------------------------------------------------------------------


@dataclass
class CheckResult:
    passed: bool
    counterexample: Optional[dict] = None

    def to_json(self):
        out = {"status": "pass" if self.passed else "fail"}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class HillReport:
    sigma: int
    mode: str  # "exhaustive" or "sampled"
    closed_sets: list
    checks: dict = field(default_factory=dict)

    @property
    def census_size(self) -> int:
        return len(self.closed_sets)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks.values())


def _sset(s) -> list:
    return sorted(s)


def _basis(sub: Subobject) -> list:
    return [list(v) for v in sub.lattice.basis]


def enumerate_closed(ctx: HillContext) -> list[frozenset]:
    out = []
    for k in range(ctx.sigma + 1):
        for c in combinations(range(ctx.sigma), k):
            s = frozenset(c)
            if is_closed(ctx, s):
                out.append(s)
    return out


def _set_key(s):
    return (len(s), sorted(s))


def verify_hill(
    ctx: HillContext,
    exhaustive_bound: int = DEFAULT_EXHAUSTIVE_BOUND,
    seed: int = 0,
    samples: int = 64,
) -> HillReport:
    """Check the lattice properties of the closed sets and of ``ell``.

    When ``sigma <= exhaustive_bound`` every subset is examined; otherwise
    closed sets are produced as hulls of random seeds.
    """
    sigma = ctx.sigma
    if sigma <= exhaustive_bound:
        mode = "exhaustive"
        closed = enumerate_closed(ctx)
    else:
        mode = "sampled"
        rng = random.Random(seed)
        found = {frozenset(), frozenset(range(sigma))}
        for _ in range(samples):
            k = rng.randint(1, min(3, sigma))
            found.add(hull(ctx, rng.sample(range(sigma), k)))
        closed = sorted(found, key=_set_key)
    rep = HillReport(sigma, mode, closed)
    checks = rep.checks
    closed_set = set(closed)

    # (H1)
    res = CheckResult(True)
    for a in range(sigma + 1):
        seg = initial_segment(a)
        if not is_closed(ctx, seg) or ell(ctx, seg) != ctx.steps[a]:
            res = CheckResult(False, {"alpha": a, "ell": _basis(ell(ctx, seg)),
                                      "X_alpha": _basis(ctx.steps[a])})
            break
    checks["H1"] = res

    # closure of L under union and intersection; ell preserves both
    union_ok = inter_ok = join_ok = meet_ok = None
    pairs = list(combinations(closed, 2))
    if mode == "sampled" and len(pairs) > 2000:
        pairs = random.Random(seed + 1).sample(pairs, 2000)
    for s, t in pairs:
        u, i = s | t, s & t
        if union_ok is None and (u not in closed_set and not is_closed(ctx, u)):
            union_ok = {"S": _sset(s), "T": _sset(t)}
        if inter_ok is None and (i not in closed_set and not is_closed(ctx, i)):
            inter_ok = {"S": _sset(s), "T": _sset(t)}
        ls, lt = ell(ctx, s), ell(ctx, t)
        if join_ok is None and ell(ctx, u) != join(ls, lt):
            join_ok = {"S": _sset(s), "T": _sset(t), "ell_union": _basis(ell(ctx, u)),
                       "join": _basis(join(ls, lt))}
        if meet_ok is None and ell(ctx, i) != meet(ls, lt):
            meet_ok = {"S": _sset(s), "T": _sset(t), "ell_intersection": _basis(ell(ctx, i)),
                       "meet": _basis(meet(ls, lt))}
    checks["union_closed"] = CheckResult(union_ok is None, union_ok)
    checks["intersection_closed"] = CheckResult(inter_ok is None, inter_ok)
    checks["ell_preserves_joins"] = CheckResult(join_ok is None, join_ok)
    checks["ell_preserves_meets"] = CheckResult(meet_ok is None, meet_ok)

    # ell(S) & X_a == ell(S & a)
    res = CheckResult(True)
    for s in closed:
        for a in range(sigma + 1):
            lhs = meet(ell(ctx, s), ctx.steps[a])
            rhs = ell(ctx, s & initial_segment(a))
            if lhs != rhs:
                res = CheckResult(False, {"S": _sset(s), "alpha": a, "lhs": _basis(lhs),
                                          "rhs": _basis(rhs)})
                break
        if not res.passed:
            break
    checks["initial_segment_meet"] = res

    if mode == "exhaustive":
        checks["distributive"] = _check_distributive(ctx, closed)
    else:
        checks["distributive"] = _check_distributive_sampled(ctx, closed, seed, samples * 8)
    return rep


def _check_distributive_sampled(ctx: HillContext, closed: Sequence[frozenset], seed: int,
                                count: int) -> CheckResult:
    """Distributivity on random triples of sampled closed sets."""
    rng = random.Random(seed + 2)
    for _ in range(count):
        a, b, c = (ell(ctx, rng.choice(closed)) for _ in range(3))
        if meet(a, join(b, c)) != join(meet(a, b), meet(a, c)):
            return CheckResult(False, {"A": _basis(a), "B": _basis(b), "C": _basis(c)})
    return CheckResult(True)


def _check_distributive(ctx: HillContext, closed: Sequence[frozenset]) -> CheckResult:
    """Distributivity of the image lattice, checked on all triples of distinct
    images through join/meet tables."""
    images: list[IntLattice] = []
    index: dict[IntLattice, int] = {}
    for s in closed:
        lat = ell(ctx, s).lattice
        if lat not in index:
            index[lat] = len(images)
            images.append(lat)
    h = len(images)
    jt = np.zeros((h, h), dtype=np.int64)
    mt = np.zeros((h, h), dtype=np.int64)
    for i in range(h):
        for j in range(i, h):
            jl = lattice_join(images[i], images[j])
            ml = lattice_meet(images[i], images[j])
            if jl not in index or ml not in index:
                return CheckResult(False, {"reason": "image set not closed under sum/intersection",
                                           "A": [list(v) for v in images[i].basis],
                                           "B": [list(v) for v in images[j].basis]})
            jt[i, j] = jt[j, i] = index[jl]
            mt[i, j] = mt[j, i] = index[ml]
    if h == 0:
        return CheckResult(True)
    lhs = mt[:, jt]  # lhs[a, b, c] = a & (b + c)
    rhs = jt[mt[:, :, None], mt[:, None, :]]  # (a & b) + (a & c)
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        a, b, c = (int(x) for x in bad[0])
        return CheckResult(False, {"A": [list(v) for v in images[a].basis],
                                   "B": [list(v) for v in images[b].basis],
                                   "C": [list(v) for v in images[c].basis]})
    return CheckResult(True)


# ----------------------------------------------------------------------------
# Kaplansky witnesses
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class KaplanskyWitness:
    y: Subobject
    closed_set: frozenset
    w: Subobject
    inner: InducedFiltration  # filtration of w
    outer: InducedFiltration  # filtration of X/w


def kaplansky_witness(ctx: HillContext, y: Subobject) -> KaplanskyWitness:
    s = hull(ctx, y)
    w = ell(ctx, s)
    everything = frozenset(range(ctx.sigma))
    return KaplanskyWitness(
        y, s, w, induced_filtration(ctx, frozenset(), s), induced_filtration(ctx, s, everything)
    )


# ----------------------------------------------------------------------------
# Step selection shared by the summand/intersection constructions
# ----------------------------------------------------------------------------


def candidate_vectors(ctxs: Sequence[HillContext]) -> list[Vector]:
    """Witness generators of every context in index order, then the unit
    vectors of the presentation; duplicates removed."""
    seen = set()
    out = []
    n = ctxs[0].ambient.rank
    pool = [v for c in ctxs for v in c.witness_generators()]
    pool += [unit(n, i) for i in range(n)]
    for v in pool:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def step_key(upper: Subobject, lower: Subobject) -> tuple[int, int]:
    return quotient_type(upper, lower).size_key()


# ----------------------------------------------------------------------------
# Direct summands
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SummandResult:
    filtration: Filtration  # filtration of the summand, presented as Z / im(proj_y)
    chain: tuple[Subobject, ...]  # the projection-compatible chain Z_a of the whole object
    closed_sets: tuple[frozenset, ...]
    x_chain: tuple[Subobject, ...]
    y_chain: tuple[Subobject, ...]
    decomposition: tuple  # per step: (Z_{a+1}/Z_a, X-part, Y-part) invariant factors


def _check_projections(ctx: HillContext, px: Homomorphism, py: Homomorphism):
    x = ctx.ambient
    for p in (px, py):
        if p.source != x or p.target != x:
            raise PreconditionError("projections must be endomorphisms of the filtered object")
    if not px.compose(px).same_map(px) or not py.compose(py).same_map(py):
        raise PreconditionError("projections must be idempotent")
    if not (px + py).same_map(Homomorphism.identity(x)):
        raise PreconditionError("projections must sum to the identity")
    if not px.compose(py).is_zero() or not py.compose(px).is_zero():
        raise PreconditionError("projections must annihilate each other")


def summand_filtration(ctx: HillContext, proj_x: Homomorphism, proj_y: Homomorphism) -> SummandResult:
    _check_projections(ctx, proj_x, proj_y)
    x = ctx.ambient
    cap = ctx.iteration_cap
    cands = candidate_vectors([ctx])
    cur_set = frozenset()
    cur = ell(ctx, cur_set)
    chain, sets = [cur], [cur_set]
    for _ in range(cap):
        if cur.is_full():
            break
        best = None
        for k, w in enumerate(cands):
            if w in cur.lattice:
                continue
            s = cur_set | hull(ctx, x.sub([w]))
            for _ in range(cap):
                q = ell(ctx, s)
                p = join(image(proj_x, q), image(proj_y, q))
                if leq(p, q):
                    break
                s = s | hull(ctx, p)
            else:
                raise IterationCapError("projection closure did not stabilize")
            key = (step_key(q, cur), k)
            if best is None or key < best[0]:
                best = (key, s, q)
        _, cur_set, cur = best
        chain.append(cur)
        sets.append(cur_set)
    else:
        raise IterationCapError("summand chain did not reach the whole object")

    xs = tuple(image(proj_x, z) for z in chain)
    ys = tuple(image(proj_y, z) for z in chain)
    decomp = tuple(
        (quotient_type(chain[i + 1], chain[i]), quotient_type(xs[i + 1], xs[i]),
         quotient_type(ys[i + 1], ys[i]))
        for i in range(len(chain) - 1)
    )
    comp = image(proj_y, x.full())
    summand = AmbientObject(x.rank, comp.lattice)
    steps = []
    for z in xs:
        s = Subobject(summand, lattice_join(z.lattice, comp.lattice))
        if not steps or steps[-1] != s:
            steps.append(s)
    return SummandResult(Filtration(summand, tuple(steps)), tuple(chain), tuple(sets), xs, ys, decomp)


# ----------------------------------------------------------------------------
# Intersections of image lattices
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class IntersectionResult:
    filtration: Filtration
    closed_sets: tuple  # closed_sets[step][context]


def intersection_filtration(ctxs: Sequence[HillContext]) -> IntersectionResult:
    if not ctxs:
        raise PreconditionError("intersection_filtration needs at least one context")
    x = ctxs[0].ambient
    for c in ctxs:
        if c.ambient != x:
            raise AmbientMismatch("all contexts must filter the same object")
    cap = max(c.iteration_cap for c in ctxs)
    cands = candidate_vectors(ctxs)
    cur = x.zero()
    cur_sets = tuple(frozenset() for _ in ctxs)
    steps, sets = [cur], [cur_sets]
    for _ in range(cap):
        if cur.is_full():
            break
        best = None
        for k, w in enumerate(cands):
            if w in cur.lattice:
                continue
            q = join(cur, x.sub([w]))
            ss = list(cur_sets)
            for _ in range(cap):
                changed = False
                for i, c in enumerate(ctxs):
                    ss[i] = ss[i] | hull(c, q)
                    q2 = ell(c, ss[i])
                    if q2 != q:
                        changed = True
                        q = q2
                if not changed:
                    break
            else:
                raise IterationCapError("round-robin closure did not stabilize")
            key = (step_key(q, cur), k)
            if best is None or key < best[0]:
                best = (key, tuple(ss), q)
        _, cur_sets, cur = best
        steps.append(cur)
        sets.append(cur_sets)
    else:
        raise IterationCapError("intersection chain did not reach the whole object")
    return IntersectionResult(Filtration(x, tuple(steps)), tuple(sets))
