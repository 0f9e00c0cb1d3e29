"""Bounded cochain complexes of presented abelian groups.

Conventions: ``d^n : X^n -> X^{n+1}``; ``shift(x, n)^k = x^{n+k}`` with the
differential multiplied by ``(-1)^n``; the cone of ``f : X -> Y`` has
``cone^n = X^{n+1} + Y^n`` and differential ``[[-d_X, 0], [f, d_Y]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .core import (
    AmbientObject,
    Homomorphism,
    IntLattice,
    InvariantFactors,
    Matrix,
    Subobject,
    direct_sum,
    identity,
    image,
    join,
    kernel,
    lattice_quotient_type,
    leq,
    meet,
    preimage,
    quotient_type,
    solve,
    transpose,
    zeros,
)
from .errors import ContainmentError, DimensionError, PreconditionError
from .filtration import coordinate_filtration, coordinates_in, subquotient
from .hill import HillContext, candidate_vectors, ell, hull, image_member, induced_filtration

ZERO = AmbientObject.zero_object()


@dataclass(frozen=True)
class ChainComplex:
    """Components in degrees ``lo .. lo + len(components) - 1``."""

    lo: int
    components: tuple[AmbientObject, ...]
    differentials: tuple[Homomorphism, ...]

    def __post_init__(self):
        k = len(self.components)
        if len(self.differentials) != max(k - 1, 0):
            raise DimensionError(f"expected {max(k - 1, 0)} differentials")
        for i, d in enumerate(self.differentials):
            if d.source != self.components[i] or d.target != self.components[i + 1]:
                raise DimensionError(f"differential in degree {self.lo + i} has wrong ends")
        for i in range(len(self.differentials) - 1):
            if not self.differentials[i + 1].compose(self.differentials[i]).is_zero():
                raise PreconditionError(f"d o d != 0 starting in degree {self.lo + i}")

    @property
    def hi(self) -> int:
        return self.lo + len(self.components) - 1

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def component(self, n: int) -> AmbientObject:
        if self.lo <= n <= self.hi:
            return self.components[n - self.lo]
        return ZERO

    def d(self, n: int) -> Homomorphism:
        if self.lo <= n < self.hi:
            return self.differentials[n - self.lo]
        return Homomorphism.zero(self.component(n), self.component(n + 1))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    @classmethod
    def zero(cls) -> "ChainComplex":
        return cls(0, (), ())

    @classmethod
    def build(cls, lo: int, components: Sequence[AmbientObject], matrices: Sequence) -> "ChainComplex":
        diffs = tuple(
            Homomorphism.of(components[i], components[i + 1], matrices[i])
            for i in range(len(components) - 1)
        )
        return cls(lo, tuple(components), diffs)

    def __eq__(self, other):
        if not isinstance(other, ChainComplex):
            return NotImplemented
        return _trimmed(self) == _trimmed(other)

    def __hash__(self):
        return hash(_trimmed(self))


def _trimmed(x: ChainComplex):
    """Support with zero end components removed, for equality."""
    degs = [n for n in x.degrees if not x.component(n).is_zero()]
    if not degs:
        return ()
    lo, hi = degs[0], degs[-1]
    return (lo, tuple(x.component(n) for n in range(lo, hi + 1)),
            tuple(x.d(n).matrix for n in range(lo, hi)))


def stalk(obj: AmbientObject, n: int) -> ChainComplex:
    return ChainComplex(n, (obj,), ())


def disk(obj: AmbientObject, n: int) -> ChainComplex:
    """``obj --1--> obj`` in degrees ``n, n+1``."""
    return ChainComplex(n, (obj, obj), (Homomorphism.identity(obj),))


def generator_disks(objects: Sequence[AmbientObject], degrees: Iterable[int]) -> list[ChainComplex]:
    return [disk(g, n) for g in objects for n in degrees]


def _block(rows: int, cols: int, blocks) -> Matrix:
    """Assemble a block matrix from ``[[(r, c, M), ...]]`` placements."""
    out = [[0] * cols for _ in range(rows)]
    for r0, c0, m in blocks:
        for i, row in enumerate(m):
            for j, v in enumerate(row):
                out[r0 + i][c0 + j] += v
    return tuple(tuple(r) for r in out)


def complex_direct_sum(parts: Sequence[ChainComplex]) -> ChainComplex:
    parts = [p for p in parts if p.components]
    if not parts:
        return ChainComplex.zero()
    lo = min(p.lo for p in parts)
    hi = max(p.hi for p in parts)
    comps = [direct_sum([p.component(n) for p in parts]) for n in range(lo, hi + 1)]
    mats = []
    for n in range(lo, hi):
        placements = []
        r = c = 0
        for p in parts:
            placements.append((r, c, p.d(n).matrix))
            r += p.component(n + 1).rank
            c += p.component(n).rank
        mats.append(_block(comps[n + 1 - lo].rank, comps[n - lo].rank, placements))
    return ChainComplex.build(lo, comps, mats)


def shift(x: ChainComplex, n: int) -> ChainComplex:
    if not x.components:
        return x
    sign = -1 if n % 2 else 1
    diffs = tuple(
        Homomorphism(d.source, d.target, tuple(tuple(sign * v for v in r) for r in d.matrix))
        for d in x.differentials
    )
    return ChainComplex(x.lo - n, x.components, diffs)


def cycles(x: ChainComplex, n: int) -> Subobject:
    return preimage(x.d(n), x.component(n + 1).zero())


def boundaries(x: ChainComplex, n: int) -> Subobject:
    return image(x.d(n - 1), x.component(n - 1).full())


def homology(x: ChainComplex, n: int) -> InvariantFactors:
    return quotient_type(cycles(x, n), boundaries(x, n))


def is_acyclic(x: ChainComplex) -> bool:
    return all(homology(x, n).is_zero for n in x.degrees)


# ----------------------------------------------------------------------------
# Chain maps
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainMap:
    source: ChainComplex
    target: ChainComplex
    maps: Mapping[int, Homomorphism] = field(hash=False)

    def __post_init__(self):
        for n, f in self.maps.items():
            if f.source != self.source.component(n) or f.target != self.target.component(n):
                raise DimensionError(f"chain map component in degree {n} has wrong ends")
        for n in self.degrees():
            lhs = self.at(n + 1).compose(self.source.d(n))
            rhs = self.target.d(n).compose(self.at(n))
            if not lhs.same_map(rhs):
                raise PreconditionError(f"chain map does not commute in degree {n}")

    def degrees(self) -> range:
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        return range(lo, hi + 1)

    def at(self, n: int) -> Homomorphism:
        f = self.maps.get(n)
        if f is None:
            return Homomorphism.zero(self.source.component(n), self.target.component(n))
        return f

    @classmethod
    def build(cls, source: ChainComplex, target: ChainComplex, matrices: Mapping[int, object]) -> "ChainMap":
        maps = {n: Homomorphism.of(source.component(n), target.component(n), m)
                for n, m in matrices.items()}
        return cls(source, target, maps)

    @classmethod
    def identity(cls, x: ChainComplex) -> "ChainMap":
        return cls(x, x, {n: Homomorphism.identity(x.component(n)) for n in x.degrees})

    @classmethod
    def zero(cls, source: ChainComplex, target: ChainComplex) -> "ChainMap":
        return cls(source, target, {})

    def compose(self, first: "ChainMap") -> "ChainMap":
        return ChainMap(first.source, self.target,
                        {n: self.at(n).compose(first.at(n)) for n in first.degrees()})

    def same_map(self, other: "ChainMap") -> bool:
        degs = set(self.degrees()) | set(other.degrees())
        return all(self.at(n).same_map(other.at(n)) for n in degs)


# ----------------------------------------------------------------------------
# Integer systems whose unknowns are homomorphisms
# ----------------------------------------------------------------------------


class MapSystem:
    """Unknown homomorphisms between presented groups subject to linear
    equations that hold modulo target relations.

    Every block is automatically constrained to respect the source relations,
    so solutions are honest group homomorphisms.
    """

    def __init__(self):
        self.blocks: dict = {}  # key -> (source, target, offset)
        self.nvars = 0
        self.rows: list[dict[int, int]] = []
        self.rhs: list[int] = []
        self.main_vars = 0

    def add_block(self, key, source: AmbientObject, target: AmbientObject):
        if key in self.blocks or source.rank == 0 or target.rank == 0:
            return
        if self.rows:
            raise RuntimeError("add all blocks before equations")
        self.blocks[key] = (source, target, self.nvars)
        self.nvars += source.rank * target.rank
        self.main_vars = self.nvars

    def finish_blocks(self):
        for key, (src, tgt, _) in list(self.blocks.items()):
            for r in src.relations.basis:
                self.add_equation([(None, key, [[x] for x in r])], tgt, shape=(tgt.rank, 1))

    def _var(self, key, i, j):
        src, tgt, off = self.blocks[key]
        return off + i * src.rank + j

    def add_equation(self, terms, relations_of: AmbientObject, const: Optional[Matrix] = None,
                     shape=None):
        """Require ``sum(L @ H_key @ R) + const`` to have every column in the
        relation lattice of ``relations_of``.

        ``terms`` holds ``(L, key, R)`` with ``L = None`` meaning identity;
        terms whose block does not exist (a zero group at one end) vanish.
        """
        p, q = shape
        if p == 0 or q == 0:
            return
        acc = [[{} for _ in range(q)] for _ in range(p)]
        for left, key, right in terms:
            if key not in self.blocks:
                continue
            src, tgt, _ = self.blocks[key]
            if left is None:
                left = identity(tgt.rank)
            for a in range(p):
                for i in range(tgt.rank):
                    lai = left[a][i]
                    if not lai:
                        continue
                    for j in range(src.rank):
                        for b in range(q):
                            c = lai * right[j][b]
                            if c:
                                v = self._var(key, i, j)
                                acc[a][b][v] = acc[a][b].get(v, 0) + c
        rel = relations_of.relations.basis
        for b in range(q):
            slack0 = self.nvars
            self.nvars += len(rel)
            for a in range(p):
                row = dict(acc[a][b])
                for s, r in enumerate(rel):
                    if r[a]:
                        row[slack0 + s] = -r[a]
                self.rows.append(row)
                self.rhs.append(-(const[a][b] if const is not None else 0))

    def _dense(self) -> Matrix:
        n = self.nvars
        return tuple(tuple(row.get(j, 0) for j in range(n)) for row in self.rows)

    def solve(self) -> Optional[tuple[int, ...]]:
        if not self.rows:
            return (0,) * self.nvars
        return solve(self._dense(), tuple(self.rhs), ncols=self.nvars)

    def solution_lattice(self) -> list[tuple[int, ...]]:
        """Generators of the homogeneous solutions projected to the block
        variables."""
        n = self.nvars
        if n == 0:
            return []
        if not self.rows:
            return [tuple(int(i == j) for j in range(self.main_vars)) for i in range(self.main_vars)]
        cols = transpose(self._dense(), n)
        return [v[: self.main_vars] for v in kernel(cols, len(self.rows))]

    def extract(self, vec: Sequence[int], key) -> Homomorphism:
        src, tgt, off = self.blocks[key]
        q = src.rank
        rows = [tuple(vec[off + i * q + j] for j in range(q)) for i in range(tgt.rank)]
        return Homomorphism(src, tgt, tuple(rows))

    def block_matrix(self, vec: Sequence[int], key) -> Matrix:
        return self.extract(vec, key).matrix


# ----------------------------------------------------------------------------
# Cones, homotopies, Ext
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ShortExactSequence:
    left: ChainMap  # X -> Y
    right: ChainMap  # Y -> Z

    def check_exact(self) -> None:
        if self.left.target != self.right.source:
            raise PreconditionError("maps are not composable")
        for n in set(self.left.degrees()) | set(self.right.degrees()):
            i, p = self.left.at(n), self.right.at(n)
            if not i.is_injective():
                raise PreconditionError(f"left map is not injective in degree {n}")
            if not p.is_surjective():
                raise PreconditionError(f"right map is not surjective in degree {n}")
            if image(i, i.source.full()) != p.kernel():
                raise PreconditionError(f"sequence is not exact in the middle in degree {n}")


@dataclass(frozen=True)
class Cone:
    complex: ChainComplex
    inclusion: ChainMap  # target -> cone
    projection: ChainMap  # cone -> shift(source, 1)

    @property
    def sequence(self) -> ShortExactSequence:
        return ShortExactSequence(self.inclusion, self.projection)


def cone(f: ChainMap) -> Cone:
    s, t = f.source, f.target
    s1 = shift(s, 1)
    if not s.components and not t.components:
        z = ChainComplex.zero()
        return Cone(z, ChainMap.zero(t, z), ChainMap.zero(z, s1))
    ends = ([(s.lo - 1, s.hi - 1)] if s.components else []) + ([(t.lo, t.hi)] if t.components else [])
    lo = min(e[0] for e in ends)
    hi = max(e[1] for e in ends)
    comps = [direct_sum([s.component(n + 1), t.component(n)]) for n in range(lo, hi + 1)]
    mats = []
    for n in range(lo, hi):
        a, b = s.component(n + 1).rank, t.component(n).rank
        a2, b2 = s.component(n + 2).rank, t.component(n + 1).rank
        neg = tuple(tuple(-v for v in r) for r in s.d(n + 1).matrix)
        mats.append(_block(a2 + b2, a + b, [(0, 0, neg), (a2, 0, f.at(n + 1).matrix),
                                            (a2, a, t.d(n).matrix)]))
    c = ChainComplex.build(lo, comps, mats)
    inc, proj = {}, {}
    for n in range(lo, hi + 1):
        a, b = s.component(n + 1).rank, t.component(n).rank
        inc[n] = _block(a + b, b, [(a, 0, identity(b))])
        proj[n] = _block(a, a + b, [(0, 0, identity(a))])
    return Cone(c, ChainMap.build(t, c, inc), ChainMap.build(c, s1, proj))


@dataclass(frozen=True)
class Homotopy:
    """``h^n : source^n -> target^{n-1}`` with ``f = d h + h d``."""

    f: ChainMap
    h: Mapping[int, Homomorphism] = field(hash=False)

    def at(self, n: int) -> Homomorphism:
        hn = self.h.get(n)
        if hn is None:
            return Homomorphism.zero(self.f.source.component(n), self.f.target.component(n - 1))
        return hn

    def verify(self) -> bool:
        s, t = self.f.source, self.f.target
        for n in self.f.degrees():
            dh = t.d(n - 1).compose(self.at(n))
            hd = self.at(n + 1).compose(s.d(n))
            if not (dh + hd).same_map(self.f.at(n)):
                return False
        return True


def _degree_span(*xs: ChainComplex) -> range:
    live = [x for x in xs if x.components]
    if not live:
        return range(0)
    return range(min(x.lo for x in live) - 1, max(x.hi for x in live) + 2)


def null_homotopy(f: ChainMap) -> Optional[Homotopy]:
    s, t = f.source, f.target
    sys_ = MapSystem()
    degs = _degree_span(s, t)
    for n in degs:
        sys_.add_block(("h", n), s.component(n), t.component(n - 1))
    sys_.finish_blocks()
    for n in degs:
        p, q = t.component(n).rank, s.component(n).rank
        neg_f = tuple(tuple(-v for v in r) for r in f.at(n).matrix)
        sys_.add_equation(
            [(t.d(n - 1).matrix, ("h", n), identity(q)),
             (None, ("h", n + 1), s.d(n).matrix)],
            t.component(n), const=neg_f, shape=(p, q),
        )
    sol = sys_.solve()
    if sol is None:
        return None
    hs = {n: sys_.extract(sol, ("h", n)) for n in degs if ("h", n) in sys_.blocks}
    out = Homotopy(f, hs)
    assert out.verify()
    return out


def _chain_map_system(src: ChainComplex, tgt: ChainComplex, key="g") -> MapSystem:
    sys_ = MapSystem()
    degs = _degree_span(src, tgt)
    for n in degs:
        sys_.add_block((key, n), src.component(n), tgt.component(n))
    sys_.finish_blocks()
    for n in degs:
        p, q = tgt.component(n + 1).rank, src.component(n).rank
        neg_d = tuple(tuple(-v for v in r) for r in tgt.d(n).matrix)
        sys_.add_equation(
            [(None, (key, n + 1), src.d(n).matrix), (neg_d, (key, n), identity(q))],
            tgt.component(n + 1), shape=(p, q),
        )
    return sys_


def chain_map_generators(src: ChainComplex, tgt: ChainComplex) -> list[ChainMap]:
    """Generators of the group of chain maps ``src -> tgt`` (as matrices)."""
    sys_ = _chain_map_system(src, tgt)
    out = []
    for v in sys_.solution_lattice():
        maps = {n: sys_.extract(v, k) for k in sys_.blocks for n in [k[1]]}
        out.append(ChainMap(src, tgt, maps))
    return out


def ext1_cs(z: ChainComplex, x: ChainComplex) -> InvariantFactors:
    """Chain maps ``shift(z, -1) -> x`` modulo null-homotopic ones."""
    w = shift(z, -1)
    cm = _chain_map_system(w, x)
    g_vars = cm.main_vars
    if g_vars == 0:
        return InvariantFactors()
    valid = IntLattice.span(cm.solution_lattice(), g_vars)

    def g_vector(mats: Mapping[int, Matrix]) -> tuple[int, ...]:
        vec = [0] * g_vars
        for (_, n), (src, tgt, off) in cm.blocks.items():
            m = mats.get(n)
            if m is None:
                continue
            for i in range(tgt.rank):
                for j in range(src.rank):
                    vec[off + i * src.rank + j] = m[i][j]
        return tuple(vec)

    hs = MapSystem()
    degs = _degree_span(w, x)
    for n in degs:
        hs.add_block(("h", n), w.component(n), x.component(n - 1))
    hs.finish_blocks()
    trivial = []
    for hv in hs.solution_lattice():
        hmap = {n: hs.extract(hv, ("h", n)) for n in degs if ("h", n) in hs.blocks}

        def hat(n):
            return hmap.get(n) or Homomorphism.zero(w.component(n), x.component(n - 1))

        mats = {}
        for n in degs:
            if w.component(n).rank and x.component(n).rank:
                m = x.d(n - 1).compose(hat(n)) + hat(n + 1).compose(w.d(n))
                mats[n] = m.matrix
        trivial.append(g_vector(mats))
    # maps whose columns are relations are zero as group maps
    for (_, n), (src, tgt, off) in cm.blocks.items():
        for j in range(src.rank):
            for r in tgt.relations.basis:
                vec = [0] * g_vars
                for i in range(tgt.rank):
                    vec[off + i * src.rank + j] = r[i]
                trivial.append(tuple(vec))
    null = IntLattice.span(trivial, g_vars)
    if not valid.contains(null):
        raise ContainmentError("null-homotopic maps escaped the chain maps")
    return lattice_quotient_type(valid, null)


def retraction(seq: ShortExactSequence, as_complexes: bool = False) -> Optional[dict[int, Homomorphism]]:
    """A degree-wise retraction ``r`` of the left map (``r i = 1``), or one that
    is also a chain map when ``as_complexes``; None when none exists."""
    seq.check_exact()
    i_map = seq.left
    x, y = i_map.source, i_map.target
    sys_ = MapSystem()
    degs = _degree_span(x, y)
    for n in degs:
        sys_.add_block(("r", n), y.component(n), x.component(n))
    sys_.finish_blocks()
    for n in degs:
        p = x.component(n).rank
        neg_id = tuple(tuple(-v for v in r) for r in identity(p))
        sys_.add_equation([(None, ("r", n), i_map.at(n).matrix)], x.component(n),
                          const=neg_id, shape=(p, p))
    if as_complexes:
        for n in degs:
            p, q = x.component(n + 1).rank, y.component(n).rank
            neg_d = tuple(tuple(-v for v in r) for r in x.d(n).matrix)
            sys_.add_equation([(None, ("r", n + 1), y.d(n).matrix), (neg_d, ("r", n), identity(q))],
                              x.component(n + 1), shape=(p, q))
    sol = sys_.solve()
    if sol is None:
        return None
    return {n: sys_.extract(sol, ("r", n)) for n in degs if ("r", n) in sys_.blocks}


def is_cs_split(seq: ShortExactSequence) -> bool:
    return retraction(seq) is not None


def is_split_as_complexes(seq: ShortExactSequence) -> bool:
    return retraction(seq, as_complexes=True) is not None


# ----------------------------------------------------------------------------
# Subcomplexes and filtrations of complexes
# ----------------------------------------------------------------------------


def is_subcomplex(x: ChainComplex, parts: Mapping[int, Subobject]) -> bool:
    for n in x.degrees:
        img = image(x.d(n), parts[n])
        nxt = parts.get(n + 1, x.component(n + 1).zero())
        if not leq(img, nxt):
            return False
    return True


def subquotient_complex(x: ChainComplex, upper: Mapping[int, Subobject],
                        lower: Optional[Mapping[int, Subobject]] = None) -> ChainComplex:
    """The complex ``upper/lower`` presented on the canonical bases of the
    ``upper`` lattices; ``lower`` defaults to zero."""
    if not x.components:
        return ChainComplex.zero()
    comps = []
    for n in x.degrees:
        lo_lat = (lower[n] if lower is not None else x.component(n).zero()).lattice
        obj, _ = subquotient(upper[n].lattice, lo_lat)
        comps.append(obj)
    mats = []
    for n in range(x.lo, x.hi):
        up, nxt = upper[n].lattice, upper[n + 1].lattice
        imgs = [x.d(n).apply(b) for b in up.basis]
        coords = coordinates_in(nxt, imgs)
        mats.append(transpose(coords, nxt.rank) if coords else zeros(nxt.rank, 0))
    return ChainComplex.build(x.lo, comps, mats)


@dataclass(frozen=True)
class ComplexFiltration:
    complex: ChainComplex
    steps: tuple  # steps[a][n - lo] is the degree-n part of X_a
    closed_sets: tuple = ()  # closed_sets[a][n - lo] certifying membership in H_n
    witness_degrees: tuple = ()  # degree chosen to start each step

    @property
    def length(self) -> int:
        return len(self.steps) - 1

    def part(self, a: int) -> dict[int, Subobject]:
        return {n: self.steps[a][n - self.complex.lo] for n in self.complex.degrees}

    def factor(self, a: int) -> ChainComplex:
        return subquotient_complex(self.complex, self.part(a + 1), self.part(a))

    def step_complex(self, a: int) -> ChainComplex:
        return subquotient_complex(self.complex, self.part(a))


def validate_complex_filtration(cf: ComplexFiltration) -> dict[str, bool]:
    """Independent checks: zero start, full end, monotone, every step a
    subcomplex."""
    x = cf.complex
    checks = {}
    checks["starts_at_zero"] = bool(cf.steps) and all(s.is_zero() for s in cf.steps[0])
    checks["ends_at_whole"] = bool(cf.steps) and all(s.is_full() for s in cf.steps[-1])
    checks["monotone"] = all(
        leq(cf.steps[a][i], cf.steps[a + 1][i])
        for a in range(cf.length) for i in range(len(x.components))
    )
    checks["subcomplexes"] = all(is_subcomplex(x, cf.part(a)) for a in range(len(cf.steps)))
    checks["strict"] = all(cf.steps[a] != cf.steps[a + 1] for a in range(cf.length))
    return checks


def _size(parts_new, parts_old) -> tuple[int, int]:
    free, tors = 0, 1
    for new, old in zip(parts_new, parts_old):
        k = quotient_type(new, old).size_key()
        free += k[0]
        tors *= k[1]
    return (free, tors)


def _component_contexts(x: ChainComplex, ctxs) -> dict[int, Optional[HillContext]]:
    out = {}
    for n in x.degrees:
        c = x.component(n)
        given = (ctxs or {}).get(n)
        if given is not None:
            if given.ambient != c:
                raise PreconditionError(f"context for degree {n} filters a different object")
            out[n] = given
        else:
            out[n] = HillContext(coordinate_filtration(c)) if c.rank else None
    return out


def cpx_filtration(x: ChainComplex, ctxs: Optional[Mapping[int, HillContext]] = None) -> ComplexFiltration:
    """Filter ``x`` by subcomplexes whose components lie in the image lattices
    of the component contexts.

    Each step enlarges one degree ``n`` by the hull of a single candidate
    vector and pushes the differential image up through hulls in higher
    degrees.  Among all candidates the smallest step wins; ties go to the
    lowest degree, then to the earliest candidate.
    """
    if not x.components:
        return ComplexFiltration(x, ((),), ((),), ())
    cx = _component_contexts(x, ctxs)
    lo, hi = x.lo, x.hi
    degs = list(x.degrees)
    cur = {n: frozenset() for n in degs}

    def parts(sets):
        return tuple(ell(cx[n], sets[n]) if cx[n] else x.component(n).zero() for n in degs)

    steps = [parts(cur)]
    sets_log = [tuple(cur[n] for n in degs)]
    start_log = []
    cap = max((c.iteration_cap for c in cx.values() if c), default=1000)
    for _ in range(cap):
        now = steps[-1]
        if all(s.is_full() for s in now):
            break
        best = None
        for n in degs:
            c = cx[n]
            if c is None or now[n - lo].is_full():
                continue
            for k, w in enumerate(candidate_vectors([c])):
                if w in now[n - lo].lattice:
                    continue
                new = dict(cur)
                new[n] = cur[n] | hull(c, c.ambient.sub([w]))
                for m in range(n + 1, hi + 1):
                    if cx[m] is None:
                        break
                    pushed = image(x.d(m - 1), ell(cx[m - 1], new[m - 1]))
                    if leq(pushed, ell(cx[m], new[m])):
                        break
                    new[m] = new[m] | hull(cx[m], pushed)
                cand = parts(new)
                key = (_size(cand, now), n, k)
                if best is None or key < best[0]:
                    best = (key, new, cand)
        if best is None:
            raise PreconditionError("no candidate enlarges the current step")
        (_, n, _), cur, cand = best
        steps.append(cand)
        sets_log.append(tuple(cur[m] for m in degs))
        start_log.append(n)
    else:
        raise PreconditionError("complex filtration did not finish within the iteration cap")
    return ComplexFiltration(x, tuple(steps), tuple(sets_log), tuple(start_log))


def cpx_certificate(cf: ComplexFiltration, ctxs: Optional[Mapping[int, HillContext]] = None) -> dict:
    """Re-derive every claim about a ``cpx_filtration`` result.

    Returns the check table and, per step and degree, the factor types of the
    component quotient as filtered by the context.
    """
    x = cf.complex
    checks = validate_complex_filtration(cf)
    if not x.components:
        return {"checks": checks, "factor_types": []}
    cx = _component_contexts(x, ctxs)
    member = True
    types = []
    for a, step in enumerate(cf.steps):
        for n in x.degrees:
            c = cx[n]
            if c is not None and image_member(c, step[n - x.lo]) is None:
                member = False
    for a in range(cf.length):
        per = {}
        for n in x.degrees:
            c = cx[n]
            if c is None:
                continue
            s = image_member(c, cf.steps[a][n - x.lo])
            t = image_member(c, cf.steps[a + 1][n - x.lo])
            if s is None or t is None or not s <= t:
                member = False
                continue
            ind = induced_filtration(c, s, t)
            per[n] = [quotient_type(ind.filtration.steps[j + 1], ind.filtration.steps[j])
                      for j in range(ind.filtration.length)]
        types.append(per)
    checks["components_in_image_lattices"] = member
    base = {n: sorted(quotient_type(c.steps[i + 1], c.steps[i]) for i in range(c.sigma))
            for n, c in cx.items() if c is not None}
    checks["component_factors_from_S"] = all(
        set(ts) <= set(base[n]) for per in types for n, ts in per.items()
    )
    return {"checks": checks, "factor_types": types}


# ----------------------------------------------------------------------------
# Acyclic complexes with filtered cycles
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class CycleObject:
    """``Z^n(x)`` presented on the canonical basis of its lattice."""

    degree: int
    obj: AmbientObject
    embedding: Matrix
    cycles: Subobject

    def push(self, s: Subobject) -> Subobject:
        n = self.cycles.ambient.rank
        vecs = [tuple(sum(e * v for e, v in zip(self.embedding[i], b)) for i in range(n))
                for b in s.lattice.basis]
        return self.cycles.ambient.sub(vecs)

    def pull(self, s: Subobject) -> Subobject:
        return self.obj.sub(coordinates_in(self.cycles.lattice, s.lattice.basis))


def cycle_object(x: ChainComplex, n: int) -> CycleObject:
    z = cycles(x, n)
    obj, emb = subquotient(z.lattice, x.component(n).relations)
    return CycleObject(n, obj, emb, z)


def tilde_filtration(x: ChainComplex, ctxs: Optional[Mapping[int, HillContext]] = None) -> ComplexFiltration:
    """Filter an acyclic ``x`` by acyclic subcomplexes whose cycle objects lie
    in the image lattices of the cycle contexts.

    A step starts from one cycle in a chosen degree ``n``, keeps the degrees
    above ``n`` fixed, and walks down: lift the new cycles of degree ``m+1``
    through the differential, intersect with the cycles of degree ``m`` and
    close up with a hull.  The smallest step wins; ties go to the highest
    degree, then to the earliest candidate.
    """
    if not is_acyclic(x):
        raise PreconditionError("tilde_filtration needs an acyclic complex")
    if not x.components:
        return ComplexFiltration(x, ((),), ((),), ())
    degs = list(x.degrees)
    lo = x.lo
    zobj = {n: cycle_object(x, n) for n in degs}
    cx: dict[int, Optional[HillContext]] = {}
    for n in degs:
        given = (ctxs or {}).get(n)
        if given is not None:
            if given.ambient != zobj[n].obj:
                raise PreconditionError(f"cycle context for degree {n} filters a different object")
            cx[n] = given
        else:
            cx[n] = HillContext(coordinate_filtration(zobj[n].obj)) if zobj[n].obj.rank else None

    def cyc(n, s):
        return zobj[n].push(ell(cx[n], s)) if cx[n] else x.component(n).zero()

    cur_x = {n: x.component(n).zero() for n in degs}
    cur_s = {n: frozenset() for n in degs}
    steps = [tuple(cur_x[n] for n in degs)]
    sets_log = [tuple(cur_s[n] for n in degs)]
    start_log = []
    cap = max((c.iteration_cap for c in cx.values() if c), default=1000)
    for _ in range(cap):
        if all(cur_x[n].is_full() for n in degs):
            break
        best = None
        for n in degs:
            c = cx[n]
            if c is None:
                continue
            zn = cyc(n, cur_s[n])
            if zn == zobj[n].cycles:
                continue
            for k, wc in enumerate(candidate_vectors([c])):
                w = zobj[n].push(c.ambient.sub([wc]))
                if leq(w, zn):
                    continue
                new_x, new_s = dict(cur_x), dict(cur_s)
                gen = w
                for m in range(n, lo - 1, -1):
                    if m < n:
                        prev = cyc(m + 1, new_s[m + 1])
                        if prev == cyc(m + 1, cur_s[m + 1]):
                            break
                        gen = _lift(x, m, prev)
                    k_sub = meet(join(cur_x[m], gen), zobj[m].cycles)
                    if cx[m] is None:
                        new_x[m] = join(cur_x[m], gen)
                        continue
                    new_s[m] = cur_s[m] | hull(cx[m], zobj[m].pull(k_sub))
                    new_x[m] = join(join(cur_x[m], gen), cyc(m, new_s[m]))
                cand = tuple(new_x[d] for d in degs)
                key = (_size(cand, steps[-1]), -n, k)
                if best is None or key < best[0]:
                    best = (key, new_x, new_s, cand)
        if best is None:
            raise PreconditionError("no cycle enlarges the current step")
        (_, negn, _), cur_x, cur_s, cand = best
        steps.append(cand)
        sets_log.append(tuple(cur_s[d] for d in degs))
        start_log.append(-negn)
    else:
        raise PreconditionError("tilde filtration did not finish within the iteration cap")
    return ComplexFiltration(x, tuple(steps), tuple(sets_log), tuple(start_log))


def _lift(x: ChainComplex, m: int, target: Subobject) -> Subobject:
    """A subobject ``W`` of ``x^m`` with ``d(W) + relations == target`` for a
    ``target`` inside the boundaries."""
    d = x.d(m)
    src = x.component(m)
    rel = x.component(m + 1).relations.basis
    mat_cols = [d.apply(tuple(int(i == j) for i in range(src.rank))) for j in range(src.rank)]
    cols = mat_cols + list(rel)
    a = transpose(cols, x.component(m + 1).rank)
    lifts = []
    for z in target.generators:
        sol = solve(a, z, ncols=len(cols))
        if sol is None:
            raise PreconditionError(f"cycle in degree {m + 1} is not a boundary")
        lifts.append(sol[: src.rank])
    return src.sub(lifts)


def tilde_certificate(cf: ComplexFiltration, ctxs: Optional[Mapping[int, HillContext]] = None) -> dict:
    """Re-derive the claims about a ``tilde_filtration`` result: every step
    and every factor acyclic, and every cycle object of a step in the image
    lattice of its cycle context."""
    x = cf.complex
    checks = validate_complex_filtration(cf)
    if not x.components:
        checks.update(steps_acyclic=True, factors_acyclic=True, cycles_in_image_lattices=True)
        return {"checks": checks, "cycle_factor_types": []}
    checks["steps_acyclic"] = all(is_acyclic(cf.step_complex(a)) for a in range(len(cf.steps)))
    checks["factors_acyclic"] = all(is_acyclic(cf.factor(a)) for a in range(cf.length))
    member = True
    types = []
    zobj = {n: cycle_object(x, n) for n in x.degrees}
    cx = {}
    for n in x.degrees:
        given = (ctxs or {}).get(n)
        cx[n] = given if given is not None else (
            HillContext(coordinate_filtration(zobj[n].obj)) if zobj[n].obj.rank else None)
    for a in range(len(cf.steps)):
        per = {}
        for n in x.degrees:
            c = cx[n]
            if c is None:
                continue
            zc = meet(cf.steps[a][n - x.lo], zobj[n].cycles)
            if image_member(c, zobj[n].pull(zc)) is None:
                member = False
            if a:
                zp = meet(cf.steps[a - 1][n - x.lo], zobj[n].cycles)
                per[n] = quotient_type(zc, zp)
        if a:
            types.append(per)
    checks["cycles_in_image_lattices"] = member
    return {"checks": checks, "cycle_factor_types": types}
