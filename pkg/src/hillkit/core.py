"""Exact integer linear algebra and subobject lattices of finitely generated
abelian groups.

A group is presented as ``Z^n / R`` for a relation lattice ``R``.  Its
subobjects are the lattices ``L`` with ``R <= L <= Z^n``; every lattice is
stored in a canonical Hermite normal form, so equal subobjects compare equal
syntactically.

Conventions
-----------
* Matrices are tuples of row tuples of Python ints.
* A generator matrix carries its generators as *columns*.
* A lattice basis is stored as a tuple of vectors (the columns of the
  canonical generator matrix).  The vectors are in echelon form: the leading
  (first nonzero) coordinates strictly increase, each leading entry is
  positive, and every other basis vector has its entry at that coordinate
  reduced into ``[0, leading entry)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .errors import AmbientMismatch, ContainmentError, DimensionError

Vector = tuple[int, ...]
Matrix = tuple[tuple[int, ...], ...]


# ----------------------------------------------------------------------------
# Matrix helpers
# ----------------------------------------------------------------------------


def as_matrix(rows: Iterable[Iterable[int]]) -> Matrix:
    m = tuple(tuple(int(x) for x in row) for row in rows)
    if m and len({len(r) for r in m}) != 1:
        raise DimensionError("ragged matrix")
    return m


def transpose(m: Sequence[Sequence[int]], nrows: Optional[int] = None) -> Matrix:
    """Transpose ``m``; ``nrows`` gives the row count of the result when ``m``
    has no rows."""
    if not m:
        return tuple(() for _ in range(nrows or 0))
    return tuple(zip(*m))


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], inner: int, ncols: int) -> Matrix:
    if len(b) != inner:
        raise DimensionError(f"cannot multiply: inner sizes {inner} and {len(b)}")
    bt = transpose(b, ncols)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def zeros(nrows: int, ncols: int) -> Matrix:
    return tuple((0,) * ncols for _ in range(nrows))


def apply(m: Sequence[Sequence[int]], v: Sequence[int]) -> Vector:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in m)


def columns(m: Sequence[Sequence[int]], ncols: int) -> list[Vector]:
    return list(transpose(m, ncols))


def unit(n: int, i: int) -> Vector:
    return tuple(int(j == i) for j in range(n))


# ----------------------------------------------------------------------------
# Echelon forms
# ----------------------------------------------------------------------------


def _sub_row(rows, i, r, q):
    ri, rr = rows[i], rows[r]
    for k in range(len(ri)):
        ri[k] -= q * rr[k]


def _echelon(vectors: Sequence[Sequence[int]], ncols: int, track: bool = False):
    """Row-reduce ``vectors`` to Hermite normal form by unimodular row operations.

    Returns ``(H, U, pivots)`` where ``H`` has the nonzero echelon rows first,
    ``pivots[i]`` is the leading column of row ``i`` and (when ``track``)
    ``U @ vectors == H`` with ``U`` unimodular.
    """
    m = len(vectors)
    a = [list(v) for v in vectors]
    u = [[int(i == j) for j in range(m)] for i in range(m)] if track else None
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == m:
            break
        found = False
        while True:
            best = None
            for i in range(r, m):
                x = a[i][c]
                if x and (best is None or abs(x) < abs(a[best][c])):
                    best = i
            if best is None:
                break
            found = True
            if best != r:
                a[r], a[best] = a[best], a[r]
                if track:
                    u[r], u[best] = u[best], u[r]
            p = a[r][c]
            clean = True
            for i in range(r + 1, m):
                x = a[i][c]
                if x:
                    q = x // p
                    _sub_row(a, i, r, q)
                    if track:
                        _sub_row(u, i, r, q)
                    if a[i][c]:
                        clean = False
            if clean:
                break
        if not found:
            continue
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
            if track:
                u[r] = [-x for x in u[r]]
        p = a[r][c]
        for i in range(r):
            q = a[i][c] // p
            if q:
                _sub_row(a, i, r, q)
                if track:
                    _sub_row(u, i, r, q)
        pivots.append(c)
        r += 1
    return a, u, pivots


def _leading(v: Sequence[int]) -> int:
    for i, x in enumerate(v):
        if x:
            return i
    return -1


def kernel(vectors: Sequence[Sequence[int]], ncols: int) -> list[Vector]:
    """Basis (canonical form) of the integer relations ``y`` with
    ``sum(y[i] * vectors[i]) == 0``."""
    m = len(vectors)
    if m == 0:
        return []
    a, u, pivots = _echelon(vectors, ncols, track=True)
    rels = [u[i] for i in range(len(pivots), m)]
    return list(_hnf_vectors(rels, m))


def _hnf_vectors(vectors: Sequence[Sequence[int]], n: int) -> tuple[Vector, ...]:
    vs = [v for v in vectors if any(v)]
    if not vs:
        return ()
    a, _, pivots = _echelon(vs, n)
    return tuple(tuple(a[i]) for i in range(len(pivots)))


# ----------------------------------------------------------------------------
# Lattices
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class IntLattice:
    """A sublattice of ``Z^n`` in canonical form."""

    ambient_rank: int
    basis: tuple[Vector, ...]

    @classmethod
    def span(cls, vectors: Iterable[Sequence[int]], n: int) -> "IntLattice":
        vs = []
        for v in vectors:
            v = tuple(int(x) for x in v)
            if len(v) != n:
                raise DimensionError(f"vector of length {len(v)} in Z^{n}")
            vs.append(v)
        return cls(n, _hnf_vectors(vs, n))

    @classmethod
    def zero(cls, n: int) -> "IntLattice":
        return cls(n, ())

    @classmethod
    def full(cls, n: int) -> "IntLattice":
        return cls(n, identity(n))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(_leading(b) for b in self.basis)

    def generator_matrix(self) -> Matrix:
        """The canonical basis as an ``n x rank`` matrix of columns."""
        return transpose(self.basis, self.ambient_rank)

    def coordinates(self, v: Sequence[int]) -> Optional[Vector]:
        """Coefficients of ``v`` in the canonical basis, or None if ``v`` is not
        in the lattice."""
        if len(v) != self.ambient_rank:
            raise DimensionError(f"vector of length {len(v)} in Z^{self.ambient_rank}")
        r = list(v)
        out = []
        for b in self.basis:
            c = _leading(b)
            q, rem = divmod(r[c], b[c])
            if rem:
                return None
            if q:
                for k in range(c, len(r)):
                    r[k] -= q * b[k]
            out.append(q)
        if any(r):
            return None
        return tuple(out)

    def __contains__(self, v) -> bool:
        return self.coordinates(v) is not None

    def contains(self, other: "IntLattice") -> bool:
        return lattice_leq(other, self)


def hnf(generators: Sequence[Sequence[int]], ambient_rank: int) -> IntLattice:
    """Canonical form of the lattice spanned by the columns of ``generators``
    (an ``ambient_rank x k`` matrix)."""
    if len(generators) != ambient_rank:
        raise DimensionError(
            f"generator matrix has {len(generators)} rows, expected {ambient_rank}"
        )
    if ambient_rank == 0:
        return IntLattice.zero(0)
    widths = {len(r) for r in generators}
    if len(widths) != 1:
        raise DimensionError("ragged generator matrix")
    return IntLattice.span(transpose(generators), ambient_rank)


@lru_cache(maxsize=65536)
def lattice_join(a: IntLattice, b: IntLattice) -> IntLattice:
    if a.ambient_rank != b.ambient_rank:
        raise DimensionError("lattices live in different ambient ranks")
    if not a.basis:
        return b
    if not b.basis:
        return a
    return IntLattice(a.ambient_rank, _hnf_vectors(a.basis + b.basis, a.ambient_rank))


@lru_cache(maxsize=65536)
def lattice_meet(a: IntLattice, b: IntLattice) -> IntLattice:
    if a.ambient_rank != b.ambient_rank:
        raise DimensionError("lattices live in different ambient ranks")
    n = a.ambient_rank
    if not a.basis or not b.basis:
        return IntLattice.zero(n)
    if lattice_leq(a, b):
        return a
    if lattice_leq(b, a):
        return b
    k = len(a.basis)
    rows = list(a.basis) + [tuple(-x for x in v) for v in b.basis]
    gens = []
    for y in kernel(rows, n):
        gens.append(tuple(sum(y[i] * a.basis[i][j] for i in range(k)) for j in range(n)))
    return IntLattice(n, _hnf_vectors(gens, n))


@lru_cache(maxsize=65536)
def lattice_leq(a: IntLattice, b: IntLattice) -> bool:
    if a.ambient_rank != b.ambient_rank:
        raise DimensionError("lattices live in different ambient ranks")
    return all(b.coordinates(v) is not None for v in a.basis)


# ----------------------------------------------------------------------------
# Solving
# ----------------------------------------------------------------------------


def solve(a: Sequence[Sequence[int]], b: Sequence[int], ncols: Optional[int] = None) -> Optional[Vector]:
    """Return an integer ``x`` with ``a @ x == b`` or None when none exists.

    ``a`` is an ``m x k`` matrix; pass ``ncols`` when ``m == 0``.  The answer
    is the deterministic back-substitution through the echelon form of the
    columns of ``a``.
    """
    m = len(a)
    if len(b) != m:
        raise DimensionError(f"right-hand side has length {len(b)}, expected {m}")
    if m:
        k = len(a[0])
        if ncols is not None and ncols != k:
            raise DimensionError("ncols disagrees with matrix width")
    else:
        k = ncols or 0
    if k == 0:
        return () if not any(b) else None
    cols = transpose(a, k) if m else tuple(() for _ in range(k))
    h, u, pivots = _echelon(cols, m, track=True)
    r = list(b)
    x = [0] * k
    for i, c in enumerate(pivots):
        q, rem = divmod(r[c], h[i][c])
        if rem:
            return None
        if q:
            for j in range(c, m):
                r[j] -= q * h[i][j]
            for j in range(k):
                x[j] += q * u[i][j]
    if any(r):
        return None
    return tuple(x)


# ----------------------------------------------------------------------------
# Smith normal form
# ----------------------------------------------------------------------------


def snf_decomp(m: Sequence[Sequence[int]], ncols: Optional[int] = None):
    """Smith normal form with transforms.

    Returns ``(D, U, V)`` with ``U @ m @ V == D``, ``U`` and ``V`` unimodular
    and ``D`` diagonal with nonnegative entries ``d_1 | d_2 | ...``.
    """
    rows = len(m)
    cols = len(m[0]) if rows else (ncols or 0)
    a = [list(r) for r in m]
    u = [[int(i == j) for j in range(rows)] for i in range(rows)]
    v = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r_ in a:
            r_[i], r_[j] = r_[j], r_[i]
        for r_ in v:
            r_[i], r_[j] = r_[j], r_[i]

    def add_row(dst, src, q):  # row dst -= q * row src
        _sub_row(a, dst, src, q)
        _sub_row(u, dst, src, q)

    def add_col(dst, src, q):  # col dst -= q * col src
        for r_ in a:
            r_[dst] -= q * r_[src]
        for r_ in v:
            r_[dst] -= q * r_[src]

    for t in range(min(rows, cols)):
        while True:
            best = None
            for i in range(t, rows):
                for j in range(t, cols):
                    x = a[i][j]
                    if x and (best is None or abs(x) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = a[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, a[i][t] // p)
                    dirty = dirty or bool(a[i][t])
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, a[t][j] // p)
                    dirty = dirty or bool(a[t][j])
            if dirty:
                continue
            bad = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if a[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, -1)
        if best is None:
            break
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
    return as_matrix(a), as_matrix(u), as_matrix(v)


def snf(m: Sequence[Sequence[int]], ncols: Optional[int] = None) -> tuple[int, ...]:
    """The nonzero invariant factors ``(d_1, ..., d_k)`` of ``m``."""
    d, _, _ = snf_decomp(m, ncols)
    out = []
    for i in range(min(len(d), len(d[0]) if d else 0)):
        if d[i][i]:
            out.append(d[i][i])
    return tuple(out)


@dataclass(frozen=True, order=True)
class InvariantFactors:
    """Isomorphism type ``Z/d_1 + ... + Z/d_k + Z^free_rank`` with
    ``2 <= d_1 | d_2 | ...``."""

    torsion: tuple[int, ...] = ()
    free_rank: int = 0

    def __post_init__(self):
        t = self.torsion
        if any(d < 2 for d in t) or any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError(f"not an invariant factor chain: {t}")
        if self.free_rank < 0:
            raise ValueError("negative free rank")

    @classmethod
    def of_presentation(cls, rank: int, relation_columns: Sequence[Vector]) -> "InvariantFactors":
        """Type of ``Z^rank`` modulo the span of ``relation_columns``."""
        if not relation_columns:
            return cls((), rank)
        diag = snf(relation_columns, rank)  # rows = relations; same invariants
        return cls(tuple(d for d in diag if d > 1), rank - len(diag))

    @classmethod
    def direct_sum(cls, parts: Iterable["InvariantFactors"]) -> "InvariantFactors":
        diag: list[int] = []
        free = 0
        for p in parts:
            diag.extend(p.torsion)
            free += p.free_rank
        if not diag:
            return cls((), free)
        k = len(diag)
        m = [[diag[i] if i == j else 0 for j in range(k)] for i in range(k)]
        return cls(tuple(d for d in snf(m) if d > 1), free)

    @property
    def is_zero(self) -> bool:
        return not self.torsion and not self.free_rank

    @property
    def order(self) -> Optional[int]:
        if self.free_rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def size_key(self) -> tuple[int, int]:
        """Sort key ordering groups by free rank, then by torsion order."""
        t = 1
        for d in self.torsion:
            t *= d
        return (self.free_rank, t)

    def __str__(self) -> str:
        parts = [f"Z/{d}" for d in self.torsion]
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        return " + ".join(parts) or "0"


def lattice_quotient_type(outer: IntLattice, inner: IntLattice) -> InvariantFactors:
    coords = []
    for v in inner.basis:
        c = outer.coordinates(v)
        if c is None:
            raise ContainmentError("inner lattice is not contained in outer lattice")
        coords.append(c)
    return InvariantFactors.of_presentation(outer.rank, coords)


# ----------------------------------------------------------------------------
# Presented groups, subobjects, homomorphisms
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class AmbientObject:
    """The group ``Z^rank / relations``."""

    rank: int
    relations: IntLattice

    def __post_init__(self):
        if self.relations.ambient_rank != self.rank:
            raise DimensionError("relation lattice lives in the wrong rank")

    @classmethod
    def presented(cls, rank: int, relation_vectors: Iterable[Sequence[int]] = ()) -> "AmbientObject":
        return cls(rank, IntLattice.span(relation_vectors, rank))

    @classmethod
    def cyclic_sum(cls, orders: Sequence[int]) -> "AmbientObject":
        """``Z/orders[0] + Z/orders[1] + ...``; an order of 0 gives a copy of Z."""
        n = len(orders)
        rels = [tuple(d if j == i else 0 for j in range(n)) for i, d in enumerate(orders) if d]
        return cls.presented(n, rels)

    @classmethod
    def zero_object(cls) -> "AmbientObject":
        return cls(0, IntLattice.zero(0))

    def full(self) -> "Subobject":
        return Subobject(self, IntLattice.full(self.rank))

    def zero(self) -> "Subobject":
        return Subobject(self, self.relations)

    def sub(self, vectors: Iterable[Sequence[int]]) -> "Subobject":
        """The subobject generated by ``vectors`` (relations are added)."""
        return Subobject.generated(self, vectors)

    def type(self) -> InvariantFactors:
        return lattice_quotient_type(IntLattice.full(self.rank), self.relations)

    def is_zero(self) -> bool:
        return self.relations == IntLattice.full(self.rank)

    def __str__(self) -> str:
        return str(self.type())


def direct_sum(objects: Sequence[AmbientObject]) -> AmbientObject:
    n = sum(o.rank for o in objects)
    rels = []
    off = 0
    for o in objects:
        for v in o.relations.basis:
            rels.append((0,) * off + v + (0,) * (n - off - o.rank))
        off += o.rank
    return AmbientObject.presented(n, rels)


@dataclass(frozen=True)
class Subobject:
    ambient: AmbientObject
    lattice: IntLattice

    def __post_init__(self):
        if self.lattice.ambient_rank != self.ambient.rank:
            raise DimensionError("subobject lattice lives in the wrong rank")
        if not lattice_leq(self.ambient.relations, self.lattice):
            raise ContainmentError("subobject lattice must contain the relations")

    @classmethod
    def generated(cls, ambient: AmbientObject, vectors: Iterable[Sequence[int]]) -> "Subobject":
        gen = IntLattice.span(vectors, ambient.rank)
        return cls(ambient, lattice_join(gen, ambient.relations))

    @property
    def generators(self) -> tuple[Vector, ...]:
        """Canonical basis vectors that are nonzero in the ambient group."""
        rel = self.ambient.relations
        return tuple(v for v in self.lattice.basis if v not in rel)

    def contains_vector(self, v: Sequence[int]) -> bool:
        return v in self.lattice

    def is_zero(self) -> bool:
        return self.lattice == self.ambient.relations

    def is_full(self) -> bool:
        return self.lattice == IntLattice.full(self.ambient.rank)

    def type(self) -> InvariantFactors:
        return lattice_quotient_type(self.lattice, self.ambient.relations)

    def __le__(self, other: "Subobject") -> bool:
        return leq(self, other)


def _same_ambient(a: Subobject, b: Subobject):
    if a.ambient != b.ambient:
        raise AmbientMismatch("subobjects of different ambient objects")


def join(a: Subobject, b: Subobject) -> Subobject:
    _same_ambient(a, b)
    return Subobject(a.ambient, lattice_join(a.lattice, b.lattice))


def meet(a: Subobject, b: Subobject) -> Subobject:
    _same_ambient(a, b)
    return Subobject(a.ambient, lattice_meet(a.lattice, b.lattice))


def leq(a: Subobject, b: Subobject) -> bool:
    _same_ambient(a, b)
    return lattice_leq(a.lattice, b.lattice)


def join_all(ambient: AmbientObject, subs: Iterable[Subobject]) -> Subobject:
    lat = ambient.relations
    for s in subs:
        if s.ambient != ambient:
            raise AmbientMismatch("subobjects of different ambient objects")
        lat = lattice_join(lat, s.lattice)
    return Subobject(ambient, lat)


def quotient_type(outer: Subobject, inner: Subobject) -> InvariantFactors:
    """Invariant factors of ``outer / inner``."""
    _same_ambient(outer, inner)
    if not lattice_leq(inner.lattice, outer.lattice):
        raise ContainmentError("quotient_type needs inner <= outer")
    return lattice_quotient_type(outer.lattice, inner.lattice)


@dataclass(frozen=True)
class Homomorphism:
    """A group homomorphism given by an integer matrix on presentations."""

    source: AmbientObject
    target: AmbientObject
    matrix: Matrix

    def __post_init__(self):
        m = self.matrix
        if len(m) != self.target.rank or any(len(r) != self.source.rank for r in m):
            raise DimensionError(
                f"matrix shape does not match {self.target.rank}x{self.source.rank}"
            )
        for v in self.source.relations.basis:
            if self.apply(v) not in self.target.relations:
                raise ContainmentError("matrix does not respect the source relations")

    @classmethod
    def of(cls, source: AmbientObject, target: AmbientObject, rows) -> "Homomorphism":
        if target.rank == 0:
            return cls(source, target, ())
        return cls(source, target, as_matrix(rows))

    @classmethod
    def identity(cls, x: AmbientObject) -> "Homomorphism":
        return cls(x, x, identity(x.rank))

    @classmethod
    def zero(cls, source: AmbientObject, target: AmbientObject) -> "Homomorphism":
        return cls(source, target, zeros(target.rank, source.rank))

    def apply(self, v: Sequence[int]) -> Vector:
        if self.target.rank == 0:
            return ()
        return apply(self.matrix, v)

    def compose(self, first: "Homomorphism") -> "Homomorphism":
        """``self o first``."""
        if first.target != self.source:
            raise AmbientMismatch("composition of non-composable maps")
        m = matmul(self.matrix, first.matrix, self.source.rank, first.source.rank)
        return Homomorphism(first.source, self.target, m)

    def __add__(self, other: "Homomorphism") -> "Homomorphism":
        if (self.source, self.target) != (other.source, other.target):
            raise AmbientMismatch("sum of maps with different domains")
        m = tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(self.matrix, other.matrix))
        return Homomorphism(self.source, self.target, m)

    def __neg__(self) -> "Homomorphism":
        return Homomorphism(self.source, self.target, tuple(tuple(-x for x in r) for r in self.matrix))

    def __sub__(self, other: "Homomorphism") -> "Homomorphism":
        return self + (-other)

    def is_zero(self) -> bool:
        rel = self.target.relations
        return all(self.apply(unit(self.source.rank, j)) in rel for j in range(self.source.rank))

    def same_map(self, other: "Homomorphism") -> bool:
        """Equality as maps of groups (matrices may differ by relations)."""
        return (self - other).is_zero()

    def kernel(self) -> Subobject:
        return preimage(self, self.target.zero())

    def is_injective(self) -> bool:
        return self.kernel().is_zero()

    def is_surjective(self) -> bool:
        return image(self, self.source.full()).is_full()


def image(f: Homomorphism, a: Subobject) -> Subobject:
    if a.ambient != f.source:
        raise AmbientMismatch("subobject is not in the source of the map")
    return Subobject.generated(f.target, [f.apply(v) for v in a.lattice.basis])


def preimage(f: Homomorphism, b: Subobject) -> Subobject:
    if b.ambient != f.target:
        raise AmbientMismatch("subobject is not in the target of the map")
    n, m = f.source.rank, f.target.rank
    if n == 0:
        return f.source.zero()
    rows = [f.apply(unit(n, j)) for j in range(n)]
    rows += [tuple(-x for x in v) for v in b.lattice.basis]
    gens = [y[:n] for y in kernel(rows, m)]
    return Subobject(f.source, IntLattice.span(gens, n))
