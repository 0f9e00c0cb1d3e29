"""Finite filtrations ``0 = X_0 <= X_1 <= ... <= X_sigma = X`` of a presented
group, optionally with witnesses ``A_a`` satisfying ``X_a + A_a = X_{a+1}``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import (
    AmbientObject,
    IntLattice,
    InvariantFactors,
    Homomorphism,
    Matrix,
    Subobject,
    direct_sum,
    image,
    join,
    leq,
    quotient_type,
    transpose,
)
from .errors import InvalidFiltration, PreconditionError


@dataclass(frozen=True)
class Filtration:
    ambient: AmbientObject
    steps: tuple[Subobject, ...]
    witnesses: Optional[tuple[Subobject, ...]] = None

    @classmethod
    def from_generators(cls, ambient, step_generators, witness_generators=None) -> "Filtration":
        """Build from lists of generating vectors (relations are added)."""
        steps = tuple(ambient.sub(g) for g in step_generators)
        wit = None
        if witness_generators is not None:
            wit = tuple(ambient.sub(g) for g in witness_generators)
        return cls(ambient, steps, wit)

    @property
    def length(self) -> int:
        return len(self.steps) - 1

    def with_default_witnesses(self) -> "Filtration":
        if self.witnesses is not None:
            return self
        return Filtration(self.ambient, self.steps, default_witnesses(self))


@dataclass(frozen=True)
class Violation:
    index: int
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None

    def __bool__(self) -> bool:
        return self.ok


def validate(f: Filtration) -> ValidationReport:
    rep = ValidationReport()
    bad = rep.violations.append
    if not f.steps:
        bad(Violation(0, "a filtration needs at least the step X_0"))
        return rep
    for i, s in enumerate(f.steps):
        if s.ambient != f.ambient:
            bad(Violation(i, "step lives in a different ambient object"))
    if rep.violations:
        return rep
    if not f.steps[0].is_zero():
        bad(Violation(0, "X_0 is not the zero subobject"))
    for a in range(f.length):
        if not leq(f.steps[a], f.steps[a + 1]):
            bad(Violation(a, f"X_{a} is not contained in X_{a + 1}"))
        elif f.steps[a] == f.steps[a + 1]:
            rep.warnings.append(Violation(a, f"X_{a} = X_{a + 1} (zero factor)"))
    if not f.steps[-1].is_full():
        bad(Violation(f.length, "the last step is not the whole object"))
    if f.witnesses is not None:
        if len(f.witnesses) != f.length:
            bad(Violation(min(len(f.witnesses), f.length), "wrong number of witnesses"))
        else:
            for a, w in enumerate(f.witnesses):
                if w.ambient != f.ambient:
                    bad(Violation(a, "witness lives in a different ambient object"))
                elif join(f.steps[a], w) != f.steps[a + 1]:
                    bad(Violation(a, f"X_{a} + A_{a} != X_{a + 1}"))
    rep.violations.sort(key=lambda v: v.index)
    return rep


def require_valid(f: Filtration) -> None:
    rep = validate(f)
    if not rep.ok:
        v = rep.first
        raise InvalidFiltration(f"invalid filtration at index {v.index}: {v.message}")


def factors(f: Filtration) -> list[InvariantFactors]:
    require_valid(f)
    return [quotient_type(f.steps[a + 1], f.steps[a]) for a in range(f.length)]


def default_witnesses(f: Filtration) -> tuple[Subobject, ...]:
    """``A_a`` generated by the canonical basis vectors of ``X_{a+1}`` that are
    missing from ``X_a``."""
    out = []
    for a in range(f.length):
        lo, hi = f.steps[a], f.steps[a + 1]
        out.append(f.ambient.sub([v for v in hi.lattice.basis if v not in lo.lattice]))
    return tuple(out)


@dataclass(frozen=True)
class FactorPresentation:
    """``X_{a+1}/X_a`` presented as ``Z^r`` modulo the coordinates of ``X_a``
    in the canonical basis of ``X_{a+1}``."""

    obj: AmbientObject
    embedding: Matrix  # n x r, columns = canonical basis of X_{a+1}
    base: Subobject  # X_a

    def push(self, s: Subobject) -> Subobject:
        """Image of ``s`` under the embedding into the ambient group."""
        if s.ambient != self.obj:
            raise PreconditionError("subobject is not in the factor presentation")
        n = self.base.ambient.rank
        vecs = [tuple(sum(e * x for e, x in zip(self.embedding[i], v)) for i in range(n))
                for v in s.lattice.basis]
        return self.base.ambient.sub(vecs)

    def lift(self, s: Subobject) -> Subobject:
        """Preimage of ``s`` under the quotient map ``X_{a+1} -> X_{a+1}/X_a``."""
        return join(self.push(s), self.base)


def subquotient(outer: IntLattice, inner: IntLattice) -> tuple[AmbientObject, Matrix]:
    """Presentation of ``outer/inner`` on the canonical basis of ``outer``
    together with the embedding matrix (columns = basis of ``outer``)."""
    coords = []
    for v in inner.basis:
        c = outer.coordinates(v)
        if c is None:
            raise PreconditionError("inner lattice is not inside outer lattice")
        coords.append(c)
    obj = AmbientObject.presented(outer.rank, coords)
    return obj, transpose(outer.basis, outer.ambient_rank)


def coordinates_in(outer: IntLattice, vectors) -> list[tuple[int, ...]]:
    out = []
    for v in vectors:
        c = outer.coordinates(v)
        if c is None:
            raise PreconditionError("vector is not inside the lattice")
        out.append(c)
    return out


def factor_presentation(f: Filtration, a: int) -> FactorPresentation:
    obj, emb = subquotient(f.steps[a + 1].lattice, f.steps[a].lattice)
    return FactorPresentation(obj, emb, f.steps[a])


def refine(
    f: Filtration,
    factor_filtrations: Sequence[Filtration],
    isos: Optional[Sequence[Optional[Homomorphism]]] = None,
) -> Filtration:
    """Splice a filtration of each factor ``X_{a+1}/X_a`` into ``f``.

    ``factor_filtrations[a]`` filters the presentation returned by
    ``factor_presentation(f, a)``, or, when ``isos[a]`` is given, an object
    mapped isomorphically onto that presentation by ``isos[a]``.
    """
    require_valid(f)
    if len(factor_filtrations) != f.length:
        raise PreconditionError(
            f"expected {f.length} factor filtrations, got {len(factor_filtrations)}"
        )
    if isos is not None and len(isos) != f.length:
        raise PreconditionError("isos must have one entry per factor")
    steps = [f.steps[0]]
    wits: Optional[list[Subobject]] = []
    for a, g in enumerate(factor_filtrations):
        require_valid(g)
        pres = factor_presentation(f, a)
        iso = isos[a] if isos is not None else None
        if iso is None:
            if g.ambient != pres.obj:
                raise PreconditionError(
                    f"factor filtration {a} does not filter the factor presentation"
                )
            move = lambda s: s  # noqa: E731
        else:
            if iso.source != g.ambient or iso.target != pres.obj:
                raise PreconditionError(f"iso {a} has the wrong domain or codomain")
            if not (iso.is_injective() and iso.is_surjective()):
                raise PreconditionError(f"iso {a} is not an isomorphism")
            move = lambda s, iso=iso: image(iso, s)  # noqa: E731
        for s in g.steps[1:]:
            steps.append(pres.lift(move(s)))
        if wits is not None and g.witnesses is not None:
            for w in g.witnesses:
                wits.append(pres.push(move(w)))
        else:
            wits = None
    return Filtration(f.ambient, tuple(steps), tuple(wits) if wits is not None else None)


def coproduct_filtration(objects: Sequence[AmbientObject]) -> Filtration:
    """Filtration of the direct sum whose step ``a`` is the sum of the first
    ``a`` blocks; the witnesses are the block inclusions."""
    if not objects:
        raise PreconditionError("coproduct_filtration needs at least one object")
    x = direct_sum(objects)
    n = x.rank
    offsets = []
    off = 0
    for o in objects:
        offsets.append(off)
        off += o.rank

    def block(i):
        return [tuple(int(k == offsets[i] + j) for k in range(n)) for j in range(objects[i].rank)]

    steps = [x.zero()]
    wits = []
    for i in range(len(objects)):
        wits.append(x.sub(block(i)))
        steps.append(join(steps[-1], wits[-1]))
    return Filtration(x, tuple(steps), tuple(wits))


def coordinate_filtration(x: AmbientObject) -> Filtration:
    """The flag ``<e_1> <= <e_1, e_2> <= ...`` of the presentation coordinates."""
    n = x.rank
    gens = [[tuple(int(k == j) for k in range(n)) for j in range(i)] for i in range(n + 1)]
    wits = [[tuple(int(k == i) for k in range(n))] for i in range(n)]
    return Filtration.from_generators(x, gens, wits)


def single_step(x: AmbientObject) -> Filtration:
    return Filtration(x, (x.zero(), x.full()), (x.full(),))
