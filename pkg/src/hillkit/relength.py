"""Shortening a filtration by grading its indices with a level function.

Indices of equal level are merged into one step, whose factor is the direct
sum of the merged factors.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import InvariantFactors, Subobject, join, join_all, leq, meet, quotient_type
from .errors import CertificateError
from .filtration import Filtration, factors, validate
from .hill import HillContext, ell, hull, is_closed


@dataclass(frozen=True)
class LevelAssignment:
    s_sets: tuple[frozenset, ...]
    lev: tuple[int, ...]


def levels(ctx: HillContext) -> LevelAssignment:
    sets = []
    lev: list[int] = []
    for a in range(ctx.sigma):
        s = hull(ctx, {a}) & frozenset(range(a + 1))
        sets.append(s)
        lev.append(max((lev[g] + 1 for g in s if g < a), default=0))
    return LevelAssignment(tuple(sets), tuple(lev))


@dataclass(frozen=True)
class LevelEntry:
    level: int
    indices: tuple[int, ...]
    step_factor: InvariantFactors  # X'_{b+1} / X'_b
    summed_factors: InvariantFactors  # direct sum of X_{g+1}/X_g over lev(g) = b


@dataclass(frozen=True)
class RelengthCertificate:
    levels: LevelAssignment
    t_sets: tuple[frozenset, ...]
    filtration: Filtration
    entries: tuple[LevelEntry, ...]
    checks: dict

    @property
    def new_length(self) -> int:
        return self.filtration.length


def rebound(ctx: HillContext) -> RelengthCertificate:
    """Build ``X'_b = ell({g : lev(g) < b})`` and certify every step.

    Raises CertificateError when a check fails; that is a bug, not bad input.
    """
    la = levels(ctx)
    lev = la.lev
    sigma = ctx.sigma
    top = max(lev, default=-1) + 1
    t_sets = tuple(frozenset(g for g in range(sigma) if lev[g] < b) for b in range(top + 1))
    steps = tuple(ell(ctx, t) for t in t_sets)
    by_level = [tuple(g for g in range(sigma) if lev[g] == b) for b in range(top)]
    wits = tuple(join_all(ctx.ambient, (ctx.witnesses[g] for g in idx)) for idx in by_level)
    new = Filtration(ctx.ambient, steps, wits)

    checks: dict[str, bool] = {}
    checks["levels_recursion"] = all(a in la.s_sets[a] and is_closed(ctx, la.s_sets[a])
                                     for a in range(sigma))
    checks["t_equals_union_of_s"] = all(
        t_sets[b] == frozenset().union(*(la.s_sets[g] for g in range(sigma) if lev[g] < b))
        for b in range(top + 1)
    )
    checks["filtration_valid"] = validate(new).ok
    old_factors = factors(ctx.filtration)
    entries = []
    meets_agree = sums_absorbed = True
    for b, idx in enumerate(by_level):
        step = quotient_type(steps[b + 1], steps[b])
        summed = InvariantFactors.direct_sum(old_factors[g] for g in idx)
        entries.append(LevelEntry(b, idx, step, summed))
        xb = steps[b]
        for d in idx:
            ad = ctx.witnesses[d]
            if meet(ad, xb) != meet(ad, ctx.steps[d]):
                meets_agree = False
            earlier = join_all(ctx.ambient, (ctx.witnesses[g] for g in idx if g < d))
            if not leq(meet(join(ad, xb), earlier), xb):
                sums_absorbed = False
    checks["per_level_direct_sum"] = all(e.step_factor == e.summed_factors for e in entries)
    checks["witness_meets_agree"] = meets_agree
    checks["earlier_level_sums_absorbed"] = sums_absorbed
    checks["length_bound"] = new.length <= sigma
    new_factors = [quotient_type(steps[b + 1], steps[b]) for b in range(top)]
    checks["factor_conservation"] = (
        InvariantFactors.direct_sum(old_factors) == InvariantFactors.direct_sum(new_factors)
    )
    failed = [k for k, v in checks.items() if not v]
    if failed:
        raise CertificateError(f"relength certificate failed: {', '.join(failed)}")
    return RelengthCertificate(la, t_sets, new, tuple(entries), checks)


def steps_of(cert: RelengthCertificate) -> tuple[Subobject, ...]:
    return cert.filtration.steps
