import random

import pytest

from hillkit.core import AmbientObject, InvariantFactors, Subobject, join, join_all
from hillkit.errors import InvalidFiltration, PreconditionError
from hillkit.filtration import (
    Filtration,
    coordinate_filtration,
    coproduct_filtration,
    default_witnesses,
    factor_presentation,
    factors,
    refine,
    single_step,
    validate,
)
from hillkit.instances import f3, random_ambient, random_filtration, u8, v8

from oracles import elements, matches_type, orders_of

Z = InvariantFactors((), 1)


def t(*torsion):
    return InvariantFactors(tuple(torsion))


class TestValidate:
    def test_u8_ok(self):
        f = u8()
        assert validate(f).ok
        # containments by element sets
        sets = [elements(s) for s in f.steps]
        assert all(a <= b for a, b in zip(sets, sets[1:]))

    def test_reordered_steps(self):
        f = u8()
        bad = Filtration(f.ambient, (f.steps[0], f.steps[2], f.steps[1], f.steps[3]))
        rep = validate(bad)
        assert not rep.ok
        assert rep.first.index == 1

    def test_zero_ambient(self):
        z = AmbientObject.zero_object()
        assert validate(Filtration(z, (z.zero(),))).ok

    def test_nonzero_start(self):
        x = AmbientObject.cyclic_sum([4])
        rep = validate(Filtration(x, (x.sub([(2,)]), x.full())))
        assert rep.first.index == 0

    def test_missing_top(self):
        x = AmbientObject.cyclic_sum([4])
        rep = validate(Filtration(x, (x.zero(), x.sub([(2,)]))))
        assert rep.first.index == 1

    def test_bad_witness(self):
        x = AmbientObject.cyclic_sum([4])
        rep = validate(Filtration(x, (x.zero(), x.full()), (x.sub([(2,)]),)))
        assert not rep.ok and "A_0" in rep.first.message

    def test_repeated_step_is_a_warning(self):
        x = AmbientObject.cyclic_sum([4])
        rep = validate(Filtration(x, (x.zero(), x.zero(), x.full())))
        assert rep.ok and rep.warnings[0].index == 0

    def test_factors_reject_invalid(self):
        f = u8()
        with pytest.raises(InvalidFiltration):
            factors(Filtration(f.ambient, tuple(reversed(f.steps))))


class TestFactors:
    def test_u8(self):
        f = u8()
        assert factors(f) == [t(2)] * 3
        orders = orders_of(f.ambient)
        for a in range(3):
            assert matches_type(t(2), elements(f.steps[a + 1]), elements(f.steps[a]), orders)

    def test_free_coordinates(self):
        assert factors(f3()) == [Z] * 3

    def test_single_step(self):
        assert factors(single_step(AmbientObject.cyclic_sum([6]))) == [t(6)]

    def test_random_against_element_counts(self, rng):
        for _ in range(30):
            f = random_filtration(rng, max_exponent=12)
            orders = orders_of(f.ambient)
            for a, ft in enumerate(factors(f)):
                assert matches_type(ft, elements(f.steps[a + 1]), elements(f.steps[a]), orders)

    def test_witnesses_telescope(self, rng):
        for _ in range(30):
            f = random_filtration(rng).with_default_witnesses()
            for b in range(f.length + 1):
                assert join_all(f.ambient, f.witnesses[:b]) == f.steps[b]

    def test_default_witnesses_are_valid(self, rng):
        for _ in range(30):
            f = random_filtration(rng)
            g = Filtration(f.ambient, f.steps, default_witnesses(f))
            assert validate(g).ok


class TestRefine:
    def test_z4_by_socle(self):
        x = AmbientObject.cyclic_sum([4])
        f = single_step(x)
        obj = factor_presentation(f, 0).obj
        g = Filtration.from_generators(obj, [[], [(2,)], [(1,)]])
        out = refine(f, [g])
        assert out.steps == (x.zero(), x.sub([(2,)]), x.full())
        assert factors(out) == [t(2), t(2)]

    def test_trivial_refinement(self, rng):
        for _ in range(20):
            f = random_filtration(rng)
            gs = [single_step(factor_presentation(f, a).obj) for a in range(f.length)]
            assert refine(f, gs).steps == f.steps

    def test_recovers_u8(self):
        full = u8()
        x = full.ambient
        coarse = Filtration(x, (x.zero(), x.sub([(2,)]), x.full()))
        obj = factor_presentation(coarse, 0).obj
        assert obj.type() == t(4)
        # Z/2 inside the Z/4 factor is generated by twice the generator
        g0 = Filtration.from_generators(obj, [[], [(2,)], [(1,)]])
        g1 = single_step(factor_presentation(coarse, 1).obj)
        assert refine(coarse, [g0, g1]).steps == full.steps

    def test_factor_multiset(self, rng):
        for _ in range(30):
            f = random_filtration(rng, max_sigma=3)
            gs = []
            for a in range(f.length):
                obj = factor_presentation(f, a).obj
                gs.append(random_filtration(rng, obj, max_sigma=3))
            out = refine(f, gs)
            assert validate(out).ok
            expected = sorted(ft for g in gs for ft in factors(g))
            assert sorted(factors(out)) == expected

    def test_wrong_count(self):
        with pytest.raises(PreconditionError):
            refine(u8(), [])

    def test_wrong_object(self):
        f = u8()
        other = single_step(AmbientObject.cyclic_sum([3]))
        with pytest.raises(PreconditionError):
            refine(f, [other] * 3)


class TestCoproduct:
    def test_v8(self):
        f = v8()
        assert f.ambient == AmbientObject.cyclic_sum([2, 2, 2])
        assert f.steps == coordinate_filtration(f.ambient).steps

    def test_single_z(self):
        z = AmbientObject.cyclic_sum([0])
        f = coproduct_filtration([z])
        assert f.steps == (z.zero(), z.full())

    def test_z4_z2(self):
        f = coproduct_filtration([AmbientObject.cyclic_sum([4]), AmbientObject.cyclic_sum([2])])
        assert f.steps[1] == f.ambient.sub([(1, 0)])
        assert factors(f) == [t(4), t(2)]

    @pytest.mark.parametrize("seed", range(10))
    def test_always_valid(self, seed):
        rng = random.Random(seed)
        objs = [random_ambient(rng, max_rank=2, allow_free=True) for _ in range(rng.randint(1, 3))]
        f = coproduct_filtration(objs)
        assert validate(f).ok
        assert factors(f) == [o.type() for o in objs]

    def test_empty(self):
        with pytest.raises(PreconditionError):
            coproduct_filtration([])


def test_subobject_requires_relations():
    x = AmbientObject.cyclic_sum([4])
    from hillkit.core import IntLattice
    with pytest.raises(ValueError):
        Subobject(x, IntLattice.zero(1))
    assert join(x.zero(), x.sub([(2,)])) == x.sub([(2,)])
