import random
from itertools import combinations

import pytest

from hillkit.core import AmbientObject, Homomorphism, InvariantFactors, join, leq, meet
from hillkit.errors import AmbientMismatch, PreconditionError
from hillkit.filtration import Filtration, coordinate_filtration, factors, validate
from hillkit.hill import (
    HillContext,
    closed_core,
    cover,
    ell,
    enumerate_closed,
    hull,
    image_member,
    induced_filtration,
    initial_segment,
    intersection_filtration,
    is_closed,
    kaplansky_witness,
    summand_filtration,
    verify_hill,
)
from hillkit.instances import random_filtration, random_split_instance, random_subobject, u8

from oracles import closed_sets, elements, orders_of


def t(*torsion):
    return InvariantFactors(tuple(torsion))


def brute_closed(ctx):
    f = ctx.filtration
    orders = orders_of(ctx.ambient)
    return closed_sets([s.lattice.basis for s in f.steps], [w.lattice.basis for w in f.witnesses], orders)


def pair_contexts():
    x = AmbientObject.cyclic_sum([2, 2])
    a = Filtration.from_generators(x, [[], [(1, 0)], [(1, 0), (0, 1)]], [[(1, 0)], [(0, 1)]])
    b = Filtration.from_generators(x, [[], [(1, 1)], [(1, 0), (0, 1)]], [[(1, 1)], [(0, 1)]])
    return HillContext(a), HillContext(b)


class TestEll:
    def test_empty(self, golden_ctx):
        assert ell(golden_ctx["U8"], []).is_zero()

    def test_free_case(self, golden_ctx):
        x = golden_ctx["F3"].ambient
        assert ell(golden_ctx["F3"], {0, 2}) == x.sub([(1, 0, 0), (0, 0, 1)])

    def test_everything(self, golden_ctx):
        assert ell(golden_ctx["U8"], {0, 1, 2}).is_full()

    def test_out_of_range(self, golden_ctx):
        with pytest.raises(PreconditionError):
            ell(golden_ctx["U8"], {3})


class TestClosed:
    def test_initial_segments(self, golden_ctx, rng):
        ctxs = list(golden_ctx.values()) + [HillContext(random_filtration(rng)) for _ in range(20)]
        for ctx in ctxs:
            for a in range(ctx.sigma + 1):
                assert is_closed(ctx, initial_segment(a))

    def test_u8(self, golden_ctx):
        ctx = golden_ctx["U8"]
        assert not is_closed(ctx, {1})
        expected = {frozenset(), frozenset({0}), frozenset({0, 1}), frozenset({0, 1, 2})}
        assert set(brute_closed(ctx)) == expected
        assert set(enumerate_closed(ctx)) == expected

    def test_v8_everything_closed(self, golden_ctx):
        ctx = golden_ctx["V8"]
        assert len(brute_closed(ctx)) == 8
        assert all(is_closed(ctx, s) for r in range(4) for s in combinations(range(3), r))

    def test_census_matches_brute_force(self, rng):
        for _ in range(40):
            ctx = HillContext(random_filtration(rng, max_sigma=5, max_exponent=12))
            assert set(enumerate_closed(ctx)) == set(brute_closed(ctx))


class TestCoverAndHull:
    def test_cover_u8(self, golden_ctx):
        ctx = golden_ctx["U8"]
        assert cover(ctx, ctx.ambient.sub([(2,)]), 3) == {1}

    def test_cover_zero(self, golden_ctx):
        for ctx in golden_ctx.values():
            assert cover(ctx, ctx.ambient.zero(), ctx.sigma) == frozenset()

    def test_cover_m(self, golden_ctx):
        ctx = golden_ctx["M"]
        assert cover(ctx, ctx.ambient.sub([(1, 0)]), 3) == {2}

    def test_cover_contains_target(self, rng):
        for _ in range(100):
            ctx = HillContext(random_filtration(rng))
            y = random_subobject(rng, ctx.ambient)
            s = cover(ctx, y, ctx.sigma)
            assert leq(y, ell(ctx, s))

    @pytest.mark.parametrize("name, seed, expected", [
        ("M", {2}, {0, 2}),
        ("M", set(), set()),
        ("U8", {1}, {0, 1}),
    ])
    def test_hull_examples(self, golden_ctx, name, seed, expected):
        assert hull(golden_ctx[name], seed) == expected

    def test_hull_is_least_closed_superset_on_small_cases(self, rng):
        for _ in range(40):
            ctx = HillContext(random_filtration(rng, max_sigma=5, max_exponent=12))
            census = brute_closed(ctx)
            for a in range(ctx.sigma):
                h = hull(ctx, {a})
                assert h in census and a in h

    def test_hull_of_subobject(self, rng):
        for _ in range(100):
            ctx = HillContext(random_filtration(rng))
            y = random_subobject(rng, ctx.ambient)
            h = hull(ctx, y)
            assert is_closed(ctx, h)
            assert leq(y, ell(ctx, h))
            assert hull(ctx, h) == h

    def test_closed_core_and_membership(self, rng):
        for _ in range(40):
            ctx = HillContext(random_filtration(rng, max_sigma=5))
            images = {ell(ctx, s) for s in enumerate_closed(ctx)}
            y = random_subobject(rng, ctx.ambient)
            core = closed_core(ctx, y)
            assert is_closed(ctx, core) and leq(ell(ctx, core), y)
            assert (image_member(ctx, y) is not None) == (y in images)
            for img in images:
                assert image_member(ctx, img) is not None


class TestInduced:
    def test_u8_lower_half(self, golden_ctx):
        ind = induced_filtration(golden_ctx["U8"], set(), {0, 1})
        assert ind.filtration.ambient.type() == t(4)
        assert factors(ind.filtration) == [t(2), t(2)]
        assert ind.bijection == {0: 0, 1: 1}

    def test_equal_sets(self, golden_ctx):
        ind = induced_filtration(golden_ctx["M"], {0}, {0})
        assert ind.filtration.ambient.type().is_zero
        assert ind.filtration.length == 0 and ind.bijection == {}

    def test_m_over_socle_part(self, golden_ctx):
        ind = induced_filtration(golden_ctx["M"], {1}, {0, 1, 2})
        assert ind.filtration.ambient.type() == t(4)
        assert factors(ind.filtration) == [t(2), t(2)]

    def test_rejects_non_closed(self, golden_ctx):
        with pytest.raises(PreconditionError):
            induced_filtration(golden_ctx["U8"], set(), {1})

    def test_rejects_non_nested(self, golden_ctx):
        with pytest.raises(PreconditionError):
            induced_filtration(golden_ctx["V8"], {0}, {1})

    def test_factor_conservation(self, rng):
        for _ in range(20):
            ctx = HillContext(random_filtration(rng, max_sigma=5))
            base = factors(ctx.filtration)
            census = enumerate_closed(ctx)
            for s in census:
                for u in census:
                    if not s <= u:
                        continue
                    ind = induced_filtration(ctx, s, u)
                    got = factors(ind.filtration)
                    for a, j in ind.bijection.items():
                        assert got[j] == base[a]


class TestVerifyHill:
    @pytest.mark.parametrize("name, size", [("U8", 4), ("V8", 8), ("M", 6), ("F3", 8)])
    def test_golden(self, golden_ctx, name, size):
        rep = verify_hill(golden_ctx[name])
        assert rep.ok and rep.census_size == size and rep.mode == "exhaustive"

    def test_empty_chain(self):
        z = AmbientObject.zero_object()
        rep = verify_hill(HillContext(Filtration(z, (z.zero(),))))
        assert rep.ok and rep.census_size == 1

    def test_sampled_mode(self, rng):
        f = coordinate_filtration(AmbientObject.cyclic_sum([2] * 5))
        rep = verify_hill(HillContext(f), exhaustive_bound=3, seed=1)
        assert rep.mode == "sampled" and rep.ok

    def test_counterexample_payload(self):
        rep = verify_hill(HillContext(u8()))
        assert all(c.to_json() == {"status": "pass"} for c in rep.checks.values())


class TestKaplansky:
    def test_m_socle_summand(self, golden_ctx):
        ctx = golden_ctx["M"]
        k = kaplansky_witness(ctx, ctx.ambient.sub([(0, 1)]))
        assert k.w == ctx.ambient.sub([(0, 1)])
        assert k.w.type() == t(2)
        assert k.outer.filtration.ambient.type() == t(4)
        assert factors(k.outer.filtration) == [t(2), t(2)]

    def test_zero(self, golden_ctx):
        ctx = golden_ctx["U8"]
        k = kaplansky_witness(ctx, ctx.ambient.zero())
        assert k.w.is_zero() and k.inner.filtration.length == 0
        assert factors(k.outer.filtration) == factors(ctx.filtration)

    def test_u8(self, golden_ctx):
        ctx = golden_ctx["U8"]
        k = kaplansky_witness(ctx, ctx.ambient.sub([(2,)]))
        assert k.w.type() == t(4)
        assert factors(k.inner.filtration) == [t(2), t(2)]
        assert factors(k.outer.filtration) == [t(2)]


class TestSummand:
    def test_coordinate_split(self):
        x = AmbientObject.cyclic_sum([2, 2])
        ctx = HillContext(coordinate_filtration(x))
        px = Homomorphism.of(x, x, [[1, 0], [0, 0]])
        py = Homomorphism.of(x, x, [[0, 0], [0, 1]])
        res = summand_filtration(ctx, px, py)
        assert factors(res.filtration) == [t(2)]

    def test_whole_object(self, golden_ctx):
        ctx = golden_ctx["M"]
        x = ctx.ambient
        res = summand_filtration(ctx, Homomorphism.identity(x), Homomorphism.zero(x, x))
        assert res.filtration.steps == ctx.steps

    def test_m_blocks(self, golden_ctx):
        ctx = golden_ctx["M"]
        x = ctx.ambient
        px = Homomorphism.of(x, x, [[1, 0], [0, 0]])
        py = Homomorphism.of(x, x, [[0, 0], [0, 1]])
        res = summand_filtration(ctx, px, py)
        assert res.filtration.ambient.type() == t(4)
        assert factors(res.filtration) == [t(2), t(2)]

    def test_rejects_non_complementary(self, golden_ctx):
        ctx = golden_ctx["M"]
        x = ctx.ambient
        with pytest.raises(PreconditionError):
            summand_filtration(ctx, Homomorphism.identity(x), Homomorphism.identity(x))

    def test_random_decomposition(self, rng):
        for _ in range(30):
            f, px, py = random_split_instance(rng)
            ctx = HillContext(f)
            res = summand_filtration(ctx, px, py)
            assert validate(res.filtration).ok
            for whole, xp, yp in res.decomposition:
                assert InvariantFactors.direct_sum([xp, yp]) == whole
            for z in res.chain:
                assert image_member(ctx, z) is not None


class TestIntersection:
    def test_single_context(self, golden_ctx):
        for ctx in golden_ctx.values():
            assert intersection_filtration([ctx]).filtration.steps == ctx.steps

    def test_two_flags_of_v4(self):
        a, b = pair_contexts()
        res = intersection_filtration([a, b])
        x = a.ambient
        assert res.filtration.steps == (x.zero(), x.sub([(0, 1)]), x.full())
        common = {ell(a, s) for s in enumerate_closed(a)} & {ell(b, s) for s in enumerate_closed(b)}
        assert common == {x.zero(), x.sub([(0, 1)]), x.full()}
        assert {frozenset(elements(s)) for s in common} == {
            frozenset({(0, 0)}), frozenset({(0, 0), (0, 1)}), frozenset(elements(x.full()))}

    def test_three_copies(self, golden_ctx):
        for ctx in golden_ctx.values():
            assert intersection_filtration([ctx] * 3).filtration.steps == ctx.steps

    def test_ambient_mismatch(self, golden_ctx):
        with pytest.raises(AmbientMismatch):
            intersection_filtration([golden_ctx["U8"], golden_ctx["M"]])

    def test_random_pairs_lie_in_both_lattices(self, rng):
        for _ in range(20):
            f = random_filtration(rng, max_sigma=4)
            g = random_filtration(rng, f.ambient, max_sigma=4)
            ctxs = [HillContext(f), HillContext(g)]
            res = intersection_filtration(ctxs)
            assert validate(res.filtration).ok
            for c in ctxs:
                images = {ell(c, s) for s in enumerate_closed(c)}
                assert all(s in images for s in res.filtration.steps)


def test_modular_law_small(rng):
    for _ in range(100):
        f = random_filtration(rng)
        x = f.ambient
        a = random_subobject(rng, x)
        b = random_subobject(rng, x)
        c = join(a, random_subobject(rng, x))
        assert join(a, meet(b, c)) == meet(join(a, b), c)


def test_context_memo_is_thread_safe():
    from concurrent.futures import ThreadPoolExecutor

    rng = random.Random(3)
    ctx = HillContext(random_filtration(rng, max_sigma=6))
    with ThreadPoolExecutor(4) as pool:
        results = list(pool.map(lambda a: hull(ctx, {a}), list(range(ctx.sigma)) * 4))
    fresh = HillContext(ctx.filtration)
    assert results == [hull(fresh, {a}) for a in list(range(ctx.sigma)) * 4]
