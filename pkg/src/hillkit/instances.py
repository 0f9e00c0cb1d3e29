"""Golden instances and seeded random generators."""

from __future__ import annotations

import random
from math import lcm

from .core import AmbientObject, Homomorphism, Subobject, join
from .filtration import Filtration, coordinate_filtration, coproduct_filtration


def u8() -> Filtration:
    """Z/8 with its composition series 0 < <4> < <2> < Z/8."""
    x = AmbientObject.cyclic_sum([8])
    return Filtration.from_generators(x, [[], [[4]], [[2]], [[1]]], [[[4]], [[2]], [[1]]])


def v8() -> Filtration:
    """(Z/2)^3 filtered by its coordinates."""
    z2 = AmbientObject.cyclic_sum([2])
    return coproduct_filtration([z2, z2, z2])


def m() -> Filtration:
    """Z/4 + Z/2 with steps 0 < <(2,0)> < <(2,0),(0,1)> < M."""
    x = AmbientObject.cyclic_sum([4, 2])
    return Filtration.from_generators(
        x,
        [[], [[2, 0]], [[2, 0], [0, 1]], [[1, 0], [0, 1]]],
        [[[2, 0]], [[0, 1]], [[1, 0]]],
    )


def f3() -> Filtration:
    """Z^3 with the coordinate flag."""
    return coordinate_filtration(AmbientObject.cyclic_sum([0, 0, 0]))


GOLDEN = {"U8": u8, "V8": v8, "M": m, "F3": f3}


def golden() -> dict[str, Filtration]:
    return {k: f() for k, f in GOLDEN.items()}


# ----------------------------------------------------------------------------
# Random instances
# ----------------------------------------------------------------------------


def random_ambient(rng: random.Random, max_rank: int = 3, max_exponent: int = 27,
                   allow_free: bool = False) -> AmbientObject:
    n = rng.randint(1, max_rank)
    orders: list[int] = []
    e = 1
    for _ in range(n):
        if allow_free and rng.random() < 0.15:
            orders.append(0)
            continue
        choices = [d for d in range(2, max_exponent + 1) if lcm(e, d) <= max_exponent]
        d = rng.choice(choices)
        e = lcm(e, d)
        orders.append(d)
    return AmbientObject.cyclic_sum(orders)


def random_vector(rng: random.Random, n: int, bound: int = 3) -> tuple[int, ...]:
    return tuple(rng.randint(-bound, bound) for _ in range(n))


def random_subobject(rng: random.Random, x: AmbientObject, max_gens: int = 2) -> Subobject:
    return x.sub([random_vector(rng, x.rank) for _ in range(rng.randint(0, max_gens))])


def random_element_of(rng: random.Random, s: Subobject) -> tuple[int, ...]:
    n = s.ambient.rank
    v = [0] * n
    for b in s.lattice.basis:
        c = rng.randint(-2, 2)
        for i in range(n):
            v[i] += c * b[i]
    return tuple(v)


def random_filtration(rng: random.Random, x: AmbientObject | None = None, max_sigma: int = 6,
                      max_exponent: int = 27, allow_free: bool = False) -> Filtration:
    """A random filtration of length <= max_sigma with witnesses that are
    sometimes larger than needed."""
    if x is None:
        x = random_ambient(rng, max_exponent=max_exponent, allow_free=allow_free)
    full = x.full()
    steps = [x.zero()]
    wits = []
    while not steps[-1].is_full():
        cur = steps[-1]
        if len(steps) == max_sigma:
            missing = [v for v in full.lattice.basis if v not in cur.lattice]
            nxt = full
            gens = missing
        else:
            v = random_vector(rng, x.rank)
            while v in cur.lattice:
                v = random_vector(rng, x.rank)
            gens = [v]
            nxt = join(cur, x.sub([v]))
        if rng.random() < 0.4:
            gens = gens + [random_element_of(rng, nxt)]
        wits.append(x.sub(gens))
        steps.append(nxt)
    return Filtration(x, tuple(steps), tuple(wits))


def random_split_instance(rng: random.Random, max_sigma: int = 6):
    """A filtered direct sum ``Z = X + Y`` with its two block projections."""
    while True:
        a = random_ambient(rng, max_rank=2, max_exponent=8)
        b = random_ambient(rng, max_rank=2, max_exponent=8)
        if a.rank + b.rank <= 3:
            break
    orders = _orders(a) + _orders(b)
    z = AmbientObject.cyclic_sum(orders)
    f = random_filtration(rng, z, max_sigma=max_sigma)
    n, k = z.rank, a.rank
    px = [[int(i == j and i < k) for j in range(n)] for i in range(n)]
    py = [[int(i == j and i >= k) for j in range(n)] for i in range(n)]
    return f, Homomorphism.of(z, z, px), Homomorphism.of(z, z, py)


def _orders(x: AmbientObject) -> list[int]:
    # cyclic_sum presentations keep diagonal relations
    out = []
    for i in range(x.rank):
        d = 0
        for v in x.relations.basis:
            if v[i] and all(v[j] == 0 for j in range(x.rank) if j != i):
                d = v[i]
        out.append(d)
    return out


# ----------------------------------------------------------------------------
# Random complexes
# ----------------------------------------------------------------------------


def _combine(rng: random.Random, gens, width: int, bound: int = 1) -> tuple[int, ...]:
    v = [0] * width
    for g in gens:
        c = rng.randint(-bound, bound)
        if c:
            for i in range(width):
                v[i] += c * g[i]
    return tuple(v)


def random_cyclic_object(rng: random.Random, max_rank: int = 2, orders=(0, 2, 4, 8)) -> AmbientObject:
    return AmbientObject.cyclic_sum([rng.choice(orders) for _ in range(rng.randint(1, max_rank))])


def random_complex(rng: random.Random, max_degrees: int = 4, max_rank: int = 2,
                   orders=(0, 2, 4, 8), lo: int | None = None):
    """A complex with at most ``max_degrees`` components whose differentials
    are random elements of the lattice of admissible maps."""
    from .complexes import ChainComplex, MapSystem

    k = rng.randint(1, max_degrees)
    lo = rng.randint(-2, 1) if lo is None else lo
    comps = [random_cyclic_object(rng, max_rank, orders) for _ in range(k)]
    mats = []
    for i in range(k - 1):
        sys_ = MapSystem()
        sys_.add_block("d", comps[i], comps[i + 1])
        sys_.finish_blocks()
        if mats:
            sys_.add_equation([(None, "d", mats[-1])], comps[i + 1],
                              shape=(comps[i + 1].rank, comps[i - 1].rank))
        vec = _combine(rng, sys_.solution_lattice(), sys_.main_vars)
        mats.append(sys_.block_matrix(vec, "d"))
    return ChainComplex.build(lo, comps, mats)


def random_chain_map(rng: random.Random, src, tgt, null_homotopic: bool = False):
    """A random chain map, or a random null-homotopic one ``d h + h d``."""
    from .complexes import ChainMap, MapSystem, _degree_span, chain_map_generators

    if not null_homotopic:
        gens = chain_map_generators(src, tgt)
        out = ChainMap.zero(src, tgt)
        for g in gens:
            c = rng.randint(-1, 1)
            if c:
                out = ChainMap(src, tgt, {n: out.at(n) + _scale(g.at(n), c) for n in out.degrees()})
        return out
    sys_ = MapSystem()
    degs = _degree_span(src, tgt)
    for n in degs:
        sys_.add_block(n, src.component(n), tgt.component(n - 1))
    sys_.finish_blocks()
    vec = _combine(rng, sys_.solution_lattice(), sys_.main_vars, bound=2)
    h = {n: sys_.extract(vec, n) for n in degs if n in sys_.blocks}

    def at(n):
        return h.get(n) or Homomorphism.zero(src.component(n), tgt.component(n - 1))

    maps = {n: tgt.d(n - 1).compose(at(n)) + at(n + 1).compose(src.d(n)) for n in degs}
    return ChainMap(src, tgt, maps)


def _scale(f: Homomorphism, c: int) -> Homomorphism:
    return Homomorphism(f.source, f.target, tuple(tuple(c * v for v in r) for r in f.matrix))


def random_contractible(rng: random.Random, max_disks: int = 2, orders=(0, 2, 4, 8)):
    """A sum of random disks, or the cone of an identity map."""
    from .complexes import ChainMap, complex_direct_sum, cone, disk

    if rng.random() < 0.5:
        parts = [disk(random_cyclic_object(rng, 1, orders), rng.randint(-2, 1))
                 for _ in range(rng.randint(1, max_disks))]
        return complex_direct_sum(parts)
    x = random_complex(rng, max_degrees=2, max_rank=1, orders=orders)
    return cone(ChainMap.identity(x)).complex


def golden_complexes() -> dict:
    from .complexes import ChainComplex, complex_direct_sum, disk, stalk

    z = AmbientObject.cyclic_sum([0])
    z2 = AmbientObject.cyclic_sum([2])
    return {
        "times2": ChainComplex.build(0, [z, z], [[[2]]]),
        "disk": disk(z, 0),
        "stalk_z2": stalk(z2, 0),
        "two_disks": complex_direct_sum([disk(z, 0), disk(z, 1)]),
        "double_disk": complex_direct_sum([disk(z, 0), disk(z, 0)]),
    }


def golden_documents() -> dict[str, dict]:
    """The JSON instance files shipped in ``instances/``, keyed by file name."""
    from . import serialize as ser
    from .complexes import ChainMap, disk, stalk

    docs = {f"{k.lower()}.json": ser.filtration_json(f) for k, f in golden().items()}
    z = AmbientObject.cyclic_sum([0])
    m_doc = ser.filtration_json(m())
    m_doc["params"] = {"proj_x": ser.matrix_json([[1, 0], [0, 0]]),
                       "proj_y": ser.matrix_json([[0, 0], [0, 1]])}
    docs["m_summand.json"] = m_doc
    u8_doc = ser.filtration_json(u8())
    u8_doc["params"] = {"subobject": ser.generators_json([(2,)], 1), "set": [1]}
    docs["u8_seed.json"] = u8_doc
    x = AmbientObject.cyclic_sum([2, 2])
    docs["pair_a.json"] = ser.filtration_json(
        Filtration.from_generators(x, [[], [(1, 0)], [(1, 0), (0, 1)]], [[(1, 0)], [(0, 1)]]))
    docs["pair_b.json"] = ser.filtration_json(
        Filtration.from_generators(x, [[], [(1, 1)], [(1, 0), (0, 1)]], [[(1, 1)], [(0, 1)]]))
    d = disk(z, 0)
    docs["disk_id.json"] = ser.map_json(ChainMap.identity(d))
    s0 = stalk(z, 0)
    docs["times2_map.json"] = ser.map_json(ChainMap.build(s0, s0, {0: [[2]]}))
    docs["ext_z2_z4.json"] = ser.map_json(ChainMap.zero(
        stalk(AmbientObject.cyclic_sum([2]), -1), stalk(AmbientObject.cyclic_sum([4]), 0)))
    for name, cx in golden_complexes().items():
        docs[f"{name}.json"] = ser.complex_json(cx)
    z4 = AmbientObject.cyclic_sum([4])
    z4_doc = ser.filtration_json(Filtration(z4, (z4.zero(), z4.full()), (z4.full(),)))
    z4_doc["params"] = {"factor_filtrations": [
        ser.filtration_json(Filtration.from_generators(z4, [[], [(2,)], [(1,)]]))]}
    docs["z4_refine.json"] = z4_doc
    docs["batch_golden.json"] = {"kind": "batch",
                                 "instances": [docs[f"{k}.json"] for k in ("u8", "v8", "m", "f3")]}
    return docs
