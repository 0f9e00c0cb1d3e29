"""JSON instance files.

Integers are written as decimal strings.  A generator matrix has one column
per generator, so ``[["2", "0"], ["0", "1"]]`` in rank 2 lists the
generators ``(2, 0)`` and ``(0, 1)``.  Differentials and maps are ordinary
matrices acting on column vectors.
"""

from __future__ import annotations

import json
import re
from typing import Any, Optional

from .complexes import ChainComplex, ChainMap
from .core import AmbientObject, Homomorphism, InvariantFactors, Subobject, transpose
from .errors import HillkitError
from .filtration import Filtration

KINDS = ("filtration", "complex", "map", "batch")
_INT = re.compile(r"-?[0-9]+\Z")


class ParseError(HillkitError, ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def _int(x: Any, path: str) -> int:
    if isinstance(x, bool):
        raise ParseError(path, "expected an integer")
    if isinstance(x, int):
        return x
    if isinstance(x, str) and _INT.match(x.strip()):
        return int(x.strip())
    raise ParseError(path, f"expected a decimal integer string, got {x!r}")


def _list(x: Any, path: str) -> list:
    if not isinstance(x, list):
        raise ParseError(path, "expected an array")
    return x


def _obj(x: Any, path: str) -> dict:
    if not isinstance(x, dict):
        raise ParseError(path, "expected an object")
    return x


def _field(doc: dict, key: str, path: str):
    if key not in doc:
        raise ParseError(f"{path}.{key}", "missing field")
    return doc[key]


def parse_matrix(x: Any, path: str, nrows: Optional[int] = None, ncols: Optional[int] = None):
    rows = _list(x, path)
    out = []
    for i, r in enumerate(rows):
        out.append(tuple(_int(v, f"{path}[{i}][{j}]") for j, v in enumerate(_list(r, f"{path}[{i}]"))))
    if nrows is not None and len(out) != nrows and not (not out and (nrows == 0 or ncols == 0)):
        raise ParseError(path, f"expected {nrows} rows, got {len(out)}")
    widths = {len(r) for r in out}
    if len(widths) > 1:
        raise ParseError(path, "rows have different lengths")
    if ncols is not None and out and widths != {ncols}:
        raise ParseError(path, f"expected {ncols} columns")
    if not out and nrows:
        out = [()] * nrows
    return tuple(out)


def parse_generators(x: Any, path: str, rank: int) -> list[tuple[int, ...]]:
    """Columns of a ``rank``-row matrix; ``[]`` means no generators."""
    if isinstance(x, list) and not x:
        return []
    m = parse_matrix(x, path, nrows=rank)
    width = len(m[0]) if m else 0
    return list(transpose(m, width)) if m else []


def parse_ambient(x: Any, path: str = "$.ambient") -> AmbientObject:
    doc = _obj(x, path)
    rank = _int(_field(doc, "rank", path), f"{path}.rank")
    if rank < 0:
        raise ParseError(f"{path}.rank", "rank must be non-negative")
    rel = parse_generators(doc.get("relations", []), f"{path}.relations", rank)
    return AmbientObject.presented(rank, rel)


def parse_subobject(x: Any, path: str, ambient: AmbientObject) -> Subobject:
    return ambient.sub(parse_generators(x, path, ambient.rank))


def _check_kind(doc: dict, kind: str, path: str):
    got = doc.get("kind", kind)
    if got != kind:
        raise ParseError(f"{path}.kind", f"expected kind {kind!r}, got {got!r}")


def parse_filtration(x: Any, path: str = "$") -> Filtration:
    doc = _obj(x, path)
    _check_kind(doc, "filtration", path)
    amb = parse_ambient(_field(doc, "ambient", path), f"{path}.ambient")
    steps = tuple(
        parse_subobject(s, f"{path}.steps[{i}]", amb)
        for i, s in enumerate(_list(_field(doc, "steps", path), f"{path}.steps"))
    )
    wits = None
    if doc.get("witnesses") is not None:
        wits = tuple(
            parse_subobject(s, f"{path}.witnesses[{i}]", amb)
            for i, s in enumerate(_list(doc["witnesses"], f"{path}.witnesses"))
        )
    return Filtration(amb, steps, wits)


def parse_complex(x: Any, path: str = "$") -> ChainComplex:
    doc = _obj(x, path)
    _check_kind(doc, "complex", path)
    lo = _int(_field(doc, "lo", path), f"{path}.lo")
    hi = _int(_field(doc, "hi", path), f"{path}.hi")
    comps_raw = _list(_field(doc, "components", path), f"{path}.components")
    if len(comps_raw) != max(hi - lo + 1, 0):
        raise ParseError(f"{path}.components", f"expected {max(hi - lo + 1, 0)} components")
    comps = [parse_ambient(c, f"{path}.components[{i}]") for i, c in enumerate(comps_raw)]
    diffs_raw = _list(doc.get("differentials", []), f"{path}.differentials")
    if len(diffs_raw) != max(len(comps) - 1, 0):
        raise ParseError(f"{path}.differentials", f"expected {max(len(comps) - 1, 0)} differentials")
    diffs = []
    for i, d in enumerate(diffs_raw):
        p = f"{path}.differentials[{i}]"
        m = parse_matrix(d, p, nrows=comps[i + 1].rank, ncols=comps[i].rank)
        diffs.append(_hom(comps[i], comps[i + 1], m, p))
    if not comps:
        return ChainComplex.zero()
    try:
        return ChainComplex(lo, tuple(comps), tuple(diffs))
    except HillkitError as e:
        raise ParseError(path, str(e)) from e


def _hom(src: AmbientObject, tgt: AmbientObject, m, path: str) -> Homomorphism:
    try:
        return Homomorphism(src, tgt, m if tgt.rank else ())
    except HillkitError as e:
        raise ParseError(path, str(e)) from e


def parse_map(x: Any, path: str = "$") -> ChainMap:
    doc = _obj(x, path)
    _check_kind(doc, "map", path)
    src = parse_complex(_field(doc, "source", path), f"{path}.source")
    tgt = parse_complex(_field(doc, "target", path), f"{path}.target")
    maps = {}
    for key, m in sorted(_obj(doc.get("maps", {}), f"{path}.maps").items()):
        p = f"{path}.maps[{key!r}]"
        n = _int(key, p)
        a, b = src.component(n), tgt.component(n)
        maps[n] = _hom(a, b, parse_matrix(m, p, nrows=b.rank, ncols=a.rank), p)
    try:
        return ChainMap(src, tgt, maps)
    except HillkitError as e:
        raise ParseError(path, str(e)) from e


def parse_instance(x: Any, path: str = "$"):
    doc = _obj(x, path)
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ParseError(f"{path}.kind", f"kind must be one of {', '.join(KINDS)}")
    if kind == "filtration":
        return parse_filtration(doc, path)
    if kind == "complex":
        return parse_complex(doc, path)
    if kind == "map":
        return parse_map(doc, path)
    return [parse_instance(d, f"{path}.instances[{i}]")
            for i, d in enumerate(_list(_field(doc, "instances", path), f"{path}.instances"))]


def load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno} column {e.colno}", e.msg) from e
    return _obj(doc, "$")


# ----------------------------------------------------------------------------
# Serialization
# ----------------------------------------------------------------------------


def matrix_json(m) -> list:
    return [[str(v) for v in row] for row in m]


def generators_json(vectors, rank: int) -> list:
    if not vectors:
        return []
    return matrix_json(transpose(list(vectors), rank))


def ambient_json(x: AmbientObject) -> dict:
    return {"rank": x.rank, "relations": generators_json(x.relations.basis, x.rank)}


def subobject_json(s: Subobject) -> list:
    return generators_json(s.generators, s.ambient.rank)


def filtration_json(f: Filtration) -> dict:
    out = {
        "kind": "filtration",
        "ambient": ambient_json(f.ambient),
        "steps": [subobject_json(s) for s in f.steps],
    }
    if f.witnesses is not None:
        out["witnesses"] = [subobject_json(w) for w in f.witnesses]
    return out


def complex_json(x: ChainComplex) -> dict:
    if not x.components:
        return {"kind": "complex", "lo": 0, "hi": -1, "components": [], "differentials": []}
    return {
        "kind": "complex",
        "lo": x.lo,
        "hi": x.hi,
        "components": [ambient_json(c) for c in x.components],
        "differentials": [matrix_json(d.matrix) for d in x.differentials],
    }


def map_json(f: ChainMap) -> dict:
    maps = {str(n): matrix_json(f.at(n).matrix) for n in f.degrees()
            if f.at(n).source.rank and f.at(n).target.rank}
    return {"kind": "map", "source": complex_json(f.source), "target": complex_json(f.target),
            "maps": maps}


def invariants_json(t: InvariantFactors) -> dict:
    return {"torsion": [str(d) for d in t.torsion], "free_rank": t.free_rank, "text": str(t)}


def index_set_json(s) -> list[int]:
    return sorted(s)


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"
