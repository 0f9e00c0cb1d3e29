"""Command line interface: ``hillkit <command> <instance.json> [options]``.

Reports go to standard output as JSON with sorted keys.  Exit status is 0
when every check passes, 1 when a check fails and 2 for malformed input.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Optional

from . import serialize as ser
from .complexes import (
    ChainComplex,
    cone,
    cpx_certificate,
    cpx_filtration,
    cycle_object,
    ext1_cs,
    homology,
    is_cs_split,
    null_homotopy,
    tilde_certificate,
    tilde_filtration,
)
from .core import Homomorphism, leq
from .errors import CertificateError, HillkitError
from .filtration import factor_presentation, factors, refine, validate
from .hill import (
    DEFAULT_EXHAUSTIVE_BOUND,
    DEFAULT_ITERATION_CAP,
    HillContext,
    enumerate_closed,
    ell,
    hull,
    image_member,
    induced_filtration,
    intersection_filtration,
    is_closed,
    kaplansky_witness,
    summand_filtration,
    verify_hill,
)
from .relength import rebound

PASS = {"status": "pass"}


def _fail(counterexample: Any = None) -> dict:
    out = {"status": "fail"}
    if counterexample is not None:
        out["counterexample"] = counterexample
    return out


def _check(ok: bool, counterexample: Any = None) -> dict:
    return PASS if ok else _fail(counterexample)


def _multiset(types) -> list[str]:
    return sorted(str(t) for t in types)


class Options:
    def __init__(self, exhaustive_bound=DEFAULT_EXHAUSTIVE_BOUND,
                 iteration_cap=DEFAULT_ITERATION_CAP, seed=0):
        self.exhaustive_bound = exhaustive_bound
        self.iteration_cap = iteration_cap
        self.seed = seed


# ----------------------------------------------------------------------------
# Commands.  Each takes the parsed document and options and returns
# (result, certificates, checks).
# ----------------------------------------------------------------------------


def _params(doc: dict) -> dict:
    return ser._obj(doc.get("params", {}), "$.params")


def _ctx(doc: dict, opts: Options) -> HillContext:
    return HillContext(ser.parse_filtration(doc), iteration_cap=opts.iteration_cap)


def _index_set(x, path: str, sigma: int) -> frozenset:
    out = set()
    for i, v in enumerate(ser._list(x, path)):
        a = ser._int(v, f"{path}[{i}]")
        if not 0 <= a < sigma:
            raise ser.ParseError(f"{path}[{i}]", f"index {a} out of range 0..{sigma - 1}")
        out.add(a)
    return frozenset(out)


def cmd_validate(doc, opts):
    f = ser.parse_filtration(doc)
    rep = validate(f)
    viol = [{"index": v.index, "message": v.message} for v in rep.violations]
    warn = [{"index": v.index, "message": v.message} for v in rep.warnings]
    result = {"ok": rep.ok, "violations": viol, "warnings": warn, "length": f.length}
    return result, {}, {"valid": _check(rep.ok, viol[:1] or None)}


def cmd_factors(doc, opts):
    f = ser.parse_filtration(doc)
    fs = factors(f)
    return {"factors": [ser.invariants_json(t) for t in fs]}, {}, {}


def cmd_refine(doc, opts):
    f = ser.parse_filtration(doc)
    raw = ser._list(ser._field(_params(doc), "factor_filtrations", "$.params"),
                    "$.params.factor_filtrations")
    subs = []
    for a, g in enumerate(raw):
        obj = factor_presentation(f, a).obj
        g = ser._obj(g, f"$.params.factor_filtrations[{a}]")
        g = dict(g, ambient=g.get("ambient", ser.ambient_json(obj)))
        subs.append(ser.parse_filtration(g, f"$.params.factor_filtrations[{a}]"))
    out = refine(f, subs)
    rep = validate(out)
    expected = _multiset(t for g in subs for t in factors(g))
    got = _multiset(factors(out)) if rep.ok else []
    checks = {
        "valid": _check(rep.ok, [{"index": v.index, "message": v.message} for v in rep.violations[:1]]),
        "factors_are_refined_factors": _check(got == expected, {"expected": expected, "got": got}),
    }
    return {"filtration": ser.filtration_json(out)}, {}, checks


def cmd_verify_hill(doc, opts):
    ctx = _ctx(doc, opts)
    rep = verify_hill(ctx, exhaustive_bound=opts.exhaustive_bound, seed=opts.seed)
    result = {"sigma": rep.sigma, "mode": rep.mode, "census_size": rep.census_size}
    certs = {"closed_sets": [ser.index_set_json(s) for s in rep.closed_sets]}
    return result, certs, {k: v.to_json() for k, v in rep.checks.items()}


def cmd_closed(doc, opts):
    ctx = _ctx(doc, opts)
    p = _params(doc)
    if "set" in p:
        s = _index_set(p["set"], "$.params.set", ctx.sigma)
        return {"set": ser.index_set_json(s), "closed": is_closed(ctx, s)}, {}, {}
    sets = enumerate_closed(ctx) if ctx.sigma <= opts.exhaustive_bound else None
    if sets is None:
        raise ser.ParseError("$.params.set", "sigma exceeds the exhaustive bound; give a set")
    return {"closed_sets": [ser.index_set_json(s) for s in sets], "count": len(sets)}, {}, {}


def cmd_ell(doc, opts):
    ctx = _ctx(doc, opts)
    s = _index_set(ser._field(_params(doc), "set", "$.params"), "$.params.set", ctx.sigma)
    sub = ell(ctx, s)
    return {"set": ser.index_set_json(s), "generators": ser.subobject_json(sub),
            "type": ser.invariants_json(sub.type())}, {}, {}


def _seed(doc, ctx):
    p = _params(doc)
    if "subobject" in p:
        return ser.parse_subobject(p["subobject"], "$.params.subobject", ctx.ambient)
    return _index_set(ser._field(p, "set", "$.params"), "$.params.set", ctx.sigma)


def cmd_hull(doc, opts):
    ctx = _ctx(doc, opts)
    seed = _seed(doc, ctx)
    h = hull(ctx, seed)
    contains = leq(seed, ell(ctx, h)) if not isinstance(seed, frozenset) else seed <= h
    checks = {
        "closed": _check(is_closed(ctx, h), {"hull": ser.index_set_json(h)}),
        "contains_seed": _check(contains, {"hull": ser.index_set_json(h)}),
        "idempotent": _check(hull(ctx, h) == h, {"hull": ser.index_set_json(h)}),
    }
    return {"hull": ser.index_set_json(h)}, {"ell": ser.subobject_json(ell(ctx, h))}, checks


def cmd_h3(doc, opts):
    ctx = _ctx(doc, opts)
    p = _params(doc)
    s = _index_set(p.get("lower", []), "$.params.lower", ctx.sigma)
    t = _index_set(p.get("upper", list(range(ctx.sigma))), "$.params.upper", ctx.sigma)
    ind = induced_filtration(ctx, s, t)
    got = _multiset(factors(ind.filtration))
    base = factors(ctx.filtration)
    expected = _multiset(base[a] for a in sorted(t - s))
    result = {
        "lower": ser.index_set_json(s),
        "upper": ser.index_set_json(t),
        "bijection": {str(a): j for a, j in sorted(ind.bijection.items())},
        "factors": got,
    }
    certs = {"filtration": ser.filtration_json(ind.filtration)}
    checks = {"factor_conservation": _check(got == expected, {"expected": expected, "got": got})}
    return result, certs, checks


def cmd_kaplansky(doc, opts):
    ctx = _ctx(doc, opts)
    y = ser.parse_subobject(ser._field(_params(doc), "subobject", "$.params"),
                            "$.params.subobject", ctx.ambient)
    k = kaplansky_witness(ctx, y)
    base = _multiset(factors(ctx.filtration))
    inner = _multiset(factors(k.inner.filtration))
    outer = _multiset(factors(k.outer.filtration))
    from_base = sorted(inner + outer) == base
    checks = {
        "y_in_w": _check(leq(y, k.w)),
        "inner_valid": _check(validate(k.inner.filtration).ok),
        "outer_valid": _check(validate(k.outer.filtration).ok),
        "factors_from_original": _check(from_base, {"inner": inner, "outer": outer, "original": base}),
    }
    result = {"closed_set": ser.index_set_json(k.closed_set), "w": ser.subobject_json(k.w),
              "inner_factors": inner, "outer_factors": outer}
    certs = {"inner": ser.filtration_json(k.inner.filtration),
             "outer": ser.filtration_json(k.outer.filtration)}
    return result, certs, checks


def cmd_relength(doc, opts):
    ctx = _ctx(doc, opts)
    try:
        cert = rebound(ctx)
    except CertificateError as e:
        return {"error": str(e)}, {}, {"certificate": _fail(str(e))}
    result = {
        "lev": list(cert.levels.lev),
        "new_length": cert.new_length,
        "levels": [{"level": e.level, "indices": list(e.indices),
                    "step_factor": ser.invariants_json(e.step_factor),
                    "summed_factors": ser.invariants_json(e.summed_factors)} for e in cert.entries],
    }
    certs = {"t_sets": [ser.index_set_json(t) for t in cert.t_sets],
             "s_sets": [ser.index_set_json(s) for s in cert.levels.s_sets],
             "filtration": ser.filtration_json(cert.filtration)}
    return result, certs, {k: _check(v) for k, v in cert.checks.items()}


def cmd_summand(doc, opts):
    ctx = _ctx(doc, opts)
    p = _params(doc)
    n = ctx.ambient.rank
    mats = [ser.parse_matrix(ser._field(p, k, "$.params"), f"$.params.{k}", nrows=n, ncols=n)
            for k in ("proj_x", "proj_y")]
    px, py = (Homomorphism(ctx.ambient, ctx.ambient, m) for m in mats)
    res = summand_filtration(ctx, px, py)
    rep = validate(res.filtration)
    members = [image_member(ctx, z) is not None for z in res.chain]
    result = {"length": res.filtration.length,
              "factors": [ser.invariants_json(t) for t in factors(res.filtration)] if rep.ok else []}
    certs = {"filtration": ser.filtration_json(res.filtration),
             "closed_sets": [ser.index_set_json(s) for s in res.closed_sets]}
    checks = {"valid": _check(rep.ok),
              "chain_in_image_lattice": _check(all(members), {"steps": members})}
    return result, certs, checks


def cmd_intersect(docs, opts):
    ctxs = [_ctx(d, opts) for d in docs]
    res = intersection_filtration(ctxs)
    rep = validate(res.filtration)
    member = [[image_member(c, s) is not None for c in ctxs] for s in res.filtration.steps]
    result = {"length": res.filtration.length,
              "factors": [ser.invariants_json(t) for t in factors(res.filtration)] if rep.ok else []}
    certs = {"filtration": ser.filtration_json(res.filtration),
             "closed_sets": [[ser.index_set_json(s) for s in row] for row in res.closed_sets]}
    checks = {"valid": _check(rep.ok),
              "steps_in_every_image_lattice": _check(all(map(all, member)), {"membership": member})}
    return result, certs, checks


def _homology_json(x: ChainComplex) -> dict:
    return {str(n): ser.invariants_json(homology(x, n)) for n in x.degrees}


def cmd_cone(doc, opts):
    f = ser.parse_map(doc)
    c = cone(f)
    return ({"cone": ser.complex_json(c.complex), "homology": _homology_json(c.complex)},
            {"inclusion": ser.map_json(c.inclusion), "projection": ser.map_json(c.projection)},
            {"componentwise_split": _check(is_cs_split(c.sequence))})


def cmd_homotopic(doc, opts):
    f = ser.parse_map(doc)
    h = null_homotopy(f)
    result = {"null_homotopic": h is not None}
    certs, checks = {}, {}
    if h is not None:
        certs["h"] = {str(n): ser.matrix_json(m.matrix) for n, m in sorted(h.h.items())}
        checks["homotopy_verifies"] = _check(h.verify())
    return result, certs, checks


def cmd_ext1cs(doc, opts):
    f = ser.parse_map(doc)
    return {"ext1_cs": ser.invariants_json(ext1_cs(f.source, f.target))}, {}, {}


def cmd_homology(doc, opts):
    return {"homology": _homology_json(ser.parse_complex(doc))}, {}, {}


def _contexts(raw, path, objects, opts) -> dict:
    out = {}
    for key, g in sorted(ser._obj(raw, path).items()):
        p = f"{path}[{key!r}]"
        n = ser._int(key, p)
        g = ser._obj(g, p)
        g = dict(g, ambient=g.get("ambient", ser.ambient_json(objects(n))))
        out[n] = HillContext(ser.parse_filtration(g, p), iteration_cap=opts.iteration_cap)
    return out


def _cf_json(cf) -> dict:
    return {
        "length": cf.length,
        "start_degrees": list(cf.witness_degrees),
        "steps": [{str(n): ser.subobject_json(s) for n, s in zip(cf.complex.degrees, step)}
                  for step in cf.steps],
    }


def cmd_cpxfilt(doc, opts):
    x = ser.parse_complex(doc)
    ctxs = _contexts(_params(doc).get("contexts", {}), "$.params.contexts", x.component, opts)
    cf = cpx_filtration(x, ctxs)
    cert = cpx_certificate(cf, ctxs)
    types = [{str(n): _multiset(ts) for n, ts in per.items()} for per in cert["factor_types"]]
    certs = dict(_cf_json(cf), factor_types=types,
                 factors=[ser.complex_json(cf.factor(a)) for a in range(cf.length)])
    return {"length": cf.length}, certs, {k: _check(v) for k, v in cert["checks"].items()}


def cmd_tildefilt(doc, opts):
    x = ser.parse_complex(doc)
    ctxs = _contexts(_params(doc).get("cycle_contexts", {}), "$.params.cycle_contexts",
                     lambda n: cycle_object(x, n).obj, opts)
    cf = tilde_filtration(x, ctxs)
    cert = tilde_certificate(cf, ctxs)
    types = [{str(n): str(t) for n, t in per.items()} for per in cert["cycle_factor_types"]]
    certs = dict(_cf_json(cf), cycle_factor_types=types,
                 factors=[ser.complex_json(cf.factor(a)) for a in range(cf.length)])
    return {"length": cf.length}, certs, {k: _check(v) for k, v in cert["checks"].items()}


COMMANDS: dict[str, Callable] = {
    "validate": cmd_validate,
    "factors": cmd_factors,
    "refine": cmd_refine,
    "verify-hill": cmd_verify_hill,
    "closed": cmd_closed,
    "ell": cmd_ell,
    "hull": cmd_hull,
    "h3": cmd_h3,
    "kaplansky": cmd_kaplansky,
    "relength": cmd_relength,
    "summand": cmd_summand,
    "intersect": cmd_intersect,
    "cone": cmd_cone,
    "homotopic": cmd_homotopic,
    "ext1cs": cmd_ext1cs,
    "homology": cmd_homology,
    "cpxfilt": cmd_cpxfilt,
    "tildefilt": cmd_tildefilt,
}


# ----------------------------------------------------------------------------
# Dispatch
# ----------------------------------------------------------------------------


def _exit_code(checks: dict) -> int:
    return 0 if all(c.get("status") == "pass" for c in checks.values()) else 1


def _error_report(command: str, instance: str, e: Exception) -> dict:
    err = {"type": type(e).__name__, "message": str(e)}
    if isinstance(e, ser.ParseError):
        err = {"type": "ParseError", "path": e.path, "message": e.message}
    return {"command": command, "instance": instance, "error": err}


def run_one(command: str, doc: Any, instance: str, opts: Options, timing: bool = False) -> tuple[int, dict]:
    """Run a command on one parsed document (a list of documents for
    ``intersect``).  Batch documents fan out and keep input order."""
    t0 = time.perf_counter()
    try:
        if command != "intersect" and isinstance(doc, dict) and doc.get("kind") == "batch":
            items = ser._list(ser._field(doc, "instances", "$"), "$.instances")
            with ThreadPoolExecutor() as pool:
                subs = list(pool.map(
                    lambda ix: run_one(command, ix[1], f"{instance}#{ix[0]}", opts), enumerate(items)))
            code = max((c for c, _ in subs), default=0)
            report = {"command": command, "instance": instance,
                      "result": {"reports": [r for _, r in subs]}, "certificates": {},
                      "checks": {"all_instances": _check(code == 0)}}
        else:
            result, certs, checks = COMMANDS[command](doc, opts)
            code = _exit_code(checks)
            report = {"command": command, "instance": instance, "result": result,
                      "certificates": certs, "checks": checks}
    except (HillkitError, ValueError) as e:
        return 2, dict(_error_report(command, instance, e), timing_ms=None)
    elapsed = round((time.perf_counter() - t0) * 1000, 3)
    report["timing_ms"] = elapsed if timing else None
    return code, report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hillkit", description="Hill lattices, filtrations and chain complexes "
                                "over finitely generated abelian groups.")
    p.add_argument("command", choices=sorted(COMMANDS), metavar="command",
                   help="one of: " + ", ".join(COMMANDS))
    p.add_argument("instances", nargs="+", type=Path, help="instance JSON file(s)")
    p.add_argument("--exhaustive-bound", type=int, default=DEFAULT_EXHAUSTIVE_BOUND,
                   help="largest filtration length enumerated exhaustively (default %(default)s)")
    p.add_argument("--iteration-cap", type=int, default=DEFAULT_ITERATION_CAP,
                   help="bound on closure loops (default %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled checks (default %(default)s)")
    p.add_argument("--timing", action="store_true", help="record wall time in timing_ms")
    return p


def run(argv: Optional[list[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    opts = Options(args.exhaustive_bound, args.iteration_cap, args.seed)
    names = [str(p) for p in args.instances]
    docs = []
    for path in args.instances:
        try:
            docs.append(ser.load(path.read_text()))
        except OSError as e:
            out.write(ser.dumps(dict(_error_report(args.command, str(path), e), timing_ms=None)))
            return 2
        except ser.ParseError as e:
            out.write(ser.dumps(dict(_error_report(args.command, str(path), e), timing_ms=None)))
            return 2
    if args.command == "intersect":
        code, report = run_one("intersect", docs, ",".join(names), opts, args.timing)
        out.write(ser.dumps(report))
        return code
    if len(docs) != 1:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"hillkit: {args.command} takes exactly one instance file\n")
        return 2
    code, report = run_one(args.command, docs[0], names[0], opts, args.timing)
    out.write(ser.dumps(report))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
