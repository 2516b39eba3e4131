"""Command-line front end.

Every subcommand writes ``<out>/<command>.json`` (inputs echoed, results,
verdicts) and a short ``<out>/<command>.txt``. Exit status is 0 when all
verdicts pass, 1 when one fails and 2 for bad input or configuration.

Options can also come from ``--config FILE``, a flat ``key = value`` file;
flags on the command line win. The output directory falls back to the
``WREATHLAB_OUT`` environment variable and then to ``./wreathlab-out``.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .certify import (LampWindow, SCHEMA as CERT_SCHEMA, certify_base, certify_lamp, induced_fibre_check,
                      induced_map, leaf_analysis, pairs_certificate, replay_certificate)
from .config import ConfigError, load_config
from .errors import NonAmenableRequired, WreathLabError
from .groups import GroupModel, Zd, make_model
from .lamp import Coloring, LampGraph, LampState, lamp_distance, replay_witness, stock_lamp_graph
from .maps import QIMap, build_map, coneoff, map_descriptor, verify_lamp_coneoff
from .metrics import ball as make_ball
from .quasimedian import (audit_hyperplanes, clique_coset_audit, desk_box_model, hyperplanes,
                          model_check, qm_ball, qm_validate, stock_spec)
from .scaling import (boxes_family, default_family, lift_scaling_check,
                      n_to_one_map, partition_certify, quasi_k_check, replay_scaling)

REPORT_SCHEMA = "wreathlab.report/1"
SCALING_SCHEMA = "wreathlab.scaling/1"
DEFAULT_OUT = "wreathlab-out"


class InputError(WreathLabError):
    pass


# -- parsing helpers -----------------------------------------------------------------

def _ints(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def parse_point(model: GroupModel, text: str):
    """``1,-2`` for integer coordinates, or any JSON value the model accepts."""
    text = text.strip()
    try:
        if text[:1] in "[\"{":
            return model.from_json(json.loads(text))
        return model.check(_ints(text))
    except (ValueError, TypeError, WreathLabError) as e:
        raise InputError(f"bad point {text!r} for {model.name}: {e}") from None


def parse_state(graph: LampGraph, text: str) -> LampState:
    """``zone=value;zone=value@position``, e.g. ``2=1@0,0``; JSON objects also work."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return graph.state_from_json(json.loads(text))
        except (ValueError, KeyError, WreathLabError) as e:
            raise InputError(f"bad state {text!r}: {e}") from None
    col_txt, sep, pos_txt = text.partition("@")
    if not sep:
        raise InputError(f"state {text!r} needs '@position'")
    vals = {}
    for item in filter(None, (s.strip() for s in col_txt.split(";"))):
        z, eq, v = item.partition("=")
        if not eq:
            raise InputError(f"bad lamp entry {item!r}; write zone=value")
        vals[_ints(z)] = int(v)
    pos = parse_point(graph.model, pos_txt) if pos_txt.strip() else None
    try:
        return graph.state(vals, pos)
    except (ValueError, WreathLabError) as e:
        raise InputError(str(e)) from None


def format_state(s: LampState) -> str:
    """Inverse of parse_state for integer zones and positions."""
    txt = lambda v: ",".join(map(str, v)) if isinstance(v, tuple) else json.dumps(v)
    return ";".join(f"{txt(z)}={v}" for z, v in s.coloring.entries) + "@" + txt(s.position)


def lamp_graph(name: str, lamps: int | None) -> LampGraph:
    try:
        g = stock_lamp_graph(name)
        if lamps and lamps != g.n:
            g = LampGraph(g.model, lamps)
        return g
    except KeyError:
        return LampGraph(make_model(name), lamps or 2)


def _map(args) -> QIMap:
    desc = {"family": args.map, "params": json.loads(args.map_params or "{}")}
    if args.source_model:
        desc["source_model"] = args.source_model
    try:
        return build_map(desc)
    except (ValueError, TypeError) as e:
        raise InputError(str(e)) from None


def _frac(v) -> str:
    return str(v) if isinstance(v, Fraction) else v


def _enc(v):
    if isinstance(v, tuple):
        return [_enc(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    return v


# -- subcommands -----------------------------------------------------------------------
# Each returns (results, verdicts, summary lines).

def cmd_ball(args):
    model = make_model(args.model)
    b = make_ball(model, args.radius, budget=args.budget)
    spheres = [int((b.dist_from_base == r).sum()) for r in range(args.radius + 1)]
    res = {"vertices": len(b), "edges": len(b.edges()), "sphere_sizes": spheres,
           "complete": b.complete, "model": model.descriptor()}
    if args.list_vertices:
        res["vertex_list"] = [model.to_json(v) for v in b.vertices]
    verdicts = {}
    if args.expect_vertices is not None:
        verdicts["vertex_count"] = len(b) == args.expect_vertices
    lines = [f"ball of radius {args.radius} in {model.name}: {len(b)} vertices, {res['edges']} edges",
             f"sphere sizes: {spheres}"]
    return res, verdicts, lines


def cmd_dist(args):
    g = lamp_graph(args.model, args.lamps)
    s1, s2 = parse_state(g, args.source), parse_state(g, args.target)
    engines = ["zone-tsp", "bfs"] if args.engine == "both" else [args.engine]
    runs, verdicts = {}, {}
    for e in engines:
        r = lamp_distance(g, s1, s2, engine=e, budget=args.budget, cap=args.cap)
        runs[e] = {"value": r.value, "exact": r.exact, "witness": r.witness, "detail": r.detail}
        verdicts[f"{e}_witness_replays"] = (len(r.witness) == r.value
                                            and replay_witness(g, s1, r.witness) == s2)
    values = {e: runs[e]["value"] for e in engines}
    if len(engines) == 2:
        verdicts["engines_agree"] = len(set(values.values())) == 1
    res = {"graph": g.name, "source": g.state_to_json(s1), "target": g.state_to_json(s2),
           "engines": runs, "value": runs[engines[0]]["value"]}
    lines = [f"{g.name}: d = " + ", ".join(f"{v} ({e})" for e, v in values.items())]
    return res, verdicts, lines


def cmd_coneoff(args):
    model = make_model(args.model)
    b = make_ball(model, args.radius)
    co = coneoff(b)
    d0, d1 = b.dist_from_base, co.graph.dist_from_base
    zones = {model.zone_of(v) for v in b.vertices}
    res = {"vertices": len(b), "edges": len(b.edges()), "coned_edges": len(co.graph.edges()),
           "zones": len(zones), "max_depth": int(d0.max()), "max_coned_depth": int(d1.max()),
           "coned_depth_profile": [int((d1 == r).sum()) for r in range(int(d1.max()) + 1)]}
    pairs = []
    for item in filter(None, (args.pairs or "").split("|")):
        a, _, c = item.partition(":")
        x, y = parse_point(model, a), parse_point(model, c)
        pairs.append({"x": model.to_json(x), "y": model.to_json(y), "distance": co.distance(x, y),
                      "window_distance": int(b.distances_from(b.index[x])[b.index[y]])})
    res["pairs"] = pairs
    verdicts = {"coned_dominated": bool((d1 <= d0).all())}
    lines = [f"cone-off of the radius-{args.radius} ball in {model.name}: {len(b)} vertices, "
             f"{len(zones)} zones, {res['edges']} -> {res['coned_edges']} edges",
             f"depth from identity: {res['max_depth']} -> {res['max_coned_depth']}"]
    lines += [f"d({p['x']}, {p['y']}) = {p['distance']} (window {p['window_distance']})" for p in pairs]
    return res, verdicts, lines


def cmd_map_apply(args):
    f = _map(args)
    inv = f.inverse()
    rows, roundtrip = [], True
    for item in filter(None, (s.strip() for s in args.points.split("|"))):
        if f.acts_on == "lamp":
            x = parse_state(f.source, item)
            y = f(x)
            back = inv(y) if inv else None
            rows.append({"input": f.source.state_to_json(x), "image": f.target.state_to_json(y),
                         "text": f"{format_state(x)} -> {format_state(y)}"})
        else:
            x = parse_point(f.source, item)
            y = f(x)
            back = inv(y) if inv else None
            rows.append({"input": _enc(x), "image": _enc(y), "text": f"{x} -> {y}"})
        if inv is not None:
            roundtrip &= back == x
    verdicts = {"inverse_roundtrip": roundtrip} if inv is not None else {}
    res = {"map": map_descriptor(f, args.source_model), "images": rows}
    lines = [f"{f.family}: {len(rows)} points mapped"] + [r["text"] for r in rows[:20]]
    return res, verdicts, lines


def cmd_certify_qi(args):
    f = _map(args)
    desc = map_descriptor(f, args.source_model)
    if f.acts_on == "lamp":
        w = LampWindow(f.source, args.radius, args.max_support)
        cert = certify_lamp(f, w, f.target, seed=args.seed, anchors=args.anchors,
                            n_random=args.n_random, C_max=args.C_max, K_max=args.K_max)
        for R in _int_list(args.leaf_radii):
            lr = leaf_analysis(f, Coloring(f.source.n), LampWindow(f.source, R), f.target)
            cert.leaves.append({"radius": R, **lr.to_json(f.target)})
    else:
        cert = certify_base(f, args.radius, C_max=args.C_max, K_max=args.K_max)
    cert.map = desc
    doc = cert.to_json()
    res = {"certificate": doc, "C": str(cert.constants.C), "K": str(cert.constants.K),
           "sample_count": doc["samples"]["count"],
           "leaf_deviations": {lf["radius"]: lf["deviation"] for lf in cert.leaves}}
    lines = [f"{f.family}: C = {cert.constants.C}, K = {cert.constants.K} "
             f"over {res['sample_count']} {doc['samples']['kind']} samples"]
    lines += [f"leaf of the empty colouring at R = {R}: deviation {d}"
              for R, d in res["leaf_deviations"].items()]
    return res, dict(cert.verdicts), lines


def _int_list(text) -> list[int]:
    return [int(t) for t in str(text or "").replace(",", " ").split()]


def cmd_certify_pairs(args):
    f = _map(args)
    desc = map_descriptor(f, args.source_model)
    if f.acts_on == "lamp":
        base = f.base_component(Coloring(f.source.n))
        src = tgt = f.source.model
    else:
        base, src, tgt = f.apply, f.source, f.target
    C = Fraction(args.C) if args.C is not None else certify_base(_as_base(base, src, tgt), args.envelope_radius).constants.C
    cert = pairs_certificate(base, src, tgt, args.radius, C=C, K=Fraction(args.K), q_max=args.q_max)
    im = induced_map(cert)
    res = {"map": desc, "pairs": cert.to_json(), "Q": cert.Q, "C_used": str(C),
           "induced": {"C": str(im.constants.C), "K": str(im.constants.K),
                       "frontier": [[str(c), str(k)] for c, k in im.frontier],
                       "mapping": [[_enc(a), _enc(b)] for a, b in sorted(im.mapping.items())]}}
    verdicts = {}
    if args.Q_max is not None:
        verdicts["Q"] = cert.Q <= args.Q_max
    if args.fiber_k is not None:
        sc = induced_fibre_check(im, Fraction(args.fiber_k))
        res["induced_scaling"] = {"k": str(sc.k), "max_deviation": str(sc.max_deviation),
                                  "tests": len(sc.tests), "C": _frac(sc.C)}
        if args.expect_zero_deviation:
            verdicts["induced_deviation_zero"] = sc.max_deviation == 0
    lines = [f"{f.family}: pairs constant Q = {cert.Q} (search bound {cert.q_max}, "
             f"{cert.excluded} cosets excluded)",
             f"induced quotient map: C = {im.constants.C}, K = {im.constants.K}"]
    if "induced_scaling" in res:
        lines.append(f"induced map fibres vs k = {args.fiber_k}: max deviation "
                     f"{res['induced_scaling']['max_deviation']} on {len(sc.tests)} intervals")
    return res, verdicts, lines


def _as_base(rule, src, tgt):
    from .maps import BaseMap
    return BaseMap(src, tgt, rule)


SCALING_RULES = ("floor_half", "double", "lift_floor_half", "product_floor_half",
                 "floor_quarter", "n_to_one")


def cmd_certify_scaling(args):
    rng = random.Random(args.seed)
    rule = args.rule
    z = Zd(1, 1)
    res, verdicts = {"rule": rule}, {}
    cert = None
    if rule in ("floor_half", "floor_quarter"):
        q = 2 if rule == "floor_half" else 4
        tgt = make_ball(z, args.radius)
        src = make_ball(z, q * args.radius + q)
        fam = default_family(tgt, 3, rng)
        cert = quasi_k_check(lambda x: (x[0] // q,), src, tgt, q, fam, "balls and connected sets",
                             C_max=args.C_max)
    elif rule == "double":
        src = make_ball(z, args.radius)
        tgt = make_ball(z, 2 * args.radius - 4)
        fam = default_family(tgt, 4, rng)
        cert = quasi_k_check(lambda x: (2 * x[0],), src, tgt, Fraction(1, 2), fam,
                             "balls and connected sets", C_max=args.C_max)
        X = [(k,) for k in range(-args.radius, args.radius + 1)]
        Y = [(k,) for k in range(-2 * args.radius, 2 * args.radius + 2)]
        d = lambda a, b: abs(a[0] - b[0])
        pc = partition_certify(lambda x: (2 * x[0],), X, Y, 1, 2, d)
        res["partition"] = pc.to_json()
        verdicts["partition_singletons"] = all(len(P) == 1 for P in pc.P)
        verdicts["partition_pairs"] = all(len(Qp) == 2 for Qp in pc.Q)
        res["partition_problems"] = pc.check(lambda x: (2 * x[0],), d)
        verdicts["partition_check"] = not res["partition_problems"]
    elif rule == "product_floor_half":
        z2 = Zd(2, 1)
        tgt = make_ball(z2, args.radius)
        src = make_ball(z2, 3 * args.radius + 2)
        fam = boxes_family(z2, -(args.radius // 2), args.radius // 2, max_side=4)
        cert = quasi_k_check(lambda x: (x[0] // 2, x[1]), src, tgt, 2, fam, "boxes", C_max=args.C_max)
    elif rule == "lift_floor_half":
        g = LampGraph(Zd(2, 1), 2)
        zones = [(x,) for x in range(-2, 3)]
        sp = [(x, y) for x in range(-2, 3) for y in range(-4, 6)]
        tp = [(x, y) for x in range(-2, 3) for y in range(-2, 3)]
        ip = [(x, y) for x in range(-1, 2) for y in range(-1, 2)]
        boxes = [[(x, y) for x in range(a, b + 1) for y in range(c, e + 1)]
                 for a in range(-1, 2) for b in range(a, 2) for c in range(-1, 2) for e in range(c, 2)]
        cert = lift_scaling_check(g, lambda p: (p[0], p[1] // 2), 2, zones, sp, tp, ip, boxes,
                                  seed=args.seed, C_max=args.C_max)
        res["window"] = {"zones": len(zones), "source_positions": len(sp), "target_positions": len(tp)}
        encode = g.state_to_json
    elif rule == "n_to_one":
        model = make_model(args.model)
        try:
            m = n_to_one_map(model, args.radius, args.n, args.Q)
            res["n_to_one"] = {"model": model.descriptor(), "n": args.n, "Q": args.Q, **_jsonify(m.audit())}
            verdicts["matching_found"] = True
        except NonAmenableRequired as e:
            res["n_to_one"] = {"model": model.descriptor(), "n": args.n, "Q": args.Q,
                               "hall_witness": _jsonify(e.witness), "message": str(e)}
            verdicts["matching_found"] = False
    else:
        raise InputError(f"unknown rule {rule!r}; choose from {', '.join(SCALING_RULES)}")
    lines = [f"scaling rule {rule}"]
    if cert is not None:
        enc = encode if rule == "lift_floor_half" else _enc
        doc = {"schema": SCALING_SCHEMA, "rule": rule, **cert.to_json(enc)}
        res["certificate"] = doc
        verdicts["finite_C"] = cert.verdict
        if args.expect_zero_deviation:
            verdicts["deviation_zero"] = cert.max_deviation == 0
        lines.append(f"k = {cert.k}: C = {cert.C}, max deviation {cert.max_deviation} "
                     f"over {len(cert.tests)} sets ({cert.excluded} excluded)")
    if "partition" in res:
        lines.append(f"partition: {len(res['partition']['P'])} source pieces, all singletons: "
                     f"{verdicts['partition_singletons']}; target pairs: {verdicts['partition_pairs']}")
    if "n_to_one" in res:
        info = res["n_to_one"]
        lines.append(f"{args.n}-to-one map on radius {args.radius} with Q = {args.Q}: "
                     + ("found" if verdicts["matching_found"] else f"impossible ({info['message']})"))
    return res, verdicts, lines


def _jsonify(v):
    if isinstance(v, dict):
        return {str(k) if not isinstance(k, str) else k: _jsonify(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, set, frozenset)):
        items = sorted(v, key=repr) if isinstance(v, (set, frozenset)) else v
        return [_jsonify(x) for x in items]
    if isinstance(v, Fraction):
        return str(v)
    if hasattr(v, "item"):
        return v.item()
    return v


def cmd_qm_validate(args):
    spec = stock_spec(args.spec)
    b = qm_ball(spec, args.radius + args.margin)
    rep = qm_validate(b, args.margin)
    hs = hyperplanes(b)
    audit = audit_hyperplanes(b, hs, args.radius, spec.clique_number())
    cc = clique_coset_audit(b, spec)
    res = {"spec": spec.to_json(), "vertices": len(b), "report": rep.to_json(_enc),
           "hyperplanes": len(hs), "audited_pairs": audit.pairs, "max_k": audit.max_k,
           "distance_mismatches": len(audit.distance_mismatches),
           "recrossings": len(audit.recrossings), "bound_failures": len(audit.bound_failures),
           "clique_coset_failures": len(cc)}
    verdicts = {"axioms": rep.ok, "distance_equals_separating": not audit.distance_mismatches,
                "no_recrossing": not audit.recrossings, "dimension_bound": not audit.bound_failures,
                "cliques_are_cosets": not cc}
    lines = [f"{args.spec}: {len(b)} vertices, {rep.triangle_checked} triangle and "
             f"{rep.quadrangle_checked} quadrangle configurations checked, "
             f"{len(rep.forbidden)} forbidden subgraphs",
             f"{len(hs)} hyperplanes; {audit.pairs} pairs audited, {len(audit.distance_mismatches)} "
             f"distance mismatches, {len(audit.bound_failures)} bound failures"]
    return res, verdicts, lines


def cmd_hyperplanes(args):
    spec = stock_spec(args.spec)
    b = qm_ball(spec, args.radius)
    hs = hyperplanes(b)
    res = {"spec": spec.to_json(), "vertices": len(b), "count": len(hs),
           "hyperplanes": [h.to_json() for h in hs[: args.limit]]}
    sizes = sorted(len(h.sectors) for h in hs)
    lines = [f"{args.spec} radius {args.radius}: {len(hs)} hyperplanes",
             f"sector counts range {sizes[0]}..{sizes[-1]}" if sizes else "no edges"]
    return res, {}, lines


def cmd_box_model_check(args):
    bm = desk_box_model(args.desk, args.section, args.lamps)
    rep = model_check(bm, args.radius)
    res = {"desk": args.desk, "section": bm.section.name, **rep.to_json()}
    lines = [f"box model over {args.desk} ({bm.section.name} section), radius {args.radius}: "
             f"{rep.vertices} vertices, {rep.checked_edges} + {rep.checked_semidirect_edges} edges checked, "
             f"{len(rep.failures)} failures"]
    return res, {"model_check": rep.ok}, lines


def cmd_lamp_coneoff_check(args):
    g = lamp_graph(args.model, args.lamps)
    rep = verify_lamp_coneoff(g, args.radius)
    res = {"graph": g.name, **_jsonify(rep)}
    ok = not rep.get("failures")
    lines = [f"{g.name} truncated at radius {args.radius}: {rep.get('checked_edges')} edges compared, "
             f"{len(rep.get('failures', []))} differences"]
    return res, {"edge_sets_equal": ok}, lines


def cmd_replay(args):
    try:
        doc = json.loads(Path(args.file).read_text())
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read {args.file}: {e}") from None
    if doc.get("schema") == REPORT_SCHEMA:
        doc = doc.get("results", {}).get("certificate") or {}
    schema = doc.get("schema")
    problems: list[str] = []
    if schema == CERT_SCHEMA:
        ok, problems = replay_certificate(doc)
        if ok and not args.no_recompute:
            problems += _recompute(doc)
    elif schema == SCALING_SCHEMA:
        if not replay_scaling(doc):
            problems.append("a recorded set violates |k|A| - |f^-1 A|| <= C |dA| or its deviation")
    else:
        raise InputError(f"{args.file}: no certificate with a known schema")
    res = {"file": str(args.file), "schema": schema, "problems": problems}
    lines = [f"replay of {args.file}: " + ("ok" if not problems else f"{len(problems)} problems")]
    lines += problems[:10]
    return res, {"replay": not problems}, lines


def _recompute(doc) -> list[str]:
    """Rebuild the map from its descriptor and recompute the recorded distances."""
    try:
        f = build_map(doc["map"])
    except (ValueError, KeyError, TypeError):
        return []
    s = doc["samples"]
    if s["kind"] == "all-pairs":
        fresh = certify_base(f, s["radius"]).samples["histogram"]
        return [] if fresh == s["histogram"] else ["recomputed distance histogram differs"]
    from .certify import DistanceOracle
    src, tgt = f.source, f.target
    R = 4 * s["radius"] + 8
    dsrc, dtgt = DistanceOracle(src, R), DistanceOracle(tgt, R)
    for a, b, dx, dy in s["pairs"][:: max(1, len(s["pairs"]) // 200)]:
        x, y = src.state_from_json(a), src.state_from_json(b)
        if dsrc(x, y)[0] != dx or dtgt(f(x), f(y))[0] != dy:
            return [f"recorded pair {a} / {b} does not match recomputed distances"]
    return []


# -- parser --------------------------------------------------------------------------------

def _add_map_args(p):
    p.add_argument("--map", default="cor18_gamma", help="map family")
    p.add_argument("--map-params", default="{}", help="JSON object of family parameters")
    p.add_argument("--source-model", default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wreathlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"wreathlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, func, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", default=None, help="flat key = value file with option defaults")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)
        return p

    p = cmd("ball", cmd_ball, "enumerate a ball in a group model")
    p.add_argument("--model", default="z2")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--budget", type=int, default=1_000_000)
    p.add_argument("--expect-vertices", type=int, default=None)
    p.add_argument("--list-vertices", action="store_true")

    p = cmd("dist", cmd_dist, "lamplighter distance between two states")
    p.add_argument("--model", default="z2wr_z_z2", help="stock lamp graph or base model name")
    p.add_argument("--lamps", type=int, default=None)
    p.add_argument("--source", default="@0,0", help="zone=value;...@position")
    p.add_argument("--target", default="2=1@0,0")
    p.add_argument("--engine", choices=["zone-tsp", "bfs", "both"], default="zone-tsp")
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--cap", type=int, default=12)

    p = cmd("coneoff", cmd_coneoff, "cone off the zones of a ball")
    p.add_argument("--model", default="z2")
    p.add_argument("--radius", type=int, default=4)
    p.add_argument("--pairs", default="", help="x:y pairs separated by |")

    p = cmd("map-apply", cmd_map_apply, "apply a map to points or states")
    _add_map_args(p)
    p.add_argument("--points", default="0,0", help="points or states separated by |")

    p = cmd("certify-qi", cmd_certify_qi, "measure (C, K) for a map")
    _add_map_args(p)
    p.add_argument("--radius", type=int, default=8)
    p.add_argument("--max-support", type=int, default=2)
    p.add_argument("--anchors", type=int, default=20)
    p.add_argument("--n-random", type=int, default=2000)
    p.add_argument("--leaf-radii", default="")
    p.add_argument("--C-max", dest="C_max", default=None)
    p.add_argument("--K-max", dest="K_max", default=None)

    p = cmd("certify-pairs", cmd_certify_pairs, "measure the pairs constant Q of a base map")
    _add_map_args(p)
    p.add_argument("--radius", type=int, default=24)
    p.add_argument("--q-max", type=int, default=2)
    p.add_argument("--C", default=None, help="envelope C used for the target window (default: measured)")
    p.add_argument("--K", default="0")
    p.add_argument("--envelope-radius", type=int, default=6)
    p.add_argument("--Q-max", dest="Q_max", type=int, default=None)
    p.add_argument("--fiber-k", default=None, help="check induced fibre counts against this k")
    p.add_argument("--expect-zero-deviation", action="store_true")

    p = cmd("certify-scaling", cmd_certify_scaling, "quasi-k-to-one certificates")
    p.add_argument("--rule", default="floor_half", choices=SCALING_RULES)
    p.add_argument("--radius", type=int, default=20)
    p.add_argument("--model", default="f2")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--Q", type=int, default=2)
    p.add_argument("--C-max", dest="C_max", default=None)
    p.add_argument("--expect-zero-deviation", action="store_true")

    p = cmd("qm-validate", cmd_qm_validate, "quasi-median checks on a graph product")
    p.add_argument("--spec", default="z3")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--margin", type=int, default=2)

    p = cmd("hyperplanes", cmd_hyperplanes, "list hyperplanes of a graph product window")
    p.add_argument("--spec", default="edge")
    p.add_argument("--radius", type=int, default=3)
    p.add_argument("--limit", type=int, default=200)

    p = cmd("box-model-check", cmd_box_model_check, "compare the box model with the semidirect product")
    p.add_argument("--desk", default="z2", choices=["z2", "heis"])
    p.add_argument("--section", default=None)
    p.add_argument("--lamps", type=int, default=2)
    p.add_argument("--radius", type=int, default=3)

    p = cmd("lamp-coneoff-check", cmd_lamp_coneoff_check, "cone-off commutes with the lamplighter construction")
    p.add_argument("--model", default="z2wr_z_z2")
    p.add_argument("--lamps", type=int, default=None)
    p.add_argument("--radius", type=int, default=2)

    p = cmd("replay", cmd_replay, "re-check a certificate or report file")
    p.add_argument("file")
    p.add_argument("--no-recompute", action="store_true", help="only check internal consistency")
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = ap.parse_args(argv)
    if not args.config:
        return args
    values = load_config(args.config)
    sub = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction)).choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"{args.config}: unknown option(s) for {args.command}: {', '.join(unknown)}")
    # config values become defaults; argparse converts string defaults with each option's type
    try:
        sub.set_defaults(**{k: _config_value(sub, k, v) for k, v in values.items()})
    except ConfigError as e:
        raise ConfigError(f"{args.config}: {e}") from None
    return ap.parse_args(argv)


def _config_value(sub, dest, value: str):
    action = next(a for a in sub._actions if a.dest == dest)
    if isinstance(action, argparse._StoreTrueAction):
        return value.lower() in ("1", "true", "yes", "on")
    if action.choices is not None and value not in action.choices:
        raise ConfigError(f"{dest} = {value!r} is not one of {sorted(action.choices)}")
    if action.type is not None:
        try:
            return action.type(value)
        except ValueError:
            raise ConfigError(f"{dest} = {value!r} is not a valid {action.type.__name__}") from None
    return value


def output_dir(args) -> Path:
    return Path(args.out or os.environ.get("WREATHLAB_OUT") or DEFAULT_OUT)


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "config")}


def write_report(out: Path, command: str, inputs: dict, results: dict, verdicts: dict,
                 lines: list[str]) -> dict:
    ok = all(verdicts.values())
    doc = {"schema": REPORT_SCHEMA, "command": command, "inputs": inputs, "results": results,
           "verdicts": verdicts, "ok": ok}
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{command}.json").write_text(json.dumps(_jsonify(doc), sort_keys=True, indent=1) + "\n")
    if "certificate" in results:
        (out / f"{command}.certificate.json").write_text(
            json.dumps(_jsonify(results["certificate"]), sort_keys=True, indent=1) + "\n")
    summary = [f"wreathlab {command}", *lines, ""]
    summary += [f"  {'PASS' if v else 'FAIL'}  {k}" for k, v in sorted(verdicts.items())]
    summary.append(f"overall: {'PASS' if ok else 'FAIL'}")
    (out / f"{command}.txt").write_text("\n".join(summary) + "\n")
    return doc


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = _apply_config(ap, argv)
    except ConfigError as e:
        print(f"wreathlab: config error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:     # argparse usage errors
        return 2 if e.code else 0
    try:
        results, verdicts, lines = args.func(args)
    except (WreathLabError, ValueError, json.JSONDecodeError) as e:
        print(f"wreathlab {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    doc = write_report(output_dir(args), args.command, _echo(args), results, verdicts, lines)
    print("\n".join(lines))
    print(f"overall: {'PASS' if doc['ok'] else 'FAIL'}  ->  {output_dir(args) / (args.command + '.json')}")
    return 0 if doc["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
