"""Lamplighter graphs over the partition of a base group into zones (left N-cosets).

A vertex is a pair (coloring, position). Move edges follow the base Cayley
graph; recolor edges change the value of the zone under the lamplighter.

Two independent distance engines are provided:

* ``bfs``       bidirectional breadth-first search in the lamplighter graph
* ``zone-tsp``  length of the shortest base walk from p1 to p2 visiting every
                zone where the colorings differ, plus one per such zone,
                solved by Held-Karp over (visited zones, concrete entry vertex)
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import (BudgetExceeded, EncodingError, InexactBudget, LampOrderMismatch,
                     SupportTooLarge, ZoneNotPresent)
from .groups import GroupModel
from .metrics import DEFAULT_BUDGET, Ball, ball as make_ball

DEFAULT_SUPPORT_CAP = 12


@dataclass(frozen=True, order=True)
class Coloring:
    """Finitely supported zone -> Z_n assignment; only nonzero values are stored."""

    n: int
    entries: tuple = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("lamp order must be >= 2")

    @classmethod
    def from_dict(cls, n: int, values: dict) -> "Coloring":
        items = sorted((z, v % n) for z, v in values.items() if v % n)
        return cls(n, tuple(items))

    @classmethod
    def delta(cls, n: int, *zones, value: int = 1) -> "Coloring":
        return cls.from_dict(n, {z: value for z in zones})

    def as_dict(self) -> dict:
        return dict(self.entries)

    def get(self, zone) -> int:
        for z, v in self.entries:
            if z == zone:
                return v
        return 0

    @property
    def support(self) -> tuple:
        return tuple(z for z, _ in self.entries)

    def with_value(self, zone, value: int) -> "Coloring":
        d = self.as_dict()
        d[zone] = value
        return Coloring.from_dict(self.n, d)

    def __mul__(self, other: "Coloring") -> "Coloring":
        if other.n != self.n:
            raise LampOrderMismatch(f"lamp orders {self.n} and {other.n} differ")
        d = self.as_dict()
        for z, v in other.entries:
            d[z] = d.get(z, 0) + v
        return Coloring.from_dict(self.n, d)

    def inv(self) -> "Coloring":
        return Coloring(self.n, tuple((z, self.n - v) for z, v in self.entries))

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True, order=True)
class LampState:
    coloring: Coloring
    position: object


@dataclass
class DistanceResult:
    value: int
    exact: bool
    witness: list[str]
    engine: str
    detail: dict = field(default_factory=dict)


def support_diff(c1: Coloring, c2: Coloring) -> set:
    """Zones where two colorings differ."""
    if c1.n != c2.n:
        raise LampOrderMismatch(f"lamp orders {c1.n} and {c2.n} differ")
    return set((c1.inv() * c2).support)


class LampGraph:
    """The lamplighter graph with lamp group Z_n over the zones of ``model``.

    ``zone_of`` defaults to the model's coset projection; passing
    ``lambda g: g`` gives the standard (unpermuted) wreath product.
    """

    def __init__(self, model: GroupModel, n: int, zone_of: Callable | None = None, name: str = ""):
        if n < 2:
            raise ValueError("lamp order must be >= 2")
        self.model = model
        self.n = n
        self.zone_of = zone_of or model.zone_of
        self.name = name or f"Z{n} wr {model.name}"

    def __repr__(self):
        return f"<LampGraph {self.name}>"

    def state(self, coloring: Coloring | dict | None = None, position=None) -> LampState:
        if coloring is None:
            coloring = Coloring(self.n)
        elif isinstance(coloring, dict):
            coloring = Coloring.from_dict(self.n, coloring)
        elif coloring.n != self.n:
            raise LampOrderMismatch("coloring has the wrong lamp order")
        pos = self.model.identity if position is None else self.model.check(position)
        return LampState(coloring, pos)

    def zone_label(self, zone) -> str:
        return json.dumps(_jsonable(zone), separators=(",", ":"))

    def recolor_label(self, zone, value: int) -> str:
        return f"recolor({self.zone_label(zone)},{value})"

    def labelled_neighbors(self, s: LampState) -> list[tuple[str, LampState]]:
        out = [(lab, LampState(s.coloring, q)) for lab, q in self.model.right_neighbors(s.position)]
        zone = self.zone_of(s.position)
        cur = s.coloring.get(zone)
        for v in range(self.n):
            if v != cur:
                out.append((self.recolor_label(zone, v), LampState(s.coloring.with_value(zone, v), s.position)))
        return out

    def neighbors(self, s: LampState) -> list[LampState]:
        return [t for _, t in self.labelled_neighbors(s)]

    # -- serialisation ------------------------------------------------------
    def state_to_json(self, s: LampState) -> dict:
        return {
            "n": self.n,
            "entries": [{"zone": _jsonable(z), "value": v} for z, v in s.coloring.entries],
            "position": self.model.to_json(s.position),
        }

    def state_from_json(self, data: dict) -> LampState:
        if int(data["n"]) != self.n:
            raise LampOrderMismatch("serialised state has a different lamp order")
        vals = {_hashable(e["zone"]): int(e["value"]) for e in data["entries"]}
        return self.state(vals, self.model.from_json(data["position"]))


def _jsonable(v):
    return [_jsonable(x) for x in v] if isinstance(v, tuple) else v


def _hashable(v):
    return tuple(_hashable(x) for x in v) if isinstance(v, list) else v


def neighbors(graph: LampGraph, state: LampState) -> list[LampState]:
    return graph.neighbors(state)


def replay_witness(graph: LampGraph, start: LampState, witness: Iterable[str]) -> LampState:
    """Apply a witness walk (generator labels and recolor events) to ``start``."""
    s = start
    for step in witness:
        if step.startswith("recolor(") and step.endswith(")"):
            body = step[len("recolor("):-1]
            zone_txt, _, val = body.rpartition(",")
            zone = _hashable(json.loads(zone_txt))
            if zone != graph.zone_of(s.position):
                raise EncodingError(f"{step} does not recolor the current zone")
            s = LampState(s.coloring.with_value(zone, int(val)), s.position)
        elif step in graph.model.generators:
            s = LampState(s.coloring, graph.model.mul(s.position, graph.model.generators[step]))
        else:
            raise EncodingError(f"unknown witness step {step!r}")
    return s


# -- engine 1: bidirectional BFS in the lamplighter graph itself -------------

class _Encoder:
    """Packs states into (int, int) pairs: coloring bits per zone, position id."""

    def __init__(self, graph: LampGraph):
        self.graph = graph
        self.bits = max(1, (graph.n - 1).bit_length())
        self.mask = (1 << self.bits) - 1
        self.pos: list = []
        self.pid: dict = {}
        self.pos_zone: list[int] = []
        self.pos_nbrs: list = []
        self.zones: list = []
        self.zid: dict = {}
        self.gens = list(graph.model.generators.items())

    def zone_id(self, z) -> int:
        if z not in self.zid:
            self.zid[z] = len(self.zones)
            self.zones.append(z)
        return self.zid[z]

    def pos_id(self, p) -> int:
        i = self.pid.get(p)
        if i is None:
            i = self.pid[p] = len(self.pos)
            self.pos.append(p)
            self.pos_zone.append(self.zone_id(self.graph.zone_of(p)))
            self.pos_nbrs.append(None)
        return i

    def moves(self, i: int) -> list[int]:
        nb = self.pos_nbrs[i]
        if nb is None:
            mul, p = self.graph.model.mul, self.pos[i]
            nb = self.pos_nbrs[i] = [self.pos_id(mul(p, s)) for _, s in self.gens]
        return nb

    def encode(self, s: LampState) -> tuple[int, int]:
        code = 0
        for z, v in s.coloring.entries:
            code |= v << (self.bits * self.zone_id(z))
        return code, self.pos_id(s.position)

    def successors(self, st):
        code, pid = st
        out = [(code, q) for q in self.moves(pid)]
        shift = self.bits * self.pos_zone[pid]
        cur = (code >> shift) & self.mask
        base = code & ~(self.mask << shift)
        for v in range(self.graph.n):
            if v != cur:
                out.append((base | (v << shift), pid))
        return out

    def step_label(self, a, b) -> str:
        (_, pa), (cb, pb) = a, b
        if pa != pb:
            j = self.moves(pa).index(pb)
            return self.gens[j][0]
        zid = self.pos_zone[pa]
        v = (cb >> (self.bits * zid)) & self.mask
        return self.graph.recolor_label(self.zones[zid], v)


def _bfs_distance(graph: LampGraph, s1: LampState, s2: LampState, budget: int) -> DistanceResult:
    enc = _Encoder(graph)
    start, goal = enc.encode(s1), enc.encode(s2)
    if start == goal:
        return DistanceResult(0, True, [], "bfs")
    par = ({start: None}, {goal: None})
    depth = ({start: 0}, {goal: 0})
    fronts = ([start], [goal])
    while fronts[0] and fronts[1]:
        side = 0 if len(fronts[0]) <= len(fronts[1]) else 1
        mine, other = par[side], par[1 - side]
        dmine, dother = depth[side], depth[1 - side]
        nxt, best = [], None
        for st in fronts[side]:
            d = dmine[st] + 1
            for ns in enc.successors(st):
                if ns in mine:
                    continue
                mine[ns] = st
                dmine[ns] = d
                nxt.append(ns)
                if ns in other:
                    tot = d + dother[ns]
                    if best is None or tot < best[0]:
                        best = (tot, ns)
        if len(par[0]) + len(par[1]) > budget:
            raise InexactBudget(f"bfs budget of {budget} states exhausted")
        if best is not None:
            meet = best[1]
            left = [meet]
            while par[0][left[-1]] is not None:
                left.append(par[0][left[-1]])
            right = [meet]
            while par[1][right[-1]] is not None:
                right.append(par[1][right[-1]])
            chain = left[::-1] + right[1:]
            witness = [enc.step_label(a, b) for a, b in zip(chain, chain[1:])]
            return DistanceResult(best[0], True, witness, "bfs", {"states": len(par[0]) + len(par[1])})
        fronts = (nxt, fronts[1]) if side == 0 else (fronts[0], nxt)
    raise InexactBudget("states are disconnected")


# -- engine 2: Held-Karp over zones ---------------------------------------------

def _held_karp(b: Ball, src: int, dst: int | None, members: list[np.ndarray]):
    """Shortest walk from src visiting one vertex of each member set, ending at dst
    (or anywhere when dst is None). Returns (length, [entry vertex per zone in visit order])."""
    k = len(members)
    if k == 0:
        if dst is None:
            return 0, []
        d = int(b.distances_from(src)[dst])
        return d, []
    flat = [int(v) for m in members for v in m]
    rows = b.distance_rows([src] + flat)
    big = np.iinfo(np.int64).max // 4

    def clean(x):
        return np.where(x < 0, big, x)

    mats = [clean(np.stack([rows[int(v)] for v in m])) for m in members]
    # block[j][l] = distance matrix members[j] x members[l]
    block = [[mats[j][:, members[l]] for l in range(k)] for j in range(k)]
    start = clean(rows[src])
    table: dict = {}
    for j in range(k):
        table[(1 << j, j)] = (start[members[j]], None, None)
    for mask in range(1, 1 << k):
        for j in range(k):
            entry = table.get((mask, j))
            if entry is None:
                continue
            val = entry[0]
            for l in range(k):
                if mask & (1 << l):
                    continue
                tot = val[:, None] + block[j][l]
                arg = tot.argmin(axis=0)
                cand = tot[arg, np.arange(tot.shape[1])]
                key = (mask | (1 << l), l)
                cur = table.get(key)
                if cur is None:
                    table[key] = (cand, np.full(len(cand), j), arg)
                else:
                    better = cand < cur[0]
                    if better.any():
                        nv = np.where(better, cand, cur[0])
                        nj = np.where(better, j, cur[1])
                        na = np.where(better, arg, cur[2])
                        table[key] = (nv, nj, na)
    full = (1 << k) - 1
    best, best_j, best_pos = big, -1, -1
    for j in range(k):
        val = table[(full, j)][0]
        if dst is not None:
            tail = np.array([rows[int(v)][dst] for v in members[j]])
            tail = np.where(tail < 0, big, tail)
            val = val + tail
        pos = int(val.argmin())
        if val[pos] < best:
            best, best_j, best_pos = int(val[pos]), j, pos
    if best >= big:
        return None, None
    order = []
    mask, j, pos = full, best_j, best_pos
    while True:
        order.append((j, int(members[j][pos])))
        _, pj, pa = table[(mask, j)]
        if pj is None:
            break
        mask, j, pos = mask & ~(1 << j), int(pj[pos]), int(pa[pos])
    return best, order[::-1]


def _walk_labels(b: Ball, stops: list[int]) -> list[list[str]]:
    segs = []
    for a, c in zip(stops, stops[1:]):
        path = b.path(a, c)
        segs.append([b.label_between(x, y) for x, y in zip(path, path[1:])])
    return segs


def _zone_tsp(graph: LampGraph, s1: LampState, target: Coloring, p2, *, ball: Ball | None,
              radius: int | None, budget: int, cap: int) -> DistanceResult:
    diff = sorted(support_diff(s1.coloring, target))
    if len(diff) > cap:
        raise SupportTooLarge(f"{len(diff)} differing zones exceeds cap {cap}")
    model, p1 = graph.model, s1.position
    own = ball is None
    R = radius if radius is not None else 4
    result = None
    while True:
        if own:
            try:
                b = make_ball(model, R, p1, budget=budget)
            except BudgetExceeded:
                if result is None:
                    raise
                return result
        else:
            b = ball
        if p1 not in b:
            raise ZoneNotPresent("start position lies outside the supplied window")
        src = b.index[p1]
        d1 = b.distances_from(src)
        zones = b.zone_members(graph.zone_of)
        present = all(z in zones for z in diff) and (p2 is None or p2 in b)
        if present:
            members = [np.array(zones[z]) for z in diff]
            dz = [int(d1[m][d1[m] >= 0].min()) for m in members]
            dst = None if p2 is None else b.index[p2]
            need = 2 * sum(dz) + (0 if dst is None else int(d1[dst]))
            length, order = _held_karp(b, src, dst, members)
            if length is not None:
                # any walk no longer than the one found stays inside the window
                exact = b.complete or int(b.dist_from_base[src]) + length <= b.radius
                stops = [src] + [v for _, v in order] + ([dst] if dst is not None else [])
                segs = _walk_labels(b, stops)
                witness = list(segs[0]) if segs else []
                for i, (j, _) in enumerate(order):
                    z = diff[j]
                    witness.append(graph.recolor_label(z, target.get(z)))
                    if i + 1 < len(segs):
                        witness.extend(segs[i + 1])
                result = DistanceResult(length + len(diff), exact, witness, "zone-tsp",
                                        {"radius": b.radius, "guard": need})
                if exact or not own or radius is not None:
                    return result
                R = max(need, R + 1)
                continue
        if not own or radius is not None:
            if result is not None:
                return result
            raise ZoneNotPresent("a differing zone or the end position misses the window")
        R *= 2


def lamp_distance(graph: LampGraph, s1: LampState, s2: LampState, engine: str = "zone-tsp", *,
                  radius: int | None = None, ball: Ball | None = None,
                  budget: int = DEFAULT_BUDGET, cap: int = DEFAULT_SUPPORT_CAP) -> DistanceResult:
    """Distance between two lamplighter states.

    ``zone-tsp`` builds (or reuses) a base ball around s1.position. Without an
    explicit ``radius`` it grows the ball until the exactness guard holds.
    """
    if s1.coloring.n != graph.n or s2.coloring.n != graph.n:
        raise LampOrderMismatch("state lamp order differs from the graph")
    if engine == "bfs":
        return _bfs_distance(graph, s1, s2, budget)
    if engine == "zone-tsp":
        return _zone_tsp(graph, s1, s2.coloring, s2.position, ball=ball, radius=radius,
                         budget=budget, cap=cap)
    raise ValueError(f"unknown engine {engine!r}")


def leaf_distance(graph: LampGraph, s: LampState, coloring: Coloring, *, radius: int | None = None,
                  ball: Ball | None = None, budget: int = DEFAULT_BUDGET,
                  cap: int = DEFAULT_SUPPORT_CAP) -> DistanceResult:
    """Distance from ``s`` to the leaf {(coloring, p)}: same walk problem with a free end."""
    return _zone_tsp(graph, s, coloring, None, ball=ball, radius=radius, budget=budget, cap=cap)


# stock lamplighter graphs -----------------------------------------------------

def stock_lamp_graph(name: str) -> LampGraph:
    from .groups import make_model

    key = name.lower()
    if key == "z2wr_z":
        return LampGraph(make_model("z"), 2, name="Z2 wr Z")
    if key == "z3wr_z":
        return LampGraph(make_model("z"), 3, name="Z3 wr Z")
    if key == "z2wr_z_z2":
        return LampGraph(make_model("z2"), 2, name="Z2 wr_Z Z2")
    raise KeyError(name)
