"""Measured metric facts about maps: (C, K) envelopes, leaf tables, pairs constants.

Every certificate records what was sampled so that it can be replayed.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from .errors import ConsistencyFailure, InexactSample, SearchBoundExceeded
from .groups import GroupModel, Zd
from .lamp import Coloring, LampGraph, LampState, lamp_distance, leaf_distance
from .metrics import ball as make_ball
from .scaling import FiniteWindow, ScalingCertificate, quasi_k_check

SCHEMA = "wreathlab.certificate/1"
C_GRID = tuple(Fraction(4 + i, 4) for i in range(29))   # 1, 5/4, ..., 8


# -- (C, K) fitting ---------------------------------------------------------------------

@dataclass(frozen=True)
class QIConstants:
    C: Fraction
    K: Fraction

    def to_json(self) -> dict:
        return {"C": str(self.C), "K": str(self.K)}


def _least_K(C: Fraction, dx: np.ndarray, dy: np.ndarray) -> Fraction:
    p, q = C.numerator, C.denominator
    # dY <= C dX + K  and  dX / C - K <= dY
    up = int(((q * dy - p * dx)).max()) if len(dx) else 0
    lo = int(((q * dx - p * dy)).max()) if len(dx) else 0
    return max(Fraction(0), Fraction(up, q), Fraction(lo, p))


def fit_constants(dx: Iterable[int], dy: Iterable[int], grid=C_GRID) -> QIConstants:
    """Least K for each grid value of C; report the smallest K, then the smallest C attaining it."""
    dx = np.asarray(list(dx) if not isinstance(dx, np.ndarray) else dx, dtype=np.int64)
    dy = np.asarray(list(dy) if not isinstance(dy, np.ndarray) else dy, dtype=np.int64)
    best = None
    for C in grid:
        K = _least_K(C, dx, dy)
        if best is None or K < best.K:
            best = QIConstants(C, K)
    return best


def k_frontier(dx: Iterable[int], dy: Iterable[int], grid=tuple(Fraction(c) for c in range(1, 9))) -> list:
    """[(C, least K)] for each C in the grid; shows the trade-off the single fit hides."""
    dx = np.asarray(list(dx), dtype=np.int64)
    dy = np.asarray(list(dy), dtype=np.int64)
    return [(C, _least_K(C, dx, dy)) for C in grid]


@dataclass
class Sample:
    x: object
    y: object
    dX: int
    dY: int
    exact: bool = True


def qi_constants(samples: list[Sample]) -> QIConstants:
    bad = [s for s in samples if not s.exact]
    if bad:
        raise InexactSample(f"{len(bad)} sampled distances are only upper bounds")
    return fit_constants([s.dX for s in samples], [s.dY for s in samples])


# -- distances --------------------------------------------------------------------------

def _as_array(model: GroupModel, pts: list) -> np.ndarray | None:
    if isinstance(model, Zd):
        return np.array(pts, dtype=np.int64).reshape(len(pts), model.d)
    return None


def distance_matrix(model: GroupModel, P: list, Q: list) -> np.ndarray:
    """Word distances between every p in P and q in Q (closed form where known)."""
    a, b = _as_array(model, P), _as_array(model, Q)
    if a is not None:
        return np.abs(a[:, None, :] - b[None, :, :]).sum(-1)
    out = np.empty((len(P), len(Q)), dtype=np.int64)
    for i, p in enumerate(P):
        ip = model.inv(p)
        for j, q in enumerate(Q):
            w = model.word_length(model.mul(ip, q))
            if w is None:
                raise ValueError(f"{model.name} has no closed-form word length")
            out[i, j] = w
    return out


def base_distance_arrays(f: Callable, source: GroupModel, target: GroupModel, radius: int):
    """All pairs of the source ball: (points, images, dX, dY) with dX, dY condensed upper triangles."""
    pts = make_ball(source, radius).vertices
    imgs = [target.check(f(p)) for p in pts]
    iu = np.triu_indices(len(pts), 1)
    dX = distance_matrix(source, pts, pts)[iu]
    dY = distance_matrix(target, imgs, imgs)[iu]
    return pts, imgs, dX, dY


# -- lamp windows and sample plans ---------------------------------------------------------------

class LampWindow:
    """States with position in B_R and colourings on window zones with support <= s."""

    def __init__(self, graph: LampGraph, radius: int, max_support: int = 2, base=None):
        self.graph = graph
        self.radius = radius
        self.max_support = max_support
        self.ball = make_ball(graph.model, radius, base)
        self.positions = self.ball.vertices
        self.zones = sorted({graph.zone_of(p) for p in self.positions}, key=repr)

    def __contains__(self, s: LampState) -> bool:
        return (s.position in self.ball and len(s.coloring) <= self.max_support
                and all(z in set(self.zones) for z in s.coloring.support))

    def random_state(self, rng: random.Random) -> LampState:
        k = rng.randint(0, self.max_support)
        zones = rng.sample(self.zones, min(k, len(self.zones)))
        vals = {z: rng.randint(1, self.graph.n - 1) for z in zones}
        return LampState(Coloring.from_dict(self.graph.n, vals), rng.choice(self.positions))

    def leaf(self, c: Coloring) -> list[LampState]:
        return [LampState(c, p) for p in self.positions]


class DistanceOracle:
    """Exact-flagged lamp distances, reusing one large base ball."""

    def __init__(self, graph: LampGraph, radius: int):
        self.graph = graph
        self.ball = make_ball(graph.model, radius)

    def __call__(self, s1: LampState, s2: LampState):
        g = self.graph
        if s1.position in self.ball:
            r = lamp_distance(g, s1, s2, ball=self.ball)
            if r.exact:
                return r.value, True
        r = lamp_distance(g, s1, s2)
        return r.value, r.exact

    def to_leaf(self, s: LampState, c: Coloring):
        if s.position in self.ball:
            r = leaf_distance(self.graph, s, c, ball=self.ball)
            if r.exact:
                return r.value, True
        r = leaf_distance(self.graph, s, c)
        return r.value, r.exact


def lamp_samples(f: Callable, window: LampWindow, target: LampGraph, rng: random.Random,
                 anchors: int = 20, near: int = 3, n_random: int = 2000,
                 oracle_radius: int | None = None) -> list[Sample]:
    """All window states within distance ``near`` of a few random anchors, plus random pairs."""
    src = window.graph
    R = oracle_radius or 4 * window.radius + 8
    dsrc = DistanceOracle(src, R)
    dtgt = DistanceOracle(target, R)
    out = []
    for _ in range(anchors):
        a = window.random_state(rng)
        fa = f(a)
        seen = {a: 0}
        frontier = [a]
        for depth in range(1, near + 1):
            nxt = []
            for s in frontier:
                for t in src.neighbors(s):
                    if t not in seen:
                        seen[t] = depth
                        nxt.append(t)
            frontier = nxt
        for t, d in seen.items():
            if d == 0 or t not in window:
                continue
            dy, ok = dtgt(fa, f(t))
            out.append(Sample(a, t, d, dy, ok))
    for _ in range(n_random):
        a, b = window.random_state(rng), window.random_state(rng)
        dx, okx = dsrc(a, b)
        dy, oky = dtgt(f(a), f(b))
        out.append(Sample(a, b, dx, dy, okx and oky))
    return out


# -- leaves --------------------------------------------------------------------------------------

@dataclass
class LeafRecord:
    coloring: Coloring
    leaves_hit: list
    per_leaf: dict          # target colouring -> (max distance, witness state)
    deviation: int
    best_leaf: Coloring
    excluded: int = 0

    def to_json(self, graph: LampGraph) -> dict:
        enc = lambda c: [[list(z) if isinstance(z, tuple) else z, v] for z, v in c.entries]
        return {
            "coloring": enc(self.coloring),
            "leaves_hit": [enc(c) for c in self.leaves_hit],
            "per_leaf": [{"leaf": enc(c), "max_distance": d, "witness": graph.state_to_json(w)}
                         for c, (d, w) in self.per_leaf.items()],
            "deviation": self.deviation,
            "best_leaf": enc(self.best_leaf),
            "excluded": self.excluded,
        }


def leaf_analysis(f: Callable, c: Coloring, window: LampWindow, target: LampGraph,
                  oracle_radius: int | None = None) -> LeafRecord:
    """How far the image of the leaf of c (inside the window) is from single target leaves."""
    states = window.leaf(c)
    imgs = [f(s) for s in states]
    hit = sorted({t.coloring for t in imgs}, key=lambda col: (len(col), col.entries))
    oracle = DistanceOracle(target, oracle_radius or 2 * window.radius + 4)
    per, excluded = {}, 0
    for cand in hit:
        worst, wit = 0, None
        for t in imgs:
            d, ok = oracle.to_leaf(t, cand)
            if not ok:
                excluded += 1
                continue
            if d > worst or wit is None:
                worst, wit = d, t
        per[cand] = (worst, wit)
    best = min(hit, key=lambda col: per[col][0])
    return LeafRecord(c, hit, per, per[best][0], best, excluded)


# -- pairs constants -------------------------------------------------------------------------

@dataclass
class PairsCertificate:
    Q: int
    choices: dict           # source zone -> (target zone, Hausdorff estimate)
    converse: dict          # target zone -> (source zone, Hausdorff estimate)
    radius: int
    target_radius: int
    q_max: int
    source: GroupModel
    target: GroupModel
    excluded: int = 0       # cosets whose candidates leave the checked windows

    def to_json(self) -> dict:
        enc = lambda z: list(z) if isinstance(z, tuple) else z
        return {"Q": self.Q, "radius": self.radius, "target_radius": self.target_radius,
                "search_bound": self.q_max, "excluded": self.excluded,
                "choices": [[enc(a), enc(b), h] for a, (b, h) in sorted(self.choices.items())],
                "converse": [[enc(b), enc(a), h] for b, (a, h) in sorted(self.converse.items())]}


def _zone_dist(model: GroupModel, z1, z2) -> int:
    return model.zone_distance(z1, z2)


def pairs_certificate(f: Callable, source: GroupModel, target: GroupModel, radius: int,
                      C: Fraction | int = 2, K: Fraction | int = 0, q_max: int = 3) -> PairsCertificate:
    """Least Q for which both Hausdorff clauses hold on the window.

    Source cosets are the zones met by the ball of the given radius, each
    truncated to that ball. Image points are compared with whole target
    cosets (distance to a coset is the quotient distance). The converse
    direction is checked on target points of depth <= radius / C - K - q_max,
    where every witness within q_max provably comes from the source window.
    """
    b = make_ball(source, radius)
    pts = b.vertices
    zone_pts: dict = {}
    for p in pts:
        zone_pts.setdefault(source.zone_of(p), []).append(p)
    imgs = {p: target.check(f(p)) for p in pts}
    rt = int(Fraction(radius) / Fraction(C) - Fraction(K)) - q_max
    if rt < 0:
        raise SearchBoundExceeded(f"radius {radius} too small for C={C}, K={K}, bound {q_max}")
    tb = make_ball(target, rt)
    tgt_zone_pts: dict = {}
    for y in tb.vertices:
        tgt_zone_pts.setdefault(target.zone_of(y), []).append(y)
    TQ = target.quotient()

    hcache: dict = {}

    def hausdorff(zs, zt) -> int:
        key = (zs, zt)
        if key in hcache:
            return hcache[key]
        A = zone_pts[zs]
        h1 = max(_zone_dist(target, target.zone_of(imgs[a]), zt) for a in A)
        B = tgt_zone_pts.get(zt, [])
        h2 = 0
        if B:
            D = distance_matrix(target, B, [imgs[a] for a in A])
            h2 = int(D.min(axis=1).max())
            if h2 > q_max:
                h2 = q_max + 1   # beyond the bound the window value is not trustworthy
        hcache[key] = max(h1, h2)
        return hcache[key]

    choices = {}
    excluded = 0
    for zs in sorted(zone_pts):
        anchor = target.zone_of(imgs[zone_pts[zs][0]])
        cands = make_ball(TQ, q_max, anchor).vertices
        if not all(zt in tgt_zone_pts for zt in cands):
            # some candidate coset misses the checked target window: not interior
            excluded += 1
            continue
        scored = sorted(((hausdorff(zs, zt), zt) for zt in cands), key=lambda t: (t[0], t[1]))
        h, zt = scored[0]
        if h > q_max:
            raise SearchBoundExceeded(f"no target coset within {q_max} of the image of {zs!r}")
        choices[zs] = (zt, h)
    converse = {}
    # source zones whose images come near each target zone
    near: dict = {}
    for zs, A in zone_pts.items():
        for a in A:
            near.setdefault(target.zone_of(imgs[a]), set()).add(zs)
    for zt in sorted(tgt_zone_pts):
        cands = set()
        for z in make_ball(TQ, q_max, zt).vertices:
            cands |= near.get(z, set())
        if not cands:
            raise SearchBoundExceeded(f"no source coset maps near {zt!r}")
        if not cands <= set(choices):
            excluded += 1
            continue
        h, zs = min((hausdorff(zs, zt), zs) for zs in cands)
        if h > q_max:
            raise SearchBoundExceeded(f"target coset {zt!r} is not within {q_max} of any image coset")
        converse[zt] = (zs, h)
    Q = max([h for _, h in choices.values()] + [h for _, h in converse.values()])
    return PairsCertificate(Q, choices, converse, radius, rt, q_max, source, target, excluded)


@dataclass
class InducedMap:
    mapping: dict          # source zone -> target zone
    constants: QIConstants
    frontier: list          # (C, least K) for C = 1..8
    Q: int
    source_quotient: GroupModel
    target_quotient: GroupModel

    def __call__(self, z):
        return self.mapping[z]


def induced_map(cert: PairsCertificate, inner: int | None = None) -> InducedMap:
    """Quotient map from the chosen cosets, with its measured (C, K).

    Any other target coset within Q of the same image must lie within 2Q of
    the chosen one; otherwise ConsistencyFailure is raised.
    """
    SQ, TQ = cert.source.quotient(), cert.target.quotient()
    check_induced_consistency(cert)
    mapping = {zs: zt for zs, (zt, _) in cert.choices.items()}
    inner = cert.radius // 2 if inner is None else inner
    zones = [z for z in mapping if (SQ.word_length(z) or 0) <= inner]
    dx, dy = [], []
    for a, b in combinations(zones, 2):
        dx.append(SQ.word_length(SQ.mul(SQ.inv(a), b)))
        dy.append(TQ.word_length(TQ.mul(TQ.inv(mapping[a]), mapping[b])))
    return InducedMap(mapping, fit_constants(dx, dy), k_frontier(dx, dy), cert.Q, SQ, TQ)


def check_induced_consistency(cert: PairsCertificate) -> None:
    """Every source coset's image lies within Q of its chosen coset, and two
    cosets that both work are at most 2Q apart."""
    TQ = cert.target.quotient()
    for zs, (zt, h) in cert.choices.items():
        if h > cert.Q:
            raise ConsistencyFailure(f"coset {zs!r} is farther than Q from its choice")
    for zt, (zs, h) in cert.converse.items():
        chosen = cert.choices[zs][0]
        d = TQ.word_length(TQ.mul(TQ.inv(chosen), zt))
        if d > 2 * cert.Q:
            raise ConsistencyFailure(f"cosets {chosen!r} and {zt!r} both fit {zs!r} but are {d} apart")


def induced_fibre_check(im: InducedMap, k) -> ScalingCertificate:
    """Fibre counts of a monotone induced map Z -> Z on target intervals.

    Source cosets are the ones the pairs certificate qualified. Intervals lie
    strictly between the images of the two extreme source cosets, so by
    monotonicity no unqualified coset can map into them.
    """
    TQ, SQ = im.target_quotient, im.source_quotient
    if not all(isinstance(M, Zd) and M.d == 1 for M in (TQ, SQ)):
        raise ValueError("fibre counts are implemented for quotient Z only")
    src = sorted(im.mapping)
    vals = [im.mapping[z][0] for z in src]
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise ValueError("induced map is not monotone; interval fibre counts would be unreliable")
    lo, hi = vals[0] + 1, vals[-1] - 1
    nb = lambda M: (lambda z: [w for _, w in M.right_neighbors(z)])
    tgt_window = FiniteWindow([(v,) for v in range(lo - 1, hi + 2)], nb(TQ))
    src_window = FiniteWindow(src, nb(SQ))
    fam = [[(v,) for v in range(a, b + 1)] for a in range(lo, hi + 1) for b in range(a, hi + 1)]
    outside = ("outside",)
    return quasi_k_check(lambda z: im.mapping.get(z, outside), src_window, tgt_window, Fraction(k),
                         fam, "intervals")


# -- non-aptolicity -----------------------------------------------------------------------

def component_distance(f1: Callable, f2: Callable, model: GroupModel, radius: int) -> int:
    """sup over the window of d(f1(p), f2(p))."""
    pts = make_ball(model, radius).vertices
    a = [f1(p) for p in pts]
    b = [f2(p) for p in pts]
    return max(model.word_length(model.mul(model.inv(x), y)) for x, y in zip(a, b))


# -- certificates -------------------------------------------------------------------------

@dataclass
class Certificate:
    map: dict
    constants: QIConstants
    samples: dict                       # descriptor plus recorded data
    Q: int | None = None
    leaves: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.verdicts.values())

    def to_json(self) -> dict:
        return {"schema": SCHEMA, "map": self.map, "constants": self.constants.to_json(),
                "Q": self.Q, "samples": self.samples, "leaves": self.leaves,
                "verdicts": self.verdicts, "extra": self.extra}


def histogram(dx: Iterable[int], dy: Iterable[int]) -> list[list[int]]:
    c = Counter(zip((int(v) for v in dx), (int(v) for v in dy)))
    return [[a, b, n] for (a, b), n in sorted(c.items())]


def certify_base(f, radius: int, C_max=None, K_max=None) -> Certificate:
    """All-pairs envelope of a base map on the source ball."""
    pts, imgs, dX, dY = base_distance_arrays(f.apply, f.source, f.target, radius)
    consts = fit_constants(dX, dY)
    verdicts = {}
    if C_max is not None:
        verdicts["C"] = consts.C <= Fraction(C_max)
    if K_max is not None:
        verdicts["K"] = consts.K <= Fraction(K_max)
    samples = {"kind": "all-pairs", "radius": radius, "count": int(len(dX)),
               "histogram": histogram(dX, dY)}
    return Certificate(f.descriptor(), consts, samples, verdicts=verdicts)


def certify_lamp(f, window: LampWindow, target: LampGraph, seed: int = 0, anchors: int = 20,
                 n_random: int = 2000, C_max=None, K_max=None) -> Certificate:
    rng = random.Random(seed)
    samples = lamp_samples(f, window, target, rng, anchors=anchors, n_random=n_random)
    consts = qi_constants(samples)
    src = window.graph
    recorded = [[src.state_to_json(s.x), src.state_to_json(s.y), s.dX, s.dY] for s in samples]
    verdicts = {}
    if C_max is not None:
        verdicts["C"] = consts.C <= Fraction(C_max)
    if K_max is not None:
        verdicts["K"] = consts.K <= Fraction(K_max)
    desc = {"kind": "lamp", "radius": window.radius, "max_support": window.max_support,
            "anchors": anchors, "near": 3, "random": n_random, "seed": seed,
            "count": len(samples), "pairs": recorded}
    return Certificate(f.descriptor(), consts, desc, verdicts=verdicts)


def replay_certificate(doc: dict) -> tuple[bool, list[str]]:
    """Recompute the fit from the recorded distances and check every recorded pair."""
    problems = []
    if doc.get("schema") != SCHEMA:
        problems.append(f"unknown schema {doc.get('schema')!r}")
        return False, problems
    s = doc["samples"]
    if s["kind"] == "all-pairs":
        dx = [a for a, b, n in s["histogram"]]
        dy = [b for a, b, n in s["histogram"]]
    else:
        dx = [p[2] for p in s["pairs"]]
        dy = [p[3] for p in s["pairs"]]
    fit = fit_constants(dx, dy)
    C, K = Fraction(doc["constants"]["C"]), Fraction(doc["constants"]["K"])
    if (fit.C, fit.K) != (C, K):
        problems.append(f"refit gives C={fit.C}, K={fit.K}; recorded C={C}, K={K}")
    for a, b in zip(dx, dy):
        if not (Fraction(a) / C - K <= b <= C * a + K):
            problems.append(f"pair with dX={a}, dY={b} violates the envelope")
            break
    return not problems, problems
