"""Measure-scaling certificates on finite windows.

A map f: X -> Y is quasi-k-to-one when | k|A| - |f^-1(A)| | <= C |dA| for
finite A in Y, where dA is the set of outside vertices adjacent to A. Here
the inequality is checked on explicit test families and C is fitted.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Hashable, Iterable, NamedTuple

from .errors import CertificateNotFound, FiberUnknown, NonAmenableRequired, PreimageEscape
from .groups import GroupModel, Zd
from .metrics import ball as make_ball


class FiniteWindow:
    """A finite vertex set inside a (possibly infinite) graph."""

    def __init__(self, vertices: Iterable, neighbors_fn: Callable[[Hashable], Iterable]):
        self.vertices = list(vertices)
        self._set = set(self.vertices)
        self._nbrs = neighbors_fn

    def __contains__(self, v):
        return v in self._set

    def __len__(self):
        return len(self.vertices)

    def graph_neighbors(self, v) -> list:
        return list(self._nbrs(v))


def window_of(b) -> FiniteWindow:
    """View a Ball as a FiniteWindow with full-graph neighbours."""
    if isinstance(b, FiniteWindow):
        return b
    return FiniteWindow(b.vertices, b.graph_neighbors)


class BoundaryResult(NamedTuple):
    vertices: list
    window_limited: bool


def boundary(window, A: Iterable) -> BoundaryResult:
    """Vertices outside A adjacent to A; flagged when some of them leave the window."""
    w = window_of(window)
    A = set(A)
    out = set()
    for a in A:
        for v in w.graph_neighbors(a):
            if v not in A:
                out.add(v)
    return BoundaryResult(sorted(out), any(v not in w for v in out))


def exterior(window) -> set:
    w = window_of(window)
    return {v for u in w.vertices for v in w.graph_neighbors(u) if v not in w}


@dataclass
class ScalingCertificate:
    k: Fraction
    C: Fraction | None
    family: str
    tests: list = field(default_factory=list)   # dicts: set, size, preimage, boundary, deviation
    worst: dict | None = None
    verdict: bool = False
    max_deviation: Fraction = Fraction(0)
    excluded: int = 0   # sets whose boundary leaves the target window

    def to_json(self, encode: Callable = lambda v: v) -> dict:
        return {
            "k": str(self.k),
            "C": None if self.C is None else str(self.C),
            "family": self.family,
            "verdict": self.verdict,
            "max_deviation": str(self.max_deviation),
            "excluded": self.excluded,
            "worst": None if self.worst is None else _test_json(self.worst, encode),
            "tests": [_test_json(t, encode) for t in self.tests],
        }


def _test_json(t, encode):
    return {"set": [encode(v) for v in t["set"]], "size": t["size"], "preimage": t["preimage"],
            "boundary": t["boundary"], "deviation": str(t["deviation"])}


def replay_scaling(doc: dict) -> bool:
    """Re-evaluate every recorded inequality of a serialised certificate."""
    k = Fraction(doc["k"])
    if doc["C"] is None:
        return not doc["verdict"]
    C = Fraction(doc["C"])
    ok = True
    for t in doc["tests"]:
        dev = abs(k * t["size"] - t["preimage"])
        if dev != Fraction(t["deviation"]) or dev > C * t["boundary"]:
            ok = False
    return ok


def quasi_k_check(f: Callable, source, target, k, family: list[Iterable],
                  family_name: str = "explicit", C_max=None) -> ScalingCertificate:
    """Fit the least C with |k|A| - |f^-1 A|| <= C |dA| over the family.

    Sets whose boundary leaves the target window are skipped and counted.
    Preimages are counted inside the source window. If some vertex just
    outside the source window maps into A, the count would be truncated and
    PreimageEscape is raised.
    """
    k = Fraction(k)
    src = window_of(source)
    tgt = window_of(target)
    images: dict = {}
    for x in src.vertices:
        images.setdefault(f(x), []).append(x)
    outside_images = {f(x) for x in exterior(src)}
    tests, C, worst, maxdev = [], Fraction(0), None, Fraction(0)
    finite = True
    excluded = 0
    for A in family:
        A = sorted(set(A))
        if not A:
            continue
        if any(a in outside_images for a in A):
            raise PreimageEscape(f"a vertex outside the source window maps into a test set near {A[0]!r}")
        bres = boundary(tgt, A)
        if bres.window_limited:
            excluded += 1
            continue
        pre = sum(len(images.get(a, ())) for a in A)
        bd = len(bres.vertices)
        dev = abs(k * len(A) - pre)
        t = {"set": A, "size": len(A), "preimage": pre, "boundary": bd, "deviation": dev}
        tests.append(t)
        maxdev = max(maxdev, dev)
        if bd == 0:
            if dev:
                finite = False
            continue
        ratio = dev / bd
        if worst is None or ratio > C:
            C = max(C, ratio)
            worst = t
    if worst is None and tests:
        worst = tests[0]
    cert = ScalingCertificate(k, C if finite else None, family_name, tests, worst, False, maxdev, excluded)
    cert.verdict = finite and (C_max is None or C <= Fraction(C_max))
    return cert


# -- test families -------------------------------------------------------------------

def balls_family(b, centers: Iterable, radii: Iterable[int]) -> list[list]:
    """Balls (measured inside the window) around the given centres."""
    out = []
    for c in centers:
        i = b.index[c]
        d = b.distances_from(i)
        for r in radii:
            out.append([b.vertices[j] for j in range(len(b)) if 0 <= d[j] <= r])
    return out


def boxes_family(model: Zd, lo: int, hi: int, max_side: int | None = None) -> list[list]:
    """All axis-aligned boxes with corners in [lo, hi]^d (intervals when d = 1)."""
    from itertools import product

    d = model.d
    sides = []
    for a in range(lo, hi + 1):
        for c in range(a, hi + 1):
            if max_side is None or c - a < max_side:
                sides.append((a, c))
    out = []
    for combo in product(sides, repeat=d):
        out.append([p for p in product(*[range(a, c + 1) for a, c in combo])])
    return out


def random_connected_family(window, pool: list, sizes: Iterable[int], per_size: int,
                            rng: random.Random) -> list[list]:
    """Random connected sets grown inside ``pool`` (per_size sets for each size)."""
    w = window_of(window)
    allowed = set(pool)
    out = []
    for size in sizes:
        for _ in range(per_size):
            start = rng.choice(pool)
            S, frontier = {start}, [start]
            while len(S) < size and frontier:
                u = rng.choice(frontier)
                nb = [v for v in w.graph_neighbors(u) if v in allowed and v not in S]
                if not nb:
                    frontier.remove(u)
                    continue
                v = rng.choice(sorted(nb, key=repr))
                S.add(v)
                frontier.append(v)
            out.append(sorted(S))
    return out


def default_family(b, margin: int, rng: random.Random, per_size: int = 200,
                   sizes=(2, 4, 8, 16), ball_radii=(0, 1, 2)) -> list[list]:
    """Balls around interior centres, boxes (for Z^d windows) and random connected sets."""
    interior = [b.vertices[i] for i in b.interior(margin)]
    fam = balls_family(b, interior[: min(len(interior), 40)], ball_radii)
    model = b.model
    if isinstance(model, Zd) and not model.n_axes:
        reach = b.radius - margin
        if model.d == 1:
            fam += boxes_family(model, -reach, reach)
        else:
            side = max(1, reach // model.d)
            fam += boxes_family(model, -side, side, max_side=3)
    fam += random_connected_family(b, interior, sizes, per_size, rng)
    return fam


# -- Whyte matchings ---------------------------------------------------------------------

class MatchResult(NamedTuple):
    matching: dict | None        # domain element -> codomain element
    witness: dict | None         # Hall violator: {"set": [...], "neighborhood": [...]}
    size: int


def _augment(adj: list[list[int]], n_right: int, match_l: list[int], match_r: list[int]) -> None:
    """Kuhn's algorithm from the current matching; augmenting keeps matched vertices matched."""
    for u in range(len(adj)):
        if match_l[u] >= 0:
            continue
        # iterative DFS for an augmenting path
        seen = set()
        stack = [(u, iter(adj[u]))]
        parent_r: dict[int, int] = {}
        found = -1
        while stack and found < 0:
            x, it = stack[-1]
            advanced = False
            for v in it:
                if v in seen:
                    continue
                seen.add(v)
                parent_r[v] = x
                if match_r[v] < 0:
                    found = v
                    break
                stack.append((match_r[v], iter(adj[match_r[v]])))
                advanced = True
                break
            if not advanced and found < 0:
                stack.pop()
        if found >= 0:
            v = found
            while True:
                x = parent_r[v]
                prev = match_l[x]
                match_l[x], match_r[v] = v, x
                if x == u:
                    break
                v = prev


def _hall_witness(adj, match_l, match_r):
    free = [u for u in range(len(adj)) if match_l[u] < 0]
    reached_l, reached_r = set(free), set()
    q = deque(free)
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in reached_r:
                reached_r.add(v)
                w = match_r[v]
                if w >= 0 and w not in reached_l:
                    reached_l.add(w)
                    q.append(w)
    return sorted(reached_l), sorted(reached_r)


def whyte_match(domain: list, codomain: list, Q: int, cost: Callable | None = None,
                adjacency: list[list[int]] | None = None, initial: dict | None = None) -> MatchResult:
    """Injection domain -> codomain moving points by at most Q, or a Hall-violating set.

    Either ``cost(a, b)`` or a precomputed ``adjacency`` (codomain indices per
    domain element) must be supplied. ``initial`` is a partial matching to start
    from; every codomain vertex it covers stays covered.
    """
    cidx = {c: j for j, c in enumerate(codomain)}
    if adjacency is None:
        adjacency = [[j for j, c in enumerate(codomain) if cost(a, c) <= Q] for a in domain]
    match_l = [-1] * len(domain)
    match_r = [-1] * len(codomain)
    if initial:
        didx = {a: i for i, a in enumerate(domain)}
        for a, c in initial.items():
            i, j = didx[a], cidx[c]
            match_l[i], match_r[j] = j, i
    _augment(adjacency, len(codomain), match_l, match_r)
    size = sum(1 for j in match_l if j >= 0)
    if size == len(domain):
        return MatchResult({domain[i]: codomain[j] for i, j in enumerate(match_l)}, None, size)
    L, R = _hall_witness(adjacency, match_l, match_r)
    return MatchResult(None, {"set": [domain[i] for i in L], "neighborhood": [codomain[j] for j in R],
                              "set_size": len(L), "neighborhood_size": len(R)}, size)


@dataclass
class NToOneMap:
    """fbar on a quotient window: every fibre over the radius-R ball has exactly n points."""

    model: GroupModel
    n: int
    Q: int
    radius: int
    forward: dict
    fibers: dict

    def image(self, x):
        if x not in self.forward:
            raise FiberUnknown(f"fbar is not defined at {x!r}")
        return self.forward[x]

    def fiber(self, y) -> list:
        if y not in self.fibers:
            raise FiberUnknown(f"fibre over {y!r} is not certified")
        return self.fibers[y]

    def audit(self) -> dict:
        sizes = {len(f) for f in self.fibers.values()}
        disp = 0
        for x, y in self.forward.items():
            disp = max(disp, self.model.word_length(self.model.mul(self.model.inv(x), y)) or 0)
        return {"fiber_sizes": sorted(sizes), "max_displacement": disp,
                "fibers": len(self.fibers), "defined_on": len(self.forward)}


def n_to_one_map(model: GroupModel, radius: int, n: int, Q: int) -> NToOneMap:
    """Match B_R x Z_n into B_{R+Q} with displacement <= Q and project.

    Points of B_R start matched to their own copy (x, 0), so fbar is defined on
    all of B_R. Raises NonAmenableRequired (with a Hall witness) when no
    matching exists, which is what happens for amenable quotients such as Z
    once R is large compared with Q.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    inner = make_ball(model, radius)
    if n == 1:
        fwd = {x: x for x in inner.vertices}
        return NToOneMap(model, 1, 0, radius, fwd, {x: [x] for x in inner.vertices})
    outer = make_ball(model, radius + Q)
    codomain = outer.vertices
    cidx = outer.index
    domain = [(y, i) for y in inner.vertices for i in range(n)]
    near = {}
    for y in inner.vertices:
        near[y] = [cidx[v] for v in make_ball(model, Q, y).vertices]
    adjacency = [near[y] for y, _ in domain]
    initial = {(x, 0): x for x in inner.vertices}
    res = whyte_match(domain, codomain, Q, adjacency=adjacency, initial=initial)
    if res.matching is None:
        w = res.witness
        w["counting"] = {"domain": len(domain), "codomain": len(codomain)}
        raise NonAmenableRequired(
            f"no displacement-{Q} matching of B_{radius} x Z_{n} into B_{radius + Q}: "
            f"{w['set_size']} points see only {w['neighborhood_size']} targets", w)
    fwd = {x: y for (y, _), x in res.matching.items()}
    fibers: dict = {}
    for x, y in fwd.items():
        fibers.setdefault(y, []).append(x)
    for y in fibers:
        fibers[y].sort(key=model.shortlex_key)
    return NToOneMap(model, n, Q, radius, fwd, fibers)


# -- partition certificates ------------------------------------------------------------------

@dataclass
class PartitionCertificate:
    m: int
    n: int
    P: list          # pieces of size m in the source window (tuples, sorted)
    Q: list          # pieces of size n in the target window
    psi: dict        # index into P -> index into Q
    g: dict          # source vertex -> target vertex with g(P) inside psi(P)
    distance_to_f: int
    diameter: int
    dropped: int     # boundary pieces left out of the certificate

    def check(self, f: Callable, dist: Callable) -> list[str]:
        problems = []
        seen = set()
        for P in self.P:
            if len(P) != self.m:
                problems.append(f"piece {P} has size {len(P)}")
            if seen & set(P):
                problems.append(f"piece {P} overlaps another")
            seen |= set(P)
        seen = set()
        for Qp in self.Q:
            if len(Qp) != self.n:
                problems.append(f"piece {Qp} has size {len(Qp)}")
            if seen & set(Qp):
                problems.append(f"piece {Qp} overlaps another")
            seen |= set(Qp)
        for i, P in enumerate(self.P):
            target = set(self.Q[self.psi[i]])
            for x in P:
                if self.g[x] not in target:
                    problems.append(f"g({x}) leaves its piece")
                if dist(self.g[x], f(x)) > self.distance_to_f:
                    problems.append(f"g({x}) is too far from f({x})")
        return problems

    def to_json(self, encode: Callable = lambda v: v) -> dict:
        return {
            "m": self.m, "n": self.n,
            "P": [[encode(v) for v in P] for P in self.P],
            "Q": [[encode(v) for v in Qp] for Qp in self.Q],
            "psi": [[i, j] for i, j in sorted(self.psi.items())],
            "distance_to_f": self.distance_to_f, "diameter": self.diameter, "dropped": self.dropped,
        }


def _grouping(points: list, centers: list, size: int, dist: Callable, anchor: Callable) -> dict | None:
    """Assign each point to a centre so that every centre receives ``size`` points.

    First try nearest-centre rounding (ties: a centre whose anchor does not
    exceed the point, then the smallest key); fall back to a min-cost
    assignment when fibre sizes come out wrong.
    """
    groups: dict = {c: [] for c in centers}
    for y in points:
        best = min(centers, key=lambda c: (dist(anchor(c), y), not (anchor(c) <= y), c))
        groups[best].append(y)
    if all(len(v) == size for v in groups.values()):
        return groups
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    slots = [(c, i) for c in centers for i in range(size)]
    if len(slots) > len(points):
        return None
    cost = np.array([[dist(anchor(c), y) for y in points] for c, _ in slots], dtype=float)
    rows, cols = linear_sum_assignment(cost)
    groups = {c: [] for c in centers}
    for r, c in zip(rows, cols):
        groups[slots[r][0]].append(points[c])
    return groups


def partition_certify(f: Callable, X: list, Y: list, m: int, n: int, dist_Y: Callable,
                      dist_X: Callable | None = None) -> PartitionCertificate:
    """Pieces of size m in X, of size n in Y, a pairing psi and g near f with g(P) in psi(P).

    Works for ratios m/n whose reduced form has m == 1 or n == 1; other
    ratios raise CertificateNotFound. Pieces that the window cuts off are
    dropped and counted.
    """
    d = gcd(m, n)
    if d != 1:
        raise CertificateNotFound("pass m/n in lowest terms")
    Yset = set(Y)
    if n == 1:
        # f is (close to) m-to-one: group X into fibres over the points of Y
        centers = sorted({f(x) for x in X} & Yset)
        groups = {}
        for x in X:
            groups.setdefault(f(x), []).append(x)
        if any(len(groups[c]) > m for c in centers):
            raise CertificateNotFound("f has fibres larger than m")
        P, Qs, psi, g = [], [], {}, {}
        dropped = 0
        for c in centers:
            fib = sorted(groups[c])
            if len(fib) != m:
                dropped += 1
                continue
            psi[len(P)] = len(Qs)
            P.append(tuple(fib))
            Qs.append((c,))
            for x in fib:
                g[x] = c
        dx = dist_X or (lambda a, b: 0)
        diam = max((dx(a, b) for Pc in P for a in Pc for b in Pc), default=0)
        return PartitionCertificate(m, 1, P, Qs, psi, g, 0, diam, dropped)
    if m == 1:
        centers = sorted(X)
        groups = _grouping(sorted(Y), centers, n, dist_Y, f)
        if groups is None:
            raise CertificateNotFound("window too small to fill every piece")
        P, Qs, psi, g = [], [], {}, {}
        dropped = 0
        for x in centers:
            piece = tuple(sorted(groups[x]))
            if len(piece) != n:
                dropped += 1
                continue
            psi[len(P)] = len(Qs)
            P.append((x,))
            Qs.append(piece)
            g[x] = min(piece, key=lambda y: (dist_Y(y, f(x)), y))
        far = max((dist_Y(g[x], f(x)) for (x,) in P), default=0)
        diam = max((dist_Y(a, b) for Qp in Qs for a in Qp for b in Qp), default=0)
        return PartitionCertificate(1, n, P, Qs, psi, g, far, diam, dropped)
    raise CertificateNotFound(f"ratio {m}/{n} needs both pieces non-trivial; not supported")


# -- lamplighter windows for lifted maps ------------------------------------------------------

def lamp_window(graph, zones: list, positions: Iterable) -> FiniteWindow:
    """Every colouring supported on ``zones``, at every listed position."""
    from itertools import product

    from .lamp import Coloring, LampState

    cols = [Coloring.from_dict(graph.n, dict(zip(zones, vals)))
            for vals in product(range(graph.n), repeat=len(zones))]
    return FiniteWindow([LampState(c, p) for c in cols for p in positions], graph.neighbors)


def lamp_family(graph, interior: list, boxes: list[list], rng: random.Random,
                per_size: int = 50, sizes=(2, 5, 10, 20), max_leaves: int = 3) -> list[list]:
    """Products (a few colourings) x (a box of positions) plus random connected sets of states."""
    cols = sorted({s.coloring for s in interior}, key=lambda c: (len(c), c.entries))
    from .lamp import LampState

    allowed = set(interior)
    fam = []
    for box in boxes:
        for k in range(1, max_leaves + 1):
            S = rng.sample(cols, k)
            A = [LampState(c, p) for c in S for p in box]
            if all(a in allowed for a in A):
                fam.append(A)
    w = FiniteWindow(interior, graph.neighbors)
    fam += random_connected_family(w, interior, sizes, per_size, rng)
    return fam


def lift_scaling_check(graph, beta: Callable, k, zones: list, source_positions: list,
                       target_positions: list, interior_positions: list, boxes: list[list],
                       seed: int = 0, C_max=None) -> ScalingCertificate:
    """quasi_k_check for the lift (c, p) -> (c, beta(p)) on lamplighter test families."""
    from .lamp import LampState

    src = lamp_window(graph, zones, source_positions)
    tgt = lamp_window(graph, zones, target_positions)
    inner = set(interior_positions)
    interior = [s for s in tgt.vertices if s.position in inner]
    fam = lamp_family(graph, interior, boxes, random.Random(seed))
    f = lambda s: LampState(s.coloring, beta(s.position))
    return quasi_k_check(f, src, tgt, k, fam, family_name="lamp products and random connected sets",
                         C_max=C_max)
