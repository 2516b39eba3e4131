"""Explicit maps between lamplighter graphs and base groups, and cone-off constructions.

Every map is a :class:`QIMap`: a family tag, a JSON-able parameter dict and an
``apply`` method. Lamp maps act on :class:`LampState`, base maps on elements.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import FiberUnknown, TruncationMismatch, ZonesNotBounded
from .groups import GroupModel, Zd
from .lamp import Coloring, LampGraph, LampState
from .metrics import Ball, ball as make_ball, bfs_ball

FAMILIES = ("aptolic", "prop410", "example48", "cor18_gamma", "cor18_eta",
            "prop51_split", "partition_aptolic", "coneoff_collapse")


class QIMap:
    family = "abstract"
    acts_on = "lamp"

    def __init__(self, source, target, params: dict | None = None):
        self.source = source
        self.target = target
        self.params = params or {}

    def apply(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.apply(x)

    def inverse(self) -> "QIMap | None":
        return None

    def descriptor(self) -> dict:
        return {"family": self.family, "params": self.params}

    def __repr__(self):
        return f"<{self.family} {self.params}>"


class BaseMap(QIMap):
    """A map between base groups given by a rule."""

    acts_on = "base"
    family = "base"

    def __init__(self, source: GroupModel, target: GroupModel, rule: Callable, params=None,
                 family: str | None = None, inverse_rule: Callable | None = None):
        super().__init__(source, target, params)
        self.rule = rule
        self.inverse_rule = inverse_rule
        if family:
            self.family = family

    def apply(self, x):
        return self.rule(x)

    def inverse(self):
        if self.inverse_rule is None:
            return None
        return BaseMap(self.target, self.source, self.inverse_rule,
                       {**self.params, "inverted": True}, self.family, self.rule)


def compose(f: QIMap, g: QIMap) -> BaseMap:
    """g after f, for base maps."""
    return BaseMap(f.source, g.target, lambda x: g.apply(f.apply(x)),
                   {"first": f.descriptor(), "then": g.descriptor()}, "composite")


# -- lamp map families -------------------------------------------------------------

class AptolicMap(QIMap):
    """(c, p) -> (alpha(c), beta(p))."""

    family = "aptolic"

    def __init__(self, source: LampGraph, target: LampGraph, alpha: Callable, beta: Callable,
                 params=None, alpha_inv: Callable | None = None, beta_inv: Callable | None = None):
        super().__init__(source, target, params)
        self.alpha, self.beta = alpha, beta
        self.alpha_inv, self.beta_inv = alpha_inv, beta_inv

    def apply(self, s: LampState) -> LampState:
        return LampState(self.alpha(s.coloring), self.beta(s.position))

    def base_component(self, c: Coloring | None = None) -> Callable:
        return self.beta

    def inverse(self):
        if self.alpha_inv is None or self.beta_inv is None:
            return None
        return AptolicMap(self.target, self.source, self.alpha_inv, self.beta_inv,
                          {**self.params, "inverted": True}, self.alpha, self.beta)


def lift_base_map(graph: LampGraph, beta: Callable, params=None, beta_inv=None) -> AptolicMap:
    """Aptolic map with alpha = identity; beta must preserve zones setwise."""
    return AptolicMap(graph, graph, lambda c: c, beta, params or {"alpha": "identity"},
                      (lambda c: c), beta_inv)


class SupportShiftMap(QIMap):
    """(c, p) -> (c, p z^{|supp c|}) for z in N of infinite order."""

    family = "prop410"

    def __init__(self, graph: LampGraph, z):
        model = graph.model
        z = model.check(z)
        if z == model.identity or not model.in_subgroup(z):
            raise ValueError("z must be a non-trivial element of N")
        # every supported family is torsion-free, so z != 1 has infinite order
        super().__init__(graph, graph, {"z": model.to_json(z)})
        self.z = z
        self._sign = 1

    def base_component(self, c: Coloring) -> Callable:
        shift = self.source.model.power(self.z, self._sign * len(c))
        mul = self.source.model.mul
        return lambda p: mul(p, shift)

    def apply(self, s: LampState) -> LampState:
        return LampState(s.coloring, self.base_component(s.coloring)(s.position))

    def inverse(self):
        inv = SupportShiftMap(self.source, self.z)
        inv._sign = -self._sign
        inv.params = {**self.params, "inverted": True}
        return inv


class SignTwistMap(QIMap):
    """Colour zone x=0 once when the lamplighter stands at x < 0.

    The base is Z^2 with vertical-line zones. ``sign=-1`` gives the inverse,
    which multiplies by delta_0^{-1} instead.
    """

    family = "example48"

    def __init__(self, graph: LampGraph, sign: int = 1):
        m = graph.model
        if not (isinstance(m, Zd) and m.d == 2 and m.q_axes == (0,)):
            raise ValueError("example48 needs Z^2 with zones indexed by the x-coordinate")
        super().__init__(graph, graph, {"sign": sign})
        self.sign = sign
        self.delta = Coloring.delta(graph.n, (0,), value=sign)

    def apply(self, s: LampState) -> LampState:
        if s.position[0] >= 0:
            return s
        return LampState(s.coloring * self.delta, s.position)

    def base_component(self, c: Coloring) -> Callable:
        return lambda p: p

    def inverse(self):
        return SignTwistMap(self.source, -self.sign)


# -- splitting and merging cosets of Z^m ------------------------------------------------

def split_point(x: tuple, r: int) -> tuple:
    i = x[-1] % r
    head = r * x[0] + i
    tail = -((-x[-1]) // r)  # ceil(x_m / r)
    if len(x) == 1:
        raise ValueError("need m >= 2")
    return (head,) + tuple(x[1:-1]) + (tail,)


def merge_point(p: tuple, r: int) -> tuple:
    j = p[0] % r
    head = (p[0] - j) // r
    tail = r * p[-1] - ((r - j) % r)
    return (head,) + tuple(p[1:-1]) + (tail,)


class SplitMergeMap(BaseMap):
    """Split the coset through x into r cosets (gamma) or merge them back (eta) on Z^m."""

    def __init__(self, kind: str, m: int, r: int, n: int = 1):
        if r < 1:
            raise ValueError("r must be >= 1")
        if kind not in ("gamma", "eta"):
            raise ValueError("kind is 'gamma' or 'eta'")
        if not 1 <= n < m:
            raise ValueError("need 1 <= n < m")
        model = Zd(m, n)
        fwd = split_point if kind == "gamma" else merge_point
        bwd = merge_point if kind == "gamma" else split_point
        super().__init__(model, model, lambda x: fwd(x, r), {"m": m, "r": r, "n": n},
                         f"cor18_{kind}", lambda x: bwd(x, r))
        self.kind, self.m, self.r, self.n = kind, m, r, n

    def inverse(self):
        return SplitMergeMap("eta" if self.kind == "gamma" else "gamma", self.m, self.r, self.n)


# -- coloring-split map for non-amenable quotients ------------------------------------------

class LampDigitSplit(QIMap):
    """Z_{mp} lamps -> Z_{m p^k} lamps using a k-to-one map fbar on the zones.

    Values are identified as sets: v = a + m*b with a in Z_m, b in Z_p on the
    source side, and v = a + m*(b_0 + p b_1 + ...) on the target side.
    The digit b of zone z moves to slot i of zone fbar(z), where i is the
    position of z in the shortlex-ordered fibre of fbar(z).
    """

    family = "prop51_split"

    def __init__(self, model: GroupModel, m: int, p: int, fbar):
        k = fbar.n
        src = LampGraph(model, m * p)
        tgt = LampGraph(model, m * p ** k)
        super().__init__(src, tgt, {"m": m, "p": p, "k": k, "fbar_radius": fbar.radius,
                                    "fbar_Q": fbar.Q})
        self.m, self.p, self.k, self.fbar = m, p, k, fbar

    def _slot(self, z):
        x = self.fbar.image(z)
        fib = self.fbar.fiber(x)
        return x, fib.index(z)

    def alpha(self, c: Coloring) -> Coloring:
        m, p = self.m, self.p
        a_part: dict = {}
        b_part: dict = {}
        for z, v in c.entries:
            a, b = v % m, v // m
            if a:
                a_part[z] = a
            if b:
                x, i = self._slot(z)
                b_part.setdefault(x, [0] * self.k)[i] = b
        out = dict(a_part)
        for x, digits in b_part.items():
            out[x] = out.get(x, 0) + m * sum(d * p ** i for i, d in enumerate(digits))
        return Coloring.from_dict(self.target.n, out)

    def alpha_inv(self, c: Coloring) -> Coloring:
        m, p = self.m, self.p
        out: dict = {}
        for x, v in c.entries:
            a, rest = v % m, v // m
            if a:
                out[x] = out.get(x, 0) + a
            if rest:
                fib = self.fbar.fiber(x)
                for i in range(self.k):
                    d = (rest // p ** i) % p
                    if d:
                        out[fib[i]] = out.get(fib[i], 0) + m * d
        return Coloring.from_dict(self.source.n, out)

    def apply(self, s: LampState) -> LampState:
        return LampState(self.alpha(s.coloring), s.position)

    def base_component(self, c=None):
        return lambda p: p


# -- aptolic map built from partition data ------------------------------------------------------

class PartitionAptolic(QIMap):
    """Aptolic map from a partition certificate on the quotients.

    Lamp values on a source piece P (size s, lamp order n) are read as one
    number in base n and rewritten in base m over the target piece psi(P)
    (size r, lamp order m); this requires n**s == m**r. Positions go to the
    point of the coset beta(pM) nearest to f(p), ties broken by key order.
    """

    family = "partition_aptolic"

    def __init__(self, source: LampGraph, target: LampGraph, cert, f: Callable):
        s = len(cert.P[0]) if cert.P else 1
        r = len(cert.Q[0]) if cert.Q else 1
        if source.n ** s != target.n ** r:
            raise ValueError(f"lamp orders do not match piece sizes: {source.n}^{s} != {target.n}^{r}")
        super().__init__(source, target, {"s": s, "r": r, "n": source.n, "m": target.n})
        self.cert, self.f, self.s, self.r = cert, f, s, r
        self._piece_of = {z: i for i, P in enumerate(cert.P) for z in P}
        self._qpiece_of = {z: i for i, Qp in enumerate(cert.Q) for z in Qp}
        self._inv_psi = {j: i for i, j in cert.psi.items()}

    def _piece(self, z):
        if z not in self._piece_of:
            raise FiberUnknown(f"zone {z!r} lies outside the certified window")
        return self._piece_of[z]

    def alpha(self, c: Coloring) -> Coloring:
        n, m = self.source.n, self.target.n
        touched = sorted({self._piece(z) for z in c.support})
        out = {}
        for i in touched:
            P = self.cert.P[i]
            num = sum(c.get(z) * n ** t for t, z in enumerate(P))
            Qp = self.cert.Q[self.cert.psi[i]]
            for t, y in enumerate(Qp):
                d = (num // m ** t) % m
                if d:
                    out[y] = d
        return Coloring.from_dict(m, out)

    def alpha_inv(self, c: Coloring) -> Coloring:
        n, m = self.source.n, self.target.n
        out = {}
        for j in sorted({self._qpiece_of[y] for y in c.support}):
            Qp = self.cert.Q[j]
            num = sum(c.get(y) * m ** t for t, y in enumerate(Qp))
            P = self.cert.P[self._inv_psi[j]]
            for t, z in enumerate(P):
                d = (num // n ** t) % n
                if d:
                    out[z] = d
        return Coloring.from_dict(n, out)

    def beta_bar(self, z):
        if z not in self.cert.g:
            raise FiberUnknown(f"zone {z!r} lies outside the certified window")
        return self.cert.g[z]

    def h(self, p):
        model_s, model_t = self.source.model, self.target.model
        goal = self.beta_bar(model_s.zone_of(p))
        y = self.f(p)
        return nearest_in_zone(model_t, y, goal)

    def apply(self, s: LampState) -> LampState:
        return LampState(self.alpha(s.coloring), self.h(s.position))

    def base_component(self, c=None):
        return self.h


def nearest_in_zone(model: GroupModel, y, zone):
    """Point of the coset ``zone`` closest to ``y``; ties go to the smallest key."""
    if isinstance(model, Zd):
        out = list(y)
        for a, v in zip(model.q_axes, zone):
            out[a] = v
        return tuple(out)
    r = model.zone_distance(model.zone_of(y), zone)
    if r is None:
        r = 0
        while True:
            b = make_ball(model, r, y)
            hits = [v for v in b.vertices if model.zone_of(v) == zone]
            if hits:
                return min(hits)
            r += 1
    b = make_ball(model, r, y)
    return min(v for v in b.vertices if model.zone_of(v) == zone)


# -- cone-offs -------------------------------------------------------------------------------

@dataclass
class ConeOff:
    """Window with an extra edge between every pair of same-zone vertices."""

    base: Ball
    graph: Ball
    zone_of: Callable

    def distance(self, x, y) -> int:
        g = self.graph
        return int(g.distances_from(g.index[x])[g.index[y]])


def coneoff(b: Ball, zone_of: Callable | None = None) -> ConeOff:
    zone_of = zone_of or b.model.zone_of
    groups: dict = {}
    for i, v in enumerate(b.vertices):
        groups.setdefault(zone_of(v), []).append(i)
    adjacency = [list(nb) for nb in b.adjacency]
    labels = [list(lb) for lb in b.labels]
    for members in groups.values():
        for i in members:
            for j in members:
                if i != j and j not in adjacency[i]:
                    adjacency[i].append(j)
                    labels[i].append("cone")
    g = Ball(base=b.base, radius=b.radius, vertices=b.vertices, index=b.index,
             adjacency=adjacency, labels=labels, dist_from_base=b.dist_from_base,
             complete=b.complete, neighbors_fn=None, model=b.model)
    # distances from base change in the cone-off; recompute them
    g.dist_from_base = g.multi_source([0])
    return ConeOff(b, g, zone_of)


@dataclass
class Collapse:
    graph: Ball             # Y, one vertex per zone
    phi: dict               # window vertex -> representative
    psi: dict               # representative -> itself, as a window vertex
    representative: dict    # zone -> representative
    Q: int


def collapse(b: Ball, zone_of: Callable | None = None, Q: int = 1) -> Collapse:
    """Quotient graph with one representative (smallest key) per zone.

    Every zone must have window diameter <= Q, otherwise ZonesNotBounded.
    """
    zone_of = zone_of or b.model.zone_of
    groups: dict = {}
    for i, v in enumerate(b.vertices):
        groups.setdefault(zone_of(v), []).append(i)
    for z, members in groups.items():
        if len(members) > 1:
            rows = b.distance_rows(members)
            diam = max(int(rows[i][members].max()) for i in members)
            if diam > Q or any((rows[i][members] < 0).any() for i in members):
                raise ZonesNotBounded(f"zone {z!r} has window diameter {diam} > {Q}")
    rep = {z: min(b.vertices[i] for i in members) for z, members in groups.items()}
    phi = {v: rep[zone_of(v)] for v in b.vertices}
    edges = set()
    for i, j in b.edges():
        a, c = phi[b.vertices[i]], phi[b.vertices[j]]
        if a != c:
            edges.add((min(a, c), max(a, c)))
    reps = sorted(rep.values())
    adj: dict = {v: [] for v in reps}
    for a, c in sorted(edges):
        adj[a].append(c)
        adj[c].append(a)
    y = bfs_ball(lambda v: [("y", w) for w in adj[v]], reps[0], len(reps))
    return Collapse(y, phi, {v: v for v in reps}, rep, Q)


class ConeoffCollapse(QIMap):
    """Lamp states over a bounded-zone window -> lamp states over the collapsed graph Y.

    Colours move from a zone to its representative; the position moves to
    the representative of its zone.
    """

    family = "coneoff_collapse"

    def __init__(self, col: Collapse, n: int):
        super().__init__(None, None, {"Q": col.Q, "n": n})
        self.col, self.n = col, n

    def apply(self, s: LampState) -> LampState:
        rep = self.col.representative
        c = Coloring.from_dict(self.n, {rep[z]: v for z, v in s.coloring.entries})
        return LampState(c, self.col.phi[s.position])


# -- Lamp graphs over a cone-off ------------------------------------------------------------

def lamp_coneoff_iso(state: LampState) -> LampState:
    """Vertex map between CO(L_n(X,C), C-hat) and L_n(CO(X,C), C): the identity on pairs."""
    return state


def _colorings(zones: list, n: int):
    from itertools import product

    for vals in product(range(n), repeat=len(zones)):
        yield Coloring.from_dict(n, dict(zip(zones, vals)))


def verify_lamp_coneoff(graph: LampGraph, radius: int) -> dict:
    """Enumerate both graphs on a truncation and compare edge sets.

    Truncation: positions in the base ball of the given radius, colorings
    supported on zones that meet it. The first graph takes lamplighter edges
    of the full graph (kept when both ends are in the truncation) and cones
    off every zone of every leaf; the second is the lamplighter graph built
    directly on the cone-off of the base window.
    """
    model, n, zone_of = graph.model, graph.n, graph.zone_of
    W = make_ball(model, radius)
    zones = sorted({zone_of(p) for p in W.vertices})
    cols = list(_colorings(zones, n))
    verts_a = {LampState(c, p) for c in cols for p in W.vertices}

    edges_a = set()
    for s in verts_a:
        for t in graph.neighbors(s):
            if t in verts_a:
                edges_a.add(frozenset((s, t)))
    by_zone: dict = {}
    for p in W.vertices:
        by_zone.setdefault(zone_of(p), []).append(p)
    for c in cols:
        for members in by_zone.values():
            for i, p in enumerate(members):
                for q in members[i + 1:]:
                    edges_a.add(frozenset((LampState(c, p), LampState(c, q))))

    co = coneoff(W, zone_of)
    verts_b = set()
    edges_b = set()
    for c in cols:
        for i, p in enumerate(W.vertices):
            s = LampState(c, p)
            verts_b.add(s)
            for j in co.graph.adjacency[i]:
                edges_b.add(frozenset((s, LampState(c, W.vertices[j]))))
            z = zone_of(p)
            for v in range(n):
                if v != c.get(z):
                    edges_b.add(frozenset((s, LampState(c.with_value(z, v), p))))
    mapped_a = {frozenset(lamp_coneoff_iso(x) for x in e) for e in edges_a}
    if {lamp_coneoff_iso(v) for v in verts_a} != verts_b:
        raise TruncationMismatch("vertex sets of the two truncations differ")
    failures = []
    for e in sorted(mapped_a ^ edges_b, key=repr)[:50]:
        a, b = sorted(e, key=repr)
        failures.append({"edge": [graph.state_to_json(a), graph.state_to_json(b)],
                         "only_in": "coned lamplighter" if e in mapped_a else "lamplighter of cone-off"})
    return {
        "vertices": len(verts_a),
        "checked_edges": len(mapped_a | edges_b),
        "edges_first": len(mapped_a),
        "edges_second": len(edges_b),
        "mismatched": len(mapped_a ^ edges_b),
        "failures": failures,
    }


# -- descriptors ------------------------------------------------------------------------------

def build_map(desc: dict) -> QIMap:
    """Rebuild a map from ``{family, params, source_model, target_model}``.

    Handles the families with closed-form rules: cor18_gamma, cor18_eta,
    example48, prop410 and identity. The other families need certificate
    data and are built in code.
    """
    from .groups import make_model

    fam = desc.get("family")
    p = dict(desc.get("params") or {})
    if fam in ("cor18_gamma", "cor18_eta"):
        return SplitMergeMap(fam.split("_")[1], int(p.get("m", 2)), int(p.get("r", 2)), int(p.get("n", 1)))
    if fam == "example48":
        return SignTwistMap(LampGraph(make_model("z2"), int(p.get("lamps", 2))), int(p.get("sign", 1)))
    if fam == "prop410":
        model = make_model(desc.get("source_model", "z2h"))
        return SupportShiftMap(LampGraph(model, int(p.get("lamps", 2))), model.from_json(p.get("z", [1, 0])))
    if fam == "identity":
        model = make_model(desc.get("source_model", "z2"))
        return BaseMap(model, model, lambda x: x, {}, "identity", lambda x: x)
    raise ValueError(f"no rule to rebuild map family {fam!r}")


def map_descriptor(f: QIMap, source_model: str | None = None) -> dict:
    """Descriptor that build_map accepts (lamp order included for lamp maps)."""
    d = {"family": f.family, "params": dict(f.params)}
    if f.acts_on == "lamp" and f.source is not None:
        d["params"]["lamps"] = f.source.n
    if source_model:
        d["source_model"] = source_model
    return d
