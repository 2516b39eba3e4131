"""Graph products of cyclic groups, quasi-median checks and hyperplanes.

An element of a graph product is stored in normal form: a tuple of syllables
``(vertex, value)`` with ``1 <= value < order(vertex)``, reduced and then
rearranged (by swapping adjacent commuting syllables) into the
lexicographically least order. Two elements are equal iff their normal
forms are.

The second half builds the graph of pointed-marked cliques for a group H
with normal subgroup N and lamp group Z_n, together with the Cayley graph of
the matching semidirect product, and checks the explicit isomorphism between
them on finite windows.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Hashable, Iterable

import networkx as nx
import numpy as np

from .errors import SectionInvalid, WindowTooSmall
from .groups import GroupModel, Zd, Heisenberg, make_model
from .lamp import Coloring
from .metrics import Ball, bfs_ball

Syllable = tuple  # (vertex, value)


class GraphProduct:
    """Graph product of cyclic groups Z_{order(u)} over a simplicial graph.

    The graph may be infinite: it is given by an adjacency predicate, an order
    function and a sort key on vertices.
    """

    def __init__(self, adjacent: Callable[[Hashable, Hashable], bool],
                 order: Callable[[Hashable], int], key: Callable = lambda u: u):
        self.adjacent = adjacent
        self.order = order
        self.key = key

    identity: tuple = ()

    def _commute(self, u, v) -> bool:
        return u != v and self.adjacent(u, v)

    def append(self, word: tuple, u, a: int) -> tuple:
        """Reduced (not yet canonical) form of word * (u, a)."""
        n = self.order(u)
        a %= n
        if a == 0:
            return word
        w = list(word)
        for i in range(len(w) - 1, -1, -1):
            v, b = w[i]
            if v == u:
                c = (a + b) % n
                if c:
                    w[i] = (u, c)
                else:
                    del w[i]
                return tuple(w)
            if not self._commute(u, v):
                break
        w.append((u, a))
        return tuple(w)

    def canonical(self, word: tuple) -> tuple:
        """Lexicographically least rearrangement under commuting swaps."""
        rest = list(word)
        out = []
        while rest:
            best = None
            for i, (u, a) in enumerate(rest):
                if all(self._commute(u, rest[j][0]) for j in range(i)):
                    if best is None or (self.key(u), a) < (self.key(rest[best][0]), rest[best][1]):
                        best = i
            out.append(rest.pop(best))
        return tuple(out)

    def mul(self, x: tuple, y: tuple) -> tuple:
        w = x
        for u, a in y:
            w = self.append(w, u, a)
        return self.canonical(w)

    def inv(self, x: tuple) -> tuple:
        return self.canonical(tuple((u, (-a) % self.order(u)) for u, a in reversed(x)))

    def syllable(self, u, a: int) -> tuple:
        a %= self.order(u)
        return ((u, a),) if a else ()

    def length(self, x: tuple) -> int:
        return len(x)

    def distance(self, x: tuple, y: tuple) -> int:
        """Distance in the Cayley graph with generators all non-trivial vertex-group elements."""
        return len(self.mul(self.inv(x), y))

    def collapse(self, x: tuple, n: int) -> Coloring:
        """Image in the direct sum: add up the values sitting at each vertex."""
        acc: dict = {}
        for u, a in x:
            acc[u] = (acc.get(u, 0) + a) % n
        return Coloring.from_dict(n, acc)

    def coset_rep(self, x: tuple, vertices: set) -> tuple:
        """Shortest representative of x<vertices>: strip syllables that can move to the end."""
        w = list(x)
        changed = True
        while changed:
            changed = False
            for i in range(len(w) - 1, -1, -1):
                u = w[i][0]
                if u in vertices and all(self._commute(u, w[j][0]) for j in range(i + 1, len(w))):
                    del w[i]
                    changed = True
                    break
        return self.canonical(tuple(w))


@dataclass
class GraphProductSpec:
    """A finite simplicial graph with a cyclic group order at each vertex."""

    vertices: list
    edges: set
    orders: dict

    def __post_init__(self):
        self.vertices = list(self.vertices)
        es = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"loop at {u!r}")
            es.add(frozenset((u, v)))
        self.edges = es
        for u in self.vertices:
            if self.orders[u] < 2:
                raise ValueError(f"vertex group at {u!r} must have order >= 2")
        pos = {u: i for i, u in enumerate(self.vertices)}
        self.product = GraphProduct(lambda u, v: frozenset((u, v)) in es, self.orders.__getitem__, pos.__getitem__)

    @property
    def gamma(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(tuple(e) for e in self.edges)
        return g

    def clique_number(self) -> int:
        return max(len(c) for c in nx.find_cliques(self.gamma))

    def star(self, u) -> set:
        return {u} | {v for v in self.vertices if frozenset((u, v)) in self.edges}

    def neighbors(self, x: tuple) -> list:
        P = self.product
        out = []
        for u in self.vertices:
            for a in range(1, self.orders[u]):
                out.append((f"{u}^{a}", P.mul(x, ((u, a),))))
        return out

    def distance(self, x, y) -> int:
        return self.product.distance(x, y)

    def to_json(self) -> dict:
        return {"vertices": self.vertices, "edges": sorted(sorted(e) for e in self.edges),
                "orders": [self.orders[u] for u in self.vertices]}

    @classmethod
    def from_json(cls, doc: dict) -> "GraphProductSpec":
        verts = doc["vertices"]
        orders = doc["orders"]
        if isinstance(orders, list):
            orders = dict(zip(verts, orders))
        return cls(verts, {tuple(e) for e in doc.get("edges", [])}, orders)


STOCK_SPECS = {
    "z3": lambda: GraphProductSpec(["u"], set(), {"u": 3}),
    "edge": lambda: GraphProductSpec(["u", "v"], {("u", "v")}, {"u": 2, "v": 2}),
    "dihedral": lambda: GraphProductSpec(["u", "v"], set(), {"u": 2, "v": 2}),
    "triangle": lambda: GraphProductSpec(["u", "v", "w"], {("u", "v"), ("v", "w"), ("u", "w")},
                                         {"u": 2, "v": 2, "w": 2}),
    "path3": lambda: GraphProductSpec(["u", "v", "w"], {("u", "v"), ("v", "w")}, {"u": 2, "v": 2, "w": 2}),
}


def stock_spec(name: str) -> GraphProductSpec:
    if name not in STOCK_SPECS:
        raise KeyError(f"unknown graph-product spec {name!r}; choose from {sorted(STOCK_SPECS)}")
    return STOCK_SPECS[name]()


def qm_ball(spec: GraphProductSpec, radius: int, budget: int = 200_000) -> Ball:
    b = bfs_ball(spec.neighbors, (), radius, budget)
    b.spec = spec
    return b


# -- validation -----------------------------------------------------------------------

def _metric(b: Ball, spec) -> Callable[[int, int], int]:
    if spec is not None:
        cache: dict = {}

        def d(i, j):
            key = (i, j) if i <= j else (j, i)
            if key not in cache:
                cache[key] = spec.distance(b.vertices[i], b.vertices[j])
            return cache[key]
        return d
    if not b.complete:
        raise WindowTooSmall("window distances are only exact for complete windows or with a spec")
    D = b.all_pairs()
    return lambda i, j: int(D[i, j])


@dataclass
class QMReport:
    forbidden: list = field(default_factory=list)     # (kind, vertex keys)
    triangle_failures: list = field(default_factory=list)
    quadrangle_failures: list = field(default_factory=list)
    triangle_checked: int = 0
    quadrangle_checked: int = 0

    @property
    def ok(self) -> bool:
        return not (self.forbidden or self.triangle_failures or self.quadrangle_failures)

    def to_json(self, encode=lambda v: v) -> dict:
        return {
            "ok": self.ok,
            "forbidden": [{"kind": k, "vertices": [encode(v) for v in vs]} for k, vs in self.forbidden],
            "triangle": {"checked": self.triangle_checked,
                         "failures": [[encode(v) for v in f] for f in self.triangle_failures]},
            "quadrangle": {"checked": self.quadrangle_checked,
                           "failures": [[encode(v) for v in f] for f in self.quadrangle_failures]},
        }


def qm_validate(b: Ball, margin: int = 2, spec: GraphProductSpec | None = None) -> QMReport:
    """Check the forbidden induced subgraphs and the triangle and quadrangle conditions.

    Only configurations whose witnesses are guaranteed to lie in the window
    are checked: the base vertex sits at depth <= radius - margin and the
    other vertices are off the outer shell.
    """
    spec = spec if spec is not None else getattr(b, "spec", None)
    if not b.complete and (margin < 2 or b.radius < margin):
        raise WindowTooSmall(f"need margin >= 2 inside radius {b.radius}")
    d = _metric(b, spec)
    rep = QMReport()
    adj = [set(a) for a in b.adjacency]
    V = range(len(b))
    inner = set(b.interior(1))
    bases = b.interior(margin)

    # induced K4- and K3,2: a non-adjacent pair with (adjacent | three independent) common neighbours
    for a in V:
        second = {w for v in adj[a] for w in adj[v]} - adj[a] - {a}
        for c in second:
            if c < a:
                continue
            common = sorted(adj[a] & adj[c])
            found_k4 = next(((x, y) for x, y in combinations(common, 2) if y in adj[x]), None)
            if found_k4:
                rep.forbidden.append(("K4-", [b.vertices[i] for i in (a, c, *found_k4)]))
            for trio in combinations(common, 3):
                x, y, z = trio
                if y not in adj[x] and z not in adj[x] and z not in adj[y]:
                    rep.forbidden.append(("K3,2", [b.vertices[i] for i in (a, c, *trio)]))
                    break

    for u in bases:
        du = {v: d(u, v) for v in V}
        for v in inner:
            for w in adj[v]:
                if w <= v or w not in inner:
                    continue
                # triangle condition
                k = du[v]
                if du[w] == k and k >= 1:
                    rep.triangle_checked += 1
                    if not any(du[x] == k - 1 for x in adj[v] & adj[w]):
                        rep.triangle_failures.append([b.vertices[i] for i in (u, v, w)])
        for z in V:
            k1 = du[z]
            nbrs = [v for v in adj[z] if v in inner and du[v] == k1 - 1]
            for v, w in combinations(sorted(nbrs), 2):
                k = k1 - 1
                if k < 1:
                    continue
                rep.quadrangle_checked += 1
                if not any(du[x] == k - 1 for x in adj[v] & adj[w]):
                    rep.quadrangle_failures.append([b.vertices[i] for i in (u, v, w, z)])
    return rep


# -- hyperplanes ------------------------------------------------------------------------------

@dataclass
class Hyperplane:
    id: int
    edges: list           # (i, j) index pairs, i < j
    sectors: list         # lists of vertex indices
    neighborhood: list    # vertex indices
    fibers: list          # lists of vertex indices

    def to_json(self) -> dict:
        return {"id": self.id, "edges": [list(e) for e in self.edges],
                "sector_sizes": sorted((len(s) for s in self.sectors), reverse=True)}


def _components(n_nodes: Iterable[int], adj: dict) -> list[list[int]]:
    nodes = list(n_nodes)
    seen, out = set(), []
    for s in nodes:
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        out.append(sorted(comp))
    return out


def hyperplanes(b: Ball) -> list[Hyperplane]:
    """Edge classes under 'same triangle' and 'opposite sides of a square', with sectors."""
    edges = b.edges()
    eid = {e: k for k, e in enumerate(edges)}
    parent = list(range(len(edges)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(e1, e2):
        r1, r2 = find(eid[e1]), find(eid[e2])
        if r1 != r2:
            parent[max(r1, r2)] = min(r1, r2)

    def key(i, j):
        return (i, j) if i < j else (j, i)

    adj = [set(a) for a in b.adjacency]
    for i, j in edges:
        common = adj[i] & adj[j]
        for k in common:
            union((i, j), key(i, k))
            union((i, j), key(j, k))
        # squares i-j-k-l-i with no diagonals: opposite edges (i,j) and (l,k)
        for k in adj[j] - {i} - adj[i]:
            for l in (adj[k] & adj[i]) - {j} - adj[j]:
                union((i, j), key(l, k))
    classes: dict = {}
    for e in edges:
        classes.setdefault(find(eid[e]), []).append(e)
    out = []
    n = len(b)
    for hid, (_, members) in enumerate(sorted(classes.items())):
        cut = set(members)
        rest = {u: [v for v in adj[u] if key(u, v) not in cut] for u in range(n)}
        sectors = _components(range(n), rest)
        nbhd = sorted({x for e in members for x in e})
        nset = set(nbhd)
        fib_adj = {u: [v for v in adj[u] if v in nset and key(u, v) not in cut] for u in nbhd}
        fibers = _components(nbhd, fib_adj)
        out.append(Hyperplane(hid, sorted(members), sectors, nbhd, fibers))
    return out


def _sector_index(hs: list[Hyperplane], n: int) -> np.ndarray:
    lab = np.zeros((len(hs), n), dtype=np.int64)
    for h in hs:
        for s, sec in enumerate(h.sectors):
            lab[h.id, sec] = s
    return lab


def transverse(h1: Hyperplane, h2: Hyperplane, b: Ball) -> bool:
    """h2 has an edge inside the neighbourhood of h1 that is not an edge of h1."""
    if h1.id == h2.id:
        return False
    nset = set(h1.neighborhood)
    own = set(h1.edges)
    return any(i in nset and j in nset and (i, j) not in own for i, j in h2.edges)


@dataclass
class HyperplaneAudit:
    pairs: int = 0
    distance_mismatches: list = field(default_factory=list)    # (x, y, d, separating)
    recrossings: list = field(default_factory=list)             # (x, y, hyperplane id)
    bound_failures: list = field(default_factory=list)          # (x, y, d, k, dim)
    max_k: int = 0

    @property
    def ok(self) -> bool:
        return not (self.distance_mismatches or self.recrossings or self.bound_failures)


def audit_hyperplanes(b: Ball, hs: list[Hyperplane], audit_radius: int, dim: int,
                      spec: GraphProductSpec | None = None) -> HyperplaneAudit:
    """Compare distances with separating hyperplanes for pairs of depth <= audit_radius.

    Also checks that one window geodesic per pair crosses no hyperplane twice
    and that d(x, y) <= k * dim, with k the largest set of pairwise
    non-transverse separating hyperplanes.
    """
    spec = spec if spec is not None else getattr(b, "spec", None)
    d = _metric(b, spec)
    n = len(b)
    lab = _sector_index(hs, n)
    edge_h = {e: h.id for h in hs for e in h.edges}
    trans = {}
    for h1, h2 in combinations(hs, 2):
        t = transverse(h1, h2, b) or transverse(h2, h1, b)
        trans[(h1.id, h2.id)] = trans[(h2.id, h1.id)] = t
    pts = [i for i in range(n) if b.dist_from_base[i] <= audit_radius]
    rep = HyperplaneAudit()
    for x, y in combinations(pts, 2):
        rep.pairs += 1
        dxy = d(x, y)
        sep = [h for h in range(len(hs)) if lab[h, x] != lab[h, y]]
        if len(sep) != dxy:
            rep.distance_mismatches.append((b.vertices[x], b.vertices[y], dxy, len(sep)))
        path = b.path(x, y)
        if len(path) - 1 == dxy:
            crossed = [edge_h[(min(p, q), max(p, q))] for p, q in zip(path, path[1:])]
            if len(set(crossed)) != len(crossed):
                rep.recrossings.append((b.vertices[x], b.vertices[y], crossed))
        g = nx.Graph()
        g.add_nodes_from(sep)
        g.add_edges_from((h1, h2) for h1, h2 in combinations(sep, 2) if not trans[(h1, h2)])
        k = nx.max_weight_clique(g, weight=None)[1] if sep else 0
        rep.max_k = max(rep.max_k, k)
        if dxy > k * dim:
            rep.bound_failures.append((b.vertices[x], b.vertices[y], dxy, k, dim))
    return rep


def clique_coset_audit(b: Ball, spec: GraphProductSpec) -> list:
    """Maximal cliques away from the shell that are not full vertex-group cosets."""
    inner = set(b.interior(1))
    g = nx.Graph()
    g.add_nodes_from(range(len(b)))
    g.add_edges_from(b.edges())
    P = spec.product
    bad = []
    for c in nx.find_cliques(g):
        if not set(c) <= inner:
            continue
        x = b.vertices[c[0]]
        diffs = [P.mul(P.inv(x), b.vertices[j]) for j in c[1:]]
        verts = {w[0][0] for w in diffs if len(w) == 1}
        if any(len(w) != 1 for w in diffs) or len(verts) != 1 or len(c) != spec.orders[verts.pop()]:
            bad.append([b.vertices[j] for j in c])
    return bad


def algebraic_hyperplane(spec: GraphProductSpec, x: tuple, y: tuple):
    """Label (vertex, coset representative) of the hyperplane containing the edge x - y."""
    P = spec.product
    s = P.mul(P.inv(x), y)
    if len(s) != 1:
        raise ValueError("not an edge")
    u = s[0][0]
    return (u, P.coset_rep(x, spec.star(u)))


# -- sections and the pointed-marked clique model ----------------------------------------------

class Section:
    """A set-theoretic section s: H/N -> H, given by a rule plus an optional override table."""

    def __init__(self, model: GroupModel, rule: Callable, name: str = "custom", table: dict | None = None):
        self.model = model
        self.quotient = model.quotient()
        self.rule = rule
        self.name = name
        self.table = dict(table or {})

    def __call__(self, g):
        if g in self.table:
            return self.table[g]
        return self.rule(g)

    def checked(self, g):
        h = self(g)
        if self.model.zone_of(h) != g:
            raise SectionInvalid(f"s({g!r}) = {h!r} does not project to {g!r}")
        return h


def defect(s: Section, a, b):
    """delta_{a,b} = s(a) s(b) s(ab)^-1, which must lie in N."""
    M, Q = s.model, s.quotient
    d = M.mul(M.mul(s(a), s(b)), M.inv(s(Q.mul(a, b))))
    if not M.in_subgroup(d):
        raise SectionInvalid(f"defect at ({a!r}, {b!r}) is {d!r}, outside the subgroup")
    return d


def _embed_section(model: GroupModel) -> Callable:
    if isinstance(model, Zd):
        def rule(g):
            out = [0] * model.d
            for ax, v in zip(model.q_axes, g):
                out[ax] = v
            return tuple(out)
        return rule
    if isinstance(model, Heisenberg):
        return lambda g: (g[0], g[1], 0)
    raise ValueError(f"no preset section for {model!r}")


def section_preset(model: GroupModel, kind: str = "homomorphic") -> Section:
    """'homomorphic' (coordinate embedding), 'twisted' (Z^2 over a vertical quotient) or 'heisenberg'."""
    model = make_model(model)
    if kind in ("homomorphic", "heisenberg"):
        return Section(model, _embed_section(model), kind)
    if kind == "twisted":
        if not (isinstance(model, Zd) and model.d == 2 and len(model.n_axes) == 1):
            raise ValueError("twisted preset needs Z^2 with a one-axis subgroup")
        base = _embed_section(model)
        nax = model.n_axes[0]

        def rule(g):
            out = list(base(g))
            out[nax] = g[0] % 2
            return tuple(out)
        return Section(model, rule, "twisted")
    raise ValueError(f"unknown section preset {kind!r}")


class BoxModel:
    """Pointed-marked cliques over Gamma = Cay(H/N, S) with lamp group Z_n.

    A vertex is ``(g, x, u)``: clique label g in H/N (the clique is x F_g),
    point x in the graph product and mark u in N. The matching semidirect
    product has vertices ``(x, h)``; its generators act on the right as
    (x, h) -> (x * (pi(h), a), h), (x, h t) and (x, h s(q)).
    """

    def __init__(self, model: GroupModel, n: int, section: Section, quotient_radius: int | None = None):
        self.model = make_model(model)
        self.n = n
        self.section = section
        self.Q = self.model.quotient()
        self.S = dict(self.Q.generators)
        self.T = dict(self.model.subgroup_generators)
        s_values = set(self.S.values())
        Qm = self.Q
        self.product = GraphProduct(lambda g1, g2: Qm.mul(Qm.inv(g1), g2) in s_values,
                                    lambda g: n, Qm.shortlex_key)
        self.quotient_radius = quotient_radius
        self.root = (Qm.identity, (), self.model.identity)

    def _guard(self, g):
        if self.quotient_radius is not None and (self.Q.word_length(g) or 0) > self.quotient_radius:
            raise WindowTooSmall(f"clique label {g!r} leaves the quotient window")

    # edges of the pointed-marked clique graph
    def neighbors(self, v) -> list:
        g, x, u = v
        M, P, s = self.model, self.product, self.section
        out = []
        for a in range(1, self.n):
            out.append((f"slide{a}", (g, P.mul(x, ((g, a),)), u)))
        sg = s(g)
        for lab, t in self.T.items():
            out.append((f"jump{lab}", (g, x, M.mul(u, M.mul(M.mul(sg, t), M.inv(sg))))))
        for lab, q in self.S.items():
            gq = self.Q.mul(g, q)
            self._guard(gq)
            out.append((f"rot{lab}", (gq, x, M.mul(u, defect(s, g, q)))))
        return out

    # Cayley graph of the semidirect product
    def semidirect_neighbors(self, w) -> list:
        x, h = w
        M, P = self.model, self.product
        ph = M.zone_of(h)
        out = [(f"f{a}", (P.mul(x, ((ph, a),)), h)) for a in range(1, self.n)]
        out += [(f"t{lab}", (x, M.mul(h, t))) for lab, t in self.T.items()]
        out += [(f"s{lab}", (x, M.mul(h, self.section(q)))) for lab, q in self.S.items()]
        return out

    def phi(self, v):
        g, x, u = v
        return (x, self.model.mul(u, self.section(g)))

    def psi(self, w):
        x, h = w
        g = self.model.zone_of(h)
        return (g, x, self.model.mul(h, self.model.inv(self.section.checked(g))))

    def p_gamma(self, v):
        """Projection to the lamplighter: collapse the point, keep the position."""
        x, h = self.phi(v)
        return (self.product.collapse(x, self.n), h)


def build_box_model(model, n: int, section: Section, radius: int,
                    quotient_radius: int | None = None, budget: int = 200_000) -> tuple[BoxModel, Ball]:
    bm = BoxModel(model, n, section, quotient_radius)
    return bm, bfs_ball(bm.neighbors, bm.root, radius, budget)


@dataclass
class ModelCheckReport:
    vertices: int
    semidirect_vertices: int
    checked_edges: int
    checked_semidirect_edges: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"ok": self.ok, "vertices": self.vertices, "semidirect_vertices": self.semidirect_vertices,
                "checked_edges": self.checked_edges, "checked_semidirect_edges": self.checked_semidirect_edges,
                "failures": [repr(f) for f in self.failures[:50]]}


def model_check(bm: BoxModel, radius: int, budget: int = 200_000) -> ModelCheckReport:
    """Check that phi and psi are inverse graph isomorphisms on windows, and that leaves go to cosets."""
    box = bfs_ball(bm.neighbors, bm.root, radius, budget)
    semi_root = ((), bm.model.identity)
    semi = bfs_ball(bm.semidirect_neighbors, semi_root, radius, budget)
    fails = []
    for v in box.vertices:
        if bm.psi(bm.phi(v)) != v:
            fails.append(("psi.phi", v))
    for w in semi.vertices:
        if bm.phi(bm.psi(w)) != w:
            fails.append(("phi.psi", w))
    n_edges = n_semi = 0
    for i in box.interior(1):
        v = box.vertices[i]
        img = {y for _, y in bm.semidirect_neighbors(bm.phi(v))}
        for _, nb in bm.neighbors(v):
            n_edges += 1
            if bm.phi(nb) not in img:
                fails.append(("edge", v, nb))
    for i in semi.interior(1):
        w = semi.vertices[i]
        img = {y for _, y in bm.neighbors(bm.psi(w))}
        for _, nb in bm.semidirect_neighbors(w):
            n_semi += 1
            if bm.psi(nb) not in img:
                fails.append(("semidirect-edge", w, nb))
    if {bm.phi(v) for v in box.vertices} != set(semi.vertices):
        fails.append(("window", "phi(box window) differs from the semidirect window"))
    # leaves: fixed point x goes into one H-coset, and one lamplighter leaf under p_Gamma
    leaves: dict = {}
    for v in box.vertices:
        leaves.setdefault(v[1], []).append(v)
    for x, members in leaves.items():
        if {bm.phi(v)[0] for v in members} != {x}:
            fails.append(("leaf-phi", x))
        if len({bm.p_gamma(v)[0] for v in members}) != 1:
            fails.append(("leaf-p", x))
    return ModelCheckReport(len(box), len(semi), n_edges, n_semi, fails)


def desk_box_model(name: str, kind: str | None = None, n: int = 2) -> BoxModel:
    """'z2' (Z^2 over vertical lines, homomorphic or twisted section) or 'heis' (Heisenberg over its centre)."""
    if name == "z2":
        m = make_model("z2h")
        return BoxModel(m, n, section_preset(m, kind or "homomorphic"))
    if name == "heis":
        m = make_model("heis")
        return BoxModel(m, n, section_preset(m, kind or "heisenberg"))
    raise ValueError(f"unknown desk instance {name!r}")
