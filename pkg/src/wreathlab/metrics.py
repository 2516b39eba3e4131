"""Finite windows of graphs: BFS balls and the metric quantities measured on them."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import BudgetExceeded, EmptySet, WindowTooSmall, ZoneNotPresent
from .groups import GroupModel

DEFAULT_BUDGET = 200_000

NeighborFn = Callable[[Hashable], Iterable[tuple[str, Hashable]]]


@dataclass(eq=False)
class Ball:
    """A BFS-ordered ball in a (possibly infinite) graph.

    ``neighbors_fn`` gives labelled neighbours in the full graph, so vertices
    on the outer shell still know which of their edges leave the window.
    ``complete`` is True when no edge leaves the window at all.
    """

    base: Hashable
    radius: int
    vertices: list
    index: dict
    adjacency: list[list[int]]
    labels: list[list[str]]
    dist_from_base: np.ndarray
    complete: bool
    neighbors_fn: NeighborFn | None = None
    model: GroupModel | None = None
    _rows: dict = field(default_factory=dict, repr=False)
    _pred: dict = field(default_factory=dict, repr=False)
    _csr: csr_matrix | None = field(default=None, repr=False)
    _zones: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, key):
        return key in self.index

    # -- structure --------------------------------------------------------
    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nb in enumerate(self.adjacency) for j in nb if i < j]

    def interior(self, margin: int) -> list[int]:
        """Indices at distance <= radius - margin (everything if complete)."""
        if self.complete:
            return list(range(len(self.vertices)))
        return [i for i, d in enumerate(self.dist_from_base) if d <= self.radius - margin]

    def shell(self) -> list[int]:
        if self.complete:
            return []
        return [i for i, d in enumerate(self.dist_from_base) if d == self.radius]

    def graph_neighbors(self, key) -> list:
        """Neighbours of ``key`` in the full graph (may lie outside the window)."""
        if self.neighbors_fn is None:
            return [self.vertices[j] for j in self.adjacency[self.index[key]]]
        return [w for _, w in self.neighbors_fn(key)]

    def label_between(self, i: int, j: int) -> str:
        return self.labels[i][self.adjacency[i].index(j)]

    def indices(self, keys: Iterable) -> list[int]:
        return sorted({self.index[k] for k in keys})

    def zone_members(self, zone_of: Callable | None = None) -> dict:
        """Map zone key -> sorted vertex indices (zones from the model by default)."""
        fn = zone_of if zone_of is not None else self.model.zone_of
        if fn not in self._zones:
            out: dict = {}
            for i, v in enumerate(self.vertices):
                out.setdefault(fn(v), []).append(i)
            self._zones[fn] = out
        return self._zones[fn]

    # -- distances inside the window --------------------------------------
    @property
    def csr(self) -> csr_matrix:
        if self._csr is None:
            n = len(self.vertices)
            rows = [i for i, nb in enumerate(self.adjacency) for _ in nb]
            cols = [j for nb in self.adjacency for j in nb]
            self._csr = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
        return self._csr

    def distance_rows(self, sources: Iterable[int]) -> dict[int, np.ndarray]:
        """BFS rows (int, -1 = unreachable inside the window) for each source."""
        need = [s for s in dict.fromkeys(sources) if s not in self._rows]
        if need:
            dist, pred = shortest_path(self.csr, unweighted=True, indices=need,
                                       return_predecessors=True)
            dist = np.where(np.isinf(dist), -1, dist).astype(np.int64)
            for k, s in enumerate(need):
                self._rows[s] = dist[k]
                self._pred[s] = pred[k]
        return {s: self._rows[s] for s in sources}

    def distances_from(self, i: int) -> np.ndarray:
        return self.distance_rows([i])[i]

    def path(self, i: int, j: int) -> list[int]:
        """A shortest path from i to j inside the window, as vertex indices."""
        self.distance_rows([i])
        pred = self._pred[i]
        if i != j and pred[j] < 0:
            raise ValueError("vertices are disconnected inside the window")
        out = [j]
        while out[-1] != i:
            out.append(int(pred[out[-1]]))
        return out[::-1]

    def multi_source(self, sources: Iterable[int], limit: int | None = None) -> np.ndarray:
        dist = np.full(len(self.vertices), -1, dtype=np.int64)
        q = deque()
        for s in sources:
            if dist[s] < 0:
                dist[s] = 0
                q.append(s)
        while q:
            u = q.popleft()
            if limit is not None and dist[u] >= limit:
                continue
            for w in self.adjacency[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return dist

    def all_pairs(self) -> np.ndarray:
        return np.stack([r for r in self.distance_rows(range(len(self.vertices))).values()])

    # -- export -------------------------------------------------------------
    def _key_json(self, v):
        if self.model is not None:
            return self.model.to_json(v)
        return _plain(v)

    def to_json(self) -> dict:
        return {
            "vertices": [self._key_json(v) for v in self.vertices],
            "edges": [[i, j] for i, j in self.edges()],
            "dist_from_base": [int(d) for d in self.dist_from_base],
        }

    def edge_list_text(self) -> str:
        rows = []
        for i, j in self.edges():
            rows.append(f"{json.dumps(self._key_json(self.vertices[i]))}\t"
                        f"{json.dumps(self._key_json(self.vertices[j]))}")
        return "\n".join(rows) + ("\n" if rows else "")


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    return v


def bfs_ball(neighbors_fn: NeighborFn, base, radius: int, budget: int = DEFAULT_BUDGET,
             model: GroupModel | None = None) -> Ball:
    """Ball of the given radius around ``base`` in the graph defined by ``neighbors_fn``."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    vertices = [base]
    index = {base: 0}
    dist = [0]
    nbr_cache: list[list[tuple[str, Hashable]]] = []
    head = 0
    while head < len(vertices):
        v = vertices[head]
        nbrs = list(neighbors_fn(v))
        nbr_cache.append(nbrs)
        if dist[head] < radius:
            for _, w in nbrs:
                if w not in index:
                    index[w] = len(vertices)
                    vertices.append(w)
                    dist.append(dist[head] + 1)
                    if len(vertices) > budget:
                        raise BudgetExceeded(f"ball exceeds {budget} vertices")
        head += 1
    adjacency, labels = [], []
    complete = True
    for i, nbrs in enumerate(nbr_cache):
        adj, lab = [], []
        for label, w in nbrs:
            j = index.get(w)
            if j is None:
                complete = False
            elif j != i and j not in adj:
                adj.append(j)
                lab.append(label)
        adjacency.append(adj)
        labels.append(lab)
    return Ball(base=base, radius=radius, vertices=vertices, index=index, adjacency=adjacency,
                labels=labels, dist_from_base=np.array(dist, dtype=np.int64), complete=complete,
                neighbors_fn=neighbors_fn, model=model)


def ball(model: GroupModel, radius: int, base=None, budget: int = DEFAULT_BUDGET) -> Ball:
    """Ball in the right Cayley graph of ``model`` (edges g -- g*s)."""
    base = model.identity if base is None else model.check(base)
    return bfs_ball(model.right_neighbors, base, radius, budget, model=model)


def graph_ball(vertices: Iterable, edges: Iterable[tuple]) -> Ball:
    """Wrap a finite graph as a complete window (radius = eccentricity of the first vertex)."""
    vertices = list(vertices)
    adj: dict = {v: [] for v in vertices}
    for u, w in edges:
        if w not in adj[u]:
            adj[u].append(w)
            adj[w].append(u)
    fn = lambda v: [("e", w) for w in adj[v]]
    probe = bfs_ball(fn, vertices[0], len(vertices))
    if len(probe) != len(vertices):
        raise ValueError("graph must be connected")
    ecc = int(probe.dist_from_base.max())
    return bfs_ball(fn, vertices[0], ecc)


# -- metric quantities -------------------------------------------------------

def hausdorff(A: Iterable, B: Iterable, b: Ball) -> int:
    """Hausdorff distance between two vertex sets, measured inside the window."""
    ia, ib = b.indices(A), b.indices(B)
    if not ia or not ib:
        raise EmptySet("hausdorff needs non-empty sets")
    da = b.multi_source(ia)
    db = b.multi_source(ib)
    to_a = da[ib]
    to_b = db[ia]
    if (to_a < 0).any() or (to_b < 0).any():
        raise WindowTooSmall("sets are disconnected inside the window")
    return int(max(to_a.max(), to_b.max()))


def coarse_components(S: Iterable, k: int, b: Ball) -> list[list]:
    """Classes of the chain relation 'consecutive gaps <= k' on S (gaps measured in the window)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    idx = b.indices(S)
    members = set(idx)
    parent = {i: i for i in idx}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for s in idx:
        near = b.multi_source([s], limit=k)
        for t in np.flatnonzero(near >= 0):
            t = int(t)
            if t in members:
                ra, rb = find(s), find(t)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    classes: dict[int, list[int]] = {}
    for i in idx:
        classes.setdefault(find(i), []).append(i)
    return [[b.vertices[i] for i in sorted(c)] for _, c in sorted(classes.items())]


class ProbeResult(NamedTuple):
    count: int
    witnesses: list  # one deep point per deep component


def separation_probe(b: Ball, Z: Iterable, L: int, k: int, D: int) -> ProbeResult:
    """Count k-coarse components of window minus Z^{+L} that reach depth >= D from Z."""
    if b.radius < 2 * (L + D) and not b.complete:
        raise WindowTooSmall(f"radius {b.radius} < 2(L+D) = {2 * (L + D)}")
    iz = b.indices(Z)
    if iz:
        dz = b.multi_source(iz)
        rest = [i for i in range(len(b)) if dz[i] < 0 or dz[i] > L]
    else:
        dz = np.full(len(b), -1)
        rest = list(range(len(b)))
    comps = coarse_components([b.vertices[i] for i in rest], k, b)
    count, witnesses = 0, []
    for comp in comps:
        deep = [v for v in comp if dz[b.index[v]] < 0 or dz[b.index[v]] >= D]
        if deep:
            count += 1
            witnesses.append(deep[0])
    return ProbeResult(count, witnesses)


class ZoneDistance(NamedTuple):
    value: int
    exact: bool


def zone_distance(b: Ball, z1, z2, zone_of: Callable | None = None) -> ZoneDistance:
    """Least window distance between members of two zones.

    Flagged inexact when the minimum is only attained at the outer shell.
    """
    zones = b.zone_members(zone_of)
    if z1 not in zones or z2 not in zones:
        raise ZoneNotPresent(f"zone {z1 if z1 not in zones else z2!r} misses the window")
    if z1 == z2:
        return ZoneDistance(0, True)
    d1 = b.multi_source(zones[z1])
    targets = np.array(zones[z2])
    vals = d1[targets]
    ok = vals >= 0
    if not ok.any():
        raise ZoneNotPresent("zones are disconnected inside the window")
    best = int(vals[ok].min())
    shell = set(b.shell())
    if not shell:
        return ZoneDistance(best, True)
    # exact when some minimising pair stays off the outer shell
    hits = [int(t) for t in targets[ok & (vals == best)] if int(t) not in shell]
    if hits:
        d2 = b.multi_source(hits)
        if any(d2[s] == best and s not in shell for s in zones[z1]):
            return ZoneDistance(best, True)
    return ZoneDistance(best, False)
