import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from wreathlab.errors import CertificateNotFound, FiberUnknown, NonAmenableRequired, PreimageEscape
from wreathlab.groups import F2, Zd, make_model
from wreathlab.lamp import LampGraph
from wreathlab.metrics import ball
from wreathlab.scaling import (boundary, default_family, lift_scaling_check, n_to_one_map, partition_certify,
                               quasi_k_check, replay_scaling, whyte_match)

Z = Zd(1, 1)
dist1 = lambda a, b: abs(a[0] - b[0])


def test_boundaries():
    b = ball(Z, 20)
    assert boundary(b, [(0,)]).vertices == [(-1,), (1,)]
    whole = boundary(b, b.vertices)
    assert whole.window_limited and sorted(whole.vertices) == [(-21,), (21,)]
    seg = boundary(ball(make_model("z2"), 10), [(i, 0) for i in range(6)])
    assert len(seg.vertices) == 14 and not seg.window_limited


def test_halving_is_exactly_two_to_one():
    tgt, src = ball(Z, 20), ball(Z, 42)
    c = quasi_k_check(lambda x: (x[0] // 2,), src, tgt, 2, default_family(tgt, 3, random.Random(0)))
    assert c.C == 0 and c.max_deviation == 0 and c.verdict and c.tests


def test_identity_is_one_to_one():
    b = ball(Z, 10)
    c = quasi_k_check(lambda x: x, ball(Z, 12), b, 1, default_family(b, 2, random.Random(1)))
    assert c.C == 0


def test_doubling_is_quasi_half_and_replays():
    src, tgt = ball(Z, 12), ball(Z, 20)
    c = quasi_k_check(lambda x: (2 * x[0],), src, tgt, Fraction(1, 2), default_family(tgt, 4, random.Random(0)))
    assert c.max_deviation == Fraction(1, 2) and c.C == Fraction(1, 4)
    doc = c.to_json(lambda v: list(v))
    assert replay_scaling(doc)
    doc["tests"][0]["preimage"] += 3
    assert not replay_scaling(doc)


@given(st.lists(st.tuples(st.integers(-8, 8), st.integers(0, 6)), min_size=1, max_size=10))
def test_interval_fibres(intervals):
    fam = [[(v,) for v in range(a, a + w + 1)] for a, w in intervals]
    tgt = ball(Z, 16)
    half = quasi_k_check(lambda x: (x[0] // 2,), ball(Z, 40), tgt, 2, fam)
    assert half.max_deviation == 0
    dbl = quasi_k_check(lambda x: (2 * x[0],), ball(Z, 10), tgt, Fraction(1, 2), fam)
    assert dbl.max_deviation <= Fraction(1, 2)


def test_small_source_window_is_detected():
    tgt = ball(Z, 10)
    with pytest.raises(PreimageEscape):
        quasi_k_check(lambda x: (x[0] // 2,), ball(Z, 12), tgt, 2, [[(5,), (6,)]])


def test_matchings():
    pts = ball(Z, 5).vertices
    r = whyte_match(pts, pts, 0, cost=dist1)
    assert r.matching == {p: p for p in pts}
    f2 = F2()
    dom = [(x, i) for x in ball(f2, 3).vertices for i in range(2)]
    r = whyte_match(dom, ball(f2, 4).vertices, 1, cost=lambda a, c: f2.word_length(f2.mul(f2.inv(a[0]), c)))
    assert r.witness is None and len(set(r.matching.values())) == len(dom)


def test_line_cannot_be_doubled_at_bounded_displacement():
    with pytest.raises(NonAmenableRequired) as e:
        n_to_one_map(Z, 10, 2, 2)
    assert e.value.witness["counting"] == {"domain": 42, "codomain": 25}
    w = e.value.witness
    assert w["set_size"] > w["neighborhood_size"]


@given(st.integers(2, 6), st.integers(0, 3), st.integers(1, 3))
def test_hall_witness_is_genuine(n, Q, R):
    dom = [(x, i) for x in range(-R, R + 1) for i in range(2)]
    cod = [(y,) for y in range(-R - Q, R + Q + 1)]
    r = whyte_match(dom, cod, Q, cost=lambda a, c: abs(a[0] - c[0]))
    # bipartite maximum matching from networkx as an independent check
    G = nx.Graph()
    G.add_nodes_from(("d", a) for a in dom)
    G.add_edges_from((("d", a), ("c", c)) for a in dom for c in cod if abs(a[0] - c[0]) <= Q)
    best = len(nx.bipartite.maximum_matching(G, top_nodes=[("d", a) for a in dom])) // 2
    assert r.size == best
    if r.witness is not None:
        S = set(r.witness["set"])
        nbhd = {c for a in S for c in cod if abs(a[0] - c[0]) <= Q}
        assert len(nbhd) < len(S) and nbhd == set(r.witness["neighborhood"])


def test_free_group_admits_two_to_one_maps():
    m = n_to_one_map(F2(), 4, 2, 2)
    audit = m.audit()
    assert set(audit["fiber_sizes"]) == {2} and audit["max_displacement"] <= 2
    for y, fib in m.fibers.items():
        assert all(m.image(x) == y for x in fib)
    with pytest.raises(FiberUnknown):
        m.fiber("ababab")


def test_one_to_one_maps_are_the_identity():
    m = n_to_one_map(F2(), 3, 1, 1)
    assert all(m.image(x) == x for x in m.forward)


def test_partition_certificates():
    X = [(k,) for k in range(-10, 11)]
    Y = [(k,) for k in range(-20, 22)]
    pc = partition_certify(lambda x: (2 * x[0],), X, Y, 1, 2, dist1)
    assert all(len(P) == 1 for P in pc.P)
    assert {tuple(Qp) for Qp in pc.Q} == {((2 * k,), (2 * k + 1,)) for k in range(-10, 11)}
    assert all(pc.g[x] == (2 * x[0],) for x in X)
    assert pc.check(lambda x: (2 * x[0],), dist1) == []
    pc = partition_certify(lambda x: (x[0] // 2,), Y, X, 2, 1, dist1, dist1)
    assert {tuple(P) for P in pc.P} == {((2 * k,), (2 * k + 1,)) for k in range(-10, 11)}
    assert all(len(Qp) == 1 for Qp in pc.Q)
    pc = partition_certify(lambda x: x, X, X, 1, 1, dist1)
    assert all(len(P) == 1 for P in pc.P) and all(i == j for i, j in pc.psi.items())
    with pytest.raises(CertificateNotFound):
        partition_certify(lambda x: x, X, X, 2, 3, dist1)


def lamp_lift(beta, k):
    g = LampGraph(Zd(2, 1), 2)
    zones = [(x,) for x in range(-2, 3)]
    sp = [(x, y) for x in range(-2, 3) for y in range(-4, 6)]
    tp = [(x, y) for x in range(-2, 3) for y in range(-2, 3)]
    ip = [(x, y) for x in range(-1, 2) for y in range(-1, 2)]
    boxes = [[(x, y) for x in range(a, b + 1) for y in range(c, e + 1)]
             for a in range(-1, 2) for b in range(a, 2) for c in range(-1, 2) for e in range(c, 2)]
    return lift_scaling_check(g, beta, k, zones, sp, tp, ip, boxes)


def test_lifted_halving_keeps_its_factor():
    c = lamp_lift(lambda p: (p[0], p[1] // 2), 2)
    assert c.C == 0 and c.max_deviation == 0 and len(c.tests) > 100
    wrong = lamp_lift(lambda p: (p[0], p[1] // 2), 1)
    assert wrong.C > 0


def test_product_and_composite_factors():
    z2 = Zd(2, 1)
    tgt = ball(z2, 6)
    fam = [[(x, y) for x in range(a, a + w) for y in range(c, c + h)]
           for a in range(-3, 2) for c in range(-3, 2) for w in (1, 2, 3) for h in (1, 2, 3)]
    prod = quasi_k_check(lambda p: (p[0] // 2, p[1]), ball(z2, 20), tgt, 2, fam)
    assert prod.max_deviation == 0
    quarter = quasi_k_check(lambda x: (x[0] // 4,), ball(Z, 50), ball(Z, 10), 4,
                            [[(v,) for v in range(a, b + 1)] for a in range(-8, 9) for b in range(a, 9)])
    assert quarter.max_deviation == 0
