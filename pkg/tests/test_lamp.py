import random

import pytest
from hypothesis import given, strategies as st

from wreathlab.errors import InexactBudget, LampOrderMismatch, SupportTooLarge
from wreathlab.groups import make_model
from wreathlab.lamp import (Coloring, LampGraph, lamp_distance, leaf_distance, replay_witness,
                            stock_lamp_graph, support_diff)


def line_oracle(diff: set, p1: int, p2: int) -> int:
    """Lamplighter distance over Z: recolour every zone in diff, walking from p1 to p2."""
    if not diff:
        return abs(p2 - p1)
    lo, hi = min(min(diff), p1, p2), max(max(diff), p1, p2)
    walk = (hi - lo) + min(abs(p1 - lo) + abs(hi - p2), abs(hi - p1) + abs(p2 - lo))
    return len(diff) + walk


zones = st.sets(st.integers(-4, 4), max_size=4)


@st.composite
def plane_instances(draw):
    c1 = draw(zones)
    c2 = draw(zones)
    p1 = (draw(st.integers(-4, 4)), draw(st.integers(-3, 3)))
    p2 = (draw(st.integers(-4, 4)), draw(st.integers(-3, 3)))
    return c1, c2, p1, p2


def test_neighbor_counts():
    g = stock_lamp_graph("z2wr_z")
    nb = g.neighbors(g.state())
    assert {(s.coloring, s.position) for s in nb} == {
        (Coloring(2), (-1,)), (Coloring(2), (1,)), (Coloring.delta(2, (0,)), (0,))}
    assert len(stock_lamp_graph("z2wr_z_z2").neighbors(stock_lamp_graph("z2wr_z_z2").state())) == 5
    g3 = stock_lamp_graph("z3wr_z")
    assert len(g3.neighbors(g3.state())) == 4


def test_reference_distances():
    g = stock_lamp_graph("z2wr_z")
    s = g.state()
    t = g.state({(0,): 1, (1,): 1}, (2,))
    for engine in ("zone-tsp", "bfs"):
        assert lamp_distance(g, s, t, engine).value == 4
        assert lamp_distance(g, t, t, engine).value == 0
    g2 = stock_lamp_graph("z2wr_z_z2")
    a, b = g2.state(), g2.state({(2,): 1}, (0, 0))
    assert lamp_distance(g2, a, b).value == lamp_distance(g2, a, b, "bfs").value == 5


def test_support_diff():
    c = Coloring.from_dict(2, {(1,): 1})
    assert support_diff(c, c) == set()
    assert support_diff(Coloring(2), Coloring.delta(2, (0,))) == {(0,)}
    assert support_diff(Coloring.from_dict(3, {(2,): 1}), Coloring.from_dict(3, {(2,): 2})) == {(2,)}


@given(plane_instances())
def test_zone_tsp_matches_closed_form_on_vertical_lines(inst):
    c1, c2, p1, p2 = inst
    g = stock_lamp_graph("z2wr_z_z2")
    s1 = g.state({(z,): 1 for z in c1}, p1)
    s2 = g.state({(z,): 1 for z in c2}, p2)
    r = lamp_distance(g, s1, s2)
    assert r.exact
    assert r.value == line_oracle(c1 ^ c2, p1[0], p2[0]) + abs(p2[1] - p1[1])
    assert replay_witness(g, s1, r.witness) == s2 and len(r.witness) == r.value


@given(zones, zones, st.integers(-4, 4), st.integers(-4, 4))
def test_zone_tsp_and_bfs_agree_on_the_line(c1, c2, p1, p2):
    g = stock_lamp_graph("z2wr_z")
    s1 = g.state({(z,): 1 for z in c1}, (p1,))
    s2 = g.state({(z,): 1 for z in c2}, (p2,))
    v = lamp_distance(g, s1, s2).value
    assert v == lamp_distance(g, s1, s2, "bfs").value == line_oracle(c1 ^ c2, p1, p2)


def test_three_coloured_lamps_cost_one_step_per_zone():
    g = stock_lamp_graph("z3wr_z")
    s = g.state({(0,): 1}, (0,))
    t = g.state({(0,): 2, (2,): 1}, (1,))
    assert lamp_distance(g, s, t).value == lamp_distance(g, s, t, "bfs").value == line_oracle({0, 2}, 0, 1)


def test_heisenberg_lamps_agree_between_engines():
    g = LampGraph(make_model("heis"), 2)
    rng = random.Random(5)
    gens = list(g.model.generators.values())
    for _ in range(6):
        p = g.model.identity
        zs = []
        for _ in range(3):
            p = g.model.mul(p, rng.choice(gens))
            zs.append(g.zone_of(p))
        t = g.state({z: 1 for z in zs[:2]}, p)
        assert lamp_distance(g, g.state(), t).value == lamp_distance(g, g.state(), t, "bfs").value


def test_leaf_distance_is_the_nearest_state_of_the_leaf():
    g = stock_lamp_graph("z2wr_z")
    c = Coloring.from_dict(2, {(3,): 1, (-1,): 1})
    s = g.state(None, (0,))
    best = min(lamp_distance(g, s, g.state(c, (p,))).value for p in range(-6, 8))
    assert leaf_distance(g, s, c).value == best


def test_error_paths():
    g = stock_lamp_graph("z2wr_z")
    with pytest.raises(LampOrderMismatch):
        lamp_distance(g, g.state(), stock_lamp_graph("z3wr_z").state())
    many = g.state({(z,): 1 for z in range(14)}, (0,))
    with pytest.raises(SupportTooLarge):
        lamp_distance(g, g.state(), many)
    with pytest.raises(InexactBudget):
        lamp_distance(g, g.state(), g.state({(9,): 1}, (0,)), "bfs", budget=50)
