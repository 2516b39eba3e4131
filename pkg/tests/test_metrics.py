from collections import deque

import pytest
from hypothesis import given, strategies as st

from wreathlab.errors import BudgetExceeded, WindowTooSmall
from wreathlab.groups import make_model
from wreathlab.metrics import ball, coarse_components, graph_ball, hausdorff, separation_probe, zone_distance


def heis_bfs_count(r):
    """Ball size from words in 3x3 unitriangular matrices, independent of the model code."""
    gens = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)]
    seen = {(0, 0, 0): 0}
    q = deque([(0, 0, 0)])
    while q:
        g = q.popleft()
        if seen[g] == r:
            continue
        for s in gens:
            x, y, z = g
            h = (x + s[0], y + s[1], z + s[2] + x * s[1])
            if h not in seen:
                seen[h] = seen[g] + 1
                q.append(h)
    return len(seen)


@pytest.mark.parametrize("r", range(0, 7))
def test_square_lattice_ball_size(r):
    assert len(ball(make_model("z2"), r)) == 2 * r * r + 2 * r + 1


def test_heisenberg_ball_sizes():
    h = make_model("heis")
    assert len(ball(h, 2)) == 17
    for r in range(5):
        assert len(ball(h, r)) == heis_bfs_count(r)


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        ball(make_model("f2"), 8, budget=100)


def test_hausdorff_on_the_line():
    b = ball(make_model("z"), 6)
    assert hausdorff([(0,)], [(0,), (3,)], b) == 3
    assert hausdorff([(1,), (2,)], [(1,), (2,)], b) == 0


def test_parallel_slices_are_as_far_apart_as_their_cosets():
    b = ball(make_model("z2"), 8)
    M = [(0, y) for y in range(-3, 4)]
    gM = [(5, y) for y in range(-3, 4)]
    assert hausdorff(M, gM, b) == 5
    assert zone_distance(b, (0,), (5,)).value == 5


def test_coarse_components():
    b = ball(make_model("z"), 8)
    S = [(0,), (1,), (5,), (6,)]
    assert coarse_components(S, 1, b) == [[(0,), (1,)], [(5,), (6,)]]
    assert len(coarse_components(S, 4, b)) == 1


def test_strip_removal_leaves_two_pieces():
    b = ball(make_model("z2"), 6)
    rest = [v for v in b.vertices if abs(v[1]) > 1]
    assert len(coarse_components(rest, 1, b)) == 2


def test_separation_of_plane_and_space():
    b = ball(make_model("z2"), 20)
    assert separation_probe(b, [(x, 0) for x in range(-20, 21)], 2, 1, 5).count == 2
    b3 = ball(make_model("z3"), 12)
    axis = [(0, 0, z) for z in range(-12, 13)]
    assert separation_probe(b3, axis, 1, 1, 5).count == 1
    with pytest.raises(WindowTooSmall):
        separation_probe(b3, axis, 2, 1, 5)
    assert separation_probe(b3, [], 3, 1, 3).count == 1


def test_zone_distances():
    b = ball(make_model("z2"), 8)
    assert zone_distance(b, (0,), (4,)) == (4, True)
    assert zone_distance(b, (2,), (2,)).value == 0
    h = ball(make_model("heis"), 8)
    assert zone_distance(h, (0, 0), (1, 1)) == (2, True)


@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=6),
       st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=6),
       st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=6))
def test_hausdorff_is_a_metric_on_finite_sets(A, B, C):
    b = ball(make_model("z2"), 8)
    dab = hausdorff(A, B, b)
    assert dab == hausdorff(B, A, b)
    assert dab <= hausdorff(A, C, b) + hausdorff(C, B, b)
    assert (dab == 0) == (set(A) == set(B))


def test_graph_ball_from_edges():
    g = graph_ball(range(4), [(0, 1), (1, 2), (2, 3)])
    assert g.complete and len(g) == 4
    assert int(g.distances_from(g.index[0])[g.index[3]]) == 3
