from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wreathlab.certify import (C_GRID, LampWindow, Sample, certify_base, certify_lamp, component_distance,
                               fit_constants, induced_map, k_frontier, leaf_analysis, pairs_certificate,
                               qi_constants, replay_certificate)
from wreathlab.errors import InexactSample
from wreathlab.groups import make_model
from wreathlab.lamp import Coloring, LampGraph, stock_lamp_graph
from wreathlab.maps import BaseMap, SplitMergeMap, SignTwistMap, SupportShiftMap, lift_base_map


def brute_fit(dx, dy):
    best = None
    for C in C_GRID:
        K = max([Fraction(0)] + [b - C * a for a, b in zip(dx, dy)] + [a / C - b for a, b in zip(dx, dy)])
        if best is None or K < best[1]:
            best = (C, K)
    return best


def test_fit_on_simple_samples():
    ck = lambda dx, dy: (lambda f: (f.C, f.K))(fit_constants(dx, dy))
    assert ck([1, 2, 3], [1, 2, 3]) == (1, 0)
    assert ck([1, 2], [2, 4]) == (2, 0)
    # a merge map collapses distance 1 pairs; the least K is 1/8 at C = 8
    assert ck([1, 2], [0, 1]) == (8, Fraction(1, 8))
    assert k_frontier([1, 2], [0, 1])[0] == (1, 1)


@given(st.lists(st.tuples(st.integers(1, 20), st.integers(0, 40)), min_size=1, max_size=30))
def test_fit_is_the_least_envelope_on_the_grid(pairs):
    dx, dy = zip(*pairs)
    fit = fit_constants(dx, dy)
    assert (fit.C, fit.K) == brute_fit(dx, dy)
    assert all(a / fit.C - fit.K <= b <= fit.C * a + fit.K for a, b in pairs)


def test_inexact_samples_are_refused():
    with pytest.raises(InexactSample):
        qi_constants([Sample(None, None, 1, 1, True), Sample(None, None, 2, 3, False)])


@pytest.mark.parametrize("m,r", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_split_and_merge_are_r_bilipschitz(m, r):
    for kind in ("gamma", "eta"):
        c = certify_base(SplitMergeMap(kind, m, r), 8 if m == 2 else 6)
        assert (c.constants.C, c.constants.K) == (r, 0)


def test_identity_constants():
    z2 = make_model("z2")
    c = certify_base(BaseMap(z2, z2, lambda x: x), 5)
    assert (c.constants.C, c.constants.K) == (1, 0)


def test_sign_twist_constants_and_replay():
    g = stock_lamp_graph("z2wr_z_z2")
    cert = certify_lamp(SignTwistMap(g), LampWindow(g, 6), g, seed=1, n_random=300, C_max=2, K_max=0)
    assert cert.constants.C <= 2 and cert.constants.K == 0 and cert.ok
    doc = cert.to_json()
    assert replay_certificate(doc) == (True, [])
    doc["samples"]["pairs"][0][3] += 5
    ok, problems = replay_certificate(doc)
    assert not ok and problems


@pytest.mark.parametrize("R", [4, 6, 8])
def test_sign_twist_leaf_of_the_empty_colouring_is_split(R):
    g = stock_lamp_graph("z2wr_z_z2")
    rec = leaf_analysis(SignTwistMap(g), Coloring(2), LampWindow(g, R), g)
    assert len(rec.leaves_hit) == 2
    assert rec.deviation == R + 1 and rec.excluded == 0


def test_support_shift_constants_and_leaves():
    g = LampGraph(make_model("z2h"), 2)
    f = SupportShiftMap(g, (1, 0))
    cert = certify_lamp(f, LampWindow(g, 6), g, seed=2, n_random=300)
    assert cert.constants.C <= 2 and cert.constants.K == 0
    rec = leaf_analysis(f, Coloring.delta(2, (1,)), LampWindow(g, 4), g)
    assert rec.deviation == 0 and len(rec.leaves_hit) == 1


def test_lifted_base_map_preserves_leaves():
    g = stock_lamp_graph("z2wr_z_z2")
    f = lift_base_map(g, lambda p: (p[0], -p[1]))
    rec = leaf_analysis(f, Coloring.delta(2, (0,)), LampWindow(g, 4), g)
    assert rec.deviation == 0 and len(rec.leaves_hit) == 1


def test_pairs_constants():
    z2 = make_model("z2")
    ident = BaseMap(z2, z2, lambda x: x)
    assert pairs_certificate(ident, z2, z2, 8, 1, 0).Q == 0
    im = induced_map(pairs_certificate(ident, z2, z2, 8, 1, 0))
    assert all(im(z) == z for z in im.mapping)
    for kind, r, Q in [("gamma", 2, 1), ("eta", 2, 1), ("eta", 3, 1), ("gamma", 3, 2)]:
        f = SplitMergeMap(kind, 2, r)
        cert = pairs_certificate(f, f.source, f.target, 24, C=r, K=0, q_max=2)
        assert cert.Q == Q, (kind, r)


@pytest.mark.parametrize("r", [2, 3])
def test_induced_quotient_maps(r):
    g = SplitMergeMap("gamma", 2, r)
    im = induced_map(pairs_certificate(g, g.source, g.target, 24, C=r, K=0, q_max=2))
    expect = (lambda k: 2 * k) if r == 2 else (lambda k: 3 * k + 1)
    assert all(im((k,)) == (expect(k),) for (k,) in im.mapping)
    e = SplitMergeMap("eta", 2, r)
    ie = induced_map(pairs_certificate(e, e.source, e.target, 24, C=r, K=0, q_max=2))
    assert all(ie((p,)) == (p // r,) for (p,) in ie.mapping)


def test_subgroup_translation_fixes_every_coset():
    g = LampGraph(make_model("z2h"), 2)
    f = SupportShiftMap(g, (1, 0))
    base = f.base_component(Coloring.delta(2, (0,)))
    cert = pairs_certificate(base, g.model, g.model, 12, C=1)
    assert cert.Q == 0
    im = induced_map(cert)
    assert all(im(z) == z for z in im.mapping)


@pytest.mark.parametrize("k", range(1, 6))
def test_base_components_drift_apart_with_support_size(k):
    g = LampGraph(make_model("z2h"), 2)
    f = SupportShiftMap(g, (1, 0))
    c = Coloring.delta(2, *[(i,) for i in range(k)])
    assert component_distance(f.base_component(c), f.base_component(Coloring(2)), g.model, 6) == k
