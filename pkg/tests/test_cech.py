import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import brute_cech, graph_components
from tailbetti.cech import (
    UnionFind,
    build_cech,
    build_cech_filtered,
    cech_scaling_check,
    components,
    edge_pairs,
    minimal_cycle_indicator,
    minimal_cycle_pm,
)
from tailbetti.homology import betti


@st.composite
def clouds(draw, d=None, max_n=9):
    d = d or draw(st.integers(2, 3))
    n = draw(st.integers(1, max_n))
    return draw(arrays(float, (n, d), elements=st.floats(-2, 2, allow_nan=False)))


def test_hollow_triangle():
    side = 0.9
    P = np.array([[0, 0], [side, 0], [side / 2, side * math.sqrt(3) / 2]])
    cx = build_cech(P, 1.0, 2)
    # circumradius 0.9/sqrt(3) = 0.5196 > 1/2, so the 2-simplex is absent
    assert cx.counts() == [3, 3, 0]
    assert betti(cx, 1) == 1
    assert build_cech(P, 1.1, 2).counts() == [3, 3, 1]


def test_edge_threshold_is_strict():
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert build_cech(P, 1.0, 1).counts() == [2, 0]
    assert build_cech(P, 1.0 + 1e-12, 1).counts() == [2, 1]
    assert len(edge_pairs(P, 1.0)) == 0


def test_dim_cap_limits():
    P = np.random.default_rng(0).standard_normal((6, 2))
    with pytest.raises(ValueError):
        build_cech(P, 1.0, 4)
    with pytest.raises(ValueError):
        build_cech(P, -1.0, 1)


@given(clouds(d=2), st.floats(0.05, 3.0))
def test_matches_brute_force_in_plane(P, t):
    cx = build_cech(P, t, 2)
    ref = brute_cech(P, t, 2)
    for m in range(3):
        assert set(cx.simplices[m]) == set(ref[m])


@given(clouds(), st.floats(0.05, 3.0))
def test_downward_closed(P, t):
    cap = min(P.shape[1], 3)
    assert build_cech(P, t, cap).is_downward_closed()


@given(clouds(), st.floats(0.05, 2.0), st.floats(1.0, 2.0))
def test_monotone_in_scale(P, t, f):
    cap = P.shape[1]
    small = build_cech(P, t, cap).simplex_set()
    large = build_cech(P, t * f, cap).simplex_set()
    assert small <= large


@given(clouds(max_n=7), st.floats(0.1, 2.0), st.sampled_from([0.25, 0.5, 2.0, 8.0]))
def test_scaling_equivariance(P, t, s):
    # powers of two scale exactly, so no threshold can flip by rounding
    assert cech_scaling_check(P, t, s)


@given(clouds(max_n=7), st.floats(0.1, 2.0), st.floats(0.2, 5.0))
def test_similarity_equivariance_away_from_ties(P, t, s):
    from itertools import combinations
    from tailbetti.geometry import meb_radius_enumerate

    births = [2 * meb_radius_enumerate(P[list(c)]) for m in (2, 3) for c in combinations(range(len(P)), m)]
    assume(all(abs(b - t) > 1e-9 * max(t, 1.0) for b in births))
    assert cech_scaling_check(P, t, s, shift=np.full(P.shape[1], 0.5))


def test_filtered_births_match_rebuild():
    rng = np.random.default_rng(2)
    P = rng.uniform(0, 2, (12, 3))
    simplices, births = build_cech_filtered(P, 3, 1.5)
    for t in [0.3, 0.7, 1.1, 1.5]:
        cx = build_cech(P, t, 3)
        for m in range(1, 4):
            alive = {s for s, b in zip(simplices[m], births[m]) if b < t}
            assert alive == set(cx.simplices[m])


@given(clouds(max_n=15), st.floats(0.05, 3.0))
def test_components_match_graph_oracle(P, t):
    dec = components(P, t)
    assert len(dec) == graph_components(P, t)
    assert sorted(np.concatenate(dec.members).tolist()) == list(range(len(P)))
    assert betti(build_cech(P, t, 1), 0) == len(dec)


def test_components_keep_ids():
    P = np.array([[0.0, 0.0], [0.5, 0.0], [5.0, 5.0]])
    dec = components(P, 1.0, ids=[10, 20, 30])
    assert [list(i) for i in dec.ids] == [[10, 20], [30]]
    assert dec.sizes() == [2, 1]


def test_union_find():
    uf = UnionFind(5)
    assert uf.union(0, 1) and uf.union(3, 4) and not uf.union(1, 0)
    assert uf.n_sets == 3
    assert uf.find(0) == uf.find(1) != uf.find(3)


@given(arrays(float, (1, 3, 2), elements=st.floats(-1, 1, allow_nan=False)), st.floats(0.1, 2.0))
def test_minimal_cycle_fast_path_matches_homology(P, t):
    hit = bool(minimal_cycle_indicator(P, t)[0])
    cx = build_cech(P[0], t, 2)
    connected = len(components(P[0], t)) == 1
    assert hit == (connected and betti(cx, 1) == 1)


def test_minimal_cycle_fast_path_3d():
    rng = np.random.default_rng(4)
    P = rng.uniform(-1, 1, (400, 4, 3))
    fast = minimal_cycle_indicator(P, 1.2)
    slow = [len(components(p, 1.2)) == 1 and betti(build_cech(p, 1.2, 3), 2) == 1 for p in P]
    assert fast.tolist() == slow


def test_full_convention_is_half_at_double_scale():
    rng = np.random.default_rng(5)
    P = rng.uniform(-1, 1, (500, 3, 2))
    for t in [0.3, 0.6, 1.0]:
        full = minimal_cycle_pm(P, t, convention="full")
        half = minimal_cycle_pm(P, 2 * t, convention="half")
        assert np.array_equal(full[0], half[0]) and np.array_equal(full[1], half[1])
