import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from discwave.lattice import (
    L1Ball,
    LatticeField,
    count_l1_ball,
    l1_ball_bound,
    l1_norm,
    neighbor_sum,
    read_snapshot,
    support_radius,
    write_snapshot,
)


def brute_count(d, R):
    return sum(1 for s in itertools.product(range(-R, R + 1), repeat=d) if sum(map(abs, s)) <= R)


def binomial_count(d, R):
    # points with exactly k nonzero coordinates: choose them, their signs, and a composition
    return sum(2**k * comb(d, k) * comb(R, k) for k in range(0, d + 1))


@pytest.mark.parametrize("site,expected", [((0, 0), 0), ((1, -2, 3), 6), ((-5,), 5)])
def test_l1_norm(site, expected):
    assert l1_norm(site) == expected


@pytest.mark.parametrize("d,R,expected", [(1, 2, 5), (2, 2, 13), (2, 0, 1)])
def test_count_examples(d, R, expected):
    assert count_l1_ball(d, R) == expected


def test_count_matches_box_enumeration():
    for d in range(1, 5):
        for R in range(0, 7):
            assert count_l1_ball(d, R) == brute_count(d, R)


def test_count_matches_binomial_formula_full_range():
    for d in range(1, 5):
        for R in range(0, 51):
            assert count_l1_ball(d, R) == binomial_count(d, R)


@pytest.mark.parametrize("d,R,expected", [(1, 1, 8), (2, 2, 128), (1, 2, 16)])
def test_bound_examples(d, R, expected):
    assert l1_ball_bound(d, R) == expected


def test_bound_rejects_zero_radius():
    with pytest.raises(ValueError):
        l1_ball_bound(2, 0)


def test_overflow_rejected():
    with pytest.raises(OverflowError):
        count_l1_ball(4, 10**5)
    with pytest.raises(OverflowError):
        l1_ball_bound(4, 10**5)


def test_ball_enumeration_lexicographic_and_unique():
    for d in range(1, 4):
        pts = list(L1Ball(d, 3))
        assert pts == sorted(pts)
        assert len(pts) == len(set(pts)) == count_l1_ball(d, 3)
        assert all(l1_norm(p) <= 3 for p in pts)
    assert (1, -2) in L1Ball(2, 3) and (2, -2) not in L1Ball(2, 3)


def test_neighbor_sum_examples():
    assert neighbor_sum(LatticeField.zeros(2, 3), (0, 0)) == 0.0
    spike = LatticeField.from_sites(1, {(0,): 1.0})
    assert neighbor_sum(spike, (0,)) == 0.0
    assert neighbor_sum(spike, (1,)) == 1.0
    assert neighbor_sum(LatticeField.from_sites(2, {(0, 0): 2.0}), (1, 0)) == 2.0


small_fields = st.dictionaries(
    st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
    st.floats(-8, 8, allow_nan=False).map(lambda x: float(np.float16(x))),  # exact sums
    max_size=12,
)


@settings(max_examples=50, deadline=None)
@given(small_fields, small_fields, st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
       st.tuples(st.integers(-4, 4), st.integers(-4, 4)))
def test_neighbor_sum_linear_and_translation_invariant(a, b, site, shift):
    fa, fb = LatticeField.from_sites(2, a), LatticeField.from_sites(2, b)
    both = {k: a.get(k, 0.0) + b.get(k, 0.0) for k in set(a) | set(b)}
    assert neighbor_sum(LatticeField.from_sites(2, both), site) == neighbor_sum(fa, site) + neighbor_sum(fb, site)
    moved = {(k[0] + shift[0], k[1] + shift[1]): v for k, v in a.items()}
    s2 = (site[0] + shift[0], site[1] + shift[1])
    assert neighbor_sum(LatticeField.from_sites(2, moved), s2) == neighbor_sum(fa, site)


def test_support_radius_examples():
    assert support_radius(LatticeField.zeros(3, 2)) is None
    assert support_radius(LatticeField.from_sites(2, {(2, -1): 0.5})) == 3
    ball = LatticeField.from_sites(2, {s: 1.0 for s in L1Ball(2, 4)})
    assert support_radius(ball) == 4


def test_reads_outside_box_are_zero_and_halo_is_clean():
    f = LatticeField.from_sites(2, {(1, 1): 3.0})
    assert f[(100, -100)] == 0.0
    f.validate()
    f.values[0, 0] = 1.0
    with pytest.raises(ValueError):
        f.validate()


def test_embedded_rejects_too_small_box():
    f = LatticeField.from_sites(1, {(3,): 1.0})
    assert f.embedded(10)[(3,)] == 1.0
    with pytest.raises(ValueError):
        f.embedded(3)


def test_snapshot_round_trip(tmp_path):
    f = LatticeField.from_sites(3, {(0, 1, -1): 0.1, (2, 0, 0): -1e-300, (0, 0, 0): 7.0})
    path = tmp_path / "snap.csv"
    write_snapshot(f, path)
    assert path.read_text().splitlines()[0] == "i_1,i_2,i_3,value"
    assert read_snapshot(path) == f


def test_snapshot_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y,value\n0,0,1.0\n")
    with pytest.raises(ValueError):
        read_snapshot(path)
