import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gausslab import EmptyFamily
from gausslab.geometry import (AdmissibleEnum, Cube, DyadicCube, containing_dyadic, cube_average,
                               dyadic_admissibility_parameter, dyadic_cubes_meeting, dyadic_level,
                               enumerate_admissible_cubes, erf_diff, gauss_interval, gaussian_measure,
                               interval_mass, is_admissible, m_value, tilted_measure, vitali_select)
from gausslab.grid import GridFunction

from oracles import erf_oracle, gauss_interval_oracle, quad_gauss_cube, quad_tilted_interval

finite = st.floats(-8, 8, allow_nan=False)


# -- erf and interval masses -------------------------------------------------------

@pytest.mark.parametrize("x", [0.0, 1e-8, 0.1, 0.5, 1.0, 2.0, 2.9, 3.1, 4.5, 6.0])
def test_erf_diff_against_series_oracle(x):
    assert erf_diff(np.array([0.0]), np.array([x]))[0] == pytest.approx(erf_oracle(x), rel=1e-14, abs=1e-300)


@pytest.mark.parametrize("lo,hi", [(-1.0, 1.0), (0.2, 0.7), (3.5, 4.0), (5.0, 5.5), (-6.0, -5.0), (-0.3, 8.0)])
def test_gauss_interval_tails_keep_relative_precision(lo, hi):
    got = gauss_interval(np.array([lo]), np.array([hi]))[0]
    assert got == pytest.approx(gauss_interval_oracle(lo, hi), rel=1e-12)


@given(lo=st.floats(-7, 7), w=st.floats(1e-12, 5))
def test_gauss_interval_relative_precision(lo, w):
    got = gauss_interval(np.array([lo]), np.array([lo + w]))[0]
    assert got == pytest.approx(gauss_interval_oracle(lo, lo + w), rel=1e-12)


@given(lo=finite, w=st.floats(1e-3, 5))
def test_interval_mass_matches_quadrature(lo, w):
    kappa = 0.75
    got = interval_mass(np.array([lo]), np.array([lo + w]), kappa)[0]
    ref = quad_tilted_interval(lo, lo + w, kappa)
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-300)


# -- cube measures -------------------------------------------------------------------

def test_gaussian_measure_examples():
    assert gaussian_measure(Cube([0.0], 2.0)) == pytest.approx(0.8427007929, abs=1e-10)
    assert gaussian_measure(Cube([0.0], 2.0)) == pytest.approx(erf_oracle(1.0), rel=1e-15)
    assert gaussian_measure(Cube([0.0, 0.0], 2.0)) == pytest.approx(erf_oracle(1.0) ** 2, rel=1e-15)
    assert gaussian_measure(Cube([0.0, 0.0], 2.0)) == pytest.approx(0.7101446, abs=1e-7)
    for d in (1, 2, 3):
        assert abs(gaussian_measure(Cube(np.zeros(d), 12.0)) - 1.0) <= 1e-12
    assert gaussian_measure(Cube([0.0], 1e6)) == 1.0


def test_tilted_measure_examples():
    assert tilted_measure(Cube([0.3, -2.0], 0.7), 0.0) == pytest.approx(0.49)
    assert tilted_measure(Cube([0.0], 2.0), 1.0) == pytest.approx(1.4936482656, abs=1e-10)
    assert tilted_measure(Cube([0.5], 1.0), 0.5) == pytest.approx(0.8556243918, abs=1e-10)
    assert tilted_measure(Cube([0.0], 2.0), 1.0) == pytest.approx(quad_tilted_interval(-1, 1, 1.0), rel=1e-13)


@given(c=st.lists(st.floats(-4, 4), min_size=1, max_size=3), s=st.floats(0.01, 4))
def test_gaussian_measure_matches_quadrature(c, s):
    Q = Cube(c, s)
    assert gaussian_measure(Q) == pytest.approx(quad_gauss_cube(Q.lower, Q.upper), rel=1e-9)


@given(c=st.lists(st.floats(-3, 3), min_size=1, max_size=3), s=st.floats(0.01, 3),
       grow=st.floats(1.0, 3.0), shift=st.floats(-0.5, 0.5))
def test_gaussian_measure_monotone_under_inclusion(c, s, grow, shift):
    inner = Cube(c, s)
    # an enclosing cube: larger side, center moved by at most half the slack
    outer = Cube(inner.center + shift * (grow - 1) * s, grow * s)
    assert outer.contains_cube(inner, tol=1e-12)
    assert gaussian_measure(outer) >= gaussian_measure(inner) * (1 - 1e-14)


def test_gaussian_measure_tends_to_one():
    vals = [gaussian_measure(Cube([0.7, -0.2], s)) for s in (1, 2, 4, 8, 16)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1.0, abs=1e-15)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        gaussian_measure(Cube([0.0, 0.0], 1.0), d=3)


# -- admissibility --------------------------------------------------------------------

def test_admissibility_examples():
    assert is_admissible(Cube([0.0], 1.0), 1.0)
    assert is_admissible(Cube([2.0], 0.5), 1.0)
    assert not is_admissible(Cube([2.0], 0.6), 1.0)
    assert m_value([3.0, 4.0]) == pytest.approx(0.2)
    assert m_value([0.5]) == 1.0


def test_enumeration_at_origin():
    enum = AdmissibleEnum(2.0, 3, 0.25)
    cubes = enumerate_admissible_cubes([0.0], 1.0, enum)
    assert cubes
    assert all(Q.contains([0.0]) and is_admissible(Q, 1.0) for Q in cubes)
    assert {Q.side for Q in cubes} == {1.0, 0.5, 0.25}


def test_enumeration_far_out():
    enum = AdmissibleEnum.for_grid(0.01, 1.0)
    cubes = enumerate_admissible_cubes([10.0], 1.0, enum)
    assert cubes and all(Q.side <= 0.1 * (1 + 1e-12) for Q in cubes)
    assert all(is_admissible(Q, 1.0) for Q in cubes)


def test_enumeration_empty_family():
    with pytest.raises(EmptyFamily):
        enumerate_admissible_cubes([100.0], 1.0, AdmissibleEnum(2.0, 2, 0.25))


@given(x=st.lists(st.floats(-20, 20), min_size=1, max_size=3), a=st.sampled_from([0.5, 1.0, 2.0]))
def test_enumeration_contains_point(x, a):
    enum = AdmissibleEnum(2.0, 3, 0.25, max_scale=a * m_value(x))
    cubes = enumerate_admissible_cubes(x, a, enum)
    assert cubes
    assert all(Q.contains(x) and is_admissible(Q, a) for Q in cubes)


def test_refined_enum_is_superset():
    enum = AdmissibleEnum(2.0, 3, 0.25)
    key = lambda Q: (Q.side, tuple(np.round(Q.center, 12)))
    coarse = {key(Q) for Q in enumerate_admissible_cubes([0.3], 1.0, enum)}
    fine = {key(Q) for Q in enumerate_admissible_cubes([0.3], 1.0, enum.refine())}
    assert coarse <= fine


@given(c=st.lists(st.floats(-30, 30), min_size=1, max_size=3), t=st.floats(1e-3, 1.0),
       a=st.sampled_from([0.5, 1.0, 2.0]))
def test_corner_bound(c, t, a):
    Q = Cube(c, a * m_value(c) * t)
    sq = np.sum(Q.corners() ** 2, axis=1)
    assert sq.max() - sq.min() <= 2 * a * (math.sqrt(Q.dim) * a + 2) * (1 + 1e-12)


# -- dyadic cubes ---------------------------------------------------------------------

def test_dyadic_level_examples():
    assert dyadic_level(0.6) == 0
    assert dyadic_level(1.0) == 1
    assert dyadic_level(0.5) == 0
    assert dyadic_level(0.49) == -1


def test_containing_dyadic_examples():
    g = GridFunction([-2.0], [3.0], 50, np.ones(50))
    P, _ = containing_dyadic(Cube([0.6], 0.6), g, 0.0, 1.0)
    assert P == DyadicCube(0, (0,))
    assert P.to_cube().dilate(3).contains_cube(Cube([0.6], 0.6))
    P, _ = containing_dyadic(Cube([0.5], 1.0), g, 0.0, 1.0)
    assert P.level == 1 and P.side == 2.0


@pytest.mark.parametrize("alpha", [0.0, 0.5])
def test_containing_dyadic_average_on_indicator(alpha):
    # g is the indicator of Q itself, sampled exactly on cell edges
    Q = Cube([0.35], 0.3)
    g = GridFunction([-1.0], [2.0], 300, np.zeros(300))
    vals = np.where((g.axis_midpoints(0) > Q.lower[0]) & (g.axis_midpoints(0) < Q.upper[0]), 1.0, 0.0)
    g = g.with_values(vals)
    P, avgP = containing_dyadic(Q, g, alpha, 1.0)
    ratio = avgP / cube_average(Q, g, alpha)
    assert ratio >= 2 ** (alpha - 2) * (1 - 1e-12)
    assert is_admissible(P.to_cube(), dyadic_admissibility_parameter(1.0, 1))


@given(lo=st.lists(st.floats(-3, 3), min_size=1, max_size=3), w=st.floats(0.1, 2.0), k=st.integers(-3, 1))
def test_dyadic_tiling_partitions_box(lo, w, k):
    lo = np.asarray(lo)
    hi = lo + w
    tiles = dyadic_cubes_meeting(lo, hi, k)
    total = 0.0
    for P in tiles:
        c = P.to_cube()
        a = np.maximum(c.lower, lo)
        b = np.minimum(c.upper, hi)
        assert np.all(b > a)
        total += float(np.prod(gauss_interval(a, b)))
    assert total == pytest.approx(float(np.prod(gauss_interval(lo, hi))), rel=1e-10)


def test_dyadic_parent_contains():
    P = DyadicCube(-2, (3, -5))
    assert P.parent().contains(P) and not P.contains(P.parent())
    assert P.parent().side == 2 * P.side


# -- covering ---------------------------------------------------------------------------

def test_vitali_single_cube():
    Q = Cube([0.0], 1.0)
    sel = vitali_select([Q])
    assert sel.count == 1 and sel.selected() == [Q]


def test_vitali_random_inputs(rng):
    for _ in range(100):
        n = int(rng.integers(1, 30))
        cubes = [Cube([rng.uniform(-5, 5)], rng.uniform(0.05, 2.0)) for _ in range(n)]
        sel = vitali_select(cubes)
        for fam in sel.families:
            for i, P in enumerate(fam):
                assert all(not P.intersects(R) for R in fam[i + 1:])
        chosen = sel.selected()
        for Q in cubes:
            assert any(P.dilate(3.0).contains_cube(Q, tol=1e-12) for P in chosen)
        assert sel.count == 1
