import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gausslab import DegenerateWeight, ExponentParams, GridFunction, InvalidExponents
from gausslab.geometry import Cube
from gausslab.verify import TestBattery, divergence_scan, monotonicity_check
from gausslab.weights import (WeightPair, a1_equivalence_check, average_test_check, counterexample_family,
                              parse_weight, partition_points, radial_transform, sawyer_constant, unit_pair,
                              weight_constant)

from oracles import quad_tilted_interval

P = ExponentParams(2, 2, 0.5, 1.0, 1)


def pair(u, v, R=3.0):
    return WeightPair(parse_weight(u), parse_weight(v), [-R], [R])


# -- weight masses ------------------------------------------------------------------------

@pytest.mark.parametrize("text", ["exp(0.3 * abs2(x)) * piecewise(abs(x) < 0.7: 2; else: 0.5)",
                                  "pow(1 + abs2(x), -0.75)", "1 + 0.5 * abs(x)",
                                  "piecewise(x < -0.2: exp(-2 * abs2(x)); else: 3)"])
def test_weight_masses_match_quadrature(text):
    w = parse_weight(text)
    g = GridFunction([-2.0], [2.0], 16)
    got = w.masses(g, "tilt", 0.5)
    e = g.edges(0)
    fn = lambda t: float(w.evaluate(np.array([[t]]))[0]) * math.exp(-0.5 * t * t)
    from scipy import integrate
    for i in range(16):
        pts = [p for p in (-0.7, -0.2, 0.0, 0.7) if e[i] < p < e[i + 1]]
        ref, _ = integrate.quad(fn, e[i], e[i + 1], points=pts or None, epsabs=0, epsrel=1e-12)
        assert got[i] == pytest.approx(ref, rel=1e-10)


def test_gaussian_factor_masses_are_exact():
    w = parse_weight("exp(0.25 * abs2(x))")
    g = GridFunction([0.0], [3.0], 3)
    got = w.masses(g, "tilt", 0.75)
    for i, (lo, hi) in enumerate([(0, 1), (1, 2), (2, 3)]):
        assert got[i] == pytest.approx(quad_tilted_interval(lo, hi, 0.5), rel=1e-13)


def test_nonintegrable_singularity_gives_inf():
    g = GridFunction([-1.0], [1.0], 4)
    m = parse_weight("pow(abs(x), -1.5)").masses(g, "lebesgue")
    assert np.isinf(m[1]) and np.isinf(m[2]) and np.all(np.isfinite(m[[0, 3]]))
    soft = parse_weight("pow(abs(x), -0.5)").masses(g, "lebesgue")
    assert soft[2] == pytest.approx(2 * math.sqrt(0.5), rel=1e-8)


def test_degenerate_dual_weight():
    with pytest.raises(DegenerateWeight):
        weight_constant(pair("1", "piecewise(abs(x) < 1: 0; else: 1)"), P, "A", resolution=64)


# -- constants -----------------------------------------------------------------------------

def test_unit_weights_radial_constant_is_one():
    Pq = ExponentParams(2, 2, 0.0, 1.0, 1)
    assert weight_constant(unit_pair([-3.0], [3.0]), Pq, "scriptA", resolution=128).value == pytest.approx(1.0, rel=1e-13)


def test_unit_weights_gauss_constant_at_most_one():
    r = weight_constant(unit_pair([-3.0], [3.0]), P, "A", resolution=128)
    assert 0 < r.value <= 1.0 and r.cubes_scanned > 0 and r.argmax is not None


def test_unit_weights_testing_constant_at_most_one():
    Pq = ExponentParams(2, 2, 0.0, 1.0, 1)
    assert 0 < sawyer_constant(unit_pair([-3.0], [3.0]), Pq, resolution=128).value <= 1.0 + 1e-12


def test_testing_constant_with_zero_u():
    assert sawyer_constant(pair("0", "1"), P, resolution=64).value == 0.0


@pytest.mark.parametrize("kind", ["A", "scriptA", "frakturA"])
def test_scaling_laws(kind):
    base = pair("1 + abs(x)", "exp(0.2 * abs2(x))")
    g = base.grid(128)
    c = weight_constant(base, P, kind, grid=g).value
    cu = weight_constant(base.with_weights(base.u.scaled(3.0), base.v), P, kind, grid=g).value
    cv = weight_constant(base.with_weights(base.u, base.v.scaled(3.0)), P, kind, grid=g).value
    assert cu == pytest.approx(c * 3.0 ** (1 / P.q), rel=1e-13)
    assert cv == pytest.approx(c * 3.0 ** (-1 / P.p), rel=1e-13)


def test_testing_constant_scales_with_u():
    base = pair("1 + abs(x)", "exp(0.2 * abs2(x))")
    g = base.grid(128)
    c = sawyer_constant(base, P, grid=g).value
    cu = sawyer_constant(base.with_weights(base.u.scaled(5.0), base.v), P, grid=g).value
    assert cu == pytest.approx(c * 5.0 ** (1 / P.q), rel=1e-12)


def test_p_equal_one_uses_sup_of_inverse():
    P1 = ExponentParams(1, 1, 0.0, 1.0, 1)
    r = weight_constant(pair("1", "2"), P1, "scriptA", resolution=64)
    assert r.value == pytest.approx(0.5, rel=1e-13)


def test_family_monotonicity_of_constants():
    res = monotonicity_check(unit_pair([-3.0], [3.0]), P, [0.25, 0.5, 1.0], resolution=128)
    assert res["violations"] == 0
    assert monotonicity_check(unit_pair([-3.0], [3.0]), P, [1.0], resolution=64)["violations"] == 0


def test_family_monotonicity_random_weights(rng):
    for _ in range(10):
        t, k1, k2 = rng.uniform(0.2, 2.0), rng.uniform(0.2, 3), rng.uniform(0.2, 3)
        c = rng.uniform(-0.3, 0.3)
        w = pair(f"piecewise(abs(x) < {t!r}: {k1!r}; else: {k2!r})", f"exp({c!r} * abs2(x))")
        assert monotonicity_check(w, P, [0.3, 0.6, 1.2], resolution=96)["violations"] == 0


# -- radial transform ---------------------------------------------------------------------

def test_radial_transform_of_unit_weight():
    t = radial_transform(unit_pair([-2.0], [2.0]), 0.25)
    X = np.linspace(-2, 2, 7)[:, None]
    np.testing.assert_allclose(t.u.evaluate(X), np.exp(-0.75 * X[:, 0] ** 2), rtol=1e-15)


def test_radial_transform_inverse_is_exact():
    base = pair("piecewise(abs(x) < 1: 2; else: abs(x))", "1 + abs2(x)")
    back = radial_transform(radial_transform(base, 0.5), 0.5, inverse=True)
    assert back.u.text == base.u.text and back.v.text == base.v.text


# -- partition and families ---------------------------------------------------------------

def test_partition_first_point_is_golden_ratio():
    tab = partition_points(1.0, 2.0, 5)
    assert tab.x[0] == pytest.approx((1 + math.sqrt(5)) / 2, rel=1e-15)


def test_partition_residuals_and_monotonicity():
    tab = partition_points(1.0, 2.0, 1000)
    assert tab.residuals().max() <= 1e-12
    assert np.all(np.diff(tab.x[:100]) > 0)
    with pytest.raises(InvalidExponents):
        partition_points(2.0, 1.0, 3)


def test_example31_u_on_first_subintervals():
    fam = counterexample_family("example31", (1.0, 2.0), P, n_max=6)
    for n in range(1, 7):
        lo, hi = fam.info["cubes"][n]["Q1"]
        assert fam.u.evaluate(np.array([[0.5 * (lo + hi)]]))[0] == pytest.approx(n ** P.q)
        assert fam.u.evaluate(np.array([[-0.5 * (lo + hi)]]))[0] == pytest.approx(n ** P.q)


def test_default_growth_exponent():
    fam = counterexample_family("prop32", (1.0, 2.0), P, n_max=4)
    assert fam.info["k"] == pytest.approx(P.alpha + 1 / P.q - 1 / P.p + 1)


def test_example41_weight_value():
    for ad in (0.25, 0.5):
        Pe = ExponentParams(2, 2, ad, 1.0, 1)
        fam = counterexample_family("example41", (1.0, 2.0), Pe)
        assert fam.v.evaluate(np.array([[0.5]]))[0] == pytest.approx(0.5 * math.exp(-0.25 * ad), rel=1e-14)


def test_family_exponent_condition():
    with pytest.raises(InvalidExponents):
        counterexample_family("prop32", (1.0, 2.0), ExponentParams(1.5, 3, 0.0, 1.0, 1))


def test_designated_cubes_admissible_and_scan_starts_at_two():
    for kind in ("prop32", "sawyer41"):
        fam = counterexample_family(kind, (1.0, 2.0), P, n_max=8)
        scan = divergence_scan(fam, P)
        assert scan.n[0] == 2 and scan.admissible.all()


def test_testing_lower_bound_follows_growth_expression():
    fam = counterexample_family("sawyer41", (1.0, 2.0), P, n_max=20)
    scan = divergence_scan(fam, P, range(2, 21))
    k = fam.info["k"]
    env = np.array([n ** (2 * k) * (1 + n * 3.0) ** (-P.alpha - 1 / P.q + 1 / P.p) for n in scan.n])
    r = scan.designated / env
    assert r.min() > 0 and r.max() / r.min() < 10


# -- equivalence checks --------------------------------------------------------------------------

def test_a1_beta_endpoint_and_zero_u():
    Pa = ExponentParams(1, 2, 0.5, 1.0, 1)
    res = a1_equivalence_check(pair("0", "1"), Pa, resolution=64)
    assert res["beta"] == 0.0 and res["C2"] == 0.0


def test_a1_same_constant():
    Pa = ExponentParams(1, 1.5, 0.5, 1.0, 1)
    res = a1_equivalence_check(pair("1 + abs(x)", "exp(0.1 * abs2(x))"), Pa, resolution=256)
    assert 0 < res["C2"] <= res["C1"] * (1 + 0.05)


def test_average_testing_zero_and_bound(rng):
    w = pair("1 + abs(x)", "exp(0.1 * abs2(x)) + 1")
    g = w.grid(128)
    K = weight_constant(w, P, "scriptA", grid=g).value
    zero = GridFunction(w.lower, w.upper, 128)
    assert average_test_check(w, P, zero, Cube([0.0], 1.0)) == (0.0, 0.0)
    bat = TestBattery.generate(100, w.lower, w.upper, 128, seed=9)
    h = g.isotropic_spacing()
    for f in bat.functions:
        m = int(rng.integers(1, 20))
        s = int(rng.integers(0, 128 - m))
        Q = Cube([w.lower[0] + h * (s + 0.5 * m)], m * h)
        if Q.side > 1.0 / max(1.0, abs(Q.center[0])):
            continue
        lhs, rhs = average_test_check(w, P, f, Q)
        assert lhs <= K ** P.q * rhs * (1 + 1e-9)
