import json
import math

import numpy as np
import pytest

from gausslab import ConfigError, ExponentParams, GridFunction, maximal_field
from gausslab.checks import CHECKS, run_suite, validate_config
from gausslab.verify import (CheckResult, TestBattery, VerificationReport, drift, lambda_ladder,
                             level_index, levelset_decomposition, norm_ratio, weak_functional)
from gausslab.weights import unit_pair

P = ExponentParams(2, 2, 0.5, 1.0, 1)


def test_battery_is_reproducible_and_grid_independent():
    a = TestBattery.generate(6, [-2.0], [2.0], 64, seed=3)
    b = TestBattery.generate(6, [-2.0], [2.0], 64, seed=3)
    assert a.descriptors == b.descriptors
    for f, g in zip(a.functions, b.functions):
        np.testing.assert_array_equal(f.values, g.values)
    r = a.refined()
    assert r.resolution == (128,) and r.descriptors == a.descriptors
    assert TestBattery.generate(6, [-2.0], [2.0], 64, seed=4).descriptors != a.descriptors


def test_drift():
    assert drift(0.0, 0.0) == 0.0
    assert drift(1.0, 1.1) == pytest.approx(0.1)
    assert drift(1.0, math.inf) == math.inf


def test_report_round_trip():
    rep = VerificationReport()
    assert rep.passed
    rep.add(CheckResult("x", dict(n=3), [1.0, 2.5], 0.1, True, "pass"))
    rep.add(CheckResult("y", {}, [math.inf], 0.0, False, "fail", "detail"))
    assert not rep.passed
    back = VerificationReport.from_json(rep.to_json())
    assert back.to_json() == rep.to_json()
    assert json.loads(rep.to_json())["checks"][0]["check_name"] == "x"


def test_weak_functional_against_direct_level_sets():
    rng = np.random.default_rng(0)
    Tf = rng.random(50)
    u = rng.random(50)
    lams = lambda_ladder(Tf)
    direct = max(lam ** 2 * u[Tf > lam].sum() for lam in lams)
    assert weak_functional(Tf, u, 2.0, lams) == pytest.approx(direct, rel=1e-12)


def test_norm_ratios_homogeneous_and_chebyshev():
    pair = unit_pair([-4.0], [4.0])
    bat = TestBattery.generate(8, [-4.0], [4.0], 128, seed=1)
    r = norm_ratio("strong", "maximal", pair, P, bat)
    assert np.all(r.weak <= r.strong * (1 + 1e-12))
    scaled = TestBattery(bat.descriptors, bat.seed, bat.lower, bat.upper, bat.resolution)
    for dsc in scaled.descriptors:
        for key in ("height", "values"):
            if key in dsc:
                dsc[key] = (np.asarray(dsc[key]) * 7.0).tolist() if key == "values" else dsc[key] * 7.0
    r7 = norm_ratio("strong", "maximal", pair, P, scaled)
    np.testing.assert_allclose(r7.ratios, r.ratios, rtol=1e-12)
    w = norm_ratio("weak", "maximal", pair, P, bat)
    w7 = norm_ratio("weak", "maximal", pair, P, scaled)
    np.testing.assert_allclose(w7.ratios, w.ratios, rtol=1e-12)


def test_zero_battery_ratio_is_zero():
    bat = TestBattery([dict(kind="indicator", lo=[0.0], hi=[1.0], height=0.0)], 0, np.array([-2.0]),
                      np.array([2.0]), (64,))
    assert norm_ratio("weak", "maximal", unit_pair([-2.0], [2.0]), P, bat).max_ratio == 0.0


def test_unit_weak_ratio_stable_under_refinement():
    pair = unit_pair([-4.0], [4.0])
    bat = TestBattery.generate(10, [-4.0], [4.0], 128, seed=2)
    a = norm_ratio("weak", "maximal", pair, P, bat).max_ratio
    b = norm_ratio("weak", "maximal", pair, P, bat.refined()).max_ratio
    assert np.isfinite(b) and drift(a, b) < 0.2


def test_strong_needs_p_le_q():
    with pytest.raises(Exception):
        norm_ratio("strong", "maximal", unit_pair([-1.0], [1.0]), ExponentParams(3, 2, 0.5, 1.0, 1),
                   TestBattery.generate(1, [-1.0], [1.0], 16))


# -- decomposition ---------------------------------------------------------------------

def test_level_index_is_exact_at_powers_of_two():
    v = np.array([1.0, 1.5, 2.0, 0.25, 3.0])
    assert level_index(v).tolist() == [-1, 0, 0, -3, 1]


def test_constant_field_has_single_level():
    f = GridFunction([-2.0], [2.0], 64, np.ones(64))
    Pz = ExponentParams(2, 2, 0.0, 1.0, 1)
    dec = levelset_decomposition(maximal_field(f, Pz, form="radial"), f, Pz)
    assert len(dec.levels) == 1
    assert sum(dec.violations().values()) == 0
    top = max(dec.levels)
    assert top + 1 not in dec.levels


def test_decomposition_invariants_random():
    for s in range(4):
        bat = TestBattery.generate(3, [-4.0], [4.0], 128, seed=s, alpha_dot=P.alpha_dot)
        for f in bat.functions:
            dec = levelset_decomposition(maximal_field(f, P, form="radial"), f, P)
            assert sum(dec.violations().values()) == 0
            omega, pieces = dec.masses()
            assert abs(omega - pieces) <= 1e-10


# -- suite configuration -------------------------------------------------------------------

def test_empty_check_list_passes():
    rep = run_suite(dict(checks=[]))
    assert rep.passed and rep.checks == []


@pytest.mark.parametrize("cfg,path", [
    (dict(bogus=1), "bogus"),
    (dict(checks=["measure", "nope"]), "checks[1]"),
    (dict(tolerances=dict(nope=0.1)), "tolerances.nope"),
    (dict(tolerances=dict(measure=-1)), "tolerances.measure"),
    (dict(overrides=dict(measure=dict(bins=3))), "overrides.measure.bins"),
    (dict(seed="x"), "seed"),
])
def test_config_errors_name_the_field(cfg, path):
    with pytest.raises(ConfigError) as err:
        validate_config(cfg)
    assert err.value.path == path


def test_registry_covers_every_criterion():
    assert len(CHECKS) == 12


def test_zero_tolerance_on_noisy_check_fails():
    cfg = dict(checks=["welland"], tolerances=dict(welland=0.0),
               overrides=dict(welland=dict(functions=4, resolution=128)))
    assert run_suite(cfg).checks[0].verdict == "fail"


def test_reports_are_reproducible():
    cfg = dict(checks=["measure", "dyadic"], seed=5, overrides=dict(dyadic=dict(trials=200)))
    timings = {}
    a = run_suite(cfg, timings).to_json()
    assert run_suite(cfg).to_json() == a
    assert set(timings) == {"measure", "dyadic"}
