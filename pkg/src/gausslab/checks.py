"""The verification checks run by :func:`gausslab.checks.run_suite`.

Every check is a function ``check(seed, tolerance, **params) -> CheckResult``
with desk-scale defaults in ``DEFAULTS``. ``run_suite`` validates a config
dict, runs the selected checks and collects a report.
"""

from __future__ import annotations

import math
import os
import time

import numpy as np
from scipy import integrate

from . import geometry as geo
from ._jit import backend_name
from .errors import ConfigError
from .geometry import AdmissibleEnum, Cube, containing_dyadic, cube_average, gaussian_measure
from .grid import GridFunction
from .operators import ExponentParams, brute_force_maximal, maximal_field, welland_check
from .verify import (CheckResult, TestBattery, VerificationReport, divergence_scan, drift,
                     levelset_decomposition, norm_ratio)
from .weights import (WeightPair, counterexample_family, parse_weight, partition_points, radial_transform,
                      sawyer_constant, unit_pair, weight_constant)


def _result(name, params, measured, tol, stable, ok, detail=""):
    return CheckResult(name, params, [float(m) for m in measured], float(tol), bool(stable),
                       "pass" if ok else "fail", detail)


# -- 1 ------------------------------------------------------------------------------

def _quad_gauss(lo, hi):
    val, _ = integrate.quad(lambda t: math.exp(-t * t) / math.sqrt(math.pi), lo, hi,
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def check_measure(seed=0, tolerance=1e-9, count=100):
    """Gaussian cube measures against per-axis adaptive quadrature."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        d = int(rng.integers(1, 4))
        Q = Cube(rng.normal(0.0, 1.5, d), float(rng.uniform(0.05, 3.0)))
        ref = math.prod(_quad_gauss(lo, hi) for lo, hi in zip(Q.lower, Q.upper))
        worst = max(worst, abs(gaussian_measure(Q) - ref) / ref)
    full = max(abs(gaussian_measure(Cube(np.zeros(d), 12.0)) - 1.0) for d in (1, 2, 3))
    return _result("measure", dict(count=count), [worst, full], tolerance, True,
                   worst <= tolerance and full <= 1e-12)


# -- 2 ------------------------------------------------------------------------------

def check_oracle_equivalence(seed=0, tolerance=1e-9, points=64, n1=512, n2=64):
    """Prefix-sum maximal field against direct enumeration at random points."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    setups = [(ExponentParams(2, 2, 0.5, 1.0, 1), [-4.0], [4.0], n1),
              (ExponentParams(2, 2, 1.0, 1.0, 2), [-3.0, -3.0], [3.0, 3.0], n2)]
    for P, lo, hi, n in setups:
        bat = TestBattery.generate(2, lo, hi, n, seed=int(rng.integers(1 << 31)), kinds=("field", "steps"),
                                   alpha_dot=P.alpha_dot)
        for f in bat.functions:
            h = f.isotropic_spacing()
            enum = AdmissibleEnum.for_grid(h, P.a)
            for form in ("gauss", "radial"):
                mf = maximal_field(f, P, enum, form=form).values
                X = f.midpoints()
                for i in rng.integers(0, f.size, points):
                    ref = brute_force_maximal(f, X[i], P, enum, form=form)
                    got = mf.ravel()[i]
                    worst = max(worst, abs(got - ref) / max(abs(ref), 1e-300))
    return _result("oracle_equivalence", dict(points=points, n1=n1, n2=n2), [worst], tolerance, True,
                   worst <= tolerance)


# -- 3 ------------------------------------------------------------------------------

def _random_admissible(rng, a, count):
    d = rng.integers(1, 4, count)
    out = []
    for k in range(count):
        dim = int(d[k])
        dirn = rng.normal(size=dim)
        dirn /= np.linalg.norm(dirn)
        c = dirn * float(np.exp(rng.uniform(np.log(0.01), np.log(20.0))))
        side = a * geo.m_value(c) * float(rng.uniform(1e-3, 1.0))
        out.append(Cube(c, side))
    return out


def _ratio_constant(cubes):
    r = np.array([gaussian_measure(Q) * math.exp(float(Q.center @ Q.center)) / Q.side ** Q.dim
                  for Q in cubes])
    return float(max(r.max(), 1.0 / r.min()))


def check_geometry(seed=0, tolerance=0.10, count=10_000, a_values=(0.5, 1.0, 2.0)):
    """Corner bound exp(|x|^2 - |y|^2) <= exp(2a(sqrt(d) a + 2)) and the mass-ratio constant."""
    rng = np.random.default_rng(seed)
    violations = 0
    measured = []
    stable = True
    for a in a_values:
        cubes = _random_admissible(rng, a, count)
        for Q in cubes:
            cn = Q.corners()
            sq = np.sum(cn * cn, axis=1)
            bound = 2 * a * (math.sqrt(Q.dim) * a + 2)
            if sq.max() - sq.min() > bound * (1 + 1e-12):
                violations += 1
        c1 = _ratio_constant(cubes)
        c2 = _ratio_constant(_random_admissible(rng, a, count))
        dr = drift(c1, c2)
        stable &= dr < tolerance
        measured += [c1, dr]
    return _result("geometry", dict(count=count, a_values=list(a_values)), [violations] + measured,
                   tolerance, stable, violations == 0 and stable)


# -- 4 ------------------------------------------------------------------------------

def _random_weight_text(rng):
    kind = int(rng.integers(0, 3))
    if kind == 0:
        c = float(rng.uniform(-0.5, 0.5))
        t = float(rng.uniform(0.2, 2.0))
        k1, k2 = rng.uniform(0.2, 3.0, 2)
        return f"exp({c!r} * abs2(x)) * piecewise(abs(x) < {t!r}: {float(k1)!r}; else: {float(k2)!r})"
    if kind == 1:
        e = float(rng.uniform(-1.0, 1.0))
        return f"pow(1 + abs2(x), {e!r})"
    s = float(rng.uniform(0.1, 2.0))
    return f"1 + {s!r} * abs(x)"


def check_radialization(seed=0, tolerance=0.10, pairs=20, resolution=256, box=3.0):
    """A-constant of (u, v) against the radial constant of the transformed pair."""
    rng = np.random.default_rng(seed)
    P = ExponentParams(2, 2, 0.5, 1.0, 1)
    ratios = {resolution: [], 2 * resolution: []}
    for _ in range(pairs):
        pair = WeightPair(parse_weight(_random_weight_text(rng)), parse_weight(_random_weight_text(rng)),
                          [-box], [box])
        rad = radial_transform(pair, P.alpha_dot)
        for n in ratios:
            A = weight_constant(pair, P, "A", grid=pair.grid(n)).value
            B = weight_constant(rad, P, "scriptA", grid=rad.grid(n)).value
            ratios[n].append(A / B)
    r1, r2 = (np.asarray(ratios[n]) for n in sorted(ratios))
    d_lo, d_hi = drift(r1.min(), r2.min()), drift(r1.max(), r2.max())
    stable = max(d_lo, d_hi) < tolerance
    return _result("radialization", dict(pairs=pairs, resolution=resolution),
                   [r1.min(), r1.max(), r2.min(), r2.max(), d_lo, d_hi], tolerance, stable, stable)


# -- 5 ------------------------------------------------------------------------------

def check_example31(seed=0, tolerance=1e-6, n_max=20, cells_per_unit=16, geom=(1.0, 2.0)):
    """Lebesgue two-weight constant: bounded at a, growing like n^2 at b."""
    a, b = geom
    P = ExponentParams(2, 2, 0.5, a, 1)
    fam = counterexample_family("example31", geom, P, n_max=n_max)
    R = float(fam.upper[0])
    grid = fam.grid(int(round(2 * R * cells_per_unit)))
    bound = a ** (1 / P.q - 1 / P.p + P.alpha)
    val = weight_constant(fam, P, "frakturA", grid=grid).value
    scan = divergence_scan(fam, P, range(2, n_max + 1))
    w = (b - a) / 2
    env = np.array([n ** 2 * w ** (1 / P.q + 1 / P.p_prime) / b ** (1 - P.alpha) for n in scan.n])
    vals = scan.certified
    grows = bool(np.all(vals >= 0.95 * env))
    ratio = vals[scan.n == 20][0] / vals[scan.n == 5][0] if n_max >= 20 else math.nan
    ok = val <= bound * (1 + tolerance) and grows and ratio > 10 and scan.admissible.all()
    return _result("example31", dict(n_max=n_max, a=a, b=b), [val, bound, ratio, float(vals.min() / env.min())],
                   tolerance, True, ok)


# -- 6 ------------------------------------------------------------------------------

def check_prop32(seed=0, tolerance=1e-9, n_max=20, resolution=8192, geom=(1.0, 2.0)):
    """Radial two-weight constant: bounded at a, growing at b along the partition."""
    a, b = geom
    P = ExponentParams(2, 2, 0.5, a, 1)
    resid = float(partition_points(a, b, 1000).residuals().max())
    fam = counterexample_family("prop32", geom, P, n_max=n_max)
    bound = a ** (1 / P.q - 1 / P.p + P.alpha)
    val = weight_constant(fam, P, "scriptA", grid=fam.grid(resolution)).value
    scan = divergence_scan(fam, P, range(2, n_max + 1))
    vals = scan.certified
    mono = bool(np.all(np.diff(vals) > 0))
    ratio = float(vals[-1] / vals[0])
    ok = resid <= 1e-12 and val <= bound * (1 + tolerance) and mono and ratio > 10 and scan.admissible.all()
    return _result("prop32", dict(n_max=n_max, resolution=resolution), [resid, val, bound, ratio], tolerance,
                   True, ok)


# -- 7 ------------------------------------------------------------------------------

def check_dyadic(seed=0, tolerance=1e-12, trials=10_000, cells=6):
    """Dyadic lifting: Q inside 3P, P admissible at 2a + 3 sqrt(d) a^2, average factor 2^(alpha-2d)."""
    rng = np.random.default_rng(seed)
    bad = dict(containment=0, admissibility=0, average=0)
    for t in range(trials):
        d = 1 + t % 2
        alpha = 0.0 if (t // 2) % 2 == 0 else 0.5 * d
        a = float(rng.choice([0.5, 1.0, 2.0]))
        Q = _random_admissible_d(rng, a, d)
        lo, hi = Q.lower - 2.5 * Q.side, Q.upper + 2.5 * Q.side
        vals = rng.random((cells,) * d) * (rng.random((cells,) * d) < 0.7)
        g = GridFunction(lo, hi, cells, vals, alpha / d)
        Pd, avgP = containing_dyadic(Q, g, alpha, a)
        Pc = Pd.to_cube()
        if not Pc.dilate(3.0).contains_cube(Q, tol=1e-12 * max(1.0, Pc.side)):
            bad["containment"] += 1
        if not geo.is_admissible(Pc, geo.dyadic_admissibility_parameter(a, d)):
            bad["admissibility"] += 1
        avgQ = cube_average(Q, g, alpha)
        if avgQ > 0 and not avgP >= 2.0 ** (alpha - 2 * d) * avgQ * (1 - tolerance):
            bad["average"] += 1
    total = sum(bad.values())
    return _result("dyadic", dict(trials=trials), [bad["containment"], bad["admissibility"], bad["average"]],
                   tolerance, True, total == 0)


def _random_admissible_d(rng, a, d):
    dirn = rng.normal(size=d)
    dirn /= np.linalg.norm(dirn)
    c = dirn * float(np.exp(rng.uniform(np.log(0.01), np.log(10.0))))
    return Cube(c, a * geo.m_value(c) * float(rng.uniform(1e-3, 1.0)))


# -- 8 ------------------------------------------------------------------------------

def check_welland(seed=0, tolerance=0.20, functions=100, resolution=256, box=4.0):
    """Fractional integral against the geometric mean of two maximal functions."""
    P = ExponentParams(2, 2, 0.5, 1.0, 1)
    eps, bt = 0.25, 1.5
    bat = TestBattery.generate(functions, [-box], [box], resolution, seed=seed)
    maxima = []
    scale_err = 0.0
    for b_ in (bat, bat.refined()):
        worst = 0.0
        for i, f in enumerate(b_.functions):
            _, _, r = welland_check(f, P, eps, bt)
            worst = max(worst, r)
            if b_ is bat and i < 10:
                _, _, r10 = welland_check(f.with_values(10.0 * f.values), P, eps, bt)
                scale_err = max(scale_err, abs(r10 - r) / max(r, 1e-300))
        maxima.append(worst)
    dr = drift(*maxima)
    stable = dr < tolerance and all(math.isfinite(m) for m in maxima)
    ok = stable and scale_err <= 1e-12
    return _result("welland", dict(functions=functions, resolution=resolution), maxima + [dr, scale_err],
                   tolerance, stable, ok)


# -- 9 / 10 --------------------------------------------------------------------------

def _ratio_pair(kind, op, pair, P, bat):
    r1 = norm_ratio(kind, op, pair, P, bat)
    r2 = norm_ratio(kind, op, pair, P, bat.refined())
    return r1, r2


def check_weak_type(seed=0, tolerance=0.20, functions=50, resolution=256, n_max=4, geom=(1.0, 2.0)):
    """Weak-type ratios of the maximal operator for (1, 1) and for transformed partition weights."""
    measured, stable = [], True
    P = ExponentParams(2, 2, 0.5, 1.0, 1)
    ones = unit_pair([-4.0], [4.0])
    bat = TestBattery.generate(functions, [-4.0], [4.0], resolution, seed=seed)
    r1, r2 = _ratio_pair("weak", "maximal", ones, P, bat)
    dr = drift(r1.max_ratio, r2.max_ratio)
    stable &= dr < tolerance and math.isfinite(r2.max_ratio)
    measured += [r1.max_ratio, r2.max_ratio, dr]
    # geometric parameter a_geom; the operator uses a smaller family parameter
    a_geom = geom[0]
    Pf = ExponentParams(2, 2, 0.5, a_geom / 2, 1)
    fam = counterexample_family("prop32", geom, Pf, n_max=n_max)
    pairA = radial_transform(fam, Pf.alpha_dot, inverse=True)
    R = float(fam.upper[0])
    batf = TestBattery.generate(functions, [-R], [R], 2 * resolution, seed=seed + 1)
    f1, f2 = _ratio_pair("weak", "maximal", pairA, Pf, batf)
    dr2 = drift(f1.max_ratio, f2.max_ratio)
    stable &= dr2 < tolerance and math.isfinite(f2.max_ratio)
    measured += [f1.max_ratio, f2.max_ratio, dr2]
    return _result("weak_type", dict(functions=functions, resolution=resolution, n_max=n_max), measured,
                   tolerance, stable, stable)


def check_strong_type(seed=0, tolerance=0.20, functions=50, resolution=1024, n_max=4, geom=(1.0, 2.0)):
    """Strong-type ratios for testing-condition weights, plus weak <= strong per function."""
    a_geom = geom[0]
    # 6a + 9 sqrt(d) a^2 must stay within the parameter where the weights test finitely
    a_op = 0.125 * a_geom
    P = ExponentParams(2, 2, 0.5, a_op, 1)
    fam = counterexample_family("sawyer41", geom, P, n_max=n_max)
    R = float(fam.upper[0])
    bat = TestBattery.generate(functions, [-R], [R], resolution, seed=seed)
    s1, s2 = _ratio_pair("strong", "maximal", fam, P, bat)
    dr = drift(s1.max_ratio, s2.max_ratio)
    cheb = 0
    for r in (s1, s2):
        cheb += int(np.sum(r.weak > r.strong * (1 + 1e-12)))
    stable = dr < tolerance and math.isfinite(s2.max_ratio)
    return _result("strong_type", dict(functions=functions, resolution=resolution, a=a_op,
                                       testing_parameter=6 * a_op + 9 * a_op ** 2),
                   [s1.max_ratio, s2.max_ratio, dr, cheb], tolerance, stable, stable and cheb == 0)


# -- 11 ----------------------------------------------------------------------------

def check_decomposition(seed=0, tolerance=0.0, batteries=20, functions=3, resolution=256):
    """Level-set decomposition invariants over several batteries."""
    P = ExponentParams(2, 2, 0.5, 1.0, 1)
    total = {}
    for s in range(batteries):
        bat = TestBattery.generate(functions, [-4.0], [4.0], resolution, seed=seed + s,
                                   alpha_dot=P.alpha_dot)
        for f in bat.functions:
            mf = maximal_field(f, P, form="radial")
            dec = levelset_decomposition(mf, f, P)
            for k, v in dec.violations().items():
                total[k] = total.get(k, 0) + v
    n_bad = sum(total.values())
    return _result("decomposition", dict(batteries=batteries, functions=functions), [n_bad], tolerance, True,
                   n_bad <= tolerance, detail=str(total))


# -- 12 ----------------------------------------------------------------------------

def check_sawyer_counterexample(seed=0, tolerance=0.20, n_max=20, resolution=2048, bound_n_max=4,
                                geom=(1.0, 2.0)):
    """Testing-constant growth along the designated cubes and the bound at a.

    The growth verdict uses ``certified`` values (the defining functional on
    the admissible cube Q_n); the expression from the growth argument is
    reported alongside.
    """
    a, b = geom
    P = ExponentParams(2, 2, 0.5, a, 1)
    fam = counterexample_family("sawyer41", geom, P, n_max=n_max)
    scan = divergence_scan(fam, P, range(2, n_max + 1))
    growth = float(scan.certified[-1] / scan.certified[0])
    designated = float(scan.designated[-1] / scan.designated[0])
    small = counterexample_family("sawyer41", geom, P, n_max=bound_n_max)
    env = a ** (P.alpha + 1 / P.q - 1 / P.p)
    c1 = sawyer_constant(small, P, grid=small.grid(resolution)).value / env
    c2 = sawyer_constant(small, P, grid=small.grid(2 * resolution)).value / env
    dr = drift(c1, c2)
    stable = dr < tolerance
    ok = growth > 10 and stable and scan.admissible.all()
    return _result("sawyer_counterexample", dict(n_max=n_max, resolution=resolution),
                   [growth, designated, c1, c2, dr], tolerance, stable, ok)


CHECKS = {
    "measure": check_measure,
    "oracle_equivalence": check_oracle_equivalence,
    "geometry": check_geometry,
    "radialization": check_radialization,
    "example31": check_example31,
    "prop32": check_prop32,
    "dyadic": check_dyadic,
    "welland": check_welland,
    "weak_type": check_weak_type,
    "strong_type": check_strong_type,
    "decomposition": check_decomposition,
    "sawyer_counterexample": check_sawyer_counterexample,
}

_CONFIG_KEYS = {"checks", "seed", "tolerances", "overrides"}


def _param_names(fn):
    code = fn.__code__
    return set(code.co_varnames[: code.co_argcount]) - {"seed", "tolerance"}


def validate_config(config: dict) -> dict:
    """Normalize a suite config; raises ConfigError naming the offending field."""
    if not isinstance(config, dict):
        raise ConfigError("$", "config must be an object")
    for key in config:
        if key not in _CONFIG_KEYS:
            raise ConfigError(key, "unknown key")
    checks = config.get("checks", list(CHECKS))
    if checks == "all":
        checks = list(CHECKS)
    if not isinstance(checks, list):
        raise ConfigError("checks", "must be a list of check names or 'all'")
    for i, name in enumerate(checks):
        if name not in CHECKS:
            raise ConfigError(f"checks[{i}]", f"unknown check {name!r}")
    seed = config.get("seed", int(os.environ.get("GAUSSLAB_SEED", "0")))
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed", "must be an integer")
    tols = config.get("tolerances", {})
    for name, tol in tols.items():
        if name not in CHECKS:
            raise ConfigError(f"tolerances.{name}", "unknown check")
        if not isinstance(tol, (int, float)) or tol < 0:
            raise ConfigError(f"tolerances.{name}", "must be a nonnegative number")
    overrides = config.get("overrides", {})
    for name, kw in overrides.items():
        if name not in CHECKS:
            raise ConfigError(f"overrides.{name}", "unknown check")
        for k in kw:
            if k not in _param_names(CHECKS[name]):
                raise ConfigError(f"overrides.{name}.{k}", "unknown parameter")
    return dict(checks=checks, seed=seed, tolerances=tols, overrides=overrides)


def run_suite(config: dict | None = None, timings: dict | None = None) -> VerificationReport:
    """Run the configured checks and collect their verdicts.

    Wall-clock seconds per check go to ``timings`` when given; they are kept
    out of the report so that reruns serialize identically.
    """
    cfg = validate_config(config or {})
    report = VerificationReport(environment=dict(seed=cfg["seed"], backend=backend_name()))
    for name in cfg["checks"]:
        kw = dict(cfg["overrides"].get(name, {}))
        if name in cfg["tolerances"]:
            kw["tolerance"] = cfg["tolerances"][name]
        t0 = time.perf_counter()
        report.add(CHECKS[name](seed=cfg["seed"], **kw))
        if timings is not None:
            timings[name] = time.perf_counter() - t0
    return report
