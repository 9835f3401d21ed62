"""Empirical harness: test batteries, norm ratios, divergence scans, decompositions, reports."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import (AdmissibleEnum, Cube, DyadicCube, containing_dyadic, dyadic_admissibility_parameter,
                       gauss_interval, is_admissible)
from .grid import GridFunction
from .operators import ExponentParams, MaximalField, fractional_integral_field, maximal_field
from .weights import KINDS, WeightPair, WeightSpec, parse_weight, weight_constant

# -- test batteries ----------------------------------------------------------------

DESCRIPTOR_KINDS = ("indicator", "steps", "bump", "field")


def _descriptor(rng, kind, lower, upper):
    d = lower.size
    span = upper - lower
    if kind == "indicator":
        a = lower + rng.random(d) * span
        w = rng.uniform(0.05, 0.5, d) * span
        return dict(kind=kind, lo=a.tolist(), hi=np.minimum(a + w, upper).tolist(),
                    height=float(rng.uniform(0.5, 2.0)))
    if kind == "steps":
        k = int(rng.integers(2, 9))
        return dict(kind=kind, bins=k, values=rng.random((k,) * d).ravel().tolist())
    if kind == "bump":
        return dict(kind=kind, center=(lower + rng.random(d) * span).tolist(),
                    width=float(rng.uniform(0.1, 1.0)), height=float(rng.uniform(0.5, 2.0)))
    k = 16
    return dict(kind=kind, bins=k, values=rng.exponential(1.0, (k,) * d).ravel().tolist())


def evaluate_descriptor(desc: dict, X, lower, upper) -> np.ndarray:
    """Evaluate a battery descriptor at the rows of X."""
    X = np.asarray(X, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = lower.size
    kind = desc["kind"]
    if kind == "indicator":
        inside = np.all((X >= desc["lo"]) & (X < desc["hi"]), axis=1)
        return desc["height"] * inside
    if kind == "bump":
        r2 = np.sum((X - np.asarray(desc["center"])) ** 2, axis=1)
        return desc["height"] * np.exp(-r2 / desc["width"] ** 2)
    k = desc["bins"]
    idx = np.clip(np.floor((X - lower) / (upper - lower) * k).astype(int), 0, k - 1)
    flat = np.ravel_multi_index(tuple(idx.T), (k,) * d)
    return np.asarray(desc["values"])[flat]


@dataclass
class TestBattery:
    """Nonnegative test functions described independently of the grid.

    Each entry is a small descriptor (indicator box, coarse step function,
    Gaussian bump, coarse random field) so the same battery can be sampled
    at any resolution; regeneration from ``seed`` is bit-identical.
    """

    __test__ = False  # not a pytest class

    descriptors: list
    seed: int
    lower: np.ndarray
    upper: np.ndarray
    resolution: tuple
    alpha_dot: float = 0.0

    @classmethod
    def generate(cls, count, lower, upper, resolution, seed=0, kinds=DESCRIPTOR_KINDS, alpha_dot=0.0):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        rng = np.random.default_rng(seed)
        descs = [_descriptor(rng, kinds[i % len(kinds)], lower, upper) for i in range(count)]
        res = tuple(resolution) if not np.isscalar(resolution) else (int(resolution),) * lower.size
        return cls(descs, seed, lower, upper, res, alpha_dot)

    def at_resolution(self, resolution) -> "TestBattery":
        res = tuple(resolution) if not np.isscalar(resolution) else (int(resolution),) * self.lower.size
        return TestBattery(self.descriptors, self.seed, self.lower, self.upper, res, self.alpha_dot)

    def refined(self, factor=2) -> "TestBattery":
        return self.at_resolution(tuple(factor * n for n in self.resolution))

    def template(self) -> GridFunction:
        return GridFunction(self.lower, self.upper, self.resolution, alpha_dot=self.alpha_dot)

    @property
    def functions(self) -> list[GridFunction]:
        g = self.template()
        X = g.midpoints()
        return [g.with_values(evaluate_descriptor(dsc, X, self.lower, self.upper).reshape(g.resolution))
                for dsc in self.descriptors]

    def __len__(self):
        return len(self.descriptors)


# -- reports ---------------------------------------------------------------------------

@dataclass
class CheckResult:
    check_name: str
    params: dict
    measured: list
    tolerance: float
    stable: bool
    verdict: str
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, result: CheckResult):
        self.checks.append(result)

    def to_dict(self) -> dict:
        return dict(checks=[asdict(c) for c in self.checks], environment=self.environment)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True)

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        raw = json.loads(text)
        return cls([CheckResult(**c) for c in raw.get("checks", [])], raw.get("environment", {}))


def drift(a: float, b: float) -> float:
    """Relative change from a to b; 0 when both vanish."""
    if a == b:
        return 0.0
    if a == 0:
        return math.inf
    return abs(b - a) / abs(a)


# -- norm ratios -----------------------------------------------------------------------

@dataclass
class NormRatio:
    max_ratio: float
    ratios: np.ndarray
    weak: np.ndarray     # sup_lambda lambda^q u({Tf > lambda}) per function
    strong: np.ndarray   # ||Tf||^q_{L^q(u)} per function
    norms: np.ndarray    # ||f||_{L^p(v)} per function


def lambda_ladder(values, ratio=2 ** 0.25, min_levels=32) -> np.ndarray:
    pos = values[values > 0]
    if pos.size == 0:
        return np.zeros(0)
    hi, lo = float(pos.max()), float(pos.min())
    n = max(min_levels, int(math.ceil((math.log(hi) - math.log(lo)) / math.log(ratio))) + 1)
    return hi * ratio ** -np.arange(1, n + 1)


def weak_functional(Tf, umass, q, lambdas) -> float:
    t = Tf.ravel()
    order = np.argsort(-t, kind="stable")
    ts = t[order]
    cum = np.concatenate([[0.0], np.cumsum(umass.ravel()[order])])
    # number of cells with Tf > lam
    cnt = np.searchsorted(-ts, -np.asarray(lambdas), side="left")
    vals = np.asarray(lambdas) ** q * cum[cnt]
    return float(vals.max()) if vals.size else 0.0


def _operator(op, params, enum, kernel_norm="maxnorm"):
    if op == "maximal":
        return lambda f: maximal_field(f, params, enum).values
    if op == "integral":
        return lambda f: fractional_integral_field(f, params, kernel_norm).values
    raise ValueError("op must be 'maximal' or 'integral'")


def norm_ratio(kind: str, op: str, pair: WeightPair, params: ExponentParams, battery: TestBattery,
               lambda_ratio: float = 2 ** 0.25, min_levels: int = 32,
               enum: AdmissibleEnum | None = None) -> NormRatio:
    """Largest weak- or strong-type ratio of an operator over a battery.

    weak: sup over lambda of lambda^q u({Tf > lambda}) / ||f||^q_{L^p(v)}
    strong: ||Tf||_{L^q(u)} / ||f||_{L^p(v)}
    with all integrals against the Gaussian measure; 0/0 counts as 0.
    """
    if kind not in ("weak", "strong"):
        raise ValueError("kind must be 'weak' or 'strong'")
    if kind == "strong":
        params.require_p_le_q()
    T = _operator(op, params, enum)
    g = battery.template()
    umass = np.asarray(pair.u.masses(g, "gauss"))
    vmass = np.asarray(pair.v.masses(g, "gauss"))
    p, q = params.p, params.q
    weak, strong, norms, ratios = [], [], [], []
    for f in battery.functions:
        Tf = T(f)
        with np.errstate(invalid="ignore"):
            nf = math.fsum(np.where(f.values > 0, f.values ** p * vmass, 0.0).ravel()) ** (1.0 / p)
        w = weak_functional(Tf, umass, q, lambda_ladder(Tf, lambda_ratio, min_levels))
        s = math.fsum((Tf ** q * umass).ravel())
        weak.append(w)
        strong.append(s)
        norms.append(nf)
        num = w if kind == "weak" else s ** (1.0 / q)
        den = nf ** q if kind == "weak" else nf
        ratios.append(0.0 if num == 0 else (num / den if den > 0 else math.inf))
    ratios = np.asarray(ratios)
    return NormRatio(float(ratios.max()) if ratios.size else 0.0, ratios, np.asarray(weak),
                     np.asarray(strong), np.asarray(norms))


# -- divergence scans ---------------------------------------------------------------

def interval_integral(w: WeightSpec, lo: float, hi: float, measure: str = "lebesgue",
                      alpha_dot: float = 0.0) -> float:
    """Integral of a 1-D weight over (lo, hi) with breakpoint-exact splitting."""
    g = GridFunction([lo], [hi], 1)
    return float(w.masses(g, measure, alpha_dot)[0])


@dataclass
class DivergenceScan:
    """Constant functional along a family's designated cubes.

    ``designated`` evaluates the expression used in the growth argument
    (sub-interval integrals as the argument prescribes); ``certified`` is a
    genuine lower bound of the constant at the large family parameter,
    obtained by evaluating the defining functional on the designated
    admissible cube. ``reference`` is the closed-form growth envelope.
    """

    kind: str
    n: np.ndarray
    designated: np.ndarray
    certified: np.ndarray
    reference: np.ndarray
    admissible: np.ndarray

    def values(self, which="certified") -> np.ndarray:
        return getattr(self, which)


def divergence_scan(pair: WeightPair, params: ExponentParams, n_range=None) -> DivergenceScan:
    """Evaluate the unbounded-constant sequence of a counterexample family."""
    info = pair.info
    kind = info.get("kind")
    if kind not in ("example31", "prop32", "sawyer41"):
        raise ValueError("divergence scans exist for example31, prop32 and sawyer41")
    a, b = info["a"], info["b"]
    cubes = info["cubes"]
    lo_n = 1 if kind == "example31" else 2
    ns = list(n_range) if n_range is not None else list(range(lo_n, max(cubes) + 1))
    if kind != "example31" and min(ns) < 2:
        raise ValueError("the interval pair n = 1 is excluded; scans start at n = 2")
    p, q, al, ad = params.p, params.q, params.alpha, params.alpha_dot
    pp = params.p_prime
    sigma = pair.sigma(p)
    w = (b - a) / 2
    des, cert, ref, adm = [], [], [], []
    for n in ns:
        Q, Q1, Q2 = cubes[n]["Q"], cubes[n]["Q1"], cubes[n]["Q2"]
        side = Q[1] - Q[0]
        cube = Cube(np.array([(Q[0] + Q[1]) / 2]), side)
        if kind == "example31":
            m, ad_m = "lebesgue", 0.0
            adm.append(side <= b * (1 + 1e-12))
            ref.append(n ** 2 * w ** (1 / q + 1 / pp) / b ** (1 - al))
        else:
            m, ad_m = "tilt", ad
            adm.append(is_admissible(cube, b))
            x_n = info["table"].x[n - 1]
            growth = n ** (2 * info["k"]) * x_n ** (-al - 1 / q + 1 / p)
            if kind == "prop32":
                ref.append(w ** (1 / q + 1 / pp) / b ** (1 - al) * growth)
            else:
                ref.append(w ** (al + 1 / q - 1 / p) * growth)
        if kind in ("example31", "prop32"):
            norm = side ** (al - 1)
            u1 = interval_integral(pair.u, *Q1, m, ad_m)
            s2 = interval_integral(sigma, *Q2, m, ad_m)
            uq = interval_integral(pair.u, *Q, m, ad_m)
            sq = interval_integral(sigma, *Q, m, ad_m)
            des.append(norm * u1 ** (1 / q) * s2 ** (1 / pp))
            cert.append(norm * uq ** (1 / q) * sq ** (1 / pp))
        else:
            l1 = Q1[1] - Q1[0]
            s1_tilt = interval_integral(sigma, *Q1, "tilt", ad)
            u1 = interval_integral(pair.u, *Q1, "gauss")
            s2 = interval_integral(sigma, *Q2, "gauss")
            des.append((l1 ** (al - 1) * s1_tilt) * u1 ** (1 / q) * s2 ** (-1 / p))
            # inner maximal at x in Q1 is at least the gamma-average over Q1 itself
            s1 = interval_integral(sigma, *Q1, "gauss")
            g1 = float(gauss_interval(*Q1))
            inner = g1 ** (ad - 1) * s1
            sq = interval_integral(sigma, *Q, "gauss")
            cert.append(inner * u1 ** (1 / q) * sq ** (-1 / p))
    return DivergenceScan(kind, np.asarray(ns), np.asarray(des), np.asarray(cert), np.asarray(ref),
                          np.asarray(adm, dtype=bool))


# -- monotonicity -------------------------------------------------------------------

def monotonicity_check(pair: WeightPair, params: ExponentParams, a_list, kinds=KINDS,
                       resolution=None, grid: GridFunction | None = None) -> dict:
    """Constants along increasing family parameters on nested enumerations.

    All families share one side ladder (topped at max(a_list)) and differ
    only in the admissibility filter, so family(a) is a subfamily of
    family(b) for a < b and the scanned maxima must not decrease.
    """
    a_list = [float(a) for a in a_list]
    if any(b <= a for a, b in zip(a_list, a_list[1:])):
        raise ValueError("a_list must be increasing")
    grid = grid or pair.grid(resolution or (256 if pair.dim == 1 else 48))
    h = grid.isotropic_spacing()
    enum = AdmissibleEnum.for_grid(h, max(a_list), max_scale=max(a_list))
    values, violations = {}, 0
    for kind in kinds:
        seq = [weight_constant(pair, params.replace(a=a), kind, enum, grid=grid).value for a in a_list]
        values[kind] = seq
        violations += sum(1 for x, y in zip(seq, seq[1:]) if y < x)
    return dict(a_list=a_list, values=values, violations=violations)


# -- level-set decomposition -------------------------------------------------------

@dataclass
class Decomposition:
    """Level sets of a maximal field with their dyadic covers.

    ``levels[k]`` holds the boolean cell mask of
    Omega_k = {2^k < Mf <= 2^(k+1)}, the selected disjoint dyadic cubes
    P_j^k (largest first) and an integer array ``owner`` giving, for every
    cell of Omega_k, the index j of the piece E_j^k it belongs to (-1 if no
    3P_j^k contains it).
    """

    grid: GridFunction
    levels: dict
    parameter: float

    def masses(self):
        gm = self.grid.cell_gauss_mass.ravel()
        omega = sum(math.fsum(gm[lv["omega"]]) for lv in self.levels.values())
        pieces = sum(math.fsum(gm[lv["omega"]][lv["owner"] >= 0]) for lv in self.levels.values())
        return omega, pieces

    def violations(self) -> dict:
        g = self.grid
        X = g.midpoints()
        bad = dict(omega_overlap=0, piece_overlap=0, coverage=0, admissibility=0, mass=0)
        seen = np.zeros(g.size, dtype=int)
        for k, lv in self.levels.items():
            seen[lv["omega"]] += 1
            cubes = [P.to_cube() for P in lv["cubes"]]
            for P in cubes:
                if not is_admissible(P, self.parameter):
                    bad["admissibility"] += 1
            for i, P in enumerate(cubes):
                for Pj in cubes[i + 1:]:
                    if P.intersects(Pj):
                        bad["piece_overlap"] += 1
            pts = X[lv["omega"]]
            inside = np.zeros(pts.shape[0], dtype=bool)
            for P in cubes:
                T = P.dilate(3.0)
                inside |= np.all((pts >= T.lower) & (pts < T.upper), axis=1)
            bad["coverage"] += int(np.sum(~inside))
            bad["coverage"] += int(np.sum(lv["owner"] < 0))
        bad["omega_overlap"] = int(np.sum(seen > 1))
        omega, pieces = self.masses()
        if abs(omega - pieces) > 1e-10:
            bad["mass"] = 1
        return bad


def level_index(values: np.ndarray) -> np.ndarray:
    """k with 2^k < v <= 2^(k+1) for v > 0 (exact, via frexp); a sentinel for v = 0."""
    mant, expo = np.frexp(values)
    k = np.where(mant > 0.5, expo - 1, expo - 2)
    return np.where(values > 0, k, np.iinfo(np.int64).min)


def levelset_decomposition(mf: MaximalField, f: GridFunction, params: ExponentParams) -> Decomposition:
    """Level sets of Mf, dyadic lifts of the witness cubes and the pieces E_j^k."""
    g = mf.field
    X = g.midpoints()
    vals = mf.values.ravel()
    ks = level_index(vals)
    fa = f if f.alpha_dot == params.alpha_dot else GridFunction(f.lower, f.upper, f.resolution, f.values,
                                                                params.alpha_dot)
    levels = {}
    lift_cache = {}
    for k in sorted(set(ks[vals > 0].tolist()), reverse=True):
        omega = ks == k
        cand = {}
        for i in np.nonzero(omega)[0]:
            key = (int(mf.witness_cells[i]), tuple(int(s) for s in mf.witness_start[i][: g.dim]))
            if key not in lift_cache:
                lift_cache[key] = containing_dyadic(mf.witness_cube(int(i)), fa, params.alpha, params.a)
            P, avg = lift_cache[key]
            if P not in cand:
                lo = P.to_cube()
                cand[P] = fa.integrate_box(lo.lower, lo.upper, params.alpha_dot)
        order = sorted(cand, key=lambda P: (-P.level, -cand[P], P.corner))
        chosen = []
        for P in order:
            if not any(_dyadic_overlap(P, R) for R in chosen):
                chosen.append(P)
        pts = X[omega]
        owner = np.full(pts.shape[0], -1, dtype=int)
        for j, P in enumerate(chosen):
            T = P.to_cube().dilate(3.0)
            hit = (owner < 0) & np.all((pts >= T.lower) & (pts < T.upper), axis=1)
            owner[hit] = j
        levels[int(k)] = dict(omega=omega, cubes=chosen, owner=owner)
    return Decomposition(g, levels, dyadic_admissibility_parameter(params.a, params.d))


def _dyadic_overlap(P: DyadicCube, R: DyadicCube) -> bool:
    return P.contains(R) or R.contains(P)
