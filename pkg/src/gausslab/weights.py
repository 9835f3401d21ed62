"""Weights, two-weight constants, the radial transform and counterexample families."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import integrate

from . import expr as E
from . import kernels
from .errors import DegenerateWeight, InvalidExponents
from .geometry import ADMISSIBLE_RTOL, AdmissibleEnum, Cube, interval_mass
from .grid import GridFunction
from .operators import ExponentParams, _cached_prefix, grid_ladder, maximal_field

KINDS = ("A", "scriptA", "frakturA")
FAMILIES = ("example31", "prop32", "sawyer41", "example41")

_GL_T, _GL_W = np.polynomial.legendre.leggauss(8)
_SQRT_PI = math.sqrt(math.pi)
# (kappa, per-axis scale) so that a measure is scale * exp(-kappa |y|^2) dy
_MEASURE = {"gauss": (1.0, 1.0 / _SQRT_PI), "lebesgue": (0.0, 1.0)}


def _measure_coeffs(measure, alpha_dot):
    if measure == "tilt":
        return float(alpha_dot), 1.0
    try:
        return _MEASURE[measure]
    except KeyError:
        raise ValueError(f"unknown measure {measure!r}") from None


# -- weight specifications ---------------------------------------------------------

@dataclass(eq=False)
class WeightSpec:
    """A weight given by an expression tree or by grid samples.

    With ``even=True`` the expression is evaluated at the coordinatewise
    absolute value of the point.
    """

    expr: E.Node | None = None
    grid: GridFunction | None = None
    even: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if (self.expr is None) == (self.grid is None):
            raise ValueError("a weight needs exactly one of expr or grid")

    @property
    def text(self) -> str | None:
        return None if self.expr is None else E.to_text(self.expr)

    def evaluate(self, X) -> np.ndarray:
        if self.expr is None:
            raise ValueError("grid weights can only be sampled on their own grid")
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        return E.evaluate(self.expr, np.abs(X) if self.even else X)

    def _map(self, fn_expr, fn_vals) -> "WeightSpec":
        if self.expr is not None:
            return WeightSpec(fn_expr(self.expr), even=self.even)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            vals = fn_vals(self.grid.values, self.grid.midpoints())
        return WeightSpec(grid=_raw_grid(self.grid, vals))

    def scaled(self, s: float) -> "WeightSpec":
        return self._map(lambda e: E.BinOp("*", E.Num(float(s)), e), lambda v, X: s * v)

    def power(self, e: float) -> "WeightSpec":
        return self._map(lambda n: E.Pow(n, E.Num(float(e))), lambda v, X: np.power(v, e))

    def times_gaussian(self, c: float) -> "WeightSpec":
        """Multiply by exp(c |x|^2)."""
        def fe(n):
            return E.BinOp("*", n, E.Exp(E.BinOp("*", E.Num(float(c)), E.Norm2())))
        return self._map(fe, lambda v, X: v * np.exp(c * np.sum(X * X, axis=1)).reshape(v.shape))

    def sample(self, grid: GridFunction) -> np.ndarray:
        """Values at the cell midpoints of grid."""
        if self.grid is not None:
            _check_same_grid(self.grid, grid)
            return self.grid.values
        return self.evaluate(grid.midpoints()).reshape(grid.resolution)

    def masses(self, grid: GridFunction, measure: str = "gauss", alpha_dot: float = 0.0) -> np.ndarray:
        """Integral of the weight over every cell of grid; may contain inf."""
        key = (tuple(grid.lower), tuple(grid.upper), grid.resolution, measure,
               float(alpha_dot) if measure == "tilt" else None)
        if key not in self._cache:
            self._cache[key] = self._masses(grid, measure, alpha_dot)
        return self._cache[key]

    def _masses(self, grid, measure, alpha_dot):
        if self.grid is not None:
            _check_same_grid(self.grid, grid)
            with np.errstate(invalid="ignore"):
                return self.grid.values * grid.cell_mass(measure, alpha_dot)
        kappa, scale = _measure_coeffs(measure, alpha_dot)
        g, c = E.gaussian_split(self.expr)
        lam = c - kappa
        if grid.dim == 1:
            bps = E.breakpoints(g) + [0.0]
            if self.even:
                bps += [-t for t in bps]
            out = _masses_1d(g, self.even, lam, grid.edges(0), bps)
            return scale * out
        axes = [scale * np.asarray(interval_mass(grid.edges(i)[:-1], grid.edges(i)[1:], -lam))
                for i in range(grid.dim)]
        vals = self._eval_g(g, grid.midpoints()).reshape(grid.resolution)
        with np.errstate(invalid="ignore", over="ignore"):
            return vals * np.asarray(_outer(axes))

    def _eval_g(self, g, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        return E.evaluate(g, np.abs(X) if self.even else X)


def _outer(vectors):
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def _raw_grid(template: GridFunction, values) -> GridFunction:
    # weights may be infinite or zero where samples are taken; skip validation
    g = GridFunction(template.lower, template.upper, template.resolution, alpha_dot=template.alpha_dot)
    g.values = np.asarray(values, dtype=float).reshape(template.resolution)
    g._masses = template._masses
    return g


def _check_same_grid(a: GridFunction, b: GridFunction):
    if a.resolution != b.resolution or not (np.allclose(a.lower, b.lower) and np.allclose(a.upper, b.upper)):
        raise ValueError("grid weight used on a different grid")


def _singular_exponent(fn, z, toward):
    """Power-law exponent of fn approaching z from the side ``toward`` (+1/-1)."""
    d1, d2 = 1e-6, 1e-9
    g1 = fn(np.array([z + toward * d1]))[0]
    g2 = fn(np.array([z + toward * d2]))[0]
    if not (np.isfinite(g1) and np.isfinite(g2)) or g1 <= 0 or g2 <= 0:
        return -math.inf
    return math.log(g2 / g1) / math.log(d2 / d1)


def _masses_1d(g, even, lam, edges, bps):
    lo, hi = edges[0], edges[-1]
    inner = [t for t in bps if lo < t < hi]
    pts = np.unique(np.concatenate([edges, np.asarray(inner, dtype=float)]))
    left, right = pts[:-1], pts[1:]

    def fn(y):
        y = np.asarray(y, dtype=float)
        return E.evaluate(g, np.abs(y)[:, None] if even else y[:, None])

    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    y = mid[:, None] + half[:, None] * _GL_T[None, :]
    ex = lam * y * y
    ex -= ex.max(axis=1, keepdims=True)
    wts = _GL_W[None, :] * np.exp(ex)
    gv = fn(y.ravel()).reshape(y.shape)
    with np.errstate(invalid="ignore", over="ignore"):
        ratio = np.sum(wts * gv, axis=1) / np.sum(wts, axis=1)
        base = np.asarray(interval_mass(left, right, -lam), dtype=float)
        sub = base * ratio
    if np.any(gv < 0):
        raise ValueError("weights must be nonnegative")
    # endpoint singularities: exact powers below -1 are not integrable
    gl, gr = fn(left), fn(right)
    bad = ~(np.isfinite(gl) & np.isfinite(gr) & np.isfinite(sub))
    for i in np.nonzero(bad)[0]:
        l, r = left[i], right[i]
        expo = min(_singular_exponent(fn, l, +1) if not np.isfinite(gl[i]) else 0.0,
                   _singular_exponent(fn, r, -1) if not np.isfinite(gr[i]) else 0.0)
        if expo <= -1.0 + 1e-3:
            sub[i] = math.inf
            continue
        shift = lam * max(l * l, r * r) if lam > 0 else 0.0
        val, _ = integrate.quad(lambda t: fn(np.array([t]))[0] * math.exp(lam * t * t - shift), l, r,
                                limit=200)
        sub[i] = val * math.exp(shift)
    cell = np.clip(np.searchsorted(edges, mid, side="right") - 1, 0, edges.size - 2)
    return np.bincount(cell, weights=sub, minlength=edges.size - 1)


def parse_weight(text: str, even: bool = False) -> WeightSpec:
    """Parse a weight expression (see :mod:`gausslab.expr` for the grammar)."""
    return WeightSpec(E.parse(text), even=even)


@dataclass(eq=False)
class WeightPair:
    """Weights u and v on a shared working box."""

    u: WeightSpec
    v: WeightSpec
    lower: np.ndarray
    upper: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))

    @property
    def dim(self) -> int:
        return self.lower.size

    def grid(self, resolution, alpha_dot: float = 0.0) -> GridFunction:
        return GridFunction(self.lower, self.upper, resolution, alpha_dot=alpha_dot)

    def sigma(self, p: float) -> WeightSpec:
        """The dual weight v^(1 - p')."""
        if p <= 1:
            raise InvalidExponents("the dual weight needs p > 1")
        return self.v.power(1.0 - p / (p - 1.0))

    def with_weights(self, u, v) -> "WeightPair":
        return WeightPair(u, v, self.lower, self.upper, dict(self.info))


def _sigma_masses(pair, params, grid, measure, alpha_dot=0.0):
    m = pair.sigma(params.p).masses(grid, measure, alpha_dot)
    if not np.all(np.isfinite(m)):
        i = int(np.argmax(~np.isfinite(m).ravel()))
        x = grid.midpoints()[i]
        raise DegenerateWeight(f"v^(1-p') is not integrable on the cell around {x.tolist()}")
    return m


# -- constants ---------------------------------------------------------------------

@dataclass
class ConstantResult:
    """Maximum of a constant's defining expression over a finite cube family."""

    value: float
    cubes_scanned: int
    argmax: Cube | None
    kind: str
    family: float

    def __float__(self):
        return float(self.value)


def _default_grid(pair, resolution):
    if resolution is None:
        resolution = 256 if pair.dim == 1 else 48
    return pair.grid(resolution)


def family_cubes(grid: GridFunction, a: float, enum: AdmissibleEnum | None = None,
                 centered_decay: bool = True):
    """Grid-aligned cubes of the family with parameter a.

    Returns (starts, cells) with starts an (K, d) index array; side lengths
    are ``cells * h``. With ``centered_decay=False`` the family is all cubes
    of side at most a.
    """
    h = grid.isotropic_spacing()
    enum = enum or AdmissibleEnum.for_grid(h, a)
    ms = grid_ladder(h, a, enum)
    d = grid.dim
    starts, cells = [], []
    for m in ms:
        if m > min(grid.resolution):
            continue
        step = 1 << max(0, int(math.floor(math.log2(max(1.0, enum.center_pitch * m)) + 1e-12)))
        axes = [np.arange(0, n - m + 1, step) for n in grid.resolution]
        st = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        if centered_decay:
            c = grid.lower + h * (st + 0.5 * m)
            r = np.sqrt(np.sum(c * c, axis=1))
            mval = np.where(r <= 1.0, 1.0, 1.0 / np.maximum(r, 1.0))
            ok = m * h <= a * mval * (1.0 + ADMISSIBLE_RTOL)
        else:
            ok = np.full(st.shape[0], m * h <= a * (1.0 + ADMISSIBLE_RTOL))
        starts.append(st[ok])
        cells.append(np.full(int(ok.sum()), m, dtype=np.int64))
    if not starts:
        return np.zeros((0, d), dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(starts), np.concatenate(cells)


def _pad_starts(starts):
    out = np.zeros((starts.shape[0], 3), dtype=np.int64)
    out[:, : starts.shape[1]] = starts
    return out


def _box_sums(masses, starts, cells, d):
    tab = kernels.prefix_table(masses)
    s = _pad_starts(starts)
    mvec = np.zeros((cells.size, 3), dtype=np.int64) + 1
    mvec[:, :d] = cells[:, None]
    return kernels.box_sum_np(*tab, s, s + mvec)


def _window_max(arr, starts, cells):
    """Maximum of arr over each cube (start, cells)."""
    out = np.empty(cells.size)
    for m in np.unique(cells):
        w = arr
        for ax in range(arr.ndim):
            w = sliding_window_view(w, m, axis=ax).max(axis=-1)
        sel = cells == m
        out[sel] = w[tuple(starts[sel].T)]
    return out


def weight_constant(pair: WeightPair, params: ExponentParams, kind: str = "A",
                    enum: AdmissibleEnum | None = None, resolution=None,
                    grid: GridFunction | None = None) -> ConstantResult:
    """Certified lower bound of a two-weight constant.

    ``kind="A"`` uses Gaussian averages with the factor
    gamma(Q)^(alpha/d + 1/q - 1/p); ``"scriptA"`` uses exp(-alpha/d |y|^2) dy
    integrals with side^(alpha - d); ``"frakturA"`` uses Lebesgue integrals
    over all cubes of side at most a. For p = 1 the dual-weight factor is the
    largest sampled value of 1/v over the cube.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    grid = grid or _default_grid(pair, resolution)
    d = grid.dim
    h = grid.isotropic_spacing()
    starts, cells = family_cubes(grid, params.a, enum, centered_decay=kind != "frakturA")
    if cells.size == 0:
        return ConstantResult(0.0, 0, None, kind, params.a)
    measure = {"A": "gauss", "scriptA": "tilt", "frakturA": "lebesgue"}[kind]
    ad = params.alpha_dot
    umass = pair.u.masses(grid, measure, ad)
    U = np.maximum(_box_sums(umass, starts, cells, d), 0.0)
    if params.p > 1:
        S = np.maximum(_box_sums(_sigma_masses(pair, params, grid, measure, ad), starts, cells, d), 0.0)
        vfac = S ** (1.0 / params.p_prime)
    else:
        with np.errstate(divide="ignore"):
            vinv = 1.0 / pair.v.sample(grid)
        vfac = _window_max(vinv, starts, cells)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind == "A":
            G = _box_sums(grid.cell_gauss_mass, starts, cells, d)
            norm = np.where(G > 0, G, np.nan) ** (params.alpha_dot - 1.0)
        else:
            norm = (cells * h) ** (params.alpha - d)
        val = norm * U ** (1.0 / params.q) * vfac
        val = np.where(U > 0, val, 0.0)
    val = np.where(np.isnan(val), -np.inf, val)
    i = int(np.argmax(val))
    best = float(max(val[i], 0.0))
    Q = Cube(grid.lower + h * (starts[i] + 0.5 * cells[i]), cells[i] * h)
    return ConstantResult(best, int(cells.size), Q, kind, params.a)


def sawyer_constant(pair: WeightPair, params: ExponentParams, test_enum: AdmissibleEnum | None = None,
                    inner_enum: AdmissibleEnum | None = None, resolution=None,
                    grid: GridFunction | None = None, test_cubes=None) -> ConstantResult:
    """Certified lower bound of the local testing constant.

    Over test cubes Q of the family: [int_Q M(sigma chi_Q)^q u dgamma]^(1/q) *
    (int_Q sigma dgamma)^(-1/p), with M the Gaussian-average fractional
    maximal operator of parameter a and sigma = v^(1 - p'). ``test_cubes``
    may pass explicit (starts, cells) arrays instead of the family scan.
    """
    params.require_p_le_q()
    if params.p <= 1:
        raise InvalidExponents("the testing constant needs p > 1")
    grid = grid or _default_grid(pair, resolution)
    d = grid.dim
    h = grid.isotropic_spacing()
    if test_cubes is None:
        starts, cells = family_cubes(grid, params.a, test_enum)
    else:
        starts, cells = (np.asarray(t, dtype=np.int64) for t in test_cubes)
        starts = starts.reshape(-1, d)
    smass = _sigma_masses(pair, params, grid, "gauss")
    S = _box_sums(smass, starts, cells, d)
    keep = S > 0
    starts, cells, S = starts[keep], cells[keep], S[keep]
    if cells.size == 0:
        return ConstantResult(0.0, 0, None, "sawyer", params.a)
    inner_enum = inner_enum or AdmissibleEnum.for_grid(h, params.a)
    ms = grid_ladder(h, params.a, inner_enum)
    umass = kernels.pad3(pair.u.masses(grid, "gauss"))
    tests = np.concatenate([_pad_starts(starts), cells[:, None]], axis=1)
    shape3 = list(grid.resolution) + [1] * (3 - d)
    brackets = kernels.sawyer_scan(kernels.prefix_table(smass), _cached_prefix(grid, "gauss"),
                                   params.alpha_dot - 1.0, shape3, d, kernels.pad_vec(grid.lower), h,
                                   params.a, ms, inner_enum.center_pitch, tests, umass, params.q)
    val = np.maximum(brackets, 0.0) ** (1.0 / params.q) * S ** (-1.0 / params.p)
    i = int(np.argmax(val))
    Q = Cube(grid.lower + h * (starts[i] + 0.5 * cells[i]), cells[i] * h)
    return ConstantResult(float(val[i]), int(cells.size), Q, "sawyer", params.a)


# -- radial transform -------------------------------------------------------------

def _unwrap_gauss(node, c):
    # undo a previous times_gaussian(c) structurally so inverse is exact
    if (isinstance(node, E.BinOp) and node.op == "*" and isinstance(node.right, E.Exp)
            and node.right.arg == E.BinOp("*", E.Num(float(c)), E.Norm2())):
        return node.left
    return None


def radial_transform(pair: WeightPair, alpha_dot: float, inverse: bool = False) -> WeightPair:
    """Multiply both weights by exp(-(1 - alpha_dot) |x|^2), or divide when inverse."""
    c = -(1.0 - alpha_dot)
    out = []
    for w in (pair.u, pair.v):
        if inverse:
            inner = _unwrap_gauss(w.expr, c) if w.expr is not None else None
            out.append(WeightSpec(inner, even=w.even) if inner is not None else w.times_gaussian(-c))
        else:
            out.append(w.times_gaussian(c))
    return pair.with_weights(*out)


# -- partitions and counterexample families ---------------------------------------

@dataclass
class PartitionTable:
    """Centers x_n and lengths of the admissible partition, rows n = 1..n_max."""

    a: float
    b: float
    x: np.ndarray
    a_n: np.ndarray
    b_n: np.ndarray
    L: np.ndarray

    @property
    def n_max(self) -> int:
        return self.x.size

    def residuals(self) -> np.ndarray:
        return np.abs(self.x - self.b / (2 * self.x) - self.L)

    def rows(self):
        for i in range(self.n_max):
            yield i + 1, self.x[i], self.a_n[i], self.b_n[i], self.L[i]

    def end(self) -> float:
        """Right end L_{n_max + 1} of the last interval pair."""
        return float(self.L[-1] + self.b_n[-1] + self.a)


def partition_points(a: float, b: float, n_max: int) -> PartitionTable:
    """Solve x_n - b/(2 x_n) = L_n with L_1 = 1 and L_{n+1} = L_n + b/x_n + a."""
    if not 0 < a < b:
        raise InvalidExponents("partition needs 0 < a < b")
    x = np.empty(n_max)
    L = np.empty(n_max)
    Ln = 1.0
    for i in range(n_max):
        L[i] = Ln
        x[i] = (Ln + math.sqrt(Ln * Ln + 2.0 * b)) / 2.0
        Ln = Ln + b / x[i] + a
    return PartitionTable(a, b, x, a / x, b / x, L)


def _piecewise_text(pieces, default):
    """pieces: increasing (right_end, value_text) on [0, inf) in abs(x)."""
    parts = "".join(f"abs(x) < {r!r}: {v}; " for r, v in pieces)
    return f"piecewise({parts}else: {default})"


def _gauss_factor(text, c):
    return f"({text}) * exp({c!r} * abs2(x))" if c != 0 else text


def _check_family_exponents(params):
    if 1.0 / params.q - 1.0 / params.p + params.alpha < 0:
        raise InvalidExponents("family needs 1/q - 1/p + alpha >= 0")


def counterexample_family(kind: str, geom=(1.0, 2.0), params: ExponentParams | None = None,
                          k: float | None = None, n_max: int = 20) -> WeightPair:
    """Weight pair for one of the explicit 1-D constructions.

    ``info`` carries the breakpoint intervals: for every n the cube
    ``Q_n`` and its two designated halves ``Q_n1`` (left) and ``Q_n2``
    (right), as (left, right) tuples.
    """
    if kind not in FAMILIES:
        raise ValueError(f"kind must be one of {FAMILIES}")
    if params is None:
        raise ValueError("params are required")
    if params.d != 1:
        raise InvalidExponents("counterexample families are one-dimensional")
    a, b = map(float, geom)
    p, q, al, ad = params.p, params.q, params.alpha, params.alpha_dot
    pp = params.p_prime
    if kind == "example41":
        if p <= 1:
            raise InvalidExponents("example41 needs p > 1")
        c = ad / (1.0 - pp)
        v = f"piecewise(abs(x) < 1.0: pow(abs(x), {1.0 / (pp - 1.0)!r}); else: 1.0) * exp({c!r} * abs2(x))"
        u = f"piecewise(abs(x) < 1.0: 0.0; else: exp({ad!r} * abs2(x)))"
        R = 4.0
        return WeightPair(parse_weight(u, even=True), parse_weight(v, even=True), [-R], [R],
                          dict(kind=kind, a=a, b=b))
    _check_family_exponents(params)
    if not 0 < a < b:
        raise InvalidExponents("family needs 0 < a < b")
    if kind == "example31":
        return _example31(a, b, p, q, n_max)
    k = al + 1.0 / q - 1.0 / p + 1.0 if k is None else float(k)
    tab = partition_points(a, b, n_max + 1)
    B = tab.L
    Bp = tab.L + tab.b_n
    A = B + (tab.b_n - tab.a_n) / 2
    Ap = tab.x + tab.a_n / 2
    if kind == "prop32":
        cu, cv = ad, ad / (1.0 - pp)
        ue = (lambda n: n ** (k * q), lambda n: n ** (-k * q))
        ve = (lambda n: n ** (k * p), lambda n: n ** (-k * p))
    else:
        cu, cv = (ad - 1.0) * q + 1.0, 1.0 / (1.0 - pp)
        ue = (lambda n: n ** (-k * q * (p - 1)), lambda n: n ** (-k * q * (p + 1)))
        ve = (lambda n: n ** (-k * p * (p - 1)), lambda n: n ** (k * p * (p - 1)))
    R = float(B[n_max])
    upieces = [(1.0, "1.0")]
    vpieces = [(float(Bp[0]), "1.0")]
    for i in range(n_max):
        n = i + 1
        upieces += [(float(A[i]), repr(ue[0](n))), (float(B[i + 1]), repr(ue[1](n)))]
        if n >= 2:
            vpieces += [(float(Ap[i]), repr(ve[0](n))), (float(Bp[i]), repr(ve[1](n)))]
    n = n_max + 1
    vpieces += [(float(Ap[n_max]), repr(ve[0](n)))]
    u = _gauss_factor(_piecewise_text(upieces, "1.0"), cu)
    v = _gauss_factor(_piecewise_text(vpieces, "1.0"), cv)
    cubes = {i + 1: dict(Q=(float(B[i]), float(Bp[i])), Q1=(float(B[i]), float(A[i])),
                         Q2=(float(Ap[i]), float(Bp[i]))) for i in range(n_max)}
    info = dict(kind=kind, a=a, b=b, k=k, n_max=n_max, cubes=cubes, table=tab)
    return WeightPair(parse_weight(u, even=True), parse_weight(v, even=True), [-R], [R], info)


def _example31(a, b, p, q, n_max):
    w = (b - a) / 2
    upieces = [(1.0, "1.0")]
    cubes = {}
    for n in range(1, n_max + 1):
        Bn = 1 + (n - 1) * (a + b)
        upieces += [(Bn + w, repr(float(n) ** q)), (1 + n * (a + b), repr(float(n) ** -q))]
    vpieces = [(1.0 + b, "1.0")]
    for n in range(2, n_max + 2):
        Bp = 1 + (n - 1) * a + n * b
        vpieces += [(Bp - w, repr(float(n) ** p)), (Bp, repr(float(n) ** -p))]
    for n in range(1, n_max + 1):
        Bn = 1 + (n - 1) * (a + b)
        Bp = 1 + (n - 1) * a + n * b
        cubes[n] = dict(Q=(Bn, Bp), Q1=(Bn, Bn + w), Q2=(Bp - w, Bp))
    R = 1 + n_max * (a + b)
    info = dict(kind="example31", a=a, b=b, n_max=n_max, cubes=cubes)
    return WeightPair(parse_weight(_piecewise_text(upieces, "1.0"), even=True),
                      parse_weight(_piecewise_text(vpieces, "1.0"), even=True), [-R], [R], info)


# -- equivalence checks ------------------------------------------------------------------

def a1_equivalence_check(pair: WeightPair, params: ExponentParams, enum: AdmissibleEnum | None = None,
                         resolution=None, grid: GridFunction | None = None) -> dict:
    """Compare the p = 1 radial constant with sup (M_beta u)^(1/q) / v, beta = d - (d - alpha) q."""
    if params.p != 1:
        raise InvalidExponents("the A1 comparison needs p = 1")
    d = params.d
    if not 1 <= params.q <= d / (d - params.alpha):
        raise InvalidExponents("need 1 <= q <= d / (d - alpha)")
    grid = grid or _default_grid(pair, resolution)
    beta = d - (d - params.alpha) * params.q
    c1 = weight_constant(pair, params, "scriptA", enum, grid=grid).value
    ad = params.alpha_dot
    ugrid = _raw_grid(grid, pair.u.masses(grid, "tilt", ad) / grid.cell_mass("tilt", ad))
    mf = maximal_field(ugrid, params.replace(alpha=beta), enum, form="radial", tilt_alpha_dot=ad).values
    v = pair.v.sample(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(mf == 0, 0.0, mf ** (1.0 / params.q) / v)
    c2 = float(np.max(ratio))
    return dict(beta=beta, C1=c1, C2=c2, ratio=(c2 / c1 if c1 > 0 else (0.0 if c2 == 0 else math.inf)))


def average_test_check(pair: WeightPair, params: ExponentParams, f: GridFunction, Q: Cube):
    """Sides of the averaged testing inequality on one cube (radial measure).

    lhs = (side^(alpha - d) int_Q f dgamma')^q * int_Q u dgamma'
    rhs = (int_Q f^p v dgamma')^(q/p)
    Q is snapped to whole cells of f's grid.
    """
    ad = params.alpha_dot
    h = f.isotropic_spacing()
    start = np.round((Q.lower - f.lower) / h).astype(int)
    m = max(1, int(round(Q.side / h)))
    sl = tuple(slice(max(s, 0), s + m) for s in start)
    side = m * h
    tilt = f.cell_mass("tilt", ad)
    fint = math.fsum((f.values * tilt)[sl].ravel())
    uint = math.fsum(pair.u.masses(f, "tilt", ad)[sl].ravel())
    vmass = pair.v.masses(f, "tilt", ad)
    with np.errstate(invalid="ignore"):
        fpv = np.where(f.values > 0, f.values ** params.p * vmass, 0.0)
    lhs = (side ** (params.alpha - params.d) * fint) ** params.q * uint
    rhs = math.fsum(fpv[sl].ravel()) ** (params.q / params.p)
    return lhs, rhs


def unit_pair(lower, upper) -> WeightPair:
    """The pair u = v = 1 on a box."""
    return WeightPair(parse_weight("1"), parse_weight("1"), lower, upper, dict(kind="unit"))
