"""Local fractional maximal operators and the cube-based fractional integral on grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import AlphaOutOfRange, EmptyFamily, InvalidExponents
from .geometry import ADMISSIBLE_RTOL, AdmissibleEnum, Cube
from .grid import GridFunction

FORMS = ("gauss", "radial")
KERNEL_NORMS = ("maxnorm", "euclid")


@dataclass(frozen=True)
class ExponentParams:
    """Exponents (p, q, alpha), family parameter a and dimension d."""

    p: float
    q: float
    alpha: float
    a: float
    d: int = 1

    def __post_init__(self):
        if not (self.p >= 1 and self.q >= 1):
            raise InvalidExponents(f"need p, q >= 1, got p={self.p}, q={self.q}")
        if self.d < 1 or int(self.d) != self.d:
            raise InvalidExponents(f"dimension must be a positive integer, got {self.d}")
        if not 0 <= self.alpha < self.d:
            raise AlphaOutOfRange(f"alpha={self.alpha} outside [0, {self.d})")
        if not self.a > 0:
            raise InvalidExponents(f"family parameter a must be positive, got {self.a}")

    @property
    def alpha_dot(self) -> float:
        return self.alpha / self.d

    @property
    def p_prime(self) -> float:
        return math.inf if self.p == 1 else self.p / (self.p - 1)

    @property
    def p_le_q(self) -> bool:
        return self.p <= self.q

    def require_p_le_q(self):
        if not self.p_le_q:
            raise InvalidExponents(f"operation needs p <= q, got p={self.p}, q={self.q}")

    def replace(self, **kw) -> "ExponentParams":
        vals = dict(p=self.p, q=self.q, alpha=self.alpha, a=self.a, d=self.d)
        vals.update(kw)
        return ExponentParams(**vals)


@dataclass
class MaximalField:
    """Maximal-operator values on a grid plus the argmax cube of every cell.

    ``witness_cells[i]`` is the side (in cells) and ``witness_start[i]`` the
    lower corner index of the cube attaining the value at cell ``i``.
    """

    field: GridFunction
    witness_cells: np.ndarray
    witness_start: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def witness_cube(self, flat_index: int) -> Cube:
        g = self.field
        h = g.isotropic_spacing()
        m = int(self.witness_cells[flat_index])
        start = self.witness_start[flat_index][: g.dim]
        return Cube(g.lower + h * (start + 0.5 * m), m * h)


def grid_ladder(h: float, a: float, enum: AdmissibleEnum) -> np.ndarray:
    """Ladder sides snapped to whole cells, descending and without repeats."""
    cells = {max(1, int(math.floor(s / h + 1e-9))) for s in enum.sides(a)}
    return np.array(sorted(cells, reverse=True), dtype=np.int64)


def _cached_prefix(g: GridFunction, measure: str, alpha_dot: float | None = None):
    key = ("prefix", measure, alpha_dot if measure == "tilt" else None)
    if key not in g._masses:
        g._masses[key] = kernels.prefix_table(g.cell_mass(measure, alpha_dot))
    return g._masses[key]


def _all_points(g: GridFunction) -> np.ndarray:
    idx = np.indices(g.resolution).reshape(g.dim, -1).T
    out = np.zeros((idx.shape[0], 3), dtype=np.int64)
    out[:, : g.dim] = idx
    return out


def _scan_setup(f: GridFunction, params: ExponentParams, form: str, tilt_alpha_dot=None):
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    if f.dim != params.d:
        raise ValueError(f"grid dimension {f.dim} differs from params.d={params.d}")
    if form == "gauss":
        ftab = kernels.prefix_table(f.fmass("gauss"))
        gtab = _cached_prefix(f, "gauss")
        return ftab, gtab, 0, params.alpha_dot - 1.0
    ad = params.alpha_dot if tilt_alpha_dot is None else tilt_alpha_dot
    ftab = kernels.prefix_table(f.fmass("tilt", ad))
    return ftab, None, 1, params.alpha - params.d


def maximal_field(f: GridFunction, params: ExponentParams, enum: AdmissibleEnum | None = None,
                  form: str = "gauss", points=None, tilt_alpha_dot: float | None = None) -> MaximalField:
    """Discrete local fractional maximal function at every cell midpoint.

    Parameters
    ----------
    f : GridFunction
        Nonnegative input; the grid must have equal cell widths.
    params : ExponentParams
        Uses ``alpha``, ``a`` and ``d``.
    enum : AdmissibleEnum, optional
        Side ladder and center pitch; defaults to a ladder down to one cell.
    form : {"gauss", "radial"}
        ``gauss``: gamma(Q)^(alpha/d - 1) * int_Q f dgamma.
        ``radial``: side^(alpha - d) * int_Q f exp(-alpha/d |y|^2) dy.
    points : array of int, optional
        (K, d) cell indices; the field is then evaluated only there and the
        remaining cells are left at zero.
    tilt_alpha_dot : float, optional
        Radial form only: exponent of the measure exp(-t |y|^2) dy when it
        should differ from alpha/d.

    Notes
    -----
    Candidate cubes are unions of whole cells lying inside the grid box; a
    ladder side s becomes floor(s/h) cells, so every candidate is genuinely
    admissible and the result is a certified lower bound of the continuum
    supremum restricted to the box.
    """
    h = f.isotropic_spacing()
    enum = enum or AdmissibleEnum.for_grid(h, params.a)
    ftab, gtab, mode, expo = _scan_setup(f, params, form, tilt_alpha_dot)
    ms = grid_ladder(h, params.a, enum)
    if points is None:
        pts = _all_points(f)
    else:
        pts = np.zeros((len(points), 3), dtype=np.int64)
        pts[:, : f.dim] = np.asarray(points, dtype=np.int64).reshape(len(points), f.dim)
    shape3 = list(f.resolution) + [1] * (3 - f.dim)
    vals, wm, ws = kernels.maximal_scan(ftab, gtab, mode, expo, shape3, f.dim, kernels.pad_vec(f.lower),
                                        h, params.a, ms, enum.center_pitch, pts)
    if np.any(vals < 0):
        bad = pts[int(np.argmax(vals < 0))][: f.dim]
        raise EmptyFamily(f"no admissible grid cube contains cell {tuple(int(i) for i in bad)}")
    if points is None:
        out = vals.reshape(f.resolution)
        wcells, wstart = wm, ws
    else:
        out = np.zeros(f.resolution)
        flat = np.ravel_multi_index(tuple(pts[:, : f.dim].T), f.resolution)
        out.ravel()[flat] = vals
        wcells = np.zeros(f.size, dtype=np.int64)
        wstart = np.zeros((f.size, 3), dtype=np.int64)
        wcells[flat] = wm
        wstart[flat] = ws
    prov = dict(form=form, alpha=params.alpha, a=params.a, ladder_cells=ms.tolist(),
                center_pitch=enum.center_pitch, backend=kernels.use_numba() and "numba" or "numpy")
    return MaximalField(f.with_values(out), wcells, wstart, prov)


def brute_force_maximal(f: GridFunction, x, params: ExponentParams, fine_enum: AdmissibleEnum,
                        form: str = "gauss") -> float:
    """Maximal value at the cell containing x by direct enumeration.

    Walks the same grid-aligned cube family as :func:`maximal_field` but
    sums cell masses of each candidate directly with ``math.fsum``; meant as
    a slow, independent reference.
    """
    h = f.isotropic_spacing()
    d = f.dim
    idx = f.cell_index(x)
    if form == "gauss":
        fm = f.fmass("gauss")
        gm = f.cell_gauss_mass
        expo = params.alpha_dot - 1.0
    else:
        fm = f.fmass("tilt", params.alpha_dot)
        gm = None
        expo = params.alpha - d
    best = -1.0
    sides = fine_enum.sides(params.a)
    for m in sorted({max(1, int(math.floor(s / h + 1e-9))) for s in sides}, reverse=True):
        if m > min(f.resolution):
            continue
        step = 2 ** max(0, int(math.floor(math.log2(max(1.0, fine_enum.center_pitch * m)) + 1e-12)))
        offsets = sorted(set(range(0, m, step)) | {(m - 1) // 2, m - 1})
        for combo in np.ndindex(*(len(offsets),) * d):
            start = [idx[ax] - offsets[c] for ax, c in enumerate(combo)]
            if any(s < 0 or s + m > n for s, n in zip(start, f.resolution)):
                continue
            center = f.lower + h * (np.asarray(start) + 0.5 * m)
            r = math.sqrt(sum(c * c for c in center))
            mval = 1.0 if r <= 1.0 else 1.0 / r
            if m * h > params.a * mval * (1.0 + ADMISSIBLE_RTOL):
                continue
            sl = tuple(slice(s, s + m) for s in start)
            integ = math.fsum(fm[sl].ravel())
            if form == "gauss":
                g = math.fsum(gm[sl].ravel())
                if not g > 0:
                    continue
                val = integ * g ** expo
            else:
                val = integ * (m * h) ** expo
            best = max(best, val)
    if best < 0:
        raise EmptyFamily(f"no admissible grid cube contains {x}")
    return best


def fractional_integral_field(f: GridFunction, params: ExponentParams,
                              kernel_norm: str = "maxnorm") -> GridFunction:
    """Cube-based local fractional integral at every cell midpoint.

    The cell of y contributes f(y) * gamma(Q(x, s))^(alpha/d - 1) * gamma(cell),
    with s = 2 |x - y|_inf (or twice the Euclidean distance for
    ``kernel_norm="euclid"``); y ranges over cells whose midpoints lie in
    Q(x, a m(x)). The cell of x itself uses s = cell diameter in the chosen
    norm, which caps the integrable singularity.
    """
    if not 0 < params.alpha < params.d:
        raise AlphaOutOfRange(f"fractional integral needs 0 < alpha < {params.d}, got {params.alpha}")
    if kernel_norm not in KERNEL_NORMS:
        raise ValueError(f"kernel_norm must be one of {KERNEL_NORMS}")
    h = f.isotropic_spacing()
    fm = kernels.pad3(f.fmass("gauss"))
    out = kernels.fracint_sum(fm, f.dim, kernels.pad_vec(f.lower), h, params.a, params.alpha_dot - 1.0,
                              euclid=kernel_norm == "euclid")
    return f.with_values(out.reshape(f.resolution))


def welland_check(f: GridFunction, params: ExponentParams, epsilon: float, b_tilde: float,
                  enum: AdmissibleEnum | None = None):
    """Compare the fractional integral with the geometric mean of two maximal functions.

    Returns ``(lhs, rhs, max_ratio)`` where lhs is the fractional integral,
    rhs is sqrt(M_{alpha-eps}^a f * M_{alpha+eps}^{b_tilde} f) and max_ratio is
    the largest lhs/rhs over the grid (0/0 counts as 0).
    """
    if not 0 < epsilon < min(params.alpha, params.d - params.alpha):
        raise InvalidExponents("epsilon must lie in (0, min(alpha, d - alpha))")
    if not b_tilde > params.a:
        raise InvalidExponents("b_tilde must exceed a")
    h = f.isotropic_spacing()
    enum = enum or AdmissibleEnum.for_grid(h, params.a)
    wide = AdmissibleEnum.for_grid(h, b_tilde, enum.center_pitch, enum.side_ladder_ratio)
    lhs = fractional_integral_field(f, params).values
    lo = maximal_field(f, params.replace(alpha=params.alpha - epsilon), enum).values
    hi = maximal_field(f, params.replace(alpha=params.alpha + epsilon, a=b_tilde), wide).values
    rhs = np.sqrt(lo) * np.sqrt(hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lhs == 0, 0.0, lhs / rhs)
    return f.with_values(lhs), f.with_values(rhs), float(np.max(ratio))
