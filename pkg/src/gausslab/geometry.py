"""Cubes, admissibility, Gaussian and tilted cube measures, dyadic lifting and
covering selections."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import special

from .errors import EmptyFamily

# Closed inequality l(Q) <= a m(c_Q), with slack for rounding in a*m(c).
ADMISSIBLE_RTOL = 1e-12

_SQRT_PI = math.sqrt(math.pi)


# -- one-dimensional building blocks ---------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
# below this (|midpoint| + 1) * half-width the Gauss-Legendre branch is used
NARROW = 0.25


def erf_diff(lo, hi):
    """erf(hi) - erf(lo) with full relative precision.

    Narrow intervals integrate 2/sqrt(pi) exp(-t^2) around the midpoint with
    8-point Gauss-Legendre; wide ones difference erfc in the tails and erf in
    the middle.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        right = special.erfc(lo) - special.erfc(hi)
        left = special.erfc(-hi) - special.erfc(-lo)
        mid = special.erf(hi) - special.erf(lo)
        m = 0.5 * (lo + hi)
        r = 0.5 * (hi - lo)
        t = m[..., None] + r[..., None] * _GL_X
        narrow = (2.0 / _SQRT_PI) * r * np.sum(_GL_W * np.exp(-t * t), axis=-1)
    out = np.where(lo >= 0.5, right, np.where(hi <= -0.5, left, mid))
    out = np.where((np.abs(m) + 1.0) * r <= NARROW, narrow, out)
    return out if out.ndim else float(out)


def interval_mass(lo, hi, kappa):
    """Integral of exp(-kappa y^2) over [lo, hi) for kappa >= 0."""
    if kappa < 0:
        return expo_interval(lo, hi, -kappa)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if kappa == 0:
        out = hi - lo
    else:
        r = math.sqrt(kappa)
        out = (_SQRT_PI / (2.0 * r)) * np.asarray(erf_diff(r * lo, r * hi))
    return out if np.ndim(out) else float(out)


def _int_exp_sq(z):
    # integral_0^z exp(t^2) dt = exp(z^2) D(z), D the Dawson function
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(z * z) * special.dawsn(z)


def expo_interval(lo, hi, lam):
    """Integral of exp(lam y^2) over [lo, hi) for any real lam."""
    if lam <= 0:
        return interval_mass(lo, hi, -lam)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    r = math.sqrt(lam)
    out = (_int_exp_sq(r * hi) - _int_exp_sq(r * lo)) / r
    return out if np.ndim(out) else float(out)


def gauss_interval(lo, hi):
    """Gaussian probability mass of [lo, hi) in one dimension."""
    out = 0.5 * np.asarray(erf_diff(lo, hi))
    return out if np.ndim(out) else float(out)


# -- cubes -----------------------------------------------------------------

def _as_vector(x) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError("expected a vector")
    return v


@dataclass(frozen=True, eq=False)
class Cube:
    """Axis-parallel half-open cube given by its center and side length."""

    center: np.ndarray
    side: float

    def __post_init__(self):
        c = _as_vector(self.center)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "side", float(self.side))
        if not (self.side > 0 and math.isfinite(self.side)):
            raise ValueError(f"cube side must be positive and finite, got {self.side}")
        if not np.all(np.isfinite(c)):
            raise ValueError("cube center must be finite")

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.side / 2

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.side / 2

    def contains(self, x) -> bool:
        x = _as_vector(x)
        return bool(np.all(self.lower <= x) and np.all(x < self.upper))

    def contains_cube(self, other: "Cube", tol: float = 0.0) -> bool:
        return bool(np.all(other.lower >= self.lower - tol) and np.all(other.upper <= self.upper + tol))

    def intersects(self, other: "Cube") -> bool:
        return bool(np.all(self.lower < other.upper) and np.all(other.lower < self.upper))

    def dilate(self, factor: float) -> "Cube":
        return Cube(self.center, factor * self.side)

    def corners(self) -> np.ndarray:
        lo, hi = self.lower, self.upper
        return np.array([[hi[i] if bit else lo[i] for i, bit in enumerate(bits)]
                         for bits in product((0, 1), repeat=self.dim)])

    def __eq__(self, other):
        if not isinstance(other, Cube):
            return NotImplemented
        return self.side == other.side and np.array_equal(self.center, other.center)

    def __hash__(self):
        return hash((self.side, self.center.tobytes()))

    def __repr__(self):
        return f"Cube(center={self.center.tolist()}, side={self.side!r})"


@dataclass(frozen=True)
class DyadicCube:
    """The cube prod [2^k z_i, 2^k (z_i + 1))."""

    level: int
    corner: tuple

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(int(z) for z in self.corner))

    @property
    def side(self) -> float:
        return math.ldexp(1.0, self.level)

    def to_cube(self) -> Cube:
        s = self.side
        return Cube([(z + 0.5) * s for z in self.corner], s)

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.level + 1, tuple(z // 2 for z in self.corner))

    def contains(self, other: "DyadicCube") -> bool:
        if other.level > self.level:
            return False
        shift = self.level - other.level
        return all((z >> shift) == w for z, w in zip(other.corner, self.corner))


def dyadic_level(side: float) -> int:
    """The k with 2^(k-1) <= side < 2^k."""
    _, e = math.frexp(side)
    return e


def dyadic_cubes_meeting(box_lo, box_hi, level: int) -> list[DyadicCube]:
    """All level-k dyadic cubes meeting the half-open box [box_lo, box_hi)."""
    s = math.ldexp(1.0, level)
    ranges = []
    for lo, hi in zip(box_lo, box_hi):
        z0 = math.floor(lo / s)
        z1 = math.ceil(hi / s) - 1
        ranges.append(range(z0, z1 + 1))
    return [DyadicCube(level, z) for z in product(*ranges)]


# -- measures --------------------------------------------------------------

def gaussian_measure(Q: Cube, d: int | None = None) -> float:
    """Gaussian probability measure of a cube."""
    if d is not None and d != Q.dim:
        raise ValueError(f"cube has dimension {Q.dim}, expected {d}")
    return float(np.prod(gauss_interval(Q.lower, Q.upper)))


def tilted_measure(Q: Cube, alpha_dot: float) -> float:
    """Integral of exp(-alpha_dot |y|^2) dy over the cube."""
    if alpha_dot < 0:
        raise ValueError("alpha_dot must be nonnegative")
    if alpha_dot == 0:
        return Q.side ** Q.dim
    return float(np.prod(interval_mass(Q.lower, Q.upper, alpha_dot)))


def m_value(x) -> float:
    r = float(np.linalg.norm(_as_vector(x)))
    return 1.0 if r <= 1.0 else 1.0 / r


def is_admissible(Q: Cube, a: float) -> bool:
    if a <= 0:
        raise ValueError("a must be positive")
    return Q.side <= a * m_value(Q.center) * (1.0 + ADMISSIBLE_RTOL)


def admissible_mask(sides, centers, a):
    """Vectorized admissibility; centers has shape (..., d)."""
    r = np.linalg.norm(centers, axis=-1)
    m = np.where(r <= 1.0, 1.0, 1.0 / np.maximum(r, 1.0))
    return sides <= a * m * (1.0 + ADMISSIBLE_RTOL)


# -- enumeration -----------------------------------------------------------

@dataclass(frozen=True)
class AdmissibleEnum:
    """Finite stand-in for the family of admissible cubes.

    Sides form the geometric ladder ``max_scale * ratio**-j`` for
    ``j < ladder_depth``; ``max_scale`` defaults to the admissibility
    parameter. ``center_pitch`` is measured in units of the side, so every
    scale is probed at about ``1/center_pitch`` positions per axis.
    """

    side_ladder_ratio: float = 2.0
    ladder_depth: int = 4
    center_pitch: float = 0.25
    max_scale: float | None = None

    def __post_init__(self):
        if not self.side_ladder_ratio > 1:
            raise ValueError("side_ladder_ratio must exceed 1")
        if self.ladder_depth < 1:
            raise ValueError("ladder_depth must be positive")
        if not self.center_pitch > 0:
            raise ValueError("center_pitch must be positive")
        if self.max_scale is not None and not self.max_scale > 0:
            raise ValueError("max_scale must be positive")

    def top(self, a: float) -> float:
        return a if self.max_scale is None else self.max_scale

    def sides(self, a: float) -> np.ndarray:
        return self.top(a) * self.side_ladder_ratio ** -np.arange(self.ladder_depth, dtype=float)

    def refine(self) -> "AdmissibleEnum":
        """Half the pitch and one more ladder rung; a superset family."""
        return AdmissibleEnum(self.side_ladder_ratio, self.ladder_depth + 1,
                              self.center_pitch / 2, self.max_scale)

    @classmethod
    def for_grid(cls, h: float, top: float, center_pitch: float = 0.25, ratio: float = 2.0,
                 max_scale: float | None = None) -> "AdmissibleEnum":
        """Ladder reaching down to one cell of width h."""
        depth = max(1, int(math.floor(math.log(top / h, ratio) + 1e-9)) + 1)
        return cls(ratio, depth, center_pitch, max_scale)


def _pitch_offsets(pitch: float) -> np.ndarray:
    # offsets o (in units of the side) with -1/2 < o <= 1/2, always including 0
    kmax = int(math.floor(0.5 / pitch + 1e-12))
    ks = np.arange(-kmax, kmax + 1) * pitch
    return ks[(ks > -0.5) & (ks <= 0.5)]


def enumerate_admissible_cubes(x, a: float, enum: AdmissibleEnum) -> list[Cube]:
    """Admissible cubes of the enumeration that contain the point x."""
    x = _as_vector(x)
    sides = enum.sides(a)
    if sides.min() > a * m_value(x) * (1.0 + ADMISSIBLE_RTOL):
        raise EmptyFamily(f"smallest ladder side {sides.min():g} exceeds a*m(x) = {a * m_value(x):g}")
    offs = _pitch_offsets(enum.center_pitch)
    out = []
    for s in sides:
        for o in product(offs, repeat=x.size):
            Q = Cube(x + s * np.asarray(o), s)
            if Q.contains(x) and is_admissible(Q, a):
                out.append(Q)
    return out


# -- dyadic lifting ----------------------------------------------------------

def containing_dyadic(Q: Cube, g, alpha: float, a: float | None = None):
    """Lift a cube to the dyadic cube of the next scale carrying most mass.

    Parameters
    ----------
    Q : Cube
        Admissible cube (parameter ``a``).
    g : GridFunction
        Nonnegative grid function; masses use exp(-alpha/d |y|^2) dy.
    alpha : float
        Order of the fractional average.

    Returns
    -------
    (DyadicCube, float)
        The chosen cube P and its average l(P)^(alpha-d) * int_P g.
    """
    d = Q.dim
    alpha_dot = alpha / d
    k = dyadic_level(Q.side)
    best, best_mass = None, -1.0
    for P in dyadic_cubes_meeting(Q.lower, Q.upper, k):
        Pc = P.to_cube()
        mass = g.integrate_box(Pc.lower, Pc.upper, alpha_dot)
        if mass > best_mass:
            best, best_mass = P, mass
    return best, best.side ** (alpha - d) * best_mass


def cube_average(Q: Cube, g, alpha: float) -> float:
    d = Q.dim
    return Q.side ** (alpha - d) * g.integrate_box(Q.lower, Q.upper, alpha / d)


def dyadic_admissibility_parameter(a: float, d: int) -> float:
    return 2 * a + 3 * math.sqrt(d) * a * a


# -- covering ------------------------------------------------------------------

def _disjoint(P: Cube, Q: Cube) -> bool:
    return not P.intersects(Q)


@dataclass
class Selection:
    families: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.families)

    def selected(self) -> list[Cube]:
        return [Q for fam in self.families for Q in fam]


def vitali_select(cubes: list[Cube], expansion: float = 3.0) -> Selection:
    """Greedy largest-first selection of disjoint subfamilies.

    Each pass picks a maximal disjoint subfamily among the cubes not yet
    covered by an ``expansion``-dilation of a previously selected cube. With
    ``expansion >= 3`` a single pass suffices.
    """
    if expansion < 1:
        raise ValueError("expansion must be at least 1")
    remaining = sorted(cubes, key=lambda Q: -Q.side)
    sel = Selection()
    picked: list[Cube] = []
    while remaining:
        fam: list[Cube] = []
        for Q in remaining:
            if all(_disjoint(Q, P) for P in fam):
                fam.append(Q)
        sel.families.append(fam)
        picked.extend(fam)
        dil = [P.dilate(expansion) for P in picked]
        remaining = [Q for Q in remaining
                     if not any(D.contains_cube(Q, tol=1e-12 * max(1.0, D.side)) for D in dil)]
    return sel
