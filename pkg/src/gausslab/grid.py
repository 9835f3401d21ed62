"""Sampled nonnegative functions on uniform box grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, reduce

import numpy as np

from .geometry import gauss_interval, interval_mass

MEASURES = ("gauss", "tilt", "lebesgue")


def _outer(vectors):
    return reduce(np.multiply.outer, vectors)


@dataclass(eq=False)
class GridFunction:
    """Piecewise-constant function on the cells of ``[lower, upper)``.

    ``values[i]`` is the sample at the midpoint of cell ``i`` and is taken as
    the value on the whole cell; outside the box the function is zero.
    """

    lower: np.ndarray
    upper: np.ndarray
    resolution: tuple
    values: np.ndarray = None
    alpha_dot: float = 0.0
    _masses: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        res = self.resolution
        if np.isscalar(res):
            res = (int(res),) * self.lower.size
        self.resolution = tuple(int(n) for n in res)
        if not (self.lower.size == self.upper.size == len(self.resolution)):
            raise ValueError("box corners and resolution must share the dimension")
        if np.any(self.upper <= self.lower) or min(self.resolution) < 1:
            raise ValueError("empty grid box")
        if self.values is None:
            self.values = np.zeros(self.resolution)
        self.values = np.asarray(self.values, dtype=float).reshape(self.resolution)
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("grid values must be finite and nonnegative")
        if not 0 <= self.alpha_dot < 1:
            raise ValueError("alpha_dot must lie in [0, 1)")

    # -- construction ------------------------------------------------------
    @classmethod
    def from_callable(cls, fn, lower, upper, resolution, alpha_dot=0.0):
        g = cls(lower, upper, resolution, alpha_dot=alpha_dot)
        vals = np.asarray(fn(g.midpoints()), dtype=float).reshape(g.resolution)
        return g.with_values(vals)

    def with_values(self, values) -> "GridFunction":
        g = GridFunction(self.lower, self.upper, self.resolution, values, self.alpha_dot)
        g._masses = self._masses  # geometry is shared, so are the cached masses
        return g

    def refined(self, factor: int = 2) -> "GridFunction":
        """Empty grid with ``factor`` times the resolution on the same box."""
        return GridFunction(self.lower, self.upper, tuple(factor * n for n in self.resolution),
                            alpha_dot=self.alpha_dot)

    # -- geometry ----------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    @property
    def spacing(self) -> np.ndarray:
        return (self.upper - self.lower) / np.asarray(self.resolution)

    def isotropic_spacing(self) -> float:
        h = self.spacing
        if not np.allclose(h, h[0], rtol=1e-12, atol=0):
            raise ValueError("operator kernels need equal cell widths on every axis")
        return float(h[0])

    def edges(self, axis: int) -> np.ndarray:
        n = self.resolution[axis]
        return self.lower[axis] + (self.upper[axis] - self.lower[axis]) * np.arange(n + 1) / n

    def axis_midpoints(self, axis: int) -> np.ndarray:
        e = self.edges(axis)
        return 0.5 * (e[:-1] + e[1:])

    def midpoints(self) -> np.ndarray:
        """Cell midpoints as an (N, d) array in C order."""
        axes = np.meshgrid(*[self.axis_midpoints(i) for i in range(self.dim)], indexing="ij")
        return np.stack([ax.ravel() for ax in axes], axis=1)

    def cell_index(self, x) -> tuple:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.floor((x - self.lower) / self.spacing).astype(int)
        return tuple(int(i) for i in idx)

    # -- masses ------------------------------------------------------------
    def axis_masses(self, axis: int, measure: str, alpha_dot: float | None = None) -> np.ndarray:
        e = self.edges(axis)
        if measure == "gauss":
            return np.asarray(gauss_interval(e[:-1], e[1:]))
        if measure == "tilt":
            ad = self.alpha_dot if alpha_dot is None else alpha_dot
            return np.asarray(interval_mass(e[:-1], e[1:], ad))
        if measure == "lebesgue":
            return np.diff(e)
        raise ValueError(f"unknown measure {measure!r}")

    def cell_mass(self, measure: str, alpha_dot: float | None = None) -> np.ndarray:
        ad = self.alpha_dot if alpha_dot is None else float(alpha_dot)
        key = (measure, ad if measure == "tilt" else None)
        if key not in self._masses:
            m = _outer([self.axis_masses(i, measure, ad) for i in range(self.dim)])
            self._masses[key] = np.asarray(m).reshape(self.resolution)
        return self._masses[key]

    @property
    def cell_gauss_mass(self) -> np.ndarray:
        return self.cell_mass("gauss")

    @property
    def cell_tilt_mass(self) -> np.ndarray:
        return self.cell_mass("tilt")

    def fmass(self, measure: str, alpha_dot: float | None = None) -> np.ndarray:
        """Per-cell integral of the function against the measure."""
        return self.values * self.cell_mass(measure, alpha_dot)

    def integral(self, measure: str = "gauss", alpha_dot: float | None = None) -> float:
        return float(math.fsum(self.fmass(measure, alpha_dot).ravel()))

    def integrate_box(self, lo, hi, alpha_dot: float | None = None, measure: str = "tilt") -> float:
        """Exact integral over the half-open box [lo, hi) of the piecewise-constant function."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        ad = self.alpha_dot if alpha_dot is None else alpha_dot
        slices, weights = [], []
        for i in range(self.dim):
            e = self.edges(i)
            a = max(lo[i], e[0])
            b = min(hi[i], e[-1])
            if b <= a:
                return 0.0
            i0 = max(int(np.searchsorted(e, a, side="right")) - 1, 0)
            i1 = min(int(np.searchsorted(e, b, side="left")), self.resolution[i])
            cl = np.maximum(e[i0:i1], a)
            cr = np.minimum(e[i0 + 1:i1 + 1], b)
            if measure == "gauss":
                w = np.asarray(gauss_interval(cl, cr))
            elif measure == "tilt":
                w = np.asarray(interval_mass(cl, cr, ad))
            else:
                w = cr - cl
            slices.append(slice(i0, i1))
            weights.append(np.maximum(w, 0.0))
        block = self.values[tuple(slices)]
        for w in weights:
            block = np.tensordot(w, block, axes=([0], [0]))
        return float(block)
