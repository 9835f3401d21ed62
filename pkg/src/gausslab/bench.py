"""Wall-clock comparison of the numba kernels and the numpy fallback."""

from __future__ import annotations

import contextlib
import os
import time

import numpy as np

from ._jit import HAVE_NUMBA
from .grid import GridFunction
from .operators import ExponentParams, fractional_integral_field, maximal_field


@contextlib.contextmanager
def backend(name: str):
    """Temporarily select a kernel backend ("numba" or "numpy")."""
    old = os.environ.get("GAUSSLAB_NUMBA")
    os.environ["GAUSSLAB_NUMBA"] = "1" if name == "numba" else "0"
    try:
        yield
    finally:
        if old is None:
            os.environ.pop("GAUSSLAB_NUMBA", None)
        else:
            os.environ["GAUSSLAB_NUMBA"] = old


def _input(d, n, seed):
    rng = np.random.default_rng(seed)
    return GridFunction([-3.0] * d, [3.0] * d, n, rng.random((n,) * d))


KERNELS = {
    "maximal": lambda f, P: maximal_field(f, P).values,
    "integral": lambda f, P: fractional_integral_field(f, P).values,
}


def run_bench(cases=((1, 1024), (2, 64)), kernels=("maximal", "integral"), repeats=3, seed=0):
    """Best-of-``repeats`` timings for each (kernel, dimension, cells, backend).

    The numba timing excludes the first (compiling) call. Returns a list of
    row dicts and checks that both backends produce the same field.
    """
    rows = []
    names = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    for d, n in cases:
        f = _input(d, n, seed)
        P = ExponentParams(2, 2, 0.5 * d, 1.0, d)
        for k in kernels:
            results = {}
            for name in names:
                with backend(name):
                    results[name] = KERNELS[k](f, P)
                    best = np.inf
                    for _ in range(repeats):
                        t0 = time.perf_counter()
                        KERNELS[k](f, P)
                        best = min(best, time.perf_counter() - t0)
                rows.append(dict(kernel=k, dim=d, cells=n, backend=name, seconds=best))
            if len(results) == 2:
                ref = results["numpy"]
                diff = np.max(np.abs(results["numba"] - ref) / np.maximum(np.abs(ref), 1e-300))
                for r in rows[-2:]:
                    r["max_rel_diff"] = float(diff)
    return rows
