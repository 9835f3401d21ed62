"""Hot loops: compensated prefix tables, maximal scans, fractional-integral sums.

Every kernel exists as an ``@njit`` loop and as a vectorized numpy routine with
identical semantics; :func:`gausslab._jit.use_numba` picks one at call time.
Grids of dimension d <= 3 are padded to three axes of which the trailing
``3 - d`` have length one.

Prefix tables are kept in double-double form (a high and a low part). Their
box sums carry an absolute error of a few units of 2^-106 times the largest
prefix involved; sums that come out below ``DIRECT_FLOOR`` times that prefix
are redone by direct summation so tail masses keep their relative precision.
"""

import math

import numpy as np

from ._jit import njit, prange, use_numba
from .geometry import _GL_W, _GL_X, ADMISSIBLE_RTOL, NARROW, erf_diff

MAX_DIM = 3
DIRECT_FLOOR = 1e-20


def pad3(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if arr.ndim > MAX_DIM:
        raise ValueError(f"kernels support d <= {MAX_DIM}")
    return arr.reshape(arr.shape + (1,) * (MAX_DIM - arr.ndim))


def pad_vec(v, fill=0.0) -> np.ndarray:
    out = np.full(MAX_DIM, fill, dtype=np.float64)
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    out[: v.size] = v
    return out


# -- double-double helpers ---------------------------------------------------

@njit(cache=True)
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True)
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e += al + bl
    t = s + e
    return t, e - (t - s)


def _two_sum_np(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _dd_add_np(ah, al, bh, bl):
    s, e = _two_sum_np(ah, bh)
    e = e + (al + bl)
    t = s + e
    return t, e - (t - s)


@njit(cache=True)
def _prefix_nb(m):
    n0, n1, n2 = m.shape
    ph = np.zeros((n0 + 1, n1 + 1, n2 + 1))
    pl = np.zeros((n0 + 1, n1 + 1, n2 + 1))
    for i in range(n0):
        for j in range(n1):
            sh = 0.0
            sl = 0.0
            for k in range(n2):
                sh, sl = _dd_add(sh, sl, m[i, j, k], 0.0)
                ph[i + 1, j + 1, k + 1] = sh
                pl[i + 1, j + 1, k + 1] = sl
    for i in range(1, n0 + 1):
        for k in range(1, n2 + 1):
            for j in range(1, n1 + 1):
                ph[i, j, k], pl[i, j, k] = _dd_add(ph[i, j, k], pl[i, j, k], ph[i, j - 1, k], pl[i, j - 1, k])
    for j in range(1, n1 + 1):
        for k in range(1, n2 + 1):
            for i in range(1, n0 + 1):
                ph[i, j, k], pl[i, j, k] = _dd_add(ph[i, j, k], pl[i, j, k], ph[i - 1, j, k], pl[i - 1, j, k])
    return ph, pl


def _prefix_np(m):
    n0, n1, n2 = m.shape
    ph = np.zeros((n0 + 1, n1 + 1, n2 + 1))
    pl = np.zeros((n0 + 1, n1 + 1, n2 + 1))
    sh = np.zeros((n0, n1))
    sl = np.zeros((n0, n1))
    for k in range(n2):
        sh, sl = _dd_add_np(sh, sl, m[:, :, k], 0.0)
        ph[1:, 1:, k + 1] = sh
        pl[1:, 1:, k + 1] = sl
    for j in range(1, n1 + 1):
        ph[1:, j, 1:], pl[1:, j, 1:] = _dd_add_np(ph[1:, j, 1:], pl[1:, j, 1:], ph[1:, j - 1, 1:], pl[1:, j - 1, 1:])
    for i in range(1, n0 + 1):
        ph[i, 1:, 1:], pl[i, 1:, 1:] = _dd_add_np(ph[i, 1:, 1:], pl[i, 1:, 1:], ph[i - 1, 1:, 1:], pl[i - 1, 1:, 1:])
    return ph, pl


def prefix_table(masses: np.ndarray):
    """Double-double prefix sums of a cell-mass array: ``(high, low, masses3)``."""
    m = pad3(masses)
    ph, pl = _prefix_nb(m) if use_numba() else _prefix_np(m)
    return ph, pl, m


@njit(cache=True)
def _direct_sum(raw, s0, s1, s2, e0, e1, e2):
    acc = 0.0
    for i in range(s0, e0):
        for j in range(s1, e1):
            for k in range(s2, e2):
                acc += raw[i, j, k]
    return acc


@njit(cache=True)
def _box_sum(ph, pl, raw, s0, s1, s2, e0, e1, e2):
    th, tl = 0.0, 0.0
    th, tl = _dd_add(th, tl, ph[e0, e1, e2], pl[e0, e1, e2])
    th, tl = _dd_add(th, tl, -ph[s0, e1, e2], -pl[s0, e1, e2])
    th, tl = _dd_add(th, tl, -ph[e0, s1, e2], -pl[e0, s1, e2])
    th, tl = _dd_add(th, tl, -ph[e0, e1, s2], -pl[e0, e1, s2])
    th, tl = _dd_add(th, tl, ph[s0, s1, e2], pl[s0, s1, e2])
    th, tl = _dd_add(th, tl, ph[s0, e1, s2], pl[s0, e1, s2])
    th, tl = _dd_add(th, tl, ph[e0, s1, s2], pl[e0, s1, s2])
    th, tl = _dd_add(th, tl, -ph[s0, s1, s2], -pl[s0, s1, s2])
    r = th + tl
    if r < DIRECT_FLOOR * ph[e0, e1, e2]:
        return _direct_sum(raw, s0, s1, s2, e0, e1, e2)
    return r


def box_sum_np(ph, pl, raw, s, e):
    """Vectorized box sums; s and e are (K, 3) integer arrays (end exclusive)."""
    s0, s1, s2 = s[:, 0], s[:, 1], s[:, 2]
    e0, e1, e2 = e[:, 0], e[:, 1], e[:, 2]
    th = np.zeros(s.shape[0])
    tl = np.zeros(s.shape[0])
    for sign, i, j, k in ((1, e0, e1, e2), (-1, s0, e1, e2), (-1, e0, s1, e2), (-1, e0, e1, s2),
                          (1, s0, s1, e2), (1, s0, e1, s2), (1, e0, s1, s2), (-1, s0, s1, s2)):
        th, tl = _dd_add_np(th, tl, sign * ph[i, j, k], sign * pl[i, j, k])
    r = th + tl
    for t in np.nonzero(r < DIRECT_FLOOR * ph[e0, e1, e2])[0]:
        r[t] = raw[s0[t]:e0[t], s1[t]:e1[t], s2[t]:e2[t]].sum()
    return r


# -- maximal scan --------------------------------------------------------------

@njit(cache=True)
def _max_at(p0, p1, p2, fh, fl, fr, gh, gl, gr, mode, expo, n0, n1, n2, d, lo, h, a,
            ms, offptr, offs, c0, c1, c2, c3, c4, c5):
    best = -1.0
    bm = 0
    b0 = 0
    b1 = 0
    b2 = 0
    for li in range(ms.size):
        m = ms[li]
        m0 = m
        m1 = m if d >= 2 else 1
        m2 = m if d >= 3 else 1
        if m0 > n0 or m1 > n1 or m2 > n2:
            continue
        side = m * h
        lo1 = offptr[li] if d >= 2 else 0
        hi1 = offptr[li + 1] if d >= 2 else 1
        lo2 = offptr[li] if d >= 3 else 0
        hi2 = offptr[li + 1] if d >= 3 else 1
        for q0 in range(offptr[li], offptr[li + 1]):
            s0 = p0 - offs[q0]
            if s0 < 0 or s0 + m0 > n0:
                continue
            x0 = lo[0] + h * (s0 + 0.5 * m0)
            for q1 in range(lo1, hi1):
                s1 = p1 - offs[q1] if d >= 2 else 0
                if s1 < 0 or s1 + m1 > n1:
                    continue
                x1 = lo[1] + h * (s1 + 0.5 * m1) if d >= 2 else 0.0
                for q2 in range(lo2, hi2):
                    s2 = p2 - offs[q2] if d >= 3 else 0
                    if s2 < 0 or s2 + m2 > n2:
                        continue
                    x2 = lo[2] + h * (s2 + 0.5 * m2) if d >= 3 else 0.0
                    r = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
                    mval = 1.0 if r <= 1.0 else 1.0 / r
                    if side > a * mval * (1.0 + ADMISSIBLE_RTOL):
                        continue
                    t0 = max(s0, c0)
                    u0 = min(s0 + m0, c3)
                    t1 = max(s1, c1)
                    u1 = min(s1 + m1, c4)
                    t2 = max(s2, c2)
                    u2 = min(s2 + m2, c5)
                    if u0 <= t0 or u1 <= t1 or u2 <= t2:
                        integ = 0.0
                    else:
                        # masses are nonnegative; a negative sum is prefix cancellation
                        integ = max(_box_sum(fh, fl, fr, t0, t1, t2, u0, u1, u2), 0.0)
                    if mode == 0:
                        g = _box_sum(gh, gl, gr, s0, s1, s2, s0 + m0, s1 + m1, s2 + m2)
                        if not g > 0.0:
                            continue
                        val = integ * g ** expo
                    else:
                        val = integ * side ** expo
                    better = val > best
                    if not better and val == best:
                        if m > bm:
                            better = True
                        elif m == bm:
                            if s0 < b0 or (s0 == b0 and (s1 < b1 or (s1 == b1 and s2 < b2))):
                                better = True
                    if better:
                        best = val
                        bm = m
                        b0 = s0
                        b1 = s1
                        b2 = s2
    return best, bm, b0, b1, b2


@njit(cache=True, parallel=True)
def _maximal_nb(fh, fl, fr, gh, gl, gr, mode, expo, shape, d, lo, h, a, ms, offptr, offs, pts, clip,
                out, wm, ws):
    n0, n1, n2 = shape[0], shape[1], shape[2]
    for p in prange(pts.shape[0]):
        best, bm, b0, b1, b2 = _max_at(pts[p, 0], pts[p, 1], pts[p, 2], fh, fl, fr, gh, gl, gr, mode, expo,
                                       n0, n1, n2, d, lo, h, a, ms, offptr, offs,
                                       clip[0], clip[1], clip[2], clip[3], clip[4], clip[5])
        out[p] = best
        wm[p] = bm
        ws[p, 0] = b0
        ws[p, 1] = b1
        ws[p, 2] = b2


def _maximal_np(fh, fl, fr, gh, gl, gr, mode, expo, shape, d, lo, h, a, ms, offptr, offs, pts, clip):
    K = pts.shape[0]
    best = np.full(K, -1.0)
    bm = np.zeros(K, dtype=np.int64)
    bs = np.zeros((K, 3), dtype=np.int64)
    shape = np.asarray(shape)
    for li, m in enumerate(ms):
        mvec = np.array([m if ax < d else 1 for ax in range(3)], dtype=np.int64)
        if np.any(mvec > shape):
            continue
        side = m * h
        o = offs[offptr[li]:offptr[li + 1]]
        grids = [o if ax < d else np.zeros(1, dtype=np.int64) for ax in range(3)]
        for t0 in grids[0]:
            for t1 in grids[1]:
                for t2 in grids[2]:
                    s = pts - np.array([t0, t1, t2])
                    e = s + mvec
                    ok = np.all((s >= 0) & (e <= shape), axis=1)
                    if not ok.any():
                        continue
                    centers = lo + h * (s + 0.5 * mvec)
                    centers[:, d:] = 0.0
                    r = np.sqrt(np.sum(centers ** 2, axis=1))
                    mval = np.where(r <= 1.0, 1.0, 1.0 / np.maximum(r, 1.0))
                    ok &= ~(side > a * mval * (1.0 + ADMISSIBLE_RTOL))
                    if not ok.any():
                        continue
                    idx = np.nonzero(ok)[0]
                    ss, ee = s[idx], e[idx]
                    cs = np.maximum(ss, clip[:3])
                    ce = np.minimum(ee, clip[3:])
                    nonempty = np.all(ce > cs, axis=1)
                    integ = np.zeros(idx.size)
                    if nonempty.any():
                        integ[nonempty] = np.maximum(box_sum_np(fh, fl, fr, cs[nonempty], ce[nonempty]), 0.0)
                    if mode == 0:
                        g = box_sum_np(gh, gl, gr, ss, ee)
                        keep = g > 0.0
                        idx, ss, integ, g = idx[keep], ss[keep], integ[keep], g[keep]
                        val = integ * g ** expo
                    else:
                        val = integ * side ** expo
                    cb, cm, cbs = best[idx], bm[idx], bs[idx]
                    lex = (ss[:, 0] < cbs[:, 0]) | ((ss[:, 0] == cbs[:, 0]) & (
                        (ss[:, 1] < cbs[:, 1]) | ((ss[:, 1] == cbs[:, 1]) & (ss[:, 2] < cbs[:, 2]))))
                    better = (val > cb) | ((val == cb) & ((m > cm) | ((m == cm) & lex)))
                    w = idx[better]
                    best[w] = val[better]
                    bm[w] = m
                    bs[w] = ss[better]
    return best, bm, bs


def ladder_offsets(ms, pitch):
    """CSR table of start offsets per side (in cells).

    The stride is the largest power of two not above ``pitch * m`` so that
    halving the pitch yields a superset; the most centered offset and the
    last one (x in the top cell) are always present.
    """
    ptr = [0]
    flat = []
    for m in ms:
        step = 1 << max(0, int(math.floor(math.log2(max(1.0, pitch * m)) + 1e-12)))
        o = set(range(0, m, step))
        o.add((m - 1) // 2)
        o.add(m - 1)
        flat.extend(sorted(o))
        ptr.append(len(flat))
    return np.asarray(ptr, dtype=np.int64), np.asarray(flat, dtype=np.int64)


def maximal_scan(ftab, gtab, mode, expo, shape3, d, lo3, h, a, ms, pitch, pts, clip=None):
    """Maximum of the normalized cube integral over the cubes containing each point.

    Returns (values, witness_side_cells, witness_start_index); a value of -1
    marks a point without any admissible cube.
    """
    ms = np.asarray(ms, dtype=np.int64)
    offptr, offs = ladder_offsets(ms, pitch)
    pts = np.ascontiguousarray(pts, dtype=np.int64)
    shape3 = np.asarray(shape3, dtype=np.int64)
    if clip is None:
        clip = np.concatenate([np.zeros(3, dtype=np.int64), shape3])
    clip = np.asarray(clip, dtype=np.int64)
    fh, fl, fr = ftab
    gh, gl, gr = gtab if gtab is not None else ftab
    lo3 = np.asarray(lo3, dtype=np.float64)
    if use_numba():
        out = np.empty(pts.shape[0])
        wm = np.empty(pts.shape[0], dtype=np.int64)
        ws = np.empty((pts.shape[0], 3), dtype=np.int64)
        _maximal_nb(fh, fl, fr, gh, gl, gr, int(mode), float(expo), shape3, int(d), lo3, float(h), float(a),
                    ms, offptr, offs, pts, clip, out, wm, ws)
        return out, wm, ws
    return _maximal_np(fh, fl, fr, gh, gl, gr, int(mode), float(expo), shape3, int(d), lo3, float(h),
                       float(a), ms, offptr, offs, pts, clip)


@njit(cache=True, parallel=True)
def _sawyer_nb(fh, fl, fr, gh, gl, gr, expo, shape, d, lo, h, a, ms, offptr, offs, tests, umass, q, out):
    n0, n1, n2 = shape[0], shape[1], shape[2]
    for t in prange(tests.shape[0]):
        s0, s1, s2, m = tests[t, 0], tests[t, 1], tests[t, 2], tests[t, 3]
        e0 = s0 + m
        e1 = s1 + m if d >= 2 else 1
        e2 = s2 + m if d >= 3 else 1
        acc = 0.0
        for i in range(s0, e0):
            for j in range(s1, e1):
                for k in range(s2, e2):
                    u = umass[i, j, k]
                    if u == 0.0:
                        continue
                    best, bm, b0, b1, b2 = _max_at(i, j, k, fh, fl, fr, gh, gl, gr, 0, expo, n0, n1, n2, d,
                                                   lo, h, a, ms, offptr, offs, s0, s1, s2, e0, e1, e2)
                    if best > 0.0:
                        acc += best ** q * u
        out[t] = acc


def sawyer_scan(ftab, gtab, expo, shape3, d, lo3, h, a, ms, pitch, tests, umass3, q):
    """For each test cube (start, m): sum over its cells of M(f chi_Q)^q * u-mass."""
    ms = np.asarray(ms, dtype=np.int64)
    offptr, offs = ladder_offsets(ms, pitch)
    tests = np.ascontiguousarray(tests, dtype=np.int64)
    shape3 = np.asarray(shape3, dtype=np.int64)
    lo3 = np.asarray(lo3, dtype=np.float64)
    fh, fl, fr = ftab
    gh, gl, gr = gtab
    if use_numba():
        out = np.empty(tests.shape[0])
        _sawyer_nb(fh, fl, fr, gh, gl, gr, float(expo), shape3, int(d), lo3, float(h), float(a), ms, offptr,
                   offs, tests, umass3, float(q), out)
        return out
    out = np.empty(tests.shape[0])
    for t, (s0, s1, s2, m) in enumerate(tests):
        start = np.array([s0, s1, s2])
        mvec = np.array([m if ax < d else 1 for ax in range(3)])
        axes = [np.arange(start[ax], start[ax] + mvec[ax]) for ax in range(3)]
        pts = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        u = umass3[pts[:, 0], pts[:, 1], pts[:, 2]]
        keep = u != 0.0
        pts, u = pts[keep], u[keep]
        if pts.shape[0] == 0:
            out[t] = 0.0
            continue
        clip = np.concatenate([start, start + mvec])
        best, _, _ = _maximal_np(fh, fl, fr, gh, gl, gr, 0, float(expo), shape3, int(d), lo3, float(h),
                                 float(a), ms, offptr, offs, pts, clip)
        pos = best > 0.0
        out[t] = float(np.sum(best[pos] ** q * u[pos]))
    return out


# -- fractional integral -----------------------------------------------------------

@njit(cache=True)
def _erf_diff_nb(lo, hi):
    m = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)
    if (abs(m) + 1.0) * r <= NARROW:
        acc = 0.0
        for i in range(_GL_X.size):
            t = m + r * _GL_X[i]
            acc += _GL_W[i] * math.exp(-t * t)
        return 2.0 / math.sqrt(math.pi) * r * acc
    if lo >= 0.5:
        return math.erfc(lo) - math.erfc(hi)
    if hi <= -0.5:
        return math.erfc(-hi) - math.erfc(-lo)
    return math.erf(hi) - math.erf(lo)


@njit(cache=True)
def _gauss_cube_nb(x0, x1, x2, d, s):
    g = 0.5 * _erf_diff_nb(x0 - 0.5 * s, x0 + 0.5 * s)
    if d >= 2:
        g *= 0.5 * _erf_diff_nb(x1 - 0.5 * s, x1 + 0.5 * s)
    if d >= 3:
        g *= 0.5 * _erf_diff_nb(x2 - 0.5 * s, x2 + 0.5 * s)
    return g


@njit(cache=True)
def _window(R, h):
    w = R / (2.0 * h)
    return int(math.ceil(-w)), int(math.ceil(w)) - 1


@njit(cache=True, parallel=True)
def _fracint_nb(fm, d, lo, h, a, expo, euclid, out):
    n0, n1, n2 = fm.shape
    N = n0 * n1 * n2
    for p in prange(N):
        i0 = p // (n1 * n2)
        i1 = (p // n2) % n1
        i2 = p % n2
        x0 = lo[0] + h * (i0 + 0.5)
        x1 = lo[1] + h * (i1 + 0.5) if d >= 2 else 0.0
        x2 = lo[2] + h * (i2 + 0.5) if d >= 3 else 0.0
        r = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
        R = a * (1.0 if r <= 1.0 else 1.0 / r)
        dlo, dhi = _window(R, h)
        rmax = max(-dlo, dhi)
        if euclid:
            kern = np.empty(d * rmax * rmax + 1)
            kern[0] = _gauss_cube_nb(x0, x1, x2, d, h * math.sqrt(d)) ** expo
            for qq in range(1, kern.size):
                kern[qq] = _gauss_cube_nb(x0, x1, x2, d, 2.0 * h * math.sqrt(qq)) ** expo
        else:
            kern = np.empty(rmax + 1)
            kern[0] = _gauss_cube_nb(x0, x1, x2, d, h) ** expo
            for rr in range(1, rmax + 1):
                kern[rr] = _gauss_cube_nb(x0, x1, x2, d, 2.0 * h * rr) ** expo
        lo1 = dlo if d >= 2 else 0
        hi1 = dhi if d >= 2 else 0
        lo2 = dlo if d >= 3 else 0
        hi2 = dhi if d >= 3 else 0
        acc = 0.0
        for a0 in range(dlo, dhi + 1):
            j0 = i0 + a0
            if j0 < 0 or j0 >= n0:
                continue
            for a1 in range(lo1, hi1 + 1):
                j1 = i1 + a1
                if j1 < 0 or j1 >= n1:
                    continue
                for a2 in range(lo2, hi2 + 1):
                    j2 = i2 + a2
                    if j2 < 0 or j2 >= n2:
                        continue
                    v = fm[j0, j1, j2]
                    if v == 0.0:
                        continue
                    if euclid:
                        kk = kern[a0 * a0 + a1 * a1 + a2 * a2]
                    else:
                        kk = kern[max(abs(a0), max(abs(a1), abs(a2)))]
                    acc += v * kk
        out[i0, i1, i2] = acc


def _gauss_cube_np(xs, d, s):
    g = np.ones(xs.shape[0])
    for ax in range(d):
        g = g * (0.5 * np.asarray(erf_diff(xs[:, ax] - 0.5 * s, xs[:, ax] + 0.5 * s)))
    return g


def _fracint_np(fm, d, lo, h, a, expo, euclid):
    n = fm.shape
    idx = np.stack([g.ravel() for g in np.meshgrid(*[np.arange(k) for k in n], indexing="ij")], axis=1)
    xs = lo + h * (idx + 0.5)
    xs[:, d:] = 0.0
    r = np.sqrt(np.sum(xs ** 2, axis=1))
    R = a * np.where(r <= 1.0, 1.0, 1.0 / np.maximum(r, 1.0))
    w = R / (2.0 * h)
    dlo = np.ceil(-w).astype(np.int64)
    dhi = np.ceil(w).astype(np.int64) - 1
    gmax = int(max(-dlo.min(), dhi.max()))
    rng = [range(-gmax, gmax + 1) if ax < d else range(0, 1) for ax in range(3)]
    fl = fm.ravel()
    acc = np.zeros(idx.shape[0])
    cache = {}
    for a0 in rng[0]:
        for a1 in rng[1]:
            for a2 in rng[2]:
                delta = np.array([a0, a1, a2])
                j = idx + delta
                ok = np.all((j >= 0) & (j < np.asarray(n)), axis=1)
                dd = delta[:d]
                ok &= np.all((dd >= dlo[:, None]) & (dd <= dhi[:, None]), axis=1)
                if not ok.any():
                    continue
                if euclid:
                    key = int(a0 * a0 + a1 * a1 + a2 * a2)
                    s = h * math.sqrt(d) if key == 0 else 2.0 * h * math.sqrt(key)
                else:
                    key = int(max(abs(a0), abs(a1), abs(a2)))
                    s = h if key == 0 else 2.0 * h * key
                if key not in cache:
                    cache[key] = _gauss_cube_np(xs, d, s) ** expo
                kern = cache[key]
                flat = (j[ok, 0] * n[1] + j[ok, 1]) * n[2] + j[ok, 2]
                acc[ok] += fl[flat] * kern[ok]
    return acc.reshape(n)


def fracint_sum(fmass3, d, lo3, h, a, expo, euclid=False):
    lo3 = np.asarray(lo3, dtype=np.float64)
    fm = np.ascontiguousarray(fmass3, dtype=np.float64)
    if use_numba():
        out = np.empty(fm.shape)
        _fracint_nb(fm, int(d), lo3, float(h), float(a), float(expo), bool(euclid), out)
        return out
    return _fracint_np(fm, int(d), lo3, float(h), float(a), float(expo), bool(euclid))
