"""Hot loops with two interchangeable backends.

Every kernel exists as a plain-loop version compiled with numba and as a
vectorised numpy version. ``FUPGAP_BACKEND=numpy`` (or a missing numba
install) selects the numpy path at import time; :func:`use_backend` switches
at run time, which the tests use to check that both paths agree.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

JIT_OPTIONS = {"nogil": True, "cache": True}

_backend = os.environ.get("FUPGAP_BACKEND", "numba").strip().lower()
if _backend not in ("numba", "numpy") or not _HAVE_NUMBA:
    _backend = "numpy"


def backend() -> str:
    return _backend


def use_backend(name: str) -> str:
    """Select ``"numba"`` or ``"numpy"``; returns the previous choice."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _backend = _backend, name
    return prev


def set_threads(n: int) -> None:
    if _HAVE_NUMBA and n >= 1:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------------------
# pair-sum histograms


def _pair_hist_np(x, size):
    out = np.zeros(size, dtype=np.int64)
    step = max(1, 2_000_000 // max(len(x), 1))
    for i in range(0, len(x), step):
        s = (x[i : i + step, None] + x[None, :]).ravel()
        out += np.bincount(s, minlength=size)[:size]
    return out


def _wpair_hist_np(x, w, size):
    out = np.zeros(size, dtype=np.float64)
    step = max(1, 2_000_000 // max(len(x), 1))
    for i in range(0, len(x), step):
        s = (x[i : i + step, None] + x[None, :]).ravel()
        ww = (w[i : i + step, None] * w[None, :]).ravel()
        out += np.bincount(s, weights=ww, minlength=size)[:size]
    return out


if _HAVE_NUMBA:

    @njit(**JIT_OPTIONS)
    def _pair_hist_nb(x, size):
        out = np.zeros(size, dtype=np.int64)
        n = x.shape[0]
        for i in range(n):
            xi = x[i]
            for j in range(n):
                out[xi + x[j]] += 1
        return out

    @njit(**JIT_OPTIONS)
    def _wpair_hist_nb(x, w, size):
        out = np.zeros(size, dtype=np.float64)
        n = x.shape[0]
        for i in range(n):
            for j in range(n):
                out[x[i] + x[j]] += w[i] * w[j]
        return out


def pair_sum_histogram(x: np.ndarray) -> np.ndarray:
    """h[s] = #{(i, j): x[i] + x[j] = s} for non-negative integer ``x``."""
    x = np.ascontiguousarray(x, dtype=np.int64)
    size = 2 * int(x.max()) + 1 if len(x) else 0
    if _backend == "numba":
        return _pair_hist_nb(x, size)
    return _pair_hist_np(x, size)


def weighted_pair_histogram(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.int64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    size = 2 * int(x.max()) + 1 if len(x) else 0
    if _backend == "numba":
        return _wpair_hist_nb(x, w, size)
    return _wpair_hist_np(x, w, size)


# ---------------------------------------------------------------------------
# triple hit test: does [a, b) meet the union of closed [c_k, d_k]?
# (c, d) sorted and disjoint.


def _hits_np(a, b, c, d):
    k = np.searchsorted(d, a, side="left")  # first interval with d >= a
    ok = k < len(c)
    kk = np.minimum(k, len(c) - 1)
    return ok & (c[kk] < b)


if _HAVE_NUMBA:

    @njit(**JIT_OPTIONS)
    def _hits_nb(a, b, c, d):
        out = np.zeros(a.shape[0], dtype=np.bool_)
        m = c.shape[0]
        for i in range(a.shape[0]):
            lo, hi = 0, m
            while lo < hi:
                mid = (lo + hi) // 2
                if d[mid] < a[i]:
                    lo = mid + 1
                else:
                    hi = mid
            out[i] = lo < m and c[lo] < b[i]
        return out


def interval_hits(a, b, c, d) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    d = np.ascontiguousarray(d, dtype=np.float64)
    if len(c) == 0:
        return np.zeros(len(a), dtype=bool)
    if _backend == "numba":
        return _hits_nb(a, b, c, d)
    return _hits_np(a, b, c, d)


# ---------------------------------------------------------------------------
# longest dense arithmetic progression
#
# Along one residue class the hits sit at indices p_0 < p_1 < ...; a window
# covering hits a..b has length p_b - p_a + 1 and may be padded up to
# floor((b - a + 1) / eps). With q_i = eps*p_i - i the window is admissible
# iff q_b - q_a <= 1 - eps, so for every b we want the smallest a with
# q_a >= q_b - (1 - eps); prefix maxima make that a binary search.


def _ap_np(x, eps, max_step):
    best = (int(np.floor(1.0 / eps + 1e-12)), int(x[0]), 1)
    n = len(x)
    slack = 1.0 - eps + 1e-12
    for t in range(1, max_step + 1):
        r = x % t
        order = np.argsort(r, kind="stable")
        xs = x[order]
        rs = r[order]
        idx = (xs - rs) // t
        seg = np.concatenate(([0], np.cumsum(rs[1:] != rs[:-1])))
        pos = np.arange(n) - np.searchsorted(rs, rs, side="left")
        q = eps * idx - pos
        big = float(eps * (x.max() // t + 1) + n + 2)
        qo = q + seg * 2 * big
        pm = np.maximum.accumulate(qo)
        a = np.searchsorted(pm, qo - slack, side="left")
        hits = np.arange(n) - a + 1
        lengths = np.floor(hits / eps + 1e-12).astype(np.int64)
        j = int(np.argmax(lengths))
        if lengths[j] > best[0]:
            best = (int(lengths[j]), int(xs[a[j]]), t)
    return best


if _HAVE_NUMBA:

    @njit(**JIT_OPTIONS)
    def _ap_nb(x, eps, max_step):
        n = x.shape[0]
        best_len = int(np.floor(1.0 / eps + 1e-12))
        best_start = x[0]
        best_step = 1
        slack = 1.0 - eps + 1e-12
        q = np.empty(n)
        pm = np.empty(n)
        for t in range(1, max_step + 1):
            r = x % t
            order = np.argsort(r, kind="mergesort")
            seg0 = 0
            for i in range(n):
                xi = x[order[i]]
                ri = r[order[i]]
                if i > 0 and ri != r[order[i - 1]]:
                    seg0 = i
                m = i - seg0
                q[i] = eps * ((xi - ri) // t) - m
                pm[i] = q[i] if m == 0 or q[i] > pm[i - 1] else pm[i - 1]
                target = q[i] - slack
                lo, hi = seg0, i
                while lo < hi:
                    mid = (lo + hi) // 2
                    if pm[mid] < target:
                        lo = mid + 1
                    else:
                        hi = mid
                length = int(np.floor((i - lo + 1) / eps + 1e-12))
                if length > best_len:
                    best_len = length
                    best_step = t
                    best_start = x[order[lo]]
        return best_len, best_start, best_step


def longest_dense_progression(x: np.ndarray, eps: float, max_step: int):
    """(length, start, step) of a longest AP P with |P ∩ x| >= eps |P|."""
    x = np.ascontiguousarray(np.sort(x), dtype=np.int64)
    if _backend == "numba":
        n, s, t = _ap_nb(x, float(eps), int(max_step))
        return int(n), int(s), int(t)
    return _ap_np(x, float(eps), int(max_step))


# ---------------------------------------------------------------------------
# oscillatory quadrature matrix on a circle grid


def _smoothstep_np(t, k):
    t = np.clip(t, 0.0, 1.0)
    acc = np.zeros_like(t)
    coef = 1.0
    for j in range(k + 1):
        if j > 0:
            coef = coef * (k + j) / j
        acc += coef * (1.0 - t) ** j
    return t ** (k + 1) * acc


def chi_profile_np(d, inner, plo, phi, outer, k):
    up = _smoothstep_np((d - inner) / (plo - inner), k)
    down = 1.0 - _smoothstep_np((d - phi) / (outer - phi), k)
    return np.where(d <= plo, up, np.where(d >= phi, down, 1.0))


def _fup_dense_np(theta, h, chi, scale):
    out = np.empty((len(theta), len(theta)), dtype=np.complex128)
    step = max(1, 4_000_000 // max(len(theta), 1))
    for i in range(0, len(theta), step):
        d = 2.0 * np.abs(np.sin(0.5 * (theta[i : i + step, None] - theta[None, :])))
        amp = chi_profile_np(d, *chi)
        with np.errstate(divide="ignore"):
            ph = (2.0 / h) * np.log(d)
        ph[amp == 0.0] = 0.0
        out[i : i + step] = scale * amp * np.exp(1j * ph)
    return out


if _HAVE_NUMBA:

    @njit(**JIT_OPTIONS)
    def _smoothstep_nb(t, k):
        if t <= 0.0:
            return 0.0
        if t >= 1.0:
            return 1.0
        acc = 0.0
        coef = 1.0
        for j in range(k + 1):
            if j > 0:
                coef = coef * (k + j) / j
            acc += coef * (1.0 - t) ** j
        return t ** (k + 1) * acc

    @njit(**JIT_OPTIONS)
    def _chi_nb(d, inner, plo, phi, outer, k):
        if d <= plo:
            return _smoothstep_nb((d - inner) / (plo - inner), k)
        if d >= phi:
            return 1.0 - _smoothstep_nb((d - phi) / (outer - phi), k)
        return 1.0

    @njit(parallel=True, **JIT_OPTIONS)
    def _fup_dense_nb(theta, h, inner, plo, phi, outer, k, scale):
        n = theta.shape[0]
        out = np.zeros((n, n), dtype=np.complex128)
        for i in prange(n):
            for j in range(n):
                d = 2.0 * abs(np.sin(0.5 * (theta[i] - theta[j])))
                a = _chi_nb(d, inner, plo, phi, outer, k)
                if a != 0.0:
                    ph = (2.0 / h) * np.log(d)
                    out[i, j] = scale * a * (np.cos(ph) + 1j * np.sin(ph))
        return out


def fup_dense(theta, h, chi, scale) -> np.ndarray:
    """scale * chi(|y_j - y_k|) * |y_j - y_k|^{2i/h} over grid angles."""
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    chi = tuple(float(v) for v in chi[:4]) + (int(chi[4]),)
    if _backend == "numba":
        return _fup_dense_nb(theta, float(h), *chi, float(scale))
    return _fup_dense_np(theta, float(h), chi, float(scale))


# ---------------------------------------------------------------------------
# greedy count of points pairwise more than alpha apart in a union of
# sorted disjoint closed intervals (greedy is optimal on a line)


def _separated_py(lo, hi, alpha):
    count = 0
    last = -np.inf
    for i in range(lo.shape[0]):
        a, b = lo[i], hi[i]
        if a > last + alpha:
            q = (b - a) / alpha
            k = max(1, int(np.ceil(q - 1e-12 * max(1.0, q))))
            start = a
        else:
            start = last + alpha
            if not start < b:
                continue
            q = (b - start) / alpha
            k = int(np.ceil(q - 1e-12 * max(1.0, q)))
            if k < 1:
                continue
        count += k
        last = start + (k - 1) * alpha
    return count


if _HAVE_NUMBA:
    _separated_nb = njit(**JIT_OPTIONS)(_separated_py)


def separated_greedy(lo, hi, alpha) -> int:
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    if _backend == "numba":
        return int(_separated_nb(lo, hi, float(alpha)))
    return int(_separated_py(lo, hi, float(alpha)))
