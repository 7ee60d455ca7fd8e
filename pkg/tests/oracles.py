"""Slow, obviously-correct reference implementations used only by the tests."""

import itertools

import numpy as np

from fupgap.fractal_sets import merge_intervals


def energy_bruteforce(a, tol):
    """O(n^4) count of quadruples with |a1 - a2 + a3 - a4| <= tol."""
    a = np.asarray(a, dtype=np.int64)
    s = a[:, None, None, None] - a[None, :, None, None] + a[None, None, :, None] - a[None, None, None, :]
    return int(np.sum(np.abs(s) <= tol))


def energy_cubic(a, tol):
    """O(n^3) count: for every (a1, a2, a3) count the admissible a4 by membership."""
    members = set(int(v) for v in a)
    total = 0
    for x, y, z in itertools.product(members, repeat=3):
        c = x - y + z
        total += sum((c + k) in members for k in range(-tol, tol + 1))
    return total


def separated_bruteforce(points, alpha):
    """Largest subset with all pairwise gaps > alpha, by trying every subset."""
    pts = sorted(points)
    best = 0
    for mask in range(1 << len(pts)):
        chosen = [p for i, p in enumerate(pts) if mask >> i & 1]
        if all(b - a > alpha for a, b in zip(chosen, chosen[1:])):
            best = max(best, len(chosen))
    return best


def longest_ap_bruteforce(A, eps):
    """Longest AP with |P ∩ A| >= eps |P|, enumerating starts, steps and lengths."""
    A = sorted(set(A))
    S = set(A)
    lo, hi = A[0], A[-1]
    R = hi - lo
    pad = int(np.floor(1 / eps)) + 1
    best = int(np.floor(1 / eps + 1e-12))
    for t in range(1, R + 1):
        maxlen = (R // t + 1) * pad + pad
        for start in range(lo - maxlen * t, hi + 1):
            hits = 0
            for L in range(1, maxlen + 1):
                hits += (start + (L - 1) * t) in S
                if hits >= eps * L - 1e-12 and L > best:
                    best = L
    return best


def pruned_triples_bruteforce(T, X):
    """Leaf triples of the pruned cube, testing every same-height triple directly."""
    retained = {(0, 0, 0)}
    lo, hi = T.lo, T.hi
    for h in range(1, T.N + 1):
        r = float(T.M) ** -h
        nb = merge_intervals(X.intervals + np.array([-r, r]))
        ids = T.level(h).tolist()
        nxt = set()
        for t in itertools.product(ids, repeat=3):
            if tuple(int(p) for p in T.parent[list(t)]) not in retained:
                continue
            a = lo[t[0]] - hi[t[1]] + lo[t[2]]
            b = hi[t[0]] - lo[t[1]] + hi[t[2]]
            if any(a <= d and c < b for c, d in nb):
                nxt.add(t)
        retained = nxt
    return retained
