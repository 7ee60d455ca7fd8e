"""Time each hot kernel under the numba and numpy backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Every kernel is warmed up once per backend (so JIT compilation is excluded),
results of the two paths are compared, and the best of ``--repeat`` runs is
reported.
"""

from __future__ import annotations

import argparse
import json
import math
import time
import warnings

import numpy as np

from fupgap import _kernels
from fupgap.fractal_sets import CantorSpec, cantor_left_endpoints, cantor_on_circle, gen_cantor
from fupgap.fup_estimator import ChiCutoff, build_fup_matrix

warnings.filterwarnings("ignore", message="The TBB threading layer")


def _cases():
    rng = np.random.default_rng(0)
    cantor = cantor_left_endpoints(CantorSpec(3, (0, 2), 9))
    w = rng.random(len(cantor))
    iv = gen_cantor(CantorSpec(3, (0, 2), 12)).intervals
    a = np.sort(rng.random(20_000))
    b = a + 1e-4
    F = build_fup_matrix(cantor_on_circle(10), 2.0**-9)
    grid = F.grid
    scale = (2 * math.pi * F.h) ** -0.5 * F.dtheta
    ap_set = cantor_left_endpoints(CantorSpec(3, (0, 2), 7))
    return {
        "pair_sum_histogram (n=512)": lambda: _kernels.pair_sum_histogram(cantor),
        "weighted_pair_histogram (n=512)": lambda: _kernels.weighted_pair_histogram(cantor, w),
        "interval_hits (20k queries, 4096 arcs)": lambda: _kernels.interval_hits(a, b, iv[:, 0], iv[:, 1]),
        "separated_greedy (4096 arcs)": lambda: _kernels.separated_greedy(iv[:, 0], iv[:, 1], 3.0**-14),
        f"fup_dense ({len(grid)}x{len(grid)})": lambda: _kernels.fup_dense(grid, F.h, ChiCutoff().params, scale),
        "longest_dense_progression (n=128, eps=1/2)": lambda: _kernels.longest_dense_progression(
            ap_set, 0.5, int(ap_set.max())
        ),
    }


def _best(fn, repeat):
    out = fn()
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _same(x, y) -> bool:
    if isinstance(x, tuple):
        return all(_same(p, q) for p, q in zip(x, y))
    return bool(np.allclose(np.asarray(x), np.asarray(y), rtol=1e-10, atol=1e-12))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)
    if not _kernels._HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rows = []
    prev = _kernels.backend()
    try:
        for name, fn in _cases().items():
            timings, outs = {}, {}
            for be in ("numba", "numpy"):
                _kernels.use_backend(be)
                timings[be], outs[be] = _best(fn, args.repeat)
            rows.append(
                {
                    "kernel": name,
                    "numba_s": timings["numba"],
                    "numpy_s": timings["numpy"],
                    "speedup": timings["numpy"] / timings["numba"],
                    "agree": _same(outs["numba"], outs["numpy"]),
                }
            )
    finally:
        _kernels.use_backend(prev)
    width = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba [ms]':>11}  {'numpy [ms]':>11}  {'speedup':>8}  agree")
    for r in rows:
        print(
            f"{r['kernel']:<{width}}  {1e3 * r['numba_s']:>11.3f}  {1e3 * r['numpy_s']:>11.3f}"
            f"  {r['speedup']:>8.1f}  {r['agree']}"
        )
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
