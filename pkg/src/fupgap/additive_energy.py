"""Additive energy of lattice sets and weighted leaf sets, and its decay exponents."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ResourceError, ValidationError
from .fractal_sets import FitReport, IntervalCover, fit_line
from .hyperbolic_geometry import stereo_G_angle
from .regularity import LatticeSet, snap_to_lattice

SPARSE_RATIO = 64
MAX_SPAN = 2 * 10**8


@dataclass(frozen=True)
class EnergyResult:
    alpha: float
    count: int
    energy_def15: float
    energy_def62: float
    method: str
    size: int = 0

    def to_row(self) -> tuple:
        return (self.alpha, self.count, self.energy_def15, self.energy_def62, self.method)


def _window_sum(hist: np.ndarray, tol: int):
    """Σ_{|k|≤tol} Σ_s h(s) h(s+k)."""
    n = len(hist)
    total = hist @ hist
    for k in range(1, min(tol, n - 1) + 1):
        total = total + 2 * (hist[:-k] @ hist[k:])
    return total


def _sparse_count(x: np.ndarray, tol: int) -> int:
    s = (x[:, None] + x[None, :]).ravel()
    vals, counts = np.unique(s, return_counts=True)
    total = int(counts @ counts)
    for k in range(1, tol + 1):
        j = np.searchsorted(vals, vals + k)
        ok = j < len(vals)
        ok[ok] = vals[j[ok]] == vals[ok] + k
        total += 2 * int(counts[ok] @ counts[j[ok]])
    return total


def energy_count(A: LatticeSet | Sequence[int], tol: int = 1) -> int:
    """Ordered quadruples of A with |a₁ − a₂ + a₃ − a₄| ≤ tol (lattice units)."""
    x = A.offsets if isinstance(A, LatticeSet) else np.unique(np.asarray(A, dtype=np.int64))
    if len(x) == 0:
        raise ValidationError("A must be nonempty")
    if tol < 0:
        raise ValidationError("tol must be non-negative")
    x = x - x[0]
    span = int(x[-1])
    if span / len(x) ** 2 > SPARSE_RATIO:
        return _sparse_count(x, tol)
    if 2 * span + 1 > MAX_SPAN:
        raise ResourceError("sum histogram span too large")
    return int(_window_sum(_kernels.pair_sum_histogram(x), tol))


def energy_result(A: LatticeSet, tol: int = 1) -> EnergyResult:
    """Count plus both normalisations (uniform weights 1/|A| for the measure form)."""
    n = len(A)
    c = energy_count(A, tol)
    method = "sorted-pairs" if A.span / n**2 > SPARSE_RATIO else "histogram"
    return EnergyResult(A.alpha, c, float(c), c / float(n) ** 4, method, n)


def outer_tolerance(alpha: float, leaf_width: float, outer: bool = True) -> int:
    """Largest m with m·w < α (+ 4w when ``outer``)."""
    t = alpha / leaf_width + (4 if outer else 0)
    return int(math.ceil(t - 1e-9)) - 1


def energy_measure(
    positions: np.ndarray,
    weights: np.ndarray,
    alpha: float,
    leaf_width: float,
    outer: bool = True,
) -> float:
    """μ⁴ of quadruples with |x₁ − x₂ + x₃ − x₄| < α over weighted leaves.

    Leaf representatives sit on the grid ``leaf_width·ℤ``. With ``outer`` the
    window is widened by 4·leaf_width so the result bounds the continuous
    quantity from above.
    """
    positions = np.asarray(positions, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise ValidationError("weights must be finite and non-negative")
    if len(positions) != len(weights) or len(positions) == 0:
        raise ValidationError("need matching nonempty positions and weights")
    k = np.rint(positions / leaf_width).astype(np.int64)
    if np.max(np.abs(k * leaf_width - positions)) > 1e-6 * leaf_width:
        raise ValidationError("positions must lie on the leaf grid")
    k -= k.min()
    order = np.argsort(k, kind="stable")
    k, w = k[order], weights[order]
    tol = outer_tolerance(alpha, leaf_width, outer)
    if tol < 0:
        return 0.0
    hist = _kernels.weighted_pair_histogram(k, w)
    return float(_window_sum(hist, tol))


def cantor_leaf_energy(base: int, digits, depth: int, alpha: float | None = None, outer: bool = True) -> float:
    """Energy of the depth-d cylinders of a digit set with equal weights."""
    from .fractal_sets import CantorSpec, cantor_left_endpoints

    spec = CantorSpec(base, digits, depth)
    k = cantor_left_endpoints(spec)
    w = float(base) ** -depth
    alpha = w if alpha is None else alpha
    return energy_measure(k * w, np.full(len(k), 1.0 / len(k)), alpha, w, outer)


def energy_exponent(results: Sequence, drop_coarsest: int = 2, values: str = "energy_def62") -> FitReport:
    """Slope of log(energy) against log(α), skipping the coarsest scales."""
    if len(results) < 4:
        raise ValidationError("need at least 4 scales")
    if isinstance(results[0], EnergyResult):
        alphas = np.array([r.alpha for r in results], dtype=float)
        vals = np.array([getattr(r, values) for r in results], dtype=float)
    else:
        alphas = np.array([r[0] for r in results], dtype=float)
        vals = np.array([r[1] for r in results], dtype=float)
    d = np.diff(alphas)
    if not (np.all(d < 0) or np.all(d > 0)):
        raise ValidationError("scales must be strictly monotone")
    order = np.argsort(-alphas)
    alphas, vals = alphas[order][drop_coarsest:], vals[order][drop_coarsest:]
    return fit_line(np.log(alphas), np.log(vals))


def project_cover(lam: IntervalCover, y0: float, C1: float) -> IntervalCover:
    """Image of a circle cover under the projection based at angle ``y0``, cut to [−C₁, C₁].

    An arc containing the base point is excised.
    """
    if lam.ambient != "circle":
        raise ValidationError("projection needs a circle cover")
    s = np.mod(lam.lo - y0, 2 * math.pi)
    e = s + lam.lengths()
    bad = (s <= 0) | (e >= 2 * math.pi)
    if np.any(bad):
        warnings.warn("arc containing the base point excised from the projection", stacklevel=2)
        s, e = s[~bad], e[~bad]
    # cot(φ/2) is decreasing on (0, 2π): the image of [s, e] is [G(e), G(s)]
    lo = stereo_G_angle(0.0, e)
    hi = stereo_G_angle(0.0, s)
    keep = (hi >= -C1) & (lo <= C1)
    iv = np.stack([np.maximum(lo[keep], -C1), np.minimum(hi[keep], C1)], axis=1)
    return IntervalCover.from_unsorted(iv, lam.resolution, "line")


def projected_energy(lam: IntervalCover, y0: float, C1: float, alpha: float, tol: int = 1) -> EnergyResult:
    """Lattice energy of the projected set near the base point ``y0`` (an angle)."""
    if not C1 > 0:
        raise ValidationError("C1 must be positive")
    Y = project_cover(lam, y0, C1)
    if len(Y) == 0:
        raise ValidationError("projected set is empty inside the window")
    return energy_result(snap_to_lattice(Y, alpha), tol)


def projected_energy_sup(lam: IntervalCover, C1: float, alpha: float, tol: int = 1, max_bases: int = 64) -> tuple:
    """Largest projected energy over base points at (a subsample of) arc midpoints."""
    mids = lam.midpoints()
    if len(mids) > max_bases:
        mids = mids[np.linspace(0, len(mids) - 1, max_bases).round().astype(int)]
    best = None
    for y0 in mids:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r = projected_energy(lam, float(y0), C1, alpha, tol)
        if best is None or r.count > best[1].count:
            best = (float(y0), r)
    return best
