"""Regularity diagnostics: separated counts, neighbourhoods, constants, progressions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import RegularityViolation, ResourceError, ValidationError
from .fractal_sets import IntervalCover, fit_line, merge_intervals

AP_RANGE_CAP = 10**6


@dataclass(frozen=True, eq=False)
class LatticeSet:
    """Points ``origin + alpha * offsets`` with sorted distinct non-negative offsets."""

    alpha: float
    offsets: np.ndarray
    origin: float = 0.0

    def __post_init__(self):
        off = np.asarray(self.offsets, dtype=np.int64).ravel()
        if not self.alpha > 0:
            raise ValidationError("lattice spacing must be positive")
        if len(off) and (off[0] < 0 or np.any(np.diff(off) <= 0)):
            raise ValidationError("offsets must be strictly increasing and non-negative")
        object.__setattr__(self, "offsets", off)

    def __len__(self) -> int:
        return len(self.offsets)

    def __eq__(self, other):
        return (
            isinstance(other, LatticeSet)
            and self.alpha == other.alpha
            and self.origin == other.origin
            and np.array_equal(self.offsets, other.offsets)
        )

    @property
    def points(self) -> np.ndarray:
        return self.origin + self.alpha * self.offsets

    @property
    def span(self) -> int:
        return int(self.offsets[-1] - self.offsets[0]) if len(self) else 0

    @classmethod
    def from_integers(cls, values, alpha: float = 1.0) -> "LatticeSet":
        v = np.unique(np.asarray(values, dtype=np.int64))
        if len(v) == 0:
            return cls(alpha, v, 0.0)
        return cls(alpha, v - v[0], float(v[0]) * alpha)


def snap_to_lattice(cover: IntervalCover, alpha: float) -> LatticeSet:
    """Lattice points kα whose rounding cell [kα − α/2, kα + α/2] meets the cover."""
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    if len(cover) == 0:
        return LatticeSet(alpha, np.zeros(0, dtype=np.int64), 0.0)
    k0 = np.ceil(cover.lo / alpha - 0.5 - 1e-9).astype(np.int64)
    k1 = np.floor(cover.hi / alpha + 0.5 + 1e-9).astype(np.int64)
    n = k1 - k0 + 1
    if n.sum() > 5 * 10**7:
        raise ResourceError("lattice set too large; use a coarser alpha")
    ks = np.repeat(k0, n) + (np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n))
    ks = np.unique(ks)
    return LatticeSet(alpha, ks - ks[0], float(ks[0]) * alpha)


# ---------------------------------------------------------------------------


def _as_intervals(X) -> np.ndarray:
    if isinstance(X, LatticeSet):
        p = X.points
        return np.stack([p, p], axis=1)
    if isinstance(X, IntervalCover):
        return X.intervals
    iv = np.asarray(X, dtype=float)
    if iv.ndim == 1:
        iv = np.stack([np.sort(iv), np.sort(iv)], axis=1)
    return merge_intervals(iv)


def separated_count(X, alpha: float) -> int:
    """Largest number of points of X pairwise more than ``alpha`` apart."""
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    iv = _as_intervals(X)
    if len(iv) == 0:
        return 0
    return _kernels.separated_greedy(iv[:, 0], iv[:, 1], alpha)


def neighborhood_measure(X: IntervalCover, alpha: float, clip: bool = False) -> float:
    """Lebesgue measure of the closed α-neighbourhood of X.

    With ``clip`` the neighbourhood is intersected with the ambient domain.
    """
    if alpha < 0:
        raise ValidationError("alpha must be non-negative")
    if len(X) == 0:
        return 0.0
    iv = X.intervals + np.array([-alpha, alpha])
    if X.ambient == "circle":
        m = merge_intervals(iv)
        total = float((m[:, 1] - m[:, 0]).sum())
        # overlap between the last arc and the first one across angle 0
        wrap = m[-1, 1] - (m[0, 0] + 2 * math.pi)
        if len(m) > 1 and wrap > 0:
            total -= min(wrap, m[0, 1] - m[0, 0])
        return min(total, 2 * math.pi)
    if clip and X.ambient == "unit_interval":
        iv = np.clip(iv, 0.0, 1.0)
    m = merge_intervals(iv)
    return float((m[:, 1] - m[:, 0]).sum())


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    delta: float
    c_lower: float
    c_upper: float
    samples: int
    fit_slope: float = float("nan")
    fit_residual: float = float("nan")

    @property
    def constant(self) -> float:
        """Smallest C with C⁻¹ ≤ ratio ≤ C over the samples."""
        return max(self.c_upper, 1.0 / self.c_lower)

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "c_lower": self.c_lower,
            "c_upper": self.c_upper,
            "samples": self.samples,
        }


def sample_centers(X: IntervalCover, seed: int = 42, stride: int = 16, n_random: int = 64) -> np.ndarray:
    """Every ``stride``-th left endpoint plus uniformly random members of X."""
    rng = np.random.default_rng(seed)
    fixed = X.lo[::stride]
    L = X.lengths()
    if L.sum() > 0:
        idx = rng.choice(len(X), size=n_random, p=L / L.sum())
    else:
        idx = rng.integers(0, len(X), size=n_random)
    rand = X.lo[idx] + rng.random(n_random) * L[idx]
    return np.concatenate([fixed, rand])


def ad_constant(
    X: IntervalCover,
    delta: float,
    radii: Sequence[float],
    centers: np.ndarray | None = None,
    seed: int = 42,
) -> RegularityReport:
    """Empirical regularity constants from the separated-count proxy.

    μ(X ∩ B(x, r)) is approximated by N(X ∩ B(x, r), α₀)·α₀^δ with α₀ the cover
    resolution, and compared with r^δ.
    """
    radii = np.asarray(list(radii), dtype=float)
    if len(radii) == 0:
        raise ValidationError("need at least one radius")
    if len(X) == 0:
        raise ValidationError("empty set")
    a0 = X.resolution
    if centers is None:
        centers = sample_centers(X, seed)
    iv = X.intervals
    ratios = np.empty((len(centers), len(radii)))
    for i, x in enumerate(centers):
        for j, r in enumerate(radii):
            lo, hi = x - r, x + r
            k0 = np.searchsorted(iv[:, 1], lo, side="left")
            k1 = np.searchsorted(iv[:, 0], hi, side="right")
            part = iv[k0:k1].copy()
            if len(part):
                part[0, 0] = max(part[0, 0], lo)
                part[-1, 1] = min(part[-1, 1], hi)
            n = _kernels.separated_greedy(part[:, 0], part[:, 1], a0) if len(part) else 0
            ratios[i, j] = n * a0**delta / r**delta
    # drift of the mean ratio with r; near zero when delta is right
    pooled = fit_line(np.log(radii), np.log(ratios.mean(axis=0))) if len(radii) >= 3 else None
    return RegularityReport(
        delta=float(delta),
        c_lower=float(ratios.min()),
        c_upper=float(ratios.max()),
        samples=int(ratios.size),
        fit_slope=pooled.slope if pooled else float("nan"),
        fit_residual=pooled.max_residual if pooled else float("nan"),
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Progression:
    start: int
    step: int
    length: int

    def members(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.length)


def ap_avoidance(A: LatticeSet, eps: float) -> tuple[int, Progression]:
    """Longest arithmetic progression P ⊂ ℤ with |P ∩ A| ≥ ε|P| (in offset units)."""
    if len(A) == 0:
        raise ValidationError("A must be nonempty")
    if not 0 < eps <= 1:
        raise ValidationError("eps must lie in (0, 1]")
    if A.span > AP_RANGE_CAP:
        raise ResourceError(f"range {A.span} exceeds the search cap {AP_RANGE_CAP}")
    n, s, t = _kernels.longest_dense_progression(A.offsets, eps, A.span)
    return n, Progression(s, t, n)


# ---------------------------------------------------------------------------


def select_regular_window(Y: IntervalCover, C1: int) -> tuple[float, float]:
    """Interval I with [−1, 1] ⊂ I ⊂ [−2, 2] whose endpoints stay 1/(2C₁) away from Y."""
    if C1 < 1:
        raise ValidationError("C1 must be a positive integer")
    iv = Y.intervals
    if len(iv) == 0 or not np.any((iv[:, 1] >= -2) & (iv[:, 0] <= 2)):
        raise ValidationError("Y must meet [-2, 2]")
    w = 1.0 / C1

    def empty(a, b):
        return not np.any((iv[:, 0] <= b) & (iv[:, 1] >= a))

    left = [(-1 - (k + 1) * w, -1 - k * w) for k in range(C1)]  # ordered from -1 outwards
    right = [(1 + k * w, 1 + (k + 1) * w) for k in range(C1)]
    ends = []
    for side, pieces in (("left", left), ("right", right)):
        for a, b in pieces:
            if empty(a, b):
                ends.append(0.5 * (a + b))
                break
        else:
            raise RegularityViolation(f"no piece on the {side} side avoids Y; increase C1", side=side)
    return ends[0], ends[1]
