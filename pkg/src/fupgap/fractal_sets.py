"""Regular fractal sets: digit Cantor sets, Schottky limit sets, dimension fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import GeometryError, ResourceError, ValidationError
from .hyperbolic_geometry import mobius, to_disk_matrix

TWO_PI = 2.0 * math.pi
AMBIENTS = ("unit_interval", "circle", "line")


# ---------------------------------------------------------------------------
# covers


@dataclass(frozen=True, eq=False)
class IntervalCover:
    """Finite union of disjoint closed intervals, stored as a (k, 2) array.

    On the circle the coordinates are angles in [0, 2π).
    """

    intervals: np.ndarray
    resolution: float
    ambient: str = "unit_interval"

    def __post_init__(self):
        iv = np.asarray(self.intervals, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "intervals", iv)
        if self.ambient not in AMBIENTS:
            raise ValidationError(f"unknown ambient {self.ambient!r}")
        if not self.resolution > 0:
            raise ValidationError("resolution must be positive")
        if len(iv):
            if np.any(iv[:, 1] < iv[:, 0]):
                raise ValidationError("interval with hi < lo")
            if np.any(iv[1:, 0] <= iv[:-1, 1]):
                raise ValidationError("intervals must be sorted and disjoint")
            if self.ambient == "unit_interval" and (iv[0, 0] < 0 or iv[-1, 1] > 1):
                raise ValidationError("intervals must lie in [0, 1]")
            if self.ambient == "circle" and (iv[0, 0] < 0 or iv[-1, 1] >= TWO_PI + 1e-12):
                raise ValidationError("arcs must lie in [0, 2π)")

    @property
    def lo(self) -> np.ndarray:
        return self.intervals[:, 0]

    @property
    def hi(self) -> np.ndarray:
        return self.intervals[:, 1]

    def __len__(self) -> int:
        return len(self.intervals)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IntervalCover)
            and self.ambient == other.ambient
            and self.resolution == other.resolution
            and np.array_equal(self.intervals, other.intervals)
        )

    def lengths(self) -> np.ndarray:
        return self.hi - self.lo

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @classmethod
    def from_unsorted(cls, intervals, resolution: float, ambient: str = "unit_interval"):
        """Sort and merge touching or overlapping intervals."""
        return cls(merge_intervals(np.asarray(intervals, dtype=float).reshape(-1, 2)), resolution, ambient)


def merge_intervals(iv: np.ndarray) -> np.ndarray:
    """Union of closed intervals as a sorted disjoint array."""
    if len(iv) == 0:
        return np.zeros((0, 2))
    iv = iv[np.argsort(iv[:, 0], kind="stable")]
    run_hi = np.maximum.accumulate(iv[:, 1])
    start = np.ones(len(iv), dtype=bool)
    start[1:] = iv[1:, 0] > run_hi[:-1]
    first = np.flatnonzero(start)
    last = np.r_[first[1:], len(iv)] - 1
    return np.stack([iv[first, 0], run_hi[last]], axis=1)


def cover_count(cover: IntervalCover, alpha: float) -> int:
    """Number of length-α pieces needed to tile the cover (at least one per interval)."""
    pieces = np.ceil(cover.lengths() / alpha - 1e-9)
    return int(np.maximum(pieces, 1).sum())


# ---------------------------------------------------------------------------
# Cantor sets


@dataclass(frozen=True)
class CantorSpec:
    """Base-C digit set.

    ``digits`` is either a set of allowed digits used at every position or the
    string ``"alternating"``: odd positions free, even positions forced to 0.
    """

    base: int
    digits: tuple | str
    depth: int

    def __post_init__(self):
        if self.base < 2:
            raise ValidationError("base must be at least 2")
        if self.depth < 1:
            raise ValidationError("depth must be at least 1")
        if isinstance(self.digits, str):
            if self.digits != "alternating":
                raise ValidationError("digit pattern must be a digit set or 'alternating'")
        else:
            ds = tuple(sorted(set(int(d) for d in self.digits)))
            if not ds or ds[0] < 0 or ds[-1] >= self.base:
                raise ValidationError("digits must be a nonempty subset of 0..base-1")
            object.__setattr__(self, "digits", ds)

    def allowed(self, position: int) -> tuple:
        """Digits allowed at 1-based ``position``."""
        if self.digits == "alternating":
            return tuple(range(self.base)) if position % 2 == 1 else (0,)
        return self.digits

    @property
    def dimension(self) -> float:
        if self.digits == "alternating":
            return 0.5
        return math.log(len(self.digits)) / math.log(self.base)

    @classmethod
    def parse(cls, text: str, depth: int) -> "CantorSpec":
        """``"3:02"`` is base 3 with digits {0, 2}; ``"4:alt"`` is the alternating set."""
        try:
            base_s, dig_s = text.split(":")
            base = int(base_s)
        except ValueError as exc:
            raise ValidationError(f"cannot parse Cantor descriptor {text!r}") from exc
        if dig_s in ("alt", "alternating"):
            return cls(base, "alternating", depth)
        return cls(base, tuple(int(c, 36) for c in dig_s), depth)


def cantor_left_endpoints(spec: CantorSpec) -> np.ndarray:
    """Left endpoints of the depth-d cylinders as integers in units of base^-d."""
    if spec.depth * math.log(spec.base) > 60 * math.log(2):
        raise ResourceError("interval count does not fit in machine integers")
    k = np.zeros(1, dtype=np.int64)
    for pos in range(1, spec.depth + 1):
        d = np.asarray(spec.allowed(pos), dtype=np.int64)
        k = (k[:, None] * spec.base + d[None, :]).ravel()
    return np.sort(k)


def gen_cantor(spec: CantorSpec) -> IntervalCover:
    k = cantor_left_endpoints(spec)
    scale = float(spec.base) ** -spec.depth
    iv = np.stack([k * scale, (k + 1) * scale], axis=1)
    return IntervalCover(merge_intervals(iv), scale, "unit_interval")


def to_circle(cover: IntervalCover, start: float = 0.0, length: float = math.pi) -> IntervalCover:
    """Place a subset of [0, 1] on the arc [start, start + length] of the circle."""
    if cover.ambient != "unit_interval":
        raise ValidationError("only unit-interval covers can be placed on the circle")
    if not 0 < length <= TWO_PI:
        raise ValidationError("arc length must lie in (0, 2π]")
    iv = np.mod(start + length * cover.intervals, TWO_PI)
    wrapped = iv[:, 1] < iv[:, 0]
    if np.any(wrapped):
        pieces = [iv[~wrapped], np.stack([iv[wrapped, 0], np.full(wrapped.sum(), TWO_PI)], 1),
                  np.stack([np.zeros(wrapped.sum()), iv[wrapped, 1]], 1)]
        iv = np.concatenate(pieces)
    return IntervalCover.from_unsorted(np.minimum(iv, np.nextafter(TWO_PI, 0)), cover.resolution * length, "circle")


def cantor_on_circle(depth: int, start: float = 0.0, length: float = math.pi) -> IntervalCover:
    """Middle-third Cantor set laid on an arc of the circle."""
    return to_circle(gen_cantor(CantorSpec(3, (0, 2), depth)), start, length)


# ---------------------------------------------------------------------------
# Schottky groups


@dataclass(frozen=True, eq=False)
class SchottkyGroup:
    """Two hyperbolic generators with four paired boundary arcs.

    Letters are ordered (gen1, gen2, gen1⁻¹, gen2⁻¹); letter k maps the
    outside of disk k onto the closure of disk (k + 2) mod 4. ``disks`` holds
    the boundary arcs as (start angle, ccw length).
    """

    gen1: np.ndarray
    gen2: np.ndarray
    lengths: tuple
    disks: np.ndarray = field(default=None)

    @property
    def letters(self) -> list[np.ndarray]:
        inv = lambda g: np.array([[g[1, 1], -g[0, 1]], [-g[1, 0], g[0, 0]]])  # noqa: E731
        return [self.gen1, self.gen2, inv(self.gen1), inv(self.gen2)]

    @property
    def disk_letters(self) -> list[np.ndarray]:
        return [to_disk_matrix(g) for g in self.letters]

    def __eq__(self, other):
        return (
            isinstance(other, SchottkyGroup)
            and np.array_equal(self.gen1, other.gen1)
            and np.array_equal(self.gen2, other.gen2)
            and tuple(self.lengths) == tuple(other.lengths)
        )


def _isometric_arc(G) -> tuple[float, float, complex, float]:
    """Boundary arc (start, length) inside the isometric circle of G, plus center/radius."""
    alpha, beta = G[0, 0], G[0, 1]
    center = -np.conj(alpha) / np.conj(beta)
    radius = 1.0 / abs(beta)
    phi = float(np.angle(center))
    psi = float(np.arccos(min(1.0, abs(beta) / abs(alpha))))
    return (phi - psi) % TWO_PI, 2 * psi, center, radius


def _arcs_disjoint(arcs) -> bool:
    ev = []
    for s, L in arcs:
        ev.append((s, s + L))
    for i in range(len(ev)):
        for j in range(i + 1, len(ev)):
            a0, a1 = ev[i]
            b0, b1 = ev[j]
            # compare on the circle by shifting b relative to a
            off = (b0 - a0) % TWO_PI
            if off <= a1 - a0 or off + (b1 - b0) >= TWO_PI:
                return False
    return True


def build_three_funnel(l1: float, l2: float, l3: float) -> SchottkyGroup:
    """Generators of a pair of pants with boundary geodesics of lengths l1, l2, l3.

    gen1 is diagonal. gen2 has trace 2cosh(l2/2) and tr(gen1·gen2) = −2cosh(l3/2);
    the remaining conjugation freedom is fixed by putting the common
    perpendicular of the two axes through i, where the disk centre sits.
    """
    for v in (l1, l2, l3):
        if not (v > 0 and math.isfinite(v)):
            raise ValidationError("boundary lengths must be positive")
    lam = 0.5 * l1
    b = 2 * math.cosh(0.5 * l2)
    c = 2 * math.cosh(0.5 * l3)
    gen1 = np.diag([math.exp(lam), math.exp(-lam)])
    p = -(c + math.exp(-lam) * b) / (2 * math.sinh(lam))
    s = b - p
    q = math.sqrt(1 - p * s)
    g2 = np.array([[p, q], [-q, s]])
    # axis endpoints: roots of r z^2 + (s - p) z - q = 0 with r = -q
    roots = np.roots([g2[1, 0], s - p, -g2[0, 1]]).real
    prod = roots[0] * roots[1]
    if prod <= 0:
        raise GeometryError("generator axes intersect; lengths do not give a pair of pants")
    R = math.sqrt(prod)
    D = np.diag([R**-0.5, R**0.5])
    gen2 = D @ g2 @ np.linalg.inv(D)
    grp = SchottkyGroup(gen1, gen2, (float(l1), float(l2), float(l3)))
    arcs = np.array([_isometric_arc(G)[:2] for G in grp.disk_letters])
    if not _arcs_disjoint(arcs):
        raise GeometryError("isometric disks overlap")
    object.__setattr__(grp, "disks", arcs)
    return grp


def schottky_residuals(grp: SchottkyGroup, samples: int = 256) -> dict:
    """Trace errors and the worst disk-pairing error over boundary samples."""
    l1, l2, l3 = grp.lengths
    tr = {
        "trace1": abs(abs(np.trace(grp.gen1)) / (2 * math.cosh(l1 / 2)) - 1),
        "trace2": abs(abs(np.trace(grp.gen2)) / (2 * math.cosh(l2 / 2)) - 1),
        "trace12": abs(np.trace(grp.gen1 @ grp.gen2) / (-2 * math.cosh(l3 / 2)) - 1),
    }
    Gs = grp.disk_letters
    worst = 0.0
    inside_ok = True
    for k in range(4):
        G = Gs[k]
        start, L, center, radius = _isometric_arc(G)
        Ginv = Gs[(k + 2) % 4]
        # geodesic boundary of disk k: its isometric circle inside the closed disk
        ang_c = np.angle(-center)  # direction from circle centre back to origin
        half = math.atan2(1.0, radius)  # half-angle of the arc seen from the centre
        phis = ang_c + np.linspace(-half, half, samples)
        pts = center + radius * np.exp(1j * phis)
        img = mobius(G, pts)
        err = np.abs(np.abs(np.conj(Ginv[0, 1]) * img + np.conj(Ginv[0, 0])) - 1.0)
        worst = max(worst, float(err.max()))
        # a boundary point inside arc k must land outside arc k+2
        mid = np.exp(1j * (start + 0.5 * L))
        t = float(np.angle(mobius(G, mid))) % TWO_PI
        s2, L2 = grp.disks[(k + 2) % 4]
        inside_ok &= ((t - s2) % TWO_PI) > L2
    tr["pairing"] = worst
    tr["outside_ok"] = bool(inside_ok)
    return tr


def schottky_limit_set(
    grp: SchottkyGroup,
    alpha: float,
    node_budget: int = 5_000_000,
    max_depth: int | None = None,
) -> IntervalCover:
    """Cover of the limit set by word-image arcs shorter than ``alpha``.

    ``max_depth`` stops the recursion early (all arcs at that word length are
    returned regardless of size); ``max_depth=1`` gives the four disks.
    """
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    Gs = np.array(grp.disk_letters)
    starts = np.exp(1j * grp.disks[:, 0])
    ends = np.exp(1j * (grp.disks[:, 0] + grp.disks[:, 1]))

    out_s, out_l = [], []
    Q = np.broadcast_to(np.eye(2, dtype=complex), (1, 2, 2)).copy()
    last = np.array([-1])
    depth = 0
    used = 0
    while len(Q):
        depth += 1
        kids_Q, kids_last, kid_s, kid_l = [], [], [], []
        for h in range(4):
            keep = last != (h + 2) % 4
            if not np.any(keep):
                continue
            Qh = Q[keep]
            tgt = (h + 2) % 4
            a = _apply(Qh, starts[tgt])
            b = _apply(Qh, ends[tgt])
            s = np.mod(np.angle(a), TWO_PI)
            L = np.mod(np.angle(b) - np.angle(a), TWO_PI)
            kids_Q.append(Qh @ Gs[h])
            kids_last.append(np.full(len(Qh), h))
            kid_s.append(s)
            kid_l.append(L)
        Qn = np.concatenate(kids_Q)
        ln = np.concatenate(kids_last)
        sn = np.concatenate(kid_s)
        Ln = np.concatenate(kid_l)
        used += len(Qn)
        if used > node_budget:
            raise ResourceError(
                f"word tree exceeded {node_budget} nodes at word length {depth}; "
                f"increase alpha or the node budget"
            )
        done = Ln < alpha
        if max_depth is not None and depth >= max_depth:
            done[:] = True
        out_s.append(sn[done])
        out_l.append(Ln[done])
        Q, last = Qn[~done], ln[~done]
    s = np.concatenate(out_s)
    L = np.concatenate(out_l)
    return _arcs_to_cover(s, L, alpha)


def _apply(Q, w):
    return (Q[:, 0, 0] * w + Q[:, 0, 1]) / (Q[:, 1, 0] * w + Q[:, 1, 1])


def _arcs_to_cover(s, L, resolution) -> IntervalCover:
    e = s + L
    wrap = e >= TWO_PI
    iv = np.concatenate([
        np.stack([s[~wrap], e[~wrap]], 1),
        np.stack([s[wrap], np.full(wrap.sum(), np.nextafter(TWO_PI, 0))], 1),
        np.stack([np.zeros(wrap.sum()), e[wrap] - TWO_PI], 1),
    ])
    return IntervalCover.from_unsorted(iv, resolution, "circle")


# ---------------------------------------------------------------------------
# log-log fits


@dataclass(frozen=True)
class FitReport:
    xs: np.ndarray
    ys: np.ndarray
    slope: float
    intercept: float
    max_residual: float

    def to_json(self) -> dict:
        return {
            "xs": [float(v) for v in self.xs],
            "ys": [float(v) for v in self.ys],
            "slope": float(self.slope),
            "intercept": float(self.intercept),
            "max_residual": float(self.max_residual),
        }


def fit_line(xs: Sequence[float], ys: Sequence[float]) -> FitReport:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 3 or len(xs) != len(ys):
        raise ValidationError("a fit needs at least 3 matching points")
    A = np.stack([xs, np.ones_like(xs)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ys, rcond=None)
    res = np.abs(ys - (slope * xs + intercept))
    return FitReport(xs, ys, float(slope), float(intercept), float(res.max()))


def minkowski_dimension(cover_family: Mapping[float, IntervalCover]) -> FitReport:
    """Slope of log N(α) against log(1/α) with N the α-tile count of each cover."""
    if len(cover_family) < 3:
        raise ValidationError("need at least 3 scales")
    alphas = np.array(sorted(cover_family, reverse=True), dtype=float)
    if math.log10(alphas[0] / alphas[-1]) < 2 - 1e-9:
        raise ValidationError("scales must span at least two decades")
    counts = np.array([cover_count(cover_family[a], a) for a in alphas], dtype=float)
    return fit_line(np.log(1 / alphas), np.log(counts))


def cantor_family(base: int, digits, depths: Sequence[int]) -> dict:
    return {float(base) ** -d: gen_cantor(CantorSpec(base, digits, d)) for d in depths}


def schottky_family(grp: SchottkyGroup, alphas: Sequence[float], node_budget: int = 5_000_000) -> dict:
    return {float(a): schottky_limit_set(grp, a, node_budget) for a in alphas}


def generator_swap_involution(grp: SchottkyGroup) -> np.ndarray:
    """Half-turn of the disk about the midpoint of the common perpendicular of the two axes.

    When the first two boundary lengths agree it exchanges the disks of gen1 and gen2.
    """
    G2 = grp.disk_letters[1]
    _, V = np.linalg.eig(G2)
    fp = V[0] / V[1]
    fp = fp / np.abs(fp)
    u = fp[0] + fp[1]
    u = u / abs(u)
    half = 0.5 * abs(np.angle(fp[0] / fp[1]))
    foot = 1 / math.cos(half) - math.tan(half)
    m = math.tanh(0.5 * math.atanh(foot)) * u
    T = np.array([[1, m], [np.conj(m), 1]]) / math.sqrt(1 - abs(m) ** 2)
    return T @ np.diag([1j, -1j]) @ np.linalg.inv(T)


def circle_arcs(cover: IntervalCover) -> np.ndarray:
    """Arcs of a circle cover as (start, length), joining a piece split at angle 0."""
    iv = cover.intervals.copy()
    if len(iv) > 1 and iv[0, 0] == 0.0 and iv[-1, 1] >= np.nextafter(TWO_PI, 0):
        iv[-1, 1] = TWO_PI + iv[0, 1]
        iv = iv[1:]
    return np.stack([iv[:, 0], iv[:, 1] - iv[:, 0]], axis=1)
