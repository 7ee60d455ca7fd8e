"""Discretised oscillatory operator on the circle and its restricted norms.

On a uniform grid of the whole circle the quadrature matrix is circulant, so
it is applied with FFTs; dense entries are only built for small masks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from . import _kernels
from .errors import ResourceError, ValidationError
from .fractal_sets import FitReport, IntervalCover, fit_line

TWO_PI = 2.0 * math.pi
DENSE_CAP = 20_000
ZERO_NORM = 1e-12


@dataclass(frozen=True)
class ChiCutoff:
    """Smooth cutoff in the chord distance: 0 near 0 and 2, 1 on the plateau."""

    inner: float = 0.4
    plateau_lo: float = 0.7
    plateau_hi: float = 1.8
    outer: float = 1.95
    smoothness: int = 3

    def __post_init__(self):
        if not 0 < self.inner < self.plateau_lo < self.plateau_hi < self.outer <= 2:
            raise ValidationError("need 0 < inner < plateau_lo < plateau_hi < outer <= 2")
        if self.smoothness < 0:
            raise ValidationError("smoothness must be non-negative")

    @property
    def params(self) -> tuple:
        return (self.inner, self.plateau_lo, self.plateau_hi, self.outer, self.smoothness)

    def __call__(self, d):
        return _kernels.chi_profile_np(np.asarray(d, dtype=float), *self.params)


def circle_grid(h: float, c: float = 0.5) -> tuple[np.ndarray, float]:
    """Cell-centred angles with spacing at most c·h."""
    n = int(math.ceil(TWO_PI / (c * h)))
    dtheta = TWO_PI / n
    return (np.arange(n) + 0.5) * dtheta, dtheta


def angular_distance(theta: np.ndarray, cover: IntervalCover) -> np.ndarray:
    """Distance along the circle from each angle to the nearest arc of ``cover``."""
    if len(cover) == 0:
        return np.full(len(theta), np.inf)
    lo, hi = cover.lo, cover.hi
    k = np.searchsorted(lo, theta, side="right") - 1  # last arc starting at or before theta
    prev = np.mod(k, len(lo))
    nxt = np.mod(k + 1, len(lo))
    d_prev = np.mod(theta - hi[prev], TWO_PI)
    inside = np.mod(theta - lo[prev], TWO_PI) <= hi[prev] - lo[prev]
    d_next = np.mod(lo[nxt] - theta, TWO_PI)
    d = np.minimum(d_prev, d_next)
    d[inside] = 0.0
    return np.minimum(d, TWO_PI - d)


def neighbourhood_mask(theta: np.ndarray, cover: IntervalCover, radius: float) -> np.ndarray:
    """Grid indices whose chord distance to the cover is at most ``radius``."""
    ang = angular_distance(theta, cover)
    return np.flatnonzero(2.0 * np.sin(0.5 * np.minimum(ang, math.pi)) <= radius)


def kernel_column(n: int, h: float, chi: ChiCutoff) -> np.ndarray:
    """First column of the circulant quadrature matrix on an n-point grid."""
    dtheta = TWO_PI / n
    m = np.arange(n)
    d = 2.0 * np.abs(np.sin(math.pi * m / n))
    amp = chi(d)
    col = np.zeros(n, dtype=complex)
    nz = amp > 0
    col[nz] = amp[nz] * np.exp((2j / h) * np.log(d[nz]))
    return col * (TWO_PI * h) ** -0.5 * dtheta


@dataclass(eq=False)
class FupMatrix:
    """Restriction of the quadrature operator to grid points near a set."""

    h: float
    rho: float
    C1: float
    chi: ChiCutoff
    n_grid: int
    mask: np.ndarray
    dense_cap: int = DENSE_CAP
    _col_hat: np.ndarray = field(default=None, repr=False)

    @property
    def dtheta(self) -> float:
        return TWO_PI / self.n_grid

    @property
    def grid(self) -> np.ndarray:
        return (self.mask + 0.5) * self.dtheta

    @property
    def shape(self) -> tuple:
        return (len(self.mask), len(self.mask))

    @property
    def col_hat(self) -> np.ndarray:
        if self._col_hat is None:
            self._col_hat = np.fft.fft(kernel_column(self.n_grid, self.h, self.chi))
        return self._col_hat

    @property
    def entries(self) -> np.ndarray:
        if len(self.mask) > self.dense_cap:
            raise ResourceError(
                f"masked size {len(self.mask)} exceeds the dense cap {self.dense_cap}; use a larger h"
            )
        scale = (TWO_PI * self.h) ** -0.5 * self.dtheta
        return _kernels.fup_dense(self.grid, self.h, self.chi.params, scale)

    def _full(self, v):
        u = np.zeros(self.n_grid, dtype=complex)
        u[self.mask] = v
        return np.fft.ifft(self.col_hat * np.fft.fft(u))

    def matvec(self, v):
        return self._full(v)[self.mask]

    def rmatvec(self, v):
        # the circulant is complex symmetric, so its adjoint is its conjugate
        return np.conj(self._full(np.conj(v)))[self.mask]


def build_fup_matrix(
    lam: IntervalCover,
    h: float,
    rho: float = 0.9,
    C1: float = 1.0,
    chi: ChiCutoff = ChiCutoff(),
    c: float = 0.5,
    dense_cap: int = DENSE_CAP,
) -> FupMatrix:
    if not 0 < h <= 0.2:
        raise ValidationError("h must lie in (0, 0.2]")
    if not 0 < rho <= 1:
        raise ValidationError("rho must lie in (0, 1]")
    if not 0 < c <= 0.5:
        raise ValidationError("grid factor c must lie in (0, 0.5]")
    if lam.ambient != "circle":
        raise ValidationError("the set must live on the circle")
    theta, _ = circle_grid(h, c)
    mask = neighbourhood_mask(theta, lam, C1 * h**rho)
    if len(mask) > dense_cap:
        raise ResourceError(f"masked size {len(mask)} exceeds the cap {dense_cap}; use a larger h")
    return FupMatrix(h, rho, C1, chi, len(theta), mask, dense_cap)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormResult:
    value: float
    converged: bool
    iterations: int


def operator_norm(A, tol: float = 1e-6, max_iter: int = 500, seed: int = 42) -> NormResult:
    """Largest singular value from Lanczos iteration on the Gram operator A*A.

    Converged means the Ritz residual |A*A v − λv| is at most ``tol``·λ. The
    start vector is drawn from ``seed``. Nearly degenerate top singular values
    are common here, which is why a Krylov method replaces plain power iteration.
    """
    if isinstance(A, np.ndarray):
        M = np.asarray(A, dtype=complex)
        mv, rmv, n = (lambda v: M @ v), (lambda v: M.conj().T @ v), M.shape[1]
    else:
        mv, rmv, n = A.matvec, A.rmatvec, A.shape[1]
    if n == 0:
        return NormResult(0.0, True, 0)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if n <= 2:
        G = np.stack([rmv(mv(e)) for e in np.eye(n, dtype=complex)], axis=1)
        lam = float(np.linalg.eigvalsh(G)[-1])
        return NormResult(math.sqrt(max(lam, 0.0)), True, n)
    if np.linalg.norm(mv(v0)) == 0.0 and isinstance(A, np.ndarray) and not M.any():
        return NormResult(0.0, True, 1)
    calls = [0]

    def gram(v):
        calls[0] += 1
        return rmv(mv(np.asarray(v).ravel()))

    op = LinearOperator((n, n), matvec=gram, dtype=complex)
    try:
        lam = eigsh(op, k=1, which="LA", v0=v0, tol=tol, maxiter=max_iter, return_eigenvectors=False)[0]
        ok = True
    except ArpackNoConvergence as exc:
        lam = exc.eigenvalues[0] if len(exc.eigenvalues) else np.vdot(v0, gram(v0)).real / np.vdot(v0, v0).real
        ok = False
    return NormResult(math.sqrt(max(float(np.real(lam)), 0.0)), ok, calls[0])


def full_circle_norm(h: float, chi: ChiCutoff = ChiCutoff(), c: float = 0.5) -> float:
    """Exact norm of the unrestricted circulant matrix."""
    theta, _ = circle_grid(h, c)
    return float(np.abs(np.fft.fft(kernel_column(len(theta), h, chi))).max())


def schur_bound(F: FupMatrix) -> float:
    """max row sum of |entries| (the matrix is symmetric in modulus)."""
    absk = np.abs(kernel_column(F.n_grid, F.h, F.chi))
    ind = np.zeros(F.n_grid)
    ind[F.mask] = 1.0
    rows = np.real(np.fft.ifft(np.fft.fft(absk) * np.fft.fft(ind)))[F.mask]
    return float(rows.max()) if len(rows) else 0.0


@dataclass
class FupSweep:
    fit: FitReport | None
    rows: list = field(default_factory=list)  # (h, norm, tb1, tb2, masked_size)
    excluded: list = field(default_factory=list)
    delta: float | None = None
    rho: float = 0.9

    @property
    def beta(self) -> float:
        return self.fit.slope if self.fit else float("nan")

    def volume_exponent(self) -> float | None:
        """Exponent of h in the volume bound h^{-1/2} h^{ρ(1−δ)}."""
        if self.delta is None:
            return None
        return -0.5 + self.rho * (1 - self.delta)

    def to_json(self) -> dict:
        return {
            "beta_empirical": self.beta,
            "label": "empirical (fixed chi, C1)",
            "fit": self.fit.to_json() if self.fit else None,
            "rows": [list(r) for r in self.rows],
            "excluded_h": self.excluded,
            "constant_bound_exponent": 0.0,
            "volume_bound_exponent": self.volume_exponent(),
        }


def fup_exponent(
    lam: IntervalCover,
    h_list: Sequence[float],
    rho: float = 0.9,
    C1: float = 1.0,
    chi: ChiCutoff = ChiCutoff(),
    c: float = 0.5,
    delta: float | None = None,
) -> FupSweep:
    """Norms over a geometric list of h and the slope of log‖·‖ against log h."""
    hs = np.asarray(sorted(h_list, reverse=True), dtype=float)
    if len(hs) < 4:
        raise ValidationError("need at least 4 values of h")
    ratios = hs[1:] / hs[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-6):
        raise ValidationError("h values must form a geometric sequence")
    sweep = FupSweep(None, delta=delta, rho=rho)
    xs, ys = [], []
    for h in hs:
        F = build_fup_matrix(lam, float(h), rho, C1, chi, c)
        nr = operator_norm(F)
        tb1 = 1.05 * full_circle_norm(float(h), chi, c)
        tb2 = schur_bound(F)
        sweep.rows.append((float(h), nr.value, tb1, tb2, len(F.mask)))
        if nr.value <= ZERO_NORM * tb1:  # FFT roundoff stands in for an exact zero
            warnings.warn(f"zero norm at h={h}; excluded from the fit", stacklevel=2)
            sweep.excluded.append(float(h))
            continue
        xs.append(math.log(h))
        ys.append(math.log(nr.value))
    if len(xs) >= 3:
        sweep.fit = fit_line(xs, ys)
    return sweep


# ---------------------------------------------------------------------------


def jn_lower_probe(
    lam: IntervalCover,
    h: float,
    y0: float,
    y1: float,
    eps_tilde: float,
    chi: ChiCutoff = ChiCutoff(),
    c: float = 0.5,
    mask_scale: float = 1.0,
) -> float:
    """‖1_{Λ(s·h)} B 1_{B(y₀, h^{1+ε̃})}‖ / ‖1_{B(y₀, h^{1+ε̃})}‖ on the grid (angles y₀, y₁)."""
    d01 = 2 * abs(math.sin(0.5 * (y0 - y1)))
    if d01 < 1e-12:
        raise ValidationError("y0 and y1 must differ")
    if float(chi(d01)) != 1.0:
        raise ValidationError("the cutoff must equal 1 at the pair (y1, y0)")
    theta, _ = circle_grid(h, c)
    ball = np.flatnonzero(2 * np.abs(np.sin(0.5 * (theta - y0))) <= h ** (1 + eps_tilde))
    if len(ball) == 0:
        raise ValidationError("the ball around y0 contains no grid point")
    F = FupMatrix(h, 1.0, mask_scale, chi, len(theta), neighbourhood_mask(theta, lam, mask_scale * h))
    u = np.zeros(len(theta), dtype=complex)
    u[ball] = 1.0
    out = np.fft.ifft(F.col_hat * np.fft.fft(u))[F.mask]
    return float(np.linalg.norm(out) / math.sqrt(len(ball)))


# ---------------------------------------------------------------------------


def smoothed_indicator(theta: np.ndarray, lam: IntervalCover, radius: float, width: float) -> np.ndarray:
    """Indicator of the radius-neighbourhood mollified by a C^∞ bump of half-width ``width``."""
    n = len(theta)
    dtheta = TWO_PI / n
    ind = (angular_distance(theta, lam) <= radius).astype(float)
    m = np.arange(n)
    s = np.minimum(m, n - m) * dtheta / width
    bump = np.where(s < 1, np.exp(-1.0 / np.maximum(1 - s * s, 1e-300)), 0.0)
    bump /= bump.sum()
    return np.real(np.fft.ifft(np.fft.fft(ind) * np.fft.fft(bump)))


def kernel_K(
    lam: IntervalCover,
    h: float,
    rho: float,
    ys: np.ndarray,
    chi: ChiCutoff = ChiCutoff(),
    c: float = 0.25,
) -> np.ndarray:
    """Matrix of K(y, y″) = h⁻¹∫ (|y′−y″|/|y′−y|)^{2i/h} χ(y′,y″) χ(y′,y) ψ₀(y′) dy′ over angles ``ys``."""
    if c > 0.25:
        raise ValidationError("grid spacing above h/4 does not resolve the phase")
    theta, dtheta = circle_grid(h, c)
    psi = smoothed_indicator(theta, lam, h ** (rho / 2), h ** (rho / 2) / 4)
    keep = np.flatnonzero(psi > 1e-14)
    tp = theta[keep]
    ys = np.asarray(ys, dtype=float)
    d = 2 * np.abs(np.sin(0.5 * (tp[:, None] - ys[None, :])))
    amp = chi(d)
    E = np.zeros_like(d, dtype=complex)
    nz = amp > 0
    E[nz] = amp[nz] * np.exp((2j / h) * np.log(d[nz]))
    W = psi[keep] * dtheta / h
    return E.conj().T @ (W[:, None] * E)


@dataclass(frozen=True)
class KernelDecay:
    ratio: float
    far_max: float
    near_max: float
    n_points: int
    threshold: float


def kernel_decay(
    lam: IntervalCover,
    h: float,
    rho: float = 0.9,
    n_points: int = 96,
    chi: ChiCutoff = ChiCutoff(),
    c: float = 0.25,
) -> KernelDecay:
    """max |K| over pairs farther than ½h^{1/2} divided by max |K| over nearer pairs."""
    mids = lam.midpoints()
    pick = np.unique(np.linspace(0, len(mids) - 1, min(n_points, len(mids))).round().astype(int))
    ys = mids[pick]
    K = np.abs(kernel_K(lam, h, rho, ys, chi, c))
    d = 2 * np.abs(np.sin(0.5 * (ys[:, None] - ys[None, :])))
    thr = 0.5 * math.sqrt(h)
    far = d > thr
    if not far.any():
        raise ValidationError("no far pairs among the sample points")
    fm, nm = float(K[far].max()), float(K[~far].max())
    return KernelDecay(fm / nm, fm, nm, len(ys), thr)
