import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fupgap.additive_energy import (
    cantor_leaf_energy,
    energy_count,
    energy_exponent,
    energy_measure,
    energy_result,
    outer_tolerance,
    project_cover,
    projected_energy,
)
from fupgap.errors import ValidationError
from fupgap.fractal_sets import IntervalCover, build_three_funnel, schottky_limit_set
from fupgap.regularity import LatticeSet, snap_to_lattice
from oracles import energy_bruteforce, energy_cubic

int_sets = st.lists(st.integers(-60, 60), min_size=1, max_size=25, unique=True)


def test_examples():
    assert energy_count([0], 1) == 1
    assert energy_count([0, 2, 6, 8], 0) == 36
    assert energy_count([0, 2, 6, 8], 1) == 36
    with pytest.raises(ValidationError):
        energy_count([], 0)
    with pytest.raises(ValidationError):
        energy_count([1, 2], -1)


@given(int_sets, st.integers(0, 2))
def test_matches_bruteforce(vals, tol):
    assert energy_count(vals, tol) == energy_bruteforce(vals, tol)


@given(int_sets, st.integers(0, 2))
def test_backends_agree(vals, tol):
    from fupgap import _kernels

    out = []
    for name in ("numpy", "numba"):
        prev = _kernels.use_backend(name)
        try:
            out.append(energy_count(vals, tol))
        finally:
            _kernels.use_backend(prev)
    assert out[0] == out[1]


def test_sparse_path_matches():
    rng = np.random.default_rng(3)
    A = np.unique(rng.integers(0, 10**6, 30))
    assert energy_count(A, 2) == energy_cubic(A.tolist(), 2)


@given(int_sets, st.integers(-1000, 1000), st.integers(0, 2))
def test_invariances_and_bounds(vals, c, tol):
    A = np.array(vals)
    e = energy_count(A, tol)
    assert energy_count(A + c, tol) == e
    assert energy_count(-A, tol) == e
    n = len(A)
    assert e >= n * n
    if tol == 1:
        assert e <= 3 * n**3


def test_interval_energy_exponent():
    # count for {0..N-1} at tol 0 is (2N^3 + N)/3
    for N in (5, 10, 30):
        assert energy_count(range(N), 0) == (2 * N**3 + N) // 3
    res = [energy_result(LatticeSet(1.0 / N, np.arange(N)), 0) for N in (8, 16, 32, 64, 128, 256)]
    fit = energy_exponent([(r.alpha, r.count) for r in res], drop_coarsest=2)
    assert fit.slope == pytest.approx(-3, abs=0.02)


def test_sidon_like_sets():
    rng = np.random.default_rng(1)
    res = []
    for k in range(4, 9):
        n = 2**k
        A = np.unique(rng.choice(n**4, n, replace=False))
        res.append((1.0 / len(A), energy_count(A, 0)))
    fit = energy_exponent(res, drop_coarsest=0)
    assert fit.slope == pytest.approx(-2, abs=0.15)


def test_measure_examples():
    assert energy_measure([0.0], [1.0], 0.5, 1.0) == pytest.approx(1.0)
    # exact window (no widening): only x1 - x2 + x3 - x4 = 0 qualifies
    assert energy_measure([0.0, 1.0], [0.5, 0.5], 0.5, 1.0, outer=False) == pytest.approx(6 / 16)
    with pytest.raises(ValidationError):
        energy_measure([0.0], [np.nan], 0.5, 1.0)
    assert outer_tolerance(1.0, 1.0, outer=False) == 0
    assert outer_tolerance(1.0, 1.0) == 4


@given(st.lists(st.integers(0, 40), min_size=1, max_size=15, unique=True), st.integers(0, 2))
def test_measure_equals_normalised_count(vals, tol):
    x = np.array(sorted(vals))
    w = np.full(len(x), 1.0 / len(x))
    m = energy_measure(x.astype(float), w, tol + 1, 1.0, outer=False)
    assert m == pytest.approx(energy_count(x, tol) / len(x) ** 4, rel=1e-12)


def test_cantor_leaf_energy_small_depth():
    for d in (2, 3, 4):
        from fupgap.fractal_sets import CantorSpec, cantor_left_endpoints

        k = cantor_left_endpoints(CantorSpec(3, (0, 2), d))
        expect = energy_bruteforce(k, 4) / len(k) ** 4  # |Σ| < 1 cell widened by 4 cells
        assert cantor_leaf_energy(3, (0, 2), d) == pytest.approx(expect)


def test_exponent_validation():
    with pytest.raises(ValidationError):
        energy_exponent([(1, 1), (0.5, 1), (0.25, 1)])
    with pytest.raises(ValidationError):
        energy_exponent([(1, 1), (0.5, 1), (0.7, 1), (0.1, 1)])


def test_projection_of_antipodal_pair():
    lam = IntervalCover(np.array([[0.0, 0.0], [math.pi, math.pi]]), 1e-3, "circle")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = projected_energy(lam, 0.0, 1.0, 0.01)
    assert r.count == 1


def test_projected_energy_oracle_and_monotonicity():
    lam = schottky_limit_set(build_three_funnel(2, 2, 2), 2.0**-12)
    y0 = float(lam.midpoints()[0])
    alpha = 2.0**-10
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = projected_energy(lam, y0, 1.0, alpha)
        A = snap_to_lattice(project_cover(lam, y0, 1.0), alpha)
        assert r.count == energy_cubic(A.offsets.tolist(), 1)
        r2 = projected_energy(lam, y0, 2.0, alpha)
    assert r2.count >= r.count
