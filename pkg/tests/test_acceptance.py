"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line."""

import json
import math
import time

import numpy as np
import pytest

from fupgap.additive_energy import cantor_leaf_energy, energy_count, energy_exponent
from fupgap.cli import energy_sweep, main
from fupgap.fractal_sets import (
    CantorSpec,
    build_three_funnel,
    cantor_family,
    cantor_left_endpoints,
    cantor_on_circle,
    gen_cantor,
    minkowski_dimension,
    schottky_family,
    schottky_limit_set,
    schottky_residuals,
)
from fupgap.fup_estimator import build_fup_matrix, fup_exponent, jn_lower_probe, kernel_decay, operator_norm
from fupgap.gap_constants import (
    C1_of,
    C2_of,
    S_of,
    beta_gap,
    beta_jn,
    beta_std,
    improvement_range,
)
from fupgap.hyperbolic_geometry import (
    circle_point,
    endpoints_B,
    geodesic_flow,
    graph_check,
    horocycle_unstable,
    kappa,
    matrix_size,
    mobius_boundary_derivative,
    poisson_kernel,
    random_unit_cotangents,
    stereo_G,
)
from fupgap.multiscale_tree import Tree, discretize, prune_triples, pruned_leaf_bound, tree_power, tree_regularity
from fupgap.regularity import LatticeSet, ad_constant, ap_avoidance
from oracles import pruned_triples_bruteforce

DELTA_CANTOR = math.log(2) / math.log(3)


@pytest.fixture(scope="module")
def circle_cantor():
    return cantor_on_circle(12)


def _probe_points(lam):
    y0 = float(lam.lo[0])
    mids = lam.midpoints()
    y1 = float(mids[np.argmin(np.abs(2 * np.abs(np.sin(0.5 * (mids - y0))) - 1.2))])
    return y0, y1


def test_ac01_gap_arithmetic(verdict):
    t = time.perf_counter()
    checks = {
        "beta_gap": beta_gap(2, 0.5, 0.5) == 1 / 32,
        "beta_std": beta_std(2, 0.5) == 0,
        "beta_jn": beta_jn(2, 0.5) == 1 / 4,
        "range": improvement_range(2) == (5 / 11, 3 / 5),
        "C1": abs(C1_of(1, 0.5) - 100) <= 1e-12 * 100,
        "C2": abs(C2_of(1, 0.5) - 10) <= 1e-12 * 10,
        "S": abs(S_of(1, 1, 0.5) - 100) <= 1e-12 * 100,
    }
    dt = time.perf_counter() - t
    bad = [k for k, v in checks.items() if not v]
    verdict("AC1", not bad and dt < 1, f"{len(checks) - len(bad)}/{len(checks)} exact values, {dt:.3f}s")


def test_ac02_dimension_recovery(verdict):
    d3 = minkowski_dimension(cantor_family(3, (0, 2), range(4, 11))).slope
    fam4 = {4.0**-d: gen_cantor(CantorSpec.parse("4:alt", d)) for d in range(2, 11)}
    d4 = minkowski_dimension(fam4).slope
    ok = abs(d3 - DELTA_CANTOR) <= 0.02 and abs(d4 - 0.5) <= 0.02
    verdict("AC2", ok, f"middle-third {d3:.4f} (target {DELTA_CANTOR:.4f}), base-4 {d4:.4f} (target 0.5)")


def test_ac03_energy_oracle(verdict):
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(1, 51))
        span = int(rng.choice([2 * n, 10 * n, 1000]))
        A = np.unique(rng.integers(0, span, n))
        s = A[:, None, None, None] - A[None, :, None, None] + A[None, None, :, None] - A[None, None, None, :]
        s = np.abs(s).ravel()
        for tol in (0, 1, 2):
            mismatches += energy_count(A, tol) != int(np.count_nonzero(s <= tol))
    verdict("AC3", mismatches == 0, f"{mismatches} mismatches over 200 sets x 3 tolerances")


def test_ac04_energy_bounds(verdict):
    rows = []
    res, _ = energy_sweep(gen_cantor(CantorSpec(3, (0, 2), 9)), [3.0**-k for k in range(3, 10)])
    rows += res
    res, _ = energy_sweep(gen_cantor(CantorSpec.parse("4:alt", 6)), [4.0**-k for k in range(2, 7)])
    rows += res
    lam = schottky_limit_set(build_three_funnel(2, 2, 2), 2.0**-12)
    res, _ = energy_sweep(lam, [2.0**-k for k in range(4, 12)])
    rows += res
    bad = [r for r in rows if not r.size**2 <= r.count <= 3 * r.size**3]
    verdict("AC4", not bad, f"{len(bad)} violations over {len(rows)} (set, scale) pairs")


def test_ac05_energy_improvement(verdict):
    res = [(3.0**-k, cantor_leaf_energy(3, (0, 2), k)) for k in range(3, 10)]
    fit = energy_exponent(res)
    beta = fit.slope - DELTA_CANTOR
    verdict("AC5", beta >= 0.05, f"slope {fit.slope:.4f}, measured beta_X = {beta:.4f} (need >= 0.05)")


def test_ac06_near_extremal_digit_set(verdict):
    expo = 0.5 + 1 / (10 * math.log(4))
    res = []
    for k in range(2, 7):
        spec = CantorSpec.parse("4:alt", k)
        res.append((4.0**-k, cantor_leaf_energy(4, spec.digits, k)))
    lower_ok = all(e >= a**expo for a, e in res)
    slope = energy_exponent(res, drop_coarsest=0).slope
    hi = expo + 0.05
    slope_ok = 0.5 <= slope <= hi
    verdict(
        "AC6",
        lower_ok and slope_ok,
        f"lower bound {'holds' if lower_ok else 'violated'} at all scales; slope {slope:.4f} vs [0.5, {hi:.4f}]",
    )


def test_ac07_tree_machinery(verdict):
    compared = mismatched = checked = failed = 0
    sets = {
        "3:02": gen_cantor(CantorSpec(3, (0, 2), 7)),
        "4:alt": gen_cantor(CantorSpec.parse("4:alt", 6)),
        "5:024": gen_cantor(CantorSpec(5, (0, 2, 4), 5)),
    }
    for X in sets.values():
        for M in (2, 3, 4, 5):
            for N in range(1, 6):
                T = discretize(X, M, N)
                if T.n_leaves > 40:
                    continue
                TT = prune_triples(T, X)
                compared += 1
                mismatched += TT.leaf_set() != pruned_triples_bruteforce(T, X)
                for B in (2, 3, 4):
                    ok, worst = tree_regularity(T, B, 1e6)
                    r = pruned_leaf_bound(tree_power(T, 3), TT, B**3, worst**3)
                    if r.applicable:
                        checked += 1
                        failed += not r.holds
    rng = np.random.default_rng(7)
    for B in (2, 3, 4):
        for N in (3, 4, 5):
            T = Tree.perfect(B, N)
            mask = np.zeros(len(T), dtype=bool)
            mask[0] = True
            for h in range(N):
                for v in T.level(h):
                    if mask[v]:
                        kids = np.asarray(T.children[v])
                        keep = rng.integers(1, len(kids))
                        mask[rng.choice(kids, keep, replace=False)] = True
            r = pruned_leaf_bound(T, mask, B, 1)
            checked += r.applicable
            failed += r.applicable and not r.holds
    T = Tree.perfect(2, 8)
    mask = np.zeros(len(T), dtype=bool)
    mask[0] = True
    for h in range(T.N):
        for v in T.level(h):
            if mask[v]:
                mask[T.children[v][0]] = True
    one = pruned_leaf_bound(T, mask, 2, 1).lhs
    ok = mismatched == 0 and compared > 0 and failed == 0 and one == 1
    verdict(
        "AC7",
        ok,
        f"{compared} oracle comparisons ({mismatched} mismatches), bound held on {checked - failed}/{checked}, "
        f"single-path pruning leaves {one:g}",
    )


def test_ac08_ap_avoidance(verdict):
    worst = 0.0
    cases = 0
    for depth in range(3, 9):
        spec = CantorSpec(3, (0, 2), depth)
        C = ad_constant(gen_cantor(spec), DELTA_CANTOR, [3.0**-k for k in range(depth, 0, -1)]).constant
        A = LatticeSet.from_integers(cantor_left_endpoints(spec))
        for eps in (1.0, 0.5, 0.25):
            n, _ = ap_avoidance(A, eps)
            worst = max(worst, n / S_of(eps, C, DELTA_CANTOR))
            cases += 1
    verdict("AC8", worst <= 1, f"{cases} cases, largest longest/S(eps) = {worst:.4f}")


def test_ac09_geometry_identities(verdict):
    rng = np.random.default_rng(42)
    n = 10_000
    res = {}
    xc = random_unit_cotangents(rng, n)
    e = endpoints_B(xc)
    res["endpoint product"] = np.max(np.abs(poisson_kernel(xc.x, e.B_plus) * poisson_kernel(xc.x, e.B_minus)
                                * (1 - np.sum(e.B_plus * e.B_minus, -1)) - 2))
    a, b = rng.uniform(0, 2 * math.pi, (2, n))
    keep = np.abs(np.sin(0.5 * (a - b))) > 1e-3
    y, yp = circle_point(a[keep]), circle_point(b[keep])
    G = stereo_G(y, yp)
    rhs = np.sum((y + yp) ** 2, -1) / np.sum((y - yp) ** 2, -1)
    res["stereo modulus"] = np.max(np.abs(G**2 - rhs) / (1 + rhs))
    res["graph relations"] = max(float(np.max(v)) for v in graph_check(kappa(xc, 1), kappa(xc, -1)))
    s = rng.uniform(-3, 3, n)
    moved = horocycle_unstable(xc, s)
    e1 = endpoints_B(moved)
    P0 = poisson_kernel(xc.x, e.B_minus)
    res["horocycle invariance"] = max(np.max(np.abs(e1.B_minus - e.B_minus)),
                         np.max(np.abs(poisson_kernel(moved.x, e.B_minus) - P0) / P0))
    slope = (stereo_G(e.B_minus, e1.B_plus) - stereo_G(e.B_minus, e.B_plus)) / s
    sign = np.sign(slope[0])
    res["horocycle linearity"] = np.max(np.abs(slope - sign * P0) / P0)
    w = np.exp(1j * rng.uniform(0, 2 * math.pi, n))
    viol = 0
    for _ in range(20):
        p, q, r = rng.normal(size=3) * 3
        g = np.array([[p, q], [r, (1 + q * r) / p]])
        D = mobius_boundary_derivative(g, w)
        m = matrix_size(g)
        viol += int(np.sum((D < 1 / (2 * m) * (1 - 1e-12)) | (D > 2 * m * (1 + 1e-12))))
    res["derivative-bound violations"] = viol
    shift = 0.0
    for t in (0.1, 1.0, 2.0):
        mv = geodesic_flow(xc, t)
        for sg in (1, -1):
            shift = max(shift, np.max(np.abs(kappa(mv, sg).theta - (kappa(xc, sg).theta - t))))
    res["theta-shift"] = shift
    aa = rng.uniform(0, 2 * math.pi, n)
    bb = aa + rng.uniform(0.1, 2 * math.pi - 0.1, n)
    step = 1e-6
    f = lambda t: np.log(np.sum((circle_point(t) - circle_point(bb)) ** 2, axis=-1))  # noqa: E731
    fd = (f(aa + step) - f(aa - step)) / (2 * step)
    fd_err = float(np.max(np.abs(fd + stereo_G(circle_point(aa), circle_point(bb)))))
    ok = all(v < 1e-8 for v in res.values()) and fd_err < 1e-6
    detail = ", ".join(f"{k} {v:.1e}" for k, v in res.items()) + f", log-distance derivative (FD) {fd_err:.1e}"
    verdict("AC9", ok, detail)


def test_ac10_schottky(verdict):
    worst_tr = worst_pair = 0.0
    for ls in ((2, 2, 2), (2, 3, 4), (1, 1, 5)):
        r = schottky_residuals(build_three_funnel(*ls))
        worst_tr = max(worst_tr, r["trace1"], r["trace2"], r["trace12"])
        worst_pair = max(worst_pair, r["pairing"])
    scales = [1e-1, 1e-2, 1e-3, 1e-4]
    d6 = minkowski_dimension(schottky_family(build_three_funnel(6, 6, 6), scales)).slope
    d1 = minkowski_dimension(schottky_family(build_three_funnel(1, 1, 1), scales)).slope
    ok = worst_tr <= 1e-10 and worst_pair <= 1e-8 and d6 < d1
    verdict("AC10", ok, f"trace residual {worst_tr:.1e}, pairing {worst_pair:.1e}, delta(6,6,6)={d6:.4f} < delta(1,1,1)={d1:.4f}")


def test_ac11_fup_sandwich(verdict, circle_cantor):
    hs = [2.0**-k for k in range(6, 12)]
    sweep = fup_exponent(circle_cantor, hs, rho=0.9, delta=DELTA_CANTOR)
    lo = max(0.0, 0.5 - DELTA_CANTOR) - 0.05
    hi = 0.5 - DELTA_CANTOR / 2 + 0.05
    beta = sweep.beta
    bounds_ok = all(n <= tb1 and n <= tb2 for _, n, tb1, tb2, _ in sweep.rows)
    shifts = []
    for h, n, *_ in sweep.rows:
        fine = operator_norm(build_fup_matrix(circle_cantor, h, rho=0.9, c=0.25)).value
        shifts.append(abs(fine - n) / n)
    ok = lo <= beta <= hi and bounds_ok and max(shifts) < 0.01
    verdict(
        "AC11",
        ok,
        f"beta {beta:.4f} in [{lo:.4f}, {hi:.4f}]; trivial bounds {'respected' if bounds_ok else 'violated'}; "
        f"max refinement shift {max(shifts) * 100:.2f}%",
    )


def test_ac12_jn_probe(verdict, circle_cantor):
    h = 2.0**-9
    y0, y1 = _probe_points(circle_cantor)
    ratio = jn_lower_probe(circle_cantor, h, y0, y1, 0.2)
    floor = h ** (0.5 - DELTA_CANTOR / 2 + 0.15)
    verdict("AC12", ratio >= floor, f"ratio {ratio:.4f} vs floor {floor:.4f}")


def test_ac13_kernel_decay(verdict, circle_cantor):
    r = kernel_decay(circle_cantor, 2.0**-10)
    verdict("AC13", r.ratio <= 1e-3, f"far/near ratio {r.ratio:.3e} (need <= 1e-3) over {r.n_points} points")


def test_ac14_determinism(verdict, tmp_path):
    outs = []
    for run in ("a", "b"):
        prefix = tmp_path / run
        assert main(["full-report", "--cantor", "3:02", "--depth", "8", "--scales", "3e-4:3e-1", "-o", str(prefix)]) == 0
        outs.append((tmp_path / f"{run}.json").read_bytes())
    json.loads(outs[0])
    verdict("AC14", outs[0] == outs[1], f"two full-report runs, {len(outs[0])} bytes each, identical={outs[0] == outs[1]}")
