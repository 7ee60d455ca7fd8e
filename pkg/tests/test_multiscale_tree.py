import numpy as np
import pytest

from fupgap.errors import ResourceError, ValidationError
from fupgap.fractal_sets import CantorSpec, IntervalCover, gen_cantor
from fupgap.multiscale_tree import (
    Tree,
    check_tree_structure,
    discretize,
    prune_triples,
    pruned_leaf_bound,
    tree_power,
    tree_regularity,
    verify_miss_prop,
)
from oracles import pruned_triples_bruteforce

FULL = IntervalCover(np.array([[0.0, 1.0]]), 1e-3)
POINT = IntervalCover(np.array([[0.0, 0.0]]), 1e-3)


def cantor(depth=8):
    return gen_cantor(CantorSpec(3, (0, 2), depth))


def test_cantor_level_two():
    T = discretize(cantor(4), 3, 2)
    ids = T.level(2)
    np.testing.assert_allclose(np.stack([T.lo[ids], T.hi[ids]], 1), [[0, 4 / 9], [2 / 3, 1]])


def test_full_and_point_trees():
    T = discretize(FULL, 2, 3)
    assert [len(T.level(h)) for h in range(4)] == [1, 1, 1, 1]
    assert np.allclose(T.lo, 0) and np.allclose(T.hi, 1)
    T = discretize(POINT, 2, 3)
    np.testing.assert_allclose(T.hi, [1, 0.5, 0.25, 0.125])


def test_discretize_errors_and_warnings():
    with pytest.raises(ValidationError):
        discretize(cantor(), 1, 3)
    with pytest.raises(ValidationError):
        discretize(cantor(), 2, 60)
    T = discretize(FULL, 2, 3, C1=2)
    assert T.warnings and T.warnings[0]["height"] == 2


@pytest.mark.parametrize("M,N", [(3, 6), (2, 8), (5, 4), (4, 5)])
def test_structure_invariants(M, N):
    assert check_tree_structure(discretize(cantor(9), M, N)) == []


def test_regularity_examples():
    T = discretize(cantor(), 3, 8)
    ok, worst = tree_regularity(T, 2, 4)
    assert ok and worst <= 4
    ok, worst = tree_regularity(Tree.perfect(2, 5), 2, 1)
    assert ok and worst == 1
    path = Tree([-1, 0, 1, 2], [0, 1, 2, 3])
    assert not tree_regularity(path, 2, 2**3 - 1)[0]
    assert tree_regularity(path, 1.01, 1.1)[0]


def test_power_tree():
    T = Tree.perfect(2, 3)
    P = tree_power(T, 2).materialize()
    assert all(len(c) == 4 for v, c in enumerate(P.children) if P.height[v] < 3)
    assert tree_power(T, 1).materialize().n_leaves == T.n_leaves
    C = discretize(cantor(6), 3, 3)
    assert tree_power(C, 3).n_leaves == C.n_leaves**3


@pytest.mark.parametrize("j", [1, 2, 3])
def test_power_regularity(j):
    T = discretize(cantor(6), 3, 4)
    ok, worst = tree_regularity(T, 2, 4)
    assert ok
    P = tree_power(T, j)
    assert tree_regularity(P, 2**j, worst**j)[0]
    if j <= 2:
        assert tree_regularity(P.materialize(), 2**j, worst**j)[0]


def test_prune_trivial_sets():
    T = discretize(FULL, 2, 3)
    TT = prune_triples(T, FULL)
    assert TT.n_leaves == T.n_leaves**3
    assert verify_miss_prop(TT)[0] == 0.0
    T = discretize(POINT, 2, 3)
    TT = prune_triples(T, POINT)
    assert TT.n_leaves == 1
    assert verify_miss_prop(TT)[0] == 0.0


@pytest.mark.parametrize("M,N", [(3, 3), (3, 4), (3, 5), (2, 4), (4, 3)])
def test_prune_matches_bruteforce(M, N):
    X = cantor(7)
    T = discretize(X, M, N)
    if T.n_leaves > 40:
        pytest.skip("outside the oracle's size range")
    TT = prune_triples(T, X)
    assert TT.leaf_set() == pruned_triples_bruteforce(T, X)


def test_cantor_prune_bounds():
    X = cantor(7)
    T = discretize(X, 3, 5)
    TT = prune_triples(T, X)
    assert 4**5 < TT.n_leaves < (2**5 * 4) ** 3
    frac, bad = verify_miss_prop(TT)
    assert 0 < frac < 1 and len(bad) > 0


def test_prune_budget():
    X = cantor(7)
    with pytest.raises(ResourceError):
        prune_triples(discretize(X, 3, 5), X, node_budget=100)


def _prune_one_child(T):
    mask = np.zeros(len(T), dtype=bool)
    mask[0] = True
    for h in range(T.N):
        for v in T.level(h):
            if mask[v]:
                mask[T.children[v][1:]] = True
    return mask


def test_pruned_bound_examples():
    T = Tree.perfect(2, 6)
    r = pruned_leaf_bound(T, _prune_one_child(T), 2, 1)
    assert r.applicable and r.lhs == 1 and r.rhs == pytest.approx(1)
    T = Tree.perfect(3, 2)
    r = pruned_leaf_bound(T, _prune_one_child(T), 3, 1)
    assert r.applicable and r.lhs == 4 and r.rhs == pytest.approx(4)
    r = pruned_leaf_bound(T, np.ones(len(T), dtype=bool), 3, 1)
    assert not r.pruned and "not pruned" in r.failures()[0]
    orphan = np.zeros(len(T), dtype=bool)
    orphan[[0, T.level(2)[0]]] = True  # a leaf kept without its parent
    with pytest.raises(ValidationError):
        pruned_leaf_bound(T, orphan, 3, 1)


def test_pruned_bound_on_triples():
    X = cantor(7)
    T = discretize(X, 3, 4)
    TT = prune_triples(T, X)
    r = pruned_leaf_bound(tree_power(T, 3), TT, 8, 64)
    if r.applicable:
        assert r.holds
    assert r.lhs == TT.n_leaves
