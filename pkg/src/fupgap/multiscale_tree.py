"""Multiscale trees of merged grid cells, their powers, and triple pruning."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import ResourceError, ValidationError
from .fractal_sets import IntervalCover, merge_intervals

NODE_BUDGET = 10**7


class Tree:
    """Rooted tree with every leaf at height N, stored as parent/height arrays."""

    def __init__(self, parent, height, N: int | None = None):
        self.parent = np.asarray(parent, dtype=np.int64)
        self.height = np.asarray(height, dtype=np.int64)
        self.N = int(self.height.max()) if N is None else int(N)
        if len(self.parent) == 0 or self.parent[0] != -1 or self.height[0] != 0:
            raise ValidationError("vertex 0 must be the root")
        if np.any(self.height[1:] != self.height[self.parent[1:]] + 1):
            raise ValidationError("parent heights must be one less than child heights")

    def __len__(self) -> int:
        return len(self.parent)

    @cached_property
    def children(self) -> list[np.ndarray]:
        order = np.argsort(self.parent[1:], kind="stable") + 1
        splits = np.searchsorted(self.parent[order], np.arange(len(self) + 1))
        return [order[splits[v] : splits[v + 1]] for v in range(len(self))]

    @cached_property
    def leaf_counts(self) -> np.ndarray:
        cnt = (self.height == self.N).astype(np.int64)
        for v in np.argsort(-self.height, kind="stable"):
            if self.parent[v] >= 0:
                cnt[self.parent[v]] += cnt[v]
        return cnt

    def level(self, h: int) -> np.ndarray:
        return np.flatnonzero(self.height == h)

    @property
    def n_leaves(self) -> int:
        return int(self.leaf_counts[0])

    @classmethod
    def perfect(cls, branching: int, N: int) -> "Tree":
        parent, height = [-1], [0]
        frontier = [0]
        for h in range(1, N + 1):
            nxt = []
            for p in frontier:
                for _ in range(branching):
                    parent.append(p)
                    height.append(h)
                    nxt.append(len(parent) - 1)
            frontier = nxt
        return cls(parent, height, N)


class MultiscaleTree(Tree):
    """Merged nonempty base-M grid cells of a set at heights 0..N.

    Vertex intervals are [cell_lo·M^-h, cell_hi·M^-h) with integer cell bounds.
    """

    def __init__(self, M, N, parent, height, cell_lo, cell_hi, warnings=()):
        super().__init__(parent, height, N)
        self.M = int(M)
        self.cell_lo = np.asarray(cell_lo, dtype=np.int64)
        self.cell_hi = np.asarray(cell_hi, dtype=np.int64)
        self.warnings = list(warnings)

    @property
    def lo(self) -> np.ndarray:
        return self.cell_lo * float(self.M) ** -self.height.astype(float)

    @property
    def hi(self) -> np.ndarray:
        return self.cell_hi * float(self.M) ** -self.height.astype(float)

    def __eq__(self, other):
        return (
            isinstance(other, MultiscaleTree)
            and (self.M, self.N) == (other.M, other.N)
            and all(
                np.array_equal(getattr(self, k), getattr(other, k))
                for k in ("parent", "height", "cell_lo", "cell_hi")
            )
        )


def discretize(X: IntervalCover, M: int, N: int, C1: float | None = None) -> MultiscaleTree:
    """Tree of merged runs of base-M cells meeting X, at every height 0..N.

    Closed set intervals are tested against half-open cells, so a set point on
    a cell's left edge marks that cell. Runs longer than ``C1`` cells produce a
    warning record.
    """
    if M < 2:
        raise ValidationError("M must be at least 2")
    if N < 0 or float(M) ** N * np.finfo(float).eps >= 1:
        raise ValidationError("M^N too large for double precision")
    if len(X) == 0:
        raise ValidationError("X is empty")
    if X.intervals[0, 0] < 0 or X.intervals[-1, 1] > 1:
        raise ValidationError("X must lie in [0, 1]")
    parent, height, clo, chi, warns = [-1], [0], [0], [1], []
    prev_lo = np.array([0], dtype=np.int64)
    prev_ids = np.array([0])
    for j in range(1, N + 1):
        scale = M**j
        a = np.floor(X.lo * scale + 1e-9).astype(np.int64)
        b = np.minimum(np.floor(X.hi * scale + 1e-9).astype(np.int64), scale - 1)
        keep = a <= b
        runs = merge_intervals(np.stack([a[keep], b[keep] + 1], axis=1).astype(float)).astype(np.int64)
        lo_j, hi_j = runs[:, 0], runs[:, 1]
        # parent: the previous-level run containing this run's first cell
        par_pos = np.searchsorted(prev_lo * M, lo_j, side="right") - 1
        ids = np.arange(len(parent), len(parent) + len(runs))
        parent.extend(prev_ids[par_pos].tolist())
        height.extend([j] * len(runs))
        clo.extend(lo_j.tolist())
        chi.extend(hi_j.tolist())
        if C1 is not None:
            for k in np.flatnonzero(hi_j - lo_j > C1):
                warns.append({"height": j, "cells": int(hi_j[k] - lo_j[k]), "bound": C1})
        prev_lo, prev_ids = lo_j, ids
    return MultiscaleTree(M, N, parent, height, clo, chi, warns)


def check_tree_structure(T: MultiscaleTree) -> list[str]:
    """Containment in the parent, uniqueness of the parent, and gaps between siblings."""
    problems = []
    lo, hi = T.cell_lo, T.cell_hi
    for v in range(1, len(T)):
        p = T.parent[v]
        if not (lo[p] * T.M <= lo[v] and hi[v] <= hi[p] * T.M):
            problems.append(f"vertex {v} not inside its parent")
    for h in range(1, T.N + 1):
        ids = T.level(h)
        if np.any(lo[ids][1:] <= hi[ids][:-1]):
            problems.append(f"height {h}: vertices not separated by an empty cell")
    return problems


# ---------------------------------------------------------------------------


def _level_extremes(T: Tree):
    mins = np.full(T.N + 1, np.iinfo(np.int64).max)
    maxs = np.zeros(T.N + 1, dtype=np.int64)
    np.minimum.at(mins, T.height, T.leaf_counts)
    np.maximum.at(maxs, T.height, T.leaf_counts)
    return mins, maxs


def tree_regularity(T, B: float, C: float) -> tuple[bool, float]:
    """Whether C⁻¹B^{N−h} ≤ leafcount ≤ C·B^{N−h} at every vertex, and the worst ratio."""
    if not B > 1 or C < 1:
        raise ValidationError("need B > 1 and C >= 1")
    if isinstance(T, TreePower):
        mins, maxs = _level_extremes(T.base)
        mins, maxs = mins.astype(float) ** T.j, maxs.astype(float) ** T.j
    else:
        mins, maxs = _level_extremes(T)
    expect = B ** (T.N - np.arange(T.N + 1, dtype=float))
    with np.errstate(divide="ignore"):
        worst = float(np.max(np.maximum(maxs / expect, expect / mins)))
    return worst <= C * (1 + 1e-12), worst


@dataclass(frozen=True)
class TreePower:
    """Lazy j-th power: vertices are j-tuples of same-height vertices."""

    base: Tree
    j: int

    @property
    def N(self) -> int:
        return self.base.N

    def children(self, v: tuple) -> list[tuple]:
        return list(itertools.product(*(self.base.children[c] for c in v)))

    def leaf_count(self, v: tuple) -> int:
        return int(np.prod([self.base.leaf_counts[c] for c in v]))

    @property
    def root(self) -> tuple:
        return (0,) * self.j

    @property
    def n_leaves(self) -> int:
        return self.base.n_leaves**self.j

    def materialize(self, budget: int = 10**6) -> Tree:
        parent, height = [-1], [0]
        index = {self.root: 0}
        frontier = [self.root]
        for h in range(1, self.N + 1):
            nxt = []
            for v in frontier:
                for c in self.children(v):
                    index[c] = len(parent)
                    parent.append(index[v])
                    height.append(h)
                    nxt.append(c)
                    if len(parent) > budget:
                        raise ResourceError("power tree too large to materialize")
            frontier = nxt
        return Tree(parent, height, self.N)


def tree_power(T: Tree, j: int) -> TreePower:
    if j < 1:
        raise ValidationError("j must be at least 1")
    return TreePower(T, j)


# ---------------------------------------------------------------------------


@dataclass(eq=False)
class TripleTree:
    """Evaluated triples of the cube of a tree.

    Rows of ``triples`` are vertex-index triples; ``hit`` marks triples whose
    combination I₁ − I₂ + I₃ meets the M^{-h} neighbourhood of the set. Only
    children of hitting triples are evaluated, so the hitting rows form the
    pruned subtree. ``parent`` indexes rows.
    """

    underlying: MultiscaleTree
    triples: np.ndarray
    height: np.ndarray
    parent: np.ndarray
    hit: np.ndarray

    def __eq__(self, other):
        return isinstance(other, TripleTree) and all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in ("triples", "height", "parent", "hit")
        )

    @property
    def N(self) -> int:
        return self.underlying.N

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.hit & (self.height == self.N)))

    def leaf_set(self) -> set:
        rows = np.flatnonzero(self.hit & (self.height == self.N))
        return {tuple(t) for t in self.triples[rows].tolist()}


def _neighbourhood(X: IntervalCover, r: float):
    m = merge_intervals(X.intervals + np.array([-r, r]))
    return m[:, 0], m[:, 1]


def triple_hits(T: MultiscaleTree, X: IntervalCover, triples: np.ndarray, h: int) -> np.ndarray:
    lo, hi = T.lo, T.hi
    a = lo[triples[:, 0]] - hi[triples[:, 1]] + lo[triples[:, 2]]
    b = hi[triples[:, 0]] - lo[triples[:, 1]] + hi[triples[:, 2]]
    c, d = _neighbourhood(X, float(T.M) ** -h)
    return _kernels.interval_hits(a, b, c, d)


def prune_triples(T: MultiscaleTree, X: IntervalCover, node_budget: int = NODE_BUDGET) -> TripleTree:
    """Pruned subtree of T³: keep a triple iff it and all its ancestors hit."""
    kids = T.children
    trip = [np.zeros((1, 3), dtype=np.int64)]
    heights = [np.zeros(1, dtype=np.int64)]
    parents = [np.array([-1])]
    hits = [np.ones(1, dtype=bool)]
    front_rows = np.array([0])
    front = trip[0]
    offset = 1
    for h in range(1, T.N + 1):
        rows, parent_rows = [], []
        for prow, v in zip(front_rows, front):
            c0, c1, c2 = kids[v[0]], kids[v[1]], kids[v[2]]
            if len(c0) and len(c1) and len(c2):
                g = np.stack(np.meshgrid(c0, c1, c2, indexing="ij"), axis=-1).reshape(-1, 3)
                rows.append(g)
                parent_rows.append(np.full(len(g), prow))
        if not rows:
            break
        g = np.concatenate(rows)
        if offset + len(g) > node_budget:
            raise ResourceError(f"triple budget {node_budget} exceeded at height {h}")
        hit = triple_hits(T, X, g, h)
        trip.append(g)
        heights.append(np.full(len(g), h))
        parents.append(np.concatenate(parent_rows))
        hits.append(hit)
        front_rows = offset + np.flatnonzero(hit)
        front = g[hit]
        offset += len(g)
    return TripleTree(T, np.concatenate(trip), np.concatenate(heights), np.concatenate(parents), np.concatenate(hits))


def verify_miss_prop(TT: TripleTree) -> tuple[float, list]:
    """Fraction of retained non-leaf triples with at least one missing child."""
    retained_inner = np.flatnonzero(TT.hit & (TT.height < TT.N))
    if len(retained_inner) == 0:
        return 0.0, []
    child_rows = np.flatnonzero(TT.parent >= 0)
    missing = np.zeros(len(TT.hit), dtype=bool)
    missing_child = ~TT.hit[child_rows]
    np.logical_or.at(missing, TT.parent[child_rows], missing_child)
    has_miss = missing[retained_inner]
    violating = [tuple(TT.triples[r].tolist()) for r in retained_inner[~has_miss]]
    return float(has_miss.mean()), violating


@dataclass(frozen=True)
class PrunedBound:
    lhs: float
    rhs: float
    regular: bool
    pruned: bool

    @property
    def applicable(self) -> bool:
        return self.regular and self.pruned

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12)

    def failures(self) -> list[str]:
        out = []
        if not self.regular:
            out.append("tree is not (B, C)-regular")
        if not self.pruned:
            out.append("subtree is not pruned: some retained non-leaf keeps all its children")
        return out


def pruned_leaf_bound(T, pruned, B: float, C: float) -> PrunedBound:
    """|leaves of T'| against (1 − C⁻²B⁻¹)^N·|leaves of T|.

    ``T`` is a :class:`Tree` with ``pruned`` a boolean mask of retained
    vertices, or the cube power of a tree with ``pruned`` a :class:`TripleTree`.
    """
    regular, _ = tree_regularity(T, B, C)
    if isinstance(pruned, TripleTree):
        base = pruned.underlying
        inner = np.flatnonzero(pruned.hit & (pruned.height < pruned.N))
        child_rows = np.flatnonzero(pruned.parent >= 0)
        kept = np.zeros(len(pruned.hit), dtype=np.int64)
        np.add.at(kept, pruned.parent[child_rows], pruned.hit[child_rows].astype(np.int64))
        nk = np.array([len(c) for c in base.children])
        full = nk[pruned.triples[inner]].prod(axis=1)
        is_pruned = bool(np.all(kept[inner] < full))
        lhs = pruned.n_leaves
        total = base.n_leaves**3
    else:
        mask = np.asarray(pruned, dtype=bool)
        if not mask[0] or np.any(mask[1:] & ~mask[T.parent[1:]]):
            raise ValidationError("retained vertices must form a rooted subtree")
        inner = np.flatnonzero(mask & (T.height < T.N))
        is_pruned = all(mask[T.children[v]].sum() < len(T.children[v]) for v in inner)
        lhs = int(np.sum(mask & (T.height == T.N)))
        total = T.n_leaves
    rhs = (1 - 1 / (C * C * B)) ** T.N * total
    return PrunedBound(float(lhs), float(rhs), regular, is_pruned)
