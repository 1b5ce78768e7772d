"""Hierarchical relations between artists from sales correlations: Pearson
matrix over co-observed weeks, the sqrt(2(1-rho)) metric, minimum spanning
tree and its single-linkage dendrogram.

Ties are always broken lexicographically by artist label, so identical
inputs give identical trees on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DataError, Panel, ValidationError


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Pairwise Pearson coefficients; entries without enough shared
    uncensored weeks are NaN and flagged in ``missing``."""

    labels: tuple[str, ...]
    rho: np.ndarray
    missing: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.labels)
        if self.rho.shape != (n, n) or self.missing.shape != (n, n):
            raise ValidationError("matrix shape does not match labels")

    def is_complete(self) -> bool:
        return not bool(self.missing.any())


@dataclass(frozen=True)
class TreeEdge:
    node_a: str
    node_b: str
    distance: float


@dataclass(frozen=True)
class CorrelationTree:
    """Edge list of an MST, or the merge list of a dendrogram where each
    merge joins the clusters containing node_a and node_b at the given
    height."""

    edges: tuple[TreeEdge, ...]
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in ("mst", "dendrogram"):
            raise ValidationError(f"kind must be 'mst' or 'dendrogram', got {self.kind!r}")

    def total_weight(self) -> float:
        return math.fsum(e.distance for e in self.edges)

    def heights(self) -> list[float]:
        return [e.distance for e in self.edges]


def correlation_matrix(panel: Panel, min_overlap: int = 52) -> CorrelationMatrix:
    """Pairwise Pearson correlation over the weeks where both series are
    uncensored.

    Pairs sharing fewer than ``min_overlap`` such weeks, and pairs where
    either series is constant on the shared window, are flagged missing.
    A series with no variance across all its uncensored weeks is an error.
    """
    if len(panel) < 1:
        raise DataError("empty panel")
    series = sorted(panel.series, key=lambda s: s.artist_id)
    labels = tuple(s.artist_id for s in series)
    for s in series:
        vals = s.values[~s.censored]
        if len(vals) >= 2 and float(np.var(vals)) == 0.0:
            raise DataError(f"zero variance in uncensored sales of artist {s.artist_id!r}")
    n = len(series)
    rho = np.eye(n)
    missing = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = series[i], series[j]
            lo = max(a.start_week, b.start_week)
            hi = min(a.end_week, b.end_week)
            if hi - lo < 1:
                missing[i, j] = missing[j, i] = True
                rho[i, j] = rho[j, i] = np.nan
                continue
            va = a.values[lo - a.start_week : hi - a.start_week]
            vb = b.values[lo - b.start_week : hi - b.start_week]
            ok = ~(a.censored[lo - a.start_week : hi - a.start_week]
                   | b.censored[lo - b.start_week : hi - b.start_week])
            if int(np.count_nonzero(ok)) < min_overlap:
                missing[i, j] = missing[j, i] = True
                rho[i, j] = rho[j, i] = np.nan
                continue
            xa = va[ok] - va[ok].mean()
            xb = vb[ok] - vb[ok].mean()
            sa = float(np.dot(xa, xa))
            sb = float(np.dot(xb, xb))
            if sa == 0.0 or sb == 0.0:
                missing[i, j] = missing[j, i] = True
                rho[i, j] = rho[j, i] = np.nan
                continue
            r = float(np.dot(xa, xb)) / math.sqrt(sa * sb)
            r = min(1.0, max(-1.0, r))
            rho[i, j] = rho[j, i] = r
    return CorrelationMatrix(labels, rho, missing)


def correlation_distance(cm: CorrelationMatrix) -> np.ndarray:
    """Metric distance d = sqrt(2(1 - rho)); 0 at rho=1, 2 at rho=-1.
    Missing correlations propagate as NaN."""
    return np.sqrt(np.maximum(2.0 * (1.0 - cm.rho), 0.0))


def _check_distance_matrix(d: np.ndarray, labels: tuple[str, ...] | None) -> tuple[str, ...]:
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    if d.ndim != 2 or d.shape != (n, n):
        raise ValidationError("distance matrix must be square")
    if n < 2:
        raise DataError("need at least two nodes to build a tree")
    if np.any(~np.isfinite(d[~np.eye(n, dtype=bool)])):
        raise DataError("distance matrix has missing entries; tree undefined")
    if labels is None:
        labels = tuple(f"n{i}" for i in range(n))
    if len(labels) != n:
        raise ValidationError("labels length does not match matrix")
    return labels


def _sorted_edges(d: np.ndarray, labels: tuple[str, ...]):
    n = d.shape[0]
    order = sorted(range(n), key=lambda i: labels[i])
    pairs = []
    for ii in range(n):
        for jj in range(ii + 1, n):
            i, j = order[ii], order[jj]
            pairs.append((float(d[i, j]), labels[i], labels[j]))
    pairs.sort()
    return pairs


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        # keep the lexicographically smaller label as representative
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def minimum_spanning_tree(
    d: np.ndarray, labels: tuple[str, ...] | None = None
) -> CorrelationTree:
    """Kruskal MST over a complete distance matrix with lexicographic
    tie-breaking; edges are returned in the order they were added."""
    labels = _check_distance_matrix(np.asarray(d, dtype=np.float64), labels)
    uf = _UnionFind(labels)
    edges = []
    for dist, a, b in _sorted_edges(np.asarray(d, dtype=np.float64), labels):
        if uf.union(a, b):
            edges.append(TreeEdge(a, b, dist))
            if len(edges) == len(labels) - 1:
                break
    return CorrelationTree(tuple(edges), "mst")


def single_linkage_dendrogram(
    d: np.ndarray, labels: tuple[str, ...] | None = None
) -> CorrelationTree:
    """Agglomerative single-linkage merges.

    Built from the MST edges in ascending order, which is equivalent to the
    classic nearest-cluster agglomeration: the merge heights are exactly the
    sorted MST edge weights.  Each merge is recorded between the current
    representatives (lexicographically smallest member) of the two clusters.
    """
    labels = _check_distance_matrix(np.asarray(d, dtype=np.float64), labels)
    mst = minimum_spanning_tree(d, labels)
    ordered = sorted(mst.edges, key=lambda e: (e.distance, e.node_a, e.node_b))
    uf = _UnionFind(labels)
    merges = []
    for e in ordered:
        ra, rb = uf.find(e.node_a), uf.find(e.node_b)
        if rb < ra:
            ra, rb = rb, ra
        uf.union(ra, rb)
        merges.append(TreeEdge(ra, rb, e.distance))
    return CorrelationTree(tuple(merges), "dendrogram")
