"""Review-queue ordering along a short open path over Jaccard distances.

Similar articles end up adjacent: build the full pairwise distance
matrix (1 - estimated Jaccard), construct a nearest-neighbor path from
the most central vertex, polish it with 2-opt until no single move
improves it, then cut the path into review groups at distant edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .similarity import DocumentSignature, jaccard_estimate

DEFAULT_GROUP_CUT = 0.5


@dataclass(frozen=True)
class DistanceMatrix:
    ids: tuple[str, ...]
    d: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.ids)
        if self.d.shape != (n, n):
            raise ValueError(f"distance matrix shape {self.d.shape} does not match {n} ids")


@dataclass(frozen=True)
class ReviewPath:
    order: tuple[str, ...]
    total_length: float
    groups: tuple[tuple[str, ...], ...]


def build_distance_matrix(
    ids: Sequence[str], signatures: Sequence[DocumentSignature]
) -> DistanceMatrix:
    """Symmetric zero-diagonal matrix of 1 - jaccard_estimate per pair."""
    if len(ids) != len(signatures):
        raise ValueError("ids and signatures differ in length")
    if not ids:
        raise ValueError("at least one article is required")
    n = len(ids)
    d = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            dist = 1.0 - jaccard_estimate(signatures[i], signatures[j])
            d[i, j] = d[j, i] = dist
    return DistanceMatrix(ids=tuple(ids), d=d)


def path_length(d: np.ndarray, order: Sequence[int]) -> float:
    idx = np.asarray(order)
    return float(d[idx[:-1], idx[1:]].sum())


def _nearest_neighbor_order(d: np.ndarray, ids: Sequence[str]) -> list[int]:
    n = d.shape[0]
    # Start from the most central vertex; ids break exact ties.
    sums = d.sum(axis=1)
    start = min(range(n), key=lambda i: (sums[i], ids[i]))
    order = [start]
    remaining = set(range(n)) - {start}
    while remaining:
        last = order[-1]
        nxt = min(remaining, key=lambda j: (d[last, j], ids[j]))
        order.append(nxt)
        remaining.remove(nxt)
    return order


def _two_opt(d: np.ndarray, order: list[int]) -> list[int]:
    """Reverse segments until no 2-opt move shortens the open path.

    Endpoints are handled by padding the path with virtual terminals at
    distance zero from everything, so prefix/suffix reversals are
    ordinary moves.
    """
    n = len(order)
    if n < 3:
        return order
    improved = True
    while improved:
        improved = False
        # Edge i is (order[i-1], order[i]); i == 0 is the virtual start edge.
        for i in range(0, n - 1):
            for j in range(i + 1, n):
                # Reversing order[i:j+1] replaces edges (i-1,i) and (j,j+1).
                before = d[order[i - 1], order[i]] if i > 0 else 0.0
                after = d[order[j], order[j + 1]] if j + 1 < n else 0.0
                new_before = d[order[i - 1], order[j]] if i > 0 else 0.0
                new_after = d[order[i], order[j + 1]] if j + 1 < n else 0.0
                delta = (new_before + new_after) - (before + after)
                if delta < -1e-12:
                    order[i : j + 1] = reversed(order[i : j + 1])
                    improved = True
    return order


def has_improving_two_opt_move(d: np.ndarray, order: Sequence[int]) -> bool:
    """Exhaustive scan used by tests to assert local optimality."""
    order = list(order)
    n = len(order)
    for i in range(0, n - 1):
        for j in range(i + 1, n):
            before = d[order[i - 1], order[i]] if i > 0 else 0.0
            after = d[order[j], order[j + 1]] if j + 1 < n else 0.0
            new_before = d[order[i - 1], order[j]] if i > 0 else 0.0
            new_after = d[order[i], order[j + 1]] if j + 1 < n else 0.0
            if (new_before + new_after) - (before + after) < -1e-12:
                return True
    return False


def order_queue(m: DistanceMatrix) -> ReviewPath:
    """Nearest-neighbor construction plus 2-opt polish; deterministic."""
    indices = _two_opt(m.d, _nearest_neighbor_order(m.d, m.ids))
    # A path and its reverse have equal length; normalize by id order.
    if m.ids[indices[-1]] < m.ids[indices[0]]:
        indices.reverse()
    order = tuple(m.ids[i] for i in indices)
    return ReviewPath(
        order=order,
        total_length=path_length(m.d, indices),
        groups=(order,),
    )


def segment_groups(
    path: ReviewPath, m: DistanceMatrix, cut: float = DEFAULT_GROUP_CUT
) -> ReviewPath:
    """Cut every consecutive edge with distance greater than `cut`."""
    pos = {article_id: i for i, article_id in enumerate(m.ids)}
    groups: list[tuple[str, ...]] = []
    current: list[str] = []
    for article_id in path.order:
        if current and m.d[pos[current[-1]], pos[article_id]] > cut:
            groups.append(tuple(current))
            current = []
        current.append(article_id)
    if current:
        groups.append(tuple(current))
    return ReviewPath(order=path.order, total_length=path.total_length, groups=tuple(groups))
