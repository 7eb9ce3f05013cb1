#!/usr/bin/env python3
"""Compare the greedy+2-opt review ordering against the exhaustive optimum.

Prints the approximation-ratio distribution for random instances at a
range of queue sizes; n <= 9 keeps the factorial oracle tractable.

Usage: python scripts/ordering_benchmark.py [trials-per-size]
"""

from __future__ import annotations

import itertools
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from protest_pipeline.ordering import DistanceMatrix, order_queue


def main() -> None:
    trials = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    rng = np.random.default_rng(0)
    for n in (4, 6, 8):
        perms = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
        ratios = []
        for _ in range(trials):
            raw = rng.random((n, n))
            d = (raw + raw.T) / 2
            np.fill_diagonal(d, 0.0)
            optimum = float(d[perms[:, :-1], perms[:, 1:]].sum(axis=1).min())
            path = order_queue(DistanceMatrix(ids=tuple(map(str, range(n))), d=d))
            ratios.append(path.total_length / optimum if optimum > 0 else 1.0)
        ratios = np.array(ratios)
        print(
            f"n={n}: mean ratio {ratios.mean():.4f}, p95 {np.quantile(ratios, 0.95):.4f},"
            f" max {ratios.max():.4f}, optimal in {float(np.mean(ratios <= 1 + 1e-9)):.1%}"
        )


if __name__ == "__main__":
    main()
