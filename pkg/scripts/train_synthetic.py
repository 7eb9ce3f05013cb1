#!/usr/bin/env python3
"""Run the full counting-task training protocol on the synthetic corpus.

Useful for eyeballing the loss curve and per-class report without a real
reviewed corpus.

Usage: python scripts/train_synthetic.py [iterations]
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from conftest import make_planted_corpus  # noqa: E402

from protest_pipeline.training import TrainConfig, evaluate, split_corpus, train  # noqa: E402


def main() -> None:
    iterations = int(sys.argv[1]) if len(sys.argv) > 1 else 10_000
    corpus = make_planted_corpus(n=400, dim=4096, seed=7)
    config = TrainConfig(iterations=iterations, eval_every=500, seed=7)
    model, log = train(corpus, "count4", ("C0", "C1", "C2", "C3plus"), 4096, config)
    for point in log.evals:
        print(f"iter {point.iteration:>6}  train {point.train_loss:.4f}  val {point.val_loss:.4f}")
    print(f"best iteration: {log.best_iteration}")
    _, _, test_idx = split_corpus(len(corpus), config.split, config.seed)
    report = evaluate(model, [corpus[i] for i in test_idx])
    for i, name in enumerate(report.classes):
        print(
            f"{name}: P={report.precision[i]:.3f} R={report.recall[i]:.3f}"
            f" F1={report.f1[i]:.3f} (n={report.support[i]})"
        )
    print(f"weighted F1: {report.weighted_f1:.3f}")


if __name__ == "__main__":
    main()
