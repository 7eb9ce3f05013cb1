"""Training protocol for the suggestion models.

Reproduces the full protocol on top of the linear scorer: a seeded
70/15/15 split, stratified batches of 12 with a fixed (6,4,1,1) class
composition for the counting task, Adam over cross-entropy, validation
every 500 steps with best-checkpoint selection, and skip-threshold
calibration from the scored validation set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linear_model import (
    TASK_COUNT4,
    TASK_TAGS,
    Hyperparams,
    LinearModel,
    adam_step,
    loss_and_grad,
    predict,
)
from .text_features import FeatureVector


class TrainingConfigError(ValueError):
    pass


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 12
    iterations: int = 10_000
    eval_every: int = 500
    strata: tuple[int, ...] = (6, 4, 1, 1)
    split: tuple[float, float, float] = (0.70, 0.15, 0.15)
    seed: int = 0

    def __post_init__(self) -> None:
        if sum(self.strata) != self.batch_size:
            raise TrainingConfigError(
                f"strata {self.strata} must sum to batch size {self.batch_size}"
            )
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise TrainingConfigError(f"split fractions {self.split} must sum to 1")


@dataclass(frozen=True)
class LabeledDoc:
    """One training document: features plus a task label.

    `label` is a class index for softmax tasks and a multi-hot float
    array (one entry per output) for the tags task.
    """

    features: FeatureVector
    label: int | np.ndarray


@dataclass
class EvalPoint:
    iteration: int
    train_loss: float
    val_loss: float


@dataclass
class TrainingLog:
    split_sizes: tuple[int, int, int]
    evals: list[EvalPoint] = field(default_factory=list)
    batch_compositions: list[tuple[int, ...]] = field(default_factory=list)
    best_iteration: int = 0

    def to_csv(self) -> str:
        lines = ["iteration,train_loss,val_loss"]
        lines.extend(f"{e.iteration},{e.train_loss:.6f},{e.val_loss:.6f}" for e in self.evals)
        return "\n".join(lines) + "\n"


def split_corpus(
    n: int, fractions: tuple[float, float, float], seed: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded shuffle split; sizes are round(f*N) for train/val, remainder test."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = round(fractions[0] * n)
    n_val = round(fractions[1] * n)
    if n_train + n_val > n:
        raise TrainingConfigError(f"split fractions {fractions} overflow corpus of {n}")
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def stratified_batch(
    pool: Sequence[LabeledDoc],
    strata: tuple[int, ...],
    rng: np.random.Generator,
) -> list[LabeledDoc]:
    """Batch with exactly strata[c] documents of class c, uniform within class.

    Classes short of their quota are sampled with replacement; a class
    with no documents at all is a configuration error.
    """
    by_class: dict[int, list[int]] = {c: [] for c in range(len(strata))}
    for i, doc in enumerate(pool):
        label = int(doc.label)
        if label in by_class:
            by_class[label].append(i)
    batch: list[LabeledDoc] = []
    for cls, quota in enumerate(strata):
        members = by_class[cls]
        if not members:
            raise TrainingConfigError(f"class {cls} absent from training pool")
        replace = len(members) < quota
        chosen = rng.choice(len(members), size=quota, replace=replace)
        batch.extend(pool[members[int(j)]] for j in chosen)
    return batch


def _uniform_batch(
    pool: Sequence[LabeledDoc], size: int, rng: np.random.Generator
) -> list[LabeledDoc]:
    chosen = rng.choice(len(pool), size=size, replace=len(pool) < size)
    return [pool[int(i)] for i in chosen]


def _batch_labels(model_task: str, batch: Sequence[LabeledDoc]) -> np.ndarray:
    if model_task == TASK_TAGS:
        return np.stack([np.asarray(doc.label, dtype=np.float64) for doc in batch])
    return np.array([int(doc.label) for doc in batch], dtype=np.int64)


def mean_loss(model: LinearModel, docs: Sequence[LabeledDoc]) -> float:
    loss, _, _ = loss_and_grad(model, [d.features for d in docs], _batch_labels(model.task, docs))
    return loss


def train(
    corpus: Sequence[LabeledDoc],
    task: str,
    output_names: Sequence[str],
    dim: int,
    config: TrainConfig,
    hyperparams: Hyperparams | None = None,
) -> tuple[LinearModel, TrainingLog]:
    """Train on a seeded split and return the best-validation checkpoint."""
    if not corpus:
        raise TrainingConfigError("corpus is empty")
    train_idx, val_idx, test_idx = split_corpus(len(corpus), config.split, config.seed)
    train_docs = [corpus[i] for i in train_idx]
    val_docs = [corpus[i] for i in val_idx]
    log = TrainingLog(split_sizes=(len(train_idx), len(val_idx), len(test_idx)))

    model = LinearModel.zeros(task, output_names, dim, hyperparams)
    rng = np.random.default_rng(config.seed + 1)
    eval_pool = val_docs if val_docs else train_docs

    best = model.copy_without_adam()
    best_val = math.inf

    def evaluate_point(iteration: int) -> None:
        nonlocal best, best_val
        point = EvalPoint(
            iteration=iteration,
            train_loss=mean_loss(model, train_docs),
            val_loss=mean_loss(model, eval_pool),
        )
        log.evals.append(point)
        if point.val_loss < best_val:
            best_val = point.val_loss
            best = model.copy_without_adam()
            log.best_iteration = iteration

    evaluate_point(0)
    for iteration in range(1, config.iterations + 1):
        if task == TASK_COUNT4:
            batch = stratified_batch(train_docs, config.strata, rng)
            counts = [0] * len(config.strata)
            for doc in batch:
                counts[int(doc.label)] += 1
            log.batch_compositions.append(tuple(counts))
        else:
            batch = _uniform_batch(train_docs, config.batch_size, rng)
        _, grad_w, grad_b = loss_and_grad(
            model, [d.features for d in batch], _batch_labels(task, batch)
        )
        adam_step(model, grad_w, grad_b)
        if iteration % config.eval_every == 0:
            evaluate_point(iteration)

    return best, log


@dataclass(frozen=True)
class EvalReport:
    classes: tuple[str, ...]
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    support: tuple[int, ...]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    confusion: np.ndarray  # rows true, columns predicted


def report_from_confusion(confusion: np.ndarray, classes: Sequence[str]) -> EvalReport:
    n = len(classes)
    if confusion.shape != (n, n):
        raise ValueError("confusion matrix shape does not match class count")
    support = confusion.sum(axis=1)
    predicted = confusion.sum(axis=0)
    precision, recall, f1 = [], [], []
    for c in range(n):
        tp = float(confusion[c, c])
        p = tp / predicted[c] if predicted[c] else 0.0
        r = tp / support[c] if support[c] else 0.0
        f = 2 * p * r / (p + r) if (p + r) else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(f)
    total = float(support.sum())
    weights = support / total if total else np.zeros(n)
    return EvalReport(
        classes=tuple(classes),
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        support=tuple(int(s) for s in support),
        weighted_precision=float(np.dot(weights, precision)),
        weighted_recall=float(np.dot(weights, recall)),
        weighted_f1=float(np.dot(weights, f1)),
        confusion=confusion,
    )


def evaluate(model: LinearModel, test_set: Sequence[LabeledDoc]) -> EvalReport:
    """Per-class precision/recall/F1 with support-weighted averages."""
    if not test_set:
        raise ValueError("test set is empty")
    n = model.n_outputs
    confusion = np.zeros((n, n), dtype=np.int64)
    for doc in test_set:
        probs = predict(model, doc.features)
        confusion[int(doc.label), int(np.argmax(probs))] += 1
    return report_from_confusion(confusion, model.output_names)


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    true_positive_rate: float
    false_positive_rate: float


def roc_points(scores: Sequence[tuple[float, bool]]) -> list[RocPoint]:
    """Skip-decision ROC: a "positive" is skipping (score below threshold).

    True positives skip out-of-domain articles; false positives skip
    in-domain ones. Points are ordered by ascending threshold.
    """
    in_scores = np.sort([s for s, in_domain in scores if in_domain])
    out_scores = np.sort([s for s, in_domain in scores if not in_domain])
    points = []
    for t in sorted({s for s, _ in scores}) + [math.inf]:
        tpr = float(np.searchsorted(out_scores, t, side="left")) / max(len(out_scores), 1)
        fpr = float(np.searchsorted(in_scores, t, side="left")) / max(len(in_scores), 1)
        points.append(RocPoint(threshold=t, true_positive_rate=tpr, false_positive_rate=fpr))
    return points


def calibrate_threshold(scores: Sequence[tuple[float, bool]], max_fpr: float = 0.017) -> float:
    """Largest skip threshold keeping the in-domain below-threshold rate <= max_fpr.

    With P in-domain scores, at most floor(max_fpr * P) of them may fall
    strictly below the returned threshold, so the threshold is the
    (k+1)-th smallest in-domain score for k = floor(max_fpr * P).
    """
    in_scores = sorted(s for s, in_domain in scores if in_domain)
    if not in_scores:
        raise CalibrationError("cannot calibrate without in-domain examples")
    k = math.floor(max_fpr * len(in_scores))
    if k >= len(in_scores):
        return math.inf
    return in_scores[k]


def suggest_tags(
    model: LinearModel,
    x: FeatureVector,
    top_k: int,
    opposites: dict[str, str] | None = None,
) -> list[tuple[str, float]]:
    """Top-k tags by sigmoid score, never pairing a position with its opposite.

    Ties break by tag name; when both members of an opposite pair rank,
    the lower-scoring one is dropped and the list backfills.
    """
    if model.task != TASK_TAGS:
        raise ValueError(f"tag suggestion requires a tags model, got {model.task!r}")
    if top_k <= 0:
        return []
    scores = predict(model, x)
    ranked = sorted(zip(model.output_names, scores), key=lambda item: (-item[1], item[0]))
    opposites = opposites or {}
    chosen: list[tuple[str, float]] = []
    taken: set[str] = set()
    for name, score in ranked:
        if opposites.get(name) in taken:
            continue
        chosen.append((name, float(score)))
        taken.add(name)
        if len(chosen) == top_k:
            break
    return chosen
