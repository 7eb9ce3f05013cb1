"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each passing criterion reports one line in the terminal summary. The
dataset-snapshot criterion is skipped with a clear message unless a
snapshot file is supplied via PROTEST_DATASET_CSV.
"""

from __future__ import annotations

import datetime as dt
import itertools
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest

from protest_pipeline.attendees import parse_attendee_phrase
from protest_pipeline.dataset_io import ColumnMapping, DEFAULT_MAPPING, import_dataset
from protest_pipeline.nilsimsa import nilsimsa_compare, nilsimsa_digest
from protest_pipeline.ordering import (
    DistanceMatrix,
    has_improving_two_opt_move,
    order_queue,
)
from protest_pipeline.pipeline import ModelRegistry
from protest_pipeline.similarity import jaccard_estimate, jaccard_exact, sign_tokens
from protest_pipeline.store import EventStore
from protest_pipeline.training import (
    TrainConfig,
    calibrate_threshold,
    evaluate,
    split_corpus,
    train,
)
from protest_pipeline.worddiff import apply_diff, word_diff

from conftest import ACCEPTANCE_LINES, make_planted_corpus
from test_linear_model import finite_difference_check
from test_pipeline import fixture_sources, make_pipeline, seed_reviewed_original

VECTOR_FILE = Path(__file__).parent / "data" / "nilsimsa_vectors.txt"


def report(name: str, started: float, budget: float) -> None:
    elapsed = time.perf_counter() - started
    assert elapsed < budget, f"{name} took {elapsed:.1f}s, budget {budget}s"
    ACCEPTANCE_LINES.append(f"PASS  {name}  ({elapsed:.2f}s)")


@pytest.fixture(scope="module")
def trained_count_model():
    """One full-protocol training run shared by the protocol and capability criteria."""
    corpus = make_planted_corpus(n=400, dim=4096, seed=7)
    config = TrainConfig(iterations=10_000, eval_every=500, seed=7)
    started = time.perf_counter()
    model, log = train(corpus, "count4", ("C0", "C1", "C2", "C3plus"), 4096, config)
    return corpus, config, model, log, time.perf_counter() - started


def test_attendee_normalization_exact():
    started = time.perf_counter()
    assert parse_attendee_phrase("a dozen") == 10
    assert parse_attendee_phrase("dozens") == 20
    assert parse_attendee_phrase("hundreds") == 100
    assert parse_attendee_phrase("a couple hundred") == 200
    report("attendee normalization (footnote mapping, exact)", started, 1.0)


def test_minhash_fidelity_statistical():
    started = time.perf_counter()
    rng = np.random.default_rng(2021)
    vocabulary = [f"w{i}" for i in range(400)]
    errors = []
    for _ in range(1000):
        size = int(rng.integers(40, 150))
        overlap = float(rng.random())
        doc_a = [vocabulary[int(i)] for i in rng.integers(0, 400, size)]
        keep = int(size * overlap)
        doc_b = doc_a[:keep] + [
            vocabulary[int(i)] for i in rng.integers(0, 400, size - keep)
        ]
        sig_a = sign_tokens(doc_a, k=256)
        sig_b = sign_tokens(doc_b, k=256)
        errors.append(abs(jaccard_estimate(sig_a, sig_b) - jaccard_exact(sig_a, sig_b)))
    errors = np.array(errors)
    within = float(np.mean(errors <= 0.1))
    mae = float(errors.mean())
    std = float(errors.std())
    assert within >= 0.99, f"only {within:.1%} of pairs within 0.1"
    assert mae <= 0.035, f"mean absolute error {mae:.4f} exceeds 0.035"
    assert std <= 0.5 / math.sqrt(256), f"error std {std:.4f} exceeds 0.5/sqrt(k)"
    report(
        f"minhash fidelity (k=256, n=1000: {within:.1%} within 0.1,"
        f" MAE {mae:.4f}, std {std:.4f})",
        started,
        10.0,
    )


def test_ordering_quality_vs_exhaustive_oracle():
    started = time.perf_counter()
    perms = np.array(list(itertools.permutations(range(8))), dtype=np.int8)
    rng = np.random.default_rng(88)
    within = 0
    trials = 200
    for _ in range(trials):
        raw = rng.random((8, 8))
        d = (raw + raw.T) / 2
        np.fill_diagonal(d, 0.0)
        optimum = float(d[perms[:, :-1], perms[:, 1:]].sum(axis=1).min())
        m = DistanceMatrix(ids=tuple(f"a{i}" for i in range(8)), d=d)
        path = order_queue(m)
        if path.total_length <= 1.25 * optimum + 1e-9:
            within += 1
        indices = [m.ids.index(x) for x in path.order]
        assert not has_improving_two_opt_move(d, indices), "2-opt local optimum violated"
    assert within / trials >= 0.95, f"only {within}/{trials} within 1.25x of optimum"
    report(
        f"ordering quality (8-article instances: {within}/{trials} within 1.25x,"
        " local optimality 100%)",
        started,
        30.0,
    )


def test_diff_invertibility_10k_pairs():
    started = time.perf_counter()
    rng = np.random.default_rng(1234)
    alphabet = list("abcde")
    for _ in range(10_000):
        len_a, len_b = (int(x) for x in rng.integers(0, 31, 2))
        a = [alphabet[int(i)] for i in rng.integers(0, 5, len_a)]
        b = [alphabet[int(i)] for i in rng.integers(0, 5, len_b)]
        assert apply_diff(word_diff(a, b), a) == b
    report("diff invertibility (10,000 random pairs, exact)", started, 10.0)


def test_nilsimsa_conformance_vectors():
    started = time.perf_counter()
    lines = VECTOR_FILE.read_text().splitlines()
    assert len(lines) >= 30
    for line in lines:
        input_hex, expected = line.split("\t")
        digest = nilsimsa_digest(bytes.fromhex(input_hex))
        assert digest.hex() == expected
        assert nilsimsa_compare(digest, digest) == 128
    report(f"nilsimsa conformance ({len(lines)} frozen vectors, exact)", started, 5.0)


def test_training_protocol_conformance(trained_count_model):
    corpus, config, _, log, train_seconds = trained_count_model
    started = time.perf_counter() - train_seconds
    assert log.split_sizes == (round(0.70 * 400), round(0.15 * 400), 400 - 280 - 60)
    assert len(log.batch_compositions) == 10_000
    assert all(comp == (6, 4, 1, 1) for comp in log.batch_compositions)
    eval_iterations = [e.iteration for e in log.evals]
    assert eval_iterations == list(range(0, 10_001, 500))
    report(
        "training protocol conformance (batches 6/4/1/1, split 280/60/60,"
        " eval every 500 over 10,000 iterations)",
        started,
        60.0,
    )


def test_classifier_capability_at_desk_scale(trained_count_model):
    # Published benchmark scores need the original private corpus and its
    # neural models; protocol conformance plus this capability bound on
    # the synthetic corpus substitutes.
    corpus, config, model, _, _ = trained_count_model
    started = time.perf_counter()
    _, _, test_idx = split_corpus(len(corpus), config.split, config.seed)
    rep = evaluate(model, [corpus[i] for i in test_idx])
    assert rep.weighted_f1 >= 0.90, f"weighted F1 {rep.weighted_f1:.3f} below 0.90"
    worst = finite_difference_check(
        "count4",
        ("C0", "C1", "C2", "C3plus"),
        lambda rng, n: rng.integers(0, 4, n),
        seed=99,
    )
    assert worst <= 1e-4, f"gradient relative error {worst:.2e}"
    report(
        f"classifier capability (weighted F1 {rep.weighted_f1:.3f} >= 0.90,"
        f" gradient check {worst:.1e} <= 1e-4)",
        started,
        60.0,
    )


def test_threshold_calibration_bound():
    started = time.perf_counter()
    rng = np.random.default_rng(31)
    for _ in range(200):
        p = int(rng.integers(1, 2000))
        in_scores = rng.random(p)
        out_scores = rng.random(int(rng.integers(0, 500)))
        scores = [(float(s), True) for s in in_scores]
        scores += [(float(s), False) for s in out_scores]
        threshold = calibrate_threshold(scores, max_fpr=0.017)
        below = int(np.count_nonzero(in_scores < threshold))
        assert below <= math.floor(0.017 * p), f"{below} skips with P={p}"
    report(
        "threshold calibration (<=floor(0.017*P) in-domain below threshold,"
        " 200 random sets, exact)",
        started,
        10.0,
    )


def test_dataset_snapshot_reproduces_category_table():
    snapshot = os.environ.get("PROTEST_DATASET_CSV")
    if not snapshot:
        ACCEPTANCE_LINES.append(
            "SKIP  dataset snapshot check (set PROTEST_DATASET_CSV to the released"
            " Jan-31-2021 snapshot to enable)"
        )
        pytest.skip(
            "released dataset snapshot not present; set PROTEST_DATASET_CSV"
            " (and optionally PROTEST_DATASET_MAPPING) to run this criterion"
        )
    started = time.perf_counter()
    mapping_path = os.environ.get("PROTEST_DATASET_MAPPING")
    mapping = (
        ColumnMapping.from_file(mapping_path)
        if mapping_path
        else ColumnMapping(columns=dict(DEFAULT_MAPPING))
    )
    store = EventStore(":memory:")
    import_dataset(store, snapshot, mapping)
    stats = store.compute_stats()
    assert stats.category_table["Civil Rights"] == (16_130, 31_230)
    histogram = stats.events_per_article
    total = sum(histogram.values())
    low = sum(histogram.get(k, 0) for k in (0, 1, 2))
    share = 100.0 * low / total
    assert abs(share - 95.5) <= 0.1, f"<=2-event share {share:.2f}% not 95.5 +/- 0.1"
    store.close()
    report("dataset snapshot (Civil Rights 16,130/31,230; <=2-event share 95.5%)", started, 300.0)


def test_end_to_end_fixture_run(store, domain_model_and_threshold):
    started = time.perf_counter()
    model, threshold = domain_model_and_threshold
    seed_reviewed_original(store)
    pipeline = make_pipeline(store, ModelRegistry(domain2=model, skip_threshold=threshold))
    run = pipeline.run_nightly(fixture_sources())

    assert run.auto_associated == 1, "expected exactly one auto-association"
    assert run.queued_for_review == 2, "expected exactly two queued items"
    dow = store.find_article_by_url(fixture_sources()[0].url + "dow.html")
    assert dow.skip_eligible, "negative example must be flagged skip-eligible"
    fresh = store.find_article_by_url(fixture_sources()[0].url + "fresh.html")
    assert not fresh.skip_eligible

    syndicated = store.find_article_by_url(fixture_sources()[0].url + "syndicated.html")
    assert syndicated.status == "reviewed"
    inherited = store.links_for_article(syndicated.id)
    assert len(inherited) == 1 and inherited[0].tense == "past"
    report(
        "end-to-end fixture run (1 auto-association, 2 queued, negative skip-eligible)",
        started,
        30.0,
    )
