#!/usr/bin/env python3
"""Record real /v1 API payloads as fixtures for the frontend contract tests.

Runs the nightly pipeline over the test fixture site with trained domain
and tag models, then snapshots every endpoint the UI consumes. Rerun
after changing any payload shape:

    python scripts/record_ui_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from fastapi.testclient import TestClient  # noqa: E402

from conftest import DOMAIN_DIM, make_domain_corpus  # noqa: E402
from test_pipeline import fixture_sources, make_pipeline, seed_reviewed_original  # noqa: E402

from protest_pipeline.linear_model import TASK_DOMAIN2, TASK_TAGS, predict  # noqa: E402
from protest_pipeline.pipeline import ModelRegistry  # noqa: E402
from protest_pipeline.service import create_app  # noqa: E402
from protest_pipeline.store import EventStore  # noqa: E402
from protest_pipeline.text_features import featurize  # noqa: E402
from protest_pipeline.training import (  # noqa: E402
    LabeledDoc,
    TrainConfig,
    calibrate_threshold,
    split_corpus,
    train,
)

OUT = ROOT / "frontend" / "tests" / "fixtures"

TAG_NAMES = ("Guns", "Education", "For greater gun control", "For more school funding")
TAG_KEYWORDS = {
    "Guns": ["gun", "laws", "control"],
    "Education": ["teachers", "school", "funding", "classrooms"],
    "For greater gun control": ["gun", "control", "stricter"],
    "For more school funding": ["teachers", "funding", "pay"],
}


def train_domain_model():
    corpus = make_domain_corpus()
    config = TrainConfig(iterations=600, eval_every=200, seed=17)
    model, _ = train(corpus, TASK_DOMAIN2, ("out_domain", "in_domain"), DOMAIN_DIM, config)
    _, val_idx, _ = split_corpus(len(corpus), config.split, config.seed)
    scored = [
        (float(predict(model, corpus[i].features)[1]), bool(corpus[i].label)) for i in val_idx
    ]
    return model, calibrate_threshold(scored, max_fpr=0.017)


def train_tags_model():
    rng = np.random.default_rng(29)
    corpus = []
    for _ in range(240):
        active = rng.random(len(TAG_NAMES)) < 0.4
        if not active.any():
            active[int(rng.integers(0, len(TAG_NAMES)))] = True
        words = ["rally", "downtown", "crowd", "organizers"]
        for flag, name in zip(active, TAG_NAMES):
            if flag:
                words += TAG_KEYWORDS[name] * 3
        corpus.append(
            LabeledDoc(features=featurize(words, DOMAIN_DIM), label=active.astype(float))
        )
    config = TrainConfig(iterations=600, eval_every=200, seed=29)
    model, _ = train(corpus, TASK_TAGS, TAG_NAMES, DOMAIN_DIM, config)
    return model


def main() -> None:
    domain_model, threshold = train_domain_model()
    tags_model = train_tags_model()

    store = EventStore(":memory:")
    store.ensure_tag("Education")
    store.ensure_tag("For more school funding")
    original_id, _ = seed_reviewed_original(store)
    # After the For side exists, ensuring the Against side pairs them.
    store.ensure_tag("Against greater gun control")
    original = store.get_article(original_id)
    extended_body = list(original.body) + [
        "Local business owners offered mixed reactions to the crowds, with some "
        "welcoming the foot traffic and others closing early, citing parking, "
        "deliveries, and a shortage of weekend staff downtown.",
    ]
    store.add_article(
        url="https://ex.com/extended-copy", title=original.title, body=extended_body
    )
    pipeline = make_pipeline(
        store, ModelRegistry(domain2=domain_model, tags=tags_model, skip_threshold=threshold)
    )
    run = pipeline.run_nightly(fixture_sources())
    client = TestClient(create_app(pipeline))

    OUT.mkdir(parents=True, exist_ok=True)

    def snap(name: str, payload) -> None:
        (OUT / name).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    queue = client.get(f"/v1/runs/{run.id}/queue").json()
    snap("queue.json", queue)

    articles = [a for g in queue["groups"] for a in g["articles"]]
    with_diff = next(a for a in articles if a.get("diff_against"))
    fresh = next(a for a in articles if "fresh" in a["url"])
    snap("article_with_diff.json", client.get(f"/v1/articles/{with_diff['article_id']}").json())
    snap("article_plain.json", client.get(f"/v1/articles/{fresh['article_id']}").json())
    snap("suggestions.json", client.get(f"/v1/suggestions/{fresh['article_id']}").json())
    snap("stats.json", client.get("/v1/stats").json())
    snap("taxonomy.json", client.get("/v1/taxonomy").json())

    review = client.post(
        f"/v1/articles/{fresh['article_id']}/review",
        json={
            "decision": "events",
            "events": [
                {
                    "date": "2021-01-09",
                    "locality": "Springfield",
                    "region": "IL",
                    "tags": ["Guns", "For greater gun control"],
                    "tense": "past",
                }
            ],
        },
    )
    snap("review_response.json", review.json())
    print("recorded", sorted(p.name for p in OUT.glob("*.json")))


if __name__ == "__main__":
    main()
