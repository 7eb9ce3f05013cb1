"""Nightly orchestration: crawl, extract, sign, dedupe, order, suggest.

Each stage narrows human work: syndicated copies of already-reviewed
articles inherit their events automatically, everything else lands on a
similarity-ordered review path, and low domain scores flag articles as
eligible for title-only skip review. Nothing the models produce is ever
persisted as an event without an explicit review submission.
"""

from __future__ import annotations

import concurrent.futures
import datetime as dt
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .crawler import CrawlResult, FetchPolicy, Fetcher, NewsSource, crawl_source
from .extractor import ExtractionError, extract_article
from .linear_model import (
    TASK_COUNT4,
    TASK_DOMAIN2,
    TASK_TAGS,
    LinearModel,
    load_model,
    predict,
)
from .ordering import build_distance_matrix, order_queue, segment_groups
from .similarity import (
    DocumentSignature,
    body_tokens,
    decide_association,
    jaccard_estimate,
    sign_tokens,
)
from .store import (
    STATUS_REVIEWED,
    STATUS_SKIPPED,
    STATUS_UNREVIEWED,
    ArticleRecord,
    ConflictError,
    EventStore,
    ProtestEvent,
    Suggestions,
)
from .text_features import featurize, tokenize
from .training import suggest_tags
from .worddiff import WordDiff, word_diff


@dataclass
class PipelineRun:
    id: str
    started_at: str
    finished_at: str = ""
    sources_crawled: int = 0
    candidates_found: int = 0
    articles_stored: int = 0
    auto_associated: int = 0
    queued_for_review: int = 0
    queued_for_title_skip: int = 0
    errors: list[str] = field(default_factory=list)

    def counts(self) -> dict:
        return {
            "sources_crawled": self.sources_crawled,
            "candidates_found": self.candidates_found,
            "articles_stored": self.articles_stored,
            "auto_associated": self.auto_associated,
            "queued_for_review": self.queued_for_review,
            "queued_for_title_skip": self.queued_for_title_skip,
            "errors": self.errors,
        }


@dataclass
class ReviewQueueItem:
    group_id: int
    articles: list[dict]


@dataclass
class ModelRegistry:
    count4: LinearModel | None = None
    domain2: LinearModel | None = None
    tags: LinearModel | None = None
    skip_threshold: float | None = None

    @classmethod
    def from_dir(cls, model_dir: str, skip_threshold: float | None = None) -> "ModelRegistry":
        registry = cls(skip_threshold=skip_threshold)
        if not model_dir:
            return registry
        base = Path(model_dir)
        for task in (TASK_COUNT4, TASK_DOMAIN2, TASK_TAGS):
            path = base / f"{task}.model"
            if path.exists():
                setattr(registry, task, load_model(path))
        threshold_file = base / "skip_threshold.txt"
        if skip_threshold is None and threshold_file.exists():
            registry.skip_threshold = float(threshold_file.read_text().strip())
        return registry


class Pipeline:
    def __init__(
        self,
        store: EventStore,
        config: PipelineConfig | None = None,
        models: ModelRegistry | None = None,
        clock=None,
    ):
        self.store = store
        self.config = config or PipelineConfig()
        self.models = models or ModelRegistry()
        self.clock = clock

    # -- signatures ----------------------------------------------------

    def _signature_params(self) -> tuple[int, int, int]:
        c = self.config
        return c.shingle_w, c.minhash_k, c.minhash_seed

    def signature_for_article(self, article: ArticleRecord) -> DocumentSignature:
        w, k, seed = self._signature_params()
        stored = self.store.load_signatures().get(article.id)
        if stored is not None:
            s_w, s_k, s_seed, empty, mh = stored
            if (s_w, s_k, s_seed) == (w, k, seed):
                return DocumentSignature(
                    shingle_hashes=frozenset(), minhash=mh, w=w, k=k, seed=seed
                )
        return self._compute_and_store_signature(article)

    def _compute_and_store_signature(self, article: ArticleRecord) -> DocumentSignature:
        w, k, seed = self._signature_params()
        signature = sign_tokens(body_tokens(article.body), w, k, seed)
        self.store.save_signature(
            article.id, w, k, seed, signature.minhash, empty=signature.is_empty
        )
        return signature

    def _signatures_by_id(self, articles: list[ArticleRecord]) -> dict[str, DocumentSignature]:
        w, k, seed = self._signature_params()
        stored = self.store.load_signatures()
        out: dict[str, DocumentSignature] = {}
        for article in articles:
            entry = stored.get(article.id)
            if entry is not None and (entry[0], entry[1], entry[2]) == (w, k, seed):
                out[article.id] = DocumentSignature(
                    shingle_hashes=frozenset(), minhash=entry[4], w=w, k=k, seed=seed
                )
            else:
                out[article.id] = self._compute_and_store_signature(article)
        return out

    # -- suggestions ----------------------------------------------------

    def suggestions_for(self, article: ArticleRecord) -> Suggestions:
        """Model suggestions for one article; empty when no models are loaded."""
        tokens = tokenize(article.title + " " + " ".join(article.body))
        domain_score = None
        count_class = None
        count_probs = None
        ranked: tuple[tuple[str, float], ...] = ()
        if self.models.domain2 is not None:
            x = featurize(tokens, self.models.domain2.dim)
            domain_score = float(predict(self.models.domain2, x)[1])
        if self.models.count4 is not None:
            x = featurize(tokens, self.models.count4.dim)
            probs = predict(self.models.count4, x)
            count_probs = {
                name: float(p) for name, p in zip(self.models.count4.output_names, probs)
            }
            count_class = self.models.count4.output_names[int(np.argmax(probs))]
        if self.models.tags is not None:
            x = featurize(tokens, self.models.tags.dim)
            opposites = {
                t.name: t.opposite for t in self.store.list_tags() if t.opposite is not None
            }
            ranked = tuple(
                suggest_tags(self.models.tags, x, self.config.top_k_tags, opposites)
            )
        return Suggestions(
            domain_score=domain_score,
            count_class=count_class,
            count_probs=count_probs,
            tags=ranked,
        )

    def _is_skip_eligible(self, suggestions: Suggestions) -> bool:
        threshold = self.models.skip_threshold
        if threshold is None or suggestions.domain_score is None:
            return False
        return suggestions.domain_score < threshold

    # -- stages ----------------------------------------------------------

    def crawl_stage(self, sources: list[NewsSource], run: PipelineRun) -> list[ArticleRecord]:
        policy = FetchPolicy(
            per_host_delay=self.config.per_host_delay,
            timeout=self.config.timeout,
            max_pages_per_source=self.config.max_pages_per_source,
            max_parallel_hosts=self.config.max_parallel_hosts,
            user_agent=self.config.user_agent,
            respect_robots=self.config.respect_robots,
        )
        fetcher = Fetcher(policy, clock=self.clock)
        known = {a.url for a in self.store.list_articles()}
        new_articles: list[ArticleRecord] = []

        def crawl_one(source: NewsSource) -> CrawlResult:
            return crawl_source(source, policy, fetcher, known_urls=known)

        if len(sources) > 1 and policy.max_parallel_hosts > 1:
            with concurrent.futures.ThreadPoolExecutor(
                max_workers=policy.max_parallel_hosts
            ) as pool:
                results = list(pool.map(crawl_one, sources))
        else:
            results = [crawl_one(s) for s in sources]

        for source, result in zip(sources, results):
            run.sources_crawled += 1
            self.store.add_source(source.id, source.url, source.label)
            if result.source_error is not None:
                run.errors.append(f"{source.url}: {result.source_error}")
                continue
            run.candidates_found += len(result.items)
            for item in result.items:
                if item.cached or item.result is None:
                    continue
                if item.result.error is not None or item.result.status != 200:
                    run.errors.append(
                        f"{item.link.url}: {item.result.error or item.result.status}"
                    )
                    continue
                try:
                    extraction = extract_article(item.result.body, item.link.url)
                except ExtractionError as exc:
                    run.errors.append(str(exc))
                    continue
                article, created = self.store.add_article(
                    url=item.link.url,
                    title=extraction.title,
                    body=extraction.paragraphs,
                    source_id=source.id,
                    fetched_at=dt.datetime.now(dt.timezone.utc).isoformat(),
                )
                if created:
                    run.articles_stored += 1
                    new_articles.append(article)
                    self._compute_and_store_signature(article)
        return new_articles

    def dedupe_stage(self, run: PipelineRun) -> int:
        """Auto-associate unreviewed articles that duplicate reviewed ones."""
        unreviewed = self.store.list_articles(status=STATUS_UNREVIEWED)
        reviewed = self.store.list_articles(status=STATUS_REVIEWED)
        reviewed = [a for a in reviewed if self.store.links_for_article(a.id)]
        if not unreviewed or not reviewed:
            return 0
        signatures = self._signatures_by_id(unreviewed + reviewed)
        associated = 0
        for article in unreviewed:
            best_id, best_estimate = None, -1.0
            for source_article in reviewed:
                estimate = jaccard_estimate(
                    signatures[article.id], signatures[source_article.id]
                )
                if estimate > best_estimate:
                    best_id, best_estimate = source_article.id, estimate
            if best_id is None or best_estimate < self.config.j_min:
                continue
            original = self.store.get_article(best_id)
            ratio = word_diff(body_tokens(original.body), body_tokens(article.body)).change_ratio
            verdict = decide_association(
                best_estimate, ratio, j_min=self.config.j_min, r_max=self.config.r_max
            )
            if not verdict.associate:
                continue
            self.store.associate_article(article.id, self.store.links_for_article(best_id))
            associated += 1
        run.auto_associated += associated
        return associated

    def order_stage(
        self,
        run: PipelineRun,
        run_id: str,
        new_ids: set[str] | None = None,
    ) -> list[list[tuple[str, str | None]]]:
        """Order and group every unreviewed article; persist the queue.

        Run counts cover this run's new articles only (the whole queue is
        rebuilt each night, so counting requeued articles would break
        auto_associated + queued <= stored).
        """
        unreviewed = self.store.list_articles(status=STATUS_UNREVIEWED)
        if not unreviewed:
            self.store.save_queue(run_id, [])
            return []
        signatures = self._signatures_by_id(unreviewed)
        ids = [a.id for a in unreviewed]
        matrix = build_distance_matrix(ids, [signatures[i] for i in ids])
        path = segment_groups(order_queue(matrix), matrix, cut=self.config.group_cut)

        reviewed = self.store.list_articles(status=STATUS_REVIEWED)
        reviewed_sigs = self._signatures_by_id(reviewed) if reviewed else {}
        groups: list[list[tuple[str, str | None]]] = []
        for group in path.groups:
            members: list[tuple[str, str | None]] = []
            for article_id in group:
                nearest, best = None, -1.0
                for source_article in reviewed:
                    estimate = jaccard_estimate(
                        signatures[article_id], reviewed_sigs[source_article.id]
                    )
                    if estimate > best:
                        nearest, best = source_article.id, estimate
                members.append((article_id, nearest if best >= self.config.diff_floor else None))
            groups.append(members)
        self.store.save_queue(run_id, groups)
        counted = {a for g in groups for a, _ in g}
        if new_ids is not None:
            counted &= new_ids
        run.queued_for_review += len(counted)
        return groups

    def suggest_stage(self, run: PipelineRun, new_ids: set[str] | None = None) -> None:
        for article in self.store.list_articles(status=STATUS_UNREVIEWED):
            suggestions = self.suggestions_for(article)
            skip = self._is_skip_eligible(suggestions)
            self.store.set_suggestions(article.id, suggestions, skip_eligible=skip)
            if skip and (new_ids is None or article.id in new_ids):
                run.queued_for_title_skip += 1

    def run_nightly(self, sources: list[NewsSource]) -> PipelineRun:
        """Run all five stages in order and persist the run record.

        Every stage is idempotent over the store, so a run aborted by a
        failed store write resumes by simply re-running: stored articles
        are not refetched and the queue is rebuilt from current state.
        """
        run = PipelineRun(
            id="run-" + uuid.uuid4().hex[:12],
            started_at=dt.datetime.now(dt.timezone.utc).isoformat(),
        )
        new_articles = self.crawl_stage(sources, run)
        new_ids = {a.id for a in new_articles}
        self.dedupe_stage(run)
        self.order_stage(run, run.id, new_ids)
        self.suggest_stage(run, new_ids)
        run.finished_at = dt.datetime.now(dt.timezone.utc).isoformat()
        self.store.record_run(run.id, run.started_at, run.finished_at, run.counts())
        return run

    # -- review API -----------------------------------------------------

    def diff_for(self, article_id: str, against_id: str) -> WordDiff:
        article = self.store.get_article(article_id)
        against = self.store.get_article(against_id)
        return word_diff(body_tokens(against.body), body_tokens(article.body))

    def get_review_queue(self, run_id: str) -> list[ReviewQueueItem]:
        if self.store.get_run(run_id) is None:
            raise KeyError(f"run {run_id!r} does not exist")
        items: list[ReviewQueueItem] = []
        for group_id, members in enumerate(self.store.load_queue(run_id)):
            articles = []
            for article_id, diff_against in members:
                article = self.store.get_article(article_id)
                if article.status != STATUS_UNREVIEWED:
                    continue
                entry: dict = {
                    "article_id": article.id,
                    "url": article.url,
                    "title": article.title,
                    "skip_eligible": article.skip_eligible,
                    "suggestions": _suggestions_payload(article.suggestions),
                    "diff_against": diff_against,
                }
                if diff_against is not None:
                    entry["diff"] = diff_ops_payload(self.diff_for(article_id, diff_against))
                articles.append(entry)
            if articles:
                items.append(ReviewQueueItem(group_id=group_id, articles=articles))
        return items

    def submit_review(self, article_id: str, decision: dict) -> ArticleRecord:
        """Apply a review decision atomically.

        decision is one of:
          {"decision": "skip"}
          {"decision": "no_events"}
          {"decision": "events", "events": [{...event fields..., "tense": ...}]}
        """
        article = self.store.get_article(article_id)
        if article.status != STATUS_UNREVIEWED:
            raise ConflictError(f"article {article_id!r} is already {article.status}")
        kind = decision.get("decision")
        if kind == "skip":
            self.store.set_article_status(article_id, STATUS_SKIPPED)
        elif kind == "no_events":
            self.store.set_article_status(article_id, STATUS_REVIEWED)
        elif kind == "events":
            payloads = decision.get("events") or []
            if not payloads:
                raise ValueError("events decision needs at least one event")
            staged = []
            for payload in payloads:
                event = _event_from_payload(payload)
                tense = payload.get("tense", "past")
                duplicates = self.store.find_duplicate_events(
                    event, radius_km=self.config.dup_radius_km
                )
                staged.append((event, tense, duplicates[0] if duplicates else None))
            self.store.apply_review(article_id, staged)
        else:
            raise ValueError(f"unknown decision {kind!r}")
        return self.store.get_article(article_id)


def _suggestions_payload(suggestions: Suggestions | None) -> dict:
    if suggestions is None:
        return {}
    payload: dict = {}
    if suggestions.domain_score is not None:
        payload["domain_score"] = suggestions.domain_score
    if suggestions.count_class is not None:
        payload["count_class"] = suggestions.count_class
        payload["count_probs"] = suggestions.count_probs
    if suggestions.tags:
        payload["tags"] = [{"name": name, "score": score} for name, score in suggestions.tags]
    return payload


def diff_ops_payload(diff: WordDiff) -> dict:
    return {
        "ops": [{"op": op.op, "tokens": list(op.tokens)} for op in diff.ops],
        "change_ratio": diff.change_ratio,
    }


def _event_from_payload(payload: dict) -> ProtestEvent:
    return ProtestEvent(
        id=payload.get("id"),
        date=dt.date.fromisoformat(payload["date"]),
        locality=payload.get("locality", ""),
        region=payload.get("region", ""),
        latitude=payload.get("latitude"),
        longitude=payload.get("longitude"),
        attendee_count=payload.get("attendee_count"),
        attendee_source=payload.get("attendee_source"),
        tags=frozenset(payload.get("tags", ())),
    )
