"""Operator command line for the harvesting pipeline."""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np

from .config import PipelineConfig
from .crawler import FetchPolicy, Fetcher, crawl_source, parse_source_list
from .dataset_io import ColumnMapping, DEFAULT_MAPPING, export_dataset, import_dataset
from .extractor import extract_article
from .linear_model import TASK_COUNT4, TASK_DOMAIN2, TASK_TAGS, load_model, save_model
from .pipeline import ModelRegistry, Pipeline
from .store import STATUS_REVIEWED, EventStore
from .text_features import featurize, tokenize
from .training import (
    LabeledDoc,
    TrainConfig,
    calibrate_threshold,
    evaluate,
    split_corpus,
    train,
)


class AppContext:
    def __init__(self, config_path: str | None, store_path: str, seed: int | None):
        self.config = PipelineConfig.from_file(config_path) if config_path else PipelineConfig()
        if seed is not None:
            self.config.seed = seed
        self.store_path = store_path
        self._store: EventStore | None = None

    @property
    def store(self) -> EventStore:
        if self._store is None:
            self._store = EventStore(self.store_path)
        return self._store

    def pipeline(self) -> Pipeline:
        models = ModelRegistry.from_dir(self.config.model_dir, self.config.skip_threshold)
        return Pipeline(self.store, self.config, models)


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--store", "store_path", default="pipeline.db", show_default=True)
@click.option("--seed", type=int, default=None)
@click.pass_context
def main(ctx: click.Context, config_path: str | None, store_path: str, seed: int | None):
    """Semi-automated protest news harvesting and review."""
    ctx.obj = AppContext(config_path, store_path, seed)


@main.command()
@click.option("--sources", "sources_path", type=click.Path(exists=True), required=True)
@click.pass_obj
def crawl(app: AppContext, sources_path: str):
    """Fetch candidate article links from the configured sources."""
    config = app.config
    policy = FetchPolicy(
        per_host_delay=config.per_host_delay,
        timeout=config.timeout,
        max_pages_per_source=config.max_pages_per_source,
        max_parallel_hosts=config.max_parallel_hosts,
        user_agent=config.user_agent,
        respect_robots=config.respect_robots,
    )
    fetcher = Fetcher(policy)
    known = {a.url for a in app.store.list_articles()}
    for source in parse_source_list(sources_path):
        result = crawl_source(source, policy, fetcher, known_urls=known)
        status = result.source_error or f"{len(result.items)} candidates"
        click.echo(f"{source.url}: {status}")


@main.command()
@click.argument("html_path", type=click.Path(exists=True))
@click.pass_obj
def extract(app: AppContext, html_path: str):
    """Extract title and body from a saved HTML file."""
    data = Path(html_path).read_bytes()
    result = extract_article(data, f"file://{Path(html_path).resolve()}")
    click.echo(result.title)
    click.echo("")
    for paragraph in result.paragraphs:
        click.echo(paragraph)


@main.command()
@click.pass_obj
def dedupe(app: AppContext):
    """Auto-associate unreviewed near-duplicates of reviewed articles."""
    pipeline = app.pipeline()
    from .pipeline import PipelineRun

    run = PipelineRun(id="cli-dedupe", started_at="")
    associated = pipeline.dedupe_stage(run)
    click.echo(f"auto-associated {associated} articles")


@main.command()
@click.pass_obj
def order(app: AppContext):
    """Order the unreviewed queue and print groups."""
    pipeline = app.pipeline()
    from .pipeline import PipelineRun

    run = PipelineRun(id="cli-order", started_at="")
    groups = pipeline.order_stage(run, run.id)
    for i, members in enumerate(groups):
        click.echo(f"group {i}: " + " ".join(article_id for article_id, _ in members))


def _labeled_corpus(app: AppContext, task: str):
    """Labeled docs from reviewed articles; count labels come from link counts."""
    store = app.store
    dim = app.config.hash_dim
    docs: list[LabeledDoc] = []
    tag_names = [t.name for t in store.list_tags()]
    tag_index = {name: i for i, name in enumerate(tag_names)}
    for article in store.list_articles(status=STATUS_REVIEWED):
        tokens = tokenize(article.title + " " + " ".join(article.body))
        features = featurize(tokens, dim)
        links = store.links_for_article(article.id)
        if task == TASK_COUNT4:
            label: object = min(len(links), 3)
        elif task == TASK_DOMAIN2:
            label = 1 if links else 0
        else:
            hot = np.zeros(len(tag_names))
            for link in links:
                for tag in store.get_event(link.event_id).tags:
                    hot[tag_index[tag]] = 1.0
            label = hot
        docs.append(LabeledDoc(features=features, label=label))
    outputs = (
        ("C0", "C1", "C2", "C3plus")
        if task == TASK_COUNT4
        else ("out_domain", "in_domain")
        if task == TASK_DOMAIN2
        else tuple(tag_names)
    )
    return docs, outputs, dim


@main.command(name="train")
@click.option("--task", type=click.Choice([TASK_COUNT4, TASK_DOMAIN2, TASK_TAGS]), required=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.pass_obj
def train_cmd(app: AppContext, task: str, out_path: str | None):
    """Train a suggestion model on the reviewed corpus."""
    docs, outputs, dim = _labeled_corpus(app, task)
    if not docs:
        raise click.ClickException("no reviewed articles to train on")
    config = TrainConfig(
        batch_size=app.config.batch_size,
        iterations=app.config.iterations,
        eval_every=app.config.eval_every,
        seed=app.config.seed,
    )
    model, log = train(docs, task, outputs, dim, config)
    out = Path(out_path) if out_path else Path(app.config.model_dir or ".") / f"{task}.model"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(out, model)
    log_path = out.with_suffix(".log.csv")
    log_path.write_text(log.to_csv(), encoding="utf-8")
    click.echo(f"saved {out} (best iteration {log.best_iteration}); log at {log_path}")


@main.command(name="evaluate")
@click.option("--task", type=click.Choice([TASK_COUNT4, TASK_DOMAIN2]), required=True)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.pass_obj
def evaluate_cmd(app: AppContext, task: str, model_path: str):
    """Evaluate a model on the held-out test split of the reviewed corpus."""
    docs, _, _ = _labeled_corpus(app, task)
    if not docs:
        raise click.ClickException("no reviewed articles to evaluate on")
    model = load_model(model_path)
    _, _, test_idx = split_corpus(len(docs), (0.70, 0.15, 0.15), app.config.seed)
    report = evaluate(model, [docs[i] for i in test_idx])
    for i, name in enumerate(report.classes):
        click.echo(
            f"{name}: P={report.precision[i]:.3f} R={report.recall[i]:.3f}"
            f" F1={report.f1[i]:.3f} (n={report.support[i]})"
        )
    click.echo(
        f"weighted: P={report.weighted_precision:.3f} R={report.weighted_recall:.3f}"
        f" F1={report.weighted_f1:.3f}"
    )


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.pass_obj
def calibrate(app: AppContext, model_path: str):
    """Calibrate the title-only skip threshold on the validation split."""
    docs, _, _ = _labeled_corpus(app, TASK_DOMAIN2)
    if not docs:
        raise click.ClickException("no reviewed articles to calibrate on")
    model = load_model(model_path)
    _, val_idx, _ = split_corpus(len(docs), (0.70, 0.15, 0.15), app.config.seed)
    from .linear_model import predict

    scores = []
    for i in val_idx:
        doc = docs[i]
        scores.append((float(predict(model, doc.features)[1]), bool(doc.label)))
    threshold = calibrate_threshold(scores, max_fpr=app.config.max_fpr)
    if app.config.model_dir:
        out = Path(app.config.model_dir) / "skip_threshold.txt"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(f"{threshold}\n", encoding="utf-8")
        click.echo(f"skip threshold {threshold} written to {out}")
    else:
        click.echo(f"skip threshold {threshold}")


@main.command()
@click.pass_obj
def stats(app: AppContext):
    """Dataset statistics: events per article, categories, top tag sets."""
    s = app.store.compute_stats()
    payload = {
        "events_per_article": {str(k): v for k, v in sorted(s.events_per_article.items())},
        "category_table": {
            name: {"events": events, "articles": articles}
            for name, (events, articles) in s.category_table.items()
        },
        "top_tag_sets": [
            {"tags": list(tags), "events": events, "articles": articles}
            for tags, events, articles in s.top_tag_sets[:10]
        ],
        "total_events": s.total_events,
        "total_articles": s.total_articles,
        "reviewed_articles": s.reviewed_articles,
    }
    click.echo(json.dumps(payload, indent=2))


@main.command(name="import")
@click.argument("path", type=click.Path(exists=True))
@click.option("--mapping", "mapping_path", type=click.Path(exists=True), default=None)
@click.pass_obj
def import_cmd(app: AppContext, path: str, mapping_path: str | None):
    """Import a dataset snapshot (CSV with a header row)."""
    mapping = (
        ColumnMapping.from_file(mapping_path)
        if mapping_path
        else ColumnMapping(columns=dict(DEFAULT_MAPPING))
    )
    report = import_dataset(app.store, path, mapping)
    click.echo(
        f"rows={report.rows_total} articles+{report.articles_created}"
        f" events+{report.events_created} links+{report.links_created}"
        f" skipped={report.rows_skipped}"
    )
    for warning in report.warnings[:20]:
        click.echo(f"  warning: {warning}", err=True)


@main.command()
@click.argument("path", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]), default="jsonl")
@click.pass_obj
def export(app: AppContext, path: str, fmt: str):
    """Export the dataset as JSONL or CSV (URL references only)."""
    count = export_dataset(app.store, path, fmt)
    click.echo(f"exported {count} records to {path}")


@main.command()
@click.option("--port", type=int, default=8400, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.pass_obj
def serve(app: AppContext, port: int, host: str):
    """Run the review HTTP API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(app.pipeline()), host=host, port=port)


@main.command(name="run-nightly")
@click.option("--sources", "sources_path", type=click.Path(exists=True), default=None)
@click.pass_obj
def run_nightly_cmd(app: AppContext, sources_path: str | None):
    """Run the full nightly pipeline."""
    path = sources_path or app.config.source_list
    if not path:
        raise click.ClickException("no source list configured")
    sources = parse_source_list(path)
    run = app.pipeline().run_nightly(sources)
    click.echo(json.dumps({"run_id": run.id, **run.counts()}, indent=2))


if __name__ == "__main__":
    main()
