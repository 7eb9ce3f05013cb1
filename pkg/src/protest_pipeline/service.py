"""JSON-over-HTTP review API consumed by the browser UI and scripts."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .pipeline import Pipeline, _suggestions_payload, diff_ops_payload
from .similarity import paragraph_hints
from .store import StoreError, UnknownReferenceError, ValidationError


def create_app(pipeline: Pipeline) -> FastAPI:
    app = FastAPI(title="protest-pipeline review API", version="1")
    store = pipeline.store

    @app.exception_handler(StoreError)
    async def store_error_handler(_, exc: StoreError):
        status = 404 if isinstance(exc, UnknownReferenceError) else 409
        if isinstance(exc, ValidationError):
            status = 422
        return JSONResponse(status_code=status, content={"error": str(exc)})

    @app.get("/v1/runs/{run_id}/queue")
    def get_queue(run_id: str):
        try:
            items = pipeline.get_review_queue(run_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"run {run_id} not found")
        return {
            "run_id": run_id,
            "groups": [
                {"group_id": item.group_id, "articles": item.articles} for item in items
            ],
        }

    @app.get("/v1/articles/{article_id}")
    def get_article(article_id: str):
        article = store.get_article(article_id)
        payload = {
            "id": article.id,
            "url": article.url,
            "title": article.title,
            "paragraphs": list(article.body),
            "status": article.status,
            "skip_eligible": article.skip_eligible,
            "suggestions": _suggestions_payload(article.suggestions),
            "events": [
                {"event_id": link.event_id, "tense": link.tense}
                for link in store.links_for_article(article_id)
            ],
        }
        nearest = _nearest_reviewed(pipeline, article_id)
        if nearest is not None:
            payload["diff"] = diff_ops_payload(pipeline.diff_for(article_id, nearest))
            payload["diff_against"] = nearest
            against = store.get_article(nearest)
            payload["paragraph_hints"] = [
                {"paragraph": i, "reviewed_paragraph": j, "score": score}
                for i, j, score in paragraph_hints(
                    list(article.body), list(against.body), pipeline.config.nilsimsa_hint
                )
            ]
        return payload

    @app.post("/v1/articles/{article_id}/review")
    def post_review(article_id: str, decision: dict):
        article = pipeline.submit_review(article_id, decision)
        return {
            "id": article.id,
            "status": article.status,
            "events": [
                {"event_id": link.event_id, "tense": link.tense}
                for link in store.links_for_article(article_id)
            ],
        }

    @app.get("/v1/suggestions/{article_id}")
    def get_suggestions(article_id: str):
        article = store.get_article(article_id)
        if article.suggestions is not None and not article.suggestions.is_empty():
            return _suggestions_payload(article.suggestions)
        return _suggestions_payload(pipeline.suggestions_for(article))

    @app.post("/v1/events/{event_id}/merge")
    def post_merge(event_id: str, body: dict):
        into = body.get("into_event_id")
        if not into:
            raise HTTPException(status_code=422, detail="into_event_id is required")
        moved = store.merge_events(event_id, into)
        return {"merged_into": into, "links_moved": moved}

    @app.get("/v1/stats")
    def get_stats():
        stats = store.compute_stats()
        return {
            "events_per_article": {str(k): v for k, v in sorted(stats.events_per_article.items())},
            "category_table": [
                {"category": name, "events": events, "articles": articles}
                for name, (events, articles) in sorted(
                    stats.category_table.items(), key=lambda kv: (-kv[1][0], kv[0])
                )
            ],
            "top_tag_sets": [
                {"tags": list(tags), "events": events, "articles": articles}
                for tags, events, articles in stats.top_tag_sets[:10]
            ],
            "total_events": stats.total_events,
            "total_articles": stats.total_articles,
            "reviewed_articles": stats.reviewed_articles,
        }

    @app.get("/v1/taxonomy")
    def get_taxonomy():
        return {
            "tags": [
                {"name": tag.name, "kind": tag.kind, "opposite": tag.opposite}
                for tag in store.list_tags()
            ]
        }

    return app


def _nearest_reviewed(pipeline: Pipeline, article_id: str) -> str | None:
    run_id = pipeline.store.latest_run_id()
    if run_id is None:
        return None
    for members in pipeline.store.load_queue(run_id):
        for queued_id, diff_against in members:
            if queued_id == article_id:
                return diff_against
    return None
