from __future__ import annotations

import datetime as dt
import math
import threading

import pytest

from protest_pipeline.store import (
    STATUS_REVIEWED,
    ArticleEventLink,
    ConflictError,
    EventStore,
    ProtestEvent,
    UnknownReferenceError,
    ValidationError,
    haversine_km,
)
from protest_pipeline.taxonomy import KIND_CATEGORY, KIND_POSITION, SEED_CATEGORIES, Tag

DATE = dt.date(2021, 1, 9)


def minimal_setup(store: EventStore) -> str:
    store.add_tag(Tag("For greater gun control", KIND_POSITION))
    store.add_tag(Tag("Against greater gun control", KIND_POSITION, opposite="For greater gun control"))
    article, _ = store.add_article(url="https://ex.com/a1", status=STATUS_REVIEWED)
    return article.id


def gun_event(**overrides) -> ProtestEvent:
    fields = dict(
        id=None,
        date=DATE,
        locality="Springfield",
        region="IL",
        tags=frozenset({"Guns", "For greater gun control"}),
    )
    fields.update(overrides)
    return ProtestEvent(**fields)


class TestTaxonomy:
    def test_seed_categories_present(self, store):
        names = {t.name for t in store.list_tags()}
        assert set(SEED_CATEGORIES) <= names
        assert all(t.kind == KIND_CATEGORY for t in store.list_tags())

    def test_opposite_is_symmetric(self, store):
        store.add_tag(Tag("For X", KIND_POSITION))
        store.add_tag(Tag("Against X", KIND_POSITION, opposite="For X"))
        assert store.get_tag("For X").opposite == "Against X"
        assert store.get_tag("Against X").opposite == "For X"

    def test_ensure_tag_infers_kinds(self, store):
        assert store.ensure_tag("For racial justice").kind == KIND_POSITION
        assert store.ensure_tag("Police").kind == "detail"
        assert store.ensure_tag("Guns").kind == KIND_CATEGORY

    def test_ensure_tag_pairs_opposites(self, store):
        store.ensure_tag("For rent control")
        tag = store.ensure_tag("Against rent control")
        assert tag.opposite == "For rent control"
        assert store.get_tag("For rent control").opposite == "Against rent control"

    def test_opposite_must_exist(self, store):
        with pytest.raises(UnknownReferenceError):
            store.add_tag(Tag("For Y", KIND_POSITION, opposite="Against Y"))


class TestRecordEvent:
    def test_minimal_valid_event(self, store):
        article_id = minimal_setup(store)
        event_id = store.record_event(
            gun_event(), [ArticleEventLink(article_id, "pending", "past")]
        )
        stored = store.get_event(event_id)
        assert stored.tags == {"Guns", "For greater gun control"}
        assert store.links_for_article(article_id)[0].event_id == event_id

    def test_detail_only_tags_rejected(self, store):
        article_id = minimal_setup(store)
        store.ensure_tag("Police")
        with pytest.raises(ValidationError):
            store.record_event(
                gun_event(tags=frozenset({"Police"})),
                [ArticleEventLink(article_id, "pending", "past")],
            )

    def test_missing_position_rejected(self, store):
        article_id = minimal_setup(store)
        with pytest.raises(ValidationError):
            store.record_event(
                gun_event(tags=frozenset({"Guns"})),
                [ArticleEventLink(article_id, "pending", "past")],
            )

    def test_opposite_positions_rejected(self, store):
        article_id = minimal_setup(store)
        with pytest.raises(ValidationError):
            store.record_event(
                gun_event(
                    tags=frozenset(
                        {"Guns", "For greater gun control", "Against greater gun control"}
                    )
                ),
                [ArticleEventLink(article_id, "pending", "past")],
            )

    def test_unknown_article_rejected(self, store):
        minimal_setup(store)
        with pytest.raises(UnknownReferenceError):
            store.record_event(gun_event(), [ArticleEventLink("nope", "pending", "past")])

    def test_unknown_tag_rejected(self, store):
        article_id = minimal_setup(store)
        with pytest.raises(UnknownReferenceError):
            store.record_event(
                gun_event(tags=frozenset({"Guns", "For greater gun control", "Mystery"})),
                [ArticleEventLink(article_id, "pending", "past")],
            )

    def test_needs_at_least_one_link(self, store):
        minimal_setup(store)
        with pytest.raises(ValidationError):
            store.record_event(gun_event(), [])

    def test_negative_attendees_rejected(self, store):
        article_id = minimal_setup(store)
        with pytest.raises(ValidationError):
            store.record_event(
                gun_event(attendee_count=-5),
                [ArticleEventLink(article_id, "pending", "past")],
            )

    def test_bad_tense_rejected(self, store):
        minimal_setup(store)
        with pytest.raises(ValidationError):
            ArticleEventLink("a", "e", "sometime")


class TestFindDuplicates:
    def test_exact_duplicate(self, store):
        article_id = minimal_setup(store)
        event_id = store.record_event(
            gun_event(), [ArticleEventLink(article_id, "pending", "past")]
        )
        assert store.find_duplicate_events(gun_event()) == [event_id]

    def test_different_region_no_match(self, store):
        article_id = minimal_setup(store)
        store.record_event(gun_event(), [ArticleEventLink(article_id, "pending", "past")])
        assert store.find_duplicate_events(gun_event(region="MO")) == []

    def test_different_tags_no_match(self, store):
        article_id = minimal_setup(store)
        store.ensure_tag("Police")
        store.record_event(gun_event(), [ArticleEventLink(article_id, "pending", "past")])
        candidate = gun_event(tags=frozenset({"Guns", "For greater gun control", "Police"}))
        assert store.find_duplicate_events(candidate) == []

    def test_nearby_coordinates_match(self, store):
        article_id = minimal_setup(store)
        # Springfield IL vs a point ~10 km east; oracle by spherical law
        # of cosines, independent of the haversine implementation.
        lat1, lon1 = 39.7817, -89.6501
        lat2, lon2 = 39.7817, -89.5331
        oracle_km = 6371.0088 * math.acos(
            min(
                1.0,
                math.sin(math.radians(lat1)) * math.sin(math.radians(lat2))
                + math.cos(math.radians(lat1))
                * math.cos(math.radians(lat2))
                * math.cos(math.radians(lon2 - lon1)),
            )
        )
        assert 9.0 < oracle_km < 11.0
        assert haversine_km(lat1, lon1, lat2, lon2) == pytest.approx(oracle_km, abs=0.01)
        event_id = store.record_event(
            gun_event(locality="near Springfield", latitude=lat1, longitude=lon1),
            [ArticleEventLink(article_id, "pending", "past")],
        )
        matches = store.find_duplicate_events(
            gun_event(locality="Springfield outskirts", latitude=lat2, longitude=lon2)
        )
        assert matches == [event_id]

    def test_far_coordinates_no_match(self, store):
        article_id = minimal_setup(store)
        store.record_event(
            gun_event(locality="A", latitude=39.78, longitude=-89.65),
            [ArticleEventLink(article_id, "pending", "past")],
        )
        assert (
            store.find_duplicate_events(
                gun_event(locality="B", latitude=40.5, longitude=-88.9)
            )
            == []
        )

    def test_ranked_by_closeness(self, store):
        article_id = minimal_setup(store)
        near = store.record_event(
            gun_event(locality="N", latitude=39.78, longitude=-89.65),
            [ArticleEventLink(article_id, "pending", "past")],
        )
        far = store.record_event(
            gun_event(locality="F", latitude=39.78, longitude=-89.50),
            [ArticleEventLink(article_id, "pending", "past")],
        )
        matches = store.find_duplicate_events(
            gun_event(locality="C", latitude=39.78, longitude=-89.64)
        )
        assert matches == [near, far]


class TestStats:
    def test_empty_store(self, store):
        stats = store.compute_stats()
        assert stats.events_per_article == {}
        assert stats.total_events == 0
        assert all(counts == (0, 0) for counts in stats.category_table.values())
        assert stats.top_tag_sets == []

    def test_hand_counted_histogram(self, store):
        article_id = minimal_setup(store)
        a2, _ = store.add_article(url="https://ex.com/a2", status=STATUS_REVIEWED)
        a3, _ = store.add_article(url="https://ex.com/a3", status=STATUS_REVIEWED)
        event_id = store.record_event(
            gun_event(), [ArticleEventLink(article_id, "pending", "past")]
        )
        store.link_event(a2.id, event_id, "future")
        stats = store.compute_stats()
        assert stats.events_per_article == {0: 1, 1: 2}
        assert stats.reviewed_articles == 3
        assert stats.links_past == 1
        assert stats.links_future == 1

    def test_histogram_total_matches_reviewed(self, store):
        article_id = minimal_setup(store)
        store.add_article(url="https://ex.com/a2", status=STATUS_REVIEWED)
        store.add_article(url="https://ex.com/queued")  # unreviewed: excluded
        store.record_event(gun_event(), [ArticleEventLink(article_id, "pending", "past")])
        stats = store.compute_stats()
        assert sum(stats.events_per_article.values()) == stats.reviewed_articles == 2
        weighted = sum(k * v for k, v in stats.events_per_article.items())
        assert weighted == stats.links_past + stats.links_future

    def test_category_table_and_top_sets(self, store):
        article_id = minimal_setup(store)
        store.record_event(gun_event(), [ArticleEventLink(article_id, "pending", "past")])
        store.record_event(
            gun_event(locality="Peoria"), [ArticleEventLink(article_id, "pending", "past")]
        )
        stats = store.compute_stats()
        assert stats.category_table["Guns"] == (2, 1)
        assert stats.category_table["Education"] == (0, 0)
        assert stats.top_tag_sets[0] == (
            ("For greater gun control", "Guns"),
            2,
            1,
        )


class TestMergeAndReview:
    def test_merge_moves_links(self, store):
        article_id = minimal_setup(store)
        a2, _ = store.add_article(url="https://ex.com/a2", status=STATUS_REVIEWED)
        keep = store.record_event(gun_event(), [ArticleEventLink(article_id, "x", "past")])
        drop = store.record_event(
            gun_event(locality="Peoria"), [ArticleEventLink(a2.id, "x", "future")]
        )
        moved = store.merge_events(drop, keep)
        assert moved == 1
        with pytest.raises(UnknownReferenceError):
            store.get_event(drop)
        assert {link.article_id for link in store.links_for_event(keep)} == {article_id, a2.id}

    def test_merge_into_self_rejected(self, store):
        article_id = minimal_setup(store)
        event_id = store.record_event(gun_event(), [ArticleEventLink(article_id, "x", "past")])
        with pytest.raises(ValidationError):
            store.merge_events(event_id, event_id)

    def test_apply_review_atomic_on_failure(self, store):
        minimal_setup(store)
        queued, _ = store.add_article(url="https://ex.com/queued")
        good = gun_event()
        bad = gun_event(tags=frozenset({"Guns"}))  # no position tag
        with pytest.raises(ValidationError):
            store.apply_review(queued.id, [(good, "past", None), (bad, "past", None)])
        assert store.get_article(queued.id).status == "unreviewed"
        assert store.list_events() == []

    def test_apply_review_links_duplicates(self, store):
        article_id = minimal_setup(store)
        existing = store.record_event(
            gun_event(), [ArticleEventLink(article_id, "x", "past")]
        )
        queued, _ = store.add_article(url="https://ex.com/queued")
        linked = store.apply_review(queued.id, [(gun_event(), "future", existing)])
        assert linked == [existing]
        assert len(store.list_events()) == 1
        assert store.get_article(queued.id).status == STATUS_REVIEWED


class TestArticles:
    def test_url_identity(self, store):
        first, created_first = store.add_article(url="https://ex.com/x")
        second, created_second = store.add_article(url="https://ex.com/x", title="other")
        assert created_first and not created_second
        assert first.id == second.id

    def test_unknown_article_raises(self, store):
        with pytest.raises(UnknownReferenceError):
            store.get_article("missing")

    def test_status_transitions(self, store):
        article, _ = store.add_article(url="https://ex.com/x")
        store.set_article_status(article.id, STATUS_REVIEWED)
        assert store.get_article(article.id).status == STATUS_REVIEWED
        with pytest.raises(ValidationError):
            store.set_article_status(article.id, "bogus")


class TestConcurrency:
    def test_parallel_writers_and_readers(self, tmp_path):
        store = EventStore(str(tmp_path / "c.db"))
        store.add_tag(Tag("For X", KIND_POSITION))
        errors = []

        def writer(n: int):
            try:
                for i in range(20):
                    article, _ = store.add_article(url=f"https://ex.com/{n}/{i}")
                    store.record_event(
                        ProtestEvent(
                            id=None,
                            date=DATE,
                            locality=f"town-{n}-{i}",
                            tags=frozenset({"Guns", "For X"}),
                        ),
                        [ArticleEventLink(article.id, "x", "past")],
                    )
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        def reader():
            try:
                for _ in range(30):
                    store.compute_stats()
                    store.list_articles()
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=writer, args=(n,)) for n in range(4)]
        threads += [threading.Thread(target=reader) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        # Full-scan invariant: every persisted event still validates.
        for event in store.list_events():
            kinds = {store.get_tag(name).kind for name in event.tags}
            assert KIND_CATEGORY in kinds and KIND_POSITION in kinds
            assert store.links_for_event(event.id)
        assert len(store.list_events()) == 80
        store.close()
