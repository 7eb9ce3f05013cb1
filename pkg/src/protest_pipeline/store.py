"""Single-file relational store for articles, events, tags, and runs.

SQLite in WAL mode with an explicit schema version. One logical writer:
every operation takes the store lock, so the handle is safe to share
across threads; readers always see a committed snapshot.
"""

from __future__ import annotations

import datetime as dt
import json
import math
import sqlite3
import threading
import uuid
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import taxonomy
from .taxonomy import KIND_CATEGORY, KIND_POSITION, Tag

SCHEMA_VERSION = 1

STATUS_UNREVIEWED = "unreviewed"
STATUS_REVIEWED = "reviewed"
STATUS_SKIPPED = "skipped_by_title"
STATUSES = (STATUS_UNREVIEWED, STATUS_REVIEWED, STATUS_SKIPPED)

TENSE_PAST = "past"
TENSE_FUTURE = "future"

DEFAULT_DUPLICATE_RADIUS_KM = 25.0

_EARTH_RADIUS_KM = 6371.0088


class StoreError(Exception):
    pass


class ValidationError(StoreError):
    pass


class UnknownReferenceError(StoreError):
    pass


class ConflictError(StoreError):
    pass


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance between two points in kilometers."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * _EARTH_RADIUS_KM * math.asin(math.sqrt(a))


@dataclass(frozen=True)
class ProtestEvent:
    id: str | None
    date: dt.date
    locality: str = ""
    region: str = ""
    latitude: float | None = None
    longitude: float | None = None
    attendee_count: int | None = None
    attendee_source: str | None = None
    tags: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ArticleEventLink:
    article_id: str
    event_id: str
    tense: str

    def __post_init__(self) -> None:
        if self.tense not in (TENSE_PAST, TENSE_FUTURE):
            raise ValidationError(f"tense must be past or future, got {self.tense!r}")


@dataclass(frozen=True)
class Suggestions:
    domain_score: float | None = None
    count_class: str | None = None
    count_probs: dict[str, float] | None = None
    tags: tuple[tuple[str, float], ...] = ()

    def is_empty(self) -> bool:
        return self.domain_score is None and self.count_class is None and not self.tags


@dataclass(frozen=True)
class ArticleRecord:
    id: str
    url: str
    source_id: str | None = None
    fetched_at: str = ""
    title: str = ""
    body: tuple[str, ...] = ()
    status: str = STATUS_UNREVIEWED
    suggestions: Suggestions | None = None
    skip_eligible: bool = False


@dataclass(frozen=True)
class DatasetStats:
    events_per_article: dict[int, int]
    category_table: dict[str, tuple[int, int]]
    top_tag_sets: list[tuple[tuple[str, ...], int, int]]
    total_events: int
    total_articles: int
    reviewed_articles: int
    links_past: int
    links_future: int


@dataclass
class ImportReport:
    rows_total: int = 0
    articles_created: int = 0
    events_created: int = 0
    links_created: int = 0
    rows_skipped: int = 0
    warnings: list[str] = field(default_factory=list)


_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta(key TEXT PRIMARY KEY, value TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS sources(
  id TEXT PRIMARY KEY, url TEXT NOT NULL, label TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS tags(
  name TEXT PRIMARY KEY,
  kind TEXT NOT NULL CHECK(kind IN ('category','position','detail')),
  opposite TEXT
);
CREATE TABLE IF NOT EXISTS articles(
  id TEXT PRIMARY KEY,
  url TEXT NOT NULL UNIQUE,
  source_id TEXT,
  fetched_at TEXT NOT NULL DEFAULT '',
  title TEXT NOT NULL DEFAULT '',
  body TEXT NOT NULL DEFAULT '[]',
  status TEXT NOT NULL DEFAULT 'unreviewed'
    CHECK(status IN ('unreviewed','reviewed','skipped_by_title')),
  suggestions TEXT,
  skip_eligible INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS events(
  id TEXT PRIMARY KEY,
  date TEXT NOT NULL,
  locality TEXT NOT NULL DEFAULT '',
  region TEXT NOT NULL DEFAULT '',
  latitude REAL,
  longitude REAL,
  attendee_count INTEGER,
  attendee_source TEXT
);
CREATE TABLE IF NOT EXISTS event_tags(
  event_id TEXT NOT NULL,
  tag TEXT NOT NULL,
  PRIMARY KEY(event_id, tag)
);
CREATE TABLE IF NOT EXISTS links(
  article_id TEXT NOT NULL,
  event_id TEXT NOT NULL,
  tense TEXT NOT NULL CHECK(tense IN ('past','future')),
  PRIMARY KEY(article_id, event_id)
);
CREATE TABLE IF NOT EXISTS signatures(
  article_id TEXT PRIMARY KEY,
  w INTEGER NOT NULL,
  k INTEGER NOT NULL,
  seed INTEGER NOT NULL,
  empty INTEGER NOT NULL,
  minhash BLOB NOT NULL
);
CREATE TABLE IF NOT EXISTS runs(
  id TEXT PRIMARY KEY,
  started_at TEXT NOT NULL,
  finished_at TEXT,
  counts TEXT NOT NULL DEFAULT '{}'
);
CREATE TABLE IF NOT EXISTS run_queue(
  run_id TEXT NOT NULL,
  grp INTEGER NOT NULL,
  pos INTEGER NOT NULL,
  article_id TEXT NOT NULL,
  diff_against TEXT,
  PRIMARY KEY(run_id, grp, pos)
);
CREATE INDEX IF NOT EXISTS idx_events_date ON events(date);
CREATE INDEX IF NOT EXISTS idx_links_event ON links(event_id);
"""


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


def _norm_place(text: str) -> str:
    return " ".join(text.split()).casefold()


class EventStore:
    """Store handle; open one per process and share it freely."""

    def __init__(self, path: str = ":memory:", seed_taxonomy: bool = True):
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        with self._lock, self._conn:
            self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.executescript(_SCHEMA)
            cur = self._conn.execute("SELECT value FROM meta WHERE key='schema_version'")
            row = cur.fetchone()
            if row is None:
                self._conn.execute(
                    "INSERT INTO meta(key, value) VALUES ('schema_version', ?)",
                    (str(SCHEMA_VERSION),),
                )
            elif int(row["value"]) != SCHEMA_VERSION:
                raise StoreError(f"unsupported schema version {row['value']}")
        if seed_taxonomy and not self.list_tags():
            for name in taxonomy.SEED_CATEGORIES:
                self.add_tag(Tag(name=name, kind=KIND_CATEGORY))

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- taxonomy ------------------------------------------------------

    def add_tag(self, tag: Tag) -> None:
        with self._lock, self._conn:
            existing = self._conn.execute(
                "SELECT kind FROM tags WHERE name=?", (tag.name,)
            ).fetchone()
            if existing is not None:
                if existing["kind"] != tag.kind:
                    raise ConflictError(
                        f"tag {tag.name!r} already exists with kind {existing['kind']!r}"
                    )
                return
            if tag.opposite is not None:
                opp = self._conn.execute(
                    "SELECT kind FROM tags WHERE name=?", (tag.opposite,)
                ).fetchone()
                if opp is None:
                    raise UnknownReferenceError(f"opposite tag {tag.opposite!r} does not exist")
                if opp["kind"] != KIND_POSITION:
                    raise ValidationError("opposite tags must both be positions")
            self._conn.execute(
                "INSERT INTO tags(name, kind, opposite) VALUES (?,?,?)",
                (tag.name, tag.kind, tag.opposite),
            )
            if tag.opposite is not None:
                # Opposition is symmetric.
                self._conn.execute(
                    "UPDATE tags SET opposite=? WHERE name=?", (tag.name, tag.opposite)
                )

    def ensure_tag(self, name: str, kind: str | None = None) -> Tag:
        """Fetch or auto-register a tag, pairing for/against opposites."""
        with self._lock:
            row = self._conn.execute(
                "SELECT name, kind, opposite FROM tags WHERE name=?", (name,)
            ).fetchone()
            if row is not None:
                return Tag(name=row["name"], kind=row["kind"], opposite=row["opposite"])
            categories = {t.name for t in self.list_tags() if t.kind == KIND_CATEGORY}
            resolved = kind or taxonomy.infer_kind(name, categories | set(taxonomy.SEED_CATEGORIES))
            opposite = None
            if resolved == KIND_POSITION:
                candidate = taxonomy.opposite_name(name)
                if candidate is not None:
                    present = self._conn.execute(
                        "SELECT kind FROM tags WHERE name=?", (candidate,)
                    ).fetchone()
                    if present is not None and present["kind"] == KIND_POSITION:
                        opposite = candidate
            tag = Tag(name=name, kind=resolved, opposite=opposite)
            self.add_tag(tag)
            return tag

    def list_tags(self) -> list[Tag]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT name, kind, opposite FROM tags ORDER BY name"
            ).fetchall()
        return [Tag(name=r["name"], kind=r["kind"], opposite=r["opposite"]) for r in rows]

    def get_tag(self, name: str) -> Tag | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT name, kind, opposite FROM tags WHERE name=?", (name,)
            ).fetchone()
        if row is None:
            return None
        return Tag(name=row["name"], kind=row["kind"], opposite=row["opposite"])

    def _validate_tag_set(self, tags: Iterable[str]) -> dict[str, Tag]:
        resolved: dict[str, Tag] = {}
        for name in tags:
            tag = self.get_tag(name)
            if tag is None:
                raise UnknownReferenceError(f"tag {name!r} is not in the taxonomy")
            resolved[name] = tag
        kinds = {t.kind for t in resolved.values()}
        if KIND_CATEGORY not in kinds:
            raise ValidationError("event needs at least one category tag")
        if KIND_POSITION not in kinds:
            raise ValidationError("event needs at least one position tag")
        for tag in resolved.values():
            if tag.opposite is not None and tag.opposite in resolved:
                raise ValidationError(
                    f"event carries opposite positions {tag.name!r} and {tag.opposite!r}"
                )
        return resolved

    # -- sources -------------------------------------------------------

    def add_source(self, source_id: str, url: str, label: str = "") -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR IGNORE INTO sources(id, url, label) VALUES (?,?,?)",
                (source_id, url, label),
            )

    def list_sources(self) -> list[tuple[str, str, str]]:
        with self._lock:
            rows = self._conn.execute("SELECT id, url, label FROM sources ORDER BY id").fetchall()
        return [(r["id"], r["url"], r["label"]) for r in rows]

    # -- articles ------------------------------------------------------

    def _article_from_row(self, row: sqlite3.Row) -> ArticleRecord:
        suggestions = None
        if row["suggestions"]:
            payload = json.loads(row["suggestions"])
            suggestions = Suggestions(
                domain_score=payload.get("domain_score"),
                count_class=payload.get("count_class"),
                count_probs=payload.get("count_probs"),
                tags=tuple((name, score) for name, score in payload.get("tags", [])),
            )
        return ArticleRecord(
            id=row["id"],
            url=row["url"],
            source_id=row["source_id"],
            fetched_at=row["fetched_at"],
            title=row["title"],
            body=tuple(json.loads(row["body"])),
            status=row["status"],
            suggestions=suggestions,
            skip_eligible=bool(row["skip_eligible"]),
        )

    def add_article(
        self,
        url: str,
        title: str = "",
        body: Sequence[str] = (),
        source_id: str | None = None,
        fetched_at: str = "",
        status: str = STATUS_UNREVIEWED,
        article_id: str | None = None,
    ) -> tuple[ArticleRecord, bool]:
        """Insert an article; the URL is the identity. Returns (record, created)."""
        if status not in STATUSES:
            raise ValidationError(f"unknown article status {status!r}")
        with self._lock, self._conn:
            existing = self._conn.execute("SELECT * FROM articles WHERE url=?", (url,)).fetchone()
            if existing is not None:
                return self._article_from_row(existing), False
            record_id = article_id or _new_id("art")
            self._conn.execute(
                "INSERT INTO articles(id, url, source_id, fetched_at, title, body, status)"
                " VALUES (?,?,?,?,?,?,?)",
                (record_id, url, source_id, fetched_at, title, json.dumps(list(body)), status),
            )
            row = self._conn.execute("SELECT * FROM articles WHERE id=?", (record_id,)).fetchone()
            return self._article_from_row(row), True

    def get_article(self, article_id: str) -> ArticleRecord:
        with self._lock:
            row = self._conn.execute("SELECT * FROM articles WHERE id=?", (article_id,)).fetchone()
        if row is None:
            raise UnknownReferenceError(f"article {article_id!r} does not exist")
        return self._article_from_row(row)

    def find_article_by_url(self, url: str) -> ArticleRecord | None:
        with self._lock:
            row = self._conn.execute("SELECT * FROM articles WHERE url=?", (url,)).fetchone()
        return None if row is None else self._article_from_row(row)

    def list_articles(self, status: str | None = None) -> list[ArticleRecord]:
        query = "SELECT * FROM articles"
        params: tuple = ()
        if status is not None:
            query += " WHERE status=?"
            params = (status,)
        query += " ORDER BY id"
        with self._lock:
            rows = self._conn.execute(query, params).fetchall()
        return [self._article_from_row(r) for r in rows]

    def set_article_status(self, article_id: str, status: str) -> None:
        if status not in STATUSES:
            raise ValidationError(f"unknown article status {status!r}")
        with self._lock, self._conn:
            cur = self._conn.execute(
                "UPDATE articles SET status=? WHERE id=?", (status, article_id)
            )
            if cur.rowcount == 0:
                raise UnknownReferenceError(f"article {article_id!r} does not exist")

    def set_suggestions(
        self, article_id: str, suggestions: Suggestions, skip_eligible: bool | None = None
    ) -> None:
        payload = json.dumps(
            {
                "domain_score": suggestions.domain_score,
                "count_class": suggestions.count_class,
                "count_probs": suggestions.count_probs,
                "tags": [[name, score] for name, score in suggestions.tags],
            }
        )
        with self._lock, self._conn:
            if skip_eligible is None:
                cur = self._conn.execute(
                    "UPDATE articles SET suggestions=? WHERE id=?", (payload, article_id)
                )
            else:
                cur = self._conn.execute(
                    "UPDATE articles SET suggestions=?, skip_eligible=? WHERE id=?",
                    (payload, int(skip_eligible), article_id),
                )
            if cur.rowcount == 0:
                raise UnknownReferenceError(f"article {article_id!r} does not exist")

    # -- events --------------------------------------------------------

    def _event_from_row(self, row: sqlite3.Row) -> ProtestEvent:
        with self._lock:
            tags = frozenset(
                r["tag"]
                for r in self._conn.execute(
                    "SELECT tag FROM event_tags WHERE event_id=?", (row["id"],)
                )
            )
        return ProtestEvent(
            id=row["id"],
            date=dt.date.fromisoformat(row["date"]),
            locality=row["locality"],
            region=row["region"],
            latitude=row["latitude"],
            longitude=row["longitude"],
            attendee_count=row["attendee_count"],
            attendee_source=row["attendee_source"],
            tags=tags,
        )

    def get_event(self, event_id: str) -> ProtestEvent:
        with self._lock:
            row = self._conn.execute("SELECT * FROM events WHERE id=?", (event_id,)).fetchone()
        if row is None:
            raise UnknownReferenceError(f"event {event_id!r} does not exist")
        return self._event_from_row(row)

    def list_events(self) -> list[ProtestEvent]:
        with self._lock:
            rows = self._conn.execute("SELECT * FROM events ORDER BY id").fetchall()
        return [self._event_from_row(r) for r in rows]

    def record_event(self, event: ProtestEvent, links: Sequence[ArticleEventLink]) -> str:
        """Validate and persist an event with its article links."""
        if not links:
            raise ValidationError("every event needs at least one article reference")
        if event.attendee_count is not None and event.attendee_count < 0:
            raise ValidationError("attendee count must be nonnegative")
        self._validate_tag_set(event.tags)
        event_id = event.id or _new_id("ev")
        with self._lock, self._conn:
            for link in links:
                row = self._conn.execute(
                    "SELECT 1 FROM articles WHERE id=?", (link.article_id,)
                ).fetchone()
                if row is None:
                    raise UnknownReferenceError(f"article {link.article_id!r} does not exist")
            if self._conn.execute("SELECT 1 FROM events WHERE id=?", (event_id,)).fetchone():
                raise ConflictError(f"event {event_id!r} already exists")
            self._conn.execute(
                "INSERT INTO events(id, date, locality, region, latitude, longitude,"
                " attendee_count, attendee_source) VALUES (?,?,?,?,?,?,?,?)",
                (
                    event_id,
                    event.date.isoformat(),
                    event.locality,
                    event.region,
                    event.latitude,
                    event.longitude,
                    event.attendee_count,
                    event.attendee_source,
                ),
            )
            for tag in sorted(event.tags):
                self._conn.execute(
                    "INSERT INTO event_tags(event_id, tag) VALUES (?,?)", (event_id, tag)
                )
            for link in links:
                self._conn.execute(
                    "INSERT OR IGNORE INTO links(article_id, event_id, tense) VALUES (?,?,?)",
                    (link.article_id, event_id, link.tense),
                )
        return event_id

    def associate_article(
        self, article_id: str, links: Sequence[ArticleEventLink]
    ) -> int:
        """Inherit event links and mark the article reviewed, atomically.

        Used by auto-association so no reader ever observes an
        unreviewed article carrying links.
        """
        with self._lock:
            if not self._conn.execute(
                "SELECT 1 FROM articles WHERE id=?", (article_id,)
            ).fetchone():
                raise UnknownReferenceError(f"article {article_id!r} does not exist")
            attached = 0
            try:
                self._conn.execute("BEGIN")
                for link in links:
                    if not self._conn.execute(
                        "SELECT 1 FROM events WHERE id=?", (link.event_id,)
                    ).fetchone():
                        raise UnknownReferenceError(f"event {link.event_id!r} does not exist")
                    cur = self._conn.execute(
                        "INSERT OR IGNORE INTO links(article_id, event_id, tense)"
                        " VALUES (?,?,?)",
                        (article_id, link.event_id, link.tense),
                    )
                    attached += cur.rowcount
                self._conn.execute(
                    "UPDATE articles SET status=? WHERE id=?", (STATUS_REVIEWED, article_id)
                )
                self._conn.execute("COMMIT")
            except BaseException:
                if self._conn.in_transaction:
                    self._conn.execute("ROLLBACK")
                raise
            return attached

    def link_event(self, article_id: str, event_id: str, tense: str) -> bool:
        """Attach an existing event to an article; returns False if already linked."""
        link = ArticleEventLink(article_id=article_id, event_id=event_id, tense=tense)
        with self._lock, self._conn:
            if not self._conn.execute("SELECT 1 FROM articles WHERE id=?", (article_id,)).fetchone():
                raise UnknownReferenceError(f"article {article_id!r} does not exist")
            if not self._conn.execute("SELECT 1 FROM events WHERE id=?", (event_id,)).fetchone():
                raise UnknownReferenceError(f"event {event_id!r} does not exist")
            cur = self._conn.execute(
                "INSERT OR IGNORE INTO links(article_id, event_id, tense) VALUES (?,?,?)",
                (link.article_id, link.event_id, link.tense),
            )
            return cur.rowcount > 0

    def links_for_article(self, article_id: str) -> list[ArticleEventLink]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT article_id, event_id, tense FROM links WHERE article_id=?"
                " ORDER BY event_id",
                (article_id,),
            ).fetchall()
        return [ArticleEventLink(r["article_id"], r["event_id"], r["tense"]) for r in rows]

    def links_for_event(self, event_id: str) -> list[ArticleEventLink]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT article_id, event_id, tense FROM links WHERE event_id=?"
                " ORDER BY article_id",
                (event_id,),
            ).fetchall()
        return [ArticleEventLink(r["article_id"], r["event_id"], r["tense"]) for r in rows]

    def find_duplicate_events(
        self, candidate: ProtestEvent, radius_km: float = DEFAULT_DUPLICATE_RADIUS_KM
    ) -> list[str]:
        """Existing events with the same date, tag set, and a nearby location.

        Nearby means normalized locality+region equality, or coordinates
        within radius_km when both events carry them. Results are ranked
        by location closeness.
        """
        self._validate_tag_set(candidate.tags)
        matches: list[tuple[float, str]] = []
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM events WHERE date=?", (candidate.date.isoformat(),)
            ).fetchall()
        for row in rows:
            event = self._event_from_row(row)
            if event.tags != frozenset(candidate.tags):
                continue
            name_equal = _norm_place(event.locality) == _norm_place(candidate.locality) and (
                _norm_place(event.region) == _norm_place(candidate.region)
            )
            distance: float | None = None
            if (
                candidate.latitude is not None
                and candidate.longitude is not None
                and event.latitude is not None
                and event.longitude is not None
            ):
                distance = haversine_km(
                    candidate.latitude, candidate.longitude, event.latitude, event.longitude
                )
            if name_equal:
                matches.append((0.0, event.id))
            elif distance is not None and distance <= radius_km:
                matches.append((distance, event.id))
        matches.sort()
        return [event_id for _, event_id in matches]

    def apply_review(
        self,
        article_id: str,
        staged: Sequence[tuple[ProtestEvent, str, str | None]],
    ) -> list[str]:
        """Persist one review decision in a single transaction.

        Each staged entry is (event, tense, duplicate_event_id) where a
        non-None duplicate means link to that existing event instead of
        creating a new one. Any failure rolls everything back and the
        article stays unreviewed.
        """
        for event, tense, duplicate in staged:
            if tense not in (TENSE_PAST, TENSE_FUTURE):
                raise ValidationError(f"tense must be past or future, got {tense!r}")
            if event.attendee_count is not None and event.attendee_count < 0:
                raise ValidationError("attendee count must be nonnegative")
            if duplicate is None:
                self._validate_tag_set(event.tags)
        with self._lock:
            row = self._conn.execute(
                "SELECT status FROM articles WHERE id=?", (article_id,)
            ).fetchone()
            if row is None:
                raise UnknownReferenceError(f"article {article_id!r} does not exist")
            if row["status"] != STATUS_UNREVIEWED:
                raise ConflictError(f"article {article_id!r} is already {row['status']}")
            linked: list[str] = []
            try:
                self._conn.execute("BEGIN")
                for event, tense, duplicate in staged:
                    if duplicate is not None:
                        if not self._conn.execute(
                            "SELECT 1 FROM events WHERE id=?", (duplicate,)
                        ).fetchone():
                            raise UnknownReferenceError(f"event {duplicate!r} does not exist")
                        event_id = duplicate
                    else:
                        event_id = event.id or _new_id("ev")
                        if self._conn.execute(
                            "SELECT 1 FROM events WHERE id=?", (event_id,)
                        ).fetchone():
                            raise ConflictError(f"event {event_id!r} already exists")
                        self._conn.execute(
                            "INSERT INTO events(id, date, locality, region, latitude,"
                            " longitude, attendee_count, attendee_source)"
                            " VALUES (?,?,?,?,?,?,?,?)",
                            (
                                event_id,
                                event.date.isoformat(),
                                event.locality,
                                event.region,
                                event.latitude,
                                event.longitude,
                                event.attendee_count,
                                event.attendee_source,
                            ),
                        )
                        for tag in sorted(event.tags):
                            self._conn.execute(
                                "INSERT INTO event_tags(event_id, tag) VALUES (?,?)",
                                (event_id, tag),
                            )
                    self._conn.execute(
                        "INSERT OR IGNORE INTO links(article_id, event_id, tense)"
                        " VALUES (?,?,?)",
                        (article_id, event_id, tense),
                    )
                    linked.append(event_id)
                self._conn.execute(
                    "UPDATE articles SET status=? WHERE id=?", (STATUS_REVIEWED, article_id)
                )
                self._conn.execute("COMMIT")
            except BaseException:
                if self._conn.in_transaction:
                    self._conn.execute("ROLLBACK")
                raise
            return linked

    def merge_events(self, event_id: str, into_event_id: str) -> int:
        """Re-point all links of one event onto another and delete it."""
        if event_id == into_event_id:
            raise ValidationError("cannot merge an event into itself")
        with self._lock, self._conn:
            for eid in (event_id, into_event_id):
                if not self._conn.execute("SELECT 1 FROM events WHERE id=?", (eid,)).fetchone():
                    raise UnknownReferenceError(f"event {eid!r} does not exist")
            moved = 0
            rows = self._conn.execute(
                "SELECT article_id, tense FROM links WHERE event_id=?", (event_id,)
            ).fetchall()
            for row in rows:
                cur = self._conn.execute(
                    "INSERT OR IGNORE INTO links(article_id, event_id, tense) VALUES (?,?,?)",
                    (row["article_id"], into_event_id, row["tense"]),
                )
                moved += cur.rowcount
            self._conn.execute("DELETE FROM links WHERE event_id=?", (event_id,))
            self._conn.execute("DELETE FROM event_tags WHERE event_id=?", (event_id,))
            self._conn.execute("DELETE FROM events WHERE id=?", (event_id,))
            return moved

    # -- signatures ----------------------------------------------------

    def save_signature(
        self, article_id: str, w: int, k: int, seed: int, minhash: np.ndarray, empty: bool
    ) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO signatures(article_id, w, k, seed, empty, minhash)"
                " VALUES (?,?,?,?,?,?)",
                (article_id, w, k, str(seed), int(empty), minhash.astype("<u8").tobytes()),
            )

    def load_signatures(self) -> dict[str, tuple[int, int, int, bool, np.ndarray]]:
        with self._lock:
            rows = self._conn.execute("SELECT * FROM signatures").fetchall()
        out = {}
        for r in rows:
            mh = np.frombuffer(r["minhash"], dtype="<u8").astype(np.uint64)
            out[r["article_id"]] = (r["w"], r["k"], int(r["seed"]), bool(r["empty"]), mh)
        return out

    # -- runs and queues -----------------------------------------------

    def record_run(self, run_id: str, started_at: str, finished_at: str, counts: dict) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO runs(id, started_at, finished_at, counts)"
                " VALUES (?,?,?,?)",
                (run_id, started_at, finished_at, json.dumps(counts, sort_keys=True)),
            )

    def get_run(self, run_id: str) -> tuple[str, str, str, dict] | None:
        with self._lock:
            row = self._conn.execute("SELECT * FROM runs WHERE id=?", (run_id,)).fetchone()
        if row is None:
            return None
        return row["id"], row["started_at"], row["finished_at"], json.loads(row["counts"])

    def latest_run_id(self) -> str | None:
        with self._lock:
            row = self._conn.execute(
                "SELECT id FROM runs ORDER BY started_at DESC, id DESC LIMIT 1"
            ).fetchone()
        return None if row is None else row["id"]

    def save_queue(self, run_id: str, groups: Sequence[Sequence[tuple[str, str | None]]]) -> None:
        """Persist grouped (article_id, diff_against) pairs in path order."""
        with self._lock, self._conn:
            self._conn.execute("DELETE FROM run_queue WHERE run_id=?", (run_id,))
            for grp, members in enumerate(groups):
                for pos, (article_id, diff_against) in enumerate(members):
                    self._conn.execute(
                        "INSERT INTO run_queue(run_id, grp, pos, article_id, diff_against)"
                        " VALUES (?,?,?,?,?)",
                        (run_id, grp, pos, article_id, diff_against),
                    )

    def load_queue(self, run_id: str) -> list[list[tuple[str, str | None]]]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT grp, pos, article_id, diff_against FROM run_queue WHERE run_id=?"
                " ORDER BY grp, pos",
                (run_id,),
            ).fetchall()
        groups: list[list[tuple[str, str | None]]] = []
        for row in rows:
            while len(groups) <= row["grp"]:
                groups.append([])
            groups[row["grp"]].append((row["article_id"], row["diff_against"]))
        return groups

    # -- statistics ----------------------------------------------------

    def compute_stats(self) -> DatasetStats:
        with self._lock:
            reviewed_rows = self._conn.execute(
                "SELECT id FROM articles WHERE status=?", (STATUS_REVIEWED,)
            ).fetchall()
            link_rows = self._conn.execute(
                "SELECT article_id, event_id, tense FROM links"
            ).fetchall()
            event_tag_rows = self._conn.execute("SELECT event_id, tag FROM event_tags").fetchall()
            category_names = [
                r["name"]
                for r in self._conn.execute(
                    "SELECT name FROM tags WHERE kind=? ORDER BY name", (KIND_CATEGORY,)
                )
            ]
            total_events = self._conn.execute("SELECT COUNT(*) AS n FROM events").fetchone()["n"]
            total_articles = self._conn.execute(
                "SELECT COUNT(*) AS n FROM articles"
            ).fetchone()["n"]
            reviewed_status = {r["id"] for r in reviewed_rows}

        links_by_article: dict[str, list[str]] = {}
        articles_by_event: dict[str, set[str]] = {}
        links_past = links_future = 0
        for row in link_rows:
            links_by_article.setdefault(row["article_id"], []).append(row["event_id"])
            articles_by_event.setdefault(row["event_id"], set()).add(row["article_id"])
            if row["article_id"] in reviewed_status:
                if row["tense"] == TENSE_PAST:
                    links_past += 1
                else:
                    links_future += 1

        events_per_article: dict[int, int] = {}
        for article_id in reviewed_status:
            n = len(links_by_article.get(article_id, []))
            events_per_article[n] = events_per_article.get(n, 0) + 1

        tags_by_event: dict[str, list[str]] = {}
        for row in event_tag_rows:
            tags_by_event.setdefault(row["event_id"], []).append(row["tag"])

        category_table: dict[str, tuple[int, int]] = {}
        for name in category_names:
            event_ids = {eid for eid, tags in tags_by_event.items() if name in tags}
            articles = set()
            for eid in event_ids:
                articles |= articles_by_event.get(eid, set())
            category_table[name] = (len(event_ids), len(articles))

        sets: dict[tuple[str, ...], tuple[int, set[str]]] = {}
        for eid, tags in tags_by_event.items():
            key = tuple(sorted(tags))
            count, articles = sets.get(key, (0, set()))
            sets[key] = (count + 1, articles | articles_by_event.get(eid, set()))
        top_tag_sets = sorted(
            ((key, count, len(articles)) for key, (count, articles) in sets.items()),
            key=lambda item: (-item[1], item[0]),
        )

        return DatasetStats(
            events_per_article=events_per_article,
            category_table=category_table,
            top_tag_sets=top_tag_sets,
            total_events=total_events,
            total_articles=total_articles,
            reviewed_articles=len(reviewed_status),
            links_past=links_past,
            links_future=links_future,
        )
