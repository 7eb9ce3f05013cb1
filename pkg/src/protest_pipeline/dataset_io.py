"""Dataset import/export: one record per article-event link.

Exports are URL-only (no article text) in JSONL or CSV with the fields
{url, event_id, date, locality, region, attendees, tags, tense};
reviewed articles without events appear once as negative examples.
Imports take a column-mapping config so external snapshots with
different headers can be adapted without code changes.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path

from .store import (
    STATUS_REVIEWED,
    ArticleEventLink,
    EventStore,
    ImportReport,
    ProtestEvent,
    StoreError,
    TENSE_PAST,
)

EXPORT_FIELDS = ("url", "event_id", "date", "locality", "region", "attendees", "tags", "tense")

REQUIRED_KEYS = ("url", "event", "date", "location", "tags", "attendees", "tense")

DEFAULT_MAPPING = {
    "url": "url",
    "event": "event_id",
    "date": "date",
    "locality": "locality",
    "region": "region",
    "tags": "tags",
    "attendees": "attendees",
    "tense": "tense",
}

_KEY_ALIASES = {
    "event_id": "event",
    "tag": "tags",
    "attendee": "attendees",
    "attendee_count": "attendees",
}


class MappingError(StoreError):
    pass


@dataclass(frozen=True)
class ColumnMapping:
    """Logical field -> CSV column name."""

    columns: dict[str, str]

    @classmethod
    def from_file(cls, path) -> "ColumnMapping":
        columns: dict[str, str] = {}
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise MappingError(f"bad mapping line (expected key=column): {line!r}")
            key, value = line.split("=", 1)
            key = key.strip().lower()
            columns[_KEY_ALIASES.get(key, key)] = value.strip()
        return cls(columns=columns)

    def validate(self) -> None:
        has_location = "location" in self.columns or "locality" in self.columns
        for key in REQUIRED_KEYS:
            if key == "location":
                if not has_location:
                    raise MappingError("mapping must name a location or locality column")
                continue
            if key not in self.columns:
                raise MappingError(f"mapping is missing the {key!r} column")


def _split_location(row: dict[str, str], mapping: ColumnMapping) -> tuple[str, str]:
    columns = mapping.columns
    if "locality" in columns:
        locality = row.get(columns["locality"], "").strip()
        region = row.get(columns.get("region", ""), "").strip() if "region" in columns else ""
        return locality, region
    combined = row.get(columns["location"], "").strip()
    if "," in combined:
        locality, region = combined.rsplit(",", 1)
        return locality.strip(), region.strip()
    return combined, ""


def import_dataset(store: EventStore, path, mapping: ColumnMapping) -> ImportReport:
    """Idempotent row-by-row import; malformed rows warn instead of aborting."""
    mapping.validate()
    columns = mapping.columns
    report = ImportReport()
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot read dataset file {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return report
        for key in ("url", "event", "date", "tags", "attendees", "tense"):
            column = columns.get(key)
            if column is not None and column not in reader.fieldnames:
                raise MappingError(f"column {column!r} for {key!r} not in file header")
        for line_no, row in enumerate(reader, start=2):
            report.rows_total += 1
            try:
                _import_row(store, row, mapping, report)
            except (StoreError, ValueError) as exc:
                report.rows_skipped += 1
                report.warnings.append(f"line {line_no}: {exc}")
    return report


def _import_row(
    store: EventStore, row: dict[str, str], mapping: ColumnMapping, report: ImportReport
) -> None:
    columns = mapping.columns
    url = (row.get(columns["url"]) or "").strip()
    if not url:
        raise ValueError("row has no URL")
    article = store.find_article_by_url(url)
    if article is None:
        article, created = store.add_article(url=url, status=STATUS_REVIEWED)
        if created:
            report.articles_created += 1

    event_id = (row.get(columns["event"]) or "").strip()
    if not event_id:
        return  # negative example: reviewed article with no events

    tense = (row.get(columns["tense"]) or "").strip().lower() or TENSE_PAST
    try:
        store.get_event(event_id)
        exists = True
    except StoreError:
        exists = False
    if exists:
        if store.link_event(article.id, event_id, tense):
            report.links_created += 1
        return

    date_text = (row.get(columns["date"]) or "").strip()
    date = dt.date.fromisoformat(date_text)
    locality, region = _split_location(row, mapping)
    tags = [t.strip() for t in (row.get(columns["tags"]) or "").split(";") if t.strip()]
    for name in tags:
        store.ensure_tag(name)
    attendee_text = (row.get(columns["attendees"]) or "").strip()
    attendee_count = int(attendee_text) if attendee_text else None

    event = ProtestEvent(
        id=event_id,
        date=date,
        locality=locality,
        region=region,
        attendee_count=attendee_count,
        attendee_source=article.id if attendee_count is not None else None,
        tags=frozenset(tags),
    )
    store.record_event(event, [ArticleEventLink(article.id, event_id, tense)])
    report.events_created += 1
    report.links_created += 1


def _export_records(store: EventStore) -> list[dict]:
    records = []
    for article in store.list_articles(status=STATUS_REVIEWED):
        links = store.links_for_article(article.id)
        if not links:
            records.append(
                {
                    "url": article.url,
                    "event_id": "",
                    "date": "",
                    "locality": "",
                    "region": "",
                    "attendees": None,
                    "tags": [],
                    "tense": "",
                }
            )
            continue
        for link in links:
            event = store.get_event(link.event_id)
            records.append(
                {
                    "url": article.url,
                    "event_id": event.id,
                    "date": event.date.isoformat(),
                    "locality": event.locality,
                    "region": event.region,
                    "attendees": event.attendee_count,
                    "tags": sorted(event.tags),
                    "tense": link.tense,
                }
            )
    records.sort(key=lambda r: (r["url"], r["event_id"]))
    return records


def export_dataset(store: EventStore, path, format: str = "jsonl") -> int:
    """Write all link records (plus negative-example articles); returns the count."""
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unsupported export format {format!r}")
    records = _export_records(store)
    path = Path(path)
    if format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(EXPORT_FIELDS)
            for record in records:
                writer.writerow(
                    [
                        record["url"],
                        record["event_id"],
                        record["date"],
                        record["locality"],
                        record["region"],
                        "" if record["attendees"] is None else record["attendees"],
                        ";".join(record["tags"]),
                        record["tense"],
                    ]
                )
    return len(records)
