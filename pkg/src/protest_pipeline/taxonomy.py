"""Tag taxonomy: categories, for/against positions, and detail tags.

Tags are data, not code. The twelve category names below are seeds for
a new store; review work adds more tags over time, and positions may
declare a symmetric opposite ("For X" vs "Against X") which may never
appear together on one event.
"""

from __future__ import annotations

from dataclasses import dataclass

KIND_CATEGORY = "category"
KIND_POSITION = "position"
KIND_DETAIL = "detail"
KINDS = (KIND_CATEGORY, KIND_POSITION, KIND_DETAIL)

SEED_CATEGORIES = (
    "Civil Rights",
    "Collective Bargaining",
    "Education",
    "Environment",
    "Executive",
    "Guns",
    "Healthcare",
    "Immigration",
    "International",
    "Judicial",
    "Legislative",
    "Other",
)


@dataclass(frozen=True)
class Tag:
    name: str
    kind: str
    opposite: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("tag name must be nonempty")
        if self.kind not in KINDS:
            raise ValueError(f"unknown tag kind {self.kind!r}")
        if self.opposite is not None and self.kind != KIND_POSITION:
            raise ValueError("only position tags may declare an opposite")


def infer_kind(name: str, known_categories: set[str] | None = None) -> str:
    """Best-effort kind for tags arriving from outside the taxonomy.

    Seeded/known category names keep their kind; "For ..."/"Against ..."
    names are positions; everything else is a detail tag.
    """
    categories = known_categories if known_categories is not None else set(SEED_CATEGORIES)
    if name in categories:
        return KIND_CATEGORY
    if name.startswith("For ") or name.startswith("Against "):
        return KIND_POSITION
    return KIND_DETAIL


def opposite_name(name: str) -> str | None:
    """The natural opposite of a for/against position name, if any."""
    if name.startswith("For "):
        return "Against " + name[len("For ") :]
    if name.startswith("Against "):
        return "For " + name[len("Against ") :]
    return None
