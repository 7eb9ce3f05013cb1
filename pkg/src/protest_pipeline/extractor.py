"""Article title and body extraction from raw HTML.

Every text-bearing element becomes a scored block: long, punctuated,
link-free text in paragraph-like tags scores high, navigation chrome
scores low. The body is taken from the container whose child blocks
score highest in total, which keeps multi-paragraph articles together.
"""

from __future__ import annotations

from dataclasses import dataclass

from .htmldom import Element, normalize_ws, parse_html

BLOCK_TAGS = frozenset(
    "p li td th blockquote pre dd dt figcaption summary caption".split()
)
INLINE_TAGS = frozenset(
    "a abbr b bdi bdo br cite code data dfn em i kbd mark q s samp small span "
    "strong sub sup time u var wbr font".split()
)
HEADING_TAGS = frozenset(("h1", "h2", "h3", "h4", "h5", "h6"))
PARAGRAPH_LIKE = frozenset(("p", "blockquote", "pre", "figcaption"))
NAV_LIKE = frozenset(
    "li dd dt nav footer header aside menu button option label figure form".split()
)
SKIP_TAGS = frozenset(("script", "style", "noscript", "template", "title", "svg", "iframe"))

_SENTENCE_PUNCT = ".!?"


class ExtractionError(Exception):
    def __init__(self, url: str, reason: str = "no scorable text"):
        super().__init__(f"{reason} in {url}")
        self.url = url


@dataclass(frozen=True)
class ScoreWeights:
    char_cap: int = 1000
    char_divisor: float = 100.0
    comma_weight: float = 1.0
    sentence_weight: float = 2.0
    paragraph_bonus: float = 5.0
    nav_penalty: float = 5.0
    min_block_chars: int = 25


@dataclass(frozen=True)
class TextBlock:
    text: str
    tag_name: str
    char_count: int
    comma_count: int
    sentence_punct_count: int
    link_char_fraction: float
    depth: int


@dataclass(frozen=True)
class ExtractionResult:
    title: str
    paragraphs: tuple[str, ...]
    score: float


def score_text_block(block: TextBlock, weights: ScoreWeights = ScoreWeights()) -> float:
    """Length/punctuation score damped by link density plus a tag bonus."""
    base = (
        min(block.char_count, weights.char_cap) / weights.char_divisor
        + weights.comma_weight * block.comma_count
        + weights.sentence_weight * block.sentence_punct_count
    )
    score = base * (1.0 - block.link_char_fraction)
    if block.tag_name in PARAGRAPH_LIKE:
        score += weights.paragraph_bonus
    elif block.tag_name in NAV_LIKE:
        score -= weights.nav_penalty
    return score


def _is_hidden(el: Element) -> bool:
    if "hidden" in el.attrs:
        return True
    style = (el.get("style") or "").replace(" ", "").lower()
    return "display:none" in style or "visibility:hidden" in style


def _link_text_len(el: Element) -> int:
    total = 0
    for node in el.iter():
        if node.tag == "a":
            total += len(node.text_content())
    return total


def _direct_inline_text(el: Element) -> str:
    """Text of the element's own text nodes and inline children only."""
    parts: list[str] = []
    for child in el.children:
        if isinstance(child, str):
            parts.append(child)
        elif child.tag in INLINE_TAGS and child.tag not in SKIP_TAGS:
            parts.append(child.text_content())
    return normalize_ws(" ".join(parts))


def _make_block(el: Element, text: str) -> TextBlock:
    link_len = min(_link_text_len(el), len(text))
    return TextBlock(
        text=text,
        tag_name=el.tag,
        char_count=len(text),
        comma_count=text.count(","),
        sentence_punct_count=sum(text.count(c) for c in _SENTENCE_PUNCT),
        link_char_fraction=(link_len / len(text)) if text else 0.0,
        depth=el.depth,
    )


def collect_blocks(root: Element) -> list[tuple[Element, TextBlock]]:
    """Scorable (element, block) pairs in document order.

    Block tags contribute their full subtree text; structural tags
    (div, section, body, ...) contribute only their direct inline text,
    so nested paragraphs are not double counted. Hidden subtrees and
    scripts are ignored.
    """
    blocks: list[tuple[Element, TextBlock]] = []

    def walk(el: Element) -> None:
        if el.tag in SKIP_TAGS or el.tag in HEADING_TAGS or _is_hidden(el):
            return
        if el.tag in BLOCK_TAGS:
            text = el.text_content()
            if text:
                blocks.append((el, _make_block(el, text)))
            return
        if el.tag not in INLINE_TAGS:
            text = _direct_inline_text(el)
            if text:
                blocks.append((el, _make_block(el, text)))
        for child in el.children:
            if isinstance(child, Element):
                walk(child)

    walk(root)
    return blocks


def _pick_title(root: Element) -> str:
    headings: list[str] = []
    for tag in ("h1", "h2", "h3"):
        for el in root.find_all(tag):
            if _is_hidden(el):
                continue
            text = el.text_content()
            if text:
                headings.append(text)
    if headings:
        return max(headings, key=len)
    for el in root.find_all("title"):
        text = normalize_ws(" ".join(c for c in el.children if isinstance(c, str)))
        if text:
            # Drop "| Site Name"-style suffixes by keeping the longest segment.
            segments = [normalize_ws(s) for s in text.replace(" - ", "|").split("|")]
            return max((s for s in segments if s), key=len, default=text)
    return ""


def extract_article(
    html: bytes | str, url: str, weights: ScoreWeights = ScoreWeights()
) -> ExtractionResult:
    """Title plus the paragraphs of the highest-scoring container element."""
    root = parse_html(html)
    blocks = collect_blocks(root)

    containers: dict[int, dict] = {}
    for el, block in blocks:
        if len(block.text) < weights.min_block_chars:
            continue
        parent = el.parent if el.parent is not None else el
        entry = containers.setdefault(
            id(parent), {"order": el.order, "score": 0.0, "texts": []}
        )
        entry["score"] += score_text_block(block, weights)
        entry["texts"].append(block.text)

    if not containers:
        raise ExtractionError(url)

    best = max(containers.values(), key=lambda e: (e["score"], -e["order"]))
    if best["score"] <= 0:
        raise ExtractionError(url)
    return ExtractionResult(
        title=_pick_title(root),
        paragraphs=tuple(best["texts"]),
        score=best["score"],
    )
