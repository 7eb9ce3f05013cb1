"""Polite crawling of configured news sources for stem-word article links.

A nightly crawl fetches each source page, follows anchors whose text or
URL path carries a protest stem word, and never hits the same host
faster than the per-host delay. file:// URLs behave exactly like
http(s) apart from the transport, which keeps fixture crawls honest.
"""

from __future__ import annotations

import hashlib
import re
import threading
import time
import urllib.error
import urllib.request
import urllib.robotparser
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urldefrag, urljoin, urlsplit, urlunsplit

from .htmldom import parse_html

DEFAULT_USER_AGENT = "protest-pipeline/0.1 (research crawler)"

STEM_WORDS = ("march", "demonstration", "rally", "protest")

# Token prefixes that count as a hit for each stem; deliberately broad,
# downstream domain detection weeds out the false candidates.
_STEM_PREFIXES = {
    "march": ("march",),
    "demonstration": ("demonstr",),
    "rally": ("rally", "ralli"),
    "protest": ("protest",),
}

_TOKEN_RE = re.compile(r"[a-z]+")


class CrawlerError(Exception):
    pass


@dataclass(frozen=True)
class NewsSource:
    id: str
    url: str
    label: str = ""
    respect_robots: bool | None = None  # None defers to the policy

    def __post_init__(self) -> None:
        scheme = urlsplit(self.url).scheme
        if scheme not in ("http", "https", "file"):
            raise CrawlerError(f"source URL must be http(s) or file, got {self.url!r}")


@dataclass(frozen=True)
class FetchPolicy:
    per_host_delay: float = 2.0
    timeout: float = 20.0
    max_pages_per_source: int = 50
    max_parallel_hosts: int = 8
    user_agent: str = DEFAULT_USER_AGENT
    respect_robots: bool = True
    retry: bool = True

    def __post_init__(self) -> None:
        if self.per_host_delay <= 0 or self.timeout <= 0:
            raise CrawlerError("delays and timeouts must be positive")
        if self.max_pages_per_source < 1 or self.max_parallel_hosts < 1:
            raise CrawlerError("page and host counts must be >= 1")


@dataclass(frozen=True)
class CandidateLink:
    url: str
    anchor_text: str
    matched_stem: str


@dataclass(frozen=True)
class FetchResult:
    url: str
    status: int
    body: bytes | None
    error: str | None
    fetched_at: float


@dataclass
class CrawlItem:
    link: CandidateLink
    result: FetchResult | None
    cached: bool = False


@dataclass
class CrawlResult:
    source: NewsSource
    source_error: str | None
    items: list[CrawlItem] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


def source_id_for_url(url: str) -> str:
    return "src-" + hashlib.blake2b(url.encode("utf-8"), digest_size=5).hexdigest()


def parse_source_list(path) -> list[NewsSource]:
    """One source per line: url<TAB>label; # starts a comment."""
    sources = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        url, _, label = line.partition("\t")
        url = url.strip()
        sources.append(NewsSource(id=source_id_for_url(url), url=url, label=label.strip()))
    return sources


def stem_match(text: str) -> str | None:
    """First stem word (by token order) whose prefix begins a token."""
    for token in _TOKEN_RE.findall(text.lower()):
        for stem in STEM_WORDS:
            if token.startswith(_STEM_PREFIXES[stem]):
                return stem
    return None


def normalize_url(url: str) -> str:
    """Strip the fragment and lowercase the host."""
    url, _ = urldefrag(url)
    parts = urlsplit(url)
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), parts.path, parts.query, ""))


def discover_links(page: bytes | str, base: str) -> list[CandidateLink]:
    """Stem-matching anchors resolved against base, deduplicated, in order."""
    root = parse_html(page)
    seen: set[str] = set()
    out: list[CandidateLink] = []
    for anchor in root.find_all("a"):
        href = anchor.get("href")
        if not href:
            continue
        resolved = normalize_url(urljoin(base, href.strip()))
        if not urlsplit(resolved).scheme in ("http", "https", "file"):
            continue
        if resolved in seen:
            continue
        anchor_text = anchor.text_content()
        stem = stem_match(anchor_text)
        if stem is None:
            stem = stem_match(urlsplit(resolved).path.replace("/", " ").replace("-", " "))
        if stem is None:
            continue
        seen.add(resolved)
        out.append(CandidateLink(url=resolved, anchor_text=anchor_text, matched_stem=stem))
    return out


class SystemClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class VirtualClock:
    """Deterministic clock for tests; sleeping advances time instantly."""

    def __init__(self, start: float = 0.0):
        self._now = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def sleep(self, seconds: float) -> None:
        with self._lock:
            if seconds > 0:
                self._now += seconds


class Fetcher:
    """Transport with per-host politeness, robots.txt, and one retry."""

    def __init__(self, policy: FetchPolicy, clock=None):
        self.policy = policy
        self.clock = clock if clock is not None else SystemClock()
        self._host_locks: dict[str, threading.Lock] = {}
        self._next_allowed: dict[str, float] = {}
        self._robots: dict[str, urllib.robotparser.RobotFileParser | None] = {}
        self._registry_lock = threading.Lock()

    def _host_lock(self, host: str) -> threading.Lock:
        with self._registry_lock:
            return self._host_locks.setdefault(host, threading.Lock())

    def _respect_delay(self, host: str) -> None:
        wait = self._next_allowed.get(host, 0.0) - self.clock.now()
        if wait > 0:
            self.clock.sleep(wait)

    def _mark_fetch(self, host: str) -> None:
        self._next_allowed[host] = self.clock.now() + self.policy.per_host_delay

    def _transport(self, url: str, timeout: float) -> tuple[int, bytes]:
        parts = urlsplit(url)
        if parts.scheme == "file":
            path = Path(urllib.request.url2pathname(parts.path))
            if path.is_dir():
                path = path / "index.html"
            if not path.exists():
                return 404, b""
            return 200, path.read_bytes()
        request = urllib.request.Request(url, headers={"User-Agent": self.policy.user_agent})
        try:
            with urllib.request.urlopen(request, timeout=timeout) as response:
                return response.status or 200, response.read()
        except urllib.error.HTTPError as exc:
            return exc.code, exc.read() if exc.fp else b""

    def allowed_by_robots(self, url: str, override: bool | None = None) -> bool:
        respect = self.policy.respect_robots if override is None else override
        parts = urlsplit(url)
        if not respect or parts.scheme == "file":
            return True
        host_key = f"{parts.scheme}://{parts.netloc}"
        if host_key not in self._robots:
            parser = urllib.robotparser.RobotFileParser()
            try:
                status, body = self._transport(host_key + "/robots.txt", self.policy.timeout)
                if status == 200:
                    parser.parse(body.decode("utf-8", errors="replace").splitlines())
                else:
                    parser = None
            except Exception:
                parser = None
            self._robots[host_key] = parser
        parser = self._robots[host_key]
        return True if parser is None else parser.can_fetch(self.policy.user_agent, url)

    def fetch(self, url: str, respect_robots: bool | None = None) -> FetchResult:
        """Fetch one URL, honoring per-host delay; failures return, never raise."""
        host = urlsplit(url).netloc or "file"
        if not self.allowed_by_robots(url, respect_robots):
            return FetchResult(
                url=url, status=0, body=None, error="blocked by robots.txt",
                fetched_at=self.clock.now(),
            )
        with self._host_lock(host):
            self._respect_delay(host)
            started = self.clock.now()
            self._mark_fetch(host)
            try:
                status, body = self._transport(url, self.policy.timeout)
                return FetchResult(url=url, status=status, body=body, error=None, fetched_at=started)
            except Exception as exc:
                if self.policy.retry:
                    self._respect_delay(host)
                    started = self.clock.now()
                    self._mark_fetch(host)
                    try:
                        status, body = self._transport(url, self.policy.timeout * 2)
                        return FetchResult(
                            url=url, status=status, body=body, error=None, fetched_at=started
                        )
                    except Exception as retry_exc:
                        exc = retry_exc
                return FetchResult(
                    url=url, status=0, body=None, error=str(exc), fetched_at=started
                )


def crawl_source(
    source: NewsSource,
    policy: FetchPolicy,
    fetcher: Fetcher | None = None,
    known_urls: set[str] | None = None,
) -> CrawlResult:
    """Fetch a source page and its stem-matching candidate links.

    Candidates already in known_urls are reported as cached without a
    fetch; at most max_pages_per_source candidate pages are fetched.
    Per-URL failures are recorded in their items and never abort the
    source.
    """
    fetcher = fetcher or Fetcher(policy)
    known_urls = known_urls or set()
    result = CrawlResult(source=source, source_error=None)

    index = fetcher.fetch(source.url, source.respect_robots)
    if index.error is not None or index.status != 200 or index.body is None:
        result.source_error = index.error or f"HTTP {index.status} on source page"
        return result

    links = discover_links(index.body, source.url)
    fetched = 0
    for link in links:
        if link.url in known_urls:
            result.items.append(CrawlItem(link=link, result=None, cached=True))
            continue
        if fetched >= policy.max_pages_per_source:
            result.diagnostics.append(
                f"page cap {policy.max_pages_per_source} reached; skipping {link.url}"
            )
            continue
        fetched += 1
        result.items.append(
            CrawlItem(link=link, result=fetcher.fetch(link.url, source.respect_robots))
        )
    return result
