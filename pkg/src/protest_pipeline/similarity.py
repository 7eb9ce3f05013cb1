"""Shingle/MinHash document signatures and duplicate verdicts.

A document is reduced to the set of 64-bit hashes of its w-token
shingles. Exact Jaccard similarity is set arithmetic over those hashes;
the k-position MinHash signature estimates the same quantity in O(k)
per comparison, which is what the nightly all-pairs stages use.
"""

from __future__ import annotations

import hashlib
import re
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .worddiff import word_diff

DEFAULT_SHINGLE_W = 5
DEFAULT_MINHASH_K = 256
DEFAULT_SEED = 0x5EED_C0DE

_MASK64 = (1 << 64) - 1

# Sentinel minimum for an empty shingle set; comparisons special-case it.
_EMPTY_SENTINEL = np.uint64(_MASK64)

_CACHE_MAGIC = b"PPSG"
_CACHE_VERSION = 1


class SignatureParameterMismatch(ValueError):
    """Two signatures built with different (w, k, seed) cannot be compared."""


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _position_seeds(seed: int, k: int) -> np.ndarray:
    out = np.empty(k, dtype=np.uint64)
    state = seed & _MASK64
    for i in range(k):
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        out[i] = _splitmix64(state)
    return out


def _mix64(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _hash_shingle(text: str, seed: int) -> int:
    key = struct.pack("<Q", seed & _MASK64)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8, key=key).digest()
    return struct.unpack("<Q", digest)[0]


def shingle(tokens: Sequence[str], w: int, seed: int = DEFAULT_SEED) -> set[int]:
    """Hash every contiguous w-token window; short inputs hash as one window."""
    if w < 1:
        raise ValueError(f"shingle width must be >= 1, got {w}")
    if not tokens:
        return set()
    if len(tokens) < w:
        return {_hash_shingle(" ".join(tokens), seed)}
    return {_hash_shingle(" ".join(tokens[i : i + w]), seed) for i in range(len(tokens) - w + 1)}


@dataclass(frozen=True)
class DocumentSignature:
    """Shingle-hash set plus its k-position MinHash signature."""

    shingle_hashes: frozenset[int]
    minhash: np.ndarray
    w: int
    k: int
    seed: int = DEFAULT_SEED

    @property
    def is_empty(self) -> bool:
        if self.shingle_hashes:
            return False
        return bool(np.all(self.minhash == _EMPTY_SENTINEL))

    def _check_compatible(self, other: "DocumentSignature", need_k: bool) -> None:
        if self.w != other.w or self.seed != other.seed or (need_k and self.k != other.k):
            raise SignatureParameterMismatch(
                f"signature parameters differ: (w={self.w}, k={self.k}, seed={self.seed:#x})"
                f" vs (w={other.w}, k={other.k}, seed={other.seed:#x})"
            )


def minhash_signature(shingle_hashes: Iterable[int], k: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Positionwise minima of k seeded mixes over the shingle-hash set."""
    hashes = np.fromiter((h for h in shingle_hashes), dtype=np.uint64, count=-1)
    if hashes.size == 0:
        return np.full(k, _EMPTY_SENTINEL, dtype=np.uint64)
    seeds = _position_seeds(seed, k)
    # (k, n) mix table; row-wise minima give the signature.
    mixed = _mix64(hashes[np.newaxis, :] ^ seeds[:, np.newaxis])
    return mixed.min(axis=1)


def sign_tokens(
    tokens: Sequence[str],
    w: int = DEFAULT_SHINGLE_W,
    k: int = DEFAULT_MINHASH_K,
    seed: int = DEFAULT_SEED,
) -> DocumentSignature:
    hashes = shingle(tokens, w, seed)
    return DocumentSignature(
        shingle_hashes=frozenset(hashes),
        minhash=minhash_signature(hashes, k, seed),
        w=w,
        k=k,
        seed=seed,
    )


def jaccard_exact(a: DocumentSignature, b: DocumentSignature) -> float:
    """|intersection| / |union| over shingle sets; 1.0 when both are empty."""
    a._check_compatible(b, need_k=False)
    if not a.shingle_hashes and not b.shingle_hashes:
        return 1.0
    union = a.shingle_hashes | b.shingle_hashes
    if not union:
        return 1.0
    return len(a.shingle_hashes & b.shingle_hashes) / len(union)


def jaccard_estimate(a: DocumentSignature, b: DocumentSignature) -> float:
    """Fraction of agreeing MinHash positions; empty sets short-circuit."""
    a._check_compatible(b, need_k=True)
    a_empty, b_empty = a.is_empty, b.is_empty
    if a_empty and b_empty:
        return 1.0
    if a_empty or b_empty:
        return 0.0
    return float(np.count_nonzero(a.minhash == b.minhash)) / a.k


@dataclass(frozen=True)
class DuplicateVerdict:
    """Document-level association decision for a candidate/reviewed pair."""

    jaccard: float
    change_ratio: float
    associate: bool


def decide_association(
    jaccard: float,
    change_ratio: float,
    j_min: float = 0.8,
    r_max: float = 0.1,
) -> DuplicateVerdict:
    return DuplicateVerdict(
        jaccard=jaccard,
        change_ratio=change_ratio,
        associate=jaccard >= j_min and change_ratio <= r_max,
    )


_WORD_RE = re.compile(r"[a-z0-9]+")

NILSIMSA_HINT_THRESHOLD = 54


def body_tokens(paragraphs: Iterable[str]) -> list[str]:
    """Lowercase word tokens of an article body, for signatures and diffs."""
    return [t for p in paragraphs for t in _WORD_RE.findall(p.lower())]


def paragraph_hints(
    paragraphs_a: Sequence[str],
    paragraphs_b: Sequence[str],
    threshold: int = NILSIMSA_HINT_THRESHOLD,
) -> list[tuple[int, int, int]]:
    """Paragraph pairs whose Nilsimsa digests agree above the threshold.

    Advisory only: hints point reviewers at likely-shared paragraphs but
    never drive auto-association, which stays a document-level decision.
    Returns (index_a, index_b, score) triples sorted by score descending.
    """
    from .nilsimsa import nilsimsa_compare, nilsimsa_digest

    digests_a = [nilsimsa_digest(p.encode("utf-8")) for p in paragraphs_a]
    digests_b = [nilsimsa_digest(p.encode("utf-8")) for p in paragraphs_b]
    hints = []
    for i, da in enumerate(digests_a):
        for j, db in enumerate(digests_b):
            score = nilsimsa_compare(da, db)
            if score >= threshold:
                hints.append((i, j, score))
    hints.sort(key=lambda h: (-h[2], h[0], h[1]))
    return hints


def propose_auto_association(
    new_article,
    reviewed,
    w: int = DEFAULT_SHINGLE_W,
    k: int = DEFAULT_MINHASH_K,
    seed: int = DEFAULT_SEED,
    j_min: float = 0.8,
    r_max: float = 0.1,
) -> DuplicateVerdict:
    """Decide whether a new article should inherit a reviewed article's events.

    Articles are anything with `.status` and `.body` (paragraph texts).
    The verdict combines the MinHash Jaccard estimate with the word-diff
    change ratio; the caller copies event links when `associate` is set.
    """
    if reviewed.status != "reviewed":
        raise ValueError(f"association source must be reviewed, got {reviewed.status!r}")
    tokens_new = body_tokens(new_article.body)
    tokens_reviewed = body_tokens(reviewed.body)
    estimate = jaccard_estimate(sign_tokens(tokens_new, w, k, seed), sign_tokens(tokens_reviewed, w, k, seed))
    ratio = word_diff(tokens_reviewed, tokens_new).change_ratio
    return decide_association(estimate, ratio, j_min=j_min, r_max=r_max)


@dataclass
class SignatureCache:
    """In-memory view of persisted signatures, keyed by article id."""

    w: int
    k: int
    seed: int
    minhashes: dict[str, np.ndarray] = field(default_factory=dict)

    def signature_for(self, article_id: str) -> DocumentSignature | None:
        mh = self.minhashes.get(article_id)
        if mh is None:
            return None
        return DocumentSignature(
            shingle_hashes=frozenset(), minhash=mh, w=self.w, k=self.k, seed=self.seed
        )


def save_signature_cache(path, cache: SignatureCache) -> None:
    """Binary cache: magic, version byte, params, then per-article records."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(bytes([_CACHE_VERSION]))
        fh.write(struct.pack("<IIQ", cache.w, cache.k, cache.seed & _MASK64))
        fh.write(struct.pack("<I", len(cache.minhashes)))
        for article_id in sorted(cache.minhashes):
            raw_id = article_id.encode("utf-8")
            fh.write(struct.pack("<H", len(raw_id)))
            fh.write(raw_id)
            fh.write(cache.minhashes[article_id].astype("<u8").tobytes())


def load_signature_cache(path) -> SignatureCache:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CACHE_MAGIC:
            raise ValueError(f"not a signature cache file: bad magic {magic!r}")
        version = fh.read(1)[0]
        if version != _CACHE_VERSION:
            raise ValueError(f"unsupported signature cache version {version}")
        w, k, seed = struct.unpack("<IIQ", fh.read(16))
        (count,) = struct.unpack("<I", fh.read(4))
        cache = SignatureCache(w=w, k=k, seed=seed)
        for _ in range(count):
            (id_len,) = struct.unpack("<H", fh.read(2))
            article_id = fh.read(id_len).decode("utf-8")
            mh = np.frombuffer(fh.read(8 * k), dtype="<u8").astype(np.uint64)
            cache.minhashes[article_id] = mh
        return cache
