"""Tokenization and hashed n-gram features for the suggestion models."""

from __future__ import annotations

import hashlib
import re
import struct
from dataclasses import dataclass

import numpy as np

DEFAULT_HASH_DIM = 2**18

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_FEATURE_KEY = b"pp-feat-v1"

COUNT_CLASSES = ("C0", "C1", "C2", "C3plus")


def count_to_class(n: int) -> str:
    """Map an event count onto the four counting classes {0, 1, 2, 3+}."""
    if n < 0:
        raise ValueError(f"event count must be nonnegative, got {n}")
    return COUNT_CLASSES[min(n, 3)]


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on whitespace and punctuation.

    Compound words starting with "counter" split into "counter" plus the
    remainder whenever the remainder would itself be a token of length
    >= 4, so counterprotest-style compounds share features with their
    base words.
    """
    tokens: list[str] = []
    for token in _TOKEN_RE.findall(text.lower()):
        remainder = token[7:]
        if token.startswith("counter") and len(remainder) >= 4:
            tokens.append("counter")
            tokens.append(remainder)
        else:
            tokens.append(token)
    return tokens


def _feature_index(text: str, dim: int) -> int:
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8, key=_FEATURE_KEY).digest()
    return struct.unpack("<Q", digest)[0] & (dim - 1)


@dataclass(frozen=True)
class FeatureVector:
    """Sparse L2-normalized vector of hashed unigram/bigram counts."""

    dim: int
    indices: np.ndarray
    values: np.ndarray

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim, dtype=np.float64)
        dense[self.indices] = self.values
        return dense


def featurize(tokens: list[str], dim: int = DEFAULT_HASH_DIM) -> FeatureVector:
    """Hash unigrams and adjacent bigrams modulo dim, then L2-normalize."""
    if dim <= 0 or dim & (dim - 1):
        raise ValueError(f"hash dimension must be a power of two, got {dim}")
    counts: dict[int, float] = {}
    for tok in tokens:
        idx = _feature_index(tok, dim)
        counts[idx] = counts.get(idx, 0.0) + 1.0
    for first, second in zip(tokens, tokens[1:]):
        idx = _feature_index(f"{first} {second}", dim)
        counts[idx] = counts.get(idx, 0.0) + 1.0
    if not counts:
        return FeatureVector(dim=dim, indices=np.empty(0, dtype=np.int64), values=np.empty(0))
    indices = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    values /= np.linalg.norm(values)
    return FeatureVector(dim=dim, indices=indices, values=values)
