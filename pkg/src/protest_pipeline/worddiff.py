"""Word-level diffs over token sequences.

Longest-common-subsequence edit scripts: the ops are maximal runs of
equal / insert / delete tokens, and replaying the script against the
first sequence reproduces the second exactly. The DP table is filled
row-by-row with numpy; common prefixes and suffixes are trimmed first
so near-duplicate articles stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

EQUAL = "equal"
INSERT = "insert"
DELETE = "delete"


@dataclass(frozen=True)
class DiffOp:
    op: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class WordDiff:
    ops: tuple[DiffOp, ...]
    change_ratio: float

    def inserted_count(self) -> int:
        return sum(len(o.tokens) for o in self.ops if o.op == INSERT)

    def deleted_count(self) -> int:
        return sum(len(o.tokens) for o in self.ops if o.op == DELETE)


def _lcs_table(a: Sequence[str], b: Sequence[str]) -> np.ndarray:
    """LCS length table via the running-max row recurrence."""
    n, m = len(a), len(b)
    table = np.zeros((n + 1, m + 1), dtype=np.int32)
    if n == 0 or m == 0:
        return table
    b_arr = np.array(b, dtype=object)
    for i in range(1, n + 1):
        prev = table[i - 1]
        eq = b_arr == a[i - 1]
        # L[i][j] = max(L[i-1][j], running max of L[i-1][j-1]+eq); the
        # horizontal move costs nothing, so a cumulative max suffices.
        candidates = np.maximum(prev[1:], np.where(eq, prev[:-1] + 1, 0))
        table[i, 1:] = np.maximum.accumulate(candidates)
    return table


def _raw_ops(a: Sequence[str], b: Sequence[str]) -> Iterator[tuple[str, str]]:
    """Per-token ops from a backtrack through the LCS table."""
    table = _lcs_table(a, b)
    i, j = len(a), len(b)
    out: list[tuple[str, str]] = []
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1] and table[i, j] == table[i - 1, j - 1] + 1:
            out.append((EQUAL, a[i - 1]))
            i -= 1
            j -= 1
        elif table[i, j - 1] >= table[i - 1, j]:
            # Prefer inserts while walking backwards so deletes precede
            # inserts in the forward script.
            out.append((INSERT, b[j - 1]))
            j -= 1
        else:
            out.append((DELETE, a[i - 1]))
            i -= 1
    while i > 0:
        out.append((DELETE, a[i - 1]))
        i -= 1
    while j > 0:
        out.append((INSERT, b[j - 1]))
        j -= 1
    return reversed(out)


def word_diff(a: Sequence[str], b: Sequence[str]) -> WordDiff:
    """Minimal LCS edit script from token sequence a to b."""
    a = list(a)
    b = list(b)

    prefix = 0
    limit = min(len(a), len(b))
    while prefix < limit and a[prefix] == b[prefix]:
        prefix += 1
    suffix = 0
    while suffix < limit - prefix and a[-1 - suffix] == b[-1 - suffix]:
        suffix += 1

    core = _raw_ops(a[prefix : len(a) - suffix], b[prefix : len(b) - suffix])

    per_token: list[tuple[str, str]] = [(EQUAL, t) for t in a[:prefix]]
    per_token.extend(core)
    if suffix:
        per_token.extend((EQUAL, t) for t in a[len(a) - suffix :])

    ops: list[DiffOp] = []
    for kind, token in per_token:
        if ops and ops[-1].op == kind:
            ops[-1] = DiffOp(kind, ops[-1].tokens + (token,))
        else:
            ops.append(DiffOp(kind, (token,)))

    changed = sum(len(o.tokens) for o in ops if o.op != EQUAL)
    denom = max(len(a), len(b))
    ratio = changed / denom if denom else 0.0
    return WordDiff(ops=tuple(ops), change_ratio=ratio)


def apply_diff(diff: WordDiff, a: Sequence[str]) -> list[str]:
    """Replay the edit script against a; the result must equal b."""
    out: list[str] = []
    pos = 0
    for op in diff.ops:
        if op.op == EQUAL:
            segment = tuple(a[pos : pos + len(op.tokens)])
            if segment != op.tokens:
                raise ValueError(f"equal run mismatch at token {pos}")
            out.extend(segment)
            pos += len(op.tokens)
        elif op.op == DELETE:
            segment = tuple(a[pos : pos + len(op.tokens)])
            if segment != op.tokens:
                raise ValueError(f"delete run mismatch at token {pos}")
            pos += len(op.tokens)
        else:
            out.extend(op.tokens)
    if pos != len(a):
        raise ValueError(f"edit script consumed {pos} of {len(a)} tokens")
    return out
