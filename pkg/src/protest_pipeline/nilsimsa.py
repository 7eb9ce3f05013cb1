"""Locality-sensitive 256-bit digests for paragraph-level similarity.

Implements the classic Nilsimsa construction: a 5-byte sliding window
feeds eight trigram accumulators per step through a fixed byte
permutation, and the digest sets one bit per accumulator bucket that
exceeds the mean bucket count.
"""

from __future__ import annotations

from dataclasses import dataclass

# Fixed 256-byte permutation used by every conforming implementation.
_TRAN = bytes.fromhex(
    "02d69e6ff91d04abd022161fd873a1ac"
    "3b7062961e6e8f399d05144aa6beae0e"
    "cfb99c9ac76813e12da4eb518d646b50"
    "23800341ecbb71cc7a867f98f2365eee"
    "8ece4fb832b65f59dc1b314c7bf06301"
    "6cba07e81277493cda46fe2f791c9b30"
    "e300067e2e0f383321ada554caa729fc"
    "5a47697dc595b5f40b90a3816d255535"
    "f575740a26bf195c1ac6ff995d84aa66"
    "3eaf78b32043c1ed24eae63f18f3a042"
    "57085360c3c0834082d709bd442a67a8"
    "93e0c2569fd9dd8515b48a27289276de"
    "eff8b2b7c93d45944b110d65d5348b91"
    "0cfa87e97c5bb14de5d4cb10a21789bc"
    "dbb0e2978852f748d3612c3a2bd18cfb"
    "f1cde46ae7a9fdc437c8d2f6df58724e"
)

_POPCOUNT = bytes(bin(i).count("1") for i in range(256))


def _tran3(a: int, b: int, c: int, n: int) -> int:
    return ((_TRAN[(a + n) & 255] ^ _TRAN[b] * (n + n + 1)) + _TRAN[c ^ _TRAN[n]]) & 255


@dataclass(frozen=True)
class NilsimsaDigest:
    """256-bit digest; `bits` holds the 32 digest bytes."""

    bits: bytes

    def __post_init__(self) -> None:
        if len(self.bits) != 32:
            raise ValueError("digest must be exactly 32 bytes")

    def hex(self) -> str:
        return self.bits.hex()

    @classmethod
    def from_hex(cls, text: str) -> "NilsimsaDigest":
        return cls(bytes.fromhex(text))


def nilsimsa_digest(data: bytes) -> NilsimsaDigest:
    """Digest a byte sequence with the reference Nilsimsa construction."""
    acc = [0] * 256
    w1 = w2 = w3 = w4 = -1
    count = 0
    for ch in data:
        count += 1
        if w2 > -1:
            acc[_tran3(ch, w1, w2, 0)] += 1
        if w3 > -1:
            acc[_tran3(ch, w1, w3, 1)] += 1
            acc[_tran3(ch, w2, w3, 2)] += 1
        if w4 > -1:
            acc[_tran3(ch, w1, w4, 3)] += 1
            acc[_tran3(ch, w2, w4, 4)] += 1
            acc[_tran3(ch, w3, w4, 5)] += 1
            acc[_tran3(w4, w1, ch, 6)] += 1
            acc[_tran3(w4, w3, ch, 7)] += 1
        w1, w2, w3, w4 = ch, w1, w2, w3

    if count == 3:
        total = 1
    elif count == 4:
        total = 4
    elif count > 4:
        total = 8 * count - 28
    else:
        total = 0

    threshold = total // 256
    code = bytearray(32)
    for i in range(256):
        if acc[i] > threshold:
            code[i >> 3] += 1 << (i & 7)
    return NilsimsaDigest(bytes(reversed(code)))


def nilsimsa_compare(a: NilsimsaDigest, b: NilsimsaDigest) -> int:
    """Agreeing bits minus 128; 128 for identical digests, -128 for complements."""
    differing = sum(_POPCOUNT[x ^ y] for x, y in zip(a.bits, b.bits))
    return 128 - differing
