#!/usr/bin/env python3
"""Generate the frozen digest vector file used by the conformance tests.

Run once, before touching the digest code; the output is checked in and
any later change to the implementation must still reproduce it exactly.

Usage: python scripts/gen_nilsimsa_vectors.py > tests/data/nilsimsa_vectors.txt
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from protest_pipeline.nilsimsa import nilsimsa_digest

WORDS = (
    "protest rally march demonstration downtown police crowd chanting "
    "signs organizers counter streets capitol teachers students union "
    "gathered hundreds dozens peaceful arrested mayor governor statement"
).split()


def main() -> None:
    rng = random.Random(20210131)
    inputs: list[bytes] = [
        b"",
        b"a",
        b"ab",
        b"abc",
        b"abcd",
        b"abcde",
        b"abcdefgh",
        b"abcdefghijk",
        b"The quick brown fox jumps over the lazy dog",
        bytes(range(256)),
        b"\x00" * 64,
        "protesters marched through downtown—again".encode("utf-8"),
    ]
    for _ in range(20):
        n_words = rng.randint(30, 120)
        text = " ".join(rng.choice(WORDS) for _ in range(n_words))
        inputs.append(text.encode("utf-8"))
    for line in (f"{data.hex()}\t{nilsimsa_digest(data).hex()}" for data in inputs):
        print(line)


if __name__ == "__main__":
    main()
