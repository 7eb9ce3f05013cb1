from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from protest_pipeline.text_features import (
    COUNT_CLASSES,
    count_to_class,
    featurize,
    tokenize,
)


class TestCountToClass:
    @pytest.mark.parametrize(
        "n,expected",
        [(0, "C0"), (1, "C1"), (2, "C2"), (3, "C3plus"), (7, "C3plus"), (100, "C3plus")],
    )
    def test_mapping(self, n, expected):
        assert count_to_class(n) == expected

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            count_to_class(-1)

    @given(st.integers(min_value=0, max_value=10_000))
    def test_total_monotone_surjective(self, n):
        cls = count_to_class(n)
        assert cls in COUNT_CLASSES
        assert COUNT_CLASSES.index(count_to_class(n + 1)) >= COUNT_CLASSES.index(cls)


class TestTokenize:
    def test_counter_compound_splits(self):
        assert tokenize("Counterprotesters marched") == ["counter", "protesters", "marched"]

    def test_hyphenated_counter_word(self):
        assert tokenize("counter-demonstration") == ["counter", "demonstration"]

    def test_short_remainder_stays_joined(self):
        assert tokenize("counters counted") == ["counters", "counted"]

    def test_empty_text(self):
        assert tokenize("") == []

    def test_lowercase_and_punctuation(self):
        assert tokenize("Dow rallies 100 points.") == ["dow", "rallies", "100", "points"]

    @given(st.text(max_size=200))
    def test_no_empty_tokens(self, text):
        assert all(tok for tok in tokenize(text))


class TestFeaturize:
    def test_deterministic(self):
        a = featurize(tokenize("teachers rally at the capitol"), 1024)
        b = featurize(tokenize("teachers rally at the capitol"), 1024)
        assert np.array_equal(a.indices, b.indices)
        assert np.array_equal(a.values, b.values)

    def test_empty_gives_zero_vector(self):
        x = featurize([], 1024)
        assert x.indices.size == 0
        assert np.all(x.to_dense() == 0.0)

    def test_unit_norm(self):
        x = featurize(tokenize("hundreds rallied downtown on saturday"), 2048)
        assert np.linalg.norm(x.values) == pytest.approx(1.0, abs=1e-9)

    def test_dim_must_be_power_of_two(self):
        with pytest.raises(ValueError):
            featurize(["a"], 1000)

    def test_indices_below_dim(self):
        x = featurize(tokenize("a b c d e f g h i j k l"), 64)
        assert np.all(x.indices < 64)

    def test_bigrams_distinguish_order(self):
        a = featurize(["gun", "control"], 4096)
        b = featurize(["control", "gun"], 4096)
        assert not np.array_equal(a.indices, b.indices)
