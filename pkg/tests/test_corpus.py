from __future__ import annotations

import numpy as np
import pytest

from hardy_adams.corpus import admissible_corpus, function_corpus, is_admissible, profile_corpus
from hardy_adams.parallel import pmap
from hardy_adams.radial import hardy_gradient_norm


@pytest.mark.parametrize("N", [2, 3, 5])
def test_admissible_corpus_is_admissible(N):
    for f in admissible_corpus(N, 30, seed=7):
        ok, why = is_admissible(f)
        assert ok, why
        assert 0.3 - 1e-12 <= hardy_gradient_norm(f) <= 1.0 + 1e-12


def test_corpora_are_seeded():
    a = function_corpus(2, 5, seed=3)
    b = function_corpus(2, 5, seed=3)
    c = function_corpus(2, 5, seed=4)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
    assert not all(np.array_equal(x.values, y.values) for x, y in zip(a, c))
    rng = np.random.default_rng(0)
    assert len(function_corpus(2, 4, rng)) == 4


def test_profile_corpus_nonzero():
    for p in profile_corpus(40, seed=1):
        assert p.breakpoints[0] == 0.0 and np.any(p.values)


def test_pmap_preserves_order():
    items = list(range(50))
    assert pmap(lambda x: x * x, items, threads=8) == [x * x for x in items]
    assert pmap(str, [], threads=4) == []


def test_threaded_norms_match_serial():
    fs = function_corpus(2, 12, seed=5)
    assert pmap(hardy_gradient_norm, fs, 4) == [hardy_gradient_norm(f) for f in fs]
