from __future__ import annotations

import pytest

from hardy_adams.acceptance import run_acceptance


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in run_acceptance(seed=0)}


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(results, number, capsys):
    res = results[number]
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.failures[:3]
