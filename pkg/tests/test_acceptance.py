"""The twelve acceptance criteria, one test each.

Each test prints a single ``[PASS]``/``[FAIL]`` line; run with ``-s`` to see
them.  Tolerances and sample sizes are pinned in ``experiments.Config``.
"""

from __future__ import annotations

import pytest

from ruitenburg import experiments

CFG = experiments.Config()


@pytest.mark.parametrize("number", [n for n, _, _ in experiments.CRITERIA],
                         ids=[f"{n:02d}-{name.replace(' ', '_')}"
                              for n, name, _ in experiments.CRITERIA])
def test_criterion(number):
    r = experiments.run_criterion(number, CFG)
    print(r.line())
    for note in r.notes:
        print("    " + note)
    assert r.passed, r.detail
