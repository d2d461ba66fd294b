"""Shared fixtures.

The reduction and the commutation solves are deterministic and moderately
expensive, so each (s, order) combination is computed once per session and
shared across test modules.
"""

import pytest

from asymint.compatibility import build_problem, solve_compatibility
from asymint.field import ModelParams
from asymint.reduction import run_reduction

_ENGINE = {}
_COMMUTATION = {}


@pytest.fixture(scope="session")
def engine():
    def get(s, order=9):
        key = (s, order)
        if key not in _ENGINE:
            _ENGINE[key] = run_reduction(ModelParams(s=s), order=order)
        return _ENGINE[key]

    return get


@pytest.fixture(scope="session")
def commutation(engine):
    def get(s, order):
        key = (s, order)
        if key not in _COMMUTATION:
            _COMMUTATION[key] = solve_compatibility(
                build_problem(engine(s, order), order)
            )
        return _COMMUTATION[key]

    return get
