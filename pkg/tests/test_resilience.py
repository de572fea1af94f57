#!/usr/bin/env python3
"""
Tests for the sweep budget and the solver retry decorator
"""

import os
import sys

import pytest

# Add the parent directory to the path so we can import our module
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from library.errors import ConvergenceError
from library.resilience import SweepBudget, retry_with_reseed


class TestSweepBudget:
    """Counterexample budget for exhaustive sweeps"""

    def test_all_pass(self):
        budget = SweepBudget("clean", max_consecutive_failures=3)
        assert all(budget.check(lambda: None) for _ in range(10))
        assert budget.passed
        assert budget.summary() == {"instances": 10, "failures": [], "truncated": False}

    def test_failures_are_recorded(self):
        budget = SweepBudget("some", max_consecutive_failures=5)
        assert not budget.check(lambda: {"witness": 1})
        assert budget.check(lambda: None)
        assert not budget.passed
        assert budget.summary()["failures"] == [{"witness": 1}]

    def test_truncates_after_consecutive_failures(self):
        budget = SweepBudget("broken", max_consecutive_failures=3)
        for i in range(10):
            budget.check(lambda i=i: {"instance": i})
        summary = budget.summary()
        assert summary["truncated"] is True
        assert len(summary["failures"]) == 3
        assert summary["instances"] < 10

    def test_arguments_forwarded(self):
        budget = SweepBudget("args")
        seen = []
        budget.check(lambda x, y=0: seen.append((x, y)), 1, y=2)
        assert seen == [(1, 2)]


class TestRetryWithReseed:
    """Reseeded retries of a solver that raised ConvergenceError"""

    def test_retries_with_new_seed_and_budget(self):
        calls = []

        @retry_with_reseed(max_tries=3)
        def solver(x, seed=0, max_iter=10):
            calls.append((seed, max_iter))
            if len(calls) < 3:
                raise ConvergenceError("not yet", 1.0)
            return x

        assert solver(5) == 5
        assert calls == [(0, 10), (1, 20), (2, 40)]

    def test_gives_up(self):
        @retry_with_reseed(max_tries=2)
        def solver(seed=0, max_iter=10):
            raise ConvergenceError("never", 0.5)

        with pytest.raises(ConvergenceError) as excinfo:
            solver()
        assert excinfo.value.residual == 0.5

    def test_other_errors_pass_through(self):
        calls = []

        @retry_with_reseed()
        def solver(seed=0, max_iter=10):
            calls.append(seed)
            raise ValueError("bad input")

        with pytest.raises(ValueError):
            solver()
        assert calls == [0]
