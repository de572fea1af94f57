#!/usr/bin/env python3
"""
Cairn-Check Resilience Helpers
A pybreaker-backed counterexample budget for exhaustive sweeps and a retry
decorator for iterative solvers.
"""

import functools
import inspect
from typing import Any, Callable, Dict, List, Optional

import pybreaker
import structlog

from library.errors import CheckFailed, ConvergenceError, ResourceLimitError

logger = structlog.get_logger(__name__)

DEFAULT_MAX_CONSECUTIVE_FAILURES = 25


class _BudgetListener(pybreaker.CircuitBreakerListener):
    """Logs when a sweep runs out of counterexample budget"""

    def state_change(self, cb, old_state, new_state):
        if new_state.name == pybreaker.STATE_OPEN:
            logger.warning("Counterexample budget exhausted, truncating sweep",
                           sweep=cb.name, failures=cb.fail_max)


class SweepBudget:
    """
    Runs the instance checks of one sweep through a circuit breaker.

    A check is a callable returning None on success or a counterexample dict.
    After ``max_consecutive_failures`` counterexamples in a row the breaker
    opens, further checks are skipped and the sweep is marked truncated.
    """

    def __init__(self, name: str,
                 max_consecutive_failures: int = DEFAULT_MAX_CONSECUTIVE_FAILURES):
        self.name = name
        self.breaker = pybreaker.CircuitBreaker(
            fail_max=max_consecutive_failures,
            reset_timeout=24 * 3600,
            exclude=[ResourceLimitError],
            listeners=[_BudgetListener()],
            name=name,
        )
        self.instances = 0
        self.failures: List[Dict[str, Any]] = []
        self.truncated = False

    def check(self, fn: Callable[..., Optional[Dict[str, Any]]], *args, **kwargs) -> bool:
        """Run one instance check; returns True when it passed"""
        if self.truncated:
            return False

        def evaluate():
            counterexample = fn(*args, **kwargs)
            if counterexample is not None:
                self.failures.append(counterexample)
                raise CheckFailed(counterexample)

        self.instances += 1
        try:
            self.breaker.call(evaluate)
            return True
        except CheckFailed:
            return False
        except pybreaker.CircuitBreakerError:
            self.truncated = True
            return False

    @property
    def passed(self) -> bool:
        return not self.failures and not self.truncated

    def summary(self) -> Dict[str, Any]:
        return {
            "instances": self.instances,
            "failures": list(self.failures),
            "truncated": self.truncated,
        }


def retry_with_reseed(max_tries: int = 3, growth: int = 2):
    """
    Retry an iterative solver that raised ConvergenceError.

    The wrapped function must accept ``seed`` and ``max_iter`` keyword
    parameters; each retry bumps the seed and multiplies the iteration budget.
    """
    def decorator(func):
        signature = inspect.signature(func)

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            bound = signature.bind(*args, **kwargs)
            bound.apply_defaults()
            attempts = 0
            while True:
                try:
                    return func(*bound.args, **bound.kwargs)
                except ConvergenceError as e:
                    attempts += 1
                    if attempts >= max_tries:
                        raise
                    logger.warning("Solver did not converge, retrying",
                                   function=func.__name__, attempt=attempts,
                                   residual=e.residual, seed=bound.arguments["seed"])
                    bound.arguments["seed"] += 1
                    bound.arguments["max_iter"] *= growth
        return wrapper
    return decorator
