#!/usr/bin/env python3
"""
Tests for the acceptance suite runner
"""

import os
import sys

import pytest

# Add the parent directory to the path so we can import our module
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from library.config import load_config
from library.errors import ResourceLimitError
from library.suite import SuiteOptions, SuiteRunner, run_suite

SECTION_KEYS = {"total_checks", "passed_checks", "failed_checks", "status", "details"}


@pytest.fixture
def config():
    return load_config(environ={})


@pytest.fixture
def tiny():
    return SuiteOptions(intervals_max_n=4, stabilizer_max_n=4, escape_radius=1, graded_window=2,
                        coordinate_window=2, measure_window=2, split_window=2, kesten_max_radius=2,
                        displacement_max_radius=2, minimax_max_radius=1, minimax_restarts=2,
                        axiom_trials=5, axiom_dim=8)


class TestSuiteRunner:
    """Sections, summary and error isolation"""

    def test_sections(self, config, tiny):
        runner = SuiteRunner(config, tiny)
        for name in ("intervals", "cairns", "decomposition", "spectral"):
            section = getattr(runner, name)()
            assert set(section) == SECTION_KEYS
            assert section["status"] == "passed", section["details"]
            assert section["passed_checks"] == section["total_checks"]

    def test_spectral_details(self, config, tiny):
        details = SuiteRunner(config, tiny).spectral()["details"]
        assert [row["radius"] for row in details["kesten"]] == [1, 2]
        assert len(details["displacement"]) == 3
        assert details["kesten_problems"] == []

    def test_errors_are_isolated(self, config, tiny):
        runner = SuiteRunner(config, tiny)

        def broken():
            raise ResourceLimitError("interval rank", 99, 14)

        runner._run_section("broken", broken)
        assert runner.results["broken"]["status"] == "failed"
        assert runner.results["broken"]["details"]["error"] == "ResourceLimitError"
        assert runner.generate_summary()["failed_sections"] == ["broken"]

    def test_quick_preset_is_smaller(self):
        quick, full = SuiteOptions.quick(), SuiteOptions()
        assert quick.axiom_trials < full.axiom_trials
        assert quick.kesten_max_radius < full.kesten_max_radius


class TestRunSuite:
    """The payload written by the suite command"""

    def test_payload(self, config, tiny):
        results = run_suite(config, tiny)
        assert set(results) == {"sections", "options", "summary"}
        assert list(results["sections"]) == ["intervals", "cairns", "decomposition", "spectral", "axioms"]
        assert results["options"]["graded_window"] == 2
        assert results["summary"]["failed_sections"] == []

    @pytest.mark.slow
    def test_acceptance_scale(self, config):
        assert run_suite(config)["summary"]["failed_sections"] == []
