#!/usr/bin/env python3
"""
Test file for the report_generator module
"""

import os
import sys
import json
import logging
import tempfile
import pytest

# Add the parent directory to the path so we can import our module
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from scripts.report_generator import setup_logging, section_table, ReportGenerator


class TestReportGenerator:
    """Tests for the ReportGenerator class"""

    @pytest.fixture
    def sample_results(self):
        """Fixture providing suite results in the shape the suite command writes"""
        return {
            "sections": {
                "intervals": {
                    "total_checks": 40,
                    "passed_checks": 40,
                    "failed_checks": 0,
                    "status": "passed",
                    "details": {"statements": {"basic_intersection": 7}}
                },
                "spectral": {
                    "total_checks": 3,
                    "passed_checks": 2,
                    "failed_checks": 1,
                    "status": "failed",
                    "details": {
                        "kesten": [
                            {"radius": 1, "dimension": 5, "lambda_max": 2.0, "gap": 1.4641016151},
                            {"radius": 2, "dimension": 17, "lambda_max": 2.6457513111, "gap": 0.8183},
                        ],
                        "kesten_problems": [{"radius": 2, "reason": "<not increasing>"}]
                    }
                }
            },
            "options": {"kesten_max_radius": 2, "graded_window": 3},
            "summary": {"total_checks": 43, "failed_checks": 1, "failed_sections": ["spectral"]}
        }

    @pytest.fixture
    def logger(self):
        """Fixture providing a logger instance"""
        return setup_logging()

    def test_init(self, logger):
        """Test ReportGenerator initialization"""
        with tempfile.NamedTemporaryFile(suffix=".json") as results_file:
            with tempfile.NamedTemporaryFile(suffix=".html") as output_file:
                generator = ReportGenerator(results_file.name, output_file.name, logger)
                assert generator.results_file == results_file.name
                assert generator.output_file == output_file.name
                assert generator.results is None

    def test_load_results(self, sample_results, logger):
        """Test loading results from a file"""
        with tempfile.NamedTemporaryFile(suffix=".json", mode="w+") as results_file:
            with tempfile.NamedTemporaryFile(suffix=".html") as output_file:
                generator = ReportGenerator(results_file.name, output_file.name, logger)

                # Malformed content is not retried
                with open(results_file.name, "w") as f:
                    f.write("This is not valid JSON")
                with pytest.raises(ValueError):
                    generator.load_results()

                with open(results_file.name, "w") as f:
                    json.dump(sample_results, f)
                assert generator.load_results() is True
                assert generator.results == sample_results

    def test_summarize(self, sample_results, logger):
        """Totals are summed across sections"""
        generator = ReportGenerator("unused.json", "unused.html", logger)
        generator.results = sample_results
        summary = generator.summarize()
        assert summary["total_checks"] == 43
        assert summary["passed_checks"] == 42
        assert summary["failed_checks"] == 1
        assert summary["success_rate"] == pytest.approx(42 / 43 * 100)

    def test_section_table_accepts_bare_sections(self, sample_results):
        assert section_table(sample_results) == sample_results["sections"]
        assert section_table(sample_results["sections"]) == sample_results["sections"]

    def test_generate_html_report(self, sample_results, logger, tmp_path):
        """The rendered page carries every section, the Kesten table and escaped details"""
        output = tmp_path / "reports" / "report.html"
        generator = ReportGenerator("unused.json", str(output), logger)
        generator.results = sample_results
        assert generator.generate_html_report() is True

        html = output.read_text()
        assert "intervals" in html
        assert "spectral" in html
        assert "2.6457513111" in html
        assert "graded_window" in html
        assert "&lt;not increasing&gt;" in html

    def test_generate_without_results(self, logger, tmp_path):
        generator = ReportGenerator("unused.json", str(tmp_path / "report.html"), logger)
        assert generator.generate_html_report() is False
        assert not (tmp_path / "report.html").exists()

    def test_structlog_setup(self):
        """Test that Structlog setup works correctly"""
        logger = setup_logging(level="DEBUG")
        assert logger is not None

        # Test structured logging with contextual information
        logger.debug("Debug message", test_param="value")
        logger.info("Info message", count=42, success=True)
        logger.warning("Warning message", component="intervals", rank=12)
        logger.error("Error message", residual=1e-3, check="completeness")

    def test_log_file_is_json_lines(self, tmp_path):
        log_file = tmp_path / "run.log"
        logger = setup_logging(str(log_file))
        logger.info("Written to file", radius=3)
        for handler in logging.getLogger().handlers:
            handler.flush()
        record = json.loads(log_file.read_text().splitlines()[-1])
        assert record["event"] == "Written to file"
        assert record["radius"] == 3
