#!/usr/bin/env python3
"""
Cairn-Check: Acceptance Suite
Runs every verification the toolkit offers at acceptance scale and collects
the outcomes into report sections. Each section carries total_checks,
passed_checks, failed_checks and a status, which is the shape the HTML report
generator consumes.
"""

from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, Optional

import structlog

from library.cairn import (
    CoordinateCairn,
    build_graded,
    build_measure_cairn,
    verify_cairn,
    verify_measure_independence,
)
from library.config import Config
from library.errors import CairnCheckError
from library.hilbert import check_independence_axioms
from library.intervals import IntervalSystem, stabilizer_report, verify_escape, verify_interval_statements
from library.repsplit import certify_regular_multiple, decompose, displacement_bound
from library.spectral import check_kesten_rows, kesten_report, minimax_displacement

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class SuiteOptions:
    """Instance sizes for each section"""
    intervals_max_n: int = 12
    stabilizer_max_n: int = 10
    escape_radius: int = 3
    graded_window: int = 6
    coordinate_window: int = 5
    measure_window: int = 4
    split_window: int = 4
    kesten_max_radius: int = 10
    displacement_max_radius: int = 10
    minimax_max_radius: int = 5
    minimax_restarts: int = 50
    axiom_trials: int = 10000
    axiom_dim: int = 12

    @classmethod
    def quick(cls) -> "SuiteOptions":
        """Small instances for smoke runs"""
        return cls(intervals_max_n=6, stabilizer_max_n=6, escape_radius=2, graded_window=3,
                   coordinate_window=3, measure_window=3, split_window=3, kesten_max_radius=4,
                   displacement_max_radius=4, minimax_max_radius=2, minimax_restarts=5,
                   axiom_trials=50, axiom_dim=8)


def _section(total: int, failed: int, details: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "total_checks": total,
        "passed_checks": total - failed,
        "failed_checks": failed,
        "status": "passed" if failed == 0 else "failed",
        "details": details,
    }


class SuiteRunner:
    """Run the acceptance sections in order, isolating failures per section"""

    def __init__(self, config: Config, options: Optional[SuiteOptions] = None):
        self.config = config
        self.options = options or SuiteOptions()
        self.system = IntervalSystem(config.caps.interval_rank)
        self.results: Dict[str, Dict[str, Any]] = {}

    def _run_section(self, name: str, fn: Callable[[], Dict[str, Any]]) -> None:
        log = logger.bind(section=name)
        log.info("Running suite section")
        try:
            self.results[name] = fn()
        except CairnCheckError as e:
            log.error("Suite section errored", error=str(e))
            self.results[name] = _section(1, 1, {"error": type(e).__name__, "message": str(e)})
        log.info("Suite section finished", status=self.results[name]["status"])

    def intervals(self) -> Dict[str, Any]:
        o = self.options
        report = verify_interval_statements(o.intervals_max_n, self.system, self.config.max_consecutive_failures)
        stab = stabilizer_report(o.stabilizer_max_n, self.system)
        escape = verify_escape(o.escape_radius, min(4, o.intervals_max_n), self.system)
        total = report.total_checks + (o.stabilizer_max_n + 1) + escape["words"]
        failed = report.failed_checks + (0 if stab["trivial"] else 1) + len(escape["stuck"])
        return _section(total, failed, {"statements": report.to_dict(), "stabilizers": stab, "escape": escape})

    def cairns(self) -> Dict[str, Any]:
        o = self.options
        tol = self.config.tolerances.relation
        caps = self.config.caps
        graded = build_graded(o.graded_window, self.system, seed=self.config.seed or 1,
                              max_ambient_dim=caps.ambient_dim)
        coordinate = CoordinateCairn.from_base_interval(o.coordinate_window, self.system,
                                                        max_ambient_dim=caps.ambient_dim)
        measure = build_measure_cairn(o.measure_window, self.system, caps.measure_coords)
        reports = [verify_cairn(graded, tol, self.config.workers),
                   verify_cairn(coordinate, tol, self.config.workers)]
        measure_report = verify_measure_independence(measure, self.config.max_consecutive_failures)
        total = sum(r.counts()["total_checks"] for r in reports) + measure_report.counts()["total_checks"]
        failed = sum(r.counts()["failed_checks"] for r in reports) + measure_report.counts()["failed_checks"]
        details = {r.model: {"window_rank": r.window_rank, "passed": r.passed, **r.counts(),
                             "worst_residual": r.worst_residual()} for r in reports}
        details["measure"] = {k: v for k, v in measure_report.to_dict().items()
                              if k not in ("independence", "shift")}
        return _section(total, failed, details)

    def decomposition(self) -> Dict[str, Any]:
        o = self.options
        tol = self.config.tolerances
        c = build_graded(o.split_window, self.system, seed=self.config.seed or 1,
                         max_ambient_dim=self.config.caps.ambient_dim)
        d = decompose(c, tol.decomposition, strict=False, seed=self.config.seed,
                      workers=self.config.workers, orthogonality_tol=tol.orthogonality)
        certificate = certify_regular_multiple(d, tol.decomposition, self.config.workers)
        failed = (0 if d.valid else 1) + sum(0 if level.valid else 1 for level in certificate.levels)
        return _section(1 + len(certificate.levels), failed,
                        {"decomposition": d.to_dict(), "certificate": certificate.to_dict()})

    def spectral(self) -> Dict[str, Any]:
        o = self.options
        cap = self.config.caps.spectral_radius
        rows = kesten_report(o.kesten_max_radius, cap, self.config.seed)
        problems = check_kesten_rows(rows, max_gap_at_10=self.config.tolerances.max_gap_at_10)
        displacement = [displacement_bound(r, seed=self.config.seed, cap=cap)
                        for r in range(o.displacement_max_radius + 1)]
        minimax = [minimax_displacement(r, o.minimax_restarts, seed=self.config.seed)
                   for r in range(1, o.minimax_max_radius + 1)]
        total = len(rows) + len(displacement) + len(minimax)
        failed = len({p["radius"] for p in problems}) + sum(not d.passed for d in displacement) \
            + sum(not m.passed for m in minimax)
        return _section(total, failed, {
            "kesten": [row.to_dict() for row in rows],
            "kesten_problems": problems,
            "displacement": [d.to_dict() for d in displacement],
            "minimax": [m.to_dict() for m in minimax],
        })

    def axioms(self) -> Dict[str, Any]:
        o = self.options
        report = check_independence_axioms(o.axiom_trials, o.axiom_dim, self.config.seed,
                                           self.config.tolerances.decomposition)
        return _section(report.total_checks, report.failed_checks, report.to_dict())

    def run_validation_tests(self) -> Dict[str, Dict[str, Any]]:
        for name in ("intervals", "cairns", "decomposition", "spectral", "axioms"):
            self._run_section(name, getattr(self, name))
        summary = self.generate_summary()
        logger.info("Suite completed", **summary)
        return self.results

    def generate_summary(self) -> Dict[str, Any]:
        total = sum(s["total_checks"] for s in self.results.values())
        failed = sum(s["failed_checks"] for s in self.results.values())
        return {
            "sections": len(self.results),
            "total_checks": total,
            "failed_checks": failed,
            "failed_sections": sorted(n for n, s in self.results.items() if s["status"] != "passed"),
        }


def run_suite(config: Config, options: Optional[SuiteOptions] = None) -> Dict[str, Any]:
    """Results keyed by section, plus the options the suite ran with"""
    runner = SuiteRunner(config, options)
    sections = runner.run_validation_tests()
    return {"sections": sections, "options": asdict(runner.options), "summary": runner.generate_summary()}
