#!/usr/bin/env python3
"""
Cairn-Check: Interval System of the Free Group
The increasing chain I_0 = {e}, I_{n+1} = I_n ∪ l_n I_n driven by the letter
schedule, its left translates (the intervals), and exhaustive verifiers for
the combinatorial facts the rest of the toolkit relies on.

Features:
- Canonical interval keys (rank, shortlex-least translate)
- Recognition of arbitrary finite word sets as intervals
- Subinterval tables by recursion, with an independent anchored enumeration
- Stabilizers computed by brute force, never assumed trivial
- Statement-level verification report with counterexample budgets
"""

import itertools
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

import structlog

from library.errors import ConsistencyError, ParseError, ResourceLimitError
from library.freegroup import (
    LETTERS,
    Word,
    iter_ball,
    letter_schedule,
    parse_word,
    parse_word_expression,
    sort_shortlex,
    words_to_json,
)
from library.resilience import DEFAULT_MAX_CONSECUTIVE_FAILURES, SweepBudget

logger = structlog.get_logger(__name__)

DEFAULT_INTERVAL_CAP = 14
AGREEMENT_MAX_N = 7
POWERSET_MAX_N = 4
MEET_CLOSURE_MAX_N = 10
EMPTY_LABEL = "empty"


@dataclass(frozen=True)
class Interval:
    """
    A left translate of a base interval, or the empty interval (rank -1).

    Equality and hashing use the canonical key (rank, translate) only.
    """
    rank: int
    translate: Word
    elements: FrozenSet[Word] = field(compare=False, repr=False)

    @property
    def is_empty(self) -> bool:
        return self.rank < 0

    @property
    def key(self) -> Tuple[int, Word]:
        return self.rank, self.translate

    def sort_key(self) -> Tuple[int, Tuple[int, str]]:
        return self.rank, self.translate.shortlex_key()

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, w: Word) -> bool:
        return w in self.elements

    def issubset(self, other: "Interval") -> bool:
        return self.elements <= other.elements

    def label(self) -> str:
        """Literal accepted back by parse_interval_literal"""
        if self.is_empty:
            return EMPTY_LABEL
        if self.translate.is_identity:
            return f"I{self.rank}"
        return f"{self.translate}*I{self.rank}"

    def __str__(self) -> str:
        return self.label()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rank": self.rank,
            "translate": str(self.translate),
            "elements": words_to_json(self.elements),
        }


EMPTY = Interval(-1, Word(), frozenset())


def sort_intervals(intervals: Iterable[Interval]) -> List[Interval]:
    return sorted(intervals, key=Interval.sort_key)


class IntervalSystem:
    """
    The base chain I_0 ⊆ ... ⊆ I_cap together with lazily built subinterval
    tables. The chain itself is built eagerly and never changes afterwards.
    """

    def __init__(self, cap: int = DEFAULT_INTERVAL_CAP):
        if cap < 0:
            raise ValueError("interval cap must be nonnegative")
        self.cap = cap
        self.logger = structlog.get_logger(__name__).bind(component="IntervalSystem")
        chain: List[FrozenSet[Word]] = [frozenset({Word()})]
        for n in range(cap):
            letter = Word.of(letter_schedule(n))
            chain.append(chain[n] | frozenset(letter * x for x in chain[n]))
        self._chain: Tuple[FrozenSet[Word], ...] = tuple(chain)
        self.sizes: Tuple[int, ...] = tuple(len(s) for s in chain)
        self._rank_of_size = {size: n for n, size in enumerate(self.sizes)}
        if len(self._rank_of_size) != len(self.sizes):
            raise ConsistencyError(f"base interval sizes are not distinct: {self.sizes}")
        self._lock = threading.Lock()
        self._tables: Dict[int, Tuple[Interval, ...]] = {}
        self._stabilizers: Dict[int, FrozenSet[Word]] = {}
        self._known: Dict[FrozenSet[Word], Interval] = {}

    # -- base chain -------------------------------------------------------

    def _check_rank(self, n: int) -> None:
        if n < 0:
            raise ValueError(f"rank must be nonnegative, got {n}")
        if n > self.cap:
            raise ResourceLimitError("interval rank", n, self.cap)

    def base_set(self, n: int) -> FrozenSet[Word]:
        self._check_rank(n)
        return self._chain[n]

    def base_interval(self, n: int) -> Interval:
        return Interval(n, Word(), self.base_set(n))

    def rank_of_size(self, size: int) -> Optional[int]:
        return self._rank_of_size.get(size)

    # -- translates and recognition ---------------------------------------

    def stabilizer(self, n: int) -> FrozenSet[Word]:
        """All w with w I_n = I_n, by exhausting candidates s x^-1 for s, x in I_n"""
        with self._lock:
            cached = self._stabilizers.get(n)
        if cached is not None:
            return cached
        base = self.base_set(n)
        candidates = {s * x.inverse() for s in base for x in base}
        found = frozenset(u for u in candidates if all(u * x in base for x in base))
        if Word() not in found:
            raise ConsistencyError(f"identity missing from stabilizer of I{n}")
        self.logger.debug("Computed stabilizer", n=n, candidates=len(candidates), size=len(found))
        with self._lock:
            self._stabilizers[n] = found
        return found

    def _canonical(self, rank: int, u: Word) -> Word:
        return min((u * s for s in self.stabilizer(rank)), key=Word.shortlex_key)

    def translate(self, w: Word, interval: Interval) -> Interval:
        if interval.is_empty:
            return EMPTY
        elements = frozenset(w * x for x in interval.elements)
        return Interval(interval.rank, self._canonical(interval.rank, w * interval.translate), elements)

    def recognize(self, words: Iterable[Word], use_cache: bool = True) -> Optional[Interval]:
        """The interval whose element set is exactly ``words``, or None"""
        target = frozenset(words)
        if not target:
            return EMPTY
        if use_cache:
            with self._lock:
                known = self._known.get(target)
            if known is not None:
                return known
        rank = self.rank_of_size(len(target))
        if rank is None:
            return None
        base = self._chain[rank]
        # Anchor on one element: u I_n = S forces anchor = u x for some x in I_n
        anchor = min(target, key=Word.shortlex_key)
        matches = []
        for x in base:
            u = anchor * x.inverse()
            if all(u * y in target for y in base):
                matches.append(u)
        if not matches:
            return None
        return Interval(rank, min(matches, key=Word.shortlex_key), target)

    def intersect(self, first: Interval, second: Interval) -> Interval:
        if first.is_empty or second.is_empty:
            return EMPTY
        common = first.elements & second.elements
        if not common:
            return EMPTY
        result = self.recognize(common)
        if result is None:
            raise ConsistencyError(
                f"intersection of {first.label()} and {second.label()} is not an interval: "
                f"{words_to_json(common)}"
            )
        return result

    # -- subintervals -----------------------------------------------------

    def subinterval_table(self, n: int) -> Tuple[Interval, ...]:
        """Sub(I_n) by the recursion Sub(I_{k+1}) = Sub(I_k) ∪ l_k Sub(I_k) ∪ {I_{k+1}}"""
        self._check_rank(n)
        with self._lock:
            cached = self._tables.get(n)
        if cached is not None:
            return cached
        if n == 0:
            table = (self.base_interval(0),)
        else:
            previous = self.subinterval_table(n - 1)
            letter = Word.of(letter_schedule(n - 1))
            merged = {J: J for J in previous}
            for J in previous:
                shifted = self.translate(letter, J)
                merged.setdefault(shifted, shifted)
            top = self.base_interval(n)
            merged.setdefault(top, top)
            table = tuple(sort_intervals(merged))
        with self._lock:
            self._tables[n] = table
            for J in table:
                self._known.setdefault(J.elements, J)
        self.logger.debug("Built subinterval table", n=n, size=len(table))
        return table

    def subintervals(self, interval: Interval, include_empty: bool = False) -> List[Interval]:
        """All intervals contained in ``interval``, sorted by (rank, translate)"""
        if interval.is_empty:
            return [EMPTY] if include_empty else []
        table = self.subinterval_table(interval.rank)
        if interval.translate.is_identity:
            result = list(table)
        else:
            result = sort_intervals(self.translate(interval.translate, J) for J in table)
        if include_empty:
            result.insert(0, EMPTY)
        return result

    def intervals_within(self, window: Iterable[Word], max_rank: Optional[int] = None) -> List[Interval]:
        """
        Every nonempty interval contained in a finite window of words.

        Since e lies in each I_m, u I_m inside the window forces u into the
        window, so the window's elements are the only candidate translates.
        """
        window = frozenset(window)
        top = self.cap if max_rank is None else min(max_rank, self.cap)
        found: Dict[Interval, Interval] = {}
        for m in range(top + 1):
            base = self._chain[m]
            if len(base) > len(window):
                break
            for u in window:
                if all(u * x in window for x in base):
                    interval = Interval(m, self._canonical(m, u), frozenset(u * x for x in base))
                    found.setdefault(interval, interval)
        return sort_intervals(found)

    def direct_subintervals(self, n: int) -> List[Interval]:
        """Sub(I_n) by anchored enumeration, independent of the recursion"""
        return self.intervals_within(self.base_set(n), max_rank=n)

    def powerset_subintervals(self, n: int) -> List[Interval]:
        """Sub(I_n) by recognizing every nonempty subset; only for small n"""
        if n > POWERSET_MAX_N:
            raise ResourceLimitError("power-set rank", n, POWERSET_MAX_N)
        base = sort_shortlex(self.base_set(n))
        found = []
        for size in range(1, len(base) + 1):
            for subset in itertools.combinations(base, size):
                interval = self.recognize(subset, use_cache=False)
                if interval is not None:
                    found.append(interval)
        return sort_intervals(found)

    # -- freeness ---------------------------------------------------------

    def escape_power(self, w: Word, interval: Interval, max_power: int = 64) -> Optional[int]:
        """Least k >= 1 with I ∩ w^k I = ∅, or None if not found up to max_power"""
        if interval.is_empty:
            return 1
        power = Word()
        for k in range(1, max_power + 1):
            power = power * w
            if not interval.elements & frozenset(power * x for x in interval.elements):
                return k
        return None


def parse_interval_literal(text: str, system: IntervalSystem) -> Interval:
    """Read "In", "w*In" (w with optional powers, e.g. "b^-1*I3") or "empty" """
    source = text.strip()
    if source in (EMPTY_LABEL, "∅"):
        return EMPTY
    head, sep, tail = source.rpartition("*")
    base_text = tail if sep else source
    if not base_text.startswith("I") or not base_text[1:].isdigit():
        offset = len(text) - len(text.lstrip())
        raise ParseError("expected a base interval like I3", text, offset + len(head) + len(sep))
    rank = int(base_text[1:])
    base = system.base_interval(rank)
    if not sep:
        return base
    try:
        w = parse_word(head)
    except ParseError:
        w = parse_word_expression(head)
    return system.translate(w, base)


# -- verification ------------------------------------------------------------

@dataclass
class StatementResult:
    """Outcome of one statement at one n"""
    statement: str
    n: int
    instances: int = 0
    failures: List[Dict[str, Any]] = field(default_factory=list)
    truncated: bool = False
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures and not self.truncated

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "n": self.n,
            "instances": self.instances,
            "passed": self.passed,
            "failures": self.failures,
            "truncated": self.truncated,
        }
        if self.details:
            data["details"] = self.details
        return data


@dataclass
class VerificationReport:
    max_n: int
    statements: Dict[str, List[StatementResult]] = field(default_factory=dict)

    def add(self, result: StatementResult) -> None:
        self.statements.setdefault(result.statement, []).append(result)

    @property
    def passed(self) -> bool:
        return all(r.passed for results in self.statements.values() for r in results)

    @property
    def total_checks(self) -> int:
        return sum(r.instances for results in self.statements.values() for r in results)

    @property
    def failed_checks(self) -> int:
        return sum(len(r.failures) for results in self.statements.values() for r in results)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_n": self.max_n,
            "passed": self.passed,
            "total_checks": self.total_checks,
            "failed_checks": self.failed_checks,
            "statements": {name: [r.to_dict() for r in results]
                           for name, results in self.statements.items()},
        }


def _run(statement: str, n: int, checks: Iterable[Tuple[Callable, tuple]],
         max_failures: int) -> StatementResult:
    budget = SweepBudget(f"{statement}[{n}]", max_failures)
    for fn, args in checks:
        budget.check(fn, *args)
        if budget.truncated:
            break
    return StatementResult(statement, n, budget.instances, budget.failures, budget.truncated)


def _expected_overlap(n: int) -> int:
    """Rank of I_n ∩ l_n I_n: n-3 for even n, n-1 for odd n (negative means empty)"""
    return n - 3 if n % 2 == 0 else n - 1


def verify_interval_statements(max_n: int, system: Optional[IntervalSystem] = None,
                    max_failures: int = DEFAULT_MAX_CONSECUTIVE_FAILURES) -> VerificationReport:
    """
    Exhaustively check the interval facts for every n <= max_n:

    - prefix_closure: every prefix/suffix split of w ∈ I_n stays in I_n
    - first_letter: every w ∈ l I_n \\ I_n begins with l
    - basic_intersection: I_n ∩ l_n I_n equals I_{n-3} (n even) or I_{n-1} (n odd)
    - subinterval_split: every proper subinterval of I_{n+1} lies in I_n or l_n I_n,
      with the recursive table cross-checked against independent enumerations
    - meet_closure: intersections of subintervals of I_n are subintervals (n <= 10)
    - size_recurrence and chain_growth
    """
    system = system or IntervalSystem()
    if max_n < 0:
        raise ValueError("max_n must be nonnegative")
    if max_n > system.cap:
        raise ResourceLimitError("interval rank", max_n, system.cap)
    log = logger.bind(max_n=max_n)
    log.info("Starting interval verification")
    report = VerificationReport(max_n)

    for n in range(max_n + 1):
        base = system.base_set(n)

        def prefix_check(w: Word, u: Word, v: Word, base=base, n=n):
            missing = [str(x) for x in (u, v) if x not in base]
            if missing:
                return {"w": str(w), "u": str(u), "v": str(v), "missing": missing}
            return None

        report.add(_run("prefix_closure", n,
                        ((prefix_check, (w, u, v)) for w in sort_shortlex(base)
                         for u, v in w.factorizations()),
                        max_failures))

        def first_letter_check(letter, w, n=n):
            if not w.begins_with(letter):
                return {"letter": str(letter), "w": str(w)}
            return None

        report.add(_run("first_letter", n,
                        ((first_letter_check, (letter, w)) for letter in LETTERS
                         for w in sort_shortlex(frozenset(Word.of(letter) * x for x in base) - base)),
                        max_failures))

        def overlap_check(n=n, base=base):
            letter = Word.of(letter_schedule(n))
            actual = base & frozenset(letter * x for x in base)
            rank = _expected_overlap(n)
            expected = system.base_set(rank) if rank >= 0 else frozenset()
            if actual != expected:
                return {"n": n, "expected": words_to_json(expected), "actual": words_to_json(actual)}
            return None

        overlap = _run("basic_intersection", n, [(overlap_check, ())], max_failures)
        rank = _expected_overlap(n)
        overlap.details["expected"] = f"I{rank}" if rank >= 0 else EMPTY_LABEL
        report.add(overlap)

        if n >= 1:
            report.add(_verify_split(system, n - 1, max_failures))

        if n <= MEET_CLOSURE_MAX_N:
            report.add(_verify_meet_closure(system, n, max_failures))

        def recurrence_check(n=n):
            if n < 1:
                return None
            k = _expected_overlap(n - 1)
            s_k = system.sizes[k] if k >= 0 else 0
            expected = 2 * system.sizes[n - 1] - s_k
            if system.sizes[n] != expected:
                return {"n": n, "expected": expected, "actual": system.sizes[n]}
            return None

        def growth_check(n=n):
            if n >= 1 and not system.base_set(n - 1) < system.base_set(n):
                return {"n": n, "reason": "chain does not grow strictly"}
            return None

        report.add(_run("size_recurrence", n, [(recurrence_check, ())], max_failures))
        report.add(_run("chain_growth", n, [(growth_check, ())], max_failures))

    log.info("Interval verification finished", passed=report.passed,
             instances=report.total_checks, failures=report.failed_checks)
    return report


def _verify_split(system: IntervalSystem, n: int, max_failures: int) -> StatementResult:
    """Proper subintervals of I_{n+1} lie in I_n or l_n I_n"""
    top = n + 1
    base = system.base_set(n)
    shifted = frozenset(Word.of(letter_schedule(n)) * x for x in base)
    direct = system.direct_subintervals(top)

    def split_check(J: Interval):
        if J.rank == top:
            return None
        if J.elements <= base or J.elements <= shifted:
            return None
        return {"interval": J.to_dict()}

    result = _run("subinterval_split", top, ((split_check, (J,)) for J in direct), max_failures)

    # Recursion against anchored enumeration, and power sets at small rank
    disagreements = []
    if top <= AGREEMENT_MAX_N:
        recursive = set(system.subinterval_table(top))
        if recursive != set(direct):
            disagreements.append({
                "method": "recursion",
                "only_recursion": [J.label() for J in sort_intervals(recursive - set(direct))],
                "only_direct": [J.label() for J in sort_intervals(set(direct) - recursive)],
            })
    if top <= POWERSET_MAX_N:
        brute = set(system.powerset_subintervals(top))
        if brute != set(direct):
            disagreements.append({
                "method": "powerset",
                "only_powerset": [J.label() for J in sort_intervals(brute - set(direct))],
                "only_direct": [J.label() for J in sort_intervals(set(direct) - brute)],
            })
    result.failures.extend(disagreements)
    result.details["subintervals"] = len(direct)
    return result


def _verify_meet_closure(system: IntervalSystem, n: int, max_failures: int) -> StatementResult:
    table = system.subinterval_table(n)
    members = {J.elements for J in table}

    def meet_check(J: Interval, K: Interval):
        common = J.elements & K.elements
        if common and common not in members:
            return {"I": J.label(), "J": K.label(), "intersection": words_to_json(common)}
        return None

    pairs = ((meet_check, (table[i], table[j]))
             for i in range(len(table)) for j in range(i, len(table)))
    return _run("meet_closure", n, pairs, max_failures)


def stabilizer_report(max_n: int, system: Optional[IntervalSystem] = None) -> Dict[str, Any]:
    system = system or IntervalSystem()
    if max_n > system.cap:
        raise ResourceLimitError("interval rank", max_n, system.cap)
    stabilizers = {str(n): words_to_json(system.stabilizer(n)) for n in range(max_n + 1)}
    return {
        "max_n": max_n,
        "stabilizers": stabilizers,
        "trivial": all(words == ["e"] for words in stabilizers.values()),
    }


def verify_escape(radius: int, n: int, system: Optional[IntervalSystem] = None,
                  max_power: int = 64) -> Dict[str, Any]:
    """Every w ≠ e in ball(radius) moves I_n off itself after finitely many steps"""
    system = system or IntervalSystem()
    interval = system.base_interval(n)
    stuck = []
    worst = 0
    checked = 0
    for w in iter_ball(radius):
        if w.is_identity:
            continue
        checked += 1
        k = system.escape_power(w, interval, max_power)
        if k is None:
            stuck.append(str(w))
        else:
            worst = max(worst, k)
    return {"radius": radius, "n": n, "words": checked, "max_escape_power": worst,
            "stuck": stuck, "passed": not stuck}
