#!/usr/bin/env python3
"""
Cairn-Check: Concrete Cairn Models
Systems of subspaces (or sigma-algebras) indexed by the intervals inside a
finite window, with partial shift maps realizing the free group action and
independence over intersections.

Models:
- GradedCairn: one fresh block W_J per nonempty subinterval J of I_N,
  H_I = join of the blocks below I (optionally under a seeded random rotation)
- CoordinateCairn: l2(window x {0..d-1}), H_I spanned by the coordinates in I
- ProductMeasureCairn: fair coins indexed by I_N with exact dyadic arithmetic

Shifts are partial: l maps I to lI only when both lie inside the window.
"""

import concurrent.futures
import copy
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import structlog

from library.errors import ConsistencyError, OutOfWindowError, ResourceLimitError
from library.freegroup import LETTERS, Letter, Word, iter_ball, sort_shortlex
from library.hilbert import (
    RELATION_TOL,
    Subspace,
    containment_residual,
    join_all,
    orthonormalize,
    random_unitary,
    rel_orth_residual,
    subspace_distance,
)
from library.intervals import Interval, IntervalSystem
from library.resilience import DEFAULT_MAX_CONSECUTIVE_FAILURES, SweepBudget

logger = structlog.get_logger(__name__)

DEFAULT_MAX_AMBIENT_DIM = 4096
DEFAULT_MAX_MEASURE_COORDS = 12


class HilbertCairn:
    """Shared behaviour of the Hilbert-space models"""

    model = "hilbert"
    ambient_dim = 0

    def __init__(self, system: IntervalSystem, window_rank: Optional[int], index: List[Interval]):
        self.system = system
        self.window_rank = window_rank
        self.index: Tuple[Interval, ...] = tuple(index)
        self._index_set = frozenset(self.index)
        self._subspaces: Dict[Interval, Subspace] = {}
        self._shifts: Dict[Letter, np.ndarray] = {}

    def in_window(self, interval: Interval) -> bool:
        return interval in self._index_set

    def intervals_of_rank(self, n: int) -> List[Interval]:
        return [I for I in self.index if I.rank == n]

    @property
    def max_rank(self) -> int:
        return max(I.rank for I in self.index)

    def subspace_of(self, interval: Interval) -> Subspace:
        if interval.is_empty:
            return Subspace.trivial(self.ambient_dim)
        cached = self._subspaces.get(interval)
        if cached is None:
            cached = self._build_subspace(interval)
            self._subspaces[interval] = cached
        return cached

    def _build_subspace(self, interval: Interval) -> Subspace:
        raise NotImplementedError

    def shift_interval_map(self, letter: Letter) -> Dict[Interval, Interval]:
        """I -> lI on exactly the intervals with both I and lI in the window"""
        mapping = {}
        w = Word.of(letter)
        for interval in self.index:
            image = self.system.translate(w, interval)
            if image in self._index_set:
                mapping[interval] = image
        return mapping

    def shift_operator(self, letter: Letter) -> np.ndarray:
        cached = self._shifts.get(letter)
        if cached is None:
            cached = self._build_shift(letter)
            self._shifts[letter] = cached
        return cached

    def _build_shift(self, letter: Letter) -> np.ndarray:
        raise NotImplementedError

    def apply_shift(self, letter: Letter, space: Subspace) -> Subspace:
        return Subspace(self.shift_operator(letter) @ space.frame)

    def full_space(self) -> Subspace:
        return Subspace.full(self.ambient_dim)

    def summary(self) -> Dict[str, Any]:
        return {
            "model": self.model,
            "window_rank": self.window_rank,
            "ambient_dim": self.ambient_dim,
            "index_size": len(self.index),
            "intervals_by_rank": {str(n): len(self.intervals_of_rank(n))
                                  for n in range(self.max_rank + 1)},
        }


class GradedCairn(HilbertCairn):
    """One fresh block per nonempty subinterval of I_N"""

    model = "graded"

    def __init__(self, window_rank: int, system: IntervalSystem,
                 block_dims: Optional[Mapping[Interval, int]] = None,
                 seed: int = 0, max_ambient_dim: int = DEFAULT_MAX_AMBIENT_DIM):
        window = system.base_interval(window_rank)
        super().__init__(system, window_rank, system.subintervals(window))
        self.seed = seed
        self.block_dims = {J: int((block_dims or {}).get(J, 1)) for J in self.index}
        if any(d <= 0 for d in self.block_dims.values()):
            raise ValueError("block dimensions must be positive")
        self.ambient_dim = sum(self.block_dims.values())
        if self.ambient_dim > max_ambient_dim:
            raise ResourceLimitError("ambient dimension", self.ambient_dim, max_ambient_dim)

        if seed:
            self.rotation = random_unitary(self.ambient_dim, np.random.default_rng(seed))
        else:
            self.rotation = np.eye(self.ambient_dim, dtype=complex)

        self._columns: Dict[Interval, slice] = {}
        offset = 0
        for J in self.index:
            self._columns[J] = slice(offset, offset + self.block_dims[J])
            offset += self.block_dims[J]
        self._reference = {J: self.rotation[:, cols] for J, cols in self._columns.items()}
        self.blocks: Dict[Interval, Subspace] = {J: Subspace(frame) for J, frame in self._reference.items()}

        for letter in LETTERS:
            for source, target in self.shift_interval_map(letter).items():
                if self.block_dims[source] != self.block_dims[target]:
                    raise ValueError(
                        f"block dims must agree along shifts: {source.label()} -> {target.label()}"
                    )

    def _build_subspace(self, interval: Interval) -> Subspace:
        if not self.in_window(interval):
            raise OutOfWindowError(f"{interval.label()} is not a subinterval of I{self.window_rank}")
        below = [self.blocks[J] for J in self.index if J.issubset(interval)]
        return join_all(below, self.ambient_dim)

    def _build_shift(self, letter: Letter) -> np.ndarray:
        # Block permutation W_J -> W_{lJ} conjugated by the rotation
        operator = np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        for source, target in self.shift_interval_map(letter).items():
            operator += self._reference[target] @ self._reference[source].conj().T
        return operator

    def with_block_override(self, interval: Interval, vectors) -> "GradedCairn":
        """A copy whose block at ``interval`` is replaced; the shift action is unchanged"""
        if not self.in_window(interval):
            raise OutOfWindowError(interval.label())
        clone = copy.copy(self)
        clone.blocks = dict(self.blocks)
        clone.blocks[interval] = orthonormalize(np.asarray(vectors, dtype=complex).reshape(self.ambient_dim, -1),
                                                self.ambient_dim)
        clone._subspaces = {}
        clone._shifts = dict(self._shifts)
        return clone

    def block_vector(self, interval: Interval, k: int = 0) -> np.ndarray:
        return self._reference[interval][:, k].copy()


class CoordinateCairn(HilbertCairn):
    """l2(window x fiber) with H_I spanned by the coordinates over I ∩ window"""

    model = "coordinate"

    def __init__(self, window: Iterable[Word], system: IntervalSystem, fiber_dim: int = 1,
                 window_rank: Optional[int] = None, max_ambient_dim: int = DEFAULT_MAX_AMBIENT_DIM):
        words = sort_shortlex(set(window))
        if fiber_dim <= 0:
            raise ValueError("fiber_dim must be positive")
        ambient = len(words) * fiber_dim
        if ambient > max_ambient_dim:
            raise ResourceLimitError("ambient dimension", ambient, max_ambient_dim)
        super().__init__(system, window_rank, system.intervals_within(words, max_rank=window_rank))
        self.window: FrozenSet[Word] = frozenset(words)
        self.words = words
        self.fiber_dim = fiber_dim
        self.ambient_dim = ambient
        self.position = {(w, k): i * fiber_dim + k for i, w in enumerate(words) for k in range(fiber_dim)}

    @classmethod
    def from_base_interval(cls, n: int, system: IntervalSystem, fiber_dim: int = 1, **kwargs) -> "CoordinateCairn":
        return cls(system.base_set(n), system, fiber_dim, window_rank=n, **kwargs)

    @classmethod
    def from_ball(cls, radius: int, system: IntervalSystem, fiber_dim: int = 1, **kwargs) -> "CoordinateCairn":
        return cls(iter_ball(radius), system, fiber_dim, **kwargs)

    def _build_subspace(self, interval: Interval) -> Subspace:
        indices = [self.position[(w, k)] for w in interval.elements & self.window
                   for k in range(self.fiber_dim)]
        return Subspace.coordinate(self.ambient_dim, indices)

    def _build_shift(self, letter: Letter) -> np.ndarray:
        operator = np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        w = Word.of(letter)
        for v in self.words:
            image = w * v
            if image in self.window:
                for k in range(self.fiber_dim):
                    operator[self.position[(image, k)], self.position[(v, k)]] = 1.0
        return operator

    def basis_freeness(self, radius: int = 2) -> Dict[str, Any]:
        """w (v, k) = (v, k) only for w = e, over w in ball(radius)"""
        fixed = []
        checked = 0
        for w in iter_ball(radius):
            if w.is_identity:
                continue
            for v in self.words:
                checked += 1
                if w * v == v:
                    fixed.append({"w": str(w), "v": str(v)})
        return {"radius": radius, "checked": checked, "fixed_points": fixed, "passed": not fixed}


def build_graded(N: int, system: Optional[IntervalSystem] = None,
                 dims: Optional[Mapping[Interval, int]] = None, seed: int = 0,
                 max_ambient_dim: int = DEFAULT_MAX_AMBIENT_DIM) -> GradedCairn:
    system = system or IntervalSystem()
    c = GradedCairn(N, system, dims, seed, max_ambient_dim)
    logger.debug("Built graded cairn", window_rank=N, ambient_dim=c.ambient_dim, seed=seed)
    return c


def subspace_of(c: HilbertCairn, interval: Interval) -> Subspace:
    return c.subspace_of(interval)


def shift_interval_map(c: HilbertCairn, letter: Letter) -> Dict[Interval, Interval]:
    return c.shift_interval_map(letter)


# -- verification of the Hilbert models ------------------------------------------

@dataclass
class CairnCheck:
    kind: str
    I: str
    J: str
    residual: float
    passed: bool
    letter: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {"kind": self.kind, "I": self.I, "J": self.J,
                "residual": self.residual, "pass": self.passed}
        if self.letter is not None:
            data["letter"] = self.letter
        return data


@dataclass
class CairnReport:
    model: str
    window_rank: Optional[int]
    tol: float
    checks: List[CairnCheck] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def violations(self) -> List[CairnCheck]:
        return [c for c in self.checks if not c.passed]

    def worst_residual(self, kind: Optional[str] = None) -> float:
        residuals = [c.residual for c in self.checks if kind is None or c.kind == kind]
        return max(residuals, default=0.0)

    def counts(self) -> Dict[str, int]:
        return {"total_checks": len(self.checks),
                "passed_checks": sum(c.passed for c in self.checks),
                "failed_checks": len(self.violations)}

    def to_dict(self) -> Dict[str, Any]:
        data = {"model": self.model, "window_rank": self.window_rank, "tol": self.tol,
                "passed": self.passed, **self.counts(),
                "checks": [c.to_dict() for c in self.checks]}
        if self.notes:
            data["notes"] = self.notes
        return data


def _orthogonality_check(c: HilbertCairn, I: Interval, J: Interval, tol: float) -> CairnCheck:
    K = c.system.intersect(I, J)
    residual = rel_orth_residual(c.subspace_of(I), c.subspace_of(K), c.subspace_of(J))
    return CairnCheck("orthogonality", I.label(), J.label(), residual, residual <= tol)


def verify_cairn(c: HilbertCairn, tol: float = RELATION_TOL, workers: int = 1) -> CairnReport:
    """
    Check over the whole window index:
    orthogonality H_I ⊥_{H_{I∩J}} H_J for every pair, inclusion H_J ⊆ H_I for
    J ≤ I, shift equivariance on each partial shift map, independence of the
    singleton family, and that the H_I exhaust the model space.
    """
    report = CairnReport(c.model, c.window_rank, tol)
    log = logger.bind(model=c.model, window_rank=c.window_rank)
    log.info("Starting cairn verification", intervals=len(c.index))

    # Subspaces are computed up front so worker threads only read the cache
    for I in c.index:
        c.subspace_of(I)

    pairs = [(c.index[i], c.index[j]) for i in range(len(c.index)) for j in range(i + 1, len(c.index))]
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            report.checks.extend(executor.map(lambda p: _orthogonality_check(c, p[0], p[1], tol), pairs))
    else:
        report.checks.extend(_orthogonality_check(c, I, J, tol) for I, J in pairs)

    for I in c.index:
        for J in c.index:
            if J != I and J.issubset(I):
                residual = containment_residual(c.subspace_of(J), c.subspace_of(I))
                report.checks.append(CairnCheck("inclusion", I.label(), J.label(), residual, residual <= tol))

    for letter in LETTERS:
        for I, image in c.shift_interval_map(letter).items():
            try:
                residual = subspace_distance(c.apply_shift(letter, c.subspace_of(I)), c.subspace_of(image))
            except ConsistencyError:
                # shift is not isometric on H_I
                residual = float("inf")
            report.checks.append(CairnCheck("shift", I.label(), image.label(), residual,
                                            residual <= tol, letter=str(letter)))

    singletons = c.intervals_of_rank(0)
    for S in singletons:
        others = join_all((c.subspace_of(T) for T in singletons if T != S), c.ambient_dim)
        residual = rel_orth_residual(c.subspace_of(S), Subspace.trivial(c.ambient_dim), others)
        report.checks.append(CairnCheck("independent_family", S.label(), "others", residual, residual <= tol))

    whole = join_all((c.subspace_of(I) for I in c.index), c.ambient_dim)
    residual = subspace_distance(whole, c.full_space())
    report.checks.append(CairnCheck("join_exhausts_window", "all", "ambient", residual, residual <= tol))
    report.notes.append("join_exhausts_window stands in for the direct-limit condition, "
                        "which has no finite analogue")

    log.info("Cairn verification finished", passed=report.passed,
             checks=len(report.checks), violations=len(report.violations),
             worst=report.worst_residual())
    return report


# -- product measure model ------------------------------------------------------------

class ProductMeasureCairn:
    """
    Independent coins indexed by a finite set of words, weights kept as an
    integer array over {0,1}^S so every probability is an exact rational.
    """

    model = "measure"

    def __init__(self, coords: Iterable[Word], system: IntervalSystem,
                 weights: Optional[np.ndarray] = None, window_rank: Optional[int] = None):
        self.coords: Tuple[Word, ...] = tuple(sort_shortlex(set(coords)))
        self.system = system
        self.window_rank = window_rank
        self.axis = {w: i for i, w in enumerate(self.coords)}
        shape = (2,) * len(self.coords)
        if weights is None:
            weights = np.ones(shape, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.int64)
        if weights.shape != shape or (weights < 0).any() or weights.sum() == 0:
            raise ValueError(f"weights must be a nonnegative nonzero array of shape {shape}")
        self.weights = weights
        self.denominator = int(weights.sum())
        self.index: Tuple[Interval, ...] = tuple(system.intervals_within(self.coords, max_rank=window_rank))

    @property
    def atom_count(self) -> int:
        return 2 ** len(self.coords)

    def atom_probability(self, assignment: Sequence[int]) -> Fraction:
        return Fraction(int(self.weights[tuple(assignment)]), self.denominator)

    def total_mass(self) -> Fraction:
        return sum((Fraction(int(x), self.denominator) for x in self.weights.flat), Fraction(0))

    def algebra_of(self, interval: Interval) -> Tuple[int, ...]:
        """Axes generating the algebra of ``interval``: its coordinates inside S"""
        return tuple(sorted(self.axis[w] for w in interval.elements if w in self.axis))

    def marginal(self, axes: Sequence[int]) -> np.ndarray:
        """Integer weights of the joint law of the given axes, in the given order"""
        others = tuple(i for i in range(len(self.coords)) if i not in axes)
        summed = self.weights.sum(axis=others) if others else self.weights
        kept = sorted(axes)
        return np.transpose(summed, [kept.index(a) for a in axes])

    def probability(self, axes: Sequence[int], values: Sequence[int]) -> Fraction:
        return Fraction(int(self.marginal(axes)[tuple(values)]), self.denominator)

    def with_coupled_coordinates(self, u: Word, v: Word) -> "ProductMeasureCairn":
        """Negative control: coordinates u and v forced equal"""
        weights = self.weights.copy()
        index = [slice(None)] * len(self.coords)
        for x, y in ((0, 1), (1, 0)):
            index[self.axis[u]], index[self.axis[v]] = x, y
            weights[tuple(index)] = 0
        return ProductMeasureCairn(self.coords, self.system, weights, self.window_rank)

    def shift_interval_map(self, letter: Letter) -> Dict[Interval, Interval]:
        members = set(self.index)
        w = Word.of(letter)
        mapping = {}
        for interval in self.index:
            image = self.system.translate(w, interval)
            if image in members:
                mapping[interval] = image
        return mapping

    def summary(self) -> Dict[str, Any]:
        return {"model": self.model, "window_rank": self.window_rank,
                "coordinates": len(self.coords), "atoms": self.atom_count,
                "index_size": len(self.index), "total_mass": str(self.total_mass())}


def build_measure_cairn(window_rank: int, system: Optional[IntervalSystem] = None,
                        max_coords: int = DEFAULT_MAX_MEASURE_COORDS) -> ProductMeasureCairn:
    system = system or IntervalSystem()
    coords = system.base_set(window_rank)
    if len(coords) > max_coords:
        raise ResourceLimitError("measure coordinates", len(coords), max_coords)
    return ProductMeasureCairn(coords, system, window_rank=window_rank)


def _independence_counterexample(c: ProductMeasureCairn, I: Interval, J: Interval) -> Optional[Dict[str, Any]]:
    K = c.system.intersect(I, J)
    axes_I, axes_J, axes_K = set(c.algebra_of(I)), set(c.algebra_of(J)), set(c.algebra_of(K))
    axes = sorted(axes_I | axes_J)
    joint = c.marginal(axes)
    only_I = tuple(axes.index(a) for a in axes_I - axes_K)
    only_J = tuple(axes.index(a) for a in axes_J - axes_K)
    # P(A∩B∩C) P(C) = P(A∩C) P(B∩C), all over the common denominator
    n_ac = joint.sum(axis=only_J, keepdims=True)
    n_bc = joint.sum(axis=only_I, keepdims=True)
    n_c = joint.sum(axis=only_I + only_J, keepdims=True)
    mismatch = np.argwhere(joint * n_c != n_ac * n_bc)
    if mismatch.size:
        atom = {str(c.coords[a]): int(v) for a, v in zip(axes, mismatch[0])}
        return {"kind": "independence", "I": I.label(), "J": J.label(), "K": K.label(), "atom": atom}
    return None


def _shift_counterexample(c: ProductMeasureCairn, letter: Letter, I: Interval,
                          image: Interval) -> Optional[Dict[str, Any]]:
    w = Word.of(letter)
    source_words = sort_shortlex(x for x in I.elements if x in c.axis)
    source_axes = [c.axis[x] for x in source_words]
    target_axes = [c.axis[w * x] for x in source_words]
    if not np.array_equal(c.marginal(source_axes), c.marginal(target_axes)):
        return {"kind": "shift", "letter": str(letter), "I": I.label(), "J": image.label()}
    return None


@dataclass
class MeasureReport:
    window_rank: Optional[int]
    coordinates: int
    atoms: int
    independence: Dict[str, Any]
    shift: Dict[str, Any]
    total_mass: str

    @property
    def passed(self) -> bool:
        return (not self.independence["failures"] and not self.shift["failures"]
                and not self.independence["truncated"] and not self.shift["truncated"]
                and self.total_mass == "1")

    def counts(self) -> Dict[str, int]:
        total = self.independence["instances"] + self.shift["instances"]
        failed = len(self.independence["failures"]) + len(self.shift["failures"])
        return {"total_checks": total, "passed_checks": total - failed, "failed_checks": failed}

    def to_dict(self) -> Dict[str, Any]:
        return {"model": "measure", "window_rank": self.window_rank, "exact": True,
                "passed": self.passed, "coordinates": self.coordinates, "atoms": self.atoms,
                "total_mass": self.total_mass, **self.counts(),
                "independence": self.independence, "shift": self.shift}


def verify_measure_independence(c: ProductMeasureCairn,
                                max_failures: int = DEFAULT_MAX_CONSECUTIVE_FAILURES) -> MeasureReport:
    """Exact conditional independence over every interval pair, plus shift invariance of the law"""
    log = logger.bind(model="measure", window_rank=c.window_rank)
    log.info("Starting measure independence sweep", intervals=len(c.index), atoms=c.atom_count)
    independence = SweepBudget("measure-independence", max_failures)
    for i, I in enumerate(c.index):
        for J in c.index[i:]:
            independence.check(_independence_counterexample, c, I, J)
    shift = SweepBudget("measure-shift", max_failures)
    for letter in LETTERS:
        for I, image in c.shift_interval_map(letter).items():
            shift.check(_shift_counterexample, c, letter, I, image)
    report = MeasureReport(c.window_rank, len(c.coords), c.atom_count,
                           independence.summary(), shift.summary(), str(c.total_mass()))
    log.info("Measure independence sweep finished", passed=report.passed, **report.counts())
    return report
