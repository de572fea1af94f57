#!/usr/bin/env python3
"""
Cairn-Check: Finite-Dimensional Hilbert Subspaces
Subspaces of C^d carried as orthonormal frames (columns), with projections,
joins, orthogonal differences and orthogonality relative to a subspace:

    H0 ⊥_{H1} H2  iff  the projections of H0 onto join(H1, H2) and onto H1 agree.

Also a randomized suite instantiating the independence axioms for this
relation.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import structlog
from scipy.stats import unitary_group

from library.errors import ConsistencyError, DimensionMismatchError

logger = structlog.get_logger(__name__)

CONSTRUCTION_TOL = 1e-10
RELATION_TOL = 1e-9
DECOMPOSITION_TOL = 1e-8
DROP_TOL = 1e-10

VectorLike = Union[np.ndarray, Sequence[complex]]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Orthonormal frame of shape (ambient_dim, dim); an empty frame is {0}"""
    frame: np.ndarray

    def __post_init__(self):
        frame = np.asarray(self.frame, dtype=complex)
        if frame.ndim != 2:
            raise ValueError(f"frame must be two-dimensional, got shape {frame.shape}")
        if frame.shape[1] > frame.shape[0]:
            raise ConsistencyError(f"frame has {frame.shape[1]} vectors in dimension {frame.shape[0]}")
        object.__setattr__(self, "frame", frame)
        residual = self.gram_residual()
        if residual > CONSTRUCTION_TOL:
            raise ConsistencyError(f"frame is not orthonormal (Gram residual {residual:.3e})")

    @classmethod
    def trivial(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0), dtype=complex))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim, dtype=complex))

    @classmethod
    def coordinate(cls, ambient_dim: int, indices: Iterable[int]) -> "Subspace":
        frame = np.eye(ambient_dim, dtype=complex)[:, sorted(set(indices))]
        return cls(frame)

    @property
    def ambient_dim(self) -> int:
        return self.frame.shape[0]

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @property
    def is_trivial(self) -> bool:
        return self.dim == 0

    def gram_residual(self) -> float:
        if self.dim == 0:
            return 0.0
        gram = self.frame.conj().T @ self.frame
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.conj().T

    def to_json(self) -> List[List[List[float]]]:
        """Columns as lists of [re, im] pairs; debug dumps only"""
        return [[[float(z.real), float(z.imag)] for z in column] for column in self.frame.T]

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def _as_columns(vectors: Union[np.ndarray, Iterable[VectorLike]], ambient_dim: Optional[int]) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        columns = vectors.astype(complex)
    else:
        items = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
        if not items:
            if ambient_dim is None:
                raise ValueError("ambient_dim is required for an empty vector list")
            return np.zeros((ambient_dim, 0), dtype=complex)
        sizes = {v.shape[0] for v in items}
        if len(sizes) > 1:
            first = items[0].shape[0]
            raise DimensionMismatchError(first, next(s for s in sizes if s != first))
        columns = np.column_stack(items)
    if ambient_dim is not None and columns.shape[0] != ambient_dim:
        raise DimensionMismatchError(ambient_dim, columns.shape[0])
    return columns


def _gram_schmidt(initial: np.ndarray, columns: np.ndarray, drop_tol: float) -> np.ndarray:
    """Extend an orthonormal ``initial`` frame by ``columns``, two passes per vector"""
    d = initial.shape[0]
    basis = np.zeros((d, min(d, initial.shape[1] + columns.shape[1])), dtype=complex)
    k = initial.shape[1]
    basis[:, :k] = initial
    for j in range(columns.shape[1]):
        if k == d:
            break
        w = columns[:, j].copy()
        for _ in range(2):
            q = basis[:, :k]
            w -= q @ (q.conj().T @ w)
        norm = np.linalg.norm(w)
        if norm <= drop_tol:
            continue
        basis[:, k] = w / norm
        k += 1
    return basis[:, :k]


def orthonormalize(vectors: Union[np.ndarray, Iterable[VectorLike]],
                   ambient_dim: Optional[int] = None,
                   drop_tol: float = DROP_TOL) -> Subspace:
    """Orthonormal frame for the span of ``vectors`` (a list or the columns of a matrix)"""
    columns = _as_columns(vectors, ambient_dim)
    empty = np.zeros((columns.shape[0], 0), dtype=complex)
    return Subspace(_gram_schmidt(empty, columns, drop_tol))


span = orthonormalize


def _check_dims(*spaces: Subspace) -> int:
    d = spaces[0].ambient_dim
    for s in spaces[1:]:
        if s.ambient_dim != d:
            raise DimensionMismatchError(d, s.ambient_dim)
    return d


def project(v: VectorLike, S: Subspace) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != S.ambient_dim:
        raise DimensionMismatchError(S.ambient_dim, v.shape[0])
    return S.frame @ (S.frame.conj().T @ v)


def join(S1: Subspace, S2: Subspace) -> Subspace:
    _check_dims(S1, S2)
    if S2.dim == 0:
        return S1
    if S1.dim == 0:
        return S2
    return Subspace(_gram_schmidt(S1.frame, S2.frame, DROP_TOL))


def join_all(spaces: Iterable[Subspace], ambient_dim: int) -> Subspace:
    frames = [s.frame for s in spaces if s.dim]
    if not frames:
        return Subspace.trivial(ambient_dim)
    return orthonormalize(np.hstack(frames), ambient_dim)


def ominus(S2: Subspace, S1: Subspace) -> Subspace:
    """Projection of S2 onto the orthogonal complement of S1"""
    _check_dims(S1, S2)
    residuals = S2.frame - project(S2.frame, S1)
    return orthonormalize(residuals, S2.ambient_dim)


def complement(S: Subspace) -> Subspace:
    if S.dim == 0:
        return Subspace.full(S.ambient_dim)
    if S.dim == S.ambient_dim:
        return Subspace.trivial(S.ambient_dim)
    return Subspace(scipy.linalg.null_space(S.frame.conj().T))


def intersection(S1: Subspace, S2: Subspace) -> Subspace:
    """S1 ∩ S2 as the complement of the join of complements"""
    _check_dims(S1, S2)
    return complement(join(complement(S1), complement(S2)))


def containment_residual(inner: Subspace, outer: Subspace) -> float:
    """Largest distance from a frame vector of ``inner`` to ``outer``"""
    _check_dims(inner, outer)
    if inner.dim == 0:
        return 0.0
    residual = inner.frame - project(inner.frame, outer)
    return float(np.max(np.linalg.norm(residual, axis=0)))


def contains(outer: Subspace, inner: Subspace, tol: float = RELATION_TOL) -> bool:
    return containment_residual(inner, outer) <= tol


def subspace_distance(S1: Subspace, S2: Subspace) -> float:
    """Mutual projection residual; zero exactly when S1 = S2"""
    if S1.dim != S2.dim:
        return max(1.0, containment_residual(S1, S2), containment_residual(S2, S1))
    return max(containment_residual(S1, S2), containment_residual(S2, S1))


def subspace_equal(S1: Subspace, S2: Subspace, tol: float = RELATION_TOL) -> bool:
    return subspace_distance(S1, S2) <= tol


def rel_orth_residual(H0: Subspace, H1: Subspace, H2: Subspace) -> float:
    """max over frame vectors f of H0 of |proj_{H1 H2} f - proj_{H1} f|"""
    _check_dims(H0, H1, H2)
    if H0.dim == 0:
        return 0.0
    joined = join(H1, H2)
    diff = project(H0.frame, joined) - project(H0.frame, H1)
    return float(np.max(np.linalg.norm(diff, axis=0)))


def rel_orth(H0: Subspace, H1: Subspace, H2: Subspace, tol: float = RELATION_TOL) -> bool:
    return rel_orth_residual(H0, H1, H2) <= tol


def apply_unitary(S: Subspace, U: np.ndarray) -> Subspace:
    if U.shape != (S.ambient_dim, S.ambient_dim):
        raise DimensionMismatchError(S.ambient_dim, U.shape[0])
    return Subspace(U @ S.frame)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(dim, random_state=rng)


def random_vectors(ambient_dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((ambient_dim, count)) + 1j * rng.standard_normal((ambient_dim, count))


def random_subspace(ambient_dim: int, dim: int, rng: np.random.Generator) -> Subspace:
    return orthonormalize(random_vectors(ambient_dim, dim, rng), ambient_dim)


def random_subspace_of(S: Subspace, dim: int, rng: np.random.Generator) -> Subspace:
    """A random subspace of S of dimension at most ``dim``"""
    dim = min(dim, S.dim)
    if dim == 0:
        return Subspace.trivial(S.ambient_dim)
    coefficients = random_vectors(S.dim, dim, rng)
    return orthonormalize(S.frame @ coefficients, S.ambient_dim)


# -- independence axioms -------------------------------------------------------

def existence_witness(H0: Subspace, H1: Subspace, H2: Subspace) -> Optional[Subspace]:
    """
    A copy H0' of H0 over H1 with H0' ⊥_{H1} H2, or None if there is no room.

    Each frame vector a of H0 is sent to proj_{H1} a + V(a - proj_{H1} a), where
    V is an isometry from H0 ⊖ H1 into the complement of join(H1, H2). Gram data
    and inner products against H1 are preserved.
    """
    _check_dims(H0, H1, H2)
    moving = ominus(H0, H1)
    room = complement(join(H1, H2))
    if moving.dim > room.dim:
        return None
    isometry = room.frame[:, :moving.dim] @ moving.frame.conj().T
    fixed = project(H0.frame, H1)
    images = fixed + isometry @ (H0.frame - fixed)
    return Subspace(images)


@dataclass
class AxiomTally:
    instances: int = 0
    applicable: int = 0
    violations: int = 0
    witnesses: List[Dict[str, Any]] = field(default_factory=list)

    def record(self, applicable: bool, holds: bool, witness: Dict[str, Any], keep: int = 10) -> None:
        self.instances += 1
        if not applicable:
            return
        self.applicable += 1
        if not holds:
            self.violations += 1
            if len(self.witnesses) < keep:
                self.witnesses.append(witness)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "instances": self.instances,
            "applicable": self.applicable,
            "violations": self.violations,
            "witnesses": self.witnesses,
        }


@dataclass
class AxiomReport:
    trials: int
    dim: int
    seed: int
    tol: float
    axioms: Dict[str, AxiomTally] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(t.violations == 0 for t in self.axioms.values())

    @property
    def total_checks(self) -> int:
        return sum(t.applicable for t in self.axioms.values())

    @property
    def failed_checks(self) -> int:
        return sum(t.violations for t in self.axioms.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trials": self.trials,
            "dim": self.dim,
            "seed": self.seed,
            "tol": self.tol,
            "passed": self.passed,
            "axioms": {name: tally.to_dict() for name, tally in self.axioms.items()},
        }


AXIOMS = ("monotonicity", "transitivity", "weak_symmetry", "anti_reflexivity",
          "triviality", "equivalence", "invariance", "existence")


def check_monotonicity(H0, H1, H2, H0_small, H2_small, tol=RELATION_TOL):
    """(applicable, holds): shrinking H0 and H2 preserves the relation"""
    if not rel_orth(H0, H1, H2, tol):
        return False, True
    return True, rel_orth(H0_small, H1, H2_small, tol)


def check_transitivity(H0, H1, H2, H2_big, tol=RELATION_TOL):
    """With H1 ⊆ H2 ⊆ H2': H0 ⊥_{H1} H2' iff H0 ⊥_{H1} H2 and H0 ⊥_{H2} H2'"""
    left = rel_orth(H0, H1, H2_big, tol)
    right = rel_orth(H0, H1, H2, tol) and rel_orth(H0, H2, H2_big, tol)
    return True, left == right


def check_weak_symmetry(H0, H1, H2, tol=RELATION_TOL):
    """With H1 ⊆ H0 ∩ H2: H0 ⊥_{H1} H2 implies H2 ⊥_{H1} H0"""
    if not rel_orth(H0, H1, H2, tol):
        return False, True
    return True, rel_orth(H2, H1, H0, tol)


def check_anti_reflexivity(H0, H1, H2, tol=RELATION_TOL):
    """With H1 ⊆ H2: H0 ⊥_{H1} H2 implies H0 ∩ H2 ⊆ H1"""
    if not rel_orth(H0, H1, H2, tol):
        return False, True
    return True, contains(H1, intersection(H0, H2), tol)


def check_triviality(H0, H1, H2, tol=RELATION_TOL):
    """The relation holds iff it holds between every pair of frame vectors"""
    vectorwise = all(
        rel_orth(Subspace(H0.frame[:, [i]]), H1, Subspace(H2.frame[:, [j]]), tol)
        for i in range(H0.dim) for j in range(H2.dim)
    )
    whole = rel_orth(H0, H1, H2, tol)
    return True, whole == vectorwise


def equivalence_sides(H0, H1, H2, tol=RELATION_TOL) -> Tuple[bool, bool]:
    """(H0 ⊥_{H1} H2, H0 ⊖ H1 ⊥ H2 ⊖ H1)"""
    zero = Subspace.trivial(_check_dims(H0, H1, H2))
    return rel_orth(H0, H1, H2, tol), rel_orth(ominus(H0, H1), zero, ominus(H2, H1), tol)


def check_equivalence(H0, H1, H2, tol=RELATION_TOL):
    left, right = equivalence_sides(H0, H1, H2, tol)
    return True, left == right


def check_invariance(H0, H1, H2, U, tol=RELATION_TOL):
    before = rel_orth(H0, H1, H2, tol)
    after = rel_orth(apply_unitary(H0, U), apply_unitary(H1, U), apply_unitary(H2, U), tol)
    return True, before == after


def check_existence(H0, H1, H2, tol=RELATION_TOL):
    """A copy of H0 over H1 independent from H2 exists whenever there is room"""
    witness = existence_witness(H0, H1, H2)
    if witness is None:
        return False, True
    same_gram = np.allclose(witness.frame.conj().T @ witness.frame,
                            H0.frame.conj().T @ H0.frame, atol=tol)
    same_over_base = np.allclose(H1.frame.conj().T @ witness.frame,
                                 H1.frame.conj().T @ H0.frame, atol=tol)
    return True, bool(same_gram and same_over_base and rel_orth(witness, H1, H2, tol))


def _instance(rng: np.random.Generator, dim: int):
    """
    A random triple built from disjoint blocks of a random orthonormal basis:
    K spans H1, H0 mixes K with block A, H2 mixes K with block B. The relation
    holds by construction unless the instance is tilted toward B.
    """
    U = random_unitary(dim, rng)
    k = int(rng.integers(0, 3))
    a = int(rng.integers(1, 4))
    b = int(rng.integers(1, 4))
    K, A, B = U[:, :k], U[:, k:k + a], U[:, k + a:k + a + b]
    rest = U[:, k + a + b:]
    H1 = Subspace(K)
    H0_vectors = A + K @ random_vectors(k, a, rng) if k else A.copy()
    H2_vectors = B + K @ random_vectors(k, b, rng) if k else B.copy()
    tilted = bool(rng.random() < 0.3)
    if tilted:
        H0_vectors[:, 0] += 0.5 * B[:, 0]
    return {
        "H0": orthonormalize(H0_vectors, dim),
        "H1": H1,
        "H2": orthonormalize(H2_vectors, dim),
        "A": A, "B": B, "K": K, "rest": rest,
        "tilted": tilted,
    }


def check_independence_axioms(trials: int, dim: int, seed: int = 0,
                              tol: float = DECOMPOSITION_TOL) -> AxiomReport:
    """Randomized property report for the axioms of relative orthogonality"""
    if dim < 8:
        raise ValueError("axiom suite needs dim >= 8 to fit its block instances")
    rng = np.random.default_rng(seed)
    report = AxiomReport(trials, dim, seed, tol, {name: AxiomTally() for name in AXIOMS})
    tallies = report.axioms
    log = logger.bind(trials=trials, dim=dim, seed=seed)
    log.info("Starting independence axiom suite")

    for trial in range(trials):
        inst = _instance(rng, dim)
        H0, H1, H2 = inst["H0"], inst["H1"], inst["H2"]
        witness = {"trial": trial, "tilted": inst["tilted"], "dims": [H0.dim, H1.dim, H2.dim]}

        small0 = random_subspace_of(H0, max(1, H0.dim - 1), rng)
        small2 = random_subspace_of(H2, max(1, H2.dim - 1), rng)
        tallies["monotonicity"].record(*check_monotonicity(H0, H1, H2, small0, small2, tol), witness)

        # Nested H1 ⊆ H2n ⊆ H2b, each step drawn from B or from a random direction
        step = inst["B"][:, :1] if rng.random() < 0.5 else random_vectors(dim, 1, rng)
        H2n = join(H1, orthonormalize(step, dim))
        extra = inst["B"][:, 1:2] if rng.random() < 0.5 and inst["B"].shape[1] > 1 else random_vectors(dim, 1, rng)
        H2b = join(H2n, orthonormalize(extra, dim))
        tallies["transitivity"].record(*check_transitivity(H0, H1, H2n, H2b, tol), witness)

        # H1 ⊆ H0s ∩ H2s
        H0s = join(H1, H0)
        H2s = join(H1, H2)
        tallies["weak_symmetry"].record(*check_weak_symmetry(H0s, H1, H2s, tol), witness)

        # H1 ⊆ H2s; H0 sometimes shares a vector of H1 so the intersection is nontrivial
        H0a = join(H0, random_subspace_of(H1, 1, rng)) if H1.dim and rng.random() < 0.5 else H0
        tallies["anti_reflexivity"].record(*check_anti_reflexivity(H0a, H1, H2s, tol), witness)

        if H0.dim <= 4 and H2.dim <= 4:
            tallies["triviality"].record(*check_triviality(H0, H1, H2, tol), witness)

        left, right = equivalence_sides(H0, H1, H2, tol)
        tallies["equivalence"].record(True, left == right, {**witness, "relative": left, "differences": right})

        U = random_unitary(dim, rng)
        tallies["invariance"].record(*check_invariance(H0, H1, H2, U, tol), witness)
        tallies["existence"].record(*check_existence(H0, H1, H2, tol), witness)

    log.info("Independence axiom suite finished", passed=report.passed,
             violations=report.failed_checks)
    return report
