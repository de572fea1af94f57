#!/usr/bin/env python3
"""
Cairn-Check: Spectra of Cayley Balls
The adjacency operator A = λ_a + λ_A + λ_b + λ_B compressed to ball(R) of the
4-regular tree, its top eigenvalue, the convergence table toward the Kesten
norm 2√3, and the Kazhdan constant η = √(2 - √3).

Features:
- Sparse CSR adjacency in shortlex node order, edge-list dumps
- Top eigenvalue through ARPACK's implicitly restarted Lanczos (scipy),
  accepted only when the residual |Av - λv| meets the tolerance
- Exact radial oracle and dense oracle for cross-checks
- Averaging identity and minimax displacement search for interior vectors
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
import scipy.linalg
import scipy.sparse as sp
import structlog
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from library.errors import ConsistencyError, ConvergenceError, ResourceLimitError
from library.freegroup import GENERATORS, LETTERS, Letter, Word, iter_ball
from library.resilience import retry_with_reseed

logger = structlog.get_logger(__name__)

DEFAULT_SPECTRAL_CAP = 12
KESTEN_NORM = 2.0 * math.sqrt(3.0)
ETA_SQUARED = 2.0 - math.sqrt(3.0)
ETA = math.sqrt(ETA_SQUARED)
DISPLACEMENT_FLOOR = 4.0 - KESTEN_NORM
DENSE_LIMIT = 64
GAP_CHECK_RADIUS = 10
# 2√3 - λ_max(A_10) from the radial oracle is 0.10232
MAX_GAP_AT_10 = 0.11


@dataclass(frozen=True)
class KazhdanConstant:
    eta: float
    eta_squared: float
    kesten_norm: float

    def to_dict(self) -> Dict[str, float]:
        return {"eta": self.eta, "eta_squared": self.eta_squared, "kesten_norm": self.kesten_norm}


def kazhdan_eta() -> KazhdanConstant:
    constant = KazhdanConstant(ETA, ETA_SQUARED, KESTEN_NORM)
    if abs(constant.eta_squared + constant.kesten_norm / 2.0 - 2.0) > 1e-12:
        raise ConsistencyError("eta^2 + kesten_norm/2 != 2")
    if abs(constant.eta ** 2 - constant.eta_squared) > 1e-12:
        raise ConsistencyError("eta^2 != 2 - sqrt(3)")
    return constant


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Adjacency of ball(radius) with the partial left translations that build it"""
    radius: int
    nodes: Tuple[Word, ...]
    matrix: sp.csr_matrix
    translations: Dict[Letter, Tuple[np.ndarray, np.ndarray]]

    @property
    def dimension(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return int(self.matrix.nnz // 2)

    def degrees(self) -> np.ndarray:
        return np.diff(self.matrix.indptr)

    def neighbors(self, i: int) -> List[int]:
        return self.matrix.indices[self.matrix.indptr[i]:self.matrix.indptr[i + 1]].tolist()

    def interior_mask(self) -> np.ndarray:
        """Nodes of length < radius, where every neighbour lies inside the ball"""
        return np.array([len(w) < self.radius for w in self.nodes], dtype=bool)

    def to_edge_list(self) -> str:
        coo = sp.triu(self.matrix, k=1).tocoo()
        pairs = sorted(zip(coo.row.tolist(), coo.col.tolist()))
        return "".join(f"{self.nodes[u]} {self.nodes[v]}\n" for u, v in pairs)


def cayley_adjacency(radius: int, cap: int = DEFAULT_SPECTRAL_CAP) -> SparseOperator:
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    if radius > cap:
        raise ResourceLimitError("spectral radius", radius, cap)
    nodes = tuple(iter_ball(radius, cap=cap))
    texts = [w.text for w in nodes]
    position = {t: i for i, t in enumerate(texts)}
    translations = {}
    rows, cols = [], []
    for letter in LETTERS:
        ch, undo = letter.value, letter.value.swapcase()
        src, dst = [], []
        for i, t in enumerate(texts):
            target = t[1:] if t[:1] == undo else ch + t
            j = position.get(target)
            if j is not None:
                src.append(i)
                dst.append(j)
        translations[letter] = (np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64))
        rows.extend(dst)
        cols.extend(src)
    n = len(nodes)
    matrix = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    op = SparseOperator(radius, nodes, matrix, translations)
    logger.debug("Built Cayley ball adjacency", radius=radius, dimension=n, edges=op.edge_count)
    return op


def cayley_graph(radius: int, cap: int = DEFAULT_SPECTRAL_CAP) -> nx.Graph:
    """The same ball as a networkx graph with letter-labelled edges"""
    op = cayley_adjacency(radius, cap)
    graph = nx.Graph()
    graph.add_nodes_from(str(w) for w in op.nodes)
    for letter in GENERATORS:
        src, dst = op.translations[letter]
        graph.add_edges_from((str(op.nodes[i]), str(op.nodes[j]), {"letter": str(letter)})
                             for i, j in zip(src.tolist(), dst.tolist()))
    return graph


def dense_top_eigenvalue(radius: int) -> float:
    """Oracle: full dense eigensolve of the ball adjacency"""
    graph = cayley_graph(radius)
    if graph.number_of_nodes() == 1:
        return 0.0
    return float(scipy.linalg.eigvalsh(nx.to_numpy_array(graph))[-1])


def radial_top_eigenvalue(radius: int) -> float:
    """
    Exact oracle. The top eigenvector of a ball is radial, so λ_max equals the
    top eigenvalue of the tridiagonal matrix with off-diagonal (2, √3, ..., √3).
    """
    if radius == 0:
        return 0.0
    diagonal = np.zeros(radius + 1)
    off = np.full(radius, math.sqrt(3.0))
    off[0] = 2.0
    values = scipy.linalg.eigh_tridiagonal(diagonal, off, eigvals_only=True,
                                           select="i", select_range=(radius, radius))
    return float(values[0])


@retry_with_reseed(max_tries=3)
def top_eigenvalue(op: SparseOperator, tol: float = 1e-8, max_iter: int = 10000, seed: int = 0) -> float:
    """Largest eigenvalue of the symmetric operator, certified by its residual"""
    n = op.dimension
    matrix = op.matrix.astype(float)
    if n <= DENSE_LIMIT:
        return float(np.linalg.eigvalsh(matrix.toarray())[-1])
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    try:
        values, vectors = eigsh(matrix, k=1, which="LA", v0=v0, maxiter=max_iter, tol=0)
    except ArpackNoConvergence as e:
        residual = float("inf")
        if len(e.eigenvalues):
            v = e.eigenvectors[:, 0]
            residual = float(np.linalg.norm(matrix @ v - e.eigenvalues[0] * v))
        raise ConvergenceError("Lanczos iteration did not converge", residual) from e
    value = float(values[0])
    v = vectors[:, 0] / np.linalg.norm(vectors[:, 0])
    residual = float(np.linalg.norm(matrix @ v - value * v))
    if residual > tol:
        raise ConvergenceError("eigenvector residual above tolerance", residual)
    logger.debug("Top eigenvalue", radius=op.radius, dimension=n, value=value, residual=residual)
    return value


@dataclass(frozen=True)
class KestenRow:
    radius: int
    dimension: int
    lambda_max: float
    gap: float

    def to_dict(self) -> Dict[str, float]:
        return {"radius": self.radius, "dimension": self.dimension,
                "lambda_max": self.lambda_max, "gap": self.gap}


def kesten_report(max_radius: int, cap: int = DEFAULT_SPECTRAL_CAP, seed: int = 0,
                  tol: float = 1e-8) -> List[KestenRow]:
    """Rows for radius 1..max_radius (the single row radius 0 when max_radius is 0)"""
    if max_radius > cap:
        raise ResourceLimitError("spectral radius", max_radius, cap)
    rows = []
    for radius in range(min(1, max_radius), max_radius + 1):
        op = cayley_adjacency(radius, cap)
        value = top_eigenvalue(op, tol=tol, seed=seed)
        rows.append(KestenRow(radius, op.dimension, value, KESTEN_NORM - value))
        logger.info("Kesten row", radius=radius, dimension=op.dimension, lambda_max=value)
    return rows


def check_kesten_rows(rows: List[KestenRow], slack: float = 1e-9,
                      max_gap_at_10: float = MAX_GAP_AT_10) -> List[Dict[str, float]]:
    """
    Violations of: increasing in radius, below 2√3, positive gap, and the gap
    at radius 10 no larger than ``max_gap_at_10``
    """
    problems = []
    for previous, row in zip(rows, rows[1:]):
        if not row.lambda_max > previous.lambda_max:
            problems.append({"radius": row.radius, "reason": "not increasing"})
    for row in rows:
        if row.lambda_max > KESTEN_NORM + slack:
            problems.append({"radius": row.radius, "reason": "above Kesten norm"})
        if row.gap <= 0:
            problems.append({"radius": row.radius, "reason": "nonpositive gap"})
        if row.radius == GAP_CHECK_RADIUS and row.gap > max_gap_at_10:
            problems.append({"radius": row.radius, "reason": "gap above bound"})
    return problems


# -- displacement --------------------------------------------------------------------

def translate_vector(op: SparseOperator, letter: Letter, xi: np.ndarray) -> np.ndarray:
    """λ_l ξ restricted to the ball: δ_w -> δ_{lw}"""
    src, dst = op.translations[letter]
    out = np.zeros_like(xi)
    out[dst] = xi[src]
    return out


def _require_interior(op: SparseOperator, xi: np.ndarray) -> None:
    if np.any(xi[~op.interior_mask()] != 0):
        raise ValueError("vector must be supported on words shorter than the radius")


def displacement_identity(op: SparseOperator, xi: np.ndarray) -> Tuple[float, float]:
    """(Σ_{l∈{a,b}} |λ_l ξ - ξ|², 4|ξ|² - <Aξ, ξ>) for interior-supported ξ"""
    xi = np.asarray(xi)
    _require_interior(op, xi)
    lhs = sum(float(np.linalg.norm(translate_vector(op, letter, xi) - xi) ** 2) for letter in GENERATORS)
    rhs = 4.0 * float(np.vdot(xi, xi).real) - float(np.vdot(xi, op.matrix @ xi).real)
    return lhs, rhs


def random_interior_vector(op: SparseOperator, rng: np.random.Generator, complex_valued: bool = True) -> np.ndarray:
    mask = op.interior_mask()
    xi = np.zeros(op.dimension, dtype=complex if complex_valued else float)
    count = int(mask.sum())
    values = rng.standard_normal(count)
    if complex_valued:
        values = values + 1j * rng.standard_normal(count)
    xi[mask] = values
    return xi / np.linalg.norm(xi)


def max_displacement(op: SparseOperator, xi: np.ndarray) -> float:
    return max(float(np.linalg.norm(translate_vector(op, letter, xi) - xi)) for letter in GENERATORS)


@dataclass(frozen=True)
class MinimaxResult:
    radius: int
    restarts: int
    best: float
    eta: float

    @property
    def passed(self) -> bool:
        return self.best >= self.eta - 1e-3

    def to_dict(self) -> Dict[str, float]:
        return {"radius": self.radius, "restarts": self.restarts, "best_max_displacement": self.best,
                "eta": self.eta, "pass": self.passed}


def minimax_displacement(radius: int, restarts: int = 50, steps: int = 300, seed: int = 0,
                         op: Optional[SparseOperator] = None) -> MinimaxResult:
    """
    Projected subgradient search for an interior-supported real unit vector
    with small max_{l∈{a,b}} |λ_l ξ - ξ|. Returns the smallest value found.
    """
    op = op or cayley_adjacency(radius)
    if radius < 1:
        raise ValueError("minimax search needs radius >= 1 for a nonzero interior")
    rng = np.random.default_rng(seed)
    mask = op.interior_mask()
    n = op.dimension
    perms = {}
    for letter in GENERATORS:
        src, dst = op.translations[letter]
        perms[letter] = sp.coo_matrix((np.ones(len(src)), (dst, src)), shape=(n, n)).tocsr()
    symmetric = {letter: (p + p.T).tocsr() for letter, p in perms.items()}

    best = math.inf
    for _ in range(restarts):
        xi = random_interior_vector(op, rng, complex_valued=False)
        for step in range(steps):
            # |λξ - ξ|² = 2 - 2<Pξ, ξ> for unit real ξ
            values = {letter: 2.0 - 2.0 * float(xi @ (perms[letter] @ xi)) for letter in GENERATORS}
            worst = max(values, key=values.get)
            best = min(best, math.sqrt(max(values[worst], 0.0)))
            gradient = -2.0 * (symmetric[worst] @ xi)
            gradient[~mask] = 0.0
            xi = xi - (0.5 / math.sqrt(step + 1)) * gradient
            xi[~mask] = 0.0
            xi /= np.linalg.norm(xi)
        best = min(best, max_displacement(op, xi))
    result = MinimaxResult(radius, restarts, best, ETA)
    logger.info("Minimax displacement search", radius=radius, best=best, eta=ETA, passed=result.passed)
    return result
