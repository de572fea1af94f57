#!/usr/bin/env python3
"""
Tests for subspace arithmetic and orthogonality over a subspace
"""

import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the parent directory to the path so we can import our module
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from library.errors import ConsistencyError, DimensionMismatchError
from library.hilbert import (
    AXIOMS,
    Subspace,
    check_independence_axioms,
    check_equivalence,
    complement,
    contains,
    equivalence_sides,
    existence_witness,
    intersection,
    join,
    join_all,
    ominus,
    orthonormalize,
    project,
    random_subspace,
    random_unitary,
    random_vectors,
    rel_orth,
    rel_orth_residual,
    span,
    subspace_distance,
    subspace_equal,
)


def e(i, d=3):
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


class TestSubspace:
    """Frames and their invariants"""

    def test_non_orthonormal_frame_rejected(self):
        with pytest.raises(ConsistencyError):
            Subspace(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_trivial_and_full(self):
        assert Subspace.trivial(4).dim == 0
        assert Subspace.trivial(4).is_trivial
        assert Subspace.full(4).dim == 4
        assert Subspace.full(4).gram_residual() == 0.0

    def test_coordinate(self):
        S = Subspace.coordinate(5, [0, 3])
        assert S.dim == 2
        assert np.allclose(project(e(3, 5), S), e(3, 5))
        assert np.allclose(project(e(1, 5), S), 0)

    def test_span_drops_dependent_vectors(self):
        S = span([e(0), e(1), e(0) + e(1)])
        assert S.dim == 2
        assert S.gram_residual() < 1e-12

    def test_span_of_nothing_needs_dimension(self):
        with pytest.raises(ValueError):
            orthonormalize([])
        assert orthonormalize([], ambient_dim=3).dim == 0

    def test_mismatched_vectors(self):
        with pytest.raises(DimensionMismatchError):
            span([np.ones(3), np.ones(4)])

    def test_projector_is_idempotent(self, rng):
        S = random_subspace(6, 3, rng)
        P = S.projector()
        assert np.allclose(P @ P, P)
        assert np.allclose(P, P.conj().T)


class TestOperations:
    """Join, orthogonal difference, complement and intersection"""

    def test_join(self):
        S = join(span([e(0)]), span([e(1)]))
        assert S.dim == 2
        assert subspace_equal(S, Subspace.coordinate(3, [0, 1]))

    def test_join_all_empty(self):
        assert join_all([], 3).dim == 0

    def test_ominus(self):
        S = ominus(span([e(0), e(1)]), span([e(0) + e(1)]))
        assert S.dim == 1
        assert subspace_equal(S, span([e(0) - e(1)]))

    def test_ominus_of_contained_is_trivial(self):
        assert ominus(span([e(0)]), span([e(0), e(1)])).dim == 0

    def test_complement(self):
        C = complement(span([e(0), e(1)]))
        assert subspace_equal(C, span([e(2)]))
        assert complement(Subspace.trivial(3)).dim == 3
        assert complement(Subspace.full(3)).dim == 0

    def test_intersection(self):
        S = intersection(span([e(0), e(1)]), span([e(1), e(2)]))
        assert subspace_equal(S, span([e(1)]))

    def test_contains(self):
        assert contains(span([e(0), e(1)]), span([e(0) + e(1)]))
        assert not contains(span([e(0)]), span([e(1)]))

    def test_distance_for_different_dims(self):
        assert subspace_distance(span([e(0)]), span([e(0), e(1)])) >= 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            join(Subspace.trivial(3), Subspace.trivial(4))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_pythagoras(self, seed):
        rng = np.random.default_rng(seed)
        S = random_subspace(5, 2, rng)
        v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        p = project(v, S)
        assert np.isclose(np.linalg.norm(v) ** 2, np.linalg.norm(p) ** 2 + np.linalg.norm(v - p) ** 2)
        assert np.allclose(project(p, S), p)


class TestRelativeOrthogonality:
    """H0 ⊥_{H1} H2"""

    def test_positive_instance(self):
        H0, H1, H2 = span([e(0) + e(2)]), span([e(2)]), span([e(1), e(2)])
        assert rel_orth(H0, H1, H2)
        assert rel_orth_residual(H0, H1, H2) < 1e-12

    def test_negative_instance(self):
        H0, H1, H2 = span([e(0) + e(1)]), span([e(2)]), span([e(1)])
        assert not rel_orth(H0, H1, H2)
        assert rel_orth_residual(H0, H1, H2) == pytest.approx(1 / np.sqrt(2), abs=1e-9)

    def test_over_trivial_is_plain_orthogonality(self):
        zero = Subspace.trivial(3)
        assert rel_orth(span([e(0)]), zero, span([e(1)]))
        assert not rel_orth(span([e(0) + e(1)]), zero, span([e(1)]))

    def test_trivial_left_side(self):
        assert rel_orth(Subspace.trivial(3), span([e(2)]), span([e(0)]))

    def test_invariance_under_unitaries(self, rng):
        H0, H1, H2 = span([e(0) + e(2)]), span([e(2)]), span([e(1), e(2)])
        U = random_unitary(3, rng)
        moved = [Subspace(U @ S.frame) for S in (H0, H1, H2)]
        assert rel_orth(*moved)

    def test_existence_witness(self):
        d = 5
        H0 = span([e(0, d) + e(1, d)])
        H1 = span([e(0, d)])
        H2 = span([e(1, d)])
        assert not rel_orth(H0, H1, H2)
        witness = existence_witness(H0, H1, H2)
        assert witness is not None
        assert rel_orth(witness, H1, H2)
        assert np.allclose(H1.frame.conj().T @ witness.frame, H1.frame.conj().T @ H0.frame)

    def test_existence_without_room(self):
        H0 = span([e(0) + e(1)])
        assert existence_witness(H0, span([e(0)]), span([e(1), e(2)])) is None


class TestEquivalence:
    """H0 ⊥_{H1} H2 iff H0 ⊖ H1 ⊥ H2 ⊖ H1"""

    def test_both_sides_false(self):
        H0, H1, H2 = span([e(0) + e(1)]), span([e(2)]), span([e(1)])
        assert equivalence_sides(H0, H1, H2) == (False, False)
        assert check_equivalence(H0, H1, H2) == (True, True)

    def test_both_sides_true(self):
        H0, H1, H2 = span([e(0) + e(2)]), span([e(2)]), span([e(1), e(2)])
        assert equivalence_sides(H0, H1, H2) == (True, True)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.booleans())
    def test_random_triples_over_a_common_base(self, seed, independent):
        d = 10
        rng = np.random.default_rng(seed)
        U = random_unitary(d, rng)
        K, A, B = U[:, :2], U[:, 2:4], U[:, 4:7]
        H1 = Subspace(K)
        H0 = join(H1, orthonormalize(A + K @ random_vectors(2, 2, rng), d))
        if independent:
            H2 = join(H1, orthonormalize(B + K @ random_vectors(2, 3, rng), d))
        else:
            H2 = join(H1, random_subspace(d, 2, rng))
        assert contains(H0, H1) and contains(H2, H1)
        left, right = equivalence_sides(H0, H1, H2)
        assert left == right == independent


class TestAxiomSuite:
    """Randomized axiom report"""

    def test_small_run_passes(self):
        report = check_independence_axioms(trials=60, dim=10, seed=3)
        assert report.passed, report.to_dict()
        assert set(report.axioms) == set(AXIOMS)
        assert report.axioms["monotonicity"].applicable > 0
        assert report.axioms["equivalence"].applicable == 60
        assert report.total_checks > 0
        assert report.failed_checks == 0

    def test_deterministic(self):
        first = check_independence_axioms(trials=10, dim=8, seed=11).to_dict()
        second = check_independence_axioms(trials=10, dim=8, seed=11).to_dict()
        assert first == second

    def test_dimension_floor(self):
        with pytest.raises(ValueError):
            check_independence_axioms(trials=1, dim=4)

    @pytest.mark.slow
    def test_acceptance_scale(self):
        report = check_independence_axioms(trials=10000, dim=12, seed=0)
        assert report.passed
