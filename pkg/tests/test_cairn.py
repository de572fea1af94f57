#!/usr/bin/env python3
"""
Tests for the graded, coordinate and product-measure cairn models
"""

import os
import sys
from fractions import Fraction

import numpy as np
import pytest

# Add the parent directory to the path so we can import our module
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from library.cairn import (
    CoordinateCairn,
    GradedCairn,
    ProductMeasureCairn,
    build_graded,
    build_measure_cairn,
    shift_interval_map,
    subspace_of,
    verify_cairn,
    verify_measure_independence,
)
from library.errors import OutOfWindowError, ResourceLimitError
from library.freegroup import Letter, Word
from library.hilbert import contains, subspace_equal
from library.intervals import EMPTY, IntervalSystem, parse_interval_literal


@pytest.fixture(scope="module")
def system():
    return IntervalSystem(cap=8)


@pytest.fixture(scope="module")
def graded3(system):
    return build_graded(3, system)


class TestGradedCairn:
    """One block per subinterval of the window"""

    def test_ambient_dimension(self, system, graded3):
        assert graded3.ambient_dim == 13
        assert build_graded(4, system).ambient_dim == 21

    def test_block_dims(self, system):
        top = system.base_interval(2)
        dims = {J: 2 for J in system.subintervals(top)}
        c = GradedCairn(2, system, block_dims=dims)
        assert c.ambient_dim == 12
        assert subspace_of(c, top).dim == 12

    def test_subspace_dimension_counts_blocks(self, system, graded3):
        I2 = system.base_interval(2)
        assert subspace_of(graded3, I2).dim == len(system.subintervals(I2))
        assert subspace_of(graded3, EMPTY).dim == 0

    def test_inclusion(self, system, graded3):
        small = parse_interval_literal("I1", system)
        big = parse_interval_literal("I3", system)
        assert contains(subspace_of(graded3, big), subspace_of(graded3, small))

    def test_shift_maps_subspaces(self, system, graded3):
        I2 = system.base_interval(2)
        mapping = shift_interval_map(graded3, Letter.B)
        image = mapping[I2]
        assert image.label() == "b*I2"
        assert subspace_equal(graded3.apply_shift(Letter.B, subspace_of(graded3, I2)),
                              subspace_of(graded3, image))

    def test_shift_map_stays_in_window(self, graded3):
        for letter in Letter:
            for source, target in graded3.shift_interval_map(letter).items():
                assert graded3.in_window(source) and graded3.in_window(target)

    def test_out_of_window(self, system, graded3):
        with pytest.raises(OutOfWindowError):
            graded3.subspace_of(system.base_interval(4))

    def test_window_cap(self):
        with pytest.raises(ResourceLimitError):
            build_graded(99, IntervalSystem(cap=14))

    def test_ambient_cap(self, system):
        with pytest.raises(ResourceLimitError):
            build_graded(4, system, max_ambient_dim=10)

    @pytest.mark.parametrize("seed", [0, 7])
    def test_verify_passes(self, system, seed):
        report = verify_cairn(build_graded(4, system, seed=seed))
        assert report.passed, [c.to_dict() for c in report.violations][:5]
        counts = report.counts()
        assert counts["failed_checks"] == 0
        assert {c.kind for c in report.checks} == {
            "orthogonality", "inclusion", "shift", "independent_family", "join_exhausts_window",
        }

    def test_workers_agree(self, system):
        c = build_graded(3, system, seed=5)
        serial = verify_cairn(c).to_dict()
        threaded = verify_cairn(c, workers=4).to_dict()
        assert serial == threaded

    def test_overlapping_blocks_are_caught(self, system):
        c = build_graded(2, system)
        singleton = system.base_interval(0)
        neighbour = system.translate(Word("a"), singleton)
        bad = c.with_block_override(singleton, c.block_vector(singleton) + c.block_vector(neighbour))
        report = verify_cairn(bad)
        assert not report.passed
        assert any(check.kind == "orthogonality" for check in report.violations)
        assert verify_cairn(c).passed

    def test_report_dict(self, graded3):
        data = verify_cairn(graded3).to_dict()
        assert data["model"] == "graded"
        assert data["window_rank"] == 3
        assert all("pass" in check for check in data["checks"])


class TestCoordinateCairn:
    """Coordinate subspaces of l2 over a window"""

    def test_base_window(self, system):
        c = CoordinateCairn.from_base_interval(3, system)
        assert c.ambient_dim == 6
        assert verify_cairn(c).passed

    def test_ball_window(self, system):
        c = CoordinateCairn.from_ball(2, system)
        assert c.ambient_dim == 17
        report = verify_cairn(c)
        assert report.passed

    def test_fiber(self, system):
        c = CoordinateCairn.from_base_interval(2, system, fiber_dim=3)
        assert c.ambient_dim == 9
        assert subspace_of(c, system.base_interval(1)).dim == 6
        assert verify_cairn(c).passed

    def test_shift_is_partial_permutation(self, system):
        c = CoordinateCairn.from_base_interval(3, system)
        S = c.shift_operator(Letter.A)
        assert set(np.unique(S.real)) <= {0.0, 1.0}
        assert (S.sum(axis=0) <= 1).all()

    def test_basis_freeness(self, system):
        c = CoordinateCairn.from_base_interval(3, system)
        assert c.basis_freeness(radius=2)["passed"]

    def test_ambient_cap(self, system):
        with pytest.raises(ResourceLimitError):
            CoordinateCairn.from_ball(3, system, max_ambient_dim=20)


class TestProductMeasureCairn:
    """Independent coins over the window, exact arithmetic"""

    def test_exact_probabilities(self, system):
        c = build_measure_cairn(2, system)
        assert c.atom_count == 8
        assert c.total_mass() == 1
        assert c.atom_probability((0, 1, 0)) == Fraction(1, 8)
        assert c.probability([0], [1]) == Fraction(1, 2)

    def test_verify_passes(self, system):
        report = verify_measure_independence(build_measure_cairn(3, system))
        assert report.passed, report.to_dict()
        data = report.to_dict()
        assert data["exact"] is True
        assert data["total_mass"] == "1"
        assert data["failed_checks"] == 0

    @pytest.mark.slow
    def test_window_four(self, system):
        c = build_measure_cairn(4, system)
        assert c.atom_count == 512
        assert verify_measure_independence(c).passed

    def test_coupled_coordinates_fail(self, system):
        c = build_measure_cairn(2, system).with_coupled_coordinates(Word("a"), Word("A"))
        report = verify_measure_independence(c)
        assert not report.passed
        failure = report.independence["failures"][0]
        assert failure["kind"] == "independence"

    def test_coordinate_cap(self, system):
        with pytest.raises(ResourceLimitError):
            build_measure_cairn(4, system, max_coords=8)

    def test_rejects_bad_weights(self, system):
        with pytest.raises(ValueError):
            ProductMeasureCairn([Word(), Word("a")], system, weights=np.zeros((2, 2)))

    def test_algebra_of_translate(self, system):
        c = build_measure_cairn(3, system)
        interval = parse_interval_literal("b*I2", system)
        assert {str(c.coords[a]) for a in c.algebra_of(interval)} == {"b", "bA", "ba"}
