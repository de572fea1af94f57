#!/usr/bin/env python3
"""
Tests for the level decomposition, its certificate and the displacement bound
"""

import math
import os
import sys
from dataclasses import replace

import numpy as np
import pytest

# Add the parent directory to the path so we can import our module
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from library.cairn import CoordinateCairn, build_graded
from library.errors import DecompositionError, OutOfWindowError
from library.freegroup import Word
from library.intervals import IntervalSystem
from library.repsplit import (
    certify_regular_multiple,
    decompose,
    displacement_bound,
    displacement_sweep,
    level_space,
    reduced_block,
    verify_translate_orthogonality,
)


@pytest.fixture(scope="module")
def system():
    return IntervalSystem(cap=8)


@pytest.fixture(scope="module")
def graded3(system):
    return build_graded(3, system, seed=2)


@pytest.fixture
def overlapping(system):
    """Graded model whose singleton blocks at e and a overlap"""
    c = build_graded(2, system)
    singleton = system.base_interval(0)
    neighbour = system.translate(Word("a"), singleton)
    return c.with_block_override(singleton, c.block_vector(singleton) + c.block_vector(neighbour))


class TestLevelSpaces:
    """E_n and reduced blocks"""

    def test_bottom_and_top(self, graded3):
        assert level_space(graded3, -1).dim == 0
        assert level_space(graded3, 3).dim == graded3.ambient_dim

    def test_levels_grow(self, graded3):
        dims = [level_space(graded3, n).dim for n in range(-1, 4)]
        assert dims == [0, 6, 10, 12, 13]

    def test_reduced_block_is_one_block(self, system, graded3):
        for interval in graded3.index:
            assert reduced_block(graded3, interval).dim == 1

    def test_reduced_block_outside_window(self, system, graded3):
        with pytest.raises(OutOfWindowError):
            reduced_block(graded3, system.base_interval(4))

    def test_rejects_low_level(self, graded3):
        with pytest.raises(ValueError):
            level_space(graded3, -2)


class TestDecompose:
    """Orthogonal splitting into levels and blocks"""

    def test_window_three_levels(self, graded3):
        d = decompose(graded3)
        assert d.block_counts == [6, 4, 2, 1]
        assert d.level_dims == [6, 4, 2, 1]
        assert sum(d.level_dims) == graded3.ambient_dim
        assert d.completeness_residual <= 1e-8
        assert d.cross_level_residual <= 1e-9
        assert d.valid

    def test_window_four(self, system):
        d = decompose(build_graded(4, system, seed=9))
        assert d.block_counts == [9, 6, 3, 2, 1]
        assert all(level.worst_orthogonality_residual <= 1e-9 for level in d.levels)

    def test_rotation_keeps_level_dims(self, system):
        model = build_graded(4, system, seed=5)
        assert not np.allclose(model.rotation, np.eye(model.ambient_dim))
        plain = decompose(build_graded(4, system))
        rotated = decompose(model)
        assert rotated.level_dims == plain.level_dims == [9, 6, 3, 2, 1]
        assert rotated.block_counts == plain.block_counts

    def test_workers_agree(self, graded3):
        assert decompose(graded3).to_dict() == decompose(graded3, workers=3).to_dict()

    def test_coordinate_model(self, system):
        c = CoordinateCairn.from_base_interval(3, system)
        d = decompose(c)
        assert d.level_dims == [6, 0, 0, 0]
        assert d.valid

    def test_csv(self, graded3):
        lines = decompose(graded3).to_csv().splitlines()
        assert lines[0] == "n,dim,block_count"
        assert lines[1:] == ["0,6,6", "1,4,4", "2,2,2", "3,1,1"]

    def test_strict_raises_with_worst(self, overlapping):
        with pytest.raises(DecompositionError) as excinfo:
            decompose(overlapping)
        assert excinfo.value.worst["residual"] > 1e-8

    def test_lenient_records(self, overlapping):
        d = decompose(overlapping, strict=False)
        assert not d.valid
        assert d.worst()["check"] in {"within_level_orthogonality", "completeness", "level_difference",
                                      "dimension_sum", "cross_level_orthogonality"}

    def test_orthogonality_has_its_own_tolerance(self, graded3):
        d = decompose(graded3)
        assert d.orthogonality_tol == 1e-9
        assert d.limit("within_level_orthogonality") == 1e-9
        assert d.limit("completeness") == d.tol == 1e-8
        overlap = replace(d, cross_level_residual=5e-9)
        assert not overlap.valid
        assert overlap.offender()["check"] == "cross_level_orthogonality"
        assert replace(d, completeness_residual=5e-9).valid
        assert replace(d, cross_level_residual=5e-9, orthogonality_tol=1e-8).valid

    def test_translate_orthogonality(self, graded3):
        result = verify_translate_orthogonality(graded3)
        assert result["passed"]
        assert result["checked"] > 0


class TestCertificate:
    """Blocks permuted by shifts, free transitive index action"""

    @pytest.mark.parametrize("window", [3, 4])
    def test_valid(self, system, window):
        d = decompose(build_graded(window, system, seed=4))
        certificate = certify_regular_multiple(d)
        assert certificate.valid, certificate.witnesses
        data = certificate.to_dict()
        assert data["scope"] == "windowed"
        assert all(stab == ["e"] for stab in data["stabilizers"].values())

    def test_orbits_cover_translates(self, graded3):
        certificate = certify_regular_multiple(decompose(graded3))
        for level in certificate.levels:
            assert level.reachable == level.translates

    def test_invalid_decomposition_invalidates(self, overlapping):
        certificate = certify_regular_multiple(decompose(overlapping, strict=False))
        assert not certificate.valid
        assert certificate.witnesses[0]["check"] == "decomposition"


class TestDisplacement:
    """λ_min(4 Id - A_R) against 4 - 2√3"""

    def test_star(self):
        result = displacement_bound(1)
        assert result.min_eig == pytest.approx(2.0, abs=1e-9)
        assert result.passed
        assert result.identity_residual < 1e-10
        assert result.to_dict()["pass"] is True

    def test_radius_zero(self):
        result = displacement_bound(0)
        assert result.min_eig == pytest.approx(4.0)
        assert result.identity_samples == 0

    def test_sweep_decreasing_to_floor(self):
        results = displacement_sweep(5)
        values = [r.min_eig for r in results]
        assert values == sorted(values, reverse=True)
        assert all(v >= 4 - 2 * math.sqrt(3) - 1e-9 for v in values)
        assert all(r.passed for r in results)
