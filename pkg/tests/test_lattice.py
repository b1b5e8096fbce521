import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from littlewood_lab.core.errors import ContractError, DimensionMismatchError, DomainError
from littlewood_lab.core.lattice import (
    DiagParam,
    IllConditionedError,
    LatticeBasis,
    apply_diag,
    delta,
    frac_dist,
    mahler_in_K_rho,
    matrix_metric,
    shortest_vector,
)

from conftest import box_covers_minimum, brute_force_minimum, random_unimodular


def diagonal_basis(*entries):
    return LatticeBasis.from_matrix(np.diag(entries))


class TestFracDist:
    @pytest.mark.parametrize("w, expected", [(0.25, 0.25), (0.75, 0.25), (-0.3, 0.3), (2.5, 0.5), (7, 0)])
    def test_values(self, w, expected):
        assert frac_dist(w) == pytest.approx(expected)

    def test_exact_fraction(self):
        assert frac_dist(Fraction(7, 3)) == Fraction(1, 3)

    def test_mpf(self):
        assert frac_dist(mpmath.mpf("3.125")) == mpmath.mpf("0.125")

    def test_symmetries(self, rng):
        for w in rng.uniform(-50, 50, size=200):
            assert frac_dist(w) == pytest.approx(frac_dist(w + 1), abs=1e-12)
            assert frac_dist(w) == pytest.approx(frac_dist(-w), abs=1e-12)

    @pytest.mark.parametrize("w", [math.inf, -math.inf, math.nan])
    def test_non_finite_rejected(self, w):
        with pytest.raises(DomainError):
            frac_dist(w)


class TestDiagParam:
    def test_trace_must_vanish(self):
        with pytest.raises(ContractError):
            DiagParam((1.0, 0.0, 0.0))

    def test_quadrant(self):
        assert DiagParam.quadrant(1.0, 2.0).t == (-3.0, 1.0, 2.0)

    def test_group_law(self):
        a = DiagParam((1.0, -0.5, -0.5))
        b = DiagParam((-2.0, 1.0, 1.0))
        assert (a + b).t == pytest.approx((-1.0, 0.5, 0.5))
        assert (-a).t == (-1.0, 0.5, 0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            DiagParam((1.0, -1.0)) + DiagParam((1.0, -1.0, 0.0))


class TestLatticeBasis:
    def test_rejects_non_unimodular(self):
        with pytest.raises(ContractError):
            LatticeBasis.from_matrix(np.diag([2.0, 1.0, 1.0]))

    def test_rejects_large_dimension(self):
        with pytest.raises(ContractError):
            LatticeBasis.identity(7)

    def test_exact_determinant(self):
        basis = LatticeBasis.from_matrix([[1, 0, 0], [Fraction(1, 3), 1, 0], [Fraction(2, 7), 0, 1]], mode="exact")
        assert basis.det == 1.0

    def test_json_round_trip_keeps_mode_and_flow(self):
        basis = apply_diag(DiagParam((0.5, -0.25, -0.25)), LatticeBasis.from_matrix(
            [[1, 0, 0], [Fraction(1, 3), 1, 0], [Fraction(1, 5), 0, 1]], mode="exact",
        ))
        data = basis.to_json()
        assert data["columns"][0] == ["1/1", "1/3", "1/5"]
        restored = LatticeBasis.from_json(data)
        assert restored == basis

    def test_from_json_column_count(self):
        with pytest.raises(DimensionMismatchError):
            LatticeBasis.from_json({"k": 3, "columns": [[1, 0, 0], [0, 1, 0]]})

    def test_float_mode_accepts_rational_strings(self):
        basis = LatticeBasis.from_json({"k": 2, "columns": [["1/2", "0"], ["0", "2"]]})
        assert basis.mode == "float"
        assert basis.base == ((0.5, 0.0), (0.0, 2.0))

    @pytest.mark.parametrize("mode", ["float", "exact"])
    @pytest.mark.parametrize("entry", ["half", "1/0", None])
    def test_bad_entries_are_contract_errors(self, mode, entry):
        with pytest.raises(ContractError):
            LatticeBasis.from_json({"k": 2, "mode": mode, "columns": [[entry, "0"], ["0", "1"]]})


class TestApplyDiag:
    def test_zero_flow_is_identity(self, unimodular_factory):
        basis = LatticeBasis.from_matrix(unimodular_factory())
        assert np.allclose(apply_diag(DiagParam.zero(3), basis).matrix, basis.matrix)

    def test_diagonal_case(self):
        flowed = apply_diag(DiagParam((1.0, -1.0, 0.0)), LatticeBasis.identity(3))
        assert np.allclose(flowed.matrix, np.diag([math.e, 1 / math.e, 1.0]))

    def test_composition(self, unimodular_factory):
        basis = LatticeBasis.from_matrix(unimodular_factory())
        s = DiagParam((0.3, -0.1, -0.2))
        t = DiagParam((-1.0, 0.4, 0.6))
        twice = apply_diag(t, apply_diag(s, basis))
        once = apply_diag(s + t, basis)
        assert np.max(np.abs(twice.matrix - once.matrix)) < 1e-12

    def test_determinant_preserved(self, unimodular_factory):
        basis = LatticeBasis.from_matrix(unimodular_factory())
        flowed = apply_diag(DiagParam((2.0, -3.0, 1.0)), basis)
        assert np.linalg.det(flowed.matrix) == pytest.approx(1.0, abs=1e-9)


class TestShortestVector:
    def test_standard_lattice(self):
        result = shortest_vector(LatticeBasis.identity(3))
        assert result.norm == pytest.approx(1.0)
        assert sorted(abs(x) for x in result.vector) == [0, 0, 1]

    def test_diagonal_lattice(self):
        result = shortest_vector(diagonal_basis(math.exp(-2), math.e, math.e))
        assert result.norm == pytest.approx(math.exp(-2))
        assert result.vector == (1, 0, 0)

    def test_sign_normalized_and_consistent(self, unimodular_factory):
        basis = LatticeBasis.from_matrix(unimodular_factory())
        result = shortest_vector(basis)
        first = next(x for x in result.vector if x)
        assert first > 0
        image = basis.matrix @ np.array(result.vector, dtype=float)
        assert np.max(np.abs(image)) == pytest.approx(result.norm, rel=1e-12)

    def test_matches_brute_force(self, rng):
        checked = 0
        for _ in range(200):
            matrix = random_unimodular(rng)
            value = delta(LatticeBasis.from_matrix(matrix))
            if not box_covers_minimum(matrix, value, 10):
                continue
            assert value == pytest.approx(brute_force_minimum(matrix, 10), abs=1e-9)
            checked += 1
        assert checked >= 100

    def test_euclidean_matches_brute_force(self, rng):
        for _ in range(20):
            matrix = random_unimodular(rng)
            value = delta(LatticeBasis.from_matrix(matrix), "euclidean")
            if box_covers_minimum(matrix, value, 6):
                assert value == pytest.approx(brute_force_minimum(matrix, 6, "euclidean"), abs=1e-9)

    def test_scaling_bounds(self, unimodular_factory):
        basis = LatticeBasis.from_matrix(unimodular_factory())
        t = DiagParam((0.7, -0.2, -0.5))
        before, after = delta(basis), delta(apply_diag(t, basis))
        assert math.exp(min(t.t)) * before <= after * (1 + 1e-12)
        assert after <= math.exp(max(t.t)) * before * (1 + 1e-12)

    def test_large_spread_uses_extended_precision(self):
        flowed = apply_diag(DiagParam((-20.0, 10.0, 10.0)), LatticeBasis.identity(3))
        assert shortest_vector(flowed).norm == pytest.approx(math.exp(-20), rel=1e-12)

    def test_exact_mode(self):
        basis = LatticeBasis.from_matrix([[1, 0, 0], [Fraction(1, 3), 1, 0], [Fraction(1, 3), 0, 1]], mode="exact")
        result = shortest_vector(apply_diag(DiagParam.quadrant(2.0, 2.0), basis))
        assert result.vector == (3, -1, -1)
        assert result.norm == pytest.approx(3 * math.exp(-4))

    def test_unknown_norm(self):
        with pytest.raises(ContractError):
            shortest_vector(LatticeBasis.identity(3), "taxicab")

    def test_condition_limit(self):
        basis = LatticeBasis.from_matrix([[1.0, 0.4], [0.0, 1.0]])
        with pytest.raises(IllConditionedError):
            shortest_vector(basis, condition_limit=1.0)


class TestMahler:
    def test_examples(self):
        identity = LatticeBasis.identity(3)
        assert mahler_in_K_rho(identity, 0.5)
        assert not mahler_in_K_rho(identity, 1.5)
        assert not mahler_in_K_rho(diagonal_basis(math.exp(-2), math.e, math.e), 0.2)

    def test_monotone(self, unimodular_factory):
        basis = LatticeBasis.from_matrix(unimodular_factory())
        rhos = np.linspace(0.05, 1.5, 30)
        flags = [mahler_in_K_rho(basis, rho) for rho in rhos]
        assert flags == sorted(flags, reverse=True)

    def test_rho_must_be_positive(self):
        with pytest.raises(ContractError):
            mahler_in_K_rho(LatticeBasis.identity(3), 0.0)


class TestMatrixMetric:
    def test_examples(self):
        eye = np.eye(3)
        bumped = eye.copy()
        bumped[0, 1] = 0.3
        assert matrix_metric(eye, eye) == 0.0
        assert matrix_metric(eye, bumped) == pytest.approx(0.3)

    def test_symmetric(self, rng):
        for _ in range(20):
            g, h = rng.normal(size=(2, 3, 3))
            assert matrix_metric(g, h) == matrix_metric(h, g)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            matrix_metric(np.eye(2), np.eye(3))
