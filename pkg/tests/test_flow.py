import math

import numpy as np
import pytest

from littlewood_lab.core.errors import ContractError, DimensionMismatchError
from littlewood_lab.core.flow import (
    DecompositionError,
    FlowSpec,
    conjugate_diag,
    cuv_decompose,
    expansion_check,
    expansion_constants,
    grid_axis,
    in_unstable,
    metric_comparison_constant,
    orbit_trace_cone,
    random_unstable,
    two_sided_escape,
)
from littlewood_lab.core.forms import cubic_unit_forms
from littlewood_lab.core.lattice import DiagParam, LatticeBasis, matrix_metric
from littlewood_lab.core.littlewood import QUADRANT_DIRECTIONS

SPEC = FlowSpec(DiagParam((1.0, 0.0, -1.0)))


def bump(i, j, value, k=3):
    m = np.eye(k)
    m[i, j] += value
    return m


class TestFlowSpec:
    def test_pairs(self):
        assert SPEC.expanded_pairs() == [(0, 1), (0, 2), (1, 2)]
        assert SPEC.contracted_pairs() == [(1, 0), (2, 0), (2, 1)]
        assert SPEC.central_pairs() == [(0, 0), (1, 1), (2, 2)]

    def test_rate(self):
        assert SPEC.rate == pytest.approx(math.e)

    def test_rate_needs_expansion(self):
        with pytest.raises(ContractError):
            FlowSpec(DiagParam.zero(3)).rate

    def test_blocks_group_equal_entries(self):
        spec = FlowSpec(DiagParam((-2.0, 1.0, 1.0)))
        assert spec.blocks() == [[1, 2], [0]]


class TestConjugateDiag:
    def test_entry_scaling(self):
        out = conjugate_diag(DiagParam((1.0, 0.0, -1.0)), np.ones((3, 3)))
        assert out[0, 2] == pytest.approx(math.exp(2))
        assert out[2, 0] == pytest.approx(math.exp(-2))
        assert np.allclose(np.diag(out), 1.0)

    def test_inverse_undoes_conjugation(self, rng):
        for _ in range(20):
            t = DiagParam.quadrant(*rng.uniform(-2, 2, size=2))
            g = rng.normal(size=(3, 3))
            assert np.allclose(conjugate_diag(t, conjugate_diag(-t, g)), g, rtol=1e-12, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            conjugate_diag(DiagParam((1.0, -1.0)), np.eye(3))


class TestCUVDecompose:
    def test_round_trip_of_factors(self, rng):
        for _ in range(200):
            c = np.diag(1 + rng.uniform(-0.05, 0.05, size=3))
            u = np.eye(3) + np.triu(rng.uniform(-0.05, 0.05, size=(3, 3)), 1)
            v = np.eye(3) + np.tril(rng.uniform(-0.05, 0.05, size=(3, 3)), -1)
            factors = cuv_decompose(SPEC, c @ u @ v)
            assert np.max(np.abs(factors.c - c)) < 1e-12
            assert np.max(np.abs(factors.u - u)) < 1e-12
            assert np.max(np.abs(factors.v - v)) < 1e-12

    def test_reconstruction_near_identity(self, rng):
        for _ in range(1000):
            g = np.eye(3) + rng.uniform(-0.05, 0.05, size=(3, 3))
            factors = cuv_decompose(SPEC, g)
            assert matrix_metric(factors.product(), g) < 1e-12
            assert in_unstable(SPEC, factors.u)

    def test_block_central_part(self, rng):
        spec = FlowSpec(DiagParam((-2.0, 1.0, 1.0)))
        g = np.eye(3) + rng.uniform(-0.05, 0.05, size=(3, 3))
        factors = cuv_decompose(spec, g)
        assert matrix_metric(factors.product(), g) < 1e-12
        assert factors.c[0, 1] == 0.0 and factors.c[1, 0] == 0.0
        assert factors.c[1, 2] != 0.0

    def test_singular_pivot(self):
        g = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])
        with pytest.raises(DecompositionError):
            cuv_decompose(SPEC, g)

    def test_metric_comparison_constant_is_moderate(self):
        c1 = metric_comparison_constant(SPEC, samples=100)
        assert 1.0 <= c1 < 10.0


class TestExpansion:
    def test_ratio(self):
        assert expansion_check(SPEC, bump(0, 2, 1e-3), 3) == pytest.approx(math.exp(6))

    def test_ratio_at_least_rate_power(self):
        assert expansion_constants(SPEC, samples=20, n_max=5) >= 1.0 - 1e-9

    def test_rejects_non_unstable(self):
        with pytest.raises(ContractError):
            expansion_check(SPEC, bump(1, 0, 1e-3), 1)

    def test_rejects_identity_and_negative_n(self):
        with pytest.raises(ContractError):
            expansion_check(SPEC, np.eye(3), 1)
        with pytest.raises(ContractError):
            expansion_check(SPEC, bump(0, 1, 1e-3), -1)

    def test_random_unstable_membership(self, rng):
        assert in_unstable(SPEC, random_unstable(SPEC, rng, 0.1))

    def test_ratio_strictly_increases_in_n(self, rng):
        for _ in range(10):
            f = random_unstable(SPEC, rng, 0.1)
            ratios = [expansion_check(SPEC, f, n) for n in range(6)]
            assert ratios[0] == pytest.approx(1.0)
            assert all(b > a for a, b in zip(ratios, ratios[1:]))


class TestTwoSidedEscape:
    def test_expanding_entry_escapes_forward(self):
        result = two_sided_escape(SPEC, bump(0, 1, 0.01), 0.5)
        assert result.n == 4
        assert result.distance >= 0.5

    def test_contracting_entry_escapes_backward(self):
        result = two_sided_escape(SPEC, bump(1, 0, 0.01), 0.5)
        assert result.n == -4

    def test_central_perturbation_never_escapes(self):
        assert two_sided_escape(SPEC, np.diag([1.01, 1 / 1.01, 1.0]), 0.5, n_max=30) is None


class TestOrbitTraceCone:
    def test_identity_lattice(self):
        trace = orbit_trace_cone(LatticeBasis.identity(3), QUADRANT_DIRECTIONS, 1.0, 0.5, step=0.5)
        assert [s.times for s in trace.samples][:3] == [(0.0, 0.0), (0.0, 0.5), (0.0, 1.0)]
        assert len(trace.samples) == 9
        for sample in trace.samples:
            assert sample.delta == pytest.approx(math.exp(-sum(sample.times)))
            assert sample.in_k_rho == (sample.delta >= 0.5)
        assert trace.min_delta == pytest.approx(math.exp(-2))
        assert not trace.all_in_k_rho

    def test_threads_do_not_change_results(self, unimodular_factory):
        basis = LatticeBasis.from_matrix(unimodular_factory())
        one = orbit_trace_cone(basis, QUADRANT_DIRECTIONS, 1.0, 0.3, step=0.25, threads=1)
        four = orbit_trace_cone(basis, QUADRANT_DIRECTIONS, 1.0, 0.3, step=0.25, threads=4)
        assert one.rows() == four.rows()

    def test_flags_are_monotone_in_rho(self, unimodular_factory):
        basis = LatticeBasis.from_matrix(unimodular_factory())
        traces = [orbit_trace_cone(basis, QUADRANT_DIRECTIONS, 1.0, rho, step=0.25) for rho in (0.2, 0.5, 0.8)]
        for looser, tighter in zip(traces, traces[1:]):
            for wide, narrow in zip(looser.samples, tighter.samples):
                assert wide.times == narrow.times
                assert wide.in_k_rho or not narrow.in_k_rho

    def test_cubic_lattice_orbit_stays_compact(self):
        trace = orbit_trace_cone(cubic_unit_forms().lattice(), QUADRANT_DIRECTIONS, 2.0, 0.1, step=0.5)
        assert trace.all_in_k_rho
        assert trace.min_delta >= (1 / 9) ** (1 / 3) - 1e-9

    def test_headers(self):
        trace = orbit_trace_cone(LatticeBasis.identity(3), QUADRANT_DIRECTIONS, 0.0, 0.5)
        assert trace.headers() == ["time_1", "time_2", "delta", "in_K_rho"]
        assert trace.rows() == [[0.0, 0.0, 1.0, "true"]]

    def test_too_many_directions(self):
        directions = QUADRANT_DIRECTIONS + (DiagParam((0.0, 1.0, -1.0)),)
        with pytest.raises(ContractError):
            orbit_trace_cone(LatticeBasis.identity(3), directions, 1.0, 0.5)

    def test_dependent_directions(self):
        d = QUADRANT_DIRECTIONS[0]
        with pytest.raises(ContractError):
            orbit_trace_cone(LatticeBasis.identity(3), (d, d.scaled(2.0)), 1.0, 0.5)

    def test_direction_dimension(self):
        with pytest.raises(DimensionMismatchError):
            orbit_trace_cone(LatticeBasis.identity(3), (DiagParam((1.0, -1.0)),), 1.0, 0.5)

    def test_grid_axis(self):
        assert list(grid_axis(1.0, 0.25)) == [0.0, 0.25, 0.5, 0.75, 1.0]
        with pytest.raises(ContractError):
            grid_axis(1.0, 0.0)
