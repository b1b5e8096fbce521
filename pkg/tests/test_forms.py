import math

import numpy as np
import pytest

from littlewood_lab.core.errors import BudgetError, ContractError, DimensionMismatchError
from littlewood_lab.core.forms import (
    FormsMatrix,
    cubic_discriminant_scale,
    cubic_unit_forms,
    f_m_eval,
    forms_min_scan,
    orbit_to_form_witness,
    shell_vectors,
)
from littlewood_lab.core.lattice import DiagParam

from conftest import random_unimodular


def test_f_m_eval_is_product_of_dot_products(rng):
    for _ in range(50):
        m = FormsMatrix(random_unimodular(rng))
        x = rng.integers(-5, 6, size=3)
        assert f_m_eval(m, x) == pytest.approx(float(np.prod(m.matrix @ x)), rel=1e-12, abs=1e-12)


def test_f_m_eval_dimension():
    with pytest.raises(DimensionMismatchError):
        f_m_eval(FormsMatrix(np.eye(3)), (1, 2))


def test_rejects_non_unimodular():
    with pytest.raises(ContractError):
        FormsMatrix(np.diag([2.0, 1.0, 1.0]))


def test_shell_vectors_are_normalized_and_sorted():
    shell = shell_vectors(2, 1)
    assert shell.tolist() == [[0, 1], [1, -1], [1, 0], [1, 1]]
    for h in (1, 2, 3):
        vectors = shell_vectors(3, h)
        assert len(vectors) == ((2 * h + 1) ** 3 - (2 * h - 1) ** 3) // 2
        assert np.all(np.max(np.abs(vectors), axis=1) == h)


class TestFormsMinScan:
    def test_identity_attains_zero_and_stops(self):
        result = forms_min_scan(FormsMatrix(np.eye(3)), 5)
        assert result.min_value == 0.0
        assert result.argmin == (0, 0, 1)
        assert result.shells == 1

    def test_matches_brute_force(self, rng):
        m = FormsMatrix(random_unimodular(rng))
        result = forms_min_scan(m, 4)
        axes = [np.arange(-4, 5)] * 3
        xs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        xs = xs[np.any(xs != 0, axis=1)]
        direct = np.min(np.abs(np.prod(xs @ m.matrix.T, axis=1)))
        assert result.min_value == pytest.approx(direct, rel=1e-12, abs=1e-15)

    def test_threads_do_not_change_result(self, rng):
        m = FormsMatrix(random_unimodular(rng))
        assert forms_min_scan(m, 6, threads=1).as_dict() == forms_min_scan(m, 6, threads=3).as_dict()

    def test_minimum_is_non_increasing_in_N(self, rng):
        for m in (cubic_unit_forms(), FormsMatrix(random_unimodular(rng))):
            minima = [forms_min_scan(m, N).min_value for N in range(1, 7)]
            assert all(b <= a for a, b in zip(minima, minima[1:]))

    def test_budget(self):
        with pytest.raises(BudgetError):
            forms_min_scan(FormsMatrix(np.eye(3)), 2000, budget=1e6)


class TestCubicForms:
    def test_unimodular_and_norm_form(self):
        m = cubic_unit_forms()
        assert np.linalg.det(m.matrix) == pytest.approx(1.0, abs=1e-9)
        scale = cubic_discriminant_scale()
        assert scale == pytest.approx(9.0)
        # x = (1, 0, 0) has field norm 1
        assert abs(f_m_eval(m, (1, 0, 0))) == pytest.approx(1 / scale, rel=1e-9)

    def test_scan_stays_bounded_below(self):
        result = forms_min_scan(cubic_unit_forms(), 6)
        assert result.min_value == pytest.approx(1 / 9.0, rel=1e-9)

    def test_rejects_complex_cubic(self):
        with pytest.raises(ContractError):
            cubic_unit_forms((1, 0, 0, -2))

    def test_json(self):
        assert np.allclose(FormsMatrix.from_json({"cubic": [1, 0, -3, 1]}).matrix, cubic_unit_forms().matrix)
        rows = np.eye(3).tolist()
        assert np.array_equal(FormsMatrix.from_json({"rows": rows}).matrix, np.eye(3))
        with pytest.raises(ContractError):
            FormsMatrix.from_json({})


def test_orbit_to_form_witness():
    m = FormsMatrix(np.eye(3))
    witness = orbit_to_form_witness(m, DiagParam((-2.0, 1.0, 1.0)), 0.2)
    assert witness.x == (1, 0, 0)
    assert witness.value == 0.0
    assert witness.bound == pytest.approx(0.2 ** 3)
    assert orbit_to_form_witness(m, DiagParam.zero(3), 0.5) is None


def test_flowed_scales_rows():
    m = FormsMatrix(np.eye(3)).flowed(DiagParam((1.0, -1.0, 0.0)))
    assert np.allclose(np.diag(m.matrix), [math.e, 1 / math.e, 1.0])


def test_flow_preserves_form_values(rng):
    for _ in range(20):
        m = FormsMatrix(random_unimodular(rng))
        a = DiagParam.quadrant(*rng.uniform(-3, 3, size=2))
        x = rng.integers(-5, 6, size=3)
        assert abs(f_m_eval(m.flowed(a), x)) == pytest.approx(abs(f_m_eval(m, x)), rel=1e-9, abs=1e-12)
