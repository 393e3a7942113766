import math

import mpmath
import numpy as np
import pytest

from singlet.domain import labels, model, modular, value


@pytest.fixture
def trivial():
    return value.ModelParams(2, 3)


# ---- Finite S-matrices Tests ----
class TestFiniteSMatrices:

    @pytest.mark.parametrize("pair", [(2, 5), (3, 4), (3, 5), (2, 7)])
    def test_virasoro_s_matrix_is_symmetric_and_orthogonal(self, pair):
        # Act
        S = modular.smatrix_virasoro(value.ModelParams(*pair))

        # Assert
        assert np.allclose(S, S.T, atol=1e-14)
        assert np.allclose(S @ S.T, np.eye(len(S)), atol=1e-12)

    @pytest.mark.parametrize("k", range(0, 6))
    def test_wzw_s_matrix_is_symmetric_and_orthogonal(self, k):
        S = modular.smatrix_wzw(k)

        assert S.shape == (k + 1, k + 1)
        assert np.allclose(S, S.T, atol=1e-14)
        assert np.allclose(S @ S, np.eye(k + 1), atol=1e-12)

    def test_wzw_rejects_negative_level(self):
        with pytest.raises(ValueError):
            modular.smatrix_wzw(-1)

    def test_entries_agree_with_matrix(self):
        params = value.ModelParams(3, 4)
        first = model.kac_table(params)[0]

        S = modular.smatrix_virasoro(params)

        assert S[0, 0] == pytest.approx(float(modular.smatrix_entry(params, first.r, first.s, first.r, first.s)))

    def test_trivial_model_has_unit_s_matrix(self, trivial):
        assert modular.smatrix_virasoro(trivial) == pytest.approx(np.ones((1, 1)))


# ---- Kernels Tests ----
class TestKernels:

    def test_typical_kernel_without_regulator_is_a_phase(self):
        result = modular.s_kernel_typical(0.3, 0.5, 0)

        assert abs(result - mpmath.expjpi(-0.3)) < 1e-14

    def test_typical_kernel_damping(self):
        result = modular.s_kernel_typical(0.3, 0.5, 0.1)

        assert abs(abs(result) - mpmath.exp(2 * mpmath.pi * 0.1 * (0.3 - 0.5))) < 1e-14

    def test_imaginary_regulator_rejected(self, trivial):
        with pytest.raises(modular.ImaginaryRegulatorError):
            modular.s_kernel_false(trivial, 1, 2, 0.3, 0.2j)
        with pytest.raises(modular.ImaginaryRegulatorError):
            modular.s_kernel_atypical(trivial, 1, 1, 0, 0.3, 0j)

    def test_false_kernel_is_odd_in_c(self, trivial):
        plus = modular.s_kernel_false(trivial, 3, 2, 0.4, 0.25)
        minus = modular.s_kernel_false(trivial, 3, -2, 0.4, 0.25)

        assert abs(plus + minus) < 1e-14


# ---- Correction terms Tests ----
class TestCorrections:

    def test_correction_X_is_odd_in_c(self, trivial):
        ctx = value.EvalContext(tau=1.3j, eps=-0.2)

        plus = modular.correction_X(trivial, 3, 2, ctx)
        minus = modular.correction_X(trivial, 3, -2, ctx)

        assert abs(plus + minus) < 1e-12

    def test_correction_X_deriv_matches_finite_difference(self, trivial):
        # Arrange
        h = 1e-6
        ctx = value.EvalContext(tau=1.3j, series_tail_tol=1e-25, precision_digits=40)
        at = lambda eps: modular.correction_X(trivial, 3, 2, ctx.with_eps(eps))

        # Act
        result = modular.correction_X_deriv(trivial, 3, 2, ctx.with_eps(0.2))

        # Assert
        difference = (at(0.2 + h) - at(0.2 - h)) / (2 * h)
        assert abs(result - difference) < 1e-7 * max(1, abs(result))

    def test_correction_Y_limit_of_trivial_model(self, trivial):
        result = modular.correction_Y_limit(trivial, 1, 2, 1, value.EvalContext(tau=1j))

        assert abs(result - 1) < 1e-12

    @pytest.mark.slow
    def test_correction_Y_approaches_its_limit_linearly(self, trivial):
        # Arrange
        limit = modular.correction_Y_limit(trivial, 1, 2, 1, value.EvalContext(tau=1j))

        # Act
        gaps = [
            abs(modular.correction_Y(trivial, 1, 2, 1, value.EvalContext(tau=1j, eps=eps)) - limit)
            for eps in (1e-2, 1e-3)
        ]

        # Assert
        assert 8 <= gaps[0] / gaps[1] <= 12


# ---- Quadrature Tests ----
class TestQuadrature:

    def test_gaussian_kernel_check(self):
        y = 2.0

        result = modular.gaussian_kernel_check(math.cos, y)

        assert result == pytest.approx(math.exp(-1 / (4 * math.pi * y)), rel=1e-8)

    def test_quadrature_error_is_reported(self, trivial, mocker):
        # Arrange
        mocker.patch.object(modular.mpmath, "quad", return_value=(mpmath.mpf(1), mpmath.mpf("0.5")))
        ctx = value.EvalContext(tau=2j, eps=0.25)

        # Act / Assert
        with pytest.raises(value.QuadratureError):
            modular.line_integral("test", trivial, lambda x: mpmath.mpf(1), ctx)


# ---- S-transformation Tests ----
@pytest.mark.slow
class TestSTransform:

    def test_typical_label(self, trivial):
        label = labels.Typical(trivial.alpha_zero / 2 + mpmath.mpf("0.37"))

        report = modular.verify_s_transform(trivial, label, value.EvalContext(tau=2j, eps=0.25))

        assert report.rel_residual < 1e-6

    @pytest.mark.parametrize("eps", [0.3, -0.3])
    @pytest.mark.parametrize("label", [labels.AtypicalI(1, 1, 0), labels.AtypicalI(1, 2, 1)])
    def test_atypical_labels(self, trivial, label, eps):
        report = modular.verify_s_transform(trivial, label, value.EvalContext(tau=1.7j, eps=eps))

        assert report.rel_residual < 1e-5

    @pytest.mark.parametrize("eps", [0.3, -0.3])
    def test_false_theta(self, trivial, eps):
        report = modular.verify_false_theta_transform(trivial, 2, 3, value.EvalContext(tau=1.5j, eps=eps))

        assert report.rel_residual < 1e-6
