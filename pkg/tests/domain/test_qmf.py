from fractions import Fraction

import mpmath
import numpy as np
import pytest

from singlet.domain import model, modular, qmf, value


@pytest.fixture
def lee_yang():
    return value.ModelParams(2, 5)


@pytest.fixture
def w():
    return value.LowerHalfPoint(complex(-0.3, -0.7))


def direct_false_theta(j, p, tau, terms=60):
    q_power = lambda n: mpmath.expjpi(2 * tau * p * (n + mpmath.mpf(j) / (2 * p)) ** 2)
    return mpmath.fsum(q_power(n) for n in range(terms)) - mpmath.fsum(q_power(-n) for n in range(1, terms))


# ---- Upper half-plane Tests ----
class TestUpperHalfPlane:

    @pytest.mark.parametrize("j, p", [(1, 2), (1, 3), (2, 3), (3, 5)])
    def test_false_theta_against_direct_sum(self, j, p):
        tau = mpmath.mpc(0.2, 0.9)

        result = qmf.false_theta_F(j, p, tau)

        assert abs(result - direct_false_theta(j, p, tau)) < 1e-12

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_s_matrix_is_the_su2_one(self, p):
        S = np.array(qmf.s_matrix(p).tolist(), dtype=float)

        assert np.allclose(S, modular.smatrix_wzw(p - 2), atol=1e-14)

    @pytest.mark.parametrize("p", [2, 3])
    @pytest.mark.parametrize("tau", [1j, complex(0.3, 1.2), complex(-0.4, 0.8)])
    def test_weight_three_halves_transformation(self, p, tau):
        for j in range(1, p):
            report = qmf.weight32_f_transform_residual(j, p, tau)

            assert report.rel_residual < 1e-10


# ---- Quotient basis Tests ----
class TestChiTilde:

    @pytest.mark.parametrize("pair", [(2, 3), (2, 5), (3, 4)])
    def test_closed_form_against_series(self, pair):
        # Arrange
        params = value.ModelParams(*pair)
        tau = complex(0.2, 1.1)

        for kac in model.kac_table(params):
            # Act
            closed = qmf.chi_tilde(params, kac.r, kac.s, tau)
            summed = qmf.chi_tilde_series(params, kac.r, kac.s, tau)

            # Assert
            assert abs(closed - summed) < 1e-10 * max(1, abs(summed))

    def test_labels_outside_the_kac_table(self, lee_yang):
        with pytest.raises(value.InvalidKacLabel):
            qmf.chi_tilde(lee_yang, 1, 1, 1j)

    def test_rank(self, lee_yang):
        taus = [1j, complex(0.1, 0.8), complex(-0.2, 1.3), complex(0.35, 0.6)]

        assert qmf.chi_tilde_rank(lee_yang, taus) == 2


# ---- Cocycle Tests ----
@pytest.mark.slow
class TestCocycles:

    @pytest.mark.parametrize("p", [2, 3])
    def test_half_integral(self, p, w):
        report = qmf.cocycle_check_halfint(p, w)

        assert report.rel_residual < 1e-6

    def test_weight_three_halves(self, lee_yang, w):
        report = qmf.cocycle_check_weight32(lee_yang, w)

        assert report.rel_residual < 1e-6

    def test_radial_limit(self):
        report = qmf.radial_limit_check(1, 2, Fraction(0))

        assert report.agrees()
