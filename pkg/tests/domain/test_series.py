import mpmath
import pytest

from singlet.domain import modular, series, value


@pytest.fixture
def ctx():
    return value.EvalContext(tau=1j)


@pytest.fixture
def lee_yang():
    return value.ModelParams(2, 5)


# ---- Eta Tests ----
class TestEta:

    def test_eta_at_i(self, ctx):
        # Arrange
        expected = mpmath.gamma(mpmath.mpf(1) / 4) / (2 * mpmath.pi ** (mpmath.mpf(3) / 4))

        # Act
        result = series.eta(ctx)

        # Assert
        assert abs(result.value - expected) < 1e-12
        assert result.terms_used > 0
        assert result.tail_bound < ctx.series_tail_tol

    def test_eta_modular_transformation(self):
        # Arrange
        tau = mpmath.mpc("0.3", "0.8")
        at_tau = value.EvalContext(tau=tau)

        # Act
        inverted = series.eta(at_tau.with_tau(-1 / tau)).value
        original = series.eta(at_tau).value

        # Assert
        assert abs(inverted - mpmath.sqrt(-1j * tau) * original) < 1e-12

    def test_tiny_max_terms_raises(self):
        with pytest.raises(value.SeriesNonConvergenceError):
            series.eta(value.EvalContext(tau=1j, max_terms=3))

    @pytest.mark.parametrize("tau", [0.01j, mpmath.mpc("0.3", "0.2")])
    def test_eta_near_the_real_axis(self, tau):
        # Arrange
        ctx = value.EvalContext(tau=tau)
        expected = mpmath.expjpi(ctx.tau / 12) * mpmath.qp(mpmath.expjpi(2 * ctx.tau))

        # Act
        result = series.eta(ctx)

        # Assert
        assert abs(result.value - expected) < 1e-12 * abs(expected)
        assert result.terms_used < 10


# ---- Theta Tests ----
class TestTheta:

    def test_theta_a1_b0_is_jacobi_theta3(self, ctx):
        # Arrange
        q = mpmath.exp(-2 * mpmath.pi)

        # Act
        result = series.theta(value.ThetaIndex(1, 0), 0, ctx)

        # Assert
        assert abs(result.value - mpmath.jtheta(3, 0, q)) < 1e-12

    def test_theta_depends_on_b_mod_2a(self, ctx):
        first = series.theta(value.ThetaIndex(3, 1), 0.2, ctx).value
        second = series.theta(value.ThetaIndex(3, 7), 0.2, ctx).value

        assert abs(first - second) < 1e-12

    @pytest.mark.parametrize("a, b", [(1, 0), (2, 1), (6, 5)])
    @pytest.mark.parametrize("u", [0, 0.1])
    @pytest.mark.parametrize("tau", [1j, 0.3 + 0.8j])
    def test_theta_modular_transformation(self, a, b, u, tau):
        report = modular.verify_theta_transform(value.ThetaIndex(a, b), u, value.EvalContext(tau=tau))

        assert report.abs_residual < 1e-10

    def test_theta_deriv_is_odd_under_b(self, ctx):
        plus = series.theta_deriv(value.ThetaIndex(5, 2), ctx).value
        minus = series.theta_deriv(value.ThetaIndex(5, -2), ctx).value

        assert abs(plus + minus) < 1e-12

    def test_precision_propagates(self):
        # Arrange
        coarse = value.EvalContext(tau=1j, precision_digits=20, series_tail_tol=1e-18)
        fine = value.EvalContext(tau=1j, precision_digits=50, series_tail_tol=1e-45)

        # Act
        coarse_value = series.theta(value.ThetaIndex(1, 0), 0, coarse).value
        with mpmath.workdps(50):
            fine_value = series.theta(value.ThetaIndex(1, 0), 0, fine).value
            reference = mpmath.jtheta(3, 0, mpmath.exp(-2 * mpmath.pi))

            # Assert
            assert abs(fine_value - reference) < mpmath.mpf(10) ** -40
        assert abs(coarse_value - fine_value) < 1e-15


# ---- Partial and false theta Tests ----
class TestPartialTheta:

    def test_partial_plus_mirror_is_full_theta(self, ctx):
        # Arrange
        idx = value.ThetaIndex(3, 2)
        mirror = value.ThetaIndex(3, 4)

        # Act
        forward = series.partial_theta(idx, 0, 0, ctx).value
        backward = series.partial_theta(mirror, 0, 0, ctx).value
        full = series.theta(idx, 0, ctx).value

        # Assert
        assert abs(forward + backward - full) < 1e-12

    def test_mixed_false_theta_rejects_zero_c(self, lee_yang, ctx):
        with pytest.raises(series.InvalidFalseThetaIndex):
            series.mixed_false_theta(lee_yang, 3, 0, 0, ctx)

    def test_mixed_false_theta_is_odd_in_c(self, lee_yang):
        # Arrange
        ctx = value.EvalContext(tau=1.2j, eps=0.2)

        # Act
        plus = series.mixed_false_theta(lee_yang, 4, 3, ctx.eps, ctx).value
        minus = series.mixed_false_theta(lee_yang, 4, -3, ctx.eps, ctx).value

        # Assert
        assert abs(plus + minus) < 1e-12

    def test_tail_bound_is_absolute_for_large_sums(self):
        # Arrange
        ctx = value.EvalContext(tau=0.01j)

        # Act
        result = series.partial_theta(value.ThetaIndex(3, 1), 0, 2, ctx)

        # Assert
        assert abs(result.value) > 1e80
        assert result.tail_bound < ctx.series_tail_tol

    def test_large_partial_thetas_cancel_exactly(self):
        # Arrange
        ctx = value.EvalContext(tau=0.01j)
        reference = value.EvalContext(tau=0.01j, precision_digits=80, series_tail_tol=1e-60)
        upper, lower = value.ThetaIndex(3, 1), value.ThetaIndex(3, 5)

        # Act
        difference = (
            series.partial_theta(upper, 0, 2, ctx).value - series.partial_theta(lower, 0, 2, ctx).value
        )
        with mpmath.workdps(80):
            expected = (
                series.partial_theta(upper, 0, 2, reference).value
                - series.partial_theta(lower, 0, 2, reference).value
            )

        # Assert
        assert abs(difference - expected) < 1e-10 * abs(expected)

    def test_tally_collects_lattice_sums(self, ctx):
        # Act
        with series.tally() as sums:
            series.theta(value.ThetaIndex(2, 1), 0, ctx)
            series.partial_theta(value.ThetaIndex(2, 1), 0, 0.1, ctx)
        series.theta(value.ThetaIndex(2, 1), 0, ctx)

        # Assert
        assert len(sums) == 2
        assert all(s.terms_used > 0 for s in sums)
