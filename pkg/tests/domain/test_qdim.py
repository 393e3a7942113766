import mpmath
import numpy as np
import pytest

from singlet.domain import labels, qdim, value


@pytest.fixture
def trivial():
    return value.ModelParams(2, 3)


# ---- Regime Tests ----
class TestRegime:

    def test_wall_on_the_real_axis(self, trivial):
        assert qdim.wall(trivial, 0) == pytest.approx(-1 / float(trivial.alpha))

    def test_wall_touches_zero_at_a_pole_line(self, trivial):
        assert qdim.wall(trivial, 1j / trivial.alpha) == pytest.approx(0, abs=1e-12)

    @pytest.mark.parametrize(
        "eps, expected",
        [(0.1, qdim.Continuous()), (-2, qdim.Discrete(0, 0)), (complex(-2, 13 / 12 ** 0.5), qdim.Discrete(1, 1))],
    )
    def test_regime(self, trivial, eps, expected):
        assert qdim.regime(trivial, eps) == expected

    def test_on_the_wall(self, trivial):
        # Arrange
        eps = qdim.wall(trivial, 0)

        # Act
        current = qdim.regime(trivial, eps)

        # Assert
        assert current == qdim.OnWall()
        with pytest.raises(qdim.OnWallError):
            qdim.qdim_closed(trivial, labels.AtypicalI(1, 1, 0), eps)

    def test_vacuum_label(self, trivial):
        assert qdim.vacuum_label(trivial) == labels.Kernel(1, 1)
        assert qdim.vacuum_label(value.ModelParams.one_p(3)) == labels.AtypicalI(1, 1, 0)


# ---- Closed form Tests ----
class TestClosedForm:

    @pytest.mark.parametrize("pair", [(2, 3), (2, 5), (3, 4)])
    def test_small_eps_limit_is_r_times_s(self, pair):
        # Arrange
        params = value.ModelParams(*pair)

        for r in range(1, params.p_plus):
            for s in range(1, params.p_minus):
                # Act
                result = qdim.qdim_closed(params, labels.AtypicalI(r, s, 0), 1e-6)

                # Assert
                assert abs(result - r * s) < 1e-5

    def test_typical_limit(self, trivial):
        result = qdim.qdim_closed(trivial, labels.Typical(0.7), 1e-7)

        assert abs(result - 6) < 1e-5

    def test_virasoro_is_zero_everywhere(self, trivial):
        label = labels.Virasoro.of(1, 2)

        assert qdim.qdim_closed(trivial, label, 0.4) == 0
        assert qdim.qdim_closed(trivial, label, -3) == 0

    def test_discrete_values(self, trivial):
        # Arrange
        eps = -2

        # Act
        vacuum = qdim.qdim_closed(trivial, labels.AtypicalI(1, 1, 0), eps)
        other = qdim.qdim_closed(trivial, labels.AtypicalI(1, 2, 0), eps)
        typical = qdim.qdim_closed(trivial, labels.Typical(0.7), eps)

        # Assert
        assert abs(vacuum - 1) < 1e-12
        assert abs(other - 1) < 1e-12
        assert typical == 0

    def test_constant_inside_a_strip(self, trivial):
        label = labels.AtypicalI(1, 2, 1)

        first = qdim.qdim_closed(trivial, label, complex(-1.5, 0.1))
        second = qdim.qdim_closed(trivial, label, complex(-4.0, 0.2))

        assert abs(first - second) < 1e-12

    @pytest.mark.parametrize("p", [2, 3, 4])
    @pytest.mark.parametrize("eps", [0.2 + 0.1j, 0.05 - 0.3j, 0.4 + 0.7j, -0.05 + 0.2j])
    def test_continuous_values_are_periodic_on_the_cylinder(self, p, eps):
        # Arrange
        params = value.ModelParams.one_p(p)
        shifted = eps + 1j * (2 * p) ** 0.5
        label_set = [labels.AtypicalI(1, s, n) for s in range(1, p + 1) for n in (-1, 0, 2)]
        label_set += [labels.AtypicalIPlus(1, 1, 1), labels.AtypicalIMinus(1, 1, -1)]

        # Act
        pairs = [
            (qdim.qdim_closed(params, label, eps), qdim.qdim_closed(params, label, shifted))
            for label in label_set
        ]

        # Assert
        assert qdim.regime(params, eps) == qdim.regime(params, shifted) == qdim.Continuous()
        for original, moved in pairs:
            assert abs(original - moved) < 1e-10 * max(1, abs(original))


# ---- Numerical estimate Tests ----
class TestNumeric:

    def test_extrapolation_is_exact_for_quadratics(self):
        samples = [(y, mpmath.mpf(1) + 2 * y + 3 * y * y) for y in (0.02, 0.01, 0.005)]

        estimate, _ = qdim.extrapolate_to_zero(samples)

        assert abs(estimate - 1) < 1e-12

    def test_imaginary_regulator_rejected(self, trivial):
        with pytest.raises(qdim.OnWallError):
            qdim.qdim_numeric(trivial, labels.AtypicalI(1, 2, 0), 0.3j)

    def test_wall_point_rejected(self, trivial):
        eps = complex(qdim.wall(trivial, 0), 0)

        with pytest.raises(qdim.OnWallError):
            qdim.qdim_numeric(trivial, labels.AtypicalI(1, 2, 0), eps)

    def test_starting_heights_shrink_towards_the_wall(self, trivial):
        # Arrange
        boundary = qdim.wall(trivial, 0.1j)

        # Act
        far = qdim.starting_heights(trivial, complex(0.3, 0.1))
        near = qdim.starting_heights(trivial, complex(boundary + 0.01, 0.1))

        # Assert
        assert len(far) == qdim.WINDOW + 1
        assert far[0] <= qdim.MAX_Y
        assert near[0] < far[0]
        assert all(a == 2 * b for a, b in zip(far, far[1:]))

    def test_too_close_to_the_wall_raises(self, trivial):
        eps = complex(qdim.wall(trivial, 0) + 1e-4, 0)

        with pytest.raises(qdim.QdimRatioError):
            qdim.qdim_numeric(trivial, labels.AtypicalI(1, 2, 0), eps)

    def test_unsettled_ratio_raises(self, trivial, mocker):
        # Arrange
        mocker.patch.object(qdim, "_ratio", side_effect=lambda params, label, vacuum, ctx: 1 / ctx.tau.imag)

        # Act / Assert
        with pytest.raises(qdim.QdimRatioError):
            qdim.qdim_numeric(trivial, labels.AtypicalI(1, 2, 0), 0.3)

    def test_refines_until_the_fits_agree(self, trivial, mocker):
        # Arrange
        mocker.patch.object(
            qdim, "_ratio", side_effect=lambda params, label, vacuum, ctx: 2 + mpmath.exp(-0.05 / ctx.tau.imag)
        )

        # Act
        estimate = qdim.qdim_numeric(trivial, labels.AtypicalI(1, 2, 0), 0.3)

        # Assert
        assert len(estimate.samples) > qdim.WINDOW + 1
        assert abs(estimate.value - 2) < 1e-4
        assert estimate.error < 1e-5 * abs(estimate.value)

    def test_too_few_heights(self, trivial):
        with pytest.raises(ValueError):
            qdim.qdim_numeric(trivial, labels.AtypicalI(1, 2, 0), 0.3, y_schedule=[0.02, 0.01])

    @pytest.mark.slow
    def test_agrees_with_closed_form(self, trivial):
        # Arrange
        label = labels.AtypicalI(1, 2, 0)
        eps = 0.3

        # Act
        estimate = qdim.qdim_numeric(trivial, label, eps)

        # Assert
        expected = qdim.qdim_closed(trivial, label, eps)
        assert abs(estimate.value - expected) / abs(expected) < 1e-3
        assert len(estimate.samples) >= qdim.WINDOW + 1

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "params, label_set",
        [
            (
                value.ModelParams(2, 3),
                [labels.AtypicalI(r, s, n) for r in (1, 2) for s in (1, 2, 3) for n in (-1, 0, 1)],
            ),
            (
                value.ModelParams.one_p(3),
                [labels.AtypicalI(1, s, n) for s in (1, 2, 3) for n in (-1, 0, 1)],
            ),
        ],
    )
    def test_random_continuous_regulators(self, params, label_set):
        # Arrange
        rng = np.random.default_rng(20)
        points = []
        while len(points) < 20:
            eps = complex(rng.uniform(-0.4, 0.6), rng.uniform(-0.5, 0.5))
            if isinstance(qdim.regime(params, eps), qdim.Continuous) and eps.real != 0:
                points.append(eps)
        settled = 0

        # Act / Assert
        for eps in points:
            for label in label_set:
                try:
                    estimate = qdim.qdim_numeric(params, label, eps)
                except qdim.QdimRatioError:
                    continue
                settled += 1
                expected = qdim.qdim_closed(params, label, eps)
                assert abs(estimate.value - expected) < 1e-3 * max(1, abs(expected)), (label, eps)
        assert settled >= len(points) * len(label_set) // 2


# ---- Leak point Tests ----
class TestLeakPoints:

    @pytest.mark.parametrize("label", [labels.AtypicalI(1, 1, 0), labels.AtypicalI(1, 2, 0)])
    def test_one_sided_values_agree(self, trivial, label):
        # Act
        report = qdim.leak_check(trivial, label, 1)

        # Assert
        assert report.agrees()
        assert isinstance(report.left_regime, qdim.Discrete)
        assert report.right_regime == qdim.Continuous()

    def test_points_straddle_the_shifted_wall_for_m_in_qz(self, trivial):
        # Act
        report = qdim.leak_check(trivial, labels.AtypicalI(1, 2, 0), trivial.lattice_rank)

        # Assert
        assert isinstance(report.left_regime, qdim.Discrete)
        assert report.right_regime == qdim.Continuous()


# ---- Scan Tests ----
class TestScan:

    @pytest.mark.parametrize("bounds", [(1, 0, -1, 1, 3, 3), (-1, 1, 0, 0, 3, 3), (-1, 1, -1, 1, 0, 3)])
    def test_invalid_rectangle(self, bounds):
        with pytest.raises(ValueError):
            qdim.Rectangle(*bounds)

    def test_scan_covers_the_grid(self, trivial):
        # Arrange
        grid = qdim.Rectangle(-1, 1, -0.5, 0.5, 5, 4)

        # Act
        rows = qdim.qdim_scan(trivial, labels.AtypicalI(1, 1, 0), grid)

        # Assert
        assert len(rows) == 20
        assert rows[0].eps == complex(-1, -0.5)
        assert rows[-1].eps == complex(1, 0.5)
        assert {type(row.regime) for row in rows} == {qdim.Continuous, qdim.Discrete}

    def test_large_grids_map_over_workers_in_order(self, trivial):
        # Arrange
        grid = qdim.Rectangle(-1, 1, -0.5, 0.5, 20, 20)
        label = labels.AtypicalI(1, 2, 0)

        # Act
        parallel = qdim.qdim_scan(trivial, label, grid, workers=2)
        in_process = qdim.qdim_scan(trivial, label, grid, workers=1)

        # Assert
        assert len(parallel) == qdim.PARALLEL_CELLS
        assert parallel == in_process
