import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singlet.domain import fusion, labels, model, modular, value


@pytest.fixture
def trivial():
    return value.ModelParams(2, 3)


@pytest.fixture
def lee_yang():
    return value.ModelParams(2, 5)


atom = fusion.FusionElement.atypical


def atypicals(p_plus, p_minus):
    return st.builds(
        atom,
        st.integers(1, p_plus),
        st.integers(1, p_minus),
        st.integers(-2, 2),
    )


# ---- Chebyshev Tests ----
class TestChebyshev:

    @pytest.mark.parametrize(
        "kind, n, expected",
        [("first", 2, 17), ("second", 2, 35), ("first", 0, 1), ("second", -1, 0), ("second", -2, -1), ("first", -2, 17)],
    )
    def test_values_at_three(self, kind, n, expected):
        assert fusion.chebyshev(kind, n, 3) == expected

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            fusion.chebyshev("third", 2, 3)


# ---- Element Tests ----
class TestFusionElement:

    def test_arithmetic(self):
        # Arrange
        a = atom(1, 2, 0)
        b = fusion.FusionElement.typical(0.5)

        # Act
        total = 2 * a + b - a * 2

        # Assert
        assert total == b
        assert (a - a).is_zero()

    def test_terms_are_sorted(self):
        element = atom(2, 1, 0) + atom(1, 2, 3)

        assert element.terms() == [(labels.AtypicalI(1, 2, 3), 1), (labels.AtypicalI(2, 1, 0), 1)]

    def test_virasoro_is_not_a_generator(self):
        with pytest.raises(labels.InvalidModuleLabel):
            fusion.FusionElement.from_label(labels.Virasoro.of(1, 2))

    def test_typical_weights_are_rounded(self):
        assert fusion.TypicalWeight.of(0.1 + 0.2) == fusion.TypicalWeight.of(0.3)


# ---- Dictionary Tests ----
class TestDictionary:

    @pytest.mark.parametrize("pair", [(2, 3), (2, 5), (3, 4)])
    def test_generator_relations_hold(self, pair):
        params = value.ModelParams(*pair)

        checked = fusion.validate_dictionary(params)

        assert checked == len(fusion.generator_relations(params, range(-2, 3)))

    def test_laurent_round_trip(self, trivial):
        element = atom(1, 2, 1) - 3 * atom(2, 1, -2)

        assert fusion.from_laurent(trivial, fusion.to_laurent(trivial, element)) == element


# ---- Product Tests ----
class TestFuse:

    def test_shift_generators_are_inverse(self, trivial):
        result = fusion.fuse(trivial, atom(1, 1, 1), atom(1, 1, -1))

        assert result == atom(1, 1, 0)

    def test_interior_generator(self, trivial):
        result = fusion.fuse(trivial, atom(1, 2, 0), atom(1, 2, 0))

        assert result == atom(1, 1, 0) + atom(1, 3, 0)

    def test_typical_products_have_lattice_rank_terms(self, trivial):
        # Arrange
        left = fusion.FusionElement.typical(0.25)
        right = fusion.FusionElement.typical(0.5)

        # Act
        result = fusion.fuse(trivial, left, right)

        # Assert
        assert sum(result.typical_part.values()) == trivial.lattice_rank
        assert not result.atypical_part

    def test_invalid_atypical(self, trivial):
        with pytest.raises(labels.InvalidModuleLabel):
            fusion.fuse(trivial, atom(3, 1, 0), atom(1, 1, 0))

    @settings(max_examples=15, deadline=None)
    @given(a=atypicals(2, 3), b=atypicals(2, 3), c=atypicals(2, 3))
    def test_associative(self, a, b, c):
        params = value.ModelParams(2, 3)

        left = fusion.fuse(params, fusion.fuse(params, a, b), c)
        right = fusion.fuse(params, a, fusion.fuse(params, b, c))

        assert left == right

    @pytest.mark.parametrize(
        "left, right",
        [
            (atom(1, 2, 1), atom(2, 2, -1)),
            (atom(1, 1, 0), fusion.FusionElement.typical(0.3)),
            (fusion.FusionElement.typical(0.1), fusion.FusionElement.typical(-0.4)),
        ],
    )
    def test_quantum_dimension_is_multiplicative(self, trivial, left, right):
        report = fusion.qdim_hom_check(trivial, complex(0.3, 0.1), left, right)

        assert report.rel_residual < 1e-9


# ---- Verlinde Tests ----
class TestVerlinde:

    def test_lee_yang(self, lee_yang):
        # Arrange
        table = model.kac_table(lee_yang)
        vacuum = table.index(model.minimal_model_vacuum(lee_yang))
        phi = 1 - vacuum

        # Act
        N = fusion.verlinde_coeffs(modular.smatrix_virasoro(lee_yang), vacuum)

        # Assert
        assert N[phi, phi, vacuum] == 1
        assert N[phi, phi, phi] == 1
        assert N[vacuum, phi, phi] == 1
        assert N[vacuum, vacuum, phi] == 0

    @pytest.mark.parametrize("k", range(0, 5))
    def test_su2(self, k):
        assert np.array_equal(fusion.verlinde_coeffs(modular.smatrix_wzw(k)), fusion.su2_fusion_rules(k))

    def test_non_integral(self):
        with pytest.raises(fusion.VerlindeIntegralityError):
            fusion.verlinde_coeffs(np.array([[1.0, 0.3], [0.2, 1.0]]))


# ---- Strip image Tests ----
class TestStripImages:

    def test_one_p_strip(self):
        # Act
        report = fusion.image_ring_check(value.ModelParams.one_p(3), 1)

        # Assert
        assert report.matches()
        assert report.target == "SU(2) level 1"
        assert report.basis == [(1, 1, 0), (1, 2, 0)]

    @pytest.mark.parametrize("p", [3, 4])
    def test_image_rank_of_one_p_models(self, p):
        assert fusion.image_rank(value.ModelParams.one_p(p)) == p - 1
