"""Tests for hypermix.spaces module."""

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from hypermix.exceptions import InvalidArgumentError, InvalidElementError, SpaceMismatchError
from hypermix.quadrature import integrate
from hypermix.sampling import make_rng, random_element, random_piecewise
from hypermix.spaces import (
    BallSpec,
    ExpTerm,
    FunctionSpace,
    NormalizedBivarPoly,
    Piece,
    PiecewiseExpPoly,
    SpaceKind,
    TaylorCoeffs,
    add,
    distance,
    element_from_json,
    element_to_json,
    ensure_member,
    norm,
    parse_rational,
    scale,
    sup_norm,
    zero_element,
)
from hypermix.verification import FAMILIES

HARDY = FunctionSpace(kind=SpaceKind.HARDY)
BIVAR = FunctionSpace(kind=SpaceKind.BIVAR_POLY)
L1 = FunctionSpace(kind=SpaceKind.TRANSLATION_LP, w=2.0, a=Fraction(1), p=1.0)
L2 = FunctionSpace(kind=SpaceKind.TRANSLATION_LP, w=2.0, a=Fraction(1), p=2.0)
C0 = FunctionSpace(kind=SpaceKind.TRANSLATION_C0, w=2.0, a=Fraction(1))


class TestFunctionSpace:
    """Tests for space tags and their parameters."""

    def test_translation_requires_base_above_one(self) -> None:
        """Test translation spaces reject w ≤ 1."""
        with pytest.raises(ValidationError, match="w > 1"):
            FunctionSpace(kind=SpaceKind.TRANSLATION_LP, w=1.0, a=Fraction(1))

    def test_translation_requires_positive_step(self) -> None:
        """Test translation spaces reject a ≤ 0."""
        with pytest.raises(ValidationError, match="a > 0"):
            FunctionSpace(kind=SpaceKind.TRANSLATION_C0, w=2.0, a=Fraction(0))

    def test_hardy_takes_no_weight(self) -> None:
        """Test the Hardy space rejects translation parameters."""
        with pytest.raises(ValidationError):
            FunctionSpace(kind=SpaceKind.HARDY, w=2.0)

    def test_p_only_on_lp(self) -> None:
        """Test p is rejected outside L_p."""
        with pytest.raises(ValidationError, match="translation-lp"):
            FunctionSpace(kind=SpaceKind.TRANSLATION_C0, w=2.0, a=Fraction(1), p=2.0)

    def test_exponent_defaults_to_one(self) -> None:
        """Test an unset p means L_1."""
        space = FunctionSpace(kind=SpaceKind.TRANSLATION_LP, w=2.0, a=Fraction(1))
        assert space.exponent == 1.0

    def test_rational_step_parses_from_string(self) -> None:
        """Test a is accepted as a fraction string."""
        space = FunctionSpace(kind=SpaceKind.TRANSLATION_LP, w=2.0, a="1/2")
        assert space.a == Fraction(1, 2)


class TestRationals:
    """Tests for rational parsing."""

    def test_parse_fraction_string(self) -> None:
        """Test 'p/q' strings parse exactly."""
        assert parse_rational("3/2") == Fraction(3, 2)

    def test_parse_decimal_float(self) -> None:
        """Test floats go through their shortest decimal form."""
        assert parse_rational(0.1) == Fraction(1, 10)


class TestTaylorCoeffs:
    """Tests for Hardy-space elements."""

    def test_canonical_drops_trailing_zeros(self) -> None:
        """Test trailing zero coefficients are trimmed."""
        assert TaylorCoeffs.canonical([1, 2, 0, 0]).coeffs == (1, 2)

    def test_zero_has_degree_minus_one(self) -> None:
        """Test the zero element has no coefficients."""
        assert TaylorCoeffs().degree == -1

    def test_add(self) -> None:
        """Test add([1], [0,1]) = [1,1]."""
        result = add(TaylorCoeffs.canonical([1]), TaylorCoeffs.canonical([0, 1]))
        assert result == TaylorCoeffs.canonical([1, 1])

    def test_scale_by_zero(self) -> None:
        """Test scaling by zero gives the zero element."""
        assert scale(0, TaylorCoeffs.canonical([1, 2, 3])).is_zero()

    def test_truncate(self) -> None:
        """Test truncation keeps degrees below n."""
        f = TaylorCoeffs.canonical([1, 2, 3, 4])
        assert f.truncate(2) == TaylorCoeffs.canonical([1, 2])

    def test_norm_constant(self) -> None:
        """Test ‖1‖ = 1."""
        assert norm(HARDY, TaylorCoeffs.canonical([1])) == 1.0

    def test_norm_is_coefficient_l2(self) -> None:
        """Test ‖1 + 2z³‖ = √5."""
        assert norm(HARDY, TaylorCoeffs.canonical([1, 0, 0, 2])) == pytest.approx(math.sqrt(5))

    def test_complex_coefficients(self) -> None:
        """Test complex coefficients contribute their modulus."""
        assert norm(HARDY, TaylorCoeffs.canonical([3j, 4])) == pytest.approx(5.0)


class TestNormalizedBivarPoly:
    """Tests for Laplacian-space elements."""

    def test_norm_of_one(self) -> None:
        """Test ∬1 = 1."""
        assert norm(BIVAR, NormalizedBivarPoly.monomial(0, 0)) == pytest.approx(1.0)

    def test_norm_of_x(self) -> None:
        """Test ‖x‖ = 1/√3 through the Gram entry."""
        assert norm(BIVAR, NormalizedBivarPoly.monomial(1, 0)) == pytest.approx(1 / math.sqrt(3))

    def test_norm_of_y_squared_half(self) -> None:
        """Test ‖Y₂‖ = √(1/20)."""
        assert norm(BIVAR, NormalizedBivarPoly.monomial(0, 2)) == pytest.approx(math.sqrt(1 / 20))

    def test_norm_uses_cross_terms(self) -> None:
        """Test ‖1 - x‖ = 1/√3, which needs the off-diagonal Gram entries."""
        f = NormalizedBivarPoly.canonical([(0, 0, 1.0), (1, 0, -1.0)])
        assert norm(BIVAR, f) == pytest.approx(1 / math.sqrt(3))

    def test_monomial_basis_conversion(self) -> None:
        """Test x² = 2·X₂ and back."""
        f = NormalizedBivarPoly.from_monomial_coefficients({(2, 0): 1.0})
        assert f.coefficients == {(2, 0): 2.0}
        assert f.to_monomial_coefficients() == {(2, 0): 1.0}

    def test_canonical_sums_duplicates(self) -> None:
        """Test repeated indices are summed and cancelled terms dropped."""
        f = NormalizedBivarPoly.canonical([(1, 1, 2.0), (1, 1, -2.0), (0, 3, 1.0)])
        assert f.coefficients == {(0, 3): 1.0}

    def test_total_degree_truncation(self) -> None:
        """Test truncation keeps n + l below the limit."""
        f = NormalizedBivarPoly.canonical([(0, 0, 1.0), (1, 1, 1.0), (3, 2, 1.0)])
        assert f.truncate_total_degree(3).coefficients == {(0, 0): 1.0, (1, 1): 1.0}

    def test_complex_scale_rejected(self) -> None:
        """Test real-scalar spaces refuse complex scalars."""
        with pytest.raises(InvalidArgumentError):
            NormalizedBivarPoly.monomial(1, 0).scaled(1j)


class TestPiecewiseExpPoly:
    """Tests for translation-space elements."""

    def test_overlaps_are_summed(self) -> None:
        """Test overlapping indicators split into three pieces."""
        f = PiecewiseExpPoly.indicator(2.0, 0, 2) + PiecewiseExpPoly.indicator(2.0, 1, 3)
        assert [(p.lo, p.hi, p.terms[0].c) for p in f.pieces] == [
            (0, 1, 1.0),
            (1, 2, 2.0),
            (2, 3, 1.0),
        ]

    def test_touching_pieces_merge(self) -> None:
        """Test identical neighbouring pieces are merged."""
        f = PiecewiseExpPoly.indicator(2.0, 0, 1) + PiecewiseExpPoly.indicator(2.0, 1, 2)
        assert len(f.pieces) == 1
        assert f.support_sup == 2

    def test_cancellation_leaves_zero(self) -> None:
        """Test f - f is the zero element."""
        f = PiecewiseExpPoly.indicator(2.0, 0, 1)
        assert (f - f).is_zero()

    def test_evaluate_closed_on_the_left(self) -> None:
        """Test χ[0,1) is 1 at 0 and 0 at 1."""
        f = PiecewiseExpPoly.indicator(2.0, 0, 1)
        assert f.evaluate(0.0) == 1.0
        assert f.evaluate(1.0) == 0.0

    def test_ramp_is_continuous(self) -> None:
        """Test the hat function carries the continuous tag."""
        hat = PiecewiseExpPoly.ramp(2.0)
        assert hat.continuous
        assert hat.evaluate(0.25) == pytest.approx(0.75)

    def test_jump_cannot_be_tagged_continuous(self) -> None:
        """Test an indicator fails the continuity validation."""
        with pytest.raises(ValidationError, match="jump"):
            PiecewiseExpPoly.canonical(2.0, [(0, 1, [(1.0, 0, 0)])], continuous=True)

    def test_restrict(self) -> None:
        """Test restriction to [0, 2) of χ[0,3)."""
        f = PiecewiseExpPoly.indicator(2.0, 0, 3).restrict(0, 2)
        assert f == PiecewiseExpPoly.indicator(2.0, 0, 2)

    def test_infinite_coefficient_rejected(self) -> None:
        """Test non-finite coefficients fail validation."""
        with pytest.raises(ValidationError):
            ExpTerm(c=math.inf)

    def test_different_bases_do_not_add(self) -> None:
        """Test adding elements with different w raises."""
        with pytest.raises(SpaceMismatchError):
            PiecewiseExpPoly.indicator(2.0, 0, 1) + PiecewiseExpPoly.indicator(3.0, 0, 1)


class TestTranslationNorms:
    """Tests for L_p and sup norms."""

    def test_unit_box(self) -> None:
        """Test ‖χ(0,1)‖₁ = 1."""
        assert norm(L1, PiecewiseExpPoly.indicator(2.0, 0, 1)) == pytest.approx(1.0)

    def test_lp_exponent(self) -> None:
        """Test ‖χ(0,4)‖₂ = 2."""
        assert norm(L2, PiecewiseExpPoly.indicator(2.0, 0, 4)) == pytest.approx(2.0)

    def test_exponential_closed_form(self) -> None:
        """Test ∫₀¹ 2^{-t} dt = 1/(2 ln 2)."""
        f = PiecewiseExpPoly.canonical(2.0, [(0, 1, [(1.0, 0, -1)])])
        assert norm(L1, f) == pytest.approx(1 / (2 * math.log(2)))

    def test_quadrature_for_polynomial_factor(self) -> None:
        """Test ∫₀¹ t dt = 1/2 through quadrature."""
        f = PiecewiseExpPoly.canonical(2.0, [(0, 1, [(1.0, 1, 0)])])
        assert norm(L1, f) == pytest.approx(0.5, abs=1e-9)

    def test_sup_of_ramp(self) -> None:
        """Test ‖hat‖∞ = 1."""
        assert norm(C0, PiecewiseExpPoly.ramp(2.0)) == pytest.approx(1.0)

    def test_sup_at_interior_critical_point(self) -> None:
        """Test sup t·2^{-t} = 1/(e ln 2) at t = 1/ln 2."""
        f = PiecewiseExpPoly.canonical(2.0, [(0, 4, [(1.0, 1, -1)])])
        assert sup_norm(f) == pytest.approx(1 / (math.e * math.log(2)), rel=1e-9)

    def test_distance_to_self(self) -> None:
        """Test distance(χ, χ) = 0."""
        f = PiecewiseExpPoly.indicator(2.0, 0, 1)
        assert distance(L1, f, f) == 0.0


class TestMembership:
    """Tests for membership checks and zero elements."""

    def test_wrong_type(self) -> None:
        """Test a bivariate polynomial is not a Hardy element."""
        with pytest.raises(SpaceMismatchError):
            ensure_member(HARDY, NormalizedBivarPoly.monomial(0, 0))

    def test_wrong_base(self) -> None:
        """Test a piecewise element with another base is rejected."""
        with pytest.raises(SpaceMismatchError):
            ensure_member(L1, PiecewiseExpPoly.indicator(3.0, 0, 1))

    def test_c0_rejects_jump(self) -> None:
        """Test an untagged indicator is not a C₀ element."""
        with pytest.raises(InvalidElementError, match="continuous"):
            ensure_member(C0, PiecewiseExpPoly.indicator(2.0, 0, 1))

    def test_c0_accepts_ramp(self) -> None:
        """Test a continuous ramp is a C₀ element."""
        ensure_member(C0, PiecewiseExpPoly.ramp(2.0, 3))

    def test_mixed_addition(self) -> None:
        """Test adding elements of different spaces raises."""
        with pytest.raises(SpaceMismatchError):
            TaylorCoeffs.canonical([1]) + NormalizedBivarPoly.monomial(0, 0)  # type: ignore[operator]

    @pytest.mark.parametrize("space", [HARDY, BIVAR, L1, C0])
    def test_zero_element_has_zero_norm(self, space: FunctionSpace) -> None:
        """Test the zero vector of each space."""
        assert norm(space, zero_element(space)) == 0.0

    def test_c0_zero_is_continuous(self) -> None:
        """Test the C₀ zero element carries the continuous tag."""
        zero = zero_element(C0)
        assert isinstance(zero, PiecewiseExpPoly)
        assert zero.continuous


class TestBallSpec:
    """Tests for open balls."""

    def test_boundary_is_outside(self) -> None:
        """Test membership is strict."""
        ball = BallSpec(space=HARDY, center=TaylorCoeffs(), radius=1.0)
        assert not ball.contains(TaylorCoeffs.canonical([0, 1]))
        assert ball.contains(TaylorCoeffs.canonical([0, 0.5]))

    def test_radius_must_be_positive(self) -> None:
        """Test a zero radius is rejected."""
        with pytest.raises(ValidationError):
            BallSpec(space=HARDY, center=TaylorCoeffs(), radius=0.0)

    def test_center_must_belong_to_space(self) -> None:
        """Test a center from another space is rejected."""
        with pytest.raises(ValidationError):
            BallSpec(space=HARDY, center=NormalizedBivarPoly(), radius=1.0)


class TestElementJson:
    """Tests for element serialization."""

    def test_tagged_with_space(self) -> None:
        """Test the JSON payload names its space."""
        payload = element_to_json(BIVAR, NormalizedBivarPoly.monomial(2, 1, 3.0))
        assert payload["space"] == "bivar-poly"

    def test_piecewise_round_trip(self) -> None:
        """Test rational breakpoints and exponents survive serialization."""
        f = PiecewiseExpPoly.canonical(2.0, [("1/3", "5/2", [(1.5, 2, Fraction(-1, 2))])])
        assert element_from_json(L1, element_to_json(L1, f)) == f

    def test_hardy_round_trip(self) -> None:
        """Test complex coefficients survive serialization."""
        f = TaylorCoeffs.canonical([1, 0, 2 - 1j])
        assert element_from_json(HARDY, element_to_json(HARDY, f)) == f

    def test_wrong_space_tag(self) -> None:
        """Test JSON tagged for another space is rejected."""
        payload = element_to_json(HARDY, TaylorCoeffs.canonical([1]))
        with pytest.raises(SpaceMismatchError):
            element_from_json(BIVAR, payload)


class TestNormProperties:
    """Property tests for the norms."""

    @pytest.mark.parametrize("n,l", [(0, 0), (1, 3), (4, 2), (10, 10)])
    def test_gram_matches_quadrature(self, n: int, l: int) -> None:
        """Test the Gram norm of X_nY_l against direct quadrature."""
        one_d = integrate(lambda t: (t**n / math.factorial(n)) ** 2, 0.0, 1.0)
        other = integrate(lambda t: (t**l / math.factorial(l)) ** 2, 0.0, 1.0)
        expected = math.sqrt(one_d * other)
        assert norm(BIVAR, NormalizedBivarPoly.monomial(n, l)) == pytest.approx(
            expected, rel=1e-10, abs=1e-10
        )

    def test_split_piece_same_norm(self) -> None:
        """Test splitting a piece at an interior point keeps the norm."""
        terms = (ExpTerm(c=1.0, d=1, q=Fraction(-1)),)
        whole = PiecewiseExpPoly(base=2.0, pieces=(Piece(lo=0, hi=2, terms=terms),))
        split = PiecewiseExpPoly(
            base=2.0,
            pieces=(Piece(lo=0, hi="2/3", terms=terms), Piece(lo="2/3", hi=2, terms=terms)),
        )
        assert norm(L1, split) == pytest.approx(norm(L1, whole), abs=1e-10)
        assert norm(L2, split) == pytest.approx(norm(L2, whole), abs=1e-10)

    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_triangle_and_homogeneity(self, seed: int) -> None:
        """Test ‖x + y‖ ≤ ‖x‖ + ‖y‖ and ‖αx‖ = |α|‖x‖."""
        rng = make_rng(seed)
        for op in FAMILIES:
            space = op.space
            x, y = random_element(rng, op), random_element(rng, op)
            assert norm(space, add(x, y)) <= norm(space, x) + norm(space, y) + 1e-10
            assert norm(space, scale(-2.5, x)) == pytest.approx(2.5 * norm(space, x), abs=1e-10)

    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_canonical_idempotent(self, seed: int) -> None:
        """Test re-canonicalizing a piecewise element changes nothing."""
        f = random_piecewise(make_rng(seed), 2.0)
        again = PiecewiseExpPoly.canonical(
            f.base, [(p.lo, p.hi, [(t.c, t.d, t.q) for t in p.terms]) for p in f.pieces]
        )
        assert again == f
