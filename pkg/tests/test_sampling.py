"""Tests for hypermix.sampling module."""

import pytest

from hypermix.config import OperatorConfig
from hypermix.sampling import make_rng, random_ball, random_element, random_taylor
from hypermix.spaces import PiecewiseExpPoly, ensure_member, hardy_norm


class TestSampling:
    """Tests for seeded random elements."""

    def test_same_seed_same_element(self, any_op: OperatorConfig) -> None:
        """Test a seed fixes the element."""
        assert random_element(make_rng(5), any_op) == random_element(make_rng(5), any_op)

    def test_elements_belong_to_space(self, any_op: OperatorConfig) -> None:
        """Test random elements are canonical members."""
        rng = make_rng(9)
        for _ in range(10):
            ensure_member(any_op.space, random_element(rng, any_op))

    def test_c0_elements_continuous(self, translation_c0: OperatorConfig) -> None:
        """Test C₀ samples carry the continuous tag."""
        rng = make_rng(2)
        for _ in range(10):
            f = random_element(rng, translation_c0)
            assert isinstance(f, PiecewiseExpPoly)
            assert f.continuous

    def test_unit_norm(self) -> None:
        """Test unit_norm rescales nonzero polynomials."""
        f = random_taylor(make_rng(4), max_degree=6, unit_norm=True)
        if not f.is_zero():
            assert hardy_norm(f) == pytest.approx(1.0)

    def test_ball_radius(self, any_op: OperatorConfig) -> None:
        """Test balls have a positive radius at least min_radius."""
        ball = random_ball(make_rng(1), any_op, min_radius=0.1)
        assert ball.radius >= 0.1
