"""Tests for hypermix.quadrature module."""

import math

import numpy as np
import pytest

from hypermix.quadrature import FloatArray, integrate, maximize_abs


class TestIntegrate:
    """Tests for adaptive Gauss–Legendre integration."""

    def test_polynomial_exact(self) -> None:
        """Test ∫₀² t³ dt = 4."""
        assert integrate(lambda t: t**3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-12)

    def test_exponential(self) -> None:
        """Test ∫₀¹ 2^{-t} dt = 1/(2 ln 2)."""
        assert integrate(lambda t: 2.0**-t, 0.0, 1.0) == pytest.approx(1 / (2 * math.log(2)))

    def test_kink_needs_refinement(self) -> None:
        """Test |t - 1/3| on [0, 1] converges through halving."""
        value = integrate(lambda t: np.abs(t - 1 / 3), 0.0, 1.0)
        assert value == pytest.approx(5 / 18, abs=1e-9)

    def test_empty_interval(self) -> None:
        """Test a reversed interval integrates to zero."""
        assert integrate(lambda t: t, 1.0, 1.0) == 0.0


class TestMaximizeAbs:
    """Tests for the supremum search."""

    def test_endpoint(self) -> None:
        """Test a monotone function peaks at an endpoint."""
        assert maximize_abs(lambda t: -3 * t, 0.0, 2.0) == 6.0

    def test_critical_point(self) -> None:
        """Test a supplied interior critical point is used."""
        value = maximize_abs(lambda t: t * (1 - t), 0.0, 1.0, critical_points=[0.5])
        assert value == pytest.approx(0.25)

    def test_derivative_sign_change(self) -> None:
        """Test an interior maximum is located from the derivative."""

        def f(t: FloatArray) -> FloatArray:
            return np.sin(3 * t)

        def df(t: FloatArray) -> FloatArray:
            return 3 * np.cos(3 * t)

        assert maximize_abs(f, 0.0, 1.0, derivative=df) == pytest.approx(1.0, abs=1e-12)
