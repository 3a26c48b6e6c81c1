"""Shared fixtures for tests."""

from fractions import Fraction

import pytest
from click.testing import CliRunner
from hypothesis import HealthCheck
from hypothesis import settings as hypothesis_settings

from hypermix.config import OperatorConfig, OperatorVariant

hypothesis_settings.register_profile(
    "default",
    max_examples=25,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
hypothesis_settings.load_profile("default")


@pytest.fixture
def derivative() -> OperatorConfig:
    """D on H²."""
    return OperatorConfig(variant=OperatorVariant.DERIVATIVE)


@pytest.fixture
def laplacian() -> OperatorConfig:
    """Δ on polynomials of the unit square."""
    return OperatorConfig(variant=OperatorVariant.LAPLACIAN)


@pytest.fixture
def translation_lp() -> OperatorConfig:
    """(Tf)(t) = 2^t f(t + 1) on L_1."""
    return OperatorConfig(variant=OperatorVariant.TRANSLATION_LP, w=2.0, a=Fraction(1), p=1.0)


@pytest.fixture
def translation_c0() -> OperatorConfig:
    """(Tf)(t) = 2^t f(t + 1) on C₀."""
    return OperatorConfig(variant=OperatorVariant.TRANSLATION_C0, w=2.0, a=Fraction(1))


@pytest.fixture(params=["derivative", "laplacian", "translation_lp", "translation_c0"])
def any_op(request: pytest.FixtureRequest) -> OperatorConfig:
    """Each operator family in turn."""
    op: OperatorConfig = request.getfixturevalue(request.param)
    return op


@pytest.fixture
def runner() -> CliRunner:
    """Create a CLI test runner."""
    return CliRunner()
