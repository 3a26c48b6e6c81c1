"""Random canonical elements and balls drawn from a seeded numpy generator."""

from fractions import Fraction

import numpy as np

from .config import OperatorConfig, OperatorVariant
from .spaces import (
    BallSpec,
    Element,
    NormalizedBivarPoly,
    PiecewiseExpPoly,
    TaylorCoeffs,
    hardy_norm,
    norm,
)

# Breakpoints are drawn from this grid of quarters
_GRID = Fraction(1, 4)


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_taylor(
    rng: np.random.Generator, max_degree: int = 8, unit_norm: bool = False
) -> TaylorCoeffs:
    """Complex Gaussian coefficients up to a random degree."""
    degree = int(rng.integers(0, max_degree + 1))
    raw = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
    f = TaylorCoeffs.canonical(complex(c) for c in raw)
    if unit_norm and not f.is_zero():
        f = f.scaled(1 / hardy_norm(f))
    return f


def random_bivar(
    rng: np.random.Generator,
    max_total_degree: int = 6,
    terms: int = 4,
    nonnegative: bool = False,
) -> NormalizedBivarPoly:
    """A few normalized monomials X_n Y_l with n + l ≤ max_total_degree."""
    out = []
    for _ in range(terms):
        total = int(rng.integers(0, max_total_degree + 1))
        n = int(rng.integers(0, total + 1))
        c = rng.uniform(0.1, 1.0) if nonnegative else rng.uniform(-1.0, 1.0)
        out.append((n, total - n, float(c)))
    return NormalizedBivarPoly.canonical(out)


def _breakpoints(rng: np.random.Generator, count: int, max_support: int) -> list[Fraction]:
    slots = int(max_support / _GRID)
    chosen = rng.choice(np.arange(1, slots + 1), size=min(count, slots), replace=False)
    return [_GRID * int(k) for k in sorted(chosen)]


def random_piecewise(
    rng: np.random.Generator,
    base: float,
    pieces: int = 3,
    max_support: int = 4,
    max_degree: int = 1,
) -> PiecewiseExpPoly:
    """Pieces c t^d w^{qt} on a random partition of [0, max_support)."""
    cuts = [Fraction(0), *_breakpoints(rng, pieces, max_support)]
    raw = []
    for lo, hi in zip(cuts, cuts[1:]):
        terms = [
            (
                float(rng.uniform(-1.0, 1.0)),
                int(rng.integers(0, max_degree + 1)),
                Fraction(int(rng.integers(-2, 2)), 2),
            )
            for _ in range(int(rng.integers(1, 3)))
        ]
        raw.append((lo, hi, terms))
    return PiecewiseExpPoly.canonical(base, raw)


def random_continuous(
    rng: np.random.Generator, base: float, pieces: int = 3, max_support: int = 4
) -> PiecewiseExpPoly:
    """A continuous piecewise-linear function through random nodes, zero at the right end."""
    nodes = [Fraction(0), *_breakpoints(rng, pieces, max_support)]
    values = [float(v) for v in rng.uniform(-1.0, 1.0, size=len(nodes) - 1)] + [0.0]
    raw = []
    for (lo, hi), (left, right) in zip(zip(nodes, nodes[1:]), zip(values, values[1:])):
        slope = (right - left) / float(hi - lo)
        raw.append((lo, hi, [(left - slope * float(lo), 0, 0), (slope, 1, 0)]))
    return PiecewiseExpPoly.canonical(base, raw, continuous=True)


def random_element(rng: np.random.Generator, op: OperatorConfig) -> Element:
    """A random element of the dense class of ``op``'s space."""
    if op.variant == OperatorVariant.DERIVATIVE:
        return random_taylor(rng)
    if op.variant == OperatorVariant.LAPLACIAN:
        return random_bivar(rng)
    assert op.w is not None
    if op.variant == OperatorVariant.TRANSLATION_C0:
        return random_continuous(rng, op.w)
    return random_piecewise(rng, op.w)


def random_ball(
    rng: np.random.Generator, op: OperatorConfig, min_radius: float = 0.05
) -> BallSpec:
    """A ball around a random element, radius a random fraction of the center norm."""
    center = random_element(rng, op)
    scale = max(norm(op.space, center), 1.0)
    radius = float(rng.uniform(min_radius, 1.0)) * scale
    return BallSpec(space=op.space, center=center, radius=radius)
