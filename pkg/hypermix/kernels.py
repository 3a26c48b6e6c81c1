"""Generalized kernels: Ker T^n membership, truncation projectors and density tables."""

import logging
import math
from fractions import Fraction

from pydantic import BaseModel, ConfigDict, Field

from .config import OperatorConfig, OperatorVariant
from .exceptions import InvalidArgumentError
from .operators import apply_T, iterate
from .settings import settings
from .spaces import (
    Element,
    NormalizedBivarPoly,
    PiecewiseExpPoly,
    TaylorCoeffs,
    distance,
    ensure_member,
    zero_element,
)

logger = logging.getLogger(__name__)


class KernelProjection(BaseModel):
    """w_n ∈ Ker T^n obtained from x by truncation, with gap = ‖x - w_n‖."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    w_n: Element
    gap: float = Field(ge=0)


class DensityRow(BaseModel):
    """One row of a generalized-kernel density table."""

    model_config = ConfigDict(frozen=True)

    n: int
    gap: float
    saturated: bool


class DensityTable(BaseModel):
    """Gaps ‖x - w_n‖ for n = 1..n_max, with predicted and observed saturation."""

    model_config = ConfigDict(frozen=True)

    op: OperatorConfig
    rows: tuple[DensityRow, ...]
    predicted_saturation: int
    observed_saturation: int | None


class NonInjectivityWitness(BaseModel):
    """u ≠ v with Tu = Tv = image."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    op: OperatorConfig
    u: Element
    v: Element
    image: Element


def _taper(x: PiecewiseExpPoly, n: int, a: Fraction) -> PiecewiseExpPoly:
    """x on [0, (n-1)a), then x·(n - t/a) on [(n-1)a, na).

    The linear factor is 1 at (n-1)a and 0 at na, so the result stays
    continuous while its support ends at na; each term c t^d w^{qt} splits
    into c·n t^d w^{qt} - (c/a) t^{d+1} w^{qt}.
    """
    start, end = (n - 1) * a, n * a
    raw = [(p.lo, p.hi, [(t.c, t.d, t.q) for t in p.terms]) for p in x.restrict(0, start).pieces]
    for piece in x.restrict(start, end).pieces:
        terms = []
        for term in piece.terms:
            terms.append((term.c * n, term.d, term.q))
            terms.append((-term.c / float(a), term.d + 1, term.q))
        raw.append((piece.lo, piece.hi, terms))
    return PiecewiseExpPoly.canonical(x.base, raw, continuous=True)


def _truncate(op: OperatorConfig, x: Element, n: int) -> Element:
    if op.variant == OperatorVariant.DERIVATIVE:
        assert isinstance(x, TaylorCoeffs)
        return x.truncate(n)
    if op.variant == OperatorVariant.LAPLACIAN:
        assert isinstance(x, NormalizedBivarPoly)
        # Δ lowers total degree by two
        return x.truncate_total_degree(2 * n)
    assert isinstance(x, PiecewiseExpPoly) and op.a is not None
    restricted = x.restrict(0, n * op.a)
    if op.variant == OperatorVariant.TRANSLATION_C0 and not restricted.continuous:
        return _taper(x, n, op.a)
    return restricted


def kernel_project(op: OperatorConfig, x: Element, n: int) -> KernelProjection:
    """Project x onto Ker T^n by truncation.

    Derivative keeps degree < n, the Laplacian keeps total degree < 2n and the
    translations keep the restriction to [0, n·a). On C₀ a restriction with a
    jump at n·a is replaced by one that tapers linearly to zero over the last
    step, so w_n stays in the space.

    Raises:
        InvalidArgumentError: n < 1.
    """
    if n < 1:
        raise InvalidArgumentError("kernel index must be at least 1", details={"n": n})
    ensure_member(op.space, x)
    w_n = _truncate(op, x, n)
    return KernelProjection(n=n, w_n=w_n, gap=distance(op.space, x, w_n))


def is_in_kernel(op: OperatorConfig, f: Element, n: int) -> bool:
    """Whether T^n f vanishes up to the kernel tolerance."""
    if n < 1:
        raise InvalidArgumentError("kernel index must be at least 1", details={"n": n})
    return iterate(op, n, f).value.is_zero(settings.KERNEL_TOLERANCE)


def saturation_index(op: OperatorConfig, x: Element) -> int:
    """Least n with x ∈ Ker T^n for the truncation projectors (at least 1)."""
    ensure_member(op.space, x)
    if op.variant == OperatorVariant.DERIVATIVE:
        assert isinstance(x, TaylorCoeffs)
        index = x.degree + 1
    elif op.variant == OperatorVariant.LAPLACIAN:
        assert isinstance(x, NormalizedBivarPoly)
        index = math.ceil((x.total_degree + 1) / 2)
    else:
        assert isinstance(x, PiecewiseExpPoly) and op.a is not None
        index = math.ceil(x.support_sup / op.a)
    return max(index, 1)


def gk_density_table(op: OperatorConfig, x: Element, n_max: int) -> DensityTable:
    """Kernel gaps for n = 1..n_max.

    For the finite element classes the gap reaches exactly zero at
    ``saturation_index(op, x)``; ``observed_saturation`` is the first n from
    which every tabulated gap is zero.
    """
    if n_max < 1:
        raise InvalidArgumentError("n_max must be at least 1", details={"n_max": n_max})
    rows = []
    for n in range(1, n_max + 1):
        gap = kernel_project(op, x, n).gap
        rows.append(DensityRow(n=n, gap=gap, saturated=gap == 0.0))

    observed: int | None = None
    for row in reversed(rows):
        if not row.saturated:
            break
        observed = row.n
    predicted = saturation_index(op, x)
    logger.debug(
        "Density table built",
        extra={"op": op.label(), "predicted": predicted, "observed": observed},
    )
    return DensityTable(
        op=op, rows=tuple(rows), predicted_saturation=predicted, observed_saturation=observed
    )


def nonzero_kernel_element(op: OperatorConfig) -> NonInjectivityWitness:
    """A nonzero u with Tu = T0 = 0, exhibiting that T is not injective."""
    space = op.space
    u: Element
    if op.variant == OperatorVariant.DERIVATIVE:
        u = TaylorCoeffs.monomial(0)
    elif op.variant == OperatorVariant.LAPLACIAN:
        # X_1 Y_1 = xy is harmonic
        u = NormalizedBivarPoly.monomial(1, 1)
    else:
        assert op.w is not None and op.a is not None
        # anything supported in [0, a) is pushed off the half-line by one step
        if op.variant == OperatorVariant.TRANSLATION_C0:
            u = PiecewiseExpPoly.ramp(op.w, op.a)
        else:
            u = PiecewiseExpPoly.indicator(op.w, 0, op.a)
    v = zero_element(space)
    image = apply_T(op, u)
    return NonInjectivityWitness(op=op, u=u, v=v, image=image)
