"""The four operator families, their right inverses and power iteration.

=================  ==============================  =====================================
family             T                               S (TS = I on the dense class)
=================  ==============================  =====================================
derivative         (a_k) ↦ ((k+1) a_{k+1})         integration ∫_0^z
laplacian          X_nY_l ↦ X_{n-2}Y_l + X_nY_{l-2}  Σ_j (-1)^j X_{n-2j} Y_{l+2j+2}
translation-lp     (Tf)(t) = w^t f(t+a)            w^{-(t-a)} f(t-a) on t > a
translation-c0     (Tf)(t) = w^t f(t+a)            adds the ramp f(0) t / a on [0, a)
=================  ==============================  =====================================
"""

import logging
import math
from collections.abc import Callable
from fractions import Fraction
from math import comb, perm

from pydantic import BaseModel, ConfigDict, ValidationError

from .config import OperatorConfig, OperatorVariant
from .exceptions import CapacityError, InternalCheckError, InvalidArgumentError
from .settings import settings
from .spaces import (
    Element,
    NormalizedBivarPoly,
    PiecewiseExpPoly,
    TaylorCoeffs,
    ensure_member,
)

logger = logging.getLogger(__name__)


class IterateResult(BaseModel):
    """T^k f (or S^k f) with its domain verdict."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int
    value: Element
    in_domain: bool


# === Hardy space ===


def _derivative_power(f: TaylorCoeffs, k: int) -> TaylorCoeffs:
    """D^k: a_{j+k} ↦ (j+1)…(j+k) a_{j+k} at index j."""
    return TaylorCoeffs.canonical(c * perm(j + k, k) for j, c in enumerate(f.coeffs[k:]))


def _integration_power(f: TaylorCoeffs, k: int) -> TaylorCoeffs:
    """S^k: a_j ↦ a_j / ((j+1)…(j+k)) at index j+k, one exact integer divisor per term."""
    return TaylorCoeffs.canonical([0] * k + [c / perm(j + k, k) for j, c in enumerate(f.coeffs)])


# === Laplacian on the normalized basis ===


def _laplacian(f: NormalizedBivarPoly) -> NormalizedBivarPoly:
    out: list[tuple[int, int, float]] = []
    for n, l, c in f.terms:
        if n >= 2:
            out.append((n - 2, l, c))
        if l >= 2:
            out.append((n, l - 2, c))
    return NormalizedBivarPoly.canonical(out)


def _laplacian_inverse(f: NormalizedBivarPoly) -> NormalizedBivarPoly:
    out: list[tuple[int, int, float]] = []
    for n, l, c in f.terms:
        # X_m with m < 0 is zero, so the series stops at j = n // 2
        for j in range(n // 2 + 1):
            out.append((n - 2 * j, l + 2 * j + 2, -c if j % 2 else c))
    return NormalizedBivarPoly.canonical(out)


# === Weighted translations ===


def _value_at_origin(f: PiecewiseExpPoly) -> float:
    if not f.pieces or f.pieces[0].lo != 0:
        return 0.0
    return math.fsum(t.c for t in f.pieces[0].terms if t.d == 0)


def _translate_left(op: OperatorConfig, f: PiecewiseExpPoly) -> PiecewiseExpPoly:
    """(Tf)(t) = w^t f(t+a) = Σ c w^{qa} (t+a)^d w^{(q+1)t}, clipped to [0, ∞)."""
    assert op.a is not None
    a = op.a
    pieces = []
    for piece in f.pieces:
        hi = piece.hi - a
        if hi <= 0:
            continue
        terms = []
        for term in piece.terms:
            factor = term.c * f.base ** float(term.q * a)
            for j in range(term.d + 1):
                terms.append((factor * float(comb(term.d, j) * a ** (term.d - j)), j, term.q + 1))
        pieces.append((max(piece.lo - a, Fraction(0)), hi, terms))
    return PiecewiseExpPoly.canonical(f.base, pieces, continuous=f.continuous)


def _translate_right(op: OperatorConfig, f: PiecewiseExpPoly) -> PiecewiseExpPoly:
    """(Sf)(t) = w^{-(t-a)} f(t-a) = Σ c w^{-(q-1)a} (t-a)^d w^{(q-1)t} on [lo+a, hi+a)."""
    assert op.a is not None
    a = op.a
    pieces = []
    for piece in f.pieces:
        terms = []
        for term in piece.terms:
            factor = term.c * f.base ** float(-(term.q - 1) * a)
            for j in range(term.d + 1):
                terms.append(
                    (factor * float(comb(term.d, j) * (-a) ** (term.d - j)), j, term.q - 1)
                )
        pieces.append((piece.lo + a, piece.hi + a, terms))
    if op.variant == OperatorVariant.TRANSLATION_C0:
        origin = _value_at_origin(f)
        if origin != 0.0:
            pieces.append((Fraction(0), a, [(origin / float(a), 1, Fraction(0))]))
    return PiecewiseExpPoly.canonical(f.base, pieces, continuous=f.continuous)


# === Dispatch ===


def _step_T(op: OperatorConfig, f: Element) -> Element:
    if op.variant == OperatorVariant.DERIVATIVE:
        assert isinstance(f, TaylorCoeffs)
        return _derivative_power(f, 1)
    if op.variant == OperatorVariant.LAPLACIAN:
        assert isinstance(f, NormalizedBivarPoly)
        return _laplacian(f)
    assert isinstance(f, PiecewiseExpPoly)
    return _translate_left(op, f)


def _step_S(op: OperatorConfig, f: Element) -> Element:
    if op.variant == OperatorVariant.DERIVATIVE:
        assert isinstance(f, TaylorCoeffs)
        return _integration_power(f, 1)
    if op.variant == OperatorVariant.LAPLACIAN:
        assert isinstance(f, NormalizedBivarPoly)
        return _laplacian_inverse(f)
    assert isinstance(f, PiecewiseExpPoly)
    return _translate_right(op, f)


def apply_T(op: OperatorConfig, f: Element) -> Element:
    """One application of T."""
    ensure_member(op.space, f)
    return _step_T(op, f)


def apply_S(op: OperatorConfig, f: Element) -> Element:
    """One application of the right inverse S."""
    ensure_member(op.space, f)
    return _step_S(op, f)


# === Powers ===


def domain_weight_exponent(
    op: OperatorConfig, k: int, use_S: bool = False
) -> tuple[Fraction, Fraction]:
    """Slope and intercept of the composite weight exponent after k steps.

    Built one step at a time from the single-step weights, so comparing with
    the closed forms T^k f(t) = w^{kt + k(k-1)a/2} f(t+ka) and
    S^k f(t) = w^{-kt + k(k+1)a/2} f(t-ka) checks the domain formula.
    """
    if op.a is None:
        raise InvalidArgumentError("only translations carry a weight", details={"op": op.label()})
    a = op.a
    slope, intercept = Fraction(0), Fraction(0)
    for _ in range(k):
        if use_S:
            slope, intercept = slope - 1, intercept + a - slope * a
        else:
            slope, intercept = slope + 1, intercept + slope * a
    return slope, intercept


def _check_domain_weight(op: OperatorConfig, k: int, use_S: bool) -> bool:
    assert op.a is not None
    expected = (
        (Fraction(-k), Fraction(k * (k + 1), 2) * op.a)
        if use_S
        else (Fraction(k), Fraction(k * (k - 1), 2) * op.a)
    )
    actual = domain_weight_exponent(op, k, use_S)
    if actual != expected:
        raise InternalCheckError(
            "composite weight exponent disagrees with the domain formula",
            details={"k": k, "expected": [str(v) for v in expected], "actual": [str(v) for v in actual]},
        )
    return True


def _max_safe_hardy_power(f: TaylorCoeffs, k: int, use_S: bool) -> int:
    power = _integration_power if use_S else _derivative_power
    lo, hi = 0, k
    while lo < hi:
        mid = (lo + hi + 1) // 2
        try:
            power(f, mid)
        except (OverflowError, ValidationError):
            hi = mid - 1
        else:
            lo = mid
    return lo


def iterate(op: OperatorConfig, k: int, f: Element, use_S: bool = False) -> IterateResult:
    """T^k f, or S^k f when ``use_S``.

    Raises:
        InvalidArgumentError: k is negative.
        CapacityError: coefficients left floating-point range; ``details``
            carries the largest power that still fits.
    """
    if k < 0:
        raise InvalidArgumentError("power must be non-negative", details={"k": k})
    ensure_member(op.space, f)

    if op.variant == OperatorVariant.DERIVATIVE:
        assert isinstance(f, TaylorCoeffs)
        try:
            value: Element = _integration_power(f, k) if use_S else _derivative_power(f, k)
        except (OverflowError, ValidationError):
            max_safe = _max_safe_hardy_power(f, k, use_S)
            logger.warning("Capacity exceeded", extra={"op": op.label(), "k": k, "max_safe_k": max_safe})
            raise CapacityError(
                f"power {k} exceeds floating-point range",
                details={"k": k, "max_safe_k": max_safe},
            ) from None
        return IterateResult(k=k, value=value, in_domain=True)

    step: Callable[[OperatorConfig, Element], Element] = _step_S if use_S else _step_T
    value = f
    for done in range(k):
        if value.is_zero():
            break
        try:
            value = step(op, value)
        except (OverflowError, ValidationError):
            logger.warning("Capacity exceeded", extra={"op": op.label(), "k": k, "max_safe_k": done})
            raise CapacityError(
                f"power {k} exceeds floating-point range",
                details={"k": k, "max_safe_k": done},
            ) from None

    in_domain = _check_domain_weight(op, k, use_S) if op.is_translation else True
    return IterateResult(k=k, value=value, in_domain=in_domain)


def inverse_factorial(n: int) -> float:
    """1/n!, exact below the log-space threshold and through lgamma above it."""
    if n <= settings.LOG_SPACE_THRESHOLD:
        return 1.0 / math.factorial(n)
    return math.exp(-math.lgamma(n + 1))


def s_power_norm_bound(op: OperatorConfig, n: int) -> float | None:
    """Closed-form bound β(n) with ‖S^n f‖ ≤ β(n)‖f‖ on the dense class.

    None for the Laplacian, whose decay is only observed, not bounded.
    """
    if n < 0:
        raise InvalidArgumentError("power must be non-negative", details={"n": n})
    if op.variant == OperatorVariant.DERIVATIVE:
        # ‖S^n z^k‖ = k!/(k+n)! ≤ 1/n!
        return inverse_factorial(n)
    if op.variant == OperatorVariant.LAPLACIAN:
        return None
    assert op.a is not None and op.w is not None
    if op.variant == OperatorVariant.TRANSLATION_LP:
        exponent = Fraction(n * (n - 1), 2) * op.a
    else:
        # The ramp piece on [0, a) is not damped, so C₀ loses one step
        exponent = Fraction(max(n - 1, 0) * max(n - 2, 0), 2) * op.a
    return math.exp(-float(exponent) * math.log(op.w))
