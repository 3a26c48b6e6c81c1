"""Exact finite elements of the operator spaces.

Three representations cover the four spaces:

* ``TaylorCoeffs``: f(z) = Σ a_k z^k in H², complex coefficients, ℓ² norm.
* ``NormalizedBivarPoly``: Σ c_{n,l} X_n Y_l with X_n = x^n/n! and Y_l = y^l/l!,
  a polynomial in L²((0,1)²) normed through the exact Gram matrix.
* ``PiecewiseExpPoly``: compactly supported pieces Σ c t^d w^{qt} on rational
  intervals [lo, hi), an element of L_p(0,∞) or, when tagged continuous, of C₀[0,∞).

Values are frozen. Validators reject non-canonical input; the ``canonical``
constructors produce canonical form from arbitrary raw data.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Mapping, Sequence
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import zip_longest
from typing import Annotated, Any, NamedTuple, TypeAlias

import numpy as np
from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    ValidationError,
    model_validator,
)

from .exceptions import (
    HypermixError,
    InvalidArgumentError,
    InvalidElementError,
    SpaceMismatchError,
)
from .quadrature import FloatArray, integrate, maximize_abs
from .settings import settings

# === Scalar field types ===


def parse_rational(value: Any) -> Fraction:
    """Coerce ints, floats, ``"p/q"`` and decimal strings to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("boolean is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("rational must be finite")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"not a rational: {value!r}") from e
    raise ValueError(f"not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Serialize as ``"p/q"``."""
    return f"{value.numerator}/{value.denominator}"


def parse_complex(value: Any) -> complex:
    """Coerce numbers, ``[re, im]`` pairs and strings like ``"1+2j"``."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a scalar")
    if isinstance(value, complex | int | float):
        return complex(value)
    if isinstance(value, list | tuple) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    raise ValueError(f"not a complex scalar: {value!r}")


def format_complex(value: complex) -> list[float]:
    """Serialize as ``[re, im]``."""
    return [value.real, value.imag]


Rational = Annotated[
    Fraction,
    BeforeValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str),
]
Scalar = Annotated[
    complex,
    BeforeValidator(parse_complex),
    PlainSerializer(format_complex, return_type=list),
]

_VALUE_CONFIG = ConfigDict(frozen=True, arbitrary_types_allowed=True, extra="forbid")


# === Spaces ===


class SpaceKind(str, Enum):
    """The four function spaces."""

    HARDY = "hardy"
    BIVAR_POLY = "bivar-poly"
    TRANSLATION_LP = "translation-lp"
    TRANSLATION_C0 = "translation-c0"


class FunctionSpace(BaseModel):
    """A space tag with the parameters its norm and elements depend on."""

    model_config = _VALUE_CONFIG

    kind: SpaceKind
    w: float | None = None
    a: Rational | None = None
    p: float | None = None

    @model_validator(mode="after")
    def validate_parameters(self) -> FunctionSpace:
        """Translation spaces need w > 1 and a > 0; only L_p takes p ≥ 1."""
        if self.is_translation:
            if self.w is None or not self.w > 1:
                raise ValueError("translation spaces require w > 1")
            if self.a is None or not self.a > 0:
                raise ValueError("translation spaces require a > 0")
        elif self.w is not None or self.a is not None:
            raise ValueError(f"{self.kind.value} takes no w or a")
        if self.kind == SpaceKind.TRANSLATION_LP:
            if self.p is not None and not self.p >= 1:
                raise ValueError("L_p requires p >= 1")
        elif self.p is not None:
            raise ValueError("p applies only to translation-lp")
        return self

    @property
    def is_translation(self) -> bool:
        return self.kind in (SpaceKind.TRANSLATION_LP, SpaceKind.TRANSLATION_C0)

    @property
    def exponent(self) -> float:
        """L_p exponent (1 when unset)."""
        return self.p if self.p is not None else 1.0

    def label(self) -> str:
        if self.kind == SpaceKind.TRANSLATION_LP:
            return f"L_{self.exponent:g}(0,inf) [w={self.w:g}, a={self.a}]"
        if self.kind == SpaceKind.TRANSLATION_C0:
            return f"C0[0,inf) [w={self.w:g}, a={self.a}]"
        if self.kind == SpaceKind.BIVAR_POLY:
            return "L2((0,1)^2) polynomials"
        return "H2"


# === Hardy space ===


class TaylorCoeffs(BaseModel):
    """Truncated Taylor series f(z) = Σ_k a_k z^k, coefficients from a_0 upward."""

    model_config = _VALUE_CONFIG

    coeffs: tuple[Scalar, ...] = ()

    @model_validator(mode="after")
    def validate_canonical(self) -> TaylorCoeffs:
        problem = _taylor_problem(self.coeffs)
        if problem:
            raise ValueError(problem)
        return self

    @classmethod
    def canonical(cls, coeffs: Iterable[complex | float]) -> TaylorCoeffs:
        """Build from raw coefficients, trimming trailing zeros."""
        values = [complex(c) for c in coeffs]
        while values and values[-1] == 0:
            values.pop()
        return cls(coeffs=tuple(values))

    @classmethod
    def monomial(cls, k: int, coefficient: complex = 1) -> TaylorCoeffs:
        """coefficient · z^k."""
        return cls.canonical([0] * k + [coefficient])

    @property
    def degree(self) -> int:
        """Polynomial degree; -1 for the zero element."""
        return len(self.coeffs) - 1

    def is_zero(self, tolerance: float = 0.0) -> bool:
        return all(abs(c) <= tolerance for c in self.coeffs)

    def truncate(self, n: int) -> TaylorCoeffs:
        """Keep the terms of degree < n."""
        return TaylorCoeffs.canonical(self.coeffs[: max(n, 0)])

    def scaled(self, alpha: complex) -> TaylorCoeffs:
        return TaylorCoeffs.canonical(alpha * c for c in self.coeffs)

    def __add__(self, other: object) -> TaylorCoeffs:
        other = _require_same(self, other)
        return TaylorCoeffs.canonical(
            a + b for a, b in zip_longest(self.coeffs, other.coeffs, fillvalue=0j)
        )

    def __neg__(self) -> TaylorCoeffs:
        return self.scaled(-1)

    def __sub__(self, other: object) -> TaylorCoeffs:
        return self + (-_require_same(self, other))


def _taylor_problem(coeffs: Sequence[complex]) -> str | None:
    if any(not cmath.isfinite(c) for c in coeffs):
        return "coefficients must be finite"
    if coeffs and coeffs[-1] == 0:
        return "trailing zero coefficient (not canonical)"
    return None


# === Polynomials on the unit square ===


class BivarTerm(NamedTuple):
    """Coefficient c of X_n Y_l."""

    n: int
    l: int
    c: float


class NormalizedBivarPoly(BaseModel):
    """Σ c_{n,l} X_n Y_l on Ω = (0,1)², with X_n = x^n/n! and Y_l = y^l/l!."""

    model_config = _VALUE_CONFIG

    terms: tuple[BivarTerm, ...] = ()

    @model_validator(mode="after")
    def validate_canonical(self) -> NormalizedBivarPoly:
        problem = _bivar_problem(self.terms)
        if problem:
            raise ValueError(problem)
        return self

    @classmethod
    def canonical(
        cls, terms: Iterable[tuple[int, int, float]] | Mapping[tuple[int, int], float]
    ) -> NormalizedBivarPoly:
        """Sum duplicate indices, drop zero coefficients, sort by (n, l)."""
        items = terms.items() if isinstance(terms, Mapping) else (((n, l), c) for n, l, c in terms)
        collected: dict[tuple[int, int], float] = {}
        for (n, l), c in items:
            collected[(n, l)] = collected.get((n, l), 0.0) + float(c)
        return cls(
            terms=tuple(
                BivarTerm(n, l, c) for (n, l), c in sorted(collected.items()) if c != 0.0
            )
        )

    @classmethod
    def monomial(cls, n: int, l: int, coefficient: float = 1.0) -> NormalizedBivarPoly:
        """coefficient · X_n Y_l."""
        return cls.canonical([(n, l, coefficient)])

    @classmethod
    def from_monomial_coefficients(
        cls, coefficients: Mapping[tuple[int, int], float]
    ) -> NormalizedBivarPoly:
        """Convert raw x^n y^l coefficients to the normalized basis."""
        return cls.canonical(
            {
                (n, l): c * math.factorial(n) * math.factorial(l)
                for (n, l), c in coefficients.items()
            }
        )

    @property
    def coefficients(self) -> dict[tuple[int, int], float]:
        return {(t.n, t.l): t.c for t in self.terms}

    @property
    def total_degree(self) -> int:
        """Largest n + l; -1 for the zero element."""
        return max((t.n + t.l for t in self.terms), default=-1)

    def to_monomial_coefficients(self) -> dict[tuple[int, int], float]:
        """Raw x^n y^l coefficients, for serialization boundaries."""
        return {
            (t.n, t.l): t.c / (math.factorial(t.n) * math.factorial(t.l)) for t in self.terms
        }

    def is_zero(self, tolerance: float = 0.0) -> bool:
        return all(abs(t.c) <= tolerance for t in self.terms)

    def truncate_total_degree(self, limit: int) -> NormalizedBivarPoly:
        """Keep the terms with n + l < limit."""
        return NormalizedBivarPoly(terms=tuple(t for t in self.terms if t.n + t.l < limit))

    def scaled(self, alpha: complex | float) -> NormalizedBivarPoly:
        factor = _real_scalar(alpha)
        return NormalizedBivarPoly.canonical((t.n, t.l, factor * t.c) for t in self.terms)

    def __add__(self, other: object) -> NormalizedBivarPoly:
        other = _require_same(self, other)
        return NormalizedBivarPoly.canonical([*self.terms, *other.terms])

    def __neg__(self) -> NormalizedBivarPoly:
        return self.scaled(-1.0)

    def __sub__(self, other: object) -> NormalizedBivarPoly:
        return self + (-_require_same(self, other))


def _bivar_problem(terms: Sequence[BivarTerm]) -> str | None:
    previous: tuple[int, int] | None = None
    for term in terms:
        if term.n < 0 or term.l < 0:
            return "indices must be non-negative"
        if not math.isfinite(term.c):
            return "coefficients must be finite"
        if term.c == 0.0:
            return "stored zero coefficient (not canonical)"
        if previous is not None and (term.n, term.l) <= previous:
            return "terms must be sorted by (n, l) without duplicates"
        previous = (term.n, term.l)
    return None


# === Compactly supported exp-polynomial pieces ===


class ExpTerm(BaseModel):
    """c · t^d · w^{q t}."""

    model_config = _VALUE_CONFIG

    c: float
    d: int = Field(default=0, ge=0)
    q: Rational = Fraction(0)

    @model_validator(mode="after")
    def validate_finite(self) -> ExpTerm:
        if not math.isfinite(self.c):
            raise ValueError("coefficient must be finite")
        return self


class Piece(BaseModel):
    """Σ terms on [lo, hi)."""

    model_config = _VALUE_CONFIG

    lo: Rational
    hi: Rational
    terms: tuple[ExpTerm, ...]

    @model_validator(mode="after")
    def validate_canonical(self) -> Piece:
        if self.lo < 0:
            raise ValueError("pieces live in [0, inf)")
        if not self.hi > self.lo:
            raise ValueError("piece interval must be nonempty")
        if not self.terms:
            raise ValueError("piece without terms (not canonical)")
        keys = [(t.d, t.q) for t in self.terms]
        if keys != sorted(set(keys)):
            raise ValueError("piece terms must be sorted by (d, q) without duplicates")
        if any(t.c == 0.0 for t in self.terms):
            raise ValueError("stored zero coefficient (not canonical)")
        return self


class PiecewiseExpPoly(BaseModel):
    """Compactly supported Σ c t^d w^{q t} on disjoint sorted rational intervals.

    ``continuous`` tags the element as a member of C₀[0,∞): values agree across
    shared breakpoints and vanish across gaps and at the end of the support.
    """

    model_config = _VALUE_CONFIG

    base: float = Field(gt=1)
    pieces: tuple[Piece, ...] = ()
    continuous: bool = False

    @model_validator(mode="after")
    def validate_canonical(self) -> PiecewiseExpPoly:
        problem = _piecewise_problem(self.pieces)
        if problem:
            raise ValueError(problem)
        if self.continuous and not is_continuous(self.base, self.pieces):
            raise ValueError("element tagged continuous has a jump")
        return self

    @classmethod
    def canonical(
        cls,
        base: float,
        pieces: Iterable[tuple[Any, Any, Iterable[tuple[float, int, Any]]]],
        continuous: bool = False,
    ) -> PiecewiseExpPoly:
        """Build from raw, possibly overlapping pieces ``(lo, hi, [(c, d, q), ...])``.

        Overlaps are summed, empty intervals and zero coefficients dropped, and
        touching pieces with identical terms merged.
        """
        raw = []
        for lo, hi, terms in pieces:
            lo_q, hi_q = parse_rational(lo), parse_rational(hi)
            if hi_q > lo_q:
                raw.append((lo_q, hi_q, [(float(c), int(d), parse_rational(q)) for c, d, q in terms]))
        breakpoints = sorted({b for lo, hi, _ in raw for b in (lo, hi)})

        segments: list[tuple[Fraction, Fraction, tuple[ExpTerm, ...]]] = []
        for left, right in zip(breakpoints, breakpoints[1:]):
            collected: dict[tuple[int, Fraction], float] = {}
            for lo, hi, terms in raw:
                if lo <= left and right <= hi:
                    for c, d, q in terms:
                        collected[(d, q)] = collected.get((d, q), 0.0) + c
            merged = tuple(
                ExpTerm(c=c, d=d, q=q) for (d, q), c in sorted(collected.items()) if c != 0.0
            )
            if not merged:
                continue
            if segments and segments[-1][1] == left and segments[-1][2] == merged:
                segments[-1] = (segments[-1][0], right, merged)
            else:
                segments.append((left, right, merged))

        return cls(
            base=base,
            pieces=tuple(Piece(lo=lo, hi=hi, terms=terms) for lo, hi, terms in segments),
            continuous=continuous,
        )

    @classmethod
    def indicator(cls, base: float, lo: Any, hi: Any, height: float = 1.0) -> PiecewiseExpPoly:
        """height · χ_[lo, hi)."""
        return cls.canonical(base, [(lo, hi, [(height, 0, 0)])])

    @classmethod
    def ramp(cls, base: float, width: Any = 1) -> PiecewiseExpPoly:
        """The continuous hat 1 - t/width on [0, width)."""
        width_q = parse_rational(width)
        return cls.canonical(
            base, [(0, width_q, [(1.0, 0, 0), (-1.0 / float(width_q), 1, 0)])], continuous=True
        )

    @property
    def support_sup(self) -> Fraction:
        """Right end of the support (0 for the zero element)."""
        return self.pieces[-1].hi if self.pieces else Fraction(0)

    def is_zero(self, tolerance: float = 0.0) -> bool:
        return all(abs(t.c) <= tolerance for piece in self.pieces for t in piece.terms)

    def evaluate(self, t: float) -> float:
        """Value at t (pieces are closed on the left)."""
        for piece in self.pieces:
            if piece.lo <= t < piece.hi:
                return float(_evaluate_terms(_float_terms(piece.terms), np.array([t]), self.log_base)[0])
        return 0.0

    @property
    def log_base(self) -> float:
        return math.log(self.base)

    def restrict(self, lo: Any, hi: Any) -> PiecewiseExpPoly:
        """The element times the indicator of [lo, hi)."""
        lo_q, hi_q = parse_rational(lo), parse_rational(hi)
        kept = [
            (max(p.lo, lo_q), min(p.hi, hi_q), [(t.c, t.d, t.q) for t in p.terms])
            for p in self.pieces
            if p.hi > lo_q and p.lo < hi_q
        ]
        result = PiecewiseExpPoly.canonical(self.base, kept)
        if self.continuous and is_continuous(result.base, result.pieces):
            return result.model_copy(update={"continuous": True})
        return result

    def scaled(self, alpha: complex | float) -> PiecewiseExpPoly:
        factor = _real_scalar(alpha)
        return PiecewiseExpPoly.canonical(
            self.base,
            [(p.lo, p.hi, [(factor * t.c, t.d, t.q) for t in p.terms]) for p in self.pieces],
            continuous=self.continuous,
        )

    def __add__(self, other: object) -> PiecewiseExpPoly:
        other = _require_same(self, other)
        if other.base != self.base:
            raise SpaceMismatchError(
                "piecewise operands use different bases",
                details={"left": self.base, "right": other.base},
            )
        return PiecewiseExpPoly.canonical(
            self.base,
            [
                (p.lo, p.hi, [(t.c, t.d, t.q) for t in p.terms])
                for p in (*self.pieces, *other.pieces)
            ],
            continuous=self.continuous and other.continuous,
        )

    def __neg__(self) -> PiecewiseExpPoly:
        return self.scaled(-1.0)

    def __sub__(self, other: object) -> PiecewiseExpPoly:
        return self + (-_require_same(self, other))


def _piecewise_problem(pieces: Sequence[Piece]) -> str | None:
    for left, right in zip(pieces, pieces[1:]):
        if right.lo < left.hi:
            return "pieces must be sorted and disjoint"
    return None


def _float_terms(terms: Iterable[ExpTerm]) -> list[tuple[float, int, float]]:
    return [(t.c, t.d, float(t.q)) for t in terms]


def _evaluate_terms(
    terms: Sequence[tuple[float, int, float]], ts: FloatArray, log_base: float
) -> FloatArray:
    """Σ c t^d w^{q t} evaluated in log space, so huge c times tiny w^{qt} stays finite."""
    ts = np.asarray(ts, dtype=np.float64)
    out = np.zeros_like(ts)
    with np.errstate(divide="ignore"):
        log_t = np.log(ts)
    for c, d, q in terms:
        if c == 0.0:
            continue
        exponent = math.log(abs(c)) + q * log_base * ts
        if d:
            exponent = exponent + d * log_t
        out += math.copysign(1.0, c) * np.exp(exponent)
    return out


def _derivative_terms(
    terms: Sequence[tuple[float, int, float]], log_base: float
) -> list[tuple[float, int, float]]:
    """d/dt of Σ c t^d w^{qt} = Σ c (d t^{d-1} + q ln w t^d) w^{qt}."""
    out: list[tuple[float, int, float]] = []
    for c, d, q in terms:
        if d:
            out.append((c * d, d - 1, q))
        if q:
            out.append((c * q * log_base, d, q))
    return out


def is_continuous(base: float, pieces: Sequence[Piece], tolerance: float | None = None) -> bool:
    """Whether the pieces describe a continuous function on [0, ∞) vanishing at infinity.

    Adjacent pieces must agree at the shared breakpoint; across a gap (and at
    the right end of the support, and on [0, lo) before the first piece) the
    function is zero, so the neighbouring limits must vanish.
    """
    tolerance = settings.CONTINUITY_TOLERANCE if tolerance is None else tolerance
    log_base = math.log(base)

    def value(piece: Piece, t: Fraction) -> float:
        return float(_evaluate_terms(_float_terms(piece.terms), np.array([float(t)]), log_base)[0])

    def close(left: float, right: float) -> bool:
        return abs(left - right) <= tolerance * max(1.0, abs(left), abs(right))

    if not pieces:
        return True
    if pieces[0].lo > 0 and not close(value(pieces[0], pieces[0].lo), 0.0):
        return False
    for left, right in zip(pieces, pieces[1:]):
        left_limit = value(left, left.hi)
        right_value = value(right, right.lo)
        if left.hi == right.lo:
            if not close(left_limit, right_value):
                return False
        elif not (close(left_limit, 0.0) and close(right_value, 0.0)):
            return False
    return close(value(pieces[-1], pieces[-1].hi), 0.0)


# === Element plumbing ===

Element: TypeAlias = TaylorCoeffs | NormalizedBivarPoly | PiecewiseExpPoly

ELEMENT_TYPES: dict[SpaceKind, type[BaseModel]] = {
    SpaceKind.HARDY: TaylorCoeffs,
    SpaceKind.BIVAR_POLY: NormalizedBivarPoly,
    SpaceKind.TRANSLATION_LP: PiecewiseExpPoly,
    SpaceKind.TRANSLATION_C0: PiecewiseExpPoly,
}


def _require_same(left: Any, right: object) -> Any:
    if type(right) is not type(left):
        raise SpaceMismatchError(
            "operands belong to different spaces",
            details={"left": type(left).__name__, "right": type(right).__name__},
        )
    return right


def _real_scalar(alpha: complex | float) -> float:
    value = complex(alpha)
    if value.imag != 0:
        raise InvalidArgumentError(
            "real-scalar space scaled by a complex number", details={"alpha": str(alpha)}
        )
    return value.real


def membership_error(space: FunctionSpace, x: object) -> HypermixError | None:
    """The error describing why ``x`` is not a canonical element of ``space``."""
    details = {"space": space.kind.value}
    expected = ELEMENT_TYPES[space.kind]
    if type(x) is not expected:
        return SpaceMismatchError(
            f"{space.kind.value} expects {expected.__name__}, got {type(x).__name__}",
            details=details,
        )
    problem: str | None = None
    if isinstance(x, TaylorCoeffs):
        problem = _taylor_problem(x.coeffs)
    elif isinstance(x, NormalizedBivarPoly):
        problem = _bivar_problem(x.terms)
    elif isinstance(x, PiecewiseExpPoly):
        if space.w is not None and x.base != space.w:
            return SpaceMismatchError(
                f"element base {x.base:g} differs from space base {space.w:g}", details=details
            )
        problem = _piecewise_problem(x.pieces)
        if problem is None and space.kind == SpaceKind.TRANSLATION_C0 and not x.continuous:
            problem = "C0 elements must be continuous and vanish at the end of their support"
    return InvalidElementError(problem, details=details) if problem else None


def ensure_member(space: FunctionSpace, x: object) -> None:
    """Raise unless ``x`` is a canonical element of ``space``."""
    error = membership_error(space, x)
    if error is not None:
        raise error


def zero_element(space: FunctionSpace) -> Element:
    """The zero vector of ``space``."""
    if space.kind == SpaceKind.HARDY:
        return TaylorCoeffs()
    if space.kind == SpaceKind.BIVAR_POLY:
        return NormalizedBivarPoly()
    assert space.w is not None
    return PiecewiseExpPoly(base=space.w, continuous=space.kind == SpaceKind.TRANSLATION_C0)


def is_zero(x: Element, tolerance: float = 0.0) -> bool:
    return x.is_zero(tolerance)


def add(x: Element, y: Element) -> Element:
    return x + y  # type: ignore[operator]


def subtract(x: Element, y: Element) -> Element:
    return x - y  # type: ignore[operator]


def negate(x: Element) -> Element:
    return -x


def scale(alpha: complex | float, x: Element) -> Element:
    return x.scaled(alpha)


# === Norms ===


@lru_cache(maxsize=4096)
def _unit_interval_gram(n: int, m: int) -> Fraction:
    """∫_0^1 X_n X_m = 1/(n! m! (n+m+1))."""
    return Fraction(1, math.factorial(n) * math.factorial(m) * (n + m + 1))


def gram_entry(n: int, l: int, m: int, k: int) -> Fraction:
    """⟨X_n Y_l, X_m Y_k⟩ on the unit square."""
    return _unit_interval_gram(n, m) * _unit_interval_gram(l, k)


def _sqrt_fraction(value: Fraction) -> float:
    if value <= 0:
        return 0.0
    try:
        approx = float(value)
    except OverflowError:
        approx = math.inf
    if 1e-290 < approx < math.inf:
        return math.sqrt(approx)
    return math.exp(0.5 * (math.log(value.numerator) - math.log(value.denominator)))


def hardy_norm(x: TaylorCoeffs) -> float:
    return math.hypot(*(abs(c) for c in x.coeffs))


def bivar_norm(x: NormalizedBivarPoly) -> float:
    """Exact vᵀGv in rational arithmetic, square-rooted once."""
    terms = [(t.n, t.l, Fraction(t.c)) for t in x.terms]
    total = Fraction(0)
    for i, (n, l, c) in enumerate(terms):
        total += c * c * gram_entry(n, l, n, l)
        for m, k, e in terms[i + 1 :]:
            total += 2 * c * e * gram_entry(n, l, m, k)
    return _sqrt_fraction(total)


def _log_exp_integral(kappa: float, lo: float, hi: float) -> float:
    """log ∫_lo^hi e^{κt} dt without overflow."""
    width = hi - lo
    if kappa == 0.0:
        return math.log(width)
    if kappa > 0:
        return kappa * hi + math.log(-math.expm1(-kappa * width)) - math.log(kappa)
    return kappa * lo + math.log(-math.expm1(kappa * width)) - math.log(-kappa)


def _logsumexp(values: Sequence[float]) -> float:
    peak = max(values)
    return peak + math.log(math.fsum(math.exp(v - peak) for v in values))


def lp_norm(x: PiecewiseExpPoly, p: float = 1.0) -> float:
    """(∫|f|^p)^{1/p}: closed form on single d=0 terms, adaptive quadrature otherwise."""
    log_base = x.log_base
    logs: list[float] = []
    for piece in x.pieces:
        lo, hi = float(piece.lo), float(piece.hi)
        if len(piece.terms) == 1 and piece.terms[0].d == 0:
            term = piece.terms[0]
            logs.append(
                p * math.log(abs(term.c)) + _log_exp_integral(p * float(term.q) * log_base, lo, hi)
            )
            continue
        terms = _float_terms(piece.terms)
        value = integrate(lambda ts, terms=terms: np.abs(_evaluate_terms(terms, ts, log_base)) ** p, lo, hi)
        if value > 0:
            logs.append(math.log(value))
    if not logs:
        return 0.0
    return math.exp(_logsumexp(logs) / p)


def sup_norm(x: PiecewiseExpPoly) -> float:
    """sup |f|; closed-form critical point for single terms, sampled sign changes otherwise."""
    log_base = x.log_base
    best = 0.0
    for piece in x.pieces:
        lo, hi = float(piece.lo), float(piece.hi)
        terms = _float_terms(piece.terms)

        def f(ts: FloatArray, terms: list[tuple[float, int, float]] = terms) -> FloatArray:
            return _evaluate_terms(terms, ts, log_base)

        if len(terms) == 1:
            _, d, q = terms[0]
            # d/t + q ln w = 0
            critical = [-d / (q * log_base)] if d and q else []
            best = max(best, maximize_abs(f, lo, hi, critical_points=critical))
        else:
            slope_terms = _derivative_terms(terms, log_base)
            best = max(
                best,
                maximize_abs(
                    f,
                    lo,
                    hi,
                    derivative=lambda ts, st=slope_terms: _evaluate_terms(st, ts, log_base),
                ),
            )
    return best


def norm(space: FunctionSpace, x: Element) -> float:
    """The norm of ``space`` evaluated on a canonical element."""
    ensure_member(space, x)
    if isinstance(x, TaylorCoeffs):
        return hardy_norm(x)
    if isinstance(x, NormalizedBivarPoly):
        return bivar_norm(x)
    if space.kind == SpaceKind.TRANSLATION_C0:
        return sup_norm(x)
    return lp_norm(x, space.exponent)


def distance(space: FunctionSpace, x: Element, y: Element) -> float:
    """norm(x - y)."""
    ensure_member(space, x)
    ensure_member(space, y)
    return norm(space, subtract(x, y))


# === Balls ===


class BallSpec(BaseModel):
    """Open ball {x : ‖x - center‖ < radius} in a space."""

    model_config = _VALUE_CONFIG

    space: FunctionSpace
    center: Element
    radius: float = Field(gt=0)

    @model_validator(mode="after")
    def validate_center(self) -> BallSpec:
        error = membership_error(self.space, self.center)
        if error is not None:
            raise ValueError(error.message)
        if not math.isfinite(self.radius):
            raise ValueError("radius must be finite")
        return self

    def contains(self, x: Element) -> bool:
        """Strict membership: open balls."""
        return distance(self.space, x, self.center) < self.radius


# === JSON ===


def element_to_json(space: FunctionSpace, x: Element) -> dict[str, Any]:
    """``{"space": kind, "data": fields}`` with rationals as ``"p/q"``."""
    ensure_member(space, x)
    return {"space": space.kind.value, "data": x.model_dump(mode="json")}


def element_from_json(space: FunctionSpace, payload: Mapping[str, Any]) -> Element:
    """Parse the ``element_to_json`` schema back into a canonical element."""
    if payload.get("space") != space.kind.value:
        raise SpaceMismatchError(
            "element JSON tagged for another space",
            details={"expected": space.kind.value, "got": payload.get("space")},
        )
    model = ELEMENT_TYPES[space.kind]
    try:
        element = model.model_validate(payload.get("data", {}))
    except ValidationError as e:
        raise InvalidElementError(
            "element JSON failed validation",
            details={"errors": [
                {"loc": ".".join(str(part) for part in err["loc"]), "msg": err["msg"]}
                for err in e.errors()
            ]},
        ) from None
    ensure_member(space, element)  # type: ignore[arg-type]
    return element  # type: ignore[return-value]
