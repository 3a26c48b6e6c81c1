"""Element literals for command-line flags and descriptor files.

Grammar (terms joined by ``+`` / ``-``, factors by ``*``)::

    hardy           1 + 2*z^3 - (1+2j)*z     complex coefficients allowed
    bivar-poly      3*X(2)Y(0) + X(1) - Y(4)  normalized monomials X_n Y_l
    translation-*   2*chi(0,1) + chi(1,3/2)*t^2*w^(-1/2*t) + ramp(2)

``chi(lo, hi)`` is the indicator of [lo, hi), ``t^d`` and ``w^(q*t)`` multiply
it by t^d and w^{qt} with w the space base, and ``ramp(h)`` is the continuous
hat 1 - t/h on [0, h) (``ramp`` means h = 1). ``0`` is the zero element.
On C₀ a literal is tagged continuous when its pieces join up, and rejected
otherwise, so ``chi(0,1) - chi(0,1)*t`` is a C₀ element and ``chi(0,1)`` is not.
"""

import cmath
import re
from collections.abc import Mapping
from fractions import Fraction
from typing import Any

from .exceptions import LiteralSyntaxError
from .spaces import (
    Element,
    FunctionSpace,
    NormalizedBivarPoly,
    PiecewiseExpPoly,
    SpaceKind,
    TaylorCoeffs,
    element_from_json,
    ensure_member,
    is_continuous,
    parse_rational,
    zero_element,
)

_POWER = re.compile(r"^(z|t)(?:\^(\d+))?$")
_NORMALIZED = re.compile(r"^(?:X\((\d+)\))?(?:Y\((\d+)\))?$")
_CHI = re.compile(r"^chi\(([^,()]+),([^,()]+)\)$")
_RAMP = re.compile(r"^ramp(?:\(([^()]+)\))?$")
_WEIGHT = re.compile(r"^w\^\((.+)\)$|^w\^t$")


def _fail(text: str, reason: str) -> LiteralSyntaxError:
    return LiteralSyntaxError(f"{reason}: {text!r}", details={"literal": text})


def _split(text: str, separators: str) -> list[tuple[str, str]]:
    """Split at depth-0 separators, returning (separator, chunk) pairs.

    A sign right after ``e``/``E`` in a number, or after another operator, is
    part of the chunk.
    """
    parts: list[tuple[str, str]] = []
    depth = 0
    current: list[str] = []
    leading = ""
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise _fail(text, "unbalanced parenthesis")
        if depth == 0 and ch in separators:
            previous = "".join(current)
            exponent_sign = (
                previous[-1:] in ("e", "E")
                and previous[-2:-1].isdigit()
                and text[i + 1 : i + 2].isdigit()
            )
            glued = ch in "+-" and (exponent_sign or previous[-1:] in ("*", "/", "^"))
            if not glued:
                # only a leading sign may open the text
                if previous or parts or leading or ch not in "+-":
                    parts.append((leading, previous))
                leading = ch
                current = []
                continue
        current.append(ch)
    if depth != 0:
        raise _fail(text, "unbalanced parenthesis")
    parts.append((leading, "".join(current)))
    return parts


def _terms(text: str) -> list[tuple[int, list[str]]]:
    """Signed terms, each a list of factor strings."""
    stripped = text.replace(" ", "")
    if not stripped:
        raise _fail(text, "empty literal")
    out = []
    for sign, chunk in _split(stripped, "+-"):
        if not chunk:
            raise _fail(text, "empty term")
        value = -1 if sign == "-" else 1
        factors = []
        for _, factor in _split(chunk, "*"):
            # a signed symbol such as -z carries its sign into the term
            if factor[:1] in ("+", "-") and _number(factor) is None:
                value = -value if factor[0] == "-" else value
                factor = factor[1:]
            if not factor:
                raise _fail(text, "empty factor")
            factors.append(factor)
        out.append((value, factors))
    return out


def _number(text: str) -> complex | None:
    body = text[1:-1] if text.startswith("(") and text.endswith(")") else text
    try:
        return complex(Fraction(body))
    except (ValueError, ZeroDivisionError):
        pass
    try:
        value = complex(body)
    except ValueError:
        return None
    return value if cmath.isfinite(value) else None


def _real(value: complex, text: str) -> float:
    if value.imag != 0:
        raise _fail(text, "complex coefficient in a real space")
    return value.real


def _rational(value: str, text: str) -> Fraction:
    try:
        return parse_rational(value)
    except ValueError:
        raise _fail(text, f"not a rational {value!r}") from None


# === Per-space parsers ===


def _parse_hardy(text: str) -> TaylorCoeffs:
    coeffs: dict[int, complex] = {}
    for sign, factors in _terms(text):
        c: complex = sign
        k = 0
        for factor in factors:
            number = _number(factor)
            match = _POWER.match(factor)
            if number is not None:
                c *= number
            elif match and match.group(1) == "z":
                k += int(match.group(2) or 1)
            else:
                raise _fail(text, f"unexpected factor {factor!r}")
        coeffs[k] = coeffs.get(k, 0j) + c
    return TaylorCoeffs.canonical(coeffs.get(k, 0j) for k in range(max(coeffs) + 1))


def _parse_bivar(text: str) -> NormalizedBivarPoly:
    terms: list[tuple[int, int, float]] = []
    for sign, factors in _terms(text):
        c = float(sign)
        n = l = None
        for factor in factors:
            number = _number(factor)
            match = _NORMALIZED.match(factor)
            if number is not None:
                c *= _real(number, text)
            elif match and factor:
                for index, value in ((0, match.group(1)), (1, match.group(2))):
                    if value is None:
                        continue
                    if (n, l)[index] is not None:
                        raise _fail(text, "repeated X or Y factor in one term")
                    if index == 0:
                        n = int(value)
                    else:
                        l = int(value)
            else:
                raise _fail(text, f"unexpected factor {factor!r}")
        terms.append((n or 0, l or 0, c))
    return NormalizedBivarPoly.canonical(terms)


def _weight_exponent(factor: str, text: str) -> Fraction:
    match = _WEIGHT.match(factor)
    if match is None:
        raise _fail(text, f"unexpected factor {factor!r}")
    body = match.group(1)
    if body is None or body == "t":
        return Fraction(1)
    if body == "-t":
        return Fraction(-1)
    if not body.endswith("*t"):
        raise _fail(text, f"weight exponent must look like q*t, got {body!r}")
    return _rational(body[:-2], text)


def _parse_piecewise(space: FunctionSpace, text: str) -> PiecewiseExpPoly:
    assert space.w is not None
    base = space.w
    raw: list[tuple[Fraction, Fraction, list[tuple[float, int, Fraction]]]] = []
    ramps: list[PiecewiseExpPoly] = []
    for sign, factors in _terms(text):
        c = float(sign)
        d = 0
        q = Fraction(0)
        interval: tuple[Fraction, Fraction] | None = None
        ramp: Fraction | None = None
        for factor in factors:
            number = _number(factor)
            if number is not None:
                c *= _real(number, text)
                continue
            if (chi := _CHI.match(factor)) is not None:
                if interval is not None:
                    raise _fail(text, "more than one chi in a term")
                interval = (_rational(chi.group(1), text), _rational(chi.group(2), text))
                if not interval[1] > interval[0] >= 0:
                    raise _fail(text, "chi needs 0 <= lo < hi")
            elif (hat := _RAMP.match(factor)) is not None:
                ramp = _rational(hat.group(1), text) if hat.group(1) else Fraction(1)
                if not ramp > 0:
                    raise _fail(text, "ramp width must be positive")
            elif (power := _POWER.match(factor)) is not None and power.group(1) == "t":
                d += int(power.group(2) or 1)
            elif factor.startswith("w^"):
                q += _weight_exponent(factor, text)
            else:
                raise _fail(text, f"unexpected factor {factor!r}")

        if ramp is not None:
            if interval is not None or d or q:
                raise _fail(text, "ramp takes only a numeric coefficient")
            ramps.append(PiecewiseExpPoly.ramp(base, ramp).scaled(c))
        elif interval is not None:
            raw.append((interval[0], interval[1], [(c, d, q)]))
        elif c != 0.0:
            raise _fail(text, "terms need chi(lo,hi) or ramp for compact support")

    result = PiecewiseExpPoly.canonical(base, raw)
    for hat in ramps:
        result = result + hat
    if space.kind == SpaceKind.TRANSLATION_C0 and is_continuous(base, result.pieces):
        result = result.model_copy(update={"continuous": True})
    return result


def parse_literal(space: FunctionSpace, text: str) -> Element:
    """Parse a literal into a canonical element of ``space``.

    Raises:
        LiteralSyntaxError: the text does not follow the grammar.
        InvalidElementError: the parsed element is not a member of ``space``.
    """
    if text.strip() == "0":
        return zero_element(space)
    element: Element
    if space.kind == SpaceKind.HARDY:
        element = _parse_hardy(text)
    elif space.kind == SpaceKind.BIVAR_POLY:
        element = _parse_bivar(text)
    else:
        element = _parse_piecewise(space, text)
    ensure_member(space, element)
    return element


def parse_element(space: FunctionSpace, value: Any) -> Element:
    """Accept a literal string, a plain number or an element JSON object."""
    if isinstance(value, Mapping):
        return element_from_json(space, value)
    if isinstance(value, bool):
        raise LiteralSyntaxError("boolean is not an element", details={"literal": value})
    if isinstance(value, int | float):
        return parse_literal(space, repr(value))
    if isinstance(value, str):
        return parse_literal(space, value)
    raise LiteralSyntaxError(
        f"cannot read an element from {type(value).__name__}", details={"literal": repr(value)}
    )
