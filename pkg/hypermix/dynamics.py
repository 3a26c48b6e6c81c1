"""Certificate engines.

Every witness comes from the same construction: for a ball U with center x and
a target y,

    u_n = w_n + S^n y,   w_n = kernel_project(op, x, n).w_n   (w_0 = 0)

so that T^n u_n = y exactly and ‖u_n - x‖ = ‖(w_n - x) + S^n y‖. The engines
differ only in which indices they scan and which certificate they keep.
"""

import logging
import math
from collections.abc import Iterator
from enum import Enum
from fractions import Fraction
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_serializer

from .config import OperatorConfig, OperatorVariant
from .exceptions import (
    CapacityError,
    InternalCheckError,
    InvalidAlphaError,
    InvalidArgumentError,
    NoWitnessInRangeError,
    SpaceMismatchError,
)
from .kernels import kernel_project, saturation_index
from .operators import inverse_factorial, iterate, s_power_norm_bound
from .settings import settings
from .spaces import (
    BallSpec,
    Element,
    Scalar,
    SpaceKind,
    TaylorCoeffs,
    add,
    distance,
    element_to_json,
    ensure_member,
    norm,
    subtract,
    zero_element,
)

logger = logging.getLogger(__name__)


class BoundMode(str, Enum):
    """How far a witness family is certified."""

    TESTED_RANGE = "tested_range"
    ANALYTIC = "analytic"


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"


# === Certificates ===


class WitnessCertificate(BaseModel):
    """u_n with T^n u_n = y, its residual ‖T^n u_n - y‖ and distance ‖u_n - x‖."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    op: OperatorConfig
    n: int = Field(ge=0)
    u_n: Element
    residual: float = Field(ge=0)
    delta: float = Field(ge=0)
    radius: float = Field(gt=0)
    inside: bool
    bound_mode: BoundMode = BoundMode.TESTED_RANGE
    tolerance: float = Field(default_factory=lambda: settings.TOLERANCE, gt=0)

    @field_serializer("u_n")
    def serialize_u_n(self, u_n: Element) -> dict[str, Any]:
        return element_to_json(self.op.space, u_n)

    @property
    def valid(self) -> bool:
        return self.inside and self.residual <= self.tolerance


class TransitivityCertificate(WitnessCertificate):
    """A certificate that also records T^n u ∈ V."""

    image_distance: float = Field(ge=0)
    image_radius: float = Field(gt=0)
    image_inside: bool


class WitnessSequence(BaseModel):
    """Certificates for every n in [N, scanned_to].

    In analytic mode a closed-form bound extends the claim to all n ≥ N.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    op: OperatorConfig
    N: int
    bound_mode: BoundMode
    scanned_to: int
    certificates: tuple[WitnessCertificate, ...]


class LeadingPolynomials(BaseModel):
    """p_n = w_n + α z^n / n! inside the ball for every n ≥ N."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: Scalar
    N: int
    bound_mode: BoundMode
    polynomials: tuple[TaylorCoeffs, ...]
    certificates: tuple[WitnessCertificate, ...]


class PeriodicVector(BaseModel):
    """Truncated e^{λz} with λ^N = 1 and its periodicity defect ‖D^N f - f‖."""

    model_config = ConfigDict(frozen=True)

    period: int
    order: int
    root_index: int
    f: TaylorCoeffs
    defect: float
    log10_defect: float


class DecayRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    s_norm: float
    kernel_gap: float
    combined: float


class DecayTable(BaseModel):
    """Rows of ‖S^n x‖, ‖y - w_n‖ and ‖S^n x + w_n - y‖ with the convergence verdict."""

    model_config = ConfigDict(frozen=True)

    op: OperatorConfig
    rows: tuple[DecayRow, ...]
    tolerance: float
    verdict: Verdict
    truncated_at: int | None = None


# === Construction ===


def _check_ball(op: OperatorConfig, ball: BallSpec) -> None:
    if ball.space != op.space:
        raise SpaceMismatchError(
            "ball lives in another space",
            details={"op": op.label(), "ball": ball.space.label()},
        )


def _s_powers(op: OperatorConfig, y: Element, stop: int) -> Iterator[Element]:
    """S^n y for n = 0..stop.

    The integration operator uses its closed form so that leading coefficients
    stay exactly α/n!; the others step once per index.
    """
    current = y
    for n in range(stop + 1):
        if n and op.variant == OperatorVariant.DERIVATIVE:
            current = iterate(op, n, y, use_S=True).value
        elif n:
            try:
                current = iterate(op, 1, current, use_S=True).value
            except CapacityError as e:
                raise CapacityError(
                    e.message, details={"k": n, "max_safe_k": n - 1}
                ) from None
        yield current


def _certificate(
    op: OperatorConfig, ball: BallSpec, y: Element, n: int, s_part: Element, tolerance: float
) -> WitnessCertificate:
    space = op.space
    kernel_part = kernel_project(op, ball.center, n).w_n if n else zero_element(space)
    u_n = add(kernel_part, s_part)
    residual = distance(space, iterate(op, n, u_n).value, y)
    delta = distance(space, u_n, ball.center)
    return WitnessCertificate(
        op=op,
        n=n,
        u_n=u_n,
        residual=residual,
        delta=delta,
        radius=ball.radius,
        inside=delta < ball.radius,
        tolerance=tolerance,
    )


def _scan(
    op: OperatorConfig, ball: BallSpec, y: Element, stop: int, tolerance: float | None = None
) -> Iterator[WitnessCertificate]:
    tolerance = settings.TOLERANCE if tolerance is None else tolerance
    for n, s_part in enumerate(_s_powers(op, y, stop)):
        cert = _certificate(op, ball, y, n, s_part, tolerance)
        logger.debug(
            "Witness candidate",
            extra={"op": op.label(), "n": n, "delta": cert.delta, "residual": cert.residual},
        )
        yield cert


def _inside_suffix(certificates: list[WitnessCertificate]) -> int | None:
    """Least N with every scanned certificate from N onward valid."""
    start: int | None = None
    for cert in reversed(certificates):
        if not cert.valid:
            break
        start = cert.n
    return start


def _no_witness(op: OperatorConfig, n_max: int, certificates: list[WitnessCertificate]) -> NoWitnessInRangeError:
    return NoWitnessInRangeError(
        f"no witness inside the ball up to n = {n_max}",
        details={
            "op": op.label(),
            "n_max": n_max,
            "decay": [{"n": c.n, "delta": c.delta} for c in certificates],
        },
    )


def _resolve_n_max(n_max: int | None) -> int:
    n_max = settings.DEFAULT_N_MAX if n_max is None else n_max
    if n_max < 0:
        raise InvalidArgumentError("n_max must be non-negative", details={"n_max": n_max})
    return n_max


# === Engines ===


def hm_criterion_table(
    op: OperatorConfig,
    x: Element,
    y: Element,
    n_max: int | None = None,
    tolerance: float | None = None,
) -> DecayTable:
    """Tabulate S^n x + w_n → y for n = 1..n_max.

    PASS when the combined distance at the last row is below ``tolerance`` and
    nonincreasing over the final five rows. Rows stop early, with
    ``truncated_at`` set, when S^n x leaves floating-point range.
    """
    n_max = _resolve_n_max(n_max)
    tolerance = settings.TOLERANCE if tolerance is None else tolerance
    space = op.space
    ensure_member(space, x)
    ensure_member(space, y)

    rows: list[DecayRow] = []
    truncated_at: int | None = None
    powers = _s_powers(op, x, n_max)
    next(powers)
    try:
        for n, s_part in enumerate(powers, start=1):
            projection = kernel_project(op, y, n)
            rows.append(
                DecayRow(
                    n=n,
                    s_norm=norm(space, s_part),
                    kernel_gap=projection.gap,
                    combined=norm(space, subtract(add(s_part, projection.w_n), y)),
                )
            )
    except CapacityError as e:
        truncated_at = e.details.get("max_safe_k")
        logger.warning(
            "Decay table truncated", extra={"op": op.label(), "truncated_at": truncated_at}
        )

    tail = [row.combined for row in rows[-5:]]
    passed = (
        bool(rows)
        and rows[-1].combined < tolerance
        and all(later <= earlier for earlier, later in zip(tail, tail[1:]))
    )
    verdict = Verdict.PASS if passed else Verdict.FAIL
    logger.info("Decay verdict", extra={"op": op.label(), "verdict": verdict.value})
    return DecayTable(
        op=op, rows=tuple(rows), tolerance=tolerance, verdict=verdict, truncated_at=truncated_at
    )


def hm_witnesses(
    op: OperatorConfig,
    U: BallSpec,
    y: Element,
    n_max: int | None = None,
    tolerance: float | None = None,
) -> WitnessSequence:
    """Witnesses u_n ∈ U with T^n u_n = y for every n from some N on.

    N is the first index where the kernel part of the center has saturated
    and ‖S^n y‖ ≤ β(n)‖y‖ < radius; β is nonincreasing, so that index
    certifies every later one (analytic mode). Without a closed-form bound N
    is the least index from which every tested certificate is inside
    (tested_range mode). Either way certificates are emitted for every n
    from N to n_max, or to the last power before floating-point overflow
    once N is certified.

    Raises:
        NoWitnessInRangeError: the certificate at n_max is outside U;
            ``details["decay"]`` lists delta per n.
    """
    n_max = _resolve_n_max(n_max)
    _check_ball(op, U)
    ensure_member(op.space, y)
    y_norm = norm(op.space, y)
    saturation = saturation_index(op, U.center)

    certificates: list[WitnessCertificate] = []
    analytic_from: int | None = None
    try:
        for cert in _scan(op, U, y, n_max, tolerance):
            certificates.append(cert)
            bound = s_power_norm_bound(op, cert.n)
            if (
                analytic_from is None
                and bound is not None
                and cert.n >= saturation
                and cert.valid
                and bound * y_norm < U.radius
            ):
                analytic_from = cert.n
    except CapacityError as e:
        if analytic_from is None:
            raise
        logger.warning(
            "Witness scan stopped at capacity",
            extra={"op": op.label(), "max_safe_k": e.details.get("max_safe_k")},
        )

    if analytic_from is not None:
        start, mode = analytic_from, BoundMode.ANALYTIC
    else:
        suffix = _inside_suffix(certificates)
        if suffix is None:
            raise _no_witness(op, n_max, certificates)
        start, mode = suffix, BoundMode.TESTED_RANGE

    kept = tuple(c.model_copy(update={"bound_mode": mode}) for c in certificates[start:])
    logger.info(
        "Hypermixing witnesses found",
        extra={"op": op.label(), "N": start, "bound_mode": mode.value},
    )
    return WitnessSequence(
        op=op, N=start, bound_mode=mode, scanned_to=certificates[-1].n, certificates=kept
    )


def stt_witness(
    op: OperatorConfig,
    U: BallSpec,
    y: Element,
    n_max: int | None = None,
    tolerance: float | None = None,
) -> WitnessCertificate:
    """The smallest n with a certificate u ∈ U and T^n u = y.

    Raises:
        InvalidArgumentError: y is zero (use ``zero_witness``).
        NoWitnessInRangeError: nothing inside U up to n_max.
    """
    n_max = _resolve_n_max(n_max)
    _check_ball(op, U)
    ensure_member(op.space, y)
    if y.is_zero():
        raise InvalidArgumentError(
            "strong transitivity targets must be nonzero; use zero_witness for 0",
            details={"op": op.label()},
        )
    scanned: list[WitnessCertificate] = []
    for cert in _scan(op, U, y, n_max, tolerance):
        if cert.valid:
            logger.info("Transitivity witness found", extra={"op": op.label(), "n": cert.n})
            return cert
        scanned.append(cert)
    raise _no_witness(op, n_max, scanned)


def zero_witness(
    op: OperatorConfig, U: BallSpec, n_max: int | None = None, tolerance: float | None = None
) -> WitnessSequence:
    """Kernel elements u_n = w_n ∈ U with T^n u_n = 0 from some N on.

    The scan always reaches the saturation index of the center, where u_n
    equals the center and delta is exactly zero for every later n.
    """
    n_max = _resolve_n_max(n_max)
    _check_ball(op, U)
    stop = max(n_max, saturation_index(op, U.center))
    certificates = list(_scan(op, U, zero_element(op.space), stop, tolerance))
    start = _inside_suffix(certificates)
    if start is None:
        raise InternalCheckError(
            "kernel projection did not saturate", details={"op": op.label(), "stop": stop}
        )
    kept = tuple(
        c.model_copy(update={"bound_mode": BoundMode.ANALYTIC}) for c in certificates[start:]
    )
    return WitnessSequence(
        op=op, N=start, bound_mode=BoundMode.ANALYTIC, scanned_to=stop, certificates=kept
    )


def transitivity_witness(
    op: OperatorConfig,
    U: BallSpec,
    V: BallSpec,
    n_max: int | None = None,
    tolerance: float | None = None,
) -> TransitivityCertificate:
    """The first n with u ∈ U and T^n u ∈ V."""
    n_max = _resolve_n_max(n_max)
    _check_ball(op, U)
    _check_ball(op, V)
    scanned: list[WitnessCertificate] = []
    for cert in _scan(op, U, V.center, n_max, tolerance):
        image_inside = cert.residual < V.radius
        if cert.valid and image_inside:
            return TransitivityCertificate(
                **dict(cert),
                image_distance=cert.residual,
                image_radius=V.radius,
                image_inside=image_inside,
            )
        scanned.append(cert)
    raise _no_witness(op, n_max, scanned)


def mixing_witnesses(
    op: OperatorConfig,
    U: BallSpec,
    V: BallSpec,
    n_max: int | None = None,
    tolerance: float | None = None,
) -> WitnessSequence:
    """T^n(U) ∩ V ≠ ∅ for every n ≥ N, witnessed by targeting V's center."""
    _check_ball(op, V)
    return hm_witnesses(op, U, V.center, n_max, tolerance)


def leading_polynomials(
    alpha: complex, U: BallSpec, n_max: int | None = None, tolerance: float | None = None
) -> LeadingPolynomials:
    """Polynomials p_n ∈ U of exact degree n with leading coefficient α/n!.

    Raises:
        InvalidAlphaError: alpha is zero.
    """
    alpha = complex(alpha)
    if alpha == 0:
        raise InvalidAlphaError(details={"alpha": "0"})
    if U.space.kind != SpaceKind.HARDY:
        raise SpaceMismatchError(
            "leading polynomials live in the Hardy space", details={"ball": U.space.label()}
        )
    op = OperatorConfig(variant=OperatorVariant.DERIVATIVE)
    run = hm_witnesses(op, U, TaylorCoeffs.monomial(0, alpha), n_max, tolerance)

    polynomials = []
    for cert in run.certificates:
        p = cert.u_n
        assert isinstance(p, TaylorCoeffs)
        if p.degree != cert.n or p.coeffs[-1] != alpha / math.factorial(cert.n):
            raise InternalCheckError(
                "leading coefficient is not alpha/n!",
                details={"n": cert.n, "degree": p.degree},
            )
        polynomials.append(p)
    return LeadingPolynomials(
        alpha=alpha,
        N=run.N,
        bound_mode=run.bound_mode,
        polynomials=tuple(polynomials),
        certificates=run.certificates,
    )


def periodic_vector_derivative(period: int, order: int, root_index: int = 1) -> PeriodicVector:
    """f = Σ_{k≤order} λ^k z^k / k! with λ = exp(2πi·root_index/period).

    D^N f - f = -Σ_{k=M-N+1}^{M} λ^k z^k / k!, so the defect is
    sqrt(Σ 1/k!²) over that tail: exact rationals while M stays below the
    log-space threshold, a log-sum-exp of lgamma values beyond it.
    """
    if period < 1:
        raise InvalidArgumentError("period must be at least 1", details={"period": period})
    if order < period:
        raise InvalidArgumentError(
            "order must be at least the period", details={"period": period, "order": order}
        )

    def root_power(k: int) -> complex:
        angle = 2 * math.pi * ((root_index * k) % period) / period
        return complex(math.cos(angle), math.sin(angle))

    f = TaylorCoeffs.canonical(root_power(k) * inverse_factorial(k) for k in range(order + 1))

    tail = range(order - period + 1, order + 1)
    if order <= settings.LOG_SPACE_THRESHOLD:
        exact = sum((Fraction(1, math.factorial(k) ** 2) for k in tail), Fraction(0))
        defect = math.sqrt(float(exact))
        log10_defect = math.log10(defect)
    else:
        logs = [-2 * math.lgamma(k + 1) for k in tail]
        peak = max(logs)
        log_defect = 0.5 * (peak + math.log(math.fsum(math.exp(v - peak) for v in logs)))
        defect = math.exp(log_defect)
        log10_defect = log_defect / math.log(10)
    return PeriodicVector(
        period=period,
        order=order,
        root_index=root_index,
        f=f,
        defect=defect,
        log10_defect=log10_defect,
    )


def verify_certificate(
    cert: WitnessCertificate, U: BallSpec, y: Element, tolerance: float | None = None
) -> bool:
    """Recompute T^n u_n and ‖u_n - x‖ from scratch and check the claims.

    The residual is held to the certificate's own tolerance unless one is given.
    """
    tolerance = cert.tolerance if tolerance is None else tolerance
    space = cert.op.space
    residual = distance(space, iterate(cert.op, cert.n, cert.u_n).value, y)
    delta = distance(space, cert.u_n, U.center)
    inside = delta < U.radius
    return residual <= tolerance and inside and inside == cert.inside
