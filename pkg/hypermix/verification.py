"""Invariant suite run by ``hypermix verify``.

Checks register themselves with the ``@check`` decorator and run in
registration order against a shared seeded generator::

    @check("right-inverse", help="T(Sf) = f on random elements")
    def right_inverse(ctx: CheckContext) -> str:
        ...
        return "800 elements"

A check passes by returning a detail string and fails by raising
``CheckFailed`` (or any library error).
"""

import json
import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from pydantic import BaseModel, ConfigDict

from .config import OperatorConfig, OperatorVariant
from .dynamics import (
    BoundMode,
    hm_criterion_table,
    hm_witnesses,
    leading_polynomials,
    periodic_vector_derivative,
    verify_certificate,
    zero_witness,
)
from .exceptions import HypermixError, InvalidAlphaError
from .kernels import (
    gk_density_table,
    is_in_kernel,
    kernel_project,
    nonzero_kernel_element,
    saturation_index,
)
from .operators import apply_S, apply_T, domain_weight_exponent, iterate, s_power_norm_bound
from .quadrature import integrate
from .sampling import make_rng, random_ball, random_element, random_piecewise, random_taylor
from .settings import settings
from .spaces import (
    BallSpec,
    NormalizedBivarPoly,
    Piece,
    PiecewiseExpPoly,
    TaylorCoeffs,
    add,
    distance,
    element_from_json,
    element_to_json,
    is_continuous,
    norm,
    scale,
)

logger = logging.getLogger(__name__)

FAMILIES: tuple[OperatorConfig, ...] = (
    OperatorConfig(variant=OperatorVariant.DERIVATIVE),
    OperatorConfig(variant=OperatorVariant.LAPLACIAN),
    OperatorConfig(variant=OperatorVariant.TRANSLATION_LP, w=2.0, a=Fraction(1), p=1.0),
    OperatorConfig(variant=OperatorVariant.TRANSLATION_C0, w=2.0, a=Fraction(1)),
)


class CheckFailed(Exception):
    """Raised by a check whose invariant does not hold."""


@dataclass
class CheckContext:
    rng: np.random.Generator
    quick: bool

    def count(self, full: int, quick: int) -> int:
        return quick if self.quick else full


@dataclass(frozen=True)
class Check:
    name: str
    help: str
    func: Callable[[CheckContext], str]


class CheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    help: str
    passed: bool
    detail: str
    elapsed: float


class VerifyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    quick: bool
    results: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)


# Registry of checks, in registration order
_checks: list[Check] = []


def check(name: str, help: str) -> Callable[[Callable[[CheckContext], str]], Check]:
    """Register an invariant check under ``name``."""

    def decorator(func: Callable[[CheckContext], str]) -> Check:
        registered = Check(name=name, help=help, func=func)
        _checks.append(registered)
        return registered

    return decorator


def registered_checks() -> list[Check]:
    return list(_checks)


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise CheckFailed(message)


# === Spaces ===


@check("norm-axioms", help="‖x + y‖ ≤ ‖x‖ + ‖y‖ and ‖αx‖ = |α|‖x‖ in every space")
def norm_axioms(ctx: CheckContext) -> str:
    count = ctx.count(100, 10)
    for op in FAMILIES:
        space = op.space
        for _ in range(count):
            x, y = random_element(ctx.rng, op), random_element(ctx.rng, op)
            x_norm, y_norm = norm(space, x), norm(space, y)
            _expect(
                norm(space, add(x, y)) <= (x_norm + y_norm) * (1 + 1e-9) + 1e-12,
                f"{op.label()}: triangle inequality",
            )
            alpha = float(ctx.rng.uniform(-3.0, 3.0))
            scaled = norm(space, scale(alpha, x))
            _expect(
                math.isclose(scaled, abs(alpha) * x_norm, rel_tol=1e-9, abs_tol=1e-12),
                f"{op.label()}: homogeneity with α = {alpha:.3f}",
            )
    return f"{count * len(FAMILIES)} pairs"


@check("canonical-idempotent", help="re-canonicalizing a piecewise element is a no-op")
def canonical_idempotent(ctx: CheckContext) -> str:
    count = ctx.count(200, 20)
    for _ in range(count):
        f = random_piecewise(ctx.rng, 2.0)
        raw = [(p.lo, p.hi, [(t.c, t.d, t.q) for t in p.terms]) for p in f.pieces]
        _expect(PiecewiseExpPoly.canonical(f.base, raw) == f, "canonical form changed")
    return f"{count} elements"


@check("gram-quadrature", help="exact Gram norms of X_n Y_l match quadrature")
def gram_quadrature(ctx: CheckContext) -> str:
    op = FAMILIES[1]
    top = ctx.count(10, 4)
    for n in range(top + 1):
        for l in range(top + 1):
            first = integrate(lambda t, k=n: (t**k / math.factorial(k)) ** 2, 0.0, 1.0)
            second = integrate(lambda t, k=l: (t**k / math.factorial(k)) ** 2, 0.0, 1.0)
            exact = norm(op.space, NormalizedBivarPoly.monomial(n, l))
            _expect(
                math.isclose(exact, math.sqrt(first * second), rel_tol=1e-8),
                f"‖X_{n}Y_{l}‖ = {exact:.6e} disagrees with quadrature",
            )
    return f"n, l ≤ {top}"


def _split_pieces(f: PiecewiseExpPoly) -> PiecewiseExpPoly:
    pieces: list[Piece] = []
    for piece in f.pieces:
        mid = (piece.lo + piece.hi) / 2
        pieces.append(Piece(lo=piece.lo, hi=mid, terms=piece.terms))
        pieces.append(Piece(lo=mid, hi=piece.hi, terms=piece.terms))
    return PiecewiseExpPoly(base=f.base, pieces=tuple(pieces), continuous=f.continuous)


@check("split-invariance", help="splitting pieces at interior points keeps the norm")
def split_invariance(ctx: CheckContext) -> str:
    count = ctx.count(50, 5)
    for op in FAMILIES[2:]:
        for _ in range(count):
            f = random_element(ctx.rng, op)
            assert isinstance(f, PiecewiseExpPoly)
            whole, split = norm(op.space, f), norm(op.space, _split_pieces(f))
            _expect(
                math.isclose(whole, split, rel_tol=1e-9, abs_tol=1e-12),
                f"{op.label()}: {whole:.6e} vs {split:.6e} after splitting",
            )
    return f"{count * 2} elements"


@check("json-round-trip", help="serialized elements re-parse to equal canonical values")
def json_round_trip(ctx: CheckContext) -> str:
    count = ctx.count(100, 10)
    for op in FAMILIES:
        for _ in range(count):
            x = random_element(ctx.rng, op)
            payload = json.loads(json.dumps(element_to_json(op.space, x)))
            _expect(element_from_json(op.space, payload) == x, f"{op.label()}: round trip differs")
    return f"{count * len(FAMILIES)} elements"


# === Operators ===


@check("right-inverse", help="T(Sf) = f for random elements of every family")
def right_inverse(ctx: CheckContext) -> str:
    count = ctx.count(200, 20)
    for op in FAMILIES:
        for _ in range(count):
            f = random_element(ctx.rng, op)
            gap = distance(op.space, apply_T(op, apply_S(op, f)), f)
            _expect(gap <= settings.TOLERANCE, f"{op.label()}: ‖TSf - f‖ = {gap:.3e}")
    return f"{count * len(FAMILIES)} elements"


@check("integration-bound", help="‖S^n f‖ ≤ 1/n on unit Hardy elements of degree ≤ 50")
def integration_bound(ctx: CheckContext) -> str:
    op = FAMILIES[0]
    count = ctx.count(100, 10)
    for _ in range(count):
        f = random_taylor(ctx.rng, max_degree=50, unit_norm=True)
        for n in range(1, 31):
            value = norm(op.space, iterate(op, n, f, use_S=True).value)
            _expect(value <= 1 / n + 1e-12, f"‖S^{n} f‖ = {value:.3e} exceeds 1/{n}")
    return f"{count} elements, n = 1..30"


@check("laplacian-inverse", help="Δ(Δ⁻¹ X_n Y_l) = X_n Y_l exactly")
def laplacian_inverse(ctx: CheckContext) -> str:
    op = FAMILIES[1]
    top = ctx.count(20, 8)
    for n in range(top + 1):
        for l in range(top + 1):
            f = NormalizedBivarPoly.monomial(n, l)
            _expect(apply_T(op, apply_S(op, f)) == f, f"Δ(Δ⁻¹ X_{n}Y_{l}) differs")
    return f"n, l ≤ {top}"


@check("translation-decay", help="‖S^n f‖ ≤ w^{-n(n-1)a/2}‖f‖ on L_p by quadrature")
def translation_decay(ctx: CheckContext) -> str:
    count = ctx.count(20, 2)
    top = ctx.count(12, 6)
    cases = 0
    for w in (1.5, 2.0, 4.0):
        for a in (Fraction(1, 2), Fraction(1)):
            for p in (1.0, 2.0):
                op = OperatorConfig(variant=OperatorVariant.TRANSLATION_LP, w=w, a=a, p=p)
                for _ in range(count):
                    f = random_piecewise(ctx.rng, w)
                    size = norm(op.space, f)
                    s_part = f
                    for n in range(1, top + 1):
                        s_part = apply_S(op, s_part)
                        bound = s_power_norm_bound(op, n)
                        assert bound is not None
                        value = norm(op.space, s_part)
                        _expect(
                            value <= bound * size * (1 + 1e-8),
                            f"{op.label()}: ‖S^{n} f‖ = {value:.3e} > {bound * size:.3e}",
                        )
                    cases += 1
    return f"{cases} elements, n = 1..{top}"


@check("domain-weight", help="composite weights match kt + k(k-1)a/2 and -kt + k(k+1)a/2")
def domain_weight(ctx: CheckContext) -> str:
    top = ctx.count(24, 8)
    for op in FAMILIES[2:]:
        assert op.a is not None
        for k in range(top + 1):
            _expect(
                domain_weight_exponent(op, k) == (k, Fraction(k * (k - 1), 2) * op.a),
                f"T^{k} weight",
            )
            _expect(
                domain_weight_exponent(op, k, use_S=True) == (-k, Fraction(k * (k + 1), 2) * op.a),
                f"S^{k} weight",
            )
    return f"k ≤ {top}"


@check("left-inverse-fails", help="S(T u) = 0 ≠ u for kernel elements, so S∘T ≠ I")
def left_inverse_fails(ctx: CheckContext) -> str:
    count = ctx.count(50, 5)
    for op in FAMILIES:
        u = nonzero_kernel_element(op).u
        _expect(not u.is_zero(), f"{op.label()}: zero kernel element")
        _expect(apply_S(op, apply_T(op, u)).is_zero(), f"{op.label()}: S(Tu) ≠ 0")
    derivative = FAMILIES[0]
    for _ in range(count):
        c = complex(*ctx.rng.uniform(-2.0, 2.0, size=2))
        constant = TaylorCoeffs.canonical([c])
        _expect(apply_S(derivative, apply_T(derivative, constant)).is_zero(), f"S(T[{c:.3f}]) ≠ 0")
    return f"{len(FAMILIES)} families, {count} constants"


@check("degree-laws", help="D lowers and S raises the degree of a nonconstant polynomial by 1")
def degree_laws(ctx: CheckContext) -> str:
    op = FAMILIES[0]
    count = ctx.count(200, 20)
    tested = 0
    for _ in range(count):
        f = random_taylor(ctx.rng, max_degree=20)
        if f.degree < 1:
            continue
        lowered, raised = apply_T(op, f), apply_S(op, f)
        assert isinstance(lowered, TaylorCoeffs) and isinstance(raised, TaylorCoeffs)
        _expect(lowered.degree == f.degree - 1, f"deg Df = {lowered.degree}, deg f = {f.degree}")
        _expect(raised.degree == f.degree + 1, f"deg Sf = {raised.degree}, deg f = {f.degree}")
        tested += 1
    return f"{tested} polynomials"


# === Kernels ===


@check("kernel-saturation", help="density gaps reach zero at the predicted index")
def kernel_saturation(ctx: CheckContext) -> str:
    count = ctx.count(50, 5)
    for op in FAMILIES:
        for _ in range(count):
            x = random_element(ctx.rng, op)
            predicted = saturation_index(op, x)
            table = gk_density_table(op, x, n_max=predicted + 2)
            _expect(table.rows[predicted - 1].gap == 0.0, f"{op.label()}: gap at {predicted}")
            if predicted > 1:
                _expect(table.rows[predicted - 2].gap > 0.0, f"{op.label()}: early saturation")
            projection = kernel_project(op, x, predicted)
            _expect(is_in_kernel(op, projection.w_n, predicted), f"{op.label()}: w_n ∉ Ker T^n")
    return f"{count * len(FAMILIES)} elements"


@check("non-injectivity", help="every family has a nonzero kernel element")
def non_injectivity(ctx: CheckContext) -> str:
    for op in FAMILIES:
        witness = nonzero_kernel_element(op)
        _expect(not witness.u.is_zero() and witness.v.is_zero(), f"{op.label()}: u = v")
        _expect(witness.image == apply_T(op, witness.v), f"{op.label()}: Tu ≠ Tv")
    return f"{len(FAMILIES)} families"


# === Dynamics ===


@check("decay-triangle", help="combined ≤ s_norm + kernel_gap in every decay row")
def decay_triangle(ctx: CheckContext) -> str:
    count = ctx.count(10, 2)
    for op in FAMILIES:
        for _ in range(count):
            x = random_element(ctx.rng, op)
            y = random_element(ctx.rng, op)
            for row in hm_criterion_table(op, x, y, n_max=8).rows:
                _expect(
                    row.combined <= (row.s_norm + row.kernel_gap) * (1 + 1e-9) + 1e-12,
                    f"{op.label()}: triangle inequality at n = {row.n}",
                )
    return f"{count * len(FAMILIES)} pairs"


@check("hm-soundness", help="hypermixing witnesses re-verify from scratch")
def hm_soundness(ctx: CheckContext) -> str:
    count = ctx.count(50, 4)
    for op in FAMILIES:
        n_max = 32 if op.variant == OperatorVariant.LAPLACIAN else settings.DEFAULT_N_MAX
        for _ in range(count):
            ball = random_ball(ctx.rng, op)
            y = random_element(ctx.rng, op)
            run = hm_witnesses(op, ball, y, n_max=n_max)
            _expect(run.N <= 64, f"{op.label()}: N = {run.N}")
            if op.variant != OperatorVariant.LAPLACIAN:
                _expect(run.bound_mode == BoundMode.ANALYTIC, f"{op.label()}: no analytic bound")
            for cert in run.certificates:
                _expect(verify_certificate(cert, ball, y), f"{op.label()}: n = {cert.n} fails")
    return f"{count * len(FAMILIES)} instances"


@check("zero-inclusion", help="zero witnesses saturate at finite N")
def zero_inclusion(ctx: CheckContext) -> str:
    count = ctx.count(20, 4)
    for op in FAMILIES:
        for _ in range(count):
            run = zero_witness(op, random_ball(ctx.rng, op), n_max=1)
            _expect(run.certificates[-1].delta == 0.0, f"{op.label()}: no saturation")
    return f"{count * len(FAMILIES)} balls"


@check("c0-continuity", help="every C₀ witness is continuous and vanishes at its support end")
def c0_continuity(ctx: CheckContext) -> str:
    op = FAMILIES[3]
    count = ctx.count(20, 4)
    for _ in range(count):
        ball = random_ball(ctx.rng, op)
        y = random_element(ctx.rng, op)
        runs = [zero_witness(op, ball, n_max=4), hm_witnesses(op, ball, y, n_max=12)]
        for cert in (cert for run in runs for cert in run.certificates):
            u = cert.u_n
            assert isinstance(u, PiecewiseExpPoly)
            _expect(
                u.continuous and is_continuous(u.base, u.pieces),
                f"u_{cert.n} has a jump",
            )
    return f"{count} balls"


@check("leading-polynomials", help="p_n has degree n, leading coefficient α/n! and lies in U")
def leading_coefficients(ctx: CheckContext) -> str:
    op = FAMILIES[0]
    count = ctx.count(20, 4)
    for _ in range(count):
        alpha = complex(*ctx.rng.uniform(-2.0, 2.0, size=2))
        ball = random_ball(ctx.rng, op)
        result = leading_polynomials(alpha, ball)
        for cert, p in zip(result.certificates, result.polynomials):
            _expect(p.degree == cert.n, f"degree {p.degree} at n = {cert.n}")
            _expect(p.coeffs[-1] == alpha / math.factorial(cert.n), f"leading coefficient at n = {cert.n}")
            _expect(ball.contains(p), f"p_{cert.n} outside the ball")
    try:
        leading_polynomials(0, BallSpec(space=op.space, center=TaylorCoeffs(), radius=1.0))
    except InvalidAlphaError:
        pass
    else:
        raise CheckFailed("alpha = 0 accepted")
    return f"{count} pairs"


@check("periodic-defect", help="‖D^N f - f‖ ≤ 2/(M-N+1)! and decreasing in M")
def periodic_defect(ctx: CheckContext) -> str:
    order = 30
    for period in range(1, 5):
        vector = periodic_vector_derivative(period, order)
        limit = (math.log(2) - math.lgamma(order - period + 2)) / math.log(10)
        _expect(vector.log10_defect <= limit + 1e-12, f"N = {period}: defect above bound")
        previous = math.inf
        for m in range(period, order + 1):
            current = periodic_vector_derivative(period, m).log10_defect
            _expect(current < previous, f"N = {period}: not decreasing at M = {m}")
            previous = current
        # short enough that the defect dominates rounding in D^N
        small = periodic_vector_derivative(period, period + 5)
        op = FAMILIES[0]
        direct = norm(op.space, iterate(op, period, small.f).value - small.f)
        _expect(math.isclose(direct, small.defect, rel_tol=1e-9), f"N = {period}: direct defect")
    return "N = 1..4"


# === Runner ===


def run_checks(seed: int | None = None, quick: bool = False) -> VerifyReport:
    """Run every registered check; failures are recorded, never raised."""
    seed = settings.VERIFY_SEED if seed is None else seed
    ctx = CheckContext(rng=make_rng(seed), quick=quick)
    results = []
    for registered in _checks:
        started = time.perf_counter()
        try:
            detail = registered.func(ctx)
            passed = True
        except (CheckFailed, HypermixError) as e:
            detail, passed = str(e), False
        elapsed = time.perf_counter() - started
        logger.info(
            "Check finished",
            extra={"check": registered.name, "passed": passed, "elapsed": elapsed},
        )
        results.append(
            CheckResult(
                name=registered.name,
                help=registered.help,
                passed=passed,
                detail=detail,
                elapsed=elapsed,
            )
        )
    return VerifyReport(seed=seed, quick=quick, results=tuple(results))
