"""Adaptive Gauss–Legendre quadrature and extremum search on intervals."""

import logging
from collections.abc import Callable, Iterable
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray

from .settings import settings

logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
Integrand = Callable[[FloatArray], FloatArray]

_EPS = float(np.finfo(np.float64).eps)


@lru_cache(maxsize=16)
def gauss_legendre(points: int) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights of the ``points``-point rule on [-1, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(points)
    return nodes, weights


def _gauss(f: Integrand, lo: float, hi: float, points: int) -> float:
    nodes, weights = gauss_legendre(points)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return float(half * np.dot(weights, f(mid + half * nodes)))


def _refine(
    f: Integrand,
    lo: float,
    hi: float,
    whole: float,
    tolerance: float,
    points: int,
    depth: int,
) -> float:
    mid = 0.5 * (lo + hi)
    left = _gauss(f, lo, mid, points)
    right = _gauss(f, mid, hi, points)
    estimate = left + right
    # Below the rounding floor halving cannot improve the estimate
    if abs(estimate - whole) <= max(tolerance, 50 * _EPS * abs(estimate)):
        return estimate
    if depth == 0:
        logger.debug(
            "Quadrature depth exhausted",
            extra={"lo": lo, "hi": hi, "error": abs(estimate - whole)},
        )
        return estimate
    return _refine(f, lo, mid, left, tolerance / 2, points, depth - 1) + _refine(
        f, mid, hi, right, tolerance / 2, points, depth - 1
    )


def integrate(
    f: Integrand,
    lo: float,
    hi: float,
    *,
    tolerance: float | None = None,
    points: int | None = None,
    max_depth: int | None = None,
) -> float:
    """Integrate a vectorised ``f`` over [lo, hi] by adaptive interval halving.

    Args:
        f: Integrand accepting and returning float arrays.
        lo: Lower limit.
        hi: Upper limit; an empty interval integrates to zero.
        tolerance: Absolute tolerance (defaults to ``QUADRATURE_TOLERANCE``).
        points: Gauss–Legendre rule size per subinterval.
        max_depth: Maximum number of halvings along any branch.

    Returns:
        The integral estimate.
    """
    if hi <= lo:
        return 0.0
    tolerance = settings.QUADRATURE_TOLERANCE if tolerance is None else tolerance
    points = points or settings.QUADRATURE_POINTS
    depth = settings.QUADRATURE_MAX_DEPTH if max_depth is None else max_depth
    whole = _gauss(f, lo, hi, points)
    return _refine(f, lo, hi, whole, tolerance, points, depth)


def _bisect_root(df: Integrand, lo: float, hi: float, tolerance: float) -> float:
    f_lo = float(df(np.array([lo]))[0])
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        f_mid = float(df(np.array([mid]))[0])
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def maximize_abs(
    f: Integrand,
    lo: float,
    hi: float,
    *,
    derivative: Integrand | None = None,
    critical_points: Iterable[float] = (),
    samples: int | None = None,
    tolerance: float | None = None,
) -> float:
    """Supremum of |f| over [lo, hi].

    Candidates are the endpoints, the supplied critical points inside the
    interval and, when ``derivative`` is given, every sign change of the
    derivative on a uniform sample grid refined by bisection.
    """
    if hi <= lo:
        return 0.0
    candidates = [lo, hi]
    candidates.extend(t for t in critical_points if lo < t < hi)
    if derivative is not None:
        samples = samples or settings.SUP_SAMPLES
        tolerance = settings.BISECTION_TOLERANCE if tolerance is None else tolerance
        grid = np.linspace(lo, hi, samples + 1)
        slopes = derivative(grid)
        candidates.extend(grid.tolist())
        for i in np.nonzero(slopes[:-1] * slopes[1:] < 0)[0]:
            candidates.append(_bisect_root(derivative, float(grid[i]), float(grid[i + 1]), tolerance))
    values = np.abs(f(np.asarray(candidates, dtype=np.float64)))
    return float(np.max(values))
