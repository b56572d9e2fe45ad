"""Provide the incomplete gamma function and squared-Bessel helpers.

The regularized lower incomplete gamma function is evaluated with the series
representation below ``x < s + 1`` and with a modified Lentz continued
fraction for the upper function otherwise ("Numerical Recipes in C", 2nd
edition, chapter 6).
"""
import math

import numpy as np
from scipy.special import ive

from .errors import CrossCheckError, ValidationError

ACCURACY = 1.0e-15
MAX_ITERATIONS = 1000
# Smallest representable scale used to keep the Lentz recursion away from 0.
FPMIN = 1.0e-300


def regularized_lower_gamma(shape: float, x: float) -> float:
    """Return P(s, x) = gamma(s, x) / Gamma(s).

    Raise ValidationError for s <= 0 or x < 0.
    """
    if shape <= 0.0:
        raise ValidationError("incomplete gamma needs shape > 0, got {}".format(shape))
    if x < 0.0:
        raise ValidationError("incomplete gamma needs x >= 0, got {}".format(x))
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < shape + 1.0:
        return _gamma_series(shape, x)
    return 1.0 - _gamma_continued_fraction(shape, x)


def lower_incomplete_gamma(shape: float, x: float) -> float:
    """Return the unnormalized integral of u^(s-1) e^(-u) over [0, x].

    A nonpositive shape makes the integral diverge for x > 0.
    """
    if x < 0.0:
        raise ValidationError("incomplete gamma needs x >= 0, got {}".format(x))
    if x == 0.0:
        return 0.0
    if shape <= 0.0:
        return math.inf
    return regularized_lower_gamma(shape, x) * math.exp(math.lgamma(shape))


def _log_prefactor(shape: float, x: float) -> float:
    return -x + shape * math.log(x) - math.lgamma(shape)


def _gamma_series(shape: float, x: float) -> float:
    term = 1.0 / shape
    total = term
    denominator = shape
    for _ in range(MAX_ITERATIONS):
        denominator += 1.0
        term *= x / denominator
        total += term
        if abs(term) < abs(total) * ACCURACY:
            return total * math.exp(_log_prefactor(shape, x))
    raise CrossCheckError(
        "incomplete gamma series did not converge for s={}, x={}".format(shape, x),
        achieved=abs(term / total),
        tolerance=ACCURACY,
    )


def _gamma_continued_fraction(shape: float, x: float) -> float:
    """Return the regularized upper function Q(s, x)."""
    b = x + 1.0 - shape
    c = 1.0 / FPMIN
    d = 1.0 / b
    result = d
    delta = 0.0
    for i in range(1, MAX_ITERATIONS + 1):
        an = -i * (i - shape)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        result *= delta
        if abs(delta - 1.0) < ACCURACY:
            return math.exp(_log_prefactor(shape, x)) * result
    raise CrossCheckError(
        "incomplete gamma continued fraction did not converge "
        "for s={}, x={}".format(shape, x),
        achieved=abs(delta - 1.0),
        tolerance=ACCURACY,
    )


def besq_bridge_survival(
    start: np.ndarray, end: np.ndarray, dimension: float, dt: float
) -> np.ndarray:
    """Return the probability that a squared-Bessel bridge avoids zero.

    The bridge runs from ``start`` to ``end`` over a step ``dt``. Killing the
    process at zero swaps the Bessel order of the transition density from
    dimension / 2 - 1 to 1 - dimension / 2, so the survival probability is the
    ratio of the two modified Bessel functions at sqrt(start * end) / dt.
    """
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    survival = np.zeros(np.broadcast(start, end).shape)
    if dimension >= 2.0:
        survival[...] = 1.0
        return survival
    positive = np.broadcast_to((start > 0.0) & (end > 0.0), survival.shape)
    if dimension == 0.0:
        # I_{-1} = I_1: a path that ends positive never touched the trap.
        survival[positive] = 1.0
        return survival
    z = np.sqrt(np.broadcast_to(start * end, survival.shape)[positive]) / dt
    order = 1.0 - dimension / 2.0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratio = ive(order, z) / ive(-order, z)
    survival[positive] = np.clip(np.nan_to_num(ratio, nan=0.0), 0.0, 1.0)
    return survival
