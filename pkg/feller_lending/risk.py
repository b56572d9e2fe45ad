"""Provide systemic-risk analytics for the total reserve.

The total reserve Y of N banks solves dY = N (gamma_t - psi_t) dt + 2 sqrt(Y) dW,
a squared-Bessel process with time-varying dimension. Zero is never reached
when the dimension stays above 2.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .coeffs import (
    CoefficientPath,
    ModelParams,
    StationaryCoefficients,
    mode_constants,
    stationary_eta,
)
from .const import (
    BOUNDARY_TOL,
    MODE_FINITE,
    MODE_MEAN_FIELD,
    REGIME_ABSORBED,
    REGIME_NEVER,
    REGIME_RECURRENT,
    REGIME_REFLECTING,
    VARIANT_DISAGREEMENT_TOL,
    VARIANT_STANDARD,
    VARIANT_STATED,
    VARIANTS,
)
from .errors import CrossCheckError, ValidationError
from .sde import PathEnsemble
from .special import lower_incomplete_gamma, regularized_lower_gamma

logger = logging.getLogger(__name__)

Coefficients = Union[CoefficientPath, StationaryCoefficients]


@dataclass(frozen=True)
class RegimeVerdict:
    """Represent the long-run behavior of the total reserve."""

    regime: str
    threshold_margin: float
    boundary: bool
    effective_growth: float
    threshold: float


def zero_threshold(n_banks: Optional[int]) -> float:
    """Return 2/N, the growth rate at which zero stops being reachable.

    The mean-field limit, ``n_banks=None``, has threshold 0.
    """
    return 0.0 if n_banks is None else 2.0 / n_banks


def classify_regime(
    effective_growth: float, n_banks: Optional[int], tolerance: float = BOUNDARY_TOL
) -> RegimeVerdict:
    """Return the regime of a total reserve growing at N * effective_growth."""
    if effective_growth < -tolerance:
        raise ValidationError(
            "effective growth must be >= 0, got {}".format(effective_growth)
        )
    threshold = zero_threshold(n_banks)
    margin = effective_growth - threshold
    boundary = False
    if abs(effective_growth) <= tolerance:
        regime = REGIME_ABSORBED
    elif abs(margin) <= tolerance:
        regime = REGIME_RECURRENT
        boundary = True
    elif margin > 0.0:
        regime = REGIME_NEVER
    else:
        regime = REGIME_REFLECTING
    return RegimeVerdict(
        regime=regime,
        threshold_margin=margin,
        boundary=boundary,
        effective_growth=effective_growth,
        threshold=threshold,
    )


def besq_zero_hit_survival(
    y0: float, horizon: float, dimension: float, variant: str = VARIANT_STANDARD
) -> float:
    """Return P(the total reserve stays positive on [0, T]).

    ``standard-besq`` is the squared-Bessel law, P(1 - delta/2, y0/(2T)) below
    dimension 2 and 1 above. ``paper-stated`` is the unnormalized
    Gamma(y0^2/(2T); delta), reported as is.
    """
    if not y0 > 0.0:
        raise ValidationError("y0 must be > 0, got {}".format(y0))
    if not horizon > 0.0:
        raise ValidationError("T must be > 0, got {}".format(horizon))
    if variant not in VARIANTS:
        raise ValidationError("unknown formula variant {!r}".format(variant))
    if variant == VARIANT_STATED:
        return lower_incomplete_gamma(dimension, y0 * y0 / (2.0 * horizon))
    if dimension >= 2.0:
        return 1.0
    return regularized_lower_gamma(1.0 - dimension / 2.0, y0 / (2.0 * horizon))


@dataclass(frozen=True)
class TailBounds:  # pylint: disable=too-many-instance-attributes
    """Represent the comparison bracket of P(tau > T)."""

    lower: float
    upper: float
    formula_variant: str
    y0: float
    horizon: float
    delta_inf: float
    delta_sup: float
    premise_holds: bool
    stated_lower: float
    stated_upper: float
    variants_disagree: bool


def _growth_gap(params: ModelParams, coeffs: Coefficients) -> np.ndarray:
    if isinstance(coeffs, StationaryCoefficients):
        return np.array([params.gamma.level - coeffs.psi])
    return np.broadcast_to(params.gamma(coeffs.grid), coeffs.grid.shape) - coeffs.psi


def tail_bounds(
    params: ModelParams,
    coeffs: CoefficientPath,
    y0: float,
    horizon: Optional[float] = None,
) -> TailBounds:
    """Return lower and upper bounds of P(tau > T) from the extreme dimensions.

    The instability premise sup(gamma - psi) < 2/N is reported, not enforced.
    """
    horizon = coeffs.horizon if horizon is None else horizon
    gap = _growth_gap(params, coeffs)
    n = params.n_banks
    delta_inf, delta_sup = n * float(gap.min()), n * float(gap.max())
    premise = float(gap.max()) < 2.0 / n
    if not premise:
        logger.info(
            "instability premise sup(gamma - psi) < 2/N fails; "
            "bounds are informational"
        )
    lower = besq_zero_hit_survival(y0, horizon, delta_inf)
    upper = besq_zero_hit_survival(y0, horizon, delta_sup)
    stated_lower = besq_zero_hit_survival(y0, horizon, delta_inf, VARIANT_STATED)
    stated_upper = besq_zero_hit_survival(y0, horizon, delta_sup, VARIANT_STATED)
    disagree = max(abs(stated_lower - lower), abs(stated_upper - upper)) > (
        VARIANT_DISAGREEMENT_TOL
    )
    if disagree:
        logger.info(
            "tail formula variants disagree: "
            "standard [%.6g, %.6g], stated [%.6g, %.6g]",
            lower,
            upper,
            stated_lower,
            stated_upper,
        )
    return TailBounds(
        lower=lower,
        upper=upper,
        formula_variant=VARIANT_STANDARD,
        y0=y0,
        horizon=horizon,
        delta_inf=delta_inf,
        delta_sup=delta_sup,
        premise_holds=premise,
        stated_lower=stated_lower,
        stated_upper=stated_upper,
        variants_disagree=disagree,
    )


@dataclass(frozen=True)
class StabilityMargins:
    """Represent the stability condition inf(gamma - psi) vs 2/N."""

    effective_growth: float
    peak_growth: float
    threshold: float
    margin: float
    strictly_stable: bool
    weakly_stable: bool
    worst_case_margin: float
    worst_case_unstable: bool


def stability_report(params: ModelParams, coeffs: Coefficients) -> StabilityMargins:
    """Return strict, weak and worst-case stability margins.

    Mean-field coefficients are held to the N -> infinity threshold 0; the
    stationary coefficients of the discounted game give scalar margins.
    """
    gap = _growth_gap(params, coeffs)
    threshold = zero_threshold(
        None if coeffs.mode == MODE_MEAN_FIELD else params.n_banks
    )
    low, high = float(gap.min()), float(gap.max())
    margin = low - threshold
    return StabilityMargins(
        effective_growth=low,
        peak_growth=high,
        threshold=threshold,
        margin=margin,
        strictly_stable=margin > 0.0,
        weakly_stable=margin >= -BOUNDARY_TOL,
        worst_case_margin=threshold - high,
        worst_case_unstable=high <= threshold,
    )


class IncentiveInterval(NamedTuple):
    """Hold the incentive range that keeps the mean-field game stable."""

    q_low: float
    q_high: float


def dual_epsilon_interval(gamma: float, q: float) -> Tuple[float, float]:
    """Return [q^2, (gamma + 2) q^2 / 2), the penalties compatible with q."""
    if not gamma > 0.0:
        raise ValidationError("growth rate must be > 0, got {}".format(gamma))
    return q * q, (gamma + 2.0) * q * q / 2.0


def min_incentive_finite(gamma: float, eps: float) -> IncentiveInterval:
    """Return (sqrt(2 eps) / sqrt(gamma + 2), sqrt(eps)).

    Any q in the interval keeps inf(gamma - psi) > 0 in the mean-field game
    with a = c = 0.
    """
    if not gamma > 0.0:
        raise ValidationError(
            "incentive interval is empty for growth rate {} <= 0".format(gamma)
        )
    if not eps > 0.0:
        raise ValidationError("eps must be > 0, got {}".format(eps))
    return IncentiveInterval(
        q_low=math.sqrt(2.0 * eps) / math.sqrt(gamma + 2.0), q_high=math.sqrt(eps)
    )


@dataclass(frozen=True)
class IncentiveBounds:  # pylint: disable=too-many-instance-attributes
    """Represent the coefficient bounds behind the incentive interval.

    ``eta_bound`` is (eps - q^2) / q and ``liquidity_bound`` is
    2 (1 - eps / q^2); ``growth_floor`` is the resulting lower bound on
    gamma - psi.
    """

    eta_bound: float
    eta_max: float
    liquidity_bound: float
    liquidity_min: float
    growth_floor: float
    growth_min: float
    holds: bool


def incentive_bounds(params: ModelParams, coeffs: CoefficientPath) -> IncentiveBounds:
    """Check eta <= (eps - q^2) / q and L >= 2 (1 - eps / q^2) along a solve.

    The bounds belong to the mean-field game with a = c = 0 and q > 0, where
    psi = -L and so gamma - psi >= min gamma + 2 (1 - eps / q^2).
    """
    if coeffs.mode != MODE_MEAN_FIELD:
        raise ValidationError("incentive bounds need mean-field coefficients")
    if params.a != 0.0 or params.c != 0.0 or not params.q > 0.0:
        raise ValidationError("incentive bounds need a = c = 0 and q > 0")
    q_squared = params.q * params.q
    eta_bound = params.eps_net / params.q
    liquidity_bound = 2.0 * (1.0 - params.eps / q_squared)
    growth_floor = min(params.gamma.values) + liquidity_bound
    eta_max = float(coeffs.eta.max())
    liquidity_min = float(coeffs.L.min())
    growth_min = float(_growth_gap(params, coeffs).min())
    slack = BOUNDARY_TOL * max(1.0, abs(liquidity_bound))
    holds = (
        eta_max <= eta_bound + slack
        and liquidity_min >= liquidity_bound - slack
        and growth_min >= growth_floor - slack
    )
    if not holds:
        logger.warning(
            "incentive bounds violated: eta %.6g vs %.6g, L %.6g vs %.6g",
            eta_max,
            eta_bound,
            liquidity_min,
            liquidity_bound,
        )
    return IncentiveBounds(
        eta_bound=eta_bound,
        eta_max=eta_max,
        liquidity_bound=liquidity_bound,
        liquidity_min=liquidity_min,
        growth_floor=growth_floor,
        growth_min=growth_min,
        holds=holds,
    )


def min_incentive_discounted(gamma: float, eps: float, r: float) -> float:
    """Return the smallest q with stationary psi <= gamma in the discounted game.

    The bound holds in the mean-field limit with a = 0 and is 0 when the
    penalty is below (gamma^2/4 + gamma/2) r^2.
    """
    if gamma < 0.0 or eps < 0.0 or not r > 0.0:
        raise ValidationError("need gamma >= 0, eps >= 0 and r > 0")
    linear = gamma * gamma / 4.0 + 3.0 * gamma / 4.0
    constant = gamma * gamma / 4.0 + gamma / 2.0
    if eps < constant * r * r:
        return 0.0
    square = (gamma / 2.0 + 1.0) ** 2
    root = math.sqrt(linear * linear * r * r + (eps - constant * r * r) * square)
    return (-linear * r + root) / square


def eta_q_derivative(params: ModelParams, mode: str = MODE_FINITE) -> float:
    """Return d eta / d q of the stationary game.

    The slope must be negative for eps > 0. With eps = 0 the only admissible
    incentive is q = 0, where stationary eta vanishes and the slope is 0.
    """
    if params.eps == 0.0:
        logger.debug("eps = 0 leaves the single incentive q = 0; slope is 0")
        return 0.0
    consts = mode_constants(params, mode)
    shift = params.a + params.q + params.r / 2.0
    root = math.sqrt(shift * shift + consts.kappa * params.eps_net)
    slope = (-1.0 + (shift - consts.kappa * params.q) / root) / consts.kappa
    if not slope < 0.0:
        raise CrossCheckError("stationary eta is not decreasing in q", achieved=slope)
    return slope


def eta_q_finite_difference(
    params: ModelParams, step: float = 1e-5, mode: str = MODE_FINITE
) -> float:
    """Return a second-order finite difference of stationary eta in q.

    One-sided stencils are used within two steps of 0 and sqrt(eps).
    """
    q_max = math.sqrt(params.eps)

    def eta_at(q: float) -> float:
        return stationary_eta(replace(params, q=min(max(q, 0.0), q_max)), mode)

    q = params.q
    if q - step < 0.0:
        return (-3.0 * eta_at(q) + 4.0 * eta_at(q + step) - eta_at(q + 2 * step)) / (
            2.0 * step
        )
    if q + step > q_max:
        return (3.0 * eta_at(q) - 4.0 * eta_at(q - step) + eta_at(q - 2 * step)) / (
            2.0 * step
        )
    return (eta_at(q + step) - eta_at(q - step)) / (2.0 * step)


@dataclass(frozen=True)
class DefaultStatistics:  # pylint: disable=too-many-instance-attributes
    """Represent default frequencies of an ensemble.

    A bank defaults when its reserve hits zero; the system defaults when all
    reserves are zero at once.
    """

    n_paths: int
    per_bank_frequency: np.ndarray
    per_bank_stderr: np.ndarray
    all_default_frequency: float
    all_default_stderr: float
    tau_values: np.ndarray
    tau_counts: np.ndarray

    @property
    def survival(self) -> float:
        """Return the fraction of paths whose total reserve stays positive."""
        return 1.0 - self.all_default_frequency


def _binomial_stderr(frequency: Union[float, np.ndarray], n: int) -> np.ndarray:
    return np.sqrt(frequency * (1.0 - frequency) / n)


def default_statistics(ensemble: PathEnsemble) -> DefaultStatistics:
    """Return default frequencies with binomial standard errors."""
    n = ensemble.n_paths
    per_bank = np.mean(~np.isnan(ensemble.hit_times), axis=0)
    system = ~np.isnan(ensemble.system_hit_times)
    all_default = float(np.mean(system))
    tau_values, tau_counts = np.unique(
        ensemble.system_hit_times[system], return_counts=True
    )
    return DefaultStatistics(
        n_paths=n,
        per_bank_frequency=per_bank,
        per_bank_stderr=_binomial_stderr(per_bank, n),
        all_default_frequency=all_default,
        all_default_stderr=float(_binomial_stderr(all_default, n)),
        tau_values=tau_values,
        tau_counts=tau_counts,
    )


@dataclass(frozen=True)
class RiskReport:  # pylint: disable=too-many-instance-attributes
    """Represent the systemic-risk findings of a scenario."""

    regime: RegimeVerdict
    defaults: Optional[DefaultStatistics] = None
    tail: Optional[TailBounds] = None
    stability: Optional[StabilityMargins] = None
    incentive: Optional[IncentiveInterval] = None
    discounted_incentive: Optional[float] = None
    bounds: Optional[IncentiveBounds] = None

    def items(self) -> List[Tuple[str, object]]:
        """Return the report as ordered key, value pairs."""
        rows: List[Tuple[str, object]] = [
            ("regime", self.regime.regime),
            ("effective_growth", self.regime.effective_growth),
            ("threshold", self.regime.threshold),
            ("threshold_margin", self.regime.threshold_margin),
            ("boundary", self.regime.boundary),
        ]
        if self.stability is not None:
            rows.extend(
                ("stability_" + key, value)
                for key, value in self.stability.__dict__.items()
            )
        if self.tail is not None:
            rows.extend(
                ("tail_" + key, value) for key, value in self.tail.__dict__.items()
            )
        if self.defaults is not None:
            stats = self.defaults
            frequency = stats.per_bank_frequency
            rows.extend(
                [
                    ("paths", stats.n_paths),
                    ("all_default_frequency", stats.all_default_frequency),
                    ("all_default_stderr", stats.all_default_stderr),
                    ("min_bank_default_frequency", float(frequency.min())),
                    ("max_bank_default_frequency", float(frequency.max())),
                    ("survival_estimate", stats.survival),
                ]
            )
        if self.incentive is not None:
            rows.extend(
                [
                    ("incentive_q_low", self.incentive.q_low),
                    ("incentive_q_high", self.incentive.q_high),
                ]
            )
        if self.discounted_incentive is not None:
            rows.append(("discounted_incentive_q_low", self.discounted_incentive))
        if self.bounds is not None:
            rows.extend(
                ("incentive_bound_" + key, value)
                for key, value in self.bounds.__dict__.items()
            )
        return rows


def build_risk_report(
    params: ModelParams,
    coeffs: Optional[Coefficients] = None,
    ensemble: Optional[PathEnsemble] = None,
    y0: Optional[float] = None,
) -> RiskReport:
    """Return the risk report of a scenario.

    Without coefficients the effective growth is the lowest growth rate of
    the uncontrolled system.
    """
    if coeffs is not None:
        growth = float(_growth_gap(params, coeffs).min())
        mean_field = coeffs.mode == MODE_MEAN_FIELD
    else:
        growth = min(params.gamma.values)
        mean_field = False
    if growth < 0.0:
        logger.info("effective growth %.6g < 0 is classified as absorbed", growth)
    regime = classify_regime(max(growth, 0.0), None if mean_field else params.n_banks)
    stability = stability_report(params, coeffs) if coeffs is not None else None
    tail = None
    if isinstance(coeffs, CoefficientPath) and y0 is not None and y0 > 0.0:
        tail = tail_bounds(params, coeffs, y0)
    bounds = None
    if (
        isinstance(coeffs, CoefficientPath)
        and mean_field
        and params.a == 0.0
        and params.c == 0.0
        and params.q > 0.0
    ):
        bounds = incentive_bounds(params, coeffs)
    incentive = None
    discounted = None
    if params.gamma.is_constant and params.gamma.level > 0.0 and params.eps > 0.0:
        incentive = min_incentive_finite(params.gamma.level, params.eps)
        if params.discount is not None:
            discounted = min_incentive_discounted(
                params.gamma.level, params.eps, params.discount
            )
    return RiskReport(
        regime=regime,
        defaults=default_statistics(ensemble) if ensemble is not None else None,
        tail=tail,
        stability=stability,
        incentive=incentive,
        discounted_incentive=discounted,
        bounds=bounds,
    )
