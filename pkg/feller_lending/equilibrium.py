"""Evaluate equilibrium controls, admissibility and the HJB residual."""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .coeffs import (
    CoefficientPath,
    CoefficientSample,
    ModelParams,
    StationaryCoefficients,
    mode_constants,
    solve_finite_horizon,
    solve_mfg,
)
from .const import HJB_TOL_BOUNDARY, HJB_TOL_INTERIOR, MODE_FINITE, MODE_MEAN_FIELD
from .errors import ValidationError

logger = logging.getLogger(__name__)

Coefficients = Union[CoefficientPath, StationaryCoefficients]


@dataclass(frozen=True)
class ControlQuery:
    """Represent a control evaluation point.

    ``x_ref`` is the averaged capitalization for the finite-player game and
    the mean path value m_t for the mean-field game.
    """

    t: float
    x_i: float
    x_ref: float
    coeffs: Coefficients

    def __post_init__(self) -> None:
        """Validate the reserves."""
        if self.x_i < 0.0 or self.x_ref < 0.0:
            raise ValidationError("reserves must be >= 0")


def _sample(coeffs: Coefficients, t: float) -> CoefficientSample:
    if isinstance(coeffs, StationaryCoefficients):
        return CoefficientSample(
            coeffs.eta, coeffs.L, coeffs.phi, coeffs.mu, coeffs.psi
        )
    return coeffs.sample(t)


def _growth_at(params: ModelParams, coeffs: Coefficients, t: float) -> float:
    if isinstance(coeffs, CoefficientPath):
        return float(params.gamma(t))
    return params.gamma.level


def _require(coeffs: Coefficients, mode: str, stationary: bool) -> None:
    if coeffs.mode != mode:
        raise ValidationError(
            "expected {} coefficients, got {}".format(mode, coeffs.mode)
        )
    if stationary != isinstance(coeffs, StationaryCoefficients):
        raise ValidationError(
            "expected {} coefficients".format(
                "stationary" if stationary else "time-gridded"
            )
        )


def _feedback(query: ControlQuery, params: ModelParams) -> float:
    consts = mode_constants(params, query.coeffs.mode)
    sample = _sample(query.coeffs, query.t)
    gain = params.q + consts.beta * sample.eta
    return gain * (query.x_ref - query.x_i) - sample.psi


def nash_control_finite(
    query: ControlQuery, params: Optional[ModelParams] = None
) -> float:
    """Return (q + (1 - 1/N) eta_t)(xbar - x_i) - psi_t."""
    _require(query.coeffs, MODE_FINITE, stationary=False)
    return _feedback(query, params or query.coeffs.params)


def mfg_control(query: ControlQuery) -> float:
    """Return (q + eta_t)(m_t - x) - psi_t."""
    _require(query.coeffs, MODE_MEAN_FIELD, stationary=False)
    return _feedback(query, query.coeffs.params)


def stationary_control(query: ControlQuery) -> float:
    """Return the infinite-horizon feedback control."""
    if not isinstance(query.coeffs, StationaryCoefficients):
        raise ValidationError("expected stationary coefficients")
    return _feedback(query, query.coeffs.params)


def value_gradient(query: ControlQuery) -> float:
    """Return the derivative of the ansatz value function in the own reserve."""
    sample = _sample(query.coeffs, query.t)
    consts = mode_constants(query.coeffs.params, query.coeffs.mode)
    distance = query.x_ref - query.x_i
    return (sample.eta * distance + sample.L) * (
        consts.inv_n - 1.0
    ) + consts.inv_n * sample.phi


def first_order_control(query: ControlQuery) -> float:
    """Return the Hamiltonian minimizer q (xref - x_i) - dV/dx_i."""
    params = query.coeffs.params
    return params.q * (query.x_ref - query.x_i) - value_gradient(query)


class AggregateControl(NamedTuple):
    """Hold the total equilibrium control of the banking system."""

    total: float
    mean_reversion_sum: float
    direct_sum: Optional[float]


def aggregate_control_identity(
    coeffs: Coefficients, t: float, states: Optional[Sequence[float]] = None
) -> AggregateControl:
    """Return -N psi_t, the sum of the equilibrium controls over all banks.

    With a state vector the controls are also summed bank by bank, and the
    sum of the mean-reversion distances, which must vanish, is reported.
    """
    params = coeffs.params
    sample = _sample(coeffs, t)
    total = -params.n_banks * sample.psi
    if states is None:
        return AggregateControl(total=total, mean_reversion_sum=0.0, direct_sum=None)
    x = np.asarray(states, dtype=float)
    if x.shape != (params.n_banks,):
        raise ValidationError(
            "state vector needs {} entries, got {}".format(params.n_banks, x.shape)
        )
    x_bar = float(x.mean())
    direct = sum(
        _feedback(ControlQuery(t=t, x_i=float(xi), x_ref=x_bar, coeffs=coeffs), params)
        for xi in x
    )
    return AggregateControl(
        total=total,
        mean_reversion_sum=float(np.sum(x_bar - x)),
        direct_sum=float(direct),
    )


def liquidity(params: ModelParams, coeffs: Coefficients) -> Union[float, np.ndarray]:
    """Return the liquidity A = a + q + (1 - 1/N) eta."""
    consts = mode_constants(params, coeffs.mode)
    return params.a + params.q + consts.beta * coeffs.eta


@dataclass(frozen=True)
class AdmissibilityReport:  # pylint: disable=too-many-instance-attributes
    """Represent the regularity conditions of an equilibrium."""

    cond_growth: bool
    growth_margin: float
    growth_first_violation: Optional[float]
    cond_bankcount: bool
    bankcount_margin: float
    bankcount_first_violation: Optional[float]
    liquidity: Union[float, np.ndarray]


def _first_violation(grid: np.ndarray, margins: np.ndarray) -> Optional[float]:
    bad = np.flatnonzero(margins < 0.0)
    return float(grid[bad[0]]) if bad.size else None


def check_admissibility(
    params: ModelParams, coeffs: Coefficients
) -> AdmissibilityReport:
    """Return margins of gamma >= psi and a + q + (1 - 1/N) eta <= N."""
    liq = liquidity(params, coeffs)
    if isinstance(coeffs, StationaryCoefficients):
        growth = params.gamma.level - coeffs.psi
        bank = params.n_banks - float(liq)
        return AdmissibilityReport(
            cond_growth=growth >= 0.0,
            growth_margin=growth,
            growth_first_violation=None,
            cond_bankcount=bank >= 0.0,
            bankcount_margin=bank,
            bankcount_first_violation=None,
            liquidity=float(liq),
        )
    grid = coeffs.grid
    growth_t = np.broadcast_to(params.gamma(grid), grid.shape) - coeffs.psi
    bank_t = params.n_banks - liq
    report = AdmissibilityReport(
        cond_growth=bool(np.min(growth_t) >= 0.0),
        growth_margin=float(np.min(growth_t)),
        growth_first_violation=_first_violation(grid, growth_t),
        cond_bankcount=bool(np.min(bank_t) >= 0.0),
        bankcount_margin=float(np.min(bank_t)),
        bankcount_first_violation=_first_violation(grid, bank_t),
        liquidity=liq,
    )
    logger.debug(
        "admissibility: growth margin %.6g, bank-count margin %.6g",
        report.growth_margin,
        report.bankcount_margin,
    )
    return report


class CoefficientRates(NamedTuple):
    """Hold the time derivatives of the coefficients at one time."""

    eta: float
    L: float
    phi: float
    mu: float


def _rates(coeffs: CoefficientPath, t: float) -> CoefficientRates:
    grid = coeffs.grid
    edge = 2 if grid.size > 2 else 1
    return CoefficientRates(
        *(
            float(np.interp(t, grid, np.gradient(arr, grid, edge_order=edge)))
            for arr in (coeffs.eta, coeffs.L, coeffs.phi, coeffs.mu)
        )
    )


def _time_term(
    coeffs: Coefficients,
    t: float,
    distance: float,
    level: float,
    sample: CoefficientSample,
) -> float:
    """Return dV/dt, or -r V for the discounted game."""
    if isinstance(coeffs, StationaryCoefficients):
        value = 0.5 * sample.eta * distance ** 2 + sample.L * distance
        return -coeffs.params.r * (value + sample.phi * level + sample.mu)
    rates = _rates(coeffs, t)
    return (
        0.5 * rates.eta * distance ** 2
        + rates.L * distance
        + rates.phi * level
        + rates.mu
    )


def hjb_residual(  # pylint: disable=too-many-locals
    t: float,
    state: Sequence[float],
    bank_index: int,
    coeffs: Coefficients,
    params: Optional[ModelParams] = None,
) -> float:
    """Return the HJB operator of bank ``bank_index`` applied to the ansatz.

    Every bank plays its equilibrium control. Time derivatives of the
    coefficients come from central differences on the coefficient grid.
    """
    _require(coeffs, MODE_FINITE, isinstance(coeffs, StationaryCoefficients))
    params = params or coeffs.params
    x = np.asarray(state, dtype=float)
    n = params.n_banks
    if x.shape != (n,) or np.any(x < 0.0):
        raise ValidationError("state must hold {} nonnegative reserves".format(n))
    if not 0 <= bank_index < n:
        raise ValidationError("bank index {} out of range".format(bank_index))
    consts = mode_constants(params, MODE_FINITE)
    sample = _sample(coeffs, t)
    gamma = _growth_at(params, coeffs, t)
    x_bar = float(x.mean())
    distance = x_bar - x
    d_i = float(distance[bank_index])
    controls = (params.q + consts.beta * sample.eta) * distance - sample.psi
    own = np.zeros(n)
    own[bank_index] = 1.0
    weight = consts.inv_n - own
    gradient = (sample.eta * d_i + sample.L) * weight + sample.phi * consts.inv_n
    hessian = sample.eta * weight ** 2
    drift = params.a * distance + gamma + controls
    alpha = float(controls[bank_index])
    running = 0.5 * alpha ** 2 - params.q * alpha * d_i + 0.5 * params.eps * d_i ** 2
    return float(
        _time_term(coeffs, t, d_i, x_bar, sample)
        + np.dot(drift, gradient)
        + 2.0 * np.dot(x, hessian)
        + running
    )


def hjb_residual_mfg(t: float, x: float, m: float, coeffs: Coefficients) -> float:
    """Return the HJB operator of the representative bank applied to the ansatz.

    The mean path moves with dm = (gamma - psi) dt.
    """
    _require(coeffs, MODE_MEAN_FIELD, isinstance(coeffs, StationaryCoefficients))
    if x < 0.0 or m < 0.0:
        raise ValidationError("reserves must be >= 0")
    params = coeffs.params
    sample = _sample(coeffs, t)
    gamma = _growth_at(params, coeffs, t)
    distance = m - x
    alpha = (params.q + sample.eta) * distance - sample.psi
    gradient_x = -(sample.eta * distance + sample.L)
    gradient_m = sample.eta * distance + sample.L + sample.phi
    running = (
        0.5 * alpha ** 2
        - params.q * alpha * distance
        + 0.5 * params.eps * distance ** 2
    )
    return float(
        _time_term(coeffs, t, distance, m, sample)
        + (params.a * distance + gamma + alpha) * gradient_x
        + 2.0 * x * sample.eta
        + (gamma - sample.psi) * gradient_m
        + running
    )


def residual_tolerance(t: float, state: Sequence[float], coeffs: Coefficients) -> float:
    """Return the HJB residual tolerance at (t, state).

    One-sided differences within one grid step of either end get the looser
    boundary tolerance.
    """
    scale = 1.0 + float(np.sum(np.square(np.asarray(state, dtype=float))))
    if isinstance(coeffs, CoefficientPath):
        grid = coeffs.grid
        if t <= grid[1] or t >= grid[-2]:
            return HJB_TOL_BOUNDARY * scale
    return HJB_TOL_INTERIOR * scale


def mfg_limit_gap(
    params: ModelParams,
    t: float,
    x_i: float,
    x_ref: float,
    grid: Optional[np.ndarray] = None,
) -> float:
    """Return |mfg_control - nash_control_finite| for the given bank count."""
    finite = solve_finite_horizon(params, grid)
    mean_field = solve_mfg(params, grid)
    return abs(
        mfg_control(ControlQuery(t=t, x_i=x_i, x_ref=x_ref, coeffs=mean_field))
        - nash_control_finite(ControlQuery(t=t, x_i=x_i, x_ref=x_ref, coeffs=finite))
    )
