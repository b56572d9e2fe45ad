"""Solve the coefficient systems of the interbank lending game.

The value function of bank i is quadratic in the distance to the averaged
capitalization, V = eta/2 (xbar - x)^2 + L (xbar - x) + phi xbar + mu, and the
four coefficients solve a Riccati equation for eta plus three linear ODEs.
eta has a closed form; L, phi and mu are integrated backward with RK4.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .const import (
    BOUNDARY_TOL,
    COL_ETA,
    COL_L,
    COL_MU,
    COL_PHI,
    COL_PSI,
    COL_T,
    ETA_TOL,
    MFG_L_TOL,
    MODE_FINITE,
    MODE_MEAN_FIELD,
    MODES,
    STATIONARY_RESIDUAL_TOL,
    STEPS_PER_UNIT,
)
from .errors import AdmissibilityError, CrossCheckError, ValidationError

logger = logging.getLogger(__name__)

FloatOrArray = Union[float, np.ndarray]


@dataclass(frozen=True)
class GrowthRate:
    """Represent a deterministic growth rate, piecewise linear between knots.

    Outside the knot range the first and last values are held.
    """

    times: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self) -> None:
        """Validate the knot table."""
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.times or len(self.times) != len(self.values):
            raise ValidationError(
                "growth rate needs matching, nonempty knot times and values"
            )
        if any(t1 <= t0 for t0, t1 in zip(self.times, self.times[1:])):
            raise ValidationError("growth rate knot times must be strictly increasing")
        if any(not math.isfinite(v) or v < 0.0 for v in self.values):
            raise ValidationError("growth rate must be finite and nonnegative")

    @classmethod
    def constant(cls, value: float) -> "GrowthRate":
        """Return a one-knot growth rate."""
        return cls(times=(0.0,), values=(value,))

    @property
    def is_constant(self) -> bool:
        """Return True if every knot carries the same value."""
        return len(set(self.values)) == 1

    @property
    def level(self) -> float:
        """Return the value of a constant growth rate."""
        if not self.is_constant:
            raise ValidationError("growth rate is not constant")
        return self.values[0]

    def __call__(self, t: FloatOrArray) -> FloatOrArray:
        """Evaluate the growth rate at time(s) t."""
        result = np.interp(t, self.times, self.values)
        if np.ndim(result) == 0:
            return float(result)
        return result


@dataclass(frozen=True)
class ModelParams:
    """Represent the game and market constants.

    Exactly one of ``horizon`` (finite horizon T) and ``discount`` (rate r of
    the infinite-horizon game) is set.
    """

    a: float
    q: float
    eps: float
    n_banks: int
    gamma: GrowthRate = field(default_factory=lambda: GrowthRate.constant(0.0))
    c: float = 0.0
    horizon: Optional[float] = None
    discount: Optional[float] = None

    def __post_init__(self) -> None:
        """Validate the parameters."""
        for name in ("a", "q", "eps", "c"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValidationError(
                    "{} must be finite and >= 0, got {}".format(name, value)
                )
        if int(self.n_banks) != self.n_banks or self.n_banks < 2:
            raise ValidationError(
                "n_banks must be an integer >= 2, got {}".format(self.n_banks)
            )
        object.__setattr__(self, "n_banks", int(self.n_banks))
        if self.q * self.q > self.eps * (1.0 + 1e-12) + 1e-15:
            raise ValidationError(
                "convexity condition q^2 <= eps violated: "
                "q^2={:.6g} > eps={:.6g}".format(self.q * self.q, self.eps)
            )
        if (self.horizon is None) == (self.discount is None):
            raise ValidationError("set exactly one of horizon (T) and discount (r)")
        if self.horizon is not None and not self.horizon > 0.0:
            raise ValidationError("horizon must be > 0, got {}".format(self.horizon))
        if self.discount is not None and not self.discount > 0.0:
            raise ValidationError(
                "discount rate must be > 0, got {}".format(self.discount)
            )

    @property
    def eps_net(self) -> float:
        """Return eps - q^2, the forcing of the Riccati equation."""
        return max(self.eps - self.q * self.q, 0.0)

    @property
    def T(self) -> float:  # pylint: disable=invalid-name
        """Return the finite horizon."""
        if self.horizon is None:
            raise ValidationError("parameters describe an infinite-horizon game")
        return self.horizon

    @property
    def r(self) -> float:  # pylint: disable=invalid-name
        """Return the discount rate."""
        if self.discount is None:
            raise ValidationError("parameters describe a finite-horizon game")
        return self.discount


class ModeConstants(NamedTuple):
    """Hold the N-dependent factors of the coefficient equations."""

    inv_n: float  # 1/N, or 0 in the mean-field limit
    beta: float  # 1 - 1/N
    kappa: float  # 1 - 1/N^2
    coupling: float  # (1/N)(1 - 1/N)
    forcing: float  # 2(1 - 2/N)
    quadratic: float  # (1/N)(1 - 1/(2N))


def mode_constants(params: ModelParams, mode: str) -> ModeConstants:
    """Return the N-dependent factors for the given mode."""
    if mode not in MODES:
        raise ValidationError(
            "unknown mode {!r}, expected one of {}".format(mode, MODES)
        )
    inv_n = 1.0 / params.n_banks if mode == MODE_FINITE else 0.0
    beta = 1.0 - inv_n
    return ModeConstants(
        inv_n=inv_n,
        beta=beta,
        kappa=1.0 - inv_n * inv_n,
        coupling=inv_n * beta,
        forcing=2.0 * (1.0 - 2.0 * inv_n),
        quadratic=inv_n * (1.0 - inv_n / 2.0),
    )


@dataclass(frozen=True)
class RiccatiConstants:
    """Represent the roots of the Riccati characteristic polynomial."""

    delta_plus: float
    delta_minus: float
    R: float  # pylint: disable=invalid-name

    @property
    def sqrt_r(self) -> float:
        """Return sqrt(R)."""
        return math.sqrt(self.R)


def riccati_constants(params: ModelParams, mode: str = MODE_FINITE) -> RiccatiConstants:
    """Return delta+- = -(a+q) +- sqrt(R)."""
    consts = mode_constants(params, mode)
    rate = params.a + params.q
    r_value = rate * rate + consts.kappa * params.eps_net
    if not r_value > 0.0:
        raise ValidationError(
            "Riccati discriminant R must be > 0; a + q = 0 and eps = q^2 give R = 0"
        )
    root = math.sqrt(r_value)
    return RiccatiConstants(
        delta_plus=-rate + root, delta_minus=-rate - root, R=r_value
    )


def eta_closed_form(
    params: ModelParams, t: FloatOrArray, mode: str = MODE_FINITE
) -> FloatOrArray:
    """Return eta at time(s) t from the explicit Riccati solution."""
    horizon = params.T
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -BOUNDARY_TOL * horizon) or np.any(
        t_arr > horizon * (1.0 + BOUNDARY_TOL)
    ):
        raise ValidationError("t must lie in [0, {}]".format(horizon))
    consts = mode_constants(params, mode)
    rc = riccati_constants(params, mode)
    decay = np.exp(-2.0 * rc.sqrt_r * np.clip(horizon - t_arr, 0.0, None))
    numerator = -params.eps_net * (1.0 - decay) - params.c * (
        rc.delta_plus - rc.delta_minus * decay
    )
    denominator = (rc.delta_minus - rc.delta_plus * decay) - params.c * consts.kappa * (
        1.0 - decay
    )
    if np.any(denominator >= 0.0):
        raise CrossCheckError(
            "closed-form eta denominator is not negative",
            achieved=float(np.max(denominator)),
        )
    eta = numerator / denominator
    if eta.ndim == 0:
        return float(eta)
    return eta


def stationary_eta_limit(params: ModelParams, mode: str = MODE_FINITE) -> float:
    """Return the long-horizon limit (eps - q^2) / ((a + q) + sqrt(R)) of eta."""
    rc = riccati_constants(params, mode)
    return params.eps_net / ((params.a + params.q) + rc.sqrt_r)


class CoefficientSample(NamedTuple):
    """Hold the coefficients at one time."""

    eta: float
    L: float
    phi: float
    mu: float
    psi: float


def _frozen(values: Sequence[float]) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CoefficientPath:  # pylint: disable=too-many-instance-attributes
    """Represent the time-gridded coefficients of a finite-horizon solve."""

    grid: np.ndarray
    eta: np.ndarray
    L: np.ndarray  # pylint: disable=invalid-name
    phi: np.ndarray
    mu: np.ndarray
    psi: np.ndarray
    mode: str
    params: ModelParams
    eta_check_error: float = 0.0
    l_check_error: Optional[float] = None

    def __post_init__(self) -> None:
        """Freeze the arrays."""
        for name in ("grid", "eta", "L", "phi", "mu", "psi"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def horizon(self) -> float:
        """Return the last grid time."""
        return float(self.grid[-1])

    def sample(self, t: float) -> CoefficientSample:
        """Return the coefficients at t, linearly interpolated."""
        if t < self.grid[0] - BOUNDARY_TOL or t > self.grid[-1] + BOUNDARY_TOL:
            raise ValidationError(
                "t={} outside the coefficient grid [{}, {}]".format(
                    t, self.grid[0], self.grid[-1]
                )
            )
        return CoefficientSample(
            *(
                float(np.interp(t, self.grid, arr))
                for arr in (self.eta, self.L, self.phi, self.mu, self.psi)
            )
        )

    def as_columns(self) -> Dict[str, np.ndarray]:
        """Return the table columns keyed by column name."""
        return {
            COL_T: self.grid,
            COL_ETA: self.eta,
            COL_L: self.L,
            COL_PHI: self.phi,
            COL_MU: self.mu,
            COL_PSI: self.psi,
        }


@dataclass(frozen=True)
class StationaryCoefficients:
    """Represent the coefficients of the infinite-horizon discounted game."""

    eta: float
    L: float  # pylint: disable=invalid-name
    phi: float
    mu: float
    psi: float
    mode: str
    params: ModelParams
    residual: float = 0.0

    def as_columns(self) -> Dict[str, np.ndarray]:
        """Return a single-row table keyed by column name."""
        return {
            COL_ETA: np.array([self.eta]),
            COL_L: np.array([self.L]),
            COL_PHI: np.array([self.phi]),
            COL_MU: np.array([self.mu]),
            COL_PSI: np.array([self.psi]),
        }


@dataclass(frozen=True)
class MeanPath:
    """Represent the deterministic mean capitalization m_t of the mean-field game."""

    grid: np.ndarray
    m: np.ndarray

    def __post_init__(self) -> None:
        """Freeze the arrays."""
        object.__setattr__(self, "grid", _frozen(self.grid))
        object.__setattr__(self, "m", _frozen(self.m))

    def at(self, t: FloatOrArray) -> FloatOrArray:
        """Return m at time(s) t."""
        result = np.interp(t, self.grid, self.m)
        if np.ndim(result) == 0:
            return float(result)
        return result


def time_grid(horizon: float, steps_per_unit: int = STEPS_PER_UNIT) -> np.ndarray:
    """Return a uniform grid on [0, horizon]."""
    if not horizon > 0.0:
        raise ValidationError("horizon must be > 0, got {}".format(horizon))
    steps = max(1, int(math.ceil(horizon * steps_per_unit - 1e-9)))
    return np.linspace(0.0, horizon, steps + 1)


def _checked_grid(params: ModelParams, grid: Optional[np.ndarray]) -> np.ndarray:
    horizon = params.T
    if grid is None:
        return time_grid(horizon)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValidationError("time grid must be one-dimensional with >= 2 points")
    if np.any(np.diff(grid) <= 0.0):
        raise ValidationError("time grid must be strictly increasing")
    tol = BOUNDARY_TOL * max(1.0, horizon)
    if abs(grid[0]) > tol or abs(grid[-1] - horizon) > tol:
        raise ValidationError(
            "time grid [{}, {}] does not cover [0, {}]".format(
                grid[0], grid[-1], horizon
            )
        )
    return grid


def _rk4_eta(
    grid: np.ndarray, params: ModelParams, consts: ModeConstants
) -> np.ndarray:
    """Integrate the Riccati equation backward from eta_T = c."""
    rate2 = 2.0 * (params.a + params.q)
    kappa = consts.kappa
    forcing = params.eps_net

    def rhs(eta: float) -> float:
        return rate2 * eta + kappa * eta * eta - forcing

    times = grid.tolist()
    out = [0.0] * len(times)
    eta = params.c
    out[-1] = eta
    for k in range(len(times) - 2, -1, -1):
        h = times[k + 1] - times[k]
        k1 = rhs(eta)
        k2 = rhs(eta - 0.5 * h * k1)
        k3 = rhs(eta - 0.5 * h * k2)
        k4 = rhs(eta - h * k3)
        eta -= h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k] = eta
    return np.array(out)


def _rk4_linear(  # pylint: disable=too-many-locals
    grid: np.ndarray,
    params: ModelParams,
    consts: ModeConstants,
    eta_nodes: np.ndarray,
    eta_mid: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate the L, phi and mu equations backward from zero terminal values."""
    rate = params.a + params.q
    coupling, forcing, beta = consts.coupling, consts.forcing, consts.beta
    beta2 = beta * beta
    quadratic = consts.quadratic
    mid_times = 0.5 * (grid[1:] + grid[:-1])
    gam_nodes = np.broadcast_to(params.gamma(grid), grid.shape).tolist()
    gam_mid = np.broadcast_to(params.gamma(mid_times), mid_times.shape).tolist()
    eta_n = eta_nodes.tolist()
    eta_m = eta_mid.tolist()

    def rhs(
        lam: float, phi: float, eta: float, gam: float
    ) -> Tuple[float, float, float]:
        d_lam = (rate + coupling * eta) * lam + coupling * eta * phi + forcing * eta
        d_phi = -2.0 * beta * eta
        d_mu = (
            quadratic * phi * phi
            - 0.5 * beta2 * lam * lam
            - beta2 * lam * phi
            - gam * phi
        )
        return d_lam, d_phi, d_mu

    times = grid.tolist()
    n = len(times)
    lam_out, phi_out, mu_out = [0.0] * n, [0.0] * n, [0.0] * n
    lam = phi = mu = 0.0
    for k in range(n - 2, -1, -1):
        h = times[k + 1] - times[k]
        half = 0.5 * h
        a1, b1, c1 = rhs(lam, phi, eta_n[k + 1], gam_nodes[k + 1])
        a2, b2, c2 = rhs(lam - half * a1, phi - half * b1, eta_m[k], gam_mid[k])
        a3, b3, c3 = rhs(lam - half * a2, phi - half * b2, eta_m[k], gam_mid[k])
        a4, b4, c4 = rhs(lam - h * a3, phi - h * b3, eta_n[k], gam_nodes[k])
        sixth = h / 6.0
        lam -= sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        phi -= sixth * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        mu -= sixth * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        lam_out[k], phi_out[k], mu_out[k] = lam, phi, mu
    return np.array(lam_out), np.array(phi_out), np.array(mu_out)


def mfg_l_quadrature(
    grid: np.ndarray, rate: float, eta_nodes: np.ndarray, eta_mid: np.ndarray
) -> np.ndarray:
    """Return L^m_t = -2 int_t^T exp(rate (t - s)) eta_s ds on the grid.

    Each cell is integrated with Simpson's rule and the tail is carried back
    through the exponential factor.
    """
    times = grid.tolist()
    eta_n = eta_nodes.tolist()
    eta_m = eta_mid.tolist()
    out = [0.0] * len(times)
    tail = 0.0
    for k in range(len(times) - 2, -1, -1):
        h = times[k + 1] - times[k]
        damp_half = math.exp(-0.5 * rate * h)
        damp = damp_half * damp_half
        local = h / 6.0 * (eta_n[k] + 4.0 * damp_half * eta_m[k] + damp * eta_n[k + 1])
        tail = local + damp * tail
        out[k] = -2.0 * tail
    return np.array(out)


def _solve_on_grid(
    params: ModelParams, grid: Optional[np.ndarray], mode: str, eta_tolerance: float
) -> CoefficientPath:
    grid = _checked_grid(params, grid)
    consts = mode_constants(params, mode)
    eta = np.asarray(eta_closed_form(params, grid, mode), dtype=float)
    eta_mid = np.asarray(
        eta_closed_form(params, 0.5 * (grid[1:] + grid[:-1]), mode), dtype=float
    )
    eta_rk4 = _rk4_eta(grid, params, consts)
    eta_error = float(np.max(np.abs(eta_rk4 - eta)))
    logger.debug("%s eta RK4 vs closed form: %.3e", mode, eta_error)
    if eta_error > eta_tolerance:
        raise CrossCheckError(
            "RK4 eta disagrees with the closed form; refine the time grid",
            achieved=eta_error,
            tolerance=eta_tolerance,
        )
    lam, phi, mu = _rk4_linear(grid, params, consts, eta, eta_mid)
    l_error = None
    if mode == MODE_MEAN_FIELD:
        lam_quad = mfg_l_quadrature(grid, params.a + params.q, eta, eta_mid)
        l_error = float(np.max(np.abs(lam_quad - lam)))
        logger.debug("mean-field L quadrature vs RK4: %.3e", l_error)
        if l_error > MFG_L_TOL:
            raise CrossCheckError(
                "mean-field L quadrature disagrees with the ODE solution",
                achieved=l_error,
                tolerance=MFG_L_TOL,
            )
    psi = (consts.inv_n - 1.0) * lam + consts.inv_n * phi
    return CoefficientPath(
        grid=grid,
        eta=eta,
        L=lam,
        phi=phi,
        mu=mu,
        psi=psi,
        mode=mode,
        params=params,
        eta_check_error=eta_error,
        l_check_error=l_error,
    )


def solve_finite_horizon(
    params: ModelParams,
    grid: Optional[np.ndarray] = None,
    eta_tolerance: float = ETA_TOL,
) -> CoefficientPath:
    """Return the finite-player equilibrium coefficients on the grid."""
    return _solve_on_grid(params, grid, MODE_FINITE, eta_tolerance)


def solve_mfg(
    params: ModelParams,
    grid: Optional[np.ndarray] = None,
    eta_tolerance: float = ETA_TOL,
) -> CoefficientPath:
    """Return the mean-field equilibrium coefficients on the grid."""
    return _solve_on_grid(params, grid, MODE_MEAN_FIELD, eta_tolerance)


def solve_coefficients(
    params: ModelParams,
    mode: str = MODE_FINITE,
    grid: Optional[np.ndarray] = None,
    eta_tolerance: float = ETA_TOL,
) -> CoefficientPath:
    """Return the coefficients in either mode."""
    return _solve_on_grid(params, grid, mode, eta_tolerance)


def stationary_eta(params: ModelParams, mode: str = MODE_FINITE) -> float:
    """Return the nonnegative root of the discounted algebraic Riccati equation."""
    consts = mode_constants(params, mode)
    shift = params.a + params.q + 0.5 * params.r
    forcing = params.eps_net
    return forcing / (shift + math.sqrt(shift * shift + consts.kappa * forcing))


def solve_infinite_horizon(
    params: ModelParams, mode: str = MODE_FINITE
) -> StationaryCoefficients:
    """Return the coefficients of the infinite-horizon discounted game.

    The growth rate must be constant.
    """
    r = params.r
    if not params.gamma.is_constant:
        raise ValidationError("the infinite-horizon game needs a constant growth rate")
    gamma = params.gamma.level
    consts = mode_constants(params, mode)
    rate = params.a + params.q
    eta = stationary_eta(params, mode)
    residual = -r * eta - (
        2.0 * rate * eta + consts.kappa * eta * eta - params.eps_net
    )
    tolerance = STATIONARY_RESIDUAL_TOL * (1.0 + params.eps_net)
    if abs(residual) > tolerance:
        raise CrossCheckError(
            "stationary eta fails the algebraic Riccati equation",
            achieved=abs(residual),
            tolerance=tolerance,
        )
    beta = consts.beta
    phi = 2.0 * beta * eta / r
    lam = -(consts.coupling * eta * phi + consts.forcing * eta) / (
        rate + r + consts.coupling * eta
    )
    mu = (
        0.5 * beta * beta * lam * lam
        + beta * beta * lam * phi
        + gamma * phi
        - consts.quadratic * phi * phi
    ) / r
    psi = (consts.inv_n - 1.0) * lam + consts.inv_n * phi
    return StationaryCoefficients(
        eta=eta,
        L=lam,
        phi=phi,
        mu=mu,
        psi=psi,
        mode=mode,
        params=params,
        residual=residual,
    )


def psi_stationary_closed_form(params: ModelParams, mode: str = MODE_FINITE) -> float:
    """Return the stationary deposit rate with phi eliminated."""
    consts = mode_constants(params, mode)
    r = params.r
    eta = stationary_eta(params, mode)
    beta = consts.beta
    rate = params.a + params.q
    drain = (
        beta
        * eta
        * (2.0 * consts.coupling * beta * eta / r + consts.forcing)
        / (rate + r + consts.coupling * eta)
    )
    return drain + 2.0 * consts.inv_n * beta * eta / r


def integral_cross_checks(path: CoefficientPath) -> Dict[str, float]:
    """Return the largest gaps between the ODE solution and the integral forms.

    L is rebuilt from its variation-of-constants representation, phi from
    2 beta int_t^T eta and mu from minus the integral of its right-hand side.
    All integrals use the trapezoidal rule, so the gaps are O(h^2).
    """
    params = path.params
    consts = mode_constants(params, path.mode)
    grid = path.grid
    eta, phi, lam = path.eta, path.phi, path.L

    def tail(values: np.ndarray) -> np.ndarray:
        running = cumulative_trapezoid(values, grid, initial=0.0)
        return running[-1] - running

    phi_int = 2.0 * consts.beta * tail(eta)

    rate = params.a + params.q + consts.coupling * eta
    forcing = consts.coupling * eta * phi + consts.forcing * eta
    h = np.diff(grid)
    damp = np.exp(-0.5 * h * (rate[:-1] + rate[1:]))
    local = 0.5 * h * (forcing[:-1] + damp * forcing[1:])
    lam_int = np.zeros_like(grid)
    carried = 0.0
    for k in range(grid.size - 2, -1, -1):
        carried = local[k] + damp[k] * carried
        lam_int[k] = -carried

    beta2 = consts.beta * consts.beta
    gam = np.broadcast_to(params.gamma(grid), grid.shape)
    mu_rhs = (
        consts.quadratic * phi * phi
        - 0.5 * beta2 * lam * lam
        - beta2 * lam * phi
        - gam * phi
    )
    mu_int = -tail(mu_rhs)
    gaps = {
        COL_L: float(np.max(np.abs(lam_int - lam))),
        COL_PHI: float(np.max(np.abs(phi_int - phi))),
        COL_MU: float(np.max(np.abs(mu_int - path.mu))),
    }
    logger.debug("integral cross-check gaps: %s", gaps)
    return gaps


def mean_path(params: ModelParams, coeffs: CoefficientPath, m0: float) -> MeanPath:
    """Return m_t = m0 + int_0^t (gamma_s - psi_s) ds on the coefficient grid.

    Raise AdmissibilityError at the first grid time with gamma < psi.
    """
    if coeffs.mode != MODE_MEAN_FIELD:
        raise ValidationError("mean path needs mean-field coefficients")
    if not m0 >= 0.0:
        raise ValidationError("m0 must be >= 0, got {}".format(m0))
    drift = np.broadcast_to(params.gamma(coeffs.grid), coeffs.grid.shape) - coeffs.psi
    violations = np.flatnonzero(drift < -BOUNDARY_TOL)
    if violations.size:
        raise AdmissibilityError(
            "growth rate below the deposit rate", float(coeffs.grid[violations[0]])
        )
    m = m0 + cumulative_trapezoid(drift, coeffs.grid, initial=0.0)
    return MeanPath(grid=coeffs.grid, m=m)
