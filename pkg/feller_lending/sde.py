"""Simulate the reserve processes of the banking system.

Every reserve follows dX = drift dt + 2 sqrt(X) dW. Coupled systems use the
full-truncation Euler scheme; the one-dimensional total reserve can also be
sampled exactly as a squared-Bessel process.

Path ``i`` draws from ``default_rng(SeedSequence(seed, spawn_key=(i,)))``:
its initial reserves first, then its noise in time order, bank by bank. Paths
are simulated in blocks of ``SimConfig.block_size``, and results depend on
neither the block size nor the number of workers.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.random import Generator, SeedSequence, default_rng
from scipy.special import gammaincinv
from scipy.stats import linregress, poisson

from .coeffs import CoefficientPath, MeanPath, ModelParams, mode_constants
from .const import (
    BLOCK_SIZE,
    DIFFUSION_SCALE,
    INITIAL_FIXED,
    INITIAL_GAMMA,
    INITIAL_POINT,
    KIND_EQUILIBRIUM,
    KIND_MFG,
    KIND_TOTAL_RESERVE,
    KIND_UNCONTROLLED,
    MODE_FINITE,
    MODE_MEAN_FIELD,
    RECORD_FULL,
    RECORDS,
    SCHEME_EULER,
    SCHEME_EXACT,
    SCHEMES,
    TRUNCATION_WARN_RATE,
)
from .equilibrium import check_admissibility
from .errors import AdmissibilityError, ValidationError
from .special import besq_bridge_survival

logger = logging.getLogger(__name__)

# Upper bound on random draws held in memory per block.
NOISE_CHUNK = 1 << 20
SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class SimConfig:  # pylint: disable=too-many-instance-attributes
    """Represent the Monte Carlo settings of a run."""

    dt: float
    n_paths: int
    seed: int
    scheme: str = SCHEME_EULER
    record: str = RECORD_FULL
    record_stride: int = 1
    block_size: int = BLOCK_SIZE
    workers: int = 1
    horizon: Optional[float] = None

    def __post_init__(self) -> None:
        """Validate the settings."""
        if not self.dt > 0.0:
            raise ValidationError("dt must be > 0, got {}".format(self.dt))
        if self.n_paths < 1:
            raise ValidationError("n_paths must be >= 1, got {}".format(self.n_paths))
        if not 0 <= self.seed < SEED_LIMIT:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.scheme not in SCHEMES:
            raise ValidationError("unknown scheme {!r}".format(self.scheme))
        if self.record not in RECORDS:
            raise ValidationError("unknown record mode {!r}".format(self.record))
        for name in ("record_stride", "block_size", "workers"):
            if getattr(self, name) < 1:
                raise ValidationError("{} must be >= 1".format(name))
        if self.horizon is not None and not self.horizon > 0.0:
            raise ValidationError("horizon must be > 0, got {}".format(self.horizon))

    def steps(self, horizon: float) -> int:
        """Return the number of steps; dt must divide the horizon."""
        n_steps = int(round(horizon / self.dt))
        if n_steps < 1 or abs(n_steps * self.dt - horizon) > 1e-9 * max(1.0, horizon):
            raise ValidationError(
                "dt={} does not divide the horizon {}".format(self.dt, horizon)
            )
        return n_steps

    def time_axis(self, horizon: float) -> np.ndarray:
        """Return the simulation grid on [0, horizon]."""
        return np.linspace(0.0, horizon, self.steps(horizon) + 1)

    def path_rng(self, path_index: int) -> Generator:
        """Return the generator of one path."""
        return default_rng(SeedSequence(self.seed, spawn_key=(path_index,)))

    def block_rngs(self, start: int, count: int) -> List[Generator]:
        """Return the generators of paths start, ..., start + count - 1."""
        return [self.path_rng(start + offset) for offset in range(count)]


@dataclass(frozen=True)
class InitialCondition:
    """Represent how initial reserves are chosen.

    ``point`` gives every bank the same value, ``fixed`` a per-bank vector
    and ``gamma`` i.i.d. gamma draws with the given shape and scale.
    """

    kind: str = INITIAL_POINT
    values: Tuple[float, ...] = (1.0,)
    shape: float = 1.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        """Validate the initial law."""
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind not in (INITIAL_POINT, INITIAL_FIXED, INITIAL_GAMMA):
            raise ValidationError("unknown initial condition {!r}".format(self.kind))
        if any(not math.isfinite(v) or v < 0.0 for v in self.values):
            raise ValidationError("initial reserves must be finite and >= 0")
        if self.kind == INITIAL_POINT and len(self.values) != 1:
            raise ValidationError("a point initial condition takes one value")
        if self.kind == INITIAL_GAMMA and not (self.shape > 0.0 and self.scale > 0.0):
            raise ValidationError("gamma initial law needs shape > 0 and scale > 0")

    @classmethod
    def point(cls, value: float) -> "InitialCondition":
        """Return a point mass at value."""
        return cls(kind=INITIAL_POINT, values=(value,))

    @classmethod
    def fixed(cls, values: Tuple[float, ...]) -> "InitialCondition":
        """Return a fixed per-bank vector."""
        return cls(kind=INITIAL_FIXED, values=tuple(values))

    @classmethod
    def gamma(cls, shape: float, scale: float) -> "InitialCondition":
        """Return an i.i.d. gamma law."""
        return cls(kind=INITIAL_GAMMA, values=(), shape=shape, scale=scale)

    def sample(self, rng: Generator, n_paths: int, n_banks: int) -> np.ndarray:
        """Return initial reserves of shape (paths, banks)."""
        if self.kind == INITIAL_GAMMA:
            return rng.gamma(self.shape, self.scale, size=(n_paths, n_banks))
        if self.kind == INITIAL_FIXED:
            if len(self.values) != n_banks:
                raise ValidationError(
                    "fixed initial vector has {} entries for {} banks".format(
                        len(self.values), n_banks
                    )
                )
            return np.tile(np.array(self.values), (n_paths, 1))
        return np.full((n_paths, n_banks), self.values[0])

    def sample_paths(self, rngs: Sequence[Generator], n_banks: int) -> np.ndarray:
        """Return initial reserves with row i drawn from rngs[i]."""
        if self.kind != INITIAL_GAMMA:
            return self.sample(rngs[0], len(rngs), n_banks)
        return np.stack([self.sample(rng, 1, n_banks)[0] for rng in rngs])

    def mean_value(self) -> float:
        """Return the expected initial reserve of one bank."""
        if self.kind == INITIAL_GAMMA:
            return self.shape * self.scale
        return float(np.mean(self.values))


@dataclass(frozen=True)
class DriftTable:
    """Represent a tabulated drift of the total reserve.

    A piecewise-constant table holds each value until the next knot.
    """

    times: Tuple[float, ...]
    values: Tuple[float, ...]
    piecewise_constant: bool = False

    def __post_init__(self) -> None:
        """Validate the table."""
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.times or len(self.times) != len(self.values):
            raise ValidationError("drift table needs matching knot times and values")
        if any(t1 <= t0 for t0, t1 in zip(self.times, self.times[1:])):
            raise ValidationError("drift knot times must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "DriftTable":
        """Return a constant drift."""
        return cls(times=(0.0,), values=(value,), piecewise_constant=True)

    @classmethod
    def from_coefficients(
        cls,
        params: ModelParams,
        coeffs: CoefficientPath,
        piecewise_constant: bool = False,
        times: Optional[np.ndarray] = None,
    ) -> "DriftTable":
        """Return N (gamma_t - psi_t) tabulated on times.

        The times default to the coefficient grid.
        """
        grid = coeffs.grid if times is None else np.asarray(times, dtype=float)
        psi = np.interp(grid, coeffs.grid, coeffs.psi)
        gamma = np.broadcast_to(params.gamma(grid), grid.shape)
        values = params.n_banks * (gamma - psi)
        return cls(
            times=tuple(grid.tolist()),
            values=tuple(values.tolist()),
            piecewise_constant=piecewise_constant,
        )

    def __call__(self, t: np.ndarray) -> np.ndarray:
        """Evaluate the drift at times t."""
        t = np.asarray(t, dtype=float)
        if self.piecewise_constant:
            index = np.searchsorted(self.times, t, side="right") - 1
            return np.asarray(self.values)[np.clip(index, 0, len(self.values) - 1)]
        return np.interp(t, self.times, self.values)

    def check_steps(self, times: np.ndarray) -> None:
        """Raise ValidationError unless the drift is constant over every step."""
        if not self.piecewise_constant:
            raise ValidationError("the exact scheme needs a piecewise-constant drift")
        inner = np.asarray(self.times[1:])
        inner = inner[(inner > times[0]) & (inner < times[-1])]
        if inner.size:
            nearest = times[np.clip(np.searchsorted(times, inner), 0, times.size - 1)]
            lower = times[np.clip(np.searchsorted(times, inner) - 1, 0, times.size - 1)]
            gap = np.minimum(np.abs(nearest - inner), np.abs(lower - inner))
            if np.max(gap) > 1e-9 * max(1.0, times[-1]):
                raise ValidationError("drift knots must fall on simulation grid times")


@dataclass(frozen=True)
class PathEnsemble:  # pylint: disable=too-many-instance-attributes
    """Represent simulated paths with their zero-hitting events.

    ``values`` has shape (paths, recorded times, banks). Hit times are the
    first grid times a bank's reserve is 0, NaN if it never is; the system
    hit time is the first grid time every reserve is 0.
    """

    times: np.ndarray
    values: np.ndarray
    hit_times: np.ndarray
    system_hit_times: np.ndarray
    truncation_rate: float
    kind: str
    config: SimConfig
    horizon: float
    truncation_flag: bool = field(default=False)

    @property
    def n_paths(self) -> int:
        """Return the number of paths."""
        return int(self.values.shape[0])

    @property
    def n_banks(self) -> int:
        """Return the number of banks per path."""
        return int(self.values.shape[2])

    @property
    def totals(self) -> np.ndarray:
        """Return the total reserve of shape (paths, recorded times)."""
        return self.values.sum(axis=2)

    @property
    def terminal_totals(self) -> np.ndarray:
        """Return the total reserve at the horizon."""
        return self.values[:, -1, :].sum(axis=1)


def step_full_truncation(
    x: np.ndarray, drift: np.ndarray, dt: float, gaussian: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Return the truncated next state and the mask of truncated entries.

    ``drift`` must already be evaluated at the positive part of ``x``.
    """
    positive = np.maximum(x, 0.0)
    proposal = (
        positive + drift * dt + DIFFUSION_SCALE * np.sqrt(positive * dt) * gaussian
    )
    truncated = proposal < 0.0
    return np.where(truncated, 0.0, proposal), truncated


def exact_besq_step(
    y: Union[float, np.ndarray], dimension: float, dt: float, rng: Generator
) -> Union[float, np.ndarray]:
    """Return a draw of the squared-Bessel transition over dt from y."""
    y_arr = np.asarray(y, dtype=float)
    uniforms = rng.random((2,) + y_arr.shape)
    result = besq_transition(y_arr, dimension, dt, uniforms[0], uniforms[1])
    if np.ndim(result) == 0:
        return float(result)
    return result


def besq_transition(
    y: np.ndarray,
    dimension: float,
    dt: float,
    poisson_uniform: np.ndarray,
    gamma_uniform: np.ndarray,
) -> np.ndarray:
    """Return the squared-Bessel transition by inversion of two uniforms.

    The law over dt from y is dt times a noncentral chi-square with
    ``dimension`` degrees of freedom and noncentrality y / dt, sampled as
    2 dt Gamma(dimension / 2 + K) with K ~ Poisson(y / (2 dt)).
    """
    if dimension < 0.0:
        raise ValidationError(
            "squared-Bessel dimension must be >= 0, got {}".format(dimension)
        )
    y_arr = np.asarray(y, dtype=float)
    rate = y_arr.ravel() / (2.0 * dt)
    first = np.clip(np.ravel(poisson_uniform), np.finfo(float).tiny, None)
    second = np.ravel(gamma_uniform)
    live = rate > 0.0
    jumps = np.zeros(rate.size)
    jumps[live] = poisson.ppf(first[live], rate[live])
    shape = 0.5 * dimension + jumps
    result = np.zeros(rate.size)
    moving = shape > 0.0
    result[moving] = 2.0 * dt * gammaincinv(shape[moving], second[moving])
    return result.reshape(y_arr.shape)


def record_indices(n_steps: int, config: SimConfig) -> np.ndarray:
    """Return the step indices kept in the ensemble."""
    if config.record == RECORD_FULL:
        kept = set(range(0, n_steps + 1, config.record_stride))
        kept.add(n_steps)
        return np.array(sorted(kept))
    return np.array([0, n_steps])


@dataclass(frozen=True)
class _Plan:  # pylint: disable=too-many-instance-attributes
    """Hold the per-step drift of a linear mean-reverting system.

    The drift is rate_k (target - x) + shift_k, with target the
    cross-sectional mean when ``target`` is None.
    """

    times: np.ndarray
    rate: np.ndarray
    shift: np.ndarray
    target: Optional[np.ndarray]
    n_banks: int
    initial: InitialCondition
    config: SimConfig
    recorded: np.ndarray


class _Block(NamedTuple):
    values: np.ndarray
    hits: np.ndarray
    system_hits: np.ndarray
    truncations: int


def _first_hits(
    hits: np.ndarray, system_hits: np.ndarray, x: np.ndarray, t: float
) -> None:
    zero = x == 0.0
    hits[zero & np.isnan(hits)] = t
    system_hits[np.all(zero, axis=1) & np.isnan(system_hits)] = t


def _euler_block(plan: _Plan, start: int, n_block: int) -> _Block:
    config = plan.config
    rngs = config.block_rngs(start, n_block)
    x = plan.initial.sample_paths(rngs, plan.n_banks)
    n_steps = plan.rate.size
    hits = np.full((n_block, plan.n_banks), np.nan)
    system_hits = np.full(n_block, np.nan)
    _first_hits(hits, system_hits, x, 0.0)
    out = np.empty((n_block, plan.recorded.size, plan.n_banks))
    slot = 0
    if plan.recorded[0] == 0:
        out[:, 0, :] = x
        slot = 1
    truncations = 0
    chunk = max(1, NOISE_CHUNK // (n_block * plan.n_banks))
    step = 0
    while step < n_steps:
        count = min(chunk, n_steps - step)
        noise = np.stack(
            [rng.standard_normal((count, plan.n_banks)) for rng in rngs], axis=1
        )
        for j in range(count):
            k = step + j
            if plan.target is None:
                target = x.mean(axis=1, keepdims=True)
            else:
                target = plan.target[k]
            drift = plan.rate[k] * (target - x) + plan.shift[k]
            x, truncated = step_full_truncation(x, drift, config.dt, noise[j])
            truncations += int(np.count_nonzero(truncated))
            _first_hits(hits, system_hits, x, float(plan.times[k + 1]))
            if slot < plan.recorded.size and plan.recorded[slot] == k + 1:
                out[:, slot, :] = x
                slot += 1
        step += count
    return _Block(out, hits, system_hits, truncations)


def _exact_block(plan: _Plan, start: int, n_block: int) -> _Block:
    config = plan.config
    rngs = config.block_rngs(start, n_block)
    y = plan.initial.sample_paths(rngs, 1)[:, 0]
    n_steps = plan.shift.size
    hits = np.full((n_block, 1), np.nan)
    system_hits = np.full(n_block, np.nan)
    hits[y == 0.0, 0] = 0.0
    out = np.empty((n_block, plan.recorded.size, 1))
    slot = 0
    if plan.recorded[0] == 0:
        out[:, 0, 0] = y
        slot = 1
    # Each step takes three uniforms per path: Poisson, gamma, bridge.
    chunk = max(1, NOISE_CHUNK // (3 * n_block))
    step = 0
    while step < n_steps:
        count = min(chunk, n_steps - step)
        uniforms = np.stack([rng.random((count, 3)) for rng in rngs], axis=1)
        for j in range(count):
            k = step + j
            dimension = float(plan.shift[k])
            draw = uniforms[j]
            y_next = besq_transition(y, dimension, config.dt, draw[:, 0], draw[:, 1])
            survival = besq_bridge_survival(y, y_next, dimension, config.dt)
            touched = draw[:, 2] >= survival
            hits[touched & np.isnan(hits[:, 0]), 0] = plan.times[k + 1]
            y = y_next
            if slot < plan.recorded.size and plan.recorded[slot] == k + 1:
                out[:, slot, 0] = y
                slot += 1
        step += count
    system_hits[:] = hits[:, 0]
    return _Block(out, hits, system_hits, 0)


def _run(plan: _Plan, kind: str, horizon: float) -> PathEnsemble:
    config = plan.config
    worker = _exact_block if config.scheme == SCHEME_EXACT else _euler_block
    starts = list(range(0, config.n_paths, config.block_size))
    sizes = [min(config.block_size, config.n_paths - s) for s in starts]
    values = np.empty((config.n_paths, plan.recorded.size, plan.n_banks))
    hits = np.empty((config.n_paths, plan.n_banks))
    system_hits = np.empty(config.n_paths)
    truncations: List[int] = [0] * len(starts)

    def run_block(index: int) -> None:
        block = worker(plan, starts[index], sizes[index])
        span = slice(starts[index], starts[index] + sizes[index])
        values[span] = block.values
        hits[span] = block.hits
        system_hits[span] = block.system_hits
        truncations[index] = block.truncations

    if config.workers == 1 or len(starts) == 1:
        for index in range(len(starts)):
            run_block(index)
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            list(executor.map(run_block, range(len(starts))))
    n_steps = plan.times.size - 1
    rate = sum(truncations) / float(n_steps * config.n_paths * plan.n_banks)
    flag = rate > TRUNCATION_WARN_RATE
    if flag:
        logger.warning(
            "truncation rate %.3g exceeds %.0f%% of steps; reduce dt",
            rate,
            100 * TRUNCATION_WARN_RATE,
        )
    logger.debug(
        "simulated %d %s paths over %d steps", config.n_paths, kind, n_steps
    )
    return PathEnsemble(
        times=plan.times[plan.recorded],
        values=values,
        hit_times=hits,
        system_hit_times=system_hits,
        truncation_rate=rate,
        kind=kind,
        config=config,
        horizon=horizon,
        truncation_flag=flag,
    )


def _coupled_only(sim: SimConfig) -> None:
    if sim.scheme == SCHEME_EXACT:
        raise ValidationError("the exact scheme only applies to the total reserve")


def simulate_uncontrolled(
    params: ModelParams, sim: SimConfig, initial: InitialCondition
) -> PathEnsemble:
    """Return paths of dX^i = (a (Xbar - X^i) + gamma_t) dt + 2 sqrt(X^i) dW^i."""
    _coupled_only(sim)
    horizon = sim.horizon or params.T
    times = sim.time_axis(horizon)
    left = times[:-1]
    plan = _Plan(
        times=times,
        rate=np.full(left.size, params.a),
        shift=np.broadcast_to(params.gamma(left), left.shape).astype(float),
        target=None,
        n_banks=params.n_banks,
        initial=initial,
        config=sim,
        recorded=record_indices(left.size, sim),
    )
    return _run(plan, KIND_UNCONTROLLED, horizon)


def simulate_equilibrium(
    params: ModelParams,
    coeffs: CoefficientPath,
    sim: SimConfig,
    initial: InitialCondition,
    allow_inadmissible: bool = False,
) -> PathEnsemble:
    """Return paths of the banks playing the finite-player equilibrium.

    Raise AdmissibilityError if gamma < psi somewhere, unless overridden.
    """
    _coupled_only(sim)
    if coeffs.mode != MODE_FINITE:
        raise ValidationError("equilibrium simulation needs finite-player coefficients")
    report = check_admissibility(params, coeffs)
    if not report.cond_growth:
        first = report.growth_first_violation
        if not allow_inadmissible:
            raise AdmissibilityError(
                "equilibrium is inadmissible (gamma < psi); pass the override to run",
                first if first is not None else 0.0,
            )
        logger.warning(
            "simulating an inadmissible equilibrium, first violation t=%s", first
        )
    horizon = coeffs.horizon
    times = sim.time_axis(horizon)
    left = times[:-1]
    consts = mode_constants(params, MODE_FINITE)
    eta = np.interp(left, coeffs.grid, coeffs.eta)
    psi = np.interp(left, coeffs.grid, coeffs.psi)
    plan = _Plan(
        times=times,
        rate=params.a + params.q + consts.beta * eta,
        shift=np.broadcast_to(params.gamma(left), left.shape) - psi,
        target=None,
        n_banks=params.n_banks,
        initial=initial,
        config=sim,
        recorded=record_indices(left.size, sim),
    )
    return _run(plan, KIND_EQUILIBRIUM, horizon)


def simulate_mfg_representative(
    params: ModelParams,
    coeffs: CoefficientPath,
    mean: MeanPath,
    sim: SimConfig,
    initial: InitialCondition,
) -> PathEnsemble:
    """Return independent representative banks driven by the mean path m_t.

    dX = ((a + q + eta_t)(m_t - X) + gamma_t - psi_t) dt + 2 sqrt(X) dW.
    """
    _coupled_only(sim)
    if coeffs.mode != MODE_MEAN_FIELD:
        raise ValidationError("representative simulation needs mean-field coefficients")
    horizon = coeffs.horizon
    times = sim.time_axis(horizon)
    left = times[:-1]
    eta = np.interp(left, coeffs.grid, coeffs.eta)
    psi = np.interp(left, coeffs.grid, coeffs.psi)
    plan = _Plan(
        times=times,
        rate=params.a + params.q + eta,
        shift=np.broadcast_to(params.gamma(left), left.shape) - psi,
        target=np.asarray(mean.at(left)).reshape(-1, 1, 1),
        n_banks=1,
        initial=initial,
        config=sim,
        recorded=record_indices(left.size, sim),
    )
    return _run(plan, KIND_MFG, horizon)


def simulate_total_reserve(
    y0: float, drift: DriftTable, sim: SimConfig
) -> PathEnsemble:
    """Return paths of dY = drift_t dt + 2 sqrt(Y) dW.

    The horizon is ``sim.horizon``, or the last drift knot.
    """
    if not y0 >= 0.0:
        raise ValidationError("y0 must be >= 0, got {}".format(y0))
    horizon = sim.horizon or drift.times[-1]
    if not horizon > 0.0:
        raise ValidationError("total reserve simulation needs a positive horizon")
    times = sim.time_axis(horizon)
    left = times[:-1]
    if sim.scheme == SCHEME_EXACT:
        drift.check_steps(times)
    shift = np.asarray(drift(left), dtype=float)
    if sim.scheme == SCHEME_EXACT and np.any(shift < 0.0):
        raise ValidationError("the exact scheme needs a nonnegative drift")
    plan = _Plan(
        times=times,
        rate=np.zeros(left.size),
        shift=shift,
        target=np.zeros((left.size, 1, 1)),
        n_banks=1,
        initial=InitialCondition.point(y0),
        config=sim,
        recorded=record_indices(left.size, sim),
    )
    return _run(plan, KIND_TOTAL_RESERVE, horizon)


@dataclass(frozen=True)
class FlockingStatistics:
    """Represent the cross-sectional spread of an ensemble over time.

    ``dispersion`` is the cross-sectional variance over the squared
    cross-sectional mean, NaN where the mean is 0.
    """

    times: np.ndarray
    variance: np.ndarray
    dispersion: np.ndarray
    window_mean: float
    slope: float
    slope_stderr: float

    def trending_up(self, z_value: float = 1.645) -> bool:
        """Return True if the dispersion slope is significantly positive."""
        return self.slope - z_value * self.slope_stderr > 0.0


def flocking_statistics(
    ensemble: PathEnsemble, window_start: Optional[float] = None
) -> FlockingStatistics:
    """Return the path-averaged cross-sectional spread and its trend.

    The variance of a Feller system scales with its level, so the trend is
    fitted to the dispersion. The average and the fit use the recorded times
    in [window_start, T], by default [T/2, T].
    """
    if ensemble.n_banks < 2:
        raise ValidationError("flocking needs at least two banks per path")
    spread = ensemble.values.var(axis=2)
    level = ensemble.values.mean(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(level > 0.0, spread / np.square(level), np.nan)
    variance = spread.mean(axis=0)
    counted = np.count_nonzero(np.isfinite(ratio), axis=0)
    dispersion = np.where(
        counted > 0, np.nansum(ratio, axis=0) / np.maximum(counted, 1), np.nan
    )
    start = ensemble.horizon / 2.0 if window_start is None else window_start
    window = (ensemble.times >= start) & np.isfinite(dispersion)
    if np.count_nonzero(window) < 3:
        raise ValidationError("the flocking window needs at least three recorded times")
    fit = linregress(ensemble.times[window], dispersion[window])
    return FlockingStatistics(
        times=ensemble.times,
        variance=variance,
        dispersion=dispersion,
        window_mean=float(variance[window].mean()),
        slope=float(fit.slope),
        slope_stderr=float(fit.stderr),
    )
