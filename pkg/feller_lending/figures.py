"""Produce the data bundles of the four reference figures.

Figures 1 and 2 show one realization of ten uncontrolled banks with a = 10
up to T = 100, next to a run with zero growth. Figures 3 and 4 show eta and
psi of the finite-player game for a = q = 1, eps = 2, c = 0, N = 10 with
T = 1 and T = 100.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np
from scipy.stats import linregress

from .coeffs import GrowthRate, ModelParams, solve_finite_horizon, time_grid
from .const import (
    COL_ETA,
    COL_PSI,
    COL_T,
    RECORD_FULL,
    RECORD_TERMINAL,
    SCHEME_EXACT,
    STEPS_PER_UNIT,
)
from .report import FigureDescription, Series, render_plot_description
from .sde import (
    DriftTable,
    InitialCondition,
    PathEnsemble,
    SimConfig,
    flocking_statistics,
    simulate_total_reserve,
    simulate_uncontrolled,
)
from .util import safe_name, write_csv

logger = logging.getLogger(__name__)

TRAJECTORY_BANKS = 10
TRAJECTORY_RATE = 10.0
TRAJECTORY_HORIZON = 100.0
TRAJECTORY_DT = 1e-4
TRAJECTORY_STRIDE = 100
INITIAL_RESERVE = 0.2
ABSORPTION_PATHS = 100
# The exact sampler needs no fine grid.
ABSORPTION_DT = 1e-2

COEFFICIENT_PARAMS = dict(a=1.0, q=1.0, eps=2.0, c=0.0, n_banks=10)


@dataclass(frozen=True)
class TrajectorySettings:
    """Represent the discretization of the trajectory figures."""

    horizon: float = TRAJECTORY_HORIZON
    dt: float = TRAJECTORY_DT
    stride: int = TRAJECTORY_STRIDE
    absorption_paths: int = ABSORPTION_PATHS
    absorption_dt: float = ABSORPTION_DT
    seed: int = 0
    workers: int = 1


def _uncontrolled(gamma: float, horizon: float) -> ModelParams:
    return ModelParams(
        a=TRAJECTORY_RATE,
        q=0.0,
        eps=0.0,
        n_banks=TRAJECTORY_BANKS,
        gamma=GrowthRate.constant(gamma),
        horizon=horizon,
    )


def trajectory_figure(
    name: str, gamma: float, out_dir: Path, settings: TrajectorySettings
) -> FigureDescription:
    """Write one realization at growth rate gamma and one with zero growth.

    The zero-growth run simulates ``settings.absorption_paths`` paths and
    plots the first. The checks carry the flocking statistics of the first
    run, the share of zero-growth paths whose total reserve is absorbed
    before the horizon, and the same share from the exact sampler.
    """
    initial = InitialCondition.point(INITIAL_RESERVE)
    series: List[Series] = []
    checks: List[Tuple[str, object]] = []
    for offset, rate in enumerate((gamma, 0.0)):
        sim = SimConfig(
            dt=settings.dt,
            n_paths=1 if rate > 0.0 else settings.absorption_paths,
            seed=settings.seed + offset,
            record=RECORD_FULL,
            record_stride=settings.stride,
            workers=settings.workers,
        )
        ensemble = simulate_uncontrolled(
            _uncontrolled(rate, settings.horizon), sim, initial
        )
        file_name = safe_name("{}_gamma_{}.csv".format(name, rate))
        columns = {COL_T: ensemble.times}
        for bank in range(TRAJECTORY_BANKS):
            columns["bank_{}".format(bank)] = ensemble.values[0, :, bank]
        columns["total"] = ensemble.totals[0]
        write_csv(out_dir / file_name, columns)
        series.extend(
            Series(
                label="X^{} (gamma={})".format(bank, rate),
                file=file_name,
                x=COL_T,
                y=key,
            )
            for bank, key in enumerate(list(columns)[1:-1])
        )
        if rate > 0.0:
            flock = flocking_statistics(ensemble)
            checks.extend(
                [
                    ("variance_window_mean", flock.window_mean),
                    ("dispersion_slope", flock.slope),
                    ("dispersion_slope_stderr", flock.slope_stderr),
                    ("dispersion_trending_up", flock.trending_up()),
                ]
            )
        else:
            checks.append(
                ("zero_growth_absorbed_fraction", ensemble_absorbed_fraction(ensemble))
            )
    checks.append(("zero_growth_absorbed_fraction_exact", absorbed_fraction(settings)))
    return FigureDescription(
        name=name,
        title="{} trajectories, a={}, gamma={} and gamma=0".format(
            TRAJECTORY_BANKS, TRAJECTORY_RATE, gamma
        ),
        x_label="t",
        y_label="reserve X^i_t",
        series=series,
        checks=checks,
    )


def ensemble_absorbed_fraction(ensemble: PathEnsemble) -> float:
    """Return the share of paths whose banks are all at zero at some step."""
    return float(np.mean(~np.isnan(ensemble.system_hit_times)))


def absorbed_fraction(settings: TrajectorySettings) -> float:
    """Return the share of zero-growth runs whose total reserve hits zero.

    Without growth the total reserve is a squared-Bessel process of dimension
    0, which is sampled exactly.
    """
    sim = SimConfig(
        dt=settings.absorption_dt,
        n_paths=settings.absorption_paths,
        seed=settings.seed + 2,
        scheme=SCHEME_EXACT,
        record=RECORD_TERMINAL,
        workers=settings.workers,
        horizon=settings.horizon,
    )
    ensemble = simulate_total_reserve(
        TRAJECTORY_BANKS * INITIAL_RESERVE, DriftTable.constant(0.0), sim
    )
    return ensemble_absorbed_fraction(ensemble)


def coefficient_figure(
    name: str, horizon: float, out_dir: Path, steps_per_unit: int = STEPS_PER_UNIT
) -> FigureDescription:
    """Write eta and psi of the finite-player game on [0, horizon].

    The checks carry the signs, psi at the horizon and the R^2 of a linear
    fit of psi on [0, T/2].
    """
    params = ModelParams(horizon=horizon, **COEFFICIENT_PARAMS)  # type: ignore
    path = solve_finite_horizon(params, time_grid(horizon, steps_per_unit))
    file_name = safe_name("{}_coefficients.csv".format(name))
    write_csv(
        out_dir / file_name, {COL_T: path.grid, COL_ETA: path.eta, COL_PSI: path.psi}
    )
    first_half = path.grid <= horizon / 2.0
    fit = linregress(path.grid[first_half], path.psi[first_half])
    return FigureDescription(
        name=name,
        title="eta_t and psi_t, a=1, q=1, eps=2, c=0, N=10, T={}".format(horizon),
        x_label="t",
        y_label="coefficient",
        series=[
            Series(label="eta_t", file=file_name, x=COL_T, y=COL_ETA),
            Series(label="psi_t", file=file_name, x=COL_T, y=COL_PSI),
        ],
        checks=[
            ("eta_min", float(path.eta.min())),
            ("psi_min", float(path.psi.min())),
            ("psi_at_horizon", float(path.psi[-1])),
            ("psi_linear_fit_r2", float(fit.rvalue ** 2)),
        ],
    )


def replicate_figures(
    out_dir: Path,
    trajectories: TrajectorySettings = TrajectorySettings(),
    steps_per_unit: int = STEPS_PER_UNIT,
) -> List[FigureDescription]:
    """Write the four figure bundles with their plot descriptions."""
    figures = [
        trajectory_figure("figure1", 0.2, out_dir, trajectories),
        trajectory_figure("figure2", 2.0, out_dir, trajectories),
        coefficient_figure("figure3", 1.0, out_dir, steps_per_unit),
        coefficient_figure("figure4", 100.0, out_dir, steps_per_unit),
    ]
    for figure in figures:
        (out_dir / "{}_plot.txt".format(figure.name)).write_text(
            render_plot_description(figure), encoding="utf-8"
        )
        logger.info("figure bundle %s ready", figure.name)
    return figures
