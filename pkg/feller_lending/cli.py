"""Provide the command line interface."""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from dotenv import find_dotenv, load_dotenv

from . import __version__
from .coeffs import (
    CoefficientPath,
    GrowthRate,
    ModelParams,
    StationaryCoefficients,
    integral_cross_checks,
    mean_path,
    solve_coefficients,
    solve_infinite_horizon,
    time_grid,
)
from .const import (
    BOUNDARY_TOL,
    ETA_TOL,
    EXIT_OK,
    HJB_TOL_BOUNDARY,
    HJB_TOL_INTERIOR,
    KIND_EQUILIBRIUM,
    KIND_MFG,
    KIND_TOTAL_RESERVE,
    MFG_L_TOL,
    MODE_MEAN_FIELD,
    RECORD_FULL,
    SCHEME_EXACT,
    STATIONARY_RESIDUAL_TOL,
    TERMINAL_TOL,
    VARIANT_DISAGREEMENT_TOL,
)
from .ensemble_io import save_ensemble
from .equilibrium import check_admissibility
from .errors import FellerError, ValidationError
from .figures import TrajectorySettings, replicate_figures
from .report import render_items, render_manifest
from .risk import (
    build_risk_report,
    default_statistics,
    min_incentive_discounted,
    min_incentive_finite,
    stability_report,
    tail_bounds,
)
from .scenario import FORMAT_BINARY, FORMAT_CSV, Scenario, dump_scenario, load_scenario
from .sde import (
    DriftTable,
    PathEnsemble,
    simulate_equilibrium,
    simulate_mfg_representative,
    simulate_total_reserve,
    simulate_uncontrolled,
)
from .settings import Settings, get_settings
from .util import atomic_output_dir, write_csv

ENV_FILE = find_dotenv(usecwd=True)
if ENV_FILE:
    load_dotenv(ENV_FILE)

logger = logging.getLogger(__name__)

Coefficients = Union[CoefficientPath, StationaryCoefficients]
Items = List[Tuple[str, Any]]

TOLERANCES: Items = [
    ("eta_closed_form_vs_rk4", ETA_TOL),
    ("terminal", TERMINAL_TOL),
    ("mfg_l_quadrature", MFG_L_TOL),
    ("stationary_riccati_residual", STATIONARY_RESIDUAL_TOL),
    ("hjb_interior", HJB_TOL_INTERIOR),
    ("hjb_boundary", HJB_TOL_BOUNDARY),
    ("tail_variant_disagreement", VARIANT_DISAGREEMENT_TOL),
    ("regime_boundary", BOUNDARY_TOL),
]


class Run:
    """Hold the resolved inputs of one command."""

    def __init__(self, options: argparse.Namespace, settings: Settings) -> None:
        """Set up the run from parsed options."""
        self.options = options
        self.settings = settings
        self.scenario: Optional[Scenario] = (
            load_scenario(options.scenario) if options.scenario else None
        )
        self.workers: int = options.workers or settings.workers
        self.diagnostics: Items = []

    @property
    def loaded(self) -> Scenario:
        """Return the scenario, which the command requires."""
        if self.scenario is None:
            raise ValidationError("this command needs --scenario")
        return self.scenario

    @property
    def out_dir(self) -> Path:
        """Return the output directory."""
        if self.options.out:
            return Path(self.options.out)
        if self.scenario is not None:
            return Path(self.scenario.outputs.directory)
        return Path(self.settings.out_dir)

    def grid(self, params: ModelParams) -> np.ndarray:
        """Return the coefficient grid of the scenario."""
        steps = self.loaded.horizon.steps_per_unit or self.settings.steps_per_unit
        return time_grid(params.T, steps)

    def coefficients(self, params: ModelParams, record: bool = True) -> Coefficients:
        """Return the solved coefficients of the scenario's game."""
        scenario = self.loaded
        if scenario.infinite:
            return solve_infinite_horizon(params, scenario.mode)
        coeffs = solve_coefficients(
            params, scenario.mode, self.grid(params), self.settings.eta_tolerance
        )
        if not record:
            return coeffs
        self.diagnostics.append(("eta_check_error", coeffs.eta_check_error))
        if coeffs.l_check_error is not None:
            self.diagnostics.append(("mfg_l_check_error", coeffs.l_check_error))
        return coeffs


def _write(run: Run, command: str, writer: Callable[[Path], List[str]]) -> None:
    """Run writer in a staging directory and add the scenario echo and manifest."""
    with atomic_output_dir(run.out_dir) as staging:
        files = writer(staging)
        parameters: Items = []
        if run.scenario is not None:
            (staging / "scenario.ini").write_text(
                dump_scenario(run.scenario), encoding="utf-8"
            )
            parameters = [
                ("{}.{}".format(section, key), value)
                for section in ("model", "horizon")
                for key, value in getattr(run.scenario, section).dict().items()
                if value is not None
            ]
        (staging / "manifest.txt").write_text(
            render_manifest(command, parameters, TOLERANCES, run.diagnostics, files),
            encoding="utf-8",
        )


def cmd_solve(run: Run) -> None:
    """Write the coefficient tables of the scenario."""
    params = run.loaded.params()
    coeffs = run.coefficients(params)

    def writer(out: Path) -> List[str]:
        write_csv(out / "coefficients.csv", coeffs.as_columns())
        files = ["coefficients.csv"]
        if isinstance(coeffs, CoefficientPath):
            write_csv(out / "eta.csv", {"t": coeffs.grid, "eta": coeffs.eta})
            write_csv(out / "psi.csv", {"t": coeffs.grid, "psi": coeffs.psi})
            files += ["eta.csv", "psi.csv"]
            for key, gap in integral_cross_checks(coeffs).items():
                run.diagnostics.append(("integral_gap_" + key, gap))
            if coeffs.mode == MODE_MEAN_FIELD:
                if check_admissibility(params, coeffs).cond_growth:
                    m0 = run.loaded.initial_condition().mean_value()
                    mean = mean_path(params, coeffs, m0)
                    write_csv(out / "mean_path.csv", {"t": mean.grid, "m": mean.m})
                    files.append("mean_path.csv")
                else:
                    logger.warning("gamma < psi somewhere; mean path skipped")
        return files

    _write(run, "solve", writer)


def simulate_scenario(
    run: Run, params: ModelParams
) -> Tuple[PathEnsemble, Optional[Coefficients]]:
    """Return the ensemble of the scenario's simulation kind and its coefficients."""
    scenario = run.loaded
    if scenario.infinite:
        raise ValidationError("simulation needs a finite horizon")
    kind = scenario.simulation.kind
    sim = scenario.sim_config(
        run.options.seed, run.options.paths, run.workers, run.settings.block_size
    )
    initial = scenario.initial_condition()
    if kind == KIND_EQUILIBRIUM:
        coeffs = run.coefficients(params)
        assert isinstance(coeffs, CoefficientPath)
        ensemble = simulate_equilibrium(
            params, coeffs, sim, initial, run.options.allow_inadmissible
        )
        return ensemble, coeffs
    if kind == KIND_MFG:
        coeffs = run.coefficients(params)
        assert isinstance(coeffs, CoefficientPath)
        mean = mean_path(params, coeffs, initial.mean_value())
        return simulate_mfg_representative(params, coeffs, mean, sim, initial), coeffs
    if kind == KIND_TOTAL_RESERVE:
        coeffs = run.coefficients(params)
        assert isinstance(coeffs, CoefficientPath)
        steps = sim.time_axis(params.T)[:-1]
        drift = DriftTable.from_coefficients(
            params, coeffs, piecewise_constant=sim.scheme == SCHEME_EXACT, times=steps
        )
        y0 = scenario.risk.y0 or params.n_banks * initial.mean_value()
        return simulate_total_reserve(y0, drift, sim), coeffs
    return simulate_uncontrolled(params, sim, initial), None


def _ensemble_files(run: Run, ensemble: PathEnsemble, out: Path) -> List[str]:
    files = []
    formats = run.loaded.outputs.formats
    if FORMAT_CSV in formats:
        save_ensemble(ensemble, out / "paths.csv")
        files.append("paths.csv")
        if ensemble.config.record == RECORD_FULL:
            for bank in range(ensemble.n_banks):
                name = "bank_{}.csv".format(bank)
                columns: Dict[str, np.ndarray] = {"t": ensemble.times}
                for path in range(ensemble.n_paths):
                    columns["path_{}".format(path)] = ensemble.values[path, :, bank]
                write_csv(out / name, columns)
                files.append(name)
    if FORMAT_BINARY in formats:
        save_ensemble(ensemble, out / "paths.bin")
        files.append("paths.bin")
    return files


def cmd_simulate(run: Run) -> None:
    """Write the simulated paths and their summary."""
    params = run.loaded.params()
    ensemble, _ = simulate_scenario(run, params)
    run.diagnostics.append(("truncation_rate", ensemble.truncation_rate))
    run.diagnostics.append(("truncation_flag", ensemble.truncation_flag))

    def writer(out: Path) -> List[str]:
        files = _ensemble_files(run, ensemble, out)
        terminal = ensemble.terminal_totals
        spread = float(terminal.var(ddof=1)) if terminal.size > 1 else 0.0
        stats = default_statistics(ensemble)
        summary: Items = [
            ("kind", ensemble.kind),
            ("paths", ensemble.n_paths),
            ("seed", ensemble.config.seed),
            ("mean_total_reserve_T", float(terminal.mean())),
            ("mean_total_reserve_T_stderr", float(np.sqrt(spread / terminal.size))),
            ("var_total_reserve_T", spread),
            ("all_default_frequency", stats.all_default_frequency),
            ("per_bank_default_frequency", stats.per_bank_frequency),
            ("truncation_rate", ensemble.truncation_rate),
            ("truncation_flag", ensemble.truncation_flag),
        ]
        (out / "summary.txt").write_text(
            render_items("simulation summary", summary), encoding="utf-8"
        )
        return files + ["summary.txt"]

    _write(run, "simulate", writer)


def cmd_risk(run: Run) -> None:
    """Write the risk report of the scenario."""
    scenario = run.loaded
    params = scenario.params()
    ensemble: Optional[PathEnsemble] = None
    if scenario.infinite:
        coeffs: Optional[Coefficients] = run.coefficients(params)
    else:
        ensemble, coeffs = simulate_scenario(run, params)
    y0 = scenario.risk.y0 or params.n_banks * scenario.initial_condition().mean_value()
    report = build_risk_report(params, coeffs, ensemble, y0)

    def writer(out: Path) -> List[str]:
        (out / "risk_report.txt").write_text(
            render_items("risk report", report.items()), encoding="utf-8"
        )
        files = ["risk_report.txt"]
        if report.defaults is not None:
            stats = report.defaults
            write_csv(
                out / "default_frequencies.csv",
                {
                    "bank": np.arange(stats.per_bank_frequency.size),
                    "frequency": stats.per_bank_frequency,
                    "stderr": stats.per_bank_stderr,
                },
            )
            write_csv(
                out / "tau_histogram.csv",
                {"tau": stats.tau_values, "count": stats.tau_counts},
            )
            files += ["default_frequencies.csv", "tau_histogram.csv"]
        return files

    _write(run, "risk", writer)


def _override(parameter: str, value: float) -> Dict[str, Any]:
    if parameter == "gamma":
        return {"gamma": GrowthRate.constant(value)}
    if parameter == "r":
        return {"discount": value}
    if parameter == "n_banks":
        return {"n_banks": int(round(value))}
    return {parameter: value}


def sweep_row(run: Run, overrides: Dict[str, Any]) -> Dict[str, float]:
    """Return the stability and admissibility measures of one sweep cell."""
    scenario = run.loaded
    row = dict.fromkeys(
        (
            "valid",
            "margin",
            "strictly_stable",
            "weakly_stable",
            "cond_growth",
            "cond_bankcount",
            "psi_max",
            "tail_lower",
            "tail_upper",
            "q_low_finite",
            "q_low_discounted",
        ),
        float("nan"),
    )
    try:
        params = scenario.params(**overrides)
        coeffs = run.coefficients(params, record=False)
    except FellerError as err:
        logger.info("sweep cell %s skipped: %s", overrides, err)
        row["valid"] = 0.0
        return row
    stability = stability_report(params, coeffs)
    admissible = check_admissibility(params, coeffs)
    row.update(
        valid=1.0,
        margin=stability.margin,
        strictly_stable=float(stability.strictly_stable),
        weakly_stable=float(stability.weakly_stable),
        cond_growth=float(admissible.cond_growth),
        cond_bankcount=float(admissible.cond_bankcount),
        psi_max=float(np.max(coeffs.psi)),
    )
    if isinstance(coeffs, CoefficientPath) and scenario.risk.y0 is not None:
        bounds = tail_bounds(params, coeffs, scenario.risk.y0)
        row.update(tail_lower=bounds.lower, tail_upper=bounds.upper)
    if params.gamma.is_constant and params.gamma.level > 0.0 and params.eps > 0.0:
        row["q_low_finite"] = min_incentive_finite(params.gamma.level, params.eps).q_low
        if params.discount is not None:
            row["q_low_discounted"] = min_incentive_discounted(
                params.gamma.level, params.eps, params.discount
            )
    return row


def cmd_sweep(run: Run) -> None:
    """Write the stability frontier over one or two parameter grids."""
    sweep = run.loaded.sweep
    if sweep is None:
        raise ValidationError("the scenario has no [sweep] section")
    names = [sweep.parameter]
    cells: List[List[float]] = [[value] for value in sweep.values]
    if sweep.parameter2 is not None and sweep.values2 is not None:
        names.append(sweep.parameter2)
        cells = [[v1, v2] for v1 in sweep.values for v2 in sweep.values2]
    columns: Dict[str, List[float]] = {name: [] for name in names}
    for cell in cells:
        overrides: Dict[str, Any] = {}
        for name, value in zip(names, cell):
            columns[name].append(value)
            overrides.update(_override(name, value))
        for key, value in sweep_row(run, overrides).items():
            columns.setdefault(key, []).append(value)

    def writer(out: Path) -> List[str]:
        write_csv(
            out / "sweep.csv", {key: np.array(col) for key, col in columns.items()}
        )
        return ["sweep.csv"]

    _write(run, "sweep", writer)


def cmd_replicate_figures(run: Run) -> None:
    """Write the four figure bundles."""
    seed = run.options.seed if run.options.seed is not None else 0
    trajectories = TrajectorySettings(seed=seed, workers=run.workers)
    if run.options.paths is not None:
        trajectories = TrajectorySettings(
            seed=seed, workers=run.workers, absorption_paths=run.options.paths
        )

    def writer(out: Path) -> List[str]:
        replicate_figures(out, trajectories, run.settings.steps_per_unit)
        return sorted(path.name for path in out.iterdir())

    _write(run, "replicate-figures", writer)


COMMANDS: Dict[str, Callable[[Run], None]] = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "risk": cmd_risk,
    "sweep": cmd_sweep,
    "replicate-figures": cmd_replicate_figures,
}


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser."""
    parser = argparse.ArgumentParser(
        prog="feller-lending",
        description="Solve, simulate and assess the interbank lending game.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "command", choices=sorted(COMMANDS), help="The command to run."
    )
    parser.add_argument(
        "--scenario", type=str, default=None, help="The scenario INI file."
    )
    parser.add_argument("--out", type=str, default=None, help="The output directory.")
    parser.add_argument(
        "--seed", type=int, default=None, help="Override the scenario seed."
    )
    parser.add_argument(
        "--paths", type=int, default=None, help="Override the number of paths."
    )
    parser.add_argument(
        "--allow-inadmissible",
        action="store_true",
        help="Simulate equilibria where the growth rate falls below the deposit rate.",
    )
    parser.add_argument(
        "--workers", type=int, default=None, help="Worker threads for path blocks."
    )
    parser.add_argument("--log-level", type=str, default=None, help="The log level.")
    return parser


def main(args: Optional[List[str]] = None) -> int:
    """Run the command line interface and return the exit code."""
    options = build_parser().parse_args(args)
    settings = get_settings()
    logging.basicConfig(
        level=(options.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        run = Run(options, settings)
        COMMANDS[options.command](run)
    except FellerError as err:
        logger.error("%s", err)
        return err.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
