"""Provide pytest fixtures."""
import pytest

from feller_lending.coeffs import (
    GrowthRate,
    ModelParams,
    solve_finite_horizon,
    solve_infinite_horizon,
    solve_mfg,
    time_grid,
)
from feller_lending.const import MODE_MEAN_FIELD
from feller_lending.settings import get_settings

from . import FIG3, SCENARIO_TEXT, STATIONARY


@pytest.fixture(name="fig3_params")
def fig3_params_fixture():
    """Return the reference finite-horizon parameters with gamma = 1."""
    return ModelParams(horizon=1.0, gamma=GrowthRate.constant(1.0), **FIG3)


@pytest.fixture(name="fig3_path")
def fig3_path_fixture(fig3_params):
    """Return the finite-player coefficients of the reference parameters."""
    return solve_finite_horizon(fig3_params, time_grid(1.0, 10_000))


@pytest.fixture(name="fig3_mfg")
def fig3_mfg_fixture(fig3_params):
    """Return the mean-field coefficients of the reference parameters."""
    return solve_mfg(fig3_params, time_grid(1.0, 10_000))


@pytest.fixture(name="stationary_params")
def stationary_params_fixture():
    """Return the discounted game parameters with gamma = 1."""
    return ModelParams(gamma=GrowthRate.constant(1.0), **STATIONARY)


@pytest.fixture(name="stationary")
def stationary_fixture(stationary_params):
    """Return the finite-player stationary coefficients."""
    return solve_infinite_horizon(stationary_params)


@pytest.fixture(name="stationary_mfg")
def stationary_mfg_fixture(stationary_params):
    """Return the mean-field stationary coefficients."""
    return solve_infinite_horizon(stationary_params, MODE_MEAN_FIELD)


@pytest.fixture(name="scenario_file")
def scenario_file_fixture(tmp_path):
    """Write the reference scenario and return its path."""
    path = tmp_path / "scenario.ini"
    path.write_text(SCENARIO_TEXT, encoding="utf-8")
    return path


@pytest.fixture(name="settings", autouse=True)
def settings_fixture(monkeypatch):
    """Provide default process settings to every test."""
    for name in ("WORKERS", "STEPS_PER_UNIT", "BLOCK_SIZE", "OUT_DIR", "LOG_LEVEL"):
        monkeypatch.delenv("FELLER_" + name, raising=False)
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()
