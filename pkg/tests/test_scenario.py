"""Test scenario loading and dumping."""
import pytest

from feller_lending.coeffs import GrowthRate
from feller_lending.const import INITIAL_GAMMA, MODE_FINITE, RECORD_FULL
from feller_lending.errors import ValidationError
from feller_lending.scenario import dump_scenario, load_scenario, parse_scenario

from . import SCENARIO_TEXT


def test_load_scenario(scenario_file):
    """Test the reference scenario."""
    scenario = load_scenario(scenario_file)
    params = scenario.params()

    assert scenario.mode == MODE_FINITE
    assert not scenario.infinite
    assert params.n_banks == 10
    assert params.T == 1.0
    assert params.gamma == GrowthRate.constant(1.0)
    assert scenario.outputs.formats == ["csv", "binary"]
    assert scenario.risk.y0 == 10.0


def test_sim_config(scenario_file):
    """Test the Monte Carlo settings and the command line overrides."""
    scenario = load_scenario(scenario_file)

    sim = scenario.sim_config()
    overridden = scenario.sim_config(seed=99, paths=5, workers=3)

    assert (sim.dt, sim.n_paths, sim.seed) == (0.01, 40, 7)
    assert sim.record == RECORD_FULL
    assert sim.block_size == 16
    assert sim.horizon == 1.0
    assert (overridden.seed, overridden.n_paths, overridden.workers) == (99, 5, 3)


def test_block_size_fallback():
    """Test that a scenario without a block size takes the process setting."""
    scenario = parse_scenario(SCENARIO_TEXT.replace("block_size = 16\n", ""))

    assert scenario.simulation.block_size is None
    assert scenario.sim_config(block_size=64).block_size == 64


def test_infinite_horizon():
    """Test a discounted scenario."""
    text = SCENARIO_TEXT.replace("kind = finite\nT = 1\n", "kind = infinite\nr = 0.1\n")

    params = parse_scenario(text).params()

    assert params.discount == 0.1
    assert params.horizon is None


def test_growth_table():
    """Test a tabulated growth rate."""
    text = SCENARIO_TEXT.replace(
        "gamma = 1\n", "gamma_times = 0, 1\ngamma_values = 0.5, 2\n"
    )

    params = parse_scenario(text).params()

    assert params.gamma == GrowthRate(times=(0.0, 1.0), values=(0.5, 2.0))


def test_initial_gamma_law():
    """Test a gamma initial law."""
    text = SCENARIO_TEXT.replace(
        "kind = point\nvalue = 1\n", "kind = gamma\nshape = 2\nscale = 0.5\n"
    )

    initial = parse_scenario(text).initial_condition()

    assert initial.kind == INITIAL_GAMMA
    assert initial.mean_value() == 1.0


@pytest.mark.parametrize(
    "old, new",
    [
        ("c = 0\n", "c = 0\nfoo = 1\n"),  # unknown key
        ("[risk]", "[plots]\nstyle = x\n\n[risk]"),  # unknown section
        ("gamma = 1\n", "gamma = 1\ngamma_times = 0, 1\n"),  # two growth rates
        ("gamma = 1\n", "gamma_times = 0, 1\n"),  # knots without values
        ("T = 1\n", ""),  # finite horizon without T
        ("q = 1\n", "q = 2\n"),  # q^2 > eps
        ("n_banks = 10\n", "n_banks = 1\n"),
        ("paths = 40\n", "paths = 0\n"),
        ("record = full-paths\n", "record = everything\n"),
        ("[model]", "model"),  # not INI
    ],
)
def test_invalid_scenario(old, new):
    """Test that invalid scenarios are rejected."""
    with pytest.raises(ValidationError):
        parse_scenario(SCENARIO_TEXT.replace(old, new))


def test_fixed_initial_needs_values():
    """Test that a fixed initial law without values is rejected on use."""
    scenario = parse_scenario(SCENARIO_TEXT.replace("kind = point\n", "kind = fixed\n"))

    with pytest.raises(ValidationError):
        scenario.initial_condition()


def test_missing_scenario(tmp_path):
    """Test that a missing file is a validation error."""
    with pytest.raises(ValidationError):
        load_scenario(tmp_path / "missing.ini")


def test_dump_scenario(scenario_file):
    """Test that a dumped scenario loads back unchanged."""
    scenario = load_scenario(scenario_file)

    text = dump_scenario(scenario)

    assert parse_scenario(text) == scenario
    assert "[sweep]" not in text
