"""Test the reserve simulators."""
import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import ks_2samp

from feller_lending.coeffs import (
    GrowthRate,
    ModelParams,
    mean_path,
    solve_finite_horizon,
    solve_mfg,
    time_grid,
)
from feller_lending.const import (
    KIND_MFG,
    RECORD_FULL,
    RECORD_TERMINAL,
    SCHEME_EXACT,
    VARIANT_STANDARD,
)
from feller_lending.errors import AdmissibilityError, ValidationError
from feller_lending.risk import besq_zero_hit_survival
from feller_lending.sde import (
    DriftTable,
    InitialCondition,
    SimConfig,
    besq_transition,
    exact_besq_step,
    flocking_statistics,
    record_indices,
    simulate_equilibrium,
    simulate_mfg_representative,
    simulate_total_reserve,
    simulate_uncontrolled,
    step_full_truncation,
)

from . import FIG3, standard_errors


def terminal_config(dt, n_paths, seed, **kwargs):
    """Return a config that keeps only the initial and terminal states."""
    return SimConfig(
        dt=dt, n_paths=n_paths, seed=seed, record=RECORD_TERMINAL, **kwargs
    )


@pytest.mark.parametrize(
    "x, drift, z, expected, truncated",
    [
        (0.0, 0.0, 2.5, 0.0, False),  # zero stays zero
        (1.0, 0.0, 0.0, 1.0, False),
        (0.01, 5.0, -3.0, 0.0045, False),  # 0.01 + 5e-4 - 2 * 1e-3 * 3
        (0.01, 5.0, -10.0, 0.0, True),
    ],
)
def test_step_full_truncation(x, drift, z, expected, truncated):
    """Test single steps with known increments."""
    dt = 0.01 if x == 1.0 else 1e-4

    value, mask = step_full_truncation(
        np.array([x]), np.array([drift]), dt, np.array([z])
    )

    assert value[0] == pytest.approx(expected, abs=1e-15)
    assert mask[0] == truncated


def test_exact_step_at_zero():
    """Test that zero is absorbing in dimension 0."""
    assert exact_besq_step(0.0, 0.0, 0.1, np.random.default_rng(0)) == 0.0


def test_exact_step_negative_dimension():
    """Test that a negative dimension is rejected."""
    with pytest.raises(ValidationError):
        exact_besq_step(1.0, -0.5, 0.1, np.random.default_rng(0))


@pytest.mark.parametrize(
    "dimension, mean, variance",
    [
        (3.0, 2.5, 3.5),  # y + delta dt, 4 y dt + 2 delta dt^2
        (0.0, 1.0, 2.0),
    ],
)
def test_exact_step_moments(dimension, mean, variance):
    """Test the transition moments over 10^5 draws."""
    draws = exact_besq_step(
        np.ones(100_000), dimension, 0.5, np.random.default_rng(3)
    )
    mean_se, var_se = standard_errors(draws)

    assert abs(draws.mean() - mean) <= 3.0 * mean_se
    assert abs(draws.var(ddof=1) - variance) <= 3.0 * var_se
    assert np.all(draws >= 0.0)


def test_sim_config_validation():
    """Test that invalid settings are rejected."""
    with pytest.raises(ValidationError):
        SimConfig(dt=0.0, n_paths=1, seed=0)
    with pytest.raises(ValidationError):
        SimConfig(dt=0.1, n_paths=1, seed=-1)
    with pytest.raises(ValidationError):
        SimConfig(dt=0.1, n_paths=1, seed=0, scheme="milstein")
    with pytest.raises(ValidationError):
        SimConfig(dt=0.3, n_paths=1, seed=0).steps(1.0)


def test_record_indices():
    """Test strided recording keeps both ends."""
    sim = SimConfig(dt=0.1, n_paths=1, seed=0, record=RECORD_FULL, record_stride=4)

    np.testing.assert_array_equal(record_indices(10, sim), [0, 4, 8, 10])


def test_initial_conditions():
    """Test the initial laws."""
    rng = np.random.default_rng(1)

    assert InitialCondition.point(2.0).sample(rng, 3, 4).shape == (3, 4)
    np.testing.assert_array_equal(
        InitialCondition.fixed((1.0, 2.0)).sample(rng, 2, 2), [[1.0, 2.0], [1.0, 2.0]]
    )
    assert InitialCondition.gamma(2.0, 0.5).mean_value() == 1.0
    with pytest.raises(ValidationError):
        InitialCondition.fixed((1.0, 2.0)).sample(rng, 1, 3)
    with pytest.raises(ValidationError):
        InitialCondition.point(-1.0)


def test_zero_paths_stay_zero():
    """Test that zero growth from zero reserves gives identically zero paths."""
    params = ModelParams(a=1.0, q=0.0, eps=0.0, n_banks=5, horizon=1.0)
    sim = SimConfig(dt=0.01, n_paths=20, seed=1)

    ensemble = simulate_uncontrolled(params, sim, InitialCondition.point(0.0))

    np.testing.assert_array_equal(ensemble.values, 0.0)
    np.testing.assert_array_equal(ensemble.system_hit_times, 0.0)


def test_uncontrolled_mean():
    """Test E[Y_T] = N (X_0 + gamma T); mean reversion cancels in the sum."""
    params = ModelParams(
        a=1.0, q=0.0, eps=0.0, n_banks=2, horizon=1.0, gamma=GrowthRate.constant(2.0)
    )
    sim = terminal_config(1e-3, 10_000, 17)

    ensemble = simulate_uncontrolled(params, sim, InitialCondition.point(1.0))
    terminal = ensemble.terminal_totals
    mean_se, _ = standard_errors(terminal)

    assert abs(terminal.mean() - 6.0) <= 3.0 * mean_se
    assert np.all(ensemble.values >= 0.0)


def test_seed_determinism_across_workers():
    """Test bit-identical ensembles for any number of workers."""
    params = ModelParams(
        a=2.0, q=0.0, eps=0.0, n_banks=4, horizon=1.0, gamma=GrowthRate.constant(0.1)
    )
    runs = [
        simulate_uncontrolled(
            params,
            SimConfig(dt=0.01, n_paths=300, seed=99, block_size=64, workers=workers),
            InitialCondition.gamma(1.0, 0.3),
        )
        for workers in (1, 4)
    ]

    np.testing.assert_array_equal(runs[0].values, runs[1].values)
    np.testing.assert_array_equal(runs[0].hit_times, runs[1].hit_times)
    np.testing.assert_array_equal(runs[0].system_hit_times, runs[1].system_hit_times)


def test_paths_independent_of_block_size():
    """Test that path i has the same values for any block size."""
    params = ModelParams(
        a=2.0, q=0.0, eps=0.0, n_banks=4, horizon=1.0, gamma=GrowthRate.constant(0.1)
    )
    runs = [
        simulate_uncontrolled(
            params,
            SimConfig(dt=0.01, n_paths=20, seed=42, block_size=block_size),
            InitialCondition.gamma(1.0, 0.3),
        )
        for block_size in (7, 64)
    ]

    np.testing.assert_array_equal(runs[0].values, runs[1].values)
    np.testing.assert_array_equal(runs[0].hit_times, runs[1].hit_times)


def test_exact_paths_independent_of_block_size():
    """Test block-size invariance of the exact scheme, zero hits included."""
    runs = [
        simulate_total_reserve(
            0.5,
            DriftTable.constant(0.5),
            SimConfig(
                dt=0.01,
                n_paths=30,
                seed=42,
                scheme=SCHEME_EXACT,
                block_size=block_size,
                horizon=1.0,
            ),
        )
        for block_size in (7, 64)
    ]

    np.testing.assert_array_equal(runs[0].values, runs[1].values)
    np.testing.assert_array_equal(runs[0].hit_times, runs[1].hit_times)


def test_path_values_keep_their_index():
    """Test that adding paths leaves the earlier paths unchanged."""
    params = ModelParams(a=2.0, q=0.0, eps=0.0, n_banks=3, horizon=1.0)
    small, large = (
        simulate_uncontrolled(
            params,
            SimConfig(dt=0.01, n_paths=n_paths, seed=3, block_size=4),
            InitialCondition.point(1.0),
        )
        for n_paths in (5, 12)
    )

    np.testing.assert_array_equal(small.values, large.values[:5])


def test_besq_transition_without_jumps():
    """Test that no Poisson jump in dimension 0 lands exactly on zero."""
    # P(K = 0) = exp(-1 / (2 * 0.1)) > 1e-3
    value = besq_transition(
        np.array([1.0]), 0.0, 0.1, np.array([1e-3]), np.array([0.5])
    )

    assert value[0] == 0.0


def test_seeds_differ():
    """Test that different seeds give different paths."""
    params = ModelParams(a=2.0, q=0.0, eps=0.0, n_banks=4, horizon=1.0)
    first, second = (
        simulate_uncontrolled(
            params,
            SimConfig(dt=0.01, n_paths=5, seed=seed),
            InitialCondition.point(1.0),
        )
        for seed in (1, 2)
    )

    assert not np.array_equal(first.values, second.values)


def test_equilibrium_without_forcing_matches_uncontrolled():
    """Test that eta = psi = 0 reduces the equilibrium to a + q mean reversion."""
    gamma = GrowthRate.constant(1.0)
    params = ModelParams(a=1.0, q=1.0, eps=1.0, n_banks=5, horizon=1.0, gamma=gamma)
    shifted = ModelParams(a=2.0, q=0.0, eps=0.0, n_banks=5, horizon=1.0, gamma=gamma)
    coeffs = solve_finite_horizon(params, time_grid(1.0, 100))
    sim = SimConfig(dt=0.01, n_paths=50, seed=4)
    initial = InitialCondition.point(1.0)

    equilibrium = simulate_equilibrium(params, coeffs, sim, initial)
    uncontrolled = simulate_uncontrolled(shifted, sim, initial)

    np.testing.assert_array_equal(equilibrium.values, uncontrolled.values)


def test_equilibrium_mean(fig3_params, fig3_path):
    """Test E[Y_T] = Y_0 + N int (gamma - psi) for the reference equilibrium."""
    sim = terminal_config(1e-3, 10_000, 21)

    ensemble = simulate_equilibrium(
        fig3_params, fig3_path, sim, InitialCondition.point(1.0)
    )
    terminal = ensemble.terminal_totals
    mean_se, _ = standard_errors(terminal)
    expected = 10.0 + 10.0 * trapezoid(1.0 - fig3_path.psi, fig3_path.grid)

    assert abs(terminal.mean() - expected) <= 3.0 * mean_se


def test_dimension_reduction(fig3_params, fig3_path):
    """Test that the N-bank total and the one-dimensional reserve agree in law."""
    full = simulate_equilibrium(
        fig3_params,
        fig3_path,
        terminal_config(1e-3, 10_000, 31),
        InitialCondition.point(1.0),
    )
    sim = terminal_config(1e-3, 10_000, 32)
    drift = DriftTable.from_coefficients(fig3_params, fig3_path)
    total = simulate_total_reserve(10.0, drift, sim)

    full_mean_se, full_var_se = standard_errors(full.terminal_totals)
    total_mean_se, total_var_se = standard_errors(total.terminal_totals)
    mean_gap = abs(full.terminal_totals.mean() - total.terminal_totals.mean())
    var_gap = abs(full.terminal_totals.var(ddof=1) - total.terminal_totals.var(ddof=1))

    assert mean_gap <= 3.0 * np.hypot(full_mean_se, total_mean_se)
    assert var_gap <= 3.0 * np.hypot(full_var_se, total_var_se)


def test_inadmissible_equilibrium_needs_override(fig3_path):
    """Test that gamma < psi refuses to run unless overridden."""
    params = ModelParams(horizon=1.0, gamma=GrowthRate.constant(0.01), **FIG3)
    sim = SimConfig(dt=0.01, n_paths=4, seed=0)
    initial = InitialCondition.point(1.0)

    with pytest.raises(AdmissibilityError):
        simulate_equilibrium(params, fig3_path, sim, initial)
    ensemble = simulate_equilibrium(
        params, fig3_path, sim, initial, allow_inadmissible=True
    )

    assert np.all(ensemble.values >= 0.0)


def test_total_reserve_zero():
    """Test that zero drift from zero stays at zero."""
    sim = SimConfig(dt=0.1, n_paths=10, seed=0, horizon=1.0)

    ensemble = simulate_total_reserve(0.0, DriftTable.constant(0.0), sim)

    np.testing.assert_array_equal(ensemble.values, 0.0)


def test_total_reserve_mean():
    """Test E[Y_T] = y0 + drift T."""
    sim = terminal_config(1e-3, 10_000, 8, horizon=1.0)

    ensemble = simulate_total_reserve(1.0, DriftTable.constant(2.0), sim)
    mean_se, _ = standard_errors(ensemble.terminal_totals)

    assert abs(ensemble.terminal_totals.mean() - 3.0) <= 3.0 * mean_se


def test_weak_convergence():
    """Test that halving dt moves E[Y_T] by less than three standard errors."""
    estimates = []
    for dt, seed in ((1e-3, 41), (5e-4, 42)):
        sim = terminal_config(dt, 10_000, seed, horizon=1.0)
        ensemble = simulate_total_reserve(1.0, DriftTable.constant(1.0), sim)
        totals = ensemble.terminal_totals
        estimates.append((totals.mean(), standard_errors(totals)[0]))

    (coarse, coarse_se), (fine, fine_se) = estimates

    assert abs(coarse - fine) <= 3.0 * np.hypot(coarse_se, fine_se)


def test_exact_scheme_matches_euler():
    """Test the exact and Euler marginals of a dimension-3 reserve."""
    drift = DriftTable.constant(3.0)
    exact = simulate_total_reserve(
        1.0, drift, terminal_config(0.1, 10_000, 51, horizon=1.0, scheme=SCHEME_EXACT)
    )
    euler = simulate_total_reserve(
        1.0, drift, terminal_config(1e-4, 10_000, 52, horizon=1.0)
    )

    assert ks_2samp(exact.terminal_totals, euler.terminal_totals).pvalue > 0.01


@pytest.mark.parametrize("dimension", [0.0, 0.5])
def test_exact_scheme_first_passage(dimension):
    """Test the exact-scheme survival against the squared-Bessel law."""
    sim = terminal_config(0.01, 100_000, 61, horizon=1.0, scheme=SCHEME_EXACT)

    ensemble = simulate_total_reserve(1.0, DriftTable.constant(dimension), sim)
    survived = np.isnan(ensemble.system_hit_times)
    estimate = survived.mean()
    stderr = np.sqrt(estimate * (1.0 - estimate) / survived.size)

    expected = besq_zero_hit_survival(1.0, 1.0, dimension, VARIANT_STANDARD)
    assert abs(estimate - expected) <= 3.0 * stderr


def test_exact_scheme_needs_piecewise_constant_drift():
    """Test that an interpolated drift is rejected by the exact scheme."""
    drift = DriftTable(times=(0.0, 1.0), values=(1.0, 2.0))
    sim = SimConfig(dt=0.1, n_paths=2, seed=0, scheme=SCHEME_EXACT)

    with pytest.raises(ValidationError):
        simulate_total_reserve(1.0, drift, sim)


def test_exact_scheme_coupled_rejected(fig3_params):
    """Test that the exact scheme is refused for coupled banks."""
    sim = SimConfig(dt=0.1, n_paths=2, seed=0, scheme=SCHEME_EXACT)

    with pytest.raises(ValidationError):
        simulate_uncontrolled(fig3_params, sim, InitialCondition.point(1.0))


def test_mfg_representative(fig3_params, fig3_mfg):
    """Test that representative banks follow the mean path on average."""
    mean = mean_path(fig3_params, fig3_mfg, 1.0)
    sim = terminal_config(1e-3, 10_000, 71)

    ensemble = simulate_mfg_representative(
        fig3_params, fig3_mfg, mean, sim, InitialCondition.point(1.0)
    )
    terminal = ensemble.values[:, -1, 0]
    mean_se, _ = standard_errors(terminal)

    assert ensemble.kind == KIND_MFG
    assert abs(terminal.mean() - mean.at(1.0)) <= 3.0 * mean_se


def test_mfg_representative_needs_mean_field(fig3_params, fig3_path):
    """Test that finite-player coefficients are rejected."""
    mean = mean_path(fig3_params, solve_mfg(fig3_params, time_grid(1.0, 100)), 1.0)

    with pytest.raises(ValidationError):
        simulate_mfg_representative(
            fig3_params,
            fig3_path,
            mean,
            SimConfig(dt=0.1, n_paths=1, seed=0),
            InitialCondition.point(1.0),
        )


def test_flocking():
    """Test that strongly mean-reverting banks flock."""
    params = ModelParams(
        a=10.0, q=0.0, eps=0.0, n_banks=10, horizon=10.0, gamma=GrowthRate.constant(2.0)
    )
    sim = SimConfig(dt=1e-3, n_paths=20, seed=5, record_stride=10)

    ensemble = simulate_uncontrolled(params, sim, InitialCondition.point(1.0))
    stats = flocking_statistics(ensemble)

    assert np.isfinite(stats.window_mean)
    assert not stats.trending_up()
    assert stats.dispersion[-1] < stats.dispersion[ensemble.times.size // 2]
