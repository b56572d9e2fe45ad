"""Test equilibrium controls, admissibility and the HJB residual."""
import numpy as np
import pytest

from feller_lending.coeffs import (
    GrowthRate,
    ModelParams,
    solve_finite_horizon,
    solve_infinite_horizon,
    time_grid,
)
from feller_lending.equilibrium import (
    ControlQuery,
    aggregate_control_identity,
    check_admissibility,
    first_order_control,
    hjb_residual,
    hjb_residual_mfg,
    liquidity,
    mfg_control,
    mfg_limit_gap,
    nash_control_finite,
    residual_tolerance,
    stationary_control,
)
from feller_lending.errors import ValidationError

from . import FIG3


def test_control_at_average(fig3_path):
    """Test that a bank at the average capitalization lends psi_t."""
    sample = fig3_path.sample(0.3)

    control = nash_control_finite(
        ControlQuery(t=0.3, x_i=2.0, x_ref=2.0, coeffs=fig3_path)
    )

    assert control == pytest.approx(-sample.psi, abs=1e-15)


def test_control_without_forcing():
    """Test that eps = q^2 leaves the pure incentive q (xbar - x_i)."""
    params = ModelParams(a=1.0, q=0.8, eps=0.64, n_banks=5, horizon=1.0)
    coeffs = solve_finite_horizon(params, time_grid(1.0, 100))

    control = nash_control_finite(
        ControlQuery(t=0.2, x_i=0.5, x_ref=1.5, coeffs=coeffs)
    )

    assert control == pytest.approx(0.8)


def test_control_matches_first_order_condition(fig3_path):
    """Test the feedback form against q (xbar - x_i) - dV/dx_i."""
    query = ControlQuery(t=0.4, x_i=0.3, x_ref=1.7, coeffs=fig3_path)

    assert nash_control_finite(query) == pytest.approx(
        first_order_control(query), rel=1e-12
    )


def test_stationary_control(stationary):
    """Test q + (1 - 1/N) eta - psi at unit distance."""
    control = stationary_control(
        ControlQuery(t=0.0, x_i=1.0, x_ref=2.0, coeffs=stationary)
    )

    assert control == pytest.approx(1.0 + 0.9 * stationary.eta - stationary.psi)


def test_mfg_control(fig3_mfg):
    """Test -psi_t at the mean and the mean-field gain elsewhere."""
    sample = fig3_mfg.sample(0.0)

    at_mean = mfg_control(ControlQuery(t=0.0, x_i=1.0, x_ref=1.0, coeffs=fig3_mfg))
    below = mfg_control(ControlQuery(t=0.0, x_i=0.5, x_ref=1.0, coeffs=fig3_mfg))

    assert at_mean == pytest.approx(-sample.psi)
    assert below == pytest.approx((1.0 + sample.eta) * 0.5 - sample.psi)


def test_controls_check_mode(fig3_path, fig3_mfg):
    """Test that coefficients of the wrong game are rejected."""
    with pytest.raises(ValidationError):
        mfg_control(ControlQuery(t=0.0, x_i=1.0, x_ref=1.0, coeffs=fig3_path))
    with pytest.raises(ValidationError):
        nash_control_finite(ControlQuery(t=0.0, x_i=1.0, x_ref=1.0, coeffs=fig3_mfg))


def test_negative_reserve_rejected(fig3_path):
    """Test that negative reserves are rejected."""
    with pytest.raises(ValidationError):
        ControlQuery(t=0.0, x_i=-1.0, x_ref=1.0, coeffs=fig3_path)


def test_aggregate_control(fig3_path):
    """Test that the controls sum to -N psi_t."""
    states = np.random.default_rng(5).gamma(2.0, 1.0, size=10)

    aggregate = aggregate_control_identity(fig3_path, 0.0, states)

    assert aggregate.total == pytest.approx(-10.0 * fig3_path.psi[0])
    assert aggregate.direct_sum == pytest.approx(aggregate.total, abs=1e-12)
    assert aggregate.mean_reversion_sum == pytest.approx(0.0, abs=1e-12)


def test_aggregate_control_without_psi():
    """Test a vanishing total when psi vanishes."""
    params = ModelParams(a=1.0, q=1.0, eps=1.0, n_banks=4, horizon=1.0)
    coeffs = solve_finite_horizon(params, time_grid(1.0, 100))

    aggregate = aggregate_control_identity(coeffs, 0.5, [0.0, 1.0, 2.0, 3.0])

    assert aggregate.total == 0.0
    assert aggregate.direct_sum == pytest.approx(0.0, abs=1e-12)


def test_aggregate_control_state_size(fig3_path):
    """Test that a state vector of the wrong size is rejected."""
    with pytest.raises(ValidationError):
        aggregate_control_identity(fig3_path, 0.0, [1.0, 2.0])


def test_admissibility(fig3_params, fig3_path):
    """Test the growth and bank-count conditions of the reference equilibrium."""
    report = check_admissibility(fig3_params, fig3_path)

    assert report.cond_growth
    assert report.growth_margin == pytest.approx(1.0 - fig3_path.psi.max())
    assert report.growth_first_violation is None
    assert report.cond_bankcount
    np.testing.assert_allclose(
        report.liquidity, liquidity(fig3_params, fig3_path), rtol=0
    )


def test_admissibility_violation(fig3_path):
    """Test that a small growth rate is flagged at t = 0."""
    params = ModelParams(horizon=1.0, gamma=GrowthRate.constant(0.01), **FIG3)

    report = check_admissibility(params, fig3_path)

    assert not report.cond_growth
    assert report.growth_margin < 0.0
    assert report.growth_first_violation == 0.0


def test_admissibility_bankcount():
    """Test that a liquidity above N is flagged."""
    params = ModelParams(a=5.0, q=1.0, eps=2.0, n_banks=3, horizon=1.0)
    coeffs = solve_finite_horizon(params, time_grid(1.0, 100))

    report = check_admissibility(params, coeffs)

    assert not report.cond_bankcount
    assert report.bankcount_first_violation == 0.0


def test_admissibility_stationary(stationary_params, stationary):
    """Test scalar margins for the discounted game."""
    report = check_admissibility(stationary_params, stationary)

    assert report.cond_growth == (report.growth_margin >= 0.0)
    assert report.growth_margin == pytest.approx(1.0 - stationary.psi)


def test_hjb_residual_finite_horizon(fig3_params, fig3_path):
    """Test the HJB residual of the ansatz on random states."""
    rng = np.random.default_rng(11)
    for _ in range(1000):
        t = rng.uniform(0.0, 1.0)
        state = rng.uniform(0.0, 3.0, size=10)
        bank = int(rng.integers(10))

        residual = hjb_residual(t, state, bank, fig3_path, fig3_params)

        assert abs(residual) <= residual_tolerance(t, state, fig3_path)


def test_hjb_residual_time_varying_growth():
    """Test the HJB residual with a piecewise-linear growth rate."""
    params = ModelParams(
        horizon=1.0, gamma=GrowthRate(times=(0.0, 1.0), values=(0.5, 2.0)), **FIG3
    )
    coeffs = solve_finite_horizon(params, time_grid(1.0, 10_000))
    rng = np.random.default_rng(12)
    for _ in range(100):
        t = rng.uniform(0.0, 1.0)
        state = rng.uniform(0.0, 2.0, size=10)

        residual = hjb_residual(t, state, 3, coeffs)

        assert abs(residual) <= residual_tolerance(t, state, coeffs)


def test_hjb_residual_stationary(stationary):
    """Test the discounted HJB residual of the stationary ansatz."""
    rng = np.random.default_rng(13)
    for _ in range(1000):
        state = rng.uniform(0.0, 3.0, size=10)

        residual = hjb_residual(0.0, state, int(rng.integers(10)), stationary)

        assert abs(residual) <= residual_tolerance(0.0, state, stationary)


def test_hjb_residual_mean_field(fig3_mfg):
    """Test the HJB residual of the representative bank."""
    rng = np.random.default_rng(14)
    for _ in range(1000):
        t = rng.uniform(0.0, 1.0)
        x, m = rng.uniform(0.0, 3.0, size=2)

        residual = hjb_residual_mfg(t, x, m, fig3_mfg)

        assert abs(residual) <= residual_tolerance(t, [x, m], fig3_mfg)


def test_hjb_residual_mean_field_stationary(stationary_mfg):
    """Test the discounted HJB residual of the representative bank."""
    rng = np.random.default_rng(15)
    for _ in range(200):
        x, m = rng.uniform(0.0, 3.0, size=2)

        residual = hjb_residual_mfg(0.0, x, m, stationary_mfg)

        assert abs(residual) <= residual_tolerance(0.0, [x, m], stationary_mfg)


def test_hjb_residual_detects_wrong_coefficients(fig3_path):
    """Test that coefficients of another game fail the HJB equation."""
    other = solve_finite_horizon(
        ModelParams(horizon=1.0, **dict(FIG3, eps=3.0)), time_grid(1.0, 10_000)
    )
    params = fig3_path.params
    state = np.linspace(0.5, 2.0, 10)

    residual = hjb_residual(0.5, state, 0, other, params)

    assert abs(residual) > residual_tolerance(0.5, state, other)


def test_hjb_residual_state_checks(fig3_path):
    """Test that malformed states are rejected."""
    with pytest.raises(ValidationError):
        hjb_residual(0.5, [1.0, 2.0], 0, fig3_path)
    with pytest.raises(ValidationError):
        hjb_residual(0.5, np.ones(10), 10, fig3_path)


def test_mfg_limit_gap():
    """Test that the finite-player control approaches the mean-field control."""
    small = ModelParams(horizon=1.0, **dict(FIG3, n_banks=10))
    large = ModelParams(horizon=1.0, **dict(FIG3, n_banks=10_000))
    grid = time_grid(1.0, 1000)

    gap_small = mfg_limit_gap(small, 0.0, 0.5, 1.5, grid)
    gap_large = mfg_limit_gap(large, 0.0, 0.5, 1.5, grid)

    assert gap_large < gap_small
    assert gap_large <= 1e-3


def test_stationary_control_at_average(stationary_params):
    """Test that a bank at the average lends the stationary psi."""
    coeffs = solve_infinite_horizon(stationary_params)

    control = stationary_control(
        ControlQuery(t=0.0, x_i=1.0, x_ref=1.0, coeffs=coeffs)
    )

    assert control == pytest.approx(-coeffs.psi)
