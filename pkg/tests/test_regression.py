import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bridgeloss.errors import DomainError
from bridgeloss.regression import (
    DegenerateDesignError,
    LossDataset,
    dataset_from_sweeps,
    fit_loss_per_bridge,
    loss_per_capacitance,
    ols_line,
    power_cut,
    synthetic_dataset,
)
from bridgeloss.resonator import PowerSweepResult

COUNTS = (0, 12, 24, 49, 98)


def test_noiseless_low_power_line():
    res = fit_loss_per_bridge(synthetic_dataset(6.7e-7, 3.9e-8, COUNTS))
    assert res.slope == pytest.approx(3.9e-8, rel=1e-12)
    assert res.intercept == pytest.approx(6.7e-7, rel=1e-12)
    assert res.r_squared == pytest.approx(1.0, abs=1e-12)
    assert res.n_points == 5


def test_noiseless_high_power_line():
    res = fit_loss_per_bridge(synthetic_dataset(4e-7, 1.2e-8, COUNTS, power_label="high"))
    assert res.slope == pytest.approx(1.2e-8, rel=1e-12)


def test_hand_computed_line():
    # x = 0,1,2 ; y = 1,3,4 -> slope 1.5, intercept 7/6
    res = ols_line([0, 1, 2], [1, 3, 4])
    assert res.slope == pytest.approx(1.5, rel=1e-15)
    assert res.intercept == pytest.approx(7 / 6, rel=1e-15)
    # ssr = 1/6, s2 = 1/6, sxx = 2
    assert res.slope_stderr == pytest.approx(np.sqrt(1 / 12), rel=1e-14)
    assert res.r_squared == pytest.approx(1 - (1 / 6) / (14 / 3), rel=1e-14)


def test_monte_carlo_coverage():
    rng = np.random.default_rng(8)
    hits = 0
    for _ in range(200):
        ds = synthetic_dataset(6.7e-7, 3.9e-8, COUNTS, noise=2e-8, seed=int(rng.integers(2**32)))
        res = fit_loss_per_bridge(ds)
        hits += abs(res.slope - 3.9e-8) <= res.slope_stderr
    assert hits >= 120


def test_residual_variance_stderr_without_errors():
    ds = synthetic_dataset(6.7e-7, 3.9e-8, COUNTS, noise=2e-8, seed=1)
    plain = ols_line(ds.bridge_counts, ds.losses)
    relative = ols_line(ds.bridge_counts, ds.losses, ds.loss_errs, absolute_sigma=False)
    assert relative.slope == pytest.approx(plain.slope, rel=1e-12)
    assert relative.slope_stderr == pytest.approx(plain.slope_stderr, rel=1e-12)


def test_known_errors_give_textbook_stderr():
    x = np.array(COUNTS, dtype=float)
    sigma = 2e-8
    res = ols_line(x, 1e-6 + 3e-8 * x, np.full(5, sigma))
    assert res.slope_stderr == pytest.approx(sigma / np.sqrt(np.sum((x - x.mean()) ** 2)), rel=1e-12)


def brute_force_slope(x, y, true_slope, true_icpt, half_width=0.5, steps=801):
    slopes = true_slope * (1 + np.linspace(-half_width, half_width, steps))
    icpts = true_icpt * (1 + np.linspace(-half_width, half_width, steps))
    s, b = np.meshgrid(slopes, icpts, indexing="ij")
    sse = ((y[None, None, :] - b[..., None] - s[..., None] * x[None, None, :]) ** 2).sum(-1)
    i, _ = np.unravel_index(np.argmin(sse), sse.shape)
    return slopes[i], slopes[1] - slopes[0]


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_matches_grid_argmin(seed):
    x = np.array([0, 12, 24, 49, 98], dtype=float)
    y = 6.7e-7 + 3.9e-8 * x + 5e-9 * np.random.default_rng(seed).standard_normal(5)
    res = ols_line(x, y)
    best, step = brute_force_slope(x, y, 3.9e-8, 6.7e-7)
    assert abs(res.slope - best) <= step


@given(st.permutations(range(5)), st.integers(0, 1000))
def test_permutation_bit_identical(perm, seed):
    ds = synthetic_dataset(6.7e-7, 3.9e-8, COUNTS, noise=2e-8, seed=seed)
    p = np.array(perm)
    a = fit_loss_per_bridge(ds)
    b = fit_loss_per_bridge(LossDataset(ds.bridge_counts[p], ds.losses[p], ds.loss_errs[p]))
    assert a == b


@settings(max_examples=50)
@given(st.integers(0, 1000), st.floats(1e-8, 1e-5))
def test_constant_shift(seed, shift):
    ds = synthetic_dataset(6.7e-7, 3.9e-8, COUNTS, noise=2e-8, seed=seed)
    a = fit_loss_per_bridge(ds)
    b = fit_loss_per_bridge(LossDataset(ds.bridge_counts, ds.losses + shift, ds.loss_errs))
    assert b.slope == pytest.approx(a.slope, rel=1e-9, abs=1e-20)
    assert b.intercept == pytest.approx(a.intercept + shift, rel=1e-9)
    assert 0.0 <= a.r_squared <= 1.0


def test_degenerate_design():
    with pytest.raises(DegenerateDesignError):
        ols_line([12, 12, 12], [1e-6, 2e-6, 3e-6])
    with pytest.raises(DegenerateDesignError):
        LossDataset([0, 12, 12, 0], [1e-6] * 4)


def test_dataset_validation():
    with pytest.raises(DomainError):
        LossDataset([0, 12, 24], [1e-6, -1e-6, 1e-6])
    with pytest.raises(DomainError):
        LossDataset([0, 12, 24], [1e-6] * 3, power_label="medium")
    with pytest.raises(DomainError):
        LossDataset([0, 1.5, 24], [1e-6] * 3)
    ds = LossDataset([0, 12, 24], [1e-6, 2e-6, 3e-6], [1e-7] * 3)
    assert ds.points[1] == (12, 2e-6, 1e-7)


class TestPerCapacitance:
    def test_measured_slope(self):
        per_ff = loss_per_capacitance(3.9e-8, 0.266e-15) * 1e-15
        assert per_ff == pytest.approx(1.466e-7, rel=1e-3)
        assert abs(per_ff / 1.2e-7 - 1) < 0.25

    def test_zero(self):
        assert loss_per_capacitance(0.0, 0.266e-15) == 0.0

    @pytest.mark.parametrize("cap", [0.0, -1e-15])
    def test_bad_cap(self, cap):
        with pytest.raises(DomainError):
            loss_per_capacitance(3.9e-8, cap)


def test_power_cuts_from_sweeps():
    n = np.logspace(-1, 7, 9)
    sweeps = {}
    for count in COUNTS:
        loss = 1e-7 + 1.2e-8 * count + (6.7e-7 + 2.7e-8 * count) / (1 + n / 10) ** 0.5
        sweeps[count] = PowerSweepResult(n, 1 / loss)
    low_loss, err = power_cut(sweeps[0], "low")
    assert err is None
    assert low_loss == pytest.approx(1e-7 + 6.7e-7 / 1.1 ** 0.5)
    high = fit_loss_per_bridge(dataset_from_sweeps(sweeps, "high"))
    low = fit_loss_per_bridge(dataset_from_sweeps(sweeps, "low"))
    assert high.slope == pytest.approx(1.2e-8 + 2.7e-8 / (1 + 1e5) ** 0.5, rel=1e-9)
    assert low.slope > high.slope
    with pytest.raises(DomainError):
        power_cut(sweeps[0], "medium")
