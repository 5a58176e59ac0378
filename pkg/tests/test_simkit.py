"""Trial seeding, paired trials, outage estimation, and sweep aggregation."""

import numpy as np
import pytest

from ddlink_sim.config import SystemConfig
from ddlink_sim.simkit import (
    TrialResult,
    _chunk_bounds,
    db_to_linear,
    derive_trial_seed,
    outage_probability,
    run_sweep,
    run_trial,
)


def small_config(**changes):
    base = dict(N=8, M=8, N_p=3, l_max=4, L_0=4, U=4, trials=40, rho_T_grid=(0.0, 10.0))
    base.update(changes)
    return SystemConfig(**base)


# === seed derivation =================================================


def test_seed_golden_values():
    # Pinned so that published results stay reproducible across releases.
    assert derive_trial_seed(715517, 0, 0) == 11351146791022928155
    assert derive_trial_seed(715517, 0, 1) == 15756925787403938303
    assert derive_trial_seed(715517, 3, 2) == 7840454170649034760
    assert derive_trial_seed(0, 0, 0) == 16871404019307972170
    assert derive_trial_seed(2**64 - 1, 10, 9999) == 15644059711510469944


def test_seed_range_and_distinctness():
    seen = set()
    for point in range(8):
        for trial in range(200):
            s = derive_trial_seed(42, point, trial)
            assert 0 <= s < 2**64
            seen.add(s)
    assert len(seen) == 8 * 200


def test_seed_sensitive_to_every_index():
    base = derive_trial_seed(1, 2, 3)
    assert derive_trial_seed(2, 2, 3) != base
    assert derive_trial_seed(1, 3, 3) != base
    assert derive_trial_seed(1, 2, 4) != base


def test_db_to_linear():
    assert db_to_linear(0.0) == pytest.approx(1.0, abs=1e-15)
    assert db_to_linear(10.0) == pytest.approx(10.0, rel=1e-15)
    assert db_to_linear(20.0) == pytest.approx(100.0, rel=1e-15)


# === single trials ===================================================


def test_trial_deterministic():
    cfg = small_config()
    a = run_trial(cfg, 10.0, 12345, trial_index=7)
    b = run_trial(cfg, 10.0, 12345, trial_index=7)
    assert a.rates_real.se_hm == b.rates_real.se_hm
    assert a.rates_ideal.se_hm == b.rates_ideal.se_hm
    assert np.array_equal(a.rates_real.se_lm, b.rates_real.se_lm)
    assert a.seed == 12345 and a.trial_index == 7


def test_trial_lm_side_shared_between_members():
    # The LM stages carry no fractional Doppler, so the paired members
    # must agree on them bit for bit.
    cfg = small_config()
    result = run_trial(cfg, 10.0, 999)
    assert np.array_equal(result.rates_real.se_lm, result.rates_ideal.se_lm)
    assert np.array_equal(result.rates_real.se_hm_at_lm, result.rates_ideal.se_hm_at_lm)
    assert result.rates_real.se_lm_min == result.rates_ideal.se_lm_min


def test_trial_mode_selects_members():
    real_only = run_trial(small_config(mode="real"), 10.0, 5)
    assert real_only.rates_real is not None and real_only.rates_ideal is None
    ideal_only = run_trial(small_config(mode="ideal"), 10.0, 5)
    assert ideal_only.rates_real is None and ideal_only.rates_ideal is not None


def test_trial_result_requires_a_member():
    with pytest.raises(ValueError, match="member"):
        TrialResult(None, None, 0, 0)


def test_ideal_beats_real_on_average():
    cfg = small_config()
    diffs = []
    for trial in range(300):
        result = run_trial(cfg, 10.0, derive_trial_seed(7, 0, trial), trial)
        diffs.append(result.rates_ideal.se_hm - result.rates_real.se_hm)
    diffs = np.asarray(diffs)
    # Removing the Doppler leakage can only help; the mean improvement
    # should clear zero by many standard errors.
    assert diffs.mean() > 5.0 * diffs.std(ddof=1) / np.sqrt(diffs.size)


# === outage ==========================================================


def test_outage_examples():
    samples = np.array([0.2, 0.4, 0.6, 0.8])
    assert outage_probability(samples, 0.5) == 0.5
    assert outage_probability(samples, 0.1) == 0.0
    assert outage_probability(samples, 0.9) == 1.0


def test_outage_threshold_is_strict():
    assert outage_probability(np.array([0.5]), 0.5) == 0.0


def test_outage_empty_rejected():
    with pytest.raises(ValueError, match="sample"):
        outage_probability(np.array([]), 0.5)


def test_outage_monotone_in_threshold():
    rng = np.random.default_rng(141)
    samples = rng.uniform(0.0, 1.0, size=500)
    assert outage_probability(samples, 0.6) >= outage_probability(samples, 0.3)


# === sweeps ==========================================================


def test_sweep_shape_and_thresholds():
    cfg = small_config(trials=10)
    summary = run_sweep(cfg)
    assert summary.thresholds == (cfg.R_th,)
    assert len(summary.points) == len(cfg.rho_T_grid)
    for point, db in zip(summary.points, cfg.rho_T_grid):
        assert point.rho_t_db == db
        assert point.p0 == cfg.p0
        assert point.n_trials == 10
        assert len(point.outage) == 1
        assert point.outage[0].r_th == cfg.R_th
        assert 0.0 <= point.outage[0].real <= 1.0
        assert 0.0 <= point.outage[0].ideal <= 1.0


def test_sweep_single_trial_degenerate_stats():
    cfg = small_config(trials=1, rho_T_grid=(10.0,))
    point = run_sweep(cfg).points[0]
    assert point.se_hm_real_stderr == 0.0
    assert point.gap_stderr == 0.0
    assert point.outage[0].real in (0.0, 1.0)


def test_sweep_custom_thresholds():
    cfg = small_config(trials=8, rho_T_grid=(10.0,))
    point = run_sweep(cfg, thresholds=(0.3, 0.6)).points[0]
    assert tuple(o.r_th for o in point.outage) == (0.3, 0.6)
    assert point.outage[1].real >= point.outage[0].real


def test_sweep_mode_real_drops_ideal_columns():
    cfg = small_config(trials=6, mode="real", rho_T_grid=(10.0,))
    point = run_sweep(cfg).points[0]
    assert point.se_hm_real_mean is not None
    assert point.se_hm_ideal_mean is None
    assert point.gap_mean is None
    assert point.outage[0].ideal is None
    assert point.se_lm_mean > 0.0


def test_sweep_worker_counts_agree_bitwise():
    cfg = small_config(trials=30)
    serial = run_sweep(cfg, workers=1, thresholds=(0.3, 0.6))
    pooled = run_sweep(cfg, workers=3, thresholds=(0.3, 0.6))
    for a, b in zip(serial.points, pooled.points):
        assert a == b


def test_sweep_rejects_bad_workers():
    with pytest.raises(ValueError, match="workers"):
        run_sweep(small_config(), workers=0)


def test_chunk_bounds_partition():
    for n_trials in (1, 7, 40, 101):
        for workers in (1, 2, 3, 8):
            bounds = _chunk_bounds(n_trials, workers)
            assert bounds[0][0] == 0
            assert bounds[-1][1] == n_trials
            for (_, stop), (start, _) in zip(bounds, bounds[1:]):
                assert stop == start
            assert all(stop > start for start, stop in bounds)
