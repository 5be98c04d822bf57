import numpy as np
import pytest

from emproj.calibrate import ChainConfig
from emproj.validate import coverage, make_folds


def test_make_folds_shapes(fixture_obs):
    folds = make_folds(fixture_obs, n_folds=5, holdout_years=12, seed=0)
    assert len(folds) == 5
    for train, holdout in folds:
        assert len(holdout) == 12
        held = set(int(y) for y in holdout.years)
        # holdout years are removed from the training set
        assert held.isdisjoint(int(y) for y in train.years)
        assert len(train) == len(fixture_obs) - 12
        # holdout years all exist in the full record
        assert held <= set(int(y) for y in fixture_obs.years)


def test_make_folds_deterministic(fixture_obs):
    a = make_folds(fixture_obs, n_folds=3, holdout_years=8, seed=1)
    b = make_folds(fixture_obs, n_folds=3, holdout_years=8, seed=1)
    for (_, ha), (_, hb) in zip(a, b):
        assert np.array_equal(ha.years, hb.years)
    c = make_folds(fixture_obs, n_folds=3, holdout_years=8, seed=2)
    assert any(not np.array_equal(ha.years, hc.years)
               for (_, ha), (_, hc) in zip(a, c))


def test_make_folds_differ_across_folds(fixture_obs):
    folds = make_folds(fixture_obs, n_folds=4, holdout_years=10, seed=0)
    sets = [frozenset(int(y) for y in h.years) for _, h in folds]
    assert len(set(sets)) == 4


def test_make_folds_rejects_oversized_holdout(fixture_obs):
    with pytest.raises(ValueError):
        make_folds(fixture_obs, n_folds=2, holdout_years=10_000, seed=0)


def test_coverage_smoke(standard_scenario, fixture_obs):
    folds = make_folds(fixture_obs, n_folds=2, holdout_years=5, seed=0)
    config = ChainConfig(n_chains=2, n_iterations=3_000, burn_in=1_000,
                         thin=10, seed=0)
    report = coverage(standard_scenario, fixture_obs, folds, config,
                      n_pred_draws=200)
    assert 0.0 <= report.overall <= 1.0
    assert report.level == 0.90
    assert report.n_folds == 2
    assert set(report.per_series) <= {"population", "gwp", "emissions"}
    assert report.rows, "expected per-holdout rows"
    for row in report.rows:
        assert row["series"] in ("population", "gwp", "emissions")
        assert isinstance(row["covered"], bool)
        assert row["q_low"] <= row["q_high"]
    covered = [r["covered"] for r in report.rows]
    assert report.overall == pytest.approx(np.mean(covered))
