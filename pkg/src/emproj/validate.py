"""k-fold cross-validation of calibration quality: hold-out years, reduced
recalibration, and coverage of the central predictive intervals.

Held-out predictions include observation error (we predict observations, not
latent states); per-year, per-series predictive intervals use the marginal
stationary residual distribution.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .calibrate import ChainConfig, run_mh
from .errors import EmprojError
from .model import simulate
from .paramspace import split_vector
from .scenarios import ScenarioConfig
from .stats import ObservationSet, stationary_covariance


def make_folds(obs: ObservationSet, n_folds: int = 50, holdout_years: int = 39,
               seed: int = 0) -> list[tuple[ObservationSet, ObservationSet]]:
    """Random hold-out splits: each fold holds out a uniformly random subset
    of observed years of the requested size (scattered, not contiguous)."""
    if holdout_years > len(obs):
        raise ValueError(f"holdout size {holdout_years} exceeds the "
                         f"{len(obs)} available years")
    rng = np.random.default_rng(seed)
    folds = []
    for _ in range(n_folds):
        held = np.sort(rng.choice(obs.years, size=holdout_years, replace=False))
        folds.append((obs.drop_years(held), obs.subset_years(held)))
    return folds


@dataclass
class CoverageReport:
    overall: float
    per_series: dict[str, float]
    rows: list[dict]                 # fold, series, year, observed, q05, q95, covered
    level: float
    n_folds: int
    n_failed_folds: int = 0
    meta: dict = field(default_factory=dict)


def _fold_worker(args):
    (fold_id, train, holdout, scenario, chain_config, level,
     n_pred_draws) = args
    ensemble = run_mh(scenario, train, chain_config)
    pooled = ensemble.pooled()
    rng = np.random.default_rng(np.random.SeedSequence(
        entropy=chain_config.seed, spawn_key=(1000 + fold_id,)))
    idx = rng.choice(len(pooled), size=n_pred_draws, replace=True)

    years = holdout.years
    y1 = int(years[-1])
    preds = {name: np.empty((n_pred_draws, len(years)))
             for name in ("population", "gwp", "emissions")}
    for k, i in enumerate(idx):
        mp, sp = split_vector(pooled[i])
        traj = simulate(mp, scenario.sim_start, y1)
        sigma_x = stationary_covariance(sp.A, sp.w_diag)
        sd = np.sqrt(np.diag(sigma_x) + sp.d_diag)  # marginal state + obs error
        noise = rng.standard_normal((len(years), 3)) * sd
        rows = years - traj.start_year
        model = np.column_stack([traj.population, traj.gwp,
                                 traj.emissions])[rows]
        z = model * np.exp(noise)
        preds["population"][k] = z[:, 0]
        preds["gwp"][k] = z[:, 1]
        preds["emissions"][k] = z[:, 2]

    a = 0.5 * (1.0 - level)
    rows_out = []
    values = holdout.values()
    for si, name in enumerate(("population", "gwp", "emissions")):
        qlo = np.quantile(preds[name], a, axis=0)
        qhi = np.quantile(preds[name], 1.0 - a, axis=0)
        for yi, year in enumerate(years):
            observed = values[yi, si]
            if np.isnan(observed):
                continue
            rows_out.append({
                "fold": fold_id,
                "series": name,
                "year": int(year),
                "observed": float(observed),
                "q_low": float(qlo[yi]),
                "q_high": float(qhi[yi]),
                "covered": bool(qlo[yi] <= observed <= qhi[yi]),
            })
    return rows_out


def coverage(scenario: ScenarioConfig, obs: ObservationSet,
             folds: list[tuple[ObservationSet, ObservationSet]],
             chain_config_small: ChainConfig, level: float = 0.90,
             n_pred_draws: int = 2000, threads: int = 1) -> CoverageReport:
    """Recalibrate on each fold's training set, predict the held-out
    observations, and report the fraction covered by the central
    `level` predictive interval. Failed folds are excluded with a count."""
    jobs = [(i, train, hold, scenario, chain_config_small, level, n_pred_draws)
            for i, (train, hold) in enumerate(folds)]
    rows: list[dict] = []
    failed = 0
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            futures = [ex.submit(_fold_worker, job) for job in jobs]
            for fu in futures:
                try:
                    rows.extend(fu.result())
                except EmprojError:
                    failed += 1
    else:
        for job in jobs:
            try:
                rows.extend(_fold_worker(job))
            except EmprojError:
                failed += 1

    if not rows:
        raise EmprojError("all folds failed")
    per_series = {}
    for name in ("population", "gwp", "emissions"):
        flags = [r["covered"] for r in rows if r["series"] == name]
        if flags:
            per_series[name] = float(np.mean(flags))
    overall = float(np.mean([r["covered"] for r in rows]))
    return CoverageReport(overall=overall, per_series=per_series, rows=rows,
                          level=level, n_folds=len(folds),
                          n_failed_folds=failed,
                          meta={"chain_iterations": chain_config_small.n_iterations,
                                "n_pred_draws": n_pred_draws})
