"""Posterior-predictive projection to 2100 and the summary statistics behind
the headline figures: per-year credible bands, the 2100 marginal, the
cumulative 2018-2100 CDF, SSP comparisons, and growth/intensity rate samples.

Residual-process noise (when enabled) is a simulated stationary VAR(1) path
applied multiplicatively on the log scale, consistent with the log-scale
likelihood; observation error is excluded by default because projections
describe the process, not future measurements.
"""

import csv
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .calibrate import PosteriorEnsemble
from .errors import ConfigError, DataError, SimulationError
from .model import cumulative_emissions, simulate
from .paramspace import split_vector
from .scenarios import ScenarioConfig
from .stats import fossil_constraint_ok, stationary_covariance

RATE_WINDOW = (2018, 2100)


@dataclass
class ProjectionSummary:
    years: np.ndarray
    quantile_levels: tuple[float, ...]
    quantiles: dict[str, np.ndarray]      # series -> (n_years, n_levels)
    emissions_2100: np.ndarray            # per-draw sample
    cumulative_2018_2100: np.ndarray      # per-draw sample
    rate_endpoints: dict[str, np.ndarray]  # pop/gwp/emissions at window ends
    n_draws: int
    seed: int
    noise: bool
    observation_error: bool
    scenario_name: str = ""
    n_excluded: int = 0
    meta: dict = field(default_factory=dict)


def _sample_var_paths(stat, n_years: int, rng: np.random.Generator,
                      observation_error: bool) -> np.ndarray:
    """One stationary VAR(1) log-scale residual path of length n_years."""
    sigma_x = stationary_covariance(stat.A, stat.w_diag)
    x = np.empty((n_years, 3))
    chol0 = np.linalg.cholesky(sigma_x)
    cholw = np.sqrt(stat.w_diag)
    x[0] = chol0 @ rng.standard_normal(3)
    for t in range(1, n_years):
        x[t] = stat.A @ x[t - 1] + cholw * rng.standard_normal(3)
    if observation_error:
        x += np.sqrt(stat.d_diag) * rng.standard_normal((n_years, 3))
    return x


def posterior_predictive(ensemble: PosteriorEnsemble, scenario: ScenarioConfig,
                         n_draws: int = 10_000, seed: int = 0,
                         include_residual_noise: bool = True,
                         include_observation_error: bool = False,
                         quantile_levels: tuple[float, ...] = (0.05, 0.5, 0.95),
                         ) -> ProjectionSummary:
    """Project the posterior ensemble through the reporting horizon.

    Draws parameter vectors from the pooled ensemble (without replacement when
    n_draws <= available samples, with replacement otherwise), simulates each
    to the constraint horizon, optionally multiplies by exp(VAR(1) path), and
    summarizes. Emissions are floored at zero after noise.
    """
    pooled = ensemble.pooled()
    if len(pooled) == 0:
        raise ValueError("empty ensemble")
    if sorted(quantile_levels) != list(quantile_levels):
        raise ConfigError("quantile levels must be increasing")
    rng = np.random.default_rng(seed)
    replace = n_draws > len(pooled)
    idx = rng.choice(len(pooled), size=n_draws, replace=replace)

    y0, y1 = scenario.sim_start, scenario.report_horizon
    years = np.arange(y0, y1 + 1)
    n_years = len(years)
    series = {name: np.empty((n_draws, n_years))
              for name in ("population", "gwp", "emissions")}
    cum = np.empty(n_draws)
    excluded = 0

    i_2018 = 2018 - y0
    i_2100 = 2100 - y0
    for k, i in enumerate(idx):
        mp, sp = split_vector(pooled[i])
        try:
            traj = simulate(mp, y0, scenario.constraint_horizon)
        except SimulationError:
            # retained samples already satisfied the posterior; treat any
            # numerical failure here as a hard error rather than silently drop
            raise
        if not fossil_constraint_ok(traj, scenario):
            raise ValueError("ensemble sample violates its scenario's "
                             "fossil constraint")
        pop = traj.population[:n_years]
        gwp = traj.gwp[:n_years]
        em = traj.emissions[:n_years]
        if include_residual_noise:
            x = _sample_var_paths(sp, n_years, rng, include_observation_error)
            pop = pop * np.exp(x[:, 0])
            gwp = gwp * np.exp(x[:, 1])
            em = np.maximum(em * np.exp(x[:, 2]), 0.0)
        series["population"][k] = pop
        series["gwp"][k] = gwp
        series["emissions"][k] = em
        cum[k] = em[i_2018:i_2100 + 1].sum()

    quantiles = {name: np.quantile(vals, quantile_levels, axis=0).T
                 for name, vals in series.items()}
    rate_endpoints = {
        "population_start": series["population"][:, i_2018].copy(),
        "population_end": series["population"][:, i_2100].copy(),
        "gwp_start": series["gwp"][:, i_2018].copy(),
        "gwp_end": series["gwp"][:, i_2100].copy(),
        "emissions_start": series["emissions"][:, i_2018].copy(),
        "emissions_end": series["emissions"][:, i_2100].copy(),
    }
    return ProjectionSummary(
        years=years,
        quantile_levels=tuple(quantile_levels),
        quantiles=quantiles,
        emissions_2100=series["emissions"][:, i_2100].copy(),
        cumulative_2018_2100=cum,
        rate_endpoints=rate_endpoints,
        n_draws=n_draws,
        seed=seed,
        noise=include_residual_noise,
        observation_error=include_observation_error,
        scenario_name=scenario.name,
        n_excluded=excluded,
    )


class EmpiricalCDF:
    """Right-continuous empirical CDF with quantile and exceedance queries."""

    def __init__(self, sample):
        sample = np.asarray(sample, dtype=float)
        if len(sample) == 0:
            raise ValueError("empty sample")
        self.sorted = np.sort(sample)
        self.n = len(sample)

    def cdf(self, x) -> float | np.ndarray:
        return np.searchsorted(self.sorted, x, side="right") / self.n

    def exceedance(self, x) -> float | np.ndarray:
        return 1.0 - self.cdf(x)

    def quantile(self, p) -> float | np.ndarray:
        p = np.asarray(p, dtype=float)
        if ((p < 0) | (p > 1)).any():
            raise ValueError("probability level outside [0, 1]")
        k = np.clip(np.ceil(p * self.n).astype(int) - 1, 0, self.n - 1)
        out = self.sorted[k]
        return float(out) if out.ndim == 0 else out

    def steps(self) -> tuple[np.ndarray, np.ndarray]:
        """(value, probability) pairs of the step function, for export."""
        return self.sorted, np.arange(1, self.n + 1) / self.n


def cumulative_cdf(summary: ProjectionSummary) -> EmpiricalCDF:
    """Empirical CDF of cumulative 2018-2100 emissions."""
    return EmpiricalCDF(summary.cumulative_2018_2100)


def load_ssp_table(path=None) -> dict[str, dict]:
    """Reference SSP-RCP emissions values (annual 2100 GtC/yr, cumulative
    2018-2100 GtC) from the packaged data file or a user-supplied CSV."""
    if path is None:
        ref = resources.files("emproj.data").joinpath("ssp_reference.csv")
        text = ref.read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    table = {}
    reader = csv.DictReader(text.splitlines())
    required = {"scenario", "annual_2100_gtc", "cumulative_2018_2100_gtc"}
    if reader.fieldnames is None or not required <= set(reader.fieldnames):
        raise DataError(f"SSP table must have columns {sorted(required)}")
    for row in reader:
        table[row["scenario"]] = {
            "annual_2100_gtc": float(row["annual_2100_gtc"]),
            "cumulative_2018_2100_gtc": float(row["cumulative_2018_2100_gtc"]),
            "provenance": row.get("provenance", ""),
        }
    return table


def ssp_compare(summary: ProjectionSummary, ssp_table: dict[str, dict],
                interval: float = 0.90, ssps=None) -> list[dict]:
    """Classify each SSP's 2100 annual value against the projection's central
    interval and report the exceedance probability of its cumulative total."""
    lo_q = 0.5 * (1 - interval)
    lo, hi = np.quantile(summary.emissions_2100, [lo_q, 1 - lo_q])
    cdf = cumulative_cdf(summary)
    keys = list(ssp_table) if ssps is None else list(ssps)
    out = []
    for key in keys:
        if key not in ssp_table:
            raise KeyError(f"unknown SSP scenario {key!r}")
        ref = ssp_table[key]
        annual = ref["annual_2100_gtc"]
        cum_ref = ref["cumulative_2018_2100_gtc"]
        out.append({
            "scenario": key,
            "annual_2100_gtc": annual,
            "inside_interval": bool(lo <= annual <= hi),
            "interval_low": float(lo),
            "interval_high": float(hi),
            "cumulative_2018_2100_gtc": cum_ref,
            "cumulative_exceedance_prob": float(cdf.exceedance(cum_ref)),
        })
    return out


def rate_summaries(summary: ProjectionSummary) -> dict:
    """Per-draw geometric-average annual rates over 2018-2100: per-capita GWP
    growth and carbon-intensity decline. Draws with non-positive endpoint
    values are excluded (count reported)."""
    ep = summary.rate_endpoints
    span = RATE_WINDOW[1] - RATE_WINDOW[0]
    ypc0 = ep["gwp_start"] / ep["population_start"]
    ypc1 = ep["gwp_end"] / ep["population_end"]
    phi0 = ep["emissions_start"] / ep["gwp_start"]
    phi1 = ep["emissions_end"] / ep["gwp_end"]
    valid = (ypc0 > 0) & (ypc1 > 0) & (phi0 > 0) & (phi1 > 0)
    growth = (ypc1[valid] / ypc0[valid]) ** (1.0 / span) - 1.0
    decline = 1.0 - (phi1[valid] / phi0[valid]) ** (1.0 / span)
    return {
        "growth_rates": growth,
        "intensity_decline_rates": decline,
        "n_excluded": int((~valid).sum()),
        "window": RATE_WINDOW,
    }
