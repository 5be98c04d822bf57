"""Synthetic observation generator: forward-simulate known parameters and
overlay the VAR(1)-plus-observation-error structure. Used by the test suite
and to build the shipped fixture dataset."""

import numpy as np

from .model import ModelParams, simulate
from .stats import ObservationSet, StatParams, stationary_covariance

# A plausible, admissible truth used by the fixture dataset and tests.
# Weakly identified parameters sit near their prior centers (so posterior
# shrinkage does not displace the identified ones), technology saturates
# quickly (alpha) so the production block is well determined by the observed
# window, and cumulative 1700-2500 emissions (~5200 GtC) stay inside the
# standard scenario's fossil resource limit.
TRUE_MODEL = ModelParams(
    psi1=0.075, psi2=15.0, psi3=10.5, P0=0.6, lam=0.7, s=0.24, delta=0.075,
    alpha=0.02, As=9.5, pi=0.64, A0=0.6, rho2=0.20, rho3=0.09,
    tau2=1920.0, tau3=1990.0, tau4=2085.0, kappa=0.12,
)

TRUE_STAT = StatParams(
    A=np.array([[0.55, 0.05, 0.0],
                [0.05, 0.45, 0.0],
                [0.0, 0.05, 0.85]]),
    w_diag=np.array([0.0004, 0.0016, 0.0025]),
    d_diag=np.array([0.0001, 0.0009, 0.0004]),
)


def generate_observations(model_params: ModelParams = TRUE_MODEL,
                          stat_params: StatParams = TRUE_STAT,
                          start_year: int = 1820, end_year: int = 2014,
                          seed: int = 12345,
                          missing: dict[str, tuple[int, int]] | None = None,
                          ) -> ObservationSet:
    """Observations z_t = M_t * exp(x_t + eps_t) on an annual grid.

    `missing` optionally maps a series name to a (start, end) year range to
    blank out, mimicking historically shorter records.
    """
    rng = np.random.default_rng(seed)
    traj = simulate(model_params, 1700, end_year)
    years = np.arange(start_year, end_year + 1)
    rows = years - traj.start_year
    model = np.column_stack([traj.population, traj.gwp, traj.emissions])[rows]

    sigma_x = stationary_covariance(stat_params.A, stat_params.w_diag)
    chol0 = np.linalg.cholesky(sigma_x)
    sw = np.sqrt(stat_params.w_diag)
    x = np.empty((len(years), 3))
    x[0] = chol0 @ rng.standard_normal(3)
    for t in range(1, len(years)):
        x[t] = stat_params.A @ x[t - 1] + sw * rng.standard_normal(3)
    eps = rng.standard_normal((len(years), 3)) * np.sqrt(stat_params.d_diag)
    z = model * np.exp(x + eps)

    data = {"population": z[:, 0], "gwp": z[:, 1], "emissions": z[:, 2]}
    if missing:
        for name, (lo, hi) in missing.items():
            blank = (years >= lo) & (years <= hi)
            data[name] = np.where(blank, np.nan, data[name])
    return ObservationSet(years, data["population"], data["gwp"],
                          data["emissions"], source=f"synthetic seed={seed}")
