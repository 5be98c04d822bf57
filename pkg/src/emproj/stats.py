"""Statistical layer: VAR(1) residual model, log-scale likelihood, fossil
resource constraint, and expert-assessment pseudo-likelihood terms.

Residuals are log(observation) - log(model output), per series per year.
They follow z_t = x_t + eps_t with x_t = A x_{t-1} + w_t, w_t ~ N(0, W),
eps_t ~ N(0, D), and x weakly stationary. The likelihood is evaluated in
linear time with a sequential Gaussian filter; the explicit dense joint
covariance (lag-h blocks A^h Sigma_x, diagonal blocks Sigma_x + D) is kept
as a slow reference implementation for verification.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NonStationaryError, SimulationError
from .model import ModelParams, Trajectory, cumulative_emissions, simulate

STAT_PARAM_NAMES = (
    "a11", "a12", "a13", "a21", "a22", "a23", "a31", "a32", "a33",
    "sigma1", "sigma2", "sigma3", "eps1", "eps2", "eps3",
)

SERIES_NAMES = ("population", "gwp", "emissions")

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class StatParams:
    """VAR(1) coefficient matrix plus diagonal innovation and observation-error
    variances (log-scale squared units)."""

    A: np.ndarray       # (3, 3)
    w_diag: np.ndarray  # innovation variances (sigma1..3)
    d_diag: np.ndarray  # observation-error variances (eps1..3)

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float).reshape(3, 3))
        object.__setattr__(self, "w_diag", np.asarray(self.w_diag, dtype=float).reshape(3))
        object.__setattr__(self, "d_diag", np.asarray(self.d_diag, dtype=float).reshape(3))

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.A))))

    def is_stationary(self) -> bool:
        return self.spectral_radius() < 1.0

    def variances_positive(self) -> bool:
        return bool((self.w_diag > 0.0).all() and (self.d_diag > 0.0).all())

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.A.ravel(), self.w_diag, self.d_diag])

    @classmethod
    def from_vector(cls, v) -> "StatParams":
        v = np.asarray(v, dtype=float)
        if v.shape != (15,):
            raise ValueError(f"expected 15 entries, got {v.shape}")
        return cls(v[:9].reshape(3, 3), v[9:12], v[12:15])


@dataclass
class ObservationSet:
    """Historical annual observations; NaN marks a missing value."""

    years: np.ndarray
    population: np.ndarray  # billions
    gwp: np.ndarray         # trillions 2011US$
    emissions: np.ndarray   # GtC/yr
    source: str = ""

    def __post_init__(self):
        self.years = np.asarray(self.years, dtype=int)
        for name in SERIES_NAMES:
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (np.diff(self.years) > 0).all():
            raise ValueError("observation years must be strictly increasing")
        for name in SERIES_NAMES:
            v = getattr(self, name)
            if v.shape != self.years.shape:
                raise ValueError(f"{name} length does not match years")
            present = ~np.isnan(v)
            if (v[present] <= 0.0).any():
                raise ValueError(f"{name} has non-positive values; "
                                 "log-scale residuals require positivity")

    def __len__(self) -> int:
        return len(self.years)

    def values(self) -> np.ndarray:
        """(T, 3) matrix in series order (population, gwp, emissions)."""
        return np.column_stack([self.population, self.gwp, self.emissions])

    def restrict(self, start_year: int, end_year: int) -> "ObservationSet":
        keep = (self.years >= start_year) & (self.years <= end_year)
        keep &= ~np.isnan(self.values()).all(axis=1)
        return ObservationSet(self.years[keep], self.population[keep],
                              self.gwp[keep], self.emissions[keep], self.source)

    def drop_years(self, years) -> "ObservationSet":
        keep = ~np.isin(self.years, np.asarray(list(years), dtype=int))
        return ObservationSet(self.years[keep], self.population[keep],
                              self.gwp[keep], self.emissions[keep], self.source)

    def subset_years(self, years) -> "ObservationSet":
        keep = np.isin(self.years, np.asarray(list(years), dtype=int))
        return ObservationSet(self.years[keep], self.population[keep],
                              self.gwp[keep], self.emissions[keep], self.source)


def stationary_covariance(A, w_diag) -> np.ndarray:
    """Stationary covariance of x_t = A x_{t-1} + w_t via the Kronecker
    vec-solve vec(Sigma) = (I - A (x) A)^{-1} vec(W)."""
    A = np.asarray(A, dtype=float)
    m = A.shape[0]
    if np.max(np.abs(np.linalg.eigvals(A))) >= 1.0:
        raise NonStationaryError("spectral radius of A is >= 1")
    W = np.diag(np.asarray(w_diag, dtype=float))
    lhs = np.eye(m * m) - np.kron(A, A)
    sigma = np.linalg.solve(lhs, W.ravel()).reshape(m, m)
    return 0.5 * (sigma + sigma.T)


def filter_residual_loglik(stat: StatParams, resid: np.ndarray,
                           mask: np.ndarray) -> float:
    """Linear-time log-likelihood of a (T, 3) residual grid (contiguous years;
    mask marks observed entries). Returns -inf on non-stationary A or
    numerical failure."""
    if not stat.variances_positive() or not stat.is_stationary():
        return -math.inf
    sigma_x = stationary_covariance(stat.A, stat.w_diag)
    resid = np.ascontiguousarray(resid, dtype=float)
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    ll = kernels.filter_loglik(np.ascontiguousarray(stat.A), stat.w_diag,
                               stat.d_diag, sigma_x, resid, mask)
    if not math.isfinite(ll):
        return -math.inf
    return float(ll)


def dense_residual_loglik(stat: StatParams, resid: np.ndarray,
                          mask: np.ndarray) -> float:
    """Reference evaluation through the explicit stacked dense covariance.

    Quadratic memory in the number of years; used to verify the filter.
    """
    if not stat.variances_positive() or not stat.is_stationary():
        return -math.inf
    sigma_x = stationary_covariance(stat.A, stat.w_diag)
    T, m = resid.shape
    powers = [np.eye(m)]
    for _ in range(T - 1):
        powers.append(stat.A @ powers[-1])
    full = np.zeros((T * m, T * m))
    for t in range(T):
        for s in range(T):
            block = powers[t - s] @ sigma_x if t >= s else (powers[s - t] @ sigma_x).T
            full[t * m:(t + 1) * m, s * m:(s + 1) * m] = block
        di = np.arange(t * m, (t + 1) * m)
        full[di, di] += stat.d_diag
    flat_mask = np.asarray(mask, dtype=bool).ravel()
    r = np.asarray(resid, dtype=float).ravel()[flat_mask]
    cov = full[np.ix_(flat_mask, flat_mask)]
    k = len(r)
    chol = np.linalg.cholesky(cov)
    alpha = np.linalg.solve(chol, r)
    logdet = 2.0 * np.log(np.diag(chol)).sum()
    return float(-0.5 * (k * _LOG_2PI + logdet + alpha @ alpha))


def residual_grid(traj: Trajectory, obs: ObservationSet):
    """Log-scale residual grid over the contiguous year range spanned by the
    observations. Returns (resid (T, 3), mask (T, 3)); raises ValueError if
    the observations fall outside the trajectory, SimulationError if the model
    output is non-positive at an observed entry."""
    if len(obs) == 0:
        raise ValueError("empty observation set")
    y0, y1 = int(obs.years[0]), int(obs.years[-1])
    if y0 < traj.start_year or y1 > traj.end_year:
        raise ValueError("observations outside the simulation span")
    T = y1 - y0 + 1
    resid = np.zeros((T, 3))
    mask = np.zeros((T, 3), dtype=bool)
    z = obs.values()
    rows = obs.years - y0
    present = ~np.isnan(z)
    i0 = traj.index(y0)
    model = np.column_stack([traj.population, traj.gwp, traj.emissions])[i0:i0 + T]
    if (model[rows][present] <= 0.0).any():
        raise SimulationError("non-positive model output at an observed year")
    mask[rows] = present
    with np.errstate(divide="ignore", invalid="ignore"):
        logz = np.where(present, np.log(np.where(present, z, 1.0)), 0.0)
        logm = np.log(np.where(model > 0.0, model, 1.0))
    resid[rows] = np.where(present, logz - logm[rows], 0.0)
    return resid, mask


def log_likelihood(model_params: ModelParams, stat_params: StatParams,
                   obs: ObservationSet, dense: bool = False) -> float:
    """Joint Gaussian log-density of the stacked log-scale residuals.

    Missing entries are marginalized out. Simulation domain errors,
    non-positive model outputs at observed years, and non-stationary A all
    yield -inf.
    """
    try:
        traj = simulate(model_params, min(1700, int(obs.years[0])), int(obs.years[-1]))
        resid, mask = residual_grid(traj, obs)
    except SimulationError:
        return -math.inf
    if dense:
        try:
            return dense_residual_loglik(stat_params, resid, mask)
        except np.linalg.LinAlgError:
            return -math.inf
    return filter_residual_loglik(stat_params, resid, mask)


def fossil_constraint_ok(traj: Trajectory, scenario) -> bool:
    """True iff cumulative emissions over the scenario's accounting window
    stay within its fossil resource limit."""
    total = cumulative_emissions(traj, scenario.window_start, scenario.window_end)
    return total <= scenario.fossil_limit_gtc


@dataclass(frozen=True)
class ExpertDensity:
    """Univariate density for one expert assessment, applied to a derived
    scalar (normal only for now). Shipped defaults are placeholders, not
    published values."""

    mean: float
    sd: float
    label: str = ""

    def log_pdf(self, x: float) -> float:
        z = (x - self.mean) / self.sd
        return -0.5 * z * z - math.log(self.sd) - 0.5 * _LOG_2PI

    def to_dict(self) -> dict:
        return {"mean": self.mean, "sd": self.sd, "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "ExpertDensity":
        return cls(float(d["mean"]), float(d["sd"]), str(d.get("label", "")))


def annualized_growth(start_value: float, end_value: float, years: int) -> float:
    """Geometric-average annual growth rate over `years` elapsed years."""
    if years <= 0:
        raise ValueError("years must be positive")
    return (end_value / start_value) ** (1.0 / years) - 1.0


def per_capita_gwp_growth(traj: Trajectory, from_year: int, to_year: int) -> float:
    a = traj.at(from_year)
    b = traj.at(to_year)
    return annualized_growth(a["gwp"] / a["population"],
                             b["gwp"] / b["population"],
                             to_year - from_year)


def expert_assessment_log_density(traj: Trajectory, scenario,
                                  which=None) -> float:
    """Sum of the enabled expert pseudo-likelihood terms.

    `which` is an iterable drawn from {"growth", "emissions"}; defaults to the
    scenario's enabled set. The growth assessment scores the average annual
    per-capita GWP growth rate over 2010-2100; the emissions assessment
    scores annual emissions in 2100.
    """
    enabled = scenario.experts_enabled if which is None else frozenset(which)
    total = 0.0
    if "growth" in enabled:
        if scenario.expert_growth is None:
            raise ValueError("growth assessment enabled but no density configured")
        total += scenario.expert_growth.log_pdf(per_capita_gwp_growth(traj, 2010, 2100))
    if "emissions" in enabled:
        if scenario.expert_emissions is None:
            raise ValueError("emissions assessment enabled but no density configured")
        total += scenario.expert_emissions.log_pdf(traj.at(2100)["emissions"])
    return total
