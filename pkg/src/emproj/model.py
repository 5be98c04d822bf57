"""Deterministic forward simulation of the coupled population-economy-emissions
model at annual resolution.

State recursion (all right-hand sides use lagged values only):
    A_t = A_{t-1} + alpha A_{t-1} (1 - A_{t-1}/As)
    K_t = (1 - delta) K_{t-1} + s Q_{t-1}
    P_t = P_{t-1} [1 + psi1 (y_{t-1}/(psi2 + y_{t-1})) ((psi3 - P_{t-1})/psi3)]
    L_t = pi P_t
    Q_t = A_t L_t^lam K_t^(1-lam)
    C_t = Q_t phi_t
with y = Q/P (trillions$/billions = thousand $ per capita) and phi a
share-weighted mix of technology carbon intensities. Units line up so that
Q [trillion $] * phi [kgC/$] = C [GtC/yr].
"""

from dataclasses import dataclass, fields

import numpy as np

from . import kernels
from .errors import SimulationError

MODEL_PARAM_NAMES = (
    "psi1", "psi2", "psi3", "P0", "lam", "s", "delta", "alpha", "As",
    "pi", "A0", "rho2", "rho3", "tau2", "tau3", "tau4", "kappa",
)


@dataclass(frozen=True)
class ModelParams:
    """The 17 structural parameters of the coupled model."""

    psi1: float   # population growth rate, 1/yr
    psi2: float   # income half-saturation, thousand 2011US$/capita/yr
    psi3: float   # population carrying capacity, billions
    P0: float     # population in 1700, billions
    lam: float    # output elasticity of labor, in (0, 1)
    s: float      # savings rate, in (0, 1)
    delta: float  # capital depreciation rate, 1/yr; must be < s
    alpha: float  # TFP growth rate, 1/yr
    As: float     # TFP saturation level
    pi: float     # labor force participation rate, in (0, 1)
    A0: float     # TFP in 1700
    rho2: float   # carbon intensity of technology 2, kgC/2011US$
    rho3: float   # carbon intensity of technology 3, kgC/2011US$ (rho2 >= rho3 >= 0)
    tau2: float   # half-saturation year of technology 2
    tau3: float   # half-saturation year of technology 3
    tau4: float   # half-saturation year of technology 4
    kappa: float  # technology penetration rate, 1/yr

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in MODEL_PARAM_NAMES], dtype=float)

    @classmethod
    def from_vector(cls, v) -> "ModelParams":
        v = np.asarray(v, dtype=float)
        if v.shape != (len(MODEL_PARAM_NAMES),):
            raise ValueError(f"expected {len(MODEL_PARAM_NAMES)} entries, got {v.shape}")
        return cls(**dict(zip(MODEL_PARAM_NAMES, (float(x) for x in v))))

    def constraint_violations(self) -> list[str]:
        """Hard structural constraints; an empty list means admissible."""
        out = []
        if not self.delta < self.s:
            out.append("delta < s")
        if not self.rho2 >= self.rho3:
            out.append("rho2 >= rho3")
        if not self.rho3 >= 0.0:
            out.append("rho3 >= 0")
        for name in ("psi1", "psi2", "psi3", "P0", "alpha", "A0", "As",
                     "kappa", "delta"):
            if not getattr(self, name) > 0.0:
                out.append(f"{name} > 0")
        for name in ("lam", "s", "pi"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                out.append(f"{name} in (0, 1)")
        if not self.tau2 <= self.tau3 <= self.tau4:
            out.append("tau2 <= tau3 <= tau4")
        return out


@dataclass(frozen=True)
class Trajectory:
    """Annual series produced by one forward simulation."""

    start_year: int
    population: np.ndarray  # billions
    gwp: np.ndarray         # trillions 2011US$
    emissions: np.ndarray   # GtC/yr
    tfp: np.ndarray
    capital: np.ndarray
    labor: np.ndarray

    def __len__(self) -> int:
        return len(self.population)

    @property
    def end_year(self) -> int:
        return self.start_year + len(self) - 1

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.start_year, self.end_year + 1)

    def index(self, year: int) -> int:
        if not self.start_year <= year <= self.end_year:
            raise ValueError(f"year {year} outside trajectory span "
                             f"[{self.start_year}, {self.end_year}]")
        return int(year) - self.start_year

    def at(self, year: int) -> dict:
        i = self.index(year)
        return {
            "population": float(self.population[i]),
            "gwp": float(self.gwp[i]),
            "emissions": float(self.emissions[i]),
        }


def technology_shares(params: ModelParams, year) -> np.ndarray:
    """Shares of the four technologies at `year` (scalar or array).

    The middle shares are logistic differences, so the four terms sum to one
    algebraically; negative differences (possible when the tau ordering is
    violated) are clamped to zero and the shares renormalized.

    Returns an array with shape (..., 4).
    """
    year = np.asarray(year, dtype=float)
    l2 = _logistic(params.kappa * (year - params.tau2))
    l3 = _logistic(params.kappa * (year - params.tau3))
    l4 = _logistic(params.kappa * (year - params.tau4))
    g = np.stack([1.0 - l2, l2 - l3, l3 - l4, l4], axis=-1)
    np.clip(g, 0.0, None, out=g)
    g /= g.sum(axis=-1, keepdims=True)
    return g


def _logistic(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))


def carbon_intensity(params: ModelParams, year):
    """Carbon intensity phi(year) in kgC per 2011US$ (technologies 1 and 4
    are zero-carbon)."""
    g = technology_shares(params, year)
    return g[..., 1] * params.rho2 + g[..., 2] * params.rho3


def simulate(params: ModelParams, start_year: int, end_year: int) -> Trajectory:
    """Run the annual recursion from start_year to end_year inclusive.

    Initialization at start_year: P = P0, A = A0, L = pi P0,
    K = (s A0 / delta)^(1/lam) L (capital steady state), with Q and C from
    the static equations.

    Raises SimulationError if any state becomes non-finite.
    """
    if start_year > end_year:
        raise ValueError("start_year must be <= end_year")
    n = int(end_year) - int(start_year) + 1
    pop = np.empty(n)
    tfp = np.empty(n)
    capital = np.empty(n)
    labor = np.empty(n)
    gwp = np.empty(n)
    emissions = np.empty(n)
    status = kernels.simulate_core(params.to_vector(), int(start_year), int(end_year),
                                   pop, tfp, capital, labor, gwp, emissions)
    if status != 0:
        raise SimulationError("forward simulation produced a non-finite state")
    return Trajectory(int(start_year), pop, gwp, emissions, tfp, capital, labor)


def cumulative_emissions(traj: Trajectory, from_year: int, to_year: int) -> float:
    """Sum of annual emissions over the inclusive [from_year, to_year] window."""
    if from_year > to_year:
        raise ValueError("from_year must be <= to_year")
    i = traj.index(from_year)
    j = traj.index(to_year)
    return float(traj.emissions[i:j + 1].sum())


def capped_cumulative_emissions(traj: Trajectory, limit: float,
                                window_start: int, window_end: int,
                                from_year: int, to_year: int) -> float:
    """Cumulative emissions over [from_year, to_year] with the trajectory's
    emissions truncated once the cumulative total over the resource accounting
    window [window_start, window_end] reaches `limit`.

    Used by the sensitivity design so that resource-violating samples map to
    the capped value instead of being discarded.
    """
    ws = traj.index(max(window_start, traj.start_year))
    we = traj.index(min(window_end, traj.end_year))
    em = traj.emissions[ws:we + 1].copy()
    cum = np.cumsum(em)
    over = cum > limit
    if over.any():
        first = int(np.argmax(over))
        em[first] -= cum[first] - limit  # partial year up to the limit
        em[first + 1:] = 0.0
    a = max(traj.index(from_year) - ws, 0)
    b = traj.index(to_year) - ws
    return float(em[a:b + 1].sum())


assert tuple(f.name for f in fields(ModelParams)) == MODEL_PARAM_NAMES
