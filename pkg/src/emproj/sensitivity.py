"""Variance-based global sensitivity analysis: quasi-random Saltelli sampling
(2n(d+1) model runs for first-, second-, and total-order indices), Saltelli-
2010-style estimators, and percentile bootstrap confidence intervals over the
base sample rows (which preserves the paired design).

Design matrix row layout for base sample size n and d parameters:
    rows [0, n)                 A
    rows [n, 2n)                B
    rows [(2+i)n, (3+i)n)       A with column i from B   (i = 0..d-1)
    rows [(2+d+i)n, (3+d+i)n)   B with column i from A
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import ConfigError, SimulationError
from .model import ModelParams, capped_cumulative_emissions, simulate
from .paramspace import MODEL_PARAM_NAMES
from .priors import PriorSpec
from .scenarios import ScenarioConfig


@dataclass(frozen=True)
class SensitivityPlan:
    names: tuple[str, ...]
    distributions: dict[str, PriorSpec]  # sampling measure per parameter
    n: int = 8192
    bootstrap: int = 10_000
    seed: int = 0
    scramble: bool = True

    def __post_init__(self):
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise ConfigError("base sample size n must be a power of two")
        if len(self.names) < 2:
            raise ConfigError("need at least two parameters")
        if self.bootstrap < 100:
            raise ConfigError("bootstrap replicates must be >= 100")
        missing = [n for n in self.names if n not in self.distributions]
        if missing:
            raise ConfigError(f"missing sampling distributions for {missing}")

    @property
    def d(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return 2 * self.n * (self.d + 1)


@dataclass
class SobolResult:
    names: tuple[str, ...]
    first: np.ndarray          # (d,)
    first_ci: np.ndarray       # (d, 2)
    total: np.ndarray
    total_ci: np.ndarray
    second: np.ndarray         # (d, d), upper triangle
    second_ci: np.ndarray      # (d, d, 2)
    n: int
    bootstrap: int
    seed: int
    variance: float
    n_failed: int = 0
    meta: dict = field(default_factory=dict)

    def significant_first(self, threshold: float = 0.01) -> list[str]:
        out = []
        for i, name in enumerate(self.names):
            if self.first[i] > threshold and self.first_ci[i, 0] > 0.0:
                out.append(name)
        return out

    def significant_total(self, threshold: float = 0.01) -> list[str]:
        out = []
        for i, name in enumerate(self.names):
            if self.total[i] > threshold and self.total_ci[i, 0] > 0.0:
                out.append(name)
        return out

    def significant_second(self, threshold: float = 0.10) -> list[tuple[str, str]]:
        out = []
        d = len(self.names)
        for i in range(d):
            for j in range(i + 1, d):
                if (self.second[i, j] > threshold
                        and self.second_ci[i, j, 0] > 0.0):
                    out.append((self.names[i], self.names[j]))
        return out


def saltelli_sample(plan: SensitivityPlan) -> np.ndarray:
    """Generate the (2n(d+1), d) design matrix via a scrambled Sobol' base
    sequence of dimension 2d and inverse-CDF mapping of each column."""
    d = plan.d
    sampler = qmc.Sobol(d=2 * d, scramble=plan.scramble, seed=plan.seed)
    base = sampler.random_base2(int(math.log2(plan.n)))
    # keep strictly inside (0, 1) so unbounded ppfs stay finite
    eps = np.finfo(float).eps
    base = np.clip(base, eps, 1.0 - eps)
    a_u, b_u = base[:, :d], base[:, d:]
    blocks = [a_u, b_u]
    for i in range(d):
        ab = a_u.copy()
        ab[:, i] = b_u[:, i]
        blocks.append(ab)
    for i in range(d):
        ba = b_u.copy()
        ba[:, i] = a_u[:, i]
        blocks.append(ba)
    u = np.vstack(blocks)
    design = np.empty_like(u)
    for j, name in enumerate(plan.names):
        design[:, j] = plan.distributions[name].ppf(u[:, j])
    return design


def _block_views(plan: SensitivityPlan, y: np.ndarray):
    n, d = plan.n, plan.d
    f_a = y[:n]
    f_b = y[n:2 * n]
    f_ab = [y[(2 + i) * n:(3 + i) * n] for i in range(d)]
    f_ba = [y[(2 + d + i) * n:(3 + d + i) * n] for i in range(d)]
    return f_a, f_b, f_ab, f_ba


def _indices_from_means(mean_of, d):
    """Compute (first, total, second) index arrays from per-column means of
    the product matrix; mean_of maps column name -> scalar or (B,) array."""
    var = (0.5 * (mean_of("a2") + mean_of("b2"))
           - (0.5 * (mean_of("a") + mean_of("b"))) ** 2)
    first = [mean_of(f"s1_{i}") / var for i in range(d)]
    total = [0.5 * mean_of(f"st_{i}") / var for i in range(d)]
    second = {}
    for i in range(d):
        for j in range(i + 1, d):
            vij = (mean_of(f"s2_{i}_{j}") - mean_of("ab")) / var
            second[(i, j)] = vij - first[i] - first[j]
    return var, first, total, second


def sobol_indices(plan: SensitivityPlan, evaluations: np.ndarray) -> SobolResult:
    """Estimate first-, second-, and total-order indices with percentile 95%
    bootstrap intervals. If the output variance is zero the result is the
    defined-degenerate all-zero index set."""
    y = np.asarray(evaluations, dtype=float)
    if y.shape != (plan.n_rows,):
        raise ValueError(f"expected {plan.n_rows} evaluations, got {y.shape}")
    n, d = plan.n, plan.d
    f_a, f_b, f_ab, f_ba = _block_views(plan, y)

    if np.ptp(y) == 0.0:
        zeros = np.zeros(d)
        return SobolResult(plan.names, zeros, np.zeros((d, 2)), zeros.copy(),
                           np.zeros((d, 2)), np.zeros((d, d)),
                           np.zeros((d, d, 2)), n, plan.bootstrap, plan.seed,
                           variance=0.0,
                           meta={"warning": "zero output variance"})

    # per-row product columns; bootstrap means of these give all estimators
    cols = {"a": f_a, "b": f_b, "a2": f_a**2, "b2": f_b**2, "ab": f_a * f_b}
    for i in range(d):
        cols[f"s1_{i}"] = f_b * (f_ab[i] - f_a)
        cols[f"st_{i}"] = (f_a - f_ab[i]) ** 2
    for i in range(d):
        for j in range(i + 1, d):
            cols[f"s2_{i}_{j}"] = f_ba[i] * f_ab[j]
    col_names = list(cols)
    V = np.column_stack([cols[c] for c in col_names])
    col_pos = {c: k for k, c in enumerate(col_names)}

    point_means = V.mean(axis=0)
    var, first, total, second = _indices_from_means(
        lambda c: point_means[col_pos[c]], d)

    # percentile bootstrap over base-sample rows, multinomial-weight form
    rng = np.random.default_rng(plan.seed)
    B = plan.bootstrap
    boot_means = np.empty((B, V.shape[1]))
    chunk = max(1, min(B, int(8e6 // n)))  # cap the counts matrix size
    done = 0
    p = np.full(n, 1.0 / n)
    while done < B:
        take = min(chunk, B - done)
        counts = rng.multinomial(n, p, size=take).astype(float)
        boot_means[done:done + take] = (counts @ V) / n
        done += take
    bvar, bfirst, btotal, bsecond = _indices_from_means(
        lambda c: boot_means[:, col_pos[c]], d)

    first_ci = np.array([np.percentile(bfirst[i], [2.5, 97.5]) for i in range(d)])
    total_ci = np.array([np.percentile(btotal[i], [2.5, 97.5]) for i in range(d)])
    second_pt = np.zeros((d, d))
    second_ci = np.zeros((d, d, 2))
    for (i, j), v in second.items():
        second_pt[i, j] = v
        second_ci[i, j] = np.percentile(bsecond[(i, j)], [2.5, 97.5])
    return SobolResult(plan.names, np.array(first), first_ci, np.array(total),
                       total_ci, second_pt, second_ci, n, B, plan.seed,
                       variance=float(var))


def prior_design_distributions(scenario: ScenarioConfig) -> dict[str, PriorSpec]:
    """Sampling measure for the design: the scenario's marginal priors with
    normal-family entries truncated to their specification intervals so the
    design space stays inside the structural parameter domains."""
    out = {}
    for name in MODEL_PARAM_NAMES:
        p = scenario.priors[name]
        if p.family in ("normal", "lognormal") and p.lower is not None:
            out[name] = _TruncatedBoth(p)
        else:
            out[name] = p
    return out


class _TruncatedBoth:
    """Prior truncated to its [lower, upper] specification interval; only the
    ppf is needed by the design."""

    def __init__(self, prior: PriorSpec):
        self.prior = prior
        self.lo_q = float(prior.cdf(prior.lower))
        self.hi_q = float(prior.cdf(prior.upper))

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return self.prior.ppf(self.lo_q + u * (self.hi_q - self.lo_q))


def default_plan(scenario: ScenarioConfig, n: int = 8192,
                 bootstrap: int = 10_000, seed: int = 0) -> SensitivityPlan:
    return SensitivityPlan(names=MODEL_PARAM_NAMES,
                           distributions=prior_design_distributions(scenario),
                           n=n, bootstrap=bootstrap, seed=seed)


def _evaluate_rows(args):
    rows, scenario = args
    out = np.empty(len(rows))
    failed = 0
    for k, row in enumerate(rows):
        mp = ModelParams.from_vector(row)
        try:
            traj = simulate(mp, scenario.sim_start, scenario.constraint_horizon)
            out[k] = capped_cumulative_emissions(
                traj, scenario.fossil_limit_gtc,
                scenario.window_start, scenario.window_end, 2018, 2100)
        except SimulationError:
            # keep the balanced design: substitute the resource-exhausted cap
            out[k] = scenario.fossil_limit_gtc
            failed += 1
    return out, failed


def emissions_sensitivity(scenario: ScenarioConfig,
                          plan: SensitivityPlan | None = None,
                          threads: int = 1) -> SobolResult:
    """Sobol decomposition of cumulative 2018-2100 emissions over the 17
    structural parameters sampled from the scenario's (truncated) priors.
    Resource-violating runs contribute their fossil-limit-capped cumulative
    value so the Saltelli pairing stays balanced."""
    if plan is None:
        plan = default_plan(scenario)
    design = saltelli_sample(plan)
    if threads > 1:
        chunks = np.array_split(design, threads * 4)
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_evaluate_rows, [(c, scenario) for c in chunks]))
        y = np.concatenate([p[0] for p in parts])
        failed = sum(p[1] for p in parts)
    else:
        y, failed = _evaluate_rows((design, scenario))
    result = sobol_indices(plan, y)
    result.n_failed = failed
    return result
