"""Full log-posterior: priors + VAR(1) likelihood + expert terms + hard
constraints. Every constraint violation maps to -inf, never an exception.

PosteriorEvaluator is the fast path used by the optimizer and sampler: it
precomputes the residual grid layout and prior arrays once and then evaluates
a 32-vector per call (one forward simulation to the constraint horizon plus
one filter pass).
"""

import math

import numpy as np

from . import kernels
from .model import ModelParams
from .paramspace import ParamSpace, join_params
from .scenarios import ScenarioConfig
from .stats import ObservationSet, StatParams, stationary_covariance


class PosteriorEvaluator:
    """Evaluates the log-posterior of the 32 sampled parameters for one
    scenario and observation set. Stateless after construction; safe to call
    from many workers."""

    def __init__(self, scenario: ScenarioConfig, obs: ObservationSet):
        self.scenario = scenario
        self.space = ParamSpace(scenario.priors)
        self.obs = obs.restrict(scenario.calibration_start, scenario.calibration_end)
        if len(self.obs) == 0:
            raise ValueError("no observations inside the calibration window")
        self.sim_start = min(scenario.sim_start, int(self.obs.years[0]))
        self.sim_end = max(scenario.constraint_horizon, scenario.report_horizon,
                           int(self.obs.years[-1]))
        self._n_years = self.sim_end - self.sim_start + 1

        y0 = int(self.obs.years[0])
        y1 = int(self.obs.years[-1])
        self._grid_offset = y0 - self.sim_start
        self._grid_len = y1 - y0 + 1
        z = self.obs.values()
        present = ~np.isnan(z)
        rows = self.obs.years - y0
        mask = np.zeros((self._grid_len, 3), dtype=np.uint8)
        mask[rows] = present
        logz = np.zeros((self._grid_len, 3))
        logz[rows] = np.where(present, np.log(np.where(present, z, 1.0)), 0.0)
        self._mask = np.ascontiguousarray(mask)
        self._mask_bool = mask.astype(bool)
        self._logz = logz

        self._win_lo = scenario.window_start - self.sim_start
        self._win_hi = scenario.window_end - self.sim_start

        # reusable simulation buffers (per-process; evaluator instances are
        # not shared across threads mid-call)
        self._buf = [np.empty(self._n_years) for _ in range(6)]

    # -- pieces ----------------------------------------------------------

    def _simulate(self, mp_vec: np.ndarray):
        pop, tfp, cap, lab, gwp, em = self._buf
        status = kernels.simulate_core(mp_vec, self.sim_start, self.sim_end,
                                       pop, tfp, cap, lab, gwp, em)
        if status != 0:
            return None
        return pop, gwp, em

    def log_posterior(self, x: np.ndarray) -> float:
        """Log-posterior density at the constrained-space 32-vector x."""
        x = np.asarray(x, dtype=float)
        mp_vec = x[:17]
        model_params = ModelParams.from_vector(mp_vec)
        if model_params.constraint_violations():
            return -math.inf
        lp = self.space.log_prior(x)
        if lp == -math.inf:
            return -math.inf
        stat = StatParams.from_vector(x[17:])
        if not stat.variances_positive() or not stat.is_stationary():
            return -math.inf
        sim = self._simulate(mp_vec)
        if sim is None:
            return -math.inf
        pop, gwp, em = sim

        if em[self._win_lo:self._win_hi + 1].sum() > self.scenario.fossil_limit_gtc:
            return -math.inf

        g0 = self._grid_offset
        model = np.column_stack([pop, gwp, em])[g0:g0 + self._grid_len]
        if (model[self._mask_bool] <= 0.0).any():
            return -math.inf
        with np.errstate(divide="ignore", invalid="ignore"):
            resid = self._logz - np.where(self._mask_bool, np.log(
                np.where(model > 0.0, model, 1.0)), 0.0)
        sigma_x = stationary_covariance(stat.A, stat.w_diag)
        ll = kernels.filter_loglik(np.ascontiguousarray(stat.A), stat.w_diag,
                                   stat.d_diag, sigma_x,
                                   np.ascontiguousarray(resid), self._mask)
        if not math.isfinite(ll):
            return -math.inf

        le = 0.0
        if self.scenario.experts_enabled:
            le = self._expert_terms(pop, gwp, em)
            if not math.isfinite(le):
                return -math.inf
        return lp + ll + le

    def _expert_terms(self, pop, gwp, em) -> float:
        sc = self.scenario
        total = 0.0
        if "growth" in sc.experts_enabled:
            i0 = 2010 - self.sim_start
            i1 = 2100 - self.sim_start
            rate = ((gwp[i1] / pop[i1]) / (gwp[i0] / pop[i0])) ** (1.0 / 90.0) - 1.0
            total += sc.expert_growth.log_pdf(rate)
        if "emissions" in sc.experts_enabled:
            total += sc.expert_emissions.log_pdf(em[2100 - self.sim_start])
        return total

    # -- transformed-space target used by the sampler ---------------------

    def log_posterior_transformed(self, u: np.ndarray) -> float:
        """Target density in unconstrained coordinates (includes the
        transform Jacobian)."""
        x = self.space.to_constrained(u)
        lp = self.log_posterior(x)
        if lp == -math.inf:
            return -math.inf
        return lp + self.space.log_jacobian(u)


def log_posterior(model_params: ModelParams, stat_params: StatParams,
                  obs: ObservationSet, scenario: ScenarioConfig) -> float:
    """Convenience single-shot evaluation (builds an evaluator per call)."""
    ev = PosteriorEvaluator(scenario, obs)
    return ev.log_posterior(join_params(model_params, stat_params))
