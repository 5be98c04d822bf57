"""Probabilistic baseline CO2 emissions projections: a coupled
population-economy-emissions model calibrated to historical data by MCMC,
scenario-conditional projections through 2100, and Sobol' variance
decomposition of cumulative emissions."""

from .calibrate import ChainConfig, PosteriorEnsemble, gelman_rubin, map_estimate, run_mh
from .kernels import BACKEND
from .model import (ModelParams, Trajectory, carbon_intensity,
                    cumulative_emissions, simulate, technology_shares)
from .posterior import PosteriorEvaluator, log_posterior
from .priors import PriorSpec
from .project import (EmpiricalCDF, ProjectionSummary, cumulative_cdf,
                      posterior_predictive, rate_summaries, ssp_compare)
from .scenarios import ScenarioConfig, load_scenario
from .sensitivity import (SensitivityPlan, SobolResult, emissions_sensitivity,
                          saltelli_sample, sobol_indices)
from .stats import (ExpertDensity, ObservationSet, StatParams,
                    expert_assessment_log_density, fossil_constraint_ok,
                    log_likelihood, stationary_covariance)
from .validate import coverage, make_folds

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ChainConfig", "EmpiricalCDF", "ExpertDensity", "ModelParams",
    "ObservationSet", "PosteriorEnsemble", "PosteriorEvaluator", "PriorSpec",
    "ProjectionSummary", "ScenarioConfig", "SensitivityPlan", "SobolResult",
    "StatParams", "Trajectory", "carbon_intensity", "coverage",
    "cumulative_cdf", "cumulative_emissions", "emissions_sensitivity",
    "expert_assessment_log_density", "fossil_constraint_ok", "gelman_rubin",
    "load_scenario", "log_likelihood", "log_posterior", "make_folds",
    "map_estimate", "posterior_predictive", "rate_summaries", "run_mh",
    "saltelli_sample", "simulate", "sobol_indices", "ssp_compare",
    "stationary_covariance", "technology_shares",
]
