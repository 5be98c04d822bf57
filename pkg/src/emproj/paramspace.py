"""Canonical sampled-parameter ordering, prior evaluation, and the
unconstrained reparameterization used by the sampler and optimizer.

The 32 sampled parameters are the 17 structural model parameters followed by
the 15 statistical parameters (9 VAR coefficients, 3 innovation variances,
3 observation-error variances).

Transforms map each parameter to an unconstrained coordinate: log for
positive-support parameters, logit for doubly-bounded ones, shifted log for
lower-truncated ones, identity otherwise. The transform kind is derived from
the parameter's prior (uniform -> logit over its bounds, log-normal -> log,
truncated normal -> shifted log) with a fixed fallback table for plain-normal
priors whose parameter has a structurally bounded domain.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit
from scipy.stats import norm

from .errors import ConfigError
from .model import MODEL_PARAM_NAMES, ModelParams
from .priors import PriorSpec
from .stats import STAT_PARAM_NAMES, StatParams

PARAM_NAMES: tuple[str, ...] = MODEL_PARAM_NAMES + STAT_PARAM_NAMES
N_PARAMS = len(PARAM_NAMES)

_LOG_2PI = math.log(2.0 * math.pi)

_FAMILY_CODES = {"normal": 0, "lognormal": 1, "uniform": 2, "truncated-normal": 3}

# transform kinds
_IDENTITY, _LOG, _LOGIT, _SHIFTED_LOG = 0, 1, 2, 3

# structural domains for parameters whose priors are plain normals
_NORMAL_TRANSFORM_TABLE = {
    "psi1": (_LOG, 0.0, math.inf),
    "psi3": (_LOG, 0.0, math.inf),
    "P0": (_LOG, 0.0, math.inf),
    "lam": (_LOGIT, 0.0, 1.0),
    "s": (_LOGIT, 0.0, 1.0),
    "pi": (_LOGIT, 0.0, 1.0),
    "alpha": (_LOG, 0.0, math.inf),
    "rho2": (_LOG, 0.0, math.inf),
    "rho3": (_LOG, 0.0, math.inf),
}


def split_vector(x: np.ndarray) -> tuple[ModelParams, StatParams]:
    x = np.asarray(x, dtype=float)
    return ModelParams.from_vector(x[:17]), StatParams.from_vector(x[17:])


def join_params(model_params: ModelParams, stat_params: StatParams) -> np.ndarray:
    return np.concatenate([model_params.to_vector(), stat_params.to_vector()])


def _transform_for(name: str, prior: PriorSpec) -> tuple[int, float, float]:
    if prior.family == "uniform":
        return _LOGIT, float(prior.lower), float(prior.upper)
    if prior.family == "lognormal":
        return _LOG, 0.0, math.inf
    if prior.family == "truncated-normal":
        if prior.truncate_lower is None:
            return _IDENTITY, -math.inf, math.inf
        return _SHIFTED_LOG, float(prior.truncate_lower), math.inf
    return _NORMAL_TRANSFORM_TABLE.get(name, (_IDENTITY, -math.inf, math.inf))


@dataclass(frozen=True)
class _PriorArrays:
    code: np.ndarray
    m: np.ndarray
    s: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    renorm: np.ndarray  # log normalization correction for truncated normals


class ParamSpace:
    """Vectorized prior density and transform machinery over the canonical
    32-parameter ordering."""

    def __init__(self, priors: dict[str, PriorSpec]):
        missing = [n for n in PARAM_NAMES if n not in priors]
        if missing:
            raise ConfigError(f"missing priors for parameters: {missing}")
        extra = [n for n in priors if n not in PARAM_NAMES]
        if extra:
            raise ConfigError(f"unknown parameter names in priors: {extra}")
        self.priors = {n: priors[n] for n in PARAM_NAMES}

        code = np.empty(N_PARAMS, dtype=int)
        m = np.zeros(N_PARAMS)
        s = np.ones(N_PARAMS)
        lo = np.full(N_PARAMS, -np.inf)
        hi = np.full(N_PARAMS, np.inf)
        renorm = np.zeros(N_PARAMS)
        tkind = np.empty(N_PARAMS, dtype=int)
        ta = np.zeros(N_PARAMS)
        tb = np.zeros(N_PARAMS)
        for i, name in enumerate(PARAM_NAMES):
            p = self.priors[name]
            code[i] = _FAMILY_CODES[p.family]
            if p.family == "uniform":
                lo[i], hi[i] = p.lower, p.upper
            else:
                m[i], s[i] = p._loc_scale()
                if p.family == "lognormal":
                    lo[i] = 0.0
                elif p.family == "truncated-normal" and p.truncate_lower is not None:
                    lo[i] = p.truncate_lower
                    # renormalize by the retained mass P(X > truncate_lower)
                    renorm[i] = math.log(norm.sf((p.truncate_lower - m[i]) / s[i]))
            tkind[i], ta[i], tb[i] = _transform_for(name, p)
        self._arr = _PriorArrays(code, m, s, lo, hi, renorm)
        self._tkind = tkind
        self._ta = ta
        self._tb = tb
        self._is_id = tkind == _IDENTITY
        self._is_log = tkind == _LOG
        self._is_logit = tkind == _LOGIT
        self._is_shift = tkind == _SHIFTED_LOG
        self._log_width = np.where(self._is_logit,
                                   np.log(np.where(self._is_logit, tb - ta, 1.0)), 0.0)

    # ---- prior density -------------------------------------------------

    def log_prior(self, x: np.ndarray) -> float:
        """Sum of per-parameter prior log-densities; -inf outside support."""
        a = self._arr
        x = np.asarray(x, dtype=float)
        if (x < a.lo).any() or (x > a.hi).any() or (x[a.code == 1] <= 0.0).any():
            return -math.inf
        lp = 0.0
        normal_like = a.code != 2
        xv = x[normal_like]
        mv = a.m[normal_like]
        sv = a.s[normal_like]
        logn = a.code[normal_like] == 1
        val = np.where(logn, np.log(np.where(xv > 0, xv, 1.0)), xv)
        z = (val - mv) / sv
        terms = -0.5 * z * z - np.log(sv) - 0.5 * _LOG_2PI
        terms = terms - np.where(logn, val, 0.0)  # lognormal 1/x factor
        terms = terms - a.renorm[normal_like]
        lp += terms.sum()
        unif = a.code == 2
        lp += -np.log(a.hi[unif] - a.lo[unif]).sum()
        return float(lp)

    def sample_prior(self, rng: np.random.Generator) -> np.ndarray:
        return np.array([self.priors[n].ppf(rng.uniform()) for n in PARAM_NAMES])

    def prior_modes(self) -> np.ndarray:
        return np.array([self.priors[n].mode() for n in PARAM_NAMES])

    # ---- transforms ----------------------------------------------------

    def to_unconstrained(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = np.array(x)
        # Support-boundary inputs map to infinities; callers check
        # finiteness, so suppress the numpy warnings here.
        with np.errstate(divide="ignore", invalid="ignore"):
            u[self._is_log] = np.log(x[self._is_log])
            il = self._is_logit
            u[il] = logit((x[il] - self._ta[il]) / (self._tb[il] - self._ta[il]))
            sh = self._is_shift
            u[sh] = np.log(x[sh] - self._ta[sh])
        return u

    def to_constrained(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        x = np.array(u)
        x[self._is_log] = np.exp(u[self._is_log])
        il = self._is_logit
        x[il] = self._ta[il] + (self._tb[il] - self._ta[il]) * expit(u[il])
        sh = self._is_shift
        x[sh] = self._ta[sh] + np.exp(u[sh])
        return x

    def log_jacobian(self, u: np.ndarray) -> float:
        """log |dx/du| summed over parameters."""
        u = np.asarray(u, dtype=float)
        total = float(u[self._is_log | self._is_shift].sum())
        ul = u[self._is_logit]
        total += float((self._log_width[self._is_logit]
                        - np.logaddexp(0.0, ul) - np.logaddexp(0.0, -ul)).sum())
        return total

    def jacobian_diag(self, u: np.ndarray) -> np.ndarray:
        """Per-parameter dx/du."""
        u = np.asarray(u, dtype=float)
        j = np.ones(N_PARAMS)
        le = self._is_log | self._is_shift
        j[le] = np.exp(u[le])
        il = self._is_logit
        t = expit(u[il])
        j[il] = (self._tb[il] - self._ta[il]) * t * (1.0 - t)
        return j
