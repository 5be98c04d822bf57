"""Prior specifications.

Normal and log-normal priors may be specified either by their central 95%
probability interval (lower/upper = 2.5%/97.5% quantiles; for log-normal the
conversion is applied on the log scale) or directly by (mean, sd). Uniform
priors are specified by absolute bounds. Truncated normals renormalize the
density over the truncated support.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConfigError

_Z95 = 1.959963984540054  # standard normal 97.5% quantile
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

FAMILIES = ("normal", "lognormal", "uniform", "truncated-normal")


@dataclass(frozen=True)
class PriorSpec:
    family: str
    lower: float | None = None
    upper: float | None = None
    mean: float | None = None   # log-scale for lognormal
    sd: float | None = None
    truncate_lower: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown prior family {self.family!r}")
        if self.family == "uniform":
            if self.lower is None or self.upper is None:
                raise ConfigError("uniform prior needs lower and upper bounds")
            if not self.lower < self.upper:
                raise ConfigError(
                    f"uniform prior bounds out of order: {self.lower} >= {self.upper}")
        elif self.mean is None or self.sd is None:
            if self.lower is None or self.upper is None:
                raise ConfigError(
                    f"{self.family} prior needs either (mean, sd) or a 95% interval")
            if not self.lower < self.upper:
                raise ConfigError(
                    f"prior interval out of order: {self.lower} >= {self.upper}")

    def _loc_scale(self) -> tuple[float, float]:
        """(mean, sd) of the underlying normal (log scale for lognormal)."""
        if self.mean is not None and self.sd is not None:
            return float(self.mean), float(self.sd)
        lo, hi = float(self.lower), float(self.upper)
        if self.family == "lognormal":
            lo, hi = math.log(lo), math.log(hi)
        return 0.5 * (lo + hi), (hi - lo) / (2.0 * _Z95)

    @property
    def support(self) -> tuple[float, float]:
        if self.family == "uniform":
            return float(self.lower), float(self.upper)
        if self.family == "lognormal":
            return 0.0, math.inf
        if self.family == "truncated-normal":
            a = self.truncate_lower
            return (-math.inf if a is None else float(a)), math.inf
        return -math.inf, math.inf

    def _frozen(self):
        m, s = self._loc_scale()
        if self.family == "uniform":
            return stats.uniform(self.lower, self.upper - self.lower)
        if self.family == "lognormal":
            return stats.lognorm(s=s, scale=math.exp(m))
        if self.family == "truncated-normal":
            a = -math.inf if self.truncate_lower is None else (self.truncate_lower - m) / s
            return stats.truncnorm(a, math.inf, loc=m, scale=s)
        return stats.norm(m, s)

    def log_pdf(self, x: float) -> float:
        if self.family == "uniform":
            if self.lower <= x <= self.upper:
                return -math.log(self.upper - self.lower)
            return -math.inf
        m, s = self._loc_scale()
        if self.family == "lognormal":
            if x <= 0.0:
                return -math.inf
            z = (math.log(x) - m) / s
            return -0.5 * z * z - math.log(s * x) - _LOG_SQRT_2PI
        z = (x - m) / s
        lp = -0.5 * z * z - math.log(s) - _LOG_SQRT_2PI
        if self.family == "truncated-normal" and self.truncate_lower is not None:
            if x < self.truncate_lower:
                return -math.inf
            lp -= math.log(stats.norm.sf((self.truncate_lower - m) / s))
        return lp

    def ppf(self, q):
        return self._frozen().ppf(q)

    def cdf(self, x):
        return self._frozen().cdf(x)

    def mode(self) -> float:
        if self.family == "uniform":
            return 0.5 * (self.lower + self.upper)
        m, s = self._loc_scale()
        if self.family == "lognormal":
            return math.exp(m - s * s)
        if self.family == "truncated-normal" and self.truncate_lower is not None:
            return max(m, float(self.truncate_lower))
        return m

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.uniform(size=size)
        return self.ppf(u)

    def to_dict(self) -> dict:
        out = {"family": self.family}
        for k in ("lower", "upper", "mean", "sd", "truncate_lower"):
            v = getattr(self, k)
            if v is not None:
                out[k] = v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "PriorSpec":
        known = {"family", "lower", "upper", "mean", "sd", "truncate_lower"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown prior fields: {sorted(extra)}")
        if "family" not in d:
            raise ConfigError("prior is missing 'family'")
        return cls(**d)
