"""Scenario configuration: fossil resource limits, prior tables, expert
assessment settings, and simulation horizons.

Six presets ship with the package:
    standard            6000 GtC over 1700-2500, zero-carbon half-saturation
                        prior ~ N(2100, 25.5) truncated below at 2020
    low_fossil          3000 GtC counted over 2015-2500
    high_fossil         10000 GtC counted over 2015-2500
    delayed_zero_carbon standard resources, half-saturation prior with 95%
                        mass 2100-2400 (truncated at 2020)
    alt_priors          fatter-tailed priors for lam, s, As, pi
    alt_tau4            half-saturation prior interval widened to 2050-2250

Scenario files are JSON with sections: fossil_limit, window, priors,
experts, horizons.
"""

import hashlib
import json
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .paramspace import PARAM_NAMES
from .priors import PriorSpec
from .stats import ExpertDensity

PRESET_NAMES = ("standard", "low_fossil", "high_fossil",
                "delayed_zero_carbon", "alt_priors", "alt_tau4")


def _default_priors() -> dict[str, PriorSpec]:
    """Baseline prior table (normal/log-normal entries specified by their
    central 95% intervals unless (mean, sd) given)."""
    p = {
        "psi1": PriorSpec("normal", 0.0001, 0.15),
        "psi2": PriorSpec("uniform", 0.0, 50.0),
        "psi3": PriorSpec("normal", 6.9, 14.4),
        "P0": PriorSpec("normal", 0.3, 0.9),
        "lam": PriorSpec("normal", 0.6, 0.8),
        "s": PriorSpec("normal", 0.22, 0.26),
        "delta": PriorSpec("uniform", 0.01, 0.14),
        "alpha": PriorSpec("normal", 0.0007, 0.0212),
        "As": PriorSpec("uniform", 5.3, 16.11),
        "pi": PriorSpec("normal", 0.62, 0.66),
        "A0": PriorSpec("uniform", 0.0, 3.0),
        "rho2": PriorSpec("normal", 0.0, 0.75),
        "rho3": PriorSpec("normal", 0.0, 0.75),
        "tau2": PriorSpec("uniform", 1700.0, 2100.0),
        "tau3": PriorSpec("uniform", 1700.0, 2100.0),
        "tau4": PriorSpec("truncated-normal", 2050.0, 2150.0, truncate_lower=2020.0),
        "kappa": PriorSpec("uniform", 0.005, 0.2),
    }
    for i in range(3):
        for j in range(3):
            if i == j:
                p[f"a{i + 1}{j + 1}"] = PriorSpec("normal", 0.0, 1.0)
            else:
                p[f"a{i + 1}{j + 1}"] = PriorSpec("normal", -1.0, 1.0)
    for k in range(1, 4):
        p[f"sigma{k}"] = PriorSpec("lognormal", mean=-1.0, sd=1.0)
        p[f"eps{k}"] = PriorSpec("lognormal", mean=-1.0, sd=1.0)
    return p


# Placeholder expert densities; the published assessments are external
# sources, so real analyses should configure these explicitly.
_PLACEHOLDER_GROWTH = ExpertDensity(0.02, 0.012, "placeholder growth assessment")
_PLACEHOLDER_EMISSIONS = ExpertDensity(15.0, 10.0, "placeholder 2100-emissions assessment")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    fossil_limit_gtc: float
    window_start: int
    window_end: int
    priors: dict[str, PriorSpec] = field(default_factory=_default_priors)
    expert_growth: ExpertDensity | None = _PLACEHOLDER_GROWTH
    expert_emissions: ExpertDensity | None = _PLACEHOLDER_EMISSIONS
    experts_enabled: frozenset[str] = frozenset()
    sim_start: int = 1700
    constraint_horizon: int = 2500
    report_horizon: int = 2100
    calibration_start: int = 1820
    calibration_end: int = 2014

    def __post_init__(self):
        if self.fossil_limit_gtc <= 0:
            raise ConfigError("fossil limit must be positive")
        if self.window_end < self.window_start:
            raise ConfigError("accounting window end precedes its start")
        unknown = self.experts_enabled - {"growth", "emissions"}
        if unknown:
            raise ConfigError(f"unknown expert toggles: {sorted(unknown)}")
        missing = [n for n in PARAM_NAMES if n not in self.priors]
        if missing:
            raise ConfigError(f"missing priors for parameters: {missing}")
        extra = [n for n in self.priors if n not in PARAM_NAMES]
        if extra:
            raise ConfigError(f"unknown parameter names in priors: {extra}")

    def with_experts(self, which: frozenset[str] | set[str]) -> "ScenarioConfig":
        return replace(self, experts_enabled=frozenset(which))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "fossil_limit": {"limit_gtc": self.fossil_limit_gtc,
                             "window_start": self.window_start,
                             "window_end": self.window_end},
            "priors": {n: self.priors[n].to_dict() for n in PARAM_NAMES},
            "experts": {
                "enabled": sorted(self.experts_enabled),
                "growth": None if self.expert_growth is None
                else self.expert_growth.to_dict(),
                "emissions": None if self.expert_emissions is None
                else self.expert_emissions.to_dict(),
            },
            "horizons": {"sim_start": self.sim_start,
                         "constraint_horizon": self.constraint_horizon,
                         "report_horizon": self.report_horizon,
                         "calibration_start": self.calibration_start,
                         "calibration_end": self.calibration_end},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        try:
            fossil = d["fossil_limit"]
            priors = {n: PriorSpec.from_dict(v) for n, v in d["priors"].items()}
            experts = d.get("experts", {})
            horizons = d.get("horizons", {})
            return cls(
                name=str(d.get("name", "custom")),
                fossil_limit_gtc=float(fossil["limit_gtc"]),
                window_start=int(fossil["window_start"]),
                window_end=int(fossil["window_end"]),
                priors=priors,
                expert_growth=(None if experts.get("growth") is None
                               else ExpertDensity.from_dict(experts["growth"])),
                expert_emissions=(None if experts.get("emissions") is None
                                  else ExpertDensity.from_dict(experts["emissions"])),
                experts_enabled=frozenset(experts.get("enabled", [])),
                **{k: int(horizons[k]) for k in horizons},
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid scenario config: {exc}") from exc

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _preset(name: str) -> ScenarioConfig:
    if name == "standard":
        return ScenarioConfig("standard", 6000.0, 1700, 2500)
    if name == "low_fossil":
        return ScenarioConfig("low_fossil", 3000.0, 2015, 2500)
    if name == "high_fossil":
        return ScenarioConfig("high_fossil", 10000.0, 2015, 2500)
    if name == "delayed_zero_carbon":
        priors = _default_priors()
        priors["tau4"] = PriorSpec("truncated-normal", 2100.0, 2400.0,
                                   truncate_lower=2020.0)
        return ScenarioConfig("delayed_zero_carbon", 6000.0, 1700, 2500, priors=priors)
    if name == "alt_priors":
        priors = _default_priors()
        priors["lam"] = PriorSpec("lognormal", 0.6, 0.8)
        priors["s"] = PriorSpec("lognormal", 0.22, 0.26)
        priors["As"] = PriorSpec("normal", 5.3, 16.11)
        priors["pi"] = PriorSpec("lognormal", 0.62, 0.66)
        return ScenarioConfig("alt_priors", 6000.0, 1700, 2500, priors=priors)
    if name == "alt_tau4":
        priors = _default_priors()
        priors["tau4"] = PriorSpec("truncated-normal", 2050.0, 2250.0,
                                   truncate_lower=2020.0)
        return ScenarioConfig("alt_tau4", 6000.0, 1700, 2500, priors=priors)
    raise ConfigError(f"unknown scenario preset {name!r}")


def load_scenario(name_or_path: str) -> ScenarioConfig:
    """Resolve a preset name or load a JSON scenario file."""
    if name_or_path in PRESET_NAMES:
        return _preset(name_or_path)
    try:
        with open(name_or_path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(
            f"{name_or_path!r} is neither a preset ({', '.join(PRESET_NAMES)}) "
            "nor a readable scenario file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed scenario file {name_or_path}: {exc}") from exc
    return ScenarioConfig.from_dict(data)


def save_scenario(scenario: ScenarioConfig, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(scenario.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
