"""Command-line surface tying the pipeline together.

Subcommands: map, calibrate, diagnose, project, cdf, ssp-compare,
sensitivity, validate. Every subcommand writes CSV outputs with a JSON twin
plus a manifest into --out. Exit codes: 0 success, 2 config error,
3 data error, 4 numeric failure.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .calibrate import ChainConfig, gelman_rubin, map_estimate, run_mh
from .errors import ConfigError, DataError, NumericError
from .paramspace import PARAM_NAMES, join_params
from .project import (cumulative_cdf, load_ssp_table, posterior_predictive,
                      rate_summaries, ssp_compare)
from .scenarios import load_scenario
from .sensitivity import SensitivityPlan, emissions_sensitivity, prior_design_distributions
from .validate import coverage, make_folds


def _common(sub, data_required=True):
    sub.add_argument("--scenario", default="standard",
                     help="preset name or scenario JSON path")
    if data_required is not None:
        sub.add_argument("--data", required=data_required,
                         help="observation CSV path")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emproj",
        description="Probabilistic baseline CO2 emissions projections")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("map", help="maximum a posteriori estimate")
    _common(p)
    p.add_argument("--starts", type=int, default=24)

    p = subs.add_parser("calibrate", help="run MCMC chains")
    _common(p)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--iterations", type=int, default=2_000_000)
    p.add_argument("--burn-in", type=int, default=500_000)
    p.add_argument("--thin", type=int, default=100)
    p.add_argument("--experts", choices=["none", "growth", "emissions", "both"],
                   default="none")
    p.add_argument("--map-starts", type=int, default=24,
                   help="prior candidates scored for the MAP chain start")
    p.add_argument("--map-maxiter", type=int, default=4000,
                   help="Nelder-Mead iteration cap per MAP refinement pass")

    p = subs.add_parser("diagnose", help="convergence diagnostics for a stored ensemble")
    _common(p, data_required=None)
    p.add_argument("--ensemble", required=True, help="ensemble directory")

    p = subs.add_parser("project", help="posterior-predictive projection")
    _common(p, data_required=None)
    p.add_argument("--ensemble", required=True)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--noise", choices=["on", "off"], default="on")
    p.add_argument("--quantiles", default="0.05,0.5,0.95")

    p = subs.add_parser("cdf", help="cumulative 2018-2100 emissions CDF")
    _common(p, data_required=None)
    p.add_argument("--ensemble", required=True)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--noise", choices=["on", "off"], default="on")

    p = subs.add_parser("ssp-compare", help="compare projections against SSP references")
    _common(p, data_required=None)
    p.add_argument("--ensemble", required=True)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--noise", choices=["on", "off"], default="on")
    p.add_argument("--ssp-table", default=None, help="override the packaged table")

    p = subs.add_parser("sensitivity", help="Sobol' decomposition of cumulative emissions")
    _common(p, data_required=None)
    p.add_argument("--n", type=int, default=8192, help="base sample size (power of 2)")
    p.add_argument("--bootstrap", type=int, default=10_000)
    p.add_argument("--threshold-first", type=float, default=0.01)
    p.add_argument("--threshold-second", type=float, default=0.10)

    p = subs.add_parser("validate", help="cross-validation coverage")
    _common(p)
    p.add_argument("--folds", type=int, default=50)
    p.add_argument("--holdout-years", type=int, default=39)
    p.add_argument("--fold-iterations", type=int, default=50_000)
    p.add_argument("--fold-chains", type=int, default=2)

    return parser


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _experts_set(flag: str) -> frozenset:
    return {"none": frozenset(), "growth": frozenset({"growth"}),
            "emissions": frozenset({"emissions"}),
            "both": frozenset({"growth", "emissions"})}[flag]


def _cmd_map(args) -> int:
    scenario = load_scenario(args.scenario)
    obs = io.ingest_observations(args.data)
    out = _outdir(args)
    mp, sp = map_estimate(scenario, obs, n_starts=args.starts, seed=args.seed)
    vec = join_params(mp, sp)
    path = io.write_csv(out / "map_estimate.csv", ["parameter", "value"],
                        [(n, float(v)) for n, v in zip(PARAM_NAMES, vec)])
    io.write_json(out / "map_estimate.json",
                  {n: float(v) for n, v in zip(PARAM_NAMES, vec)})
    io.write_manifest(out, scenario=scenario, seed=args.seed,
                      inputs=[args.data], outputs=[path],
                      settings={"command": "map", "starts": args.starts})
    return 0


def _cmd_calibrate(args) -> int:
    scenario = load_scenario(args.scenario).with_experts(_experts_set(args.experts))
    obs = io.ingest_observations(args.data)
    out = _outdir(args)
    config = ChainConfig(n_chains=args.chains, n_iterations=args.iterations,
                         burn_in=args.burn_in, thin=args.thin, seed=args.seed)
    ensemble = run_mh(scenario, obs, config, threads=args.threads,
                      map_starts=args.map_starts, map_maxiter=args.map_maxiter)
    io.persist_ensemble(ensemble, out)
    rhat = gelman_rubin(ensemble) if ensemble.n_chains >= 2 else {}
    io.write_json(out / "diagnostics.json",
                  {"gelman_rubin": rhat,
                   "acceptance_rates": ensemble.acceptance_rates})
    return 0


def _cmd_diagnose(args) -> int:
    ensemble = io.load_ensemble(args.ensemble)
    out = _outdir(args)
    rhat = gelman_rubin(ensemble)
    rows = [(name, float(r)) for name, r in rhat.items()]
    path = io.write_csv(out / "gelman_rubin.csv", ["parameter", "rhat"], rows)
    io.write_json(out / "gelman_rubin.json", rhat)
    io.write_manifest(out, seed=args.seed, outputs=[path],
                      settings={"command": "diagnose",
                                "acceptance_rates": ensemble.acceptance_rates})
    return 0


def _project_summary(args, scenario):
    ensemble = io.load_ensemble(args.ensemble)
    levels = tuple(float(q) for q in getattr(args, "quantiles", "0.05,0.5,0.95").split(","))
    return posterior_predictive(
        ensemble, scenario, n_draws=args.draws, seed=args.seed,
        include_residual_noise=(args.noise == "on"), quantile_levels=levels)


def _cmd_project(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _outdir(args)
    summary = _project_summary(args, scenario)
    outputs = []
    header = ["year"]
    for name in ("emissions", "population", "gwp"):
        header += [f"{name}_q{int(q * 100):02d}" for q in summary.quantile_levels]
    rows = []
    for i, year in enumerate(summary.years):
        row = [int(year)]
        for name in ("emissions", "population", "gwp"):
            row += [float(v) for v in summary.quantiles[name][i]]
        rows.append(row)
    outputs.append(io.write_csv(out / "quantiles.csv", header, rows))
    outputs.append(io.write_csv(out / "emissions_2100_sample.csv",
                                ["emissions_2100_gtc"],
                                [(float(v),) for v in summary.emissions_2100]))
    outputs.append(io.write_csv(out / "cumulative_2018_2100_sample.csv",
                                ["cumulative_gtc"],
                                [(float(v),) for v in summary.cumulative_2018_2100]))
    rates = rate_summaries(summary)
    outputs.append(io.write_csv(
        out / "rate_samples.csv",
        ["per_capita_gwp_growth_rate", "carbon_intensity_decline_rate"],
        list(zip(map(float, rates["growth_rates"]),
                 map(float, rates["intensity_decline_rates"])))))
    io.write_json(out / "projection_summary.json", {
        "scenario": summary.scenario_name,
        "n_draws": summary.n_draws,
        "noise": summary.noise,
        "quantile_levels": list(summary.quantile_levels),
        "emissions_2100_interval_90": [
            float(np.quantile(summary.emissions_2100, 0.05)),
            float(np.quantile(summary.emissions_2100, 0.95))],
        "cumulative_median": float(np.median(summary.cumulative_2018_2100)),
        "rate_excluded_draws": rates["n_excluded"],
    })
    io.write_manifest(out, scenario=scenario, seed=args.seed, outputs=outputs,
                      settings={"command": "project", "draws": args.draws,
                                "noise": args.noise})
    return 0


def _cmd_cdf(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _outdir(args)
    args.quantiles = "0.05,0.5,0.95"
    summary = _project_summary(args, scenario)
    cdf = cumulative_cdf(summary)
    values, probs = cdf.steps()
    path = io.write_csv(out / "cumulative_cdf.csv", ["value_gtc", "probability"],
                        list(zip(map(float, values), map(float, probs))))
    io.write_json(out / "cumulative_cdf_summary.json", {
        "median": float(cdf.quantile(0.5)),
        "q05": float(cdf.quantile(0.05)),
        "q95": float(cdf.quantile(0.95)),
    })
    io.write_manifest(out, scenario=scenario, seed=args.seed, outputs=[path],
                      settings={"command": "cdf", "draws": args.draws,
                                "noise": args.noise})
    return 0


def _cmd_ssp_compare(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _outdir(args)
    args.quantiles = "0.05,0.5,0.95"
    summary = _project_summary(args, scenario)
    table = load_ssp_table(args.ssp_table)
    report = ssp_compare(summary, table)
    header = ["scenario", "annual_2100_gtc", "inside_interval", "interval_low",
              "interval_high", "cumulative_2018_2100_gtc",
              "cumulative_exceedance_prob"]
    path = io.write_csv(out / "ssp_comparison.csv", header,
                        [[r[h] for h in header] for r in report])
    io.write_json(out / "ssp_comparison.json", report)
    io.write_manifest(out, scenario=scenario, seed=args.seed, outputs=[path],
                      settings={"command": "ssp-compare", "draws": args.draws})
    return 0


def _cmd_sensitivity(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _outdir(args)
    plan = SensitivityPlan(
        names=tuple(n for n in prior_design_distributions(scenario)),
        distributions=prior_design_distributions(scenario),
        n=args.n, bootstrap=args.bootstrap, seed=args.seed)
    result = emissions_sensitivity(scenario, plan, threads=args.threads)
    rows = []
    for i, name in enumerate(result.names):
        rows.append([name,
                     float(result.first[i]), float(result.first_ci[i, 0]),
                     float(result.first_ci[i, 1]),
                     float(result.total[i]), float(result.total_ci[i, 0]),
                     float(result.total_ci[i, 1])])
    outputs = [io.write_csv(out / "sobol_indices.csv",
                            ["parameter", "S1", "S1_lo", "S1_hi",
                             "ST", "ST_lo", "ST_hi"], rows)]
    pair_rows = []
    d = len(result.names)
    for i in range(d):
        for j in range(i + 1, d):
            pair_rows.append([result.names[i], result.names[j],
                              float(result.second[i, j]),
                              float(result.second_ci[i, j, 0]),
                              float(result.second_ci[i, j, 1])])
    outputs.append(io.write_csv(out / "sobol_pairs.csv",
                                ["parameter_1", "parameter_2",
                                 "S2", "S2_lo", "S2_hi"], pair_rows))
    io.write_json(out / "sobol_significant.json", {
        "first_order": result.significant_first(args.threshold_first),
        "total_order": result.significant_total(args.threshold_first),
        "second_order": [list(p) for p in
                         result.significant_second(args.threshold_second)],
        "n_failed_evaluations": result.n_failed,
    })
    io.write_manifest(out, scenario=scenario, seed=args.seed, outputs=outputs,
                      settings={"command": "sensitivity", "n": args.n,
                                "bootstrap": args.bootstrap})
    return 0


def _cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    obs = io.ingest_observations(args.data)
    out = _outdir(args)
    folds = make_folds(obs, n_folds=args.folds,
                       holdout_years=args.holdout_years, seed=args.seed)
    config = ChainConfig(n_chains=args.fold_chains,
                         n_iterations=args.fold_iterations,
                         burn_in=args.fold_iterations // 4,
                         thin=10, seed=args.seed)
    report = coverage(scenario, obs, folds, config, threads=args.threads)
    header = ["fold", "series", "year", "observed", "q_low", "q_high", "covered"]
    path = io.write_csv(out / "fold_report.csv", header,
                        [[r[h] for h in header] for r in report.rows])
    io.write_json(out / "coverage.json", {
        "overall": report.overall,
        "per_series": report.per_series,
        "level": report.level,
        "n_folds": report.n_folds,
        "n_failed_folds": report.n_failed_folds,
        "meta": report.meta,
    })
    io.write_manifest(out, scenario=scenario, seed=args.seed,
                      inputs=[args.data], outputs=[path],
                      settings={"command": "validate", "folds": args.folds,
                                "holdout_years": args.holdout_years,
                                "fold_iterations": args.fold_iterations})
    return 0


_COMMANDS = {
    "map": _cmd_map,
    "calibrate": _cmd_calibrate,
    "diagnose": _cmd_diagnose,
    "project": _cmd_project,
    "cdf": _cmd_cdf,
    "ssp-compare": _cmd_ssp_compare,
    "sensitivity": _cmd_sensitivity,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
