"""Data ingestion, ensemble persistence, and run manifests.

Observation files are CSV with header
``year,population_gt_billions,gwp_trillions_2011usd,emissions_gtc_per_yr``;
empty cells mean missing. Ensembles persist as one CSV per chain (parameter
columns plus log_posterior) next to a JSON manifest with checksums.
"""

import csv
import hashlib
import json
import math
import os
import time
from pathlib import Path

import numpy as np

from .calibrate import PosteriorEnsemble
from .errors import DataError, StorageError
from .stats import ObservationSet

__version__ = "0.1.0"

OBS_COLUMNS = ("year", "population_gt_billions", "gwp_trillions_2011usd",
               "emissions_gtc_per_yr")


def ingest_observations(path) -> ObservationSet:
    """Parse an observation CSV; validates positivity, strictly increasing
    years, and reports malformed rows with their line number."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"observation file not found: {path}")
    years, pop, gwp, em = [], [], [], []
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [h.strip() for h in header] != list(OBS_COLUMNS):
            raise DataError(f"{path}: expected header {','.join(OBS_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                year = int(row[0])
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad year {row[0]!r}") from None
            if year in seen:
                raise DataError(f"{path}:{lineno}: duplicate year {year}")
            seen.add(year)
            vals = []
            for col, cell in zip(OBS_COLUMNS[1:], row[1:]):
                cell = cell.strip()
                if not cell:
                    vals.append(math.nan)
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: bad value {cell!r} "
                                    f"in column {col}") from None
                if v <= 0.0 or not math.isfinite(v):
                    raise DataError(f"{path}:{lineno}: non-positive value {v} "
                                    f"in column {col}")
                vals.append(v)
            years.append(year)
            pop.append(vals[0])
            gwp.append(vals[1])
            em.append(vals[2])
    if not years:
        raise DataError(f"{path}: no data rows")
    order = np.argsort(years)
    if not (order == np.arange(len(years))).all():
        raise DataError(f"{path}: years must be strictly increasing")
    try:
        return ObservationSet(np.array(years), np.array(pop), np.array(gwp),
                              np.array(em), source=str(path))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_observations(obs: ObservationSet, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(OBS_COLUMNS)
        for i, year in enumerate(obs.years):
            row = [str(int(year))]
            for v in (obs.population[i], obs.gwp[i], obs.emissions[i]):
                row.append("" if math.isnan(v) else _fmt(v))
            writer.writerow(row)


def _fmt(x: float) -> str:
    """Shortest representation that round-trips exactly."""
    return repr(float(x))


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def file_checksums(paths) -> dict[str, str]:
    return {Path(p).name: _sha256(Path(p)) for p in paths}


def write_manifest(out_dir, *, scenario=None, seed=None, inputs=(),
                   outputs=(), settings=None, extra=None) -> Path:
    """Write the run manifest JSON describing one output directory."""
    out_dir = Path(out_dir)
    # honor SOURCE_DATE_EPOCH for reproducible-output comparisons
    created = int(os.environ.get("SOURCE_DATE_EPOCH", 0) or time.time())
    manifest = {
        "tool_version": __version__,
        "created_unix": created,
        "seed": seed,
        "settings": settings or {},
        "input_checksums": file_checksums(inputs),
        "output_checksums": file_checksums(outputs),
    }
    if scenario is not None:
        manifest["scenario"] = {"name": scenario.name,
                                "config_hash": scenario.config_hash()}
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def persist_ensemble(ensemble: PosteriorEnsemble, out_dir) -> list[Path]:
    """One CSV per chain (parameter columns + log_posterior) plus a manifest.
    Round-trips losslessly through load_ensemble."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    chain_paths = []
    header = list(ensemble.param_names) + ["log_posterior"]
    for ci, (chain, lps) in enumerate(zip(ensemble.chains, ensemble.log_posts)):
        path = out_dir / f"chain_{ci:02d}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row, lp in zip(chain, lps):
                writer.writerow([_fmt(v) for v in row] + [_fmt(lp)])
        chain_paths.append(path)
    write_manifest(
        out_dir, seed=ensemble.seed, outputs=chain_paths,
        settings=ensemble.meta,
        extra={
            "kind": "posterior_ensemble",
            "scenario_name": ensemble.scenario_name,
            "param_names": list(ensemble.param_names),
            "n_chains": ensemble.n_chains,
            "n_samples_per_chain": len(ensemble.chains[0]),
            "acceptance_rates": ensemble.acceptance_rates,
        })
    return chain_paths


def load_ensemble(in_dir) -> PosteriorEnsemble:
    in_dir = Path(in_dir)
    mpath = in_dir / "manifest.json"
    if not mpath.exists():
        raise StorageError(f"no manifest.json in {in_dir}")
    with open(mpath) as fh:
        manifest = json.load(fh)
    if manifest.get("kind") != "posterior_ensemble":
        raise StorageError(f"{in_dir} does not hold a posterior ensemble")
    names = tuple(manifest["param_names"])
    n_chains = int(manifest["n_chains"])
    n_samples = int(manifest["n_samples_per_chain"])
    chains, log_posts = [], []
    for ci in range(n_chains):
        path = in_dir / f"chain_{ci:02d}.csv"
        if not path.exists():
            raise StorageError(f"missing chain file {path}")
        recorded = manifest["output_checksums"].get(path.name)
        if recorded and _sha256(path) != recorded:
            raise StorageError(f"checksum mismatch for {path}")
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        data = np.atleast_2d(data)
        if data.shape != (n_samples, len(names) + 1) or np.isnan(data).any():
            raise StorageError(f"{path}: shape/content mismatch "
                               f"(expected {n_samples} x {len(names) + 1})")
        chains.append(data[:, :-1])
        log_posts.append(data[:, -1])
    return PosteriorEnsemble(
        param_names=names, chains=chains, log_posts=log_posts,
        acceptance_rates=list(manifest.get("acceptance_rates", [])),
        scenario_name=manifest.get("scenario_name", ""),
        seed=manifest.get("seed") or 0,
        meta=manifest.get("settings", {}))


def write_csv(path, header, rows) -> Path:
    """Small deterministic CSV writer; floats use round-trip formatting."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return path


def write_json(path, payload) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
