import csv
import json

import numpy as np
import pytest

from emproj import io
from emproj.cli import main
from emproj.paramspace import PARAM_NAMES
from emproj.synthetic import generate_observations


@pytest.fixture(scope="module")
def data_csv(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "obs.csv"
    io.write_observations(generate_observations(), p)
    return str(p)


@pytest.fixture(scope="module")
def ensemble_dir(tmp_path_factory, small_ensemble):
    out = tmp_path_factory.mktemp("ens")
    io.persist_ensemble(small_ensemble, out)
    return str(out)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_cli_requires_subcommand():
    with pytest.raises(SystemExit):
        main([])


def test_cli_exit_codes(tmp_path):
    assert main(["map", "--data", "/missing.csv",
                 "--out", str(tmp_path / "a")]) == 3
    assert main(["map", "--data", "/missing.csv", "--scenario", "nope",
                 "--out", str(tmp_path / "b")]) == 2


def test_cli_project_cdf_ssp_diagnose(tmp_path, ensemble_dir):
    out = tmp_path / "proj"
    rc = main(["project", "--scenario", "standard", "--ensemble", ensemble_dir,
               "--draws", "200", "--seed", "3", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out / "quantiles.csv")
    assert rows[0][0] == "year"
    assert rows[1][0] == "1700" and rows[-1][0] == "2100"
    summary = json.loads((out / "projection_summary.json").read_text())
    assert summary["n_draws"] == 200
    lo, hi = summary["emissions_2100_interval_90"]
    assert 0.0 <= lo < hi
    assert (out / "manifest.json").exists()

    out2 = tmp_path / "cdf"
    assert main(["cdf", "--scenario", "standard", "--ensemble", ensemble_dir,
                 "--draws", "200", "--seed", "3", "--out", str(out2)]) == 0
    cdf_rows = read_csv(out2 / "cumulative_cdf.csv")
    probs = [float(r[1]) for r in cdf_rows[1:]]
    assert probs == sorted(probs) and probs[-1] == 1.0

    out3 = tmp_path / "ssp"
    assert main(["ssp-compare", "--scenario", "standard", "--ensemble",
                 ensemble_dir, "--draws", "200", "--seed", "3",
                 "--out", str(out3)]) == 0
    report = json.loads((out3 / "ssp_comparison.json").read_text())
    assert {r["scenario"] for r in report} >= {"SSP5-8.5", "SSP2-4.5"}

    out4 = tmp_path / "diag"
    assert main(["diagnose", "--ensemble", ensemble_dir,
                 "--out", str(out4)]) == 0
    rhat = json.loads((out4 / "gelman_rubin.json").read_text())
    assert set(rhat) == set(PARAM_NAMES)
    assert all(v >= 1.0 or abs(v - 1.0) < 0.2 for v in rhat.values())


def test_cli_calibrate_and_reload(tmp_path, data_csv):
    out = tmp_path / "ens"
    rc = main(["calibrate", "--data", data_csv, "--scenario", "standard",
               "--seed", "5", "--chains", "2", "--iterations", "3000",
               "--burn-in", "1000", "--thin", "10", "--out", str(out)])
    assert rc == 0
    ensemble = io.load_ensemble(out)
    assert ensemble.n_chains == 2
    assert ensemble.chains[0].shape == (200, 32)
    diag = json.loads((out / "diagnostics.json").read_text())
    assert len(diag["acceptance_rates"]) == 2
    assert set(diag["gelman_rubin"]) == set(PARAM_NAMES)


def test_cli_sensitivity(tmp_path):
    out = tmp_path / "sa"
    rc = main(["sensitivity", "--scenario", "standard", "--n", "128",
               "--bootstrap", "100", "--seed", "0", "--out", str(out)])
    assert rc == 0
    rows = read_csv(out / "sobol_indices.csv")
    assert rows[0] == ["parameter", "S1", "S1_lo", "S1_hi",
                       "ST", "ST_lo", "ST_hi"]
    assert len(rows) == 18  # header + 17 model parameters
    sig = json.loads((out / "sobol_significant.json").read_text())
    assert "first_order" in sig and "second_order" in sig
    pairs = read_csv(out / "sobol_pairs.csv")
    assert len(pairs) == 1 + 17 * 16 // 2


def test_cli_sensitivity_rejects_bad_n(tmp_path):
    assert main(["sensitivity", "--scenario", "standard", "--n", "100",
                 "--out", str(tmp_path / "x")]) == 2
