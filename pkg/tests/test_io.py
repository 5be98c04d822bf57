import json
import math

import numpy as np
import pytest

from emproj import io
from emproj.errors import ConfigError, DataError, StorageError
from emproj.scenarios import (PRESET_NAMES, ScenarioConfig, load_scenario,
                              save_scenario)
from emproj.synthetic import generate_observations

HEADER = "year,population_gt_billions,gwp_trillions_2011usd,emissions_gtc_per_yr"


def write(tmp_path, body, name="obs.csv"):
    p = tmp_path / name
    p.write_text(body)
    return p


def test_ingest_round_trip(tmp_path):
    obs = generate_observations(missing={"gwp": (1850, 1870)})
    p = tmp_path / "obs.csv"
    io.write_observations(obs, p)
    back = io.ingest_observations(p)
    assert np.array_equal(back.years, obs.years)
    for name in ("population", "gwp", "emissions"):
        a, b = getattr(back, name), getattr(obs, name)
        assert np.array_equal(np.isnan(a), np.isnan(b))
        assert np.array_equal(a[~np.isnan(a)], b[~np.isnan(b)])


def test_ingest_missing_file():
    with pytest.raises(DataError, match="not found"):
        io.ingest_observations("/no/such/file.csv")


def test_ingest_bad_header(tmp_path):
    p = write(tmp_path, "year,a,b,c\n2000,1,2,3\n")
    with pytest.raises(DataError, match="header"):
        io.ingest_observations(p)


def test_ingest_bad_year(tmp_path):
    p = write(tmp_path, f"{HEADER}\nabc,1,2,3\n")
    with pytest.raises(DataError, match=":2.*year"):
        io.ingest_observations(p)


def test_ingest_duplicate_year(tmp_path):
    p = write(tmp_path, f"{HEADER}\n2000,1,2,3\n2000,1,2,3\n")
    with pytest.raises(DataError, match="duplicate"):
        io.ingest_observations(p)


def test_ingest_unsorted_years(tmp_path):
    p = write(tmp_path, f"{HEADER}\n2001,1,2,3\n2000,1,2,3\n")
    with pytest.raises(DataError, match="increasing"):
        io.ingest_observations(p)


def test_ingest_non_positive_value(tmp_path):
    p = write(tmp_path, f"{HEADER}\n2000,1,-2,3\n")
    with pytest.raises(DataError, match="non-positive"):
        io.ingest_observations(p)


def test_ingest_bad_value(tmp_path):
    p = write(tmp_path, f"{HEADER}\n2000,1,x,3\n")
    with pytest.raises(DataError, match="bad value"):
        io.ingest_observations(p)


def test_ingest_wrong_column_count(tmp_path):
    p = write(tmp_path, f"{HEADER}\n2000,1,2\n")
    with pytest.raises(DataError, match="4 columns"):
        io.ingest_observations(p)


def test_ingest_empty_cells_are_missing(tmp_path):
    p = write(tmp_path, f"{HEADER}\n2000,1,,3\n2001,1,2,\n")
    obs = io.ingest_observations(p)
    assert math.isnan(obs.gwp[0]) and math.isnan(obs.emissions[1])
    assert obs.population[0] == 1.0


def test_ensemble_round_trip(tmp_path, small_ensemble):
    out = tmp_path / "ens"
    io.persist_ensemble(small_ensemble, out)
    back = io.load_ensemble(out)
    assert back.param_names == small_ensemble.param_names
    assert back.n_chains == small_ensemble.n_chains
    for a, b in zip(back.chains, small_ensemble.chains):
        assert np.array_equal(a, b)  # lossless float round-trip
    for a, b in zip(back.log_posts, small_ensemble.log_posts):
        assert np.array_equal(a, b)
    assert back.acceptance_rates == small_ensemble.acceptance_rates
    assert back.scenario_name == small_ensemble.scenario_name


def test_load_ensemble_detects_tampering(tmp_path, small_ensemble):
    out = tmp_path / "ens"
    io.persist_ensemble(small_ensemble, out)
    chain = out / "chain_00.csv"
    chain.write_text(chain.read_text().replace("0", "1", 1))
    with pytest.raises(StorageError, match="checksum"):
        io.load_ensemble(out)


def test_load_ensemble_missing_manifest(tmp_path):
    with pytest.raises(StorageError, match="manifest"):
        io.load_ensemble(tmp_path)


def test_manifest_contents(tmp_path, standard_scenario):
    data = write(tmp_path, f"{HEADER}\n2000,1,2,3\n")
    out_file = io.write_csv(tmp_path / "x.csv", ["a"], [(1.5,)])
    io.write_manifest(tmp_path, scenario=standard_scenario, seed=42,
                      inputs=[data], outputs=[out_file],
                      settings={"command": "test"})
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["seed"] == 42
    assert manifest["scenario"]["name"] == "standard"
    assert "obs.csv" in manifest["input_checksums"]
    assert "x.csv" in manifest["output_checksums"]
    assert manifest["settings"]["command"] == "test"


def test_write_csv_round_trip_floats(tmp_path):
    vals = [0.1 + 0.2, 1e-17, 123456.789012345678]
    p = io.write_csv(tmp_path / "f.csv", ["v"], [(v,) for v in vals])
    got = [float(line) for line in p.read_text().splitlines()[1:]]
    assert got == vals  # exact, not approximate


def test_scenario_presets():
    assert set(PRESET_NAMES) == {"standard", "low_fossil", "high_fossil",
                                 "delayed_zero_carbon", "alt_priors",
                                 "alt_tau4"}
    std = load_scenario("standard")
    assert std.fossil_limit_gtc == 6000.0
    assert (std.window_start, std.window_end) == (1700, 2500)
    low = load_scenario("low_fossil")
    assert low.fossil_limit_gtc == 3000.0
    assert (low.window_start, low.window_end) == (2015, 2500)
    high = load_scenario("high_fossil")
    assert high.fossil_limit_gtc == 10_000.0
    assert (high.window_start, high.window_end) == (2015, 2500)
    delayed = load_scenario("delayed_zero_carbon")
    assert delayed.priors["tau4"].lower == 2100.0
    assert delayed.priors["tau4"].upper == 2400.0
    alt = load_scenario("alt_tau4")
    assert alt.priors["tau4"].upper == 2250.0
    ap = load_scenario("alt_priors")
    assert ap.priors["lam"].family == "lognormal"
    assert ap.priors["As"].family == "normal"


def test_scenario_file_round_trip(tmp_path):
    std = load_scenario("standard")
    path = tmp_path / "custom.json"
    save_scenario(std, path)
    back = load_scenario(str(path))
    assert back.fossil_limit_gtc == std.fossil_limit_gtc
    assert back.priors == std.priors
    assert back.config_hash() == std.config_hash()


def test_scenario_hash_changes_with_content():
    std = load_scenario("standard")
    low = load_scenario("low_fossil")
    assert std.config_hash() != low.config_hash()


def test_load_scenario_unknown():
    with pytest.raises(ConfigError):
        load_scenario("not_a_preset")


def test_scenario_validation():
    std = load_scenario("standard")
    with pytest.raises(ConfigError):
        ScenarioConfig.from_dict({**std.to_dict(),
                                  "fossil_limit": {"gtc": -5.0,
                                                   "window_start": 1700,
                                                   "window_end": 2500}})
