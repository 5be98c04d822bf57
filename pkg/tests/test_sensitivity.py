import math

import numpy as np
import pytest

from emproj.errors import ConfigError
from emproj.priors import PriorSpec
from emproj.scenarios import load_scenario
from emproj.sensitivity import (SensitivityPlan, default_plan,
                                emissions_sensitivity,
                                prior_design_distributions, saltelli_sample,
                                sobol_indices)


def make_plan(dists, n=1024, bootstrap=200, seed=0):
    return SensitivityPlan(names=tuple(dists), distributions=dists, n=n,
                           bootstrap=bootstrap, seed=seed)


def uniform01(k):
    return {f"x{i}": PriorSpec(family="uniform", lower=0.0, upper=1.0)
            for i in range(k)}


def ishigami_analytic(a=7.0, b=0.1):
    """Closed-form Sobol' indices of the Ishigami function."""
    v1 = 0.5 * (1 + b * math.pi ** 4 / 5) ** 2
    v2 = a ** 2 / 8
    v13 = b ** 2 * math.pi ** 8 * (1 / 18 - 1 / 50)
    v = v1 + v2 + v13
    return {
        "variance": v,
        "S1": (v1 / v, v2 / v, 0.0),
        "ST": ((v1 + v13) / v, v2 / v, v13 / v),
        "S2_13": v13 / v,
    }


def ishigami(x, a=7.0, b=0.1):
    return (np.sin(x[:, 0]) + a * np.sin(x[:, 1]) ** 2
            + b * x[:, 2] ** 4 * np.sin(x[:, 0]))


def test_design_size_formula():
    plan = make_plan(uniform01(4), n=256)
    design = saltelli_sample(plan)
    assert design.shape == (2 * 256 * (4 + 1), 4)
    assert plan.n_rows == len(design)


def test_design_respects_distributions():
    dists = {"a": PriorSpec(family="uniform", lower=2.0, upper=3.0),
             "b": PriorSpec(family="lognormal", lower=0.5, upper=8.0)}
    design = saltelli_sample(make_plan(dists, n=256))
    assert design[:, 0].min() >= 2.0 and design[:, 0].max() <= 3.0
    assert design[:, 1].min() > 0.0
    # lognormal column median near sqrt(0.5*8) = 2
    assert np.median(design[:, 1]) == pytest.approx(2.0, rel=0.1)


def test_design_block_structure():
    plan = make_plan(uniform01(3), n=128)
    m = saltelli_sample(plan)
    n, d = 128, 3
    A, B = m[:n], m[n:2 * n]
    for i in range(d):
        ABi = m[(2 + i) * n:(3 + i) * n]
        # column i comes from B, the rest from A
        assert np.array_equal(ABi[:, i], B[:, i])
        others = [j for j in range(d) if j != i]
        assert np.array_equal(ABi[:, others], A[:, others])
        BAi = m[(2 + d + i) * n:(3 + d + i) * n]
        assert np.array_equal(BAi[:, i], A[:, i])
        assert np.array_equal(BAi[:, others], B[:, others])


def test_design_deterministic_by_seed():
    plan = make_plan(uniform01(3), n=256, seed=5)
    assert np.array_equal(saltelli_sample(plan), saltelli_sample(plan))
    other = make_plan(uniform01(3), n=256, seed=6)
    assert not np.array_equal(saltelli_sample(plan), saltelli_sample(other))


def test_additive_function_indices():
    # f = x1 + x2 with equal variances: S1 = 0.5 each, no interactions
    dists = {"x0": PriorSpec(family="normal", lower=-1.96, upper=1.96),
             "x1": PriorSpec(family="normal", lower=-1.96, upper=1.96)}
    plan = make_plan(dists, n=4096, bootstrap=500)
    design = saltelli_sample(plan)
    y = design.sum(axis=1)
    res = sobol_indices(plan, y)
    assert res.first[0] == pytest.approx(0.5, abs=0.03)
    assert res.first[1] == pytest.approx(0.5, abs=0.03)
    assert res.total[0] == pytest.approx(0.5, abs=0.03)
    assert abs(res.second[0, 1]) < 0.03
    assert res.variance == pytest.approx(2.0, rel=0.1)


def test_ishigami_indices():
    ref = ishigami_analytic()
    dists = {f"x{i}": PriorSpec(family="uniform", lower=-math.pi,
                                upper=math.pi) for i in range(3)}
    plan = make_plan(dists, n=8192, bootstrap=300)
    design = saltelli_sample(plan)
    res = sobol_indices(plan, ishigami(design))
    for i in range(3):
        assert res.first[i] == pytest.approx(ref["S1"][i], abs=0.03)
        assert res.total[i] == pytest.approx(ref["ST"][i], abs=0.03)
    assert res.second[0, 2] == pytest.approx(ref["S2_13"], abs=0.04)
    assert abs(res.second[0, 1]) < 0.03


def test_dead_parameter_not_significant():
    dists = uniform01(3)
    plan = make_plan(dists, n=4096, bootstrap=500)
    design = saltelli_sample(plan)
    y = 3.0 * design[:, 0] + design[:, 1]  # x2 is inert
    res = sobol_indices(plan, y)
    assert abs(res.first[2]) < 0.01
    assert abs(res.total[2]) < 0.01
    assert "x2" not in res.significant_first()
    assert "x2" not in res.significant_total()
    assert "x0" in res.significant_first()
    assert "x0" in res.significant_total()


def test_bootstrap_intervals_bracket_point_estimates():
    dists = uniform01(2)
    plan = make_plan(dists, n=2048, bootstrap=500)
    design = saltelli_sample(plan)
    res = sobol_indices(plan, design[:, 0] + 0.5 * design[:, 1])
    for i in range(2):
        assert res.first_ci[i, 0] <= res.first[i] <= res.first_ci[i, 1]
        assert res.total_ci[i, 0] <= res.total[i] <= res.total_ci[i, 1]


def test_constant_function_yields_zero_indices():
    plan = make_plan(uniform01(2), n=256)
    res = sobol_indices(plan, np.full(plan.n_rows, 3.0))
    assert np.all(res.first == 0.0)
    assert np.all(res.total == 0.0)
    assert res.variance == 0.0
    assert res.significant_first() == []


def test_indices_deterministic():
    dists = uniform01(2)
    plan = make_plan(dists, n=512, bootstrap=200, seed=11)
    y = saltelli_sample(plan)[:, 0] ** 2
    a = sobol_indices(plan, y)
    b = sobol_indices(plan, y)
    assert np.array_equal(a.first, b.first)
    assert np.array_equal(a.first_ci, b.first_ci)
    assert np.array_equal(a.second_ci, b.second_ci)


def test_plan_validation():
    with pytest.raises(ConfigError):
        make_plan(uniform01(2), n=1000)  # not a power of two
    with pytest.raises(ConfigError):
        make_plan(uniform01(1))          # too few parameters
    with pytest.raises(ConfigError):
        make_plan(uniform01(2), bootstrap=10)
    with pytest.raises(ConfigError):
        SensitivityPlan(names=("a", "b"), distributions=uniform01(2), n=256)


def test_prior_design_covers_model_parameters(standard_scenario):
    dists = prior_design_distributions(standard_scenario)
    assert len(dists) == 17
    assert "psi1" in dists and "kappa" in dists
    assert "a11" not in dists  # statistical parameters are excluded
    # truncated design measures stay inside the stated intervals
    u = np.array([1e-9, 0.5, 1 - 1e-9])
    lam = dists["lam"].ppf(u)
    p = standard_scenario.priors["lam"]
    assert lam[0] >= p.lower - 1e-9 and lam[-1] <= p.upper + 1e-9


def test_emissions_sensitivity_end_to_end(standard_scenario):
    plan = default_plan(standard_scenario, n=128, bootstrap=100, seed=0)
    res = emissions_sensitivity(standard_scenario, plan)
    assert len(res.names) == 17
    assert np.all(np.isfinite(res.first))
    assert np.all(np.isfinite(res.total))
    assert res.variance > 0.0
    # total-order dominates first-order up to estimator noise
    assert (res.total >= res.first - 0.1).all()
