import math

import numpy as np
import pytest
from scipy import stats as sps

from emproj.errors import NonStationaryError
from emproj.model import simulate
from emproj.scenarios import load_scenario
from emproj.stats import (ExpertDensity, ObservationSet, StatParams,
                          annualized_growth, dense_residual_loglik,
                          expert_assessment_log_density, filter_residual_loglik,
                          fossil_constraint_ok, log_likelihood,
                          per_capita_gwp_growth, residual_grid,
                          stationary_covariance)
from emproj.synthetic import TRUE_MODEL, TRUE_STAT, generate_observations


def random_stationary(rng, m=3, rho_max=0.95):
    """Random VAR(1) coefficient matrix rescaled to a target spectral radius."""
    A = rng.normal(size=(m, m))
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    return A * (rng.uniform(0.1, rho_max) / rho)


def fixed_point_covariance(A, w_diag, iters=20_000):
    """Independent oracle: iterate the discrete Lyapunov recursion."""
    W = np.diag(w_diag)
    sigma = np.zeros_like(W)
    for _ in range(iters):
        sigma = A @ sigma @ A.T + W
    return sigma


def joint_loglik_oracle(stat, resid, mask):
    """Independent oracle: build the stacked covariance from the linear map
    of [x_1, w_2, ..., w_T] innovations and evaluate with scipy."""
    T, m = resid.shape
    sigma_x = fixed_point_covariance(stat.A, stat.w_diag)
    B = np.zeros((T * m, T * m))
    for t in range(T):
        for s in range(t + 1):
            B[t * m:(t + 1) * m, s * m:(s + 1) * m] = \
                np.linalg.matrix_power(stat.A, t - s)
    inner = np.zeros((T * m, T * m))
    inner[:m, :m] = sigma_x
    for t in range(1, T):
        inner[t * m:(t + 1) * m, t * m:(t + 1) * m] = np.diag(stat.w_diag)
    cov = B @ inner @ B.T + np.kron(np.eye(T), np.diag(stat.d_diag))
    sel = np.asarray(mask, dtype=bool).ravel()
    return sps.multivariate_normal(
        mean=np.zeros(sel.sum()), cov=cov[np.ix_(sel, sel)]).logpdf(
            resid.ravel()[sel])


def test_stationary_covariance_matches_fixed_point():
    rng = np.random.default_rng(5)
    for _ in range(20):
        A = random_stationary(rng)
        w = rng.uniform(0.1, 2.0, size=3)
        got = stationary_covariance(A, w)
        ref = fixed_point_covariance(A, w)
        assert np.linalg.norm(got - ref) / np.linalg.norm(ref) < 1e-10
        # it solves the Lyapunov equation
        assert np.allclose(got, A @ got @ A.T + np.diag(w), atol=1e-10)


def test_stationary_covariance_rejects_explosive():
    with pytest.raises(NonStationaryError):
        stationary_covariance(np.eye(3) * 1.01, np.ones(3))
    with pytest.raises(NonStationaryError):
        stationary_covariance(np.eye(3), np.ones(3))


def test_filter_matches_joint_oracle_complete_data():
    rng = np.random.default_rng(7)
    for _ in range(10):
        stat = StatParams(A=random_stationary(rng),
                          w_diag=rng.uniform(0.05, 1.0, 3),
                          d_diag=rng.uniform(0.05, 1.0, 3))
        T = int(rng.integers(3, 21))
        resid = rng.normal(size=(T, 3))
        mask = np.ones((T, 3), dtype=bool)
        got = filter_residual_loglik(stat, resid, mask)
        ref = joint_loglik_oracle(stat, resid, mask)
        assert abs(got - ref) / abs(ref) < 1e-9


def test_filter_matches_joint_oracle_missing_data():
    rng = np.random.default_rng(11)
    for _ in range(10):
        stat = StatParams(A=random_stationary(rng),
                          w_diag=rng.uniform(0.05, 1.0, 3),
                          d_diag=rng.uniform(0.05, 1.0, 3))
        T = int(rng.integers(4, 21))
        resid = rng.normal(size=(T, 3))
        mask = rng.uniform(size=(T, 3)) < 0.6
        mask[0, 0] = True  # keep at least one observation
        got = filter_residual_loglik(stat, resid, mask)
        ref = joint_loglik_oracle(stat, resid, mask)
        assert abs(got - ref) / abs(ref) < 1e-9


def test_dense_reference_agrees_with_filter():
    rng = np.random.default_rng(13)
    stat = StatParams(A=random_stationary(rng),
                      w_diag=rng.uniform(0.05, 1.0, 3),
                      d_diag=rng.uniform(0.05, 1.0, 3))
    resid = rng.normal(size=(12, 3))
    mask = rng.uniform(size=(12, 3)) < 0.7
    mask[0] = True
    a = filter_residual_loglik(stat, resid, mask)
    b = dense_residual_loglik(stat, resid, mask)
    assert a == pytest.approx(b, rel=1e-10)


def test_filter_nonstationary_is_minus_inf():
    stat = StatParams(A=np.eye(3) * 1.2, w_diag=np.ones(3), d_diag=np.ones(3))
    resid = np.zeros((5, 3))
    mask = np.ones((5, 3), dtype=bool)
    assert filter_residual_loglik(stat, resid, mask) == -math.inf


def test_stat_params_vector_round_trip():
    v = TRUE_STAT.to_vector()
    assert v.shape == (15,)
    # row-major A, then process variances, then observation variances
    assert v[0] == TRUE_STAT.A[0, 0]
    assert v[1] == TRUE_STAT.A[0, 1]
    assert v[8] == TRUE_STAT.A[2, 2]
    back = StatParams.from_vector(v)
    assert np.array_equal(back.A, TRUE_STAT.A)
    assert np.array_equal(back.w_diag, TRUE_STAT.w_diag)
    assert np.array_equal(back.d_diag, TRUE_STAT.d_diag)


def test_observation_set_validation():
    years = np.array([2000, 2001])
    good = np.array([1.0, 2.0])
    with pytest.raises(ValueError):
        ObservationSet(np.array([2001, 2000]), good, good, good)
    with pytest.raises(ValueError):
        ObservationSet(years, np.array([1.0, -2.0]), good, good)
    with pytest.raises(ValueError):
        ObservationSet(years, np.array([1.0]), good, good)


def test_observation_set_subsets():
    obs = generate_observations()
    r = obs.restrict(1900, 1950)
    assert r.years[0] == 1900 and r.years[-1] == 1950
    d = obs.drop_years([1900, 1901])
    assert 1900 not in d.years and len(d) == len(obs) - 2
    s = obs.subset_years([1900, 1901])
    assert list(s.years) == [1900, 1901]


def test_residual_grid_alignment():
    traj = simulate(TRUE_MODEL, 1700, 2014)
    obs = generate_observations(missing={"gwp": (1900, 1950)})
    resid, mask = residual_grid(traj, obs)
    assert resid.shape == (2014 - 1820 + 1, 3)
    assert not mask[1925 - 1820, 1]       # blanked gwp year
    assert mask[1925 - 1820, 0]
    i = 2000 - 1820
    expected = math.log(obs.population[2000 - 1820]) - \
        math.log(traj.population[traj.index(2000)])
    assert resid[i, 0] == pytest.approx(expected, rel=1e-12)


def test_log_likelihood_peaks_near_truth():
    obs = generate_observations(seed=3)
    ll_true = log_likelihood(TRUE_MODEL, TRUE_STAT, obs)
    assert math.isfinite(ll_true)
    import dataclasses
    worse = dataclasses.replace(TRUE_MODEL, psi3=15.0)
    assert log_likelihood(worse, TRUE_STAT, obs) < ll_true
    # dense evaluation agrees with the filter end to end
    assert ll_true == pytest.approx(
        log_likelihood(TRUE_MODEL, TRUE_STAT, obs, dense=True), rel=1e-9)


def test_fossil_constraint():
    scenario = load_scenario("standard")
    # the synthetic truth stays within the 6000 GtC limit by 2500
    assert fossil_constraint_ok(simulate(TRUE_MODEL, 1700, 2500), scenario)
    import dataclasses
    # delaying decarbonization and raising intensity blows the budget
    heavy = dataclasses.replace(TRUE_MODEL, rho2=0.8, rho3=0.6, tau4=2400.0)
    assert not fossil_constraint_ok(simulate(heavy, 1700, 2500), scenario)


def test_annualized_growth():
    # doubles in 10 years -> 2^(1/10) - 1 per year
    assert annualized_growth(1.0, 2.0, 10) == pytest.approx(2 ** 0.1 - 1)
    traj = simulate(TRUE_MODEL, 1700, 2100)
    g = per_capita_gwp_growth(traj, 2010, 2100)
    y0 = traj.at(2010)["gwp"] / traj.at(2010)["population"]
    y1 = traj.at(2100)["gwp"] / traj.at(2100)["population"]
    assert g == pytest.approx((y1 / y0) ** (1 / 90) - 1)


def test_expert_density_matches_scipy():
    e = ExpertDensity(mean=0.02, sd=0.012, label="x")
    assert e.log_pdf(0.015) == pytest.approx(
        sps.norm(0.02, 0.012).logpdf(0.015), rel=1e-12)


def test_expert_assessment_terms():
    scenario = load_scenario("standard")
    traj = simulate(TRUE_MODEL, 1700, 2500)
    both = expert_assessment_log_density(traj, scenario,
                                         which={"growth", "emissions"})
    g = expert_assessment_log_density(traj, scenario, which={"growth"})
    e = expert_assessment_log_density(traj, scenario, which={"emissions"})
    assert both == pytest.approx(g + e, rel=1e-12)
    assert expert_assessment_log_density(traj, scenario, which=set()) == 0.0
