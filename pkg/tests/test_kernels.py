import subprocess
import sys

import numpy as np

from emproj import kernels
from emproj.kernels import _fallback
from emproj.stats import residual_grid, stationary_covariance
from emproj.model import simulate
from emproj.synthetic import TRUE_MODEL, TRUE_STAT, generate_observations


def _buffers(n):
    return [np.empty(n) for _ in range(6)]


def test_compiled_backend_available():
    # the build in this repository compiles the extension; the fallback is
    # still importable either way
    assert kernels.BACKEND in ("compiled", "python")
    assert callable(_fallback.simulate_core)


def test_backends_agree_on_simulation():
    try:
        from emproj.kernels import _core
    except ImportError:
        import pytest
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(0)
    n = 2500 - 1700 + 1
    for _ in range(20):
        p = TRUE_MODEL.to_vector() * rng.uniform(0.9, 1.1, size=17)
        p[13:16] = np.sort(p[13:16])  # keep transitions ordered
        a = _buffers(n)
        b = _buffers(n)
        rc1 = _core.simulate_core(p, 1700, 2500, *a)
        rc2 = _fallback.simulate_core(p, 1700, 2500, *b)
        assert rc1 == rc2
        if rc1 == 0:
            for x, y in zip(a, b):
                assert np.array_equal(x, y)  # bitwise identical


def test_backends_agree_on_filter():
    try:
        from emproj.kernels import _core
    except ImportError:
        import pytest
        pytest.skip("compiled backend not built")
    obs = generate_observations(missing={"emissions": (1820, 1860)})
    traj = simulate(TRUE_MODEL, 1700, 2014)
    resid, mask = residual_grid(traj, obs)
    mask8 = np.ascontiguousarray(mask, dtype=np.uint8)
    sx = stationary_covariance(TRUE_STAT.A, TRUE_STAT.w_diag)
    A = np.ascontiguousarray(TRUE_STAT.A)
    ll1 = _core.filter_loglik(A, TRUE_STAT.w_diag, TRUE_STAT.d_diag, sx,
                              resid, mask8)
    ll2 = _fallback.filter_loglik(A, TRUE_STAT.w_diag, TRUE_STAT.d_diag, sx,
                                  resid, mask8)
    assert ll1 == ll2


def test_env_var_forces_python_backend():
    code = ("import emproj.kernels as k; print(k.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code],
                         env={"EMPROJ_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"},
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "python"
