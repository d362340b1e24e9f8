"""Backend parity: the compiled kernels must match the numpy fallback."""

import numpy as np
import pytest

from netgames import _kernels
from netgames._kernels import _fallback
from conftest import random_lq_game

try:
    from netgames._kernels import _core
except ImportError:
    _core = None

needs_compiled = pytest.mark.skipif(_core is None,
                                    reason="compiled kernels unavailable")


def _game_arrays(rng, n_max=12):
    g = random_lq_game(rng, n_max=n_max)
    a0 = rng.uniform(g.lo, g.hi)
    return g, a0


@needs_compiled
@pytest.mark.parametrize("sel_mode", [0, 1, 2])
def test_run_br_parity(rng, sel_mode):
    for trial in range(5):
        g, a0 = _game_arrays(rng)
        gate = 0.01 * (trial + 1)
        rand_u = np.random.default_rng(trial).random(5000)
        args = (g.mgrad, g.msym, g.beta, g.lo, g.hi, a0, gate, sel_mode,
                rand_u, 5000, 3, False)
        out_c = _core.run_br(*args)
        out_p = _fallback.run_br(*args)
        assert out_c[1] == out_p[1]            # iters
        assert out_c[2] == out_p[2]            # termination code
        assert np.allclose(out_c[0], out_p[0], atol=1e-12)
        assert np.array_equal(out_c[3], out_p[3])
        assert np.allclose(out_c[4], out_p[4], atol=1e-12)
        assert np.allclose(out_c[5], out_p[5], atol=1e-10)
        assert out_c[6] == out_p[6]            # first_converged
        assert out_c[9] == out_p[9]            # last_violation


@needs_compiled
@pytest.mark.parametrize("stop_mode", [0, 1, 2])
def test_run_gp_parity(rng, stop_mode):
    for trial in range(5):
        g, a0 = _game_arrays(rng)
        etas = np.full(g.n, 0.05 + 0.01 * trial)
        gate = -1.0 if stop_mode == 2 else 0.02
        args = (g.mgrad, g.msym, g.beta, g.lo, g.hi, a0, gate, etas,
                stop_mode, 1e-10, 3000, 7)
        out_c = _core.run_gp(*args)
        out_p = _fallback.run_gp(*args)
        assert out_c[1] == out_p[1]
        assert out_c[2] == out_p[2]
        assert np.allclose(out_c[0], out_p[0], atol=1e-12)
        assert np.array_equal(out_c[3], out_p[3])
        assert np.allclose(out_c[5], out_p[5], atol=1e-10)
        assert out_c[9] == out_p[9]


@needs_compiled
def test_deviation_scan_parity(rng):
    g, _ = _game_arrays(rng)
    m = 4000
    i_idx = rng.integers(0, g.n, size=m)
    profiles = rng.uniform(g.lo, g.hi, size=(m, g.n))
    new_actions = rng.uniform(g.lo[i_idx], g.hi[i_idx])
    v_c = _core.deviation_scan(g.mgrad, g.msym, g.beta, i_idx, profiles, new_actions)
    v_p = _fallback.deviation_scan(g.mgrad, g.msym, g.beta, i_idx, profiles, new_actions)
    assert v_c == pytest.approx(v_p, abs=1e-13)


@needs_compiled
def test_jacobi_parity(rng):
    for n in (1, 2, 5, 20):
        m = rng.normal(size=(n, n))
        m = 0.5 * (m + m.T)
        ev_c = _core.jacobi_spectrum(m)
        ev_p = _fallback.jacobi_spectrum(m)
        assert np.allclose(ev_c, ev_p, atol=1e-12)
        assert np.allclose(ev_c, np.linalg.eigvalsh(m), atol=1e-10)


def test_recorder_thinning(rng):
    g, a0 = _game_arrays(rng)
    out = _kernels.run_gp(g.mgrad, g.msym, g.beta, g.lo, g.hi, a0, -1.0,
                          np.full(g.n, 0.05), 2, 1e-10, 500, 10)
    rec_idx = out[3]
    assert rec_idx[0] == 0
    assert rec_idx[-1] == out[1]
    inner = rec_idx[:-1] if rec_idx[-1] % 10 else rec_idx
    assert np.all(inner % 10 == 0)


def test_backend_selected():
    assert _kernels.BACKEND in ("compiled", "python")
