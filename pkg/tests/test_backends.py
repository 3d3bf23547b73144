import numpy as np
import pytest

from pcfm import _core
from pcfm._core import _pykernels, load_backend

try:
    from pcfm._core import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled backend not built")


def test_backend_selection(monkeypatch):
    assert load_backend("python") is _pykernels
    assert _core.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        load_backend("fortran")


@needs_c
def test_phase_poly_equal():
    rng = np.random.default_rng(1)
    q = rng.uniform(-1, 1, 10)
    phi = np.concatenate([np.linspace(-200, 200, 401), rng.uniform(-1e-3, 1e-3, 20), [0.0]])
    np.testing.assert_allclose(_ckernels.phase_poly(q, phi), _pykernels.phase_poly(q, phi), rtol=1e-13, atol=1e-15)


@needs_c
def test_phase_filon_equal():
    z = np.concatenate([np.linspace(0, 10, 400), [10.0 + 1e-6], np.linspace(10.5, 100, 300)])
    p = np.exp(-0.046 * z)
    th = np.linspace(-2, 2, 51)
    np.testing.assert_allclose(_ckernels.phase_filon(z, p, th), _pykernels.phase_filon(z, p, th), rtol=1e-12, atol=1e-13)


@needs_c
def test_phase_filon_read_only_inputs():
    z = np.linspace(0, 1, 11)
    p = np.ones(11)
    z.setflags(write=False)
    p.setflags(write=False)
    assert _ckernels.phase_filon(z, p, np.array([0.0]))[0] == pytest.approx(1.0)


@needs_c
def test_rk4_equal():
    from pcfm.spp import DEFAULT_RAMAN_GAIN, FiberSpec, LumpedLoss, RamanPump, solve_raman
    from conftest import comb

    fiber = FiberSpec(100.0, 0.2, raman_gain=DEFAULT_RAMAN_GAIN, lumped_events=[LumpedLoss(20.0, 1.0)])
    plan = comb(5, spacing=0.5, bandwidth=0.1)
    pumps = (RamanPump(206.0, 200.0), RamanPump(205.0, 50.0, "forward"))
    a = solve_raman(fiber, plan, pumps)
    saved = _core.rk4_sweep
    try:
        _core.rk4_sweep = _pykernels.rk4_sweep
        b = solve_raman(fiber, plan, pumps)
    finally:
        _core.rk4_sweep = saved
    np.testing.assert_allclose(a.profiles, b.profiles, rtol=1e-12)
    np.testing.assert_allclose(a.pump_profiles, b.pump_profiles, rtol=1e-12)


def test_python_fallback_env(monkeypatch):
    import importlib

    monkeypatch.setenv("PCFM_PURE_PYTHON", "1")
    mod = importlib.reload(_core)
    try:
        assert mod.BACKEND == "python"
        assert mod.phase_poly is _pykernels.phase_poly
    finally:
        monkeypatch.delenv("PCFM_PURE_PYTHON")
        importlib.reload(_core)
