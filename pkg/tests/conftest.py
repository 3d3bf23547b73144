import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pcfm.spp import Channel, ChannelPlan, FiberSpec

settings.register_profile("pcfm", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pcfm")


def comb(n, spacing=0.05, bandwidth=0.028, power=1.0, center=193.5, cut=None):
    chans = [Channel(center + spacing * (i - (n - 1) / 2), bandwidth, power) for i in range(n)]
    return ChannelPlan(chans, n // 2 if cut is None else cut)


@pytest.fixture
def desk_plan():
    return comb(7)


@pytest.fixture
def smf():
    return FiberSpec(100.0, 0.2, beta2=-21.3)


def rel(a, b):
    return np.max(np.abs(np.asarray(a) - np.asarray(b)) / np.maximum(np.abs(np.asarray(b)), 1e-300))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance")
    for key in sorted(mod.RESULTS, key=str):
        terminalreporter.write_line(mod.RESULTS[key])
