import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pcfm.engine import (
    SCI_PREFACTOR,
    XCI_PREFACTOR,
    SpanSetup,
    accumulate_link,
    delta_gsnr,
    enumerate_islands,
    g_sci,
    g_xci_single,
    gsnr_nli,
    run_link,
    span_nli,
)
from pcfm.errors import DomainError, IslandError
from pcfm.kernels import IslandGeometry, beta2_eff, gamma_island, k_sci_closed
from pcfm.oracle import core_integral_numeric
from pcfm.polyfit import PolyProfile, fit_polynomial
from pcfm.spp import Channel, ChannelPlan, FiberSpec, attenuation_only_spp

from conftest import comb


def brute_islands(plan, cut, tol=1e-9):
    f = plan.freqs
    out = []
    for m, k, n in itertools.product(range(len(f)), repeat=3):
        if abs(f[m] + f[k] - f[n] - f[cut]) <= tol:
            out.append((m, k, n))
    return sorted(out)


def kinds(isl):
    return {k: sum(1 for x in isl if x.kind == k) for k in ("SCI", "XCI", "MCI")}


def test_single_channel_island():
    isl = enumerate_islands(comb(1), 0, include_mci=True)
    assert [(x.m, x.k, x.n, x.kind) for x in isl] == [(0, 0, 0, "SCI")]


def test_three_channel_census():
    isl = enumerate_islands(comb(3), 1, include_mci=True)
    assert kinds(isl) == {"SCI": 1, "XCI": 4, "MCI": 2}
    assert kinds(enumerate_islands(comb(3), 1)) == {"SCI": 1, "XCI": 4, "MCI": 0}


@pytest.mark.parametrize("n", range(1, 10))
def test_census_matches_brute_force(n):
    plan = comb(n)
    for cut in range(n):
        isl = enumerate_islands(plan, cut, include_mci=True)
        assert sorted(x.as_tuple() for x in isl) == brute_islands(plan, cut)
        assert kinds(isl)["XCI"] == 2 * (n - 1)
        assert kinds(isl)["SCI"] == 1
        for x in isl:
            f = plan.freqs
            assert abs(f[x.m] + f[x.k] - f[x.n] - f[cut]) <= 1e-9


def test_seven_channel_pattern():
    isl = enumerate_islands(comb(7), 3, include_mci=True)
    c = kinds(isl)
    assert (c["SCI"], c["XCI"]) == (1, 12)
    assert c["MCI"] == len(brute_islands(comb(7), 3)) - 13


def test_non_uniform_comb_has_no_mci():
    f = [191.0, 191.37, 192.2, 193.91, 196.03]
    plan = ChannelPlan([Channel(x, 0.05, 1.0) for x in f], 2)
    isl = enumerate_islands(plan, 2, include_mci=True)
    assert kinds(isl) == {"SCI": 1, "XCI": 8, "MCI": 0}


def test_island_kinds_consistent():
    for x in enumerate_islands(comb(6), 2, include_mci=True):
        if x.kind == "SCI":
            assert x.m == x.k == x.n == 2
        elif x.kind == "XCI":
            assert (x.k == 2 and x.m == x.n != 2) or (x.m == 2 and x.k == x.n != 2)


def test_enumerate_bad_cut():
    with pytest.raises(DomainError):
        enumerate_islands(comb(3), 3)


def test_g_sci_examples():
    assert g_sci(1, 1, 1, 1, 0.0) == 0.0
    assert g_sci(1, 1, 1, 1, 1) == pytest.approx(0.5926, abs=5e-5)
    k = k_sci_closed([1.0], 0.1, 100.0, 0.0)
    v = g_sci(1.0, 1.0, 0.2, 1.3, k)
    assert v == pytest.approx(16 / 27 * 0.008 * 1.69 * 100, rel=1e-13)
    assert v == pytest.approx(0.8012, abs=5e-5)


def test_g_xci_examples():
    assert g_xci_single(1, 1, 1, 0.0, 1, 1) == 0.0
    assert g_xci_single(1, 1, 1, 1, 1, 1) == pytest.approx(1.1852, abs=5e-5)
    assert XCI_PREFACTOR == 2 * SCI_PREFACTOR
    assert g_xci_single(0.7, 0.3, 0.2, 0.6, 1.3, 0.9) == pytest.approx(4 * g_xci_single(0.7, 0.3, 0.2, 0.3, 1.3, 0.9))


def _polys(fiber, plan, deg=9):
    spp = attenuation_only_spp(fiber, plan)
    return [fit_polynomial(spp.z, spp.profiles[i], deg) for i in range(len(plan))]


def test_span_single_channel_is_sci(smf):
    plan = comb(1)
    polys = _polys(smf, plan, 3)
    res = span_nli(plan, smf, polys, 0)
    gam = gamma_island(193.5, 80, 80, 80, 80, 2.6e-20) * 1e-3
    assert res.g_nli == res.g_sci
    assert res.g_sci == pytest.approx(g_sci(1, 1, plan.psd[0], gam, k_sci_closed(polys[0], 0.028, 100, -21.3)), rel=1e-14)


def test_span_symmetric_xci(smf):
    plan = comb(3)
    res = span_nli(plan, smf, _polys(smf, plan), 1)
    assert res.g_xci[0] == pytest.approx(res.g_xci[2], rel=1e-13)
    assert res.g_xci[1] == 0.0
    assert res.n_mci_ignored == 2


def test_span_matches_numeric_oracle(smf, desk_plan):
    # same polynomials on both sides: rectangle SCI plus stretched XCI islands
    polys = _polys(smf, desk_plan)
    cut = 3
    res = span_nli(desk_plan, smf, polys, cut)
    f, B, G = desk_plan.freqs, desk_plan.bandwidths, desk_plan.psd
    gam = gamma_island(f[cut], 80, 80, 80, 80, 2.6e-20) * 1e-3
    K = core_integral_numeric(polys[cut], IslandGeometry(0.0, B[cut], B[cut], 100.0, -21.3), "rectangle", rtol=1e-8)
    total = g_sci(1, 1, G[cut], gam, K)
    for n in range(len(desk_plan)):
        if n != cut:
            geom = IslandGeometry(f[n] - f[cut], B[n], B[cut], 100.0, -21.3)
            total += g_xci_single(1, 1, G[cut], G[n], gam, core_integral_numeric(polys[n], geom, "stretched"))
    assert res.g_nli == pytest.approx(total, rel=1e-4)


def test_span_wraps_kernel_errors():
    fiber = FiberSpec(100.0, 0.2, beta2=0.0)
    plan = comb(3)
    with pytest.raises(IslandError) as info:
        span_nli(plan, fiber, _polys(fiber, plan), 1, span=4)
    assert info.value.context()["span"] == 4
    assert len(info.value.context()["island"]) == 3


def test_validity_warning():
    fiber = FiberSpec(100.0, 0.2, beta2=-2.0)
    plan = comb(3)
    res = span_nli(plan, fiber, _polys(fiber, plan), 1)
    assert res.warnings
    assert not span_nli(plan, FiberSpec(100.0, 0.2), _polys(fiber, plan), 1).warnings


def test_identical_channels_share_beta2():
    vals = {beta2_eff(-21.3, 0.0, 0.0, 193.5, f, 193.5) for f in comb(5).freqs}
    assert vals == {-21.3}


def test_accumulate_examples():
    g = np.array([[2.0, 3.0]])
    np.testing.assert_array_equal(accumulate_link(g, [[0.3, 0.2]]), [2.0, 3.0])
    g3 = np.array([[1.0], [2.0], [4.0]])
    assert accumulate_link(g3, np.ones((3, 1)))[0] == 7.0
    assert accumulate_link([[1.0], [1.0]], [[0.5], [0.5]])[0] == 1.5
    with pytest.raises(DomainError):
        accumulate_link([[1.0]], [[1.0], [1.0]])


@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=6), st.lists(st.floats(0.1, 2.0), min_size=6, max_size=6))
def test_accumulate_matches_explicit_product(g, t):
    t = t[: len(g)]
    expect = sum(g[s] * math.prod(t[s + 1:]) for s in range(len(g)))
    assert accumulate_link(np.array(g)[:, None], np.array(t)[:, None])[0] == pytest.approx(expect, rel=1e-12)


def test_gsnr_examples():
    plan = ChannelPlan([Channel(193.5, 0.1, 1.0)])
    assert gsnr_nli(plan, [10.0]).gsnr_nli_db[0] == pytest.approx(0.0, abs=1e-14)
    assert gsnr_nli(plan, [1e-2]).gsnr_nli_db[0] == pytest.approx(30.0, abs=1e-12)
    base = gsnr_nli(plan, [1e-2])
    # the hook multiplies P_NLI, so a 0.5 dB NLI reduction is the factor 10^-0.05
    lower = gsnr_nli(plan, [1e-2], correction=10 ** -0.05)
    assert delta_gsnr(lower, base)[0] == pytest.approx(0.5, abs=1e-12)
    higher = gsnr_nli(plan, [1e-2], correction=10 ** 0.05)
    assert delta_gsnr(higher, base)[0] == pytest.approx(-0.5, abs=1e-12)
    with pytest.raises(DomainError):
        gsnr_nli(plan, [1e-2], p_ch=[0.0])


def test_power_scaling_law(smf):
    c = 1.7
    a = run_link([SpanSetup(smf, comb(5))])
    b = run_link([SpanSetup(smf, comb(5, power=c))])
    np.testing.assert_allclose(b.span_psd, c**3 * a.span_psd, rtol=1e-9)
    np.testing.assert_allclose(b.report.gsnr_nli_db, a.report.gsnr_nli_db - 20 * math.log10(c), atol=1e-9)


def test_run_link_multi_span(smf):
    plan = comb(3)
    one = run_link([SpanSetup(smf, plan)])
    two = run_link([SpanSetup(smf, plan), SpanSetup(smf, plan)])
    np.testing.assert_allclose(two.report.g_nli, 2 * one.report.g_nli, rtol=1e-13)
    lossy = run_link([SpanSetup(smf, plan, gamma_db=[17.0] * 3), SpanSetup(smf, plan, gamma_db=[17.0] * 3)])
    t = 10**1.7 * 0.01
    np.testing.assert_allclose(lossy.transfers, t, rtol=1e-10)
    np.testing.assert_allclose(lossy.report.g_nli, lossy.span_psd[0] * t + lossy.span_psd[1], rtol=1e-13)
    np.testing.assert_allclose(lossy.report.p_ch, plan.powers * t, rtol=1e-10)
    with pytest.raises(DomainError):
        run_link([])
    with pytest.raises(DomainError):
        run_link([SpanSetup(smf, plan), SpanSetup(smf, comb(4))])
