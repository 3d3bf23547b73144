"""Island enumeration, per-span NLI assembly, multi-span accumulation and GSNR.

PSDs are in mW/THz, powers in mW, nonlinear coefficients in 1/(W km) at the
API surface; the conversion to 1/(mW km) happens right before the kernels
are combined.
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import DomainError, IslandError, PcfmError
from .kernels import (
    IslandGeometry,
    beta2_eff,
    gamma_island,
    k_sci_closed,
    k_sci_generic,
    k_xci_closed,
)
from .polyfit import fit_polynomial
from .spp import attenuation_only_spp, solve_raman, transfer_factor

__all__ = [
    "Island",
    "enumerate_islands",
    "island_weight",
    "g_sci",
    "g_xci_single",
    "SpanNli",
    "span_nli",
    "accumulate_link",
    "NliReport",
    "gsnr_nli",
    "delta_gsnr",
    "SpanSetup",
    "LinkResult",
    "run_link",
]

FREQ_TOL_THZ = 1e-9
VALIDITY_PRODUCT = 0.01
SCI_PREFACTOR = 16.0 / 27.0
XCI_PREFACTOR = 32.0 / 27.0


@dataclass(frozen=True)
class Island:
    m: int
    k: int
    n: int
    kind: str

    def as_tuple(self):
        return (self.m, self.k, self.n)


def _classify(m, k, n, cut):
    if m == k == n == cut:
        return "SCI"
    if (k == cut and m == n) or (m == cut and k == n):
        return "XCI"
    return "MCI"


def enumerate_islands(plan, cut, include_mci=False, tol=FREQ_TOL_THZ):
    """All (m, k, n) with f_m + f_k - f_n = f_cut, classified SCI / XCI / MCI."""
    f = plan.freqs
    if not 0 <= cut < f.size:
        raise DomainError(f"cut index {cut} out of range")
    target = f[:, None] + f[None, :] - f[cut]
    pos = np.clip(np.searchsorted(f, target), 1, f.size - 1)
    cand = np.where(np.abs(f[pos - 1] - target) <= np.abs(f[pos] - target), pos - 1, pos)
    if f.size == 1:
        cand = np.zeros_like(pos)
    hit = np.abs(f[cand] - target) <= tol
    out = []
    for m, k in zip(*np.nonzero(hit)):
        n = int(cand[m, k])
        kind = _classify(int(m), int(k), n, cut)
        if kind == "MCI" and not include_mci:
            continue
        out.append(Island(int(m), int(k), n, kind))
    return out


def island_weight(transfer_cut, g_m, g_k, g_n, gamma):
    """16/27 * Gamma p_cut(L) * G_m G_k G_n * gamma^2 (gamma in 1/(mW km))."""
    return SCI_PREFACTOR * transfer_cut * g_m * g_k * g_n * gamma * gamma


def g_sci(gamma_t, p_cut_l, g_cut, gamma, k_sci):
    """SCI PSD contribution."""
    return SCI_PREFACTOR * p_cut_l * gamma_t * g_cut**3 * gamma**2 * k_sci


def g_xci_single(gamma_t, p_cut_l, g_cut, g_nch, gamma, k_xci):
    """XCI PSD contribution of one interferer (both island orientations)."""
    return XCI_PREFACTOR * p_cut_l * gamma_t * g_cut * g_nch**2 * gamma**2 * k_xci


@dataclass
class SpanNli:
    """Per-span NLI PSD at one CUT, split by contribution."""

    g_nli: float
    g_sci: float
    g_xci: np.ndarray
    n_mci_ignored: int
    warnings: List[str] = field(default_factory=list)


def span_nli(plan, fiber, polys, cut, gamma_t=1.0, p_cut_l=1.0, span=None):
    """PSD of SCI plus all XCI contributions at the CUT centre for one span.

    ``polys[i]`` is the PolyProfile of channel i; ``gamma_t * p_cut_l`` is
    the end-of-span transfer of the CUT. MCI islands are counted, not computed.
    """
    f = plan.freqs
    B = plan.bandwidths
    G = plan.psd
    aeff = fiber.aeff(f)
    L = fiber.length_km
    warnings = []

    def check(b2, who):
        if abs(b2) * B[cut] ** 2 <= VALIDITY_PRODUCT:
            warnings.append(
                f"island {who}: |beta2_eff| B_cut^2 = {abs(b2) * B[cut] ** 2:.3g} <= {VALIDITY_PRODUCT}, "
                "stretched/closed-form accuracy not guaranteed"
            )

    b2 = beta2_eff(fiber.beta2, fiber.beta3, fiber.beta4, fiber.fc, f[cut], f[cut])
    gam = gamma_island(f[cut], aeff[cut], aeff[cut], aeff[cut], aeff[cut], fiber.n2) * 1e-3
    check(b2, (cut, cut, cut))
    try:
        poly = polys[cut]
        if poly.degree <= 3:
            K = k_sci_closed(poly, B[cut], L, b2)
        else:
            K = k_sci_generic(poly, B[cut], L, b2)
    except PcfmError as exc:
        raise IslandError(f"SCI kernel failed: {exc}", island=(cut, cut, cut), span=span) from exc
    gs = g_sci(gamma_t, p_cut_l, G[cut], gam, K)

    gx = np.zeros(len(plan))
    for n in range(len(plan)):
        if n == cut:
            continue
        b2 = beta2_eff(fiber.beta2, fiber.beta3, fiber.beta4, fiber.fc, f[n], f[cut])
        check(b2, (n, cut, n))
        gam = gamma_island(f[cut], aeff[cut], aeff[n], aeff[cut], aeff[n], fiber.n2) * 1e-3
        geom = IslandGeometry(f[n] - f[cut], B[n], B[cut], L, b2)
        try:
            K = k_xci_closed(polys[n], geom)
        except PcfmError as exc:
            raise IslandError(f"XCI kernel failed: {exc}", island=(n, cut, n), span=span) from exc
        gx[n] = g_xci_single(gamma_t, p_cut_l, G[cut], G[n], gam, K)

    n_mci = sum(1 for x in enumerate_islands(plan, cut, include_mci=True) if x.kind == "MCI")
    return SpanNli(gs + float(gx.sum()), gs, gx, n_mci, warnings)


def accumulate_link(span_psds, transfers):
    """Incoherent sum: G_end = sum_s G_s prod_{l > s} T_l (empty product = 1)."""
    g = np.asarray(span_psds, dtype=float)
    t = np.asarray(transfers, dtype=float)
    if g.shape[0] != t.shape[0]:
        raise DomainError("span PSDs and transfer factors must be aligned")
    out = np.zeros(g.shape[1:])
    for s in range(g.shape[0]):
        out = out * t[s] + g[s]
    return out


@dataclass
class NliReport:
    f_cut: np.ndarray
    g_nli: np.ndarray
    p_nli: np.ndarray
    gsnr_nli_db: np.ndarray
    p_ch: np.ndarray
    warnings: List[List[str]]


def gsnr_nli(plan, g_end, correction=None, p_ch=None, warnings=None):
    """GSNR_NLI = P_ch / P_NLI per channel, with P_NLI = correction * G_NLI * B.

    ``correction`` is an optional per-channel multiplier on the NLI power.
    """
    g_end = np.asarray(g_end, dtype=float)
    p_ch = plan.powers if p_ch is None else np.asarray(p_ch, dtype=float)
    if np.any(p_ch <= 0):
        raise DomainError("channel power must be > 0 for GSNR")
    corr = np.ones_like(g_end) if correction is None else np.broadcast_to(np.asarray(correction, dtype=float), g_end.shape)
    p_nli = corr * g_end * plan.bandwidths
    with np.errstate(divide="ignore"):
        gsnr = 10.0 * np.log10(p_ch / p_nli)
    warns = warnings if warnings is not None else [[] for _ in range(len(plan))]
    return NliReport(plan.freqs, g_end, p_nli, gsnr, p_ch, warns)


def delta_gsnr(report, reference):
    """GSNR_NLI difference (dB) of ``report`` against a reference report."""
    return np.asarray(report.gsnr_nli_db) - np.asarray(reference.gsnr_nli_db)


@dataclass
class SpanSetup:
    """One span of a link: fiber, channel plan, pumps and end-element gains.

    ``gamma_db`` holds per-channel lumped gains in dB; ``None`` means the
    span loss is exactly compensated at every channel.
    """

    fiber: object
    plan: object
    pumps: Sequence = ()
    gamma_db: Optional[Sequence[float]] = None
    raman: bool = True


@dataclass
class LinkResult:
    report: NliReport
    spps: list
    polys: list
    span_psd: np.ndarray
    transfers: np.ndarray
    sci: np.ndarray
    n_mci_ignored: np.ndarray


def span_profiles(setup, grid_points=1001):
    """SPP of one span: Raman solve when gain or pumps are present, else attenuation only."""
    has_gain = setup.raman and (len(setup.pumps) > 0 or setup.fiber.has_raman_gain)
    if has_gain:
        return solve_raman(setup.fiber, setup.plan, setup.pumps, grid_points)
    return attenuation_only_spp(setup.fiber, setup.plan, grid_points)


def run_link(spans, degree=9, grid_points=1001, correction=None, spps=None, pin_origin=False):
    """PCFM estimate of end-of-link NLI and GSNR_NLI for every channel.

    All spans must carry the same number of channels (the channel index is
    the key across spans). The channel power at the receiver is the last
    span's launch power times its end-to-end transfer.
    """
    if not spans:
        raise DomainError("link has no spans")
    n_ch = len(spans[0].plan)
    if any(len(s.plan) != n_ch for s in spans):
        raise DomainError("every span must carry the same channels")
    spps = [span_profiles(s, grid_points) for s in spans] if spps is None else list(spps)
    polys = []
    psd = np.zeros((len(spans), n_ch))
    sci = np.zeros((len(spans), n_ch))
    trans = np.ones((len(spans), n_ch))
    n_mci = np.zeros(n_ch, dtype=int)
    warns = [[] for _ in range(n_ch)]
    for s, (setup, spp) in enumerate(zip(spans, spps)):
        fits = [fit_polynomial(spp.z, spp.profiles[i], degree, pin_origin=pin_origin) for i in range(n_ch)]
        polys.append(fits)
        for i in range(n_ch):
            gdb = None if setup.gamma_db is None else setup.gamma_db[i]
            trans[s, i] = transfer_factor(setup.fiber, spp, i, gdb)
        for c in range(n_ch):
            pL = float(spp.profiles[c, -1])
            gamma_t = trans[s, c] / pL
            res = span_nli(setup.plan, setup.fiber, fits, c, gamma_t=gamma_t, p_cut_l=pL, span=s)
            psd[s, c] = res.g_nli
            sci[s, c] = res.g_sci
            n_mci[c] = max(n_mci[c], res.n_mci_ignored)
            warns[c].extend(f"span {s}: {w}" for w in res.warnings)
    g_end = accumulate_link(psd, trans)
    last = spans[-1]
    p_ch = last.plan.powers * trans[-1]
    report = gsnr_nli(last.plan, g_end, correction=correction, p_ch=p_ch, warnings=warns)
    return LinkResult(report, spps, polys, psd, trans, sci, n_mci)
