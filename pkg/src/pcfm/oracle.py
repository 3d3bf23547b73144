"""Brute-force GN-model reference for the per-island core integrals.

The core integral of an island is

    K = int int |int_0^L p_x(z) exp(j 4 pi^2 f1 f2 beta2 z) dz|^2 df1 df2

over the island support, with f1, f2 measured from the CUT centre. The
inner z-integral is analytic for polynomial profiles and piecewise-linear
(Filon) for sampled ones. The outer integral is adaptive 2D cubature.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cubature, quad

from . import _core
from .errors import DomainError, OracleBudgetError, QuadratureError
from .kernels import IslandGeometry, beta2_eff, gamma_island
from .polyfit import PolyProfile, eval_poly, fit_polynomial

__all__ = [
    "PolyPhase",
    "SampledPhase",
    "island_core",
    "core_integral_numeric",
    "OracleResult",
    "full_gn_reference",
]

VALIDATION_RTOL = 1e-7
BENCHMARK_RTOL = 1e-4
_MCI_SAMPLES = 401


class PolyPhase:
    """Inner integral of a polynomial profile."""

    def __init__(self, poly, L):
        c = poly.coeffs if isinstance(poly, PolyProfile) else np.asarray(poly, dtype=float)
        self.L = float(L)
        self.q = c * self.L ** np.arange(c.size)

    def __call__(self, theta):
        return self.L * _core.phase_poly(self.q, np.asarray(theta, dtype=float) * self.L)

    def energy(self):
        # numerical on purpose: the closed-form kernels use the exact moment sum
        v, _ = quad(lambda u: np.polynomial.polynomial.polyval(u, self.q) ** 2, 0.0, 1.0,
                    epsabs=0, epsrel=1e-13, limit=200)
        return float(self.L * v)


class SampledPhase:
    """Inner integral of a piecewise-linear sampled profile."""

    def __init__(self, z, p):
        self.z = np.ascontiguousarray(z, dtype=float)
        self.p = np.ascontiguousarray(p, dtype=float)
        self.L = float(self.z[-1])

    def __call__(self, theta):
        return _core.phase_filon(self.z, self.p, np.asarray(theta, dtype=float))

    def energy(self):
        h = np.diff(self.z)
        a, b = self.p[:-1], self.p[1:]
        return float(np.sum(h * (a * a + a * b + b * b)) / 3.0)


def _as_phase(profile, L):
    if isinstance(profile, (PolyPhase, SampledPhase)):
        return profile
    if isinstance(profile, PolyProfile):
        return PolyPhase(profile, L)
    z, p = profile
    return SampledPhase(z, p)


def _smooth(u):
    # smoothstep map of [0, 1] onto itself; clusters nodes at both ends
    return u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u)


def _pieces(f1_lo, f1_hi, f2_lo, f2_hi, s_lo=None, s_hi=None):
    """Split the support into pieces where the f2 limits are linear in f1.

    Every piece has the axes f1 = 0 and f2 = 0 only on its boundary.
    Yields (a, b, lo_a, lo_b, hi_a, hi_b): f2 limits at f1 = a and f1 = b.
    """
    bands = [(f2_lo, min(f2_hi, 0.0)), (max(f2_lo, 0.0), f2_hi)]
    cuts = {f1_lo, f1_hi}
    if f1_lo < 0 < f1_hi:
        cuts.add(0.0)
    if s_lo is not None:
        for c in (s_lo - f2_lo, s_lo - f2_hi, s_hi - f2_lo, s_hi - f2_hi, s_lo, s_hi):
            if f1_lo < c < f1_hi:
                cuts.add(c)
    edges = sorted(cuts)
    for lo2, hi2 in bands:
        if hi2 <= lo2:
            continue
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue

            def lim(f1):
                lo, hi = lo2, hi2
                if s_lo is not None:
                    lo = max(lo, s_lo - f1)
                    hi = min(hi, s_hi - f1)
                return lo, hi

            (la, ha), (lb, hb) = lim(a), lim(b)
            if ha - la <= 0 and hb - lb <= 0:
                mid = lim(0.5 * (a + b))
                if mid[1] - mid[0] <= 0:
                    continue
            yield a, b, la, lb, ha, hb


@dataclass
class _Budget:
    limit: float = math.inf
    used: int = 0


def island_core(phase, beta2, f1_range, f2_range, sum_range=None, rtol=VALIDATION_RTOL, atol=0.0,
                budget=None, max_subdivisions=20000):
    """Adaptive cubature of |phase(4 pi^2 f1 f2 beta2)|^2 over one island.

    ``sum_range`` adds the lozenge condition f1 + f2 in [s_lo, s_hi];
    without it the full rectangle ``f1_range x f2_range`` is used.
    Returns ``(estimate, error_bound)``.
    """
    k = 4.0 * math.pi**2 * beta2
    s_lo, s_hi = (None, None) if sum_range is None else sum_range
    pieces = list(_pieces(f1_range[0], f1_range[1], f2_range[0], f2_range[1], s_lo, s_hi))
    if not pieces:
        return 0.0, 0.0
    per_atol = atol / len(pieces)
    total = 0.0
    err = 0.0
    for a, b, la, lb, ha, hb in pieces:

        def f(x, a=a, b=b, la=la, lb=lb, ha=ha, hb=hb):
            su, dsu = _smooth(x[:, 0])
            tu, dtu = _smooth(x[:, 1])
            f1 = a + (b - a) * su
            w = su
            lo = la + (lb - la) * w
            hi = ha + (hb - ha) * w
            width = np.maximum(hi - lo, 0.0)
            f2 = lo + width * tu
            v = phase(k * f1 * f2)
            if budget is not None:
                budget.used += x.shape[0]
            return (v.real**2 + v.imag**2) * width * dtu * (b - a) * dsu

        res = cubature(f, [0.0, 0.0], [1.0, 1.0], rule="gk21", rtol=rtol, atol=per_atol,
                       max_subdivisions=max_subdivisions)
        est = float(np.squeeze(res.estimate))
        e = float(np.squeeze(res.error))
        if res.status != "converged":
            raise QuadratureError("island cubature did not converge", estimate=total + est, error_bound=err + e)
        total += est
        err += e
        if budget is not None and budget.used > budget.limit:
            raise OracleBudgetError("oracle evaluation budget exhausted", partial=total)
    return total, err


def core_integral_numeric(profile, geom, domain="rectangle", rtol=VALIDATION_RTOL, atol=0.0):
    """Numerical core integral of one island.

    ``profile`` is a PolyProfile or a sampled ``(z, p)`` pair. ``domain`` is
    ``"rectangle"`` (f1 over the interferer band at ``f_offset``, f2 over the
    CUT band) or ``"stretched"`` (f2 over the whole real line, reduced with
    Parseval's identity to a 1D integral over f1).
    """
    phase = _as_phase(profile, geom.L)
    f1 = (geom.f_offset - geom.b_interferer / 2, geom.f_offset + geom.b_interferer / 2)
    if domain == "rectangle":
        est, err = island_core(phase, geom.beta2_eff, f1, (-geom.b_cut / 2, geom.b_cut / 2), rtol=rtol, atol=atol)
        return est
    if domain == "stretched":
        if f1[0] <= 0 <= f1[1]:
            raise DomainError("stretched domain requires an island clear of f1 = 0")
        if geom.beta2_eff == 0:
            raise DomainError("stretched domain requires beta2_eff != 0")
        energy = phase.energy()
        scale = energy / (2 * math.pi * abs(geom.beta2_eff))
        v, e = quad(lambda f: 1.0 / abs(f), f1[0], f1[1], epsabs=0, epsrel=min(rtol, 1e-10), limit=200)
        if e > max(rtol * abs(v), atol / scale):
            raise QuadratureError("stretched f1 quadrature missed tolerance", estimate=scale * v, error_bound=scale * e)
        return scale * v
    raise DomainError(f"unknown domain {domain!r}")


@dataclass
class OracleResult:
    """Per-channel reference NLI PSD (mW/THz) with its error bound and island breakdown."""

    g_nli: np.ndarray
    error_bound: np.ndarray
    islands: dict


def _mci_phase(profiles_at, idx, cut, L):
    m, k, n = idx
    z = np.linspace(0.0, L, _MCI_SAMPLES)
    pm, pk, pn, pc = (profiles_at(i, z) for i in (m, k, n, cut))
    return SampledPhase(z, np.sqrt(pm * pk * pn / pc))


def full_gn_reference(plan, spp, fiber, include_mci=True, lozenge_domains=True, profile_source="poly",
                      degree=9, polys=None, cuts=None, transfer=None, rtol=VALIDATION_RTOL, budget=None):
    """Reference per-span NLI PSD at each CUT centre by direct island integration.

    ``profile_source="poly"`` integrates the fitted polynomials (``polys`` or
    fresh degree-``degree`` fits), ``"sampled"`` integrates the SPP samples
    themselves. ``transfer[i]`` is Gamma * p_i(L) (default 1). ``budget`` caps
    the number of integrand evaluations.
    """
    from .engine import enumerate_islands, island_weight

    n_ch = len(plan)
    L = spp.length_km
    cuts = range(n_ch) if cuts is None else cuts
    transfer = np.ones(n_ch) if transfer is None else np.asarray(transfer, dtype=float)
    if profile_source == "poly":
        if polys is None:
            polys = [fit_polynomial(spp.z, spp.profiles[i], degree) for i in range(n_ch)]

        def profiles_at(i, z):
            return np.maximum(eval_poly(polys[i], z), 1e-300)

        def channel_phase(i):
            return PolyPhase(polys[i], L)
    elif profile_source == "sampled":
        def profiles_at(i, z):
            return np.interp(z, spp.z, spp.profiles[i])

        def channel_phase(i):
            return SampledPhase(spp.z, spp.profiles[i])
    else:
        raise DomainError(f"unknown profile_source {profile_source!r}")

    f = plan.freqs
    B = plan.bandwidths
    G = plan.psd
    aeff = fiber.aeff(f)
    bud = _Budget(limit=math.inf if budget is None else float(budget))
    g_out = np.zeros(n_ch)
    e_out = np.zeros(n_ch)
    done = {}
    phases = {}
    for c in cuts:
        isl = enumerate_islands(plan, c, include_mci=include_mci)
        weights = []
        for x in isl:
            b2 = beta2_eff(fiber.beta2, fiber.beta3, fiber.beta4, fiber.fc, f[x.m], f[x.k])
            gam = gamma_island(f[c], aeff[c], aeff[x.m], aeff[x.k], aeff[x.n], fiber.n2) * 1e-3
            w = island_weight(transfer[c], G[x.m], G[x.k], G[x.n], gam)
            weights.append((b2, w))
        # the SCI island goes first; its value sets the absolute tolerance of the rest
        order = sorted(range(len(isl)), key=lambda i: isl[i].kind != "SCI")
        atol_g = 0.0
        for i in order:
            x = isl[i]
            b2, w = weights[i]
            if x.kind == "MCI":
                ph = _mci_phase(profiles_at, (x.m, x.k, x.n), c, L)
            else:
                inter = x.n
                if inter not in phases:
                    phases[inter] = channel_phase(inter)
                ph = phases[inter]
            f1r = (f[x.m] - f[c] - B[x.m] / 2, f[x.m] - f[c] + B[x.m] / 2)
            f2r = (f[x.k] - f[c] - B[x.k] / 2, f[x.k] - f[c] + B[x.k] / 2)
            sr = (f[x.n] - f[c] - B[x.n] / 2, f[x.n] - f[c] + B[x.n] / 2) if lozenge_domains else None
            try:
                K, eK = island_core(ph, b2, f1r, f2r, sr, rtol=rtol, atol=atol_g / w if w > 0 else 0.0, budget=bud)
            except OracleBudgetError as exc:
                raise OracleBudgetError(str(exc), completed=list(done), partial=g_out) from exc
            g_out[c] += w * K
            e_out[c] += w * eK
            if x.kind == "SCI":
                atol_g = rtol * w * K
            done[(c, x.m, x.k, x.n)] = w * K
    return OracleResult(g_out, e_out, done)
