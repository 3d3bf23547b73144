"""Core-integral kernels for self- and cross-channel interference islands.

All kernels use THz, km and ps^2/km so that the phase 4 pi^2 f1 f2 beta2 z
is dimensionless; results are in THz^2 km^2.
"""
import math
import warnings
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import _core
from .errors import DivergenceError, DomainError, QuadratureError, UnsupportedDegreeError
from .polyfit import PolyProfile
from .specfun import hyp2f3_half, sin_integral

__all__ = [
    "IslandGeometry",
    "beta2_eff",
    "gamma_island",
    "k_xci_closed",
    "k_sci_closed",
    "k_sci_generic",
    "k_sci_series",
    "profile_energy",
    "X_SWITCH",
]

C_LIGHT = 299792458.0
PI = math.pi
# |x| below which the closed forms give way to the small-x series
X_SWITCH = 4.0
_SERIES_TERMS = 160


@dataclass(frozen=True)
class IslandGeometry:
    f_offset: float
    b_interferer: float
    b_cut: float
    L: float
    beta2_eff: float

    def __post_init__(self):
        if not (self.b_interferer > 0 and self.b_cut > 0 and self.L > 0):
            raise DomainError("bandwidths and L must be > 0")
        if not all(np.isfinite([self.f_offset, self.b_interferer, self.b_cut, self.L, self.beta2_eff])):
            raise DomainError("geometry must be finite")


def beta2_eff(beta2, beta3, beta4, fc, f_m, f_k):
    """Effective GVD (ps^2/km) seen by an island centred on (f_m, f_k)."""
    dm = f_m - fc
    dk = f_k - fc
    return beta2 + PI * beta3 * (dm + dk) + (2.0 / 3.0) * PI**2 * beta4 * (dm * dm + dm * dk + dk * dk)


def gamma_island(f_cut, aeff_cut, aeff_m, aeff_k, aeff_n, n2):
    """Nonlinear coefficient in 1/(W km) from the mean of the four effective areas (um^2)."""
    areas = np.array([aeff_cut, aeff_m, aeff_k, aeff_n], dtype=float)
    if np.any(areas <= 0):
        raise DomainError("effective areas must be > 0")
    a_x = areas.mean() * 1e-12
    return 2.0 * PI * f_cut * 1e12 / C_LIGHT * n2 / a_x * 1e3


def _coeffs(poly):
    c = poly.coeffs if isinstance(poly, PolyProfile) else np.asarray(poly, dtype=float).ravel()
    if c.size == 0 or not np.all(np.isfinite(c)):
        raise DomainError("polynomial coefficients must be finite")
    return c


def profile_energy(poly, L):
    """int_0^L p(z)^2 dz."""
    q = _coeffs(poly) * float(L) ** np.arange(_coeffs(poly).size)
    n = np.arange(q.size)
    return float(L * (q[:, None] * q[None, :] / (n[:, None] + n[None, :] + 1)).sum())


def k_xci_closed(poly, geom):
    """Stretched-island XCI core integral."""
    f, B, L, b2 = geom.f_offset, geom.b_interferer, geom.L, geom.beta2_eff
    if abs(f) <= B / 2:
        raise DomainError(f"|f_offset|={abs(f)} THz does not clear the interferer half-band {B / 2} THz")
    if b2 == 0:
        raise DivergenceError("beta2_eff = 0: stretched XCI kernel diverges")
    log_term = abs(math.log((f + B / 2) / (f - B / 2)))
    return profile_energy(poly, L) * log_term / (2.0 * PI * abs(b2))


def _k0(p, B, L, b2, x):
    (p0,) = p
    C = math.cos(x)
    return (
        2 * B**2 * L**2 * p0**2 * hyp2f3_half(x)
        + 2 * p0**2 * (1 - C) / (PI**4 * b2**2 * B**2)
        - 2 * L * p0**2 * sin_integral(x) / (PI**2 * b2)
    )


def _k1(p, B, L, b2, x):
    p0, p1 = p
    C, S, SI, H = math.cos(x), math.sin(x), sin_integral(x), hyp2f3_half(x)
    y2 = PI**4 * b2**2 * B**4
    t = (
        2 * p1**2
        + 9 * y2 * (2 * p0**2 + 2 * L * p0 * p1 + L**2 * p1**2)
        - 2 * (p1**2 + y2 * (9 * p0**2 + 9 * L * p0 * p1 + 4 * L**2 * p1**2)) * C
        + 6 * y2**2 * L**2 * (3 * p0**2 + 3 * L * p0 * p1 + L**2 * p1**2) * H
        - 2 * PI**2 * b2 * B**2 * L * p1**2 * S
        - 2 * PI**6 * b2**3 * B**6 * L * (9 * p0**2 + 9 * L * p0 * p1 + 4 * L**2 * p1**2) * SI
    )
    return t / (9 * y2**2 * B**-2)


def _k2(p, B, L, b2, x):
    p0, p1, p2 = p
    C, S, SI, H = math.cos(x), math.sin(x), sin_integral(x), hyp2f3_half(x)
    y2 = PI**4 * b2**2 * B**4
    y4 = y2 * y2
    poly_c = (
        900 * p0**2 + 900 * L * p0 * p1 + 400 * L**2 * p1**2 + 650 * L**2 * p0 * p2
        + 675 * L**3 * p1 * p2 + 306 * L**4 * p2**2
    )
    t = (
        144 * p2**2
        + 100 * y2 * (p1**2 - 4 * p0 * p2)
        + 450 * y4 * (2 * p0**2 + 2 * L * p0 * p1 + L**2 * p1**2 + 2 * L**2 * p0 * p2 + 2 * L**3 * p1 * p2 + L**4 * p2**2)
        + (-144 * p2**2 - 4 * y2 * (25 * p1**2 - 100 * p0 * p2 - 18 * L**2 * p2**2) - y4 * poly_c) * C
        + 30 * y4 * y2 * L**2
        * (30 * p0**2 + 30 * L * p0 * p1 + 10 * L**2 * (p1**2 + 2 * p0 * p2) + 15 * L**3 * p1 * p2 + 6 * L**4 * p2**2)
        * H
        + PI**2 * b2 * B**2 * L
        * (-144 * p2**2 - y2 * (100 * p1**2 + 50 * p0 * p2 + 225 * L * p1 * p2 + 126 * L**2 * p2**2))
        * S
        - PI**10 * b2**5 * B**10 * L * poly_c * SI
    )
    return t / (450 * PI**12 * b2**6 * B**10)


def _k3(p, B, L, b2, x):
    p0, p1, p2, p3 = p
    C, S, SI, H = math.cos(x), math.sin(x), sin_integral(x), hyp2f3_half(x)
    y2 = PI**4 * b2**2 * B**4
    y4 = y2 * y2
    y6 = y4 * y2
    const = (
        32400 * p3**2
        + 7056 * y2 * (p2**2 - 3 * p1 * p3)
        + 2450 * y4 * (2 * p1**2 - 8 * p0 * p2 - 12 * L * p0 * p3 - 6 * L**2 * p1 * p3 - 4 * L**3 * p2 * p3 - 3 * L**4 * p3**2)
        + 22050 * y6 * (
            2 * p0**2 + 2 * L * p0 * p1 + L**2 * p1**2 + 2 * L**2 * p0 * p2 + 2 * L**3 * p1 * p2 + L**4 * p2**2
            + 2 * L**3 * p0 * p3 + 2 * L**4 * p1 * p3 + 2 * L**5 * p2 * p3 + L**6 * p3**2
        )
    )
    poly_c = (
        44100 * p0**2 + 44100 * L * p0 * p1 + 19600 * L**2 * p1**2 + 31850 * L**2 * p0 * p2
        + 33075 * L**3 * p1 * p2 + 14994 * L**4 * p2**2 + 25725 * L**3 * p0 * p3 + 28518 * L**4 * p1 * p3
        + 26950 * L**5 * p2 * p3 + 12450 * L**6 * p3**2
    )
    c_cos = (
        -32400 * p3**2
        + 24 * y2 * (-294 * p2**2 + 882 * p1 * p3 + 675 * L**2 * p3**2)
        + 4 * y4 * (
            -1225 * p1**2 + 4900 * p0 * p2 + 882 * L**2 * p2**2 + 7350 * L * p0 * p3
            + 1029 * L**2 * p1 * p3 + 2450 * L**3 * p2 * p3 + 1500 * L**4 * p3**2
        )
        - y6 * poly_c
    )
    c_sin = PI**2 * b2 * B**2 * L * (
        -32400 * p3**2
        + 24 * y2 * (-294 * p2**2 + 882 * p1 * p3 + 225 * L**2 * p3**2)
        - y4 * (
            4900 * p1**2 + 2450 * p0 * p2 + 11025 * L * p1 * p2 + 6174 * L**2 * p2**2 + 3675 * L * p0 * p3
            + 10878 * L**2 * p1 * p3 + 12250 * L**3 * p2 * p3 + 6150 * L**4 * p3**2
        )
    )
    c_h = 210 * PI**16 * b2**8 * B**16 * L**2 * (
        210 * p0**2 + 210 * L * p0 * p1 + 70 * L**2 * p1**2 + 140 * L**2 * p0 * p2 + 105 * L**3 * p1 * p2
        + 42 * L**4 * p2**2 + 105 * L**3 * p0 * p3 + 84 * L**4 * p1 * p3 + 70 * L**5 * p2 * p3 + 30 * L**6 * p3**2
    )
    c_si = -(PI**14) * b2**7 * B**14 * L * poly_c
    return (const + c_cos * C + c_sin * S + c_h * H + c_si * SI) / (22050 * PI**16 * b2**8 * B**14)


_CLOSED = (_k0, _k1, _k2, _k3)


def _sci_x(B, L, b2):
    return PI**2 * b2 * B**2 * L


def k_sci_series(poly, B, L, beta2_eff, terms=_SERIES_TERMS):
    """Taylor series of the SCI kernel in x = pi^2 beta2 B^2 L (exact, entire in x).

    K = B^2 L^2 sum_{s even} c_s x^s / (s + 1)^2, with c_s built from the
    moments mu_m = sum_n q_n / (n + m + 1) of the normalized polynomial.
    """
    c = _coeffs(poly)
    q = c * float(L) ** np.arange(c.size)
    x = _sci_x(B, L, beta2_eff)
    n = np.arange(q.size)
    mu = np.array([np.sum(q / (n + m + 1)) for m in range(terms + 1)])
    inv_fact = np.array([1.0 / factorial(m) for m in range(terms + 1)])
    a = mu * inv_fact
    b = a * (-1.0) ** np.arange(terms + 1)
    total = 0.0
    xs = 1.0
    for s in range(0, terms + 1, 2):
        cs = (-1) ** (s // 2) * float(np.dot(a[: s + 1], b[s::-1]))
        term = cs * xs / (s + 1) ** 2
        total += term
        if s > 4 and abs(term) < 1e-18 * abs(total):
            break
        xs *= x * x
    return B**2 * L**2 * total


def k_sci_closed(poly, B, L, beta2_eff):
    """Closed-form SCI core integral for profiles of degree <= 3.

    For |x| <= X_SWITCH the closed forms cancel heavily and the exact
    Taylor series is summed instead.
    """
    c = _coeffs(poly)
    while c.size > 1 and c[-1] == 0.0:
        c = c[:-1]
    if c.size > 4:
        raise UnsupportedDegreeError(f"closed-form SCI covers degree <= 3, got {c.size - 1}; use k_sci_generic")
    if not all(np.isfinite([B, L, beta2_eff])) or B <= 0 or L <= 0:
        raise DomainError("B and L must be positive and finite")
    x = _sci_x(B, L, beta2_eff)
    if abs(x) <= X_SWITCH:
        return k_sci_series(c, B, L, beta2_eff)
    return _CLOSED[c.size - 1](tuple(float(v) for v in c), B, L, beta2_eff, x)


def k_sci_generic(poly, B, L, beta2_eff, rel_tol=1e-11):
    """SCI core integral for any degree via the exact one-dimensional reduction.

    K = B^2 L^2 int_0^1 (-ln s) |Q(x s)|^2 ds, where Q is the normalized
    phase integral of the profile and x = pi^2 beta2 B^2 L.
    """
    if not 5e-14 <= rel_tol < 1:
        raise DomainError(f"rel_tol must lie in [5e-14, 1), got {rel_tol}")
    c = _coeffs(poly)
    q = c * float(L) ** np.arange(c.size)
    x = _sci_x(B, L, beta2_eff)

    def F(s):
        v = _core.phase_poly(q, np.array([x * s]))[0]
        return v.real * v.real + v.imag * v.imag

    nseg = max(1, int(math.ceil(abs(x) / (4 * PI))))
    edges = np.linspace(0.0, 1.0, nseg + 1)
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            v, e = quad(F, 0.0, edges[1], weight="alg-loga", wvar=(0.0, 0.0), epsabs=0, epsrel=rel_tol, limit=200)
            total -= v
            err += e
            for a, b in zip(edges[1:-1], edges[2:]):
                v, e = quad(lambda s: -math.log(s) * F(s), a, b, epsabs=0, epsrel=rel_tol, limit=200)
                total += v
                err += e
        except IntegrationWarning as exc:
            raise QuadratureError(
                f"SCI reduction quadrature failed: {exc}", estimate=B**2 * L**2 * total, error_bound=B**2 * L**2 * err
            ) from exc
    if err > 1e3 * rel_tol * abs(total) and err > 1e-300:
        raise QuadratureError(
            "SCI reduction quadrature missed its tolerance",
            estimate=B**2 * L**2 * total,
            error_bound=B**2 * L**2 * err,
        )
    return B**2 * L**2 * total
