"""Special functions used by the closed-form kernels.

``sin_integral`` is Si(x), ``hyp2f3_half`` is 2F3(1/2,1/2; 3/2,3/2,3/2; -x^2/4)
and ``poly_phase_integral`` is the analytic integral of a polynomial times a
linear phase ramp over [0, L].
"""
from dataclasses import dataclass

import numpy as np

from . import _core
from .errors import DomainError, EvaluationError

__all__ = ["EvalTolerance", "sin_integral", "hyp2f3_half", "poly_phase_integral"]

_SERIES_SI = 4.0
_SERIES_H = 12.0
_FPMIN = 1e-300
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class EvalTolerance:
    """Accuracy knobs for series and iterative evaluations."""

    rel_tol: float = 1e-16
    max_terms: int = 400

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_TOL = EvalTolerance()


def _as_finite(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _si_series(x):
    # Maclaurin: sum (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
    x2 = x * x
    term = x.copy()
    total = x.copy()
    for k in range(1, 40):
        term = -term * x2 / ((2 * k) * (2 * k + 1))
        total += term / (2 * k + 1)
    return total


def _si_cf(t):
    # continued fraction for E1(i t), modified Lentz; t > 0
    b = 1.0 + 1j * t
    c = np.full(t.shape, 1.0 / _FPMIN, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(t.shape, dtype=bool)
    for i in range(2, 200):
        a = -float((i - 1) ** 2)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta.real - 1.0) + np.abs(delta.imag) < 1e-16
        if done.all():
            break
    h = h * (np.cos(t) - 1j * np.sin(t))
    return 0.5 * np.pi + h.imag


def sin_integral(x):
    """Sine integral Si(x) = int_0^x sin(t)/t dt.

    Accepts scalars or arrays. Odd in ``x`` by construction.
    """
    arr = _as_finite(x)
    ax = np.abs(np.atleast_1d(arr))
    out = np.empty(ax.shape)
    small = ax <= _SERIES_SI
    if small.any():
        out[small] = _si_series(ax[small])
    if (~small).any():
        out[~small] = _si_cf(ax[~small])
    out = np.copysign(out, np.atleast_1d(arr))
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def _h_series(ax, tol):
    # Neumaier-compensated sum of the alternating hypergeometric series
    z = -0.25 * ax * ax
    term = np.ones(ax.shape)
    total = np.ones(ax.shape)
    comp = np.zeros(ax.shape)
    for k in range(tol.max_terms):
        term = term * ((k + 0.5) ** 2 / ((k + 1.5) ** 3 * (k + 1))) * z
        t = total + term
        comp += np.where(np.abs(total) >= np.abs(term), (total - t) + term, (term - t) + total)
        total = t
        if np.all(np.abs(term) <= tol.rel_tol * np.abs(total + comp)):
            return total + comp
    raise EvaluationError(
        f"2F3 series did not converge in {tol.max_terms} terms",
        partial_sum=(total + comp).tolist(),
        terms=tol.max_terms,
    )


def _si_over_t_integral(a, b):
    """int_a^b Si(t)/t dt by composite 12-point Gauss-Legendre, panels <= 2 wide."""
    npan = max(1, int(np.ceil((b - a) / 2.0)))
    edges = np.linspace(a, b, npan + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = sin_integral(t.ravel()).reshape(t.shape) / t
    return float(np.sum(half * (vals @ _GL_W)))


_H_ANCHOR = None


def hyp2f3_half(x, tol=DEFAULT_TOL):
    """2F3(1/2, 1/2; 3/2, 3/2, 3/2; -x^2/4), even in ``x``.

    Identical to (1/x) int_0^x Si(t)/t dt. The series is summed for
    ``|x| <= 12``; beyond that the integral form is continued from x = 12.
    """
    global _H_ANCHOR
    arr = _as_finite(x)
    ax = np.abs(np.atleast_1d(arr)).astype(float)
    out = np.empty(ax.shape)
    small = ax <= _SERIES_H
    if small.any():
        out[small] = _h_series(ax[small], tol)
    if (~small).any():
        if _H_ANCHOR is None:
            _H_ANCHOR = _SERIES_H * float(_h_series(np.array([_SERIES_H]), DEFAULT_TOL)[0])
        for i in np.flatnonzero(~small):
            out[i] = (_H_ANCHOR + _si_over_t_integral(_SERIES_H, ax[i])) / ax[i]
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def poly_phase_integral(coeffs, L, theta):
    """int_0^L sum_n coeffs[n] z^n exp(1j*theta*z) dz, analytically.

    ``coeffs`` are in km^-n, ``L`` in km and ``theta`` in rad/km (scalar or
    array). ``theta == 0`` gives the plain polynomial integral.
    """
    c = _as_finite(coeffs, "coeffs").ravel()
    th = _as_finite(theta, "theta")
    L = float(L)
    if not (np.isfinite(L) and L > 0):
        raise DomainError(f"L must be positive and finite, got {L}")
    q = c * L ** np.arange(c.size)
    val = L * _core.phase_poly(q, np.atleast_1d(th).ravel() * L)
    return complex(val[0]) if th.ndim == 0 else val.reshape(th.shape)
