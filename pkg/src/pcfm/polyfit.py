"""Least-squares polynomial compression of spatial power profiles."""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FitConditioningError

__all__ = ["PolyProfile", "fit_polynomial", "eval_poly"]

DEFAULT_DEGREE = 9


@dataclass(frozen=True)
class PolyProfile:
    """p(z) = sum_n coeffs[n] z**n with z in km (coeffs[n] in km^-n)."""

    coeffs: np.ndarray
    rms_residual: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).ravel()
        if c.size == 0 or not np.all(np.isfinite(c)):
            raise DomainError("polynomial coefficients must be a non-empty finite array")
        if not self.rms_residual >= 0:
            raise DomainError("rms_residual must be non-negative")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, z):
        return eval_poly(self, z)

    def scaled(self, L):
        """Coefficients q_n = p_n L^n of the same profile in u = z/L."""
        return self.coeffs * float(L) ** np.arange(self.coeffs.size)


def eval_poly(profile, z):
    """Horner evaluation of ``profile`` at ``z`` (km)."""
    c = profile.coeffs if isinstance(profile, PolyProfile) else np.asarray(profile, dtype=float)
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z) + c[-1]
    for cn in c[-2::-1]:
        out = out * z + cn
    return float(out) if out.ndim == 0 else out


def fit_polynomial(z, p, degree=DEFAULT_DEGREE, pin_origin=False):
    """Least-squares fit of samples ``(z, p)`` by a polynomial of ``degree``.

    The fit runs in u = z/z_max so the Vandermonde matrix stays usable up to
    high degree; coefficients are rescaled to km^-n afterwards. With
    ``pin_origin`` the constant term is fixed to 1 (p(0) = 1).
    """
    z = np.asarray(z, dtype=float).ravel()
    p = np.asarray(p, dtype=float).ravel()
    degree = int(degree)
    if degree < 0:
        raise DomainError(f"degree must be >= 0, got {degree}")
    if z.shape != p.shape:
        raise DomainError("z and p must have the same length")
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(p))):
        raise DomainError("samples must be finite")
    if np.any(np.diff(z) < 0):
        raise DomainError("z must be ascending")
    n_unique = np.unique(z).size
    need = degree if pin_origin else degree + 1
    if n_unique < max(need, 1):
        raise FitConditioningError(
            f"{n_unique} distinct abscissae cannot determine a degree-{degree} fit"
        )
    scale = z[-1] if z[-1] > 0 else 1.0
    u = z / scale
    V = np.vander(u, degree + 1, increasing=True)
    if pin_origin:
        sol, *_ = np.linalg.lstsq(V[:, 1:], p - 1.0, rcond=None)
        q = np.concatenate([[1.0], sol])
    else:
        q, *_ = np.linalg.lstsq(V, p, rcond=None)
    resid = V @ q - p
    rms = float(np.sqrt(np.mean(resid**2)))
    coeffs = q / scale ** np.arange(degree + 1)
    return PolyProfile(coeffs, rms)
