"""Spatial power profiles: attenuation, lumped losses and coupled Raman equations.

Units: frequency in THz, length in km, power in mW. Attenuation tables are
in dB/km and Raman gain tables in 1/(W km) at the reference pump frequency.
"""
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _core
from .errors import DomainError, SolverError, StepSizeError
from .specfun import EvalTolerance

__all__ = [
    "LumpedLoss",
    "FiberSpec",
    "Channel",
    "ChannelPlan",
    "RamanPump",
    "SppGrid",
    "span_grid",
    "attenuation_only_spp",
    "solve_raman",
    "transfer_factor",
    "DEFAULT_RAMAN_GAIN",
]

DEFAULT_GRID_POINTS = 1001
EVENT_EPS_KM = 1e-6
DB = np.log(10.0) / 10.0
SOLVER_TOL = EvalTolerance(rel_tol=1e-8, max_terms=200)
_PROBE_MW = 1e-9

# triangular approximation of a silica Raman gain curve, 1/(W km) vs offset in THz
DEFAULT_RAMAN_GAIN = ((0.0, 0.0), (13.2, 0.42), (15.0, 0.10), (18.0, 0.05), (25.0, 0.02), (30.0, 0.0))
DEFAULT_RAMAN_REF_THZ = 206.5


def _table(value, name):
    """Normalize a scalar or a sequence of (x, y) pairs to a sorted (2, n) array."""
    if np.ndim(value) == 0:
        arr = np.array([[0.0], [float(value)]])
    else:
        arr = np.asarray(value, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
            raise DomainError(f"{name} must be a scalar or a list of (x, y) pairs")
        arr = arr[np.argsort(arr[:, 0])].T
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def _lookup(table, x):
    return np.interp(x, table[0], table[1])


@dataclass(frozen=True)
class LumpedLoss:
    position_km: float
    loss_db: float
    applies_to: str = "both"

    def __post_init__(self):
        if self.applies_to not in ("signals", "pumps", "both"):
            raise DomainError(f"applies_to must be signals, pumps or both, got {self.applies_to!r}")

    def hits(self, is_pump):
        return self.applies_to == "both" or (self.applies_to == "pumps") == bool(is_pump)


@dataclass(frozen=True)
class FiberSpec:
    """Physical description of one fiber span."""

    length_km: float
    alpha_db_per_km: object = 0.2
    beta2: float = -21.3
    beta3: float = 0.0
    beta4: float = 0.0
    fc: float = 193.5
    aeff_table: object = 80.0
    n2: float = 2.6e-20
    raman_gain: object = 0.0
    raman_ref_thz: float = DEFAULT_RAMAN_REF_THZ
    lumped_events: Sequence[LumpedLoss] = ()

    def __post_init__(self):
        if not self.length_km > 0:
            raise DomainError(f"length_km must be > 0, got {self.length_km}")
        alpha = _table(self.alpha_db_per_km, "alpha_db_per_km")
        aeff = _table(self.aeff_table, "aeff_table")
        gain = _table(self.raman_gain, "raman_gain")
        if np.any(alpha[1] < 0):
            raise DomainError("attenuation values must be >= 0")
        if np.any(aeff[1] <= 0):
            raise DomainError("effective areas must be > 0")
        if np.any(gain[0] < 0):
            raise DomainError("raman_gain offsets must be >= 0")
        events = tuple(e if isinstance(e, LumpedLoss) else LumpedLoss(*e) for e in self.lumped_events)
        for e in events:
            if not 0 < e.position_km < self.length_km:
                raise DomainError(f"lumped event at {e.position_km} km lies outside (0, {self.length_km})")
        object.__setattr__(self, "lumped_events", tuple(sorted(events, key=lambda e: e.position_km)))
        object.__setattr__(self, "_alpha", alpha)
        object.__setattr__(self, "_aeff", aeff)
        object.__setattr__(self, "_gain", gain)

    def alpha_db(self, f):
        return _lookup(self._alpha, f)

    def alpha_pow(self, f):
        """Power attenuation in 1/km."""
        return self.alpha_db(f) * DB

    def aeff(self, f):
        return _lookup(self._aeff, f)

    @property
    def has_raman_gain(self):
        return bool(np.any(self._gain[1] != 0))

    def gain(self, df):
        """Raman gain at offset ``df`` THz, 1/(W km), zero outside the table."""
        g = self._gain
        if g.shape[1] == 1:
            return np.full(np.shape(df), g[1, 0])
        return np.interp(np.abs(df), g[0], g[1], left=0.0, right=0.0)


@dataclass(frozen=True)
class Channel:
    freq_thz: float
    bandwidth_thz: float
    power_mw: float


@dataclass(frozen=True)
class ChannelPlan:
    channels: Sequence[Channel]
    cut_index: int = 0

    def __post_init__(self):
        chans = tuple(c if isinstance(c, Channel) else Channel(*c) for c in self.channels)
        if not chans:
            raise DomainError("channel plan is empty")
        f = np.array([c.freq_thz for c in chans])
        b = np.array([c.bandwidth_thz for c in chans])
        if np.any(b <= 0):
            raise DomainError("channel bandwidths must be > 0")
        if np.any(np.diff(f) <= 0):
            raise DomainError("channels must be sorted by strictly increasing frequency")
        if np.any(np.diff(f) < 0.5 * (b[1:] + b[:-1]) - 1e-12):
            raise DomainError("channel spectra overlap")
        if any(c.power_mw < 0 for c in chans):
            raise DomainError("launch powers must be >= 0")
        if not 0 <= self.cut_index < len(chans):
            raise DomainError(f"cut_index {self.cut_index} out of range")
        object.__setattr__(self, "channels", chans)

    def __len__(self):
        return len(self.channels)

    @property
    def freqs(self):
        return np.array([c.freq_thz for c in self.channels])

    @property
    def bandwidths(self):
        return np.array([c.bandwidth_thz for c in self.channels])

    @property
    def powers(self):
        return np.array([c.power_mw for c in self.channels])

    @property
    def psd(self):
        """Launch PSD in mW/THz."""
        return self.powers / self.bandwidths

    def with_powers(self, powers):
        chans = [Channel(c.freq_thz, c.bandwidth_thz, float(p)) for c, p in zip(self.channels, powers)]
        return ChannelPlan(chans, self.cut_index)


@dataclass(frozen=True)
class RamanPump:
    frequency_thz: float
    power_mw: float
    direction: str = "backward"

    def __post_init__(self):
        if self.power_mw < 0:
            raise DomainError("pump power must be >= 0")
        if self.direction not in ("forward", "backward"):
            raise DomainError(f"pump direction must be forward or backward, got {self.direction!r}")


@dataclass(frozen=True)
class SppGrid:
    """Sampled profiles: ``profiles[i]`` is p_i(z) (normalized), ``pump_profiles`` in mW."""

    z: np.ndarray
    profiles: np.ndarray
    pump_profiles: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        p = np.atleast_2d(np.asarray(self.profiles, dtype=float))
        if z.ndim != 1 or z.size < 2 or z[0] != 0 or np.any(np.diff(z) <= 0):
            raise DomainError("z must start at 0 and be strictly increasing")
        if p.shape[1] != z.size:
            raise DomainError("profiles must have one column per z sample")
        if np.any(p <= 0) or not np.all(np.isfinite(p)):
            raise DomainError("profiles must be positive and finite")
        if np.any(np.abs(p[:, 0] - 1.0) > 1e-12):
            raise DomainError("profiles must satisfy p(0) = 1")
        for a in (z, p):
            a.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "profiles", p)

    @property
    def length_km(self):
        return float(self.z[-1])

    def end_values(self):
        return self.profiles[:, -1].copy()

    def profile(self, i):
        return self.z, self.profiles[i]


def span_grid(fiber, grid_points=DEFAULT_GRID_POINTS):
    """Uniform grid on [0, L] plus a node pair (z_e - eps, z_e) at every lumped event.

    Returns ``(z, event_nodes)`` where ``event_nodes[j]`` is the index of the
    node at event j's position.
    """
    if grid_points < 2:
        raise DomainError("grid_points must be >= 2")
    L = fiber.length_km
    z = np.linspace(0.0, L, int(grid_points))
    pos = np.array([e.position_km for e in fiber.lumped_events])
    if pos.size:
        keep = np.ones(z.size, dtype=bool)
        for zp in pos:
            keep &= ~((z > zp - EVENT_EPS_KM) & (z < zp))
        z = np.unique(np.concatenate([z[keep], pos, pos - EVENT_EPS_KM]))
    nodes = [int(np.searchsorted(z, zp)) for zp in pos]
    return z, nodes


def attenuation_only_spp(fiber, plan, grid_points=DEFAULT_GRID_POINTS):
    """Profiles from intrinsic attenuation and lumped losses only."""
    z, _ = span_grid(fiber, grid_points)
    a = fiber.alpha_db(plan.freqs)
    logp = -np.outer(a, z) / 10.0
    for e in fiber.lumped_events:
        if e.hits(False):
            logp[:, z >= e.position_km] -= e.loss_db / 10.0
    return SppGrid(z, 10.0**logp)


def _coupling(fiber, freqs):
    """Raman coupling matrix in 1/(mW km): dP_i/dz gets P_i * sum_j C_ij P_j."""
    fi = freqs[:, None]
    fj = freqs[None, :]
    df = fj - fi
    g = fiber.gain(df) * np.maximum(fi, fj) / fiber.raman_ref_thz * 1e-3
    C = np.where(df > 0, g, -(fi / fj) * g)
    np.fill_diagonal(C, 0.0)
    return C


def _sweep(z, y0, alpha, cs, co, other, other_d, sign, reverse, jump):
    try:
        return _core.rk4_sweep(z, y0, alpha, cs, co, other, other_d, sign, reverse, jump)
    except FloatingPointError as exc:
        raise StepSizeError(str(exc)) from exc


def solve_raman(fiber, plan, pumps=(), grid_points=DEFAULT_GRID_POINTS, tol=SOLVER_TOL):
    """Solve the coupled Raman power equations for the channels and pumps of one span.

    Forward-propagating elements start from their launch power at z = 0,
    backward pumps from their power at z = L. Backward pumps are handled by
    damped fixed-point shooting between forward and backward sweeps;
    ``tol.rel_tol`` is the residual target and ``tol.max_terms`` the
    iteration cap.
    """
    if grid_points < 51:
        raise DomainError("grid_points must be >= 51 for the Raman solver")
    pumps = [p for p in pumps if p.power_mw > 0]
    z, nodes = span_grid(fiber, grid_points)
    M = z.size
    nch = len(plan)
    p_launch = np.where(plan.powers > 0, plan.powers, _PROBE_MW)
    if not np.all(np.isfinite(p_launch)):
        raise DomainError("launch powers must be finite")

    f_all = np.concatenate([plan.freqs, [p.frequency_thz for p in pumps]])
    is_pump = np.arange(f_all.size) >= nch
    fwd = np.concatenate([np.arange(nch), [nch + i for i, p in enumerate(pumps) if p.direction == "forward"]]).astype(int)
    bwd = np.array([nch + i for i, p in enumerate(pumps) if p.direction == "backward"], dtype=int)
    p0 = np.concatenate([p_launch, [p.power_mw for p in pumps]])
    alpha = fiber.alpha_pow(f_all)
    C = _coupling(fiber, f_all)

    jump = np.ones((f_all.size, M))
    for e, k in zip(fiber.lumped_events, nodes):
        hit = np.array([e.hits(ip) for ip in is_pump])
        jump[hit, k] = 10.0 ** (-e.loss_db / 10.0)

    args_f = (alpha[fwd], C[np.ix_(fwd, fwd)], C[np.ix_(fwd, bwd)])
    args_b = (alpha[bwd], C[np.ix_(bwd, bwd)], C[np.ix_(bwd, fwd)])

    if bwd.size == 0:
        yf, _ = _sweep(z, p0[fwd], *args_f, np.zeros((0, M)), np.zeros((0, M)), 1.0, False, jump[fwd])
        yb = np.zeros((0, M))
    else:
        yb = p0[bwd, None] * np.exp(-alpha[bwd, None] * (fiber.length_km - z[None, :]))
        db = alpha[bwd, None] * yb
        residual = np.inf
        for it in range(1, tol.max_terms + 1):
            yf, df = _sweep(z, p0[fwd], *args_f, yb, db, 1.0, False, jump[fwd])
            yb_new, db_new = _sweep(z, p0[bwd], *args_b, yf, df, -1.0, True, jump[bwd])
            residual = float(np.max(np.abs(yb_new - yb) / yb))
            yb = 0.5 * (yb + yb_new)
            db = 0.5 * (db + db_new)
            if residual < tol.rel_tol:
                break
        else:
            raise SolverError(
                f"backward-pump iteration did not converge in {tol.max_terms} sweeps",
                residual=residual,
                iterations=tol.max_terms,
            )
        yf, _ = _sweep(z, p0[fwd], *args_f, yb, db, 1.0, False, jump[fwd])

    sig = yf[:nch] / p_launch[:, None]
    pump_prof = np.zeros((len(pumps), M))
    order_f = fwd[nch:] - nch
    pump_prof[order_f] = yf[nch:]
    if bwd.size:
        pump_prof[bwd - nch] = yb
    return SppGrid(z, sig, pump_prof)


def transfer_factor(fiber, spp, channel, lumped_gain_db=None):
    """End-to-end power transfer Gamma * p(L) of ``channel`` over the span.

    With ``lumped_gain_db=None`` the end element exactly compensates the
    span loss and the result is 1.
    """
    pL = float(spp.profiles[channel, -1])
    if lumped_gain_db is None:
        return 1.0
    return 10.0 ** (lumped_gain_db / 10.0) * pL
