"""Circuit model: transmon spectrum, flux modulation, parametric Rabi rate and
probe-power calibration.

All frequencies are angular (rad/ns); flux is in units of the flux quantum.
"""
import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import DomainError
from .units import HBAR

FLUX_STEP = 1e-6


def bessel_j(n, x, terms=40):
    """Bessel function of the first kind ``J_n(x)`` for integer ``n``.

    Plain power series; accurate to ~1e-15 for ``|x| < 2`` and still fine
    for the sideband sums used here (``|x| < 1``).
    """
    n = int(n)
    if n < 0:
        return (-1) ** n * bessel_j(-n, x, terms)
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term
    q = -half * half
    for k in range(1, terms):
        term = term * q / (k * (k + n))
        total = total + term
    return total if total.ndim else float(total)


def bessel_j1(x):
    return bessel_j(1, x)


def inverse_bessel_j1(y, tol=1e-14):
    """Smallest ``x >= 0`` with ``J1(x) = y``; ``y`` must lie in ``[0, 0.5818]``."""
    if y < 0:
        return -inverse_bessel_j1(-y, tol)
    if y > 0.58186:
        raise DomainError(f"J1 never reaches {y}")
    lo, hi = 0.0, 1.8411837813406593  # first maximum of J1
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if bessel_j1(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


# --- transmon spectrum ----------------------------------------------------

def josephson_energy(phi, E_J0, d):
    """Flux-tuned Josephson energy of an asymmetric SQUID.

    Uses ``E_J0 |cos| sqrt(1 + d^2 tan^2)`` rewritten as
    ``E_J0 sqrt(cos^2 + d^2 sin^2)``, which is finite at half flux.
    """
    x = np.pi * np.asarray(phi, dtype=float)
    val = E_J0 * np.sqrt(np.cos(x) ** 2 + (d * np.sin(x)) ** 2)
    return val if np.ndim(val) else float(val)


def qubit_frequency(phi, E_c, E_J0, d):
    """Bare transmon transition frequency ``sqrt(8 E_c E_J) - E_c``."""
    ej = np.asarray(josephson_energy(phi, E_J0, d))
    if np.any(ej <= 0):
        raise DomainError("Josephson energy must be positive")
    val = np.sqrt(8.0 * E_c * ej) - E_c
    return val if np.ndim(val) else float(val)


def flux_slope(phi, E_c, E_J0, d, step=FLUX_STEP):
    """``d omega_q / d Phi`` by central difference (rad/ns per flux quantum)."""
    return (qubit_frequency(phi + step, E_c, E_J0, d)
            - qubit_frequency(phi - step, E_c, E_J0, d)) / (2.0 * step)


def flux_curvature(phi, E_c, E_J0, d, step=1e-4):
    w = lambda p: qubit_frequency(p, E_c, E_J0, d)
    return (w(phi + step) - 2.0 * w(phi) + w(phi - step)) / step**2


def eps_from_delta_phi(delta_phi, phi, E_c, E_J0, d):
    """Peak-to-peak qubit swing produced by a flux modulation ``delta_phi``.

    The qubit frequency follows ``omega_q + (eps/2) sin(omega_phi t)`` while the
    flux follows ``Phi + delta_phi sin(omega_phi t)``, so to first order
    ``eps = 2 |d omega_q/d Phi| delta_phi``.
    """
    return 2.0 * abs(flux_slope(phi, E_c, E_J0, d)) * abs(delta_phi)


def parametric_rabi(eps_phi, omega_phi, g):
    """Sideband Rabi frequency ``2 g J1(eps/(2 omega_phi))``."""
    if omega_phi <= 0:
        raise DomainError("modulation frequency must be positive")
    return 2.0 * g * bessel_j1(np.asarray(eps_phi) / (2.0 * omega_phi))


def eps_for_rabi(Omega_phi, omega_phi, g):
    """Inverse of :func:`parametric_rabi` on its monotone branch."""
    if omega_phi <= 0 or g <= 0:
        raise DomainError("omega_phi and g must be positive")
    return 2.0 * omega_phi * inverse_bessel_j1(Omega_phi / (2.0 * g))


def shift_constants_from_flux(phi, E_c, E_J0, d, g, omega_phi):
    """First-order ``(C0, C1)`` predicted by the flux curve at bias ``phi``.

    ``C1`` is the small-signal slope of the sideband Rabi rate and ``C0`` the
    motional-averaging shift ``-omega_q''/4`` per ``delta_phi**2``.
    """
    C1 = g * abs(flux_slope(phi, E_c, E_J0, d)) / omega_phi
    C0 = -0.25 * flux_curvature(phi, E_c, E_J0, d)
    return C0, C1


def coupling_from_shift(omega_r_bare, omega_r_dressed, omega_q):
    prod = (omega_r_bare - omega_r_dressed) * (omega_q - omega_r_bare)
    if prod < 0:
        raise DomainError("inconsistent bare/dressed resonator and qubit frequencies")
    return math.sqrt(prod)


def probe_power(omega_q_dressed, Omega_p, Gamma):
    """Probe power in watts for a probe Rabi frequency ``Omega_p``.

    Arguments are in rad/ns; the relation is ``hbar w Omega_p^2 / (2 Gamma)``
    and the three rates contribute 1e9 s^-1 each, net 1e18.
    """
    if min(omega_q_dressed, Omega_p, Gamma) <= 0:
        raise DomainError("probe_power inputs must be positive")
    return HBAR * omega_q_dressed * Omega_p**2 / (2.0 * Gamma) * 1e18


def probe_rabi(power, omega_q_dressed, Gamma):
    if min(power, omega_q_dressed, Gamma) <= 0:
        raise DomainError("probe_rabi inputs must be positive")
    return math.sqrt(2.0 * Gamma * power * 1e-18 / (HBAR * omega_q_dressed))


# --- parameter records ----------------------------------------------------

@dataclass(frozen=True)
class DeviceParams:
    """Static device constants, angular frequencies in rad/ns.

    ``omega_q`` is the bare qubit frequency used by the lab-frame model and
    ``omega_q_dressed`` the measured (dressed) one used by the effective model.
    Either may be omitted and is then inferred from the dispersive shift.
    ``C0`` (per flux quantum squared) and ``C1`` (per flux quantum) are the
    motional-shift and sideband-Rabi constants.
    """

    E_c: float
    E_J0: float
    d: float
    g: float
    Gamma: float
    gamma_phi: float
    kappa: float
    omega_r: float
    omega_r_dressed: Optional[float] = None
    phi_bias: float = 0.0
    L: float = 340.0
    C0: Optional[float] = None
    C1: Optional[float] = None
    omega_q: Optional[float] = None
    omega_q_dressed: Optional[float] = None

    def __post_init__(self):
        for name in ("E_c", "E_J0", "g", "Gamma", "gamma_phi", "kappa", "omega_r", "L"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        for name in ("omega_r_dressed", "C0", "C1", "omega_q", "omega_q_dressed"):
            v = getattr(self, name)
            if v is not None and name != "C0" and v < 0:
                raise DomainError(f"{name} must be non-negative")
        if not 0.0 <= self.d < 1.0:
            raise DomainError("junction asymmetry d must lie in [0, 1)")

    @property
    def gamma(self):
        """Total qubit decoherence rate ``gamma_phi + Gamma/2``."""
        return self.gamma_phi + 0.5 * self.Gamma

    @property
    def rates(self):
        return {"Gamma": self.Gamma, "kappa": self.kappa, "gamma_phi": self.gamma_phi}

    @property
    def omega_q_bare(self):
        if self.omega_q is not None:
            return self.omega_q
        if self.omega_q_dressed is not None:
            if self.omega_r_dressed is not None:
                return self.omega_q_dressed - (self.omega_r - self.omega_r_dressed)
            return self.omega_q_dressed - self.g**2 / (self.omega_q_dressed - self.omega_r)
        return qubit_frequency(self.phi_bias, self.E_c, self.E_J0, self.d)

    @property
    def omega_q_tilde(self):
        if self.omega_q_dressed is not None:
            return self.omega_q_dressed
        wq = self.omega_q_bare
        return wq + self.g**2 / (wq - self.omega_r)

    @property
    def omega_r_tilde(self):
        if self.omega_r_dressed is not None:
            return self.omega_r_dressed
        return self.omega_r - self.g**2 / (self.omega_q_bare - self.omega_r)

    def flux_slope(self, phi=None):
        return flux_slope(self.phi_bias if phi is None else phi, self.E_c, self.E_J0, self.d)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class DriveConfig:
    """Probe and flux-modulation settings.

    The modulation strength can be given as a flux amplitude ``delta_phi``
    (flux quanta), a qubit swing ``eps_phi`` or directly as the sideband Rabi
    rate ``Omega_phi``.
    """

    Omega_p: float
    omega_p: float
    omega_phi: float
    delta_phi: Optional[float] = None
    eps_phi: Optional[float] = None
    Omega_phi: Optional[float] = None

    def __post_init__(self):
        if self.Omega_p < 0:
            raise DomainError("Omega_p must be non-negative")
        if self.omega_phi <= 0:
            raise DomainError("omega_phi must be positive")
        if self.eps_phi is not None:
            _check_modulation_ratio(self.eps_phi, self.omega_phi)

    def resolve_eps(self, device):
        """Qubit swing ``eps_phi``, derived from ``delta_phi`` when absent."""
        if self.eps_phi is not None:
            eps = self.eps_phi
        elif self.delta_phi is not None:
            eps = eps_from_delta_phi(self.delta_phi, device.phi_bias, device.E_c, device.E_J0, device.d)
        elif self.Omega_phi is not None:
            eps = eps_for_rabi(self.Omega_phi, self.omega_phi, device.g)
        else:
            eps = 0.0
        _check_modulation_ratio(eps, self.omega_phi)
        return eps

    def with_(self, **changes):
        return replace(self, **changes)


def _check_modulation_ratio(eps, omega_phi):
    ratio = abs(eps) / (2.0 * omega_phi)
    if ratio >= 1.0:
        raise DomainError(f"eps_phi/(2 omega_phi) = {ratio:.3f} is outside the modelled regime (< 1)")
    if ratio > 0.5:
        warnings.warn(f"eps_phi/(2 omega_phi) = {ratio:.3f} > 0.5; sideband expansion is poor", stacklevel=3)
