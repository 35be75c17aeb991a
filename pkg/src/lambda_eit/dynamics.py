"""Hamiltonians, the Lindblad generator, time evolution and steady states.

Two descriptions of the same driven qubit-resonator system are supported:

* ``Frame.LAB``: frame rotating at the probe frequency, bare frequencies,
  explicit sinusoidal modulation of the qubit frequency and the full
  Jaynes-Cummings exchange term.
* ``Frame.EFFECTIVE``: the time-independent sideband model in which the
  modulation appears only as the red-sideband exchange ``Omega_phi`` between
  ``|e,0>`` and ``|g,1>``, with dressed frequencies.

Dissipator normalisation is ``D[c] rho = 2 c rho c^dag - {c^dag c, rho}`` and
the generator is ``-i[H, rho] + (Gamma/2) D[sigma] + (kappa/2) D[a]
+ gamma_phi D[sigma^dag sigma]``.
"""
import enum
import math
from functools import lru_cache
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.linalg import qr, solve_triangular

from . import operators as ops
from .device import DeviceParams, DriveConfig, bessel_j
from .errors import (AmbiguityError, ConfigurationError, ConvergenceError,
                     DomainError, SolverError)
from .integrate import dopri5

DEFAULT_TOL = 1e-8
RANK_TOL = 1e-10
RELAXATION_TIMES = 30
DRIFT_TOL = 1e-5
STEPS_PER_PERIOD = 20
SIDEBAND_ORDERS = 8


class Frame(enum.Enum):
    LAB = "lab"
    EFFECTIVE = "effective"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"lab": cls.LAB, "labrotatingatprobe": cls.LAB,
                   "effective": cls.EFFECTIVE, "effectivetimeindependent": cls.EFFECTIVE}
        if key not in aliases:
            raise ConfigurationError(f"unknown frame {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class EffectiveParams:
    """Resolved constants of the time-independent sideband model.

    ``omega_q`` is the qubit frequency without modulation and ``shift`` the
    motional shift at full modulation, so the qubit sits at
    ``omega_q - shift * env**2``.  ``probe_scale`` multiplies the probe drive
    and the radiated field (1 unless mapped from the lab frame).
    """

    omega_q: float
    omega_r: float
    omega_phi: float
    Omega_phi: float
    Gamma: float
    kappa: float
    gamma_phi: float
    shift: float = 0.0
    probe_scale: float = 1.0

    @property
    def rates(self):
        return {"Gamma": self.Gamma, "kappa": self.kappa, "gamma_phi": self.gamma_phi}

    @property
    def gamma(self):
        return self.gamma_phi + 0.5 * self.Gamma


@dataclass(frozen=True)
class HamiltonianSpec:
    """Everything needed to build the generator for one experiment.

    ``probe_envelope`` and ``modulation_envelope`` are optional dimensionless
    functions of time multiplying ``drive.Omega_p`` and the modulation
    strength.  ``effective`` overrides the constants the effective frame would
    otherwise resolve from ``device`` and ``drive``.
    """

    frame: Frame
    device: DeviceParams
    drive: DriveConfig
    n_fock: int = ops.DEFAULT_N_FOCK
    probe_envelope: Optional[Callable] = None
    modulation_envelope: Optional[Callable] = None
    effective: Optional[EffectiveParams] = None

    def __post_init__(self):
        object.__setattr__(self, "frame", Frame.parse(self.frame))
        ops._check_n_fock(self.n_fock)

    def with_(self, **changes):
        return replace(self, **changes)

    def with_drive(self, **changes):
        return replace(self, drive=replace(self.drive, **changes))

    @property
    def dim(self):
        return 2 * self.n_fock

    @property
    def time_dependent(self):
        if self.probe_envelope is not None or self.modulation_envelope is not None:
            return True
        return self.frame is Frame.LAB and self.eps_phi != 0.0

    @property
    def eps_phi(self):
        return self.drive.resolve_eps(self.device)

    def resolve_effective(self):
        """Constants of the effective model; raises if they cannot be resolved."""
        if self.effective is not None:
            return self.effective
        dev, drv = self.device, self.drive
        dphi = drv.delta_phi
        if drv.Omega_phi is not None:
            Omega_phi = drv.Omega_phi
        elif dphi is not None:
            if dev.C1 is None:
                raise ConfigurationError("C1 is required to map delta_phi to Omega_phi")
            Omega_phi = dev.C1 * abs(dphi)
        elif drv.eps_phi is not None:
            Omega_phi = 2.0 * dev.g * bessel_j(1, drv.eps_phi / (2.0 * drv.omega_phi))
        else:
            raise ConfigurationError("effective frame needs Omega_phi, or delta_phi with C0/C1")
        shift = 0.0
        if dphi:
            if dev.C0 is None:
                raise ConfigurationError("C0 is required for the motional shift at delta_phi != 0")
            shift = dev.C0 * dphi**2
        return EffectiveParams(
            omega_q=dev.omega_q_tilde, omega_r=dev.omega_r_tilde, omega_phi=drv.omega_phi,
            Omega_phi=abs(Omega_phi), Gamma=dev.Gamma, kappa=dev.kappa,
            gamma_phi=dev.gamma_phi, shift=shift)

    def rates(self):
        if self.frame is Frame.EFFECTIVE:
            return self.resolve_effective().rates
        return lab_rates(self.device)

    @property
    def probe_scale(self):
        return self.resolve_effective().probe_scale if self.frame is Frame.EFFECTIVE else 1.0


def purcell_rate(device):
    """Resonator loss inherited from the qubit, ``Gamma (g/Delta)^2``."""
    delta = device.omega_q_bare - device.omega_r
    return device.Gamma * (device.g / delta) ** 2


def lab_rates(device):
    """Rates for the lab-frame model.

    The explicit exchange term already transfers qubit loss to the resonator,
    so only the remainder of ``kappa`` is applied as intrinsic loss.
    """
    return {"Gamma": device.Gamma,
            "kappa": max(0.0, device.kappa - purcell_rate(device)),
            "gamma_phi": device.gamma_phi}


def _check_rates(rates):
    for k in ("Gamma", "kappa", "gamma_phi"):
        if rates[k] < 0:
            raise DomainError(f"rate {k} must be non-negative")


# --- Hamiltonians -----------------------------------------------------------

def _envelope(fn, t):
    return 1.0 if fn is None else float(fn(t))


def lab_hamiltonian(t, spec):
    """Lab-frame Hamiltonian at time ``t`` in the frame rotating at ``omega_p``."""
    if spec.frame is not Frame.LAB:
        raise ConfigurationError("lab_hamiltonian needs a LAB frame spec")
    dev, drv, nf = spec.device, spec.drive, spec.n_fock
    sm, a = ops.qubit_lowering(nf), ops.resonator_lowering(nf)
    env = _envelope(spec.modulation_envelope, t)
    wq = dev.omega_q_bare + env * 0.5 * spec.eps_phi * math.sin(drv.omega_phi * t)
    Om = drv.Omega_p * _envelope(spec.probe_envelope, t)
    H = ((wq - drv.omega_p) * ops.qubit_number(nf)
         + (dev.omega_r - drv.omega_p) * ops.photon_number(nf)
         + dev.g * (a.conj().T @ sm + sm.conj().T @ a)
         + 0.5 * Om * (sm + sm.conj().T))
    return H


def effective_hamiltonian(spec, t=None):
    """Time-independent sideband Hamiltonian (or its value at ``t`` with envelopes)."""
    if spec.frame is not Frame.EFFECTIVE:
        raise ConfigurationError("effective_hamiltonian needs an EFFECTIVE frame spec")
    p = spec.resolve_effective()
    drv, nf = spec.drive, spec.n_fock
    sm, a = ops.qubit_lowering(nf), ops.resonator_lowering(nf)
    env = 1.0 if t is None else _envelope(spec.modulation_envelope, t)
    pe = 1.0 if t is None else _envelope(spec.probe_envelope, t)
    Om = p.probe_scale * drv.Omega_p * pe
    H = ((p.omega_q - p.shift * env**2 - drv.omega_p) * ops.qubit_number(nf)
         + (p.omega_r - drv.omega_p + p.omega_phi) * ops.photon_number(nf)
         + 0.5j * p.Omega_phi * env * (a.conj().T @ sm - a @ sm.conj().T)
         + 0.5 * Om * (sm + sm.conj().T))
    return H


def hamiltonian(spec, t=0.0):
    if spec.frame is Frame.LAB:
        return lab_hamiltonian(t, spec)
    return effective_hamiltonian(spec, t)


# --- generator ----------------------------------------------------------------

def liouvillian_apply(H, rho, rates):
    """Apply the Lindblad generator to ``rho`` (matrix form)."""
    _check_rates(rates)
    H = np.asarray(H)
    rho = np.asarray(rho)
    if H.shape != rho.shape or H.shape[0] != H.shape[1]:
        raise ops.DimensionError(f"shape mismatch: H {H.shape} vs rho {rho.shape}")
    nf = ops.n_fock_of(H.shape[0])
    out = -1j * (H @ rho - rho @ H)
    for c, r in ((ops.qubit_lowering(nf), 0.5 * rates["Gamma"]),
                 (ops.resonator_lowering(nf), 0.5 * rates["kappa"]),
                 (ops.qubit_number(nf), rates["gamma_phi"])):
        if r:
            cd = c.conj().T
            cdc = cd @ c
            out += r * (2.0 * c @ rho @ cd - rho @ cdc - cdc @ rho)
    return out


def dissipator(n_fock, rates):
    """Superoperator of the dissipative part of the generator."""
    _check_rates(rates)
    nf = n_fock
    return (0.5 * rates["Gamma"] * ops.dissipator_superop(ops.qubit_lowering(nf))
            + 0.5 * rates["kappa"] * ops.dissipator_superop(ops.resonator_lowering(nf))
            + rates["gamma_phi"] * ops.dissipator_superop(ops.qubit_number(nf)))


def liouvillian(H, rates):
    """Superoperator (column stacking) of the full generator."""
    H = np.asarray(H)
    return ops.commutator_superop(H) + dissipator(ops.n_fock_of(H.shape[0]), rates)


class _Generator:
    """``L(t) = L0 + sum_k c_k(t) L_k``; diagonal terms are stored as vectors."""

    def __init__(self, spec):
        self.spec = spec
        nf = spec.n_fock
        sm, a = ops.qubit_lowering(nf), ops.resonator_lowering(nf)
        probe = 0.5 * (sm + sm.conj().T)
        drv = spec.drive
        terms = []
        if spec.frame is Frame.LAB:
            H0 = lab_hamiltonian(0.0, spec.with_(probe_envelope=None, modulation_envelope=None)
                                 .with_drive(Omega_p=0.0, eps_phi=0.0, delta_phi=None, Omega_phi=None))
            self.rates = lab_rates(spec.device)
            eps = spec.eps_phi
            if eps:
                w, menv = drv.omega_phi, spec.modulation_envelope
                nq_diag = np.diag(ops.commutator_superop(ops.qubit_number(nf))).copy()
                terms.append((lambda t: _envelope(menv, t) * 0.5 * eps * math.sin(w * t), nq_diag))
            pscale = 1.0
        else:
            p = spec.resolve_effective()
            self.rates = p.rates
            H0 = ((p.omega_q - drv.omega_p) * ops.qubit_number(nf)
                  + (p.omega_r - drv.omega_p + p.omega_phi) * ops.photon_number(nf))
            menv = spec.modulation_envelope
            coupling = ops.commutator_superop(0.5j * (a.conj().T @ sm - a @ sm.conj().T))
            if menv is None:
                H0 = H0 + 0.5j * p.Omega_phi * (a.conj().T @ sm - a @ sm.conj().T) \
                    - p.shift * ops.qubit_number(nf)
            else:
                terms.append((lambda t: p.Omega_phi * _envelope(menv, t), coupling))
                if p.shift:
                    nq_diag = np.diag(ops.commutator_superop(ops.qubit_number(nf))).copy()
                    terms.append((lambda t: -p.shift * _envelope(menv, t) ** 2, nq_diag))
            pscale = p.probe_scale
        Om = pscale * drv.Omega_p
        penv = spec.probe_envelope
        if penv is None:
            H0 = H0 + Om * probe
        elif Om:
            terms.append((lambda t: Om * _envelope(penv, t), ops.commutator_superop(probe)))
        self.L0 = ops.commutator_superop(H0) + dissipator(nf, self.rates)
        self.terms = terms

    def matrix(self, t):
        L = self.L0.copy()
        for c, Lk in self.terms:
            if Lk.ndim == 1:
                L[np.diag_indices_from(L)] += c(t) * Lk
            else:
                L += c(t) * Lk
        return L

    def apply(self, t, y):
        """``L(t) @ y`` for a vector or a matrix of stacked columns."""
        out = self.L0 @ y
        for c, Lk in self.terms:
            ct = c(t)
            if ct:
                out += ct * (Lk[:, None] * y if y.ndim == 2 else Lk * y) if Lk.ndim == 1 else ct * (Lk @ y)
        return out


def _h_max(spec):
    if spec.frame is Frame.LAB:
        return 2.0 * math.pi / spec.drive.omega_phi / STEPS_PER_PERIOD
    return np.inf


# --- time evolution ---------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the master equation.

    ``observables`` holds ``sigma`` (complex), ``p_exc`` and ``n_res``.
    ``states`` is ``None`` when the caller asked not to keep them.
    """

    times: np.ndarray
    states: Optional[np.ndarray]
    observables: dict = field(default_factory=dict)

    @property
    def sigma(self):
        return self.observables["sigma"]

    @property
    def p_exc(self):
        return self.observables["p_exc"]

    @property
    def n_res(self):
        return self.observables["n_res"]


def _hermitize_vec(d):
    def project(y):
        m = y.reshape(d, d, order="F")
        return (0.5 * (m + m.conj().T)).reshape(-1, order="F")
    return project


def _observable_rows(n_fock):
    # Tr(rho O) = vec(O^T) . vec(rho)
    return {
        "sigma": ops.vec(ops.qubit_lowering(n_fock).T),
        "p_exc": ops.vec(ops.qubit_number(n_fock).T),
        "n_res": ops.vec(ops.photon_number(n_fock).T),
    }


def evolve(rho0, spec, t_grid, tol=DEFAULT_TOL, keep_states=True, validate=True):
    """Integrate the master equation from ``rho0`` over ``t_grid``.

    States are re-Hermitised after every accepted step.  With ``validate``
    each sampled state is checked as a density matrix.
    """
    rho0 = ops.check_density_matrix(rho0)
    if rho0.shape != (spec.dim, spec.dim):
        raise ops.DimensionError(f"rho0 has shape {rho0.shape}, spec needs {spec.dim}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or (t_grid.size > 1 and np.any(np.diff(t_grid) <= 0)):
        raise DomainError("t_grid must be strictly increasing")
    gen = _Generator(spec)
    d = spec.dim
    rows = _observable_rows(spec.n_fock)
    R = np.stack((rows["sigma"], rows["p_exc"], rows["n_res"]))

    def sample(y):
        if validate:
            ops.check_density_matrix(y.reshape(d, d, order="F"))
        return np.concatenate((R @ y, y)) if keep_states else R @ y

    ys = dopri5(gen.apply, t_grid, ops.vec(rho0), rtol=tol, atol=tol * 1e-3,
                h_max=_h_max(spec), project=_hermitize_vec(d), sample=sample)
    obs = {"sigma": ys[:, 0], "p_exc": ys[:, 1].real, "n_res": ys[:, 2].real}
    # column stacking: vec index i + d*j holds rho[i, j]
    states = ys[:, 3:].reshape(-1, d, d).transpose(0, 2, 1) if keep_states else None
    return Trajectory(times=t_grid, states=states, observables=obs)


# --- steady states ------------------------------------------------------------

@lru_cache(maxsize=None)
def _hermitian_basis(d):
    """Real parametrisation of Hermitian matrices.

    Returns ``(P, Q)`` with ``vec(rho) = P x`` for real ``x`` and
    ``x = Q vec(rho)``.  Diagonal entries come first, then the real and
    imaginary parts of the upper triangle.
    """
    n = d * d
    P = np.zeros((n, n), dtype=complex)
    Q = np.zeros((n, n), dtype=complex)
    k = 0
    for i in range(d):
        P[i + d * i, k] = 1.0
        Q[k, i + d * i] = 1.0
        k += 1
    for i in range(d):
        for j in range(i + 1, d):
            ij, ji = i + d * j, j + d * i  # column-stacked positions of (i,j), (j,i)
            P[ij, k], P[ji, k] = 1.0, 1.0
            Q[k, ij], Q[k, ji] = 0.5, 0.5
            P[ij, k + 1], P[ji, k + 1] = 1j, -1j
            Q[k + 1, ij], Q[k + 1, ji] = -0.5j, 0.5j
            k += 2
    P.setflags(write=False)
    Q.setflags(write=False)
    return P, Q


def _realify(L, d):
    P, Q = _hermitian_basis(d)
    return (Q @ L @ P).real


def _null_vector(A, rank_tol=RANK_TOL):
    """One-dimensional null space of a real square matrix by pivoted QR."""
    R, piv = qr(A, mode="r", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(R))
    small = np.flatnonzero(diag < rank_tol * diag[0])
    if small.size > 1:
        raise AmbiguityError(f"steady state is not unique (null-space dimension {small.size})")
    if small.size == 0:
        raise SolverError("generator has no steady state within tolerance")
    n = A.shape[0]
    z = solve_triangular(R[: n - 1, : n - 1], -R[: n - 1, n - 1], check_finite=False)
    x = np.empty(n)
    x[piv] = np.append(z, 1.0)
    return x


def _density_from_real(x, d):
    P, _ = _hermitian_basis(d)
    rho = ops.unvec(P @ x, d)
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def steady_state(spec, rates=None, validate=True):
    """Stationary density matrix of a time-independent generator."""
    if spec.probe_envelope is not None or spec.modulation_envelope is not None:
        raise ConfigurationError("steady_state needs a time-independent spec")
    if spec.frame is Frame.LAB and spec.eps_phi:
        raise ConfigurationError("modulated lab frame has no steady state; use periodic_steady_state")
    H = hamiltonian(spec)
    L = liouvillian(H, spec.rates() if rates is None else rates)
    rho = _density_from_real(_null_vector(_realify(L, spec.dim)), spec.dim)
    return ops.check_density_matrix(rho) if validate else rho


class SteadyStateSweep:
    """Steady states of one spec over many probe frequencies.

    The generator is affine in ``omega_p``, so the real-parametrised matrix
    is split once as ``A + omega_p B``.
    """

    def __init__(self, spec):
        if spec.time_dependent:
            raise ConfigurationError("steady-state sweeps need a time-independent spec")
        self.spec = spec
        d = spec.dim
        base = spec.with_drive(omega_p=0.0)
        L0 = liouvillian(hamiltonian(base), spec.rates())
        nexc = ops.qubit_number(spec.n_fock) + ops.photon_number(spec.n_fock)
        self.A = _realify(L0, d)
        self.B = _realify(ops.commutator_superop(-nexc), d)
        self.sigma_row = _hermitian_basis(d)[0].T @ _observable_rows(spec.n_fock)["sigma"]
        self.trace_row = np.zeros(d * d)
        self.trace_row[:d] = 1.0

    def state(self, omega_p):
        return _density_from_real(_null_vector(self.A + omega_p * self.B), self.spec.dim)

    def sigma(self, omega_p):
        x = _null_vector(self.A + omega_p * self.B)
        return complex(self.sigma_row @ x / (self.trace_row @ x))


# --- lab-frame periodic steady state ------------------------------------------

@dataclass(frozen=True)
class PeriodicResult:
    sigma: complex
    sigma_next: complex
    periods: int
    relaxation_time: float
    rho: np.ndarray

    @property
    def drift(self):
        return abs(self.sigma_next - self.sigma)


class _RealGenerator:
    """The generator in the real Hermitian parametrisation: ``A + sum c_k(t) B_k``."""

    def __init__(self, gen, d):
        self.A = _realify(gen.L0, d)
        self.terms = [(c, _realify(np.diag(Lk) if Lk.ndim == 1 else Lk, d)) for c, Lk in gen.terms]

    def matrix(self, t):
        L = self.A.copy()
        for c, B in self.terms:
            L += c(t) * B
        return L

    def apply(self, t, y):
        return self.matrix(t) @ y


def one_period_propagator(spec, tol=DEFAULT_TOL):
    """Real-parametrised propagator over one modulation period, and the period."""
    if spec.frame is not Frame.LAB:
        raise ConfigurationError("periodic steady state needs a LAB frame spec")
    if spec.probe_envelope is not None or spec.modulation_envelope is not None:
        raise ConfigurationError("periodic steady state needs constant drive envelopes")
    gen = _RealGenerator(_Generator(spec), spec.dim)
    T = 2.0 * math.pi / spec.drive.omega_phi
    X = dopri5(gen.apply, [0.0, T], np.eye(spec.dim**2), rtol=tol, atol=tol * 1e-3,
               h_max=_h_max(spec))[-1]
    return X, T, gen


def periodic_steady_state(spec, tol=DEFAULT_TOL, relaxation_times=RELAXATION_TIMES,
                          drift_tol=DRIFT_TOL):
    """Asymptotic periodic regime of the modulated lab-frame model.

    The ground state is propagated through ``N`` periods, ``N`` covering
    ``relaxation_times`` of the slowest decaying Floquet mode, and ``<sigma>``
    is averaged over the next period.  The following period is averaged
    as well; a difference above ``drift_tol`` raises ``ConvergenceError``.
    """
    M, T, gen = one_period_propagator(spec, tol)
    mags = np.sort(np.abs(np.linalg.eigvals(M)))[::-1]
    lam2 = mags[1] if mags.size > 1 else 0.0
    if lam2 >= 1.0 - 1e-14:
        raise ConvergenceError("no unique periodic state (second Floquet multiplier is 1)")
    per_relax = 1.0 / -math.log(lam2) if lam2 > 0 else 1.0
    periods = max(1, math.ceil(relaxation_times * per_relax))
    d = spec.dim
    P, Q = _hermitian_basis(d)
    x0 = (Q @ ops.vec(ops.ground_state(spec.n_fock))).real
    x = np.linalg.matrix_power(M, periods) @ x0
    srow = _observable_rows(spec.n_fock)["sigma"] @ P
    n = d * d

    def rhs(t, z):
        x = z[:n]
        s = srow @ x
        return np.concatenate((gen.apply(t, x), (s.real, s.imag)))

    def averages(x, count):
        z0 = np.concatenate((x, (0.0, 0.0)))
        zs = dopri5(rhs, T * np.arange(count + 1), z0, rtol=tol, atol=tol * 1e-3,
                    h_max=_h_max(spec))
        q = zs[:, n] + 1j * zs[:, n + 1]
        return np.diff(q) / T / x[:d].sum()

    s1, s2 = averages(x, 2)
    res = PeriodicResult(sigma=complex(s1), sigma_next=complex(s2), periods=periods,
                         relaxation_time=per_relax * T, rho=_density_from_real(x, d))
    if res.drift > drift_tol:
        raise ConvergenceError(f"period-averaged <sigma> drifts by {res.drift:.2e}")
    return res


def periodic_steady_state_sigma(spec, **kwargs):
    """Probe-frame DC component of ``<sigma>`` in the periodic regime."""
    return periodic_steady_state(spec, **kwargs).sigma


# --- lab -> effective mapping ---------------------------------------------------

def sideband_dressing(g, x, delta, omega_phi, orders=SIDEBAND_ORDERS):
    """Shift and photon admixture from the off-resonant sidebands.

    Each sideband ``n != 1`` is a two-mode exchange of strength ``g J_n(x)``
    detuned by ``delta - n omega_phi``; it is diagonalised exactly, which
    keeps the ``g^4/delta^3`` correction that matters at a few hundred kHz.
    Returns ``(S, w)``: the qubit moves up by ``S`` and the resonator down by
    ``S``; ``w`` is the resonator weight carried by the qubit.
    """
    shift = 0.0
    weight = 0.0
    for n in range(-orders, orders + 1):
        if n == 1:
            continue
        c = g * bessel_j(n, x)
        det = delta - n * omega_phi
        root = math.hypot(det, 2.0 * c)
        shift += math.copysign(0.5 * (root - abs(det)), det)
        weight += 0.5 * (1.0 - abs(det) / root)
    return shift, weight


def effective_from_lab(spec, orders=SIDEBAND_ORDERS):
    """Effective-frame spec equivalent to a modulated lab-frame spec.

    Sideband ``n = 1`` becomes the exchange ``Omega_phi = 2 g J1(x)`` with
    ``x = eps/(2 omega_phi)``.  The remaining sidebands shift qubit and
    resonator (:func:`sideband_dressing`) and add a Purcell contribution to
    the resonator loss.  The probe couples through the carrier with weight
    ``J0(x)``.
    """
    if spec.frame is not Frame.LAB:
        raise ConfigurationError("effective_from_lab needs a LAB frame spec")
    dev, drv = spec.device, spec.drive
    x = spec.eps_phi / (2.0 * drv.omega_phi)
    wq, wr = dev.omega_q_bare, dev.omega_r
    shift, purcell = sideband_dressing(dev.g, x, wq - wr, drv.omega_phi, orders)
    rates = lab_rates(dev)
    p = EffectiveParams(
        omega_q=wq + shift, omega_r=wr - shift, omega_phi=drv.omega_phi,
        Omega_phi=abs(2.0 * dev.g * bessel_j(1, x)), Gamma=rates["Gamma"],
        kappa=rates["kappa"] + dev.Gamma * purcell, gamma_phi=rates["gamma_phi"],
        probe_scale=float(bessel_j(0, x)))
    return spec.with_(frame=Frame.EFFECTIVE, effective=p)
