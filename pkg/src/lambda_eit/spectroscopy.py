"""Transmission spectra, the analytic three-level model, and fits to it.

Conventions: ``Delta1 = omega_qM - omega_p``, ``Delta2 = omega_qM - omega_r~ -
omega_phi`` and ``delta = Delta1 - Delta2 = omega_r~ + omega_phi - omega_p``.
"""
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from . import dynamics as dyn
from .errors import (CalibrationError, DomainError, FitError, LambdaEITError,
                     ResolutionError, SingularityError, SolverError)

log = logging.getLogger(__name__)

MAX_FIT_ITER = 200


class Engine(enum.Enum):
    EFFECTIVE = "effective"
    LAB_PERIODIC = "lab_periodic"
    ANALYTIC = "analytic"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        for e in cls:
            if key in (e.value, e.name.lower(), e.value.replace("_", "")):
                return e
        raise DomainError(f"unknown engine {value!r}")


@dataclass(frozen=True)
class Spectrum:
    omega_p: np.ndarray
    t_c: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.omega_p, dtype=float)
        t = np.asarray(self.t_c, dtype=complex)
        if w.ndim != 1 or w.shape != t.shape:
            raise DomainError("omega_p and t_c must be 1-D arrays of equal length")
        if w.size > 1 and np.any(np.diff(w) <= 0):
            raise DomainError("spectrum grid must be strictly increasing")
        object.__setattr__(self, "omega_p", w)
        object.__setattr__(self, "t_c", t)

    @property
    def abs(self):
        return np.abs(self.t_c)

    @property
    def phase(self):
        """Unwrapped ``arg t_c``."""
        return np.unwrap(np.angle(self.t_c))


# --- models -----------------------------------------------------------------

def transmission_from_sigma(sigma_exp, Gamma, Omega_p, scale=1.0):
    """Transmission ``1 - i Gamma <sigma> / Omega_p`` from the qubit coherence.

    ``scale`` weights the radiated field (the carrier amplitude of the qubit
    operator when the probe couples through a modulated transition).
    """
    if Omega_p == 0:
        raise DomainError("Omega_p must be non-zero")
    return 1.0 - 1j * Gamma * scale * np.asarray(sigma_exp) / Omega_p


def analytic_transmission(delta, Delta2, Gamma, gamma, kappa, Omega_phi):
    """Weak-probe transmission of the three-level ladder."""
    if min(Gamma, gamma, kappa) < 0:
        raise DomainError("rates must be non-negative")
    dk = np.asarray(delta) - 0.5j * kappa
    den = dk * (np.asarray(delta) + Delta2 - 1j * gamma) - 0.25 * Omega_phi**2
    if np.any(den == 0):
        raise SingularityError("transmission denominator vanishes")
    return 1.0 + 0.5j * Gamma * dk / den


def lambda_detunings(omega_p, omega_qM, omega_r_tilde, omega_phi):
    """``(delta, Delta2)`` for probe frequency ``omega_p``."""
    Delta2 = omega_qM - omega_r_tilde - omega_phi
    delta = omega_r_tilde + omega_phi - np.asarray(omega_p)
    return delta, Delta2


def two_level_transmission(omega_p, omega_q, Gamma, gamma_phi):
    Delta1 = omega_q - np.asarray(omega_p)
    return 1.0 + 0.5j * Gamma / (Delta1 - 1j * (gamma_phi + 0.5 * Gamma))


def eit_fwhm(Omega_phi, Gamma, gamma):
    """Width of the transparency window, ``sqrt(ln 2) Omega^2 / (2 sqrt(Gamma gamma))``."""
    if Gamma <= 0 or gamma <= 0:
        raise DomainError("Gamma and gamma must be positive")
    return math.sqrt(math.log(2.0)) * Omega_phi**2 / (2.0 * math.sqrt(Gamma * gamma))


# --- sweeps -----------------------------------------------------------------

def _analytic_point_params(spec):
    if spec.frame is dyn.Frame.LAB:
        spec = dyn.effective_from_lab(spec)
    p = spec.resolve_effective()
    return p


def _spec_meta(spec, engine):
    from .io import params_snapshot
    return {"engine": engine.value, "frame": spec.frame.value, "n_fock": spec.n_fock,
            **params_snapshot(spec.device, spec.drive)}


def sweep_spectrum(grid, spec, engine="effective", parallel=None, tol=dyn.DEFAULT_TOL):
    """Transmission at every probe frequency in ``grid``.

    ``Effective`` solves the steady state of the sideband model, ``LabPeriodic``
    the periodic state of the modulated lab-frame model and ``Analytic``
    evaluates the closed form on the effective constants.  ``parallel`` is the
    number of worker processes for the lab engine.
    """
    engine = Engine.parse(engine)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or (grid.size > 1 and np.any(np.diff(grid) <= 0)):
        raise DomainError("grid must be a non-empty strictly increasing 1-D array")
    Gamma, Om = spec.device.Gamma, spec.drive.Omega_p
    if engine is Engine.ANALYTIC:
        p = _analytic_point_params(spec)
        wq = p.omega_q - p.shift
        delta, D2 = lambda_detunings(grid, wq, p.omega_r, p.omega_phi)
        t = analytic_transmission(delta, D2, p.Gamma, p.gamma, p.kappa, p.Omega_phi)
    elif engine is Engine.EFFECTIVE:
        if spec.frame is dyn.Frame.LAB:
            spec = dyn.effective_from_lab(spec)
        sweep = dyn.SteadyStateSweep(spec)
        sig = np.empty(grid.size, dtype=complex)
        for i, w in enumerate(grid):
            try:
                sig[i] = sweep.sigma(w)
            except SolverError as exc:
                raise type(exc)(f"grid index {i} (omega_p = {w:.9g} rad/ns): {exc}") from exc
        t = transmission_from_sigma(sig, Gamma, Om, spec.probe_scale)
    else:
        if spec.frame is not dyn.Frame.LAB:
            raise DomainError("LabPeriodic engine needs a LAB frame spec")
        sig = _lab_sigma(grid, spec, parallel, tol)
        t = transmission_from_sigma(sig, Gamma, Om)
    return Spectrum(grid, t, _spec_meta(spec, engine))


def _lab_point(args):
    spec, w, tol = args
    return dyn.periodic_steady_state_sigma(spec.with_drive(omega_p=w), tol=tol)


def _lab_sigma(grid, spec, parallel, tol):
    jobs = [(spec, w, tol) for w in grid]
    if parallel and parallel > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(_lab_point, j) for j in jobs]
            out = []
            for i, f in enumerate(futures):
                try:
                    out.append(f.result())
                except LambdaEITError as exc:
                    raise type(exc)(f"grid index {i}: {exc}") from exc
        return np.array(out)
    out = np.empty(grid.size, dtype=complex)
    for i, job in enumerate(jobs):
        try:
            out[i] = _lab_point(job)
        except SolverError as exc:
            raise type(exc)(f"grid index {i} (omega_p = {grid[i]:.9g} rad/ns): {exc}") from exc
    return out


def default_grid(center, span=2 * np.pi * 0.05, points=801):
    """Uniform grid ``center +/- span``; the default resolves sub-MHz features."""
    return center + np.linspace(-span, span, points)


# --- fitting ------------------------------------------------------------------

@dataclass(frozen=True)
class TwoLevelFit:
    omega_q: float
    Gamma: float
    gamma_phi: float
    residual_norm: float
    covariance: np.ndarray
    names: tuple = ("omega_q", "Gamma", "gamma_phi")

    @property
    def stderr(self):
        return np.sqrt(np.abs(np.diag(self.covariance)))

    @property
    def values(self):
        return (self.omega_q, self.Gamma, self.gamma_phi)


@dataclass(frozen=True)
class LambdaFit:
    omega_q_motional: float
    Omega_phi: float
    residual_norm: float
    covariance: np.ndarray
    rms: float = 0.0
    names: tuple = ("omega_q_motional", "Omega_phi")

    def __post_init__(self):
        if self.Omega_phi < 0 or not math.isfinite(self.residual_norm):
            raise FitError("invalid fit result", self.residual_norm)

    @property
    def stderr(self):
        return np.sqrt(np.abs(np.diag(self.covariance)))

    @property
    def values(self):
        return (self.omega_q_motional, self.Omega_phi)


def _complex_residual(model, data):
    r = model - data
    return np.concatenate((r.real, r.imag))


def _covariance(res):
    J = res.jac
    m, n = J.shape
    dof = max(1, m - n)
    s2 = 2.0 * res.cost / dof
    try:
        return np.linalg.inv(J.T @ J) * s2
    except np.linalg.LinAlgError:
        return np.full((n, n), np.nan)


def _solve(fun, x0, bounds=(-np.inf, np.inf), x_scale=1.0):
    res = least_squares(fun, x0, bounds=bounds, method="trf", x_scale=x_scale,
                        xtol=1e-12, ftol=1e-14, gtol=1e-14, max_nfev=MAX_FIT_ITER * (len(x0) + 1))
    norm = float(np.linalg.norm(res.fun))
    if not res.success or not np.all(np.isfinite(res.x)):
        raise FitError(f"least squares did not converge: {res.message}", norm)
    return res, norm


def _dip_width(w, depth_curve):
    """Half width at half maximum of a single positive bump."""
    i0 = int(np.argmax(depth_curve))
    half = 0.5 * depth_curve[i0]
    above = depth_curve >= half
    lo = i0
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i0
    while hi < w.size - 1 and above[hi + 1]:
        hi += 1
    return max(0.5 * (w[hi] - w[lo]), w[1] - w[0] if w.size > 1 else 1e-3)


def fit_two_level(spectrum):
    """Fit ``omega_q``, ``Gamma`` and ``gamma_phi`` of a bare qubit dip."""
    w, t = spectrum.omega_p, spectrum.t_c
    if w.size < 4:
        raise FitError("need at least 4 points")
    center = w[int(np.argmin(np.abs(t)))]
    hwhm = _dip_width(w, np.abs(1.0 - t) ** 2)
    x0 = np.array([0.0, 2.0 * hwhm, 0.0])

    def fun(x):
        return _complex_residual(two_level_transmission(w, center + x[0], x[1], x[2]), t)

    res, norm = _solve(fun, x0, bounds=([-np.inf, 0.0, 0.0], np.inf), x_scale=hwhm)
    return TwoLevelFit(center + res.x[0], res.x[1], res.x[2], norm, _covariance(res))


def fit_eit(spectrum, Gamma, gamma, kappa, omega_r_tilde, omega_phi, starts=None):
    """Fit ``omega_qM`` and ``Omega_phi`` with the other constants fixed.

    Several starting values of ``Omega_phi`` are tried and the best result is
    kept, because the transparency window makes the cost multimodal.
    """
    w, t = spectrum.omega_p, spectrum.t_c
    if w.size < 4:
        raise FitError("need at least 4 points")
    weight = np.clip(1.0 - np.abs(t) ** 2, 0.0, None)
    center = float(np.sum(weight * w) / np.sum(weight)) if np.sum(weight) > 0 else float(w.mean())
    if starts is None:
        starts = 2 * np.pi * np.array([0.003, 0.01, 0.02, 0.04])

    def fun(x):
        delta, D2 = lambda_detunings(w, center + x[0], omega_r_tilde, omega_phi)
        return _complex_residual(analytic_transmission(delta, D2, Gamma, gamma, kappa, x[1]), t)

    best, last_err = None, None
    for om0 in starts:
        try:
            res, norm = _solve(fun, np.array([0.0, om0]), bounds=([-np.inf, 0.0], np.inf),
                               x_scale=np.array([0.01, 0.01]))
        except FitError as exc:
            last_err = exc
            continue
        if best is None or norm < best[1]:
            best = (res, norm)
    if best is None:
        raise last_err
    res, norm = best
    rms = norm / math.sqrt(w.size)
    return LambdaFit(center + res.x[0], abs(res.x[1]), norm, _covariance(res), rms)


# --- derived quantities -----------------------------------------------------------

@dataclass(frozen=True)
class PhaseDelay:
    delta_t: float     # magnitude, ns
    signed: float      # -d theta / d omega_p


def _stencil_derivative(y, h, i):
    return (y[i - 2] - 8 * y[i - 1] + 8 * y[i + 1] - y[i + 2]) / (12.0 * h)


def delay_from_phase(spectrum, omega0):
    """Group delay ``-d theta/d omega_p`` at ``omega0`` by a 5-point stencil."""
    w = spectrum.omega_p
    if w.size < 6 or not (w[2] <= omega0 <= w[-3]):
        raise DomainError("omega0 must lie inside the grid with two points of margin")
    i = int(np.clip(np.searchsorted(w, omega0) - 1, 2, w.size - 4))  # w[i] <= omega0 < w[i+1]
    lo, hi = i - 2, i + 4
    h = w[i + 1] - w[i]
    steps = np.diff(w[lo:hi])
    if np.max(np.abs(steps - h)) > 1e-9 * max(abs(h), 1e-300):
        raise ResolutionError("grid must be uniform around omega0")
    raw = np.angle(spectrum.t_c[lo:hi])
    jumps = np.angle(np.exp(1j * np.diff(raw)))
    if np.max(np.abs(jumps)) > np.pi / 2:
        raise ResolutionError("phase changes too fast between grid points; use a finer grid")
    theta = np.unwrap(raw)
    d0 = _stencil_derivative(theta, h, 2)
    d1 = _stencil_derivative(theta, h, 3)
    frac = (omega0 - w[i]) / h
    slope = (1 - frac) * d0 + frac * d1
    signed = -float(slope)
    return PhaseDelay(abs(signed), signed)


@dataclass(frozen=True)
class Regression:
    slope: float
    intercept: float
    r2: float


def linear_regression(x, y, through_origin=False):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if through_origin:
        sxx = float(x @ x)
        if sxx == 0:
            raise CalibrationError("regression design is degenerate")
        slope, intercept = float(x @ y) / sxx, 0.0
    else:
        if x.size < 2 or np.ptp(x) == 0:
            raise CalibrationError("regression design is degenerate")
        slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - pred) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return Regression(float(slope), float(intercept), r2)


@dataclass(frozen=True)
class ShiftCalibration:
    C0: float
    C1: float
    rabi_fit: Regression
    shift_fit: Regression


def calibrate_shift_constants(fits: Sequence, omega_q):
    """``C0`` and ``C1`` from EIT fits at several flux amplitudes.

    ``fits`` holds ``(delta_phi, LambdaFit)`` pairs; ``omega_q`` is the
    unmodulated (dressed) qubit frequency the motional shift is measured from.
    """
    pts = [(float(dphi), f) for dphi, f in fits]
    dphis = np.array([p[0] for p in pts])
    if len(pts) < 3 or np.unique(dphis).size < 3:
        raise CalibrationError("need at least 3 distinct delta_phi values")
    Om = np.array([p[1].Omega_phi for p in pts])
    centers = np.array([p[1].omega_q_motional for p in pts])
    rabi = linear_regression(np.abs(dphis), Om, through_origin=True)
    shift = linear_regression(dphis**2, omega_q - centers, through_origin=True)
    return ShiftCalibration(shift.slope, rabi.slope, rabi, shift)
