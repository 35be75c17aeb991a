"""Pulse experiments: slow light, storage and retrieval, pulse shaping.

Output field convention: ``alpha_in = Omega_p / sqrt(2 Gamma)`` and
``alpha_out = alpha_in - i sqrt(Gamma/2) <sigma>``, consistent with
``t_c = alpha_out / alpha_in`` in steady state.
"""
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import dynamics as dyn
from . import operators as ops
from .device import DeviceParams, DriveConfig, bessel_j, eps_for_rabi
from .errors import DomainError, PeakError

DEFAULT_RAMP = 20.0
PEAK_TOL = 1e-9


@dataclass(frozen=True)
class ProbePulse:
    """Gaussian probe ``amp * exp(-(t - t0)^2 / tau_d^2)`` at ``carrier``."""

    amp: float
    tau_d: float
    t0: float
    carrier: float

    def __post_init__(self):
        if self.amp < 0:
            raise DomainError("pulse amplitude must be non-negative")
        if self.tau_d <= 0:
            raise DomainError("tau_d must be positive")


def gaussian_probe(t, pulse):
    val = pulse.amp * np.exp(-((np.asarray(t, dtype=float) - pulse.t0) / pulse.tau_d) ** 2)
    return val if np.ndim(val) else float(val)


def _raised_cosine(x):
    x = np.clip(x, 0.0, 1.0)
    return 0.5 - 0.5 * np.cos(np.pi * x)


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    level: float


@dataclass(frozen=True)
class ModulationSchedule:
    """Piecewise-constant modulation strength joined by raised-cosine ramps.

    Each ramp is centred on a segment boundary and lasts ``ramp`` ns, so the
    level is exact wherever a segment is more than ``ramp/2`` from its ends.
    Gaps between segments are filled with level 0.  Before the first and
    after the last segment the end levels continue.
    """

    segments: tuple
    ramp: float = DEFAULT_RAMP

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        if not segs:
            raise DomainError("schedule needs at least one segment")
        if self.ramp <= 0:
            raise DomainError("ramp duration must be positive")
        filled = []
        for s in segs:
            if s.level < 0:
                raise DomainError("modulation levels must be non-negative")
            if not s.t_end > s.t_start:
                raise DomainError("segment must have t_end > t_start")
            if filled:
                prev = filled[-1]
                if s.t_start < prev.t_end:
                    raise DomainError("segments overlap or are out of order")
                if s.t_start > prev.t_end:
                    filled.append(Segment(prev.t_end, s.t_start, 0.0))
            filled.append(s)
        for s in filled[1:-1]:
            if s.t_end - s.t_start < self.ramp:
                raise DomainError("interior segments must be at least one ramp long")
        object.__setattr__(self, "segments", tuple(filled))

    @classmethod
    def constant(cls, level, ramp=DEFAULT_RAMP):
        return cls((Segment(-math.inf, math.inf, level),), ramp)

    @classmethod
    def store_retrieve(cls, write_level, Tc, Ts, read_level=None, ramp=DEFAULT_RAMP):
        """On at ``write_level`` until ``Tc``, off for ``Ts``, then on again."""
        read_level = write_level if read_level is None else read_level
        return cls((Segment(-math.inf, Tc, write_level), Segment(Tc, Tc + Ts, 0.0),
                    Segment(Tc + Ts, math.inf, read_level)), ramp)

    @property
    def boundaries(self):
        return [s.t_start for s in self.segments[1:]]

    @property
    def levels(self):
        return [s.level for s in self.segments]

    @property
    def peak(self):
        return max(self.levels)

    def map_levels(self, fn):
        return replace(self, segments=tuple(replace(s, level=fn(s.level)) for s in self.segments))

    def __call__(self, t):
        return schedule_envelope(t, self)


def schedule_envelope(t, schedule):
    t = np.asarray(t, dtype=float)
    levels = schedule.levels
    val = np.full(t.shape, levels[0], dtype=float)
    for b, lo, hi in zip(schedule.boundaries, levels[:-1], levels[1:]):
        val = val + (hi - lo) * _raised_cosine((t - b) / schedule.ramp + 0.5)
    return val if val.ndim else float(val)


@dataclass(frozen=True)
class PulseTrace:
    times: np.ndarray
    alpha_out_abs: np.ndarray
    n_res: np.ndarray
    p_exc: np.ndarray
    mod_envelope: np.ndarray
    alpha_in_abs: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        for name in ("alpha_out_abs", "n_res", "p_exc", "mod_envelope"):
            if len(getattr(self, name)) != n:
                raise DomainError(f"{name} length differs from times")

    @property
    def output_energy(self):
        return float(np.trapezoid(self.alpha_out_abs**2, self.times))

    @property
    def input_energy(self):
        return float(np.trapezoid(self.alpha_in_abs**2, self.times))


def input_amplitude(t, pulse, Gamma):
    return gaussian_probe(t, pulse) / math.sqrt(2.0 * Gamma)


def reference_trace(pulse, t_grid, Gamma):
    """Output with the qubit out of the way: the input pulse itself."""
    t_grid = np.asarray(t_grid, dtype=float)
    a = input_amplitude(t_grid, pulse, Gamma)
    z = np.zeros_like(t_grid)
    return PulseTrace(t_grid, a, z, z, z, a, {"reference": True})


def operating_point(device, omega_phi, carrier=None):
    """Effective constants for pulse runs at the dressed operating point.

    The qubit is placed at the probe carrier (the motionally shifted
    frequency) unless the carrier is omitted.
    """
    return dyn.EffectiveParams(
        omega_q=device.omega_q_tilde if carrier is None else carrier,
        omega_r=device.omega_r_tilde, omega_phi=omega_phi, Omega_phi=0.0,
        Gamma=device.Gamma, kappa=device.kappa, gamma_phi=device.gamma_phi)


def lab_device_for(device, target, eps, omega_phi, iterations=50):
    """Bare frequencies whose lab model maps onto ``target`` effective constants.

    Solves ``omega_q + S = target.omega_q`` and ``omega_r - S = target.omega_r``
    for the sideband shift ``S`` at modulation swing ``eps``.
    """
    x = eps / (2.0 * omega_phi)
    wq, wr = target.omega_q, target.omega_r
    for _ in range(iterations):
        delta = wq - wr
        S, _ = dyn.sideband_dressing(device.g, x, delta, omega_phi)
        wq_new, wr_new = target.omega_q - S, target.omega_r + S
        if abs(wq_new - wq) + abs(wr_new - wr) < 1e-14:
            break
        wq, wr = wq_new, wr_new
    return replace(device, omega_q=wq, omega_r=wr, omega_q_dressed=None, omega_r_dressed=None)


def _moving_average(y, n):
    """Centred average over ``n`` intervals with trapezoid end weights."""
    w = np.ones(n + 1)
    w[0] = w[-1] = 0.5
    w /= n
    out = np.convolve(y, w, mode="same")
    # near the edges the window is truncated; renormalise
    norm = np.convolve(np.ones_like(y.real), w, mode="same")
    return out / norm


def propagate(device: DeviceParams, pulse: ProbePulse, schedule: ModulationSchedule,
              frame, t_grid, omega_phi=None, effective=None, n_fock=ops.DEFAULT_N_FOCK,
              tol=dyn.DEFAULT_TOL, validate=True):
    """Integrate one pulse experiment and return the output trace.

    Parameters
    ----------
    device : DeviceParams
    pulse : ProbePulse
    schedule : ModulationSchedule
        Sideband Rabi rate ``Omega_phi(t)`` in rad/ns.
    frame : Frame or str
        ``effective`` or ``lab``.
    t_grid : array_like
        Output times in ns; integration starts in the ground state at
        ``t_grid[0]``.
    omega_phi : float, optional
        Modulation frequency; defaults to ``omega_q~ - omega_r~ - (omega_q~ -
        carrier)``, i.e. two-photon resonance with the carrier.
    effective : EffectiveParams, optional
        Effective-frame constants (``Omega_phi`` is ignored); default
        :func:`operating_point`.

    Notes
    -----
    In the lab frame the modulation swing follows the schedule through the
    inverse of ``Omega_phi = 2 g J1(eps/(2 omega_phi))`` level by level, and
    ``<sigma>`` is averaged over one modulation period before it enters the
    output field.
    """
    frame = dyn.Frame.parse(frame)
    t_grid = np.asarray(t_grid, dtype=float)
    if omega_phi is None:
        omega_phi = effective.omega_phi if effective is not None else \
            pulse.carrier - device.omega_r_tilde
    Gamma = device.Gamma
    peak = schedule.peak
    probe_env = lambda t: math.exp(-((t - pulse.t0) / pulse.tau_d) ** 2)

    if frame is dyn.Frame.EFFECTIVE:
        p = effective if effective is not None else operating_point(device, omega_phi, pulse.carrier)
        p = replace(p, Omega_phi=peak)
        mod_env = None if peak == 0 else (lambda t: schedule_envelope(t, schedule) / peak)
        drive = DriveConfig(Omega_p=pulse.amp, omega_p=pulse.carrier, omega_phi=omega_phi,
                            Omega_phi=peak)
        spec = dyn.HamiltonianSpec(dyn.Frame.EFFECTIVE, device, drive, n_fock=n_fock,
                                   probe_envelope=probe_env, modulation_envelope=mod_env,
                                   effective=p)
        traj = dyn.evolve(ops.ground_state(n_fock), spec, t_grid, tol=tol,
                          keep_states=False, validate=validate)
        sigma = p.probe_scale * traj.sigma
        n_res, p_exc = traj.n_res, traj.p_exc
    else:
        eps_sched = schedule.map_levels(lambda lv: eps_for_rabi(lv, omega_phi, device.g) if lv else 0.0)
        eps_peak = eps_sched.peak
        mod_env = None if eps_peak == 0 else (lambda t: schedule_envelope(t, eps_sched) / eps_peak)
        drive = DriveConfig(Omega_p=pulse.amp, omega_p=pulse.carrier, omega_phi=omega_phi,
                            eps_phi=eps_peak)
        spec = dyn.HamiltonianSpec(dyn.Frame.LAB, device, drive, n_fock=n_fock,
                                   probe_envelope=probe_env, modulation_envelope=mod_env)
        period = 2.0 * math.pi / omega_phi
        m = dyn.STEPS_PER_PERIOD
        fine = np.arange(t_grid[0], t_grid[-1] + period, period / m)
        traj = dyn.evolve(ops.ground_state(n_fock), spec, fine, tol=tol,
                          keep_states=False, validate=validate)
        sig_f = _moving_average(traj.sigma, m)
        sigma = np.interp(t_grid, fine, sig_f.real) + 1j * np.interp(t_grid, fine, sig_f.imag)
        n_res = np.interp(t_grid, fine, _moving_average(traj.n_res, m))
        p_exc = np.interp(t_grid, fine, _moving_average(traj.p_exc, m))

    a_in = input_amplitude(t_grid, pulse, Gamma)
    a_out = a_in - 1j * math.sqrt(Gamma / 2.0) * sigma
    return PulseTrace(t_grid, np.abs(a_out), n_res, p_exc,
                      np.asarray(schedule_envelope(t_grid, schedule), dtype=float),
                      np.abs(a_in), {"frame": frame.value})


# --- metrics ------------------------------------------------------------------

def peak_time(times, values):
    """Sub-sample peak position by 3-point parabolic interpolation."""
    times = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if y.size < 3:
        raise PeakError("need at least three samples")
    i = int(np.argmax(y))
    top = y[i]
    scale = max(abs(top), 1e-300)
    if np.ptp(y) <= PEAK_TOL * scale:
        raise PeakError("trace is flat; no unique peak")
    ties = np.flatnonzero(y >= top - PEAK_TOL * scale)
    if ties.size > 1 and np.any(np.diff(ties) > 1):
        raise PeakError("trace has several maxima of equal height")
    if i == 0 or i == y.size - 1:
        return float(times[i]), float(top)
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2.0 * y1 + y2
    off = 0.0 if den == 0 else 0.5 * (y0 - y2) / den
    h = times[i + 1] - times[i] if off >= 0 else times[i] - times[i - 1]
    return float(times[i] + off * h), float(y1 - 0.25 * (y0 - y2) * off)


@dataclass(frozen=True)
class DelayAnalysis:
    delta_t: float
    group_velocity: Optional[float] = None   # km/s (= um/ns)
    effective_depth: Optional[float] = None
    peak_amplitude: Optional[float] = None
    reference_peak: Optional[float] = None


def delay_time(trace, reference, L=None, Omega_phi=None, Gamma=None):
    """Peak delay of ``trace`` behind the centre of ``reference``.

    With ``L`` (um) the group velocity ``L / delta_t`` is reported in km/s;
    with ``Omega_phi`` and ``Gamma`` the depth ``delta_t Omega_phi^2 / Gamma``.
    """
    if len(trace.times) != len(reference.times) or np.any(trace.times != reference.times):
        raise DomainError("trace and reference must share a time grid")
    tp, ap = peak_time(trace.times, trace.alpha_out_abs)
    tr, ar = peak_time(reference.times, reference.alpha_out_abs)
    dt = tp - tr
    vg = None
    if L is not None:
        vg = math.inf if dt == 0 else L / dt
    depth = None
    if Omega_phi is not None and Gamma is not None:
        depth = dt * Omega_phi**2 / Gamma
    return DelayAnalysis(dt, vg, depth, ap, ar)


def mean_input_photons(pulse, Gamma):
    """Mean photon number of the probe pulse, ``amp^2 tau_d sqrt(pi/2) / (2 Gamma)``."""
    if Gamma <= 0:
        raise DomainError("Gamma must be positive")
    return pulse.amp**2 * pulse.tau_d * math.sqrt(math.pi / 2.0) / (2.0 * Gamma)


def retrieval_window(schedule, t_end, start="onset"):
    """Window from the last turn-on ramp to ``t_end``.

    ``start="onset"`` opens the window where the ramp begins, so light that
    leaks out during the ramp is counted; ``"complete"`` opens it once the
    ramp has finished.
    """
    b = schedule.boundaries
    if not b:
        raise DomainError("schedule has no turn-on")
    if start not in ("onset", "complete"):
        raise DomainError(f"unknown window start {start!r}")
    sign = -0.5 if start == "onset" else 0.5
    return (b[-1] + sign * schedule.ramp, t_end)


def storage_efficiency(trace, reference, window):
    """Energy of ``trace`` inside ``window`` relative to the whole reference."""
    ta, tb = window
    t = trace.times
    mask = (t >= ta) & (t <= tb)
    if np.count_nonzero(mask) < 2:
        raise DomainError("retrieval window holds fewer than two samples")
    e_ref = np.trapezoid(reference.alpha_out_abs**2, reference.times)
    if e_ref <= 0:
        raise DomainError("reference pulse carries no energy")
    return float(np.trapezoid(trace.alpha_out_abs[mask] ** 2, t[mask]) / e_ref)


@dataclass(frozen=True)
class CaptureResult:
    eta_c: float
    t_star: float
    no_input: bool = False


def capture_efficiency(trace, Tc, N_R, ramp=DEFAULT_RAMP):
    """Resonator population right after turn-off, relative to ``N_R``."""
    t = trace.times
    t_off = Tc + 0.5 * ramp
    if t_off > t[-1]:
        raise DomainError("turn-off completes after the end of the grid")
    i = int(np.searchsorted(t, t_off))
    if N_R < 1e-12:
        return CaptureResult(0.0, float(t[i]), True)
    return CaptureResult(float(trace.n_res[i] / N_R), float(t[i]))


def retrieve_shaped(device, pulse, Ts, omega_retrieve, write_level, t_grid, Tc=None,
                    ramp=DEFAULT_RAMP, frame="effective", **kwargs):
    """Store with ``write_level``, wait ``Ts``, retrieve at ``omega_retrieve``."""
    Tc = pulse.t0 + pulse.tau_d if Tc is None else Tc
    sched = ModulationSchedule.store_retrieve(write_level, Tc, Ts, omega_retrieve, ramp)
    return propagate(device, pulse, sched, frame, t_grid, **kwargs)


@dataclass(frozen=True)
class DecayFit:
    rate: float
    intercept: float
    residual: float
    underdetermined: bool


def storage_decay_fit(points: Sequence):
    """Exponential decay rate from ``(Ts, eta)`` pairs via a log-linear fit."""
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < 2:
        raise DomainError("need at least two points")
    Ts = np.array([p[0] for p in pts])
    eta = np.array([p[1] for p in pts])
    if np.any(eta <= 0):
        raise DomainError("efficiencies must be positive")
    if np.ptp(Ts) == 0:
        raise DomainError("storage times must differ")
    slope, intercept = np.polyfit(Ts, np.log(eta), 1)
    resid = float(np.sqrt(np.mean((np.log(eta) - (slope * Ts + intercept)) ** 2)))
    return DecayFit(-float(slope), float(intercept), resid, len(pts) < 3)


def pulse_fwhm(times, values):
    """Full width at half maximum of the highest peak in ``values``."""
    times = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    i = int(np.argmax(y))
    half = 0.5 * y[i]
    lo = i
    while lo > 0 and y[lo - 1] >= half:
        lo -= 1
    hi = i
    while hi < y.size - 1 and y[hi + 1] >= half:
        hi += 1
    if lo == 0 or hi == y.size - 1:
        raise PeakError("peak is not contained in the window")

    def cross(a, b):
        return times[a] + (half - y[a]) * (times[b] - times[a]) / (y[b] - y[a])

    return float(cross(hi + 1, hi) - cross(lo - 1, lo))


def window_slice(trace, window):
    t = trace.times
    mask = (t >= window[0]) & (t <= window[1])
    return t[mask], trace.alpha_out_abs[mask]
