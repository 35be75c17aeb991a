"""Experiment pipelines behind ``lambda-eit run --preset``.

Each preset takes a parsed :class:`ExperimentConfig`, writes its CSV files
into the output directory and returns the files plus a JSON-ready summary.
Pulse presets carry their own defaults for the probe pulse, schedule and
sweep; the ``[pulse]``, ``[schedule]`` and ``[sweep]`` sections override them.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from . import io
from . import pulselab as pl
from . import spectroscopy as sp
from .device import DriveConfig, eps_for_rabi, probe_power, shift_constants_from_flux
from .errors import ConfigurationError, LambdaEITError
from .plotting import PlotSpec, emit_plot
from .units import TWO_PI, ghz, mhz, to_ghz, to_mhz, watts_to_dbm

log = logging.getLogger(__name__)

WEAK_PROBE = mhz(1.0)
LINEAR_PROBE = mhz(0.1)
DEFAULT_OMEGA_PHI = mhz(18.0)


@dataclass
class PresetResult:
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    plots: list = field(default_factory=list)    # (csv path, PlotSpec)


def _fan_out(fn, jobs, parallel, labels=None):
    """Run ``fn`` over ``jobs``, in worker processes when ``parallel > 1``.

    Failures are re-raised with the sweep coordinate from ``labels``.
    """
    labels = labels if labels is not None else [str(i) for i in range(len(jobs))]

    def tagged(i, exc):
        return type(exc)(f"sweep point {labels[i]}: {exc}")

    if parallel and parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = [pool.submit(fn, j) for j in jobs]
            out = []
            for i, f in enumerate(futures):
                try:
                    out.append(f.result())
                except LambdaEITError as exc:
                    raise tagged(i, exc) from exc
            return out
    out = []
    for i, j in enumerate(jobs):
        try:
            out.append(fn(j))
        except LambdaEITError as exc:
            raise tagged(i, exc) from exc
    return out


def _labels(name, values, conv=float, unit=""):
    return [f"{name} = {conv(v):g}{unit}" for v in values]


def _sweep_values(cfg, axis, default):
    """Internal-unit sweep values for ``axis`` from config, else ``default``."""
    if cfg.sweep is None:
        return list(default)
    if cfg.sweep.axis.lower() != axis.lower():
        raise ConfigurationError(f"this preset sweeps {axis}, config asks for {cfg.sweep.axis}")
    return list(cfg.sweep.values)


def _drive(cfg):
    if cfg.drive is None:
        raise ConfigurationError("preset needs a [drive] section")
    return cfg.drive


def _grid(cfg, center):
    c = cfg.spectrum.center if cfg.spectrum.center is not None else center
    return sp.default_grid(c, cfg.spectrum.span, cfg.spectrum.points)


def _spec(cfg, drive, frame="effective"):
    return dyn.HamiltonianSpec(frame, cfg.device, drive, n_fock=cfg.solver.n_fock)


def _modulation_rabi(cfg, drive):
    """Sideband Rabi rate implied by the drive section (default 18 MHz)."""
    if drive.Omega_phi is not None:
        return drive.Omega_phi
    if drive.delta_phi is not None and cfg.device.C1 is not None:
        return cfg.device.C1 * abs(drive.delta_phi)
    return DEFAULT_OMEGA_PHI


# --- spectroscopy presets -------------------------------------------------------

def single_tone(cfg, out, parallel=1):
    """Bare qubit dip with a weak probe, plus a two-level fit of it."""
    dev = cfg.device
    drv = _drive(cfg)
    probe = cfg.spectrum.probe if cfg.spectrum.probe is not None else WEAK_PROBE
    drive = replace(drv, Omega_p=probe, Omega_phi=0.0, delta_phi=None, eps_phi=None)
    # without the sideband the resonator never leaves vacuum; two levels are exact
    spec = _spec(cfg, drive).with_(n_fock=2)
    grid = _grid(cfg, dev.omega_q_tilde)
    s = sp.sweep_spectrum(grid, spec, "effective")
    fit = sp.fit_two_level(s)
    rho = dyn.steady_state(spec.with_drive(omega_p=dev.omega_q_tilde))
    t_res = complex(sp.transmission_from_sigma(
        np.trace(rho @ dyn.ops.qubit_lowering(spec.n_fock)), dev.Gamma, probe))
    res = PresetResult()
    res.files.append(io.write_spectrum(out / "single_tone.csv", s))
    res.plots.append((out / "single_tone.csv", PlotSpec("line", "omega_p_GHz", ["abs_t"], title="single tone")))
    res.summary = {
        "probe_rabi_MHz": to_mhz(probe),
        "on_resonance_abs_t": abs(t_res),
        "two_level_limit": abs(1 - dev.Gamma / (2 * dev.gamma)),
        "fit": _fit_json(fit, {"omega_q": ("GHz", to_ghz), "Gamma": ("MHz", to_mhz),
                               "gamma_phi": ("MHz", to_mhz)}),
    }
    return res


def _fit_json(fit, units):
    out = {"residual_norm": fit.residual_norm, "parameters": {}}
    for name, val, err in zip(fit.names, fit.values, fit.stderr):
        unit, conv = units[name]
        out["parameters"][name] = {"value": conv(val), "stderr": conv(err), "unit": unit}
    return out


def _eit_point(job):
    spec, grid = job
    return sp.sweep_spectrum(grid, spec, "effective").t_c


def two_tone(cfg, out, parallel=1):
    """Probe spectra against the modulation frequency (sideband splitting)."""
    dev = cfg.device
    drv = _drive(cfg)
    Om = _modulation_rabi(cfg, drv)
    center = dev.omega_q_tilde - dev.omega_r_tilde
    wphis = _sweep_values(cfg, "omega_phi_GHz", center + mhz(np.linspace(-50, 50, 21)))
    grid = _grid(cfg, dev.omega_q_tilde)
    base = replace(drv, Omega_phi=Om, delta_phi=None, eps_phi=None)
    jobs = [(_spec(cfg, replace(base, omega_phi=w)), grid) for w in wphis]
    ts = _fan_out(_eit_point, jobs, parallel, _labels("omega_phi", wphis, to_ghz, " GHz"))
    spectra = [sp.Spectrum(grid, t) for t in ts]
    res = PresetResult()
    path = io.write_spectrum_map(out / "two_tone.csv", "omega_phi_GHz", to_ghz(np.array(wphis)), spectra)
    res.files.append(path)
    res.plots.append((path, PlotSpec("heatmap", "omega_p_GHz", ["omega_phi_GHz"], "abs_t", "two tone")))
    res.summary = {"Omega_phi_MHz": to_mhz(Om), "points": len(wphis)}
    return res


def _saturation_point(job):
    spec = job
    dev, Om = spec.device, spec.drive.Omega_p
    rho = dyn.steady_state(spec)
    t = complex(sp.transmission_from_sigma(
        np.trace(rho @ dyn.ops.qubit_lowering(spec.n_fock)), dev.Gamma, Om))
    p = watts_to_dbm(probe_power(dev.omega_q_tilde, Om, dev.Gamma))
    return (to_mhz(Om), p, t.real, t.imag, abs(t))


def saturation(cfg, out, parallel=1):
    """On-resonance transmission against probe strength (power calibration)."""
    dev = cfg.device
    drv = _drive(cfg)
    rabis = _sweep_values(cfg, "Omega_p_rabi_MHz", mhz(np.geomspace(0.5, 200.0, 41)))
    jobs = [_spec(cfg, replace(drv, Omega_p=Om, omega_p=dev.omega_q_tilde,
                               Omega_phi=0.0, delta_phi=None, eps_phi=None)) for Om in rabis]
    rows = _fan_out(_saturation_point, jobs, parallel, _labels("Omega_p", rabis, to_mhz, " MHz"))
    res = PresetResult()
    path = io.write_csv(out / "saturation.csv", ("Omega_p_MHz", "power_dBm", "re_t", "im_t", "abs_t"), rows)
    res.files.append(path)
    res.plots.append((path, PlotSpec("line", "power_dBm", ["abs_t"], title="saturation")))
    res.summary = {"power_dBm_at_drive_Omega_p": watts_to_dbm(probe_power(dev.omega_q_tilde, drv.Omega_p, dev.Gamma))
                   if drv.Omega_p > 0 else None}
    return res


def eit_fits(cfg, parallel=1):
    """Effective-engine spectra over the flux-amplitude sweep and their fits."""
    dev = cfg.device
    drv = _drive(cfg)
    if dev.C0 is None or dev.C1 is None:
        raise ConfigurationError("eit_spectrum needs C0_MHz and C1_MHz in [device]")
    dphis = _sweep_values(cfg, "delta_phi_phi0", np.linspace(0.0, 0.054, 10))
    grid = _grid(cfg, dev.omega_q_tilde)
    base = replace(drv, Omega_phi=None, eps_phi=None)
    jobs = [(_spec(cfg, replace(base, delta_phi=float(x))), grid) for x in dphis]
    ts = _fan_out(_eit_point, jobs, parallel, _labels("delta_phi", dphis, unit=" phi0"))
    spectra = [sp.Spectrum(grid, t) for t in ts]
    fits = [sp.fit_eit(s, dev.Gamma, dev.gamma, dev.kappa, dev.omega_r_tilde, drv.omega_phi)
            for s in spectra]
    return dphis, grid, spectra, fits


def eit_spectrum(cfg, out, parallel=1):
    dev = cfg.device
    drv = _drive(cfg)
    dphis, grid, spectra, fits = eit_fits(cfg, parallel)
    res = PresetResult()
    path = io.write_spectrum_map(out / "eit_spectrum.csv", "delta_phi_phi0", dphis, spectra)
    res.files.append(path)
    res.plots.append((path, PlotSpec("heatmap", "omega_p_GHz", ["delta_phi_phi0"], "abs_t", "EIT")))
    rows = [(x, to_ghz(f.omega_q_motional), to_mhz(f.Omega_phi), to_ghz(f.stderr[0]),
             to_mhz(f.stderr[1]), f.rms) for x, f in zip(dphis, fits)]
    fpath = io.write_csv(out / "eit_fits.csv", ("delta_phi_phi0", "omega_qM_GHz", "Omega_phi_MHz",
                                               "omega_qM_err_GHz", "Omega_phi_err_MHz", "rms"), rows)
    res.files.append(fpath)
    res.plots.append((fpath, PlotSpec("line", "delta_phi_phi0", ["Omega_phi_MHz"], title="sideband Rabi rate")))
    reg = sp.linear_regression(dphis, [to_mhz(f.Omega_phi) for f in fits])
    two_photon = dev.omega_r_tilde + drv.omega_phi
    last = spectra[-1]
    window = np.abs(last.omega_p - two_photon) < 4 * sp.eit_fwhm(max(fits[-1].Omega_phi, 1e-9), dev.Gamma, dev.gamma) + mhz(1)
    peak = last.omega_p[window][int(np.argmax(last.abs[window]))] if np.any(window) else float("nan")
    res.summary = {
        "Omega_phi_vs_delta_phi": {"slope_MHz_per_phi0": reg.slope, "intercept_MHz": reg.intercept, "r2": reg.r2},
        "max_fit_rms": max(f.rms for f in fits),
        "two_photon_resonance_GHz": to_ghz(two_photon),
        "transparency_peak_GHz": to_ghz(peak),
    }
    return res


def calibrate(cfg, out, parallel=1):
    """Chain the EIT fits into the shift constants and compare with the flux curve."""
    dev = cfg.device
    drv = _drive(cfg)
    dphis, grid, spectra, fits = eit_fits(cfg, parallel)
    cal = sp.calibrate_shift_constants([(x, f) for x, f in zip(dphis, fits) if x != 0], dev.omega_q_tilde)
    C0f, C1f = shift_constants_from_flux(dev.phi_bias, dev.E_c, dev.E_J0, dev.d, dev.g, drv.omega_phi)
    res = PresetResult()
    rows = [(x, to_ghz(f.omega_q_motional), to_mhz(f.Omega_phi), to_ghz(f.stderr[0]),
             to_mhz(f.stderr[1]), f.rms) for x, f in zip(dphis, fits)]
    res.files.append(io.write_csv(out / "calibrate_fits.csv", ("delta_phi_phi0", "omega_qM_GHz", "Omega_phi_MHz",
                                                              "omega_qM_err_GHz", "Omega_phi_err_MHz", "rms"), rows))
    res.summary = {
        "C0_MHz_per_phi0sq": to_mhz(cal.C0), "C1_MHz_per_phi0": to_mhz(cal.C1),
        "C0_flux_curve_MHz_per_phi0sq": to_mhz(C0f), "C1_flux_curve_MHz_per_phi0": to_mhz(C1f),
        "C1_ratio_fit_to_flux_curve": cal.C1 / C1f,
        "rabi_r2": cal.rabi_fit.r2, "shift_r2": cal.shift_fit.r2,
    }
    return res


# --- pulse presets ------------------------------------------------------------------

SLOW_LIGHT_PULSE = {"amp": mhz(7.0), "tau_d": 300.0, "t0": 1200.0, "carrier": ghz(6.2565)}
STORE_PULSE = {"amp": mhz(7.0), "tau_d": 50.0, "t0": 200.0, "carrier": ghz(6.2565)}


def _pulse(cfg, defaults):
    p = {**defaults, **cfg.pulse}
    return pl.ProbePulse(p["amp"], p["tau_d"], p["t0"], p["carrier"])


def _omega_phi(cfg):
    drv = cfg.drive
    if drv is not None:
        return drv.omega_phi
    return ghz(0.725)


def _ramp(cfg):
    return cfg.schedule.get("ramp", pl.DEFAULT_RAMP)


def _propagate_job(job):
    dev, pulse, sched, frame, t, wphi, n_fock, tol = job
    if dyn.Frame.parse(frame) is dyn.Frame.LAB:
        target = pl.operating_point(dev, wphi, pulse.carrier)
        eps = eps_for_rabi(sched.peak, wphi, dev.g) if sched.peak else 0.0
        dev = pl.lab_device_for(dev, target, eps, wphi)
    return pl.propagate(dev, pulse, sched, frame, t, omega_phi=wphi, n_fock=n_fock, tol=tol)


def _trace_grid(cfg, t_end):
    return np.arange(0.0, t_end + 0.5 * cfg.solver.dt, cfg.solver.dt)


def _jobs(cfg, pulse, schedules, t):
    return [(cfg.device, pulse, s, cfg.solver.frame, t, _omega_phi(cfg), cfg.solver.n_fock, cfg.solver.tol)
            for s in schedules]


def _trace_table(path, t, ref, traces, names):
    cols = ("t_ns", "alpha_ref") + tuple(names)
    data = np.column_stack([t, ref.alpha_out_abs] + [tr.alpha_out_abs for tr in traces])
    return io.write_csv(path, cols, data)


def slow_light(cfg, out, parallel=1):
    """Continuous modulation: delayed output pulses and their delays."""
    dev = cfg.device
    pulse = _pulse(cfg, SLOW_LIGHT_PULSE)
    levels = _sweep_values(cfg, "Omega_phi_rabi_MHz", mhz(np.array([13.3, 18.0])))
    t = _trace_grid(cfg, 2.0 * pulse.t0)
    ref = pl.reference_trace(pulse, t, dev.Gamma)
    scheds = [pl.ModulationSchedule.constant(lv, _ramp(cfg)) for lv in levels]
    traces = _fan_out(_propagate_job, _jobs(cfg, pulse, scheds, t), parallel,
                      _labels("Omega_phi", levels, to_mhz, " MHz"))
    res = PresetResult()
    res.files.append(io.write_trace(out / "slow_light_reference.csv", ref))
    rows = []
    names = []
    for lv, tr in zip(levels, traces):
        tag = f"{to_mhz(lv):g}MHz"
        names.append(f"alpha_out_{tag}")
        res.files.append(io.write_trace(out / f"slow_light_{tag}.csv", tr))
        a = pl.delay_time(tr, ref, L=dev.L, Omega_phi=lv, Gamma=dev.Gamma)
        rows.append((to_mhz(lv), a.delta_t, a.group_velocity, a.effective_depth, a.peak_amplitude / a.reference_peak))
    path = _trace_table(out / "slow_light_traces.csv", t, ref, traces, names)
    res.files.append(path)
    res.plots.append((path, PlotSpec("line", "t_ns", ["alpha_ref"] + names, title="slow light")))
    res.files.append(io.write_csv(out / "slow_light_delays.csv",
                                  ("Omega_phi_MHz", "delta_t_ns", "v_g_km_s", "D", "peak_ratio"), rows))
    res.summary = {"delays": [dict(zip(("Omega_phi_MHz", "delta_t_ns", "v_g_km_s", "D", "peak_ratio"), r))
                              for r in rows], "frame": cfg.solver.frame}
    return res


def phase_delay(device, Omega_phi, omega_phi, carrier, n_fock=dyn.ops.DEFAULT_N_FOCK,
                span=mhz(2.0), points=81):
    """Phase-slope delay of the continuous-wave response at the pulse carrier."""
    p = pl.operating_point(device, omega_phi, carrier)
    p = replace(p, Omega_phi=Omega_phi)
    drive = DriveConfig(Omega_p=LINEAR_PROBE, omega_p=carrier, omega_phi=omega_phi, Omega_phi=Omega_phi)
    spec = dyn.HamiltonianSpec("effective", device, drive, n_fock=n_fock, effective=p)
    grid = carrier + np.linspace(-span, span, points)
    return sp.delay_from_phase(sp.sweep_spectrum(grid, spec, "effective"), carrier)


def delay_scan(cfg, out, parallel=1):
    """Pulse-peak delay against phase-slope delay over the modulation strength."""
    dev = cfg.device
    pulse = _pulse(cfg, SLOW_LIGHT_PULSE)
    levels = _sweep_values(cfg, "Omega_phi_rabi_MHz", mhz(np.arange(13.0, 25.5, 1.0)))
    t = _trace_grid(cfg, 2.0 * pulse.t0)
    ref = pl.reference_trace(pulse, t, dev.Gamma)
    scheds = [pl.ModulationSchedule.constant(lv, _ramp(cfg)) for lv in levels]
    traces = _fan_out(_propagate_job, _jobs(cfg, pulse, scheds, t), parallel,
                      _labels("Omega_phi", levels, to_mhz, " MHz"))
    rows = []
    for lv, tr in zip(levels, traces):
        a = pl.delay_time(tr, ref, L=dev.L, Omega_phi=lv, Gamma=dev.Gamma)
        ph = phase_delay(dev, lv, _omega_phi(cfg), pulse.carrier, cfg.solver.n_fock)
        ideal = 2.0 * dev.Gamma / lv**2
        rows.append((to_mhz(lv), a.delta_t, ph.delta_t, ideal, abs(a.delta_t - ph.delta_t) / ph.delta_t,
                     a.effective_depth))
    res = PresetResult()
    cols = ("Omega_phi_MHz", "pulse_delay_ns", "phase_delay_ns", "ideal_delay_ns", "rel_diff", "D")
    path = io.write_csv(out / "delay_scan.csv", cols, rows)
    res.files.append(path)
    res.plots.append((path, PlotSpec("line", "Omega_phi_MHz", ["pulse_delay_ns", "phase_delay_ns", "ideal_delay_ns"],
                                     title="delay")))
    res.summary = {"max_rel_diff": max(r[4] for r in rows)}
    return res


def _store_setup(cfg):
    pulse = _pulse(cfg, STORE_PULSE)
    level = _modulation_rabi(cfg, cfg.drive) if cfg.drive is not None else DEFAULT_OMEGA_PHI
    Tc = cfg.schedule.get("t_c", pulse.t0 + pulse.tau_d)
    return pulse, level, Tc


def store(cfg, out, parallel=1):
    """Storage and retrieval over a range of storage times."""
    dev = cfg.device
    pulse, level, Tc = _store_setup(cfg)
    ramp = _ramp(cfg)
    read = cfg.schedule.get("read_level", level)
    Ts_values = _sweep_values(cfg, "Ts_ns", np.arange(125.0, 701.0, 25.0))
    scheds = [pl.ModulationSchedule.store_retrieve(level, Tc, Ts, read, ramp) for Ts in Ts_values]
    t_end = Tc + max(Ts_values) + 500.0
    t = _trace_grid(cfg, t_end)
    ref = pl.reference_trace(pulse, t, dev.Gamma)
    traces = _fan_out(_propagate_job, _jobs(cfg, pulse, scheds, t), parallel,
                      _labels("Ts", Ts_values, unit=" ns"))
    etas = [pl.storage_efficiency(tr, ref, pl.retrieval_window(s, t[-1])) for s, tr in zip(scheds, traces)]
    fit = pl.storage_decay_fit(list(zip(Ts_values, etas)))
    res = PresetResult()
    path = io.write_csv(out / "store.csv", ("Ts_ns", "eta"), list(zip(Ts_values, etas)))
    res.files.append(path)
    res.plots.append((path, PlotSpec("line", "Ts_ns", ["eta"], title="storage efficiency", logy=True)))
    shown = [i for i, Ts in enumerate(Ts_values) if Ts in (125.0, 200.0)] or [0]
    names = [f"alpha_out_Ts{Ts_values[i]:g}ns" for i in shown]
    tpath = _trace_table(out / "store_traces.csv", t, ref, [traces[i] for i in shown], names)
    res.files.append(tpath)
    res.plots.append((tpath, PlotSpec("line", "t_ns", ["alpha_ref"] + names, title="stored light")))
    res.summary = {
        "N_R": pl.mean_input_photons(pulse, dev.Gamma),
        "gamma_EIT_MHz": to_mhz(sp.eit_fwhm(level, dev.Gamma, dev.gamma)),
        "max_eta": max(etas),
        "decay_rate_MHz": to_mhz(fit.rate),
        "kappa_MHz": to_mhz(dev.kappa),
        "Tc_ns": Tc, "ramp_ns": ramp, "write_level_MHz": to_mhz(level),
    }
    return res


def capture_curve(cfg, device, Tcs, parallel=1):
    pulse, level, _ = _store_setup(cfg)
    ramp = _ramp(cfg)
    N_R = pl.mean_input_photons(pulse, device.Gamma)
    jobs = []
    for Tc in Tcs:
        sched = pl.ModulationSchedule((pl.Segment(-math.inf, Tc, level), pl.Segment(Tc, math.inf, 0.0)), ramp)
        t = _trace_grid(cfg, Tc + 0.5 * ramp + 2 * cfg.solver.dt)
        jobs.append((device, pulse, sched, cfg.solver.frame, t, _omega_phi(cfg), cfg.solver.n_fock, cfg.solver.tol))
    traces = _fan_out(_propagate_job, jobs, parallel, _labels("Tc", Tcs, unit=" ns"))
    return [pl.capture_efficiency(tr, Tc, N_R, ramp).eta_c for Tc, tr in zip(Tcs, traces)]


def capture_scan(cfg, out, parallel=1):
    """Resonator capture efficiency against turn-off time, real and ideal device."""
    dev = cfg.device
    Tcs = _sweep_values(cfg, "Tc_ns", np.arange(150.0, 351.0, 10.0))
    real = capture_curve(cfg, dev, Tcs, parallel)
    ideal = capture_curve(cfg, replace(dev, kappa=0.0, gamma_phi=0.0), Tcs, parallel)
    res = PresetResult()
    path = io.write_csv(out / "capture_scan.csv", ("Tc_ns", "eta_c_real", "eta_c_ideal"), list(zip(Tcs, real, ideal)))
    res.files.append(path)
    res.plots.append((path, PlotSpec("line", "Tc_ns", ["eta_c_real", "eta_c_ideal"], title="capture efficiency")))
    res.summary = {"max_eta_c_real": max(real), "max_eta_c_ideal": max(ideal),
                   "best_Tc_real_ns": Tcs[int(np.argmax(real))], "best_Tc_ideal_ns": Tcs[int(np.argmax(ideal))]}
    return res


def shape(cfg, out, parallel=1):
    """Retrieval at different modulation strengths after a short storage."""
    dev = cfg.device
    pulse, level, Tc = _store_setup(cfg)
    ramp = _ramp(cfg)
    Ts = cfg.schedule.get("t_s", 40.0)
    reads = _sweep_values(cfg, "Omega_phi_rabi_MHz", mhz(np.array([14.6, 24.4])))
    scheds = [pl.ModulationSchedule.store_retrieve(level, Tc, Ts, r, ramp) for r in reads]
    t = _trace_grid(cfg, Tc + Ts + 500.0)
    ref = pl.reference_trace(pulse, t, dev.Gamma)
    traces = _fan_out(_propagate_job, _jobs(cfg, pulse, scheds, t), parallel,
                      _labels("Omega_out", reads, to_mhz, " MHz"))
    rows = []
    for r, s, tr in zip(reads, scheds, traces):
        ts, a = pl.window_slice(tr, pl.retrieval_window(s, t[-1]))
        tp, ap = pl.peak_time(ts, a)
        rows.append((to_mhz(r), ap, pl.pulse_fwhm(ts, a), tp, pl.storage_efficiency(tr, ref, pl.retrieval_window(s, t[-1]))))
    res = PresetResult()
    names = [f"alpha_out_{to_mhz(r):g}MHz" for r in reads]
    tpath = _trace_table(out / "shape_traces.csv", t, ref, traces, names)
    res.files.append(tpath)
    res.plots.append((tpath, PlotSpec("line", "t_ns", ["alpha_ref"] + names, title="pulse shaping")))
    cols = ("Omega_out_MHz", "peak", "fwhm_ns", "t_peak_ns", "eta")
    res.files.append(io.write_csv(out / "shape.csv", cols, rows))
    res.summary = {"retrievals": [dict(zip(cols, r)) for r in rows], "Ts_ns": Ts}
    return res


PRESETS = {
    "single_tone": single_tone,
    "two_tone": two_tone,
    "saturation": saturation,
    "eit_spectrum": eit_spectrum,
    "slow_light": slow_light,
    "delay_scan": delay_scan,
    "store": store,
    "capture_scan": capture_scan,
    "shape": shape,
    "calibrate": calibrate,
}
