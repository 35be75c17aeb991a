"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line (collected in the terminal summary) and
asserts the same condition.  Runtimes are wall-clock on a single core.
"""
import time
from dataclasses import replace

import numpy as np
import pytest

from lambda_eit import device as dv
from lambda_eit import dynamics as dyn
from lambda_eit import operators as ops
from lambda_eit import presets
from lambda_eit import pulselab as pl
from lambda_eit import spectroscopy as sp
from lambda_eit.device import DriveConfig
from lambda_eit.units import ghz, mhz, to_ghz, to_mhz

CARRIER = ghz(6.2565)
WPHI = ghz(0.725)
MAX_DELTA_PHI = 0.054


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def test_two_level_extinction(cfg, tmp_path, verdict):
    res, secs = timed(presets.single_tone, cfg, tmp_path)
    t = res.summary["on_resonance_abs_t"]
    ok = abs(t - 0.047) <= 0.005 and secs < 1.0
    verdict("1 two-level extinction", ok, f"|t_c| = {t:.4f} (0.047 +/- 0.005), {secs:.2f} s (< 1 s)")


def test_eit_spectrum(cfg, tmp_path, verdict):
    res, secs = timed(presets.eit_spectrum, cfg, tmp_path)
    s = res.summary
    reg = s["Omega_phi_vs_delta_phi"]
    # half-width of the transparency window at the largest flux amplitude
    half = 0.5 * sp.eit_fwhm(cfg.device.C1 * MAX_DELTA_PHI, cfg.device.Gamma, cfg.device.gamma)
    offset = ghz(abs(s["transparency_peak_GHz"] - s["two_photon_resonance_GHz"]))
    ok = s["max_fit_rms"] < 0.02 and reg["r2"] > 0.99 and offset <= half and secs < 30.0
    verdict("2 EIT spectrum", ok,
            f"max rms {s['max_fit_rms']:.4f} (< 0.02), R^2 {reg['r2']:.5f} (> 0.99), "
            f"peak offset {to_mhz(offset):.3f} MHz (<= {to_mhz(half):.3f}), {secs:.1f} s (< 30 s)")


def _resonant_lab_spec(device, delta_phi, n_fock=4):
    """Lab spec whose sideband is tuned to the mapped two-photon resonance."""
    lab_dev = device.with_(omega_q=device.omega_q_bare, omega_q_dressed=None, omega_r_dressed=None)
    eps = dv.eps_from_delta_phi(delta_phi, device.phi_bias, device.E_c, device.E_J0, device.d)
    wphi = device.omega_q_tilde - device.omega_r_tilde
    for _ in range(30):
        drive = DriveConfig(Omega_p=mhz(1.0), omega_p=0.0, omega_phi=wphi, eps_phi=eps)
        spec = dyn.HamiltonianSpec("lab", lab_dev, drive, n_fock=n_fock)
        eff = dyn.effective_from_lab(spec).resolve_effective()
        wphi = eff.omega_q - eff.omega_r
    return spec, eff


def test_frame_equivalence(device, verdict):
    t0 = time.perf_counter()
    worst = []
    for dphi in (0.018, 0.036, MAX_DELTA_PHI):
        spec, eff = _resonant_lab_spec(device, dphi)
        centre = eff.omega_r + eff.omega_phi
        grid = centre + mhz(np.linspace(-5.0, 5.0, 41))
        lab = sp.sweep_spectrum(grid, spec, "lab_periodic")
        ref = sp.sweep_spectrum(grid, spec, "effective")
        worst.append((dphi, float(np.max(np.abs(lab.abs - ref.abs)))))
    secs = time.perf_counter() - t0
    dev = max(w for _, w in worst)
    ok = dev <= 0.03 and secs < 300.0
    detail = ", ".join(f"dphi {d:g}: {w:.4f}" for d, w in worst)
    verdict("3 frame equivalence", ok, f"max ||t|| diff {detail} (<= 0.03), {secs:.1f} s (< 300 s)")


def test_slow_light(cfg, tmp_path, verdict):
    res, secs = timed(presets.slow_light, cfg, tmp_path)
    d = {round(r["Omega_phi_MHz"], 1): r for r in res.summary["delays"]}
    a, b = d[13.3], d[18.0]
    per_trace = secs / len(d)
    ok = (abs(a["delta_t_ns"] - 95) <= 10 and abs(b["delta_t_ns"] - 69) <= 8
          and abs(a["v_g_km_s"] - 3.6) <= 0.4 and per_trace < 60.0)
    verdict("4 slow light", ok,
            f"delay {a['delta_t_ns']:.1f} ns (95 +/- 10) at 13.3 MHz, {b['delta_t_ns']:.1f} ns (69 +/- 8) "
            f"at 18 MHz, v_g {a['v_g_km_s']:.3f} km/s (3.6 +/- 0.4), {per_trace:.1f} s/trace (< 60 s)")


def test_delay_consistency(cfg, tmp_path, verdict):
    res = presets.delay_scan(cfg, tmp_path)
    rows = np.loadtxt(tmp_path / "delay_scan.csv", delimiter=",", skiprows=1)
    worst = rows[int(np.argmax(rows[:, 4]))]
    ok = res.summary["max_rel_diff"] <= 0.10
    verdict("5 delay consistency", ok,
            f"max |pulse - phase|/phase {res.summary['max_rel_diff']:.3f} (<= 0.10) at "
            f"{worst[0]:g} MHz: pulse {worst[1]:.1f} ns, phase {worst[2]:.1f} ns")


def test_ideal_optical_depth(device, verdict):
    ideal = replace(device, kappa=0.0, gamma_phi=0.0)
    wphi = CARRIER - ideal.omega_r_tilde
    errs = []
    for lv in mhz(np.arange(13.0, 25.5, 1.0)):
        ph = presets.phase_delay(ideal, lv, wphi, CARRIER)
        errs.append(abs(ph.delta_t / (2.0 * ideal.Gamma / lv**2) - 1.0))
    ok = max(errs) <= 0.01
    verdict("6 ideal optical depth", ok, f"max |delay/(2 Gamma/Omega^2) - 1| = {max(errs):.2e} (<= 0.01)")


def test_storage(cfg, tmp_path, verdict):
    res, secs = timed(presets.store, cfg, tmp_path)
    s = res.summary
    rate = s["decay_rate_MHz"]
    ok = (abs(s["N_R"] - 0.080) <= 0.002 and abs(s["gamma_EIT_MHz"] - 1.54) <= 0.02
          and abs(s["max_eta"] - 0.05) <= 0.015 and abs(rate / 0.76 - 1) <= 0.2 and secs < 120.0)
    verdict("7 storage", ok,
            f"N_R {s['N_R']:.4f} (0.080 +/- 0.002), gamma_EIT {s['gamma_EIT_MHz']:.3f} MHz (1.54 +/- 0.02), "
            f"max eta {s['max_eta']:.4f} (0.05 +/- 0.015), decay {rate:.3f} MHz (0.76 +/- 20%), "
            f"{secs:.1f} s (< 120 s)")


def test_capture_efficiency(cfg, tmp_path, verdict):
    res, secs = timed(presets.capture_scan, cfg, tmp_path)
    s = res.summary
    ok = abs(s["max_eta_c_ideal"] - 0.40) <= 0.04 and abs(s["max_eta_c_real"] - 0.25) <= 0.04 and secs < 120.0
    verdict("8 capture efficiency", ok,
            f"ideal {s['max_eta_c_ideal']:.3f} (0.40 +/- 0.04), real {s['max_eta_c_real']:.3f} "
            f"(0.25 +/- 0.04), {secs:.1f} s (< 120 s)")


def test_pulse_shaping(cfg, tmp_path, verdict):
    res, secs = timed(presets.shape, cfg, tmp_path)
    r = {round(x["Omega_out_MHz"], 1): x for x in res.summary["retrievals"]}
    slow, fast = r[14.6], r[24.4]
    ok = fast["peak"] > slow["peak"] and fast["fwhm_ns"] < slow["fwhm_ns"] and secs < 60.0
    verdict("9 pulse shaping", ok,
            f"peak {fast['peak']:.4f} > {slow['peak']:.4f}, fwhm {fast['fwhm_ns']:.1f} < "
            f"{slow['fwhm_ns']:.1f} ns, {secs:.1f} s (< 60 s)")


# --- property suite -------------------------------------------------------------------

def _density_along_trajectories(device):
    """Every sampled state of effective and lab runs is a valid density matrix."""
    n = 0
    eff = dyn.HamiltonianSpec("effective", device, DriveConfig(mhz(7.8), CARRIER, WPHI, Omega_phi=mhz(18)))
    lab, _ = _resonant_lab_spec(device, MAX_DELTA_PHI)
    lab = lab.with_drive(Omega_p=mhz(7.8), omega_p=CARRIER)
    for spec, t in ((eff, np.linspace(0, 200, 401)), (lab, np.linspace(0, 20, 401))):
        tr = dyn.evolve(ops.ground_state(spec.n_fock), spec, t)
        for rho in tr.states:
            ops.check_density_matrix(rho, trace_tol=1e-9, pos_tol=1e-9)
            n += 1
    pulse = pl.ProbePulse(mhz(7), 50.0, 200.0, CARRIER)
    sched = pl.ModulationSchedule.store_retrieve(mhz(18), 250.0, 125.0)
    pl.propagate(device, pulse, sched, "effective", np.arange(0, 900.0, 1.0), omega_phi=WPHI)
    return n


def _fock_doubling(device):
    worst = 0.0
    grid = CARRIER + mhz(np.linspace(-3, 3, 13))
    for Om in (mhz(7.8), mhz(1.0)):
        drive = DriveConfig(Om, CARRIER, WPHI, Omega_phi=mhz(18))
        a = sp.sweep_spectrum(grid, dyn.HamiltonianSpec("effective", device, drive, n_fock=7))
        b = sp.sweep_spectrum(grid, dyn.HamiltonianSpec("effective", device, drive, n_fock=14))
        worst = max(worst, float(np.max(np.abs(a.t_c - b.t_c))))
    pulse = pl.ProbePulse(mhz(7), 50.0, 200.0, CARRIER)
    sched = pl.ModulationSchedule.constant(mhz(18))
    t = np.arange(0, 600.0, 1.0)
    tr = [pl.propagate(device, pulse, sched, "effective", t, omega_phi=WPHI, n_fock=n, tol=1e-10) for n in (7, 14)]
    for name in ("alpha_out_abs", "n_res", "p_exc"):
        worst = max(worst, float(np.max(np.abs(getattr(tr[0], name) - getattr(tr[1], name)))))
    return worst


def _steady_vs_long_time(device):
    worst = 0.0
    for omega_p in (CARRIER, device.omega_q_tilde):
        spec = dyn.HamiltonianSpec("effective", device, DriveConfig(mhz(7.8), omega_p, WPHI, Omega_phi=mhz(18)))
        rho_ss = dyn.steady_state(spec)
        t_end = 50.0 / min(device.Gamma, device.kappa)
        tr = dyn.evolve(ops.ground_state(spec.n_fock), spec, [0.0, t_end], tol=1e-11)
        worst = max(worst, ops.trace_distance(rho_ss, tr.states[-1]))
    return worst


def _passivity(device):
    pulse = pl.ProbePulse(mhz(7), 300.0, 1200.0, CARRIER)
    t = np.arange(0, 2401.0, 1.0)
    ref = pl.reference_trace(pulse, t, device.Gamma)
    ratios = []
    for sched in (pl.ModulationSchedule.constant(0.0), pl.ModulationSchedule.constant(mhz(13.3)),
                  pl.ModulationSchedule.store_retrieve(mhz(18), 1500.0, 200.0)):
        tr = pl.propagate(device, pulse, sched, "effective", t, omega_phi=WPHI)
        ratios.append(np.trapezoid(tr.alpha_out_abs**2, t) / np.trapezoid(ref.alpha_out_abs**2, t))
    return max(ratios)


def _fit_round_trips(device, rng):
    """Relative parameter errors of the fit routines on synthetic data."""
    errs = {}
    w = device.omega_q_tilde + np.linspace(-mhz(150), mhz(150), 801)
    t = sp.two_level_transmission(w, device.omega_q_tilde, device.Gamma, device.gamma_phi)
    noisy = t + 0.01 * (rng.normal(size=w.size) + 1j * rng.normal(size=w.size))
    f = sp.fit_two_level(sp.Spectrum(w, noisy))
    errs["two_level (2%)"] = (max(abs(f.omega_q / device.omega_q_tilde - 1), abs(f.Gamma / device.Gamma - 1),
                                  abs(f.gamma_phi / device.gamma_phi - 1)), 0.02)
    w = sp.default_grid(ghz(6.26), mhz(50), 801)
    worst = 0.0
    for wq, Om in ((ghz(6.2605), mhz(18)), (ghz(6.275), mhz(6))):
        delta, D2 = sp.lambda_detunings(w, wq, device.omega_r_tilde, WPHI)
        t = sp.analytic_transmission(delta, D2, device.Gamma, device.gamma, device.kappa, Om)
        f = sp.fit_eit(sp.Spectrum(w, t), device.Gamma, device.gamma, device.kappa, device.omega_r_tilde, WPHI)
        worst = max(worst, abs(f.omega_q_motional / wq - 1), abs(f.Omega_phi / Om - 1))
    errs["eit (1e-8)"] = (worst, 1e-8)
    C0, C1 = mhz(7500.0), mhz(332.0)
    fits = []
    for x in (0.015, 0.03, 0.04, 0.054):
        dev = device.with_(C0=C0, C1=C1)
        drive = DriveConfig(mhz(1.0), 0.0, WPHI, delta_phi=x)
        spec = dyn.HamiltonianSpec("effective", dev, drive)
        s = sp.sweep_spectrum(w, spec)
        fits.append((x, sp.fit_eit(s, dev.Gamma, dev.gamma, dev.kappa, dev.omega_r_tilde, WPHI)))
    cal = sp.calibrate_shift_constants(fits, device.omega_q_tilde)
    errs["shift constants (3%)"] = (max(abs(cal.C0 / C0 - 1), abs(cal.C1 / C1 - 1)), 0.03)
    return errs


def test_property_suite(device, rng, verdict):
    parts, ok = [], True
    try:
        n = _density_along_trajectories(device)
        parts.append(f"{n} states valid")
    except Exception as exc:  # report, then fail below
        parts.append(f"density check raised {exc}")
        ok = False
    fock = _fock_doubling(device)
    ok &= fock < 1e-6
    parts.append(f"Fock 7->14 {fock:.1e} (< 1e-6)")
    dist = _steady_vs_long_time(device)
    ok &= dist < 1e-6
    parts.append(f"steady vs long-time {dist:.1e} (< 1e-6)")
    ratio = _passivity(device)
    ok &= ratio <= 1.0
    parts.append(f"max out/in energy {ratio:.4f} (<= 1)")
    for name, (err, tol) in _fit_round_trips(device, rng).items():
        ok &= err <= tol
        parts.append(f"{name} {err:.1e}")
    verdict("10 property suite", bool(ok), ", ".join(parts))
