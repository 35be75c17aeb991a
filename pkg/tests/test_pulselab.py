import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from lambda_eit import dynamics as dyn
from lambda_eit import pulselab as pl
from lambda_eit.device import DriveConfig, eps_for_rabi
from lambda_eit.errors import DomainError, PeakError
from lambda_eit.units import ghz, mhz

CARRIER = ghz(6.2565)
WPHI = ghz(0.725)


def test_gaussian_probe():
    p = pl.ProbePulse(mhz(7), 300.0, 1200.0, CARRIER)
    assert pl.gaussian_probe(1200.0, p) == mhz(7)
    assert pl.gaussian_probe(900.0, p) == pytest.approx(mhz(7) / math.e, rel=1e-15)
    assert pl.gaussian_probe(1500.0, p) == pytest.approx(mhz(7) / math.e, rel=1e-15)
    energy, _ = quad(lambda t: pl.gaussian_probe(t, p) ** 2, -3000, 5000, points=[1200.0], limit=200)
    assert energy == pytest.approx(mhz(7) ** 2 * 300.0 * math.sqrt(math.pi / 2), rel=1e-10)


def test_probe_validation():
    with pytest.raises(DomainError):
        pl.ProbePulse(-1.0, 10.0, 0.0, CARRIER)
    with pytest.raises(DomainError):
        pl.ProbePulse(1.0, 0.0, 0.0, CARRIER)


def test_schedule_envelope_shapes():
    c = pl.ModulationSchedule.constant(mhz(18))
    assert np.all(c(np.linspace(-1e4, 1e4, 11)) == mhz(18))
    A, B, ramp = mhz(5), mhz(20), 40.0
    s = pl.ModulationSchedule(((-math.inf, 100.0, A), (100.0, math.inf, B)), ramp)
    assert s(100.0) == pytest.approx(0.5 * (A + B), rel=1e-15)
    t = np.linspace(60, 140, 80001)
    slope = np.max(np.gradient(s(t), t))
    assert slope == pytest.approx(math.pi * (B - A) / (2 * ramp), rel=1e-6)
    assert s(79.9) == A and s(120.1) == B


def test_schedule_gaps_and_validation():
    s = pl.ModulationSchedule(((-math.inf, 100.0, 1.0), (200.0, math.inf, 2.0)), 20.0)
    assert s.levels == [1.0, 0.0, 2.0] and s.boundaries == [100.0, 200.0]
    with pytest.raises(DomainError):
        pl.ModulationSchedule(((0.0, 100.0, 1.0), (50.0, 200.0, 1.0)))
    with pytest.raises(DomainError):
        pl.ModulationSchedule(((0.0, 100.0, -1.0),))
    with pytest.raises(DomainError):
        pl.ModulationSchedule.store_retrieve(mhz(18), 250.0, 10.0, ramp=20.0)


def test_far_detuned_qubit_passes_pulse(device):
    p = pl.ProbePulse(mhz(7), 300.0, 1200.0, CARRIER)
    t = np.arange(0.0, 2400.0, 2.0)
    far = replace(pl.operating_point(device, WPHI, CARRIER), omega_q=ghz(7.5))
    tr = pl.propagate(device, p, pl.ModulationSchedule.constant(0.0), "effective", t,
                      omega_phi=WPHI, effective=far, n_fock=3)
    ref = pl.reference_trace(p, t, device.Gamma)
    assert tr.alpha_out_abs.max() == pytest.approx(ref.alpha_out_abs.max(), rel=0.01)
    assert pl.delay_time(tr, ref).delta_t == pytest.approx(0.0, abs=1.0)


def test_lab_and_effective_pulses_agree(device):
    """Slow-light pulse through the modulated lab model and its effective map."""
    p = pl.ProbePulse(mhz(7), 300.0, 1200.0, CARRIER)
    t = np.arange(0.0, 2401.0, 1.0)
    level = mhz(13.3)
    eps = eps_for_rabi(level, WPHI, device.g)
    lab_dev = pl.lab_device_for(device, pl.operating_point(device, WPHI, CARRIER), eps, WPHI)
    sched = pl.ModulationSchedule.constant(level)
    lab = pl.propagate(lab_dev, p, sched, "lab", t, omega_phi=WPHI, n_fock=4, tol=1e-8)
    spec = dyn.HamiltonianSpec("lab", lab_dev, DriveConfig(p.amp, CARRIER, WPHI, eps_phi=eps), n_fock=4)
    mapped = dyn.effective_from_lab(spec).resolve_effective()
    eff = pl.propagate(device, p, sched, "effective", t, omega_phi=WPHI, effective=mapped, n_fock=4, tol=1e-8)
    ref = pl.reference_trace(p, t, device.Gamma)
    a, b = pl.delay_time(lab, ref), pl.delay_time(eff, ref)
    assert abs(a.delta_t - b.delta_t) < 5.0
    assert a.peak_amplitude == pytest.approx(b.peak_amplitude, rel=0.03)


def test_delay_time_basics(device):
    p = pl.ProbePulse(mhz(7), 300.0, 1200.0, CARRIER)
    t = np.arange(0.0, 2400.0, 1.0)
    ref = pl.reference_trace(p, t, device.Gamma)
    assert pl.delay_time(ref, ref).delta_t == 0.0
    late = pl.reference_trace(replace(p, t0=1295.0), t, device.Gamma)
    a = pl.delay_time(late, ref, L=340.0, Omega_phi=mhz(13.3), Gamma=device.Gamma)
    assert a.delta_t == pytest.approx(95.0, abs=1e-6)
    assert a.group_velocity == pytest.approx(3.6, abs=0.05)
    assert a.group_velocity * a.delta_t == pytest.approx(340.0, rel=1e-9)


def test_ideal_pulse_depth(device):
    ideal = device.with_(kappa=0.0, gamma_phi=0.0)
    p = pl.ProbePulse(mhz(1), 1000.0, 4000.0, CARRIER)
    t = np.arange(0.0, 8000.0, 2.0)
    Om = mhz(20)
    tr = pl.propagate(ideal, p, pl.ModulationSchedule.constant(Om), "effective", t,
                      omega_phi=CARRIER - device.omega_r_tilde, n_fock=3)
    a = pl.delay_time(tr, pl.reference_trace(p, t, device.Gamma), Omega_phi=Om, Gamma=device.Gamma)
    assert a.effective_depth == pytest.approx(2.0, rel=0.10)


def test_mean_input_photons(device):
    p = pl.ProbePulse(mhz(7), 50.0, 200.0, CARRIER)
    assert pl.mean_input_photons(p, device.Gamma) == pytest.approx(0.08, abs=0.002)
    assert pl.mean_input_photons(replace(p, amp=0.0), device.Gamma) == 0.0
    numeric, _ = quad(lambda t: pl.input_amplitude(t, p, device.Gamma) ** 2, -1000, 1400, points=[200.0])
    assert numeric == pytest.approx(pl.mean_input_photons(p, device.Gamma), rel=1e-9)


def test_storage_efficiency_edges(device):
    p = pl.ProbePulse(mhz(7), 50.0, 200.0, CARRIER)
    t = np.arange(0.0, 1000.0, 1.0)
    ref = pl.reference_trace(p, t, device.Gamma)
    z = np.zeros_like(t)
    dark = pl.PulseTrace(t, z, z, z, z)
    assert pl.storage_efficiency(dark, ref, (500.0, 900.0)) == 0.0
    assert pl.storage_efficiency(ref, ref, (0.0, 999.0)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        pl.storage_efficiency(ref, ref, (500.2, 500.9))


def test_retrieval_window_modes():
    s = pl.ModulationSchedule.store_retrieve(mhz(18), 250.0, 100.0, ramp=20.0)
    assert pl.retrieval_window(s, 900.0) == (340.0, 900.0)
    assert pl.retrieval_window(s, 900.0, "complete") == (360.0, 900.0)
    with pytest.raises(DomainError):
        pl.retrieval_window(pl.ModulationSchedule.constant(1.0), 900.0)


def test_capture_without_input(device):
    t = np.arange(0.0, 400.0, 1.0)
    z = np.zeros_like(t)
    r = pl.capture_efficiency(pl.PulseTrace(t, z, z, z, z), 250.0, 0.0)
    assert r.eta_c == 0.0 and r.no_input


@pytest.fixture(scope="module")
def storage_runs(device):
    p = pl.ProbePulse(mhz(7), 50.0, 200.0, CARRIER)
    t = np.arange(0.0, 1200.0, 0.5)
    kw = dict(omega_phi=WPHI)
    return p, t, {
        40: pl.retrieve_shaped(device, p, 40.0, mhz(18), mhz(18), t, **kw),
        80: pl.retrieve_shaped(device, p, 80.0, mhz(18), mhz(18), t, **kw),
        "off": pl.retrieve_shaped(device, p, 300.0, 0.0, mhz(18), t, **kw),
    }


def test_trace_invariants(storage_runs):
    _, t, runs = storage_runs
    for tr in runs.values():
        assert len(tr.alpha_out_abs) == len(t)
        assert np.all((tr.n_res >= -1e-9) & (tr.n_res <= 7)) and np.all((tr.p_exc >= -1e-9) & (tr.p_exc <= 1))


def test_write_level_retrieval_is_shifted_storage(storage_runs):
    _, t, runs = storage_runs
    s = pl.ModulationSchedule.store_retrieve(mhz(18), 250.0, 40.0)
    lo, hi = pl.retrieval_window(s, 900.0)
    m = (t >= lo) & (t <= hi)
    a = runs[40].alpha_out_abs[m]
    b = np.interp(t[m] + 40.0, t, runs[80].alpha_out_abs)
    assert np.max(np.abs(a / a.max() - b / b.max())) < 0.05


def test_no_retrieval_decays_at_kappa(device, storage_runs):
    _, t, runs = storage_runs
    off = runs["off"]
    sel = (t > 300) & (t < 500)
    rate = -np.polyfit(t[sel], np.log(off.n_res[sel]), 1)[0]
    assert rate == pytest.approx(device.kappa, rel=1e-3)
    assert off.alpha_out_abs[t > 350].max() < 1e-4


def test_decay_fit():
    k = mhz(0.78)
    Ts = np.arange(25.0, 701.0, 25.0)
    f = pl.storage_decay_fit(list(zip(Ts, 0.05 * np.exp(-k * Ts))))
    assert f.rate == pytest.approx(k, rel=1e-6) and not f.underdetermined
    f2 = pl.storage_decay_fit([(100.0, 0.05), (300.0, 0.02)])
    assert f2.underdetermined and f2.residual == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        pl.storage_decay_fit([(100.0, 0.05)])


def test_peak_helpers():
    t = np.linspace(-100, 100, 2001)
    y = np.exp(-((t - 3.3) / 20) ** 2)
    tp, yp = pl.peak_time(t, y)
    assert tp == pytest.approx(3.3, abs=1e-3) and yp == pytest.approx(1.0, abs=1e-5)
    assert pl.pulse_fwhm(t, y) == pytest.approx(40 * math.sqrt(math.log(2)), rel=1e-4)
    with pytest.raises(PeakError):
        pl.peak_time(t, np.ones_like(t))
    twin = np.exp(-((t - 40) / 5) ** 2) + np.exp(-((t + 40) / 5) ** 2)
    with pytest.raises(PeakError):
        pl.peak_time(t, twin)
