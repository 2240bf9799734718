import numpy as np
import pytest

from crwqed.markov import (MarkovRates, PositivityError, compute_rates,
                           dark_state, evolve_magic, evolve_single_ga,
                           export_liouvillian, liouvillian_magic,
                           liouvillian_single, rabi_scan, reduction_holds,
                           rho_atom_excited, rho_two_atoms,
                           single_ga_analytic, steady_state, N_SIGMA, N_TAU,
                           SIGMA_M, TAU_M)
from crwqed.model import Drive, SmallAtom, SystemParams

P_MAGIC_42 = SystemParams(N=4, g=0.1, N_c=11, small_atom=SmallAtom(g_s=0.1, M=2))
P_MAGIC_61 = SystemParams(N=6, g=0.1, N_c=13, small_atom=SmallAtom(g_s=0.1, M=1))


def _grid(t_max, step=0.05):
    n = int(round(t_max / step))
    return np.linspace(0.0, n * step, n + 1)


def test_rates_closed_forms():
    r4 = compute_rates(SystemParams(N=4, g=0.1))
    assert r4.A == 2.0 * 0.1 ** 2 / 1.0
    r6 = compute_rates(SystemParams(N=6, g=0.1))
    assert r6.A == 0.0
    r = compute_rates(P_MAGIC_61)
    assert r.gamma_I == 0.0
    assert r.g_I == 0.1 * 0.1 / 1.0
    assert r.gamma_s == 0.1 ** 2 / 2.0
    r42 = compute_rates(P_MAGIC_42)
    assert r42.gamma_I == -0.1 * 0.1 / 1.0  # Re B is negative for N=4, M=2
    assert r42.g_I == 0.0


def test_rates_reject_nonresonant():
    with pytest.raises(ValueError):
        compute_rates(SystemParams(N=4, Omega=0.2, omega_c=0.0))


def test_rates_cauchy_schwarz_guard():
    r = compute_rates(P_MAGIC_42)
    assert abs(r.gamma_I) <= np.sqrt(r.gamma_g * r.gamma_s) + 1e-12
    with pytest.raises(ValueError, match="Cauchy-Schwarz"):
        MarkovRates(A=0.02 + 0j, A1=0.02 + 0j, A2=0.005, B=0.05 + 0j)


def test_single_ga_integrator_matches_analytic():
    p = SystemParams(N=4, g=0.1)
    rho0 = np.array([[0.2, 0.3 - 0.1j], [0.3 + 0.1j, 0.8]], dtype=complex)
    t = _grid(40.0)
    num = evolve_single_ga(p, rho0, t)
    ana = single_ga_analytic(p, rho0, t)
    assert np.abs(num["P_e"] - ana["P_e"]).max() <= 1e-10
    assert np.abs(num["coherence"] - ana["coherence"]).max() <= 1e-10
    assert np.abs(num["trace"] - 1.0).max() <= 1e-8


def test_single_ga_decay_rates():
    t = _grid(50.0)
    pe4 = evolve_single_ga(SystemParams(N=4, g=0.1), rho_atom_excited(), t)["P_e"]
    np.testing.assert_allclose(pe4, np.exp(-0.04 * t), atol=1e-10)
    pe6 = evolve_single_ga(SystemParams(N=6, g=0.1), rho_atom_excited(), t)["P_e"]
    np.testing.assert_allclose(pe6, 1.0, atol=1e-12)


def test_purely_imaginary_rate_only_rotates():
    p = SystemParams(N=4, g=0.1)
    rates = MarkovRates(A=0.05j)
    rho0 = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    ts = evolve_single_ga(p, rho0, _grid(20.0), rates=rates)
    np.testing.assert_allclose(ts["P_e"], 0.5, atol=1e-12)
    assert np.abs(np.abs(ts["coherence"]) - 0.5).max() <= 1e-10
    phases = np.unwrap(np.angle(ts["coherence"]))
    np.testing.assert_allclose(np.diff(phases), -0.05 * (ts.times[1] - ts.times[0]),
                               atol=1e-9)


def test_pure_exchange_rabi_frequency():
    # eta = 0, g_I != 0, all dissipation off: full exchange at frequency 2 g_I
    g_i = 0.01
    rates = MarkovRates(A=0j, A1=0j, A2=0.0, B=1j * g_i)
    t = _grid(2.0 * np.pi / (2.0 * g_i), 1.0)
    ts = evolve_magic(P_MAGIC_61, rho_two_atoms("giant"), t, rates=rates)
    np.testing.assert_allclose(ts["P_e"], np.cos(g_i * t) ** 2, atol=1e-9)
    np.testing.assert_allclose(ts["P_s"], np.sin(g_i * t) ** 2, atol=1e-9)


def test_magic_perfect_cavity_damped_only_by_small_atom():
    t = _grid(200.0)
    ts = evolve_magic(P_MAGIC_61, rho_two_atoms("giant"), t)
    total = ts["P_e"] + ts["P_s"]
    assert np.all(np.diff(total) <= 1e-12)
    gamma_s = compute_rates(P_MAGIC_61).gamma_s
    assert np.all(total >= np.exp(-2.0 * gamma_s * t) - 1e-9)
    # Rabi exchange actually happens
    assert ts["P_s"].max() > 0.5


def test_magic_dark_state_plateau():
    t = _grid(600.0, 0.5)
    ts = evolve_magic(P_MAGIC_42, rho_two_atoms("small"), t)
    assert ts["P_s"][-1] == pytest.approx(0.64, abs=1e-6)
    # the dark/bright decomposition is exactly solvable here: the bright
    # component decays at Gamma = gamma_g + gamma_s
    r = compute_rates(P_MAGIC_42)
    gamma = r.gamma_g + r.gamma_s
    analytic = (r.gamma_g / gamma + (r.gamma_s / gamma) * np.exp(-gamma * t)) ** 2
    np.testing.assert_allclose(ts["P_s"], analytic, atol=1e-9)


def test_k_form_reduction_matches_literal():
    t = _grid(200.0, 0.2)
    lit = evolve_magic(P_MAGIC_42, rho_two_atoms("small"), t)
    kf = evolve_magic(P_MAGIC_42, rho_two_atoms("small"), t, k_form=True)
    assert np.abs(lit["P_s"] - kf["P_s"]).max() <= 1e-8
    assert np.abs(lit["P_e"] - kf["P_e"]).max() <= 1e-8


def test_k_form_rejected_when_reduction_fails():
    assert not reduction_holds(compute_rates(P_MAGIC_61))
    with pytest.raises(ValueError):
        liouvillian_magic(P_MAGIC_61, k_form=True)


def test_trace_and_positivity_guards():
    t = _grid(100.0, 0.2)
    for p, rho0 in [(P_MAGIC_42, rho_two_atoms("small")),
                    (P_MAGIC_61, rho_two_atoms("giant"))]:
        ts = evolve_magic(p, rho0, t)
        assert np.abs(ts["trace"] - 1.0).max() <= 1e-8
    with pytest.raises(ValueError):
        evolve_magic(P_MAGIC_42, np.eye(4, dtype=complex), t)  # trace 4


def test_steady_state_nullspace_vs_long_time():
    from dataclasses import replace

    p = replace(P_MAGIC_61, drive=Drive(eta=1e-3, Delta=0.004))
    L = liouvillian_magic(p)
    rho_ss = steady_state(L)
    from scipy.linalg import expm

    rho = rho_two_atoms("ground").reshape(-1)
    prop = expm(L * 50000.0)
    for _ in range(8):
        rho = prop @ rho
    rho = rho.reshape(4, 4)
    assert np.abs(rho - rho_ss).max() <= 1e-8
    assert np.trace(rho_ss).real == pytest.approx(1.0, abs=1e-12)


def test_rabi_scan_peak_positions():
    from dataclasses import replace

    p = replace(P_MAGIC_61, drive=Drive(eta=1e-3, Delta=0.0))
    deltas = np.linspace(-0.03, 0.03, 121)
    d, pg, ps = rabi_scan(p, deltas)
    g_i = compute_rates(p).g_I
    from scipy.signal import find_peaks

    peaks, _ = find_peaks(pg, prominence=0.1 * np.ptp(pg))
    assert len(peaks) == 2
    np.testing.assert_allclose(np.sort(d[peaks]), [-g_i, g_i], atol=d[1] - d[0])


def test_rabi_scan_requires_drive():
    with pytest.raises(ValueError):
        rabi_scan(P_MAGIC_61, np.linspace(-0.01, 0.01, 5))


def test_dark_state_properties():
    state, plateau = dark_state(P_MAGIC_42)
    rates = compute_rates(P_MAGIC_42)
    K = np.sqrt(rates.gamma_g) * SIGMA_M + np.sqrt(rates.gamma_s) * TAU_M
    assert np.linalg.norm(K @ state) <= 1e-12
    assert plateau == pytest.approx(0.64, abs=1e-12)
    # symmetric rates: gamma_g = gamma_s requires g_s = 2 g, plateau 1/4
    p_sym = SystemParams(N=4, g=0.1, N_c=11, small_atom=SmallAtom(g_s=0.2, M=2))
    _, plateau_sym = dark_state(p_sym)
    assert plateau_sym == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(ValueError):
        dark_state(P_MAGIC_61)


def test_liouvillian_export(tmp_path):
    L = liouvillian_single(SystemParams(N=4, g=0.1))
    path = tmp_path / "liouvillian.csv"
    export_liouvillian(L, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 1 + L.shape[0]


def test_positivity_monitor_fires_on_bogus_rates():
    # negative decay rate: unphysical, density matrix leaves the simplex
    rates = MarkovRates(A=-0.02 + 0j)
    with pytest.raises((PositivityError, RuntimeError)):
        evolve_single_ga(SystemParams(N=4, g=0.1), rho_atom_excited(),
                         _grid(400.0, 2.0), rates=rates)
