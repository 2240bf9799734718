"""Markovian master equations for the giant atom and the magic-cavity model.

All rates are closed forms obtained by tracing out the resonant waveguide:
the giant atom decays at Re A with A = g^2 (1 + i^N) / xi, the small atom
at gamma_s = g_s^2/(2 xi), and the waveguide also mediates a collective
rate B = g g_s (i^M + i^{N-M})/(2 xi) whose real part is a shared
dissipation channel and whose imaginary part is a coherent exchange g_I.

Between the two atoms the Hilbert space is at most 4-dimensional, so
evolution is done with one dense matrix exponential per time step and
steady states with a null-space solve of the 16x16 Liouvillian.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .model import SystemParams
from .timeseries import TimeSeries

_I_POW = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def ipow(n: int) -> complex:
    """i**n, exact for integer n (including negative)."""
    return _I_POW[n % 4]


class PositivityError(RuntimeError):
    """Density matrix lost positivity beyond tolerance."""


@dataclass(frozen=True)
class MarkovRates:
    """Closed-form Markovian rates; all in units of xi."""

    A: complex
    A1: complex | None = None
    A2: float | None = None
    B: complex | None = None

    @property
    def gamma_g(self) -> float:
        return (self.A1 if self.A1 is not None else self.A).real

    @property
    def delta_g(self) -> float:
        return (self.A1 if self.A1 is not None else self.A).imag

    @property
    def gamma_s(self) -> float:
        if self.A2 is None:
            raise ValueError("no small atom: A2 undefined")
        return self.A2

    @property
    def gamma_I(self) -> float:
        if self.B is None:
            raise ValueError("no small atom: B undefined")
        return self.B.real

    @property
    def g_I(self) -> float:
        if self.B is None:
            raise ValueError("no small atom: B undefined")
        return self.B.imag

    def __post_init__(self):
        if self.B is not None:
            bound = np.sqrt(self.gamma_g * self.gamma_s) + 1e-12
            if abs(self.gamma_I) > bound:
                raise ValueError(
                    f"|gamma_I|={abs(self.gamma_I)} violates the Cauchy-Schwarz bound {bound}"
                )


def compute_rates(params: SystemParams) -> MarkovRates:
    """Exact closed-form rates; valid only in the resonant case."""
    if not params.is_resonant:
        raise ValueError("Markovian rates derived for the resonant case Omega == omega_c")
    g, xi, N = params.g, params.xi, params.N
    A = (g * g / xi) * (1.0 + ipow(N))
    if params.small_atom is None:
        return MarkovRates(A=A)
    g_s, M = params.small_atom.g_s, params.small_atom.M
    A2 = g_s * g_s / (2.0 * xi)
    B = (g * g_s / (2.0 * xi)) * (ipow(M) + ipow(N - M))
    return MarkovRates(A=A, A1=A, A2=A2, B=complex(B))


# --- operators ----------------------------------------------------------------

_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
_EYE2 = np.eye(2, dtype=complex)

#: two-atom space: kron(giant, small), basis |g,g>, |g,e>, |e,g>, |e,e>
SIGMA_M = np.kron(_LOWER, _EYE2)
SIGMA_P = SIGMA_M.conj().T
TAU_M = np.kron(_EYE2, _LOWER)
TAU_P = TAU_M.conj().T
N_SIGMA = SIGMA_P @ SIGMA_M
N_TAU = TAU_P @ TAU_M


def rho_atom_excited() -> np.ndarray:
    """|e><e| of the lone giant atom (2x2)."""
    rho = np.zeros((2, 2), dtype=complex)
    rho[1, 1] = 1.0
    return rho


def rho_two_atoms(which: str) -> np.ndarray:
    """Product state with one excited atom: which in {'giant', 'small', 'ground'}."""
    idx = {"ground": 0, "small": 1, "giant": 2}[which]
    rho = np.zeros((4, 4), dtype=complex)
    rho[idx, idx] = 1.0
    return rho


def _dissipator_term(L_big, gamma: float, A: np.ndarray, B: np.ndarray, eye):
    # gamma * (2 A rho B^dag - B^dag A rho - rho B^dag A), row-major vec
    BdA = B.conj().T @ A
    L_big += gamma * (2.0 * np.kron(A, B.conj()) - np.kron(BdA, eye) - np.kron(eye, BdA.T))


def liouvillian_single(params: SystemParams, rates: MarkovRates | None = None) -> np.ndarray:
    """4x4 Liouvillian of the single-giant-atom master equation."""
    if rates is None:
        rates = compute_rates(params)
    A = rates.A
    H = np.array([[0.0, 0.0], [0.0, params.Omega + A.imag]], dtype=complex)
    eye = _EYE2
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    _dissipator_term(L, A.real, _LOWER, _LOWER, eye)
    return L


def effective_hamiltonian(params: SystemParams, rates: MarkovRates) -> np.ndarray:
    """Driven two-atom Hamiltonian in the frame rotating with the drive."""
    eta, Delta = (params.drive.eta, params.drive.Delta) if params.drive else (0.0, 0.0)
    return ((Delta + rates.delta_g) * N_SIGMA + Delta * N_TAU
            + rates.g_I * (SIGMA_P @ TAU_M + TAU_P @ SIGMA_M)
            + eta * (SIGMA_P + SIGMA_M))


def liouvillian_magic(params: SystemParams, rates: MarkovRates | None = None,
                      k_form: bool = False) -> np.ndarray:
    """16x16 Liouvillian of the magic-cavity master equation.

    With ``k_form`` the dissipators collapse to the single jump operator
    K = sqrt(gamma_g) sigma_- + sqrt(gamma_s) tau_-, which is only
    equivalent when the rate matrix is rank one and the coherent exchange
    vanishes (e.g. N=4, M=2).
    """
    if params.small_atom is None:
        raise ValueError("magic-cavity Liouvillian requires the small atom")
    if rates is None:
        rates = compute_rates(params)
    H = effective_hamiltonian(params, rates)
    eye = np.eye(4, dtype=complex)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    if k_form:
        if not reduction_holds(rates):
            raise ValueError("single-jump K-form requires |gamma_I|^2 = gamma_g*gamma_s and g_I = 0")
        K = np.sqrt(rates.gamma_g) * SIGMA_M + np.sqrt(rates.gamma_s) * TAU_M
        _dissipator_term(L, 1.0, K, K, eye)
        return L
    _dissipator_term(L, rates.gamma_g, SIGMA_M, SIGMA_M, eye)
    _dissipator_term(L, rates.gamma_s, TAU_M, TAU_M, eye)
    _dissipator_term(L, rates.gamma_I, SIGMA_M, TAU_M, eye)
    _dissipator_term(L, rates.gamma_I, TAU_M, SIGMA_M, eye)
    return L


def reduction_holds(rates: MarkovRates, tol: float = 1e-12) -> bool:
    """True when the dissipators factor through a single jump operator."""
    return (abs(rates.gamma_I ** 2 - rates.gamma_g * rates.gamma_s) <= tol
            and abs(rates.g_I) <= tol)


def export_liouvillian(L: np.ndarray, path):
    """Dense-matrix text dump: 'dim' header line, then 're,im' cell pairs per row."""
    from .timeseries import write_csv

    d = L.shape[0]
    header = ["dim"] + [f"c{i}" for i in range(2 * d - 1)]
    rows = []
    for r in range(d):
        row = [float(d)] if r == 0 else [0.0]
        for c in range(d):
            row += [L[r, c].real, L[r, c].imag]
        rows.append(row[: 2 * d])
    write_csv(path, header[: 2 * d], rows)


# --- evolution -----------------------------------------------------------------

def _evolve_liouvillian(L: np.ndarray, rho0: np.ndarray, t: np.ndarray,
                        observables: dict) -> TimeSeries:
    d = rho0.shape[0]
    _validate_density_matrix(rho0)
    prop = None
    if len(t) > 1:
        steps = np.diff(t)
        if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-12 * steps[0]:
            raise ValueError("t_grid must be uniform and ascending")
        prop = expm(L * steps[0])
    vec = rho0.reshape(-1).astype(complex)
    cols = {name: np.empty(len(t)) for name in observables}
    cols["trace"] = np.empty(len(t))
    min_eig = np.inf
    for i in range(len(t)):
        rho = vec.reshape(d, d)
        for name, op in observables.items():
            cols[name][i] = np.real(np.trace(op @ rho))
        tr = np.trace(rho).real
        cols["trace"][i] = tr
        if abs(tr - 1.0) > 1e-8:
            raise RuntimeError(f"trace drift {tr - 1.0:.2e} exceeds 1e-8 at t={t[i]}")
        min_eig = min(min_eig, float(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)[0]))
        if i + 1 < len(t):
            vec = prop @ vec
    if min_eig < -1e-8:
        raise PositivityError(f"rho eigenvalue {min_eig:.2e} below -1e-8")
    return TimeSeries(t, cols)


def _validate_density_matrix(rho: np.ndarray, tol: float = 1e-10):
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("rho0 is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise ValueError("rho0 trace must be 1")
    if np.linalg.eigvalsh(rho)[0] < -1e-8:
        raise ValueError("rho0 has a negative eigenvalue")


def evolve_single_ga(params: SystemParams, rho0: np.ndarray, t_grid,
                     rates: MarkovRates | None = None) -> TimeSeries:
    """Integrate the single-giant-atom master equation.

    Columns: P_e, coherence (complex rho_eg), trace.
    """
    t = np.asarray(t_grid, dtype=float)
    L = liouvillian_single(params, rates)
    n_e = np.diag([0.0, 1.0]).astype(complex)
    ts = _evolve_liouvillian(L, np.asarray(rho0, complex), t, {"P_e": n_e})
    # coherence is not a real expectation value; recompute directly
    rho = np.asarray(rho0, complex).reshape(-1)
    coh = np.empty(len(t), dtype=complex)
    prop = expm(L * (t[1] - t[0])) if len(t) > 1 else None
    for i in range(len(t)):
        coh[i] = rho.reshape(2, 2)[1, 0]
        if i + 1 < len(t):
            rho = prop @ rho
    ts.columns["coherence"] = coh
    return ts


def single_ga_analytic(params: SystemParams, rho0: np.ndarray, t_grid,
                       rates: MarkovRates | None = None) -> TimeSeries:
    """Closed-form solution of the single-giant-atom master equation."""
    if rates is None:
        rates = compute_rates(params)
    A = rates.A
    t = np.asarray(t_grid, dtype=float)
    rho0 = np.asarray(rho0, complex)
    pe = rho0[1, 1].real * np.exp(-2.0 * A.real * t)
    coh = rho0[1, 0] * np.exp(-(1j * params.Omega + 1j * A.imag + A.real) * t)
    return TimeSeries(t, {"P_e": pe, "coherence": coh, "trace": np.ones_like(t)})


def evolve_magic(params: SystemParams, rho0: np.ndarray, t_grid,
                 rates: MarkovRates | None = None, k_form: bool = False) -> TimeSeries:
    """Integrate the magic-cavity master equation on the two-atom space.

    Columns: P_e (giant), P_s (small), cross coherence, trace.
    """
    t = np.asarray(t_grid, dtype=float)
    L = liouvillian_magic(params, rates=rates, k_form=k_form)
    ts = _evolve_liouvillian(L, np.asarray(rho0, complex), t,
                             {"P_e": N_SIGMA, "P_s": N_TAU})
    rho = np.asarray(rho0, complex).reshape(-1)
    coh = np.empty(len(t), dtype=complex)
    prop = expm(L * (t[1] - t[0])) if len(t) > 1 else None
    cross = SIGMA_P @ TAU_M
    for i in range(len(t)):
        coh[i] = np.trace(cross @ rho.reshape(4, 4))
        if i + 1 < len(t):
            rho = prop @ rho
    ts.columns["coherence_gs"] = coh
    return ts


# --- steady states --------------------------------------------------------------

def steady_state(L: np.ndarray, degeneracy_warn: float = 1e-10) -> np.ndarray:
    """Trace-one null vector of a Liouvillian; warns when nearly degenerate."""
    w, v = np.linalg.eig(L)
    order = np.argsort(np.abs(w))
    if len(order) > 1 and abs(w[order[1]]) < degeneracy_warn:
        warnings.warn("steady state is nearly degenerate; result may be non-unique",
                      stacklevel=2)
    d = int(round(np.sqrt(L.shape[0])))
    rho = v[:, order[0]].reshape(d, d)
    rho = (rho + rho.conj().T) / 2.0
    return rho / np.trace(rho).real


def rabi_scan(params: SystemParams, Delta_grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Steady-state atomic excitations versus drive detuning.

    Returns (Delta_grid, <sigma+ sigma->, <tau+ tau->).
    """
    if params.drive is None or params.drive.eta <= 0:
        raise ValueError("rabi_scan requires a drive with eta > 0")
    from dataclasses import replace

    from .model import Drive

    deltas = np.asarray(Delta_grid, dtype=float)
    pe_g = np.empty(len(deltas))
    pe_s = np.empty(len(deltas))
    for i, D in enumerate(deltas):
        p = replace(params, drive=Drive(eta=params.drive.eta, Delta=float(D)))
        rho = steady_state(liouvillian_magic(p))
        pe_g[i] = np.real(np.trace(N_SIGMA @ rho))
        pe_s[i] = np.real(np.trace(N_TAU @ rho))
    return deltas, pe_g, pe_s


def dark_state(params: SystemParams) -> tuple[np.ndarray, float]:
    """Dark state of the collective jump operator and its steady population.

    Valid where the master equation reduces to the single jump
    K = sqrt(gamma_g) sigma_- + sqrt(gamma_s) tau_-; returns the state
    vector on the two-atom space and the plateau gamma_g^2/(gamma_g+gamma_s)^2
    reached by <tau+ tau-> for the initially excited small atom.
    """
    rates = compute_rates(params)
    if params.small_atom is None or not reduction_holds(rates):
        raise ValueError("single-jump reduction does not hold for this configuration")
    gg, gs = rates.gamma_g, rates.gamma_s
    ground = np.zeros(4, dtype=complex)
    ground[0] = 1.0
    state = (np.sqrt(gs) * (SIGMA_P @ ground) - np.sqrt(gg) * (TAU_P @ ground))
    state /= np.sqrt(gg + gs)
    plateau = gg ** 2 / (gg + gs) ** 2
    return state, float(plateau)
