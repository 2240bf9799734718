"""Bound states of the giant-atom--waveguide system.

Three exotic states exist in the resonant two-leg configuration: a pair of
bound states outside the continuum (BOC, |E| > 2 xi) and, when the leg
separation satisfies N mod 4 == 2, a bound state in the continuum (BIC)
pinned at the atomic frequency with the photon confined between the legs.

BOC energies solve a transcendental equation whose right-hand side is
evaluated both in closed form (lattice Green's function) and by adaptive
quadrature; profiles come from the truncated-lattice eigensolver and, for
the BIC, independently from a principal-value momentum integral.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .model import SystemParams, build_hamiltonian
from .timeseries import TimeSeries, write_csv

KIND_BIC = "BIC"
KIND_BOC_UPPER = "BOC_upper"
KIND_BOC_LOWER = "BOC_lower"

#: maximum allowed photon weight outside the leg interval for a BIC candidate
BIC_SUPPORT_TOL = 1e-6


@dataclass
class BoundState:
    """A normalized bound eigenstate on the truncated lattice.

    ``profile[i]`` is the photon amplitude at array site i; ``offset`` maps
    physical site j to array index j + offset.
    """

    energy: float
    c_atom_g: complex
    profile: np.ndarray
    offset: int
    kind: str
    c_atom_s: complex | None = None

    def amplitude_at(self, j: int) -> complex:
        return self.profile[self.offset + j]

    def norm_sq(self) -> float:
        total = abs(self.c_atom_g) ** 2 + float(np.sum(np.abs(self.profile) ** 2))
        if self.c_atom_s is not None:
            total += abs(self.c_atom_s) ** 2
        return total

    def to_vector(self, params: SystemParams) -> np.ndarray:
        vec = np.zeros(params.dim, dtype=complex)
        vec[: params.N_c] = self.profile
        vec[params.atom_g_index] = self.c_atom_g
        if params.small_atom is not None:
            vec[params.atom_s_index] = 0.0 if self.c_atom_s is None else self.c_atom_s
        return vec

    def residual(self, params: SystemParams) -> float:
        """|| H|E> - E|E> || on the truncated lattice."""
        H = build_hamiltonian(params, sparse=True)
        vec = self.to_vector(params)
        return float(np.linalg.norm(H @ vec - self.energy * vec))

    def aligned(self) -> "BoundState":
        """Rotate the global phase so the site-1 amplitude is real positive.

        Falls back to the first non-negligible profile entry when site 1
        carries no weight.
        """
        ref = self.profile[self.offset + 1]
        if abs(ref) < 1e-12:
            nz = np.flatnonzero(np.abs(self.profile) > 1e-12)
            ref = self.profile[nz[0]] if len(nz) else self.c_atom_g
        phase = ref / abs(ref)
        return BoundState(
            energy=self.energy,
            c_atom_g=self.c_atom_g / phase,
            profile=self.profile / phase,
            offset=self.offset,
            kind=self.kind,
            c_atom_s=None if self.c_atom_s is None else self.c_atom_s / phase,
        )


@dataclass
class OverlapSet:
    """Overlaps of an initial state with the three bound states."""

    c_U: complex
    c_L: complex
    c_I: complex
    delta: float
    continuum_weight: float

    @property
    def square_asymmetry(self) -> float:
        """|c_U^2 - c_L^2|; zero when the real-overlap reduction is exact."""
        return abs(self.c_U ** 2 - self.c_L ** 2)


# --- transcendental bound-state equation -------------------------------------

def _green_integral(E: float, n: int, xi: float) -> float:
    """(1/2pi) int e^{ikn} / (E + 2 xi cos k) dk for |E| > 2 xi, closed form."""
    s = 1.0 if E > 0 else -1.0
    # factored form avoids cancellation when |E| sits just outside the band
    root = np.sqrt((abs(E) - 2.0 * xi) * (abs(E) + 2.0 * xi))
    beta = (abs(E) - root) / (2.0 * xi)
    return s * (-s * beta) ** abs(n) / root


def transcendental_rhs(params: SystemParams, E_rel: float, method: str = "closed") -> float:
    """RHS of the bound-state equation at energy E_rel (relative to omega_c).

    ``closed`` uses the lattice Green's function; ``quadrature`` integrates
    (g^2/pi) (1 + cos kN)/(E + 2 xi cos k) adaptively.  Valid for
    |E_rel| > 2 xi.
    """
    g, N, xi = params.g, params.N, params.xi
    if abs(E_rel) <= 2.0 * xi:
        raise ValueError("RHS only defined outside the band |E| > 2 xi")
    if method == "closed":
        return 2.0 * g * g * (_green_integral(E_rel, 0, xi) + _green_integral(E_rel, N, xi))
    if method == "quadrature":
        # half-angle forms keep the integrand accurate when E sits just
        # outside the band: E + 2 xi cos k = (E - 2 xi) + 4 xi cos^2(k/2)
        if E_rel > 0:
            def f(k):
                return 2.0 * np.cos(0.5 * k * N) ** 2 / (
                    (E_rel - 2.0 * xi) + 4.0 * xi * np.cos(0.5 * k) ** 2)
        else:
            def f(k):
                return -2.0 * np.cos(0.5 * k * N) ** 2 / (
                    (-E_rel - 2.0 * xi) + 4.0 * xi * np.sin(0.5 * k) ** 2)
        with warnings.catch_warnings():
            # roundoff warnings near the band edge; accuracy is checked
            # against the closed form by the callers instead
            warnings.simplefilter("ignore")
            val, _ = quad(f, -np.pi, np.pi, limit=400, epsabs=1e-13, epsrel=1e-13)
        return g * g * val / np.pi
    raise ValueError(f"unknown method {method!r}")


def boc_energies(params: SystemParams) -> tuple[float, float]:
    """The two bound-state energies outside the continuum (E_upper, E_lower).

    Bracketed root finding on f(E) = E - RHS(E); the closed-form RHS is
    cross-checked against adaptive quadrature at the roots to 1e-10.
    Requires the resonant case Omega == omega_c and g > 0.
    """
    if not params.is_resonant:
        raise ValueError("bound-state equation derived for the resonant case Omega == omega_c")
    if params.g <= 0:
        raise ValueError("g must be positive for bound states to split off the band")
    xi = params.xi
    lo = 2.0 * xi * (1.0 + 1e-12)
    hi = 2.0 * xi + 10.0 * params.g ** 2 / xi + 4.0 * xi

    def f(E):
        return E - transcendental_rhs(params, E, "closed")

    if f(lo) >= 0 or f(hi) <= 0:
        raise ValueError(f"bracketing failed on [{lo}, {hi}] (odd N at weak coupling?)")
    e_up = brentq(f, lo, hi, xtol=1e-13 * xi, rtol=8.9e-16)
    if f(-hi) >= 0 or f(-lo) <= 0:
        raise ValueError(f"bracketing failed on [{-hi}, {-lo}]")
    e_lo = brentq(f, -hi, -lo, xtol=1e-13 * xi, rtol=8.9e-16)
    for e in (e_up, e_lo):
        closed = transcendental_rhs(params, e, "closed")
        quadr = transcendental_rhs(params, e, "quadrature")
        if abs(closed - quadr) > 1e-10:
            raise RuntimeError(f"closed form vs quadrature disagree at E={e}: {closed - quadr}")
    return params.omega_c + e_up, params.omega_c + e_lo


# --- existence predicates -----------------------------------------------------

def bic_exists_single(params: SystemParams) -> bool:
    """BIC existence for the resonant two-leg giant atom: N mod 4 == 2."""
    if not params.is_resonant:
        raise ValueError("predicate valid only in the resonant case")
    return params.N % 4 == 2


def bic_exists_multi(K: float, positions) -> bool:
    """General multi-leg predicate: sum_j exp(i K n_j) == 0 (to 1e-12)."""
    return bool(abs(np.sum(np.exp(1j * K * np.asarray(positions, float)))) <= 1e-12)


def magic_bic_condition(N: int, M: int) -> bool:
    """BIC condition for the resonant magic-cavity setup (K = pi/2).

    Requires K*M and K*(N-M) to be integer multiples of pi with the two
    integers of equal parity.
    """
    if M % 2 or (N - M) % 2:
        return False
    return (M // 2 - (N - M) // 2) % 2 == 0


# --- truncated-lattice eigensolver --------------------------------------------

@lru_cache(maxsize=6)
def _spectrum(params: SystemParams):
    H = build_hamiltonian(params)
    w, v = np.linalg.eigh(H)
    return w, v


def lattice_spectrum(params: SystemParams):
    """Eigenvalues and eigenvectors of the truncated-lattice Hamiltonian."""
    return _spectrum(params)


def _photon_weight_outside(params: SystemParams, vec: np.ndarray) -> float:
    off = params.offset
    return float(np.sum(np.abs(vec[:off]) ** 2)
                 + np.sum(np.abs(vec[off + params.N + 1: params.N_c]) ** 2))


def _state_from_vector(params: SystemParams, energy: float, vec: np.ndarray,
                       kind: str) -> BoundState:
    c_s = vec[params.atom_s_index] if params.small_atom is not None else None
    return BoundState(energy=float(energy), c_atom_g=vec[params.atom_g_index],
                      profile=np.array(vec[: params.N_c]), offset=params.offset,
                      kind=kind, c_atom_s=c_s)


def boc_states(params: SystemParams) -> tuple[BoundState, BoundState]:
    """Eigensolver bound states outside the band, tagged upper/lower."""
    if params.g <= 0:
        raise ValueError("g must be positive")
    w, v = _spectrum(params)
    upper = _state_from_vector(params, w[-1], v[:, -1], KIND_BOC_UPPER)
    lower = _state_from_vector(params, w[0], v[:, 0], KIND_BOC_LOWER)
    return upper, lower


def _bic_from_spectrum(params: SystemParams) -> BoundState:
    w, v = _spectrum(params)
    order = np.argsort(np.abs(w - params.Omega))
    for ix in order[:50]:
        if _photon_weight_outside(params, v[:, ix]) <= BIC_SUPPORT_TOL:
            return _state_from_vector(params, w[ix], v[:, ix], KIND_BIC)
    raise RuntimeError("no eigenvector near E = Omega with photon support confined to [0, N]")


# --- BIC profile: principal-value integral + eigensolver cross-check ----------

def _bic_pv_amplitudes(params: SystemParams, j_values, npts: int) -> np.ndarray:
    """Midpoint-rule evaluation of the momentum-space profile integral.

    b_j / c = (g / 4 pi xi) PV int dk (1 + e^{ikN}) e^{-ikj} / cos k.

    The midpoint grid (a multiple of four points) pairs nodes symmetrically
    about the integrand's poles at k = +-pi/2 and never touches them; for
    N mod 4 == 2 the singularities are removable and the integrand is a
    trigonometric polynomial, so the rule converges immediately.
    """
    h = 2.0 * np.pi / npts
    k = -np.pi + (np.arange(npts) + 0.5) * h
    base = (1.0 + np.exp(1j * k * params.N)) / np.cos(k)
    pref = params.g / (4.0 * np.pi * params.xi)
    out = np.empty(len(j_values), dtype=complex)
    for i, j in enumerate(j_values):
        out[i] = pref * h * np.sum(base * np.exp(-1j * k * j))
    return out


def bic_profile(params: SystemParams, validate: bool = True) -> BoundState:
    """The bound state in the continuum, built from the profile integral.

    The principal-value construction and the truncated-lattice eigenvector
    are compared after normalisation and phase alignment; disagreement
    beyond 1e-6 raises.
    """
    if not bic_exists_single(params):
        raise ValueError(f"no BIC for N={params.N} (requires N mod 4 == 2)")
    window = np.arange(-4, params.N + 5)
    npts = 16
    amps = _bic_pv_amplitudes(params, window, npts)
    while npts < 4096:
        finer = _bic_pv_amplitudes(params, window, 2 * npts)
        if np.max(np.abs(finer - amps)) <= 1e-8:
            amps = finer
            break
        amps, npts = finer, 2 * npts

    profile = np.zeros(params.N_c, dtype=complex)
    off = params.offset
    for j, b in zip(window, amps):
        idx = off + j
        if 0 <= idx < params.N_c:
            profile[idx] = b
    norm = np.sqrt(1.0 + np.sum(np.abs(profile) ** 2))
    state = BoundState(energy=params.Omega, c_atom_g=1.0 / norm, profile=profile / norm,
                       offset=off, kind=KIND_BIC,
                       c_atom_s=0.0 if params.small_atom is not None else None)
    if validate:
        other = _bic_from_spectrum(params).aligned()
        mine = state.aligned()
        dev = max(
            np.max(np.abs(mine.profile - other.profile)),
            abs(mine.c_atom_g - other.c_atom_g),
        )
        if dev > 1e-6:
            raise RuntimeError(
                f"principal-value and eigensolver BIC constructions disagree by {dev:.2e}"
            )
    return state


def bic_magic_cavity(params: SystemParams) -> BoundState | None:
    """BIC of the magic-cavity configuration, or None if the condition fails."""
    if params.small_atom is None:
        raise ValueError("magic-cavity BIC requires the small atom")
    if not params.is_resonant:
        raise ValueError("predicate valid only in the resonant case")
    if not magic_bic_condition(params.N, params.small_atom.M):
        return None
    return _bic_from_spectrum(params)


def bic_projection_population(state: BoundState, initial: str = "small") -> float:
    """Steady population |<psi0|E_I><E_I|tau_+|G>|^2 predicted by the BIC.

    ``initial`` selects psi0 = tau_+|G> ('small') or sigma_+|G> ('giant').
    """
    if state.c_atom_s is None:
        raise ValueError("bound state carries no small-atom amplitude")
    c0 = state.c_atom_s if initial == "small" else state.c_atom_g
    return float(abs(c0) ** 2 * abs(state.c_atom_s) ** 2)


# --- overlaps and the BIC-BOC oscillation predictor ---------------------------

def overlaps(params: SystemParams, initial_vec: np.ndarray) -> OverlapSet:
    """Overlap coefficients of an initial state with the three bound states."""
    upper, lower = boc_states(params)
    bic = _bic_from_spectrum(params)
    c_u = np.vdot(upper.to_vector(params), initial_vec)
    c_l = np.vdot(lower.to_vector(params), initial_vec)
    c_i = np.vdot(bic.to_vector(params), initial_vec)
    delta = upper.energy - bic.energy
    if params.N % 2 == 0:
        other = bic.energy - lower.energy
        if abs(delta - other) > 1e-8:
            raise RuntimeError(f"gap asymmetry {delta - other:.2e} exceeds 1e-8")
    weight = 1.0 - (abs(c_u) ** 2 + abs(c_l) ** 2 + abs(c_i) ** 2)
    return OverlapSet(c_U=complex(c_u), c_L=complex(c_l), c_I=complex(c_i),
                      delta=float(delta), continuum_weight=float(weight))


def bic_boc_oscillation(params: SystemParams, initial_vec: np.ndarray, t_grid,
                        sites=(1, 3), continuum_warn: float = 0.3) -> TimeSeries:
    """Long-time prediction of the excitation exchange between BIC and BOCs.

    Emits |alpha(t)|^2 = |c_I^2 + 2 c_U^2 cos(delta t)|^2 and the per-site
    photon populations built from the three bound-state profiles.  The
    prediction ignores the continuum; a warning is issued when the initial
    state leaks more than ``continuum_warn`` of its weight into it.
    """
    if not bic_exists_single(params):
        raise ValueError("oscillation predictor requires the BIC (N mod 4 == 2)")
    ov = overlaps(params, initial_vec)
    if ov.continuum_weight > continuum_warn:
        warnings.warn(
            f"continuum overlap {ov.continuum_weight:.3f} exceeds {continuum_warn}; "
            "the bound-state prediction is a long-time approximation",
            stacklevel=2,
        )
    upper, lower = boc_states(params)
    bic = _bic_from_spectrum(params)
    t = np.asarray(t_grid, dtype=float)
    phase = np.exp(-1j * ov.delta * t)
    alpha = ov.c_I ** 2 + 2.0 * ov.c_U ** 2 * np.cos(ov.delta * t)
    cols = {"pe_pred": np.abs(alpha) ** 2}
    for j in sites:
        amp = (phase * ov.c_U * upper.amplitude_at(j)
               + np.conj(phase) * ov.c_L * lower.amplitude_at(j)
               + ov.c_I * bic.amplitude_at(j))
        cols[f"beta2_{j}_pred"] = np.abs(amp) ** 2
    return TimeSeries(t, cols)


# --- spectra and CSV emission --------------------------------------------------

def spectrum_vs_g(params: SystemParams, g_grid) -> np.ndarray:
    """Full truncated-lattice spectrum per coupling value.

    Returns an array of shape (len(g_grid), dim) of ascending eigenvalues.
    """
    from dataclasses import replace

    out = np.empty((len(g_grid), params.dim))
    for i, g in enumerate(g_grid):
        H = build_hamiltonian(replace(params, g=float(g)))
        out[i] = np.linalg.eigvalsh(H)
    return out


def bound_states_to_csv(states, path):
    """Long-format CSV: (kind, energy, c_atom_g_re, c_atom_g_im, site, d_re, d_im)."""
    rows = []
    for st in states:
        for i, d in enumerate(st.profile):
            rows.append([st.kind, st.energy, np.real(st.c_atom_g),
                         np.imag(st.c_atom_g), float(i - st.offset), d.real, d.imag])
    write_csv(path, ["kind", "energy", "c_atom_g_re", "c_atom_g_im", "site", "d_re", "d_im"],
              rows)
