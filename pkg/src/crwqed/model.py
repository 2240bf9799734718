"""System parameters and single-excitation Hamiltonians.

A two-level giant atom couples to a coupled-resonator waveguide (CRW) at
two sites, labelled 0 and N in physical coordinates.  Optionally a small
two-level atom sits at site M between the legs, and a classical drive acts
on the giant atom.  Everything lives in the single-excitation subspace, so
the Hamiltonian is an (N_c + n_atoms) dimensional Hermitian matrix over the
basis [site 0, ..., site N_c-1, giant atom, small atom].

The hopping strength ``xi`` is the unit of energy; times are in 1/xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import csr_matrix, lil_matrix

#: Extra sites kept between the light cone and the lattice edge.
BUFFER_SITES = 40


@dataclass(frozen=True)
class SmallAtom:
    """Auxiliary small atom coupled to resonator M (0 < M < N)."""

    g_s: float
    M: int


@dataclass(frozen=True)
class Drive:
    """Classical drive on the giant atom (rotating frame)."""

    eta: float
    Delta: float


@dataclass(frozen=True)
class SystemParams:
    """All physical parameters, in units of the hopping strength xi.

    Parameters
    ----------
    omega_c : float
        Bare resonator frequency (band centre).
    Omega : float
        Atomic transition frequency (both atoms share it).
    xi : float
        Nearest-neighbour hopping; the energy unit.  Must be positive.
    g : float
        Giant-atom coupling at each leg.
    N : int
        Leg separation; the legs sit at physical sites 0 and N.
    small_atom : SmallAtom, optional
        Small atom block (coupling g_s, site M).
    drive : Drive, optional
        Drive block (amplitude eta, detuning Delta).
    N_c : int
        Number of lattice sites kept in the truncated waveguide.
    origin_offset : int, optional
        Array index of physical site 0.  Defaults to centring the legs.
    """

    omega_c: float = 0.0
    Omega: float = 0.0
    xi: float = 1.0
    g: float = 0.1
    N: int = 6
    small_atom: SmallAtom | None = None
    drive: Drive | None = None
    N_c: int = 401
    origin_offset: int | None = None

    def __post_init__(self):
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if self.N < 1:
            raise ValueError("N must be a positive integer")
        if self.N_c <= self.N:
            raise ValueError(f"N_c={self.N_c} too small to contain both legs (N={self.N})")
        if self.small_atom is not None:
            if not 0 < self.small_atom.M < self.N:
                raise ValueError("small-atom site M must satisfy 0 < M < N")
            if self.small_atom.g_s < 0:
                raise ValueError("g_s must be non-negative")
        off = self.offset
        if off < 0 or off + self.N >= self.N_c:
            raise ValueError(
                f"origin_offset={off} does not place both legs inside the lattice"
            )

    @property
    def offset(self) -> int:
        """Array index of physical site 0."""
        if self.origin_offset is not None:
            return self.origin_offset
        return (self.N_c - self.N) // 2

    @property
    def n_atoms(self) -> int:
        return 2 if self.small_atom is not None else 1

    @property
    def dim(self) -> int:
        """Dimension of the single-excitation Hilbert space."""
        return self.N_c + self.n_atoms

    @property
    def atom_g_index(self) -> int:
        return self.N_c

    @property
    def atom_s_index(self) -> int:
        if self.small_atom is None:
            raise ValueError("no small atom in this configuration")
        return self.N_c + 1

    def site_index(self, j) -> int:
        """Array index of physical site j."""
        return self.offset + j

    @property
    def is_resonant(self) -> bool:
        return self.Omega == self.omega_c

    def sized_for(self, t_max: float) -> "SystemParams":
        """Return a copy with N_c large enough for an evolution up to t_max.

        The maximal group velocity on the chain is 2*xi sites per unit time;
        the lattice is sized so the light cone never reaches the boundary.
        """
        need = minimum_sites(self.N, t_max, self.xi)
        n_c = max(self.N_c, need)
        return replace(self, N_c=n_c, origin_offset=None)

    def supports_horizon(self, t_max: float) -> bool:
        """True if the truncated lattice contains the light cone up to t_max."""
        reach = math.ceil(2.0 * self.xi * t_max)
        left_ok = self.offset >= reach + 10
        right_ok = self.N_c - 1 - (self.offset + self.N) >= reach + 10
        return left_ok and right_ok


def minimum_sites(N: int, t_max: float, xi: float = 1.0) -> int:
    """Smallest safe lattice size for an evolution horizon t_max.

    Beyond the strict light cone the wavefront has an evanescent tail on a
    (2 xi t)^(1/3) length scale; the extra Airy padding keeps the 10-site
    edge zones below 1e-8 population for the whole horizon.
    """
    cone = math.ceil(2.0 * xi * t_max)
    airy = math.ceil(7.0 * max(1.0, 2.0 * xi * t_max) ** (1.0 / 3.0))
    return N + 2 * (cone + airy) + BUFFER_SITES


def dispersion(params: SystemParams, k):
    """Waveguide dispersion omega_k = omega_c - 2 xi cos k."""
    return params.omega_c - 2.0 * params.xi * np.cos(np.asarray(k, dtype=float))


def build_hamiltonian(params: SystemParams, sparse: bool = False):
    """Assemble the single-excitation Hamiltonian on the truncated lattice.

    Open boundary conditions; all couplings are real, so the matrix is real
    symmetric.  Basis ordering is [sites ascending, giant atom, small atom].

    Returns a dense ndarray, or a CSR matrix when ``sparse`` is True.
    """
    d = params.dim
    H = lil_matrix((d, d)) if sparse else np.zeros((d, d))
    nc = params.N_c
    for j in range(nc - 1):
        H[j, j + 1] = H[j + 1, j] = -params.xi
    if params.omega_c != 0.0:
        for j in range(nc):
            H[j, j] = params.omega_c
    a = params.atom_g_index
    H[a, a] = params.Omega
    for leg in (0, params.N):
        idx = params.site_index(leg)
        H[a, idx] = H[idx, a] = params.g
    if params.small_atom is not None:
        s = params.atom_s_index
        H[s, s] = params.Omega
        idx = params.site_index(params.small_atom.M)
        H[s, idx] = H[idx, s] = params.small_atom.g_s
    return csr_matrix(H) if sparse else H


@dataclass
class SingleExcitationState:
    """Complex amplitudes over {giant atom, small atom, lattice sites}."""

    atom_g: complex
    sites: np.ndarray
    atom_s: complex | None = None

    def norm_sq(self) -> float:
        total = abs(self.atom_g) ** 2 + float(np.sum(np.abs(self.sites) ** 2))
        if self.atom_s is not None:
            total += abs(self.atom_s) ** 2
        return total

    def check_normalized(self, tol: float = 1e-9):
        if abs(self.norm_sq() - 1.0) > tol:
            raise ValueError(f"state not normalized: |psi|^2 = {self.norm_sq()}")

    def to_vector(self, params: SystemParams) -> np.ndarray:
        if len(self.sites) != params.N_c:
            raise ValueError("site amplitude array does not match N_c")
        vec = np.zeros(params.dim, dtype=complex)
        vec[: params.N_c] = self.sites
        vec[params.atom_g_index] = self.atom_g
        if params.small_atom is not None:
            vec[params.atom_s_index] = 0.0 if self.atom_s is None else self.atom_s
        elif self.atom_s is not None:
            raise ValueError("atom_s amplitude given but no small atom in params")
        return vec

    @classmethod
    def from_vector(cls, params: SystemParams, vec: np.ndarray) -> "SingleExcitationState":
        atom_s = vec[params.atom_s_index] if params.small_atom is not None else None
        return cls(atom_g=vec[params.atom_g_index], sites=np.array(vec[: params.N_c]), atom_s=atom_s)


def excited_atom_state(params: SystemParams, which: str = "giant") -> SingleExcitationState:
    """The initial state sigma_+|G> (or tau_+|G>) with an empty waveguide."""
    sites = np.zeros(params.N_c, dtype=complex)
    if which == "giant":
        return SingleExcitationState(atom_g=1.0, sites=sites,
                                     atom_s=0.0 if params.small_atom else None)
    if which == "small":
        if params.small_atom is None:
            raise ValueError("no small atom in this configuration")
        return SingleExcitationState(atom_g=0.0, sites=sites, atom_s=1.0)
    raise ValueError("which must be 'giant' or 'small'")


# --- flat key-value config files -------------------------------------------
#
# Schema (all values in units of xi; missing optional keys leave the default):
#   omega_c, omega, xi, g      floats
#   n                          int, leg separation
#   n_c                        int, lattice size (optional; auto-sized by commands)
#   origin_offset              int (optional)
#   g_s, m                     small-atom block (both or neither)
#   eta, delta                 drive block (both or neither)

_FLOAT_KEYS = {"omega_c", "omega", "xi", "g", "g_s", "eta", "delta"}
_INT_KEYS = {"n", "n_c", "origin_offset", "m"}


def read_config(path) -> dict:
    """Parse a flat ``key = value`` config file.  '#' starts a comment."""
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip().lower()
            values[key] = _coerce(key, val.strip(), where=f"{path}:{lineno}")
    return values


def _coerce(key: str, val: str, where: str = "config"):
    try:
        if key in _INT_KEYS:
            return int(val)
        if key in _FLOAT_KEYS:
            return float(val)
    except ValueError as exc:
        raise ValueError(f"{where}: bad value for {key!r}: {val!r}") from exc
    # command-level keys are coerced by the CLI; keep the raw string here
    return val


def params_from_mapping(cfg: dict) -> SystemParams:
    """Build SystemParams from a flat mapping (config file contents)."""
    kwargs = {}
    for src, dst in (("omega_c", "omega_c"), ("omega", "Omega"), ("xi", "xi"),
                     ("g", "g"), ("n", "N"), ("n_c", "N_c"),
                     ("origin_offset", "origin_offset")):
        if src in cfg:
            kwargs[dst] = cfg[src]
    has_gs, has_m = "g_s" in cfg, "m" in cfg
    if has_gs != has_m:
        raise ValueError("small-atom block needs both g_s and m")
    if has_gs:
        kwargs["small_atom"] = SmallAtom(g_s=cfg["g_s"], M=cfg["m"])
    has_eta, has_delta = "eta" in cfg, "delta" in cfg
    if has_eta:
        kwargs["drive"] = Drive(eta=cfg["eta"], Delta=cfg.get("delta", 0.0))
    elif has_delta:
        raise ValueError("drive block needs eta")
    return SystemParams(**kwargs)


def params_to_mapping(params: SystemParams) -> dict:
    """Flat mapping that round-trips through params_from_mapping."""
    cfg = {
        "omega_c": params.omega_c,
        "omega": params.Omega,
        "xi": params.xi,
        "g": params.g,
        "n": params.N,
        "n_c": params.N_c,
    }
    if params.origin_offset is not None:
        cfg["origin_offset"] = params.origin_offset
    if params.small_atom is not None:
        cfg["g_s"] = params.small_atom.g_s
        cfg["m"] = params.small_atom.M
    if params.drive is not None:
        cfg["eta"] = params.drive.eta
        cfg["delta"] = params.drive.Delta
    return cfg
