"""Giant-atom waveguide QED in a coupled-resonator waveguide.

Bound states in and outside the continuum, Markovian and non-Markovian
emission dynamics, and the magic-cavity QED model with an auxiliary small
atom, all cross-validated against brute-force lattice evolution.
"""

__version__ = "0.1.0"

from .bessel import bessel_j, bessel_j_table, integrate_j
from .exact import ToleranceError, evolve, snapshot_heatmap
from .markov import (MarkovRates, compute_rates, dark_state, evolve_magic,
                     evolve_single_ga, rabi_scan, single_ga_analytic,
                     steady_state)
from .model import (Drive, SingleExcitationState, SmallAtom, SystemParams,
                    build_hamiltonian, dispersion, excited_atom_state,
                    minimum_sites)
from .nonmarkov import (KernelTable, alpha_single, beta_profile,
                        excitation_bookkeeping, magic_amplitudes)
from .spectral import (BoundState, OverlapSet, bic_boc_oscillation,
                       bic_exists_multi, bic_exists_single, bic_magic_cavity,
                       bic_profile, boc_energies, boc_states, overlaps,
                       spectrum_vs_g)
from .timeseries import TimeSeries

__all__ = [
    "BoundState", "Drive", "KernelTable", "MarkovRates", "OverlapSet",
    "SingleExcitationState", "SmallAtom", "SystemParams", "TimeSeries",
    "ToleranceError", "alpha_single", "bessel_j", "bessel_j_table",
    "beta_profile", "bic_boc_oscillation", "bic_exists_multi",
    "bic_exists_single", "bic_magic_cavity", "bic_profile", "boc_energies",
    "boc_states", "build_hamiltonian", "compute_rates", "dark_state",
    "dispersion", "evolve", "evolve_magic", "evolve_single_ga",
    "excitation_bookkeeping", "excited_atom_state", "integrate_j",
    "magic_amplitudes", "minimum_sites", "overlaps", "rabi_scan",
    "single_ga_analytic", "snapshot_heatmap", "spectrum_vs_g", "steady_state",
]
