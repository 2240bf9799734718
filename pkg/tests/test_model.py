import numpy as np
import pytest

from crwqed.model import (SingleExcitationState, SmallAtom, SystemParams,
                          build_hamiltonian, dispersion, excited_atom_state,
                          minimum_sites, params_from_mapping, params_to_mapping,
                          read_config)


def test_dispersion_band_points():
    p = SystemParams(omega_c=0.0, xi=1.0)
    assert dispersion(p, 0.0) == pytest.approx(-2.0)
    assert dispersion(p, np.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert dispersion(p, np.pi) == pytest.approx(2.0)


def test_dispersion_vectorized_and_shifted():
    p = SystemParams(omega_c=1.5, xi=2.0)
    k = np.linspace(-np.pi, np.pi, 7)
    np.testing.assert_allclose(dispersion(p, k), 1.5 - 4.0 * np.cos(k), rtol=1e-15)


def test_hand_assembled_small_case():
    # N_c=3, N=1, legs at array sites 0 and 1, atom appended last
    p = SystemParams(N=1, g=0.5, N_c=3, origin_offset=0)
    H = build_hamiltonian(p)
    expected = np.array([
        [0.0, -1.0, 0.0, 0.5],
        [-1.0, 0.0, -1.0, 0.5],
        [0.0, -1.0, 0.0, 0.0],
        [0.5, 0.5, 0.0, 0.0],
    ])
    np.testing.assert_array_equal(H, expected)


def test_decoupled_limit_block_diagonal():
    p = SystemParams(g=0.0, N=4, N_c=31, Omega=0.7, omega_c=0.7)
    H = build_hamiltonian(p)
    a = p.atom_g_index
    assert np.all(H[a, :a] == 0.0) and np.all(H[:a, a] == 0.0)
    assert H[a, a] == 0.7


def test_g0_spectrum_is_open_chain_plus_atom():
    p = SystemParams(g=0.0, N=4, N_c=40, Omega=0.3, omega_c=0.0)
    w = np.linalg.eigvalsh(build_hamiltonian(p))
    q = np.arange(1, p.N_c + 1)
    chain = -2.0 * p.xi * np.cos(np.pi * q / (p.N_c + 1))
    expected = np.sort(np.concatenate([chain, [0.3]]))
    np.testing.assert_allclose(w, expected, atol=1e-12)


def test_hermiticity_and_real_spectrum():
    p = SystemParams(N=6, g=0.3, N_c=51, small_atom=SmallAtom(g_s=0.2, M=2))
    H = build_hamiltonian(p)
    assert np.max(np.abs(H - H.T)) == 0.0
    w = np.linalg.eigvals(H)
    assert np.max(np.abs(w.imag)) < 1e-12


def test_continuum_band_range():
    p = SystemParams(N=6, g=0.1, N_c=201)
    w = np.linalg.eigvalsh(build_hamiltonian(p))
    inside = w[np.abs(w) < 2.0 * p.xi + 0.1]
    # all but the three exotic states live within the band up to O(1/N_c)
    assert len(inside) >= p.N_c - 2
    assert inside.min() > -2.0 * p.xi - 0.1 and inside.max() < 2.0 * p.xi + 0.1


def test_sparse_matches_dense():
    p = SystemParams(N=4, g=0.2, N_c=25, small_atom=SmallAtom(g_s=0.1, M=1))
    np.testing.assert_array_equal(build_hamiltonian(p, sparse=True).toarray(),
                                  build_hamiltonian(p))


@pytest.mark.parametrize("kwargs", [
    dict(xi=0.0),
    dict(xi=-1.0),
    dict(g=-0.1),
    dict(N=0),
    dict(N=6, N_c=6),
    dict(N=4, small_atom=SmallAtom(g_s=0.1, M=4)),
    dict(N=4, small_atom=SmallAtom(g_s=0.1, M=0)),
    dict(N=4, small_atom=SmallAtom(g_s=-0.1, M=2)),
    dict(N=6, N_c=200, origin_offset=197),
])
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ValueError):
        SystemParams(**kwargs)


def test_light_cone_sizing():
    assert minimum_sites(6, 50.0) == 6 + 200 + 40
    p = SystemParams(N=6, N_c=11).sized_for(50.0)
    assert p.N_c >= 246
    assert p.supports_horizon(50.0)
    assert not SystemParams(N=6, N_c=61).supports_horizon(50.0)


def test_state_vector_roundtrip_and_norm():
    p = SystemParams(N=4, N_c=21, small_atom=SmallAtom(g_s=0.1, M=2))
    sites = np.zeros(21, complex)
    sites[10] = 1j / np.sqrt(2)
    st = SingleExcitationState(atom_g=0.5, sites=sites, atom_s=0.5)
    assert st.norm_sq() == pytest.approx(1.0, abs=1e-12)
    st.check_normalized()
    vec = st.to_vector(p)
    back = SingleExcitationState.from_vector(p, vec)
    assert back.atom_g == st.atom_g and back.atom_s == st.atom_s
    np.testing.assert_array_equal(back.sites, sites)


def test_unnormalized_state_rejected():
    st = SingleExcitationState(atom_g=1.0, sites=np.ones(3, complex))
    with pytest.raises(ValueError):
        st.check_normalized()


def test_excited_atom_state():
    p = SystemParams(N=4, N_c=21, small_atom=SmallAtom(g_s=0.1, M=2))
    vec = excited_atom_state(p, "small").to_vector(p)
    assert vec[p.atom_s_index] == 1.0 and np.sum(np.abs(vec) ** 2) == 1.0
    with pytest.raises(ValueError):
        excited_atom_state(SystemParams(), "small")


def test_config_roundtrip(tmp_path):
    p = SystemParams(omega_c=0.25, Omega=0.25, xi=2.0, g=0.15, N=4, N_c=321,
                     small_atom=SmallAtom(g_s=0.05, M=2))
    cfg = params_to_mapping(p)
    path = tmp_path / "run.cfg"
    lines = [f"{k} = {v}" for k, v in cfg.items()]
    path.write_text("# comment line\n" + "\n".join(lines) + "\n")
    assert params_from_mapping(read_config(path)) == p


def test_config_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("this is not a key value pair\n")
    with pytest.raises(ValueError):
        read_config(path)
    path.write_text("g = not_a_number\n")
    with pytest.raises(ValueError):
        read_config(path)
    with pytest.raises(ValueError):
        params_from_mapping({"g_s": 0.1})  # m missing
