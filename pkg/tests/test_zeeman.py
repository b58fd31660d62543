import numpy as np
import pytest

from utils.constants import MU_B_HZ_PER_G
from utils.errors import ConfigError, DomainError, NoRootError
from utils.zeeman import (
    HE3_2S_SPLITTING,
    SPECIES_CONSTANTS,
    ZeemanSystem,
    breit_rabi_energy,
    build_hamiltonian,
    find_magic_field,
    hyperfine_splitting,
    make_basis,
    spin_matrices,
    zeeman_map,
)

QUBIT = ("F=3/2,mF=-1/2", "F=1/2,mF=-1/2")


@pytest.fixture(scope="module")
def metastable():
    return ZeemanSystem("he3-2s3S")


def test_spin_matrices_commutator():
    jx, jy, jz, _, _ = spin_matrices(1.5)
    np.testing.assert_allclose(jx @ jy - jy @ jx, 1j * jz, atol=1e-12)


@pytest.mark.parametrize("species", sorted(SPECIES_CONSTANTS))
def test_hamiltonian_is_hermitian_with_field_independent_trace(species):
    constants = SPECIES_CONSTANTS[species]
    h0 = build_hamiltonian(constants["scheme"], constants, 0.0)
    h1 = build_hamiltonian(constants["scheme"], constants, 750.0)
    assert h1.shape == (make_basis(constants["scheme"], constants).dim,) * 2
    np.testing.assert_allclose(h1, h1.conj().T, atol=1e-9 * np.max(np.abs(h1)))
    assert np.trace(h1).real == pytest.approx(np.trace(h0).real, rel=1e-9, abs=1e-3)


@pytest.mark.parametrize("species", sorted(SPECIES_CONSTANTS))
def test_zero_field_hamiltonian_conserves_total_f(species):
    system = ZeemanSystem(species)
    commutator = system.h0 @ system.f2 - system.f2 @ system.h0
    assert np.max(np.abs(commutator)) < 1e-9 * np.max(np.abs(system.h0)) * np.max(np.abs(system.f2))


def test_metastable_labels(metastable):
    assert sorted(metastable.labels) == sorted([
        "F=3/2,mF=3/2", "F=3/2,mF=1/2", "F=3/2,mF=-1/2", "F=3/2,mF=-3/2",
        "F=1/2,mF=1/2", "F=1/2,mF=-1/2",
    ])
    # inverted hyperfine structure: F = 3/2 lies below F = 1/2
    assert metastable.labels[-1].startswith("F=1/2")


@pytest.mark.parametrize("species,expected", [
    ("he3-2s3S", HE3_2S_SPLITTING),
    ("li6-2s", 228.2052611e6),
    ("na23-3s", 1771.6261288e6),
])
def test_ground_hyperfine_splitting(species, expected):
    assert hyperfine_splitting(species) == pytest.approx(expected, abs=1e6)


def test_breit_rabi_matches_diagonalization(metastable):
    constants = SPECIES_CONSTANTS["he3-2s3S"]
    args = (constants["c_hf2"], 1, constants["g_S"], constants["g_I"])
    for B in (0.0, 120.0, 803.0, 2500.0):
        energies, _ = metastable.block_eigen(B, -0.5)
        analytic = sorted(breit_rabi_energy(-0.5, B, *args, upper=upper) for upper in (True, False))
        np.testing.assert_allclose(energies, analytic, rtol=1e-9, atol=1.0)
        stretched = breit_rabi_energy(1.5, B, *args)
        assert metastable.energy("F=3/2,mF=3/2", B) == pytest.approx(stretched, abs=1.0)


def test_magic_field(metastable):
    result = find_magic_field(*QUBIT, (700.0, 900.0), metastable)
    assert result["B_G"] == pytest.approx(803.5, abs=1.0)
    assert result["B_G"] == pytest.approx(802.5, abs=1.5)
    assert abs(result["slope_Hz_per_G"]) < 1.0


def test_magic_field_reports_offset_from_quoted(metastable, caplog):
    with caplog.at_level("WARNING", logger="utils.zeeman"):
        result = find_magic_field(*QUBIT, (700.0, 900.0), metastable)
    warned = any("from the quoted" in record.getMessage() for record in caplog.records)
    assert warned == (abs(result["B_G"] - 803.5) > 0.5)


def test_magic_field_outside_bracket(metastable):
    with pytest.raises(NoRootError):
        find_magic_field(*QUBIT, (100.0, 400.0), metastable)


def test_magic_field_same_state(metastable):
    with pytest.raises(DomainError):
        find_magic_field(QUBIT[0], QUBIT[0], (700.0, 900.0), metastable)


def test_unknown_label(metastable):
    with pytest.raises(DomainError):
        metastable.energy("F=5/2,mF=1/2", 10.0)


def test_zeeman_map_paschen_back_slopes(metastable):
    fields = np.linspace(0.0, 1200.0, 121)
    result = zeeman_map(metastable, fields)
    assert result.energies.shape == (121, 6)
    constants = SPECIES_CONSTANTS["he3-2s3S"]
    stretched = result.branch("F=3/2,mF=3/2")
    slope = np.gradient(stretched, fields)
    expected = MU_B_HZ_PER_G * (constants["g_S"] + 0.5 * constants["g_I"])
    np.testing.assert_allclose(slope, expected, rtol=1e-6)
    # m_S = -1 branch at strong field
    low = result.branch("F=3/2,mF=-3/2")
    assert (low[-1] - low[-2]) / (fields[-1] - fields[-2]) == pytest.approx(
        -MU_B_HZ_PER_G * (constants["g_S"] + 0.5 * constants["g_I"]), rel=1e-6)
    frame = result.to_frame()
    assert list(frame.columns) == ["B_G"] + [f"E{k}_Hz" for k in range(1, 7)]


def test_zeeman_map_from_offset_grid(metastable):
    fields = np.linspace(500.0, 900.0, 41)
    offset = zeeman_map(metastable, fields)
    full = zeeman_map(metastable, np.linspace(0.0, 900.0, 91))
    np.testing.assert_allclose(offset.energies[-1], full.energies[-1], atol=1.0)


def test_zeeman_map_rejects_unsorted_grid(metastable):
    with pytest.raises(DomainError):
        zeeman_map(metastable, [10.0, 5.0])


def test_qubit_differential_is_stationary_on_map(metastable):
    fields = np.linspace(780.0, 825.0, 91)
    result = zeeman_map(metastable, fields)
    differential = result.branch(QUBIT[0]) - result.branch(QUBIT[1])
    turning = fields[np.argmin(np.abs(differential))]
    assert turning == pytest.approx(802.6, abs=1.0)


def test_missing_constants():
    with pytest.raises(ConfigError):
        ZeemanSystem({"scheme": "mI-mJ", "I": 1.5})
    with pytest.raises(ConfigError):
        ZeemanSystem("xe129")


def test_effective_2p_fine_structure():
    system = ZeemanSystem("he3-2p3P")
    assert system.dim == 24
    energies = np.sort(system.zero_field_energies())
    # singlet 2 1P1 sits tens of THz above the triplet
    assert energies[-1] > 6e13
    assert energies[0] < 0
