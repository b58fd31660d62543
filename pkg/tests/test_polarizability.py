import numpy as np
import pytest

from models.atomic import AtomicCatalog, LevelRecord, LineRecord
from models.states import STATE_PRESETS, HyperfineStateLabel
from utils.constants import AU_DIPOLE, HBAR, wavelength_to_angular
from utils.errors import DomainError, NoRootError, RegimeError, ResonanceError
from utils.polarizability import (
    alpha_components,
    alpha_total,
    differential_polarizability,
    find_magic_wavelength,
    hyperfine_shift_hz,
    polarizability_curve,
    scattering_rate,
    tensor_prefactor,
    to_atomic_units,
    trap_from_power,
    two_photon_discrepancy_report,
    two_photon_rate_rescale,
)

G = STATE_PRESETS["g"]
E = STATE_PRESETS["e"]
P = STATE_PRESETS["p"]
G_LOWER = STATE_PRESETS["g-lower"]


def alpha_au(state, wavelength, catalog, **kwargs):
    return float(to_atomic_units(alpha_total(state, wavelength_to_angular(wavelength), catalog, **kwargs)))


def test_hyperfine_shift_of_metastable_level():
    a = -4.4931342513e9
    upper = hyperfine_shift_hz(a, 0.5, 1, 0.5)
    lower = hyperfine_shift_hz(a, 0.5, 1, 1.5)
    assert upper - lower == pytest.approx(6.739701e9, rel=1e-6)
    assert hyperfine_shift_hz(None, 0.5, 1, 1.5) == 0.0


def test_static_limit_is_positive(catalog):
    assert alpha_au(G, 1e-3, catalog) > 0


def test_metastable_sign_around_1083(catalog):
    # red of the 2P line the state is trapped, blue of it anti-trapped
    assert alpha_au(G, 1150e-9, catalog) > 0
    assert alpha_au(G, 1013e-9, catalog) < 0


def test_excited_state_opposes_metastable_at_1013(catalog):
    assert alpha_au(E, 1013e-9, catalog) / alpha_au(G, 1013e-9, catalog) < 0


def test_tensor_prefactor():
    assert tensor_prefactor(0.0, 0.5, 0.5) == 0.0
    assert tensor_prefactor(0.0, 2.5, 2.5) == pytest.approx(1.0)
    assert tensor_prefactor(np.arccos(1 / np.sqrt(3)), 1.5, 0.5) == pytest.approx(0.0, abs=1e-12)


def test_paths_agree_far_from_resonance(catalog):
    omega = wavelength_to_angular(1550e-9)
    f_path = alpha_components(G, omega, catalog, path="F")
    j_path = alpha_components(G, omega, catalog, path="J")
    assert f_path[0] == pytest.approx(j_path[0], rel=1e-3)


def test_unknown_path(catalog):
    with pytest.raises(DomainError):
        alpha_components(G, wavelength_to_angular(1150e-9), catalog, path="X")


def test_resonance_exclusion(catalog):
    lower = catalog.level("1s2s:3S:1")
    upper = catalog.level("1s2p:3P:2")
    omega = 2 * np.pi * (upper.energy_hz - lower.energy_hz)
    with pytest.raises(ResonanceError):
        alpha_components(G, omega, catalog)


def test_curve_drops_excluded_points(catalog):
    wavelengths = np.linspace(1080e-9, 1086e-9, 301)
    curve = polarizability_curve(G, wavelengths, catalog)
    assert 0 < len(curve.wavelengths) < len(wavelengths)
    frame = curve.to_frame()
    assert list(frame.columns) == ["lambda_nm", "alpha0_au", "alpha1_au", "alpha2_au", "alpha_total_au"]


def test_curve_rejects_unsorted_grid(catalog):
    with pytest.raises(DomainError):
        polarizability_curve(G, [1100e-9, 1000e-9], catalog)


def test_qubit_differentials_at_1150(catalog):
    qubit = differential_polarizability(G, G_LOWER, 1150e-9, catalog)
    raman = differential_polarizability(G, STATE_PRESETS["g-stretched"], 1150e-9, catalog)
    # tensor only: m_F = -1/2 and -3/2 sit symmetrically about the scalar part
    assert raman / qubit == pytest.approx(2.0, rel=1e-9)
    assert abs(qubit) == pytest.approx(1.5e-4, rel=0.35)
    assert abs(raman) == pytest.approx(3.1e-4, rel=0.35)


def test_hyperfine_path_adds_scalar_differential(catalog):
    tensor = differential_polarizability(G, G_LOWER, 1150e-9, catalog)
    resolved = differential_polarizability(G, G_LOWER, 1150e-9, catalog, path="F")
    assert abs(resolved - tensor) > 1e-4


def test_excited_to_metastable_ratios(catalog):
    assert alpha_au(E, 1150e-9, catalog) / alpha_au(G, 1150e-9, catalog) == pytest.approx(-0.04, abs=0.01)
    assert alpha_au(E, 1013e-9, catalog) / alpha_au(G, 1013e-9, catalog) == pytest.approx(-0.18, abs=0.03)


@pytest.mark.parametrize("wavelength", [1078e-9, 1090e-9])
def test_paths_agree_in_crossover_region(catalog, wavelength):
    omega = wavelength_to_angular(wavelength)
    f_path = alpha_components(G, omega, catalog, path="F")
    j_path = alpha_components(G, omega, catalog, path="J")
    assert f_path[0] == pytest.approx(j_path[0], rel=0.01)


def test_single_line_matches_two_level_formula():
    lower = LevelRecord("2s", "2S", 0.5, 0.0)
    upper = LevelRecord("2p", "2P", 0.5, 4e14)
    single = AtomicCatalog([lower, upper], [LineRecord(lower, upper, 12.0)])
    state = HyperfineStateLabel("2s", "2S", 0.5, 0.5, 1.0, 0.0)
    omega_0 = 2 * np.pi * 4e14
    d2 = 12.0 * AU_DIPOLE**2 / 2
    for omega in 2 * np.pi * np.array([1e13, 2e14, 3.5e14, 4.6e14, 9e14]):
        expected = 2 * d2 * omega_0 / (3 * HBAR * (omega_0**2 - omega**2))
        for path in ("F", "J"):
            alpha0 = alpha_components(state, omega, single, path=path)[0]
            assert alpha0 == pytest.approx(expected, rel=1e-10)


def test_depth_of_operating_tweezer(catalog):
    trap = trap_from_power(1.23e-3, 1e-6, 1150e-9, G, catalog)
    assert trap["depth_hz"] == pytest.approx(10e6, rel=0.1)


def test_magic_wavelength_g_p(catalog):
    magic = find_magic_wavelength(G, P, (1015e-9, 1029e-9), catalog)
    assert magic == pytest.approx(1025.6e-9, abs=1e-9)
    assert alpha_au(G, magic, catalog) == pytest.approx(alpha_au(P, magic, catalog), rel=1e-6)


def test_magic_wavelength_same_state(catalog):
    with pytest.raises(DomainError):
        find_magic_wavelength(G, G, (1000e-9, 1100e-9), catalog)


def test_magic_wavelength_absent(catalog):
    with pytest.raises(NoRootError):
        find_magic_wavelength(G, P, (1015e-9, 1020e-9), catalog)


def test_trap_depth_scales_with_power(catalog):
    one = trap_from_power(1e-3, 1e-6, 1150e-9, G, catalog)
    two = trap_from_power(2e-3, 1e-6, 1150e-9, G, catalog)
    assert two["depth_hz"] == pytest.approx(2 * one["depth_hz"])
    assert one["omega_r"] > one["omega_z"] > 0


def test_red_trap_at_1013_is_anti_trapping(catalog):
    with pytest.raises(RegimeError):
        trap_from_power(1e-3, 1e-6, 1013e-9, G, catalog, trap_type="red")
    assert trap_from_power(1e-3, 1e-6, 1013e-9, G, catalog, trap_type="blue")["depth_hz"] > 0


def test_scattering_rate():
    gamma = 2 * np.pi * 1.6e6
    assert scattering_rate(1.0, 0.0, gamma) == pytest.approx(gamma / 4)
    assert scattering_rate(0.0, 1e6, gamma) == 0.0
    with pytest.raises(DomainError):
        scattering_rate(-1.0, 0.0, gamma)


def test_optical_pumping_scattering_rate():
    gamma = 2 * np.pi * 1.6e6
    rate = scattering_rate(10.0, -2 * np.pi * 10e6, gamma)
    assert rate / (2 * np.pi) == pytest.approx(48e3, rel=0.01)


def test_two_photon_rescale():
    rate = two_photon_rate_rescale(0.07, 40, -35e6, 10, -10e6)
    assert rate == pytest.approx(0.0536, abs=1e-4)
    with pytest.raises(DomainError):
        two_photon_rate_rescale(0.07, 40, 0.0, 10, -10e6)


def test_two_photon_report_warns(caplog):
    report = two_photon_discrepancy_report()
    assert report["ratio"] > 100
    assert "two-photon" in caplog.text
