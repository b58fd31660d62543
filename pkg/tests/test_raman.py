import logging

import numpy as np
import pytest

from models.raman import RamanConfiguration, parse_polarization
from utils.errors import DomainError, ResonanceError
from utils.raman import (
    REFERENCE_BETA,
    SCAN_EXCLUSION,
    _systems,
    _UncoupledMap,
    beta_asymptote,
    beta_from_dipoles,
    beta_ratio,
    beta_scan,
    coupled_amplitudes,
    optimal_detuning,
    preset_configuration,
    raman_table1,
    raman_table2,
    transition_dipoles,
    zero_field_rabi_table,
    zero_field_table_frame,
)


def test_parse_polarization():
    assert parse_polarization("sigma+") == 1
    assert parse_polarization("pi") == 0
    assert parse_polarization("s-") == -1
    with pytest.raises(DomainError):
        parse_polarization("circular")


def test_configuration_validation():
    with pytest.raises(DomainError):
        RamanConfiguration("x", "li6-2s", ["li6-2p"], ["a", "a"], ["pi", "pi"], 1.0)
    with pytest.raises(DomainError):
        RamanConfiguration("x", "li6-2s", ["li6-2p"], ["a", "b"], ["pi", "pi"], -1.0)
    config = preset_configuration("li6", B=10.0)
    assert RamanConfiguration.from_dict(config.to_dict()).to_dict() == config.to_dict()


def test_coupled_amplitudes_are_normalized():
    amplitudes = coupled_amplitudes(1, 0.5, 1.5, 1.5, 2, 1)
    assert sum(a**2 for a in amplitudes.values()) == pytest.approx(1.0)


def test_sodium_zero_field_table():
    table = zero_field_rabi_table("na23")
    expected_g1 = np.array([1, 1, 2, np.sqrt(5), 1, 0]) / 6
    expected_g2 = np.array([0, 2, 2, 0, 2, 0]) / 6
    np.testing.assert_allclose(np.abs(table[0]), expected_g1, atol=1e-12)
    np.testing.assert_allclose(np.abs(table[1]), expected_g2, atol=1e-12)
    np.testing.assert_allclose(table[0] * table[1], np.array([0, -2, 4, 0, -2, 0]) / 36, atol=1e-12)


def test_ytterbium_zero_field_table():
    table = zero_field_rabi_table("yb171")
    np.testing.assert_allclose(table**2, [[1 / 9, 2 / 9], [2 / 9, 1 / 9]], atol=1e-12)
    products = np.sort(table[0] * table[1])
    np.testing.assert_allclose(products, [-np.sqrt(2) / 9, np.sqrt(2) / 9], atol=1e-12)


@pytest.mark.parametrize("species", ["na23", "yb171"])
def test_completeness_of_closed_excited_set(species):
    table = zero_field_rabi_table(species)
    assert np.sum(table[0] * table[1]) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("species", ["li6", "na23"])
def test_completeness_with_field_dressed_states(species):
    dipoles = transition_dipoles(preset_configuration(species, B=800.0))
    total = np.sum(dipoles["omega1"] * np.conj(dipoles["omega2"]))
    assert abs(total) < 1e-10


def test_beta_invariant_under_intensity_scaling():
    rng = np.random.default_rng(0)
    omega1, omega2 = rng.normal(size=5), rng.normal(size=5)
    deltas = np.array([0.0, 1e9, 2e9, 30e9, 31e9])
    one = beta_from_dipoles(omega1, omega2, deltas, -5e9, 1e7)["beta"]
    scaled = beta_from_dipoles(3.7 * omega1, 3.7 * omega2, deltas, -5e9, 1e7)["beta"]
    assert scaled == pytest.approx(one, rel=1e-12)


def test_single_level_has_no_interior_maximum():
    betas = [beta_from_dipoles(np.array([1.0]), np.array([0.5]), np.array([0.0]), d, 1e7)["beta"]
             for d in np.linspace(-50e9, -1e9, 50)]
    assert np.all(np.diff(betas) < 0)


def test_resonance_raises():
    with pytest.raises(ResonanceError):
        beta_from_dipoles(np.array([1.0]), np.array([1.0]), np.array([0.0]), 0.5e6, 1e7)


def test_fidelity_definition():
    result = beta_ratio(preset_configuration("li6", delta=-16.42e9))
    assert result["fidelity"] == pytest.approx(1 - 1 / result["beta"])


def test_lithium_zero_field_optimum():
    scan = beta_scan(preset_configuration("li6"), deltas=np.linspace(-30e9, -2e9, 141))
    delta, beta = max(scan.maxima, key=lambda item: item[1])
    assert beta == pytest.approx(149.7, rel=0.03)
    assert delta == pytest.approx(-16.42e9, abs=1e9)


def test_sodium_zero_field_values():
    config = preset_configuration("na23", delta=-701.4e9)
    assert beta_ratio(config)["beta"] == pytest.approx(5081, rel=0.02)
    assert beta_asymptote(config)["beta"] == pytest.approx(4411, rel=0.02)


def test_helium_beta_at_800_gauss():
    result = beta_ratio(preset_configuration("he3", B=800.0, delta=26.35e9))
    assert result["beta"] == pytest.approx(2106, rel=0.02)
    assert result["fidelity"] == pytest.approx(0.9995, abs=1e-4)


@pytest.mark.parametrize("species, B, delta, expected", REFERENCE_BETA)
def test_literature_beta_at_quoted_detuning(species, B, delta, expected):
    result = beta_ratio(preset_configuration(species, B=B, delta=delta))
    assert result["beta"] == pytest.approx(expected, rel=0.02)


def test_asymptotic_flattening():
    config = preset_configuration("na23")
    scan = beta_scan(config, deltas=np.linspace(-1500e9, -1e9, 400))
    peak_slope = np.max(np.abs(np.gradient(scan.beta, scan.values)))
    far = [beta_ratio(config.replace(delta=d))["beta"] for d in (-5e13, -1e14)]
    far_slope = abs(far[1] - far[0]) / 5e13
    assert far_slope < 1e-4 * peak_slope


def test_field_scan_drops_nothing_far_from_resonance():
    config = preset_configuration("li6", delta=-16.42e9)
    scan = beta_scan(config, fields=np.linspace(0.0, 800.0, 9))
    assert len(scan.values) == 9
    assert list(scan.to_frame().columns) == ["B_G", "beta", "fidelity"]


def test_scan_needs_one_axis():
    with pytest.raises(DomainError):
        beta_scan(preset_configuration("li6"))


def test_uncoupled_ground_state():
    config = RamanConfiguration("na23", "na23-3s", ["na23-3p1/2"], ["F=2,mF=-2", "F=1,mF=0"],
                                ["sigma-", "pi"], 6.15e7)
    with pytest.raises(DomainError):
        transition_dipoles(config)


def test_zero_field_table_frame():
    frame = zero_field_table_frame("yb171")
    assert len(frame) == 4
    assert frame["omega_squared"].sum() == pytest.approx(2 / 3)


@pytest.mark.slow
def test_helium_table2_maxima():
    frame = raman_table2(points=551)
    assert set(frame["polarization"]) == {"sigma+,sigma+", "pi,pi"}
    blue = frame[frame["Delta_GHz"] > 0]
    assert set(blue["polarization"]) == {"sigma+,sigma+", "pi,pi"}
    assert np.all(blue["fidelity"] > 0.999)


def test_sigma_plus_raises_the_orbital_projection():
    config = preset_configuration("he3", B=0.0, delta=29.05e9)
    flipped = config.replace(polarizations=["sigma-", "sigma-"])
    assert beta_ratio(config)["beta"] > 5 * beta_ratio(flipped)["beta"]


@pytest.mark.parametrize("split", [False, True])
def test_uncoupled_ground_map_is_isometric(split):
    ground, _ = _systems("he3-2s3S", ("he3-2p3P",))
    mapping = _UncoupledMap(ground, split_spin=split)
    np.testing.assert_allclose(mapping.matrix.T @ mapping.matrix, np.eye(mapping.matrix.shape[1]), atol=1e-12)
    spectator_count = 3 if split else 2
    assert all(len(spect) == spectator_count for _, spect in mapping.keys)


def test_lithium_800_gauss_optimum_is_kept():
    frame = raman_table1(fields=(800.0,), points=200)
    li = frame[(frame["species"] == "li6") & (frame["B_G"] == 800.0)]
    assert len(li) == 2
    optimum = li.iloc[0]
    assert optimum["Delta_GHz"] < -2 * SCAN_EXCLUSION * 1e-9
    assert abs(optimum["relative_difference"]) < 0.05


def test_monotone_window_falls_back_to_best_sample(caplog):
    config = preset_configuration("li6")
    with caplog.at_level(logging.WARNING, logger="utils.raman"):
        delta, beta = optimal_detuning(config, (-100e9, -99e9), points=21)
    assert "no interior" in caplog.text
    assert delta in (-100e9, -99e9)
    assert beta == pytest.approx(beta_ratio(config.replace(delta=delta))["beta"])


@pytest.mark.slow
def test_table1_reproduces_every_row():
    frame = raman_table1()
    assert len(frame) == 12
    assert frame["relative_difference"].abs().max() < 0.02


@pytest.mark.slow
@pytest.mark.parametrize("B, polarization, delta_ghz, expected", [
    (0.0, "sigma+,sigma+", -9.835, 1942.986),
    (0.0, "sigma+,sigma+", 29.054, 1959.174),
    (800.0, "sigma+,sigma+", -9.384, 2077.032),
    (800.0, "sigma+,sigma+", 26.351, 2105.516),
    (0.0, "pi,pi", -9.384, 2113.947),
    (0.0, "pi,pi", 22.598, 1964.401),
    (800.0, "pi,pi", -9.535, 2117.231),
    (800.0, "pi,pi", 24.099, 2062.955),
])
def test_helium_table2_rows(B, polarization, delta_ghz, expected):
    frame = raman_table2(B=B)
    rows = frame[frame["polarization"] == polarization]
    nearest = rows.iloc[int(np.argmin(np.abs(rows["Delta_GHz"] - delta_ghz)))]
    assert nearest["Delta_GHz"] == pytest.approx(delta_ghz, abs=0.5)
    assert nearest["beta"] == pytest.approx(expected, rel=0.05)
