import numpy as np
import pandas as pd
import pytest

from models.results import DriveProtocol
from utils.constants import M_HE3
from utils.errors import DomainError, RegimeError
from utils.motional import (
    STEPS_PER_PERIOD,
    anharmonicity_curve,
    drive_dynamics,
    extract_rabi,
    kinetic_coefficient,
    perturbative_rabi,
    pi_pulse,
    pi_pulse_fidelity_map,
    transition_element,
    well_spectrum,
)


@pytest.fixture(scope="module")
def shallow():
    return well_spectrum(75e3, 1e-6)


def test_shallow_well_anharmonicity(shallow):
    assert shallow.anharmonicity == pytest.approx(0.30, abs=0.02)
    assert shallow.f01 == pytest.approx(26.37e3, rel=5e-3)
    assert np.all(shallow.energies_hz < 0)


def test_deep_well_is_harmonic():
    depth = 50e6
    spectrum = well_spectrum(depth, 1e-6)
    harmonic = np.sqrt(8 * kinetic_coefficient(M_HE3, 1e-6) * depth)
    assert spectrum.f01 == pytest.approx(harmonic, rel=0.01)
    assert spectrum.anharmonicity < 0.01


def test_deeper_well_binds_more_states(shallow):
    deeper = well_spectrum(600e3, 1e-6)
    assert deeper.n_bound > shallow.n_bound
    assert deeper.anharmonicity < shallow.anharmonicity


def test_too_shallow_well():
    with pytest.raises(RegimeError):
        well_spectrum(500.0, 1e-6)


def test_transition_frequency_monotone_in_depth():
    curve = anharmonicity_curve(np.arange(50e3, 650e3, 50e3))
    assert np.all(np.diff(curve["f01_kHz"]) > 0)


def test_even_states_do_not_couple(shallow):
    assert abs(transition_element(shallow, 0, 2)) < 1e-8 * abs(transition_element(shallow, 0, 1))


def test_no_drive_keeps_populations(shallow):
    protocol = DriveProtocol(0.0, shallow.f01, 10 / shallow.f01)
    frame = drive_dynamics(shallow, protocol)
    np.testing.assert_allclose(frame["P0"], 1.0, atol=1e-6)
    assert np.max(np.abs(frame["norm"] - 1.0)) < 1e-8


def test_rabi_frequency_matches_matrix_element(shallow):
    for amplitude in (2e-9, 4e-9):
        result = pi_pulse(shallow, amplitude, steps_per_period=400)
        assert result["rabi_hz"] == pytest.approx(perturbative_rabi(shallow, amplitude), rel=0.05)
        assert result["fidelity"] > 0.99


def test_operating_point(shallow):
    result = pi_pulse(shallow, 8.5e-9)
    assert result["rabi_hz"] == pytest.approx(1000.0, rel=0.3)
    assert result["rabi_hz"] == pytest.approx(perturbative_rabi(shallow, 8.5e-9), rel=0.05)
    assert result["fidelity"] > 0.99
    assert result["P2"] < 0.01


def test_finer_steps_agree(shallow):
    protocol = DriveProtocol(8.5e-9, shallow.f01, 10 / shallow.f01)
    coarse = drive_dynamics(shallow, protocol)
    fine = drive_dynamics(shallow, protocol, steps_per_period=2 * STEPS_PER_PERIOD)
    for column in ("P0", "P1", "P2"):
        assert fine[column].iloc[-1] == pytest.approx(coarse[column].iloc[-1], abs=1e-6)


def test_extract_rabi_from_ideal_curve():
    t = np.linspace(0, 2e-3, 2001)
    # pi time 1 ms
    frame = pd.DataFrame({"t_s": t, "P1": np.sin(np.pi * 500.0 * t) ** 2})
    rabi, peak, t_peak = extract_rabi(frame)
    assert t_peak == pytest.approx(1e-3, rel=1e-3)
    assert rabi == pytest.approx(1000.0, rel=1e-3)
    assert peak == pytest.approx(1.0)


def test_unsupported_envelope(shallow):
    with pytest.raises(DomainError):
        drive_dynamics(shallow, DriveProtocol(1e-9, shallow.f01, 1e-4, envelope="gaussian"))


def test_fidelity_map_columns():
    frame = pi_pulse_fidelity_map([8.5e-9], [75e3], steps_per_period=400)
    assert list(frame.columns) == ["amplitude_nm", "depth_kHz", "anharmonicity", "fidelity", "rabi_kHz",
                                   "t_pi_ms", "high_fidelity"]
    assert frame["fidelity"].iloc[0] > 0.99
