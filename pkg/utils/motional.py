"""
Motional qubit in a shallow tweezer.

The radial cut -U0 exp(-2 x^2/w0^2) is sampled on a periodic grid; the
static spectrum comes from dense diagonalization with the Fourier kinetic
operator and the driven dynamics from split-operator steps with the same
kinetic operator, so the static eigenstates are the natural basis for the
populations. Energies are in Hz and lengths in units of w0 internally.
"""
import logging

import numpy as np
import pandas as pd
from scipy.linalg import circulant, eigh

from models.results import DriveProtocol, WellSpectrum
from utils.constants import HBAR, M_HE3
from utils.errors import ConvergenceError, DomainError, RegimeError

logger = logging.getLogger(__name__)

GRID_POINTS = 512
GRID_EXTENT = 4.0
STEPS_PER_PERIOD = 1600
NORM_TOLERANCE = 1e-8
HIGH_FIDELITY = 0.999
PULSE_MARGIN = 1.3


def kinetic_coefficient(mass, w0):
    """hbar / (4 pi m w0^2): the kinetic prefactor in Hz for x in units of w0"""
    return HBAR / (4 * np.pi * mass * w0**2)


def well_potential(x, depth_hz):
    return -depth_hz * np.exp(-2 * x**2)


def _potential_slope(x, depth_hz):
    return 4 * depth_hz * x * np.exp(-2 * x**2)


def _grid(points, extent):
    step = 2 * extent / points
    return (np.arange(points) - points // 2) * step, step


def _wavenumbers(points, step):
    return 2 * np.pi * np.fft.fftfreq(points, d=step)


def well_spectrum(depth_hz, w0=1e-6, mass=M_HE3, points=GRID_POINTS, extent=GRID_EXTENT):
    """
    Bound states of a 1D Gaussian well

    Args:
        depth_hz (float): Trap depth U0/h in Hz
        w0 (float): Waist in m
        mass (float): Atomic mass in kg
        points (int): Grid points
        extent (float): Half-width of the periodic box in units of w0

    Returns:
        WellSpectrum: Bound energies (Hz, below the zero asymptote) and
        eigenvectors normalised on the grid
    """
    if depth_hz <= 0 or w0 <= 0:
        raise DomainError("trap depth and waist must be positive", depth_hz=depth_hz, w0=w0)
    x, step = _grid(points, extent)
    coefficient = kinetic_coefficient(mass, w0)
    column = np.fft.ifft(coefficient * _wavenumbers(points, step) ** 2).real
    H = circulant(column) + np.diag(well_potential(x, depth_hz))
    energies, vectors = eigh(H, subset_by_value=(-np.inf, 0.0))
    if len(energies) < 2:
        raise RegimeError("well holds fewer than two bound states", depth_hz=depth_hz, bound=len(energies))

    vectors = vectors.T
    signs = np.sign(vectors[np.arange(len(vectors)), np.argmax(np.abs(vectors), axis=1)])
    vectors = vectors * signs[:, None]
    spectrum = WellSpectrum(depth_hz, w0, x * w0, energies, vectors, mass=mass)
    logger.info("well %.4g kHz: %d bound states, f01 = %.4g kHz", depth_hz * 1e-3, spectrum.n_bound,
                spectrum.f01 * 1e-3)
    return spectrum


def anharmonicity_curve(depths_hz, w0=1e-6, mass=M_HE3):
    """
    f01 and anharmonicity versus trap depth

    Returns:
        DataFrame: depth_kHz, n_bound, f01_kHz, anharmonicity
    """
    rows = []
    for depth in np.asarray(depths_hz, dtype=float):
        spectrum = well_spectrum(depth, w0, mass)
        anharmonicity = spectrum.anharmonicity
        rows.append({
            "depth_kHz": depth * 1e-3,
            "n_bound": spectrum.n_bound,
            "f01_kHz": spectrum.f01 * 1e-3,
            "anharmonicity": np.nan if anharmonicity is None else anharmonicity,
        })
    return pd.DataFrame(rows)


def transition_element(spectrum, a, b):
    """<a| dV/dx |b> in Hz per metre"""
    x = spectrum.x / spectrum.w0
    slope = _potential_slope(x, spectrum.depth_hz)
    return float(spectrum.wavefunctions[a] @ (slope * spectrum.wavefunctions[b])) / spectrum.w0


def perturbative_rabi(spectrum, amplitude):
    """
    First-order Rabi frequency of the 0-1 transition

    The modulation -A sin(2 pi f t) dV/dx couples |0> and |1> with a
    resonant component A <0|dV/dx|1>/2, so the Bloch vector turns at
    A |<0|dV/dx|1>| cycles per second. Rabi frequencies are quoted as the
    pi-pulse rate 1/t_pi, twice that value.

    Returns:
        float: Rabi frequency in Hz
    """
    return abs(2 * amplitude * transition_element(spectrum, 0, 1))


def drive_dynamics(spectrum, protocol, initial=0, steps_per_period=STEPS_PER_PERIOD, every=1):
    """
    Populations under a modulated trap position

    Strang splitting with the potential V(x - A sin(2 pi f t)) taken at the
    midpoint of each step.

    Args:
        spectrum (WellSpectrum): Static well and its eigenstates
        protocol (DriveProtocol): Modulation amplitude, frequency and duration
        initial (int): Index of the initial eigenstate
        steps_per_period (int): Time steps per period of the faster of the
            drive and the 0-1 transition
        every (int): Keep every n-th step in the output

    Returns:
        DataFrame: t_s, P0, P1, P2, Pleak and norm
    """
    if protocol.envelope != "rectangular":
        raise DomainError(f"unsupported pulse envelope '{protocol.envelope}'")
    if protocol.duration <= 0:
        raise DomainError("pulse duration must be positive", duration=protocol.duration)
    if abs(protocol.amplitude) > 0.1 * spectrum.w0:
        logger.warning("modulation amplitude %.3g m is not small against the waist", protocol.amplitude)

    x = spectrum.x / spectrum.w0
    step_x = x[1] - x[0]
    fastest = max(protocol.frequency, spectrum.f01)
    n_steps = int(np.ceil(protocol.duration * steps_per_period * fastest))
    dt = protocol.duration / n_steps
    kinetic = np.exp(-2j * np.pi * kinetic_coefficient(spectrum.mass, spectrum.w0)
                     * _wavenumbers(len(x), step_x) ** 2 * dt)
    basis = spectrum.wavefunctions[: min(3, spectrum.n_bound)]

    psi = spectrum.wavefunctions[initial].astype(complex)
    rows = []

    def record(t):
        populations = np.abs(basis @ psi) ** 2
        padded = np.zeros(3)
        padded[: len(populations)] = populations
        norm = float(np.vdot(psi, psi).real)
        rows.append((t, *padded, norm - padded.sum(), norm))

    record(0.0)
    for index in range(n_steps):
        shift = protocol.offset((index + 0.5) * dt) / spectrum.w0
        half = np.exp(-1j * np.pi * well_potential(x - shift, spectrum.depth_hz) * dt)
        psi = half * np.fft.ifft(kinetic * np.fft.fft(half * psi))
        if (index + 1) % every == 0 or index + 1 == n_steps:
            record((index + 1) * dt)

    frame = pd.DataFrame(rows, columns=["t_s", "P0", "P1", "P2", "Pleak", "norm"])
    drift = float(np.max(np.abs(frame["norm"] - 1.0)))
    if drift > NORM_TOLERANCE:
        raise ConvergenceError("norm drift exceeds tolerance; reduce the time step", drift=drift)
    return frame


def extract_rabi(frame):
    """
    Rabi frequency (pi-pulse rate) from the first transfer maximum

    Returns:
        tuple: (1/t_pi in Hz, peak P1, time of the peak in s)
    """
    index = int(np.argmax(frame["P1"].to_numpy()))
    t_peak = float(frame["t_s"].iloc[index])
    if t_peak <= 0:
        raise DomainError("no population transfer in the simulated window")
    return 1.0 / t_peak, float(frame["P1"].iloc[index]), t_peak


def pi_pulse(spectrum, amplitude, steps_per_period=STEPS_PER_PERIOD):
    """
    Resonant pi pulse on the 0-1 transition

    The pulse runs for a margin beyond the perturbative pi time and the
    fidelity is the best transfer probability reached.

    Returns:
        dict: fidelity, rabi_hz (from the simulation), rabi_estimate_hz,
        t_pi_s and the population of |2> at the peak
    """
    estimate = perturbative_rabi(spectrum, amplitude)
    if estimate <= 0:
        raise DomainError("drive amplitude produces no coupling", amplitude=amplitude)
    protocol = DriveProtocol(amplitude, spectrum.f01, PULSE_MARGIN / estimate)
    frame = drive_dynamics(spectrum, protocol, steps_per_period=steps_per_period)
    rabi, fidelity, t_peak = extract_rabi(frame)
    p2 = float(frame["P2"].iloc[int(np.argmax(frame["P1"].to_numpy()))])
    return {"fidelity": fidelity, "rabi_hz": rabi, "rabi_estimate_hz": estimate, "t_pi_s": t_peak, "P2": p2}


def pi_pulse_fidelity_map(amplitudes, depths_hz, w0=1e-6, mass=M_HE3, steps_per_period=STEPS_PER_PERIOD):
    """
    Pi-pulse fidelity and Rabi frequency over amplitude and depth

    Returns:
        DataFrame: amplitude_nm, depth_kHz, anharmonicity, fidelity,
        rabi_kHz, t_pi_ms and high_fidelity (fidelity >= 0.999)
    """
    rows = []
    for depth in np.asarray(depths_hz, dtype=float):
        spectrum = well_spectrum(depth, w0, mass)
        for amplitude in np.asarray(amplitudes, dtype=float):
            result = pi_pulse(spectrum, amplitude, steps_per_period=steps_per_period)
            rows.append({
                "amplitude_nm": amplitude * 1e9,
                "depth_kHz": depth * 1e-3,
                "anharmonicity": spectrum.anharmonicity,
                "fidelity": result["fidelity"],
                "rabi_kHz": result["rabi_hz"] * 1e-3,
                "t_pi_ms": result["t_pi_s"] * 1e3,
                "high_fidelity": result["fidelity"] >= HIGH_FIDELITY,
            })
    return pd.DataFrame(rows)
