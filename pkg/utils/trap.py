"""
Tweezer mechanics and cooling figures of merit.

Lamb-Dicke parameters of the optical-pumping photon, the 3D ground-state
estimate used to pick a trap depth, the dressed-state picture of optical
pumping with an anti-trapped excited state, and the adiabaticity check of
an auxiliary-tweezer sweep.
"""
import logging

import numpy as np
import pandas as pd

from models.trap import TrapGeometry
from utils.constants import GAMMA_2P, HBAR, M_HE3, wavelength_to_angular
from utils.errors import DomainError, RegimeError
from utils.polarizability import scattering_rate, trap_from_power

logger = logging.getLogger(__name__)

# 2 3S1 - 2 3P optical-pumping line
OP_WAVELENGTH = 1083.33e-9
ADIABATIC_THRESHOLD = 10.0


def geometry_from_power(power, w0, wavelength, state, catalog, mass=M_HE3, theta=0.0, trap_type="red"):
    """
    Build a TrapGeometry from beam power through the state's polarizability

    Returns:
        TrapGeometry: Trap with the computed peak depth
    """
    trap = trap_from_power(power, w0, wavelength, state, catalog, mass=mass, theta=theta, trap_type=trap_type)
    return TrapGeometry(trap["depth_hz"], w0, wavelength, mass)


def lamb_dicke(trap, photon_wavelength=OP_WAVELENGTH, axis="r", nbar=0.0):
    """
    Lamb-Dicke parameter of a photon along one trap axis

    Args:
        trap (TrapGeometry): Tweezer
        photon_wavelength (float): Wavelength of the scattered photon in m
        axis (str): 'r' (radial) or 'z' (axial)
        nbar (float): Mean motional occupation

    Returns:
        dict: eta = x0 k with x0 = sqrt(hbar / 2 m omega), and
        eta_eff = eta sqrt(2 nbar + 1)
    """
    if nbar < 0:
        raise DomainError("mean occupation must be non-negative", nbar=nbar)
    x0 = np.sqrt(HBAR / (2 * trap.mass * trap.omega(axis)))
    eta = x0 * 2 * np.pi / photon_wavelength
    return {"eta": float(eta), "eta_eff": float(eta * np.sqrt(2 * nbar + 1))}


def ground_state_fom(trap, photon_wavelength=OP_WAVELENGTH):
    """
    Rough probability of ending in the 3D motional ground state

    Args:
        trap (TrapGeometry): Tweezer
        photon_wavelength (float): Optical-pumping wavelength in m

    Returns:
        dict: eta_r, eta_z, fom = (1 - eta_r^2)^2 (1 - eta_z^2) and
        fom_radial = (1 - eta_r^2)^3
    """
    eta_r = lamb_dicke(trap, photon_wavelength, "r")["eta"]
    eta_z = lamb_dicke(trap, photon_wavelength, "z")["eta"]
    if max(eta_r, eta_z) >= 1:
        raise RegimeError("Lamb-Dicke regime lost", eta_r=eta_r, eta_z=eta_z, depth_hz=trap.depth_hz)
    return {
        "eta_r": eta_r,
        "eta_z": eta_z,
        "fom": (1 - eta_r**2) ** 2 * (1 - eta_z**2),
        "fom_radial": (1 - eta_r**2) ** 3,
    }


def trap_scattering_rate(trap, line_wavelength=OP_WAVELENGTH, gamma=GAMMA_2P):
    """
    Off-resonant photon scattering rate at the bottom of a far-detuned trap

    The dominant line is treated as a two-level system including the
    counter-rotating term: R = (U0/hbar) (omega/omega0)^3 |Gamma/(omega0-omega) + Gamma/(omega0+omega)|.

    Returns:
        float: Scattering rate in 1/s
    """
    omega = wavelength_to_angular(trap.wavelength)
    omega0 = wavelength_to_angular(line_wavelength)
    detuning_sum = gamma / (omega0 - omega) + gamma / (omega0 + omega)
    return float(trap.depth_j / HBAR * (omega / omega0) ** 3 * abs(detuning_sum))


def fom_curve(depths_hz, w0=1e-6, trap_wavelength=1150e-9, photon_wavelength=OP_WAVELENGTH, mass=M_HE3):
    """
    Ground-state figure of merit and trap scattering rate versus depth

    Depths where the Lamb-Dicke regime is lost are reported as NaN.

    Returns:
        DataFrame: depth_MHz, eta_r, eta_z, fom, fom_radial, R_sc
    """
    rows = []
    for depth in np.asarray(depths_hz, dtype=float):
        trap = TrapGeometry(depth, w0, trap_wavelength, mass)
        try:
            fom = ground_state_fom(trap, photon_wavelength)
        except RegimeError:
            fom = {"eta_r": np.nan, "eta_z": np.nan, "fom": np.nan, "fom_radial": np.nan}
        rows.append({"depth_MHz": depth * 1e-6, **fom, "R_sc": trap_scattering_rate(trap)})
    return pd.DataFrame(rows)


def _dressed_weights(alpha_ratio, theta):
    # decay out of the ground-like dressed state: weight cos^2 back into it,
    # sin^2 into the excited-like one; good when the final state is trapped
    curvature_ground = np.cos(theta) ** 2 + alpha_ratio * np.sin(theta) ** 2
    curvature_excited = np.sin(theta) ** 2 + alpha_ratio * np.cos(theta) ** 2
    weights = np.array([np.cos(theta) ** 2, np.sin(theta) ** 2])
    trapped = np.array([curvature_ground, curvature_excited]) > 0
    return np.where(trapped, weights, 0.0).sum(axis=0), np.where(trapped, 0.0, weights).sum(axis=0)


def dressed_op_ratio(alpha_ratio, deltas_hz, rabi_hz, trap=None, gamma=GAMMA_2P):
    """
    Good-to-bad decay ratio of optical pumping in the dressed-state regime

    The ground and excited potentials have curvatures in the ratio
    alpha_e/alpha_g. Light of Rabi frequency Omega at detuning Delta mixes them
    with angle theta, tan(2 theta) = Omega/|Delta|; spontaneous decay from the
    ground-like dressed state lands in the trapped or the anti-trapped
    dressed state with weights cos^2(theta) and sin^2(theta).

    Args:
        alpha_ratio (float): alpha_e / alpha_g of the pumping transition
        deltas_hz (array): Laser detunings Delta/2pi in Hz, non-zero
        rabi_hz (float): Rabi frequency Omega/2pi in Hz
        trap (TrapGeometry): Optional trap whose differential light shift
            moves the transition at the trap bottom
        gamma (float): Linewidth in rad/s

    Returns:
        DataFrame: delta_MHz, delta_eff_MHz, theta, ratio (inf when no
        decay reaches an anti-trapped state) and gamma_gg in photons/s
    """
    deltas = np.atleast_1d(np.asarray(deltas_hz, dtype=float))
    if np.any(deltas == 0):
        raise DomainError("optical-pumping detuning must be non-zero for dressing")
    if rabi_hz <= 0:
        raise DomainError("Rabi frequency must be positive", rabi_hz=rabi_hz)
    if alpha_ratio >= 0:
        logger.info("alpha_e/alpha_g = %.3f: no anti-trapped dressed state", alpha_ratio)

    shift_hz = 0.0 if trap is None else trap.depth_hz * (1 - alpha_ratio)
    delta_eff = 2 * np.pi * (deltas - shift_hz)
    omega = 2 * np.pi * rabi_hz
    theta = 0.5 * np.arctan2(omega, np.abs(delta_eff))

    good, bad = _dressed_weights(alpha_ratio, theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bad > 0, good / np.where(bad > 0, bad, 1.0), np.inf)
    s = 2 * omega**2 / gamma**2
    return pd.DataFrame({
        "delta_MHz": deltas * 1e-6,
        "delta_eff_MHz": delta_eff / (2 * np.pi) * 1e-6,
        "theta": theta,
        "ratio": ratio,
        "gamma_gg": scattering_rate(s, delta_eff, gamma),
    })


def aux_sweep_check(j_hz, sweep_rate_hz_per_s, threshold=ADIABATIC_THRESHOLD):
    """
    Adiabaticity of sweeping an auxiliary tweezer through resonance

    Args:
        j_hz (float): Resonant tunneling matrix element J/h in Hz
        sweep_rate_hz_per_s (float): d(U - U_aux)/dt over h, in Hz/s
        threshold (float): Minimum J^2/rate counted as adiabatic

    Returns:
        dict: parameter J^2/rate (dimensionless) and whether it passes
    """
    if j_hz <= 0 or sweep_rate_hz_per_s <= 0:
        raise DomainError("tunneling and sweep rate must be positive", j_hz=j_hz, rate=sweep_rate_hz_per_s)
    parameter = j_hz**2 / sweep_rate_hz_per_s
    return {"parameter": float(parameter), "adiabatic": bool(parameter >= threshold), "threshold": threshold}
