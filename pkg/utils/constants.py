"""
Physical constants and unit conversions used across the toolkit.

SI values come from ``scipy.constants`` (CODATA). Everything He-3 specific
that the structure calculations need (reduced-mass Rydberg, ionic hyperfine
thresholds, C6 conversion) lives here as a named constant.
"""
from dataclasses import dataclass

import numpy as np
from scipy import constants as sc

from utils.errors import DomainError

HBAR = sc.hbar
H_PLANCK = sc.h
C_LIGHT = sc.c
EPS0 = sc.epsilon_0
E_CHARGE = sc.e
A0 = sc.physical_constants["Bohr radius"][0]
E_H = sc.physical_constants["Hartree energy"][0]
MU_B = sc.physical_constants["Bohr magneton"][0]
AMU = sc.physical_constants["atomic mass constant"][0]
RY_INF_HZ = sc.physical_constants["Rydberg constant times c in Hz"][0]

# Bohr magneton in Hz per gauss
MU_B_HZ_PER_G = sc.physical_constants["Bohr magneton in Hz/T"][0] * 1e-4

# atomic masses
M_HE3 = 3.0160293201 * AMU
M_LI6 = 6.0151228874 * AMU
M_NA23 = 22.9897692820 * AMU

MASSES = {
    "he3": M_HE3,
    "li6": M_LI6,
    "na23": M_NA23,
}

# atomic units
AU_POLARIZABILITY = sc.physical_constants["atomic unit of electric polarizability"][0]
AU_DIPOLE = E_CHARGE * A0
HARTREE_HZ = E_H / H_PLANCK
HARTREE_GHZ = HARTREE_HZ * 1e-9
CM_INV_HZ = C_LIGHT * 100.0

# He-3 Rydberg constant relative to Ry_inf (reduced-mass correction)
RY_HE3_RATIO = 0.9998181118795
RY_HE3_GHZ = RY_INF_HZ * 1e-9 * RY_HE3_RATIO
RY_HE3_AU = 0.5 * RY_HE3_RATIO

# He+ 1s hyperfine thresholds relative to the degeneracy-weighted average (GHz)
THRESHOLD_FC1_GHZ = -2.16641246644
THRESHOLD_FC0_GHZ = 6.49923739933
ION_HYPERFINE_GHZ = THRESHOLD_FC0_GHZ - THRESHOLD_FC1_GHZ

# one atomic unit of C6 in GHz um^6
C6_AU_TO_GHZ_UM6 = 1.44e-19
# one atomic unit of C3 in GHz um^3
C3_AU_TO_GHZ_UM3 = HARTREE_GHZ * (A0 * 1e6) ** 3

# Einstein A coefficients of the 1s3p 3P2 decay channels (1/s)
A_3P_TO_2S = 9.47e6
A_3P_TO_3S = 1.07e6

# 2 3S1 - 2 3P natural linewidth (rad/s)
GAMMA_2P = 1.0216e7


@dataclass(frozen=True)
class PhysicalConstants:
    """Bundle of the constants a calculation depends on, SI units"""

    hbar: float = HBAR
    c: float = C_LIGHT
    eps0: float = EPS0
    mu_B: float = MU_B
    m_He3: float = M_HE3
    m_Li6: float = M_LI6
    m_Na23: float = M_NA23
    Ry_inf: float = RY_INF_HZ
    a0: float = A0
    E_h: float = E_H

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"constant {name} must be finite and positive")


def wavelength_to_angular(wavelength):
    """
    Convert a vacuum wavelength to an angular frequency

    Args:
        wavelength (float or ndarray): Wavelength in m

    Returns:
        float or ndarray: Angular frequency in rad/s
    """
    return 2.0 * np.pi * C_LIGHT / np.asarray(wavelength, dtype=float)


def angular_to_wavelength(omega):
    return 2.0 * np.pi * C_LIGHT / np.asarray(omega, dtype=float)


def recoil_energy_hz(wavelength, mass):
    """Recoil energy E_R/h = h/(2 m lambda^2) in Hz"""
    return H_PLANCK / (2.0 * mass * wavelength**2)


def species_mass(species):
    key = species.lower().replace("-", "").replace("_", "")
    if key in ("he3", "he3*", "helium3"):
        return M_HE3
    if key in MASSES:
        return MASSES[key]
    raise DomainError(f"unknown species '{species}'", species=species)
