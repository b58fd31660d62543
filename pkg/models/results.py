import numpy as np
import pandas as pd

from utils.constants import AU_POLARIZABILITY, M_HE3


class PolarizabilityCurve:
    """
    Class representing alpha(lambda) samples of one state
    """
    def __init__(self, wavelengths, alpha0, alpha1, alpha2, alpha_total, state=None, theta=0.0, exclusion=0.0):
        self.wavelengths = np.asarray(wavelengths, dtype=float)
        self.alpha0 = np.asarray(alpha0, dtype=float)
        self.alpha1 = np.asarray(alpha1, dtype=float)
        self.alpha2 = np.asarray(alpha2, dtype=float)
        self.alpha_total = np.asarray(alpha_total, dtype=float)
        self.state = state
        self.theta = theta
        self.exclusion = exclusion

    def to_frame(self):
        """
        Convert the curve to a table in nm and atomic units

        Returns:
            DataFrame: lambda_nm and the four polarizability columns
        """
        return pd.DataFrame({
            "lambda_nm": self.wavelengths * 1e9,
            "alpha0_au": self.alpha0 / AU_POLARIZABILITY,
            "alpha1_au": self.alpha1 / AU_POLARIZABILITY,
            "alpha2_au": self.alpha2 / AU_POLARIZABILITY,
            "alpha_total_au": self.alpha_total / AU_POLARIZABILITY,
        })

    def to_dict(self):
        return {
            "state": str(self.state),
            "theta": self.theta,
            "exclusion": self.exclusion,
            **self.to_frame().to_dict(orient="list"),
        }


class ZeemanMap:
    """
    Class representing eigenenergies of a spin Hamiltonian over a field grid

    Columns of ``energies`` follow adiabatic branches, labelled by the
    zero-field state each branch connects to.
    """
    def __init__(self, fields, energies, labels, scheme=""):
        self.fields = np.asarray(fields, dtype=float)
        self.energies = np.asarray(energies, dtype=float)
        self.labels = list(labels)
        self.scheme = scheme

    def branch(self, label):
        """Energies (Hz) of the branch with the given zero-field label"""
        return self.energies[:, self.labels.index(label)]

    def to_frame(self):
        columns = {"B_G": self.fields}
        for index in range(self.energies.shape[1]):
            columns[f"E{index + 1}_Hz"] = self.energies[:, index]
        return pd.DataFrame(columns)

    def to_dict(self):
        return {"scheme": self.scheme, "labels": [str(label) for label in self.labels],
                **self.to_frame().to_dict(orient="list")}


class SpectrumResult:
    """
    Class representing the lowest eigenpairs of a discretized Hamiltonian

    ``partner`` indexes the lowest state that is odd under x -> -x; it is the
    E1 of the tunneling doublet and is 1 unless a transverse excitation lies
    below it.
    """
    def __init__(self, energies_hz, residuals, grid_shape, states=None, energies_er=None, merged=False, barrier_hz=None,
                 partner=1):
        self.energies_hz = np.asarray(energies_hz, dtype=float)
        self.residuals = np.asarray(residuals, dtype=float)
        self.grid_shape = tuple(grid_shape)
        self.states = states
        self.energies_er = None if energies_er is None else np.asarray(energies_er, dtype=float)
        self.merged = merged
        self.barrier_hz = barrier_hz
        self.partner = int(partner)

    @property
    def e1_hz(self):
        return float(self.energies_hz[self.partner])

    @property
    def tunneling_hz(self):
        """J = (E1 - E0)/2, None in the merged-well regime"""
        if self.merged:
            return None
        return 0.5 * (self.e1_hz - self.energies_hz[0])

    def to_dict(self):
        return {
            "E0": float(self.energies_hz[0]),
            "E1": self.e1_hz,
            "J_Hz": self.tunneling_hz,
            "merged": self.merged,
            "grid": list(self.grid_shape),
            "max_residual": float(np.max(self.residuals)),
        }


class WellSpectrum:
    """
    Class representing the bound states of a 1D Gaussian well
    """
    def __init__(self, depth_hz, w0, x, energies_hz, wavefunctions, mass=M_HE3):
        self.depth_hz = depth_hz
        self.w0 = w0
        self.mass = mass
        self.x = np.asarray(x, dtype=float)
        self.energies_hz = np.asarray(energies_hz, dtype=float)
        self.wavefunctions = np.asarray(wavefunctions, dtype=float)

    @property
    def n_bound(self):
        return len(self.energies_hz)

    @property
    def f01(self):
        return self.energies_hz[1] - self.energies_hz[0]

    @property
    def anharmonicity(self):
        """(E1 - E0)/(E2 - E1) - 1, None with fewer than three bound states"""
        if self.n_bound < 3:
            return None
        e = self.energies_hz
        return (e[1] - e[0]) / (e[2] - e[1]) - 1

    def to_dict(self):
        return {
            "depth_hz": self.depth_hz,
            "w0": self.w0,
            "energies_hz": self.energies_hz.tolist(),
            "anharmonicity": self.anharmonicity,
        }


class DriveProtocol:
    """
    Class representing a trap-position modulation pulse
    """
    def __init__(self, amplitude, frequency, duration, envelope="rectangular"):
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)
        self.duration = float(duration)
        self.envelope = envelope

    def offset(self, t):
        """Trap displacement (m) at time t"""
        return self.amplitude * np.sin(2 * np.pi * self.frequency * t)

    def to_dict(self):
        return {
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "duration": self.duration,
            "envelope": self.envelope,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data.get("amplitude", 0.0), data.get("frequency", 0.0),
                   data.get("duration", 0.0), data.get("envelope", "rectangular"))
