import re
from fractions import Fraction

import numpy as np
import pandas as pd

from utils.errors import DomainError

ORBITAL_LETTERS = "spdf"
SYMMETRY_PATTERN = re.compile(r"^n([spdf])F(\d+)2$")


def parse_symmetry(text):
    """
    Split a symmetry name such as 'nsF32' or 'ndF72' into (l, F)

    Args:
        text (str): 'n' + orbital letter + 'F' + numerator of F over 2

    Returns:
        tuple: (l as int, F as float)
    """
    match = SYMMETRY_PATTERN.match(str(text).strip())
    if not match:
        raise DomainError(f"cannot parse symmetry '{text}'; expected e.g. nsF32")
    return ORBITAL_LETTERS.index(match.group(1)), int(match.group(2)) / 2.0


def format_symmetry(l, F):
    return f"n{ORBITAL_LETTERS[l]}F{int(round(2 * F))}2"


def _fmt(value):
    return str(Fraction(value).limit_denominator(2))


class QuantumDefectFit:
    """
    Class representing an energy-dependent quantum defect
    mu(eps) = mu0 + mu1 eps + mu2 eps^2 + ... with eps = Ry/nu^2 in atomic units
    """
    def __init__(self, series, coefficients):
        self.series = series
        self.coefficients = np.asarray(coefficients, dtype=float)

    def evaluate(self, eps):
        return np.polynomial.polynomial.polyval(eps, self.coefficients)

    def derivative(self, eps):
        return np.polynomial.polynomial.polyval(eps, np.polynomial.polynomial.polyder(self.coefficients))

    def to_dict(self):
        return {"series": self.series, "coefficients": self.coefficients.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["series"], data["coefficients"])


class RydbergLevel:
    """
    Class representing one bound state of a multichannel Rydberg series

    ``channels`` lists the long-range (f_c, j_e) channels, ``nus`` the
    effective quantum number of the level in each channel and
    ``amplitudes`` the signed, normalised channel amplitudes.
    """
    def __init__(self, l, F, energy_ghz, channels, nus, amplitudes, thresholds):
        self.l = int(l)
        self.F = float(F)
        self.energy_ghz = float(energy_ghz)
        self.channels = [tuple(float(v) for v in channel) for channel in channels]
        self.nus = np.asarray(nus, dtype=float)
        self.amplitudes = np.asarray(amplitudes, dtype=float)
        self.thresholds = np.asarray(thresholds, dtype=float)

    @property
    def symmetry(self):
        return format_symmetry(self.l, self.F)

    @property
    def fractions(self):
        return self.amplitudes**2

    @property
    def frac_fc1(self):
        return float(sum(frac for (f_c, _), frac in zip(self.channels, self.fractions) if f_c == 1))

    @property
    def nu1(self):
        """Effective quantum number relative to the lower (f_c = 1) threshold"""
        return float(self.nus[int(np.argmin(self.thresholds))])

    @property
    def n(self):
        """Integer label: nearest integer above nu1 - 1/2"""
        return int(np.floor(self.nu1 + 0.5))

    @property
    def key(self):
        return (self.l, int(round(2 * self.F)), round(self.energy_ghz, 6))

    def __eq__(self, other):
        return isinstance(other, RydbergLevel) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def to_dict(self):
        return {
            "symmetry": self.symmetry,
            "n": self.n,
            "E_GHz": self.energy_ghz,
            "nu1": self.nu1,
            "frac_fc1": self.frac_fc1,
            "channels": [list(channel) for channel in self.channels],
            "nus": self.nus.tolist(),
            "amplitudes": self.amplitudes.tolist(),
        }

    def __repr__(self):
        return f"RydbergLevel({self.n}{ORBITAL_LETTERS[self.l]} F={_fmt(self.F)}, E={self.energy_ghz:.6f} GHz)"


class RydbergState:
    """
    Class representing a Zeeman sublevel m of a Rydberg level
    """
    def __init__(self, level, m):
        if abs(m) > level.F or not (level.F - m).is_integer():
            raise DomainError(f"m={m} not allowed for F={level.F}")
        self.level = level
        self.m = float(m)

    @property
    def l(self):
        return self.level.l

    @property
    def F(self):
        return self.level.F

    @property
    def energy_ghz(self):
        return self.level.energy_ghz

    def to_dict(self):
        return {**self.level.to_dict(), "m": self.m}

    def __eq__(self, other):
        return isinstance(other, RydbergState) and self.level == other.level and self.m == other.m

    def __hash__(self):
        return hash((self.level.key, self.m))

    def __repr__(self):
        return f"RydbergState({self.level.n}{ORBITAL_LETTERS[self.l]} F={_fmt(self.F)} m={_fmt(self.m)})"


class PairState:
    """
    Class representing a product state |b1 b2> of two Rydberg atoms
    """
    def __init__(self, atom1, atom2):
        self.atom1 = atom1
        self.atom2 = atom2

    @property
    def M(self):
        return self.atom1.m + self.atom2.m

    @property
    def energy_ghz(self):
        return self.atom1.energy_ghz + self.atom2.energy_ghz

    def to_dict(self):
        return {
            "atom1": self.atom1.to_dict(),
            "atom2": self.atom2.to_dict(),
            "M": self.M,
            "energy_ghz": self.energy_ghz,
        }

    def __eq__(self, other):
        return isinstance(other, PairState) and self.atom1 == other.atom1 and self.atom2 == other.atom2

    def __hash__(self):
        return hash((self.atom1, self.atom2))

    def __repr__(self):
        return f"PairState({self.atom1!r}, {self.atom2!r})"


class PairCurves:
    """
    Class representing pair potential curves on an internuclear grid

    ``energies`` holds the sorted eigenvalues at each R relative to the
    unperturbed target pair energy; ``tracked`` follows the target state
    adiabatically in from the largest R.
    """
    def __init__(self, R_um, energies, tracked, target, basis_size):
        self.R_um = np.asarray(R_um, dtype=float)
        self.energies = np.asarray(energies, dtype=float)
        self.tracked = np.asarray(tracked, dtype=float)
        self.target = target
        self.basis_size = int(basis_size)

    def nearest_curves(self, count):
        """Indices of the count eigenvalues closest to the target at the largest R"""
        outer = self.energies[int(np.argmax(self.R_um))]
        return np.sort(np.argsort(np.abs(outer))[:count])

    def to_frame(self, count=10):
        columns = {"R_um": self.R_um, "tracked_GHz": self.tracked}
        for rank, index in enumerate(self.nearest_curves(count)):
            columns[f"E{rank + 1}_GHz"] = self.energies[:, index]
        return pd.DataFrame(columns)

    def to_dict(self):
        return {
            "target": self.target.to_dict(),
            "basis_size": self.basis_size,
            "R_um": self.R_um.tolist(),
            "tracked_GHz": self.tracked.tolist(),
        }
