import numpy as np
import pandas as pd

from utils.errors import DomainError

POLARIZATIONS = {"sigma-": -1, "pi": 0, "sigma+": 1}
POLARIZATION_ALIASES = {"s-": "sigma-", "s+": "sigma+", "p": "pi", "-1": "sigma-", "0": "pi", "1": "sigma+", "+1": "sigma+"}


def parse_polarization(text):
    """
    Spherical index q of a polarization name

    Args:
        text (str or int): 'sigma+', 'pi', 'sigma-' (or s+, p, s-, or -1/0/1)

    Returns:
        int: q in {-1, 0, 1}
    """
    key = str(text).strip().lower()
    key = POLARIZATION_ALIASES.get(key, key)
    if key not in POLARIZATIONS:
        raise DomainError(f"unknown polarization '{text}'")
    return POLARIZATIONS[key]


class RamanConfiguration:
    """
    Class representing a two-photon Raman coupling between two ground states

    The ground pair is given by zero-field labels of the ground manifold; the
    excited set is every eigenstate of the listed excited manifolds. The
    detuning is measured from the lowest or highest excited state at zero
    field, selected by ``detuning_reference``.
    """
    def __init__(self, species, ground, excited, pair, polarizations, gamma,
                 B=0.0, delta=0.0, detuning_reference="lowest"):
        self.species = species
        self.ground = ground
        self.excited = tuple(excited)
        self.pair = tuple(pair)
        self.polarizations = tuple(parse_polarization(q) for q in polarizations)
        self.gamma = float(gamma)
        self.B = float(B)
        self.delta = float(delta)
        self.detuning_reference = detuning_reference

        if len(self.pair) != 2 or self.pair[0] == self.pair[1]:
            raise DomainError("a Raman coupling needs two distinct ground states")
        if len(self.polarizations) != 2:
            raise DomainError("a Raman coupling needs one polarization per beam")
        if self.gamma <= 0:
            raise DomainError("excited-state decay rate must be positive")
        if detuning_reference not in ("lowest", "highest"):
            raise DomainError(f"unknown detuning reference '{detuning_reference}'")

    def replace(self, **changes):
        data = self.to_dict()
        data.update(changes)
        return RamanConfiguration.from_dict(data)

    def to_dict(self):
        return {
            "species": self.species,
            "ground": self.ground,
            "excited": list(self.excited),
            "pair": list(self.pair),
            "polarizations": list(self.polarizations),
            "gamma": self.gamma,
            "B": self.B,
            "delta": self.delta,
            "detuning_reference": self.detuning_reference,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            species=data["species"],
            ground=data["ground"],
            excited=data["excited"],
            pair=data["pair"],
            polarizations=data["polarizations"],
            gamma=data["gamma"],
            B=data.get("B", 0.0),
            delta=data.get("delta", 0.0),
            detuning_reference=data.get("detuning_reference", "lowest"),
        )


class BetaScan:
    """
    Class representing |beta| sampled along a detuning or field grid
    """
    def __init__(self, axis, values, beta, maxima=None, config=None):
        self.axis = axis
        self.values = np.asarray(values, dtype=float)
        self.beta = np.asarray(beta, dtype=float)
        self.maxima = list(maxima or [])
        self.config = config

    @property
    def fidelity(self):
        return 1 - 1 / self.beta

    def to_frame(self):
        column = "Delta_GHz" if self.axis == "delta" else "B_G"
        scale = 1e-9 if self.axis == "delta" else 1.0
        return pd.DataFrame({column: self.values * scale, "beta": self.beta, "fidelity": self.fidelity})

    def to_dict(self):
        return {
            "axis": self.axis,
            "maxima": [{"value": v, "beta": b} for v, b in self.maxima],
            **self.to_frame().to_dict(orient="list"),
        }
