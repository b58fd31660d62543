from fractions import Fraction

from models.atomic import level_key, parse_term
from utils.errors import DomainError


def _half(value):
    return float(Fraction(str(value).strip()))


def _fmt(value):
    return str(Fraction(value).limit_denominator(2))


class HyperfineStateLabel:
    """
    Class representing a hyperfine Zeeman sublevel |config term J; I F m_F>
    """
    def __init__(self, config="", term="", J=0.0, I=0.5, F=0.5, mF=0.5):
        self.config = config
        self.term = term
        self.J = float(J)
        self.I = float(I)
        self.F = float(F)
        self.mF = float(mF)
        self.S, self.L = parse_term(term)

        if abs(self.mF) > self.F or not (self.F - self.mF).is_integer():
            raise DomainError(f"m_F={mF} not allowed for F={F}")
        if not abs(self.J - self.I) <= self.F <= self.J + self.I or not (self.F - self.J - self.I).is_integer():
            raise DomainError(f"F={F} cannot be formed from J={J} and I={I}")

    @property
    def level_key(self):
        return level_key(self.config, self.term, self.J)

    def with_mF(self, mF):
        return HyperfineStateLabel(self.config, self.term, self.J, self.I, self.F, mF)

    def to_dict(self):
        return {
            "config": self.config,
            "term": self.term,
            "J": self.J,
            "I": self.I,
            "F": self.F,
            "mF": self.mF,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**{key: data[key] for key in ("config", "term", "J", "I", "F", "mF") if key in data})

    @classmethod
    def parse(cls, text, I=0.5):
        """
        Parse a label such as '1s2s:3S:1:F=3/2:mF=-1/2' or a preset name

        Args:
            text (str): State label or one of the preset names in STATE_PRESETS
            I (float): Nuclear spin used when the label does not carry one

        Returns:
            HyperfineStateLabel: The parsed state
        """
        if text in STATE_PRESETS:
            return STATE_PRESETS[text]
        parts = text.split(":")
        if len(parts) != 5:
            raise DomainError(f"cannot parse state label '{text}'")
        config, term, j_text, f_text, m_text = parts
        values = {}
        for item in (f_text, m_text):
            key, _, value = item.partition("=")
            values[key.strip()] = _half(value)
        if "F" not in values or "mF" not in values:
            raise DomainError(f"state label '{text}' needs F= and mF= fields")
        return cls(config, term, _half(j_text), I, values["F"], values["mF"])

    def __str__(self):
        return f"{self.config}:{self.term}:{_fmt(self.J)}:F={_fmt(self.F)}:mF={_fmt(self.mF)}"

    def __repr__(self):
        return f"HyperfineStateLabel({self})"

    def __eq__(self, other):
        return isinstance(other, HyperfineStateLabel) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(tuple(self.to_dict().values()))


STATE_PRESETS = {
    # trapped metastable qubit states
    "g": HyperfineStateLabel("1s2s", "3S", 1, 0.5, 1.5, -0.5),
    "g-stretched": HyperfineStateLabel("1s2s", "3S", 1, 0.5, 1.5, -1.5),
    "g-lower": HyperfineStateLabel("1s2s", "3S", 1, 0.5, 0.5, -0.5),
    # cooling and detection excited state
    "e": HyperfineStateLabel("1s2p", "3P", 2, 0.5, 1.5, -1.5),
    # Rydberg intermediate state
    "p": HyperfineStateLabel("1s3p", "3P", 2, 0.5, 2.5, -2.5),
}


class SpinBasis:
    """
    Class representing an uncoupled product basis of angular momenta

    Kets are tuples of projections, one per spin, ordered from +j to -j in
    each factor (the ordering of numpy.kron over descending spin matrices).
    """
    def __init__(self, scheme, spins, names):
        self.scheme = scheme
        self.spins = tuple(float(s) for s in spins)
        self.names = tuple(names)
        kets = [()]
        for s in self.spins:
            ms = [s - k for k in range(int(round(2 * s)) + 1)]
            kets = [ket + (m,) for ket in kets for m in ms]
        self.kets = kets

    @property
    def dim(self):
        return len(self.kets)

    def total_m(self):
        """Total projection of every ket"""
        return [sum(ket) for ket in self.kets]

    def index(self, **projections):
        """Index of the ket with the given projections, e.g. index(mJ=0, mI=-0.5)"""
        target = tuple(float(projections[f"m{name}"]) for name in self.names)
        return self.kets.index(target)

    def to_dict(self):
        return {"scheme": self.scheme, "spins": list(self.spins), "names": list(self.names)}

    @classmethod
    def from_dict(cls, data):
        return cls(data["scheme"], data["spins"], data["names"])
