import math

from utils.errors import CatalogError

TERM_LETTERS = "SPDFGHIK"


def parse_term(term):
    """
    Split a term symbol like '3P' into spin and orbital angular momentum

    Args:
        term (str): Multiplicity followed by the orbital letter

    Returns:
        tuple: (S, L) as floats
    """
    term = str(term).strip()
    if len(term) < 2 or not term[:-1].isdigit() or term[-1].upper() not in TERM_LETTERS:
        raise CatalogError(f"cannot parse term '{term}'")
    multiplicity = int(term[:-1])
    return (multiplicity - 1) / 2.0, float(TERM_LETTERS.index(term[-1].upper()))


def level_key(config, term, J):
    """Canonical key 'config:term:J' of a fine-structure level"""
    j = float(J)
    j_text = str(int(j)) if j.is_integer() else f"{int(round(2 * j))}/2"
    return f"{config}:{term}:{j_text}"


class LevelRecord:
    """
    Class representing one fine-structure level of the atom
    """
    def __init__(self, config="", term="", J=0.0, energy_hz=0.0, hyperfine_a_hz=None):
        self.config = config
        self.term = term
        self.J = float(J)
        self.energy_hz = float(energy_hz)
        self.hyperfine_a_hz = hyperfine_a_hz
        self.S, self.L = parse_term(term)

        if not math.isfinite(self.energy_hz):
            raise CatalogError(f"level {self.key} has a non-finite energy")
        if self.J < 0 or not (2 * self.J).is_integer():
            raise CatalogError(f"level {self.key} has invalid J={J}")
        if not abs(self.L - self.S) <= self.J <= self.L + self.S:
            raise CatalogError(f"level {self.key}: J={self.J} inconsistent with term {term}")

    @property
    def key(self):
        return level_key(self.config, self.term, self.J)

    @property
    def parity(self):
        return int(self.L) % 2

    def to_dict(self):
        return {
            "config": self.config,
            "term": self.term,
            "J": self.J,
            "energy_hz": self.energy_hz,
            "hyperfine_a_hz": self.hyperfine_a_hz,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            config=data.get("config", ""),
            term=data.get("term", ""),
            J=data.get("J", 0.0),
            energy_hz=data.get("energy_hz", 0.0),
            hyperfine_a_hz=data.get("hyperfine_a_hz"),
        )

    def __repr__(self):
        return f"LevelRecord({self.key}, {self.energy_hz:.6e} Hz)"


class LineRecord:
    """
    Class representing an electric-dipole line between two levels

    The line strength is |<J||d||J'>|^2 in atomic units and is symmetric in
    the two levels.
    """
    def __init__(self, lower, upper, strength_au, einstein_a=None):
        self.lower = lower
        self.upper = upper
        self.strength_au = float(strength_au)
        self.einstein_a = None if einstein_a is None else float(einstein_a)

        if not self.strength_au >= 0:
            raise CatalogError(f"line {lower.key} -> {upper.key} has negative line strength")
        if self.einstein_a is not None and not self.einstein_a >= 0:
            raise CatalogError(f"line {lower.key} -> {upper.key} has negative Einstein A")

    @property
    def frequency_hz(self):
        return self.upper.energy_hz - self.lower.energy_hz

    def other(self, level):
        """The level at the opposite end of the line from the given one"""
        return self.upper if level is self.lower else self.lower

    def to_dict(self):
        return {
            "lower_key": self.lower.key,
            "upper_key": self.upper.key,
            "strength_au": self.strength_au,
            "einstein_a": self.einstein_a,
        }


class AtomicCatalog:
    """
    Immutable collection of levels and the lines connecting them
    """
    def __init__(self, levels=None, lines=None):
        self._levels = {}
        for level in levels or []:
            if level.key in self._levels:
                raise CatalogError(f"duplicate level key {level.key}")
            self._levels[level.key] = level
        self._lines = tuple(lines or [])
        for line in self._lines:
            for end in (line.lower, line.upper):
                if self._levels.get(end.key) is not end:
                    raise CatalogError(f"line references unknown level {end.key}")

    @property
    def levels(self):
        return tuple(self._levels.values())

    @property
    def lines(self):
        return self._lines

    def __len__(self):
        return len(self._levels) + len(self._lines)

    def level(self, key):
        """
        Look up a level by key

        Args:
            key (str): Level key such as '1s2s:3S:1'

        Returns:
            LevelRecord: The matching level
        """
        try:
            return self._levels[key]
        except KeyError:
            raise CatalogError(f"level {key} is not in the catalog") from None

    def lines_of(self, level):
        """All lines that start or end on the given level"""
        return [line for line in self._lines if line.lower is level or line.upper is level]

    def decays_of(self, upper):
        """Lines whose upper level is the given one"""
        return [line for line in self._lines if line.upper is upper]

    def to_dict(self):
        return {
            "levels": [level.to_dict() for level in self.levels],
            "lines": [line.to_dict() for line in self._lines],
        }

    @classmethod
    def from_dict(cls, data):
        levels = [LevelRecord.from_dict(item) for item in data.get("levels", [])]
        by_key = {level.key: level for level in levels}
        lines = []
        for item in data.get("lines", []):
            try:
                lower = by_key[item["lower_key"]]
                upper = by_key[item["upper_key"]]
            except KeyError as exc:
                raise CatalogError(f"dangling level reference {exc.args[0]}") from None
            lines.append(LineRecord(lower, upper, item["strength_au"], item.get("einstein_a")))
        return cls(levels, lines)
