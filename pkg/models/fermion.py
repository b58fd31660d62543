from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from utils.errors import DomainError

MAX_MODES = 14
SPINS = ("up", "down")
CHECK_TOLERANCE = 1e-10


class FockSpace:
    """
    Class representing the Fock space of L fermionic modes

    Basis states are occupation bit strings with mode 0 as the most
    significant bit; ``labels`` carry (site, spin/orbital) metadata in mode
    order.
    """
    def __init__(self, labels):
        if isinstance(labels, int):
            labels = list(range(labels))
        labels = list(labels)
        if not 1 <= len(labels) <= MAX_MODES:
            raise DomainError(f"Fock space needs 1 to {MAX_MODES} modes", modes=len(labels))
        if len(set(labels)) != len(labels):
            raise DomainError("mode labels must be unique")
        self.labels = labels

    @classmethod
    def spinful(cls, sites, ordering="interleaved", orbitals=None):
        """
        Modes (site, [orbital,] spin)

        'interleaved' puts the two spins of a site next to each other;
        'spin-block' puts all spin-up modes first, the way spin is encoded in
        trap location.
        """
        orbitals = list(orbitals) if orbitals is not None else [None]
        cells = [(site, orbital) for site in range(sites) for orbital in orbitals]

        def label(cell, spin):
            site, orbital = cell
            return (site, spin) if orbital is None else (site, orbital, spin)

        if ordering == "interleaved":
            labels = [label(cell, spin) for cell in cells for spin in SPINS]
        elif ordering == "spin-block":
            labels = [label(cell, spin) for spin in SPINS for cell in cells]
        else:
            raise DomainError(f"unknown mode ordering '{ordering}'")
        return cls(labels)

    @property
    def L(self):
        return len(self.labels)

    @property
    def dimension(self):
        return 2**self.L

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise DomainError(f"no mode labelled {label!r}") from None

    @cached_property
    def occupations(self):
        """(dimension, L) array of 0/1 occupations"""
        states = np.arange(self.dimension)[:, None]
        shifts = self.L - 1 - np.arange(self.L)[None, :]
        return ((states >> shifts) & 1).astype(np.int8)

    def basis_index(self, occupied):
        """Index of the basis state with the given modes (labels or indices) occupied"""
        index = 0
        for mode in occupied:
            position = mode if isinstance(mode, (int, np.integer)) and mode not in self.labels else self.index(mode)
            index |= 1 << (self.L - 1 - position)
        return index

    def basis_state(self, occupied):
        state = np.zeros(self.dimension, dtype=complex)
        state[self.basis_index(occupied)] = 1.0
        return state

    def sector(self, particles):
        """Basis indices with the given total particle number"""
        return np.flatnonzero(self.occupations.sum(axis=1) == particles)

    def to_dict(self):
        return {"L": self.L, "labels": [list(label) if isinstance(label, tuple) else label for label in self.labels]}


class ManyBodyOperator:
    """
    Class representing a sparse operator on a Fock space

    Hermitian and unitary flags are verified on construction unless ``check``
    is off, which hot loops use for gates whose form guarantees the property.
    """
    def __init__(self, matrix, hermitian=False, unitary=False, name="", check=True):
        self.matrix = sp.csr_matrix(matrix, dtype=complex)
        self.name = name
        self.hermitian = hermitian
        self.unitary = unitary
        if not check:
            return
        if hermitian and self.hermiticity_error() > CHECK_TOLERANCE * max(1.0, spla.norm(self.matrix)):
            raise DomainError(f"operator {name or ''} is not Hermitian".replace("  ", " "),
                              error=self.hermiticity_error())
        if unitary and self.unitarity_error() > CHECK_TOLERANCE:
            raise DomainError(f"operator {name or ''} is not unitary".replace("  ", " "),
                              error=self.unitarity_error())

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def hermiticity_error(self):
        return float(spla.norm(self.matrix - self.matrix.getH()))

    def unitarity_error(self):
        identity = sp.identity(self.dimension, format="csr")
        return float(spla.norm(self.matrix.getH() @ self.matrix - identity))

    def dagger(self):
        return ManyBodyOperator(self.matrix.getH(), self.hermitian, self.unitary, f"{self.name}^dag", check=False)

    def apply(self, state):
        return self.matrix @ np.asarray(state, dtype=complex)

    def expectation(self, state):
        state = np.asarray(state, dtype=complex)
        return complex(np.vdot(state, self.matrix @ state))

    def commutator_norm(self, other):
        other = other.matrix if isinstance(other, ManyBodyOperator) else sp.csr_matrix(other)
        return float(spla.norm(self.matrix @ other - other @ self.matrix))

    def __matmul__(self, other):
        if isinstance(other, ManyBodyOperator):
            return ManyBodyOperator(self.matrix @ other.matrix, unitary=self.unitary and other.unitary,
                                    name=f"{self.name}*{other.name}", check=False)
        return self.apply(other)

    def to_dense(self):
        return self.matrix.toarray()


class FermionModel:
    """
    Class representing a number-conserving fermion Hamiltonian

    H = sum (t_ij c_i^dag c_j + h.c.) + sum V_ij n_i n_j + sum eps_i n_i
        + sum t1_ij c_i^dag c_j + sum t2_ijkl c_i^dag c_j^dag c_k c_l

    ``hopping`` keys are mode pairs (i < j); ``one_body`` and ``two_body``
    hold the molecular coefficient tensors without the h.c. completion.
    """
    def __init__(self, space, hopping=None, density=None, onsite=None, one_body=None, two_body=None, name=""):
        self.space = space
        self.hopping = dict(hopping or {})
        self.density = dict(density or {})
        self.onsite = dict(onsite or {})
        self.one_body = None if one_body is None else np.asarray(one_body, dtype=complex)
        self.two_body = None if two_body is None else np.asarray(two_body, dtype=complex)
        self.name = name
        for i, j in list(self.hopping) + list(self.density):
            if i == j or not (0 <= i < space.L and 0 <= j < space.L):
                raise DomainError(f"invalid mode pair ({i}, {j})", model=name)

    def add_hopping(self, i, j, value):
        if i == j:
            raise DomainError("hopping needs two different modes", mode=i)
        if i > j:
            i, j, value = j, i, np.conj(value)
        self.hopping[(i, j)] = self.hopping.get((i, j), 0.0) + value

    def add_density(self, i, j, value):
        if i == j:
            self.onsite[i] = self.onsite.get(i, 0.0) + value
            return
        key = (min(i, j), max(i, j))
        self.density[key] = self.density.get(key, 0.0) + value

    def add_onsite(self, i, value):
        self.onsite[i] = self.onsite.get(i, 0.0) + value

    def to_dict(self):
        return {
            "name": self.name,
            "space": self.space.to_dict(),
            "hopping": [[i, j, complex(v).real, complex(v).imag] for (i, j), v in self.hopping.items()],
            "density": [[i, j, float(v)] for (i, j), v in self.density.items()],
            "onsite": [[i, float(v)] for i, v in self.onsite.items()],
            "molecular": self.one_body is not None or self.two_body is not None,
        }


class GateSchedule:
    """
    Class representing an ordered list of gate layers

    Each layer is a list of (kind, modes, params) tuples acting on disjoint
    modes. Kinds are 'tun' and 'fswap' (tunneling zone), 'int' (interaction
    zone) and 'phase' (single-mode, applied in place).
    """
    def __init__(self, layers=None):
        self.layers = []
        for layer in layers or []:
            self.add_layer(layer)

    def add_layer(self, gates):
        used = set()
        for _, modes, _ in gates:
            if used.intersection(modes):
                raise DomainError(f"gates in one layer overlap on modes {sorted(used.intersection(modes))}")
            used.update(modes)
        self.layers.append(list(gates))

    def extend(self, other):
        for layer in other.layers:
            self.add_layer(layer)

    def zone(self, index):
        kinds = {kind for kind, _, _ in self.layers[index]}
        if kinds == {"int"}:
            return "interaction"
        if kinds <= {"tun", "fswap"}:
            return "tunneling"
        if kinds == {"phase"}:
            return "local"
        return "mixed"

    @property
    def gate_count(self):
        return sum(len(layer) for layer in self.layers)

    @property
    def two_mode_gate_count(self):
        return sum(1 for layer in self.layers for _, modes, _ in layer if len(modes) == 2)

    @property
    def rearrangements(self):
        """One rearrangement per layer that brings atoms into a gate zone"""
        return sum(1 for index in range(len(self.layers)) if self.zone(index) != "local")

    def to_dict(self):
        return {
            "layers": [
                [{"kind": kind, "modes": list(modes), "params": list(params)} for kind, modes, params in layer]
                for layer in self.layers
            ]
        }

    @classmethod
    def from_dict(cls, data):
        return cls([
            [(gate["kind"], tuple(gate["modes"]), tuple(gate["params"])) for gate in layer]
            for layer in data.get("layers", [])
        ])
