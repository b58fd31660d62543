"""
Hyperfine-Zeeman Hamiltonians and Breit-Rabi maps.

Three schemes are supported:

- ``mL-mS-mI``: general uncoupled basis with fine-structure, orbital and spin
  hyperfine couplings (He 2 3S, Li 2S and 2P)
- ``mI-mJ``: single fine-structure level in the intermediate-field basis
  (Na 3S and 3P)
- ``effective-He-2P``: the He-3 1s2p effective Hamiltonian in the
  |mL, ms1, ms2, mI> basis including the 2 1P1 level

All energies are in Hz and fields in gauss.
"""
import logging

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from models.results import ZeemanMap
from models.states import SpinBasis
from utils.angular import clebsch_gordan, reduced_spherical_harmonic, wigner3j
from utils.constants import MU_B_HZ_PER_G
from utils.errors import ConfigError, ConvergenceError, DomainError, NoRootError

logger = logging.getLogger(__name__)

SCHEMES = ("mL-mS-mI", "mI-mJ", "effective-He-2P")

# He-3 nuclear g-factor in units of the Bohr magneton (H = mu_B B g_I m_I)
G_I_HE3 = 2.3174824e-3
G_S = 2.0023193043737
G_L_HE3 = 1 - 1 / (3.0160293201 * 1822.888486)

HE3_2S_SPLITTING = 6.739701177e9
QUOTED_MAGIC_FIELD_G = 803.5

SPECIES_CONSTANTS = {
    "he3-2s3S": {
        "scheme": "mL-mS-mI", "L": 0, "S": 1, "I": 0.5,
        "c_f": 0.0, "c_hf1": 0.0, "c_hf2": -HE3_2S_SPLITTING / 1.5,
        "g_L": G_L_HE3, "g_S": 2.0022432, "g_I": G_I_HE3,
    },
    "he3-2p3P": {
        "scheme": "effective-He-2P",
        "C": -4283.890e6, "C_prime": 1.004 * -4283.890e6, "D": -28.128e6,
        "E": -28.128e6 / -3.945, "E_prime": -28.128e6 / -3.945,
        # (S, J) -> energy relative to 2 3P2
        "fine_structure": {(1, 2): 0.0, (1, 1): 2.291175e9, (1, 0): 31.908126e9, (0, 1): 61.4e12},
        "g_L": G_L_HE3, "g_S": G_S, "g_I": G_I_HE3,
        # states above this zero-field energy (Hz) belong to 2 1P1
        "triplet_cutoff": 1e12,
    },
    "li6-2s": {
        "scheme": "mL-mS-mI", "L": 0, "S": 0.5, "I": 1,
        "c_f": 0.0, "c_hf1": 0.0, "c_hf2": 152.1368407e6,
        "g_L": 0.99999587, "g_S": G_S, "g_I": -0.0004476540,
    },
    "li6-2p": {
        "scheme": "mL-mS-mI", "L": 1, "S": 0.5, "I": 1,
        "c_f": 10.053044e9 / 1.5, "c_hf1": 17.386e6, "c_hf2": -1.155e6,
        "g_L": 0.99999587, "g_S": G_S, "g_I": -0.0004476540,
    },
    "na23-3s": {
        "scheme": "mI-mJ", "I": 1.5, "J": 0.5, "L": 0, "S": 0.5,
        "a_hf": 885.81306440e6, "b_hf": 0.0, "g_J": 2.00229600, "g_I": -0.00080461080,
    },
    "na23-3p1/2": {
        "scheme": "mI-mJ", "I": 1.5, "J": 0.5, "L": 1, "S": 0.5, "offset": 0.0,
        "a_hf": 94.44e6, "b_hf": 0.0, "g_J": 0.66581, "g_I": -0.00080461080,
    },
    "na23-3p3/2": {
        "scheme": "mI-mJ", "I": 1.5, "J": 1.5, "L": 1, "S": 0.5, "offset": 515.52236e9,
        "a_hf": 18.534e6, "b_hf": 2.724e6, "g_J": 1.33420, "g_I": -0.00080461080,
    },
}

REQUIRED = {
    "mL-mS-mI": ("L", "S", "I", "c_f", "c_hf1", "c_hf2", "g_L", "g_S", "g_I"),
    "mI-mJ": ("I", "J", "a_hf", "g_J", "g_I"),
    "effective-He-2P": ("C", "C_prime", "D", "E", "E_prime", "fine_structure", "g_L", "g_S", "g_I"),
}


def spin_matrices(j):
    """
    Angular momentum matrices in the |j m> basis, m from +j down to -j

    Args:
        j (float): Spin

    Returns:
        tuple: (jx, jy, jz, j_plus, j_minus) as complex ndarrays
    """
    ms = np.arange(j, -j - 1, -1.0)
    dim = len(ms)
    jp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        m = ms[k]
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m * (m + 1))
    jm = jp.conj().T
    jz = np.diag(ms).astype(complex)
    return 0.5 * (jp + jm), -0.5j * (jp - jm), jz, jp, jm


def _embed(ops, dims):
    # ops: {position: matrix}; identity elsewhere
    out = np.eye(1, dtype=complex)
    for position, dim in enumerate(dims):
        out = np.kron(out, ops.get(position, np.eye(dim)))
    return out


class _Operators:
    """Vector operators of every spin of a product basis"""

    def __init__(self, spins):
        self.dims = [int(round(2 * s)) + 1 for s in spins]
        self.vectors = []
        for position, s in enumerate(spins):
            jx, jy, jz, _, _ = spin_matrices(s)
            self.vectors.append([_embed({position: m}, self.dims) for m in (jx, jy, jz)])

    def dot(self, a, b):
        return sum(self.vectors[a][k] @ self.vectors[b][k] for k in range(3))

    def z(self, a):
        return self.vectors[a][2]

    def spherical(self, vector):
        x, y, z = vector
        return {1: -(x + 1j * y) / np.sqrt(2), 0: z, -1: (x - 1j * y) / np.sqrt(2)}

    def total(self, positions):
        return [sum(self.vectors[p][k] for p in positions) for k in range(3)]


def _check(scheme, constants):
    if scheme not in SCHEMES:
        raise DomainError(f"unknown Zeeman scheme '{scheme}'")
    missing = [key for key in REQUIRED[scheme] if key not in constants]
    if missing:
        raise ConfigError(f"constants for scheme {scheme} are missing {missing}")


def make_basis(scheme, constants):
    """SpinBasis of a scheme for the given constants"""
    _check(scheme, constants)
    if scheme == "mL-mS-mI":
        return SpinBasis(scheme, (constants["L"], constants["S"], constants["I"]), ("L", "S", "I"))
    if scheme == "mI-mJ":
        return SpinBasis(scheme, (constants["I"], constants["J"]), ("I", "J"))
    return SpinBasis(scheme, (1, 0.5, 0.5, 0.5), ("L", "s1", "s2", "I"))


def _general(constants):
    ops = _Operators((constants["L"], constants["S"], constants["I"]))
    h = (constants["c_f"] * ops.dot(0, 1) + constants["c_hf1"] * ops.dot(0, 2) + constants["c_hf2"] * ops.dot(1, 2))
    hz = MU_B_HZ_PER_G * (constants["g_L"] * ops.z(0) + constants["g_S"] * ops.z(1) + constants["g_I"] * ops.z(2))
    return h + constants.get("offset", 0.0) * np.eye(h.shape[0]), hz, ops.total((0, 1, 2))


def _intermediate(constants):
    I, J = constants["I"], constants["J"]
    ops = _Operators((I, J))
    ij = ops.dot(0, 1)
    ident = np.eye(ij.shape[0])
    h = constants["a_hf"] * ij
    b_hf = constants.get("b_hf", 0.0)
    if b_hf and I >= 1 and J >= 1:
        h = h + b_hf * (3 * ij @ ij + 1.5 * ij - I * (I + 1) * J * (J + 1) * ident) / (2 * I * (2 * I - 1) * J * (2 * J - 1))
    hz = MU_B_HZ_PER_G * (constants["g_J"] * ops.z(1) + constants["g_I"] * ops.z(0))
    return h + constants.get("offset", 0.0) * ident, hz, ops.total((0, 1))


def _c2_matrix(q):
    # <1 m|C^2_q|1 m'> on the p-electron orbital space, m = +1, 0, -1
    reduced = reduced_spherical_harmonic(1, 2, 1)
    ms = (1, 0, -1)
    out = np.zeros((3, 3), dtype=complex)
    for a, m in enumerate(ms):
        for b, mp in enumerate(ms):
            sign = -1.0 if (1 - m) % 2 else 1.0
            out[a, b] = sign * wigner3j(1, 2, 1, -m, q, mp) * reduced
    return out


def _rank1_coupling(ops, spin_vector, nucleus):
    # I . {X (x) C^2}^1 with C^2 acting on the orbital factor
    dims = ops.dims
    x_sph = ops.spherical(spin_vector)
    i_sph = ops.spherical(ops.vectors[nucleus])
    c2 = {q: _embed({0: _c2_matrix(q)}, dims) for q in range(-2, 3)}
    out = np.zeros_like(x_sph[0])
    for q in (-1, 0, 1):
        component = np.zeros_like(out)
        for q1 in (-1, 0, 1):
            q2 = q - q1
            if abs(q2) > 2:
                continue
            cg = clebsch_gordan(1, q1, 2, q2, 1, q)
            if cg:
                component = component + cg * x_sph[q1] @ c2[q2]
        sign = -1.0 if q % 2 else 1.0
        out = out + sign * i_sph[-q] @ component
    return out


def _effective_2p(constants):
    ops = _Operators((1, 0.5, 0.5, 0.5))
    L, s1, s2, nuc = 0, 1, 2, 3
    S = ops.total((s1, s2))
    K = [ops.vectors[s1][k] - ops.vectors[s2][k] for k in range(3)]
    I = ops.vectors[nuc]
    dim = S[0].shape[0]
    ident = np.eye(dim)

    def dot(a, b):
        return sum(a[k] @ b[k] for k in range(3))

    S2 = dot(S, S)
    J = [ops.vectors[L][k] + S[k] for k in range(3)]
    J2 = dot(J, J)
    p_triplet = S2 / 2.0
    p_singlet = ident - p_triplet
    p_j = {
        2: J2 @ (J2 - 2 * ident) / 24.0,
        1: -J2 @ (J2 - 6 * ident) / 8.0,
        0: (J2 - 2 * ident) @ (J2 - 6 * ident) / 12.0,
    }
    h = np.zeros((dim, dim), dtype=complex)
    for (spin, j), energy in constants["fine_structure"].items():
        projector = p_triplet if spin == 1 else p_singlet
        h = h + energy * projector @ p_j[j]

    h = h + constants["C"] * dot(I, S) + constants["C_prime"] * dot(I, K) + constants["D"] * dot(I, ops.vectors[L])
    tensor = 2 * np.sqrt(10)
    h = h + tensor * constants["E"] * _rank1_coupling(ops, S, nuc)
    h = h + tensor * constants["E_prime"] * _rank1_coupling(ops, K, nuc)
    hz = MU_B_HZ_PER_G * (constants["g_L"] * ops.z(L) + constants["g_S"] * S[2] + constants["g_I"] * ops.z(nuc))
    return h, hz, ops.total((0, 1, 2, 3))


BUILDERS = {
    "mL-mS-mI": _general,
    "mI-mJ": _intermediate,
    "effective-He-2P": _effective_2p,
}


def resolve_constants(species_or_constants):
    """
    Look up a named constant set or pass a dict through

    Args:
        species_or_constants (str or dict): Key of SPECIES_CONSTANTS or a
            constants dict carrying a 'scheme' entry

    Returns:
        tuple: (scheme, constants)
    """
    if isinstance(species_or_constants, str):
        if species_or_constants not in SPECIES_CONSTANTS:
            raise ConfigError(f"no Zeeman constants for '{species_or_constants}'")
        constants = SPECIES_CONSTANTS[species_or_constants]
    else:
        constants = dict(species_or_constants)
    if "scheme" not in constants:
        raise ConfigError("constants need a 'scheme' entry")
    return constants["scheme"], constants


def build_hamiltonian(scheme, constants, B):
    """
    Hyperfine-Zeeman Hamiltonian at a magnetic field

    Args:
        scheme (str): One of SCHEMES
        constants (dict): Coupling constants (Hz) and g-factors
        B (float): Magnetic field in G

    Returns:
        ndarray: Hermitian matrix in Hz over make_basis(scheme, constants)
    """
    _check(scheme, constants)
    h0, hz, _ = BUILDERS[scheme](constants)
    return h0 + B * hz


def _fix_gauge(vectors):
    # largest component of every eigenvector made real and positive
    for k in range(vectors.shape[1]):
        column = vectors[:, k]
        pivot = column[np.argmax(np.abs(column))]
        vectors[:, k] = column * (abs(pivot) / pivot)
    return vectors


def _fraction(value):
    doubled = int(round(2 * value))
    return str(doubled // 2) if doubled % 2 == 0 else f"{doubled}/2"


class ZeemanSystem:
    """
    Spin Hamiltonian of one manifold split into conserved-M blocks

    Adiabatic branches are identified by the zero-field state they connect to;
    inside an M block there are no true crossings, so the energy rank within
    the block is the adiabatic index.
    """

    def __init__(self, species_or_constants):
        self.scheme, self.constants = resolve_constants(species_or_constants)
        _check(self.scheme, self.constants)
        self.h0, self.hz, f_vector = BUILDERS[self.scheme](self.constants)
        self.basis = make_basis(self.scheme, self.constants)
        self.f2 = sum(component @ component for component in f_vector)
        self.fz = f_vector[2]
        total_m = np.round(2 * np.real(np.diag(self.fz))).astype(int)
        self.blocks = {m2 / 2.0: np.flatnonzero(total_m == m2) for m2 in sorted(set(total_m))}
        self._label_zero_field()

    @property
    def dim(self):
        return self.h0.shape[0]

    def hamiltonian(self, B):
        return self.h0 + B * self.hz

    def block_eigen(self, B, M):
        """Sorted eigenvalues and gauge-fixed eigenvectors of one M block"""
        idx = self.blocks[M]
        sub = self.hamiltonian(B)[np.ix_(idx, idx)]
        energies, vectors = np.linalg.eigh(sub)
        return energies, _fix_gauge(vectors)

    def _label_zero_field(self):
        entries = []
        for M, idx in self.blocks.items():
            energies, vectors = self.block_eigen(0.0, M)
            f2_block = self.f2[np.ix_(idx, idx)]
            for rank in range(len(idx)):
                v = vectors[:, rank]
                f2 = float(np.real(v.conj() @ f2_block @ v))
                F = 0.5 * (np.sqrt(1 + 4 * max(f2, 0.0)) - 1)
                entries.append((energies[rank], F, M, rank))
        entries.sort(key=lambda item: (round(item[0], 3), item[2]))
        counts = {}
        self.labels = []
        self.slots = {}
        for energy, F, M, rank in entries:
            base = f"F={_fraction(F)},mF={_fraction(M)}"
            counts[base] = counts.get(base, 0) + 1
            label = base if counts[base] == 1 else f"{base}#{counts[base]}"
            self.labels.append(label)
            self.slots[label] = (M, rank)
        duplicates = {base for base, count in counts.items() if count > 1}
        if duplicates:
            # first occurrences also get an index once a label repeats
            for i, label in enumerate(self.labels):
                if label in duplicates:
                    self.slots[f"{label}#1"] = self.slots.pop(label)
                    self.labels[i] = f"{label}#1"

    def energy(self, label, B):
        """Energy (Hz) of an adiabatic branch at field B"""
        if label not in self.slots:
            raise DomainError(f"unknown state label '{label}'; known: {self.labels}")
        M, rank = self.slots[label]
        energies, _ = self.block_eigen(B, M)
        return energies[rank]

    def eigensystem(self, B):
        """
        Energies and eigenvectors at field B in zero-field label order

        Returns:
            tuple: (energies ndarray, vectors ndarray with one column per label)
        """
        energies = np.zeros(self.dim)
        vectors = np.zeros((self.dim, self.dim), dtype=complex)
        cache = {M: self.block_eigen(B, M) for M in self.blocks}
        for column, label in enumerate(self.labels):
            M, rank = self.slots[label]
            block_e, block_v = cache[M]
            energies[column] = block_e[rank]
            vectors[self.blocks[M], column] = block_v[:, rank]
        return energies, vectors

    def zero_field_energies(self):
        return self.eigensystem(0.0)[0]


def hyperfine_splitting(species_or_constants):
    """Spread (Hz) of the zero-field levels of a manifold"""
    energies = ZeemanSystem(species_or_constants).zero_field_energies()
    return float(np.ptp(energies))


def zeeman_map(species_or_constants, fields, min_overlap=0.5):
    """
    Eigenenergies over a field grid with overlap-based branch tracking

    Args:
        species_or_constants (str or dict): Manifold to diagonalize
        fields (ndarray): Increasing magnetic fields in G
        min_overlap (float): Smallest accepted |<v(B_k)|v(B_k+1)>|^2 for a
            tracked branch

    Returns:
        ZeemanMap: Energies per branch, columns in zero-field energy order
    """
    system = species_or_constants if isinstance(species_or_constants, ZeemanSystem) else ZeemanSystem(species_or_constants)
    fields = np.atleast_1d(np.asarray(fields, dtype=float))
    if fields.size > 1 and np.any(np.diff(fields) <= 0):
        raise DomainError("field grid must be strictly increasing")

    previous = {M: system.block_eigen(0.0, M)[1] for M in system.blocks}
    order = {M: np.arange(len(idx)) for M, idx in system.blocks.items()}

    def advance(B, record):
        for M in system.blocks:
            energies, vectors = system.block_eigen(B, M)
            overlap = np.abs(previous[M].conj().T @ vectors) ** 2
            rows, cols = linear_sum_assignment(-overlap)
            if overlap[rows, cols].min() < min_overlap:
                raise ConvergenceError(f"branch tracking failed near B = {B:.4f} G (mF = {M})", B=float(B))
            previous[M] = vectors[:, cols]
            order[M] = cols
            if record is not None:
                for label_column, label in enumerate(system.labels):
                    label_m, rank = system.slots[label]
                    if label_m == M:
                        record[label_column] = energies[cols[rank]]

    if fields[0] != 0.0:
        for B in np.linspace(0.0, fields[0], 41)[1:-1]:
            advance(B, None)
    energies = np.zeros((fields.size, system.dim))
    for k, B in enumerate(fields):
        advance(B, energies[k])
    logger.info("Zeeman map of %d branches over %d fields", system.dim, fields.size)
    return ZeemanMap(fields, energies, system.labels, scheme=system.scheme)


def find_magic_field(label_a, label_b, bracket, species_or_constants="he3-2s3S", step=0.01, tolerance=1.0):
    """
    Field at which the differential Zeeman shift of two states is stationary

    Args:
        label_a (str): Zero-field label of the first state, e.g. 'F=3/2,mF=-1/2'
        label_b (str): Zero-field label of the second state
        bracket (tuple): (B_min, B_max) in G
        species_or_constants (str or dict): Manifold
        step (float): Central-difference step in G
        tolerance (float): Largest accepted |d(E_a - E_b)/dB| in Hz/G

    Returns:
        dict: B_G, slope_Hz_per_G and differential_Hz at the solution
    """
    if label_a == label_b:
        raise DomainError("magic field of a state with itself is not an isolated stationary point")
    system = species_or_constants if isinstance(species_or_constants, ZeemanSystem) else ZeemanSystem(species_or_constants)

    def differential(B):
        return system.energy(label_a, B) - system.energy(label_b, B)

    def slope(B):
        return (differential(B + step) - differential(B - step)) / (2 * step)

    lo, hi = sorted(bracket)
    if np.sign(slope(lo)) == np.sign(slope(hi)):
        raise NoRootError(f"differential Zeeman shift has no stationary point in [{lo}, {hi}] G")
    result = minimize_scalar(lambda B: abs(slope(B)), bounds=(lo, hi), method="bounded",
                             options={"xatol": 1e-7, "maxiter": 500})
    b_magic = float(result.x)
    final_slope = slope(b_magic)
    if abs(final_slope) > tolerance:
        raise ConvergenceError(f"stationary point not resolved: slope {final_slope:.3g} Hz/G at {b_magic:.4f} G")
    logger.info("magic field for %s / %s: %.4f G", label_a, label_b, b_magic)
    if abs(b_magic - QUOTED_MAGIC_FIELD_G) > 0.5 and lo < QUOTED_MAGIC_FIELD_G < hi:
        logger.warning("magic field %.2f G is %.2f G from the quoted %.1f G", b_magic,
                       b_magic - QUOTED_MAGIC_FIELD_G, QUOTED_MAGIC_FIELD_G)
    return {"B_G": b_magic, "slope_Hz_per_G": final_slope, "differential_Hz": differential(b_magic)}


def breit_rabi_energy(m, B, a_hf, k, g_k, g_half, upper=True):
    """
    Analytic Breit-Rabi energy for a spin-1/2 coupled to a spin k

    Args:
        m (float): Total projection
        B (float): Field in G
        a_hf (float): Hyperfine constant A in Hz (H = A k.s)
        k (float): The other angular momentum
        g_k (float): g-factor of k
        g_half (float): g-factor of the spin 1/2
        upper (bool): Branch that connects to F = k + 1/2

    Returns:
        float: Energy in Hz
    """
    splitting = a_hf * (k + 0.5)
    x = (g_half - g_k) * MU_B_HZ_PER_G * B / splitting
    base = -splitting / (2 * (2 * k + 1)) + g_k * MU_B_HZ_PER_G * m * B
    if abs(m) == k + 0.5:
        # stretched states are exact product states
        sign = 1.0 if m > 0 else -1.0
        return a_hf * k / 2 + MU_B_HZ_PER_G * B * sign * (g_k * k + g_half / 2)
    root = np.sqrt(1 + 4 * m * x / (2 * k + 1) + x**2)
    return base + (0.5 if upper else -0.5) * splitting * root
