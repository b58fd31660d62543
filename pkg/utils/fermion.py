"""
Statevector simulator for the tweezer fermion gate set.

Mode operators are Jordan-Wigner strings over the occupation basis (mode 0
is the most significant bit). Gates are the native tunneling gate
exp{-i[(th1/2)(e^{-i th2} c_i^dag c_j + h.c.) + (th3/2)(n_i - n_j)]} and the
interaction gate exp(-i th n_i n_j), plus the single-mode phase
exp(-i phi n_i). Everything conserves particle number.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache, reduce
from pathlib import Path

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy.linalg import eigh, eigvalsh
from scipy.optimize import minimize
from scipy.sparse.linalg import eigsh, expm_multiply

from models.fermion import MAX_MODES, FermionModel, FockSpace, GateSchedule, ManyBodyOperator
from utils.errors import ConfigError, ConvergenceError, DomainError
from utils.fitting import loglog_fit

logger = logging.getLogger(__name__)

ANTICOMMUTATOR_TOLERANCE = 1e-12
NUMBER_TOLERANCE = 1e-10
TROTTER_STEPS = (32, 64, 128, 256)
VQE_MAX_MODES = 8

_LOWER = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
_PARITY = sp.csr_matrix(np.diag([1.0, -1.0]))
_EYE = sp.identity(2, format="csr")


@lru_cache(maxsize=None)
def _jordan_wigner(L):
    lowering = []
    for mode in range(L):
        factors = [_PARITY] * mode + [_LOWER] + [_EYE] * (L - mode - 1)
        lowering.append(reduce(lambda a, b: sp.kron(a, b, format="csr"), factors).astype(complex))
    raising = [op.getH().tocsr() for op in lowering]
    return {
        "c": lowering,
        "cdag": raising,
        "n": [(up @ down).tocsr() for up, down in zip(raising, lowering)],
    }


def mode_operators(space):
    """
    Annihilation, creation and number operators of every mode

    Args:
        space (FockSpace): Mode space

    Returns:
        dict: lists of sparse matrices under ``c``, ``cdag`` and ``n``, shared
        between calls and not to be modified
    """
    L = space.L if isinstance(space, FockSpace) else int(space)
    if not 1 <= L <= MAX_MODES:
        raise DomainError(f"mode operators need 1 to {MAX_MODES} modes", modes=L)
    return _jordan_wigner(L)


def anticommutator_check(space):
    """
    Largest deviation from the canonical anticommutation relations

    Returns:
        float: max over all pairs of ||{c_i, c_j^dag} - delta_ij|| and ||{c_i, c_j}||
    """
    ops = mode_operators(space)
    L = len(ops["c"])
    identity = sp.identity(2**L, format="csr")
    worst = 0.0
    for i in range(L):
        for j in range(L):
            mixed = ops["c"][i] @ ops["cdag"][j] + ops["cdag"][j] @ ops["c"][i]
            if i == j:
                mixed = mixed - identity
            pure = ops["c"][i] @ ops["c"][j] + ops["c"][j] @ ops["c"][i]
            worst = max(worst, abs(mixed).max(), abs(pure).max())
    if worst > ANTICOMMUTATOR_TOLERANCE:
        logger.error("Anticommutation relations violated by %.3e", worst)
    return float(worst)


def number_operator(space):
    return ManyBodyOperator(sp.diags(space.occupations.sum(axis=1).astype(complex)), hermitian=True, name="N")


def _check_pair(space, i, j):
    if i == j:
        raise DomainError("two-mode gates need two different modes", mode=i)
    for mode in (i, j):
        if not 0 <= mode < space.L:
            raise DomainError(f"mode {mode} outside a space of {space.L} modes")


def u_tun(space, i, j, theta1, theta2=0.0, theta3=0.0, check=True):
    """
    Native tunneling gate between modes i and j

    The generator A squares to r^2 P1, where P1 projects on states with
    exactly one of the two modes occupied and r = hypot(th1/2, th3/2), so
    exp(-iA) = (1 - P1) + cos(r) P1 - i sin(r)/r A in closed form.

    Args:
        space (FockSpace): Mode space
        i (int): First mode
        j (int): Second mode
        theta1 (float): Tunneling angle
        theta2 (float): Tunneling phase
        theta3 (float): Relative on-site potential angle
        check (bool): Verify unitarity

    Returns:
        ManyBodyOperator: The gate
    """
    _check_pair(space, i, j)
    ops = mode_operators(space)
    hop = np.exp(-1j * theta2) * (ops["cdag"][i] @ ops["c"][j])
    generator = 0.5 * theta1 * (hop + hop.getH()) + 0.5 * theta3 * (ops["n"][i] - ops["n"][j])

    occ = space.occupations
    single = (occ[:, i] + occ[:, j] - 2 * occ[:, i] * occ[:, j]).astype(float)
    r = math.hypot(0.5 * theta1, 0.5 * theta3)
    diagonal = 1.0 - single + math.cos(r) * single
    matrix = sp.diags(diagonal.astype(complex)) - 1j * np.sinc(r / np.pi) * generator
    return ManyBodyOperator(matrix, unitary=True, name=f"tun({i},{j})", check=check)


def u_int(space, i, j, theta, check=True):
    """Interaction gate exp(-i theta n_i n_j), diagonal in the occupation basis"""
    _check_pair(space, i, j)
    occ = space.occupations
    phases = np.exp(-1j * theta * occ[:, i] * occ[:, j])
    return ManyBodyOperator(sp.diags(phases), unitary=True, name=f"int({i},{j})", check=check)


def phase_gate(space, i, phi, check=True):
    """Single-mode phase exp(-i phi n_i)"""
    if not 0 <= i < space.L:
        raise DomainError(f"mode {i} outside a space of {space.L} modes")
    phases = np.exp(-1j * phi * space.occupations[:, i])
    return ManyBodyOperator(sp.diags(phases), unitary=True, name=f"phase({i})", check=check)


def z_gate(space, i):
    """Z_i = exp(i pi/4 n_i); Z^4 is the fermion parity of the mode, Z^8 = 1"""
    return phase_gate(space, i, -np.pi / 4)


def fswap(space, i, j):
    """
    Fermionic swap

    U_tun(-pi, 0, 0) is i X on the singly occupied block, so it is completed
    to the exchange gate with exp(-i pi/2 n) on both modes: the occupations
    swap and the doubly occupied state picks up -1.
    """
    gate = u_tun(space, i, j, -np.pi) @ phase_gate(space, i, np.pi / 2) @ phase_gate(space, j, np.pi / 2)
    return ManyBodyOperator(gate.matrix, unitary=True, name=f"fswap({i},{j})")


def fswap_printed(space, i, j):
    """
    U_tun(-pi, 0, 0) Z_i Z_j with Z = exp(i pi/4 n)

    This equals fSWAP exp(i 3pi/4 (n_i + n_j)), the exchange gate up to
    a number-dependent phase.
    """
    logger.warning("U_tun(-pi,0,0) Z_i Z_j is fSWAP only up to exp(i 3pi/4 (n_i + n_j))")
    gate = u_tun(space, i, j, -np.pi) @ z_gate(space, i) @ z_gate(space, j)
    return ManyBodyOperator(gate.matrix, unitary=True, name=f"fswap_printed({i},{j})")


def cz(space, i, j):
    """Controlled-Z, -1 on the doubly occupied state"""
    return u_int(space, i, j, np.pi)


def cz_printed(space, i, j):
    """U_int(pi/2), which puts -i rather than -1 on the doubly occupied state"""
    logger.warning("U_int(pi/2) gives phase -i on |11>; cz() uses U_int(pi)")
    return u_int(space, i, j, np.pi / 2)


GATE_BUILDERS = {
    "tun": lambda space, modes, params, check: u_tun(space, *modes, *params, check=check),
    "int": lambda space, modes, params, check: u_int(space, *modes, *params, check=check),
    "phase": lambda space, modes, params, check: phase_gate(space, *modes, *params, check=check),
    "fswap": lambda space, modes, params, check: fswap(space, *modes),
}


def gate_operator(space, kind, modes, params=(), check=True):
    try:
        builder = GATE_BUILDERS[kind]
    except KeyError:
        raise DomainError(f"unknown gate kind '{kind}'", kinds=sorted(GATE_BUILDERS)) from None
    return builder(space, tuple(modes), tuple(params), check)


def apply_schedule(space, schedule, state, cache=None, check=True):
    """
    Apply every layer of a gate schedule to a state

    Args:
        space (FockSpace): Mode space
        schedule (GateSchedule): Layers to apply in order
        state (array): Statevector
        cache (dict): Gate operators keyed by (kind, modes, params), reused across calls
        check (bool): Verify unitarity of newly built gates

    Returns:
        array: Evolved statevector
    """
    cache = {} if cache is None else cache
    state = np.asarray(state, dtype=complex)
    for layer in schedule.layers:
        for kind, modes, params in layer:
            key = (kind, tuple(modes), tuple(params))
            if key not in cache:
                cache[key] = gate_operator(space, kind, modes, params, check=check).matrix
            state = cache[key] @ state
    return state


# Hamiltonians


def fermi_hubbard(sites, t=1.0, U=0.0, t_prime=0.0, mu=0.0, edges=None, nnn=None, ordering="interleaved"):
    """
    Spinful Fermi-Hubbard model with optional next-nearest-neighbor tunneling

    H = -sum_<ij>,s t_ij (c^dag_is c_js + h.c.) - t' sum_<<ij>>,s (...)
        + U sum_i n_iu n_id - mu sum n

    Args:
        sites (int): Number of sites
        t (float): Nearest-neighbor tunneling
        U (float): On-site interaction
        t_prime (float): Next-nearest-neighbor tunneling
        mu (float): Chemical potential
        edges (list): (i, j) or (i, j, t_ij) bonds, open chain by default
        nnn (list): (i, j) next-nearest-neighbor pairs, i to i+2 on the chain by default
        ordering (str): 'interleaved' or 'spin-block' mode order

    Returns:
        FermionModel: The model
    """
    space = FockSpace.spinful(sites, ordering=ordering)
    model = FermionModel(space, name="t-t' model" if t_prime else "Fermi-Hubbard")
    edges = _normalize_edges(edges if edges is not None else [(i, i + 1) for i in range(sites - 1)], t, sites)
    if nnn is None:
        nnn = [(i, i + 2) for i in range(sites - 2)] if t_prime else []
    edges += _normalize_edges(nnn, t_prime, sites) if t_prime else []

    for i, j, amplitude in edges:
        for spin in ("up", "down"):
            model.add_hopping(space.index((i, spin)), space.index((j, spin)), -amplitude)
    for site in range(sites):
        if U:
            model.add_density(space.index((site, "up")), space.index((site, "down")), U)
        if mu:
            for spin in ("up", "down"):
                model.add_onsite(space.index((site, spin)), -mu)
    return model


def multiband_hubbard(sites, hopping, interaction, hybridization=None, mu=0.0, edges=None, orbitals=None,
                      ordering="interleaved"):
    """
    Multi-band Fermi-Hubbard model

    Args:
        sites (int): Number of sites
        hopping (array): (bands, bands) inter-site tunneling t^(mm') on every edge
        interaction (array): (bands, bands) on-site U^(mm'); the diagonal couples
            opposite spins of one band, off-diagonal entries all spin pairs
        hybridization (array): (bands, bands) on-site inter-band tunneling
        mu (float): Chemical potential
        edges (list): Bonds, open chain by default
        orbitals (list): Band labels

    Returns:
        FermionModel: The model
    """
    hopping = np.atleast_2d(np.asarray(hopping, dtype=complex))
    interaction = np.atleast_2d(np.asarray(interaction, dtype=float))
    bands = hopping.shape[0]
    if hopping.shape != (bands, bands) or interaction.shape != (bands, bands):
        raise DomainError("hopping and interaction must be square band matrices of the same size")
    if not np.allclose(interaction, interaction.T):
        raise DomainError("interaction matrix must be symmetric")
    orbitals = list(orbitals) if orbitals is not None else list(range(bands))
    space = FockSpace.spinful(sites, ordering=ordering, orbitals=orbitals)
    model = FermionModel(space, name="multi-band Fermi-Hubbard")
    mode = lambda site, band, spin: space.index((site, orbitals[band], spin))  # noqa: E731

    for i, j, scale in _normalize_edges(edges if edges is not None else [(s, s + 1) for s in range(sites - 1)],
                                        1.0, sites):
        for m in range(bands):
            for n in range(bands):
                if hopping[m, n] == 0:
                    continue
                for spin in ("up", "down"):
                    model.add_hopping(mode(i, m, spin), mode(j, n, spin), -scale * hopping[m, n])
    if hybridization is not None:
        hybridization = np.asarray(hybridization, dtype=complex)
        for m in range(bands):
            for n in range(m + 1, bands):
                if hybridization[m, n] != 0:
                    for site in range(sites):
                        for spin in ("up", "down"):
                            model.add_hopping(mode(site, m, spin), mode(site, n, spin), hybridization[m, n])
    for site in range(sites):
        for m in range(bands):
            if interaction[m, m]:
                model.add_density(mode(site, m, "up"), mode(site, m, "down"), interaction[m, m])
            for n in range(m + 1, bands):
                if interaction[m, n]:
                    for s1 in ("up", "down"):
                        for s2 in ("up", "down"):
                            model.add_density(mode(site, m, s1), mode(site, n, s2), interaction[m, n])
            if mu:
                for spin in ("up", "down"):
                    model.add_onsite(mode(site, m, spin), -mu)
    return model


def periodic_anderson(sites, t=1.0, V=0.5, eps_f=0.0, U=4.0, edges=None, ordering="interleaved"):
    """
    Periodic Anderson model in real space

    A tight-binding conduction band (orbital 'c', dispersion -2t cos k on a
    ring) hybridized on site with correlated 'f' orbitals.
    """
    space = FockSpace.spinful(sites, ordering=ordering, orbitals=["c", "f"])
    model = FermionModel(space, name="periodic Anderson")
    for i, j, amplitude in _normalize_edges(edges if edges is not None else [(s, s + 1) for s in range(sites - 1)],
                                            t, sites):
        for spin in ("up", "down"):
            model.add_hopping(space.index((i, "c", spin)), space.index((j, "c", spin)), -amplitude)
    for site in range(sites):
        for spin in ("up", "down"):
            if V:
                model.add_hopping(space.index((site, "c", spin)), space.index((site, "f", spin)), V)
            if eps_f:
                model.add_onsite(space.index((site, "f", spin)), eps_f)
        if U:
            model.add_density(space.index((site, "f", "up")), space.index((site, "f", "down")), U)
    return model


def molecular_hamiltonian(one_body, two_body=None, labels=None):
    """
    Molecular Hamiltonian sum t1_ij c_i^dag c_j + sum t2_ijkl c_i^dag c_j^dag c_k c_l

    Args:
        one_body (array): (L, L) complex coefficients, must be Hermitian
        two_body (array): (L, L, L, L) complex coefficients
        labels (list): Mode labels

    Returns:
        FermionModel: The model
    """
    one_body = np.atleast_2d(np.asarray(one_body, dtype=complex))
    L = one_body.shape[0]
    if one_body.shape != (L, L):
        raise DomainError("one-body coefficients must be a square matrix", shape=list(one_body.shape))
    if not np.allclose(one_body, one_body.conj().T, atol=1e-12):
        raise DomainError("one-body coefficients are not conjugate-symmetric")
    if two_body is not None:
        two_body = np.asarray(two_body, dtype=complex)
        if two_body.shape != (L,) * 4:
            raise DomainError("two-body coefficients must have shape (L, L, L, L)", shape=list(two_body.shape))
    return FermionModel(FockSpace(labels if labels is not None else L), one_body=one_body, two_body=two_body,
                        name="molecular")


def _normalize_edges(edges, default, sites):
    normalized = []
    for edge in edges:
        i, j = int(edge[0]), int(edge[1])
        if i == j or not (0 <= i < sites and 0 <= j < sites):
            raise DomainError(f"invalid edge ({i}, {j}) for {sites} sites")
        normalized.append((i, j, edge[2] if len(edge) > 2 else default))
    return normalized


def _pair_terms(model):
    """Fold molecular one-body coefficients into hopping and onsite dictionaries"""
    hopping, onsite = dict(model.hopping), dict(model.onsite)
    if model.one_body is not None:
        L = model.space.L
        for i in range(L):
            if model.one_body[i, i] != 0:
                onsite[i] = onsite.get(i, 0.0) + model.one_body[i, i].real
            for j in range(i + 1, L):
                if model.one_body[i, j] != 0:
                    hopping[(i, j)] = hopping.get((i, j), 0.0) + model.one_body[i, j]
    return hopping, dict(model.density), onsite


def build_hamiltonian(model):
    """
    Sparse Hamiltonian of a fermion model

    Args:
        model (FermionModel): Model terms

    Returns:
        ManyBodyOperator: Hermitian Hamiltonian
    """
    space = model.space
    ops = mode_operators(space)
    occ = space.occupations.astype(float)
    hopping, density, onsite = _pair_terms(model)

    diagonal = np.zeros(space.dimension)
    for (i, j), value in density.items():
        diagonal += value * occ[:, i] * occ[:, j]
    for i, value in onsite.items():
        diagonal += np.real(value) * occ[:, i]
    matrix = sp.diags(diagonal.astype(complex), format="csr")

    for (i, j), value in hopping.items():
        term = value * (ops["cdag"][i] @ ops["c"][j])
        matrix = matrix + term + term.getH()

    if model.two_body is not None:
        for i, j, k, l in np.argwhere(np.abs(model.two_body) > 0):
            term = ops["cdag"][i] @ ops["cdag"][j] @ ops["c"][k] @ ops["c"][l]
            matrix = matrix + model.two_body[i, j, k, l] * term

    try:
        return ManyBodyOperator(matrix, hermitian=True, name=model.name)
    except DomainError as e:
        raise DomainError("model coefficients give a non-Hermitian Hamiltonian", model=model.name,
                          error=e.context.get("error")) from e


def single_particle_matrix(model):
    """
    One-body matrix h with H = sum h_ij c_i^dag c_j, for models without interactions
    """
    if model.density or model.two_body is not None and np.any(model.two_body):
        raise DomainError("model has interaction terms", model=model.name)
    hopping, _, onsite = _pair_terms(model)
    h = np.zeros((model.space.L, model.space.L), dtype=complex)
    for (i, j), value in hopping.items():
        h[i, j] += value
        h[j, i] += np.conj(value)
    for i, value in onsite.items():
        h[i, i] += value
    return h


def free_fermion_ground_energy(model, particles):
    levels = eigvalsh(single_particle_matrix(model))
    return float(levels[:particles].sum())


def sector_hamiltonian(hamiltonian, space, particles):
    indices = space.sector(particles)
    if indices.size == 0:
        raise DomainError(f"no states with {particles} particles in {space.L} modes")
    return hamiltonian.matrix[indices][:, indices], indices


def sector_ground_energy(hamiltonian, space, particles, method="dense"):
    """
    Lowest energy with a fixed particle number

    Args:
        hamiltonian (ManyBodyOperator): Hamiltonian
        space (FockSpace): Mode space
        particles (int): Particle number
        method (str): 'dense' diagonalization or 'lanczos' (ARPACK)

    Returns:
        float: Ground energy of the sector
    """
    block, _ = sector_hamiltonian(hamiltonian, space, particles)
    size = block.shape[0]
    if method == "dense" or size <= 2:
        return float(eigvalsh(block.toarray(), subset_by_index=(0, 0))[0])
    if method == "lanczos":
        values = eigsh(block, k=1, which="SA", tol=1e-12, v0=np.ones(size), return_eigenvectors=False)
        return float(values[0].real)
    raise DomainError(f"unknown diagonalization method '{method}'")


def sector_spectrum(hamiltonian, space, particles):
    block, _ = sector_hamiltonian(hamiltonian, space, particles)
    return eigvalsh(block.toarray())


def sector_ground_state(hamiltonian, space, particles):
    block, indices = sector_hamiltonian(hamiltonian, space, particles)
    values, vectors = eigh(block.toarray(), subset_by_index=(0, 0))
    state = np.zeros(space.dimension, dtype=complex)
    state[indices] = vectors[:, 0]
    return float(values[0]), state


def exact_evolve(hamiltonian, state, tau, points=None):
    """
    e^{-iH t} applied to a state by Krylov exponentiation

    With ``points`` the states at ``points`` equally spaced times in [0, tau]
    are returned as rows.
    """
    generator = -1j * hamiltonian.matrix
    state = np.asarray(state, dtype=complex)
    if points is None:
        return expm_multiply(generator * tau, state)
    return expm_multiply(generator, state, start=0.0, stop=tau, num=points, endpoint=True)


# Model files


MODEL_BUILDERS = {
    "fh": fermi_hubbard,
    "tt": fermi_hubbard,
    "mfh": multiband_hubbard,
    "pam": periodic_anderson,
}
MATRIX_KEYS = {"hopping", "interaction", "hybridization"}


def build_model(kind, **params):
    try:
        builder = MODEL_BUILDERS[kind]
    except KeyError:
        raise ConfigError(f"unknown model '{kind}'", models=sorted(MODEL_BUILDERS)) from None
    try:
        return builder(**params)
    except TypeError as e:
        raise ConfigError(f"bad parameters for model '{kind}': {e}") from e


def parse_model_text(text):
    """
    Parse a model description

    Lines are ``key = value`` parameters, ``edge i j [t]`` bonds and
    ``nnn i j`` next-nearest-neighbor pairs; '#' starts a comment. Band
    matrices are written as rows separated by ';', e.g. ``hopping = 1 0; 0 0.5``.

    Returns:
        tuple: (model kind, builder keyword arguments)
    """
    params, edges, nnn = {}, [], []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split()[0].lower()
        try:
            if head in ("edge", "nnn"):
                fields = line.split()[1:]
                if len(fields) not in (2, 3) or head == "nnn" and len(fields) != 2:
                    raise ValueError(f"expected '{head} i j{' [t]' if head == 'edge' else ''}'")
                values = [int(fields[0]), int(fields[1])] + [float(v) for v in fields[2:]]
                (edges if head == "edge" else nnn).append(tuple(values))
            elif "=" in line:
                key, value = (part.strip() for part in line.split("=", 1))
                params[key] = _parse_value(key, value)
            else:
                raise ValueError("expected 'key = value', 'edge' or 'nnn'")
        except ValueError as e:
            raise ConfigError(f"model file line {number}: {e}", line=raw.strip()) from e

    kind = str(params.pop("model", "fh")).lower()
    if edges:
        params["edges"] = edges
    if nnn:
        params["nnn"] = nnn
    return kind, params


def _parse_value(key, value):
    if key in MATRIX_KEYS:
        return np.array([[float(v) for v in row.split()] for row in value.split(";")])
    if key in ("model", "ordering"):
        return value
    if key in ("sites",):
        return int(value)
    if key == "orbitals":
        return value.split()
    return float(value)


def load_model_file(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"model file not found: {path}")
    kind, params = parse_model_text(path.read_text())
    logger.info("Loaded %s model from %s", kind, path)
    return build_model(kind, **params)


# Trotterized dynamics


def bond_layers(pairs):
    """
    Group mode pairs into layers of disjoint pairs by first-fit

    Sorted chain bonds come out as the even/odd brick pattern.
    """
    layers = []
    for pair in sorted(tuple(sorted(p)) for p in pairs):
        for layer in layers:
            if all(not set(pair) & set(other) for other in layer):
                layer.append(pair)
                break
        else:
            layers.append([pair])
    return layers


def trotter_schedule(model, dt, layers=None):
    """
    Gate layers of one first-order Trotter step

    Hopping t_ij (c_i^dag c_j + h.c.) becomes U_tun(2 dt |t|, -arg t, 0),
    density V_ij n_i n_j becomes U_int(dt V) and on-site terms single-mode
    phases.

    Args:
        model (FermionModel): Model without two-body molecular terms
        dt (float): Trotter time slice
        layers (list): Optional user layering of the hopping pairs

    Returns:
        GateSchedule: One Trotter step
    """
    if model.two_body is not None and np.any(model.two_body):
        raise DomainError("Trotter schedules support hopping, density and on-site terms only", model=model.name)
    hopping, density, onsite = _pair_terms(model)
    schedule = GateSchedule()
    hop_layers = layers if layers is not None else bond_layers(hopping)
    for layer in hop_layers:
        gates = []
        for pair in layer:
            key = tuple(sorted(pair))
            value = hopping[key]
            gates.append(("tun", key, (2 * dt * abs(value), -float(np.angle(value)), 0.0)))
        schedule.add_layer(gates)
    for layer in bond_layers(density):
        schedule.add_layer([("int", pair, (dt * float(np.real(density[pair])),)) for pair in layer])
    if onsite:
        schedule.add_layer([("phase", (i,), (dt * float(np.real(value)),)) for i, value in sorted(onsite.items())])
    return schedule


def schedule_counts(schedule):
    return {
        "layers_per_step": len(schedule.layers),
        "gates_per_step": schedule.gate_count,
        "two_mode_gates_per_step": schedule.two_mode_gate_count,
        "rearrangements_per_step": schedule.rearrangements,
    }


def neel_occupation(space):
    """Up spin on even sites and down spin on odd sites (labels (site, ..., spin))"""
    occupied = []
    for label in space.labels:
        if not isinstance(label, tuple):
            raise DomainError("Neel state needs spinful mode labels")
        site, spin = label[0], label[-1]
        if len(label) == 3 and label[1] not in (0, "c"):
            continue
        if (spin == "up") == (site % 2 == 0):
            occupied.append(label)
    return occupied


def trotter_evolve(model, tau, steps, initial=None, layers=None, cache=None):
    """
    Trotterized evolution compared step by step with exact evolution

    Args:
        model (FermionModel): Model
        tau (float): Total evolution time
        steps (int): Number of Trotter steps
        initial (array or list): Statevector or occupied mode labels, Neel state by default
        layers (list): Optional hopping layering
        cache (dict): Gate cache shared between calls

    Returns:
        dict: final ``state``, per-step ``frame`` (step, t, err_norm,
        N_particles) and gate/rearrangement ``counts``
    """
    if steps < 1:
        raise DomainError("at least one Trotter step is needed", steps=steps)
    space = model.space
    state = _initial_state(space, initial)
    hamiltonian = build_hamiltonian(model)
    number = number_operator(space)
    dt = tau / steps
    schedule = trotter_schedule(model, dt, layers)
    exact = exact_evolve(hamiltonian, state, tau, points=steps + 1)

    particles = number.expectation(state).real
    rows = [{"step": 0, "t": 0.0, "err_norm": 0.0, "N_particles": particles}]
    cache = {} if cache is None else cache
    for step in range(1, steps + 1):
        state = apply_schedule(space, schedule, state, cache)
        count = number.expectation(state).real
        if abs(count - particles) > NUMBER_TOLERANCE:
            raise ConvergenceError("particle number drifted during Trotter evolution", step=step,
                                   drift=count - particles)
        rows.append({
            "step": step,
            "t": step * dt,
            "err_norm": float(np.linalg.norm(state - exact[step])),
            "N_particles": count,
        })

    counts = schedule_counts(schedule)
    counts.update(steps=steps, total_gates=steps * schedule.gate_count,
                  total_rearrangements=steps * schedule.rearrangements)
    logger.info("Trotter evolution of %s: %d steps, final error %.3e", model.name, steps, rows[-1]["err_norm"])
    return {"state": state, "frame": pd.DataFrame(rows), "counts": counts, "schedule": schedule}


def _initial_state(space, initial):
    if initial is None:
        initial = neel_occupation(space)
    if isinstance(initial, np.ndarray) and initial.shape == (space.dimension,):
        state = initial.astype(complex)
        return state / np.linalg.norm(state)
    return space.basis_state(initial)


def trotter_error_scaling(model, tau, steps=TROTTER_STEPS, initial=None, workers=None):
    """
    Final-time Trotter error against step count

    Step counts are independent runs and are evaluated in parallel.

    Returns:
        tuple: (DataFrame of steps, dt, err_norm; log-log fit whose slope is
        the error order in 1/N)
    """
    def run(count):
        return trotter_evolve(model, tau, count, initial)["frame"]["err_norm"].iloc[-1]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        errors = list(pool.map(run, steps))
    frame = pd.DataFrame({"steps": list(steps), "dt": [tau / n for n in steps], "err_norm": errors})
    fit = loglog_fit(frame["steps"], frame["err_norm"])
    logger.info("Trotter error slope %.3f (R^2 %.4f)", fit["slope"], fit["r_squared"])
    return frame, fit


# Mode reordering


def reorder_state(state, source, target):
    """
    Express a state in another mode ordering

    Both spaces carry the same labels. Each basis state picks up the sign of
    the permutation that sorts its creation operators into the target order.

    Args:
        state (array): Statevector over ``source``
        source (FockSpace): Current mode order
        target (FockSpace): Wanted mode order

    Returns:
        array: Statevector over ``target``
    """
    if sorted(map(repr, source.labels)) != sorted(map(repr, target.labels)):
        raise DomainError("source and target spaces must carry the same mode labels")
    position = np.array([target.index(label) for label in source.labels])
    state = np.asarray(state, dtype=complex)
    result = np.zeros(target.dimension, dtype=complex)
    occ = source.occupations
    for index in np.flatnonzero(np.abs(state) > 0):
        new = position[occ[index] == 1]
        inversions = int(np.sum(np.triu(new[:, None] > new[None, :], 1)))
        target_index = int(np.sum(1 << (target.L - 1 - new))) if new.size else 0
        result[target_index] += (-1) ** inversions * state[index]
    return result


def fswap_network(order):
    """
    Adjacent fSWAP layers that permute modes by odd-even transposition sort

    Args:
        order (list): order[k] is the current mode that should end at position k

    Returns:
        GateSchedule: At most L layers of fswap gates on neighboring modes
    """
    L = len(order)
    if sorted(order) != list(range(L)):
        raise DomainError("order must be a permutation of the mode indices")
    rank = {mode: k for k, mode in enumerate(order)}
    current = list(range(L))
    schedule = GateSchedule()
    for sweep in range(L):
        gates = []
        for k in range(sweep % 2, L - 1, 2):
            if rank[current[k]] > rank[current[k + 1]]:
                current[k], current[k + 1] = current[k + 1], current[k]
                gates.append(("fswap", (k, k + 1), ()))
        if gates:
            schedule.add_layer(gates)
    return schedule


def spin_encoded_model(model):
    """
    The same spinful model on modes ordered with spin encoded in trap location

    Spin-up modes come first, so same-spin hopping along a row acts on
    neighboring modes and the on-site U becomes a density gate between rows.
    """
    labels = model.space.labels
    if not all(isinstance(label, tuple) and label[-1] in ("up", "down") for label in labels):
        raise DomainError("spin encoding needs spinful mode labels")
    encoded = FockSpace([label for label in labels if label[-1] == "up"] +
                        [label for label in labels if label[-1] == "down"])
    move = {i: encoded.index(label) for i, label in enumerate(labels)}
    hopping, density, onsite = _pair_terms(model)
    result = FermionModel(encoded, name=f"{model.name} (spin in trap location)")
    for (i, j), value in hopping.items():
        result.add_hopping(move[i], move[j], value)
    for (i, j), value in density.items():
        result.add_density(move[i], move[j], value)
    for i, value in onsite.items():
        result.add_onsite(move[i], value)
    return result


def spinful_encoding_check(sites=4, t=1.0, U=4.0, tau=1.0, points=5):
    """
    Spinless simulation with spin in trap location against spinful evolution

    Returns:
        dict: largest state difference over the sampled times and the time grid
    """
    spinful = fermi_hubbard(sites, t=t, U=U)
    encoded = spin_encoded_model(spinful)
    initial = spinful.space.basis_state(neel_occupation(spinful.space))
    reference = exact_evolve(build_hamiltonian(spinful), initial, tau, points=points)
    # the same physical state carries the reordering sign in the encoded basis
    start = reorder_state(initial, spinful.space, encoded.space)
    simulated = exact_evolve(build_hamiltonian(encoded), start, tau, points=points)
    difference = max(
        float(np.linalg.norm(reorder_state(row, encoded.space, spinful.space) - expected))
        for row, expected in zip(simulated, reference)
    )
    return {"max_difference": difference, "times": np.linspace(0.0, tau, points)}


# Variational eigensolver


def ansatz_schedule(bonds, interaction_bonds, parameters, layers):
    """
    Layered circuit: U_tun on every bond, then U_int on every interaction bond

    Each ansatz layer takes 3 angles per tunneling bond and 1 per
    interaction bond.
    """
    schedule = GateSchedule()
    cursor = 0
    for _ in range(layers):
        for group in bond_layers(bonds):
            gates = []
            for pair in group:
                gates.append(("tun", pair, tuple(parameters[cursor:cursor + 3])))
                cursor += 3
            schedule.add_layer(gates)
        for group in bond_layers(interaction_bonds):
            gates = []
            for pair in group:
                gates.append(("int", pair, (parameters[cursor],)))
                cursor += 1
            schedule.add_layer(gates)
    return schedule


def ansatz_size(bonds, interaction_bonds, layers):
    return layers * (3 * len(bonds) + len(interaction_bonds))


def vqe_minimize(model, layers=2, initial=None, bonds=None, interaction_bonds=None, restarts=4, max_evaluations=4000,
                 seed=0, workers=None):
    """
    Variational ground state search with a layered tunneling/interaction ansatz

    Nelder-Mead runs from ``restarts`` random starting points; restarts are
    independent and run in parallel.

    Args:
        model (FermionModel): Hamiltonian terms
        layers (int): Ansatz layers
        initial (list): Occupied modes of the product reference state, by
            default the lowest diagonal energy basis state at half filling
        bonds (list): Tunneling bonds, the model's hopping pairs by default
        interaction_bonds (list): Interaction bonds, the model's density pairs by default
        restarts (int): Independent optimizer runs
        max_evaluations (int): Cost evaluations per run
        seed (int): Random seed

    Returns:
        dict: energy, parameters, exact sector energy, bound check,
        stagnation flag and the convergence ``trace`` DataFrame
    """
    space = model.space
    if space.L > VQE_MAX_MODES:
        raise DomainError(f"VQE supports at most {VQE_MAX_MODES} modes", modes=space.L)
    hamiltonian = build_hamiltonian(model)
    hopping, density, _ = _pair_terms(model)
    bonds = [tuple(sorted(b)) for b in (bonds if bonds is not None else hopping)]
    interaction_bonds = [tuple(sorted(b)) for b in (interaction_bonds if interaction_bonds is not None else density)]

    reference = space.basis_state(initial) if initial is not None else _lowest_diagonal_state(hamiltonian, space)
    particles = int(round(number_operator(space).expectation(reference).real))
    exact = sector_ground_energy(hamiltonian, space, particles)
    size = ansatz_size(bonds, interaction_bonds, layers)

    def energy(parameters):
        schedule = ansatz_schedule(bonds, interaction_bonds, parameters, layers)
        state = apply_schedule(space, schedule, reference, check=False)
        return hamiltonian.expectation(state).real

    if size == 0:
        value = energy(np.zeros(0))
        return _vqe_result(value, np.zeros(0), exact, False, pd.DataFrame({"restart": [0], "evaluation": [1],
                                                                           "energy": [value], "best": [value]}))

    def run(restart, seed_sequence):
        rng = np.random.default_rng(seed_sequence)
        start = rng.uniform(-np.pi, np.pi, size) if restart else np.full(size, 0.1)
        trace = []

        def cost(parameters):
            value = energy(parameters)
            best = min(value, trace[-1][3]) if trace else value
            trace.append((restart, len(trace) + 1, value, best))
            return value

        result = minimize(cost, start, method="Nelder-Mead",
                          options={"maxfev": max_evaluations, "xatol": 1e-8, "fatol": 1e-12, "adaptive": True})
        return result, trace

    seeds = np.random.SeedSequence(seed).spawn(restarts)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        runs = list(pool.map(run, range(restarts), seeds))

    best, _ = min(runs, key=lambda item: item[0].fun)
    stagnated = not any(result.success for result, _ in runs)
    if stagnated:
        logger.warning("VQE optimizer hit the evaluation budget in every restart")
    trace = pd.DataFrame([row for _, rows in runs for row in rows], columns=["restart", "evaluation", "energy", "best"])
    return _vqe_result(float(best.fun), best.x, exact, stagnated, trace)


def _lowest_diagonal_state(hamiltonian, space):
    diagonal = hamiltonian.matrix.diagonal().real
    half = space.sector(space.L // 2)
    return space.basis_state([int(m) for m in np.flatnonzero(space.occupations[half[np.argmin(diagonal[half])]])])


def _vqe_result(value, parameters, exact, stagnated, trace):
    bound = value >= exact - 1e-9
    if not bound:
        logger.error("Variational energy %.12f below the exact sector energy %.12f", value, exact)
    logger.info("VQE energy %.8f, exact %.8f, gap %.3e", value, exact, value - exact)
    return {
        "energy": value,
        "parameters": np.asarray(parameters),
        "exact": exact,
        "gap": value - exact,
        "bound_ok": bool(bound),
        "stagnated": bool(stagnated),
        "trace": trace,
    }
