"""
Stimulated Raman figure of merit |beta| = |Omega_R / Gamma_ine|.

Transition dipoles are evaluated between field-dressed eigenstates of the
Zeeman module. Every manifold is rewritten in an uncoupled
|m_L> (x) |spectator spins> basis; the dipole acts on the orbital factor only,
with ``<L m_L|d_q|L' m_L'> = <L' m_L'; 1 q|L m_L> <L||d||L'>``. A beam of
polarization q drives m_L -> m_L + q, so it enters through d_{-q}. The reduced
element is set to one since it cancels in |beta|.
"""
import logging
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks

from models.raman import BetaScan, RamanConfiguration
from utils.angular import clebsch_gordan, projections
from utils.errors import DomainError, ResonanceError
from utils.zeeman import ZeemanSystem, make_basis

logger = logging.getLogger(__name__)

RESONANCE_THRESHOLD = 1e6
SCAN_EXCLUSION = 50e6
ASYMPTOTIC_DETUNING = 1e14

GAMMA_HE_2P = 1.0216e7
GAMMA_LI_2P = 3.69e7
GAMMA_NA_3P = 2 * np.pi * 9.795e6

RAMAN_PRESETS = {
    "he3": {
        "ground": "he3-2s3S", "excited": ["he3-2p3P"],
        "pair": ["F=3/2,mF=-1/2", "F=1/2,mF=-1/2"], "polarizations": ["sigma+", "sigma+"],
        "gamma": GAMMA_HE_2P, "detuning_reference": "highest",
    },
    "li6": {
        "ground": "li6-2s", "excited": ["li6-2p"],
        "pair": ["F=1/2,mF=-1/2", "F=1/2,mF=1/2"], "polarizations": ["sigma+", "pi"],
        "gamma": GAMMA_LI_2P, "detuning_reference": "lowest",
    },
    "na23": {
        "ground": "na23-3s", "excited": ["na23-3p1/2", "na23-3p3/2"],
        "pair": ["F=1,mF=1", "F=1,mF=0"], "polarizations": ["sigma-", "pi"],
        "gamma": GAMMA_NA_3P, "detuning_reference": "lowest",
    },
}

# Literature (B, Delta) optima and |beta| used to report agreement
REFERENCE_BETA = [
    ("li6", 0.0, -16.42e9, 149.7),
    ("he3", 0.0, 29.05e9, 1959.0),
    ("na23", 0.0, -701.4e9, 5081.0),
    ("li6", 800.0, -9.008e9, 21.04),
    ("he3", 800.0, 26.35e9, 2106.0),
    ("na23", 800.0, -460.9e9, 3428.0),
    ("li6", 0.0, -ASYMPTOTIC_DETUNING, 134.1),
    ("he3", 0.0, ASYMPTOTIC_DETUNING, 1543.0),
    ("na23", 0.0, -ASYMPTOTIC_DETUNING, 4411.0),
    ("li6", 800.0, -ASYMPTOTIC_DETUNING, 17.19),
    ("he3", 800.0, ASYMPTOTIC_DETUNING, 1620.0),
    ("na23", 800.0, -ASYMPTOTIC_DETUNING, 2665.0),
]

SCAN_WINDOWS = {
    "he3": (0.2e9, 60e9),
    "li6": (-40e9, -0.2e9),
    "na23": (-1500e9, -1e9),
}


def preset_configuration(species, B=0.0, delta=0.0, polarizations=None):
    """
    Raman configuration used for a species in the comparison tables

    Args:
        species (str): 'he3', 'li6' or 'na23'
        B (float): Field in G
        delta (float): Detuning in Hz
        polarizations (tuple, optional): Override the preset beam polarizations

    Returns:
        RamanConfiguration: The configuration
    """
    if species not in RAMAN_PRESETS:
        raise DomainError(f"no Raman preset for '{species}'; known: {sorted(RAMAN_PRESETS)}")
    data = dict(RAMAN_PRESETS[species], species=species, B=B, delta=delta)
    if polarizations is not None:
        data["polarizations"] = list(polarizations)
    return RamanConfiguration.from_dict(data)


def _spectators(scheme, constants, ket, split_spin=False):
    # (m_L, spectator projections) components of one basis ket with amplitudes
    if scheme == "effective-He-2P":
        m_l, ms1, ms2, m_i = ket
        return [(1.0, m_l, (ms1, ms2, m_i))]
    if scheme == "mL-mS-mI":
        m_l, m_s, m_i = ket
        if not split_spin:
            return [(1.0, m_l, (m_s, m_i))]
        out = []
        for ms1 in (0.5, -0.5):
            ms2 = m_s - ms1
            if abs(ms2) <= 0.5:
                coefficient = clebsch_gordan(0.5, ms1, 0.5, ms2, constants["S"], m_s)
                if coefficient:
                    out.append((coefficient, m_l, (ms1, ms2, m_i)))
        return out
    m_i, m_j = ket
    if "L" not in constants or "S" not in constants:
        raise DomainError("an (m_I, m_J) manifold needs L and S to form dipole elements")
    out = []
    for m_l in projections(constants["L"]):
        m_s = m_j - m_l
        if abs(m_s) <= constants["S"]:
            coefficient = clebsch_gordan(constants["L"], m_l, constants["S"], m_s, constants["J"], m_j)
            if coefficient:
                out.append((coefficient, m_l, (m_s, m_i)))
    return out


class _UncoupledMap:
    """Linear map from a manifold's basis to |m_L, spectators> amplitudes"""

    def __init__(self, system, split_spin=False):
        basis = make_basis(system.scheme, system.constants)
        self.L = system.constants["L"] if "L" in system.constants else 1
        entries = [_spectators(system.scheme, system.constants, ket, split_spin) for ket in basis.kets]
        self.keys = []
        index = {}
        for row in entries:
            for _, m_l, spect in row:
                if (m_l, spect) not in index:
                    index[(m_l, spect)] = len(self.keys)
                    self.keys.append((m_l, spect))
        self.matrix = np.zeros((len(self.keys), basis.dim))
        for column, row in enumerate(entries):
            for coefficient, m_l, spect in row:
                self.matrix[index[(m_l, spect)], column] += coefficient


def _orbital_dipole(ground_map, excited_map, q):
    # <L m_L, sp| d_{-q} |L' m_L', sp>, nonzero for m_L' = m_L + q
    out = np.zeros((len(ground_map.keys), len(excited_map.keys)))
    for a, (m_l, spect) in enumerate(ground_map.keys):
        for b, (m_lp, spect_p) in enumerate(excited_map.keys):
            if spect == spect_p:
                out[a, b] = clebsch_gordan(excited_map.L, m_lp, 1, -q, ground_map.L, m_l)
    return out


@lru_cache(maxsize=32)
def _systems(ground, excited):
    return ZeemanSystem(ground), tuple(ZeemanSystem(name) for name in excited)


def _excited_states(system, B):
    energies, vectors = system.eigensystem(B)
    zero = system.zero_field_energies()
    cutoff = system.constants.get("triplet_cutoff")
    keep = np.ones(len(zero), dtype=bool) if cutoff is None else zero < cutoff
    return energies[keep], zero[keep], vectors[:, keep]


def transition_dipoles(config):
    """
    Rabi-frequency table of both beams to every excited eigenstate

    Args:
        config (RamanConfiguration): The coupling

    Returns:
        dict: omega1 and omega2 (complex arrays over excited states, in units
            of <L||d||L'> times the field factor), energies_hz (E_n(B)) and
            zero_field_hz (E_n(0))
    """
    ground, excited = _systems(config.ground, config.excited)
    # the He 2P basis carries two electron spins, so S = 1 is split to match it
    split = any(system.scheme == "effective-He-2P" for system in excited)
    ground_map = _UncoupledMap(ground, split_spin=split)
    _, ground_vectors = ground.eigensystem(config.B)
    columns = []
    for label in config.pair:
        if label not in ground.labels:
            raise DomainError(f"unknown ground state '{label}'; known: {ground.labels}")
        columns.append(ground_vectors[:, ground.labels.index(label)])
    g_uncoupled = [ground_map.matrix @ v for v in columns]

    omega1, omega2, energies, zero_field = [], [], [], []
    for system in excited:
        e_map = _UncoupledMap(system)
        e_b, e_0, vectors = _excited_states(system, config.B)
        e_uncoupled = e_map.matrix @ vectors
        for g_vec, q, sink in zip(g_uncoupled, config.polarizations, (omega1, omega2)):
            dipole = _orbital_dipole(ground_map, e_map, q)
            sink.append(g_vec.conj() @ dipole @ e_uncoupled)
        energies.append(e_b)
        zero_field.append(e_0)
    omega1 = np.concatenate(omega1)
    omega2 = np.concatenate(omega2)
    if not np.any(np.abs(omega1) > 1e-12) or not np.any(np.abs(omega2) > 1e-12):
        raise DomainError(f"polarizations {config.polarizations} leave a ground state uncoupled")
    return {
        "omega1": omega1,
        "omega2": omega2,
        "energies_hz": np.concatenate(energies),
        "zero_field_hz": np.concatenate(zero_field),
    }


def relative_detunings(dipoles, reference):
    """delta_n(B) = E_n(B) - E_ref(0), with the reference the lowest or highest zero-field level"""
    zero = dipoles["zero_field_hz"]
    anchor = zero.min() if reference == "lowest" else zero.max()
    return dipoles["energies_hz"] - anchor


def beta_from_dipoles(omega1, omega2, deltas, delta, gamma, threshold=RESONANCE_THRESHOLD):
    """
    Raman Rabi frequency, inelastic scattering rate and |beta|

    Args:
        omega1, omega2 (ndarray): Rabi frequencies of the two beams per excited state
        deltas (ndarray): delta_n in Hz
        delta (float): Laser detuning in Hz
        gamma (float): Excited-state decay rate in 1/s
        threshold (float): Smallest allowed |Delta - delta_n| in Hz

    Returns:
        dict: omega_r, gamma_ine, beta and fidelity
    """
    mismatch = delta - np.asarray(deltas)
    if np.min(np.abs(mismatch)) < threshold:
        raise ResonanceError(f"detuning {delta * 1e-9:.6f} GHz is on an excited-state resonance", delta=float(delta))
    angular = 2 * np.pi * mismatch
    omega_r = np.sum(omega1 * np.conj(omega2) / (4 * angular))
    gamma_ine = gamma * np.sum((np.abs(omega1) ** 2 + np.abs(omega2) ** 2) / (4 * angular**2))
    beta = abs(omega_r) / gamma_ine
    return {"omega_r": float(abs(omega_r)), "gamma_ine": float(gamma_ine), "beta": float(beta),
            "fidelity": float(1 - 1 / beta)}


def beta_ratio(config):
    """
    Figure of merit |beta| of a Raman configuration

    Returns:
        dict: omega_r, gamma_ine, beta and fidelity at config.delta
    """
    dipoles = transition_dipoles(config)
    deltas = relative_detunings(dipoles, config.detuning_reference)
    return beta_from_dipoles(dipoles["omega1"], dipoles["omega2"], deltas, config.delta, config.gamma)


def _refine_maximum(evaluate, lo, hi):
    result = minimize_scalar(lambda x: -evaluate(x), bounds=(lo, hi), method="bounded",
                             options={"xatol": 1e-7 * (hi - lo)})
    return float(result.x), float(-result.fun)


def _beta_or_none(dipoles, config, delta):
    # None inside the scan exclusion window around any level
    levels = relative_detunings(dipoles, config.detuning_reference)
    if np.min(np.abs(delta - levels)) < SCAN_EXCLUSION:
        return None
    return beta_from_dipoles(dipoles["omega1"], dipoles["omega2"], levels, delta, config.gamma)["beta"]


def beta_scan(config, deltas=None, fields=None):
    """
    |beta| along a detuning grid (fixed B) or a field grid (fixed Delta)

    Grid points within SCAN_EXCLUSION of a resonance are dropped. Interior
    local maxima are located on the grid and refined.

    Args:
        config (RamanConfiguration): Coupling; its delta or B is the fixed coordinate
        deltas (ndarray, optional): Detunings in Hz
        fields (ndarray, optional): Fields in G

    Returns:
        BetaScan: Samples and [(position, beta)] maxima
    """
    if (deltas is None) == (fields is None):
        raise DomainError("give exactly one of a detuning grid or a field grid")

    if deltas is not None:
        axis = "delta"
        grid = np.asarray(deltas, dtype=float)
        dipoles = transition_dipoles(config)

        def sample(delta):
            return _beta_or_none(dipoles, config, delta)
    else:
        axis = "B"
        grid = np.asarray(fields, dtype=float)

        def sample(B):
            return _beta_or_none(transition_dipoles(config.replace(B=B)), config, config.delta)

    kept, values = [], []
    for x in grid:
        beta = sample(x)
        if beta is not None:
            kept.append(x)
            values.append(beta)
    kept = np.array(kept)
    values = np.array(values)

    maxima = []
    if values.size >= 3:
        peaks, _ = find_peaks(values)
        for k in peaks:
            maxima.append(_refine_maximum(lambda x: sample(x) or 0.0, kept[k - 1], kept[k + 1]))
    logger.info("beta scan over %d %s points: %d maxima", len(kept), axis, len(maxima))
    return BetaScan(axis, kept, values, maxima, config)


def beta_asymptote(config, magnitude=ASYMPTOTIC_DETUNING):
    """|beta| far from every excited level, on the side given by the detuning reference"""
    sign = -1.0 if config.detuning_reference == "lowest" else 1.0
    return beta_ratio(config.replace(delta=sign * magnitude))


def _reference_beta(species, B, asymptotic):
    for name, field, delta, value in REFERENCE_BETA:
        if name == species and field == B and (abs(delta) == ASYMPTOTIC_DETUNING) == asymptotic:
            return value
    return None


def _outside_levels(config, window):
    # keep a red scan below every field-shifted level and a blue one above
    levels = relative_detunings(transition_dipoles(config), config.detuning_reference)
    lo, hi = window
    if config.detuning_reference == "lowest":
        return lo, min(hi, levels.min() - 2 * SCAN_EXCLUSION)
    return max(lo, levels.max() + 2 * SCAN_EXCLUSION), hi


def optimal_detuning(config, window, points=400):
    """
    Largest |beta| over a detuning window outside the excited manifold

    Falls back to the best grid sample when the curve has no interior maximum.

    Returns:
        tuple: (Delta in Hz, |beta|)
    """
    scan = beta_scan(config, deltas=np.linspace(*_outside_levels(config, window), points))
    if scan.maxima:
        return max(scan.maxima, key=lambda item: item[1])
    logger.warning("no interior |beta| maximum for %s at %.0f G; using the best grid point",
                   config.species, config.B)
    k = int(np.argmax(scan.beta))
    return float(scan.values[k]), float(scan.beta[k])


def raman_table1(fields=(0.0, 800.0), points=400):
    """
    Optimal and asymptotic |beta| of the comparison species

    Returns:
        DataFrame: species, B_G, Delta_GHz, beta, fidelity, reference_beta and
            the relative difference to it
    """
    rows = []
    for kind in ("optimum", "asymptote"):
        for B in fields:
            for species in ("li6", "he3", "na23"):
                config = preset_configuration(species, B=B)
                if kind == "optimum":
                    delta, beta = optimal_detuning(config, SCAN_WINDOWS[species], points)
                    ref = _reference_beta(species, B, asymptotic=False)
                else:
                    sign = -1.0 if config.detuning_reference == "lowest" else 1.0
                    delta = sign * ASYMPTOTIC_DETUNING
                    beta = beta_asymptote(config)["beta"]
                    ref = _reference_beta(species, B, asymptotic=True)
                rel = None if ref is None else (beta - ref) / ref
                if rel is not None and abs(rel) > 0.05:
                    logger.warning("%s at %.0f G: |beta| = %.1f differs from the literature %.1f by %.1f%%",
                                   species, B, beta, ref, 100 * rel)
                rows.append({
                    "species": species, "B_G": B, "Delta_GHz": delta * 1e-9, "beta": beta,
                    "fidelity": 1 - 1 / beta, "reference_beta": ref, "relative_difference": rel,
                })
    return pd.DataFrame(rows)


TABLE2_POLARIZATIONS = (("sigma+", "sigma+"), ("pi", "pi"))
TABLE2_WINDOW = (-15e9, 40e9)


def raman_table2(B=800.0, polarizations=TABLE2_POLARIZATIONS, window=TABLE2_WINDOW, points=1101):
    """
    Every interior |beta| maximum of He-3 over a detuning window, per beam polarization pair

    Returns:
        DataFrame: polarization, B_G, Delta_GHz, beta and fidelity, one row per maximum
    """
    rows = []
    for pair in polarizations:
        config = preset_configuration("he3", B=B, polarizations=pair)
        scan = beta_scan(config, deltas=np.linspace(*window, points))
        if not scan.maxima:
            logger.warning("no interior |beta| maximum for (%s, %s) at %.0f G", *pair, B)
        for delta, beta in sorted(scan.maxima):
            rows.append({"polarization": ",".join(pair), "B_G": B, "Delta_GHz": delta * 1e-9,
                         "beta": beta, "fidelity": 1 - 1 / beta})
    return pd.DataFrame(rows, columns=["polarization", "B_G", "Delta_GHz", "beta", "fidelity"])


# Zero-field coupled-basis descriptions: (L, S, J, I, F, mF)
ZERO_FIELD_TABLES = {
    "na23": {
        "ground": [(0, 0.5, 0.5, 1.5, 1, 1), (0, 0.5, 0.5, 1.5, 1, 0)],
        "excited": [(1, 0.5, 0.5, 1.5, F, 0) for F in (1, 2)] + [(1, 0.5, 1.5, 1.5, F, 0) for F in (0, 1, 2, 3)],
        "polarizations": (-1, 0),
    },
    "yb171": {
        "ground": [(1, 1, 0, 0.5, 0.5, 0.5), (1, 1, 0, 0.5, 0.5, -0.5)],
        "excited": [(2, 1, 1, 0.5, F, 0.5) for F in (0.5, 1.5)],
        "polarizations": (0, 1),
    },
}


def coupled_amplitudes(L, S, J, I, F, mF):
    """
    |(L S) J, I; F mF> on the uncoupled |m_L; m_S, m_I> kets

    Returns:
        dict: (m_L, (m_S, m_I)) -> amplitude
    """
    out = {}
    for m_i in projections(I):
        m_j = mF - m_i
        if abs(m_j) > J:
            continue
        outer = clebsch_gordan(J, m_j, I, m_i, F, mF)
        if not outer:
            continue
        for m_l in projections(L):
            m_s = m_j - m_l
            if abs(m_s) > S:
                continue
            inner = clebsch_gordan(L, m_l, S, m_s, J, m_j)
            if inner:
                out[(m_l, (m_s, m_i))] = out.get((m_l, (m_s, m_i)), 0.0) + outer * inner
    return out


def zero_field_dipole(ground, excited, q):
    """<g|d_q|e> between two coupled-basis states in units of <L||d||L'>"""
    L_g, L_e = ground[0], excited[0]
    g_amp = coupled_amplitudes(*ground)
    e_amp = coupled_amplitudes(*excited)
    total = 0.0
    for (m_l, spect), a in g_amp.items():
        for (m_lp, spect_p), b in e_amp.items():
            if spect == spect_p:
                total += a * b * clebsch_gordan(L_e, m_lp, 1, -q, L_g, m_l)
    return total


def zero_field_rabi_table(species):
    """
    Omega_mn of the zero-field reference couplings

    Args:
        species (str): 'na23' or 'yb171'

    Returns:
        ndarray: shape (2, n_excited), rows for the two ground states
    """
    if species not in ZERO_FIELD_TABLES:
        raise DomainError(f"no zero-field table for '{species}'")
    table = ZERO_FIELD_TABLES[species]
    return np.array([
        [zero_field_dipole(g, e, q) for e in table["excited"]]
        for g, q in zip(table["ground"], table["polarizations"])
    ])


def zero_field_table_frame(species):
    """Zero-field couplings as rows of ground state, excited state index, Omega and Omega^2"""
    table = zero_field_rabi_table(species)
    rows = []
    for g, row in enumerate(table, start=1):
        for n, omega in enumerate(row, start=1):
            rows.append({"species": species, "ground": g, "excited": n, "omega": omega, "omega_squared": omega**2})
    return pd.DataFrame(rows)
