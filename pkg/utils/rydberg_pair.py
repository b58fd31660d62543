"""
Dipole-dipole interactions between two helium-3 Rydberg atoms.

Each atom is a frozen 1s core plus one Rydberg electron described by a
multichannel level from ``utils.mqdt``. Radial functions are Coulomb
functions of the channel effective quantum number, obtained by inward
Numerov integration in x = sqrt(r). The internuclear axis is the
quantization axis, so M = m1 + m2 is conserved and

    V_dd R^3 = -(2 d1_0 d2_0 + d1_+1 d2_-1 + d1_-1 d2_+1)

with d_q = r C^1_q in atomic units. Pair energies are in GHz, R in um.
"""
import logging
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy.linalg import eigh

from models.rydberg import PairCurves, PairState, RydbergState, format_symmetry
from utils.angular import projections, reduced_spherical_harmonic, wigner3j, wigner6j
from utils.constants import C3_AU_TO_GHZ_UM3, C6_AU_TO_GHZ_UM6
from utils.errors import ConvergenceError, DomainError
from utils.fitting import loglog_fit
from utils.mqdt import levels_for_n

logger = logging.getLogger(__name__)

RADIAL_STEP = 0.005
INNER_FLOOR = 1e-4
FORSTER_LIMIT_GHZ = 0.01
DEFAULT_DN = 2
DEFAULT_LMAX = 3
DEFAULT_PAIR_WINDOW_GHZ = 5.0
ELECTRON_SPIN = 0.5


def _sign(exponent):
    return -1.0 if int(round(exponent)) % 2 else 1.0


@lru_cache(maxsize=4096)
def _radial_function(nu, l, step):
    # (first grid index, X) with u(r) = x^(1/2) X(x), x = sqrt(r), on x_k = k * step
    r_turn = nu**2 - nu * np.sqrt(max(nu**2 - l * (l + 1), 0.0))
    r_in = max(0.25 * r_turn, INNER_FLOOR)
    r_out = 2.0 * nu * (nu + 15.0)
    k_in = int(np.ceil(np.sqrt(r_in) / step))
    k_out = int(np.ceil(np.sqrt(r_out) / step))
    x = np.arange(k_in, k_out + 1) * step

    g = (2 * l + 0.5) * (2 * l + 1.5) / x**2 - 8.0 + 4.0 * x**2 / nu**2
    w = 1.0 - step**2 * g / 12.0
    X = np.zeros_like(x)
    X[-2] = 1e-10
    for k in range(len(x) - 2, 0, -1):
        X[k - 1] = ((12.0 - 10.0 * w[k]) * X[k] - w[k + 1] * X[k + 1]) / w[k - 1]

    norm = 2.0 * step * np.sum(x**2 * X**2)
    if not np.isfinite(norm) or norm <= 0:
        raise ConvergenceError(f"radial integration failed for nu={nu}, l={l}", nu=nu, l=l)
    return k_in, X / np.sqrt(norm)


def radial_wavefunction(nu, l, step=RADIAL_STEP):
    """
    Normalised radial function u(r) = r R(r) of effective quantum number nu

    Returns:
        tuple: (r, u) in atomic units, u positive in its outermost lobe
    """
    k_in, X = _radial_function(float(nu), int(l), float(step))
    x = np.arange(k_in, k_in + len(X)) * step
    return x**2, np.sqrt(x) * X


def radial_integral(nu1, l1, nu2, l2, step=RADIAL_STEP):
    """
    Radial dipole integral <nu1 l1| r |nu2 l2>

    Args:
        nu1, nu2 (float): Effective quantum numbers
        l1, l2 (int): Orbital angular momenta, |l1 - l2| = 1
        step (float): Numerov step in sqrt(r)

    Returns:
        float: The integral in units of a0
    """
    if abs(l1 - l2) != 1:
        raise DomainError(f"dipole radial integral needs |l1 - l2| = 1, got {l1} and {l2}")
    for nu, l in ((nu1, l1), (nu2, l2)):
        if nu < l + 1 - 1e-9:
            raise DomainError(f"effective quantum number {nu} too small for l={l}")

    k1, X1 = _radial_function(float(nu1), int(l1), float(step))
    k2, X2 = _radial_function(float(nu2), int(l2), float(step))
    start, stop = max(k1, k2), min(k1 + len(X1), k2 + len(X2))
    if stop <= start:
        return 0.0
    x = np.arange(start, stop) * step
    value = 2.0 * step * np.sum(x**4 * X1[start - k1:stop - k1] * X2[start - k2:stop - k2])
    if not np.isfinite(value):
        raise ConvergenceError("radial integral is not finite", nu1=nu1, nu2=nu2)
    return float(value)


def reduced_angular(l, j_e, f_c, F, lp, jp_e, fp_c, Fp):
    """
    <(f_c, (l s) j_e) F || C^1 || (f_c', (l' s) j_e') F'>

    The core is a spectator, so the element vanishes unless f_c = f_c'.
    """
    if f_c != fp_c or abs(l - lp) != 1:
        return 0.0
    core = _sign(f_c + jp_e + F + 1) * np.sqrt((2 * F + 1) * (2 * Fp + 1)) * wigner6j(j_e, F, f_c, Fp, jp_e, 1)
    electron = _sign(l + ELECTRON_SPIN + jp_e + 1) * np.sqrt((2 * j_e + 1) * (2 * jp_e + 1)) \
        * wigner6j(l, j_e, ELECTRON_SPIN, jp_e, lp, 1)
    return core * electron * reduced_spherical_harmonic(l, 1, lp)


def angular_dipole(l, j_e, f_c, F, m, lp, jp_e, fp_c, Fp, mp, q):
    """<(f_c, (l s) j_e) F m| C^1_q |(f_c', (l' s) j_e') F' m'>"""
    if m != mp + q:
        return 0.0
    reduced = reduced_angular(l, j_e, f_c, F, lp, jp_e, fp_c, Fp)
    if reduced == 0.0:
        return 0.0
    return _sign(F - m) * wigner3j(F, 1, Fp, -m, q, mp) * reduced


@lru_cache(maxsize=65536)
def reduced_dipole(level_a, level_b):
    """
    Reduced dipole element <a||r C^1||b> between two multichannel levels

    Channel amplitudes multiply the radial integral of the two channel
    effective quantum numbers and the recoupled angular factor.
    """
    if abs(level_a.l - level_b.l) != 1:
        return 0.0
    total = 0.0
    for (f_c, j_e), nu_a, z_a in zip(level_a.channels, level_a.nus, level_a.amplitudes):
        for (fp_c, jp_e), nu_b, z_b in zip(level_b.channels, level_b.nus, level_b.amplitudes):
            angular = reduced_angular(level_a.l, j_e, f_c, level_a.F, level_b.l, jp_e, fp_c, level_b.F)
            if angular:
                total += z_a * z_b * angular * radial_integral(nu_a, level_a.l, nu_b, level_b.l)
    return total


def dipole_element(state_a, state_b, q):
    """<a| r C^1_q |b> in atomic units"""
    if state_a.m != state_b.m + q or abs(state_a.F - state_b.F) > 1:
        return 0.0
    reduced = reduced_dipole(state_a.level, state_b.level)
    if reduced == 0.0:
        return 0.0
    return _sign(state_a.F - state_a.m) * wigner3j(state_a.F, 1, state_b.F, -state_a.m, q, state_b.m) * reduced


def c3_element(pair_a, pair_b):
    """
    C3 matrix element <a1 a2|V_dd|b1 b2> R^3 for R along z

    Returns:
        float: C3 in GHz um^3, zero unless M is conserved and both atoms
            change l by one
    """
    if pair_a.M != pair_b.M:
        return 0.0
    if abs(pair_a.atom1.l - pair_b.atom1.l) != 1 or abs(pair_a.atom2.l - pair_b.atom2.l) != 1:
        return 0.0
    d1 = {q: dipole_element(pair_a.atom1, pair_b.atom1, q) for q in (-1, 0, 1)}
    d2 = {q: dipole_element(pair_a.atom2, pair_b.atom2, q) for q in (-1, 0, 1)}
    value = -(2.0 * d1[0] * d2[0] + d1[1] * d2[-1] + d1[-1] * d2[1])
    return value * C3_AU_TO_GHZ_UM3


def c3_matrix(basis):
    """Symmetric C3 matrix (GHz um^3) over a list of pair states"""
    size = len(basis)
    matrix = np.zeros((size, size))
    for i in range(size):
        for j in range(i + 1, size):
            value = c3_element(basis[i], basis[j])
            matrix[i, j] = value
            matrix[j, i] = value
    return matrix


def f_values(l):
    """Total angular momenta F available to a 1snl level of helium-3"""
    return [F for F in np.arange(max(l - 1.5, 0.5), l + 1.5 + 1e-9, 1.0)]


def rydberg_state(symmetry, n, m=None, index=0):
    """
    One Zeeman sublevel of the level labelled n in a symmetry

    Args:
        symmetry (str): Symmetry name such as 'nsF32'
        n (int): Integer label of the level
        m (float, optional): Projection, default the stretched m = F
        index (int): Which of several levels sharing the label n, by energy

    Returns:
        RydbergState: The state
    """
    levels = levels_for_n(symmetry, n, n)
    if index >= len(levels):
        raise DomainError(f"{symmetry} has {len(levels)} level(s) labelled n={n}", symmetry=symmetry, n=n)
    level = levels[index]
    return RydbergState(level, level.F if m is None else m)


def target_pair(symmetry, n, M=None, index=0):
    """Identical-atom pair of a symmetry, stretched unless M is given"""
    state = rydberg_state(symmetry, n, index=index)
    m = state.F if M is None else M / 2.0
    return PairState(RydbergState(state.level, m), RydbergState(state.level, m))


def intermediate_levels(level, dn=DEFAULT_DN, lmax=DEFAULT_LMAX):
    """Dipole-allowed levels with |n' - n| <= dn and l' <= lmax"""
    out = []
    for lp in (level.l - 1, level.l + 1):
        if lp < 0 or lp > lmax:
            continue
        for Fp in f_values(lp):
            if abs(Fp - level.F) <= 1:
                out.extend(levels_for_n(format_symmetry(lp, Fp), level.n - dn, level.n + dn))
    return out


def second_order_c6(target_energy, couplings, energies, limit_ghz=FORSTER_LIMIT_GHZ):
    """
    C6 = sum_k |C3_k|^2 / (E_target - E_k)

    Args:
        target_energy (float): Unperturbed pair energy in GHz
        couplings (array): C3 of the target to each intermediate pair
        energies (array): Intermediate pair energies in GHz
        limit_ghz (float): Terms closer than this to degeneracy are left out

    Returns:
        tuple: (C6, indices of the excluded near-degenerate terms)
    """
    couplings = np.asarray(couplings, dtype=float)
    defects = target_energy - np.asarray(energies, dtype=float)
    near = np.abs(defects) < limit_ghz
    c6 = float(np.sum(couplings[~near] ** 2 / defects[~near]))
    return c6, np.flatnonzero(near)


def _intermediate_pairs(pair, dn, lmax):
    # (candidate, C3) for every dipole-coupled pair in the restricted set
    intermediates1 = intermediate_levels(pair.atom1.level, dn, lmax)
    intermediates2 = intermediate_levels(pair.atom2.level, dn, lmax)
    out = []
    for level1 in intermediates1:
        for m1 in projections(level1.F):
            if abs(m1 - pair.atom1.m) > 1:
                continue
            state1 = RydbergState(level1, m1)
            m2 = pair.M - m1
            for level2 in intermediates2:
                if abs(m2) > level2.F or abs(m2 - pair.atom2.m) > 1:
                    continue
                candidate = PairState(state1, RydbergState(level2, m2))
                value = c3_element(pair, candidate)
                if value != 0.0:
                    out.append((candidate, value))
    return out


def c6_perturbative(pair, dn=DEFAULT_DN, lmax=DEFAULT_LMAX, limit_ghz=FORSTER_LIMIT_GHZ):
    """
    Second-order C6 of a pair over the restricted intermediate set

    Args:
        pair (PairState): Target pair
        dn (int): Largest |n' - n| of intermediate levels
        lmax (int): Largest intermediate l
        limit_ghz (float): Near-degeneracy limit for Forster resonances

    Returns:
        dict: C6 in GHz um^6 and atomic units, nu of the first atom, the
            number of intermediate pairs and the resonant pairs left out
    """
    found = _intermediate_pairs(pair, dn, lmax)
    partners = [candidate for candidate, _ in found]
    couplings = [value for _, value in found]
    energies = [candidate.energy_ghz for candidate in partners]

    c6, near = second_order_c6(pair.energy_ghz, couplings, energies, limit_ghz)
    if near.size:
        logger.warning("C6 of %r leaves out %d near-degenerate intermediate pair(s)", pair, near.size)
    return {
        "C6_GHz_um6": c6,
        "C6_au": c6 / C6_AU_TO_GHZ_UM6,
        "nu": pair.atom1.level.nu1,
        "intermediates": len(partners),
        "resonant": [partners[i] for i in near],
    }


def degenerate_manifold(symmetry, n, index=0):
    """Every |m1 m2> product of one level with itself"""
    level = rydberg_state(symmetry, n, index=index).level
    return [PairState(RydbergState(level, m1), RydbergState(level, m2))
            for m1 in projections(level.F) for m2 in projections(level.F)]


def c6_matrix(manifold, dn=DEFAULT_DN, lmax=DEFAULT_LMAX, limit_ghz=FORSTER_LIMIT_GHZ):
    """
    Second-order C6 operator within a degenerate pair manifold

    C6_ab = sum_k <a|V|k><k|V|b> R^6 / (E - E_k) over the union of the
    intermediate sets of every manifold state.

    Returns:
        ndarray: Symmetric matrix in GHz um^6, ordered like ``manifold``
    """
    energy = manifold[0].energy_ghz
    if any(abs(pair.energy_ghz - energy) > 1e-9 for pair in manifold):
        raise DomainError("C6 matrix needs a degenerate pair manifold")
    intermediates = {}
    for pair in manifold:
        for candidate, _ in _intermediate_pairs(pair, dn, lmax):
            intermediates.setdefault(candidate, candidate.energy_ghz)
    kept = [k for k, e in intermediates.items() if abs(energy - e) >= limit_ghz]
    if len(kept) < len(intermediates):
        logger.warning("C6 matrix leaves out %d near-degenerate intermediate pair(s)", len(intermediates) - len(kept))
    couplings = np.array([[c3_element(pair, k) for k in kept] for pair in manifold])
    defects = energy - np.array([k.energy_ghz for k in kept])
    return (couplings / defects) @ couplings.T


def c6_eigenstates(symmetry, n, index=0, dn=DEFAULT_DN, lmax=DEFAULT_LMAX):
    """
    C6 eigenvalues of the identical-atom pair manifold of one level, per M

    Returns:
        DataFrame: M, C6_GHz_um6, C6_au and C6_scaled (C6 / nu^11, a.u.)
    """
    manifold = degenerate_manifold(symmetry, n, index)
    matrix = c6_matrix(manifold, dn, lmax)
    nu = manifold[0].atom1.level.nu1
    rows = []
    for M in sorted({pair.M for pair in manifold}):
        block = [i for i, pair in enumerate(manifold) if pair.M == M]
        for value in np.linalg.eigvalsh(matrix[np.ix_(block, block)]):
            rows.append({"M": M, "C6_GHz_um6": value, "C6_au": value / C6_AU_TO_GHZ_UM6,
                         "C6_scaled": c6_scaled(value / C6_AU_TO_GHZ_UM6, nu)})
    return pd.DataFrame(rows)


def c6_scaled(c6_au, nu):
    """C6 / nu^11 in atomic units"""
    return c6_au / nu**11


def c6_scan(symmetry, nmin, nmax, dn=DEFAULT_DN, lmax=DEFAULT_LMAX):
    """
    Stretched identical-pair C6 along a series

    Returns:
        DataFrame: n, nu, C6_au, C6_GHz_um6, C6_scaled
    """
    rows = []
    for n in range(nmin, nmax + 1):
        result = c6_perturbative(target_pair(symmetry, n), dn, lmax)
        rows.append({
            "n": n,
            "nu": result["nu"],
            "C6_au": result["C6_au"],
            "C6_GHz_um6": result["C6_GHz_um6"],
            "C6_scaled": c6_scaled(result["C6_au"], result["nu"]),
        })
    logger.info("C6 scan of %s over n=%d..%d finished", symmetry, nmin, nmax)
    return pd.DataFrame(rows)


def c6_scaling(frame):
    """Log-log slope of |C6| against nu"""
    return loglog_fit(frame["nu"], frame["C6_au"])


def pair_basis(target, dn=DEFAULT_DN, lmax=DEFAULT_LMAX, energy_window_ghz=DEFAULT_PAIR_WINDOW_GHZ):
    """
    Pair states with the target's M, |n - n_target| <= dn, l <= lmax and
    energy within the window of the target pair energy

    Returns:
        list: PairState objects, target first, the rest sorted by energy
    """
    n_values = (target.atom1.level.n, target.atom2.level.n)
    nmin, nmax = min(n_values) - dn, max(n_values) + dn
    states = []
    for l in range(lmax + 1):
        for F in f_values(l):
            for level in levels_for_n(format_symmetry(l, F), nmin, nmax):
                states.extend(RydbergState(level, m) for m in projections(F))

    reference = target.energy_ghz
    basis = []
    for state1 in states:
        for state2 in states:
            if state1.m + state2.m != target.M:
                continue
            if abs(state1.energy_ghz + state2.energy_ghz - reference) <= energy_window_ghz:
                pair = PairState(state1, state2)
                if pair != target:
                    basis.append(pair)
    basis.sort(key=lambda pair: (pair.energy_ghz, pair.atom1.l, pair.atom2.l, pair.atom1.m))
    return [target] + basis


def _curves(target, basis, R_um):
    offsets = np.array([pair.energy_ghz for pair in basis]) - target.energy_ghz
    couplings = c3_matrix(basis)
    order = np.argsort(R_um)[::-1]
    energies = np.empty((len(R_um), len(basis)))
    tracked = np.empty(len(R_um))
    previous = np.zeros(len(basis))
    previous[0] = 1.0
    for index in order:
        values, vectors = eigh(np.diag(offsets) + couplings / R_um[index] ** 3)
        choice = int(np.argmax(np.abs(vectors.T @ previous)))
        energies[index] = values
        tracked[index] = values[choice]
        previous = vectors[:, choice]
    return energies, tracked


def pair_potential_curves(target, R_um, dn=DEFAULT_DN, lmax=DEFAULT_LMAX,
                          energy_window_ghz=DEFAULT_PAIR_WINDOW_GHZ, convergence_tolerance=None):
    """
    Diagonalise the pair Hamiltonian on a grid of internuclear distances

    Args:
        target (PairState): Pair whose curve is tracked
        R_um (array): Internuclear distances in um
        dn, lmax (int): Basis policy
        energy_window_ghz (float): Basis energy window around the target
        convergence_tolerance (float, optional): If set, repeat the smallest-R
            solve with a 10% larger window and raise when the tracked shift
            changes by more than this fraction

    Returns:
        PairCurves: Eigenvalues and the tracked target curve, GHz relative
            to the unperturbed target pair energy
    """
    R_um = np.asarray(R_um, dtype=float)
    if R_um.size == 0 or np.any(R_um <= 0):
        raise DomainError("internuclear distances must be positive")

    basis = pair_basis(target, dn, lmax, energy_window_ghz)
    energies, tracked = _curves(target, basis, R_um)
    logger.info("pair curves: %d basis states, %d distances", len(basis), len(R_um))

    if convergence_tolerance is not None:
        inner = np.array([R_um.min()])
        larger = pair_basis(target, dn, lmax, 1.1 * energy_window_ghz)
        _, check = _curves(target, larger, inner)
        reference = tracked[int(np.argmin(R_um))]
        if abs(check[0] - reference) > convergence_tolerance * max(abs(reference), 1e-12):
            raise ConvergenceError("pair basis too small for the target curve",
                                   shift=float(reference), enlarged=float(check[0]))
    return PairCurves(R_um, energies, tracked, target, len(basis))


def c6_from_basis(target, basis):
    """Second-order C6 restricted to a given pair basis (target first)"""
    couplings = [c3_element(target, pair) for pair in basis[1:]]
    energies = [pair.energy_ghz for pair in basis[1:]]
    c6, _ = second_order_c6(target.energy_ghz, couplings, energies)
    return c6


def van_der_waals_radius(R_um, shift_ghz, c6, tolerance=0.1):
    """
    Largest R where a curve departs from C6/R^6 by more than the tolerance

    Args:
        R_um (array): Internuclear distances
        shift_ghz (array): Curve relative to the asymptotic pair energy
        c6 (float): C6 in GHz um^6
        tolerance (float): Relative residual that ends the van der Waals regime

    Returns:
        float or None: R_vdW in um, None when the whole curve follows C6/R^6
    """
    R_um = np.asarray(R_um, dtype=float)
    model = c6 / R_um**6
    residual = np.abs(np.asarray(shift_ghz, dtype=float) - model) / np.abs(model)
    outside = R_um[residual > tolerance]
    return float(outside.max()) if outside.size else None
