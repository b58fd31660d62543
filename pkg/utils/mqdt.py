"""
Frame-transformation multichannel quantum defect theory for the 1snl Rydberg
series of helium-3.

Energies are in GHz relative to the degeneracy-weighted average of the two
He+ 1s hyperfine thresholds. At short range the reaction matrix is diagonal
in the (S L)J basis, K = tan(pi mu_S(eps)). The frame transformation U
rotates it onto the long-range channels (f_c, j_e), and bound states are the
zeros of det(K_LR + tan(pi nu)). The determinant is evaluated in the
pole-free form det(K_LR cos(pi nu) + sin(pi nu)).
"""
import logging
from functools import lru_cache

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from models.rydberg import QuantumDefectFit, RydbergLevel, format_symmetry, parse_symmetry
from utils.angular import spin_range, wigner6j, wigner9j
from utils.constants import HARTREE_GHZ, RY_HE3_AU, RY_HE3_GHZ, THRESHOLD_FC0_GHZ, THRESHOLD_FC1_GHZ
from utils.errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

NUCLEAR_SPIN = 0.5
CORE_SPIN = 0.5
NU_STEP = 0.002
MIN_FIT_NU = 5.0
FIXED_POINT_TOLERANCE = 1e-12
MAX_FIXED_POINT_ITERATIONS = 50

THRESHOLDS = {1: THRESHOLD_FC1_GHZ, 0: THRESHOLD_FC0_GHZ}

# mu0 .. mu4 of mu(eps), eps in atomic units
QUANTUM_DEFECTS = {
    "1S0": (0.139716, 0.054412, 0.323622, -23.4026, 727.44),
    "3S1": (0.296655, 0.0754184, 0.262775, -20.269, 598.537),
    "1P1": (-0.0121597, 0.0136929, 0.337192, -26.8352, 876.553),
    "3P0": (0.0683488, -0.0385954, 0.218744, -25.0712, 795.634),
    "3P1": (0.0683787, -0.0385723, 0.218726, -25.0681, 795.521),
    "3P2": (0.0683811, -0.0385699, 0.218737, -25.0708, 795.618),
    "1D2": (0.00211422, -0.00722717, 0.158517, -10.9504, 254.678),
    "3D1": (0.00288581, -0.0137631, 0.159786, -10.9372, 254.559),
    "3D2": (0.00289117, -0.0137623, 0.159803, -10.9383, 254.592),
    "3D3": (0.00289155, -0.0137633, 0.159795, -10.9382, 254.593),
    "1F3": (0.000440873, -0.00472127, 0.27874, -26.575, 863.541),
    "3F2": (0.000445445, -0.00482053, 0.279593, -26.5759, 863.522),
    "3F3": (0.000449169, -0.00479613, 0.279751, -26.5768, 863.502),
    # mu2 printed without its leading "0." in the source table
    "3F4": (0.000447954, -0.00482045, 0.279605, -26.5772, 863.565),
}


def series_label(S, L, J):
    return f"{int(round(2 * S + 1))}{'SPDF'[int(L)]}{int(round(J))}"


def defect_fit(series):
    if series not in QUANTUM_DEFECTS:
        raise DomainError(f"no quantum defect fit for series '{series}'", series=series)
    return QuantumDefectFit(series, QUANTUM_DEFECTS[series])


def energy_parameter(energy_ghz):
    """eps = Ry/nu^2 in atomic units for an energy below the threshold average"""
    return -np.asarray(energy_ghz, dtype=float) / HARTREE_GHZ


def nu_from_energy(energy_ghz, threshold_ghz):
    return np.sqrt(RY_HE3_GHZ / (threshold_ghz - np.asarray(energy_ghz, dtype=float)))


def energy_from_nu(nu, threshold_ghz):
    return threshold_ghz - RY_HE3_GHZ / np.asarray(nu, dtype=float) ** 2


def _check_fit_range(eps):
    limit = RY_HE3_AU / MIN_FIT_NU**2
    if np.any(np.abs(eps) > limit):
        logger.warning("quantum defect evaluated at |eps| up to %.4g a.u., beyond the fitted range %.4g; "
                       "extrapolating", float(np.max(np.abs(eps))), limit)


def quantum_defect(series, eps):
    """
    Energy-dependent quantum defect of one (S L)J series

    Args:
        series (str): Series label such as '3S1' or '1P1'
        eps (float or array): Ry/nu^2 in atomic units

    Returns:
        float or ndarray: mu(eps)
    """
    _check_fit_range(eps)
    return defect_fit(series).evaluate(eps)


def _long_range_channels(l, F):
    return [(f_c, j_e) for f_c in (1.0, 0.0) for j_e in spin_range(l, 0.5) if F in spin_range(f_c, j_e)]


def _short_range_channels(l, F):
    return [(S, J) for S in (0.0, 1.0) for J in spin_range(l, S) if F in spin_range(J, NUCLEAR_SPIN)]


def _recoupling(l, F, f_c, j_e, S, J):
    # <[(I j_c) f_c, j_e] F | [I, (S L) J] F> with j_c = s_c and l_c = 0
    exponent = int(round(NUCLEAR_SPIN + CORE_SPIN + j_e + F))
    phase = -1.0 if exponent % 2 else 1.0
    norm = np.sqrt((2 * S + 1) * (2 * l + 1) * (2 * CORE_SPIN + 1) * (2 * j_e + 1) * (2 * f_c + 1) * (2 * J + 1))
    six = wigner6j(NUCLEAR_SPIN, CORE_SPIN, f_c, j_e, F, J)
    nine = wigner9j(CORE_SPIN, 0.5, S, 0, l, l, CORE_SPIN, j_e, J)
    return phase * norm * six * nine


def frame_transformation(l, F):
    """
    Frame transformation between short- and long-range channels

    Args:
        l (int): Rydberg electron orbital angular momentum
        F (float): Total angular momentum

    Returns:
        tuple: (U, long_range, short_range) with U[i, a] the overlap of
            long-range channel i = (f_c, j_e) with short-range channel a = (S, J)
    """
    long_range = _long_range_channels(l, F)
    short_range = _short_range_channels(l, F)
    if not long_range or not short_range:
        raise DomainError(f"no channels for l={l}, F={F}", l=l, F=F)
    if len(long_range) != len(short_range):
        raise DomainError(f"channel count mismatch for l={l}, F={F}", l=l, F=F)

    U = np.array([[_recoupling(l, F, f_c, j_e, S, J) for S, J in short_range] for f_c, j_e in long_range])
    return U, long_range, short_range


class ChannelSet:
    """
    Class representing the coupled channels of one (l, F) symmetry

    With ``decouple`` the long-range reaction matrix is cut to its diagonal,
    which turns the set into independent single-channel series.
    """
    def __init__(self, l, F, decouple=False):
        self.l = int(l)
        self.F = float(F)
        self.decouple = decouple
        self.U, self.long_range, self.short_range = frame_transformation(self.l, self.F)
        self.thresholds = np.array([THRESHOLDS[int(f_c)] for f_c, _ in self.long_range])
        self.fits = [defect_fit(series_label(S, self.l, J)) for S, J in self.short_range]

    @classmethod
    def from_symmetry(cls, text, decouple=False):
        l, F = parse_symmetry(text)
        return cls(l, F, decouple=decouple)

    @property
    def symmetry(self):
        return format_symmetry(self.l, self.F)

    @property
    def size(self):
        return len(self.long_range)

    def short_range_k(self, eps):
        """tan(pi mu_a(eps)) for every short-range channel, shape (n, channels)"""
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        return np.tan(np.pi * np.stack([fit.evaluate(eps) for fit in self.fits], axis=-1))

    def long_range_k(self, energy_ghz):
        eps = energy_parameter(np.atleast_1d(energy_ghz))
        K = np.einsum("ia,na,ja->nij", self.U, self.short_range_k(eps), self.U)
        if self.decouple:
            K = K * np.eye(self.size)
        return K

    def nus(self, energy_ghz):
        energy = np.atleast_1d(np.asarray(energy_ghz, dtype=float))
        return nu_from_energy(energy[:, None], self.thresholds[None, :])

    def _matrix(self, energy_ghz):
        nus = self.nus(energy_ghz)
        K = self.long_range_k(energy_ghz)
        matrix = K * np.cos(np.pi * nus)[:, None, :]
        matrix = matrix + np.einsum("ij,nj->nij", np.eye(self.size), np.sin(np.pi * nus))
        return matrix, nus

    def determinant(self, energy_ghz):
        """det(K_LR cos(pi nu) + sin(pi nu)) at each energy"""
        matrix, _ = self._matrix(energy_ghz)
        return np.linalg.det(matrix)

    def level(self, energy_ghz):
        """Rydberg level at a root of the determinant, with channel amplitudes"""
        matrix, nus = self._matrix(energy_ghz)
        _, _, vh = np.linalg.svd(matrix[0])
        # Z_i ~ a_i nu_i^(3/2) / cos(pi nu_i) with a = cos(pi nu) b
        amplitudes = vh[-1] * nus[0] ** 1.5
        amplitudes = amplitudes / np.linalg.norm(amplitudes)
        amplitudes = amplitudes * np.sign(amplitudes[np.argmax(np.abs(amplitudes))])
        return RydbergLevel(self.l, self.F, energy_ghz, self.long_range, nus[0], amplitudes, self.thresholds)

    def to_dict(self):
        return {
            "symmetry": self.symmetry,
            "long_range": [list(channel) for channel in self.long_range],
            "short_range": [list(channel) for channel in self.short_range],
            "U": self.U.tolist(),
            "thresholds_GHz": self.thresholds.tolist(),
        }


def bound_states(channels, window, step=NU_STEP):
    """
    All bound states of a channel set inside an energy window

    The determinant is sampled on a grid of constant step in nu relative to
    the lowest threshold and every sign change is refined with Brent's method.

    Args:
        channels (ChannelSet): The coupled channels
        window (tuple): (E_min, E_max) in GHz, below the lowest threshold
        step (float): Grid step in nu

    Returns:
        list: RydbergLevel objects sorted by energy
    """
    e_lo, e_hi = sorted(float(e) for e in window)
    lowest = float(channels.thresholds.min())
    if e_hi >= lowest:
        raise DomainError(f"energy window must lie below the lowest threshold {lowest:.6f} GHz",
                          window=[e_lo, e_hi], threshold=lowest)

    nu_lo, nu_hi = float(nu_from_energy(e_lo, lowest)), float(nu_from_energy(e_hi, lowest))
    nu_grid = np.append(np.arange(nu_lo, nu_hi, step), nu_hi)
    energies = energy_from_nu(nu_grid, lowest)
    _check_fit_range(energy_parameter(energies))
    values = channels.determinant(energies)

    def det(energy):
        return float(channels.determinant(energy)[0])

    levels = []
    for index in np.flatnonzero(values[:-1] * values[1:] < 0):
        root = brentq(det, energies[index], energies[index + 1], xtol=1e-12)
        levels.append(channels.level(root))
    logger.info("%s: %d bound states in [%.4f, %.4f] GHz", channels.symmetry, len(levels), e_lo, e_hi)
    return levels


def window_for_n(nmin, nmax):
    """Energy window (GHz) spanning nu1 in [nmin - 1/2, nmax + 1/2)"""
    if nmin > nmax or nmin < 1:
        raise DomainError(f"invalid n range {nmin}..{nmax}")
    return (float(energy_from_nu(nmin - 0.5, THRESHOLD_FC1_GHZ)), float(energy_from_nu(nmax + 0.5, THRESHOLD_FC1_GHZ)))


@lru_cache(maxsize=128)
def levels_for_n(symmetry, nmin, nmax):
    """
    Bound states of a symmetry whose integer label n lies in [nmin, nmax]

    Args:
        symmetry (str): Symmetry name such as 'nsF32'
        nmin, nmax (int): Inclusive range of n labels

    Returns:
        tuple: RydbergLevel objects sorted by energy
    """
    channels = ChannelSet.from_symmetry(symmetry)
    levels = bound_states(channels, window_for_n(nmin, nmax))
    return tuple(level for level in levels if nmin <= level.n <= nmax)


def levels_frame(levels):
    """
    Tabulate bound states with nu relative to both thresholds

    Returns:
        DataFrame: n, E_GHz, nu1, nu0, frac_fc1
    """
    energies = np.array([level.energy_ghz for level in levels], dtype=float)
    return pd.DataFrame({
        "n": [level.n for level in levels],
        "E_GHz": energies,
        "nu1": nu_from_energy(energies, THRESHOLD_FC1_GHZ),
        "nu0": nu_from_energy(energies, THRESHOLD_FC0_GHZ),
        "frac_fc1": [level.frac_fc1 for level in levels],
    })


def lufano_data(channels, window):
    """
    Lu-Fano pairs of the bound states in a window

    Returns:
        DataFrame: nu1, nu0 and both taken modulo one
    """
    frame = levels_frame(bound_states(channels, window))
    frame["nu1_mod1"] = np.mod(frame["nu1"], 1.0)
    frame["nu0_mod1"] = np.mod(frame["nu0"], 1.0)
    return frame[["nu1", "nu0", "nu1_mod1", "nu0_mod1"]]


def single_channel_levels(series, n_values, threshold_ghz=THRESHOLD_FC1_GHZ, tolerance=FIXED_POINT_TOLERANCE):
    """
    Single-channel energies E = I - Ry/(n - mu(eps))^2 by fixed-point iteration

    Args:
        series (str): Series label such as '3S1'
        n_values (iterable): Principal quantum numbers
        threshold_ghz (float): Series limit in GHz
        tolerance (float): Stop once |mu_k+1 - mu_k| falls below this value

    Returns:
        DataFrame: n, nu, mu, E_GHz and the iteration count per level
    """
    fit = defect_fit(series)
    rows = []
    for n in n_values:
        mu = float(fit.coefficients[0])
        for iteration in range(1, MAX_FIXED_POINT_ITERATIONS + 1):
            nu = n - mu
            if nu <= 0:
                raise DomainError(f"n={n} gives a non-positive effective quantum number", n=n)
            new_mu = float(fit.evaluate(energy_parameter(energy_from_nu(nu, threshold_ghz))))
            converged = abs(new_mu - mu) < tolerance
            mu = new_mu
            if converged:
                break
        else:
            raise ConvergenceError(f"quantum defect iteration for {series} n={n} did not converge", n=n)

        nu = n - mu
        _check_fit_range(energy_parameter(energy_from_nu(nu, threshold_ghz)))
        rows.append({"n": int(n), "nu": nu, "mu": mu,
                     "E_GHz": float(energy_from_nu(nu, threshold_ghz)), "iterations": iteration})
    return pd.DataFrame(rows)
