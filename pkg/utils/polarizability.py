"""
Dynamic (ac Stark) polarizabilities of hyperfine sublevels.

The scalar, vector and tensor parts are summed over every catalog line that
touches the state's fine-structure level. Near a line the sum runs over the
resolved upper hyperfine levels F'; far from it (detuning above
``JBASIS_FACTOR`` times the manifold's hyperfine spread) the line is
evaluated in the J basis and projected onto F, which is the same physics
without the 6j bookkeeping.
"""
import logging
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect

from models.results import PolarizabilityCurve
from utils.angular import spin_range, wigner6j
from utils.constants import AU_DIPOLE, AU_POLARIZABILITY, C_LIGHT, EPS0, H_PLANCK, HBAR, M_HE3, wavelength_to_angular
from utils.errors import CatalogError, DomainError, NoRootError, RegimeError, ResonanceError

logger = logging.getLogger(__name__)

DEFAULT_EXCLUSION = 2 * np.pi * 10e9
JBASIS_FACTOR = 100.0
MAGIC_SCAN_POINTS = 2001


def hyperfine_shift_hz(a_hz, I, J, F):
    """
    Magnetic-dipole hyperfine energy of level F

    Args:
        a_hz (float or None): Hyperfine A constant in Hz
        I (float): Nuclear spin
        J (float): Electronic angular momentum
        F (float): Total angular momentum

    Returns:
        float: A/2 [F(F+1) - I(I+1) - J(J+1)] in Hz, 0 when A is unknown
    """
    if not a_hz:
        return 0.0
    return 0.5 * a_hz * (F * (F + 1) - I * (I + 1) - J * (J + 1))


def _jbasis_projection(J, I, F, rank):
    # F-basis vector/tensor polarizability in units of the J-basis one
    if rank == 1:
        if J == 0 or F == 0:
            return 0.0
        sign = -1.0 if int(round(J + I + F + 1)) % 2 else 1.0
        return sign * wigner6j(F, J, I, J, F, 1) * np.sqrt(
            F * (2 * F + 1) * (2 * J + 1) * (J + 1) / (J * (F + 1)))
    if J < 1 or F < 1:
        return 0.0
    sign = -1.0 if int(round(J + I + F)) % 2 else 1.0
    return sign * wigner6j(F, J, I, J, F, 2) * np.sqrt(
        F * (2 * F - 1) * (2 * F + 1) * (J + 1) * (2 * J + 1) * (2 * J + 3)
        / ((F + 1) * (2 * F + 3) * J * (2 * J - 1)))


class _LineTerms:
    """Resonant denominators and numerators contributed by one catalog line"""

    def __init__(self, line, level, state):
        other = line.other(level)
        J, Jp, I, F = level.J, other.J, state.I, state.F
        own_hz = hyperfine_shift_hz(level.hyperfine_a_hz, I, J, F)
        d2_j = line.strength_au * AU_DIPOLE**2

        self.label = other.key
        self.j_res = 2 * np.pi * (other.energy_hz - level.energy_hz)

        f_res, c0, c1, c2, shifts = [], [], [], [], []
        for Fp in spin_range(Jp, I):
            if abs(Fp - F) > 1:
                continue
            sixj = wigner6j(J, Jp, 1, Fp, F, I)
            if sixj == 0.0:
                continue
            d2 = d2_j * (2 * Fp + 1) * sixj**2
            shift = hyperfine_shift_hz(other.hyperfine_a_hz, I, Jp, Fp)
            shifts.append(shift)
            f_res.append(2 * np.pi * (other.energy_hz + shift - level.energy_hz - own_hz))
            c0.append(2.0 * d2 / (3.0 * HBAR))
            s1 = -1.0 if int(round(F + Fp + 1)) % 2 else 1.0
            s2 = -1.0 if int(round(F + Fp)) % 2 else 1.0
            c1.append(s1 * np.sqrt(6 * F * (2 * F + 1) / (F + 1)) * wigner6j(1, 1, 1, F, F, Fp) * d2 / HBAR
                      if F > 0 else 0.0)
            c2.append(s2 * np.sqrt(40 * F * (2 * F + 1) * (2 * F - 1) / (3 * (F + 1) * (2 * F + 3)))
                      * wigner6j(1, 1, 2, F, F, Fp) * d2 / HBAR if F >= 1 else 0.0)
        self.f_res = np.array(f_res)
        self.f_coef = np.array([c0, c1, c2]).reshape(3, -1)
        spread_hz = (np.ptp(shifts) if shifts else 0.0) + abs(own_hz)
        self.spread = 2 * np.pi * spread_hz

        j0 = 2.0 * d2_j / (3.0 * (2 * J + 1) * HBAR)
        s1 = -1.0 if int(round(J + Jp + 1)) % 2 else 1.0
        s2 = -1.0 if int(round(J + Jp)) % 2 else 1.0
        j1 = (s1 * np.sqrt(6 * J / ((J + 1) * (2 * J + 1))) * wigner6j(1, 1, 1, J, J, Jp) * d2_j / HBAR
              if J > 0 else 0.0)
        j2 = (s2 * np.sqrt(40 * J * (2 * J - 1) / (3 * (J + 1) * (2 * J + 1) * (2 * J + 3)))
              * wigner6j(1, 1, 2, J, J, Jp) * d2_j / HBAR if J >= 1 else 0.0)
        self.j_coef = np.array([j0, j1 * _jbasis_projection(J, I, F, 1), j2 * _jbasis_projection(J, I, F, 2)])

    def nearest_resonance(self, omega):
        candidates = np.abs(self.f_res) if self.f_res.size else np.array([abs(self.j_res)])
        return np.min(np.abs(omega - candidates))

    def use_jbasis(self, omega):
        return abs(abs(omega) - abs(self.j_res)) > JBASIS_FACTOR * self.spread

    def contribution(self, omega, path):
        if path == "J" or (path == "auto" and self.use_jbasis(omega)) or not self.f_res.size:
            den = self.j_res**2 - omega**2
            c0, c1, c2 = self.j_coef
            return np.array([c0 * self.j_res / den, c1 * omega / den, c2 * self.j_res / den])
        den = self.f_res**2 - omega**2
        c0, c1, c2 = self.f_coef
        return np.array([
            np.sum(c0 * self.f_res / den),
            np.sum(c1 * omega / den),
            np.sum(c2 * self.f_res / den),
        ])


@lru_cache(maxsize=64)
def _state_terms(state, catalog):
    level = catalog.level(state.level_key)
    lines = catalog.lines_of(level)
    if not lines:
        raise CatalogError(f"no lines connect to {level.key}")
    return tuple(_LineTerms(line, level, state) for line in lines)


def alpha_components(state, omega, catalog, exclusion=DEFAULT_EXCLUSION, path="auto"):
    """
    Scalar, vector and tensor polarizabilities of a hyperfine state

    Args:
        state (HyperfineStateLabel): The state
        omega (float): Laser angular frequency in rad/s
        catalog (AtomicCatalog): Level and line data
        exclusion (float): Half-width (rad/s) of the window around each
            resonance inside which no value is returned
        path (str): 'auto', 'F' (hyperfine resolved) or 'J' (large detuning)

    Returns:
        tuple: (alpha0, alpha1, alpha2) in C m^2/V
    """
    if path not in ("auto", "F", "J"):
        raise DomainError(f"unknown evaluation path '{path}'")
    terms = _state_terms(state, catalog)
    total = np.zeros(3)
    for term in terms:
        if term.nearest_resonance(omega) < exclusion:
            raise ResonanceError(
                f"omega is within the exclusion window of the {term.label} resonance",
                omega=float(omega),
            )
        total += term.contribution(omega, path)
    return tuple(float(x) for x in total)


def tensor_prefactor(theta, F, mF):
    """
    Angular weight of the tensor polarizability for linear polarization

    Args:
        theta (float): Angle between polarization and quantization axis (rad)
        F (float): Total angular momentum
        mF (float): Projection

    Returns:
        float: (3cos^2 theta - 1)/2 * (3 mF^2 - F(F+1)) / (F(2F-1)), 0 for F < 1
    """
    if F < 1:
        return 0.0
    return 0.5 * (3 * np.cos(theta) ** 2 - 1) * (3 * mF**2 - F * (F + 1)) / (F * (2 * F - 1))


def alpha_total(state, omega, catalog, theta=0.0, exclusion=DEFAULT_EXCLUSION, path="auto"):
    """
    Total polarizability under linear polarization (vector part dropped)

    Returns:
        float: alpha in C m^2/V
    """
    a0, _, a2 = alpha_components(state, omega, catalog, exclusion=exclusion, path=path)
    return a0 + a2 * tensor_prefactor(theta, state.F, state.mF)


def to_atomic_units(alpha_si):
    return np.asarray(alpha_si) / AU_POLARIZABILITY


def polarizability_curve(state, wavelengths, catalog, theta=0.0, exclusion=DEFAULT_EXCLUSION):
    """
    Sample the polarizability of a state over a wavelength grid

    Grid points inside an exclusion window are dropped from the curve.

    Args:
        state (HyperfineStateLabel): The state
        wavelengths (ndarray): Strictly increasing wavelengths in m
        catalog (AtomicCatalog): Level and line data
        theta (float): Polarization angle in rad

    Returns:
        PolarizabilityCurve: Curve with SI arrays
    """
    wavelengths = np.asarray(wavelengths, dtype=float)
    if wavelengths.ndim != 1 or np.any(np.diff(wavelengths) <= 0):
        raise DomainError("wavelength grid must be one-dimensional and strictly increasing")
    kept, rows = [], []
    for wavelength in wavelengths:
        try:
            a0, a1, a2 = alpha_components(state, wavelength_to_angular(wavelength), catalog, exclusion=exclusion)
        except ResonanceError:
            continue
        kept.append(wavelength)
        rows.append((a0, a1, a2, a0 + a2 * tensor_prefactor(theta, state.F, state.mF)))
    rows = np.array(rows).reshape(-1, 4)
    logger.info("polarizability curve for %s: %d of %d points kept", state, len(kept), len(wavelengths))
    return PolarizabilityCurve(
        wavelengths=np.array(kept),
        alpha0=rows[:, 0],
        alpha1=rows[:, 1],
        alpha2=rows[:, 2],
        alpha_total=rows[:, 3],
        state=state,
        theta=theta,
        exclusion=exclusion,
    )


def differential_polarizability(state_a, state_b, wavelength, catalog, theta=0.0, path="J"):
    """
    Relative differential polarizability (alpha_a - alpha_b) / alpha_a

    The J-basis default leaves the scalar part state independent, so the
    differential within the metastable manifold is the tensor light shift
    alone. path="F" adds the scalar term from the ground hyperfine
    splitting, which scales as the splitting over the detuning.
    """
    omega = wavelength_to_angular(wavelength)
    alpha_a = alpha_total(state_a, omega, catalog, theta, path=path)
    alpha_b = alpha_total(state_b, omega, catalog, theta, path=path)
    return (alpha_a - alpha_b) / alpha_a


def _resonances_between(states, catalog, omega_lo, omega_hi):
    for state in states:
        for term in _state_terms(state, catalog):
            res = np.abs(term.f_res) if term.f_res.size else np.array([abs(term.j_res)])
            if np.any((res > omega_lo) & (res < omega_hi)):
                return True
    return False


def find_magic_wavelength(state_a, state_b, bracket, catalog, theta=0.0, exclusion=DEFAULT_EXCLUSION):
    """
    Wavelength at which two states have equal polarizability

    The bracket is scanned for sign changes of alpha_a - alpha_b that are not
    caused by a pole, and the first one (shortest wavelength) is refined by
    bisection.

    Args:
        state_a (HyperfineStateLabel): First state
        state_b (HyperfineStateLabel): Second state
        bracket (tuple): (lambda_min, lambda_max) in m
        catalog (AtomicCatalog): Level and line data
        theta (float): Polarization angle in rad

    Returns:
        float: Magic wavelength in m
    """
    if state_a == state_b:
        raise DomainError("magic wavelength of a state with itself is not an isolated root")
    lo, hi = sorted(bracket)

    def diff(wavelength):
        omega = wavelength_to_angular(wavelength)
        return alpha_total(state_a, omega, catalog, theta, exclusion) - alpha_total(state_b, omega, catalog, theta, exclusion)

    samples = []
    for wavelength in np.linspace(lo, hi, MAGIC_SCAN_POINTS):
        try:
            samples.append((wavelength, diff(wavelength)))
        except ResonanceError:
            samples.append((wavelength, None))

    for (w1, f1), (w2, f2) in zip(samples[:-1], samples[1:]):
        if f1 is None or f2 is None or np.sign(f1) == np.sign(f2):
            continue
        omega_hi, omega_lo = wavelength_to_angular(w1), wavelength_to_angular(w2)
        if _resonances_between((state_a, state_b), catalog, omega_lo, omega_hi):
            continue
        root = bisect(diff, w1, w2, xtol=1e-18, rtol=4 * np.finfo(float).eps, maxiter=200)
        logger.info("magic wavelength for %s / %s: %.4f nm", state_a, state_b, root * 1e9)
        return root
    raise NoRootError(f"no magic wavelength between {lo * 1e9:.2f} and {hi * 1e9:.2f} nm")


def trap_from_power(power, w0, wavelength, state, catalog, mass=M_HE3, theta=0.0, trap_type="red"):
    """
    Trap depth and frequencies of a Gaussian tweezer

    Args:
        power (float): Beam power in W
        w0 (float): Waist in m
        wavelength (float): Trap wavelength in m
        state (HyperfineStateLabel): Trapped state
        catalog (AtomicCatalog): Level and line data
        mass (float): Atomic mass in kg
        theta (float): Polarization angle in rad
        trap_type (str): 'red' (intensity maximum) or 'blue' (intensity minimum)

    Returns:
        dict: depth_hz, omega_r and omega_z (rad/s), z_r (m) and alpha_au
    """
    if power < 0 or w0 <= 0:
        raise DomainError("power must be non-negative and waist positive")
    alpha = alpha_total(state, wavelength_to_angular(wavelength), catalog, theta)
    if (trap_type == "red" and alpha < 0) or (trap_type == "blue" and alpha > 0):
        raise RegimeError(f"{state} is anti-trapped by a {trap_type}-detuned tweezer at {wavelength * 1e9:.1f} nm",
                          alpha_au=float(to_atomic_units(alpha)))
    intensity = 2 * power / (np.pi * w0**2)
    depth = abs(alpha) * intensity / (2 * EPS0 * C_LIGHT)
    z_r = np.pi * w0**2 / wavelength
    return {
        "depth_hz": depth / H_PLANCK,
        "omega_r": np.sqrt(4 * depth / (mass * w0**2)),
        "omega_z": np.sqrt(2 * depth / (mass * z_r**2)),
        "z_r": z_r,
        "alpha_au": float(to_atomic_units(alpha)),
    }


def scattering_rate(s, delta, gamma):
    """
    Photon scattering rate of a driven two-level transition

    Args:
        s (float): Saturation parameter
        delta (float): Detuning in rad/s
        gamma (float): Natural linewidth in rad/s

    Returns:
        float: Scattering rate Gamma (s/2) / (1 + (2 Delta/Gamma)^2 + s)
    """
    if np.any(np.asarray(s) < 0):
        raise DomainError("saturation parameter must be non-negative")
    return gamma * (s / 2) / (1 + (2 * delta / gamma) ** 2 + s)


def two_photon_rate_rescale(ref_rate, ref_s, ref_delta, target_s, target_delta):
    """
    Rescale a two-photon ionization rate with the s^2/Delta^2 law

    Args:
        ref_rate (float): Reference rate in 1/s
        ref_s (float): Reference saturation parameter
        ref_delta (float): Reference detuning (any unit, same as target)
        target_s (float): Target saturation parameter
        target_delta (float): Target detuning

    Returns:
        float: Rescaled rate in 1/s
    """
    if ref_delta == 0 or target_delta == 0:
        raise DomainError("two-photon rescaling needs non-zero detunings")
    return ref_rate * (target_s / ref_s) ** 2 * (ref_delta / target_delta) ** 2


# Ionization rate quoted for the s = 10, Delta = -10 MHz detection beam, which the
# s^2/Delta^2 law from the (0.07 1/s, s = 40, -35 MHz) reference does not give
QUOTED_TWO_PHOTON_RATE = 4e-4


def two_photon_discrepancy_report(ref_rate=0.07, ref_s=40.0, ref_delta=-35e6, target_s=10.0, target_delta=-10e6):
    """
    Compare the scaling-law rate with the quoted detection-beam estimate

    Returns:
        dict: formula rate, quoted rate and their ratio
    """
    rate = two_photon_rate_rescale(ref_rate, ref_s, ref_delta, target_s, target_delta)
    ratio = rate / QUOTED_TWO_PHOTON_RATE
    logger.warning(
        "two-photon ionization rescale gives %.4g 1/s, %.0fx the quoted %.1e 1/s; reporting the formula value",
        rate, ratio, QUOTED_TWO_PHOTON_RATE,
    )
    return {"formula_rate": rate, "quoted_rate": QUOTED_TWO_PHOTON_RATE, "ratio": ratio}


def wavelength_grid(lambda_min, lambda_max, points):
    return np.linspace(lambda_min, lambda_max, int(points))
