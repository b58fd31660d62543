"""
Wigner 3j, 6j and 9j symbols and Clebsch-Gordan coefficients.

Public functions take ordinary spins (0, 0.5, 1, 1.5, ...). Internally every
angular momentum is carried as a doubled integer so half-integers never meet a
float equality test, and the Racah sums run over a log-factorial table so the
symbols stay finite up to spins of 50.
"""
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

_LOG_FACT = gammaln(np.arange(1, 513, dtype=float))


def twice(j):
    """
    Encode a spin as a doubled integer

    Args:
        j (float): Integer or half-integer spin or projection

    Returns:
        int: 2j

    Raises:
        ValueError: If j is not a multiple of 1/2
    """
    tj = int(round(2 * float(j)))
    if abs(tj - 2 * float(j)) > 1e-9:
        raise ValueError(f"{j} is not an integer or half-integer")
    return tj


def _lf(n2):
    # log(n!) for n given doubled
    return _LOG_FACT[n2 // 2]


def _log_delta(a, b, c):
    return _lf(a + b - c) + _lf(a - b + c) + _lf(-a + b + c) - _lf(a + b + c + 2)


def _triangle(a, b, c):
    return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b


@lru_cache(maxsize=200_000)
def wigner3j_twice(j1, j2, j3, m1, m2, m3):
    """3j symbol with all arguments doubled"""
    if m1 + m2 + m3 != 0 or not _triangle(j1, j2, j3):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    if (j1 + m1) % 2 or (j2 + m2) % 2 or (j3 + m3) % 2:
        return 0.0
    kmin = max(0, j2 - j3 - m1, j1 - j3 + m2)
    kmax = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    if kmin > kmax:
        return 0.0
    log_pre = 0.5 * (
        _log_delta(j1, j2, j3)
        + _lf(j1 + m1) + _lf(j1 - m1)
        + _lf(j2 + m2) + _lf(j2 - m2)
        + _lf(j3 + m3) + _lf(j3 - m3)
    )
    total = 0.0
    for k in range(kmin, kmax + 1, 2):
        log_den = (
            _lf(k) + _lf(j3 - j2 + k + m1) + _lf(j3 - j1 + k - m2)
            + _lf(j1 + j2 - j3 - k) + _lf(j1 - k - m1) + _lf(j2 - k + m2)
        )
        sign = -1.0 if (k // 2) % 2 else 1.0
        total += sign * np.exp(log_pre - log_den)
    phase = (j1 - j2 - m3) // 2
    return -total if phase % 2 else total


@lru_cache(maxsize=200_000)
def wigner6j_twice(j1, j2, j3, j4, j5, j6):
    """6j symbol with all arguments doubled"""
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if not all(_triangle(*t) for t in triads):
        return 0.0
    a1 = j1 + j2 + j3
    a2 = j1 + j5 + j6
    a3 = j4 + j2 + j6
    a4 = j4 + j5 + j3
    b1 = j1 + j2 + j4 + j5
    b2 = j2 + j3 + j5 + j6
    b3 = j3 + j1 + j6 + j4
    tmin = max(a1, a2, a3, a4)
    tmax = min(b1, b2, b3)
    if tmin > tmax:
        return 0.0
    log_pre = 0.5 * sum(_log_delta(*t) for t in triads)
    total = 0.0
    for t in range(tmin, tmax + 1, 2):
        log_num = _lf(t + 2)
        log_den = (
            _lf(t - a1) + _lf(t - a2) + _lf(t - a3) + _lf(t - a4)
            + _lf(b1 - t) + _lf(b2 - t) + _lf(b3 - t)
        )
        sign = -1.0 if (t // 2) % 2 else 1.0
        total += sign * np.exp(log_pre + log_num - log_den)
    return total


@lru_cache(maxsize=100_000)
def wigner9j_twice(j1, j2, j3, j4, j5, j6, j7, j8, j9):
    """
    9j symbol {j1 j2 j3; j4 j5 j6; j7 j8 j9} with all arguments doubled,
    summed over products of three 6j symbols
    """
    xmin = max(abs(j1 - j9), abs(j4 - j8), abs(j2 - j6))
    xmax = min(j1 + j9, j4 + j8, j2 + j6)
    total = 0.0
    for x in range(xmin, xmax + 1, 2):
        sign = -1.0 if x % 2 else 1.0
        total += (
            sign * (x + 1)
            * wigner6j_twice(j1, j4, j7, j8, j9, x)
            * wigner6j_twice(j2, j5, j8, j4, x, j6)
            * wigner6j_twice(j3, j6, j9, x, j1, j2)
        )
    return total


def wigner3j(j1, j2, j3, m1, m2, m3):
    """
    Wigner 3j symbol (j1 j2 j3; m1 m2 m3)

    Returns 0 for any argument set that violates the selection rules.
    """
    return wigner3j_twice(twice(j1), twice(j2), twice(j3), twice(m1), twice(m2), twice(m3))


def wigner6j(j1, j2, j3, j4, j5, j6):
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6}"""
    return wigner6j_twice(twice(j1), twice(j2), twice(j3), twice(j4), twice(j5), twice(j6))


def wigner9j(j1, j2, j3, j4, j5, j6, j7, j8, j9):
    """Wigner 9j symbol with rows (j1 j2 j3), (j4 j5 j6), (j7 j8 j9)"""
    args = tuple(twice(j) for j in (j1, j2, j3, j4, j5, j6, j7, j8, j9))
    return wigner9j_twice(*args)


def clebsch_gordan(j1, m1, j2, m2, j, m):
    """
    Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m>

    Args:
        j1, m1 (float): First angular momentum and projection
        j2, m2 (float): Second angular momentum and projection
        j, m (float): Coupled angular momentum and projection

    Returns:
        float: The coupling coefficient, 0 outside the selection rules
    """
    tj1, tj2, tj = twice(j1), twice(j2), twice(j)
    phase = (tj1 - tj2 + twice(m)) // 2
    value = np.sqrt(tj + 1.0) * wigner3j_twice(tj1, tj2, tj, twice(m1), twice(m2), -twice(m))
    return -value if phase % 2 else value


def reduced_spherical_harmonic(l, k, lp):
    """
    Reduced matrix element <l||C^k||l'> of the renormalised spherical harmonic

    Args:
        l (int): Bra orbital angular momentum
        k (int): Tensor rank
        lp (int): Ket orbital angular momentum

    Returns:
        float: (-1)^l sqrt((2l+1)(2l'+1)) (l k l'; 0 0 0)
    """
    sign = -1.0 if l % 2 else 1.0
    return sign * np.sqrt((2 * l + 1) * (2 * lp + 1)) * wigner3j(l, k, lp, 0, 0, 0)


def spin_range(a, b):
    """All couplings |a-b| .. a+b of two spins, as floats"""
    ta, tb = twice(a), twice(b)
    return [t / 2.0 for t in range(abs(ta - tb), ta + tb + 1, 2)]


def projections(j):
    """Projections -j .. j in ascending order"""
    tj = twice(j)
    return [m / 2.0 for m in range(-tj, tj + 1, 2)]
