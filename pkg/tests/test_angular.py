import numpy as np
import pytest

from utils.angular import (
    clebsch_gordan,
    projections,
    reduced_spherical_harmonic,
    spin_range,
    wigner3j,
    wigner6j,
    wigner9j,
)


def test_wigner3j_known_values():
    assert wigner3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / np.sqrt(3))
    assert wigner3j(0.5, 0.5, 1, 0.5, -0.5, 0) == pytest.approx(1 / np.sqrt(6))


def test_wigner3j_selection_rules():
    assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0
    assert wigner3j(1, 1, 1, 1, 1, 0) == 0.0
    # odd total with all m = 0
    assert wigner3j(1, 1, 1, 0, 0, 0) == 0.0


def test_wigner3j_orthogonality():
    j1, j2 = 1.5, 1
    for j3 in spin_range(j1, j2):
        for m3 in projections(j3):
            total = sum(
                (2 * j3 + 1) * wigner3j(j1, j2, j3, m1, m3 - m1, -m3) ** 2
                for m1 in projections(j1)
                if abs(m3 - m1) <= j2
            )
            assert total == pytest.approx(1.0)


def test_wigner6j_values():
    assert wigner6j(1, 1, 1, 1, 1, 1) == pytest.approx(1 / 6)
    assert wigner6j(1, 1, 1, 0, 1, 1) == pytest.approx(-1 / 3)
    assert wigner6j(1, 1, 3, 1, 1, 1) == 0.0


def test_wigner9j_reduces_to_6j():
    expected = wigner6j(1, 1, 1, 1, 1, 1) / 3
    assert wigner9j(1, 1, 1, 1, 1, 1, 1, 1, 0) == pytest.approx(expected)


def test_clebsch_gordan_two_spin_half():
    assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1, 0) == pytest.approx(1 / np.sqrt(2))
    assert abs(clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0, 0)) == pytest.approx(1 / np.sqrt(2))
    assert clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1, 1) == pytest.approx(1.0)


def test_clebsch_gordan_completeness():
    for j in (1.5, 0.5):
        for m in projections(j):
            norm = sum(clebsch_gordan(1, m - ms, 0.5, ms, j, m) ** 2 for ms in (-0.5, 0.5) if abs(m - ms) <= 1)
            assert norm == pytest.approx(1.0)


def test_reduced_spherical_harmonic():
    assert abs(reduced_spherical_harmonic(0, 1, 1)) == pytest.approx(1.0)
    assert reduced_spherical_harmonic(1, 1, 1) == 0.0


def test_ranges():
    assert spin_range(1, 0.5) == [0.5, 1.5]
    assert projections(1) == [-1.0, 0.0, 1.0]
