import numpy as np
import pytest

from models.rydberg import PairState, RydbergState
from utils.angular import clebsch_gordan, projections, reduced_spherical_harmonic, spin_range, wigner3j
from utils.constants import C6_AU_TO_GHZ_UM6
from utils.errors import DomainError
from utils.mqdt import levels_for_n
from utils.rydberg_pair import (
    angular_dipole,
    c3_element,
    c3_matrix,
    c6_from_basis,
    c6_eigenstates,
    c6_matrix,
    c6_perturbative,
    c6_scaling,
    degenerate_manifold,
    c6_scan,
    pair_basis,
    pair_potential_curves,
    radial_integral,
    radial_wavefunction,
    rydberg_state,
    second_order_c6,
    target_pair,
    van_der_waals_radius,
)


def _uncoupled_dipole(l, j_e, f_c, F, m, lp, jp_e, Fp, mp, q):
    # the same element summed over the product basis |m_c> |m_l> |m_s>
    total = 0.0
    for m_c in projections(f_c):
        mj, mjp = m - m_c, mp - m_c
        if abs(mj) > j_e or abs(mjp) > jp_e:
            continue
        for m_s in (-0.5, 0.5):
            m_l, m_lp = mj - m_s, mjp - m_s
            if abs(m_l) > l or abs(m_lp) > lp:
                continue
            bra = clebsch_gordan(f_c, m_c, j_e, mj, F, m) * clebsch_gordan(l, m_l, 0.5, m_s, j_e, mj)
            ket = clebsch_gordan(f_c, m_c, jp_e, mjp, Fp, mp) * clebsch_gordan(lp, m_lp, 0.5, m_s, jp_e, mjp)
            sign = -1.0 if int(round(l - m_l)) % 2 else 1.0
            orbital = sign * wigner3j(l, 1, lp, -m_l, q, m_lp) * reduced_spherical_harmonic(l, 1, lp)
            total += bra * ket * orbital
    return total


def test_hydrogen_dipole_integral():
    expected = 128 * np.sqrt(6) / 243
    assert radial_integral(1.0, 0, 2.0, 1) == pytest.approx(expected, rel=2e-3)


def test_radial_function_normalised():
    r, u = radial_wavefunction(30.3, 0)
    assert np.trapezoid(u**2, r) == pytest.approx(1.0, rel=1e-3)


def test_same_l_rejected():
    with pytest.raises(DomainError):
        radial_integral(40.0, 1, 41.0, 1)


def test_semiclassical_size():
    assert radial_integral(70.0, 0, 70.0, 1) == pytest.approx(1.5 * 70.0**2, rel=0.1)


def test_radial_integral_symmetric():
    forward = radial_integral(50.7, 0, 49.93, 1)
    assert radial_integral(49.93, 1, 50.7, 0) == pytest.approx(forward, rel=1e-12)


@pytest.mark.parametrize("l, lp", [(0, 1), (1, 2), (2, 1)])
def test_angular_factor_matches_product_basis(l, lp):
    checked = 0
    for f_c in (0.0, 1.0):
        for j_e in spin_range(l, 0.5):
            for jp_e in spin_range(lp, 0.5):
                for F in spin_range(f_c, j_e):
                    for Fp in spin_range(f_c, jp_e):
                        for m in projections(F):
                            for mp in projections(Fp):
                                q = m - mp
                                if abs(q) > 1:
                                    continue
                                value = angular_dipole(l, j_e, f_c, F, m, lp, jp_e, f_c, Fp, mp, q)
                                expected = _uncoupled_dipole(l, j_e, f_c, F, m, lp, jp_e, Fp, mp, q)
                                assert value == pytest.approx(expected, abs=1e-12)
                                checked += 1
    assert checked > 20


def test_core_is_spectator():
    assert angular_dipole(0, 0.5, 1.0, 1.5, 0.5, 1, 0.5, 0.0, 0.5, 0.5, 0) == 0.0


@pytest.fixture(scope="module")
def states_n40():
    s = levels_for_n("nsF32", 40, 40)[0]
    p = levels_for_n("npF52", 40, 40)[0]
    p_low = levels_for_n("npF32", 39, 39)[0]
    return s, p, p_low


def test_c3_selection_rules(states_n40):
    s, p, _ = states_n40
    ss = PairState(RydbergState(s, 1.5), RydbergState(s, 1.5))
    assert c3_element(ss, ss) == 0.0
    pp_other_m = PairState(RydbergState(p, 0.5), RydbergState(p, 0.5))
    assert c3_element(ss, pp_other_m) == 0.0
    pp = PairState(RydbergState(p, 2.5), RydbergState(p, 0.5))
    assert c3_element(ss, pp) != 0.0


def test_c3_matrix_hermitian_and_block_diagonal(states_n40):
    s, p, p_low = states_n40
    pairs = [PairState(RydbergState(s, m1), RydbergState(s, m2)) for m1 in (0.5, 1.5) for m2 in (0.5, 1.5)]
    pairs += [PairState(RydbergState(a, m1), RydbergState(b, m2))
              for a in (p, p_low) for b in (p, p_low)
              for m1 in (0.5, 1.5) for m2 in (1.5, 2.5) if abs(m2) <= b.F]
    matrix = c3_matrix(pairs)
    for i, a in enumerate(pairs):
        for j, b in enumerate(pairs):
            if i != j:
                assert c3_element(a, b) == pytest.approx(c3_element(b, a), rel=1e-12, abs=1e-300)
            if a.M != b.M:
                assert matrix[i, j] == 0.0


def test_second_order_closed_form():
    c6, near = second_order_c6(0.0, [1.0, 2.0], [1.0, -2.0])
    assert c6 == pytest.approx(1.0, abs=1e-12)
    assert near.size == 0


def test_second_order_skips_forster_resonance():
    c6, near = second_order_c6(0.0, [1.0, 3.0], [0.005, 2.0])
    assert list(near) == [0]
    assert c6 == pytest.approx(-4.5)


def test_second_order_invariant_under_degenerate_rotation():
    rng = np.random.default_rng(0)
    couplings = rng.normal(size=5)
    energies = np.array([1.0, 1.0, 1.0, -2.0, 3.0])
    rotation, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    rotated = couplings.copy()
    rotated[:3] = rotation.T @ couplings[:3]
    assert second_order_c6(0.0, rotated, energies)[0] == pytest.approx(second_order_c6(0.0, couplings, energies)[0])


def test_c6_units_consistent():
    result = c6_perturbative(target_pair("nsF32", 40))
    assert np.isfinite(result["C6_GHz_um6"]) and result["C6_GHz_um6"] != 0.0
    assert result["C6_au"] * C6_AU_TO_GHZ_UM6 == pytest.approx(result["C6_GHz_um6"])
    assert result["intermediates"] > 0


def test_missing_level_index():
    with pytest.raises(DomainError):
        rydberg_state("nsF32", 40, index=3)


@pytest.fixture(scope="module")
def small_curves():
    target = target_pair("nsF32", 40)
    R = np.array([5.0, 8.0, 12.0, 1000.0])
    curves = pair_potential_curves(target, R, dn=1, lmax=1, energy_window_ghz=60.0)
    basis = pair_basis(target, dn=1, lmax=1, energy_window_ghz=60.0)
    return target, basis, curves


def test_curves_reach_asymptotes(small_curves):
    target, basis, curves = small_curves
    offsets = np.sort([pair.energy_ghz - target.energy_ghz for pair in basis])
    np.testing.assert_allclose(curves.energies[-1], offsets, atol=1e-6)
    assert curves.tracked[-1] == pytest.approx(0.0, abs=1e-6)


def test_tracked_curve_follows_c6(small_curves):
    target, basis, curves = small_curves
    c6 = c6_from_basis(target, basis)
    for R, shift in zip(curves.R_um[:3], curves.tracked[:3]):
        assert shift == pytest.approx(c6 / R**6, rel=1e-2)


def test_curve_table(small_curves):
    _, _, curves = small_curves
    frame = curves.to_frame(count=3)
    assert list(frame.columns) == ["R_um", "tracked_GHz", "E1_GHz", "E2_GHz", "E3_GHz"]


def test_van_der_waals_radius_synthetic():
    R = np.arange(1.0, 10.0, 0.01)
    shift = 1.0 / R**6 + 1.0 / R**8
    assert van_der_waals_radius(R, shift, 1.0) == pytest.approx(np.sqrt(10.0), abs=0.011)
    assert van_der_waals_radius(R, 1.0 / R**6, 1.0) is None


def test_nonpositive_distance_rejected():
    with pytest.raises(DomainError):
        pair_potential_curves(target_pair("nsF32", 40), [0.0, 5.0])


@pytest.mark.slow
def test_c6_magnitude_near_n70():
    result = c6_perturbative(target_pair("nsF32", 70))
    assert 30.0 <= abs(result["C6_GHz_um6"]) <= 300.0


@pytest.mark.slow
def test_c6_scales_like_nu11():
    frame = c6_scan("nsF32", 50, 80)
    fit = c6_scaling(frame)
    assert fit["slope"] == pytest.approx(11.0, abs=1.0)


@pytest.mark.slow
def test_stretched_d_pair_c6():
    target = target_pair("ndF72", 60)
    assert target.M == pytest.approx(7.0)
    result = c6_perturbative(target)
    assert np.isfinite(result["C6_GHz_um6"]) and result["C6_GHz_um6"] != 0.0


def test_degenerate_manifold_matrix_is_symmetric_and_block_diagonal():
    manifold = degenerate_manifold("nsF12", 40)
    assert len(manifold) == 4
    matrix = c6_matrix(manifold, dn=1, lmax=1)
    np.testing.assert_allclose(matrix, matrix.T, rtol=1e-12, atol=1e-12 * np.abs(matrix).max())
    for i, a in enumerate(manifold):
        for j, b in enumerate(manifold):
            if a.M != b.M:
                assert matrix[i, j] == 0.0


def test_stretched_eigenvalue_matches_single_pair_c6():
    frame = c6_eigenstates("nsF12", 40, dn=1, lmax=1)
    stretched = c6_perturbative(target_pair("nsF12", 40), dn=1, lmax=1)["C6_GHz_um6"]
    assert frame[frame["M"] == 1.0]["C6_GHz_um6"].iloc[0] == pytest.approx(stretched, rel=1e-10)
    assert sorted(frame["M"].unique()) == [-1.0, 0.0, 1.0]
    assert len(frame) == 4


@pytest.mark.slow
def test_f12_scaled_c6_near_n70():
    scaled = []
    for index in (0, 1):
        scaled.extend(c6_eigenstates("nsF12", 70, index=index)["C6_scaled"].abs())
    assert any(abs(value - 37.0) <= 0.3 * 37.0 for value in scaled)


@pytest.mark.slow
def test_perturbative_and_diagonalized_curves_agree():
    target = target_pair("nsF32", 73)
    assert target.M == pytest.approx(3.0)
    R = np.array([2.5, 3.0, 4.0, 5.0])
    curves = pair_potential_curves(target, R)
    c6 = c6_perturbative(target)["C6_GHz_um6"]
    np.testing.assert_allclose(curves.tracked, c6 / R**6, rtol=0.05)
