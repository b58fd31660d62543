"""
Tunneling between two Gaussian tweezers.

The 3D single-particle Hamiltonian is discretized with second-order
central differences and its lowest eigenpairs are found with ARPACK. All
work is done in recoil units with lengths in units of the waist, where the
kinetic prefactor is 1/(k w0)^2 and the spectrum no longer depends on the
mass; J in Hz follows from E_R.
"""
import logging

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from models.results import SpectrumResult
from utils.errors import ConvergenceError, DomainError, ToolkitError
from utils.fitting import semilog_fit

logger = logging.getLogger(__name__)

MIN_SEPARATION_W0 = 1.3
EIGEN_TOLERANCE = 1e-10
RESIDUAL_LIMIT = 1e-8
CONVERGENCE_GATE = 0.02
CUT_RATIOS = (1.3, 1.4)
MIN_SOLVED = 4
ODD_PARITY = -0.5
START_SEED = 7


def build_potential(spec):
    """
    Dipole potential of the two tweezers

    Each red tweezer contributes -V0 g(x, y, z) with the normalized profile
    g = exp(-2 rho^2 / w(z)^2) / (1 + z^2/z_R^2) and w(z)^2 = w0^2 (1 + z^2/z_R^2).
    A blue anti-tweezer pair is two dark holes cut into a bright background
    of height V0, V0 (1 - g_1)(1 - g_2), which is zero at each hole centre
    and never negative.

    Args:
        spec (DoubleWellSpec): Tweezer pair

    Returns:
        callable: V(x, y, z) in E_R for coordinates in units of w0
    """
    zeta = spec.z_r / spec.w0
    half = 0.5 * spec.d_over_w0

    def potential(x, y, z):
        x, y, z = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x, y, z)))
        width2 = 1 + (z / zeta) ** 2
        profiles = [np.exp(-2 * ((x - center) ** 2 + y**2) / width2) / width2 for center in (-half, half)]
        if spec.sign == "blue":
            return spec.depth_er * (1 - profiles[0]) * (1 - profiles[1])
        return -spec.depth_er * (profiles[0] + profiles[1])

    return potential


def grid_axes(spec):
    """
    Interior grid points of the box, symmetric about the origin

    Returns:
        tuple: (x, y, z) coordinate arrays in units of w0
    """
    extents = (
        spec.box[0] * max(spec.d_over_w0, 1.0),
        spec.box[1],
        spec.box[2] * spec.z_r / spec.w0,
    )
    axes = []
    for length, points in zip(extents, spec.grid):
        step = length / (points + 1)
        axes.append(-0.5 * length + step * np.arange(1, points + 1))
    return tuple(axes)


def _second_difference(points, step):
    return sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(points, points), format="csr") / step**2


def hamiltonian(spec, values, axes=None):
    """
    Sparse finite-difference Hamiltonian with Dirichlet walls

    Args:
        spec (DoubleWellSpec): Provides k w0 for the kinetic prefactor
        values (ndarray): Potential in E_R on the (nx, ny, nz) grid
        axes (tuple): Grid axes, default grid_axes(spec)

    Returns:
        csr_matrix: H in E_R, flattened in C order
    """
    axes = axes or grid_axes(spec)
    kinetic = 1.0 / spec.k_w0**2
    eyes = [sp.identity(len(axis), format="csr") for axis in axes]
    laplacian = None
    for dim, axis in enumerate(axes):
        factors = list(eyes)
        factors[dim] = _second_difference(len(axis), axis[1] - axis[0])
        term = sp.kron(sp.kron(factors[0], factors[1]), factors[2], format="csr")
        laplacian = term if laplacian is None else laplacian + term
    return (-kinetic * laplacian + sp.diags(np.ravel(values))).tocsr()


def _solve(H, k, tol):
    # a symmetric start vector would never reach the odd states
    v0 = np.random.default_rng(START_SEED).standard_normal(H.shape[0])
    try:
        energies, vectors = eigsh(H, k=k, which="SA", tol=tol, v0=v0, ncv=max(2 * k + 1, 20))
    except ArpackNoConvergence as error:
        raise ConvergenceError("ARPACK did not converge for the lowest eigenpairs", k=k) from error
    order = np.argsort(energies)
    energies, vectors = energies[order], vectors[:, order]
    residuals = np.linalg.norm(H @ vectors - vectors * energies, axis=0) / np.maximum(1.0, np.abs(energies))
    return energies, vectors, residuals


def saddle_energy(spec):
    """
    Potential at the midpoint of the x axis, None without a barrier there

    Returns:
        float or None: V(0, 0, 0) in E_R when it lies above the well bottoms
    """
    potential = build_potential(spec)
    middle = float(potential(0.0, 0.0, 0.0))
    bottom = float(potential(0.5 * spec.d_over_w0, 0.0, 0.0))
    return middle if middle > bottom else None


def lowest_eigenpairs(spec, k=4, tol=EIGEN_TOLERANCE, keep_states=False):
    """
    Lowest eigenpairs of the double-well Hamiltonian

    At least four states are solved so that the x-odd partner of the ground
    state is found even when a transverse excitation lies below it.

    Args:
        spec (DoubleWellSpec): Tweezer pair and grid
        k (int): Number of eigenpairs, at least two
        tol (float): ARPACK tolerance
        keep_states (bool): Return wavefunctions shaped as the grid

    Returns:
        SpectrumResult: Energies in Hz and E_R; ``merged`` is set when the
        axis barrier lies below E1 or there is no barrier
    """
    if k < 2:
        raise DomainError("need at least two eigenpairs for a tunneling rate", k=k)
    if spec.d_over_w0 < MIN_SEPARATION_W0:
        logger.warning("separation %.2f w0 is below %.1f w0; tweezer overlap distorts the Gaussian shape",
                       spec.d_over_w0, MIN_SEPARATION_W0)

    axes = grid_axes(spec)
    shape = tuple(len(axis) for axis in axes)
    values = build_potential(spec)(*np.meshgrid(*axes, indexing="ij"))
    count = max(k, MIN_SOLVED)
    energies, vectors, residuals = _solve(hamiltonian(spec, values, axes), count, tol)
    if residuals.max() > RESIDUAL_LIMIT:
        logger.warning("eigenpair residual %.2e exceeds %.0e", residuals.max(), RESIDUAL_LIMIT)

    partner = _odd_partner(vectors, shape)
    saddle = saddle_energy(spec)
    merged = saddle is None or energies[partner] >= saddle
    if merged:
        logger.warning("wells merged at V0=%.3g E_R, d=%.3f w0: barrier below the first excited state",
                       spec.depth_er, spec.d_over_w0)

    states = None
    if keep_states:
        states = vectors.T.reshape((count,) + shape)
    logger.info("double well V0=%.3g E_R d=%.3f w0: E1-E0 = %.4g E_R", spec.depth_er, spec.d_over_w0,
                energies[partner] - energies[0])
    return SpectrumResult(
        energies * spec.recoil_hz,
        residuals,
        spec.grid,
        states=states,
        energies_er=energies,
        merged=merged,
        barrier_hz=None if saddle is None else saddle * spec.recoil_hz,
        partner=partner,
    )


def parity(state):
    """Overlap of a real grid wavefunction with its x-mirrored copy"""
    state = np.asarray(state, dtype=float)
    return float(np.sum(state * state[::-1]) / np.sum(state**2))


def _odd_partner(vectors, shape):
    for index in range(1, vectors.shape[1]):
        if parity(vectors[:, index].reshape(shape)) < ODD_PARITY:
            return index
    # degenerate isolated wells mix the doublet into localized states
    logger.warning("no x-odd state among the %d lowest; using the first excited state", vectors.shape[1])
    return 1


def j_map(spec, depths_er, separations):
    """
    Tunneling rate over a grid of depths and separations

    Merged or failed points carry NaN with the reason in ``status``.

    Args:
        spec (DoubleWellSpec): Template for wavelength, waist, mass and grid
        depths_er (array): Peak depths in E_R
        separations (array): Separations in m

    Returns:
        DataFrame: V0_ER, d_um, d_over_w0, J_Hz, E0_ER, E1_ER, status
    """
    rows = []
    for separation in np.asarray(separations, dtype=float):
        for depth in np.asarray(depths_er, dtype=float):
            point = spec.replace(depth_er=depth, separation=separation)
            row = {"V0_ER": depth, "d_um": separation * 1e6, "d_over_w0": point.d_over_w0}
            try:
                result = lowest_eigenpairs(point, k=2)
            except ToolkitError as error:
                rows.append({**row, "J_Hz": np.nan, "E0_ER": np.nan, "E1_ER": np.nan, "status": error.code})
                continue
            j_hz = result.tunneling_hz
            rows.append({
                **row,
                "J_Hz": np.nan if j_hz is None else j_hz,
                "E0_ER": result.energies_er[0],
                "E1_ER": result.energies_er[result.partner],
                "status": "merged" if result.merged else "ok",
            })
    return pd.DataFrame(rows)


def j_cuts(spec, depths_er, ratios=CUT_RATIOS):
    """
    Tunneling versus depth at fixed separations in units of w0

    Returns:
        tuple: (DataFrame of j_map rows with a ``cut`` column, dict of
        semilog fits of J against V0 per cut)
    """
    frames, fits = [], {}
    for ratio in ratios:
        frame = j_map(spec, depths_er, [ratio * spec.w0]).assign(cut=ratio)
        frames.append(frame)
        valid = frame.dropna(subset=["J_Hz"])
        if len(valid) >= 3:
            fits[ratio] = semilog_fit(valid["V0_ER"], valid["J_Hz"])
    return pd.concat(frames, ignore_index=True), fits


def _line_spectrum(kinetic, axis, values, count):
    step = axis[1] - axis[0]
    diagonal = 2 * kinetic / step**2 + values
    off = np.full(len(axis) - 1, -kinetic / step**2)
    return eigh_tridiagonal(diagonal, off, select="i", select_range=(0, count - 1))


def separable_check(spec, k=4):
    """
    Check the 3D solver against dense 1D diagonalization

    The potential is replaced by the double Gaussian of the x axis alone, so
    the discrete spectrum is a sum of 1D spectra: the x problem plus free
    particles in the y and z boxes.

    Returns:
        dict: eigenvalues from both routes (E_R) and their largest difference
    """
    axes = grid_axes(spec)
    kinetic = 1.0 / spec.k_w0**2
    line = build_potential(spec)(axes[0], 0.0, 0.0)
    values = np.broadcast_to(line[:, None, None], tuple(len(axis) for axis in axes))
    energies, _, _ = _solve(hamiltonian(spec, values, axes), k, EIGEN_TOLERANCE)

    parts = [_line_spectrum(kinetic, axes[0], line, k)[0]]
    for axis in axes[1:]:
        parts.append(_line_spectrum(kinetic, axis, np.zeros(len(axis)), k)[0])
    sums = np.add.outer(np.add.outer(parts[0], parts[1]), parts[2]).ravel()
    expected = np.sort(sums)[:k]
    return {"solver": energies, "dense": expected, "max_error": float(np.max(np.abs(energies - expected)))}


def radial_harmonic_check(spec, points=801):
    """
    Radial level spacing of one well against the harmonic frequency

    The y cut through a well centre is diagonalized densely and E1 - E0 is
    compared with hbar omega_r = sqrt(8 V0 E_R) / (k w0) in E_R.

    Returns:
        dict: spacing_er, harmonic_er and relative_error
    """
    y = grid_axes(spec.replace(grid=(spec.grid[0], points, spec.grid[2])))[1]
    values = build_potential(spec)(0.5 * spec.d_over_w0, y, 0.0)
    energies, _ = _line_spectrum(1.0 / spec.k_w0**2, y, values, 2)
    spacing = energies[1] - energies[0]
    harmonic = np.sqrt(8 * spec.depth_er) / spec.k_w0
    return {"spacing_er": float(spacing), "harmonic_er": float(harmonic),
            "relative_error": float(abs(spacing - harmonic) / harmonic)}


def grid_convergence(spec, scale=2 ** (1 / 3)):
    """
    Change of E1 - E0 when the total number of grid points doubles

    Returns:
        dict: splitting on both grids (E_R), relative change and whether it
        passes the 2% gate
    """
    fine_grid = tuple(int(np.ceil(n * scale)) | 1 for n in spec.grid)
    coarse = lowest_eigenpairs(spec, k=2)
    fine = lowest_eigenpairs(spec.replace(grid=fine_grid), k=2)
    split_coarse = coarse.energies_er[coarse.partner] - coarse.energies_er[0]
    split_fine = fine.energies_er[fine.partner] - fine.energies_er[0]
    change = abs(split_fine - split_coarse) / abs(split_fine)
    return {
        "splitting_coarse": float(split_coarse),
        "splitting_fine": float(split_fine),
        "relative_change": float(change),
        "converged": bool(change < CONVERGENCE_GATE),
        "fine_grid": fine_grid,
    }
