"""
Command-line entry point of the he3 array toolkit

Every command writes one CSV (``tunneling`` writes JSON) under the configured
output directory, with '#' metadata lines naming the figure or table it
reproduces and the hash of the run configuration. Parameters come from, in
order of precedence: command flags, the command's block in the config file
(``fig6.bmax = 1200``) and the built-in defaults below.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np
import pandas as pd

from models.config import RunConfig
from models.results import DriveProtocol
from models.states import STATE_PRESETS, HyperfineStateLabel
from models.trap import DoubleWellSpec, TrapGeometry
from utils.atomic_data import load_atomic_tables
from utils.data_processing import save_result
from utils.errors import ConfigError, DomainError, ToolkitError
from utils.fermion import (
    build_model,
    load_model_file,
    trotter_error_scaling,
    trotter_evolve,
    vqe_minimize,
)
from utils.motional import drive_dynamics, pi_pulse_fidelity_map, well_spectrum
from utils.mqdt import ChannelSet, levels_for_n, levels_frame, lufano_data, window_for_n
from utils.polarizability import (
    find_magic_wavelength,
    polarizability_curve,
    two_photon_discrepancy_report,
    wavelength_grid,
)
from utils.raman import (
    SCAN_WINDOWS,
    beta_scan,
    preset_configuration,
    raman_table1,
    raman_table2,
    zero_field_table_frame,
)
from utils.rydberg_pair import c6_eigenstates, c6_perturbative, c6_scan, c6_scaling, pair_potential_curves, target_pair
from utils.tunneling import j_map, lowest_eigenpairs
from utils.trap import dressed_op_ratio, fom_curve
from utils.zeeman import find_magic_field, zeeman_map

logger = logging.getLogger(__name__)

QUBIT_LABELS = ("F=3/2,mF=-1/2", "F=1/2,mF=-1/2")
MAGIC_FIELD_BRACKET = (700.0, 900.0)
EXIT_USAGE = 2
EXIT_ERROR = 1


class Result:
    """
    Class representing what one command produced

    ``frame`` is written as CSV; a ``payload`` dict is written as JSON
    instead and echoed to stdout.
    """
    def __init__(self, frame=None, anchor="", notes=None, payload=None, summary=""):
        self.frame = frame
        self.anchor = anchor
        self.notes = notes or {}
        self.payload = payload
        self.summary = summary


def _value(args, config, name, default):
    flag = getattr(args, name, None)
    if flag is not None:
        return flag
    return config.block(args.command).get(name, default)


def _catalog(config):
    return load_atomic_tables(str(config.catalog))


def _state(text):
    return HyperfineStateLabel.parse(text)


def _pair(text):
    parts = [part.strip() for part in str(text).split(",")]
    if len(parts) != 2:
        raise ConfigError(f"expected two comma-separated polarizations, got '{text}'")
    return tuple(parts)


def _grid(text):
    parts = [int(part) for part in str(text).split(",")]
    if len(parts) != 3:
        raise ConfigError(f"grid needs three comma-separated point counts, got '{text}'")
    return tuple(parts)


# Polarizability


def polarizability_command(args, config):
    catalog = _catalog(config)
    state = _state(_value(args, config, "state", "g"))
    grid = wavelength_grid(_value(args, config, "lambda_min", 350e-9), _value(args, config, "lambda_max", 1600e-9),
                           _value(args, config, "points", 1251))
    curve = polarizability_curve(state, grid, catalog, theta=_value(args, config, "theta", 0.0),
                                 exclusion=2 * np.pi * config.exclusion_hz)
    return Result(curve.to_frame(), anchor="polarizability", notes={"state": str(state)})


def fig3_command(args, config):
    catalog = _catalog(config)
    grid = wavelength_grid(_value(args, config, "lambda_min", 350e-9), _value(args, config, "lambda_max", 1600e-9),
                           _value(args, config, "points", 1251))
    frames = []
    for name in ("g", "e", "p"):
        curve = polarizability_curve(STATE_PRESETS[name], grid, catalog, exclusion=2 * np.pi * config.exclusion_hz)
        frames.append(curve.to_frame().assign(state=name))
    magic = find_magic_wavelength(STATE_PRESETS["g"], STATE_PRESETS["p"], (1015e-9, 1029e-9), catalog)
    return Result(pd.concat(frames, ignore_index=True), anchor="Fig. 3 polarizability of key states",
                  notes={"magic_wavelength_nm": magic * 1e9})


def magic_wavelength_command(args, config):
    catalog = _catalog(config)
    state_a = _state(_value(args, config, "state_a", "g"))
    state_b = _state(_value(args, config, "state_b", "p"))
    bracket = (_value(args, config, "lambda_min", 1015e-9), _value(args, config, "lambda_max", 1029e-9))
    magic = find_magic_wavelength(state_a, state_b, bracket, catalog, theta=_value(args, config, "theta", 0.0))
    frame = pd.DataFrame([{"state_a": str(state_a), "state_b": str(state_b), "lambda_nm": magic * 1e9}])
    return Result(frame, anchor="magic wavelength", summary=f"lambda_magic = {magic * 1e9:.4f} nm")


def two_photon_command(args, config):
    report = two_photon_discrepancy_report(
        ref_rate=_value(args, config, "ref_rate", 0.07),
        ref_s=_value(args, config, "ref_s", 40.0),
        ref_delta=_value(args, config, "ref_delta", -35e6),
        target_s=_value(args, config, "target_s", 10.0),
        target_delta=_value(args, config, "target_delta", -10e6),
    )
    return Result(pd.DataFrame([report]), anchor="two-photon ionization rescale",
                  summary=f"formula rate {report['formula_rate']:.4g} 1/s ({report['ratio']:.0f}x quoted)")


# Zeeman structure


def _field_grid(args, config, bmax_default=1200.0):
    return np.linspace(_value(args, config, "bmin", 0.0), _value(args, config, "bmax", bmax_default),
                       _value(args, config, "points", 601))


def zeeman_command(args, config):
    species = _value(args, config, "zeeman_species", "he3-2s3S")
    zmap = zeeman_map(species, _field_grid(args, config))
    return Result(zmap.to_frame(), anchor="Zeeman map", notes={"species": species, "scheme": zmap.scheme})


def magic_field_command(args, config):
    species = _value(args, config, "zeeman_species", "he3-2s3S")
    bracket = (_value(args, config, "bmin", MAGIC_FIELD_BRACKET[0]), _value(args, config, "bmax", MAGIC_FIELD_BRACKET[1]))
    result = find_magic_field(*QUBIT_LABELS, bracket, species)
    return Result(pd.DataFrame([result]), anchor="magic field",
                  summary=f"B_magic = {result['B_G']:.3f} G, slope {result['slope_Hz_per_G']:.3g} Hz/G")


def fig6_command(args, config):
    species = _value(args, config, "zeeman_species", "he3-2s3S")
    zmap = zeeman_map(species, _field_grid(args, config))
    magic = find_magic_field(*QUBIT_LABELS, MAGIC_FIELD_BRACKET, species)
    frame = zmap.to_frame()
    frame["qubit_differential_Hz"] = zmap.branch(QUBIT_LABELS[0]) - zmap.branch(QUBIT_LABELS[1])
    return Result(frame, anchor="Fig. 6 Breit-Rabi map and magic field",
                  notes={"species": species, "magic_field_G": magic["B_G"]},
                  summary=f"B_magic = {magic['B_G']:.3f} G")


# Raman


def raman_beta_command(args, config):
    species = _value(args, config, "raman_species", config.species)
    polarizations = _value(args, config, "pol", None)
    polarizations = None if polarizations is None else _pair(polarizations)
    lo, hi = SCAN_WINDOWS.get(species, (0.2e9, 60e9))
    lo, hi = _value(args, config, "delta_min", lo), _value(args, config, "delta_max", hi)
    raman = preset_configuration(species, B=_value(args, config, "B", 800.0), polarizations=polarizations)
    scan = beta_scan(raman, deltas=np.linspace(lo, hi, _value(args, config, "points", 600)))
    notes = {"species": species, "B_G": raman.B}
    if scan.maxima:
        delta, beta = max(scan.maxima, key=lambda item: item[1])
        notes.update(best_delta_GHz=delta * 1e-9, best_beta=beta)
    return Result(scan.to_frame(), anchor="Raman |beta| scan", notes=notes)


def fig7_command(args, config):
    points = _value(args, config, "points", 600)
    frames = []
    for B in (0.0, 800.0):
        scan = beta_scan(preset_configuration("he3", B=B), deltas=np.linspace(*SCAN_WINDOWS["he3"], points))
        frames.append(scan.to_frame().assign(B_G=B))
    return Result(pd.concat(frames, ignore_index=True), anchor="Fig. 7 Raman figure of merit")


def table1_command(args, config):
    return Result(raman_table1(points=_value(args, config, "points", 400)), anchor="Table I optimal Raman |beta|")


def table2_command(args, config):
    frame = raman_table2(B=_value(args, config, "B", 800.0), points=_value(args, config, "points", 1101))
    return Result(frame, anchor="Table II He-3 |beta| maxima by polarization")


def table3_command(args, config):
    frame = pd.concat([zero_field_table_frame(species) for species in ("na23", "yb171")], ignore_index=True)
    return Result(frame, anchor="Table III zero-field Raman couplings")


# Rydberg structure and interactions


def mqdt_command(args, config):
    symmetry = _value(args, config, "symmetry", "nsF32")
    levels = levels_for_n(symmetry, _value(args, config, "nmin", 30), _value(args, config, "nmax", 80))
    return Result(levels_frame(levels), anchor="MQDT bound states", notes={"symmetry": symmetry})


def lufano_command(args, config):
    symmetry = _value(args, config, "symmetry", "nsF12")
    window = window_for_n(_value(args, config, "nmin", 30), _value(args, config, "nmax", 80))
    return Result(lufano_data(ChannelSet.from_symmetry(symmetry), window), anchor="Lu-Fano data",
                  notes={"symmetry": symmetry})


def fig8b_command(args, config):
    window = window_for_n(_value(args, config, "nmin", 30), _value(args, config, "nmax", 80))
    frames = [lufano_data(ChannelSet.from_symmetry(symmetry), window).assign(symmetry=symmetry)
              for symmetry in ("nsF12", "nsF32")]
    return Result(pd.concat(frames, ignore_index=True), anchor="Fig. 8(b) Lu-Fano plot of ns series")


def c6_command(args, config):
    symmetry = _value(args, config, "symmetry", "nsF32")
    frame = c6_scan(symmetry, _value(args, config, "nmin", 50), _value(args, config, "nmax", 80),
                    dn=_value(args, config, "dn", 2), lmax=_value(args, config, "lmax", 3))
    fit = c6_scaling(frame) if len(frame) >= 3 else {"slope": float("nan")}
    return Result(frame, anchor="C6 scan", notes={"symmetry": symmetry, "nu_exponent": fit["slope"]})


def fig8d_command(args, config):
    frames = []
    for symmetry in ("nsF12", "nsF32"):
        frames.append(c6_scan(symmetry, _value(args, config, "nmin", 50), _value(args, config, "nmax", 80))
                      .assign(symmetry=symmetry))
    return Result(pd.concat(frames, ignore_index=True), anchor="Fig. 8(d) C6 of ns pairs")


def fig11_command(args, config):
    symmetry = _value(args, config, "symmetry", "nsF12")
    frames = []
    for n in range(_value(args, config, "nmin", 60), _value(args, config, "nmax", 75) + 1):
        for index in (0, 1):
            try:
                frames.append(c6_eigenstates(symmetry, n, index=index).assign(n=n, index=index))
            except DomainError:
                continue
    return Result(pd.concat(frames, ignore_index=True), anchor="Fig. 11 scaled C6 eigenstates",
                  notes={"symmetry": symmetry})


def pair_curves_command(args, config):
    symmetry = _value(args, config, "symmetry", "nsF32")
    target = target_pair(symmetry, _value(args, config, "n", 73), M=_value(args, config, "M", None))
    R_um = np.linspace(_value(args, config, "rmin", 1.0), _value(args, config, "rmax", 6.0),
                       _value(args, config, "points", 101))
    curves = pair_potential_curves(target, R_um, dn=_value(args, config, "dn", 2), lmax=_value(args, config, "lmax", 3),
                                   energy_window_ghz=_value(args, config, "window_ghz", 5.0))
    c6 = c6_perturbative(target)
    frame = curves.to_frame(count=_value(args, config, "curves", 10))
    frame["C6_model_GHz"] = c6["C6_GHz_um6"] / R_um**6
    return Result(frame, anchor="Fig. 8(c) pair potential curves",
                  notes={"symmetry": symmetry, "basis_size": curves.basis_size, "C6_GHz_um6": c6["C6_GHz_um6"]})


# Trap mechanics and cooling


def rsc_fom_command(args, config):
    depths = np.linspace(_value(args, config, "depth_min", 10e6), _value(args, config, "depth_max", 1e9),
                         _value(args, config, "points", 100))
    frame = fom_curve(depths, w0=_value(args, config, "w0", 1e-6),
                      trap_wavelength=_value(args, config, "trap_lambda", 1150e-9))
    return Result(frame, anchor="Fig. 4(c) ground-state figure of merit")


def op_dressed_command(args, config):
    deltas = np.linspace(_value(args, config, "delta_min", -50e6), _value(args, config, "delta_max", 50e6),
                         _value(args, config, "points", 201))
    deltas = deltas[deltas != 0]
    depth = _value(args, config, "depth", None)
    trap = None if depth is None else TrapGeometry(depth, _value(args, config, "w0", 1e-6), 1150e-9)
    frame = dressed_op_ratio(_value(args, config, "ratio", -0.04), deltas, _value(args, config, "rabi", 5e6), trap=trap)
    return Result(frame, anchor="Fig. 4(d) dressed-state optical pumping")


def fig4c_command(args, config):
    return rsc_fom_command(args, config)


# Tunneling


def _double_well(args, config):
    return DoubleWellSpec(
        wavelength=_value(args, config, "wavelength", 1013e-9),
        depth_er=_value(args, config, "v0", 6.0),
        separation=_value(args, config, "d", 1.2e-6),
        na=_value(args, config, "na", 0.7),
        grid=_grid(_value(args, config, "grid", "161,97,97")),
    )


def tunneling_command(args, config):
    result = lowest_eigenpairs(_double_well(args, config), k=2)
    payload = {"E0": float(result.energies_hz[0]), "E1": result.e1_hz, "J_Hz": result.tunneling_hz}
    return Result(payload=payload, anchor="double-well tunneling")


def tunneling_map_command(args, config):
    spec = _double_well(args, config)
    depths = np.linspace(_value(args, config, "v0_min", 2.0), _value(args, config, "v0_max", 14.0),
                         _value(args, config, "v0_points", 7))
    ratios = np.linspace(_value(args, config, "ratio_min", 1.0), _value(args, config, "ratio_max", 1.6),
                         _value(args, config, "ratio_points", 4))
    frame = j_map(spec, depths, ratios * spec.w0)
    return Result(frame, anchor="Fig. 8-tunnel J(V0, d) map", notes={"w0_um": spec.w0 * 1e6})


# Motional qubit


def motional_spectrum_command(args, config):
    spectrum = well_spectrum(_value(args, config, "depth", 75e3), w0=_value(args, config, "w0", 1e-6))
    frame = pd.DataFrame({"level": np.arange(spectrum.n_bound), "E_Hz": spectrum.energies_hz[:spectrum.n_bound]})
    return Result(frame, anchor="Fig. 9(a) bound motional states",
                  notes={"f01_Hz": spectrum.f01, "anharmonicity": spectrum.anharmonicity})


def motional_drive_command(args, config):
    spectrum = well_spectrum(_value(args, config, "depth", 75e3), w0=_value(args, config, "w0", 1e-6))
    amplitude = _value(args, config, "amp", 8.5e-9)
    duration = _value(args, config, "cycles", 50) / spectrum.f01
    protocol = DriveProtocol(amplitude, spectrum.f01, duration)
    frame = drive_dynamics(spectrum, protocol, every=_value(args, config, "every", 50))
    return Result(frame, anchor="Fig. 9(b) driven motional dynamics", notes={"f01_Hz": spectrum.f01})


def fig9_command(args, config):
    amplitudes = np.linspace(_value(args, config, "amp_min", 4e-9), _value(args, config, "amp_max", 12e-9),
                             _value(args, config, "amp_points", 5))
    depths = np.linspace(_value(args, config, "depth_min", 50e3), _value(args, config, "depth_max", 150e3),
                         _value(args, config, "depth_points", 5))
    return Result(pi_pulse_fidelity_map(amplitudes, depths), anchor="Fig. 9(c) pi-pulse fidelity map")


# Fermionic gates


def _fermion_model(args, config):
    model_file = _value(args, config, "model_file", None)
    if model_file:
        return load_model_file(model_file)
    params = {"sites": _value(args, config, "L", 4), "t": _value(args, config, "t", 1.0), "U": _value(args, config, "U", 4.0)}
    kind = _value(args, config, "model", "fh")
    if kind == "tt":
        params["t_prime"] = _value(args, config, "t_prime", 0.0)
    return build_model(kind, **params)


def fermi_trotter_command(args, config):
    model = _fermion_model(args, config)
    run = trotter_evolve(model, _value(args, config, "tau", 2.0), _value(args, config, "steps", 64))
    frame = run["frame"][["step", "err_norm", "N_particles"]]
    return Result(frame, anchor="Trotterized Fermi-Hubbard evolution", notes={"model": model.name, **run["counts"]})


def fermi_scaling_command(args, config):
    model = _fermion_model(args, config)
    frame, fit = trotter_error_scaling(model, _value(args, config, "tau", 2.0))
    return Result(frame, anchor="Trotter error scaling", notes={"model": model.name, "slope": fit["slope"]},
                  summary=f"error slope {fit['slope']:.3f} in 1/N")


def fermi_vqe_command(args, config):
    model = _fermion_model(args, config)
    result = vqe_minimize(model, layers=_value(args, config, "layers", 2), restarts=_value(args, config, "restarts", 4),
                          seed=config.seed)
    notes = {key: result[key] for key in ("energy", "exact", "gap", "bound_ok", "stagnated")}
    return Result(result["trace"], anchor="variational ground state", notes={"model": model.name, **notes},
                  summary=f"E_vqe = {result['energy']:.8f}, exact {result['exact']:.8f}")


COMMANDS = {
    "fig3": fig3_command,
    "fig4c": fig4c_command,
    "fig6": fig6_command,
    "fig7": fig7_command,
    "fig8b": fig8b_command,
    "fig8d": fig8d_command,
    "fig11": fig11_command,
    "figtunnel": tunneling_map_command,
    "fig9": fig9_command,
    "table1": table1_command,
    "table2": table2_command,
    "table3": table3_command,
    "polarizability": polarizability_command,
    "magic-wavelength": magic_wavelength_command,
    "two-photon": two_photon_command,
    "zeeman": zeeman_command,
    "magic-field": magic_field_command,
    "raman-beta": raman_beta_command,
    "raman-table1": table1_command,
    "mqdt": mqdt_command,
    "lufano": lufano_command,
    "c6": c6_command,
    "pair-curves": pair_curves_command,
    "rsc-fom": rsc_fom_command,
    "op-dressed": op_dressed_command,
    "tunneling": tunneling_command,
    "tunneling-map": tunneling_map_command,
    "motional-spectrum": motional_spectrum_command,
    "motional-drive": motional_drive_command,
    "fermi-trotter": fermi_trotter_command,
    "fermi-scaling": fermi_scaling_command,
    "fermi-vqe": fermi_vqe_command,
}

# flag name -> (type, help); flags default to None so config blocks can fill them
OPTIONS = {
    "state": (str, "state label or preset (g, g-stretched, g-lower, e, p)"),
    "state_a": (str, "first state"),
    "state_b": (str, "second state"),
    "lambda_min": (float, "shortest wavelength in m"),
    "lambda_max": (float, "longest wavelength in m"),
    "theta": (float, "polarization angle in rad"),
    "points": (int, "grid points"),
    "ref_rate": (float, "reference ionization rate in 1/s"),
    "ref_s": (float, "reference saturation parameter"),
    "ref_delta": (float, "reference detuning in Hz"),
    "target_s": (float, "target saturation parameter"),
    "target_delta": (float, "target detuning in Hz"),
    "zeeman_species": (str, "Zeeman manifold, e.g. he3-2s3S"),
    "bmin": (float, "lowest field in G"),
    "bmax": (float, "highest field in G"),
    "raman_species": (str, "he3, li6 or na23"),
    "B": (float, "magnetic field in G"),
    "delta_min": (float, "lowest detuning in Hz"),
    "delta_max": (float, "highest detuning in Hz"),
    "pol": (str, "beam polarizations q1,q2"),
    "symmetry": (str, "Rydberg symmetry, e.g. nsF32"),
    "nmin": (int, "lowest n"),
    "nmax": (int, "highest n"),
    "n": (int, "principal quantum number of the target pair"),
    "M": (int, "total projection of the pair"),
    "dn": (int, "pair basis n range"),
    "lmax": (int, "pair basis highest l"),
    "window_ghz": (float, "pair basis energy window in GHz"),
    "curves": (int, "number of pair curves written"),
    "rmin": (float, "smallest distance in um"),
    "rmax": (float, "largest distance in um"),
    "depth_min": (float, "shallowest trap depth in Hz"),
    "depth_max": (float, "deepest trap depth in Hz"),
    "depth_points": (int, "trap depth points"),
    "depth": (float, "trap depth in Hz"),
    "w0": (float, "tweezer waist in m"),
    "trap_lambda": (float, "trap wavelength in m"),
    "ratio": (float, "alpha_e / alpha_g"),
    "rabi": (float, "Rabi frequency in Hz"),
    "wavelength": (float, "tweezer wavelength in m"),
    "na": (float, "numerical aperture"),
    "d": (float, "tweezer separation in m"),
    "v0": (float, "tweezer depth in recoil energies"),
    "v0_min": (float, "shallowest depth in recoil energies"),
    "v0_max": (float, "deepest depth in recoil energies"),
    "v0_points": (int, "depth points"),
    "ratio_min": (float, "smallest separation in units of w0"),
    "ratio_max": (float, "largest separation in units of w0"),
    "ratio_points": (int, "separation points"),
    "grid": (str, "grid points nx,ny,nz"),
    "amp": (float, "modulation amplitude in m"),
    "amp_min": (float, "smallest modulation amplitude in m"),
    "amp_max": (float, "largest modulation amplitude in m"),
    "amp_points": (int, "amplitude points"),
    "cycles": (float, "drive duration in periods of the 0-1 transition"),
    "every": (int, "keep every n-th time step"),
    "model": (str, "fermion model: fh, tt, mfh or pam"),
    "model_file": (str, "plain-text model description"),
    "L": (int, "number of sites"),
    "t": (float, "tunneling amplitude"),
    "U": (float, "on-site interaction"),
    "t_prime": (float, "next-nearest-neighbor tunneling"),
    "tau": (float, "evolution time"),
    "steps": (int, "Trotter steps"),
    "layers": (int, "ansatz layers"),
    "restarts": (int, "optimizer restarts"),
}

COMMAND_OPTIONS = {
    "fig3": ["lambda_min", "lambda_max", "points"],
    "fig4c": ["depth_min", "depth_max", "points", "w0", "trap_lambda"],
    "fig6": ["zeeman_species", "bmin", "bmax", "points"],
    "fig7": ["points"],
    "fig8b": ["nmin", "nmax"],
    "fig8d": ["nmin", "nmax"],
    "fig11": ["symmetry", "nmin", "nmax"],
    "figtunnel": ["wavelength", "na", "d", "v0", "grid", "v0_min", "v0_max", "v0_points", "ratio_min", "ratio_max",
                  "ratio_points"],
    "fig9": ["amp_min", "amp_max", "amp_points", "depth_min", "depth_max", "depth_points"],
    "table1": ["points"],
    "table2": ["B", "points"],
    "table3": [],
    "polarizability": ["state", "lambda_min", "lambda_max", "points", "theta"],
    "magic-wavelength": ["state_a", "state_b", "lambda_min", "lambda_max", "theta"],
    "two-photon": ["ref_rate", "ref_s", "ref_delta", "target_s", "target_delta"],
    "zeeman": ["zeeman_species", "bmin", "bmax", "points"],
    "magic-field": ["zeeman_species", "bmin", "bmax"],
    "raman-beta": ["raman_species", "B", "delta_min", "delta_max", "pol", "points"],
    "raman-table1": ["points"],
    "mqdt": ["symmetry", "nmin", "nmax"],
    "lufano": ["symmetry", "nmin", "nmax"],
    "c6": ["symmetry", "nmin", "nmax", "dn", "lmax"],
    "pair-curves": ["symmetry", "n", "M", "rmin", "rmax", "points", "dn", "lmax", "window_ghz", "curves"],
    "rsc-fom": ["depth_min", "depth_max", "points", "w0", "trap_lambda"],
    "op-dressed": ["ratio", "rabi", "delta_min", "delta_max", "points", "depth", "w0"],
    "tunneling": ["wavelength", "na", "d", "v0", "grid"],
    "tunneling-map": ["wavelength", "na", "d", "v0", "grid", "v0_min", "v0_max", "v0_points", "ratio_min",
                      "ratio_max", "ratio_points"],
    "motional-spectrum": ["depth", "w0"],
    "motional-drive": ["depth", "w0", "amp", "cycles", "every"],
    "fermi-trotter": ["model", "model_file", "L", "t", "U", "t_prime", "tau", "steps"],
    "fermi-scaling": ["model", "model_file", "L", "t", "U", "t_prime", "tau"],
    "fermi-vqe": ["model", "model_file", "L", "t", "U", "t_prime", "layers", "restarts"],
}

# flags spelled differently from their config keys
FLAG_NAMES = {"wavelength": "--lambda", "zeeman_species": "--species", "raman_species": "--species"}


def build_parser():
    parser = argparse.ArgumentParser(prog="he3-toolkit", description="Metastable helium-3 tweezer-array calculations")
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--output-dir", help="directory for result files")
    parser.add_argument("--catalog", help="atomic data CSV")
    parser.add_argument("--seed", type=int, help="random seed for optimizer restarts")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        sub = subparsers.add_parser(name, help=(COMMANDS[name].__doc__ or name).strip().splitlines()[0])
        sub.add_argument("--output", help="result file, default <output-dir>/<command>.csv")
        for option in COMMAND_OPTIONS[name]:
            kind, text = OPTIONS[option]
            flag = FLAG_NAMES.get(option, "--" + option.replace("_", "-"))
            sub.add_argument(flag, dest=option, type=kind, default=None, help=text)
    return parser


def load_config(args):
    overrides = {"output_dir": args.output_dir, "catalog": args.catalog, "seed": args.seed}
    if args.config:
        return RunConfig.from_file(args.config, **overrides)
    return RunConfig.build(**{key: value for key, value in overrides.items() if value is not None})


def write_result(result, args, config):
    """
    Write a command result and return its path

    Args:
        result (Result): Command output
        args (Namespace): Parsed arguments, for --output
        config (RunConfig): Run configuration, for the output directory and hash

    Returns:
        str: Path of the written file
    """
    suffix = ".json" if result.payload is not None else ".csv"
    path = args.output or os.path.join(str(config.output_dir), args.command + suffix)
    if result.payload is None:
        return save_result(result.frame, path, anchor=result.anchor, config_hash=config.config_hash(),
                           notes=result.notes)
    document = dict(result.payload, anchor=result.anchor, config_hash=config.config_hash())
    text = json.dumps(document, sort_keys=True)
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    except OSError as e:
        raise ConfigError(f"cannot write {path}: {e.strerror}") from e
    print(text)
    return path


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        config = load_config(args)
        result = COMMANDS[args.command](args, config)
        path = write_result(result, args, config)
    except ToolkitError as e:
        print(f"code={e.code} msg={e.message}", file=sys.stderr)
        return EXIT_ERROR
    if result.summary:
        print(result.summary)
    logger.info("%s finished, results in %s", args.command, path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
