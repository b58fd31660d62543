import logging
import os

import numpy as np
import pandas as pd

from models.atomic import AtomicCatalog, LevelRecord, LineRecord, level_key
from utils.constants import AU_DIPOLE, C_LIGHT, EPS0, HBAR
from utils.errors import CatalogError

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["kind", "config", "term", "J", "energy_Hz", "lower_key", "upper_key", "S_au", "A_per_s"]

DEFAULT_CATALOG = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "he3_levels.csv")

# Magnetic-dipole hyperfine constants (Hz) of the He-3 triplet terms, set by
# the 1s contact interaction projected onto each (L S) J level.
HE3_HYPERFINE_A = {
    ("3S", 1.0): -4.4931342513e9,
    ("3P", 2.0): -2.1419e9,
    ("3P", 1.0): -2.1419e9,
    ("3D", 3.0): -1.428e9,
    ("3D", 2.0): -0.714e9,
    ("3D", 1.0): 2.142e9,
}


def strength_from_einstein_a(einstein_a, omega, j_upper):
    """
    Line strength from a spontaneous emission rate

    Args:
        einstein_a (float): Einstein A coefficient in 1/s
        omega (float): Transition angular frequency in rad/s
        j_upper (float): Total angular momentum of the upper level

    Returns:
        float: |<J||d||J'>|^2 in atomic units
    """
    strength_si = 3.0 * np.pi * EPS0 * HBAR * C_LIGHT**3 * (2 * j_upper + 1) * einstein_a / omega**3
    return strength_si / AU_DIPOLE**2


def _data_line_numbers(path):
    numbers = []
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            text = raw.strip()
            if text and not text.startswith("#"):
                numbers.append(number)
    # first data-bearing line is the header
    return numbers[1:]


def _optional_float(value):
    value = str(value).strip()
    return None if value == "" else float(value)


def load_atomic_tables(path=DEFAULT_CATALOG, hyperfine=HE3_HYPERFINE_A):
    """
    Load a level/line table into an AtomicCatalog

    Args:
        path (str): Path to a CSV file in the level/line schema
        hyperfine (dict, optional): (term, J) -> hyperfine A constant in Hz,
            attached to every matching level

    Returns:
        AtomicCatalog: The parsed catalog; empty when the file has no rows
    """
    if not os.path.exists(path):
        raise CatalogError(f"catalog file {path} does not exist")
    try:
        df = pd.read_csv(path, comment="#", dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        logger.info("catalog %s is empty", path)
        return AtomicCatalog()

    missing = [col for col in CSV_COLUMNS if col not in df.columns]
    if missing:
        raise CatalogError(f"{path}: missing columns {missing}")

    line_numbers = _data_line_numbers(path)
    levels = {}
    pending_lines = []
    for idx, row in enumerate(df.itertuples(index=False)):
        number = line_numbers[idx] if idx < len(line_numbers) else idx + 2
        kind = row.kind.strip().lower()
        try:
            if kind == "level":
                j = float(row.J)
                level = LevelRecord(
                    config=row.config.strip(),
                    term=row.term.strip(),
                    J=j,
                    energy_hz=float(row.energy_Hz),
                    hyperfine_a_hz=(hyperfine or {}).get((row.term.strip(), j)),
                )
                if level.key in levels:
                    raise CatalogError(f"duplicate level key {level.key}")
                levels[level.key] = level
            elif kind == "line":
                pending_lines.append((number, row.lower_key.strip(), row.upper_key.strip(),
                                      _optional_float(row.S_au), _optional_float(row.A_per_s)))
            else:
                raise CatalogError(f"unknown row kind '{row.kind}'")
        except (ValueError, CatalogError) as exc:
            raise CatalogError(f"{path}:{number}: {exc}", line=number) from None

    lines = []
    for number, lower_key, upper_key, strength, einstein_a in pending_lines:
        try:
            lower = levels[lower_key]
            upper = levels[upper_key]
        except KeyError as exc:
            raise CatalogError(f"{path}:{number}: dangling level reference {exc.args[0]}", line=number) from None
        if upper.energy_hz < lower.energy_hz:
            lower, upper = upper, lower
        if strength is None:
            if einstein_a is None:
                raise CatalogError(f"{path}:{number}: line needs S_au or A_per_s", line=number)
            omega = 2 * np.pi * (upper.energy_hz - lower.energy_hz)
            strength = strength_from_einstein_a(einstein_a, omega, upper.J)
        try:
            lines.append(LineRecord(lower, upper, strength, einstein_a))
        except CatalogError as exc:
            raise CatalogError(f"{path}:{number}: {exc}", line=number) from None

    catalog = AtomicCatalog(list(levels.values()), lines)
    logger.info("loaded %d levels and %d lines from %s", len(levels), len(lines), path)
    return catalog


def catalog_to_frame(catalog):
    """
    Convert a catalog back into the tabular schema

    Args:
        catalog (AtomicCatalog): Catalog to convert

    Returns:
        DataFrame: One row per level followed by one row per line
    """
    rows = []
    for level in catalog.levels:
        j = level.J
        rows.append({
            "kind": "level", "config": level.config, "term": level.term,
            "J": int(j) if j.is_integer() else j, "energy_Hz": repr(level.energy_hz),
            "lower_key": "", "upper_key": "", "S_au": "", "A_per_s": "",
        })
    for line in catalog.lines:
        rows.append({
            "kind": "line", "config": "", "term": "", "J": "", "energy_Hz": "",
            "lower_key": line.lower.key, "upper_key": line.upper.key,
            "S_au": repr(line.strength_au),
            "A_per_s": "" if line.einstein_a is None else repr(line.einstein_a),
        })
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def save_atomic_tables(catalog, path):
    """Write a catalog in the level/line CSV schema"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    catalog_to_frame(catalog).to_csv(path, index=False)


def branching_fraction(upper, decays):
    """
    Branching fractions of the decay channels of one upper level

    Args:
        upper (LevelRecord): The decaying level
        decays (list): LineRecord objects with this upper level

    Returns:
        dict: Lower-level key -> fraction A_k / sum(A)
    """
    if not decays:
        raise CatalogError(f"no decay channels given for {upper.key}")
    for line in decays:
        if line.upper is not upper and line.upper.key != upper.key:
            raise CatalogError(f"line {line.lower.key} -> {line.upper.key} does not decay from {upper.key}")
    rates = np.array([line.einstein_a if line.einstein_a is not None else 0.0 for line in decays])
    if not np.any([line.einstein_a is not None for line in decays]) or rates.sum() <= 0:
        raise CatalogError(f"no Einstein A coefficients available for {upper.key}")
    fractions = rates / rates.sum()
    return {line.lower.key: float(f) for line, f in zip(decays, fractions)}


def transition_wavelength(lower, upper):
    """Vacuum wavelength (m) of the transition between two levels"""
    return C_LIGHT / abs(upper.energy_hz - lower.energy_hz)


def find_level(catalog, config, term, J):
    return catalog.level(level_key(config, term, J))
