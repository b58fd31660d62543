import numpy as np
import pytest

from models.atomic import AtomicCatalog, LevelRecord, LineRecord
from utils.atomic_data import (
    branching_fraction,
    catalog_to_frame,
    find_level,
    load_atomic_tables,
    save_atomic_tables,
    strength_from_einstein_a,
    transition_wavelength,
)
from utils.constants import C_LIGHT
from utils.errors import CatalogError

HEADER = "kind,config,term,J,energy_Hz,lower_key,upper_key,S_au,A_per_s\n"


def test_bundled_catalog_loads(catalog):
    level = find_level(catalog, "1s2s", "3S", 1)
    assert level.hyperfine_a_hz == pytest.approx(-4.4931342513e9)
    assert len(catalog.lines_of(level)) > 5


def test_metastable_to_2p_wavelength(catalog):
    lower = find_level(catalog, "1s2s", "3S", 1)
    upper = find_level(catalog, "1s2p", "3P", 2)
    assert transition_wavelength(lower, upper) == pytest.approx(1083.33e-9, abs=0.01e-9)


def test_strength_from_einstein_a():
    omega = 2 * np.pi * C_LIGHT / 1083.33e-9
    assert strength_from_einstein_a(1.0216e7, omega, 2) == pytest.approx(32.0446, rel=1e-3)


def test_branching_fraction_of_3p(catalog):
    upper = find_level(catalog, "1s3p", "3P", 2)
    fractions = branching_fraction(upper, catalog.decays_of(upper))
    assert fractions["1s2s:3S:1"] == pytest.approx(0.8985, abs=1e-3)
    assert sum(fractions.values()) == pytest.approx(1.0)


def test_branching_fraction_needs_rates():
    lower = LevelRecord("1s2s", "3S", 1, 0.0)
    upper = LevelRecord("1s2p", "3P", 2, 2.77e14)
    line = LineRecord(lower, upper, 30.0)
    with pytest.raises(CatalogError):
        branching_fraction(upper, [line])
    with pytest.raises(CatalogError):
        branching_fraction(upper, [])


def test_load_reports_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# comment\n" + HEADER + "level,1s2s,3S,1,0.0,,,,\nlevel,1s2p,3P,x,1.0,,,,\n")
    with pytest.raises(CatalogError) as info:
        load_atomic_tables(str(path))
    assert info.value.context["line"] == 4


def test_load_rejects_dangling_reference(tmp_path):
    path = tmp_path / "dangling.csv"
    path.write_text(HEADER + "level,1s2s,3S,1,0.0,,,,\nline,,,,,1s2s:3S:1,1s9p:3P:2,1.0,\n")
    with pytest.raises(CatalogError):
        load_atomic_tables(str(path))


def test_load_rejects_duplicate_level(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text(HEADER + "level,1s2s,3S,1,0.0,,,,\nlevel,1s2s,3S,1,5.0,,,,\n")
    with pytest.raises(CatalogError):
        load_atomic_tables(str(path))


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    assert len(load_atomic_tables(str(path))) == 0


def test_missing_file():
    with pytest.raises(CatalogError):
        load_atomic_tables("/nonexistent/levels.csv")


def test_save_and_reload(tmp_path, catalog):
    path = tmp_path / "out" / "levels.csv"
    save_atomic_tables(catalog, str(path))
    reloaded = load_atomic_tables(str(path))
    assert len(reloaded.levels) == len(catalog.levels)
    assert len(reloaded.lines) == len(catalog.lines)
    frame = catalog_to_frame(reloaded)
    assert list(frame["kind"].unique()) == ["level", "line"]


def test_catalog_dict_round_trip(catalog):
    rebuilt = AtomicCatalog.from_dict(catalog.to_dict())
    assert rebuilt.level("1s3p:3P:2").energy_hz == catalog.level("1s3p:3P:2").energy_hz
