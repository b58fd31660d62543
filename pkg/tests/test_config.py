from pathlib import Path

import pytest

from models.config import RunConfig, parse_scalar
from utils.errors import ConfigError


def test_parse_scalar():
    assert parse_scalar("3") == 3
    assert parse_scalar("1e-6") == pytest.approx(1e-6)
    assert parse_scalar("'nsF32'") == "nsF32"
    assert parse_scalar(" he3 ") == "he3"


def test_defaults_resolve_paths():
    config = RunConfig.build()
    assert config.species == "he3"
    assert config.seed == 0
    assert config.catalog.is_absolute()
    assert config.output_dir.is_absolute()


def test_from_text_with_command_blocks():
    config = RunConfig.from_text("""
        # run settings
        seed = 7
        output_dir = results
        fig6.bmax = 1200
        tunneling.v0 = 8.5   # recoil units
        mqdt.symmetry = nsF12
    """)
    assert config.seed == 7
    assert config.output_dir == Path("results").resolve()
    assert config.block("fig6") == {"bmax": 1200}
    assert config.block("tunneling")["v0"] == pytest.approx(8.5)
    assert config.block("mqdt") == {"symmetry": "nsF12"}
    assert config.block("zeeman") == {}


def test_overrides_win_and_none_is_ignored():
    config = RunConfig.from_text("seed = 3", seed=5, output_dir=None)
    assert config.seed == 5
    assert config.output_dir == Path("output").resolve()


def test_malformed_line():
    with pytest.raises(ConfigError):
        RunConfig.from_text("seed 3")


def test_validation_errors_become_config_errors():
    with pytest.raises(ConfigError):
        RunConfig.from_text("seed = -1")
    with pytest.raises(ConfigError):
        RunConfig.from_text("colour = blue")


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_file(tmp_path / "absent.cfg")


def test_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("species = he3\nexclusion_hz = 5e9\n")
    config = RunConfig.from_file(path)
    assert config.exclusion_hz == pytest.approx(5e9)


def test_config_hash_is_stable_and_sensitive():
    a = RunConfig.from_text("seed = 1\nfig6.bmax = 1200")
    b = RunConfig.from_text("fig6.bmax = 1200\nseed = 1")
    c = RunConfig.from_text("seed = 2\nfig6.bmax = 1200")
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != c.config_hash()
    assert len(a.config_hash()) == 64
