import numpy as np
import pandas as pd
import pytest

from utils.data_processing import TOOL_NAME, format_result, load_result, save_result
from utils.errors import ConfigError


@pytest.fixture
def frame():
    return pd.DataFrame({"B_G": [0.0, 400.0, 800.0], "E1_Hz": [1.0 / 3.0, 2.5e9, -1.25e-7]})


def test_header_lines(frame):
    text = format_result(frame, anchor="Zeeman map", config_hash="abc", notes={"species": "he3-2s3S", "magic": 802.6})
    lines = text.splitlines()
    assert lines[0] == f"# tool: {TOOL_NAME}"
    assert lines[1].startswith("# version: ")
    assert lines[2] == "# anchor: Zeeman map"
    assert lines[3] == "# config_hash: abc"
    assert lines[4] == "# magic: 802.6"
    assert lines[5] == "# species: he3-2s3S"
    assert lines[6] == "B_G,E1_Hz"


def test_fixed_float_format(frame):
    text = format_result(frame)
    assert "0.3333333333" in text
    assert "-1.25e-07" in text


def test_save_and_load(frame, tmp_path):
    path = save_result(frame, str(tmp_path / "nested" / "zeeman.csv"), anchor="Zeeman map", config_hash="abc")
    loaded, meta = load_result(path)
    assert meta["anchor"] == "Zeeman map"
    assert meta["config_hash"] == "abc"
    np.testing.assert_allclose(loaded["E1_Hz"], frame["E1_Hz"], rtol=1e-9)


def test_same_input_same_bytes(frame, tmp_path):
    first = save_result(frame, str(tmp_path / "a.csv"), anchor="x", notes={"seed": 0})
    second = save_result(frame, str(tmp_path / "b.csv"), anchor="x", notes={"seed": 0})
    assert open(first, "rb").read() == open(second, "rb").read()


def test_load_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_result(str(tmp_path / "absent.csv"))


def test_unwritable_path(frame, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(ConfigError):
        save_result(frame, str(blocker / "out.csv"))
