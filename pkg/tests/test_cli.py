import json

import numpy as np
import pytest

from he3_cli import COMMAND_OPTIONS, COMMANDS, build_parser, main
from utils.data_processing import load_result


def run(tmp_path, *argv):
    return main(["--output-dir", str(tmp_path), *argv])


def test_no_arguments_prints_usage(capsys):
    assert main([]) == 2
    assert "usage:" in capsys.readouterr().err


def test_unknown_command_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        main(["fig99"])
    assert excinfo.value.code == 2


def test_every_command_has_options():
    assert set(COMMANDS) == set(COMMAND_OPTIONS)
    for name in ("fig3", "fig4c", "fig6", "fig7", "fig8b", "fig8d", "fig11", "figtunnel", "fig9", "table1", "table2",
                 "table3"):
        assert name in COMMANDS
    build_parser()


def test_species_flag_maps_to_command_key():
    args = build_parser().parse_args(["zeeman", "--species", "he3-2s3S", "--bmax", "100"])
    assert args.zeeman_species == "he3-2s3S"
    assert args.bmax == 100.0
    args = build_parser().parse_args(["tunneling", "--lambda", "1013e-9", "--v0", "8"])
    assert args.wavelength == pytest.approx(1013e-9)


def test_two_photon_writes_csv(tmp_path, capsys):
    assert run(tmp_path, "two-photon") == 0
    frame, meta = load_result(str(tmp_path / "two-photon.csv"))
    assert meta["anchor"] == "two-photon ionization rescale"
    assert len(meta["config_hash"]) == 64
    assert frame["ratio"].iloc[0] > 1
    assert "formula rate" in capsys.readouterr().out


def test_table3(tmp_path):
    assert run(tmp_path, "table3") == 0
    frame, meta = load_result(str(tmp_path / "table3.csv"))
    assert meta["anchor"].startswith("Table III")
    assert set(frame["species"]) == {"na23", "yb171"}


def test_fermi_trotter_output(tmp_path):
    out = tmp_path / "trotter.csv"
    assert run(tmp_path, "fermi-trotter", "--L", "2", "--U", "2", "--tau", "1", "--steps", "8", "--output", str(out)) == 0
    frame, meta = load_result(str(out))
    assert list(frame.columns) == ["step", "err_norm", "N_particles"]
    assert len(frame) == 9
    assert np.allclose(frame["N_particles"], 2.0)
    assert meta["steps"] == "8"


def test_reruns_are_bitwise_identical(tmp_path):
    args = ["fermi-trotter", "--L", "2", "--tau", "1", "--steps", "6"]
    assert run(tmp_path, *args, "--output", str(tmp_path / "a.csv")) == 0
    assert run(tmp_path, *args, "--output", str(tmp_path / "b.csv")) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_config_block_and_flag_precedence(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("fermi-trotter.L = 2\nfermi-trotter.steps = 4\nfermi-trotter.tau = 0.5\n")
    assert main(["--config", str(config), "--output-dir", str(tmp_path), "fermi-trotter"]) == 0
    frame, _ = load_result(str(tmp_path / "fermi-trotter.csv"))
    assert len(frame) == 5
    assert main(["--config", str(config), "--output-dir", str(tmp_path), "fermi-trotter", "--steps", "3"]) == 0
    frame, _ = load_result(str(tmp_path / "fermi-trotter.csv"))
    assert len(frame) == 4


def test_computation_error_is_one_line(tmp_path, capsys):
    assert run(tmp_path, "op-dressed", "--rabi", "-1") == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1].startswith("code=domain msg=")


def test_bad_model_is_config_error(tmp_path, capsys):
    assert run(tmp_path, "fermi-trotter", "--model", "ising") == 1
    assert "code=config" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "absent.cfg"), "two-photon"]) == 1
    assert "code=config" in capsys.readouterr().err


def test_motional_spectrum(tmp_path):
    assert run(tmp_path, "motional-spectrum") == 0
    frame, meta = load_result(str(tmp_path / "motional-spectrum.csv"))
    assert len(frame) >= 3
    assert float(meta["anharmonicity"]) == pytest.approx(0.30, rel=0.2)


@pytest.mark.slow
def test_fig6_magic_field(tmp_path):
    assert run(tmp_path, "fig6", "--bmax", "1200", "--points", "121") == 0
    frame, meta = load_result(str(tmp_path / "fig6.csv"))
    assert [column for column in frame.columns if column.startswith("E")] == [f"E{k}_Hz" for k in range(1, 7)]
    assert float(meta["magic_field_G"]) == pytest.approx(803.5, abs=1.0)


@pytest.mark.slow
def test_tunneling_writes_json(tmp_path, capsys):
    assert run(tmp_path, "tunneling", "--grid", "81,49,49") == 0
    document = json.loads((tmp_path / "tunneling.json").read_text())
    assert document["E1"] > document["E0"]
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["J_Hz"] == document["J_Hz"]
