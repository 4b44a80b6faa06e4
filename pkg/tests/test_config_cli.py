"""Unit-suffixed config parsing, round-trips, and the CLI surface."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import pi

from dualtrap import cli, config
from dualtrap.config import (dumps, loads, parse_quantity, reference_config)
from dualtrap.errors import ConfigError


def test_quantity_parsing_voltage_pp_halves():
    assert parse_quantity("2.5 kVpp", "voltage") == 1250.0
    assert parse_quantity("150 Vpp", "voltage") == 75.0
    assert parse_quantity("56.5 V", "voltage") == 56.5


def test_quantity_parsing_frequencies_are_angular():
    assert parse_quantity("17.5 MHz", "angular_frequency") == pytest.approx(
        2 * pi * 17.5e6, rel=1e-12)
    assert parse_quantity("69 nHz", "angular_frequency") == pytest.approx(
        2 * pi * 69e-9, rel=1e-12)
    assert parse_quantity("3.1 rad/s", "angular_frequency") == 3.1


def test_quantity_parsing_other_dimensions():
    assert parse_quantity("0.9 mm", "length") == pytest.approx(0.9e-3)
    assert parse_quantity("397 nm", "length") == pytest.approx(397e-9)
    assert parse_quantity("800 e", "charge_counts") == 800
    assert parse_quantity("2.8e-26 J/s", "power") == 2.8e-26
    assert parse_quantity(42, "voltage") == 42.0


def test_quantity_parsing_rejects_wrong_units():
    with pytest.raises(ConfigError):
        parse_quantity("5 kg", "voltage")
    with pytest.raises(ConfigError):
        parse_quantity("abc V V", "voltage")
    with pytest.raises(ConfigError):
        parse_quantity("oops", "length")


def test_config_roundtrip_is_identity():
    cfg = reference_config()
    assert loads(dumps(cfg)) == cfg
    twice = loads(dumps(loads(dumps(cfg))))
    assert twice == cfg


def test_config_partial_override():
    text = """
scenario: custom
trap:
  r0: 0.9 mm
  kappa_geo: 0.93
  omega_slow: 7 kHz
  omega_fast: 17.5 MHz
  v_slow: 150 Vpp
  v_fast: 2.5 kVpp
  v_endcap: 56.5 V
seed: 42
"""
    cfg = loads(text)
    assert cfg.scenario == "custom"
    assert cfg.seed == 42
    assert cfg.trap.v_fast == 1250.0
    assert cfg.trap.omega_fast == pytest.approx(2 * pi * 17.5e6)


def test_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ConfigError):
        loads("trap: {r0: 0.9 mm, bogus_knob: 3}")
    with pytest.raises(ConfigError):
        loads("trap: {r0: -0.9 mm}")
    with pytest.raises(ConfigError):
        loads("- just\n- a list")


@given(v=st.floats(1e-3, 1e4), unit=st.sampled_from(["V", "kV", "Vpp", "kVpp"]))
@settings(max_examples=50)
def test_voltage_units_scale_consistently(v, unit):
    factor = {"V": 1.0, "kV": 1e3, "Vpp": 0.5, "kVpp": 500.0}[unit]
    assert parse_quantity(f"{v!r} {unit}", "voltage") == pytest.approx(
        v * factor, rel=1e-12)


def test_cli_modes_writes_csv_and_manifest(tmp_path, capsys):
    code = cli.main(["modes", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "modes.csv").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["subcommand"] == "modes"
    assert "dualtrap" in manifest["versions"]
    out = capsys.readouterr().out
    assert "in-phase" in out


def test_cli_stability_scan_deterministic_across_workers(tmp_path):
    args = ["stability-scan", "--q-max", "0.4", "--a-max", "0.1",
            "--resolution", "9", "7", "--seed", "3"]
    assert cli.main(args + ["--out", str(tmp_path / "w1"), "--workers", "1"]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "w2"), "--workers", "2"]) == 0
    for name in ("stability_scan.csv", "stability_boundary.csv"):
        assert ((tmp_path / "w1" / name).read_bytes()
                == (tmp_path / "w2" / name).read_bytes())


def test_cli_equilibrium_curve(tmp_path):
    code = cli.main(["equilibrium-curve", "--out", str(tmp_path),
                     "--x-min", "-30", "--x-max", "30", "--points", "7"])
    assert code == 0
    lines = (tmp_path / "equilibrium_curve.csv").read_text().splitlines()
    assert lines[0] == "np_x,np_y,np_z,ion_x,ion_y,ion_z,converged"
    assert len(lines) == 8


def test_cli_schedule_classifications(tmp_path):
    assert cli.main(["schedule", "--out", str(tmp_path)]) == 0
    body = (tmp_path / "schedule.csv").read_text()
    assert "xy-pair" in body and "z-pair" in body


def test_cli_cooling_summary(tmp_path):
    assert cli.main(["cooling", "--out", str(tmp_path),
                     "--preset", "reference-light"]) == 0
    lines = (tmp_path / "cooling_summary.csv").read_text().splitlines()
    assert lines[0] == "axis,method,T_ion_K,T_np_K"
    assert len(lines) == 5
    assert (tmp_path / "psd_x.csv").exists()


def test_cli_trajectory(tmp_path):
    assert cli.main(["trajectory", "--out", str(tmp_path),
                     "--fast-periods", "50"]) == 0
    assert (tmp_path / "trajectory.csv").exists()
    assert (tmp_path / "spectrum.csv").read_text().splitlines()[0] \
        == "freq_hz,amplitude_m"


def test_cli_micromotion(tmp_path):
    assert cli.main(["micromotion", "--out", str(tmp_path),
                     "--z-offsets", "5", "10"]) == 0
    lines = (tmp_path / "micromotion.csv").read_text().splitlines()
    assert lines[0] == "z_offset_um,amplitude_m"
    amps = [float(line.split(",")[1]) for line in lines[1:]]
    assert amps[1] > amps[0]


def test_cli_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("trap: {r0: 5 kg}\n")
    assert cli.main(["modes", "--config", str(bad),
                     "--out", str(tmp_path)]) == 2


def test_cli_numerical_error_exit_code(tmp_path):
    # three-point scan across the axis trips the continuation jump guard
    code = cli.main(["equilibrium-curve", "--out", str(tmp_path),
                     "--x-min", "-65", "--x-max", "65", "--points", "3"])
    assert code == 3
