import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sipqc.cli import EXIT_CHECKS_FAILED, EXIT_INVALID, EXIT_OK, EXIT_PHYSICS, main
from sipqc.constants import ee_dipolar
from sipqc.config import ConfigError, DeviceConfig, config_hash, load_config


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


# -- config ----------------------------------------------------------------


def test_defaults_round_trip():
    cfg = DeviceConfig()
    assert DeviceConfig.from_dict(cfg.to_dict()) == cfg
    assert DeviceConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_unknown_key_rejected_with_path():
    with pytest.raises(ConfigError, match=r"chain: .*spacing_m"):
        DeviceConfig.from_dict({"chain": {"spacing_m": 5e-9}})
    with pytest.raises(ConfigError, match="<root>"):
        DeviceConfig.from_dict({"bogus": 1})


def test_type_error_path_qualified():
    with pytest.raises(ConfigError, match=r"readout\.n_qubits"):
        DeviceConfig.from_dict({"readout": {"n_qubits": "many"}})


def test_semantic_errors_become_config_errors():
    with pytest.raises(ConfigError, match="wires"):
        DeviceConfig.from_dict({"wires": {"a_um": 3.0, "delta_um": 2.0}})
    with pytest.raises(ConfigError, match="readout.states"):
        DeviceConfig.from_dict({"readout": {"n_qubits": 4, "states": "+-+"}})


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  \"seed\": ,\n}")
    with pytest.raises(ConfigError, match="line 2"):
        load_config(bad)


def test_config_hash_tracks_content():
    a, b = DeviceConfig(), DeviceConfig().with_seed(1)
    assert config_hash(a) == config_hash(DeviceConfig()) != config_hash(b)


overrides = st.fixed_dictionaries({}, optional={
    "chain": st.fixed_dictionaries({}, optional={
        "n_sites": st.integers(1, 4),
        "spacing_nm": st.floats(1.0, 50.0),
        "B0_T": st.floats(0.5, 10.0),
        "gradient_T_per_m": st.floats(0.0, 5000.0),
        "include_neighbors": st.booleans(),
    }),
    "constants": st.fixed_dictionaries({}, optional={
        "A_hyperfine_Hz": st.floats(50e6, 200e6),
        "g_e": st.floats(1.9, 2.1),
    }),
    "readout": st.fixed_dictionaries({}, optional={
        "n_qubits": st.integers(1, 64),
        "m_copies": st.integers(0, 1000),
        "n_averages": st.integers(1, 100),
        "receiver_phase_rad": st.floats(-3.0, 3.0),
        "apodize": st.booleans(),
        "states": st.sampled_from(["random", "ones"]),
    }),
    "thermal": st.fixed_dictionaries({}, optional={"T_K": st.floats(1.0, 20.0)}),
    "seed": st.integers(0, 2**63),
})


@pytest.mark.property
@given(overrides)
def test_effective_config_round_trip(data):
    cfg = DeviceConfig.from_dict(data)
    eff = cfg.to_dict()
    # every given key survives normalization unchanged
    for section, values in data.items():
        if section == "seed":
            assert eff["seed"] == values
            continue
        for k, v in values.items():
            assert eff[section][k] == v
    again = DeviceConfig.from_dict(json.loads(json.dumps(eff)))
    assert again == cfg and again.to_dict() == eff


# -- exit codes ------------------------------------------------------------


def test_budget_default(capsys):
    code, out, err = run(["budget", "--json"], capsys)
    assert code == EXIT_OK
    data = json.loads(out)
    assert any(r["quantity"] == "divincenzo_ratio_ok" and r["status"] == "PASS" for r in data["checks"])
    assert "seed = 0" in err


def test_budget_table_text(capsys):
    code, out, _ = run(["budget"], capsys)
    assert code == EXIT_OK and "coherence_gate_ratio" in out and "FAIL" not in out


def test_malformed_unit_key_exit_2(tmp_path, capsys):
    path = write_config(tmp_path, {"chain": {"B0": 3.3}})
    code, out, err = run(["budget", "--config", path], capsys)
    assert code == EXIT_INVALID and "chain" in err and out == ""


def test_missing_file_exit_2(tmp_path, capsys):
    code, _, err = run(["budget", "--config", str(tmp_path / "nope.json")], capsys)
    assert code == EXIT_INVALID and "cannot read" in err


def test_bad_flag_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["gate", "toffoli"])
    assert exc.value.code == EXIT_INVALID


def test_negative_seed_exit_2(capsys):
    assert run(["budget", "--seed", "-1"], capsys)[0] == EXIT_INVALID


def test_gate_cnot_ideal(capsys):
    code, out, _ = run(["gate", "cnot", "--json", "--check"], capsys)
    r = json.loads(out)
    assert code == EXIT_OK
    assert r["fidelity"] >= 1 - 1e-6
    assert r["duration_s"] == pytest.approx(5e-6, rel=0.10)
    assert len(r["steps"]) == 6


def test_gate_swap_ideal(capsys):
    code, out, _ = run(["gate", "swap", "--json", "--check"], capsys)
    r = json.loads(out)
    assert code == EXIT_OK and r["fidelity"] >= 1 - 1e-9 and r["fidelity_double"] >= 1 - 1e-9


def test_gate_cpmg_zero_echoes_exit_2(capsys):
    assert run(["gate", "cpmg", "--echoes", "0"], capsys)[0] == EXIT_INVALID


def test_gate_check_below_threshold_exit_3(capsys):
    # the finite 25 MHz drive is not selective across 280 kHz, so the c-NOT misses the threshold
    code, _, err = run(["gate", "cnot", "--model", "finite", "--check"], capsys)
    assert code == EXIT_PHYSICS and "below threshold" in err


def test_gate_cpmg_outputs(tmp_path, capsys):
    # default chain couples the electrons; simultaneous pi pulses leave Sz.Sz untouched, so the
    # echo amplitude follows |cos(pi D t)| while the Zeeman offsets stay refocused
    code, _, _ = run(["gate", "cpmg", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO((tmp_path / "cpmg_echoes.csv").read_text())))
    d = ee_dipolar(5.0)
    assert len(rows) == 8
    for r in rows:
        assert float(r["amplitude"]) == pytest.approx(abs(math.cos(math.pi * d * float(r["t_s"]))), abs=1e-9)
    record = json.loads((tmp_path / "run.json").read_text())
    assert set(record["outputs"]) >= {"gate_cpmg.json", "cpmg_echoes.csv", "config.effective.json"}


def test_gate_cpmg_uncoupled_refocused(tmp_path, capsys):
    path = write_config(tmp_path, {"chain": {"include_neighbors": False}})
    code, out, _ = run(["gate", "cpmg", "--config", path, "--check", "--json"], capsys)
    r = json.loads(out)
    assert code == EXIT_OK
    assert r["min_amplitude"] == pytest.approx(1.0, abs=1e-9) and r["max_phase_spread_rad"] < 1e-9


def test_fields_centre_row(capsys):
    code, out, _ = run(["fields"], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    centre = next(r for r in rows if float(r["x_m"]) == 0.0)
    assert float(centre["B_per_A"]) == pytest.approx(0.267, rel=0.005)
    assert float(centre["G_per_A"]) == pytest.approx(1.78e5, rel=0.005)
    assert out.startswith("x_m,B_per_A,G_per_A,B_oracle,G_oracle,rel_err\r\n")
    # scientific notation with at least 9 significant digits
    mantissa = centre["B_per_A"].split("e")[0].replace(".", "").lstrip("-")
    assert "e" in centre["B_per_A"] and len(mantissa) >= 9


def test_fields_single_sample(capsys):
    code, out, _ = run(["fields", "--samples", "1", "--x-min-um", "0", "--x-max-um", "0"], capsys)
    assert code == EXIT_OK and len(out.strip().splitlines()) == 2


def test_fields_inside_conductor_exit_3(capsys):
    code, _, err = run(["fields", "--x-min-um", "0.6", "--x-max-um", "0.6", "--samples", "1"], capsys)
    assert code == EXIT_PHYSICS and "between the wires" in err


def test_readout_snr_report(tmp_path, capsys):
    code, out, _ = run(["readout", "--json", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    snr = json.loads((tmp_path / "snr_report.json").read_text())
    assert snr["averaging_time_s"] == pytest.approx(100.0)
    assert snr["wall_time_s"] == pytest.approx(200.0)
    header = (tmp_path / "signal.csv").read_text().splitlines()[0]
    assert header == "t_s,re,im"
    assert (tmp_path / "spectrum.csv").read_text().startswith("f_Hz,amplitude")


def test_readout_noiseless_round_trip(tmp_path, capsys):
    code, out, _ = run(["readout", "--sensitivity", "0", "--json", "--out", str(tmp_path)], capsys)
    assert code == EXIT_OK
    bits = json.loads((tmp_path / "bits.json").read_text())
    assert bits["errors"] == 0 and bits["input"] == bits["decoded"]
    assert json.loads(out)["snr_report"]["averaging_time_s"] is None


def test_readout_rejects_unresolvable_override(capsys):
    assert run(["readout", "--acquisition-time", "1e-7"], capsys)[0] == EXIT_INVALID


def test_paper_check_json(capsys):
    code, out, _ = run(["paper-check", "--items", "1", "2", "5", "--json"], capsys)
    data = json.loads(out)
    assert code == EXIT_OK and data["summary"]["failed"] == 0


def test_paper_check_flags_perturbed_hyperfine(capsys):
    code, out, _ = run(["paper-check", "--items", "1", "--scale", "A_hyperfine=0.95", "--json"], capsys)
    data = json.loads(out)
    failed = {r["name"] for r in data["checks"] if not r["passed"]}
    assert code == EXIT_CHECKS_FAILED
    assert {"NMR lower line (Hz)", "NMR upper line (Hz)"} <= failed


def test_paper_check_unknown_item_exit_2(capsys):
    assert run(["paper-check", "--items", "99"], capsys)[0] == EXIT_INVALID
    assert run(["paper-check", "--scale", "nothing=2"], capsys)[0] == EXIT_INVALID


def test_json_mode_stdout_is_only_json(capsys):
    _, out, err = run(["gate", "swap", "--json"], capsys)
    json.loads(out)
    assert "seed" in err


# -- determinism -----------------------------------------------------------


def artifacts(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "run.json"}


@pytest.mark.parametrize("argv", [
    ["readout", "--n-qubits", "32"],
    ["fields", "--samples", "5"],
    ["budget"],
    ["gate", "cpmg"],
])
def test_byte_identical_outputs(tmp_path, capsys, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--seed", "7", "--out", str(a)]) == EXIT_OK
    assert main(argv + ["--seed", "7", "--out", str(b)]) == EXIT_OK
    capsys.readouterr()
    assert artifacts(a) == artifacts(b)
    ra, rb = (json.loads((d / "run.json").read_text()) for d in (a, b))
    assert ra["outputs"] == rb["outputs"] and ra["config_sha256"] == rb["config_sha256"]


def test_seed_changes_readout(tmp_path, capsys):
    main(["readout", "--n-qubits", "32", "--seed", "1", "--out", str(tmp_path / "a")])
    main(["readout", "--n-qubits", "32", "--seed", "2", "--out", str(tmp_path / "b")])
    capsys.readouterr()
    assert (tmp_path / "a" / "signal.csv").read_bytes() != (tmp_path / "b" / "signal.csv").read_bytes()


def test_effective_config_reloads(tmp_path, capsys):
    src = write_config(tmp_path, {"chain": {"B0_T": 3.0}, "seed": 5})
    out = tmp_path / "out"
    assert main(["budget", "--config", src, "--out", str(out)]) == EXIT_OK
    capsys.readouterr()
    eff = load_config(out / "config.effective.json")
    assert eff == load_config(src)


def test_plot_files(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    assert main(["fields", "--plot", "--out", str(tmp_path)]) == EXIT_OK
    assert main(["readout", "--n-qubits", "16", "--plot", "--out", str(tmp_path)]) == EXIT_OK
    capsys.readouterr()
    for name in ("fields.png", "readout.png"):
        assert (tmp_path / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "sipqc.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("sipqc ")
