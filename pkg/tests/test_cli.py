import json

import numpy as np
import pytest

from oscdecouple.cli import EXIT_INPUT, EXIT_OK, EXIT_RESONANCE, main
from oscdecouple.io import LoadedSystem, save_system
from oscdecouple.poly import TruncatedPolyMap


def resonant_system(path):
    # undamped modes at 2 and 4 rad/s with a quadratic forcing of the fast mode
    a = np.zeros((4, 4))
    a[0, 1], a[1, 0] = 1.0, -4.0
    a[2, 3], a[3, 2] = 1.0, -16.0
    field = TruncatedPolyMap(a, ({}, {}, {}, {(2, 0, 0, 0): 1.0}), 3)
    save_system(LoadedSystem("resonant", field, np.zeros(4), poly_angles=(0, 2)), path)


def test_decouple_ninebus(capsys, tmp_path):
    assert main(["decouple", "ninebus", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "resonances up to order 3: none" in out
    assert "inter-modal terms remaining: 0" in out
    data = json.loads((tmp_path / "decoupled.json").read_text())
    assert len(data["modes"]) == 2
    assert (tmp_path / "mode1.txt").exists() and (tmp_path / "mode2.txt").exists()


def test_decouple_nf_has_only_linear_terms(tmp_path, capsys):
    assert main(["decouple", "ninebus", "--target", "nf", "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "decoupled.json").read_text())
    for mode in data["modes"]:
        assert [t["exponents"] for t in mode["coefficients"]] == [[1, 0]]


def test_missing_file_is_input_error(tmp_path, capsys):
    assert main(["decouple", str(tmp_path / "nope.json")]) == EXIT_INPUT
    assert "input error" in capsys.readouterr().err


def test_stability_needs_fault(tmp_path, capsys):
    path = tmp_path / "r.json"
    resonant_system(path)
    assert main(["stability", str(path)]) == EXIT_INPUT


def test_resonance_aborts(tmp_path, capsys):
    path = tmp_path / "r.json"
    resonant_system(path)
    assert main(["decouple", str(path)]) == EXIT_RESONANCE
    captured = capsys.readouterr()
    assert "exact resonance" in captured.out
    assert "resonance: component" in captured.err


def test_simulate_is_deterministic(tmp_path, capsys):
    runs = []
    for name in ("a", "b"):
        out = tmp_path / name
        args = ["simulate", "ninebus", "--horizon", "0.5", "--dt", "0.01", "--durations", "0.05", "--out", str(out)]
        assert main(args) == EXIT_OK
        runs.append(out)
    for f in ("full.csv", "jet.csv", "st.csv", "st_z.csv", "st_error.csv"):
        assert (runs[0] / f).read_bytes() == (runs[1] / f).read_bytes()


def test_stability_ninebus(tmp_path, capsys):
    assert main(["stability", "ninebus", "--durations", "0,0.05,0.1", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "critical energy" in out
    lines = (tmp_path / "stability.csv").read_text().splitlines()
    assert len(lines) == 4


def test_stability_rejects_descending_durations(capsys):
    assert main(["stability", "ninebus", "--durations", "0.1,0.05"]) == EXIT_INPUT


def test_synth_then_compare(tmp_path, capsys):
    assert main(["synth", "--kind", "poly", "--seed", "3", "--out", str(tmp_path)]) == EXIT_OK
    path = tmp_path / "synth-3.json"
    assert path.exists()
    args = ["compare", str(path), "--targets", "st,nf", "--offset", "0.01,0,0.01,0",
            "--scales", "0.5,1", "--horizon", "1", "--dt", "0.01", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    assert (tmp_path / "errors.csv").exists()


def test_unknown_target_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["compare", "ninebus", "--targets", "st,bogus"])
    assert exc.value.code == 2


def test_offset_length_checked(capsys):
    assert main(["compare", "ninebus", "--offset", "0.1,0", "--horizon", "0.1"]) == EXIT_INPUT
