import json
import subprocess
import sys

import numpy as np
import pytest

from bellstrength.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_strength_chsh(capsys):
    code, out, _ = run(capsys, "strength", "--named", "chsh")
    data = json.loads(out)
    assert code == 0
    assert np.isclose(data["divergence_bits"], 0.0462738469, atol=1e-9)
    assert data["converged"] and data["kkt_slack"] <= 1e-9
    assert np.isclose(sum(m["weight"] for m in data["mixture"]), 1.0)


def test_strength_ghz_discount(capsys):
    code, out, _ = run(capsys, "strength", "--named", "ghz", "--discount", "pairs=4,acceptance=0.5")
    data = json.loads(out)
    assert code == 0
    assert np.isclose(data["discounted_bits"], np.log2(4 / 3) / 8)


def test_strength_ch_face(capsys):
    code, out, _ = run(capsys, "strength", "--named", "ch", "--eta", "0.9", "--face")
    data = json.loads(out)
    assert code == 0
    coeffs = np.array(data["face"]["inequality"]["coefficients"]).reshape(4, 9)
    assert np.all(coeffs[:, 0] == 0)


def test_check_violation(tmp_path, capsys):
    law = tmp_path / "law.json"
    ineq = tmp_path / "cglmp.json"
    assert run(capsys, "strength", "--named", "chsh", "--law-out", str(law))[0] == 0
    assert run(capsys, "canonicalize", "--named", "cglmp", "--d", "2", "--raw", "--out", str(ineq))[0] == 0
    code, out, _ = run(capsys, "check", str(law), str(ineq))
    data = json.loads(out)
    assert code == 0 and data["violated"]
    assert np.isclose(data["value"], (np.sqrt(2) - 1) / 2)
    assert np.isclose(data["classical_bound"], 0.0)


def test_vertices(capsys):
    code, out, _ = run(capsys, "vertices", "--parties", "3", "--settings", "2", "--outcomes", "3")
    assert code == 0 and json.loads(out)["count"] == 729
    code, out, _ = run(capsys, "vertices", "--list")
    listed = json.loads(out)["vertices"]
    assert len(listed) == 16 and listed[6]["assignment"] == [[0, 1], [1, 0]]


def test_noise_sweep(tmp_path, capsys):
    out = tmp_path / "noise.csv"
    assert run(capsys, "sweep", "noise", "--steps", "5", "--out", str(out))[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "noise_weight,divergence_bits"
    assert len(lines) == 6
    assert float(lines[-1].split(",")[1]) <= 1e-9
    first = lines[1].split(",")[1]
    assert first.startswith("0.0462738468") and len(first.lstrip("0.")) == 10


def test_output_is_deterministic(tmp_path):
    outs = []
    for _ in range(2):
        res = subprocess.run([sys.executable, "-m", "bellstrength.cli", "sweep", "efficiency", "--steps", "3"],
                             capture_output=True, text=True, check=True)
        outs.append(res.stdout)
    assert outs[0] == outs[1]


@pytest.mark.parametrize("argv", [
    ["strength", "--named", "w-state"],
    ["strength", "--law", "/nonexistent/law.json"],
    ["strength", "--named", "ghz", "--discount", "pairs=four"],
    ["sweep", "noise", "--start", "2"],
    ["vertices", "--settings", "9"],
    ["canonicalize"],
])
def test_bad_input_exits_one(argv, capsys):
    with pytest.raises(SystemExit) as info:
        raise SystemExit(main(argv))
    assert info.value.code == 1


def test_malformed_law_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"scenario": {"parties": 2, "settings": 2, "outcomes": 2}, "pi": [1, 0, 0, 0]}')
    assert run(capsys, "strength", "--law", str(bad))[0] == 1
    bad.write_text("not json")
    assert run(capsys, "strength", "--law", str(bad))[0] == 1
