import json
import math
import subprocess
import sys

import numpy as np
import pytest

from blochbody.cli import fmt_float, main, parse_params, state_from_json, state_to_json
from blochbody.families import werner
from blochbody.matcore import ValidationError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_point(capsys):
    code, out, _ = run(capsys, "classify", "--point", "0,0,1.2")
    assert code == 0
    js = json.loads(out)
    assert js["verdict"]["kind"] == "purely-entangled"
    assert js["chsh_violation_possible"] is True


def test_family_point_apex(capsys):
    code, out, _ = run(capsys, "family", "--name", "werner", "--params", "p=1", "--emit", "point")
    assert code == 0
    x, y, z = (float(v) for v in out.strip().split(","))
    assert (x, y) == (0, 0) and z == pytest.approx(math.sqrt(3), abs=1e-15)


def test_family_state_round_trip(capsys, tmp_path):
    path = tmp_path / "mems.json"
    assert run(capsys, "family", "--name", "mems", "--params", "x=0,theta=0.5", "--out", str(path))[0] == 0
    code, out, _ = run(capsys, "decompose", "--state", str(path))
    assert code == 0
    js = json.loads(out)
    assert js["model_point"] == pytest.approx([0.5, 0.5, math.sqrt(0.5)], abs=1e-12)
    assert js["bloch_lengths"]["marginals"] == pytest.approx([0.5, 0.5], abs=1e-12)
    code, out, _ = run(capsys, "classify", "--state", str(path))
    assert code == 0
    js = json.loads(out)
    assert js["entanglement"]["concurrence"] == pytest.approx(0.5, abs=1e-9)
    assert js["entanglement"]["entangled"] is True


def test_decomposition_round_trip(capsys, tmp_path):
    state = tmp_path / "w.json"
    state.write_text(json.dumps(state_to_json(werner(0.3))))
    _, out, _ = run(capsys, "decompose", "--state", str(state))
    dec = tmp_path / "d.json"
    dec.write_text(json.dumps(json.loads(out)["decomposition"]))
    code, out, _ = run(capsys, "decompose", "--decomposition", str(dec))
    assert code == 0
    back = state_from_json(json.loads(out))
    assert np.max(np.abs(back.matrix - werner(0.3).matrix)) <= 1e-12


def test_tripartite_family_point_gives_lengths(capsys):
    code, out, _ = run(capsys, "family", "--name", "tripartite-saturating", "--params", "x=0.5,y=0.25",
                       "--emit", "point")
    assert code == 0
    assert [float(v) for v in out.split(",")] == pytest.approx([0.5, 0.25, 0.75], abs=1e-9)


def test_state_json_parser_names_invariant():
    good = state_to_json(werner(0.5))
    assert state_from_json(good).dims == (2, 2)
    bad = dict(good, matrix=good["matrix"][:-1])
    with pytest.raises(ValidationError, match="entry count"):
        state_from_json(bad)
    m = np.array(good["matrix"])
    m[0, 0] += 0.1
    with pytest.raises(ValidationError, match="unit trace") as info:
        state_from_json(dict(good, matrix=m.tolist()))
    assert info.value.residual == pytest.approx(0.1)
    m = np.array(good["matrix"])
    m[1, 0] += 0.01
    with pytest.raises(ValidationError, match="Hermitian"):
        state_from_json(dict(good, matrix=m.tolist()))
    with pytest.raises(ValidationError, match="state keys"):
        state_from_json({"dims": [2, 2]})


def test_non_psd_state_rejected(capsys, tmp_path):
    path = tmp_path / "bad.json"
    m = np.diag([1.2, -0.2, 0, 0]).astype(complex)
    path.write_text(json.dumps({"dims": [2, 2], "matrix": [[z.real, z.imag] for z in m.ravel()]}))
    code, _, err = run(capsys, "classify", "--state", str(path))
    assert code == 1
    assert err.count("\n") == 1 and "positive semidefinite" in err and "residual" in err


@pytest.mark.parametrize("argv", [
    ["classify"],
    ["classify", "--point", "1,2"],
    ["classify", "--point", "-1,0,0"],
    ["family", "--name", "werner", "--params", "p"],
    ["family", "--name", "werner", "--params", "p=2"],
    ["family", "--name", "werner", "--bogus"],
    ["sample", "--kind", "fixed-rank", "--n", "5"],
    ["verify", "--kind", "hs-mixed", "--n", "5", "--checks", "tripartite"],
    ["decompose", "--state", "/nonexistent.json"],
    ["surface", "--grid", "1"],
    ["nope"],
])
def test_usage_errors_exit_one(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert out == ""
    assert err.startswith("error:") and err.count("\n") == 1


def test_sample_csv(capsys, tmp_path):
    path = tmp_path / "cloud.csv"
    assert run(capsys, "sample", "--kind", "hs-mixed", "--n", "50", "--seed", "3", "--out", str(path))[0] == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,z,purity,concurrence,pt_min_eig,verdict,family,p1,p2,seed_offset"
    assert len(lines) == 51
    fields = lines[1].split(",")
    assert len(fields) == 11 and fields[-1] == "0" and fields[7] == ""
    code, out, _ = run(capsys, "sample", "--kind", "family-grid", "--family", "werner", "--n", "3")
    assert out.splitlines()[1].split(",")[7:10] == ["werner", "0", ""]


def test_verify_exit_codes(capsys, monkeypatch):
    code, out, _ = run(capsys, "verify", "--kind", "hs-mixed", "--n", "1000", "--seed", "7", "--checks", "all")
    assert code == 0 and json.loads(out)["passed"] is True
    from blochbody import bounds
    real = bounds.purity_bound
    monkeypatch.setattr(bounds, "purity_bound", lambda delta, d=2: 0.5 * real(delta, d))
    code, out, _ = run(capsys, "verify", "--kind", "hs-mixed", "--n", "200", "--checks", "theorem1")
    assert code == 2 and json.loads(out)["passed"] is False


def test_surface_outputs(capsys):
    code, out, _ = run(capsys, "surface", "--grid", "4")
    lines = out.splitlines()
    assert lines[0] == "x,y,z_lower,z_upper" and len(lines) == 17
    code, out, _ = run(capsys, "surface", "--kind", "purity-curve", "--grid", "3")
    assert out.splitlines() == ["delta,purity_bound,triangle_bound", "0,1,1",
                                "0.5,0.625,0.875", "1,0.5,0.5"]


def test_float_format_round_trips():
    for v in [0.1, 1 / 3, math.sqrt(3), 1e-300, -2.5e17]:
        assert float(fmt_float(v)) == v
    assert fmt_float(float("nan")) == "nan"


def test_parse_params():
    assert parse_params("x=0,theta=0.5") == {"x": 0.0, "theta": 0.5}
    assert parse_params("") == {}


def test_atomic_out_leaves_no_temp_files(capsys, tmp_path):
    path = tmp_path / "mesh.csv"
    run(capsys, "surface", "--grid", "3", "--out", str(path))
    assert [p.name for p in tmp_path.iterdir()] == ["mesh.csv"]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "blochbody", "classify", "--point", "0,0,0.5"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["verdict"]["kind"] == "purely-separable-ball"
