import csv
import io
import json
import subprocess
import sys

import pytest

from holofact import __version__, cli
from holofact.errors import SchemaError, StrictFieldError

SPEC = {"type": "type1", "F": [0, 1], "G": [0, -1]}
TYPE2 = {"type": "type2", "F": [0, 1], "G": [0], "N": 1, "a": 0, "a0": 1.4142135623730951}


def cfg(command, **params):
    return json.dumps({"command": command, "params": params})


def run(tmp_path, text, name="cfg.json"):
    p = tmp_path / name
    p.write_text(text)
    out = tmp_path / "out"
    return cli.main(["run", "--config", str(p), "--out", str(out)]), out


def test_parse_radius():
    c = cli.parse_config(cfg("radius", spec=SPEC, box=[1, 1]))
    assert c["command"] == "radius"
    assert c["params"]["order"] == 64
    assert len(c["hash"]) == 64


def test_parse_fills_atlas_defaults():
    c = cli.parse_config(cfg("atlas", spec=SPEC))
    assert c["params"]["budget"] == {"max_generation": 3, "max_charts": 64, "angles_per_chart": 64}
    assert c["params"]["lambda"] == 1e8


def test_parse_schema_error():
    with pytest.raises(SchemaError) as exc:
        cli.parse_config(cfg("atlas", spec=SPEC, budget={"max_generation": -1}))
    assert not isinstance(exc.value, StrictFieldError)
    assert exc.value.path == "params.budget.max_generation"


def test_parse_unknown_field():
    with pytest.raises(StrictFieldError) as exc:
        cli.parse_config(cfg("solve", spec=SPEC, ordre=64))
    assert exc.value.path == "params.ordre"


def test_parse_nonpositive_tolerance():
    with pytest.raises(SchemaError):
        cli.parse_config(cfg("atlas", spec=SPEC, **{"lambda": 0}))


def test_hash_ignores_key_order():
    a = '{"command": "ng", "params": {"K": 3, "tail_checks": false}}'
    b = '{"params": {"tail_checks": false, "K": 3}, "command": "ng"}'
    assert cli.parse_config(a)["hash"] == cli.parse_config(b)["hash"]


def test_radius_csv(tmp_path):
    code, out = run(tmp_path, cfg("radius", spec=SPEC, box=[1, 1]))
    assert code == 0
    raw = (out / "radius.csv").read_bytes()
    assert raw.count(b"\r\n") == raw.count(b"\n")
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    r = rows[0]
    assert float(r["banach"]) == pytest.approx(0.1353, abs=1e-4)
    assert float(r["picard"]) == pytest.approx(0.1353, abs=1e-4)
    assert float(r["cauchy"]) == pytest.approx(0.0654, abs=1e-4)
    assert float(r["empirical"]) == pytest.approx(0.693, abs=1e-3)
    assert r["version"] == __version__
    assert r["banach"] == format(float(r["banach"]), ".17g")
    doc = json.loads((out / "radius.json").read_text())
    assert doc["header"]["tool"] == "holofact" and doc["header"]["config_hash"] == r["config_hash"]


def test_factor_eq15(tmp_path):
    f = {"kind": "IntExpPoly", "p": [0, 1], "c": 1}
    code, out = run(tmp_path, cfg("factor", fn=f, mode="eq15", N=1))
    assert code == 0
    res = json.loads((out / "factor.json").read_text())["result"]
    assert res["residual"] < 1e-12
    assert res["provenance"] == "eq15-root"


def test_atlas_type2(tmp_path):
    code, out = run(tmp_path, cfg("atlas", spec=TYPE2, budget={"angles_per_chart": 8}))
    assert code == 0
    res = json.loads((out / "atlas.json").read_text())["result"]
    assert res["schema"] == "atlas-v1"
    assert len(res["charts"]) == 1 and res["singular"] == []


def test_domain_error_exit_1(tmp_path):
    code, out = run(tmp_path, cfg("factor", fn={"kind": "IntExpPoly", "p": [0, 0, -1]}, mode="picard"))
    assert code == 1
    err = json.loads((out / "error.json").read_text())
    assert err["error"]["code"] == "NotOmittedOnProbe"
    assert "config_hash" in err["header"]


def test_schema_error_exit_2(tmp_path, capsys):
    code, out = run(tmp_path, cfg("solve", spec=SPEC, ordre=64))
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == {"code": "StrictFieldError", "path": "params.ordre", "message": err["error"]["message"]}
    assert not out.exists()


def test_bad_json_exit_2(tmp_path):
    assert run(tmp_path, "{not json")[0] == 2


def test_outputs_byte_identical(tmp_path):
    text = cfg("ng", K=5, tail_checks=True)
    a = run(tmp_path, text, "a.json")[1] / "ng.json"
    first = a.read_bytes()
    b = run(tmp_path, text, "b.json")[1] / "ng.json"
    assert b.read_bytes() == first


@pytest.mark.parametrize("command", cli.COMMANDS)
def test_schema_subcommand(command, capsys):
    assert cli.main(["schema", command]) == 0
    s = json.loads(capsys.readouterr().out)
    assert s["properties"]["command"]["const"] == command
    assert s["additionalProperties"] is False


def test_module_entry_point(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(cfg("maxmod", fn={"kind": "ScaledExp", "lam": 1}, radii=[1, 2]))
    r = subprocess.run([sys.executable, "-m", "holofact", "run", "--config", str(p), "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    rows = list(csv.DictReader(open(tmp_path / "maxmod.csv", newline="")))
    assert float(rows[1]["M"]) == pytest.approx(7.389056, rel=1e-6)
