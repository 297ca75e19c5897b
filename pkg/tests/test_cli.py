import csv
import json
import subprocess
import sys

import pytest

from mfregret import cli
from mfregret.builtins import BUILTINS
from mfregret.errors import InternalConsistencyError


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def report(out):
    return json.loads((out / "report.json").read_text())


def body(out):
    """Report files with the manifest timestamp removed."""
    files = {}
    for f in sorted(out.iterdir()):
        text = f.read_text()
        if f.suffix == ".json":
            d = json.loads(text)
            d["manifest"].pop("timestamp")
            d["manifest"].pop("out")
            text = json.dumps(d, sort_keys=True)
        else:
            text = "\n".join(l for l in text.splitlines() if not l.startswith("# manifest"))
        files[f.name] = text
    return files


def write_config(tmp_path, d, name="g.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d, indent=1))
    return str(p)


def test_example_no_one_get_it(tmp_path):
    code, out = run(tmp_path, "example", "no_one_get_it", "--n", "4")
    assert code == 0
    r = report(out)["report"]
    assert r["avg_player_regret"] == pytest.approx(0.0, abs=1e-12)
    assert r["mfr_lifted"] == pytest.approx(1.0, abs=1e-9)
    # the optimal mean-field policy climbs at t = 1
    assert r["optimal_policy_lifted"][0][0] == [0.0, 1.0]


def test_greedy_profile_regret_zero(tmp_path):
    d = BUILTINS["chain"]()
    d["policy"] = {"kind": "greedy"}
    code, out = run(tmp_path, "regret", "--config", write_config(tmp_path, d), "--n", "2")
    assert code == 0
    for row in report(out)["report"]["results"][0]["player_regrets"]:
        assert row["stepwise"] == 0 and row["end"] == 0


def test_mfe_is_reproducible(tmp_path):
    cfg = write_config(tmp_path, BUILTINS["crowd"](), "crowd.json")
    a = run(tmp_path, "mfe", "--config", cfg, "--tol", "1e-6", "--seed", "7", name="a")
    b = run(tmp_path, "mfe", "--config", cfg, "--tol", "1e-6", "--seed", "7", name="b")
    assert a[0] == b[0] == 0
    r = report(a[1])["report"]
    assert r["converged"] and r["mfr"] <= 1e-6 and r["mfr_recheck"] == r["mfr"]
    assert body(a[1]) == body(b[1])


@pytest.mark.parametrize("args", [
    ["regret", "--example", "crowd", "--n", "2", "3"],
    ["lift", "--example", "crowd", "--n", "4"],
    ["simulate", "--example", "crowd", "--n", "8", "--reps", "30"],
    ["concentration", "--example", "coin", "--n", "2", "20", "--reps", "100"],
    ["validate", "--example", "crowd", "--reps", "200"],
])
def test_reports_are_deterministic_and_documented(tmp_path, args):
    a = run(tmp_path, *args, "--seed", "3", name="a")
    b = run(tmp_path, *args, "--seed", "3", name="b")
    assert a[0] == b[0] == 0
    assert body(a[1]) == body(b[1])
    manifest = report(a[1])["manifest"]
    assert manifest["command"] == args[0] and manifest["seed"] == 3 and manifest["version"]
    tables = list(a[1].glob("table_*.csv"))
    assert tables
    for t in tables:
        lines = t.read_text().splitlines()
        assert lines[0].startswith("# manifest: ")
        docs = {l[2:].split(":")[0] for l in lines if l.startswith("# ") and not l.startswith("# manifest")}
        header = next(csv.reader([next(l for l in lines if not l.startswith("#"))]))
        assert set(header) <= docs


def test_regret_report_contents(tmp_path):
    code, out = run(tmp_path, "regret", "--example", "crowd", "--n", "2", "4")
    res = report(out)["report"]["results"]
    assert [r["N"] for r in res] == [2, 4]
    for r in res:
        assert r["gap"] <= r["budget"]["E"]


def test_theta_zero_flag(tmp_path):
    _, a = run(tmp_path, "lift", "--example", "crowd", "--n", "16", name="a")
    _, b = run(tmp_path, "lift", "--example", "crowd", "--n", "16", "--theta-zero", name="b")
    ea = report(a)["report"]["results"][0]["budget"]
    eb = report(b)["report"]["results"][0]["budget"]
    assert eb["e"] == pytest.approx(eb["e_bold"]) and ea["E"] > eb["E"]


def test_config_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n "horizon": 3,\n oops\n}')
    code, _ = run(tmp_path, "regret", "--config", str(bad))
    assert code == 2
    assert "line 3" in capsys.readouterr().err
    code, _ = run(tmp_path, "regret", "--config", str(tmp_path / "missing.json"))
    assert code == 2


def test_missing_policy_exit_2(tmp_path):
    assert run(tmp_path, "regret", "--example", "chain")[0] == 2


def test_capacity_error_exit_3(tmp_path, capsys):
    code, _ = run(tmp_path, "regret", "--example", "crowd", "--n", "25")
    assert code == 3
    assert "capacity" in capsys.readouterr().err


def test_internal_consistency_exit_1(tmp_path, monkeypatch):
    def boom(run_, game, ns):
        raise InternalConsistencyError("negative regret")
    monkeypatch.setitem(cli.COMMANDS, "regret", boom)
    assert run(tmp_path, "regret", "--example", "crowd")[0] == 1


def test_validate_flags_violated_moduli(tmp_path):
    d = BUILTINS["crowd"]()
    d["moduli"] = {"eta": 1e-4}
    code, out = run(tmp_path, "validate", "--config", write_config(tmp_path, d), "--reps", "300")
    assert code == 2
    assert report(out)["report"]["ok"] is False


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mfregret.cli", "example", "single_state", "--n", "2",
                           "--out", str(tmp_path / "o")], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert report(tmp_path / "o")["report"]["avg_player_regret"] == pytest.approx(1.0)


def test_bad_arguments_exit_2(tmp_path):
    with pytest.raises(SystemExit) as err:
        cli.main(["regret"])
    assert err.value.code == 2
    assert run(tmp_path, "regret", "--example", "crowd", "--n", "0")[0] == 2
