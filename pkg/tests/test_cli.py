import json
import subprocess
import sys

import pytest

from artifact import cli
from artifact.gl2 import CertificationError
from conftest import HE5180_GENS, data_path


def run(*argv):
    code, report = cli.run(list(argv))
    report.pop("_json_out", None)
    return code, report


def test_commutator_of_gl2():
    code, rep = run("commutator", "--group", data_path("gl2.grp"))
    assert code == 0 and rep["status"] == "ok"
    c = rep["results"]["commutator"]
    assert (c["level"], c["index"], c["ambient"]) == (2, 2, "SL2")
    assert rep["certification"]["level"] is True


def test_genus_of_borel37():
    code, rep = run("genus", "--group", data_path("borel37.grp"))
    assert code == 0 and rep["results"]["genus"] == 2


def test_analyze_full_image_mod_37():
    code, rep = run("analyze", "--group", data_path("hE5180.grp"))
    r = rep["results"]
    assert code == 0
    assert (r["level"], r["index"], r["det_full"]) == (5180, 2736, True)
    assert r["commutator"] == {"level": 74, "index": 2736}
    lines = r["file"].splitlines()
    assert lines[0] == "GL2 5180"
    assert [tuple(map(int, ln.split())) for ln in lines[1:]] == HE5180_GENS


def test_closure_and_maximal():
    code, rep = run("closure", "--group", data_path("hE5180.grp"))
    assert code == 0 and (rep["results"]["closure"]["level"], rep["results"]["closure"]["index"]) == (37, 38)
    code, rep = run("maximal", "--group", data_path("gl2.grp"))
    assert code == 0 and rep["results"]["count"] == 6


def test_cusps_and_mfbasis():
    code, rep = run("cusps", "--group", data_path("level27.grp"))
    assert code == 0
    assert sorted(c["width"] for c in rep["results"]["cusps"]) == [1] * 6 + [3, 27]
    code, rep = run("mfbasis", "--group", data_path("borel11.grp"), "--k", "2", "--prec", "25")
    r = rep["results"]
    assert code == 0 and r["dimension"] == 2 and len(r["forms"]) == 2
    assert rep["certification"]["sturm"] is True
    for f in r["forms"]:
        assert f["weight"] == 2 and f["monomials"]
        assert len(f["cusps"]) == 2


def test_model_command():
    code, rep = run("model", "--group", data_path("borel11.grp"))
    r = rep["results"]
    assert code == 0 and r["genus"] == 1 and r["weights"] == [4, 4, 4]
    assert len(r["ideal"]["3"]) == 1


def test_ap_threads_agree():
    a = run("ap", "--curve", "1,1,1,-8,6", "--bound", "200")
    b = run("ap", "--curve", "1,1,1,-8,6", "--bound", "200", "--threads", "3")
    assert a[0] == b[0] == 0
    assert a[1]["results"] == b[1]["results"]
    assert dict(map(tuple, a[1]["results"]["ap"]))[13] == 2


def test_image_serre_and_family():
    code, rep = run("image", "--curve", "1,1,1,-8,6", "--bound", "100")
    r = rep["results"]
    assert code == 0 and r["serre_d"] == -5 and r["group"]["index"] == 2
    assert r["frobenius_compatible"] is True
    code, rep = run("image", "--group", data_path("level27.grp"), "--normal", data_path("normal54.grp"),
                    "--samples", data_path("level27.samples"), "--modulus", "114",
                    "--curve", "0,1,1,1,0", "--trace-modulus", "24", "--bound", "2000")
    r = rep["results"]
    assert code == 0
    assert r["surviving_conductors"] == [57]
    assert rep["certification"]["unique"] is True
    win = next(c for c in r["candidates"] if c["conductor"] == 57)
    assert (win["image"]["level"], win["image"]["index"]) == (1026, 1296)


def test_locate():
    code, rep = run("locate", "--catalog", data_path("catalog"), "--j", "32768/19")
    assert code == 0
    assert rep["results"]["entry"] == "level27" and rep["results"]["parameter"] == -1
    code, rep = run("locate", "--catalog", data_path("catalog"), "--curve", "0,1,1,1,0")
    assert rep["results"]["parameter"] == -1
    code, rep = run("locate", "--catalog", data_path("catalog"), "--j", "1/3")
    assert code == 0 and rep["results"]["entry"] is None


def test_usage_errors(tmp_path):
    assert run("frobnicate")[0] == 1
    assert run("genus")[0] == 1
    assert run("genus", "--group", data_path("gl2.grp"), "--bogus", "1")[0] == 1
    bad = tmp_path / "bad.grp"
    bad.write_text("GL2 7\n1 2 3\n")
    assert run("genus", "--group", str(bad))[0] == 1
    assert run("genus", "--group", str(tmp_path / "missing.grp"))[0] == 1
    assert run("ap", "--curve", "0,0,0,0,0")[0] == 1
    assert run("ap", "--curve", "1,2")[0] == 1
    # SL2 input for a command that needs a det-full GL2 group
    assert run("genus", "--group", data_path("sl2.grp"))[0] == 1


def test_certification_failure_exit_code(monkeypatch):
    def boom(args):
        raise CertificationError("level check failed")
    monkeypatch.setitem(cli.HANDLERS, "genus", boom)
    code, rep = run("genus", "--group", data_path("gl2.grp"))
    assert code == 2 and rep["status"] == "certification_failure"


def test_reports_are_byte_stable(tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        code = cli.main(["cusps", "--group", data_path("level27.grp"), "--json", str(out)])
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["schema_version"] == cli.SCHEMA_VERSION and "timing_seconds" not in rep


def test_big_integers_are_strings():
    text = cli.dump_report({"x": 2 ** 60, "y": 5, "z": [-(2 ** 70)]})
    data = json.loads(text)
    assert data == {"x": str(2 ** 60), "y": 5, "z": [str(-(2 ** 70))]}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "artifact", "genus", "--group", data_path("borel37.grp")],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["genus"] == 2
    proc = subprocess.run([sys.executable, "-m", "artifact", "nope"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 1 and "invalid choice" in proc.stderr


@pytest.mark.parametrize("cmd", cli.COMMANDS)
def test_every_command_is_wired(cmd):
    assert callable(cli.HANDLERS[cmd])
