import io
import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from zebra.cli import parse_report, run

SURFACES = Path(__file__).resolve().parent.parent / "surfaces"


def call(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv], out=out)
    return code, out.getvalue()


def surf(name):
    return SURFACES / f"{name}.json"


def test_classify_square_torus():
    code, text = call("classify", surf("square_torus"), "--class", "1,0")
    assert code == 0
    assert text.startswith("verdict TF")


def test_classify_fig2_crossing():
    code, text = call("classify", surf("fig2_amalgam"), "--class", "crossing", "--json")
    assert code == 0
    doc = parse_report(text)
    assert doc["verdict"] == "NR"
    assert doc["result"]["certificate"]["kind"] == "full-cylinder"


def test_gauss_bonnet_single_triangle():
    code, text = call("gauss-bonnet", surf("octagon"), "--region", "tri:0", "--json")
    assert code == 0
    r = parse_report(text)["result"]
    assert (r["lhs_pi"], r["rhs_pi"], r["holds"]) == ("2", "2", True)
    assert call("gauss-bonnet", surf("octagon"), "--region", "tri:0")[1].strip() \
        == "lhs 2pi, rhs 2pi, holds"


def test_validate_reports_euler_poincare():
    code, text = call("validate", surf("doubled_l"), "--json")
    assert code == 0
    ep = parse_report(text)["result"]["euler_poincare"]
    assert ep["holds"]


def test_input_errors_exit_1(tmp_path):
    assert call("classify", tmp_path / "nothing.json", "--class", "1,0")[0] == 1
    assert call("classify", surf("octagon"), "--class", "0:0,0")[0] == 1
    assert call("classify", surf("octagon"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{\"triangles\": [")
    code, text = call("validate", bad, "--json")
    assert code == 1
    assert json.loads(text)["error"]["kind"] == "input"


def test_inconclusive_exits_2():
    code, text = call("classify", surf("octagon"), "--class", "0:2,2,2,1", "--budget", "1")
    assert code == 2
    assert "Inconclusive" in text
    assert call("classify", surf("octagon"), "--class", "0:2,2,2,1", "--max-iter", "0")[0] == 2


def test_machine_output_is_stable_modulo_timing():
    argv = ("classify", surf("l_shaped"), "--class", "0:2,2,2,2", "--json")
    a, b = parse_report(call(*argv)[1]), parse_report(call(*argv)[1])
    a.pop("timing")
    b.pop("timing")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_rationals_are_strings():
    code, text = call("trace", surf("square_torus"), "--start", "0:3/4,1/4", "--dir", "1,2",
                      "--json")
    assert code == 0

    def leaves(x):
        if isinstance(x, dict):
            for v in x.values():
                yield from leaves(v)
        elif isinstance(x, list):
            for v in x:
                yield from leaves(v)
        else:
            yield x
    assert not any(isinstance(v, float) for v in leaves(parse_report(text)["result"]))


def test_connect():
    code, text = call("connect", surf("octagon"), "--start", "0:2,1/4", "--to", "2,5/3",
                      "--path", "2,2", "--json")
    assert code == 0
    assert parse_report(text)["result"]["trail"]["pieces"]


def test_cylinders():
    code, text = call("cylinders", surf("fig2_amalgam"))
    assert code == 0
    assert text.strip() == "2 full cylinders"


@pytest.mark.parametrize("what,extra", [
    ("surface", []),
    ("strip", ["--class", "0:2,2,2,1"]),
    ("coverage", ["--start", "0:2,1/4", "--budget", "60"]),
    ("trail", ["--start", "0:2,1/4", "--to", "2,5/3", "--path", "2,2"]),
    ("cylinder", ["--class", "core"]),
])
def test_render_is_svg(what, extra, tmp_path):
    name = "fig2_amalgam" if what == "cylinder" else "octagon"
    out = tmp_path / "pic.svg"
    code, _ = call("render", surf(name), what, *extra, "--out", out, "--exact-overlay")
    assert code == 0
    root = ET.fromstring(out.read_bytes())
    assert root.tag.endswith("svg") and root.get("version") == "1.1"
    meta = [e for e in root.iter() if e.tag.endswith("metadata")]
    assert meta and json.loads(meta[0].text)
