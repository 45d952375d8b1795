import io
import json

import pytest

from papersurf.cli import main, parse_location
from papersurf.scheme import BoundaryPoint
from papersurf.schemefile import BUILTINS, builtin_text


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_parse_location():
    assert parse_location("P@1.5") == BoundaryPoint("P", 1.5)
    assert parse_location("Q:0.2,0.3") == ("Q", (0.2, 0.3))
    assert parse_location("0.2,0.3") == (0.2, 0.3)


@pytest.mark.parametrize("name, line", [
    ("torus", "full: yes, plain: no (linked witness P@0~P@3 and P@1.5~P@3.5), singular classes: 0"),
    ("example-1.3", "full: yes, plain: yes, singular classes: 1"),
    ("tight-horseshoe", "full: yes, plain: yes, singular classes: 1"),
])
def test_validate_builtins(name, line):
    code, text = run("validate", name)
    assert code == 0 and text.strip() == line


def test_validate_missing_pairing(tmp_path):
    obj = json.loads(builtin_text("torus"))
    obj["pairings"] = obj["pairings"][:1]
    path = tmp_path / "half.json"
    path.write_text(json.dumps(obj))
    code, text = run("validate", str(path))
    assert code == 2
    assert text.strip() == "full: no (covered 1.0 of 2.0)"


def test_validate_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run("validate", str(path))[0] == 1
    assert run("validate", str(tmp_path / "missing.json"))[0] == 1


def test_usage_error_exits_one():
    with pytest.raises(SystemExit) as info:
        main(["distance", "torus"], out=io.StringIO())
    assert info.value.code == 1


def test_distance_torus():
    code, text = run("distance", "torus", "--from", "P:0.1,0.5", "--to", "P:0.9,0.5")
    assert code == 0
    first = text.splitlines()[0]
    assert first.startswith("distance: ")
    assert float(first.split()[1]) == pytest.approx(0.2, abs=1e-4)
    assert text.splitlines()[1] == "step,kind,x,y,length"


def test_ball_csv_and_svg(tmp_path):
    svg = tmp_path / "ball.svg"
    csv_path = tmp_path / "ball.csv"
    code, text = run("ball", "example-1.3", "--center", "P:0.5,0.5", "--r", "0.1",
                     "--csv", str(csv_path), "--svg", str(svg))
    assert code == 0
    assert "area 0.04 " in text and "ratio 4.000000" in text
    assert csv_path.read_text().count("\n") >= 2
    assert svg.read_text().startswith("<svg")


def test_ball_domain_error():
    assert run("ball", "example-1.3", "--center", "P:0.5,0.5", "--r", "-1")[0] == 2


def test_horseshoe_fit_line():
    code, text = run("horseshoe", "--kmin", "3", "--kmax", "6")
    assert code == 0
    assert text.splitlines()[0] == "k,r,area,ratio,pieces,tail_bound"
    assert text.splitlines()[-1].startswith("fit: ratio = 4.0000 * log2(1/r)")


def test_regularity_and_llc_summaries():
    code, text = run("regularity", "example-1.3", "--centers", "4", "--radii", "3")
    assert code == 0 and text.startswith("ratio ∈ [")
    code, text = run("llc", "example-1.3", "--samples", "2", "--r", "0.2", "--h", "0.01")
    assert code == 0 and "2/2 LLC1, 2/2 LLC2, complement connected 2/2" in text


def test_builtin_listing_and_print(tmp_path):
    code, text = run("builtin")
    assert code == 0 and text.split() == list(BUILTINS)
    out = tmp_path / "t.json"
    assert run("builtin", "torus", "--out", str(out))[0] == 0
    assert out.read_text() == builtin_text("torus")
