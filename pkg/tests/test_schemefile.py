import json

import pytest

from papersurf.errors import SchemeError
from papersurf.schemefile import BUILTINS, ParseError, builtin, builtin_text, dumps, load, loads, save


@pytest.mark.parametrize("name", BUILTINS)
def test_builtin_round_trip(name):
    sc = builtin(name)
    text = dumps(sc)
    again = loads(text).scheme
    assert again == sc
    assert dumps(again) == text


def test_geometric_sequences_stay_symbolic():
    obj = json.loads(builtin_text("example-1.3"))
    w = next(p for p in obj["pairings"] if p["type"] == "w")
    assert w["a"] == {"kind": "geometric", "first": 0.125, "ratio": 2.0}


def test_load_paths_and_builtin_prefix(tmp_path):
    path = tmp_path / "t.json"
    save(builtin("torus"), path)
    assert load(path).scheme == builtin("torus")
    assert load("builtin:torus").scheme == builtin("torus")
    assert load("torus").scheme == builtin("torus")


@pytest.mark.parametrize("text", ["{", "[]", '{"format": 2}', '{"format": 1, "polygons": []}',
                                  '{"format": 1, "polygons": [{"id": "P"}]}'])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        loads(text)


def test_unknown_pairing_type_is_parse_error():
    obj = json.loads(builtin_text("torus"))
    obj["pairings"].append({"type": "twist"})
    with pytest.raises(ParseError, match="twist"):
        loads(json.dumps(obj))


def test_invalid_scheme_lists_diagnostics():
    obj = json.loads(builtin_text("torus"))
    obj["pairings"].append({"type": "segment", "a": {"polygon": "P", "start": 0.2, "len": 0.1},
                            "b": {"polygon": "P", "start": 1.2}})
    with pytest.raises(SchemeError) as info:
        loads(json.dumps(obj))
    assert any("overlap" in d for d in info.value.diagnostics)


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load(tmp_path / "absent.json")
