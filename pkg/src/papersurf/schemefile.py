"""JSON scheme files (``"format": 1``) and the builtin schemes shipped with the
package."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import DomainError, SchemeError
from .geometry import Metric, MultiPolygon, Polygon
from .scheme import FoldChainSpec, PairingScheme, SegmentPairing, SequenceSpec, TypeWSpec

FORMAT_VERSION = 1
BUILTINS = ("torus", "example-1.3", "tight-horseshoe", "four-rectangle", "finite-w")


class ParseError(ValueError):
    """The file is not well-formed JSON of the expected shape."""


@dataclass(frozen=True)
class SchemeFile:
    scheme: PairingScheme
    seed: int = 0
    tolerances: dict[str, float] = field(default_factory=dict)


def _seq_to_json(seq: SequenceSpec) -> dict[str, Any]:
    if seq.infinite:
        out: dict[str, Any] = {"kind": "geometric", "first": seq.first, "ratio": seq.ratio}
        if seq.values:
            out["head"] = list(seq.values)
        return out
    return {"kind": "list", "values": list(seq.values)}


def _seq_from_json(obj: Any, where: str) -> SequenceSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError(f"{where}: sequence spec must be an object with 'kind'")
    kind = obj["kind"]
    try:
        if kind == "geometric":
            return SequenceSpec.geometric(float(obj["first"]), float(obj["ratio"]), obj.get("head", ()))
        if kind == "list":
            return SequenceSpec.of([float(v) for v in obj.get("values", [])])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: bad sequence spec ({exc})") from None
    raise ParseError(f"{where}: unknown sequence kind {kind!r}")


def to_dict(sf: SchemeFile | PairingScheme) -> dict[str, Any]:
    if isinstance(sf, PairingScheme):
        sf = SchemeFile(sf)
    sc = sf.scheme
    pairings: list[dict[str, Any]] = []
    for p in sc.basic:
        entry: dict[str, Any] = {
            "type": "segment",
            "a": {"polygon": p.a_polygon, "start": p.a_start, "len": p.length},
            "b": {"polygon": p.b_polygon, "start": p.b_start},
        }
        if p.label:
            entry["label"] = p.label
        if p.merge:
            entry["merge"] = True
        pairings.append(entry)
    for w in sc.w_specs:
        pairings.append({"type": "w", "polygon": w.polygon, "side_start": w.side_start,
                         "side_len": w.side_len, "a": _seq_to_json(w.a), "b": _seq_to_json(w.b),
                         "depth": w.depth})
    for c in sc.chains:
        pairings.append({"type": "folds", "polygon": c.polygon, "start": c.start,
                         "direction": c.direction, "a": _seq_to_json(c.a), "depth": c.depth})
    out: dict[str, Any] = {
        "format": FORMAT_VERSION,
        "name": sc.name,
        "metric": sc.domain.metric.value,
        "polygons": [{"id": poly.id, "vertices": [[v.x, v.y] for v in poly.vertices]}
                     for poly in sc.domain.polygons],
        "pairings": pairings,
        "seed": sf.seed,
    }
    if sf.tolerances:
        out["tolerances"] = dict(sf.tolerances)
    return out


def dumps(sf: SchemeFile | PairingScheme) -> str:
    # repr-exact floats keep at least 12 significant digits
    return json.dumps(to_dict(sf), indent=2) + "\n"


def from_dict(obj: Any) -> SchemeFile:
    """Build a validated scheme; raises ParseError for malformed input and
    SchemeError listing every failed invariant."""
    if not isinstance(obj, dict):
        raise ParseError("top level must be a JSON object")
    if obj.get("format") != FORMAT_VERSION:
        raise ParseError(f"unsupported format {obj.get('format')!r} (expected {FORMAT_VERSION})")
    try:
        metric = Metric.parse(obj.get("metric", "max"))
    except ValueError:
        raise ParseError(f"unknown metric {obj.get('metric')!r}") from None
    polys_raw = obj.get("polygons")
    if not isinstance(polys_raw, list) or not polys_raw:
        raise ParseError("'polygons' must be a non-empty list")
    problems: list[str] = []
    polygons = []
    for i, entry in enumerate(polys_raw):
        try:
            verts = [(float(x), float(y)) for x, y in entry["vertices"]]
            polygons.append(Polygon(str(entry["id"]), tuple(verts)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                problems.append(str(exc))
            else:
                raise ParseError(f"polygons[{i}]: {exc!r}") from None
    if problems:
        raise SchemeError(problems)
    try:
        domain = MultiPolygon(tuple(polygons), metric)
    except DomainError as exc:
        raise SchemeError([str(exc)]) from None

    basic, w_specs, chains = [], [], []
    for i, entry in enumerate(obj.get("pairings", [])):
        where = f"pairings[{i}]"
        try:
            kind = entry["type"]
            if kind == "segment":
                a, b = entry["a"], entry["b"]
                basic.append(SegmentPairing(str(a["polygon"]), float(a["start"]), str(b["polygon"]),
                                            float(b["start"]), float(a["len"]), str(entry.get("label", "")),
                                            bool(entry.get("merge", False))))
            elif kind == "w":
                w_specs.append(TypeWSpec(str(entry["polygon"]), float(entry["side_start"]),
                                         float(entry["side_len"]), _seq_from_json(entry["a"], where + ".a"),
                                         _seq_from_json(entry.get("b", {"kind": "list", "values": []}), where + ".b"),
                                         int(entry.get("depth", 30))))
            elif kind == "folds":
                chains.append(FoldChainSpec(str(entry["polygon"]), float(entry["start"]),
                                            int(entry.get("direction", 1)),
                                            _seq_from_json(entry["a"], where + ".a"), int(entry.get("depth", 24))))
            else:
                raise ParseError(f"{where}: unknown pairing type {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, (ParseError, DomainError)):
                raise ParseError(str(exc)) from None
            raise ParseError(f"{where}: missing or malformed field ({exc!r})") from None
    scheme = PairingScheme(domain, tuple(basic), tuple(w_specs), tuple(chains), str(obj.get("name", "")))
    scheme.validate()
    tolerances = {str(k): float(v) for k, v in obj.get("tolerances", {}).items()}
    return SchemeFile(scheme, int(obj.get("seed", 0)), tolerances)


def loads(text: str) -> SchemeFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return from_dict(obj)


def load(path: str | Path) -> SchemeFile:
    """Load a scheme from a path, or ``builtin:<name>`` / a bare builtin name."""
    text = str(path)
    name = text.removeprefix("builtin:")
    if text.startswith("builtin:") or (name in BUILTINS and not Path(text).exists()):
        return load_builtin(name)
    try:
        return loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def builtin_text(name: str) -> str:
    if name not in BUILTINS:
        raise DomainError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
    return resources.files("papersurf").joinpath("data", f"{name}.json").read_text()


def load_builtin(name: str) -> SchemeFile:
    return loads(builtin_text(name))


def builtin(name: str) -> PairingScheme:
    return load_builtin(name).scheme


def save(sf: SchemeFile | PairingScheme, path: str | Path) -> None:
    Path(path).write_text(dumps(sf))
