"""JSON group configurations (schema ``spec_v1``).

    {
      "schema": "spec_v1",
      "n": 3,
      "g1": [{"name": "g1", "a": 1, "b": 0, "c": 2, "d": 1}],
      "g2": [{"name": "g2", "a": 1, "b": 5, "c": 0, "d": 1}],
      "j": {"kind": "finite", "data": [{"name": "j", "a": {"e1e2": 1}, "b": 0, "c": 0, "d": {"e1e2": 1}}]},
      "sphere": {"type": "euclidean", "center": [0, 0, 0], "radius": 2, "b1": "outside"},
      "letter_depth": 2,
      "checks": {"max_length": 8}
    }

Clifford entries are numbers or blade maps like {"1": 0.5, "e1e3": -2}.
"""
from __future__ import annotations

import json
from dataclasses import fields
from pathlib import Path

import numpy as np

from .amalgam import FiniteListOracle, Generator, GroupSpec, IntegerMatrixOracle
from .clifford import CliffordNumber, ContractError
from .geometry import SIDES, BallPair, sphere_from_dict
from .moebius import VahlenMatrix
from .verify import CheckConfig

SCHEMA = "spec_v1"
_TOP = {"schema", "name", "n", "g1", "g2", "j", "sphere", "letter_depth", "checks"}


class ConfigError(ContractError):
    pass


def _fail(path: str, msg: str):
    raise ConfigError(f"field {path}: {msg}")


def _entry(n: int, data, path: str) -> CliffordNumber:
    try:
        return CliffordNumber.from_text(n, data)
    except (ContractError, ValueError, TypeError) as e:
        _fail(path, str(e))


def _generator(n: int, data, path: str) -> Generator:
    if not isinstance(data, dict):
        _fail(path, "expected an object with name, a, b, c, d")
    missing = [k for k in ("name", "a", "b", "c", "d") if k not in data]
    if missing:
        _fail(path, f"missing {', '.join(missing)}")
    extra = set(data) - {"name", "a", "b", "c", "d"}
    if extra:
        _fail(path, f"unknown keys {sorted(extra)}")
    name = data["name"]
    if not isinstance(name, str) or not name or "*" in name or name.endswith("^-1"):
        _fail(f"{path}.name", "generator names must be nonempty, without '*' or a trailing '^-1'")
    ents = [_entry(n, data[k], f"{path}.{k}") for k in "abcd"]
    try:
        return Generator(name, VahlenMatrix(*ents))
    except ContractError as e:
        _fail(path, str(e))


def parse_config(data: dict) -> tuple[GroupSpec, CheckConfig]:
    if not isinstance(data, dict):
        _fail("<root>", "expected an object")
    if data.get("schema") != SCHEMA:
        _fail("schema", f"expected {SCHEMA!r}, got {data.get('schema')!r}")
    extra = set(data) - _TOP
    if extra:
        _fail("<root>", f"unknown keys {sorted(extra)}")
    n = data.get("n")
    if not isinstance(n, int) or n < 1:
        _fail("n", "must be an integer >= 1")
    gens = {}
    for key in ("g1", "g2"):
        lst = data.get(key)
        if not isinstance(lst, list):
            _fail(key, "expected a list of generators")
        gens[key] = [_generator(n, g, f"{key}[{i}]") for i, g in enumerate(lst)]
    j = data.get("j")
    if not isinstance(j, dict) or "kind" not in j:
        _fail("j", "expected {kind, data}")
    jgens = [_generator(n, g, f"j.data[{i}]") for i, g in enumerate(j.get("data", []))]
    try:
        if j["kind"] == "finite":
            oracle = FiniteListOracle(tuple(jgens) or (Generator("id", VahlenMatrix.identity(n)),))
        elif j["kind"] == "integer":
            oracle = IntegerMatrixOracle(tuple(jgens))
        else:
            _fail("j.kind", f"expected 'finite' or 'integer', got {j['kind']!r}")
    except ConfigError:
        raise
    except ContractError as e:
        _fail("j", str(e))
    sph = data.get("sphere")
    if not isinstance(sph, dict):
        _fail("sphere", "expected an object")
    try:
        S = sphere_from_dict(sph)
    except (KeyError, ContractError, ValueError, TypeError) as e:
        _fail("sphere", str(e))
    if S.dim != n:
        _fail("sphere", f"dimension {S.dim} does not match n = {n}")
    b1 = sph.get("b1", SIDES[type(S)][0])
    if b1 not in SIDES[type(S)]:
        _fail("sphere.b1", f"expected one of {SIDES[type(S)]}")
    depth = data.get("letter_depth", 2)
    if not isinstance(depth, int) or depth < 1:
        _fail("letter_depth", "must be a positive integer")
    checks = data.get("checks", {})
    known = {f.name for f in fields(CheckConfig)}
    bad = set(checks) - known
    if bad:
        _fail("checks", f"unknown keys {sorted(bad)}")
    try:
        cfg = CheckConfig(**checks)
    except (ContractError, TypeError) as e:
        _fail("checks", str(e))
    try:
        spec = GroupSpec(n, gens["g1"], gens["g2"], oracle, BallPair(S, b1), letter_depth=depth,
                         name=data.get("name", "custom"))
    except ContractError as e:
        _fail("<root>", str(e))
    return spec, cfg


def load_config(path) -> tuple[GroupSpec, CheckConfig]:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    return parse_config(data)


def _gen_dict(g: Generator) -> dict:
    return {"name": g.name, **g.matrix.to_text()}


def spec_to_dict(spec: GroupSpec, cfg: CheckConfig | None = None) -> dict:
    kind = "finite" if isinstance(spec.j, FiniteListOracle) else "integer"
    out = {
        "schema": SCHEMA,
        "name": spec.name,
        "n": spec.dim_n,
        "g1": [_gen_dict(g) for g in spec.g1],
        "g2": [_gen_dict(g) for g in spec.g2],
        "j": {"kind": kind, "data": [_gen_dict(g) for g in spec.j.generators]},
        "sphere": spec.balls.to_dict(),
        "letter_depth": spec.letter_depth,
    }
    if cfg is not None:
        out["checks"] = cfg.echo()
    return out


def dump_config(spec: GroupSpec, path, cfg: CheckConfig | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(spec_to_dict(spec, cfg), fh, indent=1, sort_keys=True, default=_np_default)
        fh.write("\n")


def _np_default(x):
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x).__name__)
