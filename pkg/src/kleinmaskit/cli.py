"""Command line: run check suites, export orbit clouds and sphere translates.

Exit codes: 0 success (no failed check / no kernel element), 1 a check failed
or a kernel witness was found, 2 bad input, 3 freeness search truncated.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .amalgam import kernel_search
from .clifford import ContractError
from .config import load_config
from .examples import EXAMPLE_IDS, builtin
from .limitset import orbit_points, sphere_translates, write_csv, write_ply, write_spheres
from .verify import CheckConfig, _plain, run_all


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--example", choices=EXAMPLE_IDS, help="built-in configuration")
    src.add_argument("--config", type=Path, help="spec_v1 JSON file")
    p.add_argument("--dim", type=int, default=None, help="dimension n for built-in examples")
    p.add_argument("-L", "--max-length", type=int, default=None, help="maximal normal-form length")
    p.add_argument("--eps-id", type=float, default=None, help="identity tolerance")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")


def _load(args):
    if args.example:
        spec, cfg = builtin(args.example, args.dim), CheckConfig()
    else:
        spec, cfg = load_config(args.config)
    over = {}
    if args.max_length is not None:
        L = args.max_length
        if L < 0:
            raise ContractError("-L must be nonnegative")
        if L >= 1:
            over["max_length"] = L
            for k in ("coset_depth", "interactive_length", "decay_length"):
                over[k] = min(getattr(cfg, k), L)
    if args.eps_id is not None:
        over["eps_id"] = args.eps_id
    if over:
        cfg = dataclasses.replace(cfg, **over)
    return spec, cfg


def _dump(obj, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_plain(obj), fh, indent=1, sort_keys=True)
        fh.write("\n")


def cmd_check(args) -> int:
    spec, cfg = _load(args)
    if args.max_length == 0:
        raise ContractError("check needs -L >= 1")
    report = run_all(spec, cfg)
    path = args.out / f"report_{spec.name}.json"
    _dump(report.to_dict(), path)
    for r in report.results:
        print(f"{r.check:24s} {r.verdict.value}")
    print(f"conclusion: {report.info['proper_conclusion']}")
    print(f"report written to {path}")
    return 1 if report.failed else 0


def _parse_point(text: str, n: int):
    if text == "inf":
        from .moebius import INF
        return INF
    vals = [float(v) for v in text.split(",")]
    if len(vals) != n:
        raise ContractError(f"seed {text!r} needs {n} coordinates")
    return np.array(vals)


def cmd_limitset(args) -> int:
    spec, cfg = _load(args)
    L = 6 if args.max_length is None else args.max_length
    seeds = [_parse_point(s, spec.dim_n) for s in (args.seed or [])] or [np.zeros(spec.dim_n)]
    cloud = orbit_points(spec, seeds, L, rho=args.rho)
    fmt = args.format or "csv"
    path = args.out / f"limitset_{spec.name}.{fmt}"
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        write_csv(cloud, path, lifted=args.lifted)
    elif fmt == "ply":
        write_ply(cloud, path)
    else:
        pts = cloud.lifted() if args.lifted else cloud.points
        rows = [{"point": "inf" if inf and not args.lifted else p, "word_length": ell}
                for p, ell, inf in zip(pts, cloud.lengths, cloud.is_inf)]
        _dump({"points": rows, "truncated": cloud.truncated}, path)
    print(f"{len(cloud)} points (L = {L}) written to {path}")
    return 0


def cmd_spheres(args) -> int:
    spec, cfg = _load(args)
    L = 4 if args.max_length is None else args.max_length
    ss = sphere_translates(spec, L, cfg.node_budget, delta=cfg.delta_geo)
    path = args.out / f"spheres_{spec.name}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_spheres(ss, path)
    print(f"{len(ss.entries)} spheres (L = {L}); non-crossing: {ss.non_crossing}; "
          f"tangent pairs: {len(ss.marginal_pairs)}")
    print(f"written to {path}")
    return 0


def cmd_freeness(args) -> int:
    spec, cfg = _load(args)
    L = cfg.max_length if args.max_length is None else args.max_length
    r = kernel_search(spec, L, cfg.eps_id, cfg.node_budget)
    out = {"max_length": L, "examined": r.examined, "min_separation": r.min_separation,
           "truncated": r.truncated, "witness": r.witness.label if r.witness else None}
    _dump(out, args.out / f"freeness_{spec.name}.json")
    if r.witness is not None:
        print(f"witness: {r.witness.label} (separation {r.min_separation:.3g})")
        return 1
    if r.truncated:
        print(f"truncated after {r.examined} forms; no witness so far")
        return 3
    print(f"none up to length {L} ({r.examined} forms, min separation {r.min_separation:.6g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kleinmaskit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)
    c = sub.add_parser("check", help="run the hypothesis and conclusion checks")
    _add_source(c)
    c.set_defaults(func=cmd_check)
    ls = sub.add_parser("limitset", help="orbit point cloud")
    _add_source(ls)
    ls.add_argument("--format", choices=("csv", "ply", "json"), default=None)
    ls.add_argument("--seed", action="append", help="seed point 'x1,..,xn' or 'inf' (repeatable)")
    ls.add_argument("--rho", type=float, default=1e-4, help="chordal dedup resolution (0 disables)")
    ls.add_argument("--lifted", action="store_true", help="export coordinates on S^n")
    ls.set_defaults(func=cmd_limitset)
    sp = sub.add_parser("spheres", help="sphere translates with a non-crossing certificate")
    _add_source(sp)
    sp.add_argument("--format", choices=("json",), default="json")
    sp.set_defaults(func=cmd_spheres)
    fr = sub.add_parser("freeness", help="search for normal forms evaluating to the identity")
    _add_source(fr)
    fr.set_defaults(func=cmd_freeness)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ContractError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
