"""Command-line front end.

Exit codes: 0 SAT / true / found, 1 UNSAT / false / none, 2 usage or input
error, 3 resource cap reached.  Machine output is JSON on stdout.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .diophantine.solver import ResourceLimitExceeded
from .modeltools import SearchLimitExceeded, Structure, brute_force_search, evaluate
from .modeltools.structure import StructureError, load_structure, save_structure
from .normalform import NotFlutedError, branch_nullary, to_normal_form
from .reducer import ReductionError, Verdict, decide, is_locally_homogeneous, locally_homogenize
from .sat2 import (AbstractModel, EncodingError, abstract_model_from_json, encode_psi,
                   globally_homogenize, is_globally_homogeneous)
from .syntax import (FormulaSyntaxError, classify_fragment, parse_formula, parse_signature,
                     print_formula)
from .typespace import TypeSpaceTooLarge

EXIT_TRUE, EXIT_FALSE, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3
_CAP_ERRORS = (ResourceLimitExceeded, TypeSpaceTooLarge, SearchLimitExceeded)
_INPUT_ERRORS = (FormulaSyntaxError, NotFlutedError, StructureError, EncodingError, ReductionError,
                 OSError, ValueError)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    pretty: bool = False
    deterministic: bool = False
    jobs: int = 1
    prune: bool = True
    scheme: str = "classes"
    backend: Optional[str] = None
    time_limit: Optional[float] = None
    max_nodes: Optional[int] = None
    type_cap: Optional[int] = None

    def __post_init__(self):
        for name in ("time_limit", "max_nodes", "type_cap"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise UsageError(f"{name.replace('_', '-')} must be positive")
        if self.jobs < 1:
            raise UsageError("jobs must be positive")


def _env_number(name: str, kind):
    raw = os.environ.get(name)
    if raw in (None, ""):
        return None
    try:
        return kind(raw)
    except ValueError:
        raise UsageError(f"{name} must be a number") from None


def _config(args) -> RunConfig:
    return RunConfig(
        pretty=args.pretty,
        deterministic=args.deterministic,
        jobs=1 if args.deterministic else args.jobs,
        prune=not args.no_prune,
        scheme=args.scheme,
        backend=args.backend,
        time_limit=args.time_limit if args.time_limit is not None else _env_number("FLPC_TIME_LIMIT", float),
        max_nodes=args.max_nodes if args.max_nodes is not None else _env_number("FLPC_MAX_NODES", int),
        type_cap=args.type_cap if args.type_cap is not None else _env_number("FLPC_TYPE_CAP", int),
    )


def _emit(data, cfg: RunConfig, summary: Optional[str] = None) -> None:
    if cfg.pretty:
        if summary:
            print(summary)
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(json.dumps(data, sort_keys=True))


def _read_formula(path: str, sig_path: Optional[str]):
    text = Path(path).read_text(encoding="utf-8")
    sig = parse_signature(Path(sig_path).read_text(encoding="utf-8")) if sig_path else None
    return parse_formula(text, sig)


def _decide(args, cfg: RunConfig, finite: bool) -> Verdict:
    f = _read_formula(args.file, args.sig)
    return decide(f, finite, prune=cfg.prune, scheme=cfg.scheme, jobs=cfg.jobs, backend=cfg.backend,
                  time_limit=cfg.time_limit, max_nodes=cfg.max_nodes, cap=cfg.type_cap)


def _witness_json(v: Verdict) -> dict:
    if isinstance(v.witness, Structure):
        return v.witness.to_json()
    if isinstance(v.witness, AbstractModel):
        data = v.witness.to_json()
        data["nullary"] = dict(v.witness.encoding.nf.nullary_values) if v.witness.encoding else {}
        return data
    return {"abstract": True, "types": None,
            "note": "only an infinite model exists at the reduced width; no explicit witness"}


def cmd_sat(args, cfg) -> int:
    finite = args.command == "finsat"
    v = _decide(args, cfg, finite)
    out = v.to_json()
    if isinstance(v.witness, AbstractModel):
        out["witness"] = _witness_json(v)
    if args.witness and v.sat:
        Path(args.witness).write_text(json.dumps(_witness_json(v), sort_keys=True) + "\n", encoding="utf-8")
    summary = f"{out['verdict']} ({out['mode']}) in {v.stats.get('seconds', 0):.3f}s"
    _emit(out, cfg, summary)
    return EXIT_TRUE if v.sat else EXIT_FALSE


def cmd_model(args, cfg) -> int:
    v = _decide(args, cfg, args.finite)
    if not v.sat:
        _emit({"verdict": "UNSAT", "mode": "finite" if args.finite else "general"}, cfg, "UNSAT")
        return EXIT_FALSE
    data = _witness_json(v)
    Path(args.out).write_text(json.dumps(data, sort_keys=True) + "\n", encoding="utf-8")
    _emit({"verdict": "SAT", "out": args.out, "abstract": bool(data.get("abstract")),
           "verified": v.verified}, cfg, f"SAT; model written to {args.out}")
    return EXIT_TRUE


def cmd_check(args, cfg) -> int:
    f = _read_formula(args.file, args.sig)
    data = json.loads(Path(args.model).read_text(encoding="utf-8"))
    if isinstance(data, dict) and data.get("abstract"):
        ok = _check_abstract(data, f, cfg)
    else:
        structure = load_structure(args.model)
        ok = evaluate(structure, f)
    _emit({"holds": ok}, cfg, "true" if ok else "false")
    return EXIT_TRUE if ok else EXIT_FALSE


def _check_abstract(data: dict, f, cfg: RunConfig) -> bool:
    if data.get("types") is None:
        raise UsageError("abstract placeholder without profiles cannot be checked")
    nf = to_normal_form(f)
    if nf.width != 2:
        raise UsageError("abstract models are only checkable for width-2 sentences")
    wanted = data.get("nullary", {})
    for branch in branch_nullary(nf):
        if dict(branch.nullary_values) != wanted:
            continue
        enc = encode_psi(branch, prune=False, finite=False, cap=cfg.type_cap)
        return abstract_model_from_json(data, enc).verify(branch)
    return False


def cmd_classify(args, cfg) -> int:
    f = _read_formula(args.file, args.sig)
    _emit(classify_fragment(f).as_dict(), cfg)
    return EXIT_TRUE


def cmd_normalize(args, cfg) -> int:
    f = _read_formula(args.file, args.sig)
    nf = to_normal_form(f)
    _emit(nf.describe(), cfg)
    return EXIT_TRUE


def cmd_brute(args, cfg) -> int:
    f, sig = _read_formula(args.file, args.sig), None
    if args.sig:
        sig = parse_signature(Path(args.sig).read_text(encoding="utf-8"))
    m = brute_force_search(f, sig, max_size=args.max, min_size=args.min)
    if m is None:
        _emit({"found": False, "max_size": args.max}, cfg, "no model")
        return EXIT_FALSE
    _emit({"found": True, "model": m.to_json()}, cfg, f"model of size {m.domain}")
    return EXIT_TRUE


def cmd_encode(args, cfg) -> int:
    from . import corpus
    if args.kind == "hilbert":
        if not args.eqns:
            raise UsageError("encode hilbert needs an equation file or text")
        p = Path(args.eqns)
        text = p.read_text(encoding="utf-8") if p.exists() else args.eqns.replace(";", "\n")
        f = corpus.encode_hilbert(corpus.parse_dioph(text))
    else:
        if args.eqns:
            raise UsageError("encode grid takes no equations")
        f = corpus.encode_grid_axioms(with_chi=args.chi)
    print(print_formula(f))
    return EXIT_TRUE


def cmd_homogenize(args, cfg) -> int:
    structure = load_structure(args.model)
    if args.local is None:
        out = globally_homogenize(structure)
        ok = is_globally_homogeneous(out)
    else:
        out = locally_homogenize(structure, args.local)
        ok = is_locally_homogeneous(out, args.local)
    if args.out:
        save_structure(out, args.out)
    _emit({"homogeneous": ok, "model": out.to_json()}, cfg)
    return EXIT_TRUE if ok else EXIT_FALSE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("--deterministic", action="store_true", help="sequential, reproducible run")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for nullary branches")
    common.add_argument("--no-prune", action="store_true", help="disable type pruning")
    common.add_argument("--scheme", choices=("classes", "types"), default="classes")
    common.add_argument("--backend", choices=("smt", "bnb"), default=None)
    common.add_argument("--time-limit", type=float, default=None, help="seconds per solver call")
    common.add_argument("--max-nodes", type=int, default=None, help="branch-and-bound node cap")
    common.add_argument("--type-cap", type=int, default=None, help="max atoms in a type basis")
    common.add_argument("--sig", default=None, help="signature file (name/arity per line)")

    p = argparse.ArgumentParser(prog="flpc", description="Fluted logic with periodic counting.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("classify", "normalize"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("file")
    for name in ("sat", "finsat"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("file")
        s.add_argument("--witness", default=None, help="write the witness JSON here")
    s = sub.add_parser("model", parents=[common])
    s.add_argument("file")
    s.add_argument("out")
    s.add_argument("--finite", action="store_true", help="require a finite model")
    s = sub.add_parser("check", parents=[common])
    s.add_argument("model")
    s.add_argument("file")
    s = sub.add_parser("brute", parents=[common])
    s.add_argument("file")
    s.add_argument("--max", type=int, default=4)
    s.add_argument("--min", type=int, default=1)
    s = sub.add_parser("encode", parents=[common])
    s.add_argument("kind", choices=("hilbert", "grid"))
    s.add_argument("eqns", nargs="?", default=None)
    s.add_argument("--chi", action="store_true", help="append the no-transfinite-positions axiom")
    s = sub.add_parser("homogenize", parents=[common])
    s.add_argument("model")
    s.add_argument("--local", type=int, default=None, metavar="L")
    s.add_argument("--out", default=None)
    return p


_COMMANDS = {
    "classify": cmd_classify, "normalize": cmd_normalize, "sat": cmd_sat, "finsat": cmd_sat,
    "model": cmd_model, "check": cmd_check, "brute": cmd_brute, "encode": cmd_encode,
    "homogenize": cmd_homogenize,
}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_TRUE
    try:
        cfg = _config(args)
        return _COMMANDS[args.command](args, cfg)
    except UsageError as e:
        print(f"flpc: {e}", file=sys.stderr)
        return EXIT_USAGE
    except _CAP_ERRORS as e:
        print(f"flpc: resource cap: {e}", file=sys.stderr)
        return EXIT_CAP
    except _INPUT_ERRORS as e:
        print(f"flpc: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
