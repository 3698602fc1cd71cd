"""Command-line frontend.

One binary, subcommand style, JSON in and JSON out: the primary result goes
to stdout (or ``--out``), human-readable diagnostics go to stderr. Exit
codes are a stable contract:

  0  success / question answered (including a dfsearch result of "unknown")
  1  I/O or parse error
  2  validation error (also bad parameters and dimension mismatches)
  3  reconstruction frame does not span the operator space
  4  reconstruction values inconsistent with any linear functional
  5  internal verification failure (a certificate failed its re-check)

Seeds default to 0; pass --seed to vary. Output bytes are deterministic
given (input bytes, flags, seed).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, jsonio
from .effects import (
    BlochVector,
    Effect,
    Povm,
    effects_from_json_dict,
    validate_povm,
)
from .errors import (
    EffectKitError,
    FrameDeficient,
    SchemaError,
    ValuesInconsistent,
)
from .generate import random_density, random_effect, random_povm, rng_from_seed
from .nogo import (
    context_set_from_json,
    search_dispersion_free,
    verify_certificate,
    witness_2d,
)
from .operators import HermitianOperator, eigenvalues_of
from .valuation import (
    DensityOperator,
    SampleRecord,
    ValuationTable,
    born,
    check_effect_valuation,
    reconstruct_density,
    sample_outcomes,
)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INVALID = 2
EXIT_FRAME = 3
EXIT_INCONSISTENT = 4
EXIT_VERIFY = 5


class _CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load_json(path: str):
    try:
        return jsonio.load(path)
    except OSError as exc:
        raise _CliFailure(EXIT_PARSE, f"cannot read {path}: {exc}") from exc
    except (ValueError, json.JSONDecodeError) as exc:
        raise _CliFailure(EXIT_PARSE, f"cannot parse {path}: {exc}") from exc


def _emit(payload, args) -> None:
    text = jsonio.dumps(payload, pretty=args.pretty) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _schema_guard(fn, *fn_args):
    try:
        return fn(*fn_args)
    except SchemaError as exc:
        raise _CliFailure(EXIT_PARSE, str(exc)) from exc


def _load_state(path: str) -> DensityOperator:
    return DensityOperator(
        _schema_guard(HermitianOperator.from_json_dict, _load_json(path)))

def _load_povm(path: str) -> Povm:
    return _schema_guard(Povm.from_json_dict, _load_json(path))


def _load_effects(path: str) -> tuple[int, list[Effect]]:
    return _schema_guard(effects_from_json_dict, _load_json(path))


def _parse_vec(text: str, flag: str) -> BlochVector:
    parts = text.split(",")
    if len(parts) != 3:
        raise _CliFailure(EXIT_INVALID, f"{flag} expects ax,ay,az")
    try:
        return BlochVector(tuple(float(p) for p in parts))
    except ValueError as exc:
        raise _CliFailure(EXIT_INVALID, f"{flag}: {exc}") from exc


def cmd_validate(args) -> int:
    payload = _load_json(args.path)
    checks: list[dict] = []

    def check(name: str, ok: bool, **detail):
        checks.append({"name": name, "ok": bool(ok), **detail})

    if args.kind == "effect":
        obj = _schema_guard(jsonio.expect_dict, payload, "effect")
        _schema_guard(jsonio.expect_str,
                      _schema_guard(jsonio.expect_key, obj, "label", "effect"),
                      "effect.label")
        op = _schema_guard(HermitianOperator.from_json_dict,
                           _schema_guard(jsonio.expect_key, obj, "op", "effect"))
        vals = eigenvalues_of(op)
        check("hermitian_drift", op.herm_deviation <= op.tol,
              deviation=op.herm_deviation)
        check("positive", vals[0] >= -1e-9, min_eig=float(vals[0]))
        check("below_identity", vals[-1] <= 1.0 + 1e-9, max_eig=float(vals[-1]))
    elif args.kind == "povm":
        try:
            povm = _schema_guard(Povm.from_json_dict, payload)
            check("sum_to_identity", True, dim=povm.dim, outcomes=len(povm))
        except EffectKitError as exc:
            check("sum_to_identity", False, error=type(exc).__name__,
                  detail=str(exc))
    elif args.kind == "state":
        op = _schema_guard(HermitianOperator.from_json_dict, payload)
        vals = eigenvalues_of(op)
        tr = float(np.trace(op.array).real)
        check("hermitian_drift", op.herm_deviation <= op.tol,
              deviation=op.herm_deviation)
        check("positive", vals[0] >= -1e-9, min_eig=float(vals[0]))
        check("unit_trace", abs(tr - 1.0) <= 1e-9, trace=tr)
    elif args.kind == "valuation":
        obj = jsonio.expect_dict(payload, "valuation table")
        entries = jsonio.expect_list(
            jsonio.expect_key(obj, "entries", "valuation table"), "entries")
        bad = []
        for item in entries:
            item = jsonio.expect_dict(item, "entry")
            value = jsonio.expect_number(
                jsonio.expect_key(item, "value", "entry"), "entry.value")
            label = jsonio.expect_str(
                jsonio.expect_key(item, "label", "entry"), "entry.label")
            if not -1e-12 <= value <= 1.0 + 1e-12:
                bad.append(label)
        check("p1_range", not bad, out_of_range=bad)
        if args.effects:
            _, effects = _load_effects(args.effects)
            by_label = {e.label: e for e in effects}
            table = _schema_guard(ValuationTable.from_json_dict, payload, by_label)
            check("labels_resolve", True)
            for povm_path in args.povm or []:
                povm = _load_povm(povm_path)
                report = check_effect_valuation(table, [povm])
                check(f"effect_valuation:{povm_path}", report.ok,
                      violations=[v.to_json_dict() for v in report.violations])
    else:  # pragma: no cover - argparse restricts choices
        raise _CliFailure(EXIT_INVALID, f"unknown kind {args.kind}")

    valid = all(c["ok"] for c in checks)
    _emit({"kind": args.kind, "valid": valid, "checks": checks}, args)
    return EXIT_OK if valid else EXIT_INVALID


def cmd_born(args) -> int:
    rho = _load_state(args.state)
    povm = _load_povm(args.povm)
    probs = [born(rho, e) for e in povm.effects]
    _emit({"probs": probs, "sum": float(sum(probs))}, args)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    _, frame = _load_effects(args.frame)
    table_raw = _load_json(args.values)
    by_label = {e.label: e for e in frame}
    table = _schema_guard(ValuationTable.from_json_dict, table_raw, by_label)
    values = [table.value(e.label) for e in frame]
    state, diag = reconstruct_density(
        frame, values, min_norm=args.min_norm, project_psd=args.project_psd)
    _emit({"state": state.to_json_dict(),
           "diagnostics": diag.to_json_dict()}, args)
    return EXIT_OK


def cmd_nogo2d(args) -> int:
    witness = witness_2d(_parse_vec(args.n, "--n"), _parse_vec(args.m, "--m"),
                         args.lam)
    _emit(witness.to_json_dict(), args)
    return EXIT_OK


def cmd_dfsearch(args) -> int:
    payload = _load_json(args.contexts)
    obj = jsonio.expect_dict(payload, "context set")
    effects_file = jsonio.expect_str(
        jsonio.expect_key(obj, "effects_file", "context set"), "effects_file")
    effects_path = Path(args.contexts).parent / effects_file
    _, effects = _load_effects(str(effects_path))
    cs = _schema_guard(context_set_from_json, payload, effects,
                       args.discover_relations)
    result = search_dispersion_free(cs, max_solutions=args.max_solutions,
                                    node_budget=args.budget)
    if not verify_certificate(result, cs):
        print("certificate failed independent re-verification", file=sys.stderr)
        return EXIT_VERIFY
    _emit(result.to_json_dict(__version__), args)
    return EXIT_OK


def cmd_sample(args) -> int:
    rho = _load_state(args.state)
    povm = _load_povm(args.povm)
    if args.shots < 1:
        raise _CliFailure(EXIT_INVALID, "--shots must be at least 1")
    record = sample_outcomes(rho, povm, args.shots, args.seed)
    _emit(record.to_json_dict(), args)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.dim < 1:
        raise _CliFailure(EXIT_INVALID, "--dim must be at least 1")
    rng = rng_from_seed(args.seed)
    if args.kind == "state":
        payload = random_density(args.dim, rng).to_json_dict()
    elif args.kind == "effect":
        payload = random_effect(args.dim, rng, label="E0").to_json_dict()
    else:
        outcomes = args.outcomes if args.outcomes else args.dim
        if outcomes < 1:
            raise _CliFailure(EXIT_INVALID, "--outcomes must be at least 1")
        payload = random_povm(args.dim, outcomes, rng).to_json_dict()
    _emit(payload, args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="effectkit",
        description="Quantum effects, POVMs, state reconstruction, and "
                    "dispersion-free no-go certificates.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--out", help="write the JSON result here instead of stdout")
        p.add_argument("--pretty", action="store_true",
                       help="indent the JSON output")

    p = sub.add_parser("validate", help="validate a JSON artifact")
    p.add_argument("path")
    p.add_argument("--kind", required=True,
                   choices=["effect", "povm", "state", "valuation"])
    p.add_argument("--effects", help="effects file for resolving valuation labels")
    p.add_argument("--povm", action="append",
                   help="POVM file(s) to check a valuation against (repeatable)")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("born", help="outcome probabilities tr[rho E_i]")
    p.add_argument("state")
    p.add_argument("povm")
    common(p)
    p.set_defaults(func=cmd_born)

    p = sub.add_parser("reconstruct",
                       help="recover a state from frame values by linear inversion")
    p.add_argument("frame", help="effects file providing the frame")
    p.add_argument("values", help="valuation table with a value per frame label")
    p.add_argument("--min-norm", action="store_true", dest="min_norm",
                   help="allow rank-deficient frames (minimum-norm solution)")
    p.add_argument("--project-psd", action="store_true", dest="project_psd",
                   help="project the solution to the nearest density operator")
    common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("nogo2d",
                       help="closed-form qubit witness against dispersion-free "
                            "valuations")
    p.add_argument("--n", required=True, help="first unit Bloch vector ax,ay,az")
    p.add_argument("--m", required=True, help="second unit Bloch vector ax,ay,az")
    p.add_argument("--lambda", required=True, type=float, dest="lam",
                   help="mixing weight in (0,1)")
    common(p)
    p.set_defaults(func=cmd_nogo2d)

    p = sub.add_parser("dfsearch",
                       help="search for dispersion-free valuations over a "
                            "context set")
    p.add_argument("contexts", help="context-set JSON file")
    p.add_argument("--max-solutions", type=int, default=64, dest="max_solutions")
    p.add_argument("--budget", type=int, default=1_000_000,
                   help="search node budget")
    p.add_argument("--discover-relations", action="store_true",
                   dest="discover_relations",
                   help="auto-discover pair/triple operator sum identities")
    common(p)
    p.set_defaults(func=cmd_dfsearch)

    p = sub.add_parser("sample", help="draw outcome counts from tr[rho E_i]")
    p.add_argument("state")
    p.add_argument("povm")
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("gen", help="generate random artifacts reproducibly")
    p.add_argument("--kind", required=True, choices=["state", "povm", "effect"])
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outcomes", type=int,
                   help="POVM outcome count (default: dim)")
    common(p)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliFailure as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except FrameDeficient as exc:
        print(f"FrameDeficient: {exc}", file=sys.stderr)
        return EXIT_FRAME
    except ValuesInconsistent as exc:
        print(f"ValuesInconsistent: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except SchemaError as exc:
        print(f"SchemaError: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EffectKitError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
