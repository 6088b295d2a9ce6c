"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 undetermined certificate,
3 violation (or a failing example cell).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, harness, lagrangian, quadform
from .schemas import (
    SCHEMA_VERSION,
    SCHEMAS,
    SchemaError,
    certificate_to_dict,
    encode_number,
    instance_from_dict,
    params_from_dict,
    params_to_dict,
)

EXIT_OK, EXIT_INPUT, EXIT_UNDETERMINED, EXIT_VIOLATION = 0, 1, 2, 3
SEED_ENV = "QCHINEQ_SEED"
DEFAULT_SEED = 42
MAX_EXAMPLE_N = 64


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with "undetermined"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# output

def _flatten(value, prefix: str, out: list[str]) -> None:
    if isinstance(value, dict):
        if not value:
            out.append(f"{prefix} = {{}}")
        for k, v in value.items():
            _flatten(v, f"{prefix}.{k}" if prefix else str(k), out)
    elif isinstance(value, list):
        if not value:
            out.append(f"{prefix} = []")
        for i, v in enumerate(value):
            _flatten(v, f"{prefix}[{i}]", out)
    else:
        out.append(f"{prefix} = {json.dumps(value)}")


def render(doc: dict, fmt: str) -> str:
    """JSON, or one ``path = value`` line per leaf in document order."""
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    lines: list[str] = []
    _flatten(doc, "", lines)
    return "\n".join(lines) + "\n"


def _emit(doc: dict, args, text: str | None = None) -> None:
    if text is None:
        text = render(doc, args.format)
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str, what: str):
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read {what}: {exc.strerror}") from exc
    if not raw.strip():
        raise InputError(f"{path}: empty {what} file")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


# --------------------------------------------------------------------------
# commands

def cmd_certify_quadform(args) -> int:
    try:
        params = params_from_dict(_load_json(args.params_file, "params"))
    except SchemaError as exc:
        raise InputError(f"{args.params_file}: {exc}") from exc
    cert = quadform.certify_psd(params, tol=args.tol)
    if cert.certified:
        doc = certificate_to_dict(params, cert, kernel=quadform.equality_kernel(params, tol=args.tol))
        code = EXIT_OK
    else:
        doc = certificate_to_dict(params, cert, oracle=quadform.oracle_spectrum(params))
        code = EXIT_UNDETERMINED
    _emit(doc, args)
    return code


def _kernel_ok(ex: quadform.NamedExample, params, exact: bool) -> bool:
    C = quadform.build_matrix(params)
    for y in ex.equality_vectors:
        x = ex.to_x(y)
        if exact:
            if any(v != 0 for v in C.dot(np.array(x, dtype=object))):
                return False
        else:
            xv = np.array([float(v) for v in x])
            Cf = np.asarray(C, dtype=float)
            if np.linalg.norm(Cf @ xv) > 1e-10 * max(1.0, np.linalg.norm(Cf)) * np.linalg.norm(xv):
                return False
    return True


def example_cell(name: str, n: int, mode: str = "exact", tol: float = quadform.DEFAULT_TOL) -> dict:
    """Verdict for one (example, n) cell; oprea_4_27 is checked for every r in 2..n."""
    cell = {"example": name, "n": n, "mode": mode}
    min_n = 3 if name.startswith("oprea") else 2
    if n < min_n:
        cell.update(applicable=False, passed=True, conditions={}, kernel_ok=None, r_values=[])
        return cell
    rs = list(range(2, n + 1)) if name == "oprea_4_27" else [None]
    conditions: dict[str, bool] = {}
    kernel_ok = True
    for r in rs:
        ex = quadform.named_example(name, n, r)
        params = ex.params if mode == "exact" else quadform.to_float(ex.params)
        verdict = quadform.check_conditions(params, tol=tol)
        for label, ok in verdict.per_condition.items():
            conditions[label] = conditions.get(label, True) and ok
        kernel_ok = kernel_ok and _kernel_ok(ex, params, mode == "exact")
    cell.update(
        applicable=True,
        passed=all(conditions.values()) and kernel_ok,
        conditions=conditions,
        kernel_ok=kernel_ok,
        r_values=[r for r in rs if r is not None],
    )
    return cell


def _examples_table(doc: dict) -> str:
    lines = [f"schema_version = {doc['schema_version']}", f"n_range = {doc['n_min']}:{doc['n_max']}"]
    for c in doc["cells"]:
        if not c["applicable"]:
            lines.append(f"{c['example']:<15} n={c['n']:<3} {c['mode']:<5} not-applicable")
            continue
        conds = " ".join(f"{k}={'pass' if v else 'FAIL'}" for k, v in c["conditions"].items())
        r = f" r=2..{c['n']}" if c["r_values"] else ""
        lines.append(
            f"{c['example']:<15} n={c['n']:<3} {c['mode']:<5} {'PASS' if c['passed'] else 'FAIL'} "
            f"{conds} kernel={'pass' if c['kernel_ok'] else 'FAIL'}{r}"
            + (" mismatch_with_exact" if c.get("mismatch_with_exact") else "")
        )
    lines.append(f"all_passed = {json.dumps(doc['all_passed'])}")
    return "\n".join(lines) + "\n"


def cmd_check_examples(args) -> int:
    if not 2 <= args.n_min <= args.n_max <= MAX_EXAMPLE_N:
        raise InputError(f"--n-min/--n-max: need 2 <= n-min <= n-max <= {MAX_EXAMPLE_N}, "
                         f"got {args.n_min}..{args.n_max}")
    modes = ["exact", "float"] if args.mode == "both" else [args.mode]
    cells = []
    for name in quadform.EXAMPLES:
        for n in range(args.n_min, args.n_max + 1):
            row = [example_cell(name, n, m, args.tol) for m in modes]
            if len(row) == 2 and (row[0]["passed"], row[0]["conditions"]) != (row[1]["passed"], row[1]["conditions"]):
                row[1]["passed"] = False
                row[1]["mismatch_with_exact"] = True
            cells.extend(row)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "n_min": args.n_min,
        "n_max": args.n_max,
        "cells": cells,
        "all_passed": all(c["passed"] for c in cells),
    }
    _emit(doc, args, text=_examples_table(doc) if args.format == "text" else None)
    return EXIT_OK if doc["all_passed"] else EXIT_VIOLATION


def _parse_range(text: str) -> tuple[int, int]:
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise InputError(f"--n: expected N or LO:HI, got {text!r}") from None


def cmd_fuzz(args) -> int:
    theorem = args.theorem.replace("-", "_")
    try:
        config = harness.FuzzConfig(
            theorem=theorem,
            n_range=_parse_range(args.n),
            trials=args.trials,
            seed=args.seed,
            tolerance=args.tol,
            vectors_per_point=args.vectors,
            near_equality_threshold=args.near_threshold,
            delta_x=args.delta_x,
        )
    except ValueError as exc:
        raise InputError(f"fuzz: {exc}") from exc
    report = harness.run_fuzz(config, workers=args.workers)
    doc = report.to_dict()
    _emit(doc, args)
    if not report.passed:
        where = args.out if args.out else "stdout (worst_instance)"
        print(f"violation found; counterexample written to {where}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def classification_doc(p: lagrangian.LagrangianPoint, tol: float) -> dict:
    cls = lagrangian.classify_point(p, tol=tol)
    s = lagrangian.scale(p)
    gaps = {}
    theorems = ["chen_ricci"] + (["lower_bound"] if p.n >= 3 else [])
    for th in theorems:
        mx, X = lagrangian.equality_gap_everywhere(p, th)
        mn, _ = lagrangian.min_gap(p, th)
        gaps[th] = {"max_gap": mx, "min_gap": mn, "max_gap_direction": [float(v) for v in X],
                    "equality_everywhere": abs(mx) <= tol * s}
    return {
        "schema_version": SCHEMA_VERSION,
        "n": p.n,
        "class": cls.kind,
        "label": str(cls),
        "lambda": cls.lam,
        "mu": cls.mu,
        "scale": s,
        "gaps": gaps,
    }


def cmd_classify(args) -> int:
    try:
        p = instance_from_dict(_load_json(args.instance_file, "instance"))
    except SchemaError as exc:
        raise InputError(f"{args.instance_file}: {exc}") from exc
    _emit(classification_doc(p, args.tol), args)
    return EXIT_OK


def cmd_show(args) -> int:
    if args.what == "schema":
        if args.name not in SCHEMAS:
            raise InputError(f"show schema: expected one of {sorted(SCHEMAS)}, got {args.name!r}")
        _emit(SCHEMAS[args.name], args)
        return EXIT_OK
    try:
        ex = quadform.named_example(args.name, args.n, args.r)
    except quadform.InvalidParams as exc:
        raise InputError(f"show example: {exc}") from exc
    M = quadform.build_matrix(ex.params)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "example": ex.name,
        "n": ex.n,
        "r": ex.r,
        "params": params_to_dict(ex.params),
        "permutation": list(ex.permutation),
        "equality_vectors": [[encode_number(Fraction(v)) for v in ex.to_x(y)] for y in ex.equality_vectors],
        "matrix": [[encode_number(v) for v in row] for row in M],
    }
    _emit(doc, args)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV}: expected an integer, got {raw!r}") from None


def build_parser(seed_default: int = DEFAULT_SEED) -> argparse.ArgumentParser:
    parser = _Parser(prog="qchineq", description="Certify structured quadratic forms and fuzz curvature inequalities.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON file of flag defaults, keyed by flag name (e.g. {\"trials\": 500})")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def common(p, tol):
        p.add_argument("--tol", type=float, default=tol)
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--out", help="write the document here instead of stdout")

    p = sub.add_parser("certify-quadform", help="certify a parameter file")
    p.add_argument("params_file")
    common(p, quadform.DEFAULT_TOL)
    p.set_defaults(func=cmd_certify_quadform)

    p = sub.add_parser("fuzz", help="run a randomized falsification campaign")
    p.add_argument("--theorem", required=True,
                   choices=[t.replace("_", "-") for t in harness.THEOREMS] + list(harness.THEOREMS))
    p.add_argument("--n", default="2:6", help="dimension N or range LO:HI")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=seed_default,
                   help=f"master seed (default from ${SEED_ENV}, else {DEFAULT_SEED})")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--vectors", type=int, default=10, help="unit vectors per point")
    p.add_argument("--near-threshold", type=float, default=1e-6)
    p.add_argument("--delta-x", choices=("argmin", "max"), default="argmin",
                   help="direction at which the delta_n bound is evaluated")
    common(p, 1e-9)
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("check-examples", help="verify the named examples over a range of n")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--mode", choices=("exact", "float", "both"), default="exact")
    common(p, quadform.DEFAULT_TOL)
    p.set_defaults(func=cmd_check_examples)

    p = sub.add_parser("classify", help="classify a Lagrangian instance file")
    p.add_argument("instance_file")
    common(p, 1e-10)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("show", help="print a JSON schema or a named example")
    p.add_argument("what", choices=("schema", "example"))
    p.add_argument("name", help="schema name or example name")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_show)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = _load_json(known.config, "config")
    if not isinstance(cfg, dict):
        raise InputError(f"{known.config}: config must be a JSON object")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    defaults = {k.replace("-", "_"): v for k, v in cfg.items()}
    known_dests = {a.dest for sp in subparsers.choices.values() for a in sp._actions}
    unknown = sorted(set(defaults) - known_dests)
    if unknown:
        raise InputError(f"{known.config}: unknown option {unknown[0]!r}")
    for sp in subparsers.choices.values():
        dests = {a.dest for a in sp._actions}
        sp.set_defaults(**{k: v for k, v in defaults.items() if k in dests})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser(_default_seed())
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors, --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
