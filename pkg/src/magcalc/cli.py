"""``mc``: run integration, Stokes and derivative problem files.

Problem files are JSON documents validated against per-verb schemas; unknown
keys are rejected. Exit status: 0 defined/pass, 2 undefined/fail, 3 no limit
at the refinement cap, 1 malformed input or unknown registry name.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass
from typing import Any, Optional

import jsonschema
import numpy as np

from .chain import get_complex, integrate_chain, probe_policies
from .expr import parse_function
from .forms import ExteriorDerivative, UndefinedEvaluation, parse_form, stokes_residual
from .funcalc import DerivativeProblem, InverterUnavailable, iterate_derivative, solve_derivative
from .integrate import (
    Defined,
    FundamentallyUndefinedAtCap,
    NoNumericLimitAtCap,
    OutsideDomain,
    Undefined,
    get_calculus,
    ia_integrate,
    parse_policy,
)
from .region import Grid2D, parse_measure, parse_region

VERBS = ("integrate", "stokes-check", "derive", "suite")

_NUM = {"type": "number"}
_INT = {"type": "integer", "minimum": 0}
_STR = {"type": "string"}
_FUNC = {"anyOf": [_STR, _NUM, {"type": "object"}]}
_REGION = {"anyOf": [{"type": "array"}, {"type": "object"}]}
_CHAIN = {"type": "array", "items": {"type": "object", "properties": {"o": _STR, "r": _REGION},
                                     "required": ["r"], "additionalProperties": False}}
_FORM = {
    "type": "object",
    "properties": {
        "level": _INT, "f": _FUNC, "measure": _STR,
        "summands": {"type": "array", "items": {"type": "object", "properties": {"f": _FUNC, "measure": _STR},
                                                "required": ["f"], "additionalProperties": False}},
    },
    "required": ["level"],
    "additionalProperties": False,
}
_COMMON = {"verb": {"enum": list(VERBS)}, "seed": _INT, "tol": _NUM, "cap": _INT}

SCHEMAS: dict[str, dict] = {
    "integrate": {
        "type": "object",
        "properties": {**_COMMON, "calculus": _STR, "complex": _STR, "function": _FUNC, "measure": _STR,
                       "region": _REGION, "chain": _CHAIN, "level": _INT,
                       "policies": {"type": "array", "items": _STR, "minItems": 1}},
        "required": ["function"],
        "oneOf": [{"required": ["region"]}, {"required": ["chain"]}],
        "additionalProperties": False,
    },
    "stokes-check": {
        "type": "object",
        "properties": {**_COMMON, "calculus": _STR, "complex": _STR, "form": _FORM, "chain": _CHAIN,
                       "candidate": _FORM, "threshold": _NUM,
                       "policies": {"type": "array", "items": _STR, "minItems": 1}},
        "required": ["complex", "form", "chain"],
        "additionalProperties": False,
    },
    "derive": {
        "type": "object",
        "properties": {**_COMMON, "complex": _STR, "ply": _INT, "calculus": _STR, "f": _FUNC, "measure": _STR,
                       "region": _REGION, "grid_depth": _INT, "order": {"type": "integer", "minimum": 1},
                       "threshold": _NUM},
        "required": ["complex", "f"],
        "additionalProperties": False,
    },
    "suite": {
        "type": "object",
        "properties": {**_COMMON, "selector": _STR},
        "additionalProperties": False,
    },
}


class ProblemError(ValueError):
    """Malformed problem file or unknown registry name (exit 1)."""


@dataclass(frozen=True)
class RunOutput:
    text: str
    status: int


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _exit_code(verdict: Any) -> int:
    if isinstance(verdict, Defined):
        return 0
    if isinstance(verdict, (FundamentallyUndefinedAtCap, NoNumericLimitAtCap)):
        return 3
    return 2


def verdict_line(verdict: Any) -> str:
    if isinstance(verdict, Defined):
        return f"# verdict=Defined value={_fmt(verdict.value)} policy={verdict.policy}"
    if isinstance(verdict, Undefined):
        (pa, va), (pb, vb) = verdict.witness
        return f"# verdict=Undefined witness={pa}:{_fmt(va)};{pb}:{_fmt(vb)} gap={_fmt(verdict.gap)}"
    if isinstance(verdict, FundamentallyUndefinedAtCap):
        trends = ";".join(f"{p}:{_fmt(t)}" for p, t in verdict.trends)
        return f"# verdict=FundamentallyUndefinedAtCap trends={trends} diverges_to={_fmt(verdict.diverges_to)}"
    if isinstance(verdict, NoNumericLimitAtCap):
        conv = ";".join(f"{p}:{_fmt(v)}" for p, v in verdict.converged)
        pend = ";".join(f"{p}:{_fmt(t)}" for p, t in verdict.pending)
        return f"# verdict=NoNumericLimitAtCap converged={conv} pending={pend}"
    if isinstance(verdict, OutsideDomain):
        return f"# verdict=OutsideDomain reason={verdict.reason}"
    return f"# verdict={verdict}"


def _csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _plain(header: list, rows: list) -> str:
    cells = [header] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "".join("  ".join(c.ljust(wd) for c, wd in zip(r, widths)).rstrip() + "\n" for r in cells)


def _table(header: list, rows: list, fmt: str) -> str:
    return _csv(header, rows) if fmt == "csv" else _plain(header, rows)


def _resolve(name: str, base: str) -> str:
    """Make file references inside registry names relative to the problem file."""
    for prefix in ("graph:", "table:"):
        if name.startswith(prefix) and not os.path.isabs(name[len(prefix):]):
            return prefix + os.path.join(base, name[len(prefix):])
    return name


def _registry(fn, *args):
    try:
        return fn(*args)
    except (KeyError, FileNotFoundError) as exc:
        raise ProblemError(f"unknown registry name: {exc}") from exc


def _complex(doc: dict, base: str, calc):
    return _registry(get_complex, _resolve(doc.get("complex", "interval1d"), base), calc)


def _run_integrate(doc, seed, tol, cap, fmt, base) -> RunOutput:
    calc = _registry(get_calculus, doc.get("calculus", "riemann"))
    cx = _complex(doc, base, calc)
    policies = None
    if "policies" in doc:
        policies = [_registry(parse_policy, p, seed) for p in doc["policies"]]
    dim = 2 if isinstance(cx.space, Grid2D) else 1
    f = parse_function(doc["function"], dim, cx.space)
    mu = _registry(parse_measure, _resolve(doc.get("measure", "lebesgue"), base), cx.space)
    if "region" in doc:
        U = parse_region(doc["region"], cx.space)
        rep = ia_integrate(f, mu, U, calc, policies, tol=tol, cap=cap)
    else:
        c = cx.parse_chain(doc["chain"], int(doc.get("level", 1)))
        rep = integrate_chain(c, f, mu, calc, policies, tol=tol, cap=cap)
    rows = rep.trace_rows(calc.g_out)
    text = _table(["policy", "depth", "value", "chart_distance_to_final"], rows, fmt)
    for pid, why in rep.skipped:
        text += f"# skipped={pid} reason={why}\n"
    return RunOutput(text + verdict_line(rep.verdict) + "\n", _exit_code(rep.verdict))


def _run_stokes(doc, seed, tol, cap, fmt, base) -> RunOutput:
    calc = _registry(get_calculus, doc.get("calculus", "riemann"))
    cx = _complex(doc, base, calc)
    w = parse_form(doc["form"], cx)
    c = cx.parse_chain(doc["chain"], w.level + 1)
    cand = parse_form(doc["candidate"], cx) if "candidate" in doc else ExteriorDerivative(w)
    # randomly tagged policies converge too slowly in the plane for a residual check
    if "policies" in doc:
        policies = [_registry(parse_policy, p, seed) for p in doc["policies"]]
    else:
        policies = probe_policies(calc)
    try:
        r = stokes_residual(w, c, cand, tol=tol, cap=cap, policies=policies)
    except UndefinedEvaluation as exc:
        return RunOutput(verdict_line(exc.verdict) + "\n", _exit_code(exc.verdict))
    lhs = cand.evaluate(c, tol, cap, policies).verdict.value
    rhs = w.evaluate(cx.boundary(c), tol, cap, policies).verdict.value
    threshold = float(doc.get("threshold", 1e-3))
    passed = r <= threshold
    text = _table(["candidate", "boundary", "residual"], [(lhs, rhs, r)], fmt)
    text += f"# stokes={'pass' if passed else 'fail'} threshold={_fmt(threshold)}\n"
    return RunOutput(text, 0 if passed else 2)


def _run_derive(doc, seed, tol, cap, fmt, base) -> RunOutput:
    calc = _registry(get_calculus, doc.get("calculus", "riemann"))
    cx = _complex(doc, base, calc)
    dim = 2 if isinstance(cx.space, Grid2D) else 1
    ply = int(doc.get("ply", dim - 1))
    default_region = [[0, 1]] if dim == 1 else {"boxes": [[[0, 1], [0, 1]]]}
    S = parse_region(doc.get("region", default_region), cx.space)
    default_measure = "lebesgue" if dim == 1 else "area"
    mu = _registry(parse_measure, doc.get("measure", default_measure), cx.space)
    f = parse_function(doc["f"], dim, cx.space)
    try:
        p = DerivativeProblem(cx, ply, S, f, mu, tol, cap)
    except KeyError as exc:
        raise ProblemError(str(exc)) from exc
    depth = int(doc.get("grid_depth", 6))
    order = int(doc.get("order", 1))
    threshold = float(doc.get("threshold", 1e-3))
    try:
        if order == 1:
            res = solve_derivative(p, depth, seed=seed, tol=threshold)
            report, achieved = res.report, 1 if res.report.passed else 0
        else:
            it = iterate_derivative(p, order, depth, tol=threshold, seed=seed)
            res, report, achieved = it.stages[-1].result, it.stages[-1].report, it.achieved_order
    except InverterUnavailable as exc:
        raise ProblemError(str(exc)) from exc
    vals = res.values
    rows = [(";".join(str(k) for k in idx), vals[idx]) for idx in np.ndindex(vals.shape)]
    text = _table(["cell", "value"], rows, fmt)
    passed = report.passed and achieved == order
    text += f"# verify={'pass' if passed else 'fail'} achieved_order={achieved} max_residual={_fmt(report.max_residual)}\n"
    if report.witness is not None:
        w = report.witness
        text += f"# witness chain={w.chain!r} lhs={_fmt(w.lhs)} rhs={_fmt(w.rhs)} residual={_fmt(w.residual)}\n"
    return RunOutput(text, 0 if passed else 2)


def _run_suite(doc, seed, tol, cap, fmt, base) -> RunOutput:
    from .laws import run_suite

    try:
        results = run_suite(doc.get("selector", "all"))
    except KeyError as exc:
        raise ProblemError(str(exc)) from exc
    rows = [(r.module, r.name, "pass" if r.passed else "fail", r.detail) for r in results]
    text = _table(["module", "check", "result", "detail"], rows, fmt)
    if fmt != "csv":
        text += f"total {sum(r.seconds for r in results):.1f} s\n"
    return RunOutput(text, 0 if all(r.passed for r in results) else 2)


_RUNNERS = {"integrate": _run_integrate, "stokes-check": _run_stokes, "derive": _run_derive, "suite": _run_suite}


def validate(doc: Any, verb: str) -> None:
    if not isinstance(doc, dict):
        raise ProblemError("problem file must hold a JSON object")
    if doc.get("verb", verb) != verb:
        raise ProblemError(f"file declares verb {doc['verb']!r} but {verb!r} was requested")
    try:
        jsonschema.validate(doc, SCHEMAS[verb])
    except jsonschema.ValidationError as exc:
        raise ProblemError(f"schema: {exc.message}") from exc


def render(doc: dict, verb: Optional[str] = None, seed: Optional[int] = None, tol: Optional[float] = None,
           cap: Optional[int] = None, fmt: str = "csv", base: str = ".") -> RunOutput:
    """Validate and run one problem document; flags override file values."""
    verb = verb or doc.get("verb")
    if verb not in SCHEMAS:
        raise ProblemError(f"unknown verb {verb!r}")
    validate(doc, verb)
    seed = int(doc.get("seed", 0)) if seed is None else seed
    tol = float(doc.get("tol", 1e-6)) if tol is None else tol
    cap = int(doc.get("cap", 20)) if cap is None else cap
    try:
        return _RUNNERS[verb](doc, seed, tol, cap, fmt, base)
    except (ValueError, TypeError, SyntaxError) as exc:
        if isinstance(exc, ProblemError):
            raise
        raise ProblemError(f"{type(exc).__name__}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mc", description="Run a calculus problem file.")
    ap.add_argument("verb", choices=VERBS)
    ap.add_argument("file", nargs="?", help="JSON problem file (optional for suite)")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--cap", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="write output here instead of stdout")
    ap.add_argument("--format", choices=("csv", "plain"), default="csv")
    ap.add_argument("--selector", help="suite selector when no file is given")
    return ap


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.file is None:
            if args.verb != "suite":
                raise ProblemError(f"{args.verb} needs a problem file")
            doc, base = ({"selector": args.selector} if args.selector else {}), "."
        else:
            with open(args.file, encoding="utf-8") as fh:
                doc = json.load(fh)
            base = os.path.dirname(os.path.abspath(args.file))
        out = render(doc, args.verb, args.seed, args.tol, args.cap, args.format, base)
    except (ProblemError, OSError, json.JSONDecodeError) as exc:
        print(f"mc: error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(out.text)
    else:
        sys.stdout.write(out.text)
    return out.status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
