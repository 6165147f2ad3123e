"""Command-line front end.

    semple-contact ring N
    semple-contact module N --input curve.json
    semple-contact contact --input problem.json
    semple-contact lift --input branch.json [--max-level N]
    semple-contact verify [--seed N]
    semple-contact formula --input formula.json [--format latex]

Input is read from ``--input`` or standard input.  Exit status: 0 success,
1 bad input, 2 failed internal check, 3 series precision exhausted.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass
from math import factorial, prod

from . import branch_lift, contact_calculus, jet_operators, linalg, tower_ring
from .errors import InputError, InvariantError, PrecisionError

DEFAULT_SEED = 1729
DEFAULT_MAX_LEVEL = 6
SUBCOMMANDS = ("ring", "module", "contact", "lift", "verify", "formula")
NEEDS_INPUT = {"module", "contact", "lift", "formula"}
NEEDS_LEVEL = {"ring", "module"}
DEFAULT_FORMAT = {"verify": "text", "formula": "text"}

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_PRECISION = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    level: int | None = None
    input_path: str | None = None
    output_format: str | None = None
    seed: int = DEFAULT_SEED
    max_level: int | None = None

    @property
    def fmt(self) -> str:
        return self.output_format or DEFAULT_FORMAT.get(self.subcommand, "json")


def _dump(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _diagnostic(kind: str, message: str, **extra) -> bytes:
    err = {"kind": kind, "message": message}
    err.update({k: v for k, v in extra.items() if v is not None})
    return _dump({"error": err})


def _parse_json(data: bytes):
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise _JsonError(f"input is not UTF-8: {exc.reason}", None, None) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _JsonError(exc.msg, exc.lineno, exc.colno) from None


class _JsonError(InputError):
    def __init__(self, message, line, column):
        super().__init__(message)
        self.line = line
        self.column = column


# -- subcommands ---------------------------------------------------------------------


def _ring(config: RunConfig, _data) -> bytes:
    n = config.level
    if n is None or n < 1:
        raise InputError("ring needs a level N >= 1")
    tower = tower_ring.build_tower(n)
    basis = tower_ring.dual_basis(n, tower)
    pm = tower_ring.pairing_matrix(n, tower, basis)
    checks = {str(k): tower_ring.theorem1_check(k, tower) for k in range(2, n + 1)}
    if not all(checks.values()):
        raise InvariantError(f"quadratic relations fail for k in {[k for k, v in checks.items() if not v]}")
    if not tower_ring.basic_relations_vanish(tower):
        raise InvariantError("h^3, hdual^3 or h^2 - h hdual + hdual^2 does not vanish")
    out = {
        "level": n,
        "pairing_matrix": {
            "rows": list(pm.row_labels),
            "columns": list(pm.column_labels),
            "entries": [list(r) for r in pm.entries],
        },
        "relations": {f"i{k}^2": ok for k, ok in checks.items()},
        "phi_squares": {
            f"phi{k}^2": c.to_text() for k, c in tower.relation_table.items()
        },
    }
    if n >= 2:
        out["z2"] = tower_ring.solve_z2(tower).to_text()
    if config.fmt == "json":
        return _dump(out)
    lines = [f"pairing of A^1(F({n})) with A^{n + 1}(F({n}))"]
    width = max(len(lab) for lab in pm.row_labels)
    for lab, row in zip(pm.row_labels, pm.entries):
        lines.append(lab.ljust(width) + "  " + " ".join(f"{v:>4}" for v in row))
    lines.append("columns: " + ", ".join(pm.column_labels))
    for k, ok in checks.items():
        lines.append(f"i{k}^2 relation: {'holds' if ok else 'FAILS'}")
    if n >= 2:
        lines.append(f"z2 = {out['z2']}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _module(config: RunConfig, data) -> bytes:
    n = config.level
    if n is None or n < 0:
        raise InputError("module needs a weight N >= 0")
    obj = _parse_json(data)
    curve = contact_calculus.CurveCharacteristics.from_json(obj)
    m = contact_calculus.curve_module(curve, n)
    if config.fmt == "json":
        out = m.to_json()
        out["text"] = m.to_text()
        return _dump(out)
    return (m.to_text() + "\n").encode("utf-8")


def _contact(config: RunConfig, data) -> bytes:
    obj = _parse_json(data)
    if not isinstance(obj, dict):
        raise InputError("contact input must be an object with curves, orders, family")
    for key in ("curves", "orders", "family"):
        if key not in obj:
            raise InputError(f"contact input is missing {key!r}")
    if not isinstance(obj["curves"], list) or not isinstance(obj["orders"], list):
        raise InputError("'curves' and 'orders' must be lists")
    curves = [contact_calculus.CurveCharacteristics.from_json(c) for c in obj["curves"]]
    fam = contact_calculus.FamilyCharacteristics.from_json(obj["family"])
    result = contact_calculus.proto_contact(curves, obj["orders"], fam)
    if config.fmt == "json":
        return _dump(result.to_json())
    lines = [str(result.total)]
    lines += [f"warning: {w}" for w in result.hypothesis_warnings]
    lines += [f"note: {w}" for w in result.notes]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _lift(config: RunConfig, data) -> bytes:
    obj = _parse_json(data)
    max_level = config.max_level or DEFAULT_MAX_LEVEL
    if isinstance(obj, dict) and "branches" in obj:
        if not isinstance(obj["branches"], list):
            raise InputError("'branches' must be a list")
        branches = [branch_lift.BranchSeries.from_json(b) for b in obj["branches"]]
        if "degree" not in obj:
            raise InputError("curve input is missing 'degree'")
        curve = branch_lift.curve_characteristics(
            branches, obj["degree"], obj.get("class"), max_level
        )
        reports = [branch_lift.analyze_branch(b, max_level).to_json() for b in branches]
        out = {"curve": curve.to_json(), "branches": reports}
        if config.fmt == "json":
            return _dump(out)
        c = curve.to_json()
        kap = ", ".join(f"kappa_{j}={v}" for j, v in c["kappa"].items()) or "no cusps"
        return (f"d={c['degree']} class={c['class']} {kap}\n").encode("utf-8")
    branch = branch_lift.BranchSeries.from_json(obj)
    report = branch_lift.analyze_branch(branch, max_level).to_json()
    if config.fmt == "json":
        return _dump(report)
    kap = ", ".join(f"kappa_{j}={v}" for j, v in report["kappa"].items()) or "no cusps"
    flags = [f for f in ("smooth", "profound", "flat") if report[f]]
    return (kap + ("; " + ", ".join(flags) if flags else "") + "\n").encode("utf-8")


def _formula(config: RunConfig, data) -> bytes:
    obj = _parse_json(data)
    if not isinstance(obj, dict) or "curves" not in obj or "orders" not in obj:
        raise InputError("formula input needs 'curves' (names) and 'orders'")
    names, orders = obj["curves"], obj["orders"]
    if not isinstance(names, list) or not all(isinstance(s, str) for s in names):
        raise InputError("'curves' must be a list of names")
    if not isinstance(orders, list):
        raise InputError("'orders' must be a list")
    if config.fmt == "json":
        import sympy

        terms = contact_calculus.symbolic_expansion(names, orders)
        return _dump({
            "text": contact_calculus.emit_formula(names, orders, "text"),
            "latex": contact_calculus.emit_formula(names, orders, "latex"),
            "terms": [
                {"monomial": contact_calculus.key_string(k), "coefficient": sympy.sstr(c)}
                for k, c in terms
            ],
        })
    return (contact_calculus.emit_formula(names, orders, config.fmt) + "\n").encode("utf-8")


# -- verify ---------------------------------------------------------------------------


def verification_results(seed: int = DEFAULT_SEED) -> list:
    """(name, ok, detail) for the operator-identity sweep and the matrix-rank checks."""
    results = []
    for v in jet_operators.lemma_b_sweep():
        detail = v.expected if v.coefficient is None else f"{v.expected}, coefficient {v.coefficient}"
        results.append((v.label(), v.passed, detail))
    rng = random.Random(seed)
    for n in range(0, 7):
        pt = jet_operators.random_primary_point(rng, n)
        m = jet_operators.universal_matrix(pt, n)
        det = linalg.determinant(m.submatrix([(k, 0) for k in range(n + 1)]))
        want = prod(factorial(k) for k in range(n + 1))
        results.append((f"triangular-minor n={n}", det == want, f"det {det}, expected {want}"))
    for n in range(1, 5):
        for s in range(20):
            pt = jet_operators.random_primary_point(rng, n)
            r = jet_operators.exact_rank(jet_operators.universal_matrix(pt, n))
            results.append((f"rank primary n={n} sample={s:02d}", r == n + 1, f"rank {r}"))
        for j in range(2, n + 1):
            for s in range(20):
                pt = jet_operators.random_secondary_point(rng, n, j, normalized=s % 2 == 1)
                r = jet_operators.exact_rank(jet_operators.universal_matrix(pt, n))
                results.append((f"rank secondary n={n} j={j} sample={s:02d}", r == n + 1,
                                f"rank {r}"))
        pt = jet_operators.random_primary_point(rng, n)
        r = jet_operators.exact_rank(jet_operators.universal_matrix(pt, n, "singular_row"))
        results.append((f"rank singular-row n={n}", r == n + 2, f"rank {r}"))
    for p, ns in _fiber_levels():
        d = p - 1 + sum(ns)
        label = ",".join(map(str, ns))
        for coincident in ((False, True) if p >= 2 else (False,)):
            pts = jet_operators.sample_fiber_points(rng, ns, coincident)
            r = jet_operators.exact_rank(jet_operators.fiber_system(pts, d))
            want = jet_operators.expected_fiber_rank(pts)
            q = p - 1 if coincident else p
            results.append((f"fiber rank n=({label}) q={q}", r == want, f"rank {r}, expected {want}"))
        if p >= 2:
            pts = jet_operators.infinity_pair_points(ns, rng)
            r = jet_operators.exact_rank(jet_operators.fiber_system(pts, d))
            want = jet_operators.expected_fiber_rank(pts)
            results.append((f"fiber rank n=({label}) pair at infinity", r == want,
                            f"rank {r}, expected {want}"))
        pts = jet_operators.sample_fiber_points(rng, ns, secondary_share=0.0)
        r = jet_operators.exact_rank(jet_operators.fiber_system(pts, d, "first_singular"))
        want = jet_operators.expected_fiber_rank(pts, "first_singular")
        results.append((f"fiber rank n=({label}) singular first factor", r == want,
                        f"rank {r}, expected {want}"))
    results.sort(key=lambda r: r[0])
    return results


def _fiber_levels() -> list:
    out = []
    for p in (1, 2, 3):
        for ns in _compositions(p, 6 - (p - 1)):
            out.append((p, ns))
    return out


def _compositions(p: int, limit: int) -> list:
    """Level tuples of length p with entries >= 1 and sum <= limit."""
    if p == 0:
        return [()]
    out = []
    for first in range(1, limit - (p - 1) + 1):
        for rest in _compositions(p - 1, limit - first):
            out.append((first,) + rest)
    return out


def _verify(config: RunConfig, _data) -> bytes:
    results = verification_results(config.seed)
    failed = sum(1 for _, ok, _ in results if not ok)
    if config.fmt == "json":
        body = _dump({
            "seed": config.seed,
            "passed": len(results) - failed,
            "failed": failed,
            "tests": [{"name": n, "ok": ok, "detail": d} for n, ok, d in results],
        })
    else:
        lines = [f"1..{len(results)}"]
        for idx, (name, ok, detail) in enumerate(results, 1):
            lines.append(f"{'ok' if ok else 'not ok'} {idx} - {name} # {detail}")
        body = ("\n".join(lines) + "\n").encode("utf-8")
    if failed:
        raise _VerifyFailed(body)
    return body


class _VerifyFailed(Exception):
    def __init__(self, body: bytes):
        super().__init__("verification failed")
        self.body = body


_HANDLERS = {
    "ring": _ring,
    "module": _module,
    "contact": _contact,
    "lift": _lift,
    "verify": _verify,
    "formula": _formula,
}


def run(config: RunConfig, data: bytes = b"") -> tuple:
    """Execute one subcommand; returns (exit status, output bytes)."""
    try:
        if config.subcommand not in _HANDLERS:
            raise InputError(f"unknown subcommand {config.subcommand!r}")
        if config.fmt not in ("json", "text", "latex"):
            raise InputError(f"unknown format {config.fmt!r}")
        if config.fmt == "latex" and config.subcommand != "formula":
            raise InputError("LaTeX output is only available from 'formula'")
        if config.max_level is not None and config.max_level < 1:
            raise InputError("--max-level must be positive")
        return EXIT_OK, _HANDLERS[config.subcommand](config, data)
    except _VerifyFailed as exc:
        return EXIT_INVARIANT, exc.body
    except _JsonError as exc:
        return EXIT_INPUT, _diagnostic("input", f"malformed JSON: {exc}",
                                       line=exc.line, column=exc.column)
    except InputError as exc:
        return EXIT_INPUT, _diagnostic("input", str(exc))
    except InvariantError as exc:
        return EXIT_INVARIANT, _diagnostic("invariant", str(exc))
    except PrecisionError as exc:
        return EXIT_PRECISION, _diagnostic("precision", str(exc), required=exc.required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semple-contact",
        description="Contact calculus on the Semple tower of the plane.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", dest="input_path", metavar="PATH",
                        help="read input from PATH instead of standard input")
    common.add_argument("--format", dest="output_format", choices=("json", "text", "latex"))
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"seed for randomized checks (default {DEFAULT_SEED})")
    common.add_argument("--max-level", dest="max_level", type=int,
                        help=f"highest tower level for lift (default {DEFAULT_MAX_LEVEL})")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("ring", parents=[common], help="pairing matrix and ring relations of F(N)") \
        .add_argument("level", type=int, metavar="N")
    sub.add_parser("module", parents=[common], help="N-th contact module of a curve") \
        .add_argument("level", type=int, metavar="N")
    sub.add_parser("contact", parents=[common], help="proto-contact number")
    sub.add_parser("lift", parents=[common], help="cusp numbers of parametrized branches")
    sub.add_parser("verify", parents=[common], help="operator identities and matrix ranks")
    sub.add_parser("formula", parents=[common], help="symbolic contact formula")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(
        subcommand=args.subcommand,
        level=getattr(args, "level", None),
        input_path=args.input_path,
        output_format=args.output_format,
        seed=args.seed,
        max_level=args.max_level,
    )
    data = b""
    if config.subcommand in NEEDS_INPUT:
        try:
            if config.input_path:
                with open(config.input_path, "rb") as fh:
                    data = fh.read()
            else:
                data = sys.stdin.buffer.read()
        except OSError as exc:
            sys.stdout.buffer.write(_diagnostic("input", f"cannot read input: {exc.strerror}"))
            return EXIT_INPUT
    status, out = run(config, data)
    try:
        sys.stdout.buffer.write(out)
        sys.stdout.flush()
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return status


if __name__ == "__main__":
    sys.exit(main())
