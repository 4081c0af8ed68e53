"""Command-line front end: ``finegrad <command> [options]``.

Exit codes: 0 success, 1 verification mismatch, 2 usage error, 3 missing data.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources

from . import __version__, asymptotics, census, symplectic
from .orbits import (
    CycleIndexFormatError,
    CycleIndexUnavailable,
    OrbitCounter,
    export_cycle_index,
    import_cycle_index,
)

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_MISSING = 0, 1, 2, 3
ROW_FIELDS = ["series", "index", "type_i", "type_ii", "total", "provenance"]
SCOPES = ("matrix", "orbits", "seriesA", "seriesC", "seriesD", "constants", "all")
CONSTANT_PRIMES = (2, 3, 5, 7, 11, 13)


class UsageError(Exception):
    pass


def load_golden() -> dict:
    text = resources.files("finegrad").joinpath("data/golden.json").read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# rendering


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


def render(fmt: str, fields: list[str], rows: list[dict], meta: dict) -> str:
    if fmt == "json":
        return json.dumps({"meta": meta, "rows": rows}, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_cell(row.get(f)) for f in fields])
        return buf.getvalue()
    table = [fields] + [[_cell(row.get(f)) for f in fields] for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(fields))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() for r in table]
    return "\n".join(lines) + "\n"


def _meta(args, counter: OrbitCounter | None) -> dict:
    return {
        "tool": "finegrad",
        "version": __version__,
        "char": getattr(args, "char", 0),
        "imports": list(counter.manifest) if counter is not None else [],
    }


def _counter(args) -> OrbitCounter:
    counter = OrbitCounter()
    for path in args.imports or []:
        try:
            counter.load(path)
        except (OSError, CycleIndexFormatError, ValueError) as exc:
            raise UsageError(f"cannot import {path}: {exc}") from exc
    return counter


def _check_series_char(series: str, char: int) -> None:
    if char and series not in ("M", "A"):
        raise UsageError(f"--char is accepted for series M and A only, not {series}")
    census.check_char(char, lie=series != "M")


# ---------------------------------------------------------------------------
# commands


def cmd_count(args) -> tuple[int, str]:
    index = args.n if args.series == "M" else args.rank
    if index is None:
        raise UsageError("--n is required for series M" if args.series == "M" else "--rank is required")
    _check_series_char(args.series, args.char)
    counter = _counter(args)
    row = census.count_row(args.series, index, args.char, counter, strict=True)
    return EXIT_OK, render(args.format, ROW_FIELDS, [row.as_dict()], _meta(args, counter))


def cmd_table(args) -> tuple[int, str]:
    _check_series_char(args.series, args.char)
    start = census.FIRST_INDEX[args.series]
    if args.max < start:
        raise UsageError(f"--max must be >= {start} for series {args.series}")
    counter = _counter(args)
    if args.series == "M":
        values = census.matrix_counts(args.max, args.char)
        rows = [census.GradingCountRow("M", n, int(values[n])).as_dict() for n in range(1, args.max + 1)]
    else:
        rows = [census.count_row(args.series, r, args.char, counter, strict=False).as_dict()
                for r in range(start, args.max + 1)]
    return EXIT_OK, render(args.format, ROW_FIELDS, rows, _meta(args, counter))


def cmd_orbits(args) -> tuple[int, str]:
    if args.m < 0 or args.qmax < 0:
        raise UsageError("--m and --qmax must be nonnegative")
    counter = _counter(args)
    rows = [{"m": args.m, "action": args.action, "q": q, "value": counter.count(args.m, args.action, q)}
            for q in range(1, args.qmax + 1)]
    return EXIT_OK, render(args.format, ["m", "action", "q", "value"], rows, _meta(args, counter))


def constant_values() -> dict[str, float]:
    c = asymptotics.solve_constants()
    out = {k: getattr(c, k) for k in ("z0", "x0", "y0", "b0", "x1", "b1", "a0")}
    for p in CONSTANT_PRIMES:
        out[f"poch{p}"] = asymptotics.pochhammer_factor(p)
        out[f"a{p}"] = c.a_c(p)
    return out


def cmd_constants(args) -> tuple[int, str]:
    rows = [{"name": k, "value": float(f"{v:.6f}")} for k, v in constant_values().items()]
    if args.format != "json":
        rows = [{"name": r["name"], "value": f"{r['value']:.6f}"} for r in rows]
    return EXIT_OK, render(args.format, ["name", "value"], rows, _meta(args, None))


def _verify_cells(scope: str, counter: OrbitCounter, golden: dict):
    """Yield ``(status, cite, expected, got)`` with status in pass/fail/skip."""
    if scope == "matrix":
        values = census.matrix_counts(max(c["n"] for c in golden["matrix"]))
        for c in golden["matrix"]:
            got = int(values[c["n"]])
            yield ("pass" if got == c["value"] else "fail"), c["cite"], c["value"], got
    elif scope == "orbits":
        for c in golden["orbits"]:
            if not counter.available(c["m"], c["action"]):
                yield "skip", c["cite"], c["value"], None
                continue
            got = counter.count(c["m"], c["action"], c["q"])
            yield ("pass" if got == c["value"] else "fail"), c["cite"], c["value"], got
    elif scope in ("seriesA", "seriesC", "seriesD"):
        series = scope[-1]
        for c in golden[scope]:
            row = census.count_row(series, c["r"], 0, counter, strict=False)
            if row.total is None:
                yield "skip", c["cite"], c["total"], None
                continue
            keys = ("type_i", "type_ii", "total") if series == "A" else ("total",)
            want = tuple(c[k] for k in keys)
            got = tuple(getattr(row, k) for k in keys)
            ok = got == want
            yield ("pass" if ok else "fail"), c["cite"], _flat(want), _flat(got)
    elif scope == "constants":
        values = constant_values()
        for c in golden["constants"]:
            got = round(values[c["name"]], c["decimals"])
            ok = math.isclose(got, c["value"], abs_tol=0.5 * 10 ** -(c["decimals"] + 2))
            yield ("pass" if ok else "fail"), f"{c['name']}: {c['cite']}", c["value"], got


def _flat(t: tuple):
    return t[0] if len(t) == 1 else "/".join(str(x) for x in t)


def cmd_verify(args) -> tuple[int, str]:
    counter = _counter(args)
    golden = load_golden()
    scopes = SCOPES[:-1] if args.scope == "all" else (args.scope,)
    lines = []
    tally = {"pass": 0, "fail": 0, "skip": 0}
    for scope in scopes:
        for status, cite, want, got in _verify_cells(scope, counter, golden):
            tally[status] += 1
            if status == "pass":
                lines.append(f"PASS  {scope}  {cite}: {got}")
            elif status == "fail":
                lines.append(f"FAIL  {scope}  {cite}: expected {want}, got {got}")
            else:
                lines.append(f"SKIP  {scope}  {cite}: skipped (needs import)")
    checked = tally["pass"] + tally["fail"]
    lines.append(f"{tally['pass']}/{checked} cells pass, {tally['skip']} skipped")
    return (EXIT_MISMATCH if tally["fail"] else EXIT_OK), "\n".join(lines) + "\n"


def cmd_cycle_index(args) -> tuple[int, str]:
    if args.cmd_ci == "export":
        counter = OrbitCounter()
        cidx = counter.cycle_index(args.m, args.action)
        if args.out == "-":
            buf = io.StringIO()
            export_cycle_index(cidx, buf)
            return EXIT_OK, buf.getvalue()
        export_cycle_index(cidx, args.out)
        return EXIT_OK, f"wrote {args.out}: m={cidx.m} action={cidx.action} types={len(cidx.entries)}\n"
    try:
        cidx = import_cycle_index(args.path)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    except CycleIndexFormatError as exc:
        return EXIT_MISMATCH, f"invalid: {exc}\n"
    except ValueError as exc:
        return EXIT_MISMATCH, f"invalid: {exc}\n"
    return EXIT_OK, f"ok: m={cidx.m} action={cidx.action} order={cidx.order} types={len(cidx.entries)}\n"


def cmd_envelope(args) -> tuple[int, str]:
    if not (args.tmin > 1 and args.tmax > args.tmin and args.samples >= 2):
        raise UsageError("need 1 < --tmin < --tmax and --samples >= 2")
    lo = max(args.tmin, asymptotics.operational_threshold())
    step = (math.log(args.tmax) - math.log(lo)) / (args.samples - 1)
    rows = []
    for i in range(args.samples):
        e = asymptotics.envelope_sample(math.exp(math.log(lo) + i * step))
        rows.append({"t": repr(e.t), "b": repr(e.b_val), "b_plus": repr(e.b_plus),
                     "b_minus": repr(e.b_minus), "b1_corr": repr(e.b1_corr),
                     "branch": e.branch, "near_switch": e.near_switch})
    fields = ["t", "b", "b_plus", "b_minus", "b1_corr", "branch", "near_switch"]
    return EXIT_OK, render(args.format, fields, rows, _meta(args, None))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json", "plain"), default="plain")
    common.add_argument("--import", dest="imports", action="append", default=[], metavar="PATH",
                        help="cycle-index v1 file (repeatable)")
    common.add_argument("--char", type=int, default=0, help="field characteristic, 0 or a prime")

    p = argparse.ArgumentParser(prog="finegrad", description="Fine grading counts and asymptotics.")
    p.add_argument("--version", action="version", version=f"finegrad {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", parents=[common], help="one row of a grading table")
    c.add_argument("--series", choices=census.SERIES, required=True)
    c.add_argument("--n", type=int)
    c.add_argument("--rank", type=int)
    c.set_defaults(func=cmd_count)

    t = sub.add_parser("table", parents=[common], help="all rows up to --max")
    t.add_argument("--series", choices=census.SERIES, required=True)
    t.add_argument("--max", type=int, required=True)
    t.set_defaults(func=cmd_table)

    o = sub.add_parser("orbits", parents=[common], help="orbit counts N(m, q), q = 1..qmax")
    o.add_argument("--m", type=int, required=True)
    o.add_argument("--action", choices=symplectic.ACTIONS, default="asp")
    o.add_argument("--qmax", type=int, default=12)
    o.set_defaults(func=cmd_orbits)

    k = sub.add_parser("constants", parents=[common], help="asymptotic constants")
    k.set_defaults(func=cmd_constants)

    v = sub.add_parser("verify", parents=[common], help="compare against stored table values")
    v.add_argument("--scope", choices=SCOPES, default="all")
    v.set_defaults(func=cmd_verify)

    ci = sub.add_parser("cycle-index", help="export or validate cycle-index v1 files")
    ci_sub = ci.add_subparsers(dest="cmd_ci", required=True)
    ex = ci_sub.add_parser("export")
    ex.add_argument("--m", type=int, required=True)
    ex.add_argument("--action", choices=symplectic.ACTIONS, required=True)
    ex.add_argument("--out", default="-")
    ck = ci_sub.add_parser("check")
    ck.add_argument("path")
    ci.set_defaults(func=cmd_cycle_index)

    e = sub.add_parser("envelope", parents=[common], help="sample b, b+, b- on a log grid")
    e.add_argument("--tmin", type=float, default=1e3)
    e.add_argument("--tmax", type=float, default=1e12)
    e.add_argument("--samples", type=int, default=100)
    e.set_defaults(func=cmd_envelope)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, out = args.func(args)
    except (UsageError, census.InvalidArguments) as exc:
        print(f"finegrad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CycleIndexUnavailable as exc:
        print(f"finegrad: {exc}", file=sys.stderr)
        return EXIT_MISSING
    sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
