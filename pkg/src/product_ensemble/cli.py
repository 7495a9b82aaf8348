"""Command-line front end: every subcommand writes one CSV or JSON table."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import pydantic

from . import __version__
from .errors import ProductEnsembleError, ValidationError
from .runs import OPERATIONS, Table
from .schemas import Grid

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def fmt(v) -> str:
    """17 significant digits for floats, so values round-trip exactly."""
    if isinstance(v, bool) or not isinstance(v, float):
        return str(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _json_value(v) -> str:
    if isinstance(v, float):
        s = fmt(v)
        return {"nan": "NaN", "inf": "Infinity", "-inf": "-Infinity"}.get(s, s)
    return json.dumps(v)


def render(table: Table, fmt_name: str, header: str) -> str:
    lines = [header]
    if fmt_name == "csv":
        lines.append(",".join(table.columns))
        lines.extend(",".join(fmt(v) for v in row) for row in table.rows)
        return "\n".join(lines) + "\n"
    recs = ["{" + ", ".join(f"{json.dumps(k)}: {_json_value(v)}" for k, v in zip(table.columns, row)) + "}"
            for row in table.rows]
    lines.append("[" + ",\n ".join(recs) + "]")
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_table(path: str):
    """Parse a file written by this CLI; returns (header comment, records)."""
    with open(path) as fh:
        head = fh.readline().rstrip("\n")
        body = fh.read()
    if body.lstrip().startswith("["):
        return head, json.loads(body)
    lines = body.splitlines()
    cols = lines[0].split(",")
    return head, [dict(zip(cols, ln.split(","))) for ln in lines[1:]]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip() != ""]


def _grid(text):
    try:
        return Grid.parse(text)
    except (ValueError, pydantic.ValidationError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="product-ensemble",
                                description="Squared singular values of products of random matrices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--model", default="ginibre", help="ginibre, inverses or truncated")
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--M", type=int, default=1)
    g.add_argument("--K", type=int, default=0)
    g.add_argument("--nu", type=_int_list, default=[])
    g.add_argument("--nutilde", type=_int_list, default=[])
    g.add_argument("--kappa", type=int, default=0)
    o = common.add_argument_group("output")
    o.add_argument("--format", choices=("csv", "json"), default=None,
                   help="csv (json for oracle)")
    o.add_argument("--out", default=None, help="output path (standard output if omitted)")

    numeric = argparse.ArgumentParser(add_help=False)
    q = numeric.add_argument_group("quadrature")
    q.add_argument("--panels", type=float, default=None, help="panel density multiplier")
    q.add_argument("--order", type=int, default=None, help="base Gauss-Legendre order")
    q.add_argument("--tol", type=float, default=None, help="relative error target")

    d = sub.add_parser("density", parents=[common], help="limiting density table")
    d.add_argument("--grid", type=int, default=200)

    k = sub.add_parser("kernel", parents=[common, numeric], help="finite-n kernel on a grid")
    k.add_argument("--x-grid", type=_grid, default=None)
    k.add_argument("--y-grid", type=_grid, default=None)
    k.add_argument("--placement", default="auto")

    b = sub.add_parser("bulk", parents=[common, numeric], help="rescaled kernel against the sine kernel")
    loc = b.add_mutually_exclusive_group(required=True)
    loc.add_argument("--x0", type=float)
    loc.add_argument("--phi", type=float)
    b.add_argument("--xi-grid", type=_grid, default=None)
    b.add_argument("--eta-grid", type=_grid, default=None)

    e = sub.add_parser("edge", parents=[common, numeric], help="rescaled kernel against the Airy kernel")
    e.add_argument("--xi-grid", type=_grid, default=None)
    e.add_argument("--eta-grid", type=_grid, default=None)

    s = sub.add_parser("sample", parents=[common], help="Monte Carlo spectrum")
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--bins", type=int, default=80)
    s.add_argument("--output", choices=("histogram", "values", "edge"), default="histogram")

    sub.add_parser("oracle", parents=[common], help="contour engine against the moment oracle")

    c = sub.add_parser("contours", parents=[common], help="export integration contours")
    c.add_argument("--placement", choices=("direct", "switched", "bulk", "edge"), default="direct")
    loc = c.add_mutually_exclusive_group()
    loc.add_argument("--x0", type=float)
    loc.add_argument("--phi", type=float)
    c.add_argument("--samples", type=int, default=200)
    return p


_NOT_FIELDS = {"subcommand", "format", "out"}
_DEFAULT_N = {"density": 1, "kernel": 4, "bulk": 100, "edge": 100, "sample": 200, "oracle": 3,
              "contours": 8}


def to_request(args: argparse.Namespace):
    model, _ = OPERATIONS[args.subcommand]
    fields = {k: v for k, v in vars(args).items() if k not in _NOT_FIELDS and v is not None}
    fields.setdefault("n", _DEFAULT_N[args.subcommand])
    return model(**fields)


_GRID_FLAGS = ("--x-grid", "--y-grid", "--xi-grid", "--eta-grid")


def _join_grids(argv):
    """Glue grid values to their flag so argparse does not read '-2:2:9' as an option."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in _GRID_FLAGS:
            out.append(f"{tok}={next(it, '')}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_grids(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format is None:
        args.format = "json" if args.subcommand == "oracle" else "csv"
    try:
        req = to_request(args)
        _, op = OPERATIONS[args.subcommand]
        table = op(req)
    except (pydantic.ValidationError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ProductEnsembleError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    config = {"subcommand": args.subcommand, "format": args.format, **req.model_dump(mode="json")}
    header = f"# product_ensemble {__version__} " + json.dumps(config, sort_keys=True)
    text = render(table, args.format, header)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    for k, v in table.summary.items():
        print(f"{k}: {fmt(v)}", file=sys.stderr)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
