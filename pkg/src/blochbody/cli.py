"""Command-line front end: ``blochbody <command> [options]``.

Exit codes: 0 success, 1 usage or validation error (one line on stderr),
2 an audit found violations.  Floats are written with 17 significant digits
so every number round-trips exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from typing import Sequence

import numpy as np

from . import bounds, ensembles, families
from .bloch import (
    BlochDecomposition,
    ModelPoint,
    bloch_length,
    decompose,
    marginal_bloch_lengths,
    model_point,
    reconstruct,
)
from .entanglement import entanglement_report
from .matcore import ConsistencyError, DensityMatrix, UnsupportedConfigurationError, ValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(message)


# --- formatting --------------------------------------------------------------

def fmt_float(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _json(obj, indent: int = 0) -> str:
    """Deterministic JSON with 17-digit floats; non-finite floats become null."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return _json(obj) + "\n"


def write_output(text: str, out: str | None) -> None:
    """Write to stdout, or atomically to ``out`` via a temp file and rename."""
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(out))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- state JSON --------------------------------------------------------------

def state_to_json(rho: DensityMatrix) -> dict:
    m = rho.matrix.ravel()
    return {"dims": list(rho.dims), "matrix": [[float(z.real), float(z.imag)] for z in m]}


def state_from_json(obj) -> DensityMatrix:
    """Parse ``{"dims": [...], "matrix": [[re, im], ...]}`` (row-major)."""
    if not isinstance(obj, dict) or "dims" not in obj or "matrix" not in obj:
        raise ValidationError("state keys", detail="expected an object with dims and matrix")
    dims = obj["dims"]
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d >= 1 for d in dims):
        raise ValidationError("dims", detail="expected a nonempty list of positive integers")
    total = int(np.prod(dims))
    entries = obj["matrix"]
    if not isinstance(entries, list) or len(entries) != total * total:
        got = len(entries) if isinstance(entries, list) else "non-list"
        raise ValidationError("entry count", detail=f"expected {total * total} [re, im] pairs, got {got}")
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError("entry format", detail="entries must be numeric [re, im] pairs") from exc
    if arr.shape != (total * total, 2):
        raise ValidationError("entry format", detail="entries must be [re, im] pairs")
    m = (arr[:, 0] + 1j * arr[:, 1]).reshape(total, total)
    return DensityMatrix(tuple(dims), m)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError("JSON syntax", detail=f"{path}: {exc.msg} at line {exc.lineno}") from exc


def _floats(text: str, n: int | None, what: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"{what} must be comma-separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise UsageError(f"{what} needs {n} values, got {len(vals)}")
    return vals


def _dims(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError as exc:
        raise UsageError(f"dims must be comma-separated integers, got {text!r}") from exc


# --- commands ----------------------------------------------------------------

def _lengths_json(rho: DensityMatrix) -> dict:
    out: dict = {"global": bloch_length(rho)}
    try:
        out["marginals"] = list(marginal_bloch_lengths(rho))
    except UnsupportedConfigurationError:
        out["marginals"] = None
    return out


def cmd_decompose(args) -> int:
    if (args.state is None) == (args.decomposition is None):
        raise UsageError("give exactly one of --state or --decomposition")
    if args.decomposition is not None:
        dec = BlochDecomposition.from_json(_load_json(args.decomposition))
        write_output(dumps(state_to_json(reconstruct(dec))), args.out)
        return EXIT_OK
    rho = state_from_json(_load_json(args.state))
    out: dict = {"dims": list(rho.dims)}
    if tuple(rho.dims) == (2, 2):
        out["decomposition"] = decompose(rho).to_json()
        out["model_point"] = list(model_point(rho).as_tuple())
    out["bloch_lengths"] = _lengths_json(rho)
    write_output(dumps(out), args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    if (args.point is None) == (args.state is None):
        raise UsageError("give exactly one of --point or --state")
    if args.point is not None:
        try:
            p = ModelPoint(*_floats(args.point, 3, "--point"))
        except ValueError as exc:
            if isinstance(exc, UsageError):
                raise
            raise ValidationError("model point", detail=str(exc)) from exc
        out = {"point": list(p.as_tuple()), "verdict": bounds.classify_point(p).to_json(),
               "chsh_violation_possible": bounds.chsh_violation_possible(p)}
        write_output(dumps(out), args.out)
        return EXIT_OK
    rho = state_from_json(_load_json(args.state))
    if tuple(rho.dims) != (2, 2):
        raise UnsupportedConfigurationError(f"classify needs a two-qubit state, got dims {list(rho.dims)}")
    p = model_point(rho)
    out = {
        "point": list(p.as_tuple()),
        "verdict": bounds.classify_point(p).to_json(),
        "chsh_violation_possible": bounds.chsh_violation_possible(p),
        "entanglement": entanglement_report(rho).to_json(),
    }
    write_output(dumps(out), args.out)
    return EXIT_OK


def _spec_from_args(args) -> ensembles.EnsembleSpec:
    return ensembles.EnsembleSpec(kind=args.kind, count=args.n, dims=_dims(args.dims), seed=args.seed,
                                  rank=args.rank, family=args.family)


def _csv_field(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else fmt_float(v)
    return str(v)


def cmd_sample(args) -> int:
    spec = _spec_from_args(args)
    lines = [ensembles.SampleRecord.CSV_HEADER]
    for rec in ensembles.point_cloud(spec):
        p1, p2 = rec.params if rec.params is not None else (None, None)
        row = [*rec.point, rec.purity, rec.concurrence, rec.pt_min_eig,
               rec.verdict.kind.value, rec.family, p1, p2, rec.seed_offset]
        lines.append(",".join(_csv_field(v) for v in row))
    write_output("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    spec = _spec_from_args(args)
    checks = "all" if args.checks == "all" else [c.strip() for c in args.checks.split(",") if c.strip()]
    report = ensembles.audit(spec, checks)
    write_output(dumps(report.to_json()), args.out)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def parse_params(text: str | None) -> dict[str, float]:
    out: dict[str, float] = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"parameter {item!r} is not of the form name=value")
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise UsageError(f"parameter {key.strip()} has non-numeric value {val!r}") from exc
    return out


def cmd_family(args) -> int:
    spec = families.FamilySpec(args.name, parse_params(args.params))
    rho = families.build(spec)
    if args.emit == "state":
        write_output(dumps(state_to_json(rho)), args.out)
    elif tuple(rho.dims) == (2, 2):
        write_output(",".join(fmt_float(v) for v in model_point(rho).as_tuple()) + "\n", args.out)
    else:
        # no model point for three parties; emit the local Bloch lengths instead
        write_output(",".join(fmt_float(v) for v in marginal_bloch_lengths(rho)) + "\n", args.out)
    return EXIT_OK


def cmd_surface(args) -> int:
    if args.kind == "mesh":
        if args.grid < 2:
            raise UsageError("--grid must be >= 2")
        rows = bounds.surface_mesh(args.grid)
        header = "x,y,z_lower,z_upper"
    else:
        if args.grid < 2:
            raise UsageError("--grid must be >= 2")
        rows = bounds.purity_curves(args.grid, args.d)
        header = "delta,purity_bound,triangle_bound"
    lines = [header] + [",".join(fmt_float(v) for v in row) for row in rows]
    write_output("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blochbody", description="Bloch-geometry toolkit for two-qubit states.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("decompose", help="Pauli decomposition, model point and Bloch lengths")
    p.add_argument("--state", help="state JSON file")
    p.add_argument("--decomposition", help="decomposition JSON file to turn back into a state")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("classify", help="region verdict for a model point or a state")
    p.add_argument("--point", help="x,y,z")
    p.add_argument("--state", help="state JSON file")
    p.set_defaults(func=cmd_classify)

    for name, func, helptext in (("sample", cmd_sample, "point-cloud CSV of an ensemble"),
                                 ("verify", cmd_verify, "Monte Carlo audit report")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--kind", required=True, choices=ensembles.KINDS)
        p.add_argument("--n", type=int, required=True,
                       help="sample count (points per axis for family-grid)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--dims", default="2,2")
        p.add_argument("--rank", type=int)
        p.add_argument("--family", choices=ensembles.GRID_FAMILIES)
        if name == "verify":
            p.add_argument("--checks", default="all", help="'all' or a comma-separated list")
        p.set_defaults(func=func)

    p = sub.add_parser("family", help="build a named state family member")
    p.add_argument("--name", required=True, choices=sorted(families.FAMILIES))
    p.add_argument("--params", default="", help="name=value,...")
    p.add_argument("--emit", choices=("state", "point"), default="state")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("surface", help="model surface mesh or purity-bound curves as CSV")
    p.add_argument("--grid", type=int, default=200)
    p.add_argument("--kind", choices=("mesh", "purity-curve"), default="mesh")
    p.add_argument("--d", type=int, default=2, help="local dimension for purity-curve")
    p.set_defaults(func=cmd_surface)

    for sp in sub.choices.values():
        sp.add_argument("--out", help="output file (default: stdout)")
    return parser


def _one_line(msg: str) -> str:
    return " ".join(str(msg).split())


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: usage: {_one_line(exc)}\n")
    except ValidationError as exc:
        sys.stderr.write(f"error: invalid input: {_one_line(exc)}\n")
    except (ValueError, TypeError, UnsupportedConfigurationError, ConsistencyError,
            families.ExtremalSearchError) as exc:
        sys.stderr.write(f"error: {_one_line(exc)}\n")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
