"""Command-line front end.

    entanglemeter compute --state ghz:3 --measure q-gme --q 2
    entanglemeter bounds  --state w-noise:3:a=0.8 --q 3
    entanglemeter detect  --state ghz-noise:4:t=0.5 --k 2
    entanglemeter scan    --state ghz-noise:4 --k 2,3,4 --grid t=0:1:0.01
    entanglemeter compare --grid theta=0:3.141592653589793:721 --q 3
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import bounds as B
from . import compare as CMP
from . import detection as DET
from .measures import ALPHA, Q, MeasureSpec, alpha_gme_pure, k_me_pure, q_gme_pure, result_record, roof_estimate
from .partitions import parse_partition
from .qstate import DensityMatrix, PureState, StateFormatError, as_pure, load_state, state_factory, to_density

BOUND_COLUMNS = ("name", "value", "certified", "params")


class CLIError(Exception):
    pass


# -- parsing helpers ------------------------------------------------------------


def parse_state_spec(text: str) -> tuple[str, int | None, dict]:
    """``name:n[:key=val,...]`` -> (family, n, params). ``file:path`` -> ("file", None, {"path": ...})."""
    if text.startswith("file:"):
        return "file", None, {"path": text[5:]}
    parts = text.split(":", 2)
    if len(parts) < 2:
        raise CLIError(f"state spec {text!r} must look like name:n[:key=val,...]")
    name, n_text = parts[0], parts[1]
    try:
        n = int(n_text)
    except ValueError:
        raise CLIError(f"state spec {text!r}: n must be an integer") from None
    params = {}
    if len(parts) == 3 and parts[2]:
        for item in parts[2].split(","):
            key, sep, val = item.partition("=")
            if not sep:
                raise CLIError(f"state spec {text!r}: expected key=value, got {item!r}")
            try:
                params[key.strip()] = float(val)
            except ValueError:
                raise CLIError(f"state spec {text!r}: {key}={val!r} is not a number") from None
    return name, n, params


def load_state_spec(text: str) -> PureState | DensityMatrix:
    name, n, params = parse_state_spec(text)
    if name == "file":
        return load_state(params["path"])
    if name.replace("-", "_") == "ghz" and "d" in params:
        params["d"] = int(params["d"])
    return state_factory(name, n, **params)


def parse_grid(text: str) -> tuple[str, np.ndarray]:
    """``name=start:stop:step`` (inclusive of stop) or ``name=v1,v2,...``.

    A third field that is an integer with no decimal point and at least 2 is
    read as a point count rather than a step.
    """
    name, sep, body = text.partition("=")
    if not sep or not name:
        raise CLIError(f"grid {text!r} must look like name=start:stop:step")
    try:
        if ":" in body:
            fields = body.split(":")
            if len(fields) != 3:
                raise ValueError
            start, stop = float(fields[0]), float(fields[1])
            if fields[2].isdigit() and int(fields[2]) >= 2:
                count = int(fields[2])
            else:
                step = float(fields[2])
                if step <= 0:
                    raise ValueError
                count = int(math.floor((stop - start) / step + 1e-9)) + 1
                stop = start + (count - 1) * step
            values = np.linspace(start, stop, count) if count > 1 else np.array([start])
        else:
            values = np.array([float(v) for v in body.split(",")])
    except ValueError:
        raise CLIError(f"cannot parse grid {text!r}") from None
    if values.size == 0:
        raise CLIError(f"grid {text!r} is empty")
    return name.strip(), values


def parse_ks(text: str | None, n: int, default: Sequence[int]) -> list[int]:
    if text is None:
        return list(default)
    try:
        ks = [int(v) for v in text.split(",")]
    except ValueError:
        raise CLIError(f"--k expects integers, got {text!r}") from None
    for k in ks:
        if not 2 <= k <= n:
            raise CLIError(f"--k {k} outside 2..{n}")
    return ks


# -- output -----------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def emit(rows: Sequence[dict], fmt: str = "csv", path: str | None = None, columns: Sequence[str] | None = None) -> str:
    """Write rows as CSV (header, RFC 4180 quoting, 17 significant digits) or a JSON array.

    Returns the text written; ``path=None`` or ``"-"`` writes to stdout.
    """
    if fmt == "csv":
        cols = list(columns) if columns is not None else (list(rows[0]) if rows else [])
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(cols)
        for r in rows:
            if set(r) - set(cols):
                raise ValueError(f"row has columns outside the schema: {sorted(set(r) - set(cols))}")
            writer.writerow([_fmt(r.get(c)) for c in cols])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps([_jsonable(r) for r in rows], indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(path).write_text(text, newline="")
        except OSError as exc:
            raise CLIError(f"cannot write {path}: {exc}") from exc
    return text


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


# -- commands ---------------------------------------------------------------------

MEASURES = ("q-k-me", "alpha-k-me", "q-gme", "alpha-gme")


def _measure_spec(args, n: int) -> MeasureSpec:
    family = Q if args.measure.startswith("q") else ALPHA
    param = args.q if family == Q else args.alpha
    k = 2 if args.measure.endswith("gme") or not args.k else int(args.k)
    return MeasureSpec(family, param, k)


def cmd_compute(args) -> list[dict]:
    state = load_state_spec(args.state)
    spec = _measure_spec(args, state.n)
    spec.check_n(state.n)
    psi = state if isinstance(state, PureState) else as_pure(state)
    if psi is not None:
        if args.measure == "q-gme":
            value, part = q_gme_pure(psi, spec.param)
        elif args.measure == "alpha-gme":
            value, part = alpha_gme_pure(psi, spec.param)
        else:
            value, part = k_me_pure(psi, spec)
        rec = result_record(spec, value, part, True)
    else:
        est = roof_estimate(state, spec, restarts=args.restarts, seed=args.seed)
        rec = result_record(spec, est.value, None, False)
        rec["estimate"] = "convex-roof upper bound"
    if args.measure.endswith("gme"):
        rec["measure"] = "q-GME" if spec.family == Q else "alpha-GME"
    return [rec]


def cmd_bounds(args) -> list[dict]:
    state = load_state_spec(args.state)
    rho = to_density(state) if isinstance(state, PureState) else state
    if args.bound:
        specs = []
        for name in args.bound.split(","):
            params = {"alpha": args.alpha} if name == "alpha-n" else {"q": args.q}
            if name in ("q-bipartite", "wei-bipartite"):
                params["bipart"] = parse_partition(args.cut) if args.cut else None
                if params["bipart"] is None:
                    raise CLIError(f"bound {name} needs --cut, e.g. --cut 1|2,3")
            specs.append((name, params))
    else:
        specs = B.default_bound_specs(rho, q=args.q, alpha=args.alpha)
    verdict = B.entanglement_verdict(rho, specs)
    rows = [r.to_row() for r in verdict.reports]
    if args.format == "json":
        return [{"verdict": verdict.label, "witness": verdict.witness.name if verdict.witness else None,
                 "bounds": [r.to_json() for r in verdict.reports]}]
    return rows


def cmd_detect(args) -> list[dict]:
    state = load_state_spec(args.state)
    rho = to_density(state) if isinstance(state, PureState) else state
    ks = parse_ks(args.k, rho.n, range(2, rho.n + 1))
    terms = DET.criterion_terms(rho)
    rows = []
    for k in ks:
        v = DET.verdict(rho, k)
        rec = {"n": rho.n, "k": k, "A": terms.A, "B": terms.B, "C": terms.C, "D": terms.D, "E": terms.E}
        rec.update(ghz_violated=v.ghz_test_violated, w_violated=v.w_test_violated,
                   k_eff1=v.k_eff1, k_eff2=v.k_eff2, k_nonseparable=v.k_nonseparable)
        rows.append(rec)
    return rows


def cmd_scan(args) -> list[dict]:
    family, n, fixed = parse_state_spec(args.state)
    if family == "file":
        raise CLIError("scan needs a state family, not a file")
    if not args.grid:
        raise CLIError("scan needs at least one --grid")
    grid = dict(parse_grid(g) for g in args.grid)
    ks = parse_ks(args.k, n, [2])
    if fixed:
        raise CLIError("scan takes parameters from --grid only")
    return DET.detection_scan(family, n, ks, grid)


def cmd_compare(args) -> list[dict]:
    if args.grid:
        name, thetas = parse_grid(args.grid[0])
        if name != "theta":
            raise CLIError("compare takes a theta grid")
    else:
        thetas = CMP.default_theta_grid()
    return [r.as_dict() for r in CMP.example4_table(thetas, args.q)]


COMMANDS = {
    "compute": (cmd_compute, None),
    "bounds": (cmd_bounds, BOUND_COLUMNS),
    "detect": (cmd_detect, None),
    "scan": (cmd_scan, DET.SCAN_COLUMNS),
    "compare": (cmd_compare, CMP.COMPARE_COLUMNS),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entanglemeter", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="csv"):
        p.add_argument("--format", choices=("csv", "json"), default=fmt)
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("compute", help="evaluate a k-ME / GME concurrence")
    p.add_argument("--state", required=True)
    p.add_argument("--measure", choices=MEASURES, default="q-gme")
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--k", default=None)
    p.add_argument("--restarts", type=int, default=16)
    common(p, "json")

    p = sub.add_parser("bounds", help="certified negativity / realignment lower bounds")
    p.add_argument("--state", required=True)
    p.add_argument("--bound", default=None, help="comma list of " + ", ".join(B.BOUNDS))
    p.add_argument("--cut", default=None, help="bipartition for bipartite bounds, e.g. 1|2,3")
    p.add_argument("--q", type=float, default=3.0)
    p.add_argument("--alpha", type=float, default=0.5)
    common(p)

    p = sub.add_parser("detect", help="GHZ / W separability tests and k_eff")
    p.add_argument("--state", required=True)
    p.add_argument("--k", default=None, help="comma list (default: 2..n)")
    common(p, "json")

    p = sub.add_parser("scan", help="detection scan over a parameter grid")
    p.add_argument("--state", required=True, help="family:n, e.g. ghz-noise:4")
    p.add_argument("--k", default=None)
    p.add_argument("--grid", action="append", help="name=start:stop:step (repeatable)")
    common(p)

    p = sub.add_parser("compare", help="q-GME vs GqC vs concurrence fill on phi_theta")
    p.add_argument("--grid", action="append", help="theta=start:stop:step")
    p.add_argument("--q", type=float, default=3.0)
    common(p)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fn, columns = COMMANDS[args.command]
    try:
        rows = fn(args)
        emit(rows, args.format, args.out, columns if args.format == "csv" else None)
    except (CLIError, StateFormatError, ValueError, FileNotFoundError) as exc:
        print(f"entanglemeter {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
