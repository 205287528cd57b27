"""Command-line front end: reproducible experiment runs with CSV outputs.

Subcommands
-----------
* ``epsilon-sweep``    exact pairwise-independence deficits over a grid
* ``bound-check``      randomized variance-vs-bound soundness suite
* ``oracle-verify``    bound-check with verbose per-instance output
* ``regress``          nested OLS fits of -log eps against class size
* ``landscape``        smoothed high-frequency objective C_h(omega)
* ``highfreq-bound``   bracket-based deficit bound across the spread R
* ``discrepancy``      exact star discrepancy of a point file

Conventions
-----------
* ``--seed``, ``--threads``, ``--out`` are universal; the environment
  variable GRADBOUND_THREADS supplies the default worker count.
* Integer ranges use ``start..end`` (inclusive); real grids use
  ``start:end:step``.  Malformed ranges are usage errors.
* ``--config FILE`` reads ``key=value`` lines (``#`` comments); command-line
  flags override the file; unknown keys are rejected by name.
* Every run writes ``<subcommand>_manifest.json`` echoing the resolved
  configuration and package version, next to the CSV artifacts.
* Identical config + seed give byte-identical CSVs for any thread count.
  Figures (PNG, disable with ``--no-plot``) are a convenience view and are
  exempt from that guarantee.

Exit codes: 0 success; 1 violations or per-cell failures; 2 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .gradvar import (
    LOSSES,
    ModelSpec,
    exact_gradient_variance,
    is_sound,
    tightness_witness,
    variance_bound,
)
from .highfreq import (
    PeriodicFn,
    empirical_star_discrepancy,
    epsilon_n1_bound,
    landscape_quadrature,
    landscape_series,
    suggest_series_order,
)
from .hypotheses import enumerate_secrets
from .measures import (
    FinitePmf,
    RestrictedInputSpec,
    SizeLimitError,
    restricted_uniform_inputs,
)
from .parallel import resolve_threads
from .sweep import (
    SweepCell,
    default_grid,
    fits_to_csv,
    regression_compare,
    run_sweep,
    scatter_to_csv,
    sweep_rows_from_csv,
    sweep_rows_to_csv,
)

BOUND_CSV_HEADER = [
    "instance_id",
    "q",
    "n",
    "a",
    "kind",
    "loss",
    "space",
    "variance",
    "bound",
    "eps_term",
    "gamma",
    "slack",
]

_PSI_BUILDERS = {
    "sawtooth": PeriodicFn.sawtooth,
    "square": PeriodicFn.square,
    "triangle": PeriodicFn.triangle,
}


# -- range and config parsing -------------------------------------------------


def parse_int_range(text: str) -> list[int]:
    """Comma-separated integers and/or `start..end` inclusive spans.

    `4..6` -> [4, 5, 6]; `3,5,7` -> [3, 5, 7]; `2,4..6` -> [2, 4, 5, 6].
    """
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo_s, hi_s = part.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            if lo > hi:
                raise ValueError(f"malformed range {part!r}: start exceeds end")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(part))
    return out


def parse_real_range(text: str) -> list[float]:
    """`start:end:step` (inclusive of end up to rounding) or a single real."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"malformed range {text!r}: expected start:end:step")
        lo, hi, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError(f"malformed range {text!r}: step must be positive")
        if lo > hi:
            raise ValueError(f"malformed range {text!r}: start exceeds end")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [lo + k * step for k in range(count)]
    return [float(text)]


def _inject_config(argv: list[str]) -> list[str]:
    """Expand --config FILE into flags placed before the explicit ones.

    The file holds `key=value` lines (# comments, blank lines allowed); keys
    name flags without the leading dashes.  Flags given on the command line
    come later and therefore win.  Unknown keys surface as argparse errors
    naming the offending flag.
    """
    path = None
    rest: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                print("error: --config needs a file path", file=sys.stderr)
                raise SystemExit(2)
            path = argv[i + 1]
            i += 2
            continue
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
            i += 1
            continue
        rest.append(tok)
        i += 1
    if path is None:
        return argv
    flags: list[str] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                print(f"error: malformed config line {line!r}", file=sys.stderr)
                raise SystemExit(2)
            key, value = (part.strip() for part in line.split("=", 1))
            if value.lower() in ("true", "yes", "on") and key in ("no-plot", "tight-witness"):
                flags.append(f"--{key}")
            else:
                flags.append(f"--{key}={value}")
    if not rest:
        return flags
    # keep the subcommand first, then config-derived flags, then CLI flags
    return rest[:1] + flags + rest[1:]


# -- shared plumbing ----------------------------------------------------------


def _resolved_threads(args) -> int:
    return resolve_threads(0 if args.threads is None else args.threads)


def _write_manifest(args, name: str, extra: Optional[dict] = None) -> None:
    config = {}
    for key, value in sorted(vars(args).items()):
        if key in ("handler", "verbose"):
            continue
        if isinstance(value, (list, tuple)):
            value = list(value)
        config[key] = value
    config["threads_resolved"] = _resolved_threads(args)
    payload = {
        "command": name,
        "version": __version__,
        "config": config,
    }
    if extra:
        payload.update(extra)
    path = os.path.join(args.out, f"{name.replace('-', '_')}_manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return repr(float(x))
    if isinstance(x, float):
        return repr(x)
    return str(x)


# -- epsilon-sweep ------------------------------------------------------------


def cmd_epsilon_sweep(args, parser) -> int:
    threads = _resolved_threads(args)
    try:
        if args.q is None and args.n is None and args.a is None and args.kind is None:
            cells = default_grid()
        else:
            for flag, val in (("--q", args.q), ("--n", args.n), ("--a", args.a)):
                if val is None:
                    parser.error(f"{flag} is required when any grid flag is given")
            qs = parse_int_range(args.q)
            ns = parse_int_range(args.n)
            aa = parse_int_range(args.a)
            kinds = (args.kind or "uniform,binary,ternary").split(",")
            ls = parse_int_range(args.l) if args.l is not None else None
            cells = []
            for q in qs:
                for n in ns:
                    for a in aa:
                        for kind in kinds:
                            if kind == "uniform":
                                cells.append(SweepCell(q, n, a, "uniform"))
                                continue
                            if kind == "ternary" and q == 2:
                                continue
                            if ls is None:
                                parser.error(f"--l is required for kind {kind}")
                            for l in ls:
                                cells.append(SweepCell(q, n, a, kind, l))
    except ValueError as exc:
        parser.error(str(exc))
    result = run_sweep(cells, space=args.space, max_work=int(args.max_work), threads=threads)
    csv_path = os.path.join(args.out, "epsilon_sweep.csv")
    sweep_rows_to_csv(result.rows, csv_path)
    _write_manifest(args, "epsilon-sweep", {"rows": len(result.rows), "failures": len(result.failures)})
    if not args.no_plot:
        from .plotting import save_sweep_plot

        save_sweep_plot(result.rows, os.path.join(args.out, "epsilon_sweep.png"))
    print(f"wrote {len(result.rows)} rows to {csv_path}")
    if result.failures:
        for failure in result.failures:
            print(f"cell failed: {failure.cell}: {failure.message}", file=sys.stderr)
        print(f"{len(result.failures)} cells failed", file=sys.stderr)
        return 1
    return 0


# -- bound-check / oracle-verify ----------------------------------------------


def _bound_instance_grid() -> list[dict]:
    grid = []
    for q in (2, 3, 5):
        for n in (1, 2, 3):
            for a in range(2, q + 1):
                for kind in ("uniform", "binary", "ternary"):
                    if kind == "ternary" and q == 2:
                        continue
                    l = None if kind == "uniform" else min(n, 2)
                    spaces = ("tv",) if q == 2 else ("tv", "pearson")
                    for loss in LOSSES:
                        for space in spaces:
                            grid.append(
                                dict(q=q, n=n, a=a, kind=kind, l=l, loss=loss, space=space)
                            )
    return grid


def _random_model(rng: np.random.Generator, q: int, support, loss: str) -> tuple[ModelSpec, int]:
    dim = int(rng.integers(1, 4))
    coord = int(rng.integers(0, dim))
    encoder = ("default", "raw", "centered")[int(rng.integers(0, 3))]

    def rand_frac() -> Fraction:
        return Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3)))

    features = {x: tuple(rand_frac() for _ in range(dim)) for x in support}
    weights = tuple(rand_frac() for _ in range(dim))
    model = ModelSpec(q=q, features=features, weights=weights, loss=loss, encoder=encoder)
    return model, coord


def _run_bound_suite(args, parser, verbose: bool) -> int:
    grid = _bound_instance_grid()
    if args.max_instances:
        grid = grid[: args.max_instances]
    records = []
    violations = 0
    for idx, inst in enumerate(grid):
        rng = np.random.default_rng([int(args.seed) & (2 ** 63 - 1), idx])
        cls = enumerate_secrets(inst["kind"], inst["q"], inst["n"], inst["l"])
        mu_X = restricted_uniform_inputs(
            RestrictedInputSpec(inst["q"], inst["n"], inst["a"])
        )
        support = mu_X.domain
        model, coord = _random_model(rng, inst["q"], support, inst["loss"])
        variance = exact_gradient_variance(model, cls, mu_X, coord)
        bd = variance_bound(model, cls, mu_X, space_tag=inst["space"], i=coord)
        ok = is_sound(variance, bd)
        if not ok:
            violations += 1
        rec = {
            "instance_id": f"i{idx:03d}",
            "q": inst["q"],
            "n": inst["n"],
            "a": inst["a"],
            "kind": inst["kind"],
            "loss": inst["loss"],
            "space": inst["space"],
            "variance": float(variance),
            "bound": float(bd.bound),
            "eps_term": float(bd.eps_term),
            "gamma": float(bd.gamma),
            "slack": float(bd.bound) - float(variance),
        }
        records.append(rec)
        if verbose:
            status = "ok" if ok else "VIOLATION"
            print(
                f"[{rec['instance_id']}] q={rec['q']} n={rec['n']} a={rec['a']} "
                f"kind={rec['kind']} loss={rec['loss']} space={rec['space']} "
                f"variance={rec['variance']:.6g} bound={rec['bound']:.6g} {status}"
            )
    csv_path = os.path.join(args.out, "bound_check.csv")
    _write_csv(
        csv_path,
        BOUND_CSV_HEADER,
        [[_fmt(rec[col]) for col in BOUND_CSV_HEADER] for rec in records],
    )
    name = "oracle-verify" if verbose else "bound-check"
    _write_manifest(args, name, {"instances": len(records), "violations": violations})
    if not args.no_plot:
        from .plotting import save_bound_plot

        save_bound_plot(records, os.path.join(args.out, "bound_check.png"))
    print(f"{len(records)} instances, {violations} violations; wrote {csv_path}")
    return 1 if violations else 0


def cmd_bound_check(args, parser) -> int:
    if args.tight_witness:
        model, cls, mu_X, variance, bd = tightness_witness()
        slack = bd.bound - variance
        print(
            "tight witness: q=2 constant model over 2 hypotheses: "
            f"variance={variance} bound={bd.bound} eps_term={bd.eps_term} "
            f"gamma={bd.gamma} slack={slack}"
        )
        _write_manifest(args, "bound-check", {"tight_witness_slack": float(slack)})
        return 0 if slack == 0 else 1
    return _run_bound_suite(args, parser, verbose=bool(getattr(args, "verbose", False)))


def cmd_oracle_verify(args, parser) -> int:
    args.verbose = True
    if args.tight_witness:
        return cmd_bound_check(args, parser)
    return _run_bound_suite(args, parser, verbose=True)


# -- regress ------------------------------------------------------------------


def cmd_regress(args, parser) -> int:
    threads = _resolved_threads(args)
    if args.in_path is not None:
        rows = sweep_rows_from_csv(args.in_path)
    else:
        result = run_sweep(default_grid(), space=args.space, threads=threads)
        rows = list(result.rows)
    comparison = regression_compare(rows)
    fits_path = os.path.join(args.out, "regression_fits.csv")
    scatter_path = os.path.join(args.out, "regression_scatter.csv")
    fits_to_csv(comparison, fits_path)
    scatter_to_csv(rows, scatter_path)
    _write_manifest(
        args,
        "regress",
        {
            "r2_without_log_a": comparison.without_log_a.r2,
            "r2_with_log_a": comparison.with_log_a.r2,
            "rows_used": comparison.nrows,
        },
    )
    if not args.no_plot:
        from .plotting import save_sweep_plot

        save_sweep_plot(rows, os.path.join(args.out, "regression_scatter.png"))
    print(
        f"R^2 without log a: {comparison.without_log_a.r2:.6f}; "
        f"with log a: {comparison.with_log_a.r2:.6f} "
        f"({comparison.nrows} rows); wrote {fits_path}"
    )
    return 0


# -- landscape ----------------------------------------------------------------


def cmd_landscape(args, parser) -> int:
    try:
        omegas = parse_real_range(args.omega)
    except ValueError as exc:
        parser.error(str(exc))
    psi = _PSI_BUILDERS[args.psi]()
    grid = np.asarray(omegas)
    order = None
    if args.method == "series":
        order = args.order or suggest_series_order(psi, args.w, float(grid.max()), args.tol)
        values = landscape_series(psi, args.w, grid, order)
    else:
        values = landscape_quadrature(psi, args.w, grid)
    csv_path = os.path.join(args.out, "landscape.csv")
    _write_csv(csv_path, ["omega", "C_h"], [[repr(float(o)), repr(float(v))] for o, v in zip(grid, values)])
    _write_manifest(args, "landscape", {"rows": len(omegas), "series_order": order})
    if not args.no_plot:
        from .plotting import save_landscape_plot

        save_landscape_plot(grid, values, os.path.join(args.out, "landscape.png"), args.w)
    suffix = f" (series order K={order})" if order is not None else " (quadrature)"
    print(f"wrote {len(omegas)} rows to {csv_path}{suffix}")
    return 0


# -- highfreq-bound -----------------------------------------------------------


def cmd_highfreq_bound(args, parser) -> int:
    try:
        Rs = parse_real_range(args.R)
    except ValueError as exc:
        parser.error(str(exc))
    psi = _PSI_BUILDERS[args.psi]()
    rows = []
    bounds = []
    for R in Rs:
        eb = epsilon_n1_bound(psi, args.x, args.y, R, H_max=args.H_max)
        rows.append([repr(float(R)), eb.h_star, repr(eb.bracket), repr(eb.value)])
        bounds.append(eb.value)
    csv_path = os.path.join(args.out, "highfreq_bound.csv")
    _write_csv(csv_path, ["R", "H_star", "bracket", "bound"], rows)
    _write_manifest(args, "highfreq-bound", {"rows": len(rows)})
    if not args.no_plot:
        from .plotting import save_highfreq_plot

        save_highfreq_plot(Rs, bounds, os.path.join(args.out, "highfreq_bound.png"))
    print(f"wrote {len(rows)} rows to {csv_path}")
    return 0


# -- discrepancy --------------------------------------------------------------


def cmd_discrepancy(args, parser) -> int:
    with open(args.in_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["x", "y"]:
            parser.error(f"point file must have header x,y; got {header}")
        try:
            points = [(float(r[0]), float(r[1])) for r in reader if r]
        except (ValueError, IndexError) as exc:
            parser.error(f"malformed point row: {exc}")
    try:
        d_star = empirical_star_discrepancy(points)
    except ValueError as exc:
        parser.error(str(exc))
    csv_path = os.path.join(args.out, "discrepancy.csv")
    _write_csv(csv_path, ["n_points", "d_star"], [[len(points), repr(d_star)]])
    _write_manifest(args, "discrepancy", {"n_points": len(points), "d_star": d_star})
    if not args.no_plot:
        from .plotting import save_points_plot

        save_points_plot(points, d_star, os.path.join(args.out, "discrepancy.png"))
    print(f"D*_N = {d_star!r} over {len(points)} points")
    return 0


# -- parser wiring ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit master seed")
    common.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker count (0 = auto; default from GRADBOUND_THREADS, else 1)",
    )
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--no-plot", action="store_true", help="skip PNG rendering")

    parser = argparse.ArgumentParser(
        prog="gradbound",
        description="exact pairwise-independence deficits and gradient-variance bounds",
    )
    parser.add_argument("--version", action="version", version=f"gradbound {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("epsilon-sweep", parents=[common], help="exact deficit sweep")
    p.add_argument("--q", help="prime modulus list/range, e.g. 3 or 3,5,7")
    p.add_argument("--n", help="dimension or range, e.g. 4..9")
    p.add_argument("--l", help="sparsity or range (binary/ternary kinds)")
    p.add_argument("--a", help="input alphabet size or range")
    p.add_argument("--kind", help="comma list of uniform,binary,ternary")
    p.add_argument("--space", choices=("tv", "pearson"), default="tv")
    p.add_argument("--max-work", type=float, default=2e7, help="per-cell work cap")
    p.set_defaults(handler=cmd_epsilon_sweep)

    for name, handler in (("bound-check", cmd_bound_check), ("oracle-verify", cmd_oracle_verify)):
        p = sub.add_parser(
            name,
            parents=[common],
            help="variance/bound soundness suite"
            + (" (verbose per-instance output)" if name == "oracle-verify" else ""),
        )
        p.add_argument("--max-instances", type=int, default=0, help="0 = full grid")
        p.add_argument(
            "--tight-witness",
            action="store_true",
            help="print the exact equality instance and exit",
        )
        p.set_defaults(handler=handler, verbose=(name == "oracle-verify"))

    p = sub.add_parser("regress", parents=[common], help="nested OLS on sweep rows")
    p.add_argument("--in", dest="in_path", help="sweep rows CSV (default: rerun default grid)")
    p.add_argument("--space", choices=("tv", "pearson"), default="tv")
    p.set_defaults(handler=cmd_regress)

    p = sub.add_parser("landscape", parents=[common], help="smoothed landscape C_h")
    p.add_argument("--psi", choices=sorted(_PSI_BUILDERS), default="sawtooth")
    p.add_argument("--w", type=float, default=10.0, help="carrier frequency")
    p.add_argument("--omega", default="0:500:0.1", help="real grid start:end:step")
    p.add_argument("--method", choices=("series", "quadrature"), default="series")
    p.add_argument("--order", type=int, default=0, help="series order (0 = auto)")
    p.add_argument("--tol", type=float, default=1e-6, help="series tail target")
    p.set_defaults(handler=cmd_landscape)

    p = sub.add_parser("highfreq-bound", parents=[common], help="deficit bound against R")
    p.add_argument("--R", default="5:50:5", help="spread grid start:end:step")
    p.add_argument("--x", type=float, default=0.3)
    p.add_argument("--y", type=float, default=0.7)
    p.add_argument("--H-max", dest="H_max", type=int, default=10 ** 4)
    p.add_argument("--psi", choices=sorted(_PSI_BUILDERS), default="sawtooth")
    p.set_defaults(handler=cmd_highfreq_bound)

    p = sub.add_parser("discrepancy", parents=[common], help="exact star discrepancy")
    p.add_argument("--in", dest="in_path", required=True, help="point CSV with header x,y")
    p.set_defaults(handler=cmd_discrepancy)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        expanded = _inject_config(raw)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(expanded)
    os.makedirs(args.out, exist_ok=True)
    try:
        return args.handler(args, parser)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
