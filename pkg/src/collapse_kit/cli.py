"""Command-line front end.

Subcommands::

    collapse-kit table data.csv [--checks ...] [--out report.json]
    collapse-kit model config.json [--grid ...] [--checks ...]
    collapse-kit cochran sample.csv | matrix.json
    collapse-kit batch --seed N [--count K] --suite NAME

Exit codes: 0 = every requested check ran (verdict outcomes do not change the
exit code); 1 = input error; 2 = numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import collapse as ck
from . import quantile as qt
from .dependence import (
    continuous_conditional_field,
    continuous_marginal_field,
    decomposition_terms,
    discrete_conditional_field,
    discrete_marginal_field,
    marginal_dist_dep,
)
from .errors import InputError, NumericalError
from .models import ContinuousModel, EvalGrid, auto_grid, model_from_config
from .report import build_report, fingerprint_bytes, fingerprint_file, write_report
from .suites import SUITES, run_suite
from .tables import joint_from_csv, read_table_rows, build_discrete_joint

TABLE_CHECKS = ("homogeneity", "collapsibility", "uniform_collapsibility",
                "a_collapsibility", "independence_y_w_given_x", "independence_x_w",
                "class_membership", "reversal")
MODEL_CHECKS = ("decomposition", "residual_integral", "a_collapsibility",
                "density_a_collapsibility", "quantile_a_collapsibility",
                "cox_residual", "criterion_integral", "total_effect_transfer",
                "homogeneity", "collapsibility", "independence_y_w_given_x",
                "independence_x_w", "reversal")
MODEL_DEFAULT_CHECKS = ("decomposition", "residual_integral", "a_collapsibility",
                        "density_a_collapsibility", "quantile_a_collapsibility",
                        "cox_residual", "criterion_integral", "total_effect_transfer")


def _parse_tols(pairs) -> dict:
    tols = {}
    for item in pairs or ():
        name, _, value = item.partition("=")
        if not value:
            raise InputError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            tols[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"--tol {item!r}: {value!r} is not a number") from None
    return tols


def _parse_grid(spec: str | None, model: ContinuousModel) -> EvalGrid:
    """Grid spec: "auto", "auto:NY:NX:NW", or "y=lo:hi:n,x=lo:hi:n,w=lo:hi:n"
    (missing axes fall back to the auto grid)."""
    if spec is None or spec == "auto":
        return auto_grid(model)
    if spec.startswith("auto:"):
        try:
            ny, nx, nw = (int(v) for v in spec.split(":")[1:])
        except ValueError:
            raise InputError(f"bad grid spec {spec!r}; expected auto:NY:NX:NW") from None
        return auto_grid(model, n_y=ny, n_x=nx, n_w=nw)
    axes = {}
    for part in spec.split(","):
        name, _, rng = part.partition("=")
        name = name.strip()
        if name not in ("y", "x", "w"):
            raise InputError(f"bad grid axis {name!r} in {spec!r}")
        try:
            lo, hi, n = rng.split(":")
            axes[name] = (float(lo), float(hi), int(n))
        except ValueError:
            raise InputError(f"bad grid range {rng!r}; expected lo:hi:n") from None
    base = auto_grid(model)
    def linspace(lo, hi, n):
        if n == 1:
            return (0.5 * (lo + hi),)
        return tuple(lo + (hi - lo) * i / (n - 1) for i in range(n))
    ys = linspace(*axes["y"]) if "y" in axes else base.ys
    xs = linspace(*axes["x"]) if "x" in axes else base.xs
    ws = linspace(*axes["w"]) if "w" in axes else base.ws
    return EvalGrid(ys, xs, ws)


def _grid_max(fn, grid, witness_keys=("y", "x")):
    worst = None
    witness = None
    for y in grid.ys:
        for x in grid.xs:
            v = abs(fn(y, x))
            if worst is None or v > worst:
                worst = v
                witness = dict(zip(witness_keys, (y, x)))
    return worst, witness


def _max_verdict(prop, fn, grid, tol, notes=None):
    worst, witness = _grid_max(fn, grid)
    holds = worst <= tol
    return ck.Verdict(prop, holds, float(worst), None if holds else witness,
                      float(tol), dict(notes or {}))


# ---------------------------------------------------------------------------
# subcommands


def cmd_table(args) -> dict:
    t0 = time.perf_counter()
    order = args.level_order or "numeric"
    joint = joint_from_csv(args.input, order_y=order, order_x=order, order_w=order)
    tols = _parse_tols(args.tol)
    names = args.checks.split(",") if args.checks else list(TABLE_CHECKS)
    results = {}
    for name in names:
        name = name.strip()
        tol = tols.get(name)
        if name == "homogeneity":
            results[name] = ck.check_homogeneity(joint, tol=tol)
        elif name == "collapsibility":
            results[name] = ck.check_collapsibility(joint, tol=tol)
        elif name == "uniform_collapsibility":
            results[name] = ck.check_uniform_collapsibility(joint, tol=tol)
        elif name == "a_collapsibility":
            results[name] = ck.check_a_collapsibility(joint, tol=tol)
        elif name == "independence_y_w_given_x":
            results[name] = ck.check_independence(joint, "y_w_given_x", tol=tol)
        elif name == "independence_x_w":
            results[name] = ck.check_independence(joint, "x_w", tol=tol)
        elif name == "class_membership":
            results[name] = ck.classify(joint, tol=tol)
        elif name == "reversal":
            results[name] = ck.detect_reversal(joint, tol=tol)
        else:
            raise InputError(f"unknown table check {name!r}; known: {', '.join(TABLE_CHECKS)}")
    fields = None
    if args.emit_fields:
        fields = {"conditional": discrete_conditional_field(joint),
                  "marginal": discrete_marginal_field(joint)}
    return build_report("table",
                        {"path": str(args.input), "fingerprint": fingerprint_file(args.input),
                         "dimensions": joint.dimensions()},
                        {"checks": names, "tolerances": tols, "level_order": order},
                        results, fields, time.perf_counter() - t0)


def cmd_model(args) -> dict:
    t0 = time.perf_counter()
    with open(args.input, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"config is not valid JSON: {exc}") from None
    model = model_from_config(cfg)
    tols = _parse_tols(args.tol)
    tols.update({k: float(v) for k, v in cfg.get("tolerances", {}).items()})
    grid = _parse_grid(args.grid or cfg.get("grid_spec"), model)
    names = (args.checks.split(",") if args.checks
             else list(cfg.get("checks", MODEL_DEFAULT_CHECKS)))
    smooth_tol = ck.TOL_CLAMPED if model.clamped_support else ck.TOL_SMOOTH
    results = {}
    for name in names:
        name = name.strip()
        tol = tols.get(name)
        if name == "decomposition":
            def defect(y, x):
                avg, res = decomposition_terms(model, y, x)
                return avg + res - marginal_dist_dep(model, y, x)
            results[name] = _max_verdict("decomposition-consistency", defect, grid,
                                         tol if tol is not None else 1e-5)
        elif name == "residual_integral":
            results[name] = _max_verdict(
                "averaged-collapse-residual",
                lambda y, x: ck.residual_integral(model, y, x), grid,
                tol if tol is not None else smooth_tol)
        elif name == "a_collapsibility":
            results[name] = ck.check_a_collapsibility(model, grid, tol)
        elif name == "density_a_collapsibility":
            results[name] = ck.check_density_a_collapsibility(model, grid, tol)
        elif name == "quantile_a_collapsibility":
            results[name] = qt.check_a_collapsibility_quantile(model, grid, tol)
        elif name == "cox_residual":
            results[name] = _max_verdict(
                "posterior-average-identity",
                lambda y, x: qt.cox_residual(model, y, x), grid,
                tol if tol is not None else 1e-5)
        elif name == "criterion_integral":
            results[name] = _max_verdict(
                "quantile-collapse-criterion",
                lambda y, x: qt.criterion_integral(model, y, x), grid,
                tol if tol is not None else smooth_tol)
        elif name == "total_effect_transfer":
            results[name] = qt.check_total_effect_transfer(model, grid, tol)
        elif name == "homogeneity":
            results[name] = ck.check_homogeneity(model, grid, tol)
        elif name == "collapsibility":
            results[name] = ck.check_collapsibility(model, grid, tol)
        elif name == "independence_y_w_given_x":
            results[name] = ck.check_independence(model, "y_w_given_x", grid, tol)
        elif name == "independence_x_w":
            results[name] = ck.check_independence(model, "x_w", grid, tol)
        elif name == "reversal":
            results[name] = ck.detect_reversal(model, grid, tol)
        else:
            raise InputError(f"unknown model check {name!r}; known: {', '.join(MODEL_CHECKS)}")
    fields = None
    if args.emit_fields:
        fields = {"conditional": continuous_conditional_field(model, grid),
                  "marginal": continuous_marginal_field(model, grid),
                  "quantile_profile": qt.build_quantile_profile(model, grid)}
    return build_report("model",
                        {"path": str(args.input), "fingerprint": fingerprint_file(args.input),
                         "model": model.describe()},
                        {"checks": names, "tolerances": tols, "grid": grid.to_json()},
                        results, fields, time.perf_counter() - t0)


def cmd_cochran(args) -> dict:
    t0 = time.perf_counter()
    path = str(args.input)
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"matrix file is not valid JSON: {exc}") from None
        matrix = data.get("cov", data) if isinstance(data, dict) else data
        decomp = qt.cochran_decompose(matrix)
        source = {"kind": "covariance"}
    else:
        import csv as _csv
        with open(path, newline="", encoding="utf-8") as fh:
            reader = _csv.reader(fh)
            header = [h.strip().lower() for h in next(reader, [])]
            try:
                iy, ix, iw = header.index("y"), header.index("x"), header.index("w")
            except ValueError:
                raise InputError("sample CSV must have columns y, x, w") from None
            rows = []
            for lineno, rec in enumerate(reader, start=2):
                if not rec or all(not c.strip() for c in rec):
                    continue
                try:
                    rows.append((float(rec[iy]), float(rec[ix]), float(rec[iw])))
                except (ValueError, IndexError):
                    raise InputError(f"line {lineno}: expected numeric y, x, w") from None
        decomp = qt.cochran_from_samples(rows)
        source = {"kind": "sample", "rows": len(rows)}
    result = {"cochran": decomp, "identity_holds": abs(decomp.residual) < 1e-10}
    return build_report("cochran",
                        {"path": path, "fingerprint": fingerprint_file(path), **source},
                        {}, result, None, time.perf_counter() - t0)


def cmd_batch(args) -> dict:
    t0 = time.perf_counter()
    if args.seed is None:
        raise InputError("batch requires --seed for reproducibility")
    result = run_suite(args.suite, args.seed, args.count)
    return build_report("batch", {"suite": args.suite, "seed": args.seed},
                        {"count": result.count}, {"suite_result": result},
                        None, time.perf_counter() - t0)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collapse-kit",
                                     description="Collapsibility analysis for "
                                                 "three-variable models")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here (default: stdout)")

    p_table = sub.add_parser("table", parents=[common],
                             help="analyze a contingency-table CSV (y,x,w,count)")
    p_table.add_argument("input")
    p_table.add_argument("--checks", help="comma-separated check names")
    p_table.add_argument("--tol", action="append", metavar="NAME=VALUE")
    p_table.add_argument("--level-order", choices=("first", "numeric"),
                         help="level ordering (default numeric-aware)")
    p_table.add_argument("--emit-fields", action="store_true")
    p_table.set_defaults(fn=cmd_table)

    p_model = sub.add_parser("model", parents=[common],
                             help="analyze a continuous model config (JSON)")
    p_model.add_argument("input")
    p_model.add_argument("--grid", help='"auto", "auto:NY:NX:NW", or '
                                        '"y=lo:hi:n,x=lo:hi:n,w=lo:hi:n"')
    p_model.add_argument("--checks", help="comma-separated check names")
    p_model.add_argument("--tol", action="append", metavar="NAME=VALUE")
    p_model.add_argument("--emit-fields", action="store_true")
    p_model.set_defaults(fn=cmd_model)

    p_coch = sub.add_parser("cochran", parents=[common],
                            help="slope decomposition from a sample CSV or 3x3 matrix JSON")
    p_coch.add_argument("input")
    p_coch.set_defaults(fn=cmd_cochran)

    p_batch = sub.add_parser("batch", parents=[common],
                             help="run a seeded property suite")
    p_batch.add_argument("--seed", type=int, required=True)
    p_batch.add_argument("--count", type=int)
    p_batch.add_argument("--suite", required=True, choices=sorted(SUITES))
    p_batch.set_defaults(fn=cmd_batch)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = write_report(report, args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
