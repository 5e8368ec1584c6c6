"""Command-line front end.

Subcommands::

    bound       one bound (level1 / level2 / moment) at one or more ranks
    moment      a centered moment for explicit test functions
    table       recompute a published table and report deviations
    optimize    generator-space search for a better moment bound
    rmt-verify  Monte Carlo check of the moment predictions

Results are emitted as structured records (JSON lines, sorted keys); with
``--format csv`` or when writing records to a file, a CSV mirror is
produced.  Outputs carry no timestamps: identical configuration and seed
give byte-identical output.  A config file of ``key = value`` lines
(keys matching the long flag names) supplies defaults; flags override.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import reference
from .bounds import (
    ParityError,
    bound_level1,
    bound_level2,
    bound_moment,
    reproduce_table,
    table_tolerance,
)
from .kernels import SymmetryGroup
from .moments import MomentRequest, SupportRegimeError, centered_moment
from .optimize import (
    BASIS_KINDS,
    GeneratorBasis,
    NoFeasiblePointError,
    OptimizationProblem,
    SearchSettings,
    search,
)
from .quadrature import DEFAULT_SETTINGS, QuadratureError, QuadratureSettings
from .rmt import EnsembleSpec, verify_moments
from .testfunc import from_spec_string, parse_rational

ERROR_CODES = {
    ParityError: "parity-mismatch",
    SupportRegimeError: "support-regime",
    QuadratureError: "quadrature-failure",
    NoFeasiblePointError: "no-feasible-point",
    ValueError: "invalid-input",
}


def parse_testfn(spec: str):
    """CLI spec string -> TestFunction (see testfunc.from_spec_string)."""
    return from_spec_string(spec)


def _quad_settings(args) -> QuadratureSettings:
    if args.tol_abs is None and args.tol_rel is None:
        return DEFAULT_SETTINGS
    return QuadratureSettings(
        abs_tol=args.tol_abs if args.tol_abs is not None else DEFAULT_SETTINGS.abs_tol,
        rel_tol=args.tol_rel if args.tol_rel is not None else DEFAULT_SETTINGS.rel_tol,
    )


def _emit(records: list[dict], args) -> None:
    fmt = getattr(args, "format", "records")
    out = getattr(args, "out", None)
    if out:
        path = Path(out)
        if fmt == "csv":
            path.write_text(_to_csv(records))
        else:
            path.write_text(_to_jsonl(records))
            path.with_suffix(path.suffix + ".csv").write_text(_to_csv(records))
    else:
        sys.stdout.write(_to_csv(records) if fmt == "csv" else _to_jsonl(records))


def _to_jsonl(records: list[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)


def _to_csv(records: list[dict]) -> str:
    if not records:
        return ""
    fields: list[str] = []
    for r in records:
        for k in r:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow({k: _csv_value(v) for k, v in r.items()})
    return buf.getvalue()


def _csv_value(v):
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return v


def _ranks(args) -> list[int]:
    if args.ranks:
        return [int(r) for r in args.ranks.split(",")]
    if args.rank is None:
        raise ValueError("need --rank or --ranks")
    return [args.rank]


def _require(args, *names: str) -> None:
    """Presence check deferred past argparse so config files can supply values."""
    missing = [n for n in names if getattr(args, n.replace("-", "_"), None) is None]
    if missing:
        raise ValueError("missing required option(s): " + ", ".join(f"--{n}" for n in missing))


def _cmd_bound(args) -> int:
    _require(args, "family")
    family = SymmetryGroup.from_string(args.family)
    settings = _quad_settings(args)
    tfs = [parse_testfn(s) for s in args.testfn or []]
    records = []
    for r in _ranks(args):
        if args.method == "level1":
            if tfs:
                result = bound_level1(tfs[0], family, r, settings=settings)
            else:
                result = bound_level1(
                    None, family, r, expectation=reference.expectation_level1(family)
                )
        elif args.method == "level2":
            if tfs:
                if len(tfs) == 1:
                    tfs = tfs * 2
                result = bound_level2(tfs[0], tfs[1], family, r, settings=settings)
            else:
                result = bound_level2(
                    None, None, family, r, expectation=reference.expectation_level2(family)
                )
        else:
            m = 2 if args.method == "moment4" else int(args.method.split(":", 1)[1])
            if len(tfs) == 1:
                tfs = tfs * m
            if len(tfs) != m:
                raise ValueError(f"{args.method} needs {m} slot test functions, got {len(tfs)}")
            result = bound_moment(
                tfs, family, r, weight_k=args.weight_k, regime=args.regime, settings=settings
            )
        records.append(result.record())
    _emit(records, args)
    return 0


def _cmd_moment(args) -> int:
    _require(args, "family", "testfn")
    family = SymmetryGroup.from_string(args.family)
    tfs = [parse_testfn(s) for s in args.testfn or []]
    request = MomentRequest(tuple(tfs), family, weight_k=args.weight_k, regime=args.regime)
    result = centered_moment(request, _quad_settings(args))
    _emit(
        [
            {
                "family": family.value,
                "n": len(tfs),
                "test_functions": [tf.spec_string for tf in tfs],
                "regime": result.regime,
                "value": result.value,
                "matching_sum": result.matching_sum,
                "r_term": result.r_term,
                "sign_applied": result.sign_applied,
            }
        ],
        args,
    )
    return 0


def _cmd_table(args) -> int:
    cells = reproduce_table(args.table, _quad_settings(args))
    records = []
    failed = False
    for cell in cells:
        tol = table_tolerance(cell)
        ok = abs(cell.rel_dev) <= tol
        failed = failed or not ok
        rec = cell.record()
        rec["tolerance"] = tol
        rec["within_tolerance"] = ok
        records.append(rec)
    _emit(records, args)
    return 1 if failed else 0


def _parse_basis(spec: str, budget: float) -> GeneratorBasis:
    """Basis grammar: sinx2:half=<r> | cos:dim=<d>:half=<r>[:box=lo,hi] |
    poly:dim=<d>:half=<r>[:box=lo,hi] | fixed:<testfn spec>"""
    if spec.startswith("fixed:"):
        return GeneratorBasis("fixed", fixed_function=parse_testfn(spec[6:]))
    parts = spec.split(":")
    fields = {}
    for p in parts[1:]:
        key, _, value = p.partition("=")
        fields[key] = value
    half = parse_rational(fields.get("half", str(budget / 2)))
    if parts[0] == "sinx2":
        return GeneratorBasis("sin-of-square", half_support=half)
    kind = {"cos": "cosine-series", "poly": "polynomial"}.get(parts[0])
    if kind is None or "dim" not in fields:
        raise ValueError(
            f"cannot parse basis {spec!r} (expected sinx2:half=<r> | "
            "cos:dim=<d>:half=<r> | poly:dim=<d>:half=<r> | fixed:<testfn>)"
        )
    dim = int(fields["dim"])
    box: tuple[tuple[float, float], ...] = ()
    if "box" in fields:
        lo, hi = (parse_rational(v) for v in fields["box"].split(","))
        box = tuple((lo, hi) for _ in range(dim))
    return GeneratorBasis(kind, dimension=dim, coefficient_box=box, half_support=half)


def _cmd_optimize(args) -> int:
    _require(args, "family", "rank", "basis", "support")
    family = SymmetryGroup.from_string(args.family)
    budget = parse_rational(args.support)
    bases = tuple(_parse_basis(s, budget) for s in args.basis)
    problem = OptimizationProblem(
        family=family,
        rank=args.rank,
        moment_order=2 * len(bases),
        bases=bases,
        support_budget=budget,
        weight_k=args.weight_k,
        regime=args.regime,
    )
    settings = SearchSettings(
        restarts=args.restarts,
        seed=args.seed,
        max_evals=args.max_evals,
        simplex_tolerance=args.simplex_tol,
    )
    result = search(problem, settings, _quad_settings(args))
    records: list[dict] = [
        {
            "kind": "restart",
            "restart": t.restart,
            "start_value": t.start_value,
            "final_value": t.final_value,
            "evaluations": t.evaluations,
            "converged": t.converged,
        }
        for t in result.trace
    ]
    records.append(
        {
            "kind": "result",
            "family": family.value,
            "rank": args.rank,
            "bound": result.bound,
            "coefficients": [list(c) for c in result.coefficients],
        }
    )
    _emit(records, args)
    return 0


def _cmd_rmt_verify(args) -> int:
    _require(args, "group", "N", "samples", "testfn")
    group = SymmetryGroup.from_string(args.group)
    tf = parse_testfn(args.testfn[0] if isinstance(args.testfn, list) else args.testfn)
    orders = tuple(int(o) for o in args.orders.split(","))
    spec = EnsembleSpec(group=group, half_dim=args.N, samples=args.samples, seed=args.seed)
    comparisons = verify_moments(spec, tf, orders, workers=args.workers, weight_k=args.weight_k)
    records = []
    failed = False
    for comp in comparisons:
        rec = {
            "group": group.value,
            "N": args.N,
            "samples": args.samples,
            "testfn": tf.spec_string,
        }
        rec.update(comp.record())
        records.append(rec)
        failed = failed or not comp.passed
    _emit(records, args)
    return 1 if failed else 0


def _read_config(path: str) -> dict[str, str]:
    """Flat key = value file mirroring the long flag names."""
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"config line without '=': {line!r}")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentbounds",
        description="Vanishing-order bounds from density expectations and centered moments",
    )
    parser.add_argument("--config", help="key=value defaults file; flags override")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "records"), default="records")
    common.add_argument("--tol-abs", type=float, default=None, help="quadrature absolute tolerance")
    common.add_argument("--tol-rel", type=float, default=None, help="quadrature relative tolerance")

    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", parents=[common], help="compute an upper bound")
    p_bound.add_argument("--family")
    p_bound.add_argument("--rank", type=int)
    p_bound.add_argument("--ranks", help="comma-separated ranks")
    p_bound.add_argument(
        "--method",
        default="moment4",
        help="level1 | level2 | moment4 | moment2m:<m>",
    )
    p_bound.add_argument("--testfn", action="append", help="test function spec (repeatable)")
    p_bound.add_argument("--weight-k", type=int, default=2)
    p_bound.add_argument("--regime", default="auto", choices=("auto", "with_R", "mock_gaussian"))
    p_bound.set_defaults(func=_cmd_bound)

    p_moment = sub.add_parser("moment", parents=[common], help="compute a centered moment")
    p_moment.add_argument("--family")
    p_moment.add_argument("--testfn", action="append")
    p_moment.add_argument("--weight-k", type=int, default=2)
    p_moment.add_argument("--regime", default="auto", choices=("auto", "with_R", "mock_gaussian"))
    p_moment.set_defaults(func=_cmd_moment)

    p_table = sub.add_parser("table", parents=[common], help="reproduce a published table")
    p_table.add_argument("table", choices=reference.TABLE_NAMES)
    p_table.set_defaults(func=_cmd_table)

    p_opt = sub.add_parser("optimize", parents=[common], help="search generator space")
    p_opt.add_argument("--family")
    p_opt.add_argument("--rank", type=int)
    p_opt.add_argument(
        "--basis",
        action="append",
        help="per-slot basis: sinx2:half=<r> | cos:dim=<d>:half=<r>[:box=lo,hi] | "
        "poly:dim=<d>:half=<r>[:box=lo,hi] | fixed:<testfn>",
    )
    p_opt.add_argument("--support", help="support budget for every slot")
    p_opt.add_argument("--weight-k", type=int, default=2)
    p_opt.add_argument("--regime", default="auto", choices=("auto", "with_R", "mock_gaussian"))
    p_opt.add_argument("--restarts", type=int, default=16)
    p_opt.add_argument("--max-evals", type=int, default=2000)
    p_opt.add_argument("--simplex-tol", type=float, default=1e-12)
    p_opt.add_argument("--seed", type=int, default=0)
    p_opt.set_defaults(func=_cmd_optimize)

    p_rmt = sub.add_parser("rmt-verify", parents=[common], help="Monte Carlo verification")
    p_rmt.add_argument("--group")
    p_rmt.add_argument("--N", type=int, help="half-dimension")
    p_rmt.add_argument("--samples", type=int)
    p_rmt.add_argument("--testfn", action="append")
    p_rmt.add_argument("--orders", default="2,4")
    p_rmt.add_argument("--seed", type=int, default=0)
    p_rmt.add_argument("--weight-k", type=int, default=2)
    p_rmt.add_argument("--workers", type=int, default=1)
    p_rmt.set_defaults(func=_cmd_rmt_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    # Pre-scan for --config so its values become parser defaults.
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if known.config:
        config = _read_config(known.config)
        for action in parser._subparsers._group_actions:  # noqa: SLF001
            for sub_parser in action.choices.values():
                defaults = {}
                for sub_action in sub_parser._actions:  # noqa: SLF001
                    if sub_action.dest in config:
                        value = config[sub_action.dest]
                        if sub_action.type is not None:
                            value = sub_action.type(value)
                        elif isinstance(sub_action, argparse._AppendAction):  # noqa: SLF001
                            value = [value]
                        defaults[sub_action.dest] = value
                sub_parser.set_defaults(**defaults)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - map to machine-readable error records
        code = "internal-error"
        for exc_type, name in ERROR_CODES.items():
            if isinstance(exc, exc_type):
                code = name
                break
        sys.stderr.write(json.dumps({"error": code, "message": str(exc)}, sort_keys=True) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
