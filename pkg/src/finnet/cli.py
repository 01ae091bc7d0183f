"""Command-line pipeline with reproducible seeding.

Every command is deterministic given (inputs, flags, seed): all
randomness flows from one --seed flag through per-task sub-seeds derived
from (seed, index...) pairs, and outputs carry a metadata header echoing
the tool version, the seed, and the resolved configuration. Exit codes:
0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .ingest import AssetPanel, AssetSlice, DataError, GdpPanel, core_slice, read_asset_file, read_gdp_file
from .lgd import (
    COARSE_THRESHOLDS,
    FINE_D1_MAX,
    FINE_D1_POINTS,
    FINE_D2_MAX,
    FINE_D2_POINTS,
    LgdSpec,
    cascade,
    fine_grid,
    influence_ranking,
    severity_sorted,
    sweep_grid,
)
from .knockout import (
    ci_compare,
    ci_table,
    ensemble_knockout,
    ensemble_knockout_sampled,
)
from .metrics import measure_vector
from .netbuild import DEFAULT_GDP_THRESHOLD, ThresholdRule, export_graph
from .nullmodels import (
    DEFAULT_SIGMA_CORRECTION,
    DEFAULT_SWAP_FACTOR,
    NULL_MODEL_KINDS,
    NullModelSpec,
    fit_lognormal,
    fit_lognormal_pooled,
)
from .seeding import child_seed

DEFAULT_SEED = 12345
DEFAULT_TRIALS = 2000
DEFAULT_SAMPLES = 10000
DEFAULT_ALPHA = 0.05
ENV_DATA_DIR = "FINNET_DATA_DIR"

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE_ERROR = 2


def _resolve_input(path: str | None, default_name: str) -> str:
    if path is not None:
        return path
    data_dir = os.environ.get(ENV_DATA_DIR)
    if data_dir:
        return os.path.join(data_dir, default_name)
    raise DataError(f"no path given for {default_name} and {ENV_DATA_DIR} is not set")


def _load_panels(args: argparse.Namespace) -> tuple[AssetPanel, GdpPanel]:
    asset_path = _resolve_input(args.assets, "assets.csv")
    gdp_path = _resolve_input(args.gdp, "gdp.csv")
    if asset_path == "-" and gdp_path == "-":
        raise DataError("only one of assets/gdp can come from standard input")
    return read_asset_file(asset_path), read_gdp_file(gdp_path)


def _parse_years(text: str) -> list[int]:
    years: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            years.extend(range(int(lo), int(hi) + 1))
        else:
            years.append(int(part))
    return years


def _rule_from_args(args: argparse.Namespace) -> ThresholdRule:
    return ThresholdRule.from_name(args.rule, args.t)


def _meta_header(command: str, args: argparse.Namespace, extra: dict | None = None) -> str:
    config = dict(extra or {})
    lines = [f"# finnet={__version__}", f"# command={command}", f"# seed={args.seed}"]
    lines += [f"# {key}={value}" for key, value in config.items()]
    return "\n".join(lines) + "\n"


def _meta_dict(command: str, args: argparse.Namespace, extra: dict | None = None) -> dict:
    meta = {"finnet": __version__, "command": command, "seed": args.seed}
    meta.update(extra or {})
    return meta


def _emit(path: str, payload: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(payload)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _csv_payload(header_text: str, columns: list[str], rows: list[list]) -> bytes:
    out = io.StringIO()
    out.write(header_text)
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue().encode("utf-8")


def _json_payload(meta: dict, body: dict) -> bytes:
    return json.dumps({"meta": meta, **body}, indent=2).encode("utf-8") + b"\n"


def _emit_table(args, command: str, extra: dict, columns: list[str], rows: list[list]) -> None:
    """Write a table as CSV or, with --format json, as a row-object list."""
    if getattr(args, "format", "csv") == "json":
        meta = _meta_dict(command, args, extra)
        body = {"rows": [dict(zip(columns, row)) for row in rows]}
        _emit(args.out, _json_payload(meta, body))
    else:
        _emit(args.out, _csv_payload(_meta_header(command, args, extra), columns, rows))


def _null_spec(
    kind: str,
    slice_: AssetSlice,
    rule: ThresholdRule,
    seed: int,
    swap_factor: int,
    correction: float,
) -> NullModelSpec:
    net = rule.apply(slice_)
    if kind == "log-normal":
        fit = fit_lognormal(slice_, correction_factor=correction)
        return NullModelSpec.from_empirical(kind, net, seed, fit=fit, rule=rule)
    return NullModelSpec.from_empirical(kind, net, seed, swap_factor=swap_factor)


def cmd_build(args: argparse.Namespace) -> int:
    assets, gdp = _load_panels(args)
    slice_ = core_slice(assets, gdp, args.year)
    net = _rule_from_args(args).apply(slice_)
    mean_out = net.num_edges / net.n
    extra = {
        "year": args.year,
        "rule": net.rule,
        "n": net.n,
        "edges": net.num_edges,
        "mean_out_degree": mean_out,
        "coverage": slice_.coverage,
    }
    rows = [[holder, issuer] for holder, issuer in net.edges()]
    _emit(args.out, _csv_payload(_meta_header("build", args, extra), ["holder", "issuer"], rows))
    print(f"build: year={args.year} rule={net.rule} n={net.n} edges={net.num_edges} "
          f"mean_out_degree={mean_out:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    assets, gdp = _load_panels(args)
    slice_ = core_slice(assets, gdp, args.year)
    net = _rule_from_args(args).apply(slice_)
    payload = export_graph(net, slice_, args.format)
    extra = {"year": args.year, "rule": net.rule, "format": args.format}
    header = _meta_header("export", args, extra)
    if args.format == "dot":
        header = "".join(f"//{line[1:]}\n" for line in header.splitlines())
    _emit(args.out, header.encode("utf-8") + payload)
    return EXIT_OK


def cmd_fit_lognormal(args: argparse.Namespace) -> int:
    assets, gdp = _load_panels(args)
    years = _parse_years(args.years)
    slices = [core_slice(assets, gdp, year) for year in years]
    if args.pooled:
        fits = [fit_lognormal_pooled(slices, correction_factor=args.correction)]
    else:
        fits = [fit_lognormal(s, correction_factor=args.correction) for s in slices]
    meta = _meta_dict("fit-lognormal", args, {"years": years, "pooled": args.pooled})
    _emit(args.out, _json_payload(meta, {"fits": [fit.to_json_dict() for fit in fits]}))
    return EXIT_OK


def cmd_gen_null(args: argparse.Namespace) -> int:
    assets, gdp = _load_panels(args)
    slice_ = core_slice(assets, gdp, args.year)
    rule = _rule_from_args(args)
    spec = _null_spec(args.model, slice_, rule, args.seed, args.swap_factor, args.correction)
    rows = []
    for index in range(args.count):
        net = spec.sample(index)
        rows.extend([index, holder, issuer] for holder, issuer in net.edges())
    extra = {"year": args.year, "rule": rule.label, "model": args.model, "count": args.count}
    _emit(args.out, _csv_payload(_meta_header("gen-null", args, extra),
                                 ["sample", "holder", "issuer"], rows))
    return EXIT_OK


def cmd_knockout(args: argparse.Namespace) -> int:
    assets, gdp = _load_panels(args)
    years = _parse_years(args.years)
    slices = [core_slice(assets, gdp, year) for year in years]
    rule = _rule_from_args(args)
    if args.model == "empirical":
        nets = [rule.apply(s) for s in slices]
        summary = ensemble_knockout(nets, args.strategy, args.trials, args.seed, args.jobs)
    else:
        specs = [
            _null_spec(args.model, s, rule, child_seed(args.seed, i), args.swap_factor, args.correction)
            for i, s in enumerate(slices)
        ]
        summary = ensemble_knockout_sampled(specs, args.strategy, args.trials, args.seed, args.jobs)
    extra = {
        "years": ",".join(str(y) for y in years),
        "rule": rule.label,
        "model": args.model,
        "strategy": args.strategy,
        "trials": args.trials,
        "samples": args.samples,
        "n_traces": summary.n_traces,
    }
    rows = [[float(g), float(m), float(s)] for g, m, s in zip(summary.grid, summary.mean, summary.std)]
    _emit_table(args, "knockout", extra, ["grid_point", "mean", "std"], rows)
    return EXIT_OK


def cmd_ci_table(args: argparse.Namespace) -> int:
    assets, gdp = _load_panels(args)
    years = _parse_years(args.years)
    rules = [r.strip() for r in args.rules.split(",")]
    models = NULL_MODEL_KINDS if args.models == "all" else [m.strip() for m in args.models.split(",")]
    reports = []
    for yi, year in enumerate(years):
        slice_ = core_slice(assets, gdp, year)
        for ri, rule_name in enumerate(rules):
            rule = ThresholdRule.from_name(rule_name, args.t)
            net = rule.apply(slice_)
            empirical = measure_vector(net)
            for mi, model in enumerate(models):
                spec = _null_spec(model, slice_, rule, child_seed(args.seed, yi, ri, mi),
                                  args.swap_factor, args.correction)
                reports.append(
                    ci_compare(empirical, spec, args.samples, args.alpha,
                               rule=rule.label, year=year, jobs=args.jobs)
                )
    table = ci_table(reports)
    extra = {
        "years": ",".join(str(y) for y in years),
        "rules": ",".join(rules),
        "models": ",".join(models),
        "samples": args.samples,
        "alpha": args.alpha,
    }
    rows = [
        [r["measure"], r["model"], r["rule"], r["score"], r["below"], r["within"],
         r["above"], r["undefined"], r["years"]]
        for r in table
    ]
    _emit_table(
        args, "ci-table", extra,
        ["measure", "model", "rule", "score", "below", "within", "above", "undefined", "years"],
        rows,
    )
    return EXIT_OK


def cmd_lgd(args: argparse.Namespace) -> int:
    assets, gdp = _load_panels(args)
    slice_ = core_slice(assets, gdp, args.year)
    initial = [c.strip() for c in args.initial.split(",")]
    spec = LgdSpec(args.d1, args.d2, args.haircut)
    result = cascade(slice_, set(initial), spec)
    meta = _meta_dict("lgd", args, {
        "year": args.year, "d1": args.d1, "d2": args.d2, "haircut": args.haircut,
    })
    body = {
        "initial": sorted(result.initial),
        "rounds": [sorted(r) for r in result.rounds],
        "defaulted": sorted(result.defaulted),
        "impact": result.impact,
        "num_rounds": result.num_rounds,
    }
    _emit(args.out, _json_payload(meta, {"cascade": body}))
    return EXIT_OK


def _combo_cell(argmax: tuple[tuple[str, ...], ...], cap: int = 20) -> str:
    shown = ["+".join(combo) for combo in argmax[:cap]]
    if len(argmax) > cap:
        shown.append(f"...{len(argmax) - cap} more")
    return "|".join(shown)


def cmd_lgd_sweep(args: argparse.Namespace) -> int:
    assets, gdp = _load_panels(args)
    years = _parse_years(args.years)
    grid1 = tuple(float(v) for v in args.d1_grid.split(","))
    grid2 = tuple(float(v) for v in args.d2_grid.split(","))
    summaries = []
    for year in years:
        slice_ = core_slice(assets, gdp, year)
        summaries.extend(sweep_grid(slice_, grid1, grid2, args.k_max, args.haircut))
    ordered = severity_sorted(summaries)
    extra = {
        "years": ",".join(str(y) for y in years),
        "d1_grid": args.d1_grid,
        "d2_grid": args.d2_grid,
        "k_max": args.k_max,
        "haircut": args.haircut,
    }
    rows = [
        [s.year, s.spec.d1, s.spec.d2, s.k, s.mean, s.worst5_mean, s.worst, _combo_cell(s.argmax)]
        for s in ordered
    ]
    _emit(args.out, _csv_payload(
        _meta_header("lgd-sweep", args, extra),
        ["year", "d1", "d2", "k", "mean", "worst5", "worst", "argmax_combos"],
        rows,
    ))
    if args.ranking_out:
        ranking = influence_ranking(summaries, args.top_n)
        rank_rows = [
            [k, "+".join(combo), count]
            for k, pairs in ranking.items()
            for combo, count in pairs
        ]
        _emit(args.ranking_out, _csv_payload(
            _meta_header("lgd-sweep/ranking", args, extra),
            ["k", "combo", "count"],
            rank_rows,
        ))
    return EXIT_OK


def cmd_pigs_grid(args: argparse.Namespace) -> int:
    assets, gdp = _load_panels(args)
    slice_ = core_slice(assets, gdp, args.year)
    group = tuple(c.strip() for c in args.group.split(","))
    d1_values = np.linspace(0.0, args.d1_max, args.d1_points)
    d2_values = np.linspace(0.0, args.d2_max, args.d2_points)
    cells = fine_grid(slice_, group, d1_values, d2_values, haircut=args.haircut)
    extra = {
        "year": args.year,
        "group": ",".join(group),
        "d1_max": args.d1_max,
        "d1_points": args.d1_points,
        "d2_max": args.d2_max,
        "d2_points": args.d2_points,
        "haircut": args.haircut,
    }
    rows = [["+".join(c.subset), c.d1, c.d2, c.impact, c.rounds] for c in cells]
    _emit(args.out, _csv_payload(
        _meta_header("pigs-grid", args, extra),
        ["subset", "d1", "d2", "impact", "rounds"],
        rows,
    ))
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, years: bool = False) -> None:
    parser.add_argument("--assets", help=f"asset CSV path, '-' for stdin (default: ${ENV_DATA_DIR}/assets.csv)")
    parser.add_argument("--gdp", help=f"gdp CSV path, '-' for stdin (default: ${ENV_DATA_DIR}/gdp.csv)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed (default %(default)s)")
    parser.add_argument("--jobs", type=int, default=1, help="max parallel workers (default %(default)s)")
    parser.add_argument("--out", default="-", help="output path, '-' for stdout (default)")
    if years:
        parser.add_argument("--years", required=True, help="year list/range, e.g. 2007 or 2001-2009")
    else:
        parser.add_argument("--year", type=int, required=True, help="data year")


def _add_rule(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rule", choices=("A", "B"), default="A",
                        help="thresholding rule (default %(default)s)")
    parser.add_argument("--t", type=float, default=DEFAULT_GDP_THRESHOLD,
                        help="rule-B GDP fraction threshold (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finnet",
        description="Cross-border financial network analysis pipeline",
    )
    parser.add_argument("--version", action="version", version=f"finnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="threshold one year into a binary network")
    _add_common(p)
    _add_rule(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("export", help="export a network with exposure weight classes")
    _add_common(p)
    _add_rule(p)
    p.add_argument("--format", choices=("edge-list", "dot"), default="edge-list")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("fit-lognormal", help="fit the censored log-normal asset model")
    _add_common(p, years=True)
    p.add_argument("--pooled", action="store_true", help="one fit over all years")
    p.add_argument("--correction", type=float, default=DEFAULT_SIGMA_CORRECTION,
                   help="sigma correction factor (default %(default)s)")
    p.set_defaults(func=cmd_fit_lognormal)

    p = sub.add_parser("gen-null", help="sample networks from a null-model family")
    _add_common(p)
    _add_rule(p)
    p.add_argument("--model", choices=NULL_MODEL_KINDS, required=True)
    p.add_argument("--count", type=int, default=1, help="number of samples (default %(default)s)")
    p.add_argument("--swap-factor", type=int, default=DEFAULT_SWAP_FACTOR)
    p.add_argument("--correction", type=float, default=DEFAULT_SIGMA_CORRECTION)
    p.set_defaults(func=cmd_gen_null)

    p = sub.add_parser("knockout", help="error/attack knockout curves")
    _add_common(p, years=True)
    _add_rule(p)
    p.add_argument("--strategy", choices=("error", "attack"), required=True)
    p.add_argument("--model", choices=("empirical",) + NULL_MODEL_KINDS, default="empirical")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS,
                   help="knockout traces per network (default %(default)s)")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                   help="null ensemble size used by interval comparisons (default %(default)s)")
    p.add_argument("--swap-factor", type=int, default=DEFAULT_SWAP_FACTOR)
    p.add_argument("--correction", type=float, default=DEFAULT_SIGMA_CORRECTION)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_knockout)

    p = sub.add_parser("ci-table", help="confidence-interval comparison table")
    _add_common(p, years=True)
    p.add_argument("--rules", default="A,B", help="comma list of rules (default %(default)s)")
    p.add_argument("--t", type=float, default=DEFAULT_GDP_THRESHOLD)
    p.add_argument("--models", default="all", help="comma list of null models or 'all'")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--swap-factor", type=int, default=DEFAULT_SWAP_FACTOR)
    p.add_argument("--correction", type=float, default=DEFAULT_SIGMA_CORRECTION)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_ci_table)

    p = sub.add_parser("lgd", help="single loss-given-default cascade trace")
    _add_common(p)
    p.add_argument("--initial", required=True, help="comma list of initially defaulting countries")
    p.add_argument("--d1", type=float, required=True, help="portfolio-fraction threshold")
    p.add_argument("--d2", type=float, required=True, help="GDP-fraction threshold")
    p.add_argument("--haircut", type=float, default=1.0)
    p.set_defaults(func=cmd_lgd)

    p = sub.add_parser("lgd-sweep", help="impact summaries over a threshold grid")
    _add_common(p, years=True)
    p.add_argument("--d1-grid", default=",".join(str(v) for v in COARSE_THRESHOLDS))
    p.add_argument("--d2-grid", default=",".join(str(v) for v in COARSE_THRESHOLDS))
    p.add_argument("--k-max", type=int, default=3, choices=(1, 2, 3))
    p.add_argument("--haircut", type=float, default=1.0)
    p.add_argument("--ranking-out", help="optional CSV of influence rankings")
    p.add_argument("--top-n", type=int, default=10)
    p.set_defaults(func=cmd_lgd_sweep)

    p = sub.add_parser("pigs-grid", help="fine threshold grid for a country group")
    _add_common(p)
    p.add_argument("--group", required=True, help="comma list of group members")
    p.add_argument("--d1-max", type=float, default=FINE_D1_MAX)
    p.add_argument("--d1-points", type=int, default=FINE_D1_POINTS)
    p.add_argument("--d2-max", type=float, default=FINE_D2_MAX)
    p.add_argument("--d2-points", type=int, default=FINE_D2_POINTS)
    p.add_argument("--haircut", type=float, default=1.0)
    p.set_defaults(func=cmd_pigs_grid)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_DATA_ERROR
    except (DataError, KeyError, ValueError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
