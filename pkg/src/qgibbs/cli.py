"""Command-line entry point: ``qgibbs {dist,phase,compare,asymp,models,cache}``.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .errors import DomainError, ResourceLimitError
from .gibbs import gibbs_pmf, parse_q, sample_statistic
from .io import (
    TableCache,
    format_decimal,
    format_exact,
    format_q_c,
    report_to_dict,
    write_csv,
    write_output,
)
from .laws import law_params
from .models import CATALOG, MAX_TABLE_N, UnknownModelError, coefficient_table, model_spec, parse_model, single_row_table
from .phase import distance_to_limit, predicted_mean, predicted_partition_asymptotics, partition_ratio, regime_report

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _n_list(text: str) -> list:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty n-list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qgibbs", description="Exact Gibbs distributions of boundary statistics in lattice models.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_q=True, n_mode="single"):
        p.add_argument("--model", required=True, help="model spec, e.g. dyck-excursion or wall-watermelon:2")
        if needs_q:
            p.add_argument("--q", required=True, help='weight as "3/2" or "1.5"')
        if n_mode == "single":
            p.add_argument("--n", type=int, required=True)
        elif n_mode == "list":
            p.add_argument("--n-list", type=_n_list, required=True, help="ascending sizes, e.g. 25,50,100")
        p.add_argument("--order", type=int, help="truncation order N; every requested n must be <= N")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--exact", action="store_true", help="write exact rationals as num/den")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--cache-dir", help="coefficient-table cache (default $QGIBBS_CACHE_DIR)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("dist", help="exact pmf of the statistic")
    common(p)
    p.add_argument("--samples", type=int, default=0, help="also draw this many samples and add an empirical column")
    p = sub.add_parser("phase", help="regime, limit law and scaling")
    common(p, n_mode=None)
    p = sub.add_parser("compare", help="distance to the limit law along an n-list")
    common(p, n_mode="list")
    p = sub.add_parser("asymp", help="exact versus predicted partition function and mean")
    common(p, n_mode="list")
    p = sub.add_parser("models", help="list the model catalog")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p = sub.add_parser("cache", help="prebuild a coefficient table in the cache")
    common(p, needs_q=False, n_mode=None)
    return parser


# ---------------------------------------------------------------------------


def _check_order(args, ns):
    if args.order is not None:
        if args.order < 0:
            raise DomainError("--order must be nonnegative")
        for n in ns:
            if n > args.order:
                raise DomainError(f"n={n} exceeds the truncation order N={args.order}")
    for n in ns:
        if n < 0:
            raise DomainError("n must be nonnegative")


def _table_source(args, model, ns):
    """Function n -> table holding row n; cached full tables when a cache dir is set."""
    cache_dir = args.cache_dir or TableCache.default_directory()
    if cache_dir:
        top = args.order if args.order is not None else max(ns)
        if top > MAX_TABLE_N:
            raise ResourceLimitError(f"cached tables are limited to N <= {MAX_TABLE_N}")
        cache = TableCache(cache_dir)
        table = cache.get_or_build(model.spec, top, lambda: coefficient_table(model, top))
        return lambda n: table
    return lambda n: single_row_table(model, n)


def _map(args, fn, items):
    if args.threads and args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _fmt(args, value) -> str:
    return format_exact(value) if args.exact else format_decimal(value)


def _emit(args, header, rows, stdout):
    if (args.format or "csv") == "json":
        records = [dict(zip(header, r)) for r in rows]
        text = json.dumps({"format_version": 1, "rows": records}, indent=2)
    else:
        text = write_csv(header, rows)
    write_output(text, args.out, stdout)


def cmd_dist(args, stdout):
    model = parse_model(args.model)
    q = parse_q(args.q)
    _check_order(args, [args.n])
    table = _table_source(args, model, [args.n])(args.n)
    dist = gibbs_pmf(table, args.n, q)
    header = ["model", "n", "q", "k", "prob"]
    if args.exact:
        header.append("weight_exact")
    empirical = None
    if args.samples:
        draws = sample_statistic(dist, args.seed, args.samples)
        empirical = {k: 0 for k in dist.support}
        for d in draws:
            empirical[d] += 1
        header.append("empirical")
    rows = []
    for k, w in zip(dist.support, dist.weights):
        prob = Fraction(w) / dist.partition
        row = [model.spec, args.n, format_exact(q), k, _fmt(args, prob)]
        if args.exact:
            row.append(format_exact(table.row(args.n)[k] * q**k))
        if empirical is not None:
            row.append(format_decimal(Fraction(empirical[k], args.samples)))
        rows.append(row)
    _emit(args, header, rows, stdout)


def cmd_phase(args, stdout):
    model = parse_model(args.model)
    report = regime_report(model, parse_q(args.q))
    data = report_to_dict(report)
    if (args.format or "json") == "csv":
        law = data["law"]
        row = [data["model"], data["q"], data["q_c"], data["regime"], law["name"], json.dumps(law, sort_keys=True)]
        text = write_csv(["model", "q", "q_c", "regime", "law", "law_params"], [row])
    else:
        text = json.dumps(data, indent=2)
    write_output(text, args.out, stdout)


def _law_label(law) -> str:
    params = ",".join(f"{k}={v}" for k, v in law_params(law).items())
    return f"{law.name}({params})"


def cmd_compare(args, stdout):
    model = parse_model(args.model)
    q = parse_q(args.q)
    ns = args.n_list
    if ns != sorted(ns):
        raise UsageError("--n-list must be ascending")
    _check_order(args, ns)
    source = _table_source(args, model, ns)

    def one(n):
        metric, value, law = distance_to_limit(gibbs_pmf(source(n), n, q), model)
        return [n, metric, format_decimal(value), _law_label(law)]

    _emit(args, ["n", "metric", "value", "law"], _map(args, one, ns), stdout)


def cmd_asymp(args, stdout):
    model = parse_model(args.model)
    q = parse_q(args.q)
    ns = args.n_list
    if ns != sorted(ns):
        raise UsageError("--n-list must be ascending")
    _check_order(args, ns)
    source = _table_source(args, model, ns)

    def one(n):
        dist = gibbs_pmf(source(n), n, q)
        f = dist.partition_value
        mean = dist.mean()
        mp = predicted_mean(model, q, n)
        return [
            n,
            _fmt(args, f),
            format_decimal(predicted_partition_asymptotics(model, q, n)),
            format_decimal(partition_ratio(model, q, n, f)),
            _fmt(args, mean),
            format_decimal(mp),
            format_decimal(Fraction(mean) / Fraction(mp)),
        ]

    header = ["n", "f_exact", "f_predicted", "ratio", "mean_exact", "mean_predicted", "mean_ratio"]
    _emit(args, header, _map(args, one, ns), stdout)


def cmd_models(args, stdout):
    header = ["model", "q_c", "size_unit", "statistic_offset", "extended"]
    rows = []
    for m in CATALOG:
        c = model_spec(m).constants
        rows.append([m.spec, format_q_c(c.q_c), c.size_unit, c.statistic_offset, int(c.has_prefactor_M)])
    _emit(args, header, rows, stdout)


def cmd_cache(args, stdout):
    model = parse_model(args.model)
    if args.order is None:
        raise UsageError("cache needs --order")
    if args.order < 0:
        raise DomainError("--order must be nonnegative")
    if args.order > MAX_TABLE_N:
        raise ResourceLimitError(f"tables are limited to N <= {MAX_TABLE_N}")
    cache_dir = args.cache_dir or TableCache.default_directory()
    if not cache_dir:
        raise UsageError("cache needs --cache-dir or $QGIBBS_CACHE_DIR")
    cache = TableCache(cache_dir)
    cache.get_or_build(model.spec, args.order, lambda: coefficient_table(model, args.order))
    stdout.write(str(cache.path(model.spec, args.order)) + "\n")


COMMANDS = {
    "dist": cmd_dist,
    "phase": cmd_phase,
    "compare": cmd_compare,
    "asymp": cmd_asymp,
    "models": cmd_models,
    "cache": cmd_cache,
}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args, stdout)
    except (UsageError, UnknownModelError) as exc:
        stderr.write(f"qgibbs: usage error: {exc}\n")
        return EXIT_USAGE
    except ResourceLimitError as exc:
        stderr.write(f"qgibbs: resource limit: {exc}\n")
        return EXIT_RESOURCE
    except DomainError as exc:
        stderr.write(f"qgibbs: domain error: {exc}\n")
        return EXIT_DOMAIN
    return EXIT_OK


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
