"""Command-line front end: ``bmchannel <command> [options]``.

Exit status: 0 when every assertion column passes, 1 for usage errors,
2 when an assertion column fails, 3 on a numerical fault.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

from . import experiments as ex
from .errors import ChannelError, InvalidArgument, NumericalFault, UnsupportedScenario

EXIT_OK, EXIT_USAGE, EXIT_ASSERT, EXIT_FAULT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    if hasattr(v, "item"):
        return _fmt(v.item())
    return str(v)


def _to_bits(table: ex.ResultTable):
    rows = []
    for row in table.rows:
        row = dict(row)
        for c in table.nats:
            if isinstance(row.get(c), (int, float)) and not isinstance(row.get(c), bool):
                row[c] = row[c] / math.log(2.0)
        rows.append(row)
    return rows


def render(table: ex.ResultTable, fmt: str = "csv", bits: bool = False) -> str:
    """CSV (17 significant digits, header row) or JSON text for ``table``."""
    rows = _to_bits(table) if bits else table.rows
    if fmt == "json":
        def clean(v):
            if hasattr(v, "item"):
                v = v.item()
            if isinstance(v, float) and not math.isfinite(v):
                return None
            return v
        doc = {"experiment": table.experiment, "units": "bits" if bits else "nats", "columns": table.columns,
               "rows": [{c: clean(r.get(c)) for c in table.columns} for r in rows], "passed": table.passed}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in table.columns])
    return buf.getvalue()


def _global_flags(p):
    g = p.add_argument_group("global options")
    g.add_argument("--config", metavar="PATH", help="key = value file; flags override it")
    g.add_argument("--seed", type=int, default=None, metavar="U64", help="random seed (default 42)")
    g.add_argument("--trials", type=int, default=None, metavar="N", help="Monte Carlo trials (default 20000)")
    g.add_argument("--workers", type=int, default=None, metavar="N",
                   help="worker threads (default: logical cores); never changes results")
    g.add_argument("--out", metavar="PATH", help="write the table here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--bits", action="store_true", help="report information in bits instead of nats")
    g.add_argument("--timing", action="store_true", help="report wall time on stderr")


def _experiment_flags(p, *names):
    specs = {
        "policy": dict(help="catalog policy: zero, constant, message, ramp, linear, clamped, modulated, sinusoidal"),
        "alphabet": dict(type=int, help="message alphabet size"),
        "T": dict(type=float, help="horizon"),
        "grid_sizes": dict(help="comma-separated grid sizes, e.g. 4,8,16"),
        "variants": dict(help="comma-separated Euler-Maruyama variants"),
        "variant": dict(help="sampled_exact or an Euler-Maruyama variant"),
        "method": dict(choices=("both", "grid_density", "directed")),
        "c": dict(type=float, help="message gain"),
        "kappa": dict(type=float, help="feedback gain"),
        "bound": dict(type=float, help="feedback clamp level"),
        "freq": dict(type=float, help="carrier frequency of the sinusoidal policy"),
        "a": dict(type=float, help="OU mean-reversion rate"),
        "a2": dict(type=float, help="second user's mean-reversion rate"),
        "a_list": dict(help="comma-separated mean-reversion sweep"),
        "P": dict(type=float, help="power"),
        "P1": dict(type=float), "P2": dict(type=float),
        "snr_list": dict(help="comma-separated SNR sweep"),
        "h": dict(type=float, help="finite-difference step in snr"),
        "n": dict(type=int, help="grid size"),
        "scenario": dict(choices=("ou", "binary")),
        "deltas": dict(help="comma-separated round lengths"),
        "steps": dict(type=int, help="number of rounds"),
    }
    for name in names:
        flag = "--" + name.replace("_", "-")
        kw = dict(specs[name])
        p.add_argument(flag, dest=name, default=None, **kw)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bmchannel", description="Continuous-time white Gaussian channel laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pc = sub.add_parser("capacity", help="closed-form capacities and regions")
    csub = pc.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("point", "mac", "bc", "bc-degraded", "sk-gain"):
        q = csub.add_parser(kind)
        _global_flags(q)
        if kind in ("point", "bc", "bc-degraded", "sk-gain"):
            q.add_argument("--power", type=float, required=True)
        if kind == "point":
            q.add_argument("--bandwidth", type=float)
        if kind == "mac":
            q.add_argument("--powers", required=True, help="comma-separated powers")
        if kind == "bc":
            q.add_argument("--snr", required=True, help="comma-separated receiver SNRs")
        if kind == "bc-degraded":
            q.add_argument("--n1", type=float, required=True)
            q.add_argument("--n2", type=float, required=True)
            q.add_argument("--feedback", action="store_true")

    pm = sub.add_parser("mi", help="information estimates")
    msub = pm.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    q = msub.add_parser("estimate")
    _global_flags(q)
    _experiment_flags(q, "policy", "alphabet", "T", "n", "variant", "method", "c", "kappa", "bound", "freq")

    pv = sub.add_parser("converge", help="convergence suites")
    vsub = pv.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("sampling", "approx", "mmse"):
        q = vsub.add_parser(kind)
        _global_flags(q)
        _experiment_flags(q, "policy", "alphabet", "T", "grid_sizes", "variants", "c", "kappa", "bound", "freq")

    q = sub.add_parser("mac-demo", help="two-user OU MAC information rates")
    _global_flags(q)
    _experiment_flags(q, "a_list", "a2", "P1", "P2", "T")

    q = sub.add_parser("bc-demo", help="I-MMSE monotonicity table")
    _global_flags(q)
    _experiment_flags(q, "scenario", "a", "P", "c", "T", "snr_list", "h")

    q = sub.add_parser("sk-series", help="feedback rate series over round lengths")
    _global_flags(q)
    _experiment_flags(q, "P", "deltas", "steps")
    return parser


_CONFIG_KEYS = {f for f in ex.FIELD_TYPES}

# demo defaults that differ from the shared config defaults
_DEMO_DEFAULTS = {"mac-demo": {"T": 5.0}, "bc-demo": {"T": 5.0, "scenario": "ou"}}


def _parse_list(text):
    return [float(p) for p in text.replace(" ", ",").split(",") if p]


def _config_from(args) -> ex.ExperimentConfig:
    file_values = ex.read_config_file(args.config) if args.config else {}
    values = dict(_DEMO_DEFAULTS.get(args.command, {}))
    values.update(file_values)
    flags = {k: v for k, v in vars(args).items() if k in _CONFIG_KEYS and v is not None}
    return ex.make_config(values, flags)


def run(args) -> ex.ResultTable:
    if args.command == "capacity":
        kw = {}
        if getattr(args, "powers", None):
            kw["powers"] = _parse_list(args.powers)
        if getattr(args, "snr", None):
            kw["snr"] = _parse_list(args.snr)
        return ex.capacity_query(args.kind, power=getattr(args, "power", None),
                                 bandwidth=getattr(args, "bandwidth", None), n1=getattr(args, "n1", None),
                                 n2=getattr(args, "n2", None), feedback=getattr(args, "feedback", False), **kw)
    cfg = _config_from(args)
    if args.out is None:
        args.out = cfg.out
    if args.command == "mi":
        return ex.mi_estimate(cfg)
    if args.command == "converge":
        return ex.SUITES[args.kind](cfg)
    if args.command == "mac-demo":
        return ex.mac_demo(cfg)
    if args.command == "bc-demo":
        return ex.bc_demo(cfg)
    return ex.sk_series(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if not e.code else EXIT_USAGE
    start = time.perf_counter()
    try:
        table = run(args)
    except (InvalidArgument, UnsupportedScenario) as e:
        print(f"bmchannel: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFault as e:
        print(f"bmchannel: numerical fault: {e}", file=sys.stderr)
        return EXIT_FAULT
    except ChannelError as e:
        print(f"bmchannel: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"bmchannel: {e}", file=sys.stderr)
        return EXIT_USAGE
    text = render(table, args.format, args.bits)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.timing:
        print(f"wall_time_s={time.perf_counter() - start:.3f}", file=sys.stderr)
    for i, col in table.failures():
        print(f"bmchannel: assertion {col} failed in row {i}", file=sys.stderr)
    return EXIT_OK if table.passed else EXIT_ASSERT


if __name__ == "__main__":
    sys.exit(main())
