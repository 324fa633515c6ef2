"""Command-line front end.

Verbs: ``mine`` (pattern mining and FSM), ``kernel`` (SpGEMM/TTV/TTM),
``sweep`` (timing over a range of IU counts or stream-cache bandwidths).
A hidden ``oracle`` verb runs the brute-force reference for debugging.

Machine-readable output goes to stdout as JSON, a short human summary to
stderr. Exit codes: 0 success, 2 usage error, 3 bad input data, 4 internal
error. ``STREAMGPM_CONFIG`` names a default simulator config file.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Sequence

from . import __version__
from .graph import GraphFormatError, load_edge_list, load_labels, load_matrix, load_tensor
from .timing import ConfigError, SimConfig, load_config

SCHEMA_VERSION = 1
CONFIG_ENV = "STREAMGPM_CONFIG"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

IUS_AXIS = (1, 2, 4, 8, 16)
BW_AXIS = (2, 4, 8, 16, 32)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 already; keep the message format
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _finite(x: Any) -> Any:
    if isinstance(x, float) and not math.isfinite(x):
        raise DataError("non-finite value in report")
    if isinstance(x, dict):
        return {str(k): _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    return x


def _config(args) -> SimConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = load_config(path) if path else SimConfig()
    over = {}
    if getattr(args, "ius", None) is not None:
        over["n_ius"] = args.ius
    if getattr(args, "scache_bw", None) is not None:
        over["s_cache_bandwidth"] = args.scache_bw
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        over[k] = v
    return cfg.replace(**over) if over else cfg


def _load_graph(path: str, labels: str | None):
    try:
        g = load_edge_list(path)
        if labels:
            g = g.with_labels(load_labels(labels), by_original_id=True)
    except OSError as e:
        raise DataError(f"cannot read {e.filename}: {e.strerror}") from None
    except (GraphFormatError, ValueError) as e:
        raise DataError(f"{path}: {e}") from None
    return g


def _cdf(hist: dict[int, int]) -> list[list[float]]:
    from .isa.trace import length_cdf

    return [[k, p] for k, p in length_cdf(hist)]


def _report(kind: str, name: str, dataset: str, cfg: SimConfig | None, **body) -> dict:
    rep = {"schema_version": SCHEMA_VERSION, "version": __version__, "kind": kind, "name": name,
           "dataset": dataset, "config": cfg.to_dict() if cfg is not None else None}
    rep.update(body)
    rep.setdefault("warnings", [])
    return rep


def _stats(stats) -> dict | None:
    if stats is None:
        return None
    d = stats.to_dict()
    d.pop("histogram", None)
    return d


def _mining_report(res, dataset: str, cfg: SimConfig | None, extra: dict | None = None) -> dict:
    body: dict[str, Any] = {
        "nested": res.nested,
        "count": res.count if res.counts else None,
        "counts": res.counts,
        "trace_length": res.trace_length,
        "stats": _stats(res.stats),
        "cdf": _cdf(res.histogram),
        "warnings": list(res.warnings),
    }
    if res.audit is not None:
        body["lifecycle"] = {"ok": res.audit.ok, "max_live": res.audit.high_water, "fallback_ops": res.audit.fallback_ops}
    if res.frequent is not None:
        body["frequent"] = [{"pattern": {"k": p[0], "labels": list(p[1]), "edges": [list(e) for e in p[2]]},
                             "support": s} for p, s in res.frequent]
        body["closure_violations"] = len(res.closure_violations or [])
    if extra:
        body.update(extra)
    return _report("mine", res.app, dataset, cfg, **body)


def _run_mine(args, cfg: SimConfig | None):
    from .apps import APPS, count_pattern, fsm, mine_pattern
    from .compiler import PatternError, load_pattern

    g = _load_graph(args.graph, args.labels)
    app = args.app
    if app.upper() in ("FSM", "SFSM"):
        metric = args.metric or ("embedding" if app.upper() == "SFSM" else "mni")
        if args.threshold is None:
            raise UsageError("FSM needs --threshold")
        if g.labels is None:
            raise DataError("frequent subgraph mining needs vertex labels (label lines or --labels)")
        try:
            return fsm(g, metric, args.threshold)
        except ValueError as e:
            raise UsageError(str(e)) from None
    if app.upper() in APPS:
        return count_pattern(g, app.upper(), nested=args.nested, timing=args.timing, config=cfg,
                             partitions=args.partitions, workers=args.partitions)
    if os.path.exists(app):
        try:
            p = load_pattern(app, mode=args.mode or "edge", name=os.path.basename(app))
        except (PatternError, ValueError) as e:
            raise DataError(f"{app}: {e}") from None
        return mine_pattern(g, [p], app=p.name, nested=args.nested, timing=args.timing, config=cfg,
                            partitions=args.partitions, workers=args.partitions)
    raise UsageError(f"unknown app {app!r}; choose from {', '.join(APPS)}, FSM, sFSM or a pattern file")


def cmd_mine(args) -> list[dict]:
    cfg = _config(args) if args.timing else None
    res = _run_mine(args, cfg)
    return [_mining_report(res, args.graph, cfg)]


def _load_operand(path: str, kind: str):
    try:
        if path.endswith(".tns"):
            return load_tensor(path)
        if path.endswith(".mtx"):
            return load_matrix(path)
        # plain vector: whitespace-separated dense values
        import numpy as np

        with open(path, encoding="utf-8") as fh:
            return np.asarray([float(x) for x in fh.read().split()])
    except OSError as e:
        raise DataError(f"cannot read {e.filename}: {e.strerror}") from None
    except (GraphFormatError, ValueError) as e:
        raise DataError(f"{path}: {e}") from None


def cmd_kernel(args) -> list[dict]:
    from .apps import ShapeError, run_kernel

    a = _load_operand(args.a, args.kind)
    b = _load_operand(args.b, args.kind)
    cfg = _config(args) if args.timing else None
    try:
        res = run_kernel(args.kind, a, b, timing=args.timing, config=cfg)
    except (ShapeError, TypeError, AttributeError) as e:
        raise DataError(f"operands do not fit {args.kind}: {e}") from None
    out = res.output
    if hasattr(out, "coo") and getattr(out, "csr_indptr", None) is not None:
        r, c, v = out.coo()
        result = {"shape": list(out.shape), "nnz": int(out.nnz),
                  "entries": [[int(i), int(j), float(x)] for i, j, x in zip(r, c, v)]}
    else:
        coords, v = out.coo()
        result = {"shape": list(out.shape), "nnz": int(out.nnz),
                  "entries": [[*map(int, ijk), float(x)] for ijk, x in zip(coords.tolist(), v.tolist())]}
    from .isa.trace import stream_length_histogram

    return [_report("kernel", args.kind, f"{args.a},{args.b}", cfg, result=result,
                    vinter_ops=res.vinter_ops, stats=_stats(res.stats),
                    cdf=_cdf(stream_length_histogram(res.trace)))]


def cmd_sweep(args) -> list[dict]:
    from .apps import APPS, mine_pattern, app_patterns
    from .timing import simulate

    if not args.timing:
        raise UsageError("sweep needs timing; drop --no-timing")
    if args.app.upper() not in APPS:
        raise UsageError(f"sweep supports {', '.join(APPS)}")
    base = _config(args)
    points = list(args.points or (IUS_AXIS if args.axis == "ius" else BW_AXIS))
    key = "n_ius" if args.axis == "ius" else "s_cache_bandwidth"
    g = _load_graph(args.graph, args.labels)
    res = mine_pattern(g, app_patterns(args.app.upper()), app=args.app.upper(), nested=args.nested,
                       keep_trace=True)
    trace = res.trace
    cfgs = [base.replace(**{key: p}) for p in points]
    with ThreadPoolExecutor(max_workers=max(1, min(args.jobs, len(cfgs)))) as pool:
        stats = list(pool.map(lambda c: simulate(trace, c), cfgs))
    res.trace = None
    reports = []
    for p, cfg, st in zip(points, cfgs, stats):
        res.stats = st
        reports.append(_mining_report(res, args.graph, cfg, {"axis": args.axis, "point": p}))
    return reports


def cmd_oracle(args) -> list[dict]:
    from .apps import APPS, app_patterns
    from .compiler import load_pattern
    from .oracle import oracle_count, oracle_fsm

    g = _load_graph(args.graph, args.labels)
    try:
        if args.app.upper() in ("FSM", "SFSM"):
            if args.threshold is None:
                raise UsageError("FSM needs --threshold")
            metric = args.metric or ("embedding" if args.app.upper() == "SFSM" else "mni")
            table = oracle_fsm(g, args.threshold, metric)
            return [_report("oracle", args.app, args.graph, None,
                            frequent=[[repr(p), s] for p, s in sorted(table.items())])]
        if args.app.upper() in APPS:
            pats = app_patterns(args.app.upper())
        else:
            pats = [load_pattern(args.app, mode=args.mode or "edge")]
        counts = {p.name or "pattern": oracle_count(g, p) for p in pats}
    except (ValueError, OSError) as e:
        raise DataError(str(e)) from None
    return [_report("oracle", args.app, args.graph, None, counts=counts, count=sum(counts.values()))]


def _add_timing_flags(p: argparse.ArgumentParser, default: bool) -> None:
    p.add_argument("--timing", dest="timing", action="store_true", default=default,
                   help="replay the trace through the timing model" + (" (default)" if default else ""))
    p.add_argument("--no-timing", dest="timing", action="store_false", help="functional execution only")
    p.add_argument("--ius", type=int, help="number of intersection units")
    p.add_argument("--scache-bw", type=int, help="stream-cache bandwidth in keys per cycle")
    p.add_argument("--config", help=f"simulator key=value config file (default: ${CONFIG_ENV})")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key (repeatable)")


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("graph", help="edge list (SNAP style; 'label v l' lines attach labels)")
    p.add_argument("app", help="T, TC, TT, TM, 4C, 5C, FSM, sFSM or a pattern file")
    p.add_argument("--labels", help="label sidecar file: '<vertex> <label>' per line")
    p.add_argument("--nested", dest="nested", action="store_true", default=True,
                   help="use S_NESTINTER where the schedule allows it (default)")
    p.add_argument("--no-nested", dest="nested", action="store_false", help="flat stream code only")
    p.add_argument("--mode", choices=("edge", "vertex"), help="matching mode for a pattern file")
    p.add_argument("--threshold", type=int, help="FSM support threshold")
    p.add_argument("--metric", choices=("mni", "embedding"), help="FSM support metric")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="streamgpm", description="Stream-ISA simulator for graph pattern mining.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--quiet", action="store_true", help="no summary table on stderr")
    sub = ap.add_subparsers(dest="verb", metavar="{mine,kernel,sweep}", parser_class=_Parser)
    sub.required = True

    m = sub.add_parser("mine", help="count a pattern or mine frequent subgraphs")
    _add_graph_flags(m)
    _add_timing_flags(m, default=False)
    m.add_argument("--partitions", type=int, default=1, help="split the outer loop over this many threads")
    m.set_defaults(fn=cmd_mine)

    k = sub.add_parser("kernel", help="sparse kernels built on S_VINTER")
    k.add_argument("kind", choices=("spgemm", "ttv", "ttm"))
    k.add_argument("a", help="first operand (.mtx matrix or .tns tensor)")
    k.add_argument("b", help="second operand (.mtx matrix, .tns tensor or a whitespace-separated vector)")
    _add_timing_flags(k, default=False)
    k.set_defaults(fn=cmd_kernel)

    s = sub.add_parser("sweep", help="timing over IU count or stream-cache bandwidth")
    _add_graph_flags(s)
    _add_timing_flags(s, default=True)
    s.add_argument("--axis", choices=("ius", "scache-bw"), required=True)
    s.add_argument("--points", type=int, nargs="+", help="axis values (default: full range)")
    s.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="parallel simulations")
    s.set_defaults(fn=cmd_sweep)

    o = sub.add_parser("oracle")  # hidden: brute-force reference for debugging
    _add_graph_flags(o)
    o.set_defaults(fn=cmd_oracle)
    for p in (m, k, s, o):
        p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                       help="no summary table on stderr")
    sub._choices_actions = [a for a in sub._choices_actions if a.dest != "oracle"]
    return ap


def _summary(reports: list[dict]) -> str:
    rows = [("name", "point", "count", "cycles", "isect%")]
    for r in reports:
        st = r.get("stats") or {}
        frac = st.get("intersection_fraction")
        count = r.get("count")
        if count is None and "frequent" in r:
            count = f"{len(r['frequent'])} frequent"
        if count is None and "result" in r:
            count = f"nnz {r['result']['nnz']}"
        rows.append((str(r["name"]), str(r.get("point", "")), str(count),
                     str(st.get("total_cycles", "")), f"{100 * frac:.1f}" if frac is not None else ""))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
    for r in reports:
        lines += [f"warning: {w}" for w in r.get("warnings", [])]
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if getattr(args, "ius", None) is not None and args.ius < 1:
            raise UsageError("--ius must be positive")
        reports = args.fn(args)
        out = reports[0] if len(reports) == 1 and args.verb != "sweep" else reports
        print(json.dumps(_finite(out), indent=2, sort_keys=False, allow_nan=False))
        if not getattr(args, "quiet", False):
            print(_summary(reports), file=sys.stderr)
        return EXIT_OK
    except UsageError as e:
        print(f"streamgpm: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"streamgpm: bad configuration: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"streamgpm: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except Exception as e:  # pragma: no cover - defensive
        print(f"streamgpm: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
