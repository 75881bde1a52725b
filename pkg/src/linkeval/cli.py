"""Command-line entry point: stats, estimate, sample, simulate, qc, serve,
audit-report.

Outputs are machine-readable JSON on stdout (human tables behind
``--pretty``) and deterministic given ``--seed``; when a command needs a
seed and none is given, one is drawn and echoed on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .error_metrics import ErrorTable, error_table
from .estimators import (
    ALL_METRICS,
    EstimationError,
    build_target,
    estimates_to_json,
    ratio_estimate,
)
from .labeling import audit_frequencies, load_session, qc_check, tags_from_csv
from .model import AttributeTable, Clustering
from .sampling import (
    DESIGN_PPS,
    DESIGN_UNIFORM,
    ClusterDraw,
    ClusterSample,
    sample_pps,
    sample_uniform,
)
from .simulate import all_but_one_match, generate_rldata_like, run_simulation
from .summary import DEFAULT_HILL_GRID, compute_summary

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

_DESIGNS = {"pps": DESIGN_PPS, DESIGN_PPS: DESIGN_PPS, "uniform": DESIGN_UNIFORM, DESIGN_UNIFORM: DESIGN_UNIFORM}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage text on stderr, validation exit code
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = int.from_bytes(os.urandom(4), "big")
        print(f"seed not given; drew {seed}", file=sys.stderr)
    if seed < 0:
        raise ValueError("--seed must be nonnegative")
    return seed


def _parse_hill_grid(text: str) -> tuple[float, ...]:
    grid = []
    for part in text.split(","):
        part = part.strip().lower()
        if not part:
            continue
        grid.append(math.inf if part in ("inf", "infinity") else float(part))
    if not grid:
        raise ValueError("--hill-grid is empty")
    return tuple(grid)


def _emit(text: str, json_out: str | None) -> None:
    if json_out:
        Path(json_out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _dump(obj: dict | list, json_out: str | None) -> None:
    _emit(json.dumps(obj, sort_keys=True, indent=2) + "\n", json_out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linkeval", description=__doc__)
    parser.add_argument("--version", action="version", version=f"linkeval {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[], help="summary statistics of a predicted clustering")
    p.add_argument("--membership", help="membership CSV (record_id,cluster_id)")
    p.add_argument("--series", help="directory of membership CSVs, reported as a time series")
    p.add_argument("--attributes", help="attribute CSV (record_id,label,...) for label-based rates")
    p.add_argument("--hill-grid", default=None, help="comma list of Hill orders, e.g. 0,0.5,1,2,inf")
    p.add_argument("--json-out", default=None)
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("estimate", help="performance-metric estimates from a benchmark sample")
    p.add_argument("--error-table", help="precomputed error-table CSV")
    p.add_argument("--truth-sample", help="benchmark JSONL of sampled true clusters")
    p.add_argument("--prediction", help="membership CSV of the prediction under evaluation")
    p.add_argument("--weights", default=None, help="override weights: cluster_size | uniform | file:PATH")
    p.add_argument("--metrics", default=None, help=f"comma list among: {', '.join(ALL_METRICS)}")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--clamp", action="store_true", help="clamp reported points into [0,1]")
    p.add_argument("--n-records", type=int, default=None, help="universe size (error-table mode)")
    p.add_argument("--n-pred-clusters", type=int, default=None, help="predicted-cluster count (error-table mode)")
    p.add_argument("--json-out", default=None)
    p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("sample", help="draw a cluster sample from a known clustering")
    p.add_argument("--membership", required=True)
    p.add_argument("--design", default="pps", choices=sorted(set(_DESIGNS)))
    p.add_argument("-k", "--size", type=int, required=True, dest="k")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output JSONL path")

    p = sub.add_parser("simulate", help="Monte-Carlo bias/RMSE/coverage study")
    p.add_argument("--truth", help="truth membership CSV")
    p.add_argument("--generate", action="store_true", help="generate a synthetic population instead")
    p.add_argument("--gen-pairs", type=int, default=1000)
    p.add_argument("--gen-singletons", type=int, default=8000)
    p.add_argument("--gen-corruption", type=float, default=0.05)
    p.add_argument("--prediction", help="prediction membership CSV")
    p.add_argument("--matcher", choices=["all-but-one"], help="derive the prediction with a matcher")
    p.add_argument("--exact", action="store_true", help="all-pairs matching (no signature grouping)")
    p.add_argument("--designs", default="pps", help="comma list: pps,uniform")
    p.add_argument("--sizes", default="200,400,800")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--metrics", default="pairwise_precision,pairwise_recall")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--checkpoint", default=None, help="resumable checkpoint path")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: available cores)")
    p.add_argument("--out", default=None, help="simreport JSON path (default stdout)")
    p.add_argument("--csv-out", default=None, help="tidy CSV path")

    p = sub.add_parser("qc", help="quality-control flags for a labeling session journal")
    p.add_argument("--journal", required=True, help="session journal (.jsonl)")
    p.add_argument("--attributes", default=None)
    p.add_argument("--json-out", default=None)

    p = sub.add_parser("audit-report", help="weighted error-cause frequencies from audit tags")
    p.add_argument("--tags", help="audit-tag CSV (cluster_id,direction,label,note,p_c)")
    p.add_argument("--journal", help="session journal (.jsonl) holding recorded tags")
    p.add_argument("--json-out", default=None)

    p = sub.add_parser("serve", help="run the labeling/review HTTP service")
    p.add_argument("--membership", required=True)
    p.add_argument("--attributes", default=None)
    p.add_argument("--journal-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static", default=None, help="directory of UI assets to serve at /")
    p.add_argument("--lease-seconds", type=float, default=900.0)

    return parser


# -- command implementations ---------------------------------------------------


def _cmd_stats(args) -> int:
    grid = _parse_hill_grid(args.hill_grid) if args.hill_grid else DEFAULT_HILL_GRID
    attrs = AttributeTable.from_csv(args.attributes) if args.attributes else None
    if args.series:
        series_dir = Path(args.series)
        files = sorted(p for p in series_dir.iterdir() if p.suffix == ".csv")
        if not files:
            raise ValueError(f"--series directory {series_dir} has no .csv files")
        series = []
        for f in files:
            clustering = Clustering.from_csv(f)
            series.append({"file": f.name, "report": compute_summary(clustering, attrs, grid).to_dict()})
        _dump({"v": 1, "series": series}, args.json_out)
        return EXIT_OK
    if not args.membership:
        raise ValueError("stats needs --membership or --series")
    clustering = Clustering.from_csv(args.membership)
    report = compute_summary(clustering, attrs, grid)
    if args.pretty:
        d = report.to_dict()
        lines = [
            f"records:             {clustering.universe_size}",
            f"clusters:            {clustering.n_clusters}",
            f"avg cluster size:    {d['avg_cluster_size']:.4f}",
            f"matching rate:       {d['matching_rate']:.4f}",
        ]
        if d["homonymy_rate"] is not None:
            lines.append(f"homonymy rate:       {d['homonymy_rate']:.4f}")
            lines.append(f"name variation rate: {d['name_variation_rate']:.4f}")
        lines.append("hill numbers:        " + ", ".join(f"H_{q}={h:.4g}" for q, h in d["hill"]))
        print("\n".join(lines))
        return EXIT_OK
    _dump(report.to_dict(), args.json_out)
    return EXIT_OK


def _load_sample_with_weights(args, prediction: Clustering | None) -> ClusterSample:
    sample = ClusterSample.from_jsonl(args.truth_sample)
    if not args.weights:
        return sample
    mode = args.weights
    if mode == "cluster_size":
        if prediction is None:
            raise ValueError("--weights cluster_size needs --prediction for the universe size")
        n = prediction.universe_size
        draws = tuple(
            ClusterDraw(d.cluster_id, d.members, len(d.members) / n, d.seed_record) for d in sample.draws
        )
        return ClusterSample(draws=draws, design=DESIGN_PPS, rng_seed=sample.rng_seed)
    if mode == "uniform":
        draws = tuple(ClusterDraw(d.cluster_id, d.members, 1.0, d.seed_record) for d in sample.draws)
        return ClusterSample(draws=draws, design=DESIGN_UNIFORM, rng_seed=sample.rng_seed)
    if mode.startswith("file:"):
        import csv as _csv

        weight_path = mode[len("file:") :]
        weights = {}
        with open(weight_path, "r", encoding="utf-8", newline="") as fh:
            for row in _csv.reader(fh):
                if not row or row[0] == "cluster_id":
                    continue
                weights[row[0]] = float(row[1])
        missing = [d.cluster_id for d in sample.draws if d.cluster_id not in weights]
        if missing:
            raise ValueError(f"--weights file is missing clusters: {', '.join(missing[:5])}")
        draws = tuple(
            ClusterDraw(d.cluster_id, d.members, weights[d.cluster_id], d.seed_record)
            for d in sample.draws
        )
        return ClusterSample(draws=draws, design="external", rng_seed=sample.rng_seed)
    raise ValueError(f"unknown --weights mode {mode!r}")


def _cmd_estimate(args) -> int:
    if bool(args.error_table) == bool(args.truth_sample):
        raise ValueError("estimate needs exactly one of --error-table or --truth-sample")
    prediction = Clustering.from_csv(args.prediction) if args.prediction else None
    if args.error_table:
        table = ErrorTable.from_csv(args.error_table)
        design = "external"
        n_records = args.n_records or (prediction.universe_size if prediction else None)
        n_pred = args.n_pred_clusters or (prediction.n_clusters if prediction else None)
    else:
        if prediction is None:
            raise ValueError("--truth-sample mode needs --prediction")
        sample = _load_sample_with_weights(args, prediction)
        table = error_table(sample, prediction)
        design = sample.design
        n_records = prediction.universe_size
        n_pred = prediction.n_clusters
    names = [m.strip() for m in args.metrics.split(",")] if args.metrics else list(ALL_METRICS)
    estimates = []
    for name in names:
        target = build_target(name, beta=args.beta, n_records=n_records, n_pred_clusters=n_pred)
        est = ratio_estimate(table.rows, target, design=design)
        estimates.append(est.clamped() if args.clamp else est)
    if args.pretty:
        for est in estimates:
            lo, hi = est.interval()
            flag = f"  [{','.join(est.flags)}]" if est.flags else ""
            print(f"{est.metric:22s} {est.point:8.4f} ± {2 * est.std:.4f}  ({lo:.4f}, {hi:.4f})  k={est.k}{flag}")
        return EXIT_OK
    _emit(estimates_to_json(estimates), args.json_out)
    return EXIT_OK


def _cmd_sample(args) -> int:
    seed = _resolve_seed(args.seed)
    clustering = Clustering.from_csv(args.membership)
    design = _DESIGNS[args.design]
    if design == DESIGN_PPS:
        sample = sample_pps(clustering, args.k, seed)
    else:
        sample = sample_uniform(clustering, args.k, seed)
    sample.to_jsonl(args.out)
    print(f"wrote {len(sample)} draws to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    seed = _resolve_seed(args.seed)
    if bool(args.truth) == bool(args.generate):
        raise ValueError("simulate needs exactly one of --truth or --generate")
    if args.generate:
        truth, attrs = generate_rldata_like(
            n_pairs=args.gen_pairs,
            n_singletons=args.gen_singletons,
            corruption=args.gen_corruption,
            rng_seed=seed,
        )
    else:
        truth = Clustering.from_csv(args.truth)
        attrs = None
    if bool(args.prediction) == bool(args.matcher):
        raise ValueError("simulate needs exactly one of --prediction or --matcher")
    if args.matcher:
        if attrs is None:
            raise ValueError("--matcher needs the generated population (use --generate)")
        prediction = all_but_one_match(attrs, exact=args.exact)
    else:
        prediction = Clustering.from_csv(args.prediction)
    designs = [_DESIGNS[d.strip()] for d in args.designs.split(",") if d.strip()]
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    workers = args.threads if args.threads else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError("--threads must be >= 1")
    report = run_simulation(
        truth,
        prediction,
        designs=designs,
        sizes=sizes,
        reps=args.reps,
        metrics=metrics,
        rng_seed=seed,
        beta=args.beta,
        checkpoint_path=args.checkpoint,
        workers=workers,
    )
    if args.csv_out:
        report.to_csv(args.csv_out)
    if args.out:
        report.to_json(args.out)
        print(f"wrote simulation report to {args.out}", file=sys.stderr)
    else:
        _dump(report.to_dict(), None)
    return EXIT_OK


def _cmd_qc(args) -> int:
    session = load_session(args.journal)
    attrs = AttributeTable.from_csv(args.attributes) if args.attributes else None
    flags = qc_check(session, attrs=attrs)
    _dump({"v": 1, "session_id": session.session_id, "flags": [f.to_dict() for f in flags]}, args.json_out)
    return EXIT_OK


def _cmd_audit_report(args) -> int:
    if bool(args.tags) == bool(args.journal):
        raise ValueError("audit-report needs exactly one of --tags or --journal")
    if args.tags:
        tags = tags_from_csv(args.tags)
    else:
        tags = load_session(args.journal).tags
    _dump({"v": 1, "frequencies": audit_frequencies(tags)}, args.json_out)
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceState, create_app

    prediction = Clustering.from_csv(args.membership)
    attrs = AttributeTable.from_csv(args.attributes) if args.attributes else None
    state = ServiceState(
        prediction, attrs, journal_dir=args.journal_dir, lease_seconds=args.lease_seconds
    )
    app = create_app(state, static_dir=args.static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


_COMMANDS = {
    "stats": _cmd_stats,
    "estimate": _cmd_estimate,
    "sample": _cmd_sample,
    "simulate": _cmd_simulate,
    "qc": _cmd_qc,
    "audit-report": _cmd_audit_report,
    "serve": _cmd_serve,
}


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError, EstimationError) as exc:
        print(f"linkeval {args.command}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # runtime failure, distinct exit code
        print(f"linkeval {args.command}: unexpected error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    raise SystemExit(dispatch())
