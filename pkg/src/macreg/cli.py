"""Command-line entry point: register / benchmark / synth / ablate."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

from . import bench, io
from .cliques import CliqueFilterParams
from .errors import FileFormatError, MacregError
from .graph import GraphOrder, GraphParams
from .hypotheses import EvalParams, Metric, SvdMode

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2

_OVERRIDE_FLAGS = (
    "graph_order",
    "metric",
    "svd",
    "top_k",
    "nc",
    "gc",
    "clique_mode",
    "seed",
)


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--graph-order", choices=["fog", "sog"], dest="graph_order")
    parser.add_argument("--metric", choices=["mae", "mse", "inlier"])
    parser.add_argument("--svd", choices=["equal", "weighted"])
    parser.add_argument("--top-k", type=int, dest="top_k")
    parser.add_argument("--nc", choices=["on", "off"])
    parser.add_argument("--gc", choices=["on", "off"])
    parser.add_argument("--clique-mode", choices=["maximal", "maximum"], dest="clique_mode")
    parser.add_argument("--seed", type=int, default=0)


def _build_config(args) -> bench.RegistrationConfig:
    """Merge config-file values with CLI flags; flags win."""
    values: dict[str, str] = {}
    if getattr(args, "config", None):
        file_values = io.load_config_file(args.config)
        known = {f.replace("_", "-") for f in _OVERRIDE_FLAGS}
        for key in file_values:
            if key not in known:
                raise FileFormatError(f"unknown config key: {key}", args.config)
        values.update({k.replace("-", "_"): v for k, v in file_values.items()})
    for flag in _OVERRIDE_FLAGS:
        v = getattr(args, flag, None)
        if v is not None and flag != "seed":
            values[flag] = str(v)

    metric = {"mae": Metric.MAE, "mse": Metric.MSE, "inlier": Metric.INLIER_COUNT}[
        values.get("metric", "mae")
    ]
    svd = {"equal": SvdMode.INSTANCE_EQUAL, "weighted": SvdMode.WEIGHTED}[
        values.get("svd", "equal")
    ]
    order = {"fog": GraphOrder.FIRST_ORDER, "sog": GraphOrder.SECOND_ORDER}[
        values.get("graph_order", "sog")
    ]
    top_k = values.get("top_k")
    return bench.RegistrationConfig(
        graph=GraphParams(),
        filter=CliqueFilterParams(
            top_k=int(top_k) if top_k is not None else None,
            use_normal_consistency=values.get("nc", "off") == "on",
        ),
        eval=EvalParams(metric=metric, svd_mode=svd),
        graph_order=order,
        use_gc_prefilter=values.get("gc", "off") == "on",
        clique_mode={"maximal": bench.CliqueMode.MAXIMAL, "maximum": bench.CliqueMode.MAXIMUM}[
            values.get("clique_mode", "maximal")
        ],
    )


def _criteria_from_args(args) -> bench.SuccessCriteria:
    if args.criteria == "indoor":
        return bench.INDOOR_CRITERIA
    if args.criteria == "kitti":
        return bench.KITTI_CRITERIA
    if args.re is None or args.te is None:
        raise MacregError("--criteria custom requires --re and --te")
    return bench.SuccessCriteria(args.re, args.te)


def _report_to_dict(report: bench.RegistrationReport, seed: int, has_gt: bool) -> dict:
    out = {
        "transform": report.best.transform.as_matrix().tolist(),
        "score": report.best.score,
        "success": report.success,
        "metric": report.best.metric.value,
        "num_hypotheses": len(report.hypotheses),
        "num_cliques": report.n_cliques,
        "seed": seed,
        "stage_times_ms": report.stage_times,
    }
    if report.error is not None:
        out["error"] = report.error
    if has_gt:
        out["re_deg"] = report.re_deg
        out["te"] = report.te
        out["correct_hypothesis_count"] = report.correct_hypothesis_count
    return out


def _write_json(path, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_register(args) -> int:
    config = _build_config(args)
    corrs = io.load_correspondences(args.corr)
    t_gt = io.load_transform(args.gt) if args.gt else None
    criteria = bench.INDOOR_CRITERIA if t_gt is not None else None
    report = bench.register(corrs, config, t_gt=t_gt, criteria=criteria)
    _write_json(args.out, _report_to_dict(report, args.seed, t_gt is not None))
    return EXIT_OK if report.success or t_gt is None else EXIT_FAILED


_PAIR_CSV_FIELDS = (
    "index",
    "pair",
    "success",
    "re_deg",
    "te",
    "score",
    "correct_hypothesis_count",
    "total_time_ms",
    "error",
)


def _write_pair_csv(path, results) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_PAIR_CSV_FIELDS)
        for r in results:
            writer.writerow(
                [
                    r.index,
                    r.meta,
                    int(r.success),
                    "" if r.re_deg is None else f"{r.re_deg:.6f}",
                    "" if r.te is None else f"{r.te:.6f}",
                    f"{r.score:.6f}",
                    "" if r.correct_hypothesis_count is None else r.correct_hypothesis_count,
                    f"{r.total_time_ms:.3f}",
                    r.error or "",
                ]
            )


def _summary_to_dict(summary: bench.DatasetSummary) -> dict:
    out = dataclasses.asdict(summary)
    out["criteria"] = {
        "re_thresh_deg": summary.criteria.re_thresh_deg,
        "te_thresh": summary.criteria.te_thresh,
    }
    out["mac_n_recall_pct"] = {str(k): v for k, v in summary.mac_n_recall_pct.items()}
    return out


def cmd_benchmark(args) -> int:
    pairs = io.load_manifest(args.manifest)
    if not pairs:
        raise MacregError("no pairs in manifest")
    config = _build_config(args)
    criteria = _criteria_from_args(args)
    results, summary = bench.evaluate_dataset(
        pairs, config, criteria, exclude_parse_failures=args.exclude_parse_failures
    )
    _write_pair_csv(args.out + ".pairs.csv", results)
    _write_json(args.out + ".summary.json", _summary_to_dict(summary))
    print(
        f"recall {summary.recall_pct:.2f}% "
        f"({summary.n_success}/{summary.n_pairs} pairs)"
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = bench.SyntheticSpec(
        n_inliers=args.n_inliers,
        n_outliers=args.n_outliers,
        noise_sigma=args.noise_sigma,
        extent=args.extent,
        seed=args.seed,
    )
    corrs, t_gt, (source, target) = bench.generate_synthetic(spec)
    out_dir = args.out_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
        io.save_correspondences(os.path.join(out_dir, "correspondences.txt"), corrs)
        io.save_transform(os.path.join(out_dir, "gt.txt"), t_gt)
        io.save_ply(os.path.join(out_dir, "source.ply"), source)
        io.save_ply(os.path.join(out_dir, "target.ply"), target)
    except OSError as exc:
        print(f"error: cannot write to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"wrote {len(corrs)} correspondences to {out_dir}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    pairs = io.load_manifest(args.manifest)
    if not pairs:
        raise MacregError("no pairs in manifest")
    if args.rows == "all":
        rows = list(bench.ABLATION_ROWS)
    else:
        rows = [r.strip() for r in args.rows.split(",") if r.strip()]
        unknown = [r for r in rows if r not in bench.ABLATION_ROWS]
        if unknown:
            valid = ", ".join(bench.ABLATION_ROWS)
            raise MacregError(
                f"unknown row preset(s) {', '.join(unknown)}; valid presets: {valid}, all"
            )
    criteria = _criteria_from_args(args)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "description", "recall_pct", "mean_re_deg", "mean_te"])
        for row in rows:
            desc, config = bench.ABLATION_ROWS[row]
            _, summary = bench.evaluate_dataset(pairs, config, criteria)
            writer.writerow(
                [
                    row,
                    desc,
                    f"{summary.recall_pct:.2f}",
                    "" if summary.mean_re_success is None else f"{summary.mean_re_success:.4f}",
                    "" if summary.mean_te_success is None else f"{summary.mean_te_success:.6f}",
                ]
            )
            print(f"row {row:>2} ({desc}): recall {summary.recall_pct:.2f}%")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macreg",
        description="Point cloud registration via maximal cliques in a "
        "correspondence compatibility graph.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("register", help="register one correspondence file")
    p.add_argument("--corr", required=True, help="correspondence file (6 or 12 columns)")
    p.add_argument("--gt", help="4x4 ground-truth transform file")
    p.add_argument("--out", help="JSON report path (stdout when omitted)")
    _add_override_flags(p)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("benchmark", help="run a manifest of pairs and aggregate")
    p.add_argument("--manifest", required=True, help="lines of 'corr_path gt_path'")
    p.add_argument("--criteria", choices=["indoor", "kitti", "custom"], default="indoor")
    p.add_argument("--re", type=float, help="custom RE threshold (degrees)")
    p.add_argument("--te", type=float, help="custom TE threshold (length units)")
    p.add_argument("--out", required=True, help="output prefix (.pairs.csv, .summary.json)")
    p.add_argument(
        "--exclude-parse-failures",
        action="store_true",
        help="drop unparseable pairs from the recall denominator",
    )
    _add_override_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("synth", help="generate a synthetic pair on disk")
    p.add_argument("--n-inliers", type=int, required=True)
    p.add_argument("--n-outliers", type=int, required=True)
    p.add_argument("--noise-sigma", type=float, default=0.0, help="in pr units")
    p.add_argument("--extent", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ablate", help="run pipeline-toggle comparison rows")
    p.add_argument("--manifest", required=True)
    p.add_argument("--rows", default="all", help="comma list of presets, or 'all'")
    p.add_argument("--criteria", choices=["indoor", "kitti", "custom"], default="indoor")
    p.add_argument("--re", type=float)
    p.add_argument("--te", type=float)
    p.add_argument("--out", required=True, help="comparison CSV path")
    _add_override_flags(p)
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except MacregError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
