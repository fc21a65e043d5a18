"""Command-line entry point for every pipeline stage.

Exit codes are a stable contract: 0 success, 1 domain failure (invalid
data, metric/benchmark failure), 2 usage or I/O error. Every report embeds
the tolerances and weights it ran with, so results are reproducible from
their own header. Subcommands that fan out over files keep their output
order independent of the worker pool.

The compression dictionary ships with the package; the FLOORKIT_DICT
environment variable (or --dict) points at an alternative file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .data_engine import balanced_sample, cluster, plan_features
from .generator import CORRUPTION_MODES, GenSpec, generate
from .geometry import DEFAULT_CHORD_TOL, DEFAULT_SNAP_TOL
from .grpo_sim import SimConfig, records_to_csv, run_simulation
from .metrics import MatchConfig, eval_benchmark
from .render import RenderStyle, rasterize, render_svg, write_pgm
from .reward import RewardWeights, compute_reward
from .schema_io import emit, parse
from .tokens import (
    CompressionDict,
    compress,
    default_dict,
    plain_token_count,
    token_count,
)
from .validator import validate


def _fail_usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _load_dict(path: str | None) -> CompressionDict:
    path = path or os.environ.get("FLOORKIT_DICT")
    if path:
        return CompressionDict.from_file(path)
    return default_dict()


def _collect_documents(paths: list[str]) -> list[Path]:
    """Expand files and directories into a sorted document list."""
    out: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            out.extend(sorted(p.glob("*.json")))
        elif p.exists():
            out.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {raw}")
    return out


def _config_header(args, extra: dict | None = None) -> dict:
    header = {
        "version": __version__,
        "snap_tol": args.snap_tol,
        "chord_tol": args.chord_tol,
    }
    if extra:
        header.update(extra)
    return header


def _parse_weights(text: str) -> RewardWeights:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected w_val,w_ext,w_int")
    try:
        vals = [float(v) for v in parts]
    except ValueError:
        raise argparse.ArgumentTypeError("weights must be numbers") from None
    return RewardWeights(*vals)


def _parse_corrupt(text: str) -> tuple[str, float]:
    try:
        mode, rate = text.split("=")
        return mode, float(rate)
    except ValueError:
        raise argparse.ArgumentTypeError("expected mode=rate") from None


# --- subcommands ------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        docs = _collect_documents(args.paths)
    except FileNotFoundError as exc:
        return _fail_usage(str(exc))
    if not docs:
        return _fail_usage("no input documents found")

    def check(path: Path):
        return validate(path.read_text(encoding="utf-8"), args.snap_tol, args.chord_tol)

    try:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(check, docs))
    except OSError as exc:
        return _fail_usage(str(exc))

    sink = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for path, report in zip(docs, reports):
            sink.write(json.dumps({"path": str(path), **report.to_dict()}) + "\n")
        rate = sum(r.is_valid for r in reports) / len(reports)
        sink.write(
            json.dumps(
                {
                    "summary": True,
                    "n": len(reports),
                    "validity_rate": rate,
                    "config": _config_header(args),
                }
            )
            + "\n"
        )
    finally:
        if args.out:
            sink.close()
    return 0 if all(r.is_valid for r in reports) else 1


def cmd_eval(args) -> int:
    pred_dir, gt_dir = Path(args.pred), Path(args.gt)
    if not pred_dir.is_dir() or not gt_dir.is_dir():
        return _fail_usage("--pred and --gt must be directories")
    preds = {p.name: p for p in sorted(pred_dir.glob("*.json"))}
    gts = {p.name: p for p in sorted(gt_dir.glob("*.json"))}
    names = sorted(preds.keys() & gts.keys())
    unpaired = sorted(preds.keys() ^ gts.keys())
    for name in unpaired:
        print(f"warning: unpaired file {name}", file=sys.stderr)
    if not names:
        return _fail_usage("no paired documents to evaluate")

    cfg = MatchConfig(room_iou_threshold=args.iou_threshold)
    try:
        gt_plans = {n: parse(gts[n].read_text(encoding="utf-8")) for n in names}
    except ValueError as exc:
        print(f"error: ground truth {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        return _fail_usage(str(exc))

    try:
        pairs = [(n, preds[n].read_text(encoding="utf-8"), gt_plans[n]) for n in names]
    except OSError as exc:
        return _fail_usage(str(exc))
    try:
        report = eval_benchmark(pairs, cfg, args.chord_tol, args.snap_tol, jobs=args.jobs)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    payload = {
        "config": _config_header(args, {"iou_threshold": args.iou_threshold}),
        **report.to_dict(),
    }
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        (out_dir / "table.txt").write_text(report.to_table() + "\n", encoding="utf-8")
    else:
        print(report.to_table())
    return 1 if unpaired else 0


def cmd_reward(args) -> int:
    try:
        pred_text = Path(args.pred).read_text(encoding="utf-8")
        gt_text = Path(args.gt).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail_usage(str(exc))
    try:
        gt = parse(gt_text)
        breakdown = compute_reward(
            pred_text, gt, args.weights, MatchConfig(room_iou_threshold=args.iou_threshold),
            args.chord_tol, args.snap_tol,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = {
        "config": _config_header(
            args,
            {"weights": [args.weights.w_val, args.weights.w_ext, args.weights.w_int]},
        ),
        **breakdown.to_dict(),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_generate(args) -> int:
    spec = GenSpec(
        seed=args.seed,
        room_range=(args.rooms_min, args.rooms_max),
        non_manhattan_p=args.non_manhattan_p,
        curved_p=args.curved_p,
        opening_density=args.opening_density,
        corruption=dict(args.corrupt or []),
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_lines = []
    for gp in generate(spec, args.n):
        name = f"plan_{gp.ledger['index']:05d}.json"
        text = emit(gp.plan)
        if gp.ledger["corruption"] == "malformed_json":
            text = text[:-12]
        (out_dir / name).write_text(text, encoding="utf-8")
        manifest_lines.append(json.dumps({"path": name, **gp.ledger}))
    (out_dir / "manifest.jsonl").write_text("\n".join(manifest_lines) + "\n", encoding="utf-8")
    print(f"wrote {args.n} plans to {out_dir}")
    return 0


def cmd_render(args) -> int:
    try:
        plan = parse(Path(args.infile).read_text(encoding="utf-8"))
    except OSError as exc:
        return _fail_usage(str(exc))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    style = RenderStyle(chord_tol=args.chord_tol, snap_tol=args.snap_tol)
    try:
        svg = render_svg(plan, style)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    Path(args.out).write_text(svg, encoding="utf-8")
    if args.pgm:
        grid = rasterize(plan, args.resolution, None, args.chord_tol, args.snap_tol)
        write_pgm(grid, args.pgm)
    return 0


def _load_corpus_plans(path: str):
    docs = _collect_documents([path])
    plans = []
    names = []
    for p in docs:
        if p.name == "manifest.jsonl":
            continue
        plans.append(parse(p.read_text(encoding="utf-8")))
        names.append(p.name)
    return names, plans


def cmd_cluster(args) -> int:
    try:
        names, plans = _load_corpus_plans(args.infile)
    except (OSError, FileNotFoundError) as exc:
        return _fail_usage(str(exc))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not plans:
        return _fail_usage("empty corpus")
    features = plan_features(plans, chord_tol=args.chord_tol, snap_tol=args.snap_tol)
    assignment = cluster(features, args.k)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "features.jsonl", "w", encoding="utf-8") as fh:
        for name, row in zip(names, features):
            fh.write(json.dumps({"id": name, "vector": [round(float(v), 6) for v in row]}) + "\n")
    with open(out_dir / "clusters.jsonl", "w", encoding="utf-8") as fh:
        for name, label in zip(names, assignment.labels):
            fh.write(json.dumps({"id": name, "cluster": label}) + "\n")
    sizes = ", ".join(str(s) for s in assignment.sizes)
    print(f"clustered {len(plans)} plans into {assignment.k} clusters (sizes: {sizes})")
    return 0


def cmd_sample(args) -> int:
    try:
        lines = Path(args.clusters).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        return _fail_usage(str(exc))
    ids = []
    labels = []
    for line in lines:
        if not line.strip():
            continue
        rec = json.loads(line)
        ids.append(rec["id"])
        labels.append(int(rec["cluster"]))
    if not ids:
        return _fail_usage("empty cluster file")
    k = max(labels) + 1
    from .data_engine import ClusterAssignment

    sizes = [0] * k
    for lab in labels:
        sizes[lab] += 1
    assignment = ClusterAssignment(tuple(labels), tuple(sizes), k, "average", ())
    try:
        picks = balanced_sample(assignment, args.target, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sink = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for idx in picks:
            sink.write(ids[idx] + "\n")
    finally:
        if args.out:
            sink.close()
    return 0


def cmd_grpo_sim(args) -> int:
    if args.gt:
        try:
            gt = parse(Path(args.gt).read_text(encoding="utf-8"))
        except OSError as exc:
            return _fail_usage(str(exc))
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    else:
        gt = generate(GenSpec(seed=args.seed, room_range=(4, 6)), 1)[0].plan
    cfg = SimConfig(
        group_size=args.group_size,
        iterations=args.iterations,
        seed=args.seed,
        sigma0=args.sigma0,
        delete_p=args.delete_p,
        weights=args.weights,
    )
    try:
        records = run_simulation(gt, cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    csv_text = records_to_csv(records)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    return 0


def cmd_tokens(args) -> int:
    try:
        docs = _collect_documents([args.infile])
        cdict = _load_dict(args.dict)
    except (OSError, FileNotFoundError, ValueError) as exc:
        return _fail_usage(str(exc))
    docs = [d for d in docs if d.name != "manifest.jsonl"]
    if not docs:
        return _fail_usage("no documents found")
    raw_counts = []
    comp_counts = []
    try:
        for path in docs:
            text = path.read_text(encoding="utf-8")
            raw_counts.append(plain_token_count(text))
            comp_counts.append(token_count(compress(text, cdict)))
    except OSError as exc:
        return _fail_usage(str(exc))
    raw_mean = float(np.mean(raw_counts))
    comp_mean = float(np.mean(comp_counts))
    reduction = 100.0 * (raw_mean - comp_mean) / raw_mean if raw_mean else 0.0
    print(f"documents:        {len(docs)}")
    print(f"mean raw tokens:  {raw_mean:.1f}")
    print(f"mean compressed:  {comp_mean:.1f}")
    print(f"reduction:        {reduction:.2f}%")
    return 0


# --- parser wiring ----------------------------------------------------------


def _add_common(sub, *, tolerances=True, jobs=False, out=True):
    if tolerances:
        sub.add_argument("--snap-tol", type=float, default=DEFAULT_SNAP_TOL)
        sub.add_argument("--chord-tol", type=float, default=DEFAULT_CHORD_TOL)
    if jobs:
        sub.add_argument("--jobs", type=int, default=1)
    if out:
        sub.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floorkit", description="vector floorplan toolkit"
    )
    parser.add_argument("--version", action="version", version=f"floorkit {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("validate", help="validate documents, report validity rate")
    p.add_argument("paths", nargs="+")
    _add_common(p, jobs=True)
    p.set_defaults(func=cmd_validate)

    p = subs.add_parser("eval", help="evaluate predictions against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--iou-threshold", type=float, default=0.5)
    _add_common(p, jobs=True)
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("reward", help="score one prediction against one target")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--iou-threshold", type=float, default=0.5)
    p.add_argument("--weights", type=_parse_weights, default=RewardWeights())
    _add_common(p)
    p.set_defaults(func=cmd_reward)

    p = subs.add_parser("generate", help="write a synthetic corpus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rooms-min", type=int, default=4)
    p.add_argument("--rooms-max", type=int, default=9)
    p.add_argument("--non-manhattan-p", type=float, default=0.35)
    p.add_argument("--curved-p", type=float, default=0.5)
    p.add_argument("--opening-density", type=float, default=0.35)
    p.add_argument(
        "--corrupt",
        action="append",
        type=_parse_corrupt,
        metavar="MODE=RATE",
        help=f"corruption mode ({', '.join(CORRUPTION_MODES)}), repeatable",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = subs.add_parser("render", help="render a plan to SVG (and optional PGM)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--pgm", default=None)
    p.add_argument("--resolution", type=int, default=512)
    _add_common(p)
    p.set_defaults(func=cmd_render)

    p = subs.add_parser("cluster", help="extract features and cluster a corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--out", required=True)
    p.add_argument("--snap-tol", type=float, default=DEFAULT_SNAP_TOL)
    p.add_argument("--chord-tol", type=float, default=DEFAULT_CHORD_TOL)
    p.set_defaults(func=cmd_cluster)

    p = subs.add_parser("sample", help="cluster-balanced resampling")
    p.add_argument("--clusters", required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, tolerances=False)
    p.set_defaults(func=cmd_sample)

    p = subs.add_parser("grpo-sim", help="mock-policy reward hill-climb")
    p.add_argument("--gt", default=None)
    p.add_argument("--iterations", type=int, default=30)
    p.add_argument("--group-size", type=int, default=8)
    p.add_argument("--sigma0", type=float, default=6.0)
    p.add_argument("--delete-p", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weights", type=_parse_weights, default=RewardWeights())
    _add_common(p, tolerances=False)
    p.set_defaults(func=cmd_grpo_sim)

    p = subs.add_parser("tokens", help="sequence-length accounting for a corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--dict", default=None)
    _add_common(p, tolerances=False, out=False)
    p.set_defaults(func=cmd_tokens)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # require output for render's SVG
    if args.command == "render" and not args.out:
        return _fail_usage("render requires --out")
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
