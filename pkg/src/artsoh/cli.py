"""Command-line interface: ``artsoh <command> [options]``.

Every command exits with status 1 and a one-line JSON error on stderr when a
library error occurs. ``--seed`` falls back to the ``SEED`` environment
variable, then to 0.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, imgproc, learn, pipeline, sampling, soh
from .errors import ArtsohError, ParameterError
from .evaluation import (METRIC_NAMES, CvConfig, ModelSpec, cross_validate, plot_curves, write_curve_csv,
                         write_json_report)
from .pipeline import RunConfig

COMPARE_COLUMNS = ("accuracy", "precision", "recall", "tnr", "f2", "mcc", "elapsed_seconds")


def _seed(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise ParameterError(f"SEED must be an integer, got {env!r}") from None


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _add_config_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration (override --config)")
    g.add_argument("--config", type=Path, help="RunConfig JSON to start from")
    g.add_argument("--seed", type=int, help="master seed (default: $SEED, else 0)")
    g.add_argument("--variant", choices=sorted(soh.VARIANTS), help="SOH variant")
    g.add_argument("--sigma", type=float, help="Gaussian smoothing sigma")
    g.add_argument("--kernel-size", type=int, help="Gaussian kernel size")
    g.add_argument("--edge-threshold", help="Sobel threshold or 'auto'")
    g.add_argument("--mag-fraction", type=float, help="drop gradients below this fraction of the peak")
    g.add_argument("--n-bins", type=int, help="orientation histogram bins")
    g.add_argument("--symmetry-source", choices=("distance", "cumulative"))
    g.add_argument("--model", dest="model_kind", choices=("forest", "svm"))
    g.add_argument("--n-trees", type=int)
    g.add_argument("--gamma", type=float, help="RBF width")
    g.add_argument("--C", dest="C", type=float, help="SVM box scale")
    g.add_argument("--cost", type=_floats, help="cost matrix c00,c01,c10,c11")
    g.add_argument("--folds", type=int)
    g.add_argument("--repeats", type=int)
    g.add_argument("--no-stratify", action="store_true", default=None)
    g.add_argument("--smote-inside-folds", action="store_true", default=None)
    g.add_argument("--smote-n", type=int, help="SMOTE amount in percent")
    g.add_argument("--smote-k", type=int, help="SMOTE neighbours")
    g.add_argument("--smote-mode", choices=("away", "toward"))
    g.add_argument("--satad", dest="satad_variant", type=int, choices=(1, 2, 3, 4))
    g.add_argument("--scales", type=_floats, help="window sizes as fractions of the shorter side")
    g.add_argument("--stride-fraction", type=float)
    g.add_argument("--score-threshold", type=float)
    g.add_argument("--nms-iou", type=float)


def build_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    if args.seed is not None or not getattr(args, "config", None):
        cfg.seed = _seed(args.seed)

    def put(obj, attr, value, conv=lambda v: v):
        if value is not None:
            setattr(obj, attr, conv(value))

    put(cfg, "variant", args.variant, str.upper)
    put(cfg.soh, "sigma", args.sigma)
    put(cfg.soh, "kernel_size", args.kernel_size)
    put(cfg.soh, "edge_threshold", args.edge_threshold,
        lambda v: imgproc.AUTO if v.lower() == imgproc.AUTO else float(v))
    put(cfg.soh, "mag_fraction", args.mag_fraction)
    put(cfg.soh, "n_bins", args.n_bins)
    put(cfg.soh, "symmetry_source", args.symmetry_source)
    put(cfg.model, "kind", args.model_kind)
    put(cfg.model, "n_trees", args.n_trees)
    put(cfg.model, "gamma", args.gamma)
    put(cfg.model, "C", args.C)
    if args.cost is not None:
        if len(args.cost) != 4:
            raise ParameterError("--cost takes four comma-separated values")
        cfg.model.cost = ((args.cost[0], args.cost[1]), (args.cost[2], args.cost[3]))
    put(cfg.cv, "folds", args.folds)
    put(cfg.cv, "repeats", args.repeats)
    if args.no_stratify:
        cfg.cv.stratified = False
    if args.smote_inside_folds:
        cfg.cv.smote_inside_folds = True
    put(cfg.cv, "smote_n", args.smote_n)
    put(cfg.cv, "smote_k", args.smote_k)
    put(cfg, "smote_k", args.smote_k)
    put(cfg, "smote_mode", args.smote_mode)
    put(cfg, "satad_variant", args.satad_variant)
    put(cfg.window, "scales", args.scales, tuple)
    put(cfg.window, "stride_fraction", args.stride_fraction)
    put(cfg.window, "score_threshold", args.score_threshold)
    put(cfg.window, "nms_iou", args.nms_iou)
    cfg.cv.seed = cfg.seed
    return cfg


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def _load_images(args, seed: int) -> pipeline.ImageDataset:
    if args.data is not None:
        return pipeline.load_dataset(args.data, args.source)
    if args.synthetic is not None:
        return pipeline.generate_synthetic(args.synthetic, seed, args.synthetic_size)
    raise ParameterError("pass --data DIR or --synthetic N")


def _add_image_source(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", type=Path, help="dataset root with artcode/ and non-artcode/")
    src.add_argument("--synthetic", type=int, metavar="N", help="use N synthetic images per class")
    p.add_argument("--synthetic-size", type=int, default=128)
    p.add_argument("--source", default="custom", help="dataset tag (TAD, EAD, custom)")


# -- commands -----------------------------------------------------------------

def cmd_extract(args) -> int:
    cfg = build_config(args)
    ds = _load_images(args, cfg.seed)
    X, y, skipped = pipeline.extract_features(ds, cfg.variant, cfg.soh)
    soh.write_feature_csv(args.out, X, y, cfg.variant)
    _emit({"rows": int(y.size), "positives": int(y.sum()), "negatives": int((y == 0).sum()),
           "skipped": len(skipped), "skipped_files": [p for p, _ in skipped], "variant": cfg.variant,
           "out": str(args.out)})
    return 0


def cmd_synth(args) -> int:
    seed = _seed(args.seed)
    ds = pipeline.generate_synthetic(args.count, seed, args.size, root=args.out)
    _emit({"written": len(ds), "root": str(args.out), "seed": seed})
    return 0


def cmd_import_archive(args) -> int:
    counts = pipeline.import_archive(args.src, args.dest)
    _emit({"artcode": counts[1], "non_artcode": counts[0], "ignored": counts["ignored"], "dest": str(args.dest)})
    return 0


def cmd_build_satad(args) -> int:
    cfg = build_config(args)
    X, y, names = soh.read_feature_csv(args.features)
    data = sampling.LabeledDataset(X, y)
    out = sampling.build_satad(data, cfg.satad_variant, seed=cfg.seed, k=cfg.smote_k, mode=cfg.smote_mode)
    soh.write_feature_csv(args.out, out.X, out.y, soh.variant_from_names(names) or cfg.variant)
    _emit({"satad": cfg.satad_variant, "positives": out.count(1), "negatives": out.count(0),
           "synthetic": int(np.sum(out.synthetic)), "out": str(args.out)})
    return 0


def cmd_train(args) -> int:
    cfg = build_config(args)
    X, y, names = soh.read_feature_csv(args.features)
    variant = soh.variant_from_names(names) or cfg.variant
    cfg.variant = variant
    model = cfg.model.train(X, y, seed=cfg.seed)
    learn.save_model(model, args.out, {"variant": variant, "soh": cfg.soh.to_dict(), "run_config": cfg.to_dict()})
    _emit({"model": cfg.model.kind, "variant": variant, "n_samples": int(y.size), "out": str(args.out)})
    return 0


def _run_cv(X, y, spec: ModelSpec, cv: CvConfig, label: str, out_dir: Path):
    res = cross_validate(X, y, spec, cv)
    stem = label.lower().replace(" ", "_").replace("=", "")
    write_curve_csv(out_dir / f"roc_{stem}.csv", res.roc)
    write_curve_csv(out_dir / f"pr_{stem}.csv", res.pr)
    return res


def cmd_evaluate(args) -> int:
    cfg = build_config(args)
    X, y, names = soh.read_feature_csv(args.features)
    cfg.variant = soh.variant_from_names(names) or cfg.variant
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = _ints(args.n_trees_sweep) if args.n_trees_sweep else [None]
    rows, rocs, prs = [], {}, {}
    for nt in grid:
        spec = ModelSpec.from_dict(cfg.model.to_dict())
        label = cfg.model.kind
        if nt is not None:
            spec.kind, spec.n_trees = "forest", nt
            label = f"nTrees={nt}"
        res = _run_cv(X, y, spec, cfg.cv, label, out)
        rows.append({"label": label, "n_trees": spec.n_trees if spec.kind == "forest" else None,
                     "model": spec.to_dict(), **res.to_dict()})
        rocs[label], prs[label] = res.roc, res.pr
    plot_curves(out / "roc.svg", rocs, "ROC")
    plot_curves(out / "pr.svg", prs, "PR")
    cfg.save(out / "run_config.json")
    report = {"kind": "evaluate", "features": str(args.features), "n_samples": int(y.size),
              "config": cfg.to_dict(), "results": rows}
    write_json_report(out / "report.json", report)
    _emit({"report": str(out / "report.json"),
           "summary": [{"label": r["label"], "roc_auc": r["roc_auc"], "pr_auc": r["pr_auc"], **r["mean"]}
                       for r in rows]})
    return 0


def cmd_compare(args) -> int:
    cfg = build_config(args)
    if args.model_kind is None and not args.config:
        cfg.model.kind = "svm"
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if args.features is not None:
        X12, y, names = soh.read_feature_csv(args.features)
        if soh.variant_from_names(names) != "SOH-12":
            raise ParameterError("compare --features needs an SOH-12 feature file")
    else:
        ds = _load_images(args, cfg.seed)
        X12, y, _ = pipeline.extract_features(ds, "SOH-12", cfg.soh)
    extraction = time.perf_counter() - t0  # 0 when features come from a file
    all_idx = soh.variant_indices("SOH-12")
    rows, rocs, prs = [], {}, {}
    for variant in sorted(soh.VARIANTS):
        cols = [all_idx.index(i) for i in soh.variant_indices(variant)]
        res = _run_cv(X12[:, cols], y, cfg.model, cfg.cv, variant, out)
        row = {"method": variant, **{k: res.mean[k] for k in METRIC_NAMES},
               "elapsed_seconds": res.elapsed_seconds, "extraction_seconds": extraction,
               "roc_auc": res.roc.auc, "pr_auc": res.pr.auc, "std": res.std}
        rows.append(row)
        rocs[variant], prs[variant] = res.roc, res.pr
    plot_curves(out / "roc.svg", rocs, "ROC")
    plot_curves(out / "pr.svg", prs, "PR")
    cfg.save(out / "run_config.json")
    write_json_report(out / "report.json", {"kind": "compare", "n_samples": int(y.size), "config": cfg.to_dict(),
                                            "extraction_seconds": extraction, "rows": rows})
    print(_table(rows, ("method",) + COMPARE_COLUMNS + ("extraction_seconds",)))
    return 0


def cmd_propose(args) -> int:
    model, meta = learn.load_model(args.model_file)
    args.variant = args.variant or meta.get("variant")
    cfg = build_config(args)
    if "soh" in meta and not args.config:
        cfg.soh = soh.SohConfig.from_dict(meta["soh"])
    img = imgproc.read_image(args.image)
    regions = pipeline.propose(img, model, cfg.variant, cfg.soh, cfg.window)
    doc = {"image": str(args.image), "variant": cfg.variant, "window": cfg.window.to_dict(),
           "regions": [r.to_dict() for r in regions]}
    if args.out_json:
        Path(args.out_json).write_text(json.dumps(doc, indent=2))
    if args.out_image:
        imgproc.write_image(args.out_image, pipeline.annotate(img, regions, args.top))
    _emit(doc)
    return 0


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def _table(rows, cols) -> str:
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    for r in rows:
        lines.append("| " + " | ".join(_fmt(r.get(c)) for c in cols) + " |")
    return "\n".join(lines)


def summarize_reports(docs: list[dict]) -> dict:
    """Split reports into variant-comparison rows and nTrees/AUC rows."""
    comparison, forest_sweep = [], []
    for name, doc in docs:
        if doc.get("kind") == "compare":
            comparison.extend({"source": name, **r} for r in doc["rows"])
        elif doc.get("kind") == "evaluate":
            for r in doc["results"]:
                forest_sweep.append({"source": name, "label": r["label"], "n_trees": r.get("n_trees"),
                               "roc_auc": r["roc_auc"], "pr_auc": r["pr_auc"], **r["mean"]})
        else:
            raise ParameterError(f"{name}: not an artsoh report")
    return {"comparison": comparison, "forest_sweep": forest_sweep}


def cmd_report(args) -> int:
    docs = []
    for p in args.reports:
        try:
            docs.append((str(p), json.loads(Path(p).read_text())))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"{p}: cannot read report ({exc})") from exc
    summary = summarize_reports(docs)
    parts = []
    if summary["comparison"]:
        parts.append(_table(summary["comparison"], ("source", "method") + COMPARE_COLUMNS))
    if summary["forest_sweep"]:
        parts.append(_table(summary["forest_sweep"], ("source", "label", "n_trees", "roc_auc", "pr_auc", "accuracy",
                                                "recall", "mcc")))
    if args.out:
        write_json_report(args.out, summary)
    print("\n\n".join(parts))
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="artsoh", description="SOH features and Artcode proposal experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="images -> feature CSV")
    _add_image_source(p)
    p.add_argument("--out", type=Path, required=True)
    _add_config_options(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("synth", help="write a synthetic dataset to disk")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--count", type=int, default=50, help="images per class")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("import-archive", help="re-folder an unpacked archive into artcode/ and non-artcode/")
    p.add_argument("--src", type=Path, required=True)
    p.add_argument("--dest", type=Path, required=True)
    p.set_defaults(func=cmd_import_archive)

    p = sub.add_parser("build-satad", help="feature CSV -> SaTAD-n feature CSV")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_config_options(p)
    p.set_defaults(func=cmd_build_satad)

    p = sub.add_parser("train", help="feature CSV -> model file")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_config_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="repeated k-fold CV with JSON/CSV/SVG reports")
    p.add_argument("--features", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--n-trees-sweep", help="comma-separated forest sizes, e.g. 20,40,60")
    _add_config_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="cross-validate every SOH variant")
    _add_image_source(p)
    p.add_argument("--features", type=Path, help="precomputed SOH-12 feature CSV")
    p.add_argument("--out-dir", type=Path, required=True)
    _add_config_options(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("propose", help="image + model -> scored regions")
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--model-file", type=Path, required=True)
    p.add_argument("--out-json", type=Path)
    p.add_argument("--out-image", type=Path, help="annotated PNG")
    p.add_argument("--top", type=int, help="draw only the best N regions")
    _add_config_options(p)
    p.set_defaults(func=cmd_propose)

    p = sub.add_parser("report", help="aggregate JSON reports into summary tables")
    p.add_argument("reports", nargs="+", type=Path)
    p.add_argument("--out", type=Path, help="write the summary as JSON")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ArtsohError, ValueError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
