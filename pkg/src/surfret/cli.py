"""Command line entry point: ``surfret describe|classify|evaluate|inspect``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import Config, load_config
from .descriptor import METHOD_DIMS
from .errors import MissingPrediction, SurfretError
from .mesh import validate_mesh
from .pipeline import (MAGIC, read_cache, read_manifest, run_classify, run_describe,
                       run_evaluate)
from .vtk_io import read_surface


def _config(args) -> Config:
    cfg = load_config(args.config) if args.config else Config()
    return cfg.with_overrides(tolerance=getattr(args, "tolerance", None))


def cmd_describe(args):
    cfg = _config(args)
    manifest = read_manifest(args.manifest)
    res = run_describe(manifest, args.method, cfg, args.out, jobs=args.jobs, strict=args.strict)
    print(f"{len(res.cache)}/{len(manifest)} described ({args.method}, dim "
          f"{res.cache.dimension}) -> {args.out}")
    if res.errors:
        print(f"{len(res.errors)} failures logged in {args.out}.errors.csv", file=sys.stderr)
    return 0


def cmd_classify(args):
    cfg = _config(args)
    train = read_cache(args.cache)
    test = read_cache(args.query)
    labels = read_manifest(args.manifest, split="train").labels()
    preds = run_classify(train, test, labels, cfg.tolerance, args.out,
                         volume_ratio=cfg.volume_ratio, jobs=args.jobs)
    print(f"{len(preds)} predictions ({sum(p.waived for p in preds)} waived) -> {args.out}")
    return 0


def cmd_evaluate(args):
    cfg = _config(args)
    truth = read_manifest(args.manifest)
    extra = read_manifest(args.labels).labels().values() if args.labels else None
    try:
        report = run_evaluate(args.predictions, truth, args.out, cfg, extra)
    except MissingPrediction as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"accuracy {report.accuracy:.4f}  balanced {report.balanced_accuracy:.4f}  "
          f"macro F1 {report.macro_f1:.4f}  ({report.n_items} items) -> {args.out}.*")
    return 0


def cmd_inspect(args):
    path = Path(args.path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        c = read_cache(path)
        print(f"descriptor cache  method={c.method}  dim={c.dimension}  entries={len(c)}")
        if len(c):
            print(f"volume range      {c.volumes.min():.1f} .. {c.volumes.max():.1f} A^3")
            for sid in c.ids[:args.limit]:
                print(f"  {sid}")
        return 0
    mesh = read_surface(path)
    rep = validate_mesh(mesh)
    print(f"surface  vertices={mesh.n_vertices}  faces={mesh.n_faces}")
    print(f"potential={'yes' if mesh.potential is not None else 'no'}  "
          f"normals={'yes' if mesh.normals is not None else 'no'}  "
          f"extra={sorted(mesh.extra)}")
    print(f"degenerate faces={len(rep.degenerate_faces)}  "
          f"unreferenced vertices={len(rep.unreferenced_vertices)}  "
          f"non-manifold edges={len(rep.non_manifold_edges)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surfret", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("describe", help="compute a descriptor cache for a manifest")
    d.add_argument("--manifest", required=True)
    d.add_argument("--method", required=True, choices=sorted(METHOD_DIMS))
    d.add_argument("--out", required=True, help="cache file to write")
    d.add_argument("--config")
    d.add_argument("--jobs", type=int, default=1)
    d.add_argument("--strict", action="store_true", help="fail on the first bad entry")
    d.set_defaults(func=cmd_describe)

    c = sub.add_parser("classify", help="volume-filtered nearest neighbour predictions")
    c.add_argument("--cache", required=True, help="training cache")
    c.add_argument("--query", required=True, help="test cache")
    c.add_argument("--manifest", required=True, help="labelled training manifest")
    c.add_argument("--out", required=True, help="predictions CSV")
    c.add_argument("--tolerance", type=float)
    c.add_argument("--config")
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_classify)

    e = sub.add_parser("evaluate", help="score predictions against a labelled manifest")
    e.add_argument("--predictions", required=True)
    e.add_argument("--manifest", required=True, help="manifest with ground-truth labels")
    e.add_argument("--out", required=True, help="report prefix (.txt, .json, _per_class.csv)")
    e.add_argument("--labels", help="manifest whose classes are all listed (e.g. training set)")
    e.add_argument("--config")
    e.set_defaults(func=cmd_evaluate)

    i = sub.add_parser("inspect", help="summarise a surface file or a descriptor cache")
    i.add_argument("path")
    i.add_argument("--limit", type=int, default=10)
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (SurfretError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
