"""Batch driver: manifests, descriptor cache files, describe/classify/evaluate runs."""

from __future__ import annotations

import csv
import io
import json
import logging
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .config import Config
from .descriptor import METHOD_DIMS, Descriptor
from .errors import (CacheFormatError, DimensionMismatch, ManifestError, MethodMismatch,
                     SurfretError)
from .fpfh import HIST_BINS, descriptor_fpfh_stat
from .metrics import confusion, format_table, score
from .retrieval import QueryError, batch_classify, build_index
from .vtk_io import read_surface
from .zernike import descriptor_3dzd, n_invariants

log = logging.getLogger(__name__)

MAGIC = b"SSRD1"
PREDICTION_HEADER = ("id", "predicted_label", "nearest_train_id", "distance", "waived")
ERROR_HEADER = ("id", "path", "error", "message")


# -- manifests -----------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    id: str
    path: Path
    label: Optional[str]       # None means unlabeled


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple
    split: Optional[str] = None

    def __len__(self):
        return len(self.entries)

    def labels(self) -> dict:
        return {e.id: e.label for e in self.entries if e.label is not None}


def parse_manifest(text: str, base_dir=".", split: Optional[str] = None) -> DatasetManifest:
    """CSV with header ``id,path,label``; relative paths are taken from ``base_dir``."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"id", "path", "label"} <= set(reader.fieldnames):
        raise ManifestError("manifest header must contain id,path,label")
    base = Path(base_dir)
    entries, seen = [], set()
    for lineno, row in enumerate(reader, 2):
        sid = (row["id"] or "").strip()
        if not sid:
            raise ManifestError(f"line {lineno}: empty id")
        if sid in seen:
            raise ManifestError(f"line {lineno}: duplicate id {sid!r}")
        seen.add(sid)
        label = (row["label"] or "").strip() or None
        if split == "train" and label is None:
            raise ManifestError(f"line {lineno}: training entry {sid!r} has no label")
        path = Path((row["path"] or "").strip())
        entries.append(ManifestEntry(sid, path if path.is_absolute() else base / path, label))
    return DatasetManifest(tuple(entries), split)


def read_manifest(path, split: Optional[str] = None) -> DatasetManifest:
    path = Path(path)
    return parse_manifest(path.read_text(), path.parent, split)


def write_manifest(path, rows):
    """``rows`` are (id, path, label-or-None) triples."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("id", "path", "label"))
        for sid, p, label in rows:
            w.writerow((sid, str(p), "" if label is None else label))


# -- descriptor cache ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DescriptorCache:
    """Contents of one cache file. Vectors are stored as float32."""

    method: str
    ids: tuple
    volumes: np.ndarray
    vectors: np.ndarray

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        return (isinstance(other, DescriptorCache) and self.method == other.method
                and self.ids == other.ids and self.dimension == other.dimension
                and np.array_equal(self.volumes, other.volumes)
                and np.array_equal(self.vectors, other.vectors))


def make_cache(method: str, ids, volumes, vectors, dimension: Optional[int] = None):
    dim = METHOD_DIMS.get(method, dimension) if dimension is None else dimension
    vec = np.asarray(vectors, dtype=np.float32)
    if len(ids) == 0:
        if dim is None:
            raise CacheFormatError(f"unknown dimension for method {method!r}")
        vec = vec.reshape(0, dim)
    if vec.ndim != 2 or (dim is not None and vec.shape[1] != dim):
        raise DimensionMismatch(f"vectors have shape {vec.shape}, expected (*, {dim})")
    return DescriptorCache(method, tuple(ids), np.asarray(volumes, np.float64).reshape(-1), vec)


def encode_cache(cache: DescriptorCache) -> bytes:
    """Little-endian layout::

        b"SSRD1" | u16 len + method utf-8 | u32 dimension | u32 count
        then per entry: u16 len + id utf-8 | f64 volume | dimension x f32
    """
    method = cache.method.encode()
    out = [MAGIC, struct.pack("<H", len(method)), method,
           struct.pack("<II", cache.dimension, len(cache))]
    for sid, vol, vec in zip(cache.ids, cache.volumes, cache.vectors):
        b = sid.encode()
        out += [struct.pack("<H", len(b)), b, struct.pack("<d", vol),
                vec.astype("<f4").tobytes()]
    return b"".join(out)


def decode_cache(data: bytes) -> DescriptorCache:
    view = memoryview(data)
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(view):
            raise CacheFormatError("cache file is truncated")
        chunk = view[pos:pos + n]
        pos += n
        return chunk

    if bytes(take(len(MAGIC))) != MAGIC:
        raise CacheFormatError("not a descriptor cache (bad magic)")
    (mlen,) = struct.unpack("<H", take(2))
    method = bytes(take(mlen)).decode()
    dim, count = struct.unpack("<II", take(8))
    ids, vols = [], np.empty(count)
    vecs = np.empty((count, dim), dtype=np.float32)
    for i in range(count):
        (n,) = struct.unpack("<H", take(2))
        ids.append(bytes(take(n)).decode())
        (vols[i],) = struct.unpack("<d", take(8))
        vecs[i] = np.frombuffer(take(4 * dim), dtype="<f4")
    if pos != len(view):
        raise CacheFormatError(f"{len(view) - pos} trailing bytes after {count} entries")
    return DescriptorCache(method, tuple(ids), vols, vecs)


def write_cache(path, cache: DescriptorCache):
    Path(path).write_bytes(encode_cache(cache))


def read_cache(path) -> DescriptorCache:
    return decode_cache(Path(path).read_bytes())


# -- describe ----------------------------------------------------------------------

def describe_mesh(mesh, method: str, config: Config = Config()) -> Descriptor:
    if method in ("zernike363", "zernike121"):
        return descriptor_3dzd(mesh, method == "zernike363", spacing=config.spacing,
                               order=config.order, ball_radius=config.ball_radius,
                               solid=config.voxel_fill == "solid")
    if method == "fpfh-stat":
        return descriptor_fpfh_stat(mesh, config.n_points, config.k, config.bins,
                                    config.hist_range, config.spacing)
    raise ValueError(f"unknown method {method!r}")


def _describe_file(job):
    path, method, config = job
    try:
        d = describe_mesh(read_surface(path), method, config)
        return d.values, d.volume, None
    except OSError as exc:
        return None, None, ("Io", str(exc))
    except SurfretError as exc:
        return None, None, (type(exc).__name__, str(exc))


@dataclass(frozen=True)
class DescribeResult:
    cache: DescriptorCache
    errors: List[tuple]        # (id, path, error type, message)


def run_describe(manifest: DatasetManifest, method: str, config: Config = Config(),
                 out=None, *, jobs: int = 1, strict: bool = False) -> DescribeResult:
    """Describe every manifest entry, in manifest order.

    Failures are collected per entry (and written next to ``out`` as
    ``<out>.errors.csv``); with ``strict`` the first failure in manifest
    order is raised after the batch instead.
    """
    if method not in METHOD_DIMS:
        raise ValueError(f"unknown method {method!r}; choose from {sorted(METHOD_DIMS)}")
    jobs_in = [(e.path, method, config) for e in manifest.entries]
    if jobs > 1 and len(jobs_in) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_describe_file, jobs_in))
    else:
        results = [_describe_file(j) for j in jobs_in]

    ids, vols, vecs, errors = [], [], [], []
    for e, (vec, vol, err) in zip(manifest.entries, results):
        if err is None:
            ids.append(e.id)
            vols.append(vol)
            vecs.append(vec)
        else:
            errors.append((e.id, str(e.path), *err))
            log.warning("%s: %s: %s", e.id, *err)
    if strict and errors:
        sid, path, kind, msg = errors[0]
        raise SurfretError(f"{sid} ({path}): {kind}: {msg}")
    dim = METHOD_DIMS[method]
    if method.startswith("zernike"):
        dim = n_invariants(config.order) * (3 if method == "zernike363" else 1)
    else:
        dim += config.bins - HIST_BINS
    cache = make_cache(method, ids, vols, vecs, dim)
    if out is not None:
        write_cache(out, cache)
        write_error_log(str(out) + ".errors.csv", errors)
    return DescribeResult(cache, errors)


def write_error_log(path, errors):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ERROR_HEADER)
        w.writerows(errors)


# -- classify ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    id: str
    predicted_label: str
    nearest_train_id: str
    distance: float
    waived: bool


def run_classify(train: DescriptorCache, test: DescriptorCache, train_labels: dict,
                 tolerance: float = 0.2, out=None, *, volume_ratio: str = "max",
                 jobs: int = 1) -> List[Prediction]:
    """Volume-filtered 1-NN of every test entry, in test-cache order."""
    if train.method != test.method:
        raise MethodMismatch(f"train cache is {train.method!r}, test cache is {test.method!r}")
    if train.dimension != test.dimension:
        raise DimensionMismatch(f"train dimension {train.dimension}, test {test.dimension}")
    missing = [i for i in train.ids if i not in train_labels]
    if missing:
        raise ManifestError(f"no label for training ids: {', '.join(missing[:10])}")
    preds = []
    if len(test):
        index = build_index(zip(train.ids, (train_labels[i] for i in train.ids),
                                train.vectors.astype(np.float64), train.volumes),
                            method=train.method)
        queries = list(zip(test.vectors.astype(np.float64), test.volumes))
        for r in batch_classify(queries, index, tolerance, ids=test.ids,
                                denominator=volume_ratio, keep=1, jobs=jobs):
            if isinstance(r, QueryError):
                raise r.error
            preds.append(Prediction(r.query_id, r.predicted_label, r.nearest_id,
                                    r.nearest_distance, r.waived))
    if out is not None:
        write_predictions(out, preds)
    return preds


def write_predictions(path, preds: Sequence[Prediction]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PREDICTION_HEADER)
        for p in preds:
            w.writerow((p.id, p.predicted_label, p.nearest_train_id, repr(p.distance),
                        int(p.waived)))


def read_predictions(path) -> List[Prediction]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames[:5]) != PREDICTION_HEADER:
            raise ManifestError("predictions header must be " + ",".join(PREDICTION_HEADER))
        return [Prediction(r["id"], r["predicted_label"], r["nearest_train_id"],
                           float(r["distance"]), r["waived"] in ("1", "true", "True"))
                for r in reader]


# -- evaluate --------------------------------------------------------------------------------

def run_evaluate(predictions, truth_manifest: DatasetManifest, out_prefix=None,
                 config: Config = Config(), extra_labels=None):
    """Score predictions against the labels of ``truth_manifest``.

    Writes ``<prefix>.txt`` (table), ``<prefix>.json`` (full report with the
    config hash and confusion matrix) and ``<prefix>_per_class.csv``.
    Raises :class:`MissingPrediction` when a labelled id has no prediction.
    """
    if isinstance(predictions, (str, Path)):
        predictions = read_predictions(predictions)
    truth = truth_manifest.labels()
    report = score(confusion(truth, {p.id: p.predicted_label for p in predictions},
                             extra_labels))
    if out_prefix is not None:
        prefix = Path(out_prefix)
        Path(str(prefix) + ".txt").write_text(
            f"config {config.hash()}\n" + format_table(report))
        doc = {"config_hash": config.hash(), "config": config.dumps(),
               "waived": sum(p.waived for p in predictions if p.id in truth)}
        doc.update(report.to_dict())
        Path(str(prefix) + ".json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        with open(str(prefix) + "_per_class.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("label", "tp", "fp", "fn", "precision", "recall", "f1", "support"))
            for c in report.per_class:
                w.writerow((c.label, c.tp, c.fp, c.fn, repr(c.precision), repr(c.recall),
                            repr(c.f1), c.support))
    return report
