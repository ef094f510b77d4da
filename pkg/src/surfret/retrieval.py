"""Volume-filtered nearest-neighbour classification over descriptor vectors."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, DuplicateId, EmptyIndex, SurfretError

DEFAULT_TOLERANCE = 0.20

_DENOMINATORS = {
    "max": lambda vt, vq: np.maximum(vt, vq),
    "min": lambda vt, vq: np.minimum(vt, vq),
    "mean": lambda vt, vq: 0.5 * (vt + vq),
    "query": lambda vt, vq: np.full_like(vt, vq),
    "train": lambda vt, vq: vt,
}


@dataclass(frozen=True)
class IndexEntry:
    id: str
    label: Optional[str]
    vector: np.ndarray
    volume: float


class DescriptorIndex:
    """Immutable set of labelled training descriptors, stored in ascending id order."""

    def __init__(self, ids, labels, vectors, volumes, method=None):
        self.ids = tuple(ids)
        self.labels = tuple(labels)
        self.vectors = np.asarray(vectors, dtype=np.float64)
        self.volumes = np.asarray(volumes, dtype=np.float64)
        self.method = method
        for a in (self.vectors, self.volumes):
            a.setflags(write=False)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.ids)


def build_index(entries: Iterable, method: Optional[str] = None) -> DescriptorIndex:
    """Build an index from ``IndexEntry`` objects or ``(id, label, vector, volume)`` tuples."""
    rows = [e if isinstance(e, IndexEntry) else IndexEntry(*e) for e in entries]
    if not rows:
        raise EmptyIndex("index needs at least one entry")
    dims = {np.size(r.vector) for r in rows}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed descriptor dimensions {sorted(dims)}")
    seen = set()
    for r in rows:
        if r.id in seen:
            raise DuplicateId(f"duplicate id {r.id!r}")
        seen.add(r.id)
        if not r.volume > 0:
            raise ValueError(f"entry {r.id!r} has non-positive volume {r.volume}")
    rows.sort(key=lambda r: r.id)
    return DescriptorIndex([r.id for r in rows], [r.label for r in rows],
                           np.stack([np.ravel(r.vector) for r in rows]),
                           [r.volume for r in rows], method)


@dataclass(frozen=True, eq=False)
class RankedResult:
    """Training entries by ascending distance (ties by id), with exclusion flags.

    When ``keep`` was given to :func:`classify_nn` the ranking stops after the
    ``keep``-th non-excluded entry.
    """

    query_id: Optional[str]
    train_ids: tuple
    distances: np.ndarray
    labels: tuple
    excluded: np.ndarray
    predicted_label: Optional[str]
    nearest_id: str
    nearest_distance: float
    waived: bool

    def __eq__(self, other):
        return (isinstance(other, RankedResult)
                and self.query_id == other.query_id
                and self.train_ids == other.train_ids
                and np.array_equal(self.distances, other.distances)
                and self.labels == other.labels
                and np.array_equal(self.excluded, other.excluded)
                and self.predicted_label == other.predicted_label
                and self.nearest_id == other.nearest_id
                and self.nearest_distance == other.nearest_distance
                and self.waived == other.waived)


def _query_parts(query):
    if hasattr(query, "values") and hasattr(query, "volume"):
        return np.asarray(query.values, float), float(query.volume)
    vec, vol = query
    return np.asarray(vec, float), float(vol)


def volume_excluded(train_volumes, query_volume, tolerance=DEFAULT_TOLERANCE,
                    denominator: str = "max") -> np.ndarray:
    """True where the relative volume difference exceeds ``tolerance``."""
    vt = np.asarray(train_volumes, float)
    rel = np.abs(vt - query_volume) / _DENOMINATORS[denominator](vt, query_volume)
    return rel > tolerance


def classify_nn(query, index: DescriptorIndex, volume_tolerance: float = DEFAULT_TOLERANCE,
                *, query_id: Optional[str] = None, denominator: str = "max",
                keep: Optional[int] = None) -> RankedResult:
    """Label of the nearest training entry whose volume passes the filter.

    ``query`` is a :class:`~surfret.descriptor.Descriptor` or a
    ``(vector, volume)`` pair. Distances are Euclidean. An entry is excluded
    when ``|V_train - V_query| / max(V_train, V_query)`` exceeds the
    tolerance (other denominators via ``denominator``). If every entry is
    excluded the filter is waived and the overall nearest entry is used.
    """
    vec, vol = _query_parts(query)
    if vec.shape != (index.dimension,):
        raise DimensionMismatch(f"query has {vec.size} values, index has {index.dimension}")
    dist = np.sqrt(((index.vectors - vec) ** 2).sum(axis=1))
    order = np.argsort(dist, kind="stable")        # index is in id order
    excluded = volume_excluded(index.volumes, vol, volume_tolerance, denominator)[order]
    waived = bool(excluded.all())
    first = 0 if waived else int(np.argmax(~excluded))
    if keep is not None:
        allowed = np.flatnonzero(~excluded)
        stop = len(order) if waived or len(allowed) <= keep else int(allowed[keep - 1]) + 1
        order, excluded = order[:stop], excluded[:stop]
    best = order[first]
    return RankedResult(
        query_id=query_id,
        train_ids=tuple(index.ids[i] for i in order),
        distances=dist[order],
        labels=tuple(index.labels[i] for i in order),
        excluded=excluded,
        predicted_label=index.labels[best],
        nearest_id=index.ids[best],
        nearest_distance=float(dist[best]),
        waived=waived,
    )


@dataclass(frozen=True)
class QueryError:
    position: int
    query_id: Optional[str]
    error: SurfretError


def batch_classify(queries: Sequence, index: DescriptorIndex,
                   tolerance: float = DEFAULT_TOLERANCE, *, ids: Optional[Sequence] = None,
                   denominator: str = "max", keep: Optional[int] = None,
                   jobs: int = 1) -> List:
    """``classify_nn`` over many queries, in input order.

    A query that fails yields a :class:`QueryError` in its slot instead of
    stopping the batch.
    """
    ids = [None] * len(queries) if ids is None else list(ids)

    def one(i):
        try:
            return classify_nn(queries[i], index, tolerance, query_id=ids[i],
                               denominator=denominator, keep=keep)
        except SurfretError as exc:
            return QueryError(i, ids[i], exc)

    if jobs <= 1 or len(queries) < 2:
        return [one(i) for i in range(len(queries))]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, range(len(queries))))
