"""FPFH local features and their global statistics with potential histograms."""

from __future__ import annotations

from math import pi

import numpy as np
from scipy.spatial import cKDTree

from .descriptor import Descriptor
from .errors import CoincidentPoints, MissingChannel, TooFewPoints
from .mesh import SurfaceMesh
from .sampling import PointCloud, sample_points
from .voxel import grid_volume, voxelize_solid

N_BINS = 11
FEATURE_DIM = 3 * N_BINS
DEFAULT_K = 16
HIST_BINS = 16
HIST_RANGE = (-20.0, 20.0)
STAT_DIM = FEATURE_DIM + FEATURE_DIM * (FEATURE_DIM + 1) // 2 + HIST_BINS + 2

_RANGES = ((-1.0, 1.0), (-1.0, 1.0), (-pi, pi))
_COINCIDENT = 1e-12
_PARALLEL = 1e-9


def _fallback_perpendicular(u):
    """Deterministic unit vectors orthogonal to each row of ``u``."""
    axis = np.zeros_like(u)
    axis[np.arange(len(u)), np.argmin(np.abs(u), axis=1)] = 1.0
    v = np.cross(u, axis)
    return v / np.linalg.norm(v, axis=1)[:, None]


def pair_features(ps, ns, pt, nt):
    """Vectorised Darboux-frame features for rows of point/normal pairs.

    Returns ``(alpha, phi, theta, distance)`` arrays. The endpoint whose
    normal makes the smaller angle with the line to the other endpoint acts
    as source; ties keep the given order.
    """
    ps, ns, pt, nt = (np.atleast_2d(np.asarray(a, float)) for a in (ps, ns, pt, nt))
    d = pt - ps
    dist = np.linalg.norm(d, axis=1)
    if np.any(dist < _COINCIDENT):
        raise CoincidentPoints("pair features of coincident points")
    d = d / dist[:, None]
    cos_s = np.einsum("ij,ij->i", ns, d)
    cos_t = -np.einsum("ij,ij->i", nt, d)
    swap = cos_t > cos_s
    u = np.where(swap[:, None], nt, ns)
    n_tgt = np.where(swap[:, None], ns, nt)
    d = np.where(swap[:, None], -d, d)
    phi = np.where(swap, cos_t, cos_s)

    v = np.cross(u, d)
    vn = np.linalg.norm(v, axis=1)
    bad = vn < _PARALLEL
    v[~bad] /= vn[~bad, None]
    if np.any(bad):
        v[bad] = _fallback_perpendicular(u[bad])
    w = np.cross(u, v)
    alpha = np.einsum("ij,ij->i", v, n_tgt)
    theta = np.arctan2(np.einsum("ij,ij->i", w, n_tgt), np.einsum("ij,ij->i", u, n_tgt))
    return alpha, phi, theta, dist


def darboux_features(source, target):
    """Features of one pair; ``source`` and ``target`` are (point, normal) tuples."""
    a, p, t, dist = pair_features(source[0], source[1], target[0], target[1])
    return float(a[0]), float(p[0]), float(t[0]), float(dist[0])


def _bin(values, lo, hi):
    b = np.floor((values - lo) / (hi - lo) * N_BINS).astype(np.int64)
    return np.clip(b, 0, N_BINS - 1)


def neighbors(positions, k: int):
    """Indices (N, k) and distances of each point's k nearest other points."""
    n = len(positions)
    tree = cKDTree(positions)
    dist, idx = tree.query(positions, k + 1)
    is_self = idx == np.arange(n)[:, None]
    # drop the point itself, or the farthest hit if duplicates pushed it out
    drop = np.where(is_self.any(axis=1), is_self.argmax(axis=1), k)
    keep = np.ones_like(is_self)
    keep[np.arange(n), drop] = False
    return idx[keep].reshape(n, k), dist[keep].reshape(n, k)


def spfh(positions, normals, nbr) -> np.ndarray:
    """Simplified histograms: each 11-bin block sums to 100 per point."""
    n, k = nbr.shape
    src = np.repeat(np.arange(n), k)
    tgt = nbr.ravel()
    feats = pair_features(positions[src], normals[src], positions[tgt], normals[tgt])
    hist = np.zeros((n, FEATURE_DIM))
    for j, (f, (lo, hi)) in enumerate(zip(feats[:3], _RANGES)):
        np.add.at(hist, (src, j * N_BINS + _bin(f, lo, hi)), 100.0 / k)
    return hist


def fpfh_all(cloud: PointCloud, k: int = DEFAULT_K) -> np.ndarray:
    """Per-point 33-bin FPFH.

    ``FPFH(p) = SPFH(p) + (1/k) * sum_q SPFH(q) / |p - q|`` over the k
    nearest neighbours q of p.
    """
    n = len(cloud.positions)
    if k < 1 or n <= k:
        raise TooFewPoints(f"need more than k={k} points, got {n}")
    nbr, dist = neighbors(cloud.positions, k)
    if np.any(dist < _COINCIDENT):
        raise CoincidentPoints("cloud contains coincident points")
    s = spfh(cloud.positions, cloud.normals, nbr)
    # explicit distances and a sequential neighbour sum keep the result bit-stable
    diff = cloud.positions[nbr] - cloud.positions[:, None, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    acc = np.zeros_like(s)
    for j in range(k):
        acc += s[nbr[:, j]] / dist[:, j, None]
    return s + acc / k


def potential_histogram(potentials, bins: int = HIST_BINS, value_range=HIST_RANGE):
    """Fraction of points per equal-width bin; values outside the range go to the end bins."""
    lo, hi = value_range
    p = np.clip(np.asarray(potentials, float), lo, hi)
    b = np.clip(np.floor((p - lo) / (hi - lo) * bins).astype(np.int64), 0, bins - 1)
    return np.bincount(b, minlength=bins) / len(p)


def aggregate_stat_descriptor(features, potentials, bins: int = HIST_BINS,
                              value_range=HIST_RANGE) -> np.ndarray:
    """Mean, upper-triangular covariance, potential histogram/mean/variance; unit L2 norm.

    The covariance uses the N - 1 denominator and is flattened row by row
    over the upper triangle including the diagonal. The potential variance
    uses the same denominator.
    """
    if potentials is None:
        raise MissingChannel("statistics descriptor needs potentials")
    f = np.asarray(features, float)
    p = np.asarray(potentials, float)
    if len(f) < 2:
        raise TooFewPoints("need at least two points")
    cov = np.cov(f, rowvar=False, ddof=1)
    iu = np.triu_indices(f.shape[1])
    vec = np.concatenate([f.mean(axis=0), cov[iu],
                          potential_histogram(p, bins, value_range),
                          [p.mean(), p.var(ddof=1)]])
    return vec / np.linalg.norm(vec)


def descriptor_fpfh_stat(mesh: SurfaceMesh, n_points: int = 30000, k: int = DEFAULT_K,
                         bins: int = HIST_BINS, value_range=HIST_RANGE,
                         spacing: float = 1.0) -> Descriptor:
    """Sample the surface, compute FPFH per point and aggregate (612 values by default)."""
    if mesh.potential is None:
        raise MissingChannel("statistics descriptor needs potentials")
    cloud = sample_points(mesh, n_points)
    vec = aggregate_stat_descriptor(fpfh_all(cloud, k), cloud.potentials, bins, value_range)
    return Descriptor("fpfh-stat", vec, grid_volume(voxelize_solid(mesh, spacing)))
