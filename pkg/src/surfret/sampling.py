"""Quasi-random area-weighted point sampling of triangle meshes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptySurface, UnsupportedDimension
from .mesh import SurfaceMesh, face_areas, vertex_normals

_BITS = 32

# Joe & Kuo (2008) primitive polynomials and initial direction numbers,
# dimensions 2..8: (degree s, coefficient bits a, m_1..m_s).
_JOE_KUO = [
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
]
MAX_SOBOL_DIMENSION = len(_JOE_KUO) + 1


def _direction_numbers(dim: int) -> np.ndarray:
    """Direction integers V[0..31] scaled by 2**32 for one coordinate."""
    if dim == 0:
        return np.array([1 << (_BITS - 1 - k) for k in range(_BITS)], dtype=np.uint64)
    s, a, m = _JOE_KUO[dim - 1]
    v = [0] * _BITS
    for k in range(min(s, _BITS)):
        v[k] = m[k] << (_BITS - 1 - k)
    for k in range(s, _BITS):
        x = v[k - s] ^ (v[k - s] >> s)
        for j in range(1, s):
            if (a >> (s - 1 - j)) & 1:
                x ^= v[k - j]
        v[k] = x
    return np.array(v, dtype=np.uint64)


def sobol_sequence(dimension: int, count: int) -> np.ndarray:
    """First ``count`` points of the unscrambled Sobol sequence.

    Points are produced in Gray-code order with the zero point first, so
    dimension 1 starts 0, 0.5, 0.75, 0.25.

    Returns
    -------
    (count, dimension) float64 array in [0, 1).
    """
    if not 1 <= dimension <= MAX_SOBOL_DIMENSION:
        raise UnsupportedDimension(
            f"Sobol dimension must be in 1..{MAX_SOBOL_DIMENSION}, got {dimension}")
    if count < 0:
        raise ValueError("count must be non-negative")
    if count >= 1 << _BITS:
        raise ValueError("count exceeds the 32-bit sequence period")
    i = np.arange(count, dtype=np.uint64)
    gray = i ^ (i >> np.uint64(1))
    out = np.empty((count, dimension))
    for d in range(dimension):
        v = _direction_numbers(d)
        x = np.zeros(count, dtype=np.uint64)
        for k in range(_BITS):
            bit = (gray >> np.uint64(k)) & np.uint64(1)
            x ^= bit * v[k]
        out[:, d] = x / float(1 << _BITS)
    return out


@dataclass(frozen=True, eq=False)
class PointCloud:
    positions: np.ndarray
    normals: np.ndarray
    potentials: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.positions)

    def transformed(self, rotation=None, translation=None) -> "PointCloud":
        R = np.eye(3) if rotation is None else np.asarray(rotation, float)
        t = np.zeros(3) if translation is None else np.asarray(translation, float)
        return PointCloud(self.positions @ R.T + t, self.normals @ R.T, self.potentials)


def sample_points(mesh: SurfaceMesh, n: int) -> PointCloud:
    """Place ``n`` points on the surface with a 3-D Sobol stream.

    The first coordinate picks a face through the cumulative area table, the
    other two (r1, r2) place the point with Osada's rule
    ``(1 - sqrt(r1)) A + sqrt(r1) (1 - r2) B + sqrt(r1) r2 C``. Normals and
    potentials are interpolated with the same barycentric weights; normals
    come from the file when present, else from :func:`vertex_normals`.
    """
    areas = face_areas(mesh)
    if not np.any(areas > 0):
        raise EmptySurface("mesh has no face with positive area")
    cum = np.cumsum(areas)
    u = sobol_sequence(3, n)
    face = np.searchsorted(cum, u[:, 0] * cum[-1], side="right")
    face = np.minimum(face, len(cum) - 1)

    sr1 = np.sqrt(u[:, 1])
    r2 = u[:, 2]
    w = np.stack([1.0 - sr1, sr1 * (1.0 - r2), sr1 * r2], axis=1)
    idx = mesh.faces[face]
    positions = np.einsum("nk,nkd->nd", w, mesh.vertices[idx])

    vn = mesh.normals if mesh.normals is not None else vertex_normals(mesh)
    normals = np.einsum("nk,nkd->nd", w, vn[idx])
    length = np.linalg.norm(normals, axis=1)
    bad = length < 1e-12
    if np.any(bad):
        # opposing vertex normals cancel: fall back to the face normal
        tri = mesh.vertices[idx[bad]]
        fn = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        normals[bad] = fn
        length[bad] = np.linalg.norm(fn, axis=1)
    normals /= length[:, None]

    potentials = None
    if mesh.potential is not None:
        potentials = np.einsum("nk,nk->n", w, mesh.potential[idx])
    return PointCloud(positions, normals, potentials)
