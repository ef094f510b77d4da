"""Synthetic closed surfaces for tests, demos and the desk-scale benchmark."""

from __future__ import annotations

import numpy as np
from scipy.spatial.transform import Rotation

from .mesh import SurfaceMesh


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> SurfaceMesh:
    """Geodesic sphere with outward counter-clockwise faces."""
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def mid(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                p = verts[a] + verts[b]
                verts.append(p / np.linalg.norm(p))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return SurfaceMesh(np.array(verts) * radius, np.array(faces))


def radial_surface(radius_fn, subdivisions: int = 4) -> SurfaceMesh:
    """Star-shaped surface ``u -> radius_fn(u) * u`` over a unit icosphere."""
    base = icosphere(subdivisions)
    u = base.vertices
    return SurfaceMesh(u * np.asarray(radius_fn(u))[:, None], base.faces)


def ellipsoid(axes, subdivisions: int = 4) -> SurfaceMesh:
    base = icosphere(subdivisions)
    return SurfaceMesh(base.vertices * np.asarray(axes, float), base.faces)


def blob(rng, radius: float = 18.0, n_bumps: int = 6, amplitude: float = 0.15,
         width: float = 0.6, subdivisions: int = 4) -> SurfaceMesh:
    """Smooth random star-shaped blob made of Gaussian bumps on a sphere."""
    centers = rng.normal(size=(n_bumps, 3))
    centers /= np.linalg.norm(centers, axis=1)[:, None]
    weights = rng.uniform(-1.0, 1.0, n_bumps)

    def r(u):
        d2 = ((u[:, None, :] - centers[None]) ** 2).sum(axis=2)
        return radius * (1.0 + amplitude * (np.exp(-d2 / (2 * width ** 2)) @ weights))

    return radial_surface(r, subdivisions)


def random_rotation(rng) -> np.ndarray:
    return Rotation.random(random_state=rng).as_matrix()


def dipolar_potential(mesh: SurfaceMesh, direction, offset: float = 0.3,
                      strength: float = 5.0) -> np.ndarray:
    """Smooth potential field: positive on most of the surface with one negative patch."""
    c = mesh.vertices.mean(axis=0)
    u = mesh.vertices - c
    u /= np.linalg.norm(u, axis=1)[:, None]
    d = np.asarray(direction, float)
    d /= np.linalg.norm(d)
    return strength * (offset + u @ d)
