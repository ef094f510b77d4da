"""Small synthetic retrieval benchmark where potential sign carries the class.

Four geometry families, each seen with a dipolar potential of either
polarity, give eight classes. Both polarities of a class pair reuse the same
jittered mesh, so shape-only descriptors cannot tell them apart while a
descriptor that splits the surface by potential sign can.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .mesh import SurfaceMesh
from .pipeline import write_manifest
from .synthetic import dipolar_potential, icosphere, random_rotation
from .vtk_io import save_surface

SHAPES = ("sphere", "prolate", "oblate", "cuboid")
POLARITIES = ("neg", "pos")


def _shape_radius(shape: str, u: np.ndarray, scale: np.ndarray) -> np.ndarray:
    v = u / scale                      # ellipsoid-style stretch through per-axis scales
    if shape == "cuboid":
        return 1.0 / (np.abs(v) ** 4).sum(axis=1) ** 0.25
    return 1.0 / np.linalg.norm(v, axis=1)


_AXES = {
    "sphere": (16.0, 16.0, 16.0),
    "prolate": (24.0, 13.0, 13.0),
    "oblate": (19.0, 19.0, 10.0),
    "cuboid": (14.0, 14.0, 14.0),
}


def jittered_shape(shape: str, rng, subdivisions: int = 4) -> SurfaceMesh:
    """One random instance of a family: axis jitter, mild bumps, random pose."""
    base = icosphere(subdivisions)
    u = base.vertices
    scale = np.asarray(_AXES[shape]) * (1.0 + 0.04 * rng.standard_normal(3))
    r = _shape_radius(shape, u, scale)
    centers = rng.normal(size=(4, 3))
    centers /= np.linalg.norm(centers, axis=1)[:, None]
    d2 = ((u[:, None, :] - centers[None]) ** 2).sum(axis=2)
    r = r * (1.0 + 0.05 * np.exp(-d2 / 0.5) @ rng.uniform(-1, 1, 4))
    pts = (u * r[:, None]) @ random_rotation(rng).T + rng.uniform(-5, 5, 3)
    return SurfaceMesh(pts, base.faces)


def make_polarity_benchmark(seed: int = 0, n_per_class: int = 5, subdivisions: int = 4):
    """``{"train": [...], "test": [...]}`` lists of ``(id, label, mesh)``.

    Each split holds ``n_per_class`` meshes of each of the eight classes.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for split in ("train", "test"):
        items = []
        for shape in SHAPES:
            for i in range(n_per_class):
                geom = jittered_shape(shape, rng, subdivisions)
                direction = rng.normal(size=3)
                for pol in POLARITIES:
                    sign = 1.0 if pol == "pos" else -1.0
                    mesh = geom.with_potential(sign * dipolar_potential(geom, direction))
                    items.append((f"{split}_{shape}_{i:02d}_{pol}", f"{shape}-{pol}", mesh))
        out[split] = items
    return out


def write_polarity_benchmark(root, seed: int = 0, n_per_class: int = 5):
    """Write the benchmark as surface files plus ``train.csv`` / ``test.csv`` manifests."""
    root = Path(root)
    (root / "surfaces").mkdir(parents=True, exist_ok=True)
    paths = {}
    for split, items in make_polarity_benchmark(seed, n_per_class).items():
        rows = []
        for sid, label, mesh in items:
            rel = Path("surfaces") / f"{sid}.vtk"
            save_surface(mesh, root / rel)
            rows.append((sid, rel, label))
        paths[split] = root / f"{split}.csv"
        write_manifest(paths[split], rows)
    return paths["train"], paths["test"]
