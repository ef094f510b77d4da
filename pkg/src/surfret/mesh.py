"""Triangle surface meshes and the geometric primitives built on them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import EmptyMesh, InvalidMesh, MissingChannel

DEGENERATE_AREA = 1e-12  # Å²


def _frozen(a, dtype, shape_tail=()):
    arr = np.array(a, dtype=dtype, copy=True)
    if arr.size == 0:
        arr = arr.reshape((0,) + shape_tail)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    """Triangle mesh with optional per-vertex channels.

    Positions are in Å, potentials in kT/e. Arrays are copied and made
    read-only on construction, so a mesh can be shared freely.

    Parameters
    ----------
    vertices : (V, 3) array_like
    faces : (F, 3) array_like of int
    potential, normal_potential : (V,) array_like, optional
    normals : (V, 3) array_like, optional
        Unit vertex normals as stored in the source file.
    extra : dict
        Additional named point arrays found in the file (unused).
    """

    vertices: np.ndarray
    faces: np.ndarray
    potential: Optional[np.ndarray] = None
    normal_potential: Optional[np.ndarray] = None
    normals: Optional[np.ndarray] = None
    extra: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        set_ = object.__setattr__
        v = _frozen(self.vertices, np.float64, (3,))
        f = _frozen(self.faces, np.int64, (3,))
        if v.ndim != 2 or v.shape[1] != 3:
            raise InvalidMesh(f"vertices must be (V, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise InvalidMesh(f"faces must be (F, 3), got {f.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidMesh("non-finite vertex coordinate")
        nv = len(v)
        if len(f):
            if f.min() < 0 or f.max() >= nv:
                raise InvalidMesh("face index out of range")
            if np.any((f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])):
                raise InvalidMesh("face references the same vertex twice")
        set_(self, "vertices", v)
        set_(self, "faces", f)
        for name in ("potential", "normal_potential"):
            a = getattr(self, name)
            if a is not None:
                a = _frozen(a, np.float64)
                if a.shape != (nv,):
                    raise InvalidMesh(f"{name} has shape {a.shape}, expected ({nv},)")
                if not np.all(np.isfinite(a)):
                    raise InvalidMesh(f"non-finite value in {name}")
                set_(self, name, a)
        if self.normals is not None:
            n = _frozen(self.normals, np.float64, (3,))
            if n.shape != (nv, 3):
                raise InvalidMesh(f"normals have shape {n.shape}, expected ({nv}, 3)")
            if not np.all(np.isfinite(n)):
                raise InvalidMesh("non-finite normal")
            set_(self, "normals", n)
        set_(self, "extra", dict(self.extra))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def with_potential(self, potential) -> "SurfaceMesh":
        return SurfaceMesh(self.vertices, self.faces, potential,
                           self.normal_potential, self.normals, self.extra)

    def transformed(self, rotation=None, translation=None, scale=1.0) -> "SurfaceMesh":
        """Rigidly move (and optionally scale) the mesh; normals follow the rotation."""
        R = np.eye(3) if rotation is None else np.asarray(rotation, float)
        t = np.zeros(3) if translation is None else np.asarray(translation, float)
        v = scale * self.vertices @ R.T + t
        n = None if self.normals is None else self.normals @ R.T
        return SurfaceMesh(v, self.faces, self.potential, self.normal_potential, n, self.extra)


@dataclass(frozen=True)
class ValidationReport:
    degenerate_faces: list
    unreferenced_vertices: list
    non_manifold_edges: list

    @property
    def ok(self) -> bool:
        return not (self.degenerate_faces or self.unreferenced_vertices
                    or self.non_manifold_edges)


def face_areas(mesh: SurfaceMesh) -> np.ndarray:
    """Per-face area in Å²."""
    return 0.5 * np.linalg.norm(_face_cross(mesh), axis=1)


def _face_cross(mesh):
    tri = mesh.vertices[mesh.faces]
    return np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])


def validate_mesh(mesh: SurfaceMesh, area_tol: float = DEGENERATE_AREA) -> ValidationReport:
    """Report degenerate faces, unreferenced vertices and non-manifold edges."""
    degenerate = np.flatnonzero(face_areas(mesh) <= area_tol).tolist()
    used = np.zeros(mesh.n_vertices, bool)
    used[mesh.faces.ravel()] = True
    unreferenced = np.flatnonzero(~used).tolist()
    if mesh.n_faces:
        f = mesh.faces
        edges = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        non_manifold = [tuple(int(i) for i in e) for e in uniq[counts > 2]]
    else:
        non_manifold = []
    return ValidationReport(degenerate, unreferenced, non_manifold)


def vertex_normals(mesh: SurfaceMesh, return_flags: bool = False):
    """Area-weighted unit vertex normals.

    The unnormalised face cross product has length twice the face area, so
    summing it over incident faces is the area-weighted average. Vertices with
    no incident non-degenerate face get ``(0, 0, 1)``; with ``return_flags``
    a boolean mask marking them is returned as well.
    """
    acc = np.zeros((mesh.n_vertices, 3))
    if mesh.n_faces:
        cross = _face_cross(mesh)
        for j in range(3):
            np.add.at(acc, mesh.faces[:, j], cross)
    norm = np.linalg.norm(acc, axis=1)
    flagged = norm <= 2 * DEGENERATE_AREA
    out = np.empty_like(acc)
    out[~flagged] = acc[~flagged] / norm[~flagged, None]
    out[flagged] = (0.0, 0.0, 1.0)
    if return_flags:
        return out, flagged
    return out


def centroid(mesh: SurfaceMesh) -> np.ndarray:
    if mesh.n_vertices == 0:
        raise EmptyMesh("centroid of a mesh without vertices")
    return mesh.vertices.mean(axis=0)


@dataclass(frozen=True, eq=False)
class SubSurface:
    """Subset of a parent mesh's faces, materialised with compact indexing."""

    face_index: np.ndarray
    mesh: SurfaceMesh

    @property
    def is_empty(self) -> bool:
        return len(self.face_index) == 0


def submesh(mesh: SurfaceMesh, face_index) -> SubSurface:
    """Keep the given faces and only the vertices they reference."""
    face_index = np.asarray(face_index, dtype=np.int64)
    faces = mesh.faces[face_index]
    keep = np.unique(faces)
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))

    def take(a):
        return None if a is None else a[keep]

    extra = {k: v[keep] for k, v in mesh.extra.items()
             if isinstance(v, np.ndarray) and len(v) == mesh.n_vertices}
    sub = SurfaceMesh(mesh.vertices[keep], remap[faces], take(mesh.potential),
                      take(mesh.normal_potential), take(mesh.normals), extra)
    return SubSurface(face_index, sub)


def split_by_potential_sign(mesh: SurfaceMesh):
    """Split into the faces whose three vertices are all positive / all negative.

    Zero counts as neither sign, so a face touching a zero-potential vertex
    ends up in neither sub-surface.

    Returns
    -------
    (positive, negative) : tuple of SubSurface
    """
    if mesh.potential is None:
        raise MissingChannel("potential-sign split needs a potential channel")
    p = mesh.potential[mesh.faces]
    pos = np.flatnonzero(np.all(p > 0, axis=1))
    neg = np.flatnonzero(np.all(p < 0, axis=1))
    return submesh(mesh, pos), submesh(mesh, neg)
