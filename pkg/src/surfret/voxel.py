"""Binary voxelization of triangle meshes (surface shell or enclosed solid)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_fill_holes

from .errors import EmptyMesh
from .mesh import SurfaceMesh

PADDING = 2
_CHUNK = 1 << 20


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Axis-aligned occupancy grid.

    Cell ``(i, j, k)`` spans ``origin + spacing * [i, i+1) x [j, j+1) x [k, k+1)``.
    """

    origin: np.ndarray
    spacing: float
    occupancy: np.ndarray

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=np.float64))
        object.__setattr__(self, "occupancy", np.asarray(self.occupancy, dtype=bool))

    @property
    def dims(self):
        return self.occupancy.shape

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    def centers(self) -> np.ndarray:
        """Centers (Å) of the occupied cells, in C order of their indices."""
        idx = np.argwhere(self.occupancy)
        return self.origin + (idx + 0.5) * self.spacing

    def __eq__(self, other):
        return (isinstance(other, VoxelGrid) and self.spacing == other.spacing
                and np.array_equal(self.origin, other.origin)
                and np.array_equal(self.occupancy, other.occupancy))


def _triangle_box_overlap(tri, half):
    """Closed separating-axis test of triangles against cubes centered at 0.

    ``tri`` is (P, 3, 3) with vertices already relative to each cube center.
    """
    v0, v1, v2 = tri[:, 0], tri[:, 1], tri[:, 2]
    hit = np.all(tri.min(axis=1) <= half, axis=1) & np.all(tri.max(axis=1) >= -half, axis=1)

    e = (v1 - v0, v2 - v1, v0 - v2)
    n = np.cross(e[0], e[1])
    hit &= np.abs(np.einsum("pi,pi->p", n, v0)) <= half * np.abs(n).sum(axis=1)

    basis = np.eye(3)
    for edge in e:
        for j in range(3):
            a = np.cross(edge, basis[j])
            p0 = np.einsum("pi,pi->p", a, v0)
            p1 = np.einsum("pi,pi->p", a, v1)
            p2 = np.einsum("pi,pi->p", a, v2)
            r = half * np.abs(a).sum(axis=1)
            lo = np.minimum(np.minimum(p0, p1), p2)
            hi = np.maximum(np.maximum(p0, p1), p2)
            hit &= (lo <= r) & (hi >= -r)
    return hit


def voxelize_surface(mesh: SurfaceMesh, spacing: float = 1.0,
                     padding: int = PADDING) -> VoxelGrid:
    """Mark every cell that a triangle touches (closed cells, so contact counts).

    The grid lives on the global lattice ``spacing * Z^3`` and covers the
    bounding box plus ``padding`` cells per side, so translating a mesh by a
    whole number of cells shifts the occupancy by that many cells.
    """
    if mesh.n_faces == 0:
        raise EmptyMesh("cannot voxelize a mesh without faces")
    spacing = float(spacing)
    used = mesh.vertices[np.unique(mesh.faces)]
    lo = np.floor(used.min(axis=0) / spacing).astype(np.int64) - padding
    hi = np.floor(used.max(axis=0) / spacing).astype(np.int64) + padding
    dims = hi - lo + 1
    origin = lo * spacing
    occ = np.zeros(tuple(dims), dtype=bool)

    tri = mesh.vertices[mesh.faces] - origin          # (F, 3, 3) in grid frame
    q_lo = tri.min(axis=1) / spacing
    q_hi = tri.max(axis=1) / spacing
    i_lo = np.clip(np.ceil(q_lo).astype(np.int64) - 1, 0, dims - 1)
    i_hi = np.clip(np.floor(q_hi).astype(np.int64), 0, dims - 1)
    ext = i_hi - i_lo + 1
    counts = ext.prod(axis=1)

    half = 0.5 * spacing
    starts = np.concatenate([[0], np.cumsum(counts)])
    f0 = 0
    while f0 < len(counts):
        # group whole faces so each chunk holds about _CHUNK candidate cells
        f1 = int(np.searchsorted(starts, starts[f0] + _CHUNK, side="right"))
        f1 = max(f1 - 1, f0 + 1)
        face = np.repeat(np.arange(f0, f1), counts[f0:f1])
        local = np.arange(len(face)) - np.repeat(starts[f0:f1] - starts[f0], counts[f0:f1])
        ex = ext[face]
        off = np.stack([local // (ex[:, 1] * ex[:, 2]),
                        (local // ex[:, 2]) % ex[:, 1],
                        local % ex[:, 2]], axis=1)
        cell = i_lo[face] + off
        center = (cell + 0.5) * spacing
        hit = _triangle_box_overlap(tri[face] - center[:, None, :], half)
        c = cell[hit]
        occ[c[:, 0], c[:, 1], c[:, 2]] = True
        f0 = f1
    return VoxelGrid(origin, spacing, occ)


def _cells_inside(mesh: SurfaceMesh, grid: VoxelGrid, idx) -> np.ndarray:
    """Ray-parity test for the centers of cells ``idx`` ((P, 3) int) of ``grid``.

    Each center shoots a +z ray; crossings with the mesh are found per grid
    column (i, j). A ray through a shared edge is attributed to exactly one
    of the two faces (top-left rule in the xy projection) and faces that are
    vertical in projection are skipped. Only meaningful for closed surfaces.
    """
    idx = np.asarray(idx, dtype=np.int64).reshape(-1, 3)
    s = grid.spacing
    tri = mesh.vertices[mesh.faces] - grid.origin
    area2 = ((tri[:, 1, 0] - tri[:, 0, 0]) * (tri[:, 2, 1] - tri[:, 0, 1])
             - (tri[:, 1, 1] - tri[:, 0, 1]) * (tri[:, 2, 0] - tri[:, 0, 0]))
    tri = tri[area2 != 0]
    cw = area2[area2 != 0] < 0
    tri[cw] = tri[cw][:, [0, 2, 1]]
    ny = grid.dims[1]

    # column centers (i + 0.5) s inside each face's xy bounding box
    lo = np.ceil(tri[:, :, :2].min(axis=1) / s - 0.5).astype(np.int64)
    hi = np.floor(tri[:, :, :2].max(axis=1) / s - 0.5).astype(np.int64)
    ext = np.maximum(hi - lo + 1, 0)
    counts = ext[:, 0] * ext[:, 1]
    starts = np.concatenate([[0], np.cumsum(counts)])
    hit_col, hit_z = [], []
    f0 = 0
    while f0 < len(tri):
        f1 = int(np.searchsorted(starts, starts[f0] + _CHUNK, side="right"))
        f1 = max(f1 - 1, f0 + 1)
        face = np.repeat(np.arange(f0, f1), counts[f0:f1])
        local = np.arange(len(face)) - np.repeat(starts[f0:f1] - starts[f0], counts[f0:f1])
        ci = lo[face, 0] + local // ext[face, 1]
        cj = lo[face, 1] + local % ext[face, 1]
        px, py = (ci + 0.5) * s, (cj + 0.5) * s
        t = tri[face]
        inside = np.ones(len(face), bool)
        w = []
        for a, b in ((1, 2), (2, 0), (0, 1)):
            ex = t[:, b, 0] - t[:, a, 0]
            ey = t[:, b, 1] - t[:, a, 1]
            wi = ex * (py - t[:, a, 1]) - ey * (px - t[:, a, 0])
            top_left = (ey < 0) | ((ey == 0) & (ex < 0))
            inside &= (wi > 0) | ((wi == 0) & top_left)
            w.append(wi)
        z = (w[0] * t[:, 0, 2] + w[1] * t[:, 1, 2] + w[2] * t[:, 2, 2]) / (w[0] + w[1] + w[2])
        hit_col.append((ci * ny + cj)[inside])
        hit_z.append(z[inside])
        f0 = f1

    # merge crossings and queries; a crossing at the query height is not above it
    qcol = idx[:, 0] * ny + idx[:, 1]
    qz = (idx[:, 2] + 0.5) * s
    col = np.concatenate(hit_col + [qcol])
    z = np.concatenate(hit_z + [qz])
    is_query = np.zeros(len(col), np.int8)
    is_query[len(col) - len(qcol):] = 1
    order = np.lexsort((is_query, z, col))
    col_s, crossing = col[order], 1 - is_query[order]
    below = np.cumsum(crossing) - crossing
    first = np.searchsorted(col_s, col_s, side="left")
    last = np.searchsorted(col_s, col_s, side="right")
    total_before_col = np.concatenate([[0], np.cumsum(crossing)])[first]
    total_in_col = np.concatenate([[0], np.cumsum(crossing)])[last] - total_before_col
    above = total_in_col - (below - total_before_col)
    out = np.empty(len(qcol), bool)
    qpos = order >= len(col) - len(qcol)
    out[order[qpos] - (len(col) - len(qcol))] = above[qpos] % 2 == 1
    return out


def voxelize_solid(mesh: SurfaceMesh, spacing: float = 1.0,
                   padding: int = PADDING) -> VoxelGrid:
    """Cells whose center lies inside the closed surface.

    Cells fully enclosed by the conservative shell are filled; shell cells
    are kept when their center tests inside. An open surface encloses
    nothing, and then the shell itself is returned.
    """
    shell = voxelize_surface(mesh, spacing, padding)
    filled = binary_fill_holes(shell.occupancy)
    if np.count_nonzero(filled) == shell.count:
        return shell
    idx = np.argwhere(shell.occupancy)
    outside = ~_cells_inside(mesh, shell, idx)
    filled[tuple(idx[outside].T)] = False
    return VoxelGrid(shell.origin, shell.spacing, filled)


def grid_volume(grid: VoxelGrid) -> float:
    """Occupied volume in Å³."""
    return grid.count * grid.spacing ** 3


_ROT_AXES = {"x": (1, 2), "y": (2, 0), "z": (0, 1)}


def rotate_grid_axis90(grid: VoxelGrid, axis: str, quarter_turns: int) -> VoxelGrid:
    """Rotate the occupancy by quarter turns about a grid axis.

    Turns are counter-clockwise looking down the axis (a z turn sends +x to
    +y), about the center of the grid box. Cell ``(i, j, k)`` goes to
    ``(n_y - 1 - j, i, k)`` under one z turn.
    """
    if quarter_turns not in (0, 1, 2, 3):
        raise ValueError("quarter_turns must be 0, 1, 2 or 3")
    if quarter_turns == 0:
        return grid
    occ = np.rot90(grid.occupancy, quarter_turns, axes=_ROT_AXES[axis])
    occ = np.ascontiguousarray(occ)
    center = grid.origin + np.array(grid.dims) * grid.spacing / 2
    origin = center - np.array(occ.shape) * grid.spacing / 2
    return VoxelGrid(origin, grid.spacing, occ)
