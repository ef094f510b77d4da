"""Legacy VTK polydata reader and writer.

Only the pieces needed for molecular surfaces are interpreted: ``POINTS``,
``POLYGONS`` and point-data arrays. Scalar arrays named ``potential`` and
``normal_potential`` (case-insensitive, first match wins) and the first
``NORMALS`` block are bound to the mesh; every other point array lands in
``SurfaceMesh.extra``. Both the classic cell layout and the newer
``OFFSETS``/``CONNECTIVITY`` layout are accepted, in ASCII or big-endian
BINARY encoding. XML files are rejected.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import (CountMismatch, InvalidMesh, MalformedData, MalformedHeader,
                     NonFiniteValue, IndexOutOfRange, UnsupportedCellType,
                     UnsupportedFormat, VtkError)
from .mesh import SurfaceMesh

__all__ = ["parse_surface_file", "read_surface", "write_surface", "save_surface"]

_BINARY_TYPES = {
    "bit": None,
    "unsigned_char": ">u1", "char": ">i1",
    "unsigned_short": ">u2", "short": ">i2",
    "unsigned_int": ">u4", "int": ">i4",
    "unsigned_long": ">u8", "long": ">i8",
    "float": ">f4", "double": ">f8",
    "vtkidtype": ">i4",
    "vtktypeint8": ">i1", "vtktypeuint8": ">u1",
    "vtktypeint16": ">i2", "vtktypeuint16": ">u2",
    "vtktypeint32": ">i4", "vtktypeuint32": ">u4",
    "vtktypeint64": ">i8", "vtktypeuint64": ">u8",
    "vtktypefloat32": ">f4", "vtktypefloat64": ">f8",
}
_INT_TYPES = {k for k, v in _BINARY_TYPES.items() if v and v[1] in "iu"}

_UNSUPPORTED_CELLS = ("VERTICES", "LINES", "TRIANGLE_STRIPS")
_METADATA_RE = re.compile(rb"^[ \t]*METADATA[ \t]*\r?\n.*?(?:\r?\n[ \t]*\r?\n|\Z)",
                          re.MULTILINE | re.DOTALL)


def _is_number(tok: bytes) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


class _AsciiStream:
    def __init__(self, body: bytes):
        self.tokens = _METADATA_RE.sub(b"\n", body).split()
        self.pos = 0

    def peek_word(self):
        if self.pos >= len(self.tokens):
            return None
        return self.tokens[self.pos].decode("latin-1")

    def next_word(self):
        w = self.peek_word()
        if w is None:
            raise MalformedData("unexpected end of file")
        self.pos += 1
        return w

    def skip_metadata(self):
        pass  # stripped up front

    def read(self, count: int, vtype: str, what: str) -> np.ndarray:
        toks = self.tokens[self.pos:self.pos + count]
        try:
            if vtype in _INT_TYPES:
                arr = np.array([int(t) for t in toks], dtype=np.int64)
            else:
                arr = np.array(toks, dtype=bytes).astype(np.float64)
        except (ValueError, OverflowError):
            bad = next(i for i, t in enumerate(toks) if not _is_int_or_float(t, vtype))
            if toks[bad][:1].isalpha() and not _is_number(toks[bad]):
                raise CountMismatch(f"{what}: expected {count} values, found {bad}") from None
            raise MalformedData(f"{what}: {toks[bad][:20]!r} is not a {vtype}") from None
        if len(toks) < count:
            raise CountMismatch(f"{what}: expected {count} values, found {len(toks)}")
        self.pos += count
        if self.pos < len(self.tokens) and _is_number(self.tokens[self.pos]):
            raise CountMismatch(f"{what}: more than the declared {count} values")
        return arr.reshape(count)


def _is_int_or_float(tok: bytes, vtype: str) -> bool:
    try:
        int(tok) if vtype in _INT_TYPES else float(tok)
    except ValueError:
        return False
    return True


class _BinaryStream:
    _ws = b" \t\r\n\f\v"

    def __init__(self, body: bytes):
        self.buf = body
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.buf) and self.buf[self.pos] in self._ws:
            self.pos += 1

    def peek_word(self):
        save = self.pos
        try:
            self._skip_ws()
            if self.pos >= len(self.buf):
                return None
            end = self.pos
            while end < len(self.buf) and self.buf[end] not in self._ws:
                end += 1
            return self.buf[self.pos:end].decode("latin-1")
        finally:
            self.pos = save

    def next_word(self):
        w = self.peek_word()
        if w is None:
            raise MalformedData("unexpected end of file")
        self._skip_ws()
        self.pos += len(w.encode("latin-1"))
        return w

    def skip_metadata(self):
        # rest of the METADATA line, then text lines up to the first blank one
        end = self.buf.find(b"\n", self.pos)
        self.pos = len(self.buf) if end < 0 else end + 1
        while self.pos < len(self.buf):
            end = self.buf.find(b"\n", self.pos)
            end = len(self.buf) if end < 0 else end
            line = self.buf[self.pos:end].strip()
            self.pos = end + 1
            if not line:
                break

    def read(self, count: int, vtype: str, what: str) -> np.ndarray:
        dt = _BINARY_TYPES.get(vtype)
        if dt is None:
            raise MalformedData(f"{what}: unsupported binary type {vtype!r}")
        nl = self.buf.find(b"\n", self.pos)
        if nl < 0:
            raise CountMismatch(f"{what}: no data")
        start = nl + 1
        nbytes = count * np.dtype(dt).itemsize
        if start + nbytes > len(self.buf):
            raise CountMismatch(f"{what}: expected {count} values, file too short")
        arr = np.frombuffer(self.buf, dtype=dt, count=count, offset=start)
        self.pos = start + nbytes
        return arr.astype(np.int64 if vtype in _INT_TYPES else np.float64)


def _int(stream, what) -> int:
    w = stream.next_word()
    try:
        n = int(w)
    except ValueError:
        raise MalformedData(f"{what}: expected an integer, got {w!r}") from None
    if n < 0:
        raise MalformedData(f"{what}: negative count {n}")
    return n


def _finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValue(f"non-finite value in {what}")
    return arr


def _read_cells(stream, declared: int, size: int, what: str):
    """Return (offsets, connectivity) for either cell layout.

    ``declared`` is the first number on the cell header line: the cell count
    in the classic layout, the offsets count (cells + 1) in the new one.
    """
    if stream.peek_word() == "OFFSETS":
        stream.next_word()
        offsets = stream.read(declared, stream.next_word().lower(), what + " offsets")
        if stream.next_word() != "CONNECTIVITY":
            raise MalformedData(f"{what}: CONNECTIVITY block missing")
        conn = stream.read(size, stream.next_word().lower(), what + " connectivity")
        if declared <= 1:
            if size:
                raise CountMismatch(f"{what}: connectivity without cells")
            return np.zeros(1, np.int64), conn.astype(np.int64)
        if offsets[0] != 0 or offsets[-1] != size or np.any(np.diff(offsets) < 0):
            raise CountMismatch(f"{what}: offsets inconsistent with connectivity size {size}")
        return offsets.astype(np.int64), conn.astype(np.int64)
    ncells = declared
    flat = stream.read(size, "int", what).astype(np.int64)
    # fast path: all triangles
    if size == 4 * ncells and (ncells == 0 or np.all(flat[0::4] == 3)):
        conn = flat.reshape(-1, 4)[:, 1:].ravel()
        return np.arange(0, 3 * ncells + 1, 3, dtype=np.int64), conn
    offsets = [0]
    conn = []
    i = 0
    for _ in range(ncells):
        if i >= size:
            raise CountMismatch(f"{what}: fewer than {ncells} cells in {size} values")
        k = int(flat[i])
        if k < 0 or i + 1 + k > size:
            raise CountMismatch(f"{what}: cell runs past the declared size {size}")
        conn.extend(flat[i + 1:i + 1 + k])
        offsets.append(offsets[-1] + k)
        i += 1 + k
    if i != size:
        raise CountMismatch(f"{what}: {size - i} values left over after {ncells} cells")
    return np.array(offsets, np.int64), np.array(conn, np.int64)


def _fan_triangulate(offsets, conn):
    sizes = np.diff(offsets)
    if np.any(sizes < 3):
        raise MalformedData("polygon with fewer than 3 vertices")
    if np.all(sizes == 3):
        return conn.reshape(-1, 3)
    tris = []
    for start, k in zip(offsets[:-1], sizes):
        poly = conn[start:start + k]
        for j in range(1, k - 1):
            tris.append((poly[0], poly[j], poly[j + 1]))
    return np.array(tris, dtype=np.int64).reshape(-1, 3)


def _read_attributes(stream, n: int, sink: list):
    """Consume attribute blocks for a POINT_DATA/CELL_DATA section.

    Appends ``(kind, name, array)`` to ``sink`` and returns the keyword that
    ended the section (or None at end of file).
    """
    while True:
        w = stream.peek_word()
        if w is None:
            return None
        key = w.upper()
        if key in ("POINT_DATA", "CELL_DATA"):
            return key
        stream.next_word()
        if key == "SCALARS":
            name = stream.next_word()
            vtype = stream.next_word().lower()
            ncomp = 1
            nxt = stream.peek_word()
            if nxt is not None and nxt.isdigit():
                ncomp = _int(stream, "SCALARS components")
            if stream.peek_word() == "LOOKUP_TABLE":
                stream.next_word()
                stream.next_word()
            arr = stream.read(n * ncomp, vtype, f"SCALARS {name}")
            sink.append(("scalars", name, arr.reshape(n, ncomp) if ncomp > 1 else arr))
        elif key in ("NORMALS", "VECTORS"):
            name = stream.next_word()
            vtype = stream.next_word().lower()
            arr = stream.read(3 * n, vtype, f"{key} {name}").reshape(n, 3)
            sink.append((key.lower(), name, arr))
        elif key == "TEXTURE_COORDINATES":
            name = stream.next_word()
            dim = _int(stream, "TEXTURE_COORDINATES dim")
            vtype = stream.next_word().lower()
            sink.append(("tcoords", name, stream.read(n * dim, vtype, key).reshape(n, dim)))
        elif key == "TENSORS":
            name = stream.next_word()
            vtype = stream.next_word().lower()
            sink.append(("tensors", name, stream.read(9 * n, vtype, key).reshape(n, 3, 3)))
        elif key == "COLOR_SCALARS":
            name = stream.next_word()
            nval = _int(stream, "COLOR_SCALARS size")
            vtype = "unsigned_char" if isinstance(stream, _BinaryStream) else "float"
            sink.append(("color", name, stream.read(n * nval, vtype, key).reshape(n, nval)))
        elif key == "LOOKUP_TABLE":
            stream.next_word()
            size = _int(stream, "LOOKUP_TABLE size")
            vtype = "unsigned_char" if isinstance(stream, _BinaryStream) else "float"
            stream.read(4 * size, vtype, key)
        elif key == "FIELD":
            stream.next_word()
            narrays = _int(stream, "FIELD arrays")
            for _ in range(narrays):
                name = stream.next_word()
                ncomp = _int(stream, "FIELD components")
                ntup = _int(stream, "FIELD tuples")
                vtype = stream.next_word().lower()
                arr = stream.read(ncomp * ntup, vtype, f"FIELD {name}")
                if ntup != n:
                    raise CountMismatch(f"FIELD {name}: {ntup} tuples for {n} items")
                sink.append(("scalars", name, arr.reshape(n, ncomp) if ncomp > 1 else arr))
        elif key == "METADATA":
            stream.skip_metadata()
        else:
            raise MalformedData(f"unknown keyword {w!r} in attribute data")


def parse_surface_file(data: bytes) -> SurfaceMesh:
    """Parse legacy VTK polydata bytes into a :class:`SurfaceMesh`.

    Polygons with more than three vertices are fan-triangulated from their
    first vertex. Every failure surfaces as a :class:`~surfret.errors.VtkError`
    subclass (or :class:`~surfret.errors.InvalidMesh` for a face that repeats
    a vertex).
    """
    if isinstance(data, str):
        data = data.encode("latin-1")
    head = data.lstrip()[:64].lower()
    if head.startswith(b"<?xml") or head.startswith(b"<vtkfile"):
        raise UnsupportedFormat("XML VTK files are not supported")
    lines = data.split(b"\n", 3)
    if len(lines) < 4 or not lines[0].strip().lower().startswith(b"# vtk datafile"):
        raise MalformedHeader("missing '# vtk DataFile Version' magic line")
    fmt = lines[2].strip().upper()
    if fmt == b"ASCII":
        stream = _AsciiStream(lines[3])
    elif fmt == b"BINARY":
        stream = _BinaryStream(lines[3])
    else:
        raise MalformedHeader(f"third line must be ASCII or BINARY, got {fmt[:20]!r}")
    try:
        return _parse_body(stream)
    except (VtkError, InvalidMesh):
        raise
    except (IndexError, ValueError, OverflowError, TypeError, MemoryError) as exc:
        raise MalformedData(f"undecodable content: {exc}") from None


def _parse_body(stream) -> SurfaceMesh:
    if stream.peek_word() is None or stream.next_word().upper() != "DATASET":
        raise MalformedHeader("missing DATASET line")
    kind = stream.next_word().upper()
    if kind != "POLYDATA":
        raise UnsupportedFormat(f"DATASET {kind} is not POLYDATA")

    points = None
    faces = None
    point_arrays = []
    while True:
        w = stream.peek_word()
        if w is None:
            break
        key = w.upper()
        stream.next_word()
        if key == "POINTS":
            n = _int(stream, "POINTS count")
            vtype = stream.next_word().lower()
            points = _finite(stream.read(3 * n, vtype, "POINTS"), "POINTS").reshape(n, 3)
        elif key == "POLYGONS":
            declared = _int(stream, "POLYGONS count")
            size = _int(stream, "POLYGONS size")
            faces = _fan_triangulate(*_read_cells(stream, declared, size, "POLYGONS"))
        elif key in _UNSUPPORTED_CELLS:
            ncells = _int(stream, key + " count")
            size = _int(stream, key + " size")
            new_layout = stream.peek_word() == "OFFSETS"
            if (ncells - 1 if new_layout else ncells) > 0:
                raise UnsupportedCellType(f"{key} cells are not supported")
            _read_cells(stream, ncells, size, key)
        elif key == "POINT_DATA":
            n = _int(stream, "POINT_DATA count")
            if points is None:
                raise MalformedData("POINT_DATA before POINTS")
            if n != len(points):
                raise CountMismatch(f"POINT_DATA {n} but {len(points)} points")
            _read_attributes(stream, n, point_arrays)
        elif key == "CELL_DATA":
            n = _int(stream, "CELL_DATA count")
            _read_attributes(stream, n, [])
        elif key == "FIELD":
            # dataset-level field data
            _read_attributes_field_only(stream)
        elif key == "METADATA":
            stream.skip_metadata()
        else:
            raise MalformedData(f"unknown keyword {w!r}")

    if points is None:
        raise MalformedData("no POINTS block")
    if faces is None:
        faces = np.zeros((0, 3), np.int64)
    if len(faces) and (faces.min() < 0 or faces.max() >= len(points)):
        raise IndexOutOfRange(f"face index outside [0, {len(points)})")

    potential = normal_potential = normals = None
    extra = {}
    for kind, name, arr in point_arrays:
        _finite(arr, name)
        low = name.lower()
        if kind == "normals" and normals is None:
            normals = arr
        elif kind == "scalars" and arr.ndim == 1 and low == "potential" and potential is None:
            potential = arr
        elif (kind == "scalars" and arr.ndim == 1 and low == "normal_potential"
              and normal_potential is None):
            normal_potential = arr
        else:
            extra.setdefault(name, arr)
    return SurfaceMesh(points, faces, potential, normal_potential, normals, extra)


def _read_attributes_field_only(stream):
    stream.next_word()
    narrays = _int(stream, "FIELD arrays")
    for _ in range(narrays):
        name = stream.next_word()
        ncomp = _int(stream, "FIELD components")
        ntup = _int(stream, "FIELD tuples")
        vtype = stream.next_word().lower()
        stream.read(ncomp * ntup, vtype, f"FIELD {name}")


def read_surface(path) -> SurfaceMesh:
    return parse_surface_file(Path(path).read_bytes())


# -- writer -------------------------------------------------------------------

def _ascii_block(arr, per_line: int) -> str:
    vals = [repr(float(x)) for x in np.ravel(arr)]
    return "\n".join(" ".join(vals[i:i + per_line]) for i in range(0, len(vals), per_line))


def write_surface(mesh: SurfaceMesh, binary: bool = False,
                  title: str = "surfret surface") -> bytes:
    """Serialise a mesh as legacy VTK polydata (doubles, so values round-trip exactly)."""
    out = [b"# vtk DataFile Version 3.0\n", title.encode() + b"\n",
           b"BINARY\n" if binary else b"ASCII\n", b"DATASET POLYDATA\n"]

    def block(header: str, arr, dtype, per_line):
        out.append(header.encode() + b"\n")
        if binary:
            out.append(np.ascontiguousarray(arr, dtype=dtype).tobytes() + b"\n")
        else:
            if np.issubdtype(np.asarray(arr).dtype, np.integer):
                rows = np.asarray(arr).reshape(-1, per_line)
                out.append("\n".join(" ".join(map(str, r)) for r in rows.tolist()).encode())
            else:
                out.append(_ascii_block(arr, per_line).encode())
            out.append(b"\n")

    nv, nf = mesh.n_vertices, mesh.n_faces
    block(f"POINTS {nv} double", mesh.vertices, ">f8", 3)
    cells = np.hstack([np.full((nf, 1), 3, np.int64), mesh.faces])
    block(f"POLYGONS {nf} {4 * nf}", cells, ">i4", 4)

    arrays = []
    if mesh.potential is not None:
        arrays.append(("scalars", "potential", mesh.potential))
    if mesh.normal_potential is not None:
        arrays.append(("scalars", "normal_potential", mesh.normal_potential))
    if mesh.normals is not None:
        arrays.append(("normals", "normals", mesh.normals))
    for name, arr in mesh.extra.items():
        arrays.append(("scalars", name, np.asarray(arr, float)))
    if arrays:
        out.append(f"POINT_DATA {nv}\n".encode())
        for kind, name, arr in arrays:
            if kind == "normals":
                block(f"NORMALS {name} double", arr, ">f8", 3)
            else:
                ncomp = 1 if arr.ndim == 1 else arr.shape[1]
                block(f"SCALARS {name} double {ncomp}\nLOOKUP_TABLE default",
                      arr, ">f8", max(ncomp, 1) if ncomp > 1 else 9)
    return b"".join(out)


def save_surface(mesh: SurfaceMesh, path, binary: bool = False) -> None:
    Path(path).write_bytes(write_surface(mesh, binary=binary))
