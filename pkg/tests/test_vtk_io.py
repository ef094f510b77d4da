import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surfret import errors
from surfret.mesh import SurfaceMesh, face_areas
from surfret.synthetic import icosphere
from surfret.vtk_io import parse_surface_file, write_surface

HEADER = b"# vtk DataFile Version 3.0\ntitle\nASCII\nDATASET POLYDATA\n"


def vtk(body: str) -> bytes:
    return HEADER + body.encode()


MINIMAL = vtk("""POINTS 3 float
0 0 0  1 0 0  0 1 0
POLYGONS 1 4
3 0 1 2
POINT_DATA 3
SCALARS potential float 1
LOOKUP_TABLE default
1.0 -2.0 0.5
""")


def test_minimal_file():
    m = parse_surface_file(MINIMAL)
    assert m.n_vertices == 3 and m.n_faces == 1
    np.testing.assert_array_equal(m.potential, [1.0, -2.0, 0.5])
    assert m.normal_potential is None and m.normals is None


def test_quad_is_fan_triangulated():
    m = parse_surface_file(vtk("""POINTS 4 float
0 0 0 1 0 0 1 1 0 0 1 0
POLYGONS 1 5
4 0 1 2 3
"""))
    np.testing.assert_array_equal(m.faces, [[0, 1, 2], [0, 2, 3]])


def test_point_count_mismatch():
    body = "POINTS 5 float\n" + " ".join(["0.5"] * 12) + "\nPOLYGONS 1 4\n3 0 1 2\n"
    with pytest.raises(errors.CountMismatch):
        parse_surface_file(vtk(body))


def test_truncated_points_at_end_of_file():
    with pytest.raises(errors.CountMismatch):
        parse_surface_file(vtk("POINTS 5 float\n" + " ".join(["1"] * 12)))


@pytest.mark.parametrize("data,exc", [
    (b"hello\n", errors.MalformedHeader),
    (b"# vtk DataFile Version 3.0\nt\nASCII\nDATASET UNSTRUCTURED_GRID\n", errors.UnsupportedFormat),
    (b'<?xml version="1.0"?>\n<VTKFile type="PolyData">', errors.UnsupportedFormat),
    (vtk("POINTS 3 float\n0 0 0 1 0 0 0 1 0\nPOLYGONS 1 4\n3 0 1 7\n"), errors.IndexOutOfRange),
    (vtk("POINTS 3 float\n0 0 0 1 0 nan 0 1 0\nPOLYGONS 1 4\n3 0 1 2\n"), errors.NonFiniteValue),
    (vtk("POINTS 3 float\n0 0 0 1 0 0 0 1 0\nLINES 1 3\n2 0 1\n"), errors.UnsupportedCellType),
    (vtk("POINTS 3 float\n0 0 0 1 0 0 0 1 0\nVERTICES 1 2\n1 0\n"), errors.UnsupportedCellType),
    (vtk("POINTS 3 float\n0 0 0 1 0 0 0 1 0\nPOLYGONS 2 8\n3 0 1 2\n"), errors.CountMismatch),
])
def test_typed_errors(data, exc):
    with pytest.raises(exc):
        parse_surface_file(data)


def test_repeated_vertex_in_face_is_rejected():
    with pytest.raises(errors.SurfretError):
        parse_surface_file(vtk("POINTS 3 float\n0 0 0 1 0 0 0 1 0\nPOLYGONS 1 4\n3 0 1 1\n"))


def test_names_bind_case_insensitively_and_extras_are_kept():
    m = parse_surface_file(vtk("""POINTS 3 float
0 0 0 1 0 0 0 1 0
POLYGONS 1 4
3 0 1 2
POINT_DATA 3
SCALARS Potential float
LOOKUP_TABLE default
1 2 3
SCALARS NORMAL_POTENTIAL double 1
LOOKUP_TABLE default
4 5 6
SCALARS potential float 1
LOOKUP_TABLE default
7 8 9
SCALARS curvature float 1
LOOKUP_TABLE default
0.1 0.2 0.3
NORMALS Normals float
0 0 1 0 0 1 0 0 1
"""))
    np.testing.assert_array_equal(m.potential, [1, 2, 3])      # first match wins
    np.testing.assert_array_equal(m.normal_potential, [4, 5, 6])
    np.testing.assert_array_equal(m.normals[:, 2], 1.0)
    assert "curvature" in m.extra


def test_whitespace_tolerant_tokenising():
    m = parse_surface_file(b"# vtk DataFile Version 2.0\r\nt\r\nASCII\r\n\r\nDATASET POLYDATA\r\n"
                           b"POINTS 3 float 0 0 0\n\n 1 0 0\t0 1 0 POLYGONS 1 4 3 0\n1 2\n")
    assert m.n_faces == 1


def test_offsets_connectivity_layout():
    m = parse_surface_file(vtk("""POINTS 4 float
0 0 0 1 0 0 1 1 0 0 1 0
METADATA
INFORMATION 0

POLYGONS 3 7
OFFSETS vtktypeint64
0 3 7
CONNECTIVITY vtktypeint64
0 1 2 0 1 2 3
"""))
    np.testing.assert_array_equal(m.faces, [[0, 1, 2], [0, 1, 2], [0, 2, 3]])


def _mesh_with_channels(rng):
    base = icosphere(1, 10.0)
    v = base.vertices + rng.normal(scale=1e-3, size=base.vertices.shape)
    n = v / np.linalg.norm(v, axis=1)[:, None]
    return SurfaceMesh(v, base.faces, rng.normal(size=len(v)) * 7, rng.normal(size=len(v)), n)


@pytest.mark.parametrize("binary", [False, True])
def test_round_trip_is_bit_exact(binary):
    m = _mesh_with_channels(np.random.default_rng(3))
    back = parse_surface_file(write_surface(m, binary=binary))
    for name in ("vertices", "faces", "potential", "normal_potential", "normals"):
        assert np.array_equal(getattr(m, name), getattr(back, name)), name


def test_fan_triangulation_preserves_area():
    rng = np.random.default_rng(5)
    for n in range(3, 12):
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        pts = np.c_[np.cos(ang), np.sin(ang), np.zeros(n)] * rng.uniform(1, 5)
        x, y = pts[:, 0], pts[:, 1]
        shoelace = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
        body = (f"POINTS {n} double\n" + " ".join(repr(float(c)) for c in pts.ravel())
                + f"\nPOLYGONS 1 {n + 1}\n{n} " + " ".join(map(str, range(n))) + "\n")
        m = parse_surface_file(vtk(body))
        assert face_areas(m).sum() == pytest.approx(shoelace, rel=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=400))
def test_parser_is_total_on_random_bytes(data):
    try:
        parse_surface_file(data)
    except errors.SurfretError:
        pass


_TOKENS = ["POINTS", "POLYGONS", "POINT_DATA", "SCALARS", "LOOKUP_TABLE", "default",
           "NORMALS", "float", "double", "3", "4", "1", "0", "-1", "2.5", "nan", "\n", " ",
           "potential", "FIELD", "OFFSETS", "CONNECTIVITY", "METADATA", "BINARY"]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(_TOKENS), max_size=60))
def test_parser_is_total_on_token_soup(tokens):
    try:
        parse_surface_file(HEADER + " ".join(tokens).encode())
    except errors.SurfretError:
        pass


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 200))
def test_parser_is_total_on_truncated_valid_files(seed, cut):
    data = write_surface(_mesh_with_channels(np.random.default_rng(seed)),
                         binary=bool(seed % 2))
    try:
        parse_surface_file(data[:-cut])
    except errors.SurfretError:
        pass
