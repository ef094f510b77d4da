"""3D Zernike moments and their rotation-invariant norms.

The Zernike functions are built as

    Z_nlm(x) = sqrt(c_nlm) * rho_nl(|x|^2) * H_lm(x)

where ``H_lm = (x + iy)^m Q_lm(x, y, z)`` is an integer-coefficient solid
harmonic (the Condon-Shortley associated Legendre expansion), ``rho_nl`` is
the polynomial in ``r^2`` obtained by exact Gram-Schmidt under the weight
``r^(2l+2)`` on [0, 1], and ``c_nlm`` is the rational constant that makes
``(3 / 4pi) * integral_ball |Z_nlm|^2 = 1``. Everything up to the final
square root is exact integer/rational arithmetic; each coefficient is then
rounded once to float64. Negative ``m`` follow from
``Z_nl,-m = (-1)^m conj(Z_nlm)``.

Moments are ``Omega_nlm = 3/(4pi) * sum_i mass_i conj(Z_nlm(x_i))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, pi, sqrt
from typing import Dict, List, Tuple

import numpy as np

from .descriptor import Descriptor
from .errors import EmptyGrid, EmptyMesh, MissingChannel, OrderMismatch
from .mesh import SurfaceMesh, split_by_potential_sign
from .voxel import VoxelGrid, grid_volume, voxelize_solid, voxelize_surface

DEFAULT_ORDER = 20
DEFAULT_BALL_RADIUS = 0.7


def n_invariants(order: int) -> int:
    return sum(n // 2 + 1 for n in range(order + 1))


def nl_pairs(order: int) -> List[Tuple[int, int]]:
    """(n, l) with 0 <= l <= n <= order and n - l even, in (n, l) order."""
    return [(n, l) for n in range(order + 1) for l in range(n % 2, n + 1, 2)]


def nlm_triples(order: int) -> List[Tuple[int, int, int]]:
    return [(n, l, m) for n, l in nl_pairs(order) for m in range(-l, l + 1)]


@lru_cache(maxsize=None)
def monomials(order: int) -> Tuple[Tuple[int, int, int], ...]:
    """Exponents (r, s, t) with r + s + t <= order, grouped by total degree."""
    out = []
    for d in range(order + 1):
        for r in range(d, -1, -1):
            for s in range(d - r, -1, -1):
                out.append((r, s, d - r - s))
    return tuple(out)


@lru_cache(maxsize=None)
def _monomial_index(order: int) -> Dict[Tuple[int, int, int], int]:
    return {e: i for i, e in enumerate(monomials(order))}


# -- exact construction -------------------------------------------------------

def _solid_harmonic(l: int, m: int):
    """Integer coefficients of 2^l r^l P_l^m(z/r) e^{i m phi}, m >= 0.

    Returns a dict exponent -> (real, imag) Python ints.
    """
    # Q(x, y, z) = sum_j a_j z^(l-m-2j) (x^2+y^2+z^2)^j, real integer coefficients
    q: Dict[Tuple[int, int, int], int] = {}
    for j in range((l - m) // 2 + 1):
        a = ((-1) ** (m + j) * comb(l, j) * comb(2 * l - 2 * j, l)
             * factorial(l - 2 * j) // factorial(l - 2 * j - m))
        zpow = l - m - 2 * j
        for al in range(j + 1):
            for be in range(j - al + 1):
                ga = j - al - be
                mult = factorial(j) // (factorial(al) * factorial(be) * factorial(ga))
                key = (2 * al, 2 * be, 2 * ga + zpow)
                q[key] = q.get(key, 0) + a * mult
    # multiply by (x + iy)^m = sum_u C(m, u) i^u x^(m-u) y^u
    h: Dict[Tuple[int, int, int], List[int]] = {}
    for (r, s, t), c in q.items():
        if c == 0:
            continue
        for u in range(m + 1):
            w = comb(m, u) * c
            key = (r + m - u, s + u, t)
            acc = h.setdefault(key, [0, 0])
            ph = u % 4
            if ph == 0:
                acc[0] += w
            elif ph == 1:
                acc[1] += w
            elif ph == 2:
                acc[0] -= w
            else:
                acc[1] -= w
    return {k: (v[0], v[1]) for k, v in h.items() if v[0] or v[1]}


def _times_r2(poly):
    out: Dict[Tuple[int, int, int], List[int]] = {}
    for (r, s, t), (re, im) in poly.items():
        for key in ((r + 2, s, t), (r, s + 2, t), (r, s, t + 2)):
            acc = out.setdefault(key, [0, 0])
            acc[0] += re
            acc[1] += im
    return {k: (v[0], v[1]) for k, v in out.items()}


@lru_cache(maxsize=None)
def _radial(l: int, kmax: int):
    """Orthogonal polynomials in s = r^2 under weight r^(2l+2) dr on [0, 1].

    Returns a list over k of (coefficients [beta_0..beta_k], norm^2) as
    Fractions; each polynomial is monic in s^k.
    """
    def ip(a, b):
        return sum(ai * bj / (2 * i + 2 * j + 2 * l + 3)
                   for i, ai in enumerate(a) for j, bj in enumerate(b))

    out = []
    for k in range(kmax + 1):
        p = [Fraction(0)] * k + [Fraction(1)]
        for q, hq in out:
            proj = ip(p, q) / hq
            for i, qi in enumerate(q):
                p[i] -= proj * qi
        out.append((p, ip(p, p)))
    return out


@dataclass(frozen=True)
class ZernikeBasis:
    """Float coefficient table for all (n, l, m >= 0) up to ``order``.

    ``real`` and ``imag`` have one row per entry of ``rows`` and one column per
    entry of :func:`monomials`; row ``(n, l, m)`` holds the coefficients of
    ``Z_nlm`` in the monomial basis.
    """

    order: int
    rows: Tuple[Tuple[int, int, int], ...]
    real: np.ndarray
    imag: np.ndarray


@lru_cache(maxsize=4)
def zernike_basis(order: int = DEFAULT_ORDER) -> ZernikeBasis:
    index = _monomial_index(order)
    rows = [(n, l, m) for n, l in nl_pairs(order) for m in range(l + 1)]
    row_of = {r: i for i, r in enumerate(rows)}
    real = np.zeros((len(rows), len(index)))
    imag = np.zeros((len(rows), len(index)))
    for l in range(order + 1):
        kmax = (order - l) // 2
        radial = _radial(l, kmax)
        for m in range(l + 1):
            blocks = [_solid_harmonic(l, m)]
            for _ in range(kmax):
                blocks.append(_times_r2(blocks[-1]))
            keys = [list(b.keys()) for b in blocks]
            cols = [np.array([index[k] for k in ks], dtype=np.int64) for ks in keys]
            re_int = [np.array([b[k][0] for k in ks], dtype=object) for b, ks in zip(blocks, keys)]
            im_int = [np.array([b[k][1] for k in ks], dtype=object) for b, ks in zip(blocks, keys)]
            for k, (beta, h) in enumerate(radial):
                n = l + 2 * k
                c = Fraction((2 * l + 1) * factorial(l - m),
                             3 * factorial(l + m) * 4 ** l) / h
                scale = sqrt(c.numerator) / sqrt(c.denominator)
                i = row_of[(n, l, m)]
                for nu, b in enumerate(beta):
                    if b == 0:
                        continue
                    p, q = b.numerator, b.denominator
                    # exact product, one correctly rounded division, then the root
                    re = np.array([(p * v) / q for v in re_int[nu]], dtype=np.float64)
                    im = np.array([(p * v) / q for v in im_int[nu]], dtype=np.float64)
                    real[i, cols[nu]] = re * scale
                    imag[i, cols[nu]] = im * scale
    real.setflags(write=False)
    imag.setflags(write=False)
    return ZernikeBasis(order, tuple(rows), real, imag)


def zernike_polynomial(n: int, l: int, m: int, order: int | None = None) -> np.ndarray:
    """Complex monomial coefficients of ``Z_nlm`` (any sign of ``m``)."""
    basis = zernike_basis(n if order is None else order)
    i = basis.rows.index((n, l, abs(m)))
    coef = basis.real[i] + 1j * basis.imag[i]
    if m < 0:
        coef = (-1) ** abs(m) * np.conj(coef)
    return coef


def evaluate_zernike(n: int, l: int, m: int, points) -> np.ndarray:
    """Evaluate ``Z_nlm`` at (P, 3) points; used by tests and diagnostics."""
    pts = np.asarray(points, float)
    coef = zernike_polynomial(n, l, m, n)
    mons = np.array(monomials(n))
    vals = np.prod(pts[:, None, :] ** mons[None, :, :], axis=2)
    return vals @ coef


# -- moments -----------------------------------------------------------------

@dataclass(frozen=True)
class PointMasses:
    points: np.ndarray
    masses: np.ndarray
    center: np.ndarray
    scale: float


def normalize_to_unit_ball(grid: VoxelGrid, radius: float = 1.0) -> PointMasses:
    """Occupied voxel centers moved to their center of mass and scaled into the unit ball.

    The farthest center lands on ``radius`` (1 by default; values below 1
    keep the shape boundary away from the rim, where the high-order radial
    functions peak). Each point carries mass ``1 / count``. A single voxel
    maps to the origin with scale 1.
    """
    if not 0 < radius <= 1:
        raise ValueError("radius must lie in (0, 1]")
    pts = grid.centers()
    if len(pts) == 0:
        raise EmptyGrid("grid has no occupied voxel")
    center = pts.mean(axis=0)
    rel = pts - center
    rmax = np.sqrt((rel ** 2).sum(axis=1).max())
    scale = radius / rmax if rmax > 0 else 1.0
    rel = rel * scale
    return PointMasses(rel, np.full(len(pts), 1.0 / len(pts)), center, scale)


@dataclass(frozen=True)
class MomentTensor:
    """Geometric moments ``values[r, s, t]``; entries with r+s+t > max_order are 0."""

    max_order: int
    values: np.ndarray


def geometric_moments(points, max_order: int, masses=None) -> MomentTensor:
    """``M_rst = sum_i mass_i x_i^r y_i^s z_i^t`` for all r + s + t <= max_order.

    ``points`` is either a :class:`PointMasses` or a (P, 3) array paired with
    ``masses`` (default 1).
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    if isinstance(points, PointMasses):
        pts, w = points.points, points.masses
    else:
        pts = np.asarray(points, float).reshape(-1, 3)
        w = np.ones(len(pts)) if masses is None else np.asarray(masses, float)
    k = max_order + 1
    powers = [np.vander(pts[:, d], k, increasing=True) for d in range(3)]
    a = powers[0] * w[:, None]
    bc = (powers[1][:, :, None] * powers[2][:, None, :]).reshape(len(pts), k * k)
    vals = (a.T @ bc).reshape(k, k, k)
    r, s, t = np.indices((k, k, k))
    vals[r + s + t > max_order] = 0.0
    return MomentTensor(max_order, vals)


@dataclass(frozen=True)
class ZernikeMoments:
    order: int
    indices: Tuple[Tuple[int, int, int], ...]
    values: np.ndarray

    def get(self, n: int, l: int, m: int) -> complex:
        return self.values[self.indices.index((n, l, m))]


def zernike_moments(moments: MomentTensor, order: int | None = None) -> ZernikeMoments:
    """All ``Omega_nlm`` with n <= order from a moment tensor."""
    order = moments.max_order if order is None else order
    if order > moments.max_order or order < 0:
        raise OrderMismatch(
            f"moments cover order {moments.max_order}, requested {order}")
    basis = zernike_basis(order)
    mons = np.array(monomials(order))
    mvec = moments.values[mons[:, 0], mons[:, 1], mons[:, 2]]
    k = 3.0 / (4.0 * pi)
    pos = k * (basis.real @ mvec - 1j * (basis.imag @ mvec))
    row_of = {r: i for i, r in enumerate(basis.rows)}
    idx = tuple(nlm_triples(order))
    out = np.empty(len(idx), dtype=np.complex128)
    for j, (n, l, m) in enumerate(idx):
        v = pos[row_of[(n, l, abs(m))]]
        out[j] = v if m >= 0 else (-1) ** m * np.conj(v)
    return ZernikeMoments(order, idx, out)


@dataclass(frozen=True)
class ZernikeInvariants:
    order: int
    values: np.ndarray

    def __len__(self):
        return len(self.values)


def zernike_invariants(omega: ZernikeMoments) -> ZernikeInvariants:
    """``F_nl = sqrt(sum_m |Omega_nlm|^2)`` in (n, l) order."""
    sq = np.abs(omega.values) ** 2
    pairs = nl_pairs(omega.order)
    pos = {p: i for i, p in enumerate(pairs)}
    acc = np.zeros(len(pairs))
    for (n, l, _), v in zip(omega.indices, sq):
        acc[pos[(n, l)]] += v
    return ZernikeInvariants(omega.order, np.sqrt(acc))


def grid_invariants(grid: VoxelGrid, order: int = DEFAULT_ORDER,
                    radius: float = 1.0) -> np.ndarray:
    """Voxel grid -> unit-ball points -> moments -> invariant vector."""
    pm = normalize_to_unit_ball(grid, radius)
    return zernike_invariants(zernike_moments(geometric_moments(pm, order))).values


def _surface_block(mesh, spacing, order, ball_radius, solid):
    if mesh.n_faces == 0:
        return np.zeros(n_invariants(order)), None
    grid = (voxelize_solid if solid else voxelize_surface)(mesh, spacing)
    return grid_invariants(grid, order, ball_radius), grid


def descriptor_3dzd(mesh: SurfaceMesh, use_potential_split: bool = True, *,
                    spacing: float = 1.0, order: int = DEFAULT_ORDER,
                    ball_radius: float = DEFAULT_BALL_RADIUS,
                    solid: bool = True) -> Descriptor:
    """3D Zernike descriptor of a surface, optionally split by potential sign.

    Without the split this is the 121-value invariant vector of the whole
    surface (at order 20). With it, the blocks for the whole, positive and
    negative surfaces are concatenated (363 values); an empty sub-surface
    contributes zeros. The attached volume is the occupied volume of the
    whole-surface grid.
    """
    if mesh.n_faces == 0:
        raise EmptyMesh("mesh has no faces")
    if use_potential_split and mesh.potential is None:
        raise MissingChannel("potential split requested but the mesh has no potential")
    whole, grid = _surface_block(mesh, spacing, order, ball_radius, solid)
    blocks = [whole]
    if use_potential_split:
        pos, neg = split_by_potential_sign(mesh)
        blocks.append(_surface_block(pos.mesh, spacing, order, ball_radius, solid)[0])
        blocks.append(_surface_block(neg.mesh, spacing, order, ball_radius, solid)[0])
    n = n_invariants(order)
    method = f"zernike{3 * n}" if use_potential_split else f"zernike{n}"
    return Descriptor(method, np.concatenate(blocks), grid_volume(grid))
