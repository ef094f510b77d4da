import numpy as np
import pytest

from surfret import errors
from surfret.fpfh import (STAT_DIM, aggregate_stat_descriptor, darboux_features,
                          descriptor_fpfh_stat, fpfh_all, neighbors, pair_features,
                          potential_histogram, spfh)
from surfret.sampling import PointCloud
from surfret.synthetic import blob, dipolar_potential, random_rotation

import fpfh_reference as ref


def _random_cloud(rng, n=50):
    p = rng.normal(size=(n, 3))
    nrm = rng.normal(size=(n, 3))
    return PointCloud(p, nrm / np.linalg.norm(nrm, axis=1)[:, None], rng.normal(size=n) * 8)


def test_darboux_examples():
    d = np.array([1.0, 2.0, 2.0]) / 3
    assert darboux_features((np.zeros(3), d), (3 * d, d)) == pytest.approx((0, 1, 0, 3), abs=1e-12)
    n = np.array([0.0, 0, 1])
    a, p, t, dist = darboux_features((np.zeros(3), n), (np.array([2.0, 0, 0]), n))
    assert (a, p, t, dist) == pytest.approx((0, 0, 0, 2), abs=1e-12)


def test_pair_features_match_scalar_transcription():
    rng = np.random.default_rng(0)
    c = _random_cloud(rng, 400)
    src, tgt = np.arange(0, 400, 2), np.arange(1, 400, 2)
    got = np.stack(pair_features(c.positions[src], c.normals[src],
                                 c.positions[tgt], c.normals[tgt]), axis=1)
    expect = np.array([ref.pair(c.positions[i], c.normals[i], c.positions[j], c.normals[j])
                       for i, j in zip(src, tgt)])
    np.testing.assert_allclose(got, expect, rtol=0, atol=1e-12)


def test_feature_ranges():
    rng = np.random.default_rng(1)
    c = _random_cloud(rng, 1000)
    a, p, t, _ = pair_features(c.positions[:-1], c.normals[:-1], c.positions[1:], c.normals[1:])
    assert np.all(np.abs(a) <= 1 + 1e-12) and np.all(np.abs(p) <= 1 + 1e-12)
    assert np.all((t > -np.pi) & (t <= np.pi))


def test_coincident_points():
    with pytest.raises(errors.CoincidentPoints):
        darboux_features((np.ones(3), np.array([0, 0, 1.0])), (np.ones(3), np.array([1.0, 0, 0])))


@pytest.mark.parametrize("seed,k", [(2, 5), (3, 16), (4, 1)])
def test_fpfh_matches_brute_force(seed, k):
    c = _random_cloud(np.random.default_rng(seed))
    expect, expect_spfh = ref.fpfh(c.positions, c.normals, k)
    nbr, _ = neighbors(c.positions, k)
    assert np.array_equal(spfh(c.positions, c.normals, nbr), expect_spfh)
    assert np.array_equal(fpfh_all(c, k), expect)


def test_spfh_blocks_sum_to_100():
    c = _random_cloud(np.random.default_rng(5), 200)
    nbr, _ = neighbors(c.positions, 16)
    s = spfh(c.positions, c.normals, nbr).reshape(-1, 3, 11)
    np.testing.assert_allclose(s.sum(axis=2), 100.0)
    assert np.all(fpfh_all(c) >= 0)


def test_plane_with_shared_normal_has_zero_theta():
    g = np.stack(np.meshgrid(np.arange(8.0), np.arange(8.0)), -1).reshape(-1, 2)
    pts = np.c_[g + 0.01 * np.random.default_rng(6).normal(size=g.shape), np.zeros(64)]
    c = PointCloud(pts, np.tile([0.0, 0, 1], (64, 1)))
    f = fpfh_all(c, 8)
    theta = f[:, 22:33]
    zero_bin = int(np.floor(np.pi / (2 * np.pi) * 11))
    assert np.allclose(theta[:, zero_bin], theta.sum(axis=1))


def test_rigid_motion_keeps_per_point_features():
    rng = np.random.default_rng(7)
    c = _random_cloud(rng, 300)
    moved = c.transformed(random_rotation(rng), [4.0, -2.0, 9.0])
    np.testing.assert_allclose(fpfh_all(moved), fpfh_all(c), rtol=0, atol=1e-9)


def test_too_few_points():
    c = _random_cloud(np.random.default_rng(8), 10)
    with pytest.raises(errors.TooFewPoints):
        fpfh_all(c, 10)


def test_potential_histogram_clamps_and_sums_to_one():
    h = potential_histogram([-100.0, -20.0, 0.0, 19.999, 20.0, 55.0])
    assert h.sum() == pytest.approx(1.0)
    assert h[0] == pytest.approx(2 / 6) and h[-1] == pytest.approx(3 / 6) and h[8] == pytest.approx(1 / 6)


def test_aggregate_layout():
    rng = np.random.default_rng(9)
    f = rng.random((500, 33)) * 50
    p = np.full(500, 5.0)
    v = aggregate_stat_descriptor(f, p)
    assert v.shape == (STAT_DIM,) == (612,)
    assert abs(np.linalg.norm(v) - 1.0) <= 1e-12
    hist = v[594:610]
    assert np.count_nonzero(hist) == 1 and hist[int((5 + 20) / 40 * 16)] > 0
    assert v[611] == 0.0                 # variance of a constant potential
    # un-normalised pieces are proportional to the reference statistics
    scale = v[0] / f[:, 0].mean()
    np.testing.assert_allclose(v[:33], scale * f.mean(axis=0), rtol=1e-12)
    cov = np.cov(f.T)
    np.testing.assert_allclose(v[33:594], scale * cov[np.triu_indices(33)], rtol=1e-10)


def test_covariance_block_is_psd():
    rng = np.random.default_rng(10)
    v = aggregate_stat_descriptor(rng.random((300, 33)) ** 3, rng.normal(size=300))
    cov = np.zeros((33, 33))
    cov[np.triu_indices(33)] = v[33:594]
    cov = cov + cov.T - np.diag(np.diag(cov))
    assert np.linalg.eigvalsh(cov).min() >= -1e-9


def test_point_order_does_not_matter():
    rng = np.random.default_rng(11)
    c = _random_cloud(rng, 400)
    perm = rng.permutation(400)
    c2 = PointCloud(c.positions[perm], c.normals[perm], c.potentials[perm])
    a = aggregate_stat_descriptor(fpfh_all(c), c.potentials)
    b = aggregate_stat_descriptor(fpfh_all(c2), c2.potentials)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_aggregate_errors():
    with pytest.raises(errors.MissingChannel):
        aggregate_stat_descriptor(np.ones((5, 33)), None)
    with pytest.raises(errors.TooFewPoints):
        aggregate_stat_descriptor(np.ones((1, 33)), [1.0])


def test_surface_descriptor():
    m = blob(np.random.default_rng(12), radius=10, subdivisions=3)
    with pytest.raises(errors.MissingChannel):
        descriptor_fpfh_stat(m, 2000)
    m = m.with_potential(dipolar_potential(m, [0, 0, 1]))
    d = descriptor_fpfh_stat(m, 5000)
    assert d.method == "fpfh-stat" and len(d) == 612 and d.volume > 0
    assert abs(np.linalg.norm(d.values) - 1) <= 1e-12
    assert np.array_equal(d.values, descriptor_fpfh_stat(m, 5000).values)
