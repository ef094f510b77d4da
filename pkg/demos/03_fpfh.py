"""Point-feature statistics descriptor.

Samples a surface with a Sobol stream, computes per-point FPFH features and
summarizes them as means, covariances and a potential histogram.

    python3 demos/03_fpfh.py
"""

import numpy as np

from surfret import aggregate_stat_descriptor, descriptor_fpfh_stat, fpfh_all, sample_points
from surfret.fpfh import neighbors, spfh
from surfret.synthetic import blob, dipolar_potential, random_rotation

rng = np.random.default_rng(2)
mesh = blob(rng, radius=14.0)
mesh = mesh.with_potential(dipolar_potential(mesh, [0, 1, 0]))

cloud = sample_points(mesh, 30000)
nbr, _ = neighbors(cloud.positions, 16)
simple = spfh(cloud.positions, cloud.normals, nbr)
print(f"{len(cloud.positions)} points, SPFH block sums:",
      np.unique(np.round(simple.reshape(-1, 3, 11).sum(axis=2), 9)))

# FPFH adds the neighbours' SPFH weighted by inverse distance
feats = fpfh_all(cloud, k=16)
print("mean FPFH per feature block:", np.round(feats.reshape(-1, 3, 11).mean(axis=0), 1))

# dense clouds make neighbours nearly coplanar, so the angle features pile up
# in the central bins; a sparser cloud spreads them out
sparse = sample_points(mesh, 1000)
print("mean FPFH per feature block at 1000 points:",
      np.round(fpfh_all(sparse, k=16).reshape(-1, 3, 11).mean(axis=0), 1), sep="\n")

desc = aggregate_stat_descriptor(feats, cloud.potentials)
print(f"statistics descriptor: {len(desc)} values, norm {np.linalg.norm(desc):.12f}")

moved = cloud.transformed(random_rotation(rng), [10.0, -4.0, 7.0])
other = aggregate_stat_descriptor(fpfh_all(moved, k=16), moved.potentials)
print(f"after a rigid motion of the points: change {np.linalg.norm(desc - other):.1e}")

d = descriptor_fpfh_stat(mesh)
print(f"{d.method}: {len(d)} values, volume {d.volume:.0f}")
