"""Surface retrieval toolkit: VTK surfaces in, shape/potential descriptors, 1-NN class labels out."""

from .config import Config, load_config, parse_config
from .descriptor import METHOD_DIMS, Descriptor
from .errors import *  # noqa: F401,F403
from .fpfh import (aggregate_stat_descriptor, darboux_features, descriptor_fpfh_stat,
                   fpfh_all, potential_histogram)
from .mesh import (SubSurface, SurfaceMesh, ValidationReport, centroid, face_areas,
                   split_by_potential_sign, submesh, validate_mesh, vertex_normals)
from .metrics import ConfusionMatrix, MetricsReport, confusion, format_table, score
from .pipeline import (DatasetManifest, DescriptorCache, read_cache, read_manifest,
                       run_classify, run_describe, run_evaluate, write_cache)
from .retrieval import (DescriptorIndex, RankedResult, batch_classify, build_index,
                        classify_nn)
from .sampling import PointCloud, sample_points, sobol_sequence
from .voxel import (VoxelGrid, grid_volume, rotate_grid_axis90, voxelize_solid,
                    voxelize_surface)
from .vtk_io import parse_surface_file, read_surface, save_surface, write_surface
from .zernike import (descriptor_3dzd, geometric_moments, grid_invariants,
                      normalize_to_unit_ball, zernike_invariants, zernike_moments)

__version__ = "0.1.0"
