"""Method-tagged descriptor vectors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# method tag -> vector length
METHOD_DIMS = {"zernike363": 363, "zernike121": 121, "fpfh-stat": 612}


@dataclass(frozen=True, eq=False)
class Descriptor:
    """A descriptor vector plus the occupied volume (Å³) used by the volume filter."""

    method: str
    values: np.ndarray
    volume: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)
