"""Run settings stored as ``key = value`` text, with a stable hash for reports."""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

VOXEL_MODES = ("solid", "shell")
VOLUME_RATIOS = ("max", "min", "mean", "query", "train")


@dataclass(frozen=True)
class Config:
    spacing: float = 1.0
    order: int = 20
    ball_radius: float = 0.7
    voxel_fill: str = "solid"
    n_points: int = 30000
    k: int = 16
    bins: int = 16
    hist_min: float = -20.0
    hist_max: float = 20.0
    tolerance: float = 0.2
    volume_ratio: str = "max"

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if not 0 < self.ball_radius <= 1:
            raise ValueError("ball_radius must lie in (0, 1]")
        if self.voxel_fill not in VOXEL_MODES:
            raise ValueError(f"voxel_fill must be one of {VOXEL_MODES}")
        if self.volume_ratio not in VOLUME_RATIOS:
            raise ValueError(f"volume_ratio must be one of {VOLUME_RATIOS}")
        if not self.hist_min < self.hist_max:
            raise ValueError("hist_min must be below hist_max")
        if self.k < 1 or self.bins < 1 or self.n_points < 2:
            raise ValueError("k, bins and n_points must be positive")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")

    @property
    def hist_range(self):
        return (self.hist_min, self.hist_max)

    def dumps(self) -> str:
        return "".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n"
                       for k, v in asdict(self).items())

    def hash(self) -> str:
        """First 16 hex digits of the SHA-256 of the canonical text form."""
        return hashlib.sha256(self.dumps().encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "Config":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def parse_config(text: str) -> Config:
    """Read ``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    types = {f.name: f.type for f in fields(Config)}
    casts = {"float": float, "int": int, "str": str}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        cast = casts[types[key]]
        try:
            values[key] = cast(val)
        except ValueError:
            raise ValueError(f"line {lineno}: bad value for {key}: {val!r}") from None
    return Config(**values)


def load_config(path) -> Config:
    return parse_config(Path(path).read_text())
