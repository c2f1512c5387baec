"""Pipeline configuration read from a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored; unknown keys are errors so a
mistyped threshold name cannot silently fall back to its default. Relative
paths resolve against the directory holding the config file.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .census import DENSITY_THRESHOLD, MAX_POPULATION, MIN_POPULATION
from .errors import FormatError, ValidationError
from .network import SNAP_RADIUS, WALK_SPEED, WALK_TIME
from .normalize import AREA_EXPONENT, POPULATION_EXPONENT

PATH_KEYS = ("parks", "visits", "tracts", "demographics", "nodes", "edges", "baselines", "out")
GRIDS = ("full", "quick")


@dataclass(frozen=True)
class PipelineConfig:
    parks: Path | None = None
    visits: Path | None = None
    tracts: Path | None = None
    demographics: Path | None = None
    nodes: Path | None = None
    edges: Path | None = None
    baselines: Path | None = None
    out: Path = Path("out")
    walk_speed: float = WALK_SPEED
    time_budget: float = WALK_TIME
    snap_radius: float = SNAP_RADIUS
    min_population: float = MIN_POPULATION
    max_population: float = MAX_POPULATION
    density_threshold: float = DENSITY_THRESHOLD
    normalization: str = "fixed"
    area_exponent: float = AREA_EXPONENT
    population_exponent: float = POPULATION_EXPONENT
    target: str = "visits"
    cv_k: int = 5
    seed: int = 0
    standardize_per_fold: bool = False
    grid: str = "full"
    figures: bool = True

    def __post_init__(self):
        for name in ("walk_speed", "time_budget", "min_population", "max_population", "density_threshold"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if not self.snap_radius >= 0:
            raise ValidationError("snap_radius must be non-negative")
        if not self.min_population < self.max_population:
            raise ValidationError("min_population must be below max_population")
        if self.normalization not in ("fixed", "refit"):
            raise ValidationError(f"normalization must be fixed or refit, got {self.normalization!r}")
        if self.target not in ("visits", "constant"):
            raise ValidationError(f"target must be visits or constant, got {self.target!r}")
        if self.cv_k < 2:
            raise ValidationError("cv_k must be at least 2")
        if self.grid not in GRIDS:
            raise ValidationError(f"grid must be one of {GRIDS}, got {self.grid!r}")

    def replace(self, **kw) -> "PipelineConfig":
        return dataclasses.replace(self, **kw)

    def require(self, *names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ValidationError(f"config is missing input paths: {', '.join(missing)}")

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def _parse_bool(key, text):
    t = text.lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise FormatError(f"{key}: expected true/false, got {text!r}")


def parse_config(text: str, base: Path = Path(".")) -> PipelineConfig:
    fields = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"config line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise ValidationError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValidationError(f"config line {lineno}: duplicate key {key!r}")
        default = fields[key].default
        try:
            if key in PATH_KEYS:
                p = Path(val)
                values[key] = p if p.is_absolute() else base / p
            elif isinstance(default, bool):
                values[key] = _parse_bool(key, val)
            elif isinstance(default, int):
                values[key] = int(val)
            elif isinstance(default, float):
                values[key] = float(val)
            else:
                values[key] = val
        except ValueError:
            raise FormatError(f"config line {lineno}: bad value for {key}: {val!r}") from None
    return PipelineConfig(**values)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    return parse_config(path.read_text(), path.parent)
