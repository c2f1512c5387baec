"""Areal interpolation of tract demographics into walkshed profiles.

Each tract intersecting a walkshed contributes a component whose counts are
the tract counts scaled by ``A_i / A_tract`` (residents are assumed uniform
over the tract). Profile scalars are population-weighted averages of tract
medians and shares are component counts over walkshed population.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import UndefinedProfileError, ValidationError
from .geometry import ConvexPolygon, Region, clip_to_convex

ACRE_M2 = 4046.8564224
QUARTER_ACRE_M2 = ACRE_M2 / 4.0
DENSITY_THRESHOLD = 1.0 / QUARTER_ACRE_M2  # persons per m^2
MIN_POPULATION = 500.0
MAX_POPULATION = 12500.0

# category key -> (family, universe). Education shares use the 25+ universe.
CATEGORIES: dict[str, tuple[str, str]] = {
    "black": ("race", "population"),
    "asian": ("race", "population"),
    "multiracial": ("race", "population"),
    "white": ("race", "population"),
    "hispanic": ("ethnicity", "population"),
    "male": ("sex", "population"),
    "age_under_5": ("child_age", "population"),
    "age_6_10": ("child_age", "population"),
    "age_11_14": ("child_age", "population"),
    "age_15_17": ("child_age", "population"),
    "edu_high_school": ("education", "population_25plus"),
    "edu_bachelors": ("education", "population_25plus"),
    "edu_graduate": ("education", "population_25plus"),
    "below_poverty": ("poverty", "population"),
}
# nested education levels are cumulative, so only race/child_age/sex/ethnicity sum-check
ADDITIVE_FAMILIES = ("race", "ethnicity", "sex", "child_age")

AVERAGE_AGE = "average_age"
LOG_INCOME = "log_income"


@dataclass(frozen=True)
class FeatureSchema:
    keys: tuple = tuple(CATEGORIES) + (AVERAGE_AGE, LOG_INCOME)

    def __post_init__(self):
        keys = tuple(self.keys)
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate key in feature schema")
        unknown = [k for k in keys if k not in CATEGORIES and k not in (AVERAGE_AGE, LOG_INCOME)]
        if unknown:
            raise ValidationError(f"unknown feature keys {unknown}")
        object.__setattr__(self, "keys", keys)

    def __len__(self):
        return len(self.keys)

    def __iter__(self):
        return iter(self.keys)


DEFAULT_SCHEMA = FeatureSchema()


@dataclass(frozen=True)
class TractRecord:
    tract_id: str
    region: Region
    population: float
    median_income: float
    median_age: float
    counts: Mapping[str, float] = field(default_factory=dict)
    population_25plus: float = 0.0
    data_available: bool = True

    def __post_init__(self):
        if self.population < 0:
            raise ValidationError(f"tract {self.tract_id}: negative population")
        if not self.data_available:
            return
        for key, value in self.counts.items():
            if key not in CATEGORIES:
                raise ValidationError(f"tract {self.tract_id}: unknown category {key!r}")
            universe = getattr(self, CATEGORIES[key][1])
            if value < 0 or value > universe + 1e-9:
                raise ValidationError(f"tract {self.tract_id}: count {key}={value} outside [0, {universe}]")
        for fam in ADDITIVE_FAMILIES:
            s = sum(v for k, v in self.counts.items() if CATEGORIES[k][0] == fam)
            if s > self.population * (1 + 1e-9) + 1e-9:
                raise ValidationError(f"tract {self.tract_id}: {fam} counts exceed population")
        if self.population_25plus > self.population * (1 + 1e-9) + 1e-9:
            raise ValidationError(f"tract {self.tract_id}: 25+ population exceeds population")

    @property
    def area(self) -> float:
        return self.region.area

    @property
    def complete(self) -> bool:
        if not self.data_available:
            return False
        vals = [self.population, self.median_income, self.median_age, self.population_25plus]
        vals += [self.counts.get(k, float("nan")) for k in CATEGORIES]
        return all(math.isfinite(v) for v in vals)


@dataclass(frozen=True)
class WalkshedComponent:
    tract_id: str
    intersection_area: float
    tract_area: float
    population: float
    population_25plus: float
    counts: Mapping[str, float]
    median_income: float
    median_age: float
    tract_population: float
    data_available: bool = True

    @property
    def fraction(self) -> float:
        return self.intersection_area / self.tract_area

    @property
    def tract_density(self) -> float:
        return self.tract_population / self.tract_area


def _hull_of(walkshed) -> ConvexPolygon:
    return walkshed.hull if hasattr(walkshed, "hull") else walkshed


class TractIndex:
    """Bounding-box prefilter over tracts; read-only once built."""

    def __init__(self, tracts: Sequence[TractRecord]):
        self.tracts = list(tracts)
        self.boxes = np.array([t.region.bounds for t in self.tracts]).reshape(-1, 4)

    def candidates(self, bounds) -> list[TractRecord]:
        if not self.tracts:
            return []
        b = self.boxes
        hit = ~((b[:, 2] < bounds[0]) | (b[:, 0] > bounds[2]) | (b[:, 3] < bounds[1]) | (b[:, 1] > bounds[3]))
        return [self.tracts[i] for i in np.flatnonzero(hit)]


def component_from_tract(t: TractRecord, intersection_area: float, tract_area: float | None = None):
    """Scale a tract's counts by the covered fraction of its area."""
    a_t = t.area if tract_area is None else tract_area
    a_i = min(intersection_area, a_t)
    usable = t.complete and a_t > 0 and t.population > 0
    frac = a_i / a_t if a_t > 0 else 0.0
    return WalkshedComponent(
        tract_id=t.tract_id,
        intersection_area=a_i,
        tract_area=a_t,
        population=t.population * frac if usable else 0.0,
        population_25plus=t.population_25plus * frac if usable else 0.0,
        counts={k: t.counts.get(k, 0.0) * frac for k in CATEGORIES} if usable else {},
        median_income=t.median_income,
        median_age=t.median_age,
        tract_population=t.population,
        data_available=usable,
    )


def compute_components(walkshed, tracts) -> list[WalkshedComponent]:
    """One component per tract that overlaps the walkshed hull with positive area.

    Components are ordered by tract id, so the result does not depend on the
    order of ``tracts``. Tracts lacking data still yield a component, flagged
    ``data_available=False`` for the inclusion rule.
    """
    hull = _hull_of(walkshed)
    index = tracts if isinstance(tracts, TractIndex) else TractIndex(tracts)
    comps = []
    for t in index.candidates(hull.bounds):
        a_i, _ = clip_to_convex(t.region, hull)
        if a_i > 0.0:
            comps.append(component_from_tract(t, a_i))
    comps.sort(key=lambda c: c.tract_id)
    return comps


def walkshed_population(components) -> float:
    return float(math.fsum(c.population for c in components))


def weighted_scalar(components, attr: str = "median_income") -> float:
    """Population-weighted mean of a per-tract scalar such as median income or age."""
    total = walkshed_population(components)
    if not total > 0:
        raise UndefinedProfileError("walkshed population is zero")
    return math.fsum(c.population * getattr(c, attr) for c in components) / total


def category_share(components, key: str) -> float:
    universe = CATEGORIES[key][1]
    if universe == "population":
        denom = walkshed_population(components)
    else:
        denom = math.fsum(c.population_25plus for c in components)
    if not denom > 0:
        raise UndefinedProfileError(f"zero {universe} in walkshed for share {key!r}")
    return math.fsum(c.counts.get(key, 0.0) for c in components) / denom


@dataclass(frozen=True)
class WalkshedProfile:
    park_id: str
    population: float
    income: float
    average_age: float
    shares: Mapping[str, float]
    schema: FeatureSchema
    features: np.ndarray


def build_profile(walkshed, tracts, schema: FeatureSchema = DEFAULT_SCHEMA, park_id=None,
                  components=None) -> WalkshedProfile:
    if components is None:
        components = compute_components(walkshed, tracts)
    usable = [c for c in components if c.data_available]
    pop = walkshed_population(usable)
    income = weighted_scalar(usable, "median_income")
    age = weighted_scalar(usable, "median_age")
    shares = {k: category_share(usable, k) for k in CATEGORIES}
    values = []
    for key in schema:
        if key == AVERAGE_AGE:
            values.append(age)
        elif key == LOG_INCOME:
            values.append(math.log(income))
        else:
            values.append(shares[key])
    if park_id is None:
        park_id = getattr(walkshed, "park_id", "")
    return WalkshedProfile(park_id, pop, income, age, shares, schema, np.array(values))


REASONS = ("zero-area", "missing-tract-data", "low-density-tract", "population-below-500", "population-above-12500")


@dataclass(frozen=True)
class InclusionDecision:
    park_id: str
    reasons: tuple = ()

    @property
    def included(self) -> bool:
        return not self.reasons


def apply_inclusion(
    park_id: str,
    walkshed=None,
    components=(),
    population: float | None = None,
    min_population: float = MIN_POPULATION,
    max_population: float = MAX_POPULATION,
    density_threshold: float = DENSITY_THRESHOLD,
) -> InclusionDecision:
    """Apply the four study inclusion rules and collect every failing reason.

    ``walkshed`` is ``None`` (or an exception) when construction failed,
    which yields ``zero-area``. ``population`` defaults to the components' sum.
    """
    if walkshed is None or isinstance(walkshed, BaseException) or _hull_of(walkshed).area <= 0:
        return InclusionDecision(park_id, ("zero-area",))
    reasons = []
    if any(not c.data_available for c in components):
        reasons.append("missing-tract-data")
    if any(c.data_available and c.tract_density < density_threshold for c in components):
        reasons.append("low-density-tract")
    if population is None:
        population = walkshed_population([c for c in components if c.data_available])
    if population < min_population:
        reasons.append(f"population-below-{min_population:g}")
    elif population > max_population:
        reasons.append(f"population-above-{max_population:g}")
    return InclusionDecision(park_id, tuple(reasons))
