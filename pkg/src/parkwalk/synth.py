"""Synthetic park cohorts with known ground truth.

Two layers share one random draw. :func:`draw_cohort` produces the per-park
table (area, walkshed population, visits, demographics) and is all a
benchmark needs. :func:`generate` realizes that table as geometry: every park
gets its own tile holding a square park, a street grid reaching past the walk
budget and a 3x3 block of tracts whose densities are solved so the computed
walkshed population equals the drawn one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .census import (
    AVERAGE_AGE, CATEGORIES, DEFAULT_SCHEMA, DENSITY_THRESHOLD, LOG_INCOME, TractRecord, compute_components,
)
from .errors import ValidationError
from .geometry import Polygon, Region
from .network import WALK_SPEED, WALK_TIME, WalkGraph, build_walkshed, grid_graph, merge_graphs
from .normalize import NormalizationParams, normalization_constant, standardize

ACRE_KM2 = 0.0040468564224
MODES = ("null-world", "planted-linear")

# planted effect on log-visits per standardized feature; the summed effect has sd ~0.6.
# The target is visits times n_p, i.e. exp(effect + noise), and its tails cap what a
# linear model can gain in MAE, so the power check pairs this with PLANTED_NOISE_SD.
PLANTED_SIGNAL = {
    "log_income": 0.33,
    "white": 0.27,
    "edu_bachelors": 0.21,
    "age_under_5": -0.24,
    "below_poverty": -0.27,
}
PLANTED_NOISE_SD = 0.25

# typical values the demographic draws are centered on
_RACE_MEAN = {"black": 0.13, "asian": 0.06, "multiracial": 0.03, "white": 0.60}
_SHARE_MEAN = {
    "hispanic": 0.18, "male": 0.49,
    "age_under_5": 0.06, "age_6_10": 0.06, "age_11_14": 0.05, "age_15_17": 0.04,
    "edu_high_school": 0.88, "edu_bachelors": 0.33, "edu_graduate": 0.13,
    "below_poverty": 0.14,
}
_SHARE_CONC = {"male": 400.0, "edu_high_school": 60.0}
ADULT_FRACTION = 0.7
# tract density weights stay within exp(+-0.3), so a walkshed averaging twice the
# inclusion threshold leaves every tract above it
WEIGHT_SPREAD = 0.3
DENSITY_MARGIN = 2.0


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 2506
    median_population: float = 2785.0
    median_area_acres: float = 5.68
    median_visits: float = 2528.0
    sd_log_population: float = 0.6
    sd_log_area: float = 1.0
    area_exponent: float = 0.58
    population_exponent: float = 0.84
    noise_sd: float = 0.5
    mode: str = "null-world"
    signal: dict = field(default_factory=lambda: dict(PLANTED_SIGNAL))
    seed: int = 0
    tract_jitter: float = 0.05
    street_spacing: float = 100.0
    missing_tract_rate: float = 0.0

    def __post_init__(self):
        if self.n < 10:
            raise ValidationError("synthetic cohort needs n >= 10")
        for name in ("median_population", "median_area_acres", "median_visits", "street_spacing"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        for name in ("sd_log_population", "sd_log_area", "noise_sd", "tract_jitter", "missing_tract_rate"):
            if not getattr(self, name) >= 0:
                raise ValidationError(f"{name} must be non-negative")
        if self.mode not in MODES:
            raise ValidationError(f"unknown synthetic mode {self.mode!r}")
        unknown = set(self.signal) - set(DEFAULT_SCHEMA.keys)
        if unknown:
            raise ValidationError(f"signal names unknown features {sorted(unknown)}")


@dataclass
class Cohort:
    park_ids: list
    area_km2: np.ndarray
    population: np.ndarray
    visits: np.ndarray
    shares: dict  # category -> (n,) array
    median_income: np.ndarray
    median_age: np.ndarray
    signal: np.ndarray  # planted log-visit effect, zeros in null-world mode

    def features(self, schema=DEFAULT_SCHEMA) -> np.ndarray:
        cols = []
        for key in schema:
            if key == LOG_INCOME:
                cols.append(np.log(self.median_income))
            elif key == AVERAGE_AGE:
                cols.append(self.median_age)
            else:
                cols.append(self.shares[key])
        return np.column_stack(cols)

    def target(self, area_exponent=0.58, population_exponent=0.84) -> np.ndarray:
        p = NormalizationParams(area_exponent, population_exponent)
        return self.visits * normalization_constant(self.area_km2, self.population, p)


def _beta(rng, mean, conc, size):
    return rng.beta(mean * conc, (1.0 - mean) * conc, size)


def draw_demographics(rng, n):
    race_keys = list(_RACE_MEAN)
    race_alpha = np.array([_RACE_MEAN[k] for k in race_keys] + [1.0 - sum(_RACE_MEAN.values())]) * 8.0
    race = rng.dirichlet(race_alpha, n)
    shares = {k: race[:, i] for i, k in enumerate(race_keys)}
    for k, m in _SHARE_MEAN.items():
        shares[k] = _beta(rng, m, _SHARE_CONC.get(k, 25.0), n)
    # cumulative education levels: graduate <= bachelors <= high school
    shares["edu_bachelors"] = np.minimum(shares["edu_bachelors"], shares["edu_high_school"])
    shares["edu_graduate"] = np.minimum(shares["edu_graduate"], shares["edu_bachelors"])
    income = np.exp(rng.normal(math.log(65_000.0), 0.4, n))
    age = rng.normal(37.0, 5.0, n).clip(18.0, 80.0)
    return shares, income, age


def draw_cohort(spec: SyntheticSpec) -> Cohort:
    """Per-park draws with visits ``c * A^a * P^b * exp(signal + noise)``."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    area = np.exp(rng.normal(math.log(spec.median_area_acres * ACRE_KM2), spec.sd_log_area, n))
    pop = np.exp(rng.normal(math.log(spec.median_population), spec.sd_log_population, n))
    noise = rng.normal(0.0, spec.noise_sd, n)
    shares, income, age = draw_demographics(rng, n)
    ids = [f"park{i:05d}" for i in range(n)]
    cohort = Cohort(ids, area, pop, np.zeros(n), shares, income, age, np.zeros(n))
    if spec.mode == "planted-linear":
        z = standardize(cohort.features())
        keys = list(DEFAULT_SCHEMA.keys)
        for name, coef in spec.signal.items():
            cohort.signal += coef * z[:, keys.index(name)]
    med_a = spec.median_area_acres * ACRE_KM2
    c = spec.median_visits / (med_a ** spec.area_exponent * spec.median_population ** spec.population_exponent)
    cohort.visits = c * area ** spec.area_exponent * pop ** spec.population_exponent * np.exp(cohort.signal + noise)
    return cohort


@dataclass
class SynthCity:
    spec: SyntheticSpec
    cohort: Cohort
    parks: dict  # park id -> Polygon
    visits: dict  # park id -> yearly visits
    tracts: list
    tiles: list  # one WalkGraph per park

    @property
    def graph(self) -> WalkGraph:
        return merge_graphs(self.tiles)


def _tract_counts(rng, spec, shares, i, pop):
    j = spec.tract_jitter
    out = {}
    adults = ADULT_FRACTION * pop
    race = np.array([shares[k][i] for k in _RACE_MEAN])
    if j > 0:
        rest = max(1.0 - race.sum(), 1e-6)
        race = rng.dirichlet(np.append(race, rest) / (j * j) + 1e-3)[:-1]
    for k, v in zip(_RACE_MEAN, race):
        out[k] = v * pop
    for k in _SHARE_MEAN:
        s = shares[k][i] * (math.exp(j * rng.normal()) if j > 0 else 1.0)
        out[k] = min(s, 1.0) * (adults if CATEGORIES[k][1] == "population_25plus" else pop)
    out["edu_bachelors"] = min(out["edu_bachelors"], out["edu_high_school"])
    out["edu_graduate"] = min(out["edu_graduate"], out["edu_bachelors"])
    kids = ("age_under_5", "age_6_10", "age_11_14", "age_15_17")
    tot = sum(out[k] for k in kids)
    if tot > pop:
        for k in kids:
            out[k] *= pop / tot
    return out


def generate(spec: SyntheticSpec) -> SynthCity:
    """Draw a cohort and lay every park out on its own tile."""
    cohort = draw_cohort(spec)
    rng = np.random.default_rng([spec.seed, 1])
    s = spec.street_spacing
    budget = WALK_SPEED * WALK_TIME
    side = np.sqrt(cohort.area_km2 * 1e6)
    half = np.ceil((side / 2 + budget + s) / s) * s  # tile half-width, a whole number of blocks
    pitch = 2 * half.max() + 10 * s
    cols = int(math.ceil(math.sqrt(spec.n)))

    parks, visits, tracts, tiles = {}, {}, [], []
    def tile(pid, cx, cy, h, park):
        k = int(round(2 * h / s)) + 1
        g = grid_graph(k, k, s, origin=(cx - h, cy - h), prefix=f"{pid}_")
        return g, build_walkshed(g, park, pid)

    need = DENSITY_MARGIN * DENSITY_THRESHOLD
    for i, pid in enumerate(cohort.park_ids):
        cx, cy = (i % cols) * pitch, (i // cols) * pitch
        h, a = half[i], side[i]
        park = Polygon([(cx - a / 2, cy - a / 2), (cx + a / 2, cy - a / 2),
                        (cx + a / 2, cy + a / 2), (cx - a / 2, cy + a / 2)])
        g, ws = tile(pid, cx, cy, h, park)
        if cohort.population[i] < need * ws.area:
            # a sparse neighborhood: cut the street grid short so the walkshed is dense enough
            h = max(math.floor(math.sqrt(cohort.population[i] / need) / 2 / s) * s, (math.ceil(a / 2 / s) + 1) * s)
            g, ws = tile(pid, cx, cy, h, park)

        edges = np.linspace(-h, h, 4)
        boxes = []
        for bx in range(3):
            for by in range(3):
                x0, x1 = cx + edges[bx], cx + edges[bx + 1]
                y0, y1 = cy + edges[by], cy + edges[by + 1]
                boxes.append(Region.from_polygon(Polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])))
        weight = np.exp(rng.uniform(-WEIGHT_SPREAD, WEIGHT_SPREAD, 9))
        probe = [TractRecord(f"{pid}_t{b}", r, 0.0, 1.0, 1.0) for b, r in enumerate(boxes)]
        covered = {c.tract_id: c.intersection_area for c in compute_components(ws, probe)}
        denom = sum(weight[b] * covered.get(f"{pid}_t{b}", 0.0) for b in range(9))
        density = weight * cohort.population[i] / denom
        for b, region in enumerate(boxes):
            pop = float(density[b] * region.area)
            missing = spec.missing_tract_rate > 0 and rng.random() < spec.missing_tract_rate
            counts = _tract_counts(rng, spec, cohort.shares, i, pop)
            inc = cohort.median_income[i] * math.exp(spec.tract_jitter * rng.normal())
            age = cohort.median_age[i] + 5.0 * spec.tract_jitter * rng.normal()
            tracts.append(TractRecord(f"{pid}_t{b}", region, pop, inc, age, counts,
                                      ADULT_FRACTION * pop, data_available=not missing))
        parks[pid] = park
        visits[pid] = float(cohort.visits[i])
        tiles.append(g)
    return SynthCity(spec, cohort, parks, visits, tracts, tiles)
