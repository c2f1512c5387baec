"""Power-law normalization of park visitation and the correlation statistics around it."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularFitError, ValidationError

AREA_EXPONENT = 0.58
POPULATION_EXPONENT = 0.84


def loglog_slope(x, y) -> tuple[float, float]:
    """OLS fit of ``ln y = intercept + slope * ln x``; returns ``(slope, intercept)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("x and y must be 1-d arrays of equal length")
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise DomainError("log-log fit needs strictly positive values")
    lx, ly = np.log(x), np.log(y)
    dx = lx - lx.mean()
    sxx = float(np.dot(dx, dx))
    if len(np.unique(x)) < 2 or sxx == 0.0:
        raise SingularFitError("log-log fit needs at least two distinct x values")
    slope = float(np.dot(dx, ly - ly.mean())) / sxx
    return slope, float(ly.mean() - slope * lx.mean())


@dataclass(frozen=True)
class NormalizationParams:
    area_exponent: float = AREA_EXPONENT
    population_exponent: float = POPULATION_EXPONENT
    source: str = "fixed"

    def __post_init__(self):
        if not (np.isfinite(self.area_exponent) and np.isfinite(self.population_exponent)):
            raise ValidationError("normalization exponents must be finite")
        if self.source not in ("fixed", "refit"):
            raise ValidationError(f"unknown exponent source {self.source!r}")

    @classmethod
    def refit(cls, area_km2, population, visits) -> "NormalizationParams":
        """Exponents from separate log-log fits of visits on area and on population.

        Rows with zero visits are dropped with a warning before fitting.
        """
        area_km2, population, visits = (np.asarray(a, dtype=float) for a in (area_km2, population, visits))
        keep = visits > 0
        if not keep.all():
            warnings.warn(f"dropping {int((~keep).sum())} rows with zero visits before log-log fit")
        a, _ = loglog_slope(area_km2[keep], visits[keep])
        p, _ = loglog_slope(population[keep], visits[keep])
        return cls(a, p, "refit")


@dataclass(frozen=True)
class ParkObservation:
    park_id: str
    area_km2: float
    population: float
    visits: float

    def __post_init__(self):
        if not self.area_km2 > 0:
            raise ValidationError(f"park {self.park_id}: area must be positive")
        if not self.population > 0:
            raise ValidationError(f"park {self.park_id}: walkshed population must be positive")
        if not self.visits >= 0:
            raise ValidationError(f"park {self.park_id}: visits must be non-negative")


def normalization_constant(area_km2, population, params: NormalizationParams = NormalizationParams()):
    """``A**-a * P**-b``; accepts scalars or arrays."""
    return np.power(area_km2, -params.area_exponent) * np.power(population, -params.population_exponent)


def normalized_visits(visits, area_km2, population, params: NormalizationParams = NormalizationParams(),
                      target: str = "visits"):
    """Visits scaled by the normalization constant.

    ``target="constant"`` returns the constant alone, for the literal reading
    in which the constant itself is the regression target.
    """
    n_p = normalization_constant(area_km2, population, params)
    if target == "constant":
        return n_p
    if target != "visits":
        raise ValidationError(f"unknown normalization target {target!r}")
    return np.asarray(visits, dtype=float) * n_p


def standardize(values) -> np.ndarray:
    """Center and scale to unit sample standard deviation (``ddof=1``), column-wise for 2-d input."""
    v = np.asarray(values, dtype=float)
    if v.shape[0] < 2:
        raise SingularFitError("standardize needs at least 2 values")
    mu = v.mean(axis=0)
    sd = v.std(axis=0, ddof=1)
    if np.any(sd == 0) or np.any(sd <= 1e-14 * np.maximum(np.abs(mu), 1.0)):
        raise SingularFitError("zero variance")
    return (v - mu) / sd


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or len(x) < 2:
        raise ValidationError("pearson needs equal-length inputs of at least 2 values")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise SingularFitError("zero variance")
    r = float(np.dot(dx, dy) / np.sqrt(sxx * syy))
    return min(1.0, max(-1.0, r))


def rankdata(a) -> np.ndarray:
    """1-based fractional ranks with ties averaged."""
    a = np.asarray(a, dtype=float)
    order = np.argsort(a, kind="mergesort")
    sa = a[order]
    ranks = np.empty(len(a))
    start = 0
    n = len(a)
    while start < n:
        stop = start + 1
        while stop < n and sa[stop] == sa[start]:
            stop += 1
        ranks[order[start:stop]] = 0.5 * (start + stop - 1) + 1.0
        start = stop
    return ranks


def spearman(x, y) -> float:
    return pearson(rankdata(x), rankdata(y))
