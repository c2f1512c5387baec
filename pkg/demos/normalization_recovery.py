"""Recover the visitation exponents from a synthetic cohort.

Fits log-log slopes of visits on area and population, then shows how the
normalized target removes most of the size dependence.
"""
import numpy as np

from parkwalk.normalize import loglog_slope, normalized_visits, pearson
from parkwalk.synth import SyntheticSpec, draw_cohort

cohort = draw_cohort(SyntheticSpec(n=2506, seed=7))
a, p, v = cohort.area_km2, cohort.population, cohort.visits

for name, x in (("area", a), ("population", p)):
    slope, icpt = loglog_slope(x, v)
    print(f"log visits ~ log {name:10s}: slope {slope:.3f}, intercept {icpt:.3f}")

# joint fit on both logs, which is what the generator plants
X = np.column_stack([np.ones_like(a), np.log(a), np.log(p)])
coef = np.linalg.lstsq(X, np.log(v), rcond=None)[0]
print(f"joint fit: area {coef[1]:.3f}, population {coef[2]:.3f}")

t = normalized_visits(v, a, p)
for name, x in (("area", a), ("population", p)):
    print(f"corr(log {name}, log visits) {pearson(np.log(x), np.log(v)):+.3f}"
          f" -> after normalization {pearson(np.log(x), np.log(t)):+.3f}")
