"""End-to-end orchestration: walksheds, profiles, inclusion, normalization, benchmark, bundle.

Every stage iterates parks in sorted id order and every table is written
with :func:`parkwalk.ingest.fmt`, so a rerun with the same inputs, config and
seed reproduces the bundle byte for byte.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .census import DEFAULT_SCHEMA, TractIndex, apply_inclusion, build_profile, compute_components
from .config import PipelineConfig
from .errors import NoAccessError, PipelineError, SingularFitError, UndefinedProfileError, ZeroAreaWalkshedError
from .ingest import Inputs, fmt, ingest, read_baselines
from .network import build_walkshed
from .normalize import NormalizationParams, normalized_visits, pearson, spearman, standardize
from .tuning import Dataset, GridSpec, benchmark, standard_grids

log = logging.getLogger(__name__)

STAGES = ("walkshed", "profile", "normalize", "benchmark")


def quick_grids() -> list:
    """Small grids, one or two cells per axis, for smoke runs and demos."""
    return [
        GridSpec("svr-linear", (("C", (1e-3, 1e-2)),)),
        GridSpec("svr-rbf", (("C", (0.1, 1.0)), ("gamma", ("auto", "scale")))),
        GridSpec("svr-poly", (("C", (1e-3, 1e-2)), ("degree", (2, 3)))),
        GridSpec("lasso", (("alpha", (1e-5, 1e-4, 1e-3, 1e-2)),)),
        GridSpec("elastic-net", (("alpha", (1e-3, 1e-2)), ("l1_ratio", (0.0, 0.5, 1.0)))),
        GridSpec("random-forest", (("n_estimators", (50,)), ("max_features", ("sqrt",)),
                                   ("max_depth", (10,)), ("min_samples_leaf", (4,)))),
    ]


@dataclass
class Bundle:
    config: PipelineConfig
    inputs: Inputs
    walksheds: dict = field(default_factory=dict)  # park id -> Walkshed
    components: dict = field(default_factory=dict)  # park id -> [WalkshedComponent]
    profiles: dict = field(default_factory=dict)  # included park id -> WalkshedProfile
    decisions: dict = field(default_factory=dict)  # park id -> InclusionDecision
    params: NormalizationParams | None = None
    normalized: list = field(default_factory=list)  # dict rows, sorted by park id
    correlations: list = field(default_factory=list)
    features_used: list = field(default_factory=list)
    report: object = None
    summary: list = field(default_factory=list)
    notices: list = field(default_factory=list)


def stage_walksheds(b: Bundle):
    cfg = b.config
    for pid in b.inputs.park_ids:
        try:
            b.walksheds[pid] = build_walkshed(b.inputs.graph, b.inputs.parks[pid], pid, cfg.walk_speed,
                                              cfg.time_budget, cfg.snap_radius)
        except (ZeroAreaWalkshedError, NoAccessError) as exc:
            b.notices.append(f"park {pid}: {exc}")


def stage_profiles(b: Bundle):
    cfg = b.config
    index = TractIndex(b.inputs.tracts)
    for pid in b.inputs.park_ids:
        ws = b.walksheds.get(pid)
        if ws is None:
            b.decisions[pid] = apply_inclusion(pid, None)
            continue
        comps = compute_components(ws, index)
        b.components[pid] = comps
        dec = apply_inclusion(pid, ws, comps, min_population=cfg.min_population,
                              max_population=cfg.max_population, density_threshold=cfg.density_threshold)
        if dec.included:
            try:
                b.profiles[pid] = build_profile(ws, index, park_id=pid, components=comps)
            except UndefinedProfileError as exc:
                dec = type(dec)(pid, ("missing-tract-data",))
                b.notices.append(f"park {pid}: {exc}")
        b.decisions[pid] = dec


def stage_normalize(b: Bundle):
    cfg = b.config
    ids = sorted(b.profiles)
    if not ids:
        raise PipelineError("no park passed the inclusion criteria")
    area = np.array([b.inputs.parks[p].area / 1e6 for p in ids])
    pop = np.array([b.profiles[p].population for p in ids])
    visits = np.array([b.inputs.visits[p] for p in ids])
    if cfg.normalization == "refit":
        b.params = NormalizationParams.refit(area, pop, visits)
    else:
        b.params = NormalizationParams(cfg.area_exponent, cfg.population_exponent)
    n_p = normalized_visits(visits, area, pop, b.params, target="constant")
    target = normalized_visits(visits, area, pop, b.params, target=cfg.target)
    try:
        z = standardize(target)
    except SingularFitError:
        raise PipelineError("normalized visitation has zero variance") from None
    b.normalized = [dict(park_id=p, area_km2=a, population=q, visits=v, n_p=c, target=t, standardized=s)
                    for p, a, q, v, c, t, s in zip(ids, area, pop, visits, n_p, target, z)]
    X = np.array([b.profiles[p].features for p in ids])
    b.correlations = []
    for j, key in enumerate(DEFAULT_SCHEMA):
        col = X[:, j]
        try:
            r, rho = pearson(col, z), spearman(col, z)
        except SingularFitError:
            r = rho = float("nan")
        b.correlations.append(dict(feature=key, pearson=r, spearman=rho, n=len(ids)))


def benchmark_dataset(b: Bundle) -> Dataset:
    """Standardized features and target of the included parks; constant columns are dropped."""
    ids = [r["park_id"] for r in b.normalized]
    X = np.array([b.profiles[p].features for p in ids])
    keep = [j for j in range(X.shape[1]) if np.ptp(X[:, j]) > 0]
    dropped = [DEFAULT_SCHEMA.keys[j] for j in range(X.shape[1]) if j not in keep]
    if dropped:
        b.notices.append(f"constant features left out of the benchmark: {', '.join(dropped)}")
    b.features_used = [DEFAULT_SCHEMA.keys[j] for j in keep]
    if not keep:
        raise PipelineError("every feature is constant across included parks")
    need = max(b.config.cv_k, len(keep))
    if len(ids) < need:
        raise PipelineError(f"only {len(ids)} included parks; the benchmark needs at least {need}")
    y = np.array([r["target"] for r in b.normalized])
    if b.config.standardize_per_fold:
        return Dataset(X[:, keep], y, tuple(b.features_used))
    return Dataset(standardize(X[:, keep]), standardize(y), tuple(b.features_used))


def stage_benchmark(b: Bundle, grids=None):
    cfg = b.config
    data = benchmark_dataset(b)
    if grids is None:
        grids = standard_grids() if cfg.grid == "full" else quick_grids()
    b.report = benchmark(data, grids, k=cfg.cv_k, seed=cfg.seed, standardize_per_fold=cfg.standardize_per_fold,
                         progress=lambda fam: log.info("benchmark: %s", fam))


def summarize(profiles: dict, baselines: dict) -> list:
    """Per-feature median, mean and fraction of parks strictly above the baseline."""
    ids = sorted(profiles)
    if not ids:
        raise PipelineError("nothing to summarize")
    rows = []
    columns = [("population", [profiles[p].population for p in ids]),
               ("income", [profiles[p].income for p in ids])]
    columns += [(k, [profiles[p].features[j] for p in ids]) for j, k in enumerate(DEFAULT_SCHEMA)]
    for key, vals in columns:
        v = np.array(vals)
        base = baselines.get(key)
        frac = float(np.mean(v > base)) if base is not None else None
        # correctly rounded mean, so any exact recount agrees bit for bit
        rows.append(dict(feature=key, n=len(v), median=float(np.median(v)), mean=math.fsum(vals) / len(v),
                         baseline=base, fraction_above=frac))
    return rows


def stage_summary(b: Bundle):
    if b.config.baselines is None:
        b.notices.append("no baselines configured; summary written without baseline comparison")
        baselines = {}
    else:
        baselines = read_baselines(b.config.baselines)
    b.summary = summarize(b.profiles, baselines) if b.profiles else []


def run_stages(config: PipelineConfig, upto: str = "benchmark", grids=None) -> Bundle:
    if upto not in STAGES:
        raise ValueError(upto)
    inputs = ingest(config)
    b = Bundle(config, inputs, notices=list(inputs.notices))
    stage_walksheds(b)
    if upto == "walkshed":
        return b
    stage_profiles(b)
    if upto == "profile":
        return b
    stage_normalize(b)
    if upto == "normalize":
        return b
    stage_benchmark(b, grids)
    return b


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else (v if isinstance(v, str) else fmt(v)) for v in r])


def _num(x):
    return "nan" if isinstance(x, float) and math.isnan(x) else x


def write_bundle(b: Bundle, out=None) -> Path:
    """Write every table the bundle holds; returns the output directory."""
    out = Path(out if out is not None else b.config.out)
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "rejects.csv", ["park_id", "reason"], b.inputs.rejects)
    _write(out / "walksheds.csv", ["park_id", "area_m2", "n_reachable", "hull_wkt"],
           [(p, w.area, len(w.reachable), w.hull.wkt()) for p, w in sorted(b.walksheds.items())])
    if b.decisions:
        _write(out / "decisions.csv", ["park_id", "included", "reasons"],
               [(p, "true" if d.included else "false", ";".join(d.reasons)) for p, d in sorted(b.decisions.items())])
        _write(out / "components.csv",
               ["park_id", "tract_id", "intersection_area_m2", "tract_area_m2", "fraction", "population",
                "data_available"],
               [(p, c.tract_id, c.intersection_area, c.tract_area, c.fraction, c.population,
                 "true" if c.data_available else "false")
                for p, comps in sorted(b.components.items()) for c in comps])
        _write(out / "profiles.csv", ["park_id", "population", "income"] + list(DEFAULT_SCHEMA.keys),
               [(p, pr.population, pr.income, *pr.features) for p, pr in sorted(b.profiles.items())])
    if b.normalized:
        cols = ["park_id", "area_km2", "population", "visits", "n_p", "target", "standardized"]
        _write(out / "normalized.csv", cols, [[r[c] for c in cols] for r in b.normalized])
        _write(out / "normalization.csv", ["parameter", "value"],
               [("area_exponent", b.params.area_exponent), ("population_exponent", b.params.population_exponent),
                ("source", b.params.source), ("target", b.config.target)])
        _write(out / "correlations.csv", ["feature", "pearson", "spearman", "n"],
               [(r["feature"], _num(r["pearson"]), _num(r["spearman"]), r["n"]) for r in b.correlations])
    if b.report is not None:
        (out / "benchmark.csv").write_text(b.report.to_csv())
        (out / "benchmark.txt").write_text(b.report.to_text())
        (out / "benchmark_cells.csv").write_text(b.report.cells_csv())
    if b.summary:
        _write(out / "summary.csv", ["feature", "n", "median", "mean", "baseline", "fraction_above"],
               [(r["feature"], r["n"], r["median"], r["mean"], r["baseline"],
                 "n/a" if r["fraction_above"] is None else r["fraction_above"]) for r in b.summary])
    (out / "notices.txt").write_text("".join(f"{n}\n" for n in b.notices))
    return out


def run_pipeline(config: PipelineConfig, grids=None) -> Bundle:
    """All stages, summary and figures; writes the bundle to ``config.out``."""
    b = run_stages(config, "benchmark", grids)
    stage_summary(b)
    out = write_bundle(b)
    if config.figures:
        from .figures import render_figures
        b.notices.extend(render_figures(b, out / "figures"))
        (out / "notices.txt").write_text("".join(f"{n}\n" for n in b.notices))
    return b

