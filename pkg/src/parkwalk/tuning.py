"""K-fold cross-validation, grid search and the benchmark against the null model."""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import regress
from .errors import GridSearchFailedError, SingularFitError, ValidationError
from .regress import _tree
from .regress.base import RegressorSpec
from .regress.forest import canonical_rows, depth_limit, resolve_max_features
from .regress.linear import centered_gram, fit_elastic_net
from .regress.svr import fit_svr, kernel_matrix, resolve_gamma


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple = ()

    def __post_init__(self):
        X, y = regress.check_xy(self.X, self.y)
        if X.shape[0] < X.shape[1] or X.shape[1] < 1:
            raise ValidationError(f"need n >= d >= 1, got shape {X.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class FoldPlan:
    n: int
    k: int
    seed: int
    assignments: np.ndarray

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def kfold(n: int, k: int = 5, seed: int = 0) -> FoldPlan:
    """Seeded shuffle, then contiguous folds; earlier folds take the remainder."""
    if not 2 <= k <= n:
        raise ValidationError(f"need 2 <= k <= n, got k={k}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    assign = np.empty(n, dtype=np.int64)
    for fold, chunk in enumerate(np.array_split(perm, k)):
        assign[chunk] = fold
    assign.setflags(write=False)
    return FoldPlan(n, k, seed, assign)


def _zscore_with(train, other):
    mu = train.mean(axis=0)
    sd = train.std(axis=0, ddof=1)
    if np.any(sd == 0):
        raise SingularFitError("zero variance in training fold")
    return (train - mu) / sd, (other - mu) / sd


class _Folds:
    """Per-fold train/test arrays plus caches shared by every grid cell."""

    def __init__(self, data: Dataset, plan: FoldPlan, standardize_per_fold: bool = False):
        if plan.n != data.n:
            raise ValidationError("fold plan size does not match dataset")
        self.folds = []
        for f in range(plan.k):
            tr, te = plan.train_indices(f), plan.test_indices(f)
            Xtr, Xte = data.X[tr], data.X[te]
            ytr, yte = data.y[tr], data.y[te]
            if standardize_per_fold:
                Xtr, Xte = _zscore_with(Xtr, Xte)
                ytr, yte = _zscore_with(ytr, yte)
            self.folds.append((np.ascontiguousarray(Xtr), ytr, np.ascontiguousarray(Xte), yte))
        self.cache: dict = {}

    def cached(self, key, build):
        if key not in self.cache:
            self.cache[key] = build()
        return self.cache[key]


def _cv_null(folds: _Folds, cells):
    out = []
    for _ in cells:
        out.append(np.mean([np.mean(np.abs(yte - ytr.mean())) for _, ytr, _, yte in folds.folds]))
    return out


def _cv_linear(folds: _Folds, family, cells):
    out = []
    for p in cells:
        l1 = 1.0 if family == "lasso" else p["l1_ratio"]
        errs = []
        for f, (Xtr, ytr, Xte, yte) in enumerate(folds.folds):
            stats = folds.cached(("gram", f), lambda: centered_gram(Xtr, ytr))
            model = fit_elastic_net(Xtr, ytr, p["alpha"], l1, gram_stats=stats)
            errs.append(regress.mae(model.predict(Xte), yte))
        out.append(float(np.mean(errs)))
    return out


def _cv_svr(folds: _Folds, family, cells):
    kind = family[4:]
    out = []
    for p in cells:
        errs = []
        for f, (Xtr, ytr, Xte, yte) in enumerate(folds.folds):
            g = resolve_gamma(p.get("gamma", "auto"), Xtr)
            deg, c0 = int(p.get("degree", 3)), float(p.get("coef0", 0.0))
            key = ("kernel", f, kind, g, deg, c0)
            Ktr, Kte = folds.cached(key, lambda: (kernel_matrix(kind, Xtr, Xtr, g, deg, c0),
                                                   kernel_matrix(kind, Xte, Xtr, g, deg, c0)))
            model = fit_svr(Xtr, ytr, kernel=kind, C=p["C"], epsilon=p.get("epsilon", 0.1), gamma=g,
                            degree=deg, coef0=c0, K=Ktr)
            beta = model.diagnostics["beta"]
            errs.append(regress.mae(Kte @ beta + model.intercept, yte))
        out.append(float(np.mean(errs)))
    return out


def _cv_forest(folds: _Folds, cells, seed):
    """Grow each (max_features, min_leaf, bootstrap) forest once per fold at full depth.

    Depth and min-split limits only ever turn internal nodes into leaves, and
    node randomness is keyed by position, so every limited forest is an exact
    truncation of the full one; the first ``m`` trees of a larger forest are
    the ``m``-tree forest.
    """
    groups: dict = {}
    for i, p in enumerate(cells):
        groups.setdefault((p["max_features"], int(p["min_samples_leaf"]), bool(p["bootstrap"])), []).append(i)
    out = [None] * len(cells)
    for (mf, leaf, boot), members in groups.items():
        depths = sorted({depth_limit(cells[i]["max_depth"]) for i in members})
        splits = sorted({int(cells[i]["min_samples_split"]) for i in members})
        counts = sorted({int(cells[i]["n_estimators"]) for i in members})
        errs = {i: [] for i in members}
        for Xtr, ytr, Xte, yte in folds.folds:
            Xc, yc = canonical_rows(Xtr, ytr)
            arrays = _tree.grow_forest(Xc, yc, counts[-1], resolve_max_features(mf, Xc.shape[1]), leaf,
                                       _tree.NO_DEPTH_LIMIT, 2, boot, np.uint64(seed))
            preds = _tree.predict_truncated(*arrays, Xte, np.array(depths, dtype=np.int64),
                                            np.array(splits, dtype=np.int64), np.array(counts, dtype=np.int64))
            for i in members:
                p = cells[i]
                pr = preds[counts.index(int(p["n_estimators"])), depths.index(depth_limit(p["max_depth"])),
                           splits.index(int(p["min_samples_split"]))]
                errs[i].append(regress.mae(pr, yte))
        for i in members:
            out[i] = float(np.mean(errs[i]))
    return out


def evaluate_cells(family: str, cells: Sequence[dict], data: Dataset, plan: FoldPlan, seed: int = 0,
                   standardize_per_fold: bool = False, folds: _Folds | None = None) -> list:
    """Cross-validated MAE for each hyperparameter dict in ``cells``, all on ``plan``."""
    cells = [dict(RegressorSpec(family, c, seed).params) for c in cells]
    if folds is None:
        folds = _Folds(data, plan, standardize_per_fold)
    if family == "null":
        return _cv_null(folds, cells)
    if family in ("lasso", "elastic-net"):
        return _cv_linear(folds, family, cells)
    if family.startswith("svr-"):
        return _cv_svr(folds, family, cells)
    return _cv_forest(folds, cells, seed)


def cv_mae(spec: RegressorSpec, data: Dataset, plan: FoldPlan, standardize_per_fold: bool = False) -> float:
    """Mean held-out MAE over the folds of ``plan``."""
    return evaluate_cells(spec.family, [dict(spec.params)], data, plan, spec.seed, standardize_per_fold)[0]


@dataclass(frozen=True)
class GridSpec:
    family: str
    axes: tuple  # ((name, (values...)), ...) in declaration order

    def __post_init__(self):
        axes = tuple((name, tuple(vals)) for name, vals in (self.axes.items() if isinstance(self.axes, dict)
                                                             else self.axes))
        if any(len(v) == 0 for _, v in axes):
            raise ValidationError(f"{self.family}: empty grid axis")
        object.__setattr__(self, "axes", axes)
        for cell in self.cells():
            RegressorSpec(self.family, cell)

    def cells(self) -> list[dict]:
        names = [a for a, _ in self.axes]
        return [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in self.axes))]

    def __len__(self):
        return int(np.prod([len(v) for _, v in self.axes])) if self.axes else 1

    def to_json(self) -> str:
        return json.dumps({name: list(vals) for name, vals in self.axes})


@dataclass
class CellResult:
    params: dict
    cv_mae: float
    error: str = ""


@dataclass
class GridResult:
    best: RegressorSpec
    best_mae: float
    cells: list = field(default_factory=list)


def grid_search(grid: GridSpec, data: Dataset, k: int = 5, seed: int = 0, plan: FoldPlan | None = None,
                standardize_per_fold: bool = False, cells: Sequence[dict] | None = None) -> GridResult:
    """Evaluate every cell on one shared fold plan and return the argmin.

    Ties go to the earliest cell in axis-declaration order. ``cells`` may
    restrict the search to a subset of the grid, in the grid's order.
    """
    if plan is None:
        plan = kfold(data.n, k, seed)
    cells = grid.cells() if cells is None else [dict(c) for c in cells]
    try:
        folds = _Folds(data, plan, standardize_per_fold)
    except SingularFitError as exc:
        raise GridSearchFailedError(f"{grid.family}: every grid cell failed ({exc})") from exc
    try:
        scores = evaluate_cells(grid.family, cells, data, plan, seed, folds=folds)
        results = [CellResult(c, float(s)) for c, s in zip(cells, scores)]
    except Exception:
        # fall back to cell-by-cell so one failing cell does not sink the grid
        results = []
        for c in cells:
            try:
                results.append(CellResult(c, evaluate_cells(grid.family, [c], data, plan, seed, folds=folds)[0]))
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                results.append(CellResult(c, float("nan"), f"{type(exc).__name__}: {exc}"))
    ok = [i for i, r in enumerate(results) if not r.error and np.isfinite(r.cv_mae)]
    if not ok:
        raise GridSearchFailedError(f"{grid.family}: every grid cell failed")
    best = min(ok, key=lambda i: (results[i].cv_mae, i))
    return GridResult(RegressorSpec(grid.family, results[best].params, seed), results[best].cv_mae, results)


DISPLAY = {
    "null": "Constant (null)",
    "svr-linear": "SVR - linear kernel",
    "svr-rbf": "SVR - rbf kernel",
    "svr-poly": "SVR - polynomial kernel",
    "lasso": "LASSO",
    "elastic-net": "Elastic Net",
    "random-forest": "Random Forest",
}

_DECADES = (1e-5, 1e-4, 1e-3, 1e-2)


def standard_grids() -> list[GridSpec]:
    """The six published hyperparameter grids, in table order."""
    hundredths = tuple(round(0.01 * i, 2) for i in range(1, 101))
    return [
        GridSpec("svr-linear", (("C", _DECADES),)),
        GridSpec("svr-rbf", (("C", hundredths), ("gamma", ("auto", "scale")))),
        GridSpec("svr-poly", (("C", _DECADES), ("gamma", ("auto", "scale")), ("degree", (1, 2, 3, 4, 5)))),
        GridSpec("lasso", (("alpha", _DECADES),)),
        GridSpec("elastic-net", (("alpha", _DECADES), ("l1_ratio", tuple(round(0.01 * i, 2) for i in range(101))))),
        GridSpec("random-forest", (
            ("n_estimators", (200, 400)),
            ("max_features", ("n_features", "sqrt")),
            ("max_depth", (10, 30, 50, 70, 90, 110)),
            ("min_samples_split", (2, 5, 10)),
            ("min_samples_leaf", (1, 2, 4)),
            ("bootstrap", (True, False)),
        )),
    ]


def improvement_pct(null_mae: float, model_mae: float) -> float:
    return (null_mae - model_mae) / null_mae * 100.0


@dataclass
class BenchmarkRow:
    family: str
    grid: GridSpec | None
    tuned: dict
    cv_mae: float
    improvement: float
    error: str = ""
    cells: list = field(default_factory=list)

    @property
    def model(self) -> str:
        return DISPLAY[self.family]


@dataclass
class BenchmarkReport:
    null_mae: float
    rows: list

    def best_improvement(self) -> float:
        vals = [r.improvement for r in self.rows if r.family != "null" and not r.error]
        return max(vals) if vals else float("nan")

    def row(self, family: str) -> BenchmarkRow:
        return next(r for r in self.rows if r.family == family)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "grid_json", "tuned_params_json", "cv_mae", "improvement_pct"])
        for r in self.rows:
            w.writerow([
                r.model,
                r.grid.to_json() if r.grid is not None else "{}",
                json.dumps(r.tuned, sort_keys=True),
                "" if r.error else repr(float(r.cv_mae)),
                "" if r.error else repr(float(r.improvement)),
            ])
        return buf.getvalue()

    def cells_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "params_json", "cv_mae", "error"])
        for r in self.rows:
            for c in r.cells:
                w.writerow([r.model, json.dumps(c.params, sort_keys=True), repr(float(c.cv_mae)), c.error])
        return buf.getvalue()

    def to_text(self) -> str:
        head = ("Model", "Tuned hyperparameters", "Mean Absolute Error", "Improvement")
        body = []
        for r in self.rows:
            tuned = ", ".join(f"{k}={v}" for k, v in r.tuned.items()) or "-"
            if r.error:
                body.append((r.model, tuned, "failed", r.error))
            else:
                body.append((r.model, tuned, f"{r.cv_mae:.4f}", f"{r.improvement:.2f}%"))
        widths = [max(len(x[i]) for x in [head] + body) for i in range(4)]
        lines = ["  ".join(h.ljust(wd) for h, wd in zip(head, widths)).rstrip()]
        lines.append("  ".join("-" * wd for wd in widths))
        lines += ["  ".join(c.ljust(wd) for c, wd in zip(row, widths)).rstrip() for row in body]
        return "\n".join(lines) + "\n"


def benchmark(data: Dataset, grids: Sequence[GridSpec] | None = None, k: int = 5, seed: int = 0,
              standardize_per_fold: bool = False, progress=None) -> BenchmarkReport:
    """Grid-search each family on one fold plan and compare its best CV MAE to the null model.

    A family whose grid fails entirely keeps its row with the error recorded.
    """
    grids = standard_grids() if grids is None else list(grids)
    if not grids:
        raise ValidationError("no grids to benchmark")
    plan = kfold(data.n, k, seed)
    null = cv_mae(RegressorSpec("null"), data, plan, standardize_per_fold)
    rows = [BenchmarkRow("null", None, {}, null, 0.0)]
    for g in grids:
        if progress:
            progress(g.family)
        try:
            res = grid_search(g, data, plan=plan, seed=seed, standardize_per_fold=standardize_per_fold)
            rows.append(BenchmarkRow(g.family, g, dict(res.best.params), res.best_mae,
                                     improvement_pct(null, res.best_mae), cells=res.cells))
        except GridSearchFailedError as exc:
            rows.append(BenchmarkRow(g.family, g, {}, float("nan"), float("nan"), str(exc)))
    return BenchmarkReport(null, rows)
