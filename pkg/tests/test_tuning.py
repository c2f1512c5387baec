import csv
import io
import json

import numpy as np
import pytest

from parkwalk.errors import GridSearchFailedError, ValidationError
from parkwalk.regress import RegressorSpec, fit, mae
from parkwalk.tuning import (
    Dataset,
    GridSpec,
    benchmark,
    cv_mae,
    evaluate_cells,
    grid_search,
    improvement_pct,
    kfold,
    standard_grids,
)


def noise_data(rng, n=120, d=4):
    return Dataset(rng.normal(size=(n, d)), rng.normal(size=n))


def manual_cv(spec, data, plan):
    errs = []
    for f in range(plan.k):
        tr, te = plan.train_indices(f), plan.test_indices(f)
        model = fit(spec, data.X[tr], data.y[tr])
        errs.append(mae(model.predict(data.X[te]), data.y[te]))
    return float(np.mean(errs))


class TestFolds:
    def test_partition_sweep(self):
        for n in range(7, 101):
            for k in range(2, 8):
                plan = kfold(n, k, seed=n * 31 + k)
                sizes = np.bincount(plan.assignments, minlength=k)
                assert sizes.sum() == n and sizes.max() - sizes.min() <= 1
                got = np.sort(np.concatenate([plan.test_indices(f) for f in range(k)]))
                assert np.array_equal(got, np.arange(n))

    def test_exact_division(self):
        plan = kfold(10, 5, 0)
        assert np.all(np.bincount(plan.assignments) == 2)

    def test_remainder(self):
        assert list(np.bincount(kfold(11, 5, 0).assignments)) == [3, 2, 2, 2, 2]

    def test_deterministic(self):
        assert np.array_equal(kfold(50, 5, 9).assignments, kfold(50, 5, 9).assignments)

    def test_k_too_large(self):
        with pytest.raises(ValidationError):
            kfold(4, 5)
        with pytest.raises(ValidationError):
            kfold(10, 1)


class TestCV:
    def test_null_expansion(self, rng):
        data = noise_data(rng)
        plan = kfold(data.n, 5, 1)
        want = np.mean([np.mean(np.abs(data.y[plan.test_indices(f)] - data.y[plan.train_indices(f)].mean()))
                        for f in range(5)])
        assert cv_mae(RegressorSpec("null"), data, plan) == pytest.approx(want, rel=1e-14)

    def test_noiseless_linear(self, rng):
        X = rng.normal(size=(100, 4))
        data = Dataset(X, X @ [1.0, -0.5, 0.25, 2.0])
        assert cv_mae(RegressorSpec("lasso", {"alpha": 1e-6}), data, kfold(100, 5, 0)) < 0.01

    @pytest.mark.parametrize("family,params", [
        ("lasso", {"alpha": 0.01}),
        ("elastic-net", {"alpha": 0.001, "l1_ratio": 0.3}),
        ("svr-linear", {"C": 0.01}),
        ("svr-rbf", {"C": 0.5, "gamma": "scale"}),
        ("svr-poly", {"C": 0.01, "degree": 2, "gamma": "auto"}),
    ])
    def test_cached_path_matches_direct_fits(self, rng, family, params):
        data = noise_data(rng, n=90)
        plan = kfold(90, 5, 3)
        spec = RegressorSpec(family, params)
        assert cv_mae(spec, data, plan) == pytest.approx(manual_cv(spec, data, plan), rel=1e-9)

    def test_forest_truncation_matches_direct_fits(self, rng):
        data = noise_data(rng, n=80, d=4)
        plan = kfold(80, 4, 2)
        cells = [
            {"n_estimators": n, "max_features": mf, "max_depth": md, "min_samples_split": mss,
             "min_samples_leaf": msl, "bootstrap": boot}
            for n in (3, 7) for mf in ("n_features", "sqrt") for md in (2, 4, None) for mss in (2, 9)
            for msl in (1, 3) for boot in (True, False)
        ]
        got = evaluate_cells("random-forest", cells, data, plan, seed=11)
        for c, g in zip(cells, got):
            want = manual_cv(RegressorSpec("random-forest", c, seed=11), data, plan)
            assert g == pytest.approx(want, rel=1e-12, abs=1e-15), c

    def test_per_fold_standardization(self, rng):
        data = Dataset(rng.normal(5, 3, size=(60, 3)), rng.normal(10, 2, 60))
        plan = kfold(60, 5, 0)
        a = cv_mae(RegressorSpec("null"), data, plan, standardize_per_fold=True)
        b = cv_mae(RegressorSpec("null"), data, plan)
        assert a != b and np.isfinite(a)

    def test_null_world_models_do_not_beat_null(self):
        gaps = []
        for seed in range(20):
            r = np.random.default_rng(seed)
            data = noise_data(r, n=300, d=6)
            plan = kfold(300, 5, seed)
            null = cv_mae(RegressorSpec("null"), data, plan)
            gaps.append(cv_mae(RegressorSpec("lasso", {"alpha": 1e-3}), data, plan) - null)
        assert np.median(gaps) >= -0.02


class TestGridSearch:
    def test_single_cell(self, rng):
        data = noise_data(rng)
        res = grid_search(GridSpec("lasso", (("alpha", (0.01,)),)), data)
        assert res.best.params["alpha"] == 0.01

    def test_argmin_and_shared_plan(self, rng):
        data = noise_data(rng)
        grid = GridSpec("elastic-net", (("alpha", (1e-3, 1e-2, 1e-1)), ("l1_ratio", (0.0, 0.5, 1.0))))
        res = grid_search(grid, data, seed=4)
        plan = kfold(data.n, 5, 4)
        direct = [cv_mae(RegressorSpec("elastic-net", c), data, plan) for c in grid.cells()]
        assert [c.cv_mae for c in res.cells] == pytest.approx(direct, rel=1e-12)
        assert res.best_mae == min(direct)
        assert dict(res.best.params) == grid.cells()[int(np.argmin(direct))]

    def test_smallest_alpha_on_noiseless(self, rng):
        X = rng.normal(size=(100, 5))
        data = Dataset(X, X @ rng.normal(size=5))
        res = grid_search(GridSpec("lasso", (("alpha", (1e-5, 1e-4, 1e-3, 1e-2)),)), data)
        assert res.best.params["alpha"] == 1e-5

    def test_tie_goes_to_first_cell(self, rng):
        data = noise_data(rng)
        # alphas above alpha_max all give the intercept-only model
        res = grid_search(GridSpec("lasso", (("alpha", (50.0, 10.0, 20.0)),)), data)
        assert res.best.params["alpha"] == 50.0

    def test_removing_losing_cells(self, rng):
        data = noise_data(rng)
        grid = GridSpec("svr-rbf", (("C", (0.05, 0.2, 0.5, 1.0)), ("gamma", ("auto", "scale"))))
        full = grid_search(grid, data, seed=2)
        cells = grid.cells()
        win = cells.index({k: full.best.params[k] for k in cells[0]})
        for drop in range(len(cells)):
            if drop == win:
                continue
            sub = grid_search(grid, data, seed=2, cells=cells[:drop] + cells[drop + 1:])
            assert dict(sub.best.params) == dict(full.best.params)

    def test_best_not_worse_than_any_cell(self, rng):
        data = noise_data(rng)
        grid = GridSpec("random-forest", (("n_estimators", (5, 10)), ("max_depth", (2, 5)),
                                          ("max_features", ("sqrt",))))
        res = grid_search(grid, data)
        assert all(res.best_mae <= c.cv_mae for c in res.cells)

    def test_empty_axis(self):
        with pytest.raises(ValidationError):
            GridSpec("lasso", (("alpha", ()),))

    def test_invalid_cell(self):
        with pytest.raises(ValidationError):
            GridSpec("lasso", (("alpha", (0.1, -1.0)),))

    def test_all_cells_fail(self, rng):
        data = Dataset(np.ones((20, 2)) + np.eye(20, 2), rng.normal(size=20))
        with pytest.raises(GridSearchFailedError):
            grid_search(GridSpec("null", ()), data, standardize_per_fold=True)


class TestStandardGrids:
    def test_cell_counts(self):
        counts = {g.family: len(g) for g in standard_grids()}
        assert counts["lasso"] == 4
        assert counts["elastic-net"] == 4 * 101
        assert counts["random-forest"] == 2 * 2 * 6 * 3 * 3 * 2 == 432
        assert counts["svr-linear"] == 4
        assert counts["svr-rbf"] == 200
        for g in standard_grids():
            assert len(g.cells()) == len(g)

    def test_grid_endpoints(self):
        grids = {g.family: dict(g.axes) for g in standard_grids()}
        c = grids["svr-rbf"]["C"]
        assert c[0] == 0.01 and c[-1] == 1.0 and len(c) == 100
        l1 = grids["elastic-net"]["l1_ratio"]
        assert l1[0] == 0.0 and l1[-1] == 1.0 and 0.99 in l1 and 0.01 in l1
        assert grids["lasso"]["alpha"] == (1e-5, 1e-4, 1e-3, 1e-2)


class TestBenchmark:
    @pytest.mark.parametrize("model,want", [(0.2664, 5.20), (0.2759, 1.81), (0.2758, 1.85), (0.2810, 0.0)])
    def test_improvement_arithmetic(self, model, want):
        assert improvement_pct(0.2810, model) == pytest.approx(want, abs=0.01)

    def test_negative_improvement(self):
        assert improvement_pct(0.5, 0.6) == pytest.approx(-20.0)

    def _small(self, rng, seed=0):
        data = noise_data(rng, n=100, d=3)
        grids = [GridSpec("lasso", (("alpha", (1e-3, 1e-2)),)),
                 GridSpec("svr-linear", (("C", (1e-3, 1e-2)),)),
                 GridSpec("random-forest", (("n_estimators", (5,)), ("max_depth", (3,))))]
        return benchmark(data, grids, seed=seed)

    def test_report_shape(self, rng):
        rep = self._small(rng)
        rows = list(csv.reader(io.StringIO(rep.to_csv())))
        assert rows[0] == ["model", "grid_json", "tuned_params_json", "cv_mae", "improvement_pct"]
        assert len(rows) == 5
        for r in rows[1:]:
            json.loads(r[1])
            json.loads(r[2])
            assert float(r[4]) == pytest.approx(improvement_pct(rep.null_mae, float(r[3])))
        assert "Mean Absolute Error" in rep.to_text()

    def test_deterministic(self):
        a = self._small(np.random.default_rng(1), seed=3)
        b = self._small(np.random.default_rng(1), seed=3)
        assert a.to_csv() == b.to_csv() and a.cells_csv() == b.cells_csv() and a.to_text() == b.to_text()

    def test_empty_grids(self, rng):
        with pytest.raises(ValidationError):
            benchmark(noise_data(rng), [])
