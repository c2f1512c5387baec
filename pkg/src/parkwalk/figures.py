"""SVG figures for a pipeline bundle.

Rendering uses the Agg backend with a fixed hash salt and no date stamp so
the same bundle always produces the same bytes.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .census import DEFAULT_SCHEMA  # noqa: E402
from .errors import SingularFitError, ValidationError  # noqa: E402
from .normalize import loglog_slope  # noqa: E402

BINS = 30
FIGURES = ("distributions", "demographics", "loglog", "normalized")


def _save(fig, path: Path):
    with matplotlib.rc_context({"svg.hashsalt": "parkwalk", "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _hist(ax, values, title, baseline=None):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    counts, edges = np.histogram(v, bins=BINS)
    ax.hist(v, bins=edges, color="0.45")
    if baseline is not None:
        ax.axvline(baseline, color="k", ls="--", lw=1)
    ax.set_title(title, fontsize=8)
    ax.tick_params(labelsize=6)
    return counts


def figure_data(bundle) -> dict:
    """The numbers each figure draws: series, histogram counts and fitted slopes."""
    rows = bundle.normalized
    area = np.array([r["area_km2"] for r in rows])
    pop = np.array([r["population"] for r in rows])
    visits = np.array([r["visits"] for r in rows])
    base = {r["feature"]: r["baseline"] for r in bundle.summary}
    ids = [r["park_id"] for r in rows]
    feats = np.array([bundle.profiles[p].features for p in ids]).reshape(len(ids), len(DEFAULT_SCHEMA))
    out = {
        "distributions": {"log10 park area (km^2)": np.log10(area), "log10 walkshed population": np.log10(pop),
                          "log10 yearly visits": np.log10(visits[visits > 0])},
        "demographics": {k: feats[:, j] for j, k in enumerate(DEFAULT_SCHEMA)},
        "baselines": {k: base.get(k) for k in DEFAULT_SCHEMA},
        "normalized": np.array([r["standardized"] for r in rows]),
        "slopes": {},
    }
    pos = visits > 0
    for name, x in (("area", area), ("population", pop)):
        try:
            out["slopes"][name] = loglog_slope(x[pos], visits[pos])
        except (SingularFitError, ValidationError):
            out["slopes"][name] = None
    out["counts"] = {k: np.histogram(v[np.isfinite(v)], bins=BINS)[0]
                     for k, v in list(out["distributions"].items()) + list(out["demographics"].items())}
    return out


def render_figures(bundle, directory) -> list:
    """Write the four figures; returns notices for anything left out."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    notices = []
    if not bundle.normalized:
        return ["figures skipped: no included parks"]
    data = figure_data(bundle)

    fig, axes = plt.subplots(1, 3, figsize=(9, 3))
    for ax, (title, v) in zip(axes, data["distributions"].items()):
        if len(v) == 0:
            notices.append(f"figure distributions: empty series {title!r}")
            ax.set_title(title, fontsize=8)
            continue
        _hist(ax, v, title)
    fig.tight_layout()
    _save(fig, d / "distributions.svg")

    keys = list(data["demographics"])
    ncol = 4
    fig, axes = plt.subplots(-(-len(keys) // ncol), ncol, figsize=(10, 9))
    for ax, k in zip(axes.ravel(), keys):
        v = data["demographics"][k]
        if not np.isfinite(v).any():
            notices.append(f"figure demographics: empty series {k!r}")
            ax.set_title(k, fontsize=8)
            continue
        _hist(ax, v, k, data["baselines"][k])
    for ax in axes.ravel()[len(keys):]:
        ax.axis("off")
    fig.tight_layout()
    _save(fig, d / "demographics.svg")

    rows = bundle.normalized
    visits = np.array([r["visits"] for r in rows])
    pos = visits > 0
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5))
    for ax, (name, key, label) in zip(axes, (("area", "area_km2", "park area (km^2)"),
                                             ("population", "population", "walkshed population"))):
        x = np.array([r[key] for r in rows])[pos]
        ax.loglog(x, visits[pos], ".", ms=2, color="0.3")
        ax.set_xlabel(label, fontsize=8)
        ax.set_ylabel("yearly visits", fontsize=8)
        fitted = data["slopes"][name]
        if fitted is None:
            notices.append(f"figure loglog: no slope for {name}")
            continue
        slope, icpt = fitted
        xs = np.array([x.min(), x.max()])
        ax.loglog(xs, np.exp(icpt) * xs ** slope, "k-", lw=1)
        ax.text(0.05, 0.9, f"slope {slope:.2f}", transform=ax.transAxes, fontsize=8)
    fig.tight_layout()
    _save(fig, d / "loglog.svg")

    fig, ax = plt.subplots(figsize=(4, 3))
    _hist(ax, data["normalized"], "standardized normalized visitation")
    fig.tight_layout()
    _save(fig, d / "normalized.svg")
    return notices
