"""Reading and writing the pipeline's input files.

Parks and tracts are GeoJSON FeatureCollections in projected meter
coordinates with an ``id`` property; tables are comma-separated with headers.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .census import CATEGORIES, TractRecord
from .errors import DegenerateGeometryError, FormatError, ValidationError
from .geometry import Polygon, Region
from .network import WalkGraph, load_network, write_network

DEMOGRAPHIC_COLUMNS = ("tract_id", "population", "population_25plus", "median_income", "median_age") + tuple(CATEGORIES)


def fmt(x) -> str:
    """Shortest round-tripping text for a float; integers stay integral."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _ring(coords, fid):
    try:
        arr = np.asarray(coords, dtype=float)
    except (TypeError, ValueError):
        raise FormatError(f"feature {fid!r}: malformed coordinate") from None
    if arr.ndim != 2 or arr.shape[1] != 2 or not np.all(np.isfinite(arr)):
        raise FormatError(f"feature {fid!r}: malformed coordinate")
    if len(arr) > 1 and np.array_equal(arr[0], arr[-1]):
        arr = arr[:-1]
    try:
        return Polygon(arr)
    except DegenerateGeometryError as exc:
        raise FormatError(f"feature {fid!r}: {exc}") from None


def _region(geom, fid) -> Region:
    if not isinstance(geom, dict) or "type" not in geom or "coordinates" not in geom:
        raise FormatError(f"feature {fid!r}: missing geometry")
    if geom["type"] == "Polygon":
        polys = [geom["coordinates"]]
    elif geom["type"] == "MultiPolygon":
        polys = geom["coordinates"]
    else:
        raise FormatError(f"feature {fid!r}: unsupported geometry type {geom['type']!r}")
    parts = []
    for rings in polys:
        if not rings:
            raise FormatError(f"feature {fid!r}: empty polygon")
        parts.append((_ring(rings[0], fid), tuple(_ring(r, fid) for r in rings[1:])))
    return Region(tuple(parts))


def read_features(path) -> dict:
    """``{id: Region}`` from a FeatureCollection; ids must be unique."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path.name}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if doc.get("type") != "FeatureCollection" or not isinstance(doc.get("features"), list):
        raise FormatError(f"{path.name}: expected a FeatureCollection")
    out = {}
    for k, feat in enumerate(doc["features"]):
        fid = (feat.get("properties") or {}).get("id")
        if fid is None:
            raise FormatError(f"{path.name}: feature #{k} has no id property")
        fid = str(fid)
        if fid in out:
            raise FormatError(f"{path.name}: duplicate feature id {fid!r}")
        out[fid] = _region(feat.get("geometry"), fid)
    return out


def _geometry(shape):
    parts = shape.parts if isinstance(shape, Region) else ((shape, ()),)

    def ring(p):
        v = [[float(x), float(y)] for x, y in p.vertices]
        return v + [v[0]]

    polys = [[ring(outer)] + [ring(h) for h in holes] for outer, holes in parts]
    if len(polys) == 1:
        return {"type": "Polygon", "coordinates": polys[0]}
    return {"type": "MultiPolygon", "coordinates": polys}


def write_features(path, shapes: dict):
    feats = [{"type": "Feature", "properties": {"id": fid}, "geometry": _geometry(shapes[fid])}
             for fid in sorted(shapes)]
    Path(path).write_text(json.dumps({"type": "FeatureCollection", "features": feats}) + "\n")


def _rows(path, header):
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader, None)
        if head is None or [h.strip() for h in head[:len(header)]] != list(header):
            raise FormatError(f"{path.name}: header must start with {','.join(header)}")
        for row in reader:
            if not row or not "".join(row).strip():
                continue
            yield reader.line_num, [c.strip() for c in row], [h.strip() for h in head]


def _number(text, where):
    try:
        v = float(text)
    except ValueError:
        raise FormatError(f"{where}: not a number: {text!r}") from None
    if not math.isfinite(v):
        raise FormatError(f"{where}: non-finite value")
    return v


def read_visits(path) -> dict:
    out = {}
    for line, row, _ in _rows(path, ("park_id", "yearly_visits")):
        if len(row) < 2:
            raise FormatError(f"{Path(path).name} line {line}: expected 2 columns")
        pid, v = row[0], _number(row[1], f"{Path(path).name} line {line}")
        if v < 0:
            raise FormatError(f"{Path(path).name} line {line}: negative visits")
        if pid in out:
            raise FormatError(f"{Path(path).name} line {line}: duplicate park id {pid!r}")
        out[pid] = v
    return out


def write_visits(path, visits: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["park_id", "yearly_visits"])
        for pid in sorted(visits):
            w.writerow([pid, fmt(visits[pid])])


def read_demographics(path) -> dict:
    """``{tract_id: row}``; a row with any blank value is ``None`` (data unavailable)."""
    out = {}
    name = Path(path).name
    for line, row, head in _rows(path, DEMOGRAPHIC_COLUMNS[:1]):
        if len(row) != len(head):
            raise FormatError(f"{name} line {line}: expected {len(head)} columns, got {len(row)}")
        missing_cols = [c for c in DEMOGRAPHIC_COLUMNS if c not in head]
        if missing_cols:
            raise FormatError(f"{name}: missing columns {missing_cols}")
        rec = dict(zip(head, row))
        tid = rec["tract_id"]
        if tid in out:
            raise FormatError(f"{name} line {line}: duplicate tract id {tid!r}")
        if any(rec[c] == "" for c in DEMOGRAPHIC_COLUMNS[1:]):
            out[tid] = None
        else:
            out[tid] = {c: _number(rec[c], f"{name} line {line} column {c}") for c in DEMOGRAPHIC_COLUMNS[1:]}
    return out


def write_demographics(path, tracts):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DEMOGRAPHIC_COLUMNS)
        for t in sorted(tracts, key=lambda t: t.tract_id):
            if not t.data_available:
                w.writerow([t.tract_id] + [""] * (len(DEMOGRAPHIC_COLUMNS) - 1))
                continue
            w.writerow([t.tract_id, fmt(t.population), fmt(t.population_25plus), fmt(t.median_income),
                        fmt(t.median_age)] + [fmt(t.counts.get(k, 0.0)) for k in CATEGORIES])


def read_baselines(path) -> dict:
    out = {}
    for line, row, _ in _rows(path, ("feature", "value")):
        out[row[0]] = _number(row[1], f"{Path(path).name} line {line}")
    return out


def write_baselines(path, baselines: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "value"])
        for k in sorted(baselines):
            w.writerow([k, fmt(baselines[k])])


def build_tracts(shapes: dict, demographics: dict) -> tuple[list, list]:
    """Join tract polygons to demographic rows; returns ``(tracts, notices)``.

    A polygon without a usable row becomes a tract flagged as lacking data.
    """
    tracts, notices = [], []
    for tid in sorted(shapes):
        row = demographics.get(tid)
        if row is None:
            if tid not in demographics:
                notices.append(f"tract {tid}: no demographics row")
            tracts.append(TractRecord(tid, shapes[tid], 0.0, float("nan"), float("nan"), {}, 0.0, False))
            continue
        counts = {k: row[k] for k in CATEGORIES}
        tracts.append(TractRecord(tid, shapes[tid], row["population"], row["median_income"], row["median_age"],
                                  counts, row["population_25plus"]))
    for tid in sorted(set(demographics) - set(shapes)):
        notices.append(f"tract {tid}: demographics row without polygon")
    return tracts, notices


@dataclass
class Inputs:
    parks: dict  # park id -> Region, only parks with visits
    visits: dict
    tracts: list
    graph: WalkGraph
    rejects: list = field(default_factory=list)  # (park id, reason)
    notices: list = field(default_factory=list)

    @property
    def park_ids(self) -> list:
        return sorted(self.parks)


def ingest(config) -> Inputs:
    config.require("parks", "visits", "tracts", "demographics", "nodes", "edges")
    for name in ("parks", "visits", "tracts", "demographics", "nodes", "edges"):
        if not Path(getattr(config, name)).is_file():
            raise ValidationError(f"{name} file not found: {getattr(config, name)}")
    parks = read_features(config.parks)
    visits = read_visits(config.visits)
    tracts, notices = build_tracts(read_features(config.tracts), read_demographics(config.demographics))
    graph = load_network(config.nodes, config.edges)
    rejects = [(p, "missing-visits") for p in sorted(set(parks) - set(visits))]
    rejects += [(p, "missing-polygon") for p in sorted(set(visits) - set(parks))]
    rejects.sort()
    keep = {p: parks[p] for p in parks if p in visits}
    return Inputs(keep, {p: visits[p] for p in keep}, tracts, graph, rejects, notices)


def write_inputs(directory, parks: dict, visits: dict, tracts, graph: WalkGraph, baselines: dict | None = None):
    """Write a complete input set plus a matching ``config.txt``; returns the config path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_features(d / "parks.geojson", parks)
    write_visits(d / "visits.csv", visits)
    write_features(d / "tracts.geojson", {t.tract_id: t.region for t in tracts})
    write_demographics(d / "demographics.csv", tracts)
    write_network(graph, d / "nodes.csv", d / "edges.csv")
    lines = ["parks = parks.geojson", "visits = visits.csv", "tracts = tracts.geojson",
             "demographics = demographics.csv", "nodes = nodes.csv", "edges = edges.csv"]
    if baselines is not None:
        write_baselines(d / "baselines.csv", baselines)
        lines.append("baselines = baselines.csv")
    (d / "config.txt").write_text("\n".join(lines) + "\n")
    return d / "config.txt"
