"""Pedestrian walk network and walkshed construction.

A walkshed is the convex hull of every network node whose walking distance
from the park boundary is within the budget ``speed * time``.
"""
from __future__ import annotations

import csv
import heapq
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    DegenerateGeometryError,
    FormatError,
    NoAccessError,
    ReferentialIntegrityError,
    ValidationError,
    ZeroAreaWalkshedError,
)
from .geometry import ConvexPolygon, Polygon, Region, convex_hull, distance_to_boundary, point_in_polygon

WALK_SPEED = 1.34  # m/s, about 3 mph
WALK_TIME = 600.0  # s
SNAP_RADIUS = 25.0  # m


class WalkGraph:
    """Undirected graph with planar node coordinates and edge lengths in meters.

    Node ids are kept as strings in input order; ``coords`` rows follow that
    order. Adjacency is stored CSR-style for the shortest-path search.
    """

    def __init__(self, node_ids, coords, edges):
        self.node_ids = list(node_ids)
        self.index = {nid: i for i, nid in enumerate(self.node_ids)}
        if len(self.index) != len(self.node_ids):
            raise ValidationError("duplicate node id")
        self.coords = np.asarray(coords, dtype=float).reshape(-1, 2)
        if not np.all(np.isfinite(self.coords)):
            raise ValidationError("non-finite node coordinate")
        self.coords.setflags(write=False)

        best: dict[tuple[int, int], float] = {}
        for u, v, length in edges:
            if u not in self.index:
                raise ReferentialIntegrityError(f"edge references unknown node {u!r}")
            if v not in self.index:
                raise ReferentialIntegrityError(f"edge references unknown node {v!r}")
            length = float(length)
            if not (length > 0 and np.isfinite(length)):
                raise ValidationError(f"edge {u}-{v} has non-positive length {length}")
            if u == v:
                raise ValidationError(f"self-loop on node {u!r}")
            a, b = self.index[u], self.index[v]
            key = (a, b) if a < b else (b, a)
            if key not in best or length < best[key]:
                best[key] = length
        self.edges = sorted((a, b, w) for (a, b), w in best.items())

        n = len(self.node_ids)
        deg = np.zeros(n + 1, dtype=np.int64)
        for a, b, _ in self.edges:
            deg[a + 1] += 1
            deg[b + 1] += 1
        self.indptr = np.cumsum(deg)
        self.nbr = np.empty(self.indptr[-1], dtype=np.int64)
        self.wt = np.empty(self.indptr[-1], dtype=float)
        fill = self.indptr[:-1].copy()
        for a, b, w in self.edges:
            self.nbr[fill[a]] = b
            self.wt[fill[a]] = w
            fill[a] += 1
            self.nbr[fill[b]] = a
            self.wt[fill[b]] = w
            fill[b] += 1
        self._grid = None

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_list(self):
        """Deduplicated edges as ``(u_id, v_id, length)``."""
        return [(self.node_ids[a], self.node_ids[b], w) for a, b, w in self.edges]

    def nodes_in_box(self, xmin, ymin, xmax, ymax) -> np.ndarray:
        c = self.coords
        mask = (c[:, 0] >= xmin) & (c[:, 0] <= xmax) & (c[:, 1] >= ymin) & (c[:, 1] <= ymax)
        return np.flatnonzero(mask)

    def with_edge(self, u, v, length) -> "WalkGraph":
        return WalkGraph(self.node_ids, self.coords, self.edge_list() + [(u, v, length)])


def load_network(nodes, edges) -> WalkGraph:
    """Build a graph from node rows ``(node_id, x_m, y_m)`` and edge rows ``(u, v, length_m)``.

    Either argument may be a path to a delimited file with the documented
    header, or an iterable of row tuples.
    """
    if isinstance(nodes, (str, bytes)) or hasattr(nodes, "__fspath__"):
        nodes = _read_table(nodes, ("node_id", "x_m", "y_m"))
    if isinstance(edges, (str, bytes)) or hasattr(edges, "__fspath__"):
        edges = _read_table(edges, ("u", "v", "length_m"))
    ids, coords = [], []
    for row in nodes:
        nid, x, y = row
        ids.append(str(nid))
        coords.append((float(x), float(y)))
    return WalkGraph(ids, coords, [(str(u), str(v), float(w)) for u, v, w in edges])


def _read_table(path, header):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader, None)
        if head is None or tuple(h.strip() for h in head) != header:
            raise FormatError(f"{path}: expected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                rows.append((row[0].strip(), float(row[1]), float(row[2])) if header[0] == "node_id"
                            else (row[0].strip(), row[1].strip(), float(row[2])))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return rows


def write_network(graph: WalkGraph, nodes_path, edges_path) -> None:
    with open(nodes_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "x_m", "y_m"])
        for nid, (x, y) in zip(graph.node_ids, graph.coords):
            w.writerow([nid, repr(float(x)), repr(float(y))])
    with open(edges_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v", "length_m"])
        for u, v, length in graph.edge_list():
            w.writerow([u, v, repr(float(length))])


def access_nodes(graph: WalkGraph, park: Polygon, snap_radius: float = SNAP_RADIUS) -> set:
    """Node ids inside the park or within ``snap_radius`` of its boundary."""
    if snap_radius < 0:
        raise ValidationError("snap radius must be non-negative")
    if isinstance(park, Region):
        out = set()
        for outer, _ in park.parts:
            out |= access_nodes(graph, outer, snap_radius)
        return out
    xmin, ymin, xmax, ymax = park.bounds
    cand = graph.nodes_in_box(xmin - snap_radius, ymin - snap_radius, xmax + snap_radius, ymax + snap_radius)
    if len(cand) == 0:
        return set()
    pts = graph.coords[cand]
    ok = point_in_polygon(pts, park) | (distance_to_boundary(pts, park) <= snap_radius)
    return {graph.node_ids[i] for i in cand[ok]}


def reachable_nodes(graph: WalkGraph, sources: Iterable, budget: float) -> dict:
    """Multi-source Dijkstra truncated at ``budget`` meters.

    Returns ``{node_id: distance}`` for every node within the budget.
    """
    sources = list(sources)
    if not sources:
        raise NoAccessError("no source nodes")
    if not budget > 0:
        raise ValidationError("budget must be positive")
    dist: dict[int, float] = {}
    heap = []
    for s in sources:
        if s not in graph.index:
            raise ReferentialIntegrityError(f"unknown source node {s!r}")
        heap.append((0.0, graph.index[s]))
    heapq.heapify(heap)
    indptr, nbr, wt = graph.indptr, graph.nbr, graph.wt
    while heap:
        d, u = heapq.heappop(heap)
        if u in dist:
            continue
        dist[u] = d
        for k in range(indptr[u], indptr[u + 1]):
            v = int(nbr[k])
            nd = d + wt[k]
            if nd <= budget and v not in dist:
                heapq.heappush(heap, (nd, v))
    return {graph.node_ids[i]: d for i, d in dist.items()}


@dataclass(frozen=True)
class Walkshed:
    park_id: str
    hull: ConvexPolygon
    reachable: frozenset
    budget_m: float

    @property
    def area(self) -> float:
        return self.hull.area


def build_walkshed(
    graph: WalkGraph,
    park: Polygon,
    park_id: str = "",
    speed: float = WALK_SPEED,
    time_budget: float = WALK_TIME,
    snap_radius: float = SNAP_RADIUS,
) -> Walkshed:
    """Convex hull of the nodes reachable within ``speed * time_budget`` of the park edge.

    Raises :class:`ZeroAreaWalkshedError` when the park has no access nodes
    or the reachable nodes do not span a positive area.
    """
    budget = speed * time_budget
    sources = access_nodes(graph, park, snap_radius)
    if not sources:
        raise ZeroAreaWalkshedError(f"park {park_id!r} has no access to the walk network")
    reach = reachable_nodes(graph, sorted(sources, key=graph.index.__getitem__), budget)
    pts = graph.coords[sorted(graph.index[n] for n in reach)]
    try:
        hull = convex_hull(pts)
    except DegenerateGeometryError:
        raise ZeroAreaWalkshedError(f"park {park_id!r} reaches only collinear nodes") from None
    return Walkshed(park_id, hull, frozenset(reach), budget)


def grid_graph(nx: int, ny: int, spacing: float, origin=(0.0, 0.0), prefix: str = "") -> WalkGraph:
    """Regular street grid with ``nx * ny`` intersections; ids are ``{prefix}{i}_{j}``."""
    ids, coords, edges = [], [], []
    for j in range(ny):
        for i in range(nx):
            ids.append(f"{prefix}{i}_{j}")
            coords.append((origin[0] + i * spacing, origin[1] + j * spacing))
    for j in range(ny):
        for i in range(nx):
            if i + 1 < nx:
                edges.append((f"{prefix}{i}_{j}", f"{prefix}{i + 1}_{j}", spacing))
            if j + 1 < ny:
                edges.append((f"{prefix}{i}_{j}", f"{prefix}{i}_{j + 1}", spacing))
    return WalkGraph(ids, coords, edges)


def merge_graphs(graphs: Iterable[WalkGraph]) -> WalkGraph:
    ids, coords, edges = [], [], []
    for g in graphs:
        ids.extend(g.node_ids)
        coords.append(g.coords)
        edges.extend(g.edge_list())
    return WalkGraph(ids, np.vstack(coords) if coords else np.empty((0, 2)), edges)


__all__ = [
    "WalkGraph",
    "Walkshed",
    "load_network",
    "write_network",
    "access_nodes",
    "reachable_nodes",
    "build_walkshed",
    "grid_graph",
    "merge_graphs",
    "WALK_SPEED",
    "WALK_TIME",
    "SNAP_RADIUS",
]
