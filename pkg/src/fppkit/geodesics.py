"""Passage times, geodesic DAGs, enumeration, and extremal-length geodesics.

The restricted geodesic time between two vertices of a finite region is
computed by Dijkstra over the region's edge graph (weights are nonnegative,
zero atoms included, so label setting is exact).  All geodesics between x
and y live on the admissible arcs (u -> v) with

    dist_x(u) + T(u,v) + dist_y(v) = t(x, y),

and every prefix of an optimal self-avoiding path is itself optimal, so a
depth-first traversal of admissible arcs with a visited set enumerates all
self-avoiding geodesics exactly once.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec
from .fields import WeightField
from .lattice import (
    Edge,
    LatticePath,
    Region,
    Vertex,
    direction_order,
    l1,
    region_boundary,
    region_edges,
    vscale,
)
from .rng import derive_seed

REL_TOL = 1e-9  # tightness tolerance for continuous weights (float summation order)
DEFAULT_PATH_CAP = 10_000
DEFAULT_NODE_BUDGET = 1_000_000


class RegionTooSmall(Exception):
    """The region cannot certify an unrestricted geodesic time."""


class Disconnected(Exception):
    """No path between the endpoints inside the region."""


class RegionGraph:
    """Indexed view of a region's vertices and edges for array algorithms."""

    def __init__(self, region: Region):
        self.region = region
        self.vertices: list[Vertex] = sorted(region.vertices())
        self.vindex: dict[Vertex, int] = {v: i for i, v in enumerate(self.vertices)}
        self.edges: list[Edge] = []
        adj: list[list[tuple[int, int]]] = [[] for _ in self.vertices]
        for e in region_edges(region):
            eid = len(self.edges)
            self.edges.append(e)
            i, j = self.vindex[e[0]], self.vindex[e[1]]
            adj[i].append((j, eid))
            adj[j].append((i, eid))
        # deterministic neighbor order: by direction order e1 < -e1 < e2 < ...
        dirs = direction_order(region.dim)
        for i, v in enumerate(self.vertices):
            rank = {}
            for nb, eid in adj[i]:
                step = tuple(b - a for a, b in zip(v, self.vertices[nb]))
                rank[(nb, eid)] = dirs.index(step)
            adj[i].sort(key=rank.__getitem__)
        self.adjacency = adj
        self.eindex: dict[Edge, int] = {e: k for k, e in enumerate(self.edges)}
        self._boundary: frozenset[int] | None = None

    @property
    def n(self) -> int:
        return len(self.vertices)

    def boundary_indices(self) -> frozenset[int]:
        if self._boundary is None:
            self._boundary = frozenset(self.vindex[v] for v in region_boundary(self.region))
        return self._boundary

    def weights_of(self, f: WeightField) -> np.ndarray:
        t = f.times
        return np.array([t[e] for e in self.edges], dtype=np.float64)

    def sample_weights(self, spec: DistributionSpec, seed: int) -> np.ndarray:
        """Array fast path; agrees edge-for-edge with fields.sample_field."""
        from .fields import edge_times_for

        return edge_times_for(self.edges, spec, seed)

    def field_from(self, w: np.ndarray, seed: int = -1, label: str = "") -> WeightField:
        return WeightField(self.region, dict(zip(self.edges, w.tolist())), seed, label)


def dijkstra(graph: RegionGraph, w: np.ndarray, source: int) -> np.ndarray:
    """Distance labels from a source index; unreachable stays +inf."""
    if np.any(w < 0):
        raise ValueError("negative weights are not supported")
    dist = np.full(graph.n, math.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    adj = graph.adjacency
    while heap:
        du, u = heapq.heappop(heap)
        if du > dist[u]:
            continue
        for v, eid in adj[u]:
            nd = du + w[eid]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


@dataclass
class GeodesicDag:
    """Distance labels plus the tight-arc structure from one source."""

    graph: RegionGraph
    weights: np.ndarray
    source: Vertex
    dist: np.ndarray

    @property
    def region(self) -> Region:
        return self.graph.region

    def dist_at(self, v: Vertex) -> float:
        return float(self.dist[self.graph.vindex[v]])

    def tight_edges(self) -> set[tuple[Vertex, Vertex]]:
        """Directed arcs (u, v) with dist(v) = dist(u) + T({u,v})."""
        g = self.graph
        out = set()
        for eid, (a, b) in enumerate(g.edges):
            i, j = g.vindex[a], g.vindex[b]
            for u, v in ((i, j), (j, i)):
                if math.isfinite(self.dist[u]) and _close(
                    self.dist[u] + self.weights[eid], self.dist[v]
                ):
                    out.add((g.vertices[u], g.vertices[v]))
        return out


@dataclass
class GeodesicSet:
    """All (or cap-limited) self-avoiding geodesics between two vertices."""

    x: Vertex
    y: Vertex
    time: float
    paths: list[LatticePath]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.paths)

    def to_csv(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write("path_id,length,time,directions\n")
            for i, p in enumerate(self.paths):
                fh.write(f"{i},{len(p)},{self.time:.12g},{p.directions()}\n")


@dataclass
class ExtremalLengths:
    lmin: int
    lmax: int
    witness_min: LatticePath
    witness_max: LatticePath
    exact: bool = True  # False when zero-weight cycles forced a budgeted search

    @property
    def gap(self) -> int:
        return self.lmax - self.lmin


@dataclass
class CertifiedTime:
    value: float
    certified: bool
    margin_required: float
    margin_available: float
    dag: GeodesicDag


@dataclass
class NormEstimate:
    """Monte Carlo estimate of the time constant per sampled direction."""

    per_direction: dict[Vertex, list[tuple[int, float, float]]]  # n, mean, half-CI
    c_mu: float
    C_mu: float
    trials: int

    def rate(self, direction: Vertex) -> float:
        rows = self.per_direction[tuple(direction)]
        n, mean, _ = rows[-1]
        return mean / l1(direction)

    def as_oracle(self, mode: str = "scaled_l1"):
        """Callable mu(y); 'scaled_l1' uses the mean direction rate."""
        if mode != "scaled_l1":
            raise ValueError("only the scaled_l1 oracle is implemented")
        rates = [self.rate(u) for u in self.per_direction]
        mean_rate = sum(rates) / len(rates)
        return lambda y: mean_rate * l1(y)


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= REL_TOL * max(1.0, abs(a), abs(b))


def _resolve(field: WeightField, region: Region | None, graph: RegionGraph | None):
    if graph is None:
        graph = RegionGraph(region if region is not None else field.region)
    w = graph.weights_of(field)
    return graph, w


def passage_time(path: LatticePath, f: WeightField) -> float:
    """Sum of the path's edge times; every edge must lie in the field."""
    try:
        return f.path_time(path)
    except KeyError as exc:
        raise KeyError(f"path edge {exc} outside the field") from None


def restricted_geodesic_time(
    x: Vertex,
    y: Vertex,
    f: WeightField,
    region: Region | None = None,
    graph: RegionGraph | None = None,
) -> tuple[float, GeodesicDag]:
    """Exact optimum over paths entirely inside the region, plus its DAG."""
    graph, w = _resolve(f, region, graph)
    if tuple(x) not in graph.vindex or tuple(y) not in graph.vindex:
        raise ValueError("endpoints must lie in the region")
    dist = dijkstra(graph, w, graph.vindex[tuple(x)])
    t = dist[graph.vindex[tuple(y)]]
    if not math.isfinite(t):
        raise Disconnected(f"{x} and {y} are disconnected inside the region")
    return float(t), GeodesicDag(graph, w, tuple(x), dist)


def geodesic_time(
    x: Vertex,
    y: Vertex,
    f: WeightField,
    region: Region | None = None,
    margin: float | None = None,
) -> CertifiedTime:
    """Restricted optimum with a certificate that the region is large enough.

    Certificate: any path leaving the region passes a boundary vertex b and
    costs at least rho_min * (|x-b|_1 + |b-y|_1).  With the default margin
    2 t / rho, every boundary detour costs at least twice the restricted
    optimum, so the restricted value equals the free-lattice value.
    """
    region = region if region is not None else f.region
    t, dag = restricted_geodesic_time(x, y, f, region)
    rho = f.min_time
    if margin is None:
        if rho <= 0:
            raise RegionTooSmall("zero weights present: supply an explicit margin")
        margin = 2.0 * t / rho
    boundary = region_boundary(region)
    available = min(l1(x, b) + l1(b, y) for b in boundary) if boundary else math.inf
    certified = available >= margin and rho * available > t
    if not certified:
        raise RegionTooSmall(
            f"region too small to certify t({x},{y}): boundary detour {available} "
            f"< required margin {margin:.6g}"
        )
    return CertifiedTime(t, True, margin, available, dag)


def _admissible_arcs(
    graph: RegionGraph, w: np.ndarray, dist_x: np.ndarray, dist_y: np.ndarray, t: float
) -> list[list[tuple[int, int]]]:
    """Per-vertex admissible out-arcs (ordered by direction order)."""
    out: list[list[tuple[int, int]]] = [[] for _ in range(graph.n)]
    for u in range(graph.n):
        if not math.isfinite(dist_x[u]):
            continue
        for v, eid in graph.adjacency[u]:
            if math.isfinite(dist_y[v]) and _close(dist_x[u] + w[eid] + dist_y[v], t):
                out[u].append((v, eid))
    return out


def _both_dags(x, y, f, region, graph):
    graph, w = _resolve(f, region, graph)
    xi, yi = graph.vindex[tuple(x)], graph.vindex[tuple(y)]
    dist_x = dijkstra(graph, w, xi)
    dist_y = dijkstra(graph, w, yi)
    t = dist_x[yi]
    if not math.isfinite(t):
        raise Disconnected(f"{x} and {y} are disconnected inside the region")
    return graph, w, xi, yi, dist_x, dist_y, float(t)


def enumerate_geodesics(
    x: Vertex,
    y: Vertex,
    f: WeightField,
    region: Region | None = None,
    cap: int = DEFAULT_PATH_CAP,
    node_budget: int = DEFAULT_NODE_BUDGET,
    graph: RegionGraph | None = None,
) -> GeodesicSet:
    """Depth-first extraction of all self-avoiding tight paths x -> y."""
    graph, w, xi, yi, dist_x, dist_y, t = _both_dags(x, y, f, region, graph)
    if xi == yi:
        return GeodesicSet(tuple(x), tuple(y), 0.0, [LatticePath([tuple(x)])], False)
    arcs = _admissible_arcs(graph, w, dist_x, dist_y, t)
    paths: list[LatticePath] = []
    truncated = False
    stack: list[int] = [xi]
    on_path = {xi}
    iters: list[int] = [0]
    expansions = 0
    while stack:
        u = stack[-1]
        if u == yi:
            paths.append(LatticePath(graph.vertices[i] for i in stack))
            if len(paths) >= cap:
                truncated = True
                break
            on_path.discard(stack.pop())
            iters.pop()
            continue
        advanced = False
        while iters[-1] < len(arcs[u]):
            v, _ = arcs[u][iters[-1]]
            iters[-1] += 1
            if v in on_path:
                continue
            expansions += 1
            stack.append(v)
            on_path.add(v)
            iters.append(0)
            advanced = True
            break
        if not advanced:
            on_path.discard(stack.pop())
            iters.pop()
        if expansions > node_budget:
            truncated = True
            break
    return GeodesicSet(tuple(x), tuple(y), t, paths, truncated)


def _min_edge_counts(
    graph: RegionGraph, w: np.ndarray, dist_y: np.ndarray, yi: int, t: float, dist_x: np.ndarray
) -> np.ndarray:
    """L(v) = min edges over tight-to-y continuations (BFS on tight arcs)."""
    tight_rev: list[list[int]] = [[] for _ in range(graph.n)]  # arcs u->v stored at v
    for u in range(graph.n):
        if not math.isfinite(dist_y[u]):
            continue
        for v, eid in graph.adjacency[u]:
            if math.isfinite(dist_y[v]) and _close(w[eid] + dist_y[v], dist_y[u]):
                tight_rev[v].append(u)
    counts = np.full(graph.n, -1, dtype=np.int64)
    counts[yi] = 0
    queue = [yi]
    while queue:
        nxt = []
        for v in queue:
            for u in tight_rev[v]:
                if counts[u] < 0:
                    counts[u] = counts[v] + 1
                    nxt.append(u)
        queue = nxt
    return counts


def first_lex_geodesic(
    x: Vertex,
    y: Vertex,
    f: WeightField,
    region: Region | None = None,
    graph: RegionGraph | None = None,
) -> LatticePath:
    """Among minimal-edge-count geodesics, the lexicographically first by
    direction word (order e1 < -e1 < e2 < -e2 < ...), built greedily."""
    graph, w, xi, yi, dist_x, dist_y, t = _both_dags(x, y, f, region, graph)
    counts = _min_edge_counts(graph, w, dist_y, yi, t, dist_x)
    if counts[xi] < 0:
        raise Disconnected("no tight continuation from x")
    verts = [xi]
    u = xi
    while u != yi:
        for v, eid in graph.adjacency[u]:  # already in direction order
            if (
                counts[v] == counts[u] - 1
                and _close(dist_x[u] + w[eid] + dist_y[v], t)
            ):
                verts.append(v)
                u = v
                break
        else:
            raise AssertionError("tight DAG invariant violated")
    return LatticePath(graph.vertices[i] for i in verts)


def _acyclic_longest(
    graph: RegionGraph, arcs: list[list[tuple[int, int]]], xi: int, yi: int
) -> tuple[int, list[int]] | None:
    """Longest x->y path in the admissible digraph if it is acyclic."""
    order: list[int] = []
    state = np.zeros(graph.n, dtype=np.int8)
    stack = [(xi, 0)]
    state[xi] = 1
    while stack:
        u, it = stack[-1]
        if it < len(arcs[u]):
            stack[-1] = (u, it + 1)
            v = arcs[u][it][0]
            if state[v] == 1:
                return None  # cycle (zero-weight loop)
            if state[v] == 0:
                state[v] = 1
                stack.append((v, 0))
        else:
            state[u] = 2
            order.append(u)
            stack.pop()
    best = {yi: 0}
    succ: dict[int, int] = {}
    for u in order:  # reverse topological: children finish before parents
        if u == yi:
            continue
        cand = None
        for v, _ in arcs[u]:
            if v in best and (cand is None or best[v] + 1 > cand):
                cand = best[v] + 1
                succ[u] = v
        if cand is not None:
            best[u] = cand
    if xi not in best:
        return None
    verts = [xi]
    while verts[-1] != yi:
        verts.append(succ[verts[-1]])
    return best[xi], verts


def extreme_length_geodesics(
    x: Vertex,
    y: Vertex,
    f: WeightField,
    region: Region | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    graph: RegionGraph | None = None,
) -> ExtremalLengths:
    """Minimal and maximal Euclidean length over self-avoiding geodesics.

    On a strictly positive field the admissible digraph is acyclic and both
    extremes are exact dynamic programs.  Zero-weight tight cycles switch
    the maximum to a budgeted self-avoiding search: if the budget runs out
    the reported maximum is a certified lower bound, flagged inexact.
    """
    graph, w, xi, yi, dist_x, dist_y, t = _both_dags(x, y, f, region, graph)
    arcs = _admissible_arcs(graph, w, dist_x, dist_y, t)
    counts = _min_edge_counts(graph, w, dist_y, yi, t, dist_x)
    wmin = first_lex_geodesic(x, y, f, graph=graph)
    lmin = int(counts[xi])
    acyclic = _acyclic_longest(graph, arcs, xi, yi)
    if acyclic is not None:
        lmax, verts = acyclic
        return ExtremalLengths(lmin, lmax, wmin, LatticePath(graph.vertices[i] for i in verts), True)
    # zero-weight cycles: exhaustive self-avoiding search under a budget
    best_len = -1
    best: list[int] = []
    expansions = 0
    exact = True
    stack = [xi]
    on_path = {xi}
    iters = [0]
    while stack:
        u = stack[-1]
        if u == yi:
            if len(stack) - 1 > best_len:
                best_len = len(stack) - 1
                best = list(stack)
            on_path.discard(stack.pop())
            iters.pop()
            continue
        advanced = False
        while iters[-1] < len(arcs[u]):
            v, _ = arcs[u][iters[-1]]
            iters[-1] += 1
            if v in on_path:
                continue
            expansions += 1
            stack.append(v)
            on_path.add(v)
            iters.append(0)
            advanced = True
            break
        if not advanced:
            on_path.discard(stack.pop())
            iters.pop()
        if expansions > node_budget:
            exact = False
            break
    wmax = LatticePath(graph.vertices[i] for i in best)
    return ExtremalLengths(lmin, best_len, wmin, wmax, exact)


def metric_ball(
    c: Vertex,
    t: float,
    f: WeightField,
    region: Region | None = None,
    graph: RegionGraph | None = None,
) -> tuple[frozenset[Vertex], bool]:
    """Sublevel set {u : t(c, u) <= t}; certified iff it avoids the boundary."""
    graph, w = _resolve(f, region, graph)
    dist = dijkstra(graph, w, graph.vindex[tuple(c)])
    ball = frozenset(
        graph.vertices[i] for i in range(graph.n) if dist[i] <= t + REL_TOL * max(1.0, t)
    )
    boundary = graph.boundary_indices()
    certified = all(graph.vindex[v] not in boundary for v in ball)
    return ball, certified


def estimate_time_constant(
    directions: list[Vertex] | Vertex,
    spec: DistributionSpec,
    n_list: list[int],
    trials: int,
    seed: int,
    pad_factor: float = 0.4,
) -> NormEstimate:
    """Monte Carlo t(0, n u)/n per direction and n, with normal-CI half-widths.

    Times are restricted to a box around the segment (pad ~ pad_factor * n),
    which upper-bounds the free value; the bias vanishes at desk scale for
    useful specs.
    """
    if isinstance(directions, tuple) and directions and isinstance(directions[0], int):
        directions = [directions]
    per_direction: dict[Vertex, list[tuple[int, float, float]]] = {}
    for direction in directions:
        direction = tuple(direction)
        d = len(direction)
        rows = []
        for n in n_list:
            target = vscale(n, direction)
            pad = max(4, int(pad_factor * l1(target)))
            lo = tuple(min(0, c) - pad for c in target)
            hi = tuple(max(0, c) + pad for c in target)
            from .lattice import ProductBox

            graph = RegionGraph(ProductBox(lo, hi))
            xi, yi = graph.vindex[(0,) * d], graph.vindex[target]
            vals = []
            for k in range(trials):
                w = graph.sample_weights(spec, derive_seed(seed, "mu", str(direction), n, k))
                vals.append(dijkstra(graph, w, xi)[yi] / n)
            arr = np.array(vals)
            half = 1.96 * arr.std(ddof=1) / math.sqrt(len(arr)) if len(arr) > 1 else 0.0
            rows.append((n, float(arr.mean()), float(half)))
        per_direction[direction] = rows
    rates = [rows[-1][1] / l1(u) for u, rows in per_direction.items()]
    return NormEstimate(per_direction, min(rates), max(rates), trials)


def exact_norm_oracle(a: float):
    """mu for the deterministic spec delta_a: mu(y) = a |y|_1."""
    return lambda y: a * l1(y)
