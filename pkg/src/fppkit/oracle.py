"""Exhaustive ground truth on small instances.

Three independent routes, deliberately different from the engine:
  * a lexicographic DFS stream of all self-avoiding paths,
  * branch-and-bound optimal-path search pruned only by rho * l1 distance,
  * Floyd-Warshall min-plus closure for all-pairs optimum values.
None of them shares code with the Dijkstra/DAG machinery they check.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .fields import WeightField
from .lattice import (
    LatticePath,
    Region,
    Vertex,
    box_containing,
    direction_order,
    l1,
    vadd,
    region_edges,
)

ADVISORY_EDGE_LIMIT = 60


class OracleBudgetExceeded(Exception):
    pass


@dataclass
class OracleResult:
    optimum: float
    paths: list[LatticePath]
    nodes_explored: int
    exhaustive: bool = True


def enumerate_sa_paths(
    x: Vertex, y: Vertex, region: Region, length_cap: int
) -> Iterator[LatticePath]:
    """Every self-avoiding x -> y path in the region with <= cap edges,
    exactly once, in lexicographic direction order."""
    x, y = tuple(x), tuple(y)
    dirs = direction_order(region.dim)
    stack = [x]
    seen = {x}
    choice = [0]
    if x == y:
        yield LatticePath([x])
        return
    while stack:
        u = stack[-1]
        advanced = False
        while choice[-1] < len(dirs):
            v = vadd(u, dirs[choice[-1]])
            choice[-1] += 1
            if v in seen or not region.contains(v):
                continue
            if len(stack) + 1 > length_cap + 1:
                continue
            if v == y:
                yield LatticePath(stack + [v])
                continue
            stack.append(v)
            seen.add(v)
            choice.append(0)
            advanced = True
            break
        if not advanced:
            seen.discard(stack.pop())
            choice.pop()


def recursive_sa_count(x: Vertex, y: Vertex, region: Region, length_cap: int) -> int:
    """Independent recursive count of the same path set (cross-check)."""

    def rec(u: Vertex, seen: frozenset[Vertex], left: int) -> int:
        if u == y:
            return 1
        if left == 0:
            return 0
        total = 0
        for axis in range(len(u)):
            for sign in (1, -1):
                v = list(u)
                v[axis] += sign
                v = tuple(v)
                if v not in seen and region.contains(v):
                    total += rec(v, seen | {v}, left - 1)
        return total

    x, y = tuple(x), tuple(y)
    return rec(x, frozenset([x]), length_cap)


def exact_optimal_set(
    x: Vertex,
    y: Vertex,
    region: Region,
    f: WeightField,
    time_budget: float = 60.0,
) -> OracleResult:
    """Exact optimum and the complete list of optimal self-avoiding paths.

    Branch and bound over the raw path tree; the only pruning is the
    admissible bound (partial cost + rho * remaining l1 distance), so the
    search never consults the engine under test.
    """
    x, y = tuple(x), tuple(y)
    rho = max(f.min_time, 0.0)
    dirs = direction_order(region.dim)
    times = f.times
    best = math.inf
    best_paths: list[tuple[Vertex, ...]] = []
    nodes = 0
    deadline = _time.monotonic() + time_budget
    tol = 1e-12

    def rec(u: Vertex, cost: float, seen: set[Vertex], trail: list[Vertex]):
        nonlocal best, best_paths, nodes
        nodes += 1
        if nodes % 4096 == 0 and _time.monotonic() > deadline:
            raise OracleBudgetExceeded(f"oracle exceeded {time_budget}s")
        if u == y:
            if not math.isfinite(best) or cost < best - tol * max(1.0, abs(best)):
                best = cost
                best_paths = [tuple(trail)]
            elif abs(cost - best) <= tol * max(1.0, abs(best)):
                best_paths.append(tuple(trail))
            return
        for step in dirs:
            v = vadd(u, step)
            if v in seen or not region.contains(v):
                continue
            e = (u, v) if u <= v else (v, u)
            c = cost + times[e]
            if c + rho * l1(v, y) > best + tol:
                continue
            seen.add(v)
            trail.append(v)
            rec(v, c, seen, trail)
            trail.pop()
            seen.discard(v)

    rec(x, 0.0, {x}, [x])
    if not best_paths:
        raise ValueError("endpoints disconnected in region")
    return OracleResult(best, [LatticePath(p) for p in best_paths], nodes)


def floyd_warshall_times(region: Region, f: WeightField) -> tuple[list[Vertex], np.ndarray]:
    """All-pairs optimum by min-plus closure (nonnegative weights, so the
    walk optimum equals the self-avoiding optimum)."""
    vertices = sorted(region.vertices())
    index = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    dist = np.full((n, n), math.inf)
    np.fill_diagonal(dist, 0.0)
    for e in region_edges(region):
        i, j = index[e[0]], index[e[1]]
        dist[i, j] = dist[j, i] = f.times[e]
    for k in range(n):
        dist = np.minimum(dist, dist[:, k : k + 1] + dist[k : k + 1, :])
    return vertices, dist


def oracle_pattern_count(path: LatticePath, pattern, f: WeightField) -> int:
    """N^P by the definition, scanning every translate in a working extent
    (the path's bounding box inflated past the pattern diameter)."""
    verts = list(pattern.region.vertices())
    dim = len(verts[0])
    diam = max(
        max(v[i] for v in verts) - min(v[i] for v in verts) for i in range(dim)
    )
    extent = box_containing(path.vertices, pad=diam + 2)
    count = 0
    pat_edges = list(pattern.event.constraints.items())
    for x0 in extent.vertices():
        # condition 1: the translated path visits both endpoints and the
        # subpath between them stays inside the translated pattern support
        shifted = [tuple(a - b for a, b in zip(v, x0)) for v in path.vertices]
        try:
            iu = shifted.index(pattern.u_end)
            iv = shifted.index(pattern.v_end)
        except ValueError:
            continue
        i, j = min(iu, iv), max(iu, iv)
        if not all(pattern.region.contains(v) for v in shifted[i : j + 1]):
            continue
        ok = True
        for (a, b), (lo, hi) in pat_edges:
            ea = vadd(a, x0)
            eb = vadd(b, x0)
            key = (ea, eb) if ea <= eb else (eb, ea)
            t = f.times.get(key)
            if t is None or not (lo - 1e-9 <= t <= hi + 1e-9):
                ok = False
                break
        if ok:
            count += 1
    return count


# Corner-to-corner self-avoiding path counts for the LxL grid graph
# (computed once with recursive_sa_count and frozen; matches OEIS A007764).
SA_GRID_PATH_COUNTS = {2: 2, 3: 12, 4: 184}
