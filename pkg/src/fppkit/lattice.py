"""Z^d geometry: vertices, edges, paths, regions, translations.

Vertices are plain integer tuples and an edge is the canonically ordered
pair of its endpoints (lexicographically smaller endpoint first), so both
can be used as dict keys and compare deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .rng import COORD_BOUND

Vertex = tuple[int, ...]
Edge = tuple[Vertex, Vertex]


def check_extent(v: Vertex) -> Vertex:
    if any(abs(c) >= COORD_BOUND for c in v):
        raise OverflowError(f"vertex {v} outside the supported working extent")
    return v


def vadd(u: Vertex, v: Vertex) -> Vertex:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Vertex, v: Vertex) -> Vertex:
    return tuple(a - b for a, b in zip(u, v))


def vneg(u: Vertex) -> Vertex:
    return tuple(-a for a in u)


def vscale(k: int, u: Vertex) -> Vertex:
    return tuple(k * a for a in u)


def l1(u: Vertex, v: Vertex | None = None) -> int:
    if v is None:
        return sum(abs(a) for a in u)
    return sum(abs(a - b) for a, b in zip(u, v))


def linf(u: Vertex, v: Vertex | None = None) -> int:
    if v is None:
        return max(abs(a) for a in u)
    return max(abs(a - b) for a, b in zip(u, v))


def unit(d: int, axis: int, sign: int = 1) -> Vertex:
    return tuple(sign if i == axis else 0 for i in range(d))


def direction_order(d: int) -> list[Vertex]:
    """The fixed direction order e1 < -e1 < e2 < -e2 < ... used for ties."""
    out: list[Vertex] = []
    for axis in range(d):
        out.append(unit(d, axis, +1))
        out.append(unit(d, axis, -1))
    return out


def neighbors(v: Vertex) -> list[Vertex]:
    out = []
    for axis in range(len(v)):
        for sign in (+1, -1):
            w = list(v)
            w[axis] += sign
            out.append(tuple(w))
    return out


def canonical_edge(u: Vertex, v: Vertex) -> Edge:
    if l1(u, v) != 1:
        raise ValueError(f"{u} and {v} are not lattice neighbors")
    return (u, v) if u <= v else (v, u)


def edge_axis(e: Edge) -> int:
    u, v = e
    for i, (a, b) in enumerate(zip(u, v)):
        if a != b:
            return i
    raise ValueError("degenerate edge")


def translate_edge(e: Edge, x: Vertex) -> Edge:
    return canonical_edge(vsub(e[0], x), vsub(e[1], x))


class LatticePath:
    """A finite sequence of adjacent vertices; |path| counts edges."""

    __slots__ = ("vertices",)

    def __init__(self, vertices: Iterable[Vertex]):
        vs = tuple(tuple(v) for v in vertices)
        if not vs:
            raise ValueError("a path needs at least one vertex")
        for a, b in zip(vs, vs[1:]):
            if l1(a, b) != 1:
                raise ValueError(f"non-adjacent consecutive vertices {a}, {b}")
        self.vertices = vs

    def __len__(self) -> int:
        return len(self.vertices) - 1

    def __iter__(self) -> Iterator[Vertex]:
        return iter(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticePath) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        return f"LatticePath({list(self.vertices)!r})"

    @property
    def start(self) -> Vertex:
        return self.vertices[0]

    @property
    def end(self) -> Vertex:
        return self.vertices[-1]

    def edges(self) -> list[Edge]:
        return [canonical_edge(a, b) for a, b in zip(self.vertices, self.vertices[1:])]

    def is_self_avoiding(self) -> bool:
        return len(set(self.vertices)) == len(self.vertices)

    def index_of(self, v: Vertex) -> int:
        return self.vertices.index(tuple(v))

    def subpath(self, a: Vertex, b: Vertex) -> "LatticePath":
        """Contiguous segment from a to b; a must be visited before b."""
        a, b = tuple(a), tuple(b)
        try:
            i = self.vertices.index(a)
        except ValueError:
            raise ValueError(f"{a} is not on the path") from None
        try:
            j = self.vertices.index(b, i)
        except ValueError:
            if b in self.vertices:
                raise ValueError(f"{b} is visited before {a}") from None
            raise ValueError(f"{b} is not on the path") from None
        return LatticePath(self.vertices[i : j + 1])

    def translate(self, x: Vertex) -> "LatticePath":
        return LatticePath(vsub(v, x) for v in self.vertices)

    def reversed(self) -> "LatticePath":
        return LatticePath(self.vertices[::-1])

    def concat(self, other: "LatticePath") -> "LatticePath":
        if self.end != other.start:
            raise ValueError("paths do not share an endpoint")
        return LatticePath(self.vertices + other.vertices[1:])

    def directions(self) -> str:
        """Serialize as signed axis indices, e.g. '+1,+1,-2'."""
        parts = []
        for a, b in zip(self.vertices, self.vertices[1:]):
            axis = edge_axis(canonical_edge(a, b))
            sign = "+" if b[axis] > a[axis] else "-"
            parts.append(f"{sign}{axis + 1}")
        return ",".join(parts)

    @staticmethod
    def from_directions(start: Vertex, text: str) -> "LatticePath":
        vs = [tuple(start)]
        if text:
            for token in text.split(","):
                axis = int(token[1:]) - 1
                sign = 1 if token[0] == "+" else -1
                vs.append(vadd(vs[-1], unit(len(start), axis, sign)))
        return LatticePath(vs)


def straight_path(start: Vertex, axis: int, sign: int, steps: int) -> LatticePath:
    d = len(start)
    return LatticePath(vadd(start, unit(d, axis, sign * k)) for k in range(steps + 1))


def monotone_path(a: Vertex, b: Vertex) -> LatticePath:
    """The l1-shortest a->b path that sweeps coordinates in index order."""
    vs = [tuple(a)]
    cur = list(a)
    for i in range(len(a)):
        step = 1 if b[i] > a[i] else -1
        while cur[i] != b[i]:
            cur[i] += step
            vs.append(tuple(cur))
    return LatticePath(vs)


def cut_loops(path: LatticePath) -> LatticePath:
    """Self-avoiding path with the same endpoints, splicing out each loop
    at the first occurrence of the revisited vertex, scanning left to right."""
    out: list[Vertex] = []
    seen: dict[Vertex, int] = {}
    for v in path.vertices:
        if v in seen:
            i = seen[v]
            for w in out[i + 1 :]:
                del seen[w]
            del out[i + 1 :]
        else:
            seen[v] = len(out)
            out.append(v)
    return LatticePath(out)


# ---------------------------------------------------------------------------
# Regions


@dataclass(frozen=True)
class Region:
    """Finite vertex set on Z^d; edges are pairs with both endpoints inside."""

    def contains(self, v: Vertex) -> bool:  # pragma: no cover - abstract
        raise NotImplementedError

    def vertices(self) -> Iterator[Vertex]:  # pragma: no cover - abstract
        raise NotImplementedError

    def contains_path(self, path: LatticePath) -> bool:
        return all(self.contains(v) for v in path)

    def contains_edge(self, e: Edge) -> bool:
        return self.contains(e[0]) and self.contains(e[1])


def _box_vertices(lo: Vertex, hi: Vertex) -> Iterator[Vertex]:
    d = len(lo)
    cur = list(lo)
    while True:
        yield tuple(cur)
        i = d - 1
        while i >= 0:
            cur[i] += 1
            if cur[i] <= hi[i]:
                break
            cur[i] = lo[i]
            i -= 1
        if i < 0:
            return


@dataclass(frozen=True)
class ProductBox(Region):
    lo: Vertex
    hi: Vertex

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("empty or mismatched box")
        check_extent(self.lo), check_extent(self.hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, v: Vertex) -> bool:
        return len(v) == self.dim and all(a <= c <= b for a, c, b in zip(self.lo, v, self.hi))

    def vertices(self) -> Iterator[Vertex]:
        return _box_vertices(self.lo, self.hi)


@dataclass(frozen=True)
class L1Ball(Region):
    center: Vertex
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("negative radius")
        check_extent(self.center)

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains(self, v: Vertex) -> bool:
        return len(v) == self.dim and l1(v, self.center) <= self.radius

    def vertices(self) -> Iterator[Vertex]:
        lo = tuple(c - self.radius for c in self.center)
        hi = tuple(c + self.radius for c in self.center)
        return (v for v in _box_vertices(lo, hi) if l1(v, self.center) <= self.radius)


@dataclass(frozen=True)
class LInfBall(Region):
    center: Vertex
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("negative radius")
        check_extent(self.center)

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains(self, v: Vertex) -> bool:
        return len(v) == self.dim and linf(v, self.center) <= self.radius

    def vertices(self) -> Iterator[Vertex]:
        lo = tuple(c - self.radius for c in self.center)
        hi = tuple(c + self.radius for c in self.center)
        return _box_vertices(lo, hi)


@dataclass(frozen=True)
class Annulus(Region):
    """l1 shell around the origin: ||y||_1 in [(i-1)rN, i*rN)."""

    index: int
    r: int
    N: int
    dim_: int

    def __post_init__(self):
        if self.index < 1 or self.r < 1 or self.N < 1:
            raise ValueError("annulus parameters must be positive")

    @property
    def dim(self) -> int:
        return self.dim_

    @property
    def inner_norm(self) -> int:
        return (self.index - 1) * self.r * self.N

    @property
    def outer_norm(self) -> int:
        return self.index * self.r * self.N

    def contains(self, v: Vertex) -> bool:
        return len(v) == self.dim and self.inner_norm <= l1(v) < self.outer_norm

    def vertices(self) -> Iterator[Vertex]:
        rad = self.outer_norm - 1
        lo = tuple(-rad for _ in range(self.dim))
        hi = tuple(rad for _ in range(self.dim))
        return (v for v in _box_vertices(lo, hi) if self.contains(v))


def translate(obj, x: Vertex):
    """theta_x: subtract x componentwise (paths, edges, vertices, regions)."""
    if isinstance(obj, LatticePath):
        return obj.translate(x)
    if isinstance(obj, ProductBox):
        return ProductBox(vsub(obj.lo, x), vsub(obj.hi, x))
    if isinstance(obj, L1Ball):
        return L1Ball(vsub(obj.center, x), obj.radius)
    if isinstance(obj, LInfBall):
        return LInfBall(vsub(obj.center, x), obj.radius)
    if isinstance(obj, tuple) and obj and isinstance(obj[0], tuple):
        return translate_edge(obj, x)  # an edge
    if isinstance(obj, tuple):
        return vsub(obj, x)  # a vertex
    raise TypeError(f"cannot translate {type(obj).__name__}")


def region_boundary(region: Region) -> set[Vertex]:
    """Vertices of the region with at least one neighbor outside it."""
    return {
        v
        for v in region.vertices()
        if any(not region.contains(w) for w in neighbors(v))
    }


def region_edges(region: Region) -> list[Edge]:
    """Edges with both endpoints in the region, in deterministic order."""
    out = []
    for v in region.vertices():
        for axis in range(len(v)):
            w = list(v)
            w[axis] += 1
            w = tuple(w)
            if region.contains(w):
                out.append((v, w))
    out.sort()
    return out


def box_containing(vertices: Iterable[Vertex], pad: int = 0) -> ProductBox:
    vs = list(vertices)
    d = len(vs[0])
    lo = tuple(min(v[i] for v in vs) - pad for i in range(d))
    hi = tuple(max(v[i] for v in vs) + pad for i in range(d))
    return ProductBox(lo, hi)
