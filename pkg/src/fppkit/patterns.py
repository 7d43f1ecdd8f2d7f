"""Local patterns: support box, two boundary endpoints, and an event on the
box's edge times.  A self-avoiding path takes the pattern at translate x
when the shifted path runs between the endpoints inside the box and the
shifted environment satisfies the event.

Besides the generic predicates (validity, occurrence counting, inner
optima), this module builds the concrete pattern families used in the
experiments, the cube enlargement for unbounded supports, and the oriented
(overlapping) pattern whose poles sit on opposite cube faces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distributions import DistributionSpec
from .fields import EdgeConstraintSet, WeightField, constraint_probability
from .geodesics import GeodesicSet, enumerate_geodesics
from .lattice import (
    Edge,
    LatticePath,
    LInfBall,
    ProductBox,
    Region,
    Vertex,
    canonical_edge,
    direction_order,
    l1,
    monotone_path,
    region_boundary,
    region_edges,
    straight_path,
    unit,
    vadd,
    vsub,
)


@dataclass(frozen=True)
class Pattern:
    """(support box, entry endpoint, exit endpoint, edge-time event)."""

    region: Region
    u_end: Vertex
    v_end: Vertex
    event: EdgeConstraintSet
    tag: str = ""

    def __post_init__(self):
        if self.u_end == self.v_end:
            raise ValueError("endpoints must be distinct")
        boundary = region_boundary(self.region)
        if self.u_end not in boundary or self.v_end not in boundary:
            raise ValueError("endpoints must lie on the support boundary")
        support = set(region_edges(self.region))
        bad = [e for e in self.event.constraints if e not in support]
        if bad:
            raise ValueError(f"event constrains edges outside the support: {bad[:3]}")

    @property
    def dim(self) -> int:
        return self.region.dim

    def vertex_count(self) -> int:
        return sum(1 for _ in self.region.vertices())

    def serialize(self) -> str:
        vs = list(self.region.vertices())
        lo = tuple(min(v[i] for v in vs) for i in range(self.dim))
        hi = tuple(max(v[i] for v in vs) for i in range(self.dim))
        cons = sorted((e, lo_, hi_) for e, (lo_, hi_) in self.event.constraints.items())
        return (
            f"dims={tuple(zip(lo, hi))!r}; u={self.u_end!r}; v={self.v_end!r}; "
            f"constraints={cons!r}"
        )


@dataclass(frozen=True)
class PatternHit:
    """A translate at which a path takes the pattern."""

    translate: Vertex
    entry_index: int  # index on the path of the first endpoint visit
    exit_index: int


@dataclass(frozen=True)
class PatternVerdict:
    valid: bool
    positive_probability: bool
    has_distinct_normals: bool
    unbounded_support: bool
    reason: str = ""


@dataclass(frozen=True)
class OrientedPattern:
    """Cube pattern with poles +-l0 e_j forcing inner optima through the
    embedded original pattern."""

    pattern: Pattern
    direction: int
    base: Pattern
    guide: LatticePath
    nu0: float
    l1_const: int
    l0: int
    delta_pp: float


def external_normals(z: Vertex, region: Region) -> set[Vertex]:
    """All +-e_i with z + e outside the region (z must be on the boundary)."""
    z = tuple(z)
    if z not in region_boundary(region):
        raise ValueError(f"{z} is not on the region boundary")
    return {step for step in direction_order(len(z)) if not region.contains(vadd(z, step))}


def has_distinct_normal_pair(p: Pattern) -> bool:
    nu = external_normals(p.u_end, p.region)
    nv = external_normals(p.v_end, p.region)
    return any(a != b for a in nu for b in nv)


def validate_pattern(p: Pattern, spec: DistributionSpec) -> PatternVerdict:
    """Valid iff the event has positive probability and (the support of the
    spec is unbounded, or the endpoints carry distinct external normals)."""
    prob = constraint_probability(spec, p.event)
    positive = prob > 0
    distinct = has_distinct_normal_pair(p)
    unbounded = not spec.is_bounded
    valid = positive and (unbounded or distinct)
    reason = []
    if not positive:
        reason.append("event has zero probability")
    if not (unbounded or distinct):
        reason.append("bounded support and endpoints share their only normal")
    return PatternVerdict(valid, positive, distinct, unbounded, "; ".join(reason))


def condition_holds(
    x: Vertex,
    path: LatticePath,
    p: Pattern,
    f: WeightField,
    require_order: bool = False,
) -> PatternHit | None:
    """The condition (path; pattern) at translate x.

    Both visit orders are accepted unless require_order is set (then the
    u-endpoint must be visited first).  The environment check reads the
    field at the translated edges: (theta_x T)(e) = T(e + x).
    """
    x = tuple(x)
    try:
        iu = path.index_of(vadd(p.u_end, x))
        iv = path.index_of(vadd(p.v_end, x))
    except ValueError:
        return None
    if require_order and iu > iv:
        return None
    i, j = min(iu, iv), max(iu, iv)
    for v in path.vertices[i : j + 1]:
        if not p.region.contains(vsub(v, x)):
            return None
    times = f.times
    for (a, b), (lo, hi) in p.event.constraints.items():
        ea, eb = vadd(a, x), vadd(b, x)
        key = (ea, eb) if ea <= eb else (eb, ea)
        t = times.get(key)
        if t is None or not (lo - 1e-9 <= t <= hi + 1e-9):
            return None
    return PatternHit(x, i, j)


def pattern_hits(
    path: LatticePath, p: Pattern, f: WeightField, require_order: bool = False
) -> list[PatternHit]:
    """All hits, in path order of the entry index (scan is restricted to
    translates that put an endpoint on the path, so it is O(|path|))."""
    candidates = {vsub(v, p.u_end) for v in path.vertices}
    hits = []
    for x in candidates:
        hit = condition_holds(x, path, p, f, require_order)
        if hit is not None:
            hits.append(hit)
    hits.sort(key=lambda h: (h.entry_index, h.translate))
    return hits


def count_occurrences(
    path: LatticePath, p: Pattern, f: WeightField, require_order: bool = False
) -> int:
    """N^P(path): number of translates satisfying the condition."""
    return len(pattern_hits(path, p, f, require_order))


def count_disjoint_occurrences(
    path: LatticePath, p: Pattern, f: WeightField, require_order: bool = False
) -> int:
    """Greedy count of vertex-disjoint hits along path order.

    Greedy acceptance (skip any hit whose translated support shares a
    vertex with an accepted one) keeps at least N / prod(2 L_i + 1) hits,
    since an accepted support can only block translates within its own
    footprint in each coordinate.
    """
    hits = pattern_hits(path, p, f, require_order)
    support = list(p.region.vertices())
    taken: list[set[Vertex]] = []
    kept = 0
    for h in hits:
        cells = {vadd(v, h.translate) for v in support}
        if any(cells & prev for prev in taken):
            continue
        taken.append(cells)
        kept += 1
    return kept


def inner_optimal_paths(p: Pattern, f: WeightField, cap: int = 10_000) -> GeodesicSet:
    """All optimal u -> v paths inside the support (the event must hold)."""
    if not p.event.satisfied_by(f):
        raise ValueError("field does not satisfy the pattern event")
    return enumerate_geodesics(p.u_end, p.v_end, f, region=p.region, cap=cap)


# ---------------------------------------------------------------------------
# Concrete constructions


def _constrain_all(
    region: Region, special: dict[Edge, tuple[float, float]], default: tuple[float, float]
) -> EdgeConstraintSet:
    cons = {}
    for e in region_edges(region):
        cons[e] = special.get(e, default)
    return EdgeConstraintSet(cons)


def obstruction_pattern() -> Pattern:
    """The d=2 obstruction example: 2 x 4 box, endpoints (0,2), (0,1) on the
    same face, edges adjacent to an endpoint at 4, every other edge at 1."""
    region = ProductBox((0, 0), (1, 3))
    u, v = (0, 2), (0, 1)
    special: dict[Edge, tuple[float, float]] = {}
    for e in region_edges(region):
        if u in e or v in e:
            special[e] = (4.0, 4.0)
    return Pattern(region, u, v, _constrain_all(region, special, (1.0, 1.0)), "obstruction")


def atom_square_pattern(kappa: float, d: int = 2) -> Pattern:
    """Unit square (times the zero box in extra coordinates) with every edge
    pinned to the atom kappa; two optimal corner-to-corner paths."""
    lo = (0,) * d
    hi = (1, 1) + (0,) * (d - 2)
    region = ProductBox(lo, hi)
    u = lo
    v = (1, 1) + (0,) * (d - 2)
    return Pattern(region, u, v, _constrain_all(region, {}, (kappa, kappa)), "atom-square")


def heavy_edge_pattern(M: float, d: int = 2) -> Pattern:
    """Single-edge pattern whose event is a passage time >= M."""
    region = ProductBox((0,) * d, (1,) + (0,) * (d - 1))
    u = (0,) * d
    v = (1,) + (0,) * (d - 1)
    return Pattern(region, u, v, _constrain_all(region, {}, (M, math.inf)), "heavy-edge")


def _two_route_paths(u: Vertex, k: int, l: int, d: int) -> tuple[LatticePath, LatticePath]:
    """pi+ straight (k steps e1) and pi++ around (l up, k right, l down)."""
    plus = straight_path(u, 0, 1, k)
    pp = straight_path(u, 1, 1, l)
    pp = pp.concat(straight_path(pp.end, 0, 1, k))
    pp = pp.concat(straight_path(pp.end, 1, -1, l))
    return plus, pp


def two_route_pattern_zero_atom(k: int, l: int, spec: DistributionSpec, d: int = 2) -> Pattern:
    """Equal-length-competitor pattern when 0 is an atom: zero times on the
    two routes, strictly positive walls elsewhere."""
    if spec.mass_at(0.0) <= 0:
        raise ValueError("spec needs an atom at zero")
    hi = (k + 2, l + 2) + (2,) * (d - 2)
    region = ProductBox((0,) * d, hi)
    u = tuple(1 if i >= 1 else 0 for i in range(d))
    v = vadd(u, unit(d, 0, k + 2))
    plus = straight_path(u, 0, 1, k + 2)
    pp = straight_path(u, 0, 1, 1)
    pp = pp.concat(straight_path(pp.end, 1, 1, l))
    pp = pp.concat(straight_path(pp.end, 0, 1, k))
    pp = pp.concat(straight_path(pp.end, 1, -1, l))
    pp = pp.concat(straight_path(pp.end, 0, 1, 1))
    special = {e: (0.0, 0.0) for e in set(plus.edges()) | set(pp.edges())}
    wall_lo = spec.low_representative(1e-9, math.inf)
    pat = Pattern(
        region, u, v, _constrain_all(region, special, (wall_lo, math.inf)), "two-route-zero"
    )
    object.__setattr__(pat, "_routes", (plus, pp))
    return pat


def two_route_pattern_unbounded(
    k: int, l: int, r_atoms: list[float], s_atoms: list[float], M: float, d: int = 2
) -> Pattern:
    """Two equal-time routes with prescribed atoms and walls above M."""
    if len(r_atoms) != k + 2 * l or len(s_atoms) != k:
        raise ValueError("need k+2l r-atoms and k s-atoms")
    if abs(sum(r_atoms) - sum(s_atoms)) > 1e-12:
        raise ValueError("atom sums differ: sum r' != sum s'")
    if M <= sum(s_atoms):
        raise ValueError("walls must exceed the route time: M > sum s'")
    hi = (k, l) + (0,) * (d - 2)
    region = ProductBox((0,) * d, hi)
    u = (0,) * d
    v = vadd(u, unit(d, 0, k))
    plus, pp = _two_route_paths(u, k, l, d)
    special: dict[Edge, tuple[float, float]] = {}
    for val, (a, b) in zip(s_atoms, zip(plus.vertices, plus.vertices[1:])):
        special[canonical_edge(a, b)] = (val, val)
    for val, (a, b) in zip(r_atoms, zip(pp.vertices, pp.vertices[1:])):
        special[canonical_edge(a, b)] = (val, val)
    pat = Pattern(region, u, v, _constrain_all(region, special, (M, math.inf)), "two-route-unbounded")
    object.__setattr__(pat, "_routes", (plus, pp))
    return pat


def two_route_pattern_bounded(
    k: int, l: int, r_atoms: list[float], s_atoms: list[float], d: int = 2
) -> Pattern:
    """Bounded-support variant: the rectangle is scaled by the integer
    alpha > max(k/(2l), k a_max / (l t_w)) and the atoms repeat cyclically
    along each side; all other support edges sit at a_max."""
    if len(r_atoms) != k + 2 * l or len(s_atoms) != k:
        raise ValueError("need k+2l r-atoms and k s-atoms")
    if abs(sum(r_atoms) - sum(s_atoms)) > 1e-12:
        raise ValueError("atom sums differ: sum r' != sum s'")
    a_max = max(r_atoms + s_atoms)
    if sum(1 for v in r_atoms if v < a_max) < 2 * l:
        raise ValueError("the atom-sum identity forces at least 2l r-atoms below a_max")
    # reindex so r'_1..r'_{2l} are all < a_max
    order = [i for i in range(len(r_atoms)) if r_atoms[i] < a_max]
    order += [i for i in range(len(r_atoms)) if r_atoms[i] >= a_max]
    r_sorted = [r_atoms[i] for i in order]
    t_w = a_max - max(r_sorted[: 2 * l])
    alpha = int(max(k / (2 * l), k * a_max / (l * t_w))) + 1
    kp, lp = alpha * k, alpha * l
    hi = (kp, lp) + (0,) * (d - 2)
    region = ProductBox((0,) * d, hi)
    u = (0,) * d
    v = vadd(u, unit(d, 0, kp))
    plus, pp = _two_route_paths(u, kp, lp, d)
    e1 = plus.edges()  # already in path order (monotone)
    up_leg = [(pp.vertices[i], pp.vertices[i + 1]) for i in range(lp)]
    top_leg = [(pp.vertices[lp + i], pp.vertices[lp + i + 1]) for i in range(kp)]
    down_leg = [(pp.vertices[lp + kp + i], pp.vertices[lp + kp + i + 1]) for i in range(lp)]
    special: dict[Edge, tuple[float, float]] = {}
    for i, e in enumerate(e1, start=1):
        val = s_atoms[(i - 1) % k]
        special[e] = (val, val)
    for i, (a, b) in enumerate(top_leg, start=1):
        val = r_sorted[2 * l + (i - 1) % k]
        special[canonical_edge(a, b)] = (val, val)
    for i, (a, b) in enumerate(up_leg, start=1):
        val = r_sorted[(i - 1) % l]
        special[canonical_edge(a, b)] = (val, val)
    for i, (a, b) in enumerate(down_leg, start=1):
        val = r_sorted[l + (i - 1) % l]
        special[canonical_edge(a, b)] = (val, val)
    pat = Pattern(region, u, v, _constrain_all(region, special, (a_max, a_max)), "two-route-bounded")
    object.__setattr__(pat, "_routes", (plus, pp))
    object.__setattr__(pat, "_alpha", alpha)
    return pat


def shift_concavity_pattern(k: int, l: int, r: float, s: float, delta: float, d: int = 2) -> Pattern:
    """Shift-concavity pattern: inner block at r +- delta on the detour, the
    rest of the support at s +- delta; requires k(s+d) < (k+2l)(r-d)."""
    if not k * (s + delta) < (k + 2 * l) * (r - delta):
        raise ValueError("inequality k(s+delta) < (k+2l)(r-delta) fails")
    L = k + l + 1
    hi = (k + 2 * L, l + 2 * L) + (2 * L,) * (d - 2)
    region = ProductBox((0,) * d, hi)
    u = tuple(0 if i == 0 else L for i in range(d))
    v = vadd(u, unit(d, 0, k + 2 * L))
    inner = ProductBox((L,) * d, (k + L, l + L) + (L,) * (d - 2))
    plus = straight_path(u, 0, 1, k + 2 * L)
    pp = straight_path(u, 0, 1, L)
    pp = pp.concat(straight_path(pp.end, 1, 1, l))
    pp = pp.concat(straight_path(pp.end, 0, 1, k))
    pp = pp.concat(straight_path(pp.end, 1, -1, l))
    pp = pp.concat(straight_path(pp.end, 0, 1, L))
    special: dict[Edge, tuple[float, float]] = {}
    for e in pp.edges():
        if inner.contains(e[0]) and inner.contains(e[1]):
            special[e] = (r - delta, r + delta)
    pat = Pattern(
        region, u, v, _constrain_all(region, special, (s - delta, s + delta)), "shift-concavity"
    )
    object.__setattr__(pat, "_routes", (plus, pp))
    object.__setattr__(pat, "_inner", inner)
    return pat


def shift_concavity_properties(p: Pattern, f: WeightField, cap: int = 4096) -> tuple[bool, bool]:
    """(P1, P2) for a shift-concavity sample.

    P1: the straight route is the unique inner-optimal path.
    P2: for every inner-block boundary vertex w1, the dearest l1-optimal
        path from w1 into the block still costs less than the cheapest
        path from w1 out to the support boundary.
    """
    plus, _ = p._routes  # type: ignore[attr-defined]
    inner: ProductBox = p._inner  # type: ignore[attr-defined]
    opt = enumerate_geodesics(p.u_end, p.v_end, f, region=p.region, cap=cap)
    p1 = (not opt.truncated) and len(opt.paths) == 1 and opt.paths[0] == plus

    from .geodesics import RegionGraph, dijkstra

    graph = RegionGraph(p.region)
    w = graph.weights_of(f)
    outer = [graph.vindex[v] for v in region_boundary(p.region)]
    p2 = True
    for w1 in region_boundary(inner):
        # max over monotone (= l1-optimal, they stay in the block's hull)
        # paths from w1 to any block vertex
        best: dict[Vertex, float] = {w1: 0.0}
        frontier = [w1]
        worst_inner = 0.0
        while frontier:
            nxt = []
            for w0 in frontier:
                for axis in range(p.dim):
                    for sign in (1, -1):
                        z = vadd(w0, unit(p.dim, axis, sign))
                        if not inner.contains(z) or l1(z, w1) != l1(w0, w1) + 1:
                            continue
                        c = best[w0] + f.times[canonical_edge(w0, z)]
                        if c > best.get(z, -math.inf):
                            best[z] = c
                            nxt.append(z)
            frontier = nxt
        worst_inner = max(best.values())
        dist = dijkstra(graph, w, graph.vindex[w1])
        exit_cost = min(dist[i] for i in outer)
        if not worst_inner < exit_cost:
            p2 = False
            break
    return p1, p2


def shift_concavity_search_delta(
    k: int,
    l: int,
    r: float,
    s: float,
    spec: DistributionSpec,
    seed: int,
    delta0: float = 0.25,
    probes: int = 5,
    d: int = 2,
) -> tuple[Pattern, float]:
    """Shrink delta (halving) until the defining inequality holds and probe
    G(delta)-samples satisfy P1 and P2."""
    from .fields import sample_conditioned

    delta = delta0
    for _ in range(20):
        try:
            pat = shift_concavity_pattern(k, l, r, s, delta, d)
        except ValueError:
            delta /= 2
            continue
        if spec.mass_in(r - delta, r + delta) <= 0 or spec.mass_in(s - delta, s + delta) <= 0:
            raise ValueError("spec has no mass near r or s")
        ok = True
        for i in range(probes):
            f = sample_conditioned(pat.region, spec, pat.event, seed + i)
            p1, p2 = shift_concavity_properties(pat, f)
            if not (p1 and p2):
                ok = False
                break
        if ok:
            return pat, delta
        delta /= 2
    raise ValueError("no delta small enough found")


# ---------------------------------------------------------------------------
# Pattern transforms


def enlarge_to_cube(p: Pattern, m_cap: float) -> Pattern:
    """Embed a valid pattern into a centered cube pattern (unbounded spec).

    The cube has half-width max(L_i); straight connectors leave each
    endpoint along its smallest-index external normal, connector and
    original edges are capped at m_cap, and every other cube edge carries
    a wall above |cube|_e * m_cap, so any inner-optimal path between the
    cube poles must traverse the original pattern.
    """
    vs = list(p.region.vertices())
    lam = max(max(abs(v[i]) for v in vs) for i in range(p.dim))
    cube = LInfBall((0,) * p.dim, lam)
    if not all(cube.contains(v) for v in vs):
        raise ValueError("pattern support does not fit the centered cube")

    def connector(z: Vertex) -> LatticePath:
        for step in direction_order(p.dim):
            if not p.region.contains(vadd(z, step)):
                axis = [i for i, c in enumerate(step) if c][0]
                sign = step[axis]
                steps = lam - sign * z[axis] if sign > 0 else lam + z[axis]
                return straight_path(z, axis, sign, steps)
        raise AssertionError("endpoint has no external normal")

    pu = connector(p.u_end)
    pv = connector(p.v_end)
    if set(pu.vertices) & set(pv.vertices):
        raise AssertionError("connectors intersect")
    cube_edges = region_edges(cube)
    wall = len(cube_edges) * m_cap
    cons: dict[Edge, tuple[float, float]] = {}
    kept = set(region_edges(p.region)) | set(pu.edges()) | set(pv.edges())
    for e in cube_edges:
        if e not in kept:
            cons[e] = (wall + 1.0, math.inf)
    for e in pu.edges() + pv.edges():
        cons[e] = (0.0, m_cap)
    for e, (lo, hi) in p.event.constraints.items():
        if lo > m_cap:
            raise ValueError(f"m_cap={m_cap} lies below the event floor {lo} on {e}")
        cons[e] = (lo, min(hi, m_cap))
    for e in region_edges(p.region):
        if e not in cons:
            cons[e] = (0.0, m_cap)
    out = Pattern(cube, pu.end, pv.end, EdgeConstraintSet(cons), p.tag + "+cube")
    object.__setattr__(out, "_base", p)
    object.__setattr__(out, "_connectors", (pu, pv))
    return out


def orient_pattern(
    p: Pattern,
    j: int,
    spec: DistributionSpec,
    nu: float,
    nu0: float,
    delta_p: float,
) -> OrientedPattern:
    """Build the overlapping pattern with poles -l0 e_j, +l0 e_j.

    A guiding path runs pole -> face -> descents -> the original pattern
    -> back out to the other pole; its outside-support edges are cheap
    (<= rho + delta''), support edges follow the original event capped at
    nu0, and every other cube edge lies in [nu0, nu].  The constants l1,
    l0, delta'' are the minimal values compatible with the three defining
    inequalities.
    """
    d = p.dim
    rho = spec.rho
    if not (rho < nu0 <= nu <= spec.t_max):
        raise ValueError("need rho < nu0 <= nu <= t_max")
    if spec.mass_in(nu0, nu) <= 0:
        raise ValueError("no admissible nu0: zero mass on [nu0, nu]")
    if nu0 - rho - 2 * delta_p <= 0:
        raise ValueError("delta' too large: need delta' < (nu0 - rho)/2")
    vs = list(p.region.vertices())
    lam = max(max(abs(v[i]) for v in vs) for i in range(d))
    l1c = math.floor(4 * d * lam * (nu0 - rho - delta_p / 2) / (nu0 - rho - delta_p)) + 1
    l0 = (
        math.floor(
            (
                lam * ((2 * d + 1) * nu0 + (2 * d - 1) * rho + 2 * d * delta_p)
                + l1c * (nu0 + 3 * rho + 4 * delta_p)
            )
            / (nu0 - rho - 2 * delta_p)
        )
        + 1
    )
    ddp = min(delta_p, (nu0 - rho) / (2 * d * l0)) / 2
    if spec.mass_in(0.0, rho + ddp) <= 0:
        raise ValueError("no mass near the support minimum")

    # distinct external normals for the two endpoints (lexicographic pair)
    nu_set = sorted(external_normals(p.u_end, p.region), key=direction_order(d).index)
    nv_set = sorted(external_normals(p.v_end, p.region), key=direction_order(d).index)
    pair = next(
        ((a, b) for a in nu_set for b in nv_set if a != b),
        None,
    )
    if pair is None:
        raise ValueError("endpoints lack distinct external normals")
    alpha_u, alpha_v = pair
    u3, v3 = p.u_end, p.v_end
    u2 = vadd(u3, tuple(l1c * c for c in alpha_u))
    v2 = vadd(v3, tuple(l1c * c for c in alpha_v))
    if u2[j] < v2[j]:
        u3, v3 = v3, u3
        alpha_u, alpha_v = alpha_v, alpha_u
        u2, v2 = v2, u2
    u1 = vadd(u2, unit(d, j, l0 - u2[j]))
    v1 = vadd(v2, unit(d, j, -(l0 + v2[j])))

    top = vadd((0,) * d, unit(d, j, l0))
    bottom = vadd((0,) * d, unit(d, j, -l0))
    guide = monotone_path(top, u1)
    guide = guide.concat(monotone_path(u1, u2))
    guide = guide.concat(monotone_path(u2, u3))
    guide = guide.concat(monotone_path(u3, v3))
    guide = guide.concat(monotone_path(v3, v2))
    guide = guide.concat(monotone_path(v2, v1))
    guide = guide.concat(monotone_path(v1, bottom))
    if not guide.is_self_avoiding():
        raise AssertionError("guiding path is not self-avoiding")

    cube = LInfBall((0,) * d, l0)
    support_edges = set(region_edges(p.region))
    guide_edges = set(guide.edges())
    cons: dict[Edge, tuple[float, float]] = {}
    for e in region_edges(cube):
        if e in support_edges:
            lo_, hi_ = p.event.constraints.get(e, (0.0, math.inf))
            cons[e] = (lo_, min(hi_, nu0))
        elif e in guide_edges:
            cons[e] = (0.0, rho + ddp)
        else:
            cons[e] = (nu0, nu)
    pat = Pattern(cube, top, bottom, EdgeConstraintSet(cons), p.tag + f"+oriented{j + 1}")
    return OrientedPattern(pat, j, p, guide, nu0, l1c, l0, ddp)
