"""Scale-N boxes, typicality checks, annuli, M-sequences, and meta-cubes.

A box at center index s and scale N is the nest of l1 balls B_i = B(sN,
r_i N).  "Typical" bundles the regularity clauses that the modification
argument consumes; both regimes are implemented, and the checkers accept
explicit radii overrides because the derived radii exceed desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import DistributionSpec
from .fields import WeightField
from .geodesics import RegionGraph, dijkstra
from .lattice import (
    LatticePath,
    L1Ball,
    Region,
    Vertex,
    l1,
    region_edges,
    vscale,
)
from .patterns import OrientedPattern, Pattern, pattern_hits
from .rng import derive_seed


@dataclass(frozen=True)
class BoxScale:
    """Nested l1 balls around sN; radii are (r1, r2, r3[, r4]) in units of N."""

    s: Vertex
    N: int
    radii: tuple[int, ...]
    regime: str = "unbounded"  # or "bounded"

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        want = 3 if self.regime == "unbounded" else 4
        if len(self.radii) != want:
            raise ValueError(f"{self.regime} regime needs {want} radii")
        if any(a >= b for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly increasing")

    @property
    def center(self) -> Vertex:
        return vscale(self.N, self.s)

    def ball(self, i: int) -> L1Ball:
        return L1Ball(self.center, self.radii[i - 1] * self.N)

    @property
    def outer(self) -> L1Ball:
        return self.ball(len(self.radii))

    @property
    def inner_weak(self) -> L1Ball:
        """Ball whose visit defines weak crossing (B2 unbounded, B3 bounded)."""
        return self.ball(2 if self.regime == "unbounded" else 3)


def crosses(path: LatticePath, box: BoxScale) -> bool:
    b1 = box.ball(1)
    return any(b1.contains(v) for v in path)


def weakly_crosses(path: LatticePath, box: BoxScale) -> bool:
    b = box.inner_weak
    return any(b.contains(v) for v in path)


# ---------------------------------------------------------------------------
# Constants


@dataclass(frozen=True)
class ConstantsSet:
    """Calibration inputs plus every derived constant, both regimes.

    Every derived value satisfies its defining inequality; verify()
    re-substitutes them and reports each check.  Radii can still be
    overridden at the call sites (desk-scale boxes), in which case reports
    carry a below-threshold flag.
    """

    regime: str
    d: int
    rho: float
    t_max: float
    delta: float
    c_mu: float
    C_mu: float
    alpha: float | None = None
    # pattern-derived
    lam: int = 1
    m_pattern: float = 0.0  # M^Lambda (unbounded) or nu (bounded cap)
    tau_pattern: float = 0.0
    T_pattern: float = 0.0  # bounded only: K^Lambda (t_max - rho)
    K_edges: int = 0  # edges in B_inf(0, lam + 3) (unbounded connector bound)
    # derived
    delta_prime: float = 0.0
    epsilon: float | None = None
    nabla: float | None = None
    r1: int = 0
    r2: int = 0
    r3: int = 0
    r4: int | None = None
    r23: float | None = None
    r_annulus: int = 0
    K_prime: float | None = None
    K_dprime: float | None = None
    L1_const: int | None = None
    L2_const: int | None = None
    N_min: float | None = None
    nu_of_N: dict[int, float] = field(default_factory=dict)

    def verify(self) -> list[tuple[str, bool]]:
        """Re-check each defining inequality by direct substitution."""
        checks: list[tuple[str, bool]] = [("r1 = d", self.r1 == self.d)]
        if self.regime == "unbounded":
            lhs = self.r2 * self.delta - self.r1 * (self.rho + self.delta) - self.K_edges * self.rho - self.tau_pattern
            checks.append(("r2*delta - r1(rho+delta) - K rho - tau > 0", lhs > 0))
            lhs2 = (
                self.r2 * (self.delta - self.delta_prime)
                - self.r1 * (self.rho + self.delta)
                - self.K_edges * (self.rho + self.delta_prime)
                - self.tau_pattern
            )
            checks.append(("r2(delta-delta') - r1(rho+delta) - K(rho+delta') - tau > 0", lhs2 > 0))
            checks.append(("B2 fits B_mu(0, r23/2)", self.C_mu * self.r2 <= self.r23 / 2 + 1e-12))
            checks.append(("B_mu(0, 9 r23) fits B3", 9 * self.r23 / self.c_mu <= self.r3 + 1e-12))
            checks.append(("r = 2(r1+r3+1)", self.r_annulus == 2 * (self.r1 + self.r3 + 1)))
            checks.append(("nu(N) > M^Lambda", all(v > self.m_pattern for v in self.nu_of_N.values())))
        else:
            checks.append(("delta' = min(delta/4, delta/(1+d))", abs(self.delta_prime - min(self.delta / 4, self.delta / (1 + self.d))) < 1e-12))
            checks.append(("epsilon < min(1/11, delta/(24 C_mu))", self.epsilon < min(1 / 11, self.delta / (24 * self.C_mu))))
            bound = max(
                4 * (1 + self.t_max) * self.C_mu / (self.epsilon * self.c_mu),
                6 * self.d * self.L2_const * self.C_mu,
                8 * self.C_mu * self.T_pattern / (3 * self.delta),
                4 * self.C_mu * (2 * self.t_max + self.tau_pattern),
            )
            checks.append(("nabla above its four lower bounds", self.nabla > bound))
            checks.append(
                (
                    "r2 above both bounds",
                    self.r2
                    > max(
                        self.r1 + 2 * (self.nabla + 2) / self.c_mu,
                        self.r1
                        + self.L1_const
                        + 3 * self.nabla / self.c_mu
                        + 2 * self.t_max * (1 + (1 + self.d) * self.lam) / self.m_pattern,
                    ),
                )
            )
            checks.append(
                ("r3 > 7 r2 (4 t_max + alpha delta)/(alpha delta)", self.r3 > 7 * self.r2 * (4 * self.t_max + self.alpha * self.delta) / (self.alpha * self.delta))
            )
            checks.append(("r4 > r3 (rho+delta+t_max)/(rho+delta)", self.r4 > self.r3 * (self.rho + self.delta + self.t_max) / (self.rho + self.delta)))
            checks.append(("r = 2(r1+r4+1)", self.r_annulus == 2 * (self.r1 + self.r4 + 1)))
        return checks

    def to_config_text(self) -> str:
        rows = []
        for key, val in self.__dict__.items():
            if val is None or key.startswith("_"):
                continue
            rows.append(f"{key} = {val!r}")
        return "\n".join(rows)

    def box(self, s: Vertex, N: int, radii: tuple[int, ...] | None = None) -> BoxScale:
        if radii is None:
            radii = (
                (self.r1, self.r2, self.r3)
                if self.regime == "unbounded"
                else (self.r1, self.r2, self.r3, self.r4)
            )
        return BoxScale(tuple(s), N, radii, self.regime)


def _pattern_cap(spec: DistributionSpec, pattern: Pattern) -> float:
    """Smallest level M with positive mass on every event interval below M."""
    return max(
        spec.low_representative(lo, hi) for lo, hi in pattern.event.constraints.values()
    )


def estimate_nu(
    spec: DistributionSpec, n_edges: int, seed: int, trials: int = 400, q: float = 0.99
) -> float:
    """Empirical q-quantile of the total weight of n_edges i.i.d. edges.

    nu(N) is the smallest level whose exceedance rate is below 1 - q; all
    downstream uses only need the exceedance to vanish as N grows.
    """
    from .rng import _mix64

    totals = np.empty(trials)
    u = np.empty(n_edges)
    for k in range(trials):
        base = np.uint64(derive_seed(seed, "nu", k))
        idx = np.arange(n_edges, dtype=np.uint64)
        h = _mix64(_mix64(base ^ idx) ^ np.uint64(0xA5A5A5A5A5A5A5A5))
        u = ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        totals[k] = spec.ppf(u).sum()
    return float(np.quantile(totals, q))


def derive_constants(
    regime: str,
    spec: DistributionSpec,
    pattern: Pattern | OrientedPattern,
    delta: float,
    alpha: float | None = None,
    c_mu: float = 1.0,
    C_mu: float = 1.0,
    N_list: tuple[int, ...] = (),
    seed: int = 0,
) -> ConstantsSet:
    """Admissible constants for the chosen regime.

    Radii are the smallest integers satisfying their inequalities given
    the (conservative) pattern bounds m/tau; strict upper bounds are
    halved, strict real lower bounds exceeded by a 1% margin.  delta and
    alpha are calibration inputs (see the calibrate experiment).  In the
    unbounded regime nu(N) is estimated only for the scales in N_list
    (the derived B2 can be enormous; desk-scale callers pass their own
    radii overrides and nu levels).
    """
    if delta <= 0 or (regime == "bounded" and (alpha is None or alpha <= 0)):
        raise ValueError("delta (and alpha in the bounded regime) must be positive")
    d = pattern.pattern.dim if isinstance(pattern, OrientedPattern) else pattern.dim
    rho, t_max = spec.rho, spec.t_max
    r1 = d
    if regime == "unbounded":
        base = pattern if isinstance(pattern, Pattern) else pattern.pattern
        vs = list(base.region.vertices())
        lam = max(max(abs(v[i]) for v in vs) for i in range(d))
        from .lattice import LInfBall

        K_edges = len(region_edges(LInfBall((0,) * d, lam + 3)))
        m_pat = _pattern_cap(spec, base)
        tau = m_pat * l1(base.u_end, base.v_end)
        # minimal integer r2 with r2 delta - r1(rho+delta) - K rho - tau > 0
        r2 = math.floor((r1 * (rho + delta) + K_edges * rho + tau) / delta) + 1
        slack = r2 * delta - r1 * (rho + delta) - K_edges * rho - tau
        delta_prime = slack / (2 * (r2 + K_edges))
        r23 = 2 * C_mu * r2
        r3 = math.ceil(9 * r23 / c_mu)
        if r3 <= r2:
            r3 = r2 + 1
        cs = ConstantsSet(
            regime, d, rho, t_max, delta, c_mu, C_mu, alpha,
            lam, m_pat, tau, 0.0, K_edges,
            delta_prime, None, None, r1, r2, r3, None, r23,
            2 * (r1 + r3 + 1),
        )
        nu = {}
        for N in N_list:
            n_edges = len(region_edges(L1Ball((0,) * d, r2 * N)))
            nu[N] = max(estimate_nu(spec, n_edges, derive_seed(seed, "nuN", N)), m_pat + 1.0)
        return replace(cs, nu_of_N=nu)
    # bounded regime
    if not spec.is_bounded:
        raise ValueError("bounded regime requires a bounded support")
    if isinstance(pattern, OrientedPattern):
        lam = pattern.l0
        nu_cap = max(hi for _, hi in pattern.pattern.event.constraints.values())
        K_pat = len(region_edges(pattern.pattern.region))
    else:
        vs = list(pattern.region.vertices())
        lam = max(max(abs(v[i]) for v in vs) for i in range(d))
        nu_cap = min(t_max, max(hi for _, hi in pattern.event.constraints.values()))
        K_pat = len(region_edges(pattern.region))
    tau = 2 * lam * nu_cap
    T_pat = K_pat * (t_max - rho)
    delta_prime = min(delta / 4, delta / (1 + d))
    L1_const = 10 * lam * d
    L2_const = L1_const + (10 + d) * lam
    eps = min(1 / 11, delta / (24 * C_mu)) / 2
    nabla = 1.01 * max(
        4 * (1 + t_max) * C_mu / (eps * c_mu),
        6 * d * L2_const * C_mu,
        8 * C_mu * T_pat / (3 * delta),
        4 * C_mu * (2 * t_max + tau),
    )
    r2 = (
        math.floor(
            max(
                r1 + 2 * (nabla + 2) / c_mu,
                r1 + L1_const + 3 * nabla / c_mu + 2 * t_max * (1 + (1 + d) * lam) / nu_cap,
            )
        )
        + 1
    )
    r3 = math.floor(7 * r2 * (4 * t_max + alpha * delta) / (alpha * delta)) + 1
    r4 = math.floor(r3 * (rho + delta + t_max) / (rho + delta)) + 1
    K_prime = T_pat + 2 * (C_mu * L1_const + t_max * (lam + 1))
    K_dprime = 1 / (eps * c_mu)
    N_min = 12 * C_mu * K_prime / (delta * nabla)
    return ConstantsSet(
        regime, d, rho, t_max, delta, c_mu, C_mu, alpha,
        lam, nu_cap, tau, T_pat, 0,
        delta_prime, eps, nabla, r1, r2, r3, r4, None,
        2 * (r1 + r4 + 1), K_prime, K_dprime, L1_const, L2_const, N_min,
    )


# ---------------------------------------------------------------------------
# Typicality


@dataclass(frozen=True)
class ClauseReport:
    name: str
    passed: bool
    witness: str = ""


@dataclass(frozen=True)
class TypicalityReport:
    box: BoxScale
    clauses: tuple[ClauseReport, ...]
    below_derived_thresholds: bool = False

    @property
    def typical(self) -> bool:
        return all(c.passed for c in self.clauses)

    def to_text(self) -> str:
        rows = [f"box s={self.box.s} N={self.box.N} radii={self.box.radii} regime={self.box.regime}"]
        if self.below_derived_thresholds:
            rows.append("note: radii overridden below the derived thresholds")
        for c in self.clauses:
            rows.append(f"  [{'pass' if c.passed else 'FAIL'}] {c.name}" + (f" witness: {c.witness}" if c.witness else ""))
        return "\n".join(rows)


def _pair_sources(graph: RegionGraph, sample: int | None, seed: int) -> list[int]:
    if sample is None or sample >= graph.n:
        return list(range(graph.n))
    rs = np.random.default_rng(seed)
    return sorted(rs.choice(graph.n, size=sample, replace=False).tolist())


def _witness_path(graph: RegionGraph, w: np.ndarray, dist: np.ndarray, j: int) -> str:
    """One optimal path realizing dist[j], serialized as a direction string."""
    verts = [j]
    while dist[verts[-1]] > 0:
        v = verts[-1]
        for u, eid in graph.adjacency[v]:
            if math.isfinite(dist[u]) and abs(dist[u] + w[eid] - dist[v]) <= 1e-9 * max(1.0, dist[v]):
                verts.append(u)
                break
        else:
            break
    path = LatticePath(graph.vertices[i] for i in reversed(verts))
    return f"start={path.start} dirs={path.directions()}"


def typicality_unbounded(
    box: BoxScale,
    f: WeightField,
    constants: ConstantsSet,
    r23: float | None = None,
    nu_N: float | None = None,
    pair_sample: int | None = None,
    graph: RegionGraph | None = None,
) -> TypicalityReport:
    """The three unbounded clauses on B3 = box.outer.

    (i)  sup over B2 of t_B3(sN, .) <= r23 N  and  inf over the B3 boundary
         of t_B3(sN, .) >= 4 r23 N    (one Dijkstra from the center);
    (ii) restricted times between any pair at l1 distance >= (r2-r1)N are
         at least (rho+delta) times the distance (the min over paths with
         fixed endpoints IS the restricted geodesic time, so the universal
         path quantifier reduces exactly);
    (iii) the total weight inside B2 stays below nu(N).
    pair_sample, if set, checks clause (ii) from a seeded subsample of
    sources (desk-scale compromise, reported in the clause name).
    """
    if box.regime != "unbounded":
        raise ValueError("box regime mismatch")
    r1, r2, _ = box.radii
    N = box.N
    r23 = r23 if r23 is not None else (constants.r23 if constants.r23 else 2 * constants.C_mu * r2)
    nu_N = nu_N if nu_N is not None else constants.nu_of_N.get(N)
    if nu_N is None:
        raise ValueError(f"no nu(N) available for N={N}")
    b3 = box.outer
    graph = graph if graph is not None else RegionGraph(b3)
    w = graph.weights_of(f)
    center = graph.vindex[box.center]
    dist = dijkstra(graph, w, center)
    b2 = box.ball(2)
    in_b2 = [i for i, v in enumerate(graph.vertices) if b2.contains(v)]
    rim = [i for i, v in enumerate(graph.vertices) if l1(v, box.center) == box.radii[2] * N]
    sup_b2 = max(dist[i] for i in in_b2)
    inf_rim = min(dist[i] for i in rim)
    c1 = ClauseReport(
        "(i) center-ball profile",
        sup_b2 <= r23 * N and inf_rim >= 4 * r23 * N,
        f"sup_B2={sup_b2:.6g} (cap {r23 * N:.6g}), inf_dB3={inf_rim:.6g} (floor {4 * r23 * N:.6g})",
    )
    # clause (ii)
    threshold = (constants.rho + constants.delta)
    min_sep = (r2 - r1) * N
    sources = _pair_sources(graph, pair_sample, derive_seed(0, "pairs", *box.s, N))
    witness = ""
    ok = True
    for i in sources:
        di = dist if i == center else dijkstra(graph, w, i)
        vi = graph.vertices[i]
        for j in range(graph.n):
            sep = l1(vi, graph.vertices[j])
            if sep >= min_sep and di[j] < threshold * sep - 1e-9:
                ok = False
                witness = (
                    f"pair {vi}->{graph.vertices[j]}: t={di[j]:.6g} < {threshold * sep:.6g}; "
                    + _witness_path(graph, w, di, j)
                )
                break
        if not ok:
            break
    name2 = "(ii) no abnormally fast pair"
    if pair_sample is not None and pair_sample < graph.n:
        name2 += f" [subsampled {len(sources)} sources]"
    c2 = ClauseReport(name2, ok, witness)
    total = sum(f.times[e] for e in region_edges(b2))
    c3 = ClauseReport("(iii) B2 weight sum", total < nu_N, f"sum={total:.6g} vs nu(N)={nu_N:.6g}")
    below = constants.r2 > r2 or constants.r3 > box.radii[2]
    return TypicalityReport(box, (c1, c2, c3), below)


def _tight_min_heavy_all(
    graph: RegionGraph, w: np.ndarray, dist_u: np.ndarray, ui: int, heavy: np.ndarray
) -> dict[int, int]:
    """Min number of heavy edges over restricted-optimal u -> . paths, for
    every target at once (Dijkstra with unit heavy-cost on the tight DAG)."""
    import heapq

    best = {ui: 0}
    heap = [(0, ui)]
    dist = dist_u
    while heap:
        h, i = heapq.heappop(heap)
        if h > best.get(i, 1 << 60):
            continue
        for j, eid in graph.adjacency[i]:
            if not math.isfinite(dist[j]):
                continue
            if abs(dist[i] + w[eid] - dist[j]) <= 1e-9 * max(1.0, abs(dist[j])):
                nh = h + int(heavy[eid])
                if nh < best.get(j, 1 << 60):
                    best[j] = nh
                    heapq.heappush(heap, (nh, j))
    return best


def typicality_bounded(
    box: BoxScale,
    f: WeightField,
    constants: ConstantsSet,
    mu_oracle,
    pair_sample: int | None = None,
    graph4: RegionGraph | None = None,
) -> TypicalityReport:
    """The three bounded clauses.

    (i)  restricted-optimal pairs inside B3 at distance >= N use at least
         alpha * distance edges of weight >= rho + delta (the minimum heavy
         count over time-optimal paths is a Dijkstra on the tight DAG);
    (ii) as in the unbounded regime with B4 and separation N;
    (iii) (1 +- eps) mu approximation, relative to the supplied mu oracle,
          with times restricted to B4 (typicality is B4-local).
    """
    if box.regime != "bounded":
        raise ValueError("box regime mismatch")
    r1, r2, r3, r4 = box.radii
    N = box.N
    alpha = constants.alpha or 0.0
    eps = constants.epsilon if constants.epsilon is not None else 0.1
    b4 = box.outer
    b3 = box.ball(3)
    graph4 = graph4 if graph4 is not None else RegionGraph(b4)
    w4 = graph4.weights_of(f)
    heavy = w4 >= constants.rho + constants.delta - 1e-12
    in_b3 = [i for i, v in enumerate(graph4.vertices) if b3.contains(v)]
    sources = _pair_sources(graph4, pair_sample, derive_seed(1, "pairs", *box.s, N))
    threshold = constants.rho + constants.delta
    c1_ok, c1_wit = True, ""
    c2_ok, c2_wit = True, ""
    c3_ok, c3_wit = True, ""
    in_b3_set = set(in_b3)
    for i in sources:
        dist = dijkstra(graph4, w4, i)
        vi = graph4.vertices[i]
        hmin_all = (
            _tight_min_heavy_all(graph4, w4, dist, i, heavy) if i in in_b3_set else {}
        )
        for j in range(graph4.n):
            vj = graph4.vertices[j]
            sep = l1(vi, vj)
            if sep < N:
                continue
            # clause (ii): B4 pairs
            if c2_ok and dist[j] < threshold * sep - 1e-9:
                c2_ok = False
                c2_wit = (
                    f"pair {vi}->{vj}: t={dist[j]:.6g} < {threshold * sep:.6g}; "
                    + _witness_path(graph4, w4, dist, j)
                )
            if i in in_b3_set and j in in_b3_set:
                # clause (iii): mu approximation on B3 pairs
                mu = mu_oracle(tuple(a - b for a, b in zip(vi, vj)))
                if c3_ok and not ((1 - eps) * mu - N <= dist[j] + 1e-9 and dist[j] <= (1 + eps) * mu + N + 1e-9):
                    c3_ok, c3_wit = False, f"pair {vi}->{vj}: t={dist[j]:.6g} vs mu={mu:.6g}"
                # clause (i): heavy-edge density on restricted-optimal paths
                if c1_ok:
                    hmin = hmin_all.get(j)
                    if hmin is not None and hmin < alpha * sep:
                        c1_ok, c1_wit = False, f"pair {vi}->{vj}: min heavy {hmin} < {alpha * sep:.6g}"
    suffix = ""
    if pair_sample is not None and pair_sample < graph4.n:
        suffix = f" [subsampled {len(sources)} sources]"
    clauses = (
        ClauseReport("(i) heavy-edge density" + suffix, c1_ok, c1_wit),
        ClauseReport("(ii) no abnormally fast pair" + suffix, c2_ok, c2_wit),
        ClauseReport("(iii) mu approximation" + suffix, c3_ok, c3_wit),
    )
    below = constants.r2 > r2 or constants.r3 > r3 or (constants.r4 or 0) > r4
    return TypicalityReport(box, clauses, below)


# ---------------------------------------------------------------------------
# Annuli, M-sequences, successful boxes, meta-cubes


def annulus_index(v: Vertex, N: int, r: int) -> int:
    """i with |v|_1 in [(i-1) rN, i rN)."""
    return l1(v) // (r * N) + 1


@dataclass(frozen=True)
class MSequence:
    entries: tuple[tuple[int, Vertex, int], ...]  # (annulus index, center s, crossing path index)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def annuli(self) -> list[int]:
        return [a for a, _, _ in self.entries]


def box_in_annulus(s: Vertex, N: int, outer_radius: int, r: int) -> int | None:
    """Annulus index containing the whole box, or None."""
    norm = l1(vscale(N, s))
    lo, hi = norm - outer_radius * N, norm + outer_radius * N
    if lo < 0:
        return None
    i = lo // (r * N) + 1
    return i if hi < i * r * N else None


def m_sequence(
    path: LatticePath,
    N: int,
    r: int,
    r1: int,
    outer_radius: int,
    is_typical,
) -> MSequence:
    """The greedy annulus-by-annulus box sequence of a geodesic from 0.

    For j = 1, 2, ...: a_j is the first annulus index > a_{j-1} (a_0 = 1,
    so the first annulus never contributes) in which the path crosses the
    B1 ball of a typical box fully contained in that annulus, before first
    exiting the annulus through its outer sphere.  The box appended is the
    first such box in crossing order, residual ties by lexicographic
    center.  is_typical(s) decides typicality of the box centered at sN.
    """
    d = len(path.vertices[0])
    # first index at which the path reaches the outer sphere of annulus i
    exit_at: dict[int, int] = {}
    for k, v in enumerate(path.vertices):
        norm = l1(v)
        if norm > 0 and norm % (r * N) == 0:
            exit_at.setdefault(norm // (r * N), k)
    # first crossing index per candidate box center
    first_cross: dict[Vertex, int] = {}
    for k, v in enumerate(path.vertices):
        base = tuple(round(c / N) for c in v)
        for s in _centers_near(base, r1 + 1, d):
            if s not in first_cross and l1(v, vscale(N, s)) <= r1 * N:
                first_cross[s] = k
    best_per_annulus: dict[int, tuple[int, Vertex]] = {}
    for s, k in sorted(first_cross.items(), key=lambda t: (t[1], t[0])):
        i = box_in_annulus(s, N, outer_radius, r)
        if i is None:
            continue
        exit_k = exit_at.get(i)
        if exit_k is not None and k >= exit_k:
            continue  # crossed only after first leaving through the outer sphere
        if i in best_per_annulus:
            continue  # an earlier (crossing order, then lex) typical box won
        if not is_typical(s):
            continue
        best_per_annulus[i] = (k, s)
    entries = []
    a_prev = 1
    for i in sorted(best_per_annulus):
        if i > a_prev:
            k, s = best_per_annulus[i]
            entries.append((i, s, k))
            a_prev = i
    return MSequence(tuple(entries))


def _centers_near(base: Vertex, span: int, d: int):
    from itertools import product

    for off in product(range(-span, span + 1), repeat=d):
        yield tuple(b + o for b, o in zip(base, off))


def successful_box_check(
    box: BoxScale,
    x: Vertex,
    f: WeightField,
    patterns: Pattern | list[Pattern],
    region: Region | None = None,
    cap: int = 2048,
) -> tuple[bool, bool]:
    """Every enumerated 0 -> x geodesic takes some pattern with its support
    inside B2.  Returns (successful, approximate) where approximate flags a
    truncated enumeration."""
    from .geodesics import enumerate_geodesics

    if isinstance(patterns, Pattern):
        patterns = [patterns]
    gs = enumerate_geodesics((0,) * len(x), x, f, region=region, cap=cap)
    b2 = box.ball(2)
    for g in gs.paths:
        found = False
        for p in patterns:
            support = list(p.region.vertices())
            for hit in pattern_hits(g, p, f):
                if all(b2.contains(tuple(a + b for a, b in zip(v, hit.translate))) for v in support):
                    found = True
                    break
            if found:
                break
        if not found:
            return False, gs.truncated
    return True, gs.truncated


@dataclass(frozen=True)
class MetaCubeAnimal:
    centers: frozenset[Vertex]
    size: int
    inequality_holds: bool


def meta_cube_animal(path: LatticePath, N: int) -> MetaCubeAnimal:
    """Meta-cubes are half-open width-N cells ((s-1/2)N <= w < (s+1/2)N);
    the visited cells satisfy |path|_e >= N (size/3^d - 1)."""
    d = len(path.vertices[0])
    centers = set()
    for v in path.vertices:
        s = tuple(math.floor(c / N + 0.5) for c in v)
        centers.add(vscale(N, s))
    size = len(centers)
    holds = len(path) >= N * (size / 3**d - 1)
    return MetaCubeAnimal(frozenset(centers), size, holds)
