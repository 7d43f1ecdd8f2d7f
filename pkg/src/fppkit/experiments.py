"""Reproducible Monte Carlo experiments with CSV output.

Every row is a pure function of (config, master seed, n, trial index); the
per-trial seed is derived from those alone, so runs are reproducible and
trials can execute in any order or in parallel.  Summaries are recomputed
from the raw rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import DistributionSpec
from .fields import sample_conditioned
from .geodesics import (
    NormEstimate,
    RegionGraph,
    dijkstra,
    enumerate_geodesics,
    estimate_time_constant,
    extreme_length_geodesics,
    first_lex_geodesic,
    restricted_geodesic_time,
)
from .lattice import LatticePath, ProductBox, Vertex, l1, region_edges, vscale
from .modification import (
    PlanError,
    build_plan_unbounded,
    verify_modification_unbounded,
)
from .patterns import Pattern, count_occurrences, enlarge_to_cube
from .renormalization import (
    BoxScale,
    ConstantsSet,
    crosses,
    derive_constants,
    typicality_bounded,
    typicality_unbounded,
)
from .rng import derive_seed

SCHEMA_VERSION = 1


def segment_region(n: int, d: int, pad: int) -> ProductBox:
    """Box around the segment 0 -> n e1 with the given l-inf padding."""
    lo = (-pad,) * d
    hi = (n + pad,) + (pad,) * (d - 1)
    return ProductBox(lo, hi)


def _geodesic_panel(
    graph: RegionGraph,
    w: np.ndarray,
    x: Vertex,
    y: Vertex,
    cap: int,
) -> tuple[list[LatticePath], bool, float]:
    """Enumerated geodesics (first-lex and both extremal-length witnesses
    always included) plus the truncation flag and the optimum."""
    f = graph.field_from(w)
    gs = enumerate_geodesics(x, y, f, graph=graph, cap=cap)
    paths = list(gs.paths)
    have = set(paths)
    lex = first_lex_geodesic(x, y, f, graph=graph)
    ext = extreme_length_geodesics(x, y, f, graph=graph)
    for extra in (lex, ext.witness_min, ext.witness_max):
        if extra not in have:
            paths.append(extra)
            have.add(extra)
    return paths, gs.truncated, gs.time


# ---------------------------------------------------------------------------
# Experiment drivers (each returns a list of row dicts)


def run_deficiency(
    spec: DistributionSpec,
    pattern: Pattern,
    n_list: list[int],
    trials: int,
    seed: int,
    d: int = 2,
    cap: int = 128,
    pad: int | None = None,
) -> list[dict]:
    """min over enumerated geodesics 0 -> n e1 of the occurrence count N^P."""
    rows = []
    for n in n_list:
        region = segment_region(n, d, pad if pad is not None else max(6, n // 3))
        graph = RegionGraph(region)
        x, y = (0,) * d, (n,) + (0,) * (d - 1)
        for k in range(trials):
            s = derive_seed(seed, "deficiency", n, k)
            w = graph.sample_weights(spec, s)
            paths, truncated, _ = _geodesic_panel(graph, w, x, y, cap)
            f = graph.field_from(w)
            min_n = min(count_occurrences(g, pattern, f) for g in paths)
            rows.append(
                dict(experiment="deficiency", n=n, trial=k, seed=s, min_count=min_n,
                     truncated=int(truncated), n_geodesics=len(paths))
            )
    return rows


def summarize_deficiency(rows: list[dict]) -> dict:
    by_n: dict[int, list[int]] = {}
    for r in rows:
        by_n.setdefault(r["n"], []).append(r["min_count"])
    p_zero = {n: float(np.mean([c == 0 for c in cs])) for n, cs in sorted(by_n.items())}
    alpha_hat = {n: float(np.percentile(cs, 5)) / n for n, cs in sorted(by_n.items())}
    pos = [(n, p) for n, p in p_zero.items() if p > 0]
    slope = float(np.polyfit([n for n, _ in pos], [math.log(p) for _, p in pos], 1)[0]) if len(pos) >= 2 else None
    return dict(p_zero=p_zero, alpha_hat=alpha_hat, log_slope=slope)


def run_large_edges(
    spec: DistributionSpec,
    M: float,
    n_list: list[int],
    trials: int,
    seed: int,
    d: int = 2,
    cap: int = 128,
) -> list[dict]:
    """min over enumerated geodesics of the number of edges with time >= M."""
    if spec.mass_in(M, math.inf) <= 0:
        raise ValueError(f"M={M} is above the support")
    rows = []
    for n in n_list:
        region = segment_region(n, d, max(6, n // 3))
        graph = RegionGraph(region)
        x, y = (0,) * d, (n,) + (0,) * (d - 1)
        for k in range(trials):
            s = derive_seed(seed, "large_edges", n, k)
            w = graph.sample_weights(spec, s)
            paths, truncated, _ = _geodesic_panel(graph, w, x, y, cap)
            heavy = {e for e, t in zip(graph.edges, w) if t >= M - 1e-12}
            min_h = min(sum(1 for e in g.edges() if e in heavy) for g in paths)
            rows.append(
                dict(experiment="large_edges", n=n, trial=k, seed=s, min_count=min_h,
                     truncated=int(truncated), n_geodesics=len(paths))
            )
    return rows


def run_gap(
    spec: DistributionSpec,
    k_param: int | None,
    l_param: int | None,
    r_atom: float | None,
    s_atom: float | None,
    n_list: list[int],
    trials: int,
    seed: int,
    d: int = 2,
) -> list[dict]:
    """Extremal Euclidean lengths of geodesics.

    When (k, l, r, s) are supplied, the gate checks that the atoms exist
    and (k+2l) r = k s (or zero is an atom), so two equal-time routes of
    different lengths are constructible; passing None skips the gate and
    just measures the gap.
    """
    if k_param is not None:
        if spec.mass_at(r_atom) <= 0 or spec.mass_at(s_atom) <= 0:
            raise ValueError("r and s must be atoms of the distribution")
        if (k_param + 2 * l_param) * r_atom != k_param * s_atom and spec.mass_at(0.0) <= 0:
            raise ValueError("(k+2l) r != k s and no atom at zero")
    rows = []
    for n in n_list:
        region = segment_region(n, d, max(6, n // 3))
        graph = RegionGraph(region)
        x, y = (0,) * d, (n,) + (0,) * (d - 1)
        for kk in range(trials):
            s = derive_seed(seed, "gap", n, kk)
            w = graph.sample_weights(spec, s)
            f = graph.field_from(w)
            ext = extreme_length_geodesics(x, y, f, graph=graph)
            rows.append(
                dict(experiment="gap", n=n, trial=kk, seed=s, lmin=ext.lmin,
                     lmax=ext.lmax, gap=ext.gap, approx=int(not ext.exact))
            )
    return rows


def summarize_gap(rows: list[dict]) -> dict:
    by_n: dict[int, list[int]] = {}
    for r in rows:
        if not r["approx"]:
            by_n.setdefault(r["n"], []).append(r["gap"])
    med = {n: float(np.median(g)) for n, g in sorted(by_n.items())}
    ns = sorted(med)
    slope = float(np.polyfit(ns, [med[n] for n in ns], 1)[0]) if len(ns) >= 2 else None
    return dict(median_gap=med, slope=slope)


def run_shift_concavity(
    spec: DistributionSpec,
    b_list: list[float],
    n: int,
    trials: int,
    seed: int,
    d: int = 2,
) -> list[dict]:
    """Per-realization check t^(-b)(0,x) <= t(0,x) - b * Lmax(0,x).

    Any maximal-length geodesic of T keeps its edge set under the shift,
    so the bound holds path by path; recomputing the shifted optimum by a
    fresh search can only improve it.
    """
    rho = spec.rho
    for b in b_list:
        if not 0 <= b < rho:
            raise ValueError(f"shift b={b} outside [0, rho={rho})")
    region = segment_region(n, d, max(6, n // 3))
    graph = RegionGraph(region)
    x, y = (0,) * d, (n,) + (0,) * (d - 1)
    rows = []
    for k in range(trials):
        s = derive_seed(seed, "shift", n, k)
        w = graph.sample_weights(spec, s)
        f = graph.field_from(w)
        t0, _ = restricted_geodesic_time(x, y, f, graph=graph)
        ext = extreme_length_geodesics(x, y, f, graph=graph)
        for b in b_list:
            tb = float(dijkstra(graph, w - b, graph.vindex[x])[graph.vindex[y]])
            bound = t0 - b * ext.lmax
            rows.append(
                dict(experiment="shift", n=n, trial=k, seed=s, b=b, t=t0,
                     t_shift=tb, lmax=ext.lmax, bound=bound,
                     holds=int(tb <= bound + 1e-9), approx=int(not ext.exact))
            )
    return rows


def run_shape(
    spec: DistributionSpec,
    directions: list[Vertex],
    n_list: list[int],
    trials: int,
    seed: int,
) -> tuple[list[dict], NormEstimate]:
    est = estimate_time_constant(directions, spec, n_list, trials, seed)
    rows = []
    for u, series in est.per_direction.items():
        for n, mean, half in series:
            rows.append(
                dict(experiment="shape", direction=str(u), n=n, mu_hat=mean,
                     ci_half=half, rate=mean / l1(u))
            )
    return rows, est


def run_typical_rate(
    spec: DistributionSpec,
    constants: ConstantsSet,
    N_list: list[int],
    boxes: int,
    seed: int,
    radii: tuple[int, ...],
    mu_oracle=None,
    pair_sample: int | None = 40,
) -> list[dict]:
    """Empirical typicality rate per clause across sampled environments."""
    rows = []
    regime = constants.regime
    for N in N_list:
        box = BoxScale((0,) * constants.d, N, radii, regime)
        graph = RegionGraph(box.outer)
        nu_N = None
        if regime == "unbounded":
            n_edges = len(region_edges(box.ball(2)))
            from .renormalization import estimate_nu

            nu_N = estimate_nu(spec, n_edges, derive_seed(seed, "nu", N))
        for k in range(boxes):
            s = derive_seed(seed, "typical", N, k)
            w = graph.sample_weights(spec, s)
            f = graph.field_from(w)
            if regime == "unbounded":
                rep = typicality_unbounded(box, f, constants, nu_N=nu_N, pair_sample=pair_sample, graph=graph)
            else:
                rep = typicality_bounded(box, f, constants, mu_oracle, pair_sample=pair_sample, graph4=graph)
            row = dict(experiment="typical_rate", N=N, trial=k, seed=s,
                       typical=int(rep.typical))
            for i, c in enumerate(rep.clauses, 1):
                row[f"clause{i}"] = int(c.passed)
            rows.append(row)
    return rows


@dataclass
class DemoInstance:
    seed: int
    retries: int
    report_text: str
    all_passed: bool
    clause_failures: int


def run_modification_demo_unbounded(
    spec: DistributionSpec,
    base_pattern: Pattern,
    instances: int,
    seed: int,
    N: int = 4,
    radii: tuple[int, int, int] = (2, 6, 10),
    d: int = 2,
    delta: float | None = None,
    retry_budget: int = 40,
    cap: int = 256,
) -> tuple[list[DemoInstance], dict]:
    """End-to-end unbounded modification on sampled instances.

    The pattern is cube-enlarged, a box is planted on the 0 -> x axis, and
    environments are resampled until the first-lex geodesic crosses B1 and
    the instance-level typicality facts the rerouting argument consumes hold
    (confinement of the crossing, the clause-(ii) bound on the crossing
    segments, and the B2 weight-sum bound).  The donor is then drawn
    exactly from the conditional law of the target event, so the target
    gate always holds, and every clause is verified on the splice.

    Desk-scale radii are overridden; the report records this so failed
    clauses can be told apart from sub-threshold constants.
    """
    if spec.is_bounded:
        raise ValueError("the unbounded demo needs an unbounded-support spec")
    m_cap = max(
        spec.low_representative(lo, hi) for lo, hi in base_pattern.event.constraints.values()
    ) + 1.0
    cube_pat = enlarge_to_cube(base_pattern, m_cap)
    if delta is None:
        delta = calibrate_delta(spec, seed=derive_seed(seed, "cal"), d=d)
    constants = derive_constants(
        "unbounded", spec, cube_pat, delta, c_mu=1.0, C_mu=2.0, seed=seed
    )
    r1, r2, r3 = radii
    lam = cube_pat.region.radius
    s_center = (r2 + 2,) + (0,) * (d - 1)
    box = BoxScale(s_center, N, radii, "unbounded")
    x = vscale(2, vscale(N, s_center))
    pad = r3 * N + 4 * N
    region = ProductBox(
        tuple(min(0, c) - pad for c in x), tuple(max(0, c) + pad for c in x)
    )
    graph = RegionGraph(region)
    n_b2 = len(region_edges(box.ball(2)))
    from .renormalization import estimate_nu

    nu_N = max(estimate_nu(spec, n_b2, derive_seed(seed, "nu", N)), m_cap * len(region_edges(cube_pat.region)) + 2.0)
    rho = spec.rho
    zero = (0,) * d
    b2, b3, b1 = box.ball(2), box.outer, box.ball(1)
    b2_edges = region_edges(b2)
    out: list[DemoInstance] = []
    attempts = 0
    gate_fail = 0
    k = 0
    while len(out) < instances and attempts < instances * retry_budget:
        k += 1
        attempts += 1
        s = derive_seed(seed, "demo", k)
        w = graph.sample_weights(spec, s)
        f = graph.field_from(w, seed=s)
        gamma = first_lex_geodesic(zero, x, f, graph=graph)
        if not crosses(gamma, box):
            gate_fail += 1
            continue
        # instance-level typicality facts the rerouting clauses consume
        inside = [z for z in gamma.vertices if b2.contains(z)]
        u, v = inside[0], inside[-1]
        seg = gamma.subpath(u, v)
        if not all(b3.contains(z) for z in seg.vertices):
            gate_fail += 1
            continue
        wvert = next(z for z in seg.vertices if b1.contains(z))
        t_uw = f.path_time(gamma.subpath(u, wvert))
        t_wv = f.path_time(gamma.subpath(wvert, v))
        if t_uw < (rho + delta) * l1(u, wvert) or t_wv < (rho + delta) * l1(wvert, v):
            gate_fail += 1
            continue
        if sum(f.times[e] for e in b2_edges) >= nu_N:
            gate_fail += 1
            continue
        try:
            plan = build_plan_unbounded(f, gamma, box, cube_pat, constants, nu_N=nu_N)
        except PlanError:
            gate_fail += 1
            continue
        donor = sample_conditioned(region, spec, plan.target, derive_seed(seed, "donor", k))
        rep, _ = verify_modification_unbounded(plan, f, donor, x, cap=cap, graph=graph)
        rep.below_thresholds = True  # radii overridden below the derived thresholds
        out.append(
            DemoInstance(s, attempts, rep.to_text(), rep.all_passed, len(rep.failures()))
        )
    summary = dict(
        instances=len(out),
        attempts=attempts,
        gate_failures=gate_fail,
        acceptance_rate=len(out) / attempts if attempts else 0.0,
        all_clauses_passed=all(i.all_passed for i in out) if out else False,
        total_clause_failures=sum(i.clause_failures for i in out),
    )
    return out, summary


def calibrate_delta(
    spec: DistributionSpec,
    seed: int,
    d: int = 2,
    n: int = 24,
    trials: int = 200,
    safety: float = 0.8,
) -> float:
    """Empirical delta with P(t(0, n e1) <= (rho + delta) n) = 0 in-sample:
    a safety fraction of the observed minimum of t/n - rho."""
    region = segment_region(n, d, max(6, n // 3))
    graph = RegionGraph(region)
    x, y = (0,) * d, (n,) + (0,) * (d - 1)
    vals = []
    for k in range(trials):
        w = graph.sample_weights(spec, derive_seed(seed, "caldelta", k))
        vals.append(dijkstra(graph, w, graph.vindex[x])[graph.vindex[y]] / n)
    return safety * (min(vals) - spec.rho)


def calibrate_alpha(
    spec: DistributionSpec,
    delta: float,
    seed: int,
    d: int = 2,
    n: int = 24,
    trials: int = 200,
    safety: float = 0.5,
) -> float:
    """Empirical heavy-edge density floor: a safety fraction of the observed
    minimum over trials of (edges >= rho + delta on the first-lex geodesic)/n."""
    region = segment_region(n, d, max(6, n // 3))
    graph = RegionGraph(region)
    x, y = (0,) * d, (n,) + (0,) * (d - 1)
    level = spec.rho + delta
    fracs = []
    for k in range(trials):
        w = graph.sample_weights(spec, derive_seed(seed, "calalpha", k))
        f = graph.field_from(w)
        g = first_lex_geodesic(x, y, f, graph=graph)
        heavy = sum(1 for e in g.edges() if f.times[e] >= level - 1e-12)
        fracs.append(heavy / l1(x, y))
    return safety * min(fracs)
