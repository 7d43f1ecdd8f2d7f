"""Sampled weight environments T and per-edge interval conditioning."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .distributions import DistributionSpec
from .lattice import (
    Edge,
    Region,
    Vertex,
    canonical_edge,
    edge_axis,
    region_edges,
    translate_edge,
)
from .rng import edge_uniforms, pack_edge_keys

Interval = tuple[float, float]


@dataclass(frozen=True)
class EdgeConstraintSet:
    """Conjunction of per-edge closed interval constraints [lo, hi]."""

    constraints: Mapping[Edge, Interval]

    def __post_init__(self):
        frozen = {}
        for e, (lo, hi) in dict(self.constraints).items():
            e = canonical_edge(*e)
            if lo < 0 or lo > hi:
                raise ValueError(f"bad interval [{lo}, {hi}] for edge {e}")
            frozen[e] = (float(lo), float(hi))
        object.__setattr__(self, "constraints", MappingProxyType(frozen))

    def __len__(self) -> int:
        return len(self.constraints)

    def __reduce__(self):  # MappingProxyType does not pickle
        return (EdgeConstraintSet, (dict(self.constraints),))

    def edges(self) -> list[Edge]:
        return sorted(self.constraints)

    def translate(self, x: Vertex) -> "EdgeConstraintSet":
        """theta_x: the constrained edges move by -x (like every object)."""
        return EdgeConstraintSet(
            {translate_edge(e, x): iv for e, iv in self.constraints.items()}
        )

    def merged_with(self, other: "EdgeConstraintSet") -> "EdgeConstraintSet":
        merged = dict(self.constraints)
        for e, iv in other.constraints.items():
            if e in merged and merged[e] != iv:
                raise ValueError(f"conflicting constraints on {e}")
            merged[e] = iv
        return EdgeConstraintSet(merged)

    def satisfied_by(self, f: "WeightField", tol: float = 1e-9) -> bool:
        return all(
            lo - tol <= f.time(e) <= hi + tol for e, (lo, hi) in self.constraints.items()
        )


def _edge_arrays(edges: list[Edge]) -> tuple[np.ndarray, np.ndarray]:
    coords = np.array([e[0] for e in edges], dtype=np.int64)
    axes = np.array([edge_axis(e) for e in edges], dtype=np.int64)
    return pack_edge_keys(coords, axes)


def edge_times_for(
    edges: list[Edge],
    spec: DistributionSpec,
    seed: int,
    constraints: EdgeConstraintSet | None = None,
) -> np.ndarray:
    """Per-edge times, one counter-based stream per canonical edge.

    Constrained edges are sampled from the law conditioned to their
    interval via the inverse CDF on the same per-edge uniform, so adding a
    constraint never perturbs other edges.
    """
    key_lo, key_hi = _edge_arrays(edges)
    u = edge_uniforms(seed, key_lo, key_hi)
    times = spec.ppf(u)
    if constraints is not None and len(constraints):
        index = {e: i for i, e in enumerate(edges)}
        by_interval: dict[Interval, list[int]] = {}
        for e, iv in constraints.constraints.items():
            i = index.get(e)
            if i is None:
                raise KeyError(f"constrained edge {e} outside the sampled region")
            by_interval.setdefault(iv, []).append(i)
        for (lo, hi), idx in by_interval.items():
            idx_arr = np.array(idx)
            times[idx_arr] = spec.conditional_ppf(u[idx_arr], lo, hi)
    return times


@dataclass(frozen=True)
class WeightField:
    """Immutable map from the edges of a region to passage times."""

    region: Region
    times: Mapping[Edge, float]
    seed: int = -1
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "times", MappingProxyType(dict(self.times)))

    def __reduce__(self):  # MappingProxyType does not pickle
        return (WeightField, (self.region, dict(self.times), self.seed, self.label))

    def time(self, e: Edge) -> float:
        return self.times[canonical_edge(*e)]

    def path_time(self, path) -> float:
        t = self.times
        total = 0.0
        vs = path.vertices
        for a, b in zip(vs, vs[1:]):
            total += t[(a, b) if a <= b else (b, a)]
        return total

    def edges(self) -> list[Edge]:
        return sorted(self.times)

    @property
    def min_time(self) -> float:
        return min(self.times.values())

    @property
    def max_time(self) -> float:
        return max(self.times.values())

    def shift(self, b: float) -> "WeightField":
        """T^(b): add b to every edge; negative b must keep weights positive."""
        if b < 0 and self.min_time + b <= 0:
            raise ValueError(
                f"shift {b} would make weights nonpositive (min time {self.min_time})"
            )
        return WeightField(
            self.region,
            {e: t + b for e, t in self.times.items()},
            self.seed,
            f"{self.label}+shift({b})",
        )

    def translate(self, x: Vertex) -> "WeightField":
        """theta_x T: (theta_x T)(e) = T(e + x)."""
        from .lattice import translate as _translate

        return WeightField(
            _translate(self.region, x),
            {translate_edge(e, x): t for e, t in self.times.items()},
            self.seed,
            f"{self.label}+translate",
        )

    def replaced(self, overrides: Mapping[Edge, float]) -> "WeightField":
        new = dict(self.times)
        for e, t in overrides.items():
            e = canonical_edge(*e)
            if e not in new:
                raise KeyError(f"edge {e} not in field")
            new[e] = float(t)
        return WeightField(self.region, new, self.seed, self.label)

    def to_csv(self, path: str) -> None:
        """Dump as ex,ey[,...],fx,fy[,...],time rows in canonical edge order."""
        with open(path, "w") as fh:
            d = len(next(iter(self.times))[0])
            axes = "xyzw"[:d]
            cols = [f"{end}{a}" for end in "ef" for a in axes]
            fh.write(",".join(cols) + ",time\n")
            for (u, v), t in sorted(self.times.items()):
                fh.write(",".join(str(c) for c in u + v) + f",{t!r}\n")

    @staticmethod
    def from_csv(path: str, region: Region) -> "WeightField":
        times = {}
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            d = (len(header) - 1) // 2
            for line in fh:
                parts = line.strip().split(",")
                u = tuple(int(c) for c in parts[:d])
                v = tuple(int(c) for c in parts[d : 2 * d])
                times[canonical_edge(u, v)] = float(parts[2 * d])
        return WeightField(region, times, label=f"csv:{path}")


def sample_field(region: Region, spec: DistributionSpec, seed: int) -> WeightField:
    """i.i.d. environment on the region's edges, reproducible from the seed."""
    edges = region_edges(region)
    if not edges:
        raise ValueError("region has no edges")
    times = edge_times_for(edges, spec, seed)
    return WeightField(region, dict(zip(edges, times.tolist())), seed, spec.to_text())


def sample_conditioned(
    region: Region,
    spec: DistributionSpec,
    constraints: EdgeConstraintSet,
    seed: int,
) -> WeightField:
    """Environment with constrained edges drawn from the conditional law."""
    for e, (lo, hi) in constraints.constraints.items():
        if not spec.has_mass_in(lo, hi):
            raise ValueError(f"constraint [{lo}, {hi}] on {e} has zero mass")
    edges = region_edges(region)
    times = edge_times_for(edges, spec, seed, constraints)
    return WeightField(region, dict(zip(edges, times.tolist())), seed, spec.to_text() + "|cond")


def constraint_probability(spec: DistributionSpec, constraints: EdgeConstraintSet) -> float:
    """P(every constrained edge falls in its interval) = product of masses."""
    p = 1.0
    for lo, hi in constraints.constraints.values():
        p *= spec.mass_in(lo, hi)
    return p


def splice(base: WeightField, donor: WeightField, edges: Iterable[Edge]) -> WeightField:
    """Pointwise selection: donor's times on the given edges, base elsewhere."""
    edges = [canonical_edge(*e) for e in edges]
    new = dict(base.times)
    for e in edges:
        if e not in new:
            raise ValueError(f"edge {e} outside the base field")
        new[e] = donor.time(e)
    return WeightField(base.region, new, base.seed, base.label + "|spliced")


def constant_field(region: Region, value: float) -> WeightField:
    return WeightField(region, {e: float(value) for e in region_edges(region)}, label=f"const({value})")
