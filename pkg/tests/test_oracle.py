import pytest

from fppkit.distributions import DistributionSpec
from fppkit.fields import constant_field, sample_conditioned, sample_field
from fppkit.lattice import LatticePath, ProductBox
from fppkit.oracle import (
    SA_GRID_PATH_COUNTS,
    enumerate_sa_paths,
    exact_optimal_set,
    oracle_pattern_count,
    recursive_sa_count,
)
from fppkit.patterns import heavy_edge_pattern, count_occurrences, obstruction_pattern

ATOMS14 = DistributionSpec(atoms=((1.0, 0.5), (4.0, 0.5)))
ATOMS12 = DistributionSpec(atoms=((1.0, 0.5), (2.0, 0.5)))


def test_enumerate_sa_paths_trivial():
    region = ProductBox((0, 0), (2, 2))
    paths = list(enumerate_sa_paths((1, 1), (1, 1), region, 10))
    assert paths == [LatticePath([(1, 1)])]


def test_enumerate_sa_paths_2x2():
    region = ProductBox((0, 0), (1, 1))
    short = list(enumerate_sa_paths((0, 0), (1, 1), region, 2))
    assert len(short) == 2
    all_paths = list(enumerate_sa_paths((0, 0), (1, 1), region, 10))
    assert len(all_paths) == SA_GRID_PATH_COUNTS[2]


def test_enumerate_sa_paths_unique_and_sorted():
    region = ProductBox((0, 0), (2, 2))
    paths = list(enumerate_sa_paths((0, 0), (2, 2), region, 8))
    assert len(set(paths)) == len(paths)
    words = [p.directions() for p in paths]
    assert words == sorted(words, key=lambda w: [{"+1": 0, "-1": 1, "+2": 2, "-2": 3}[t] for t in w.split(",")])


def test_sa_counts_match_recursive_and_frozen_table():
    for L, count in SA_GRID_PATH_COUNTS.items():
        region = ProductBox((0, 0), (L - 1, L - 1))
        corner = (L - 1, L - 1)
        cap = L * L
        stream = sum(1 for _ in enumerate_sa_paths((0, 0), corner, region, cap))
        assert stream == count
        assert recursive_sa_count((0, 0), corner, region, cap) == count


def test_exact_optimal_set_obstruction():
    pat = obstruction_pattern()
    f = sample_conditioned(pat.region, ATOMS14, pat.event, 0)
    res = exact_optimal_set((0, 2), (0, 1), pat.region, f)
    assert res.optimum == 4.0
    assert [p.vertices for p in res.paths] == [((0, 2), (0, 1))]


def test_exact_optimal_set_constant_binomial():
    region = ProductBox((0, 0), (2, 2))
    f = constant_field(region, 1.5)
    res = exact_optimal_set((0, 0), (2, 2), region, f)
    assert res.optimum == pytest.approx(6.0)
    assert len(res.paths) == 6


def test_oracle_pattern_count_cross_check():
    pat = heavy_edge_pattern(2.0)
    region = ProductBox((-2, -2), (10, 6))
    from fppkit.geodesics import first_lex_geodesic

    for seed in range(60):
        f = sample_field(region, ATOMS12, seed)
        g = first_lex_geodesic((0, 0), (8, 3), f)
        assert oracle_pattern_count(g, pat, f) == count_occurrences(g, pat, f)


def test_oracle_pattern_count_trivial_zero():
    pat = heavy_edge_pattern(2.0)
    region = ProductBox((0, 0), (4, 4))
    f = constant_field(region, 1.0)  # no heavy edge anywhere
    g = LatticePath([(0, 0), (1, 0), (2, 0)])
    assert oracle_pattern_count(g, pat, f) == 0
    single = LatticePath([(1, 1)])  # length-0 path, u != v can never be hit
    assert oracle_pattern_count(single, pat, f) == 0
