"""Tour of the core objects: environments, geodesics, and pattern counts.

Run:  python3 demos/01_geodesics_and_patterns.py
"""

import fppkit as fpp

# An i.i.d. environment with atoms 1 and 2 on a box around the segment
spec = fpp.DistributionSpec(atoms=((1.0, 0.5), (2.0, 0.5)))
print("law:", spec.to_text(), "| useful:",
      fpp.usefulness_check(spec, p_oriented_c=0.6447).useful)

region = fpp.ProductBox((-4, -6), (24, 10))
field = fpp.sample_field(region, spec, seed=7)

# The geodesic time between 0 and (20, 2), with every optimal path
x, y = (0, 0), (20, 2)
t, dag = fpp.restricted_geodesic_time(x, y, field)
geos = fpp.enumerate_geodesics(x, y, field)
print(f"t{x, y} = {t:.1f} with {len(geos.paths)} geodesics "
      f"(truncated: {geos.truncated})")

lex = fpp.first_lex_geodesic(x, y, field)
print("first-lex geodesic:", lex.directions())

ext = fpp.extreme_length_geodesics(x, y, field)
print(f"Euclidean lengths: min {ext.lmin}, max {ext.lmax} (gap {ext.gap})")

# A single-edge pattern: the event is a passage time >= 2
pat = fpp.heavy_edge_pattern(2.0)
n = fpp.count_occurrences(lex, pat, field)
nd = fpp.count_disjoint_occurrences(lex, pat, field)
print(f"heavy-edge pattern occurrences on the first-lex geodesic: {n} ({nd} disjoint)")

# The obstruction example: a pattern no geodesic can take under this law
fig = fpp.obstruction_pattern()
law14 = fpp.DistributionSpec(atoms=((1.0, 0.5), (4.0, 0.5)))
verdict = fpp.validate_pattern(fig, law14)
print("obstruction pattern valid?", verdict.valid, "-", verdict.reason)
inner = fpp.inner_optimal_paths(fig, fpp.sample_conditioned(fig.region, law14, fig.event, 0))
print("its unique inner optimum:", inner.paths[0].vertices, "at time", inner.time)
