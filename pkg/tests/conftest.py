"""Shared helpers: random instances, an independent cycle-validity check,
and brute-force packing oracles used to cross-check the solvers."""

import itertools
import random

import networkx as nx

from ikep.graph import Arc, CompatibilityGraph, Node, NodeKind
from ikep.policy import CountryPolicy, PolicyConfig


def random_graph(rng: random.Random, n: int, density: float,
                 num_countries: int = 2, weights: bool = False) -> CompatibilityGraph:
    countries = [rng.randint(1, num_countries) for _ in range(n)]
    # every country label must appear at least once
    for k in range(1, num_countries + 1):
        if n >= num_countries and k not in countries:
            countries[k - 1] = k
    nodes = [Node(i, countries[i], NodeKind.PAIR, "O", "O", 0.0)
             for i in range(n)]
    arcs = [Arc(i, j, rng.randint(1, 3) if weights else 1.0)
            for i in range(n) for j in range(n)
            if i != j and rng.random() < density]
    return CompatibilityGraph(nodes, arcs, num_countries)


def random_finite_policy(rng: random.Random, num_countries: int = 2) -> PolicyConfig:
    countries = tuple(
        CountryPolicy(
            cycle_cap=rng.randint(2, 4),
            segment_cap=rng.choice([None, 1, 2, 3]),
            max_segments=rng.choice([None, 1, 2]),
            max_pairs=rng.choice([None, 2, 3]),
        )
        for _ in range(num_countries)
    )
    return PolicyConfig(
        countries=countries,
        international_cycle_cap=rng.randint(2, 5),
        max_countries=rng.choice([None, 2]) if num_countries > 2 else None,
    )


def all_simple_cycles(g: CompatibilityGraph):
    """Canonical (min-id-first) node tuples of every simple directed cycle."""
    dg = nx.DiGraph()
    dg.add_nodes_from(range(len(g.nodes)))
    dg.add_edges_from((a.source, a.target) for a in g.arcs)
    out = set()
    for cyc in nx.simple_cycles(dg):
        if len(cyc) < 2:
            continue
        i = cyc.index(min(cyc))
        out.add(tuple(cyc[i:] + cyc[:i]))
    return out


def _circular_runs(countries):
    """Maximal same-value runs of a circular sequence, as (value, length)."""
    n = len(countries)
    if len(set(countries)) == 1:
        return [(countries[0], n)]
    # rotate so position 0 starts a new run
    start = next(i for i in range(n) if countries[i] != countries[i - 1])
    rot = countries[start:] + countries[:start]
    runs = []
    for value, grp in itertools.groupby(rot):
        runs.append((value, len(list(grp))))
    return runs


def oracle_valid(nodes, g: CompatibilityGraph, policy: PolicyConfig) -> bool:
    """Validity of a cycle under the policy, coded independently of the
    library's filter: direct transcription of each cap in turn."""
    countries = [g.country_of(v) for v in nodes]
    distinct = set(countries)
    if len(distinct) == 1:
        k = countries[0]
        cap = policy.country(k).cycle_cap
        return cap is None or len(nodes) <= cap
    if policy.international_cycle_cap is not None and \
            len(nodes) > policy.international_cycle_cap:
        return False
    if policy.max_countries is not None and len(distinct) > policy.max_countries:
        return False
    for k in distinct:
        cp = policy.country(k)
        if cp.max_pairs is not None and countries.count(k) > cp.max_pairs:
            return False
    runs = _circular_runs(countries)
    seg_count = {k: 0 for k in distinct}
    for k, length in runs:
        seg_count[k] += 1
        cap = policy.segment_cap(k)
        if cap is not None and length > cap:
            return False
    for k in distinct:
        cap = policy.country(k).max_segments
        if cap is not None and seg_count[k] > cap:
            return False
    return True


def oracle_cycles(g: CompatibilityGraph, policy: PolicyConfig):
    return {c for c in all_simple_cycles(g) if oracle_valid(c, g, policy)}


def oracle_best_packing(cycles, weights=None) -> float:
    """Max-weight node-disjoint cycle packing by exhaustive search."""
    cycles = list(cycles)

    def weight(c):
        return weights[c] if weights is not None else len(c)

    best = 0.0

    def go(i, used, total):
        nonlocal best
        best = max(best, total)
        for j in range(i, len(cycles)):
            c = cycles[j]
            if not (set(c) & used):
                go(j + 1, used | set(c), total + weight(c))

    go(0, set(), 0.0)
    return best
