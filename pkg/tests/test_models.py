import random

import pytest

from conftest import random_graph

from ikep.enumeration import enumerate_cycles, enumerate_segments, make_cycle
from ikep.errors import ConfigurationError, ModelError
from ikep.graph import Arc, CompatibilityGraph, Node, NodeKind, country_subgraph
from ikep.lp_format import export_lp_text, parse_lp_text
from ikep.model import (IpModel, add_layer_constraints,
                        build_bounded_unbounded_model, build_cycle_model,
                        build_edge_model, build_free_edge_model,
                        build_mixed_model)
from ikep.policy import merged_policy
from ikep.solver import solve_exhaustive


def mk(countries, arcs):
    nodes = [Node(i, c, NodeKind.PAIR, "O", "O", 0.0)
             for i, c in enumerate(countries)]
    return CompatibilityGraph(nodes, [Arc(*a) for a in arcs], max(countries))


def triangle():
    return mk([1, 1, 1], [(0, 1), (1, 2), (2, 0)])


def test_model_validates_terms():
    m = IpModel()
    i = m.add_var("x", None, None)
    with pytest.raises(ModelError):
        m.add_constraint("c", [(i, 1.0), (i, 2.0)], "<=", 1.0, "t")
    with pytest.raises(ModelError):
        m.add_constraint("c", [(i + 5, 1.0)], "<=", 1.0, "t")


def test_cycle_model_packs_per_node():
    g = triangle()
    cycles = enumerate_cycles(g, merged_policy((3,)))
    m = build_cycle_model(cycles, 3)
    assert len(m.variables) == 1
    assert m.tag_counts()["cycle_node_pack"] == 3
    a = solve_exhaustive(m)
    assert a.objective == 3


def test_edge_model_path_cap_blocks_long_cycles():
    g = triangle()
    assert solve_exhaustive(build_edge_model(g, 2)).objective == 0
    assert solve_exhaustive(build_edge_model(g, 3)).objective == 3
    with pytest.raises(ConfigurationError):
        build_edge_model(g, None)


def test_free_edge_model_has_no_length_cap():
    g = mk([1] * 5, [(i, (i + 1) % 5) for i in range(5)])
    assert solve_exhaustive(build_free_edge_model(g)).objective == 5


def _mixed(g, policy):
    cycles = []
    for k in range(1, g.num_countries + 1):
        sub = country_subgraph(g, k)
        for c in enumerate_cycles(sub.graph, policy):
            cycles.append(make_cycle(g, tuple(sub.to_parent[v] for v in c.nodes)))
    return build_mixed_model(g, cycles, enumerate_segments(g, policy), policy)


def test_mixed_model_handles_national_and_international_cycles():
    pol = merged_policy((3, 3))
    national = mk([1, 1, 2, 2], [(0, 1), (1, 0), (2, 3), (3, 2)])
    assert solve_exhaustive(_mixed(national, pol), max_vars=40).objective == 4
    international = mk([1, 2], [(0, 1), (1, 0)])
    assert solve_exhaustive(_mixed(international, pol), max_vars=40).objective == 2


def test_layer_constraints_enforce_country_count():
    g = mk([1, 2, 3], [(0, 1), (1, 2), (2, 0)])
    pol2 = merged_policy((3, 3, 3))
    m = _mixed(g, pol2)
    from dataclasses import replace
    capped = replace(pol2, max_countries=2)
    m2 = add_layer_constraints(_mixed(g, capped), g, T=None, policy=capped)
    assert solve_exhaustive(m, max_vars=40).objective == 3
    assert solve_exhaustive(m2, max_vars=60).objective == 0


def _atcz(g, policy, bounded=1):
    sub = country_subgraph(g, bounded)
    cycles = [make_cycle(g, tuple(sub.to_parent[v] for v in c.nodes))
              for c in enumerate_cycles(sub.graph, policy)]
    return build_bounded_unbounded_model(
        g, cycles, enumerate_segments(g, policy, countries=(bounded,)),
        bounded_country=bounded)


def test_bounded_unbounded_model():
    pol = merged_policy((3, None))
    g = mk([1, 2, 2], [(0, 1), (1, 2), (2, 0)])
    assert solve_exhaustive(_atcz(g, pol), max_vars=40).objective == 3
    # a long cycle entirely inside the unbounded country stays legal
    g2 = mk([1] + [2] * 5, [(i + 1, (i + 1) % 5 + 1) for i in range(5)])
    assert solve_exhaustive(_atcz(g2, pol), max_vars=40).objective == 5
    # two bounded-country segments in one cycle are forbidden
    g3 = mk([1, 2, 1, 2], [(0, 1), (1, 2), (2, 3), (3, 0)])
    assert solve_exhaustive(_atcz(g3, pol), max_vars=40).objective == 0


def test_lp_roundtrip_preserves_structure():
    rng = random.Random(9)
    for _ in range(10):
        g = random_graph(rng, 6, 0.5)
        m = build_edge_model(g, 3)
        parsed = parse_lp_text(export_lp_text(m))
        assert len(parsed.binaries) == len(m.variables)
        assert len(parsed.constraints) == len(m.constraints)
        names = {v.name for v in m.variables}
        assert set(parsed.objective) <= names
