import random

import pytest

from conftest import oracle_cycles, random_finite_policy, random_graph

from ikep.enumeration import (Segment, enumerate_cycles, enumerate_segments,
                              is_valid_cycle, make_cycle)
from ikep.errors import UnsupportedPolicyError
from ikep.graph import Arc, CompatibilityGraph, Node, NodeKind
from ikep.policy import CountryPolicy, PolicyConfig, merged_policy


def mk(countries, arcs):
    nodes = [Node(i, c, NodeKind.PAIR, "O", "O", 0.0)
             for i, c in enumerate(countries)]
    return CompatibilityGraph(nodes, [Arc(*a) for a in arcs], max(countries))


def test_canonical_form_is_rotation_invariant():
    g = mk([1, 1, 1], [(0, 1), (1, 2), (2, 0)])
    a = make_cycle(g, (0, 1, 2))
    b = make_cycle(g, (1, 2, 0))
    c = make_cycle(g, (2, 0, 1))
    assert a == b == c
    assert a.nodes[0] == 0


def test_validity_checks_each_cap():
    g = mk([1, 1, 2, 2], [(0, 1), (1, 2), (2, 3), (3, 0)])
    c = make_cycle(g, (0, 1, 2, 3))
    ok = merged_policy((4, 4))
    assert c.is_international
    assert is_valid_cycle(c, ok)
    short = PolicyConfig(countries=(CountryPolicy(3), CountryPolicy(3)),
                         international_cycle_cap=3)
    assert not is_valid_cycle(c, short)
    tight_seg = PolicyConfig(
        countries=(CountryPolicy(3, segment_cap=1), CountryPolicy(3)),
        international_cycle_cap=4)
    assert not is_valid_cycle(c, tight_seg)
    few_pairs = PolicyConfig(
        countries=(CountryPolicy(3, max_pairs=1), CountryPolicy(3)),
        international_cycle_cap=4)
    assert not is_valid_cycle(c, few_pairs)


def test_local_cycles_only_face_the_national_cap():
    g = mk([1, 1, 1, 1], [(0, 1), (1, 2), (2, 3), (3, 0)])
    pol = PolicyConfig(countries=(CountryPolicy(4),), international_cycle_cap=2)
    found = enumerate_cycles(g, pol)
    assert [c.nodes for c in found] == [(0, 1, 2, 3)]


def test_matches_bruteforce_oracle():
    rng = random.Random(123)
    for _ in range(60):
        n = rng.randint(2, 8)
        g = random_graph(rng, n, rng.uniform(0.3, 0.8))
        pol = random_finite_policy(rng)
        got = {c.nodes for c in enumerate_cycles(g, pol)}
        assert got == oracle_cycles(g, pol)


def test_parallel_enumeration_is_identical():
    rng = random.Random(7)
    g = random_graph(rng, 8, 0.6)
    pol = merged_policy((3, 4))
    assert enumerate_cycles(g, pol) == enumerate_cycles(g, pol, workers=2)


def test_unbounded_policy_is_rejected():
    g = mk([1, 2], [(0, 1), (1, 0)])
    with pytest.raises(UnsupportedPolicyError):
        enumerate_cycles(g, merged_policy((3, None)))


def test_segment_enumeration():
    g = mk([1, 1, 2], [(0, 1), (1, 2), (2, 0)])
    pol = merged_policy((3, 3))
    segs = enumerate_segments(g, pol)
    by_country = {}
    for s in segs:
        by_country.setdefault(s.country, set()).add(s.nodes)
    # country 1: both singletons plus the national path 0-1
    assert by_country[1] == {(0,), (1,), (0, 1)}
    assert by_country[2] == {(2,)}
    assert all(isinstance(s, Segment) for s in segs)
    only2 = enumerate_segments(g, pol, countries=(2,))
    assert {s.nodes for s in only2} == {(2,)}
