"""Cooperation regimes and benefit metrics for multi-country pools.

Three regimes: each country solves alone, national solves followed by an
international run on the leftovers, or one merged-pool solve under every
country's local restrictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import UnsupportedPolicyError
from .graph import CompatibilityGraph, Subgraph, country_subgraph, induced_subgraph
from .enumeration import Cycle, enumerate_cycles, enumerate_segments, make_cycle
from .model import (build_bounded_unbounded_model, build_cycle_model,
                    build_free_edge_model)
from .policy import PolicyConfig
from .solver import Assignment, ExchangePlan, decode, solve


class Regime(str, Enum):
    NO_COOPERATION = "local"
    CONSECUTIVE = "seq"
    MERGED = "merged"


@dataclass
class PolicyOutcome:
    regime: Regime
    plan: ExchangePlan
    per_country: dict[int, int]
    total: int
    timed_out: bool = False


def _lift_plan(plan: ExchangePlan, sub: Subgraph, parent: CompatibilityGraph) -> ExchangePlan:
    """Re-express a subgraph plan in the parent graph's node ids."""
    cycles = tuple(
        make_cycle(parent, tuple(sub.to_parent[v] for v in c.nodes)) for c in plan.cycles
    )
    chains = tuple(tuple(sub.to_parent[v] for v in ch) for ch in plan.chains)
    return ExchangePlan(cycles, chains, dict(plan.per_country), plan.total_transplants)


def _merge_plans(plans: list[ExchangePlan]) -> ExchangePlan:
    cycles: list[Cycle] = []
    chains: list[tuple[int, ...]] = []
    per_country: dict[int, int] = {}
    for p in plans:
        cycles.extend(p.cycles)
        chains.extend(p.chains)
        for k, v in p.per_country.items():
            per_country[k] = per_country.get(k, 0) + v
    return ExchangePlan(tuple(cycles), tuple(chains), per_country,
                        sum(p.total_transplants for p in plans))


def _solve_single_country(g: CompatibilityGraph, policy: PolicyConfig, k: int,
                          time_limit: float | None) -> tuple[ExchangePlan, bool]:
    """Solve one national pool: cycle model if bounded, free arcs if not."""
    cap = policy.country(k).cycle_cap
    if cap is not None:
        model = build_cycle_model(enumerate_cycles(g, policy), len(g.nodes))
    else:
        model = build_free_edge_model(g)
    a = solve(model, time_limit)
    return decode(model, a, g), a.timed_out


def run_no_cooperation(g: CompatibilityGraph, policy: PolicyConfig,
                       time_limit: float | None = None) -> PolicyOutcome:
    """Every country conducts its matching run separately."""
    plans = []
    timed_out = False
    for k in range(1, g.num_countries + 1):
        sub = country_subgraph(g, k)
        plan, to = _solve_single_country(sub.graph, policy, k, time_limit)
        timed_out |= to
        plans.append(_lift_plan(plan, sub, g))
    merged = _merge_plans(plans)
    return PolicyOutcome(Regime.NO_COOPERATION, merged, merged.per_country,
                         merged.total_transplants, timed_out)


def run_consecutive(g: CompatibilityGraph, policy: PolicyConfig,
                    time_limit: float | None = None) -> PolicyOutcome:
    """National runs first, then one merged-constraint run on the leftovers."""
    national = run_no_cooperation(g, policy, time_limit)
    matched = {v for c in national.plan.cycles for v in c.nodes}
    matched |= {v for ch in national.plan.chains for v in ch}
    remainder = induced_subgraph(g, set(range(len(g.nodes))) - matched)
    intl = run_merged(remainder.graph, policy, time_limit)
    combined = _merge_plans([national.plan, _lift_plan(intl.plan, remainder, g)])
    return PolicyOutcome(Regime.CONSECUTIVE, combined, combined.per_country,
                         combined.total_transplants, national.timed_out or intl.timed_out)


def run_merged(g: CompatibilityGraph, policy: PolicyConfig,
               time_limit: float | None = None) -> PolicyOutcome:
    """One global solve of the joint pool under all local restrictions."""
    caps = [policy.country(k).cycle_cap for k in range(1, g.num_countries + 1)]
    unbounded = [k for k, c in enumerate(caps, start=1) if c is None]
    if not unbounded:
        model = build_cycle_model(enumerate_cycles(g, policy), len(g.nodes))
    elif g.num_countries == 2 and len(unbounded) == 1:
        bounded = 3 - unbounded[0]
        sub = country_subgraph(g, bounded)
        cycles = [
            _lift_cycle(c, sub) for c in enumerate_cycles(sub.graph, policy)
        ]
        cycles = [make_cycle(g, c) for c in cycles]
        segments = enumerate_segments(g, policy, countries=(bounded,))
        model = build_bounded_unbounded_model(g, cycles, segments, bounded_country=bounded)
    else:
        raise UnsupportedPolicyError(
            "merged solve supports finite caps everywhere, or exactly one "
            "unbounded country in a two-country pool"
        )
    a = solve(model, time_limit)
    plan = decode(model, a, g)
    return PolicyOutcome(Regime.MERGED, plan, plan.per_country,
                         plan.total_transplants, a.timed_out)


def _lift_cycle(c: Cycle, sub: Subgraph) -> tuple[int, ...]:
    return tuple(sub.to_parent[v] for v in c.nodes)


def run_regime(regime: Regime, g: CompatibilityGraph, policy: PolicyConfig,
               time_limit: float | None = None) -> PolicyOutcome:
    runner = {
        Regime.NO_COOPERATION: run_no_cooperation,
        Regime.CONSECUTIVE: run_consecutive,
        Regime.MERGED: run_merged,
    }[regime]
    return runner(g, policy, time_limit)


def benefit_metrics(outcomes: dict[Regime, dict[int, float]]) -> dict[int, dict[str, float | None]]:
    """Per-country merged/local and consecutive/local transplant ratios.

    ``outcomes`` maps each regime to per-country transplant counts.
    Ratios with a zero local baseline are reported as None and must be
    excluded from averages by the caller.
    """
    local = outcomes.get(Regime.NO_COOPERATION, {})
    countries = set()
    for counts in outcomes.values():
        countries |= set(counts)
    out: dict[int, dict[str, float | None]] = {}
    for k in sorted(countries):
        base = local.get(k, 0)
        row: dict[str, float | None] = {}
        for regime, key in ((Regime.MERGED, "merged_over_local"),
                            (Regime.CONSECUTIVE, "seq_over_local")):
            if regime not in outcomes:
                continue
            row[key] = None if base == 0 else outcomes[regime].get(k, 0) / base
        out[k] = row
    return out
