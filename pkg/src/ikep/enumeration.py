"""Enumeration of policy-valid exchange cycles and national segments.

Cycles are found by bounded depth-first search rooted at each node id,
exploring only larger ids, so every cycle is produced exactly once in its
canonical rotation (minimum id first).  The per-root searches are
independent, which makes the enumeration trivially partitionable across
parallel workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import UnsupportedPolicyError
from .graph import CompatibilityGraph, NodeKind
from .policy import PolicyConfig, cap_value


@dataclass(frozen=True)
class Cycle:
    nodes: tuple[int, ...]          # canonical rotation: minimum id first
    countries: tuple[int, ...]
    is_international: bool
    weight: float

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Segment:
    nodes: tuple[int, ...]          # directed national path; singletons allowed
    country: int

    @property
    def arc_count(self) -> int:
        return len(self.nodes) - 1


def make_cycle(g: CompatibilityGraph, nodes: tuple[int, ...]) -> Cycle:
    """Canonicalize and annotate a node sequence known to be a cycle in g."""
    pivot = nodes.index(min(nodes))
    nodes = nodes[pivot:] + nodes[:pivot]
    countries = tuple(g.country_of(v) for v in nodes)
    weight = sum(
        g.weight(nodes[i], nodes[(i + 1) % len(nodes)]) for i in range(len(nodes))
    )
    return Cycle(nodes, countries, len(set(countries)) > 1, weight)


def is_local(c: Cycle) -> bool:
    return len(set(c.countries)) == 1


def check_countries(c: Cycle, policy: PolicyConfig) -> bool:
    """Per-country pair caps and the cap on distinct countries in a cycle."""
    counts: dict[int, int] = {}
    for k in c.countries:
        counts[k] = counts.get(k, 0) + 1
    for k, count in counts.items():
        if count > cap_value(policy.country(k).max_pairs):
            return False
    return len(counts) <= cap_value(policy.max_countries)


def _circular_segments(countries: tuple[int, ...]) -> list[tuple[int, int]]:
    """Maximal same-country runs of a cyclic sequence as (country, length)."""
    n = len(countries)
    if len(set(countries)) == 1:
        return [(countries[0], n)]
    # rotate so position 0 starts a fresh segment
    start = next(i for i in range(n) if countries[i - 1] != countries[i])
    rotated = countries[start:] + countries[:start]
    runs: list[tuple[int, int]] = []
    for k in rotated:
        if runs and runs[-1][0] == k:
            runs[-1] = (k, runs[-1][1] + 1)
        else:
            runs.append((k, 1))
    return runs


def check_segments(c: Cycle, policy: PolicyConfig) -> bool:
    """Segment-length and segments-per-country caps for an international cycle.

    The segment containing the first node may wrap around the list
    boundary; the decomposition is rotation-invariant.
    """
    runs = _circular_segments(c.countries)
    seg_count: dict[int, int] = {}
    for k, length in runs:
        if length > cap_value(policy.segment_cap(k)):
            return False
        seg_count[k] = seg_count.get(k, 0) + 1
    for k, count in seg_count.items():
        if count > cap_value(policy.country(k).max_segments):
            return False
    return True


def is_valid_cycle(c: Cycle, policy: PolicyConfig) -> bool:
    """C1-C6 feasibility of a structurally valid cycle.

    Local cycles are valid only via their national bound; they never pass
    through the international checks even when those would accept them.
    """
    if is_local(c):
        return len(c) <= cap_value(policy.country(c.countries[0]).cycle_cap)
    return (
        len(c) <= cap_value(policy.international_cycle_cap)
        and check_countries(c, policy)
        and check_segments(c, policy)
    )


def _chain_runs(c: Cycle, artificial: frozenset[int]) -> list[list[int]]:
    """Split a cycle through artificial patients into its chains.

    Each chain is [altruist, pair, pair, ...]; the arc closing into the
    next altruist's artificial patient is not a transplant.
    """
    n = len(c.nodes)
    starts = [i for i, v in enumerate(c.nodes) if v in artificial]
    chains = []
    for idx, s in enumerate(starts):
        end = starts[(idx + 1) % len(starts)]
        run = [c.nodes[(s + j) % n] for j in range(((end - s) % n) or n)]
        chains.append(run)
    return chains


def is_valid_chain_cycle(c: Cycle, policy: PolicyConfig, artificial: frozenset[int],
                         countries_of: dict[int, int]) -> bool:
    """Validity of a reduced-graph cycle that passes through altruists.

    Only length caps apply to chains: a national chain with p pairs needs
    p <= chain cap of its country, an international one p <= the
    international chain cap.  Caps default to one less than the matching
    cycle cap.
    """
    if not policy.chains_enabled:
        return False
    for run in _chain_runs(c, artificial):
        pairs = run[1:]
        ks = {countries_of[v] for v in run}
        if len(ks) == 1:
            cp = policy.country(countries_of[run[0]])
            cap = cp.chain_cap
            if cap is None and cp.cycle_cap is not None:
                cap = cp.cycle_cap - 1
        else:
            cap = policy.international_chain_cap
            if cap is None and policy.international_cycle_cap is not None:
                cap = policy.international_cycle_cap - 1
        if len(pairs) > cap_value(cap):
            return False
    return True


def _search_bound(g: CompatibilityGraph, policy: PolicyConfig) -> int:
    present = sorted({n.country for n in g.nodes})
    international = len(present) > 1
    caps = [policy.country(k).cycle_cap for k in present]
    if international:
        caps.append(policy.international_cycle_cap)
    has_artificial = any(n.kind is NodeKind.ARTIFICIAL for n in g.nodes)
    if policy.chains_enabled and has_artificial:
        for k in present:
            cp = policy.country(k)
            cap = cp.chain_cap if cp.chain_cap is not None else (
                None if cp.cycle_cap is None else cp.cycle_cap - 1)
            caps.append(None if cap is None else cap + 1)
        if international:
            icap = policy.international_chain_cap
            if icap is None and policy.international_cycle_cap is not None:
                icap = policy.international_cycle_cap - 1
            caps.append(None if icap is None else icap + 1)
    if any(c is None for c in caps):
        raise UnsupportedPolicyError(
            "cycle enumeration needs finite caps; use the mixed or "
            "bounded/unbounded edge models for unbounded countries"
        )
    return max(caps)


def cycles_from_root(g: CompatibilityGraph, policy: PolicyConfig, root: int,
                     bound: int) -> list[Cycle]:
    artificial = frozenset(n.id for n in g.nodes if n.kind is NodeKind.ARTIFICIAL)
    countries_of = {n.id: n.country for n in g.nodes}
    found: list[Cycle] = []
    path = [root]
    on_path = {root}

    def dfs() -> None:
        v = path[-1]
        if len(path) >= 2 and g.has_arc(v, root):
            c = make_cycle(g, tuple(path))
            if artificial & on_path:
                ok = is_valid_chain_cycle(c, policy, artificial, countries_of)
            else:
                ok = is_valid_cycle(c, policy)
            if ok:
                found.append(c)
        if len(path) == bound:
            return
        for w in g.out_neighbors(v):
            if w > root and w not in on_path:
                path.append(w)
                on_path.add(w)
                dfs()
                path.pop()
                on_path.remove(w)

    dfs()
    return found


def enumerate_cycles(g: CompatibilityGraph, policy: PolicyConfig,
                     workers: int = 1) -> list[Cycle]:
    """All policy-valid cycles in canonical form, sorted by node tuple."""
    roots = range(len(g.nodes))
    if not roots:
        return []
    bound = _search_bound(g, policy)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(cycles_from_root, *zip(*[(g, policy, r, bound) for r in roots]))
            found = [c for chunk in chunks for c in chunk]
    else:
        found = [c for r in roots for c in cycles_from_root(g, policy, r, bound)]
    return sorted(set(found), key=lambda c: c.nodes)


def enumerate_segments(g: CompatibilityGraph, policy: PolicyConfig,
                       countries: tuple[int, ...] | None = None) -> list[Segment]:
    """All simple national paths (including singletons) within segment caps."""
    if countries is None:
        countries = tuple(range(1, g.num_countries + 1))
    found: list[Segment] = []
    for k in countries:
        cap = policy.segment_cap(k)
        if cap is None:
            raise UnsupportedPolicyError(
                f"country {k} has an unbounded segment cap; segments cannot be enumerated"
            )
        members = set(g.nodes_of_country(k))
        for start in sorted(members):
            path = [start]
            on_path = {start}

            def dfs() -> None:
                found.append(Segment(tuple(path), k))
                if len(path) == cap:
                    return
                for w in g.out_neighbors(path[-1]):
                    if w in members and w not in on_path:
                        path.append(w)
                        on_path.add(w)
                        dfs()
                        path.pop()
                        on_path.remove(w)

            dfs()
    return found
