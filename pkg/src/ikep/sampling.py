"""Random instance generation.

The sampling model: donor and patient blood groups are drawn from a
configurable frequency table, each patient gets a panel-reactive antibody
(PRA) level from a discrete mixture, and arc (i, j) is present iff donor i
is ABO-compatible with patient j and a Bernoulli crossmatch draw with
success probability 1 - pra_j succeeds.  All draws are deterministic given
the seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import ConfigurationError
from .graph import Arc, CompatibilityGraph, Node, NodeKind, blood_compatible

# Rounded European-style population frequencies; configurable, not a claim
# of registry fidelity.
DEFAULT_BLOOD_FREQS = {"O": 0.44, "A": 0.42, "B": 0.10, "AB": 0.04}

# (pra level, probability) mixture: mostly low-sensitised patients with a
# highly-sensitised tail.
DEFAULT_PRA_LEVELS = ((0.05, 0.70), (0.45, 0.20), (0.90, 0.10))


@dataclass(frozen=True)
class CountrySpec:
    pairs: int
    altruists: int = 0

    def __post_init__(self):
        if self.pairs < 0 or self.altruists < 0:
            raise ConfigurationError("node counts must be >= 0")


@dataclass(frozen=True)
class InstanceSpec:
    countries: tuple[CountrySpec, ...]
    blood_freqs: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_BLOOD_FREQS))
    pra_levels: tuple[tuple[float, float], ...] = DEFAULT_PRA_LEVELS
    # Reject pairs whose donor could donate directly to their own patient;
    # real pools consist of incompatible pairs.
    exclude_direct_compatible: bool = False
    seed: int = 0

    def __post_init__(self):
        _check_distribution(dict(self.blood_freqs), "blood_freqs")
        _check_distribution({v: p for v, p in self.pra_levels}, "pra_levels")
        for v, _ in self.pra_levels:
            if not 0 <= v <= 1:
                raise ConfigurationError(f"pra level {v} outside [0,1]")


def _check_distribution(freqs: dict, name: str) -> None:
    if not freqs:
        raise ConfigurationError(f"{name} is empty")
    total = sum(freqs.values())
    if any(p < 0 for p in freqs.values()) or abs(total - 1.0) > 1e-9:
        raise ConfigurationError(f"{name} must be non-negative and sum to 1, got total {total}")


def _draw(rng: random.Random, table: list[tuple]) -> object:
    u = rng.random()
    acc = 0.0
    for value, p in table:
        acc += p
        if u < acc:
            return value
    return table[-1][0]


def sample_instance(spec: InstanceSpec) -> CompatibilityGraph:
    rng = random.Random(spec.seed)
    bloods = sorted(spec.blood_freqs.items())
    pras = list(spec.pra_levels)
    nodes: list[Node] = []
    nid = 0
    for country_idx, cs in enumerate(spec.countries, start=1):
        for _ in range(cs.pairs):
            while True:
                donor = _draw(rng, bloods)
                patient = _draw(rng, bloods)
                pra = _draw(rng, pras)
                if not spec.exclude_direct_compatible:
                    break
                # incompatible pair: ABO mismatch, or a positive crossmatch draw
                if not blood_compatible(donor, patient) or rng.random() < pra:
                    break
            nodes.append(Node(nid, country_idx, NodeKind.PAIR, donor, patient, pra))
            nid += 1
        for _ in range(cs.altruists):
            nodes.append(Node(nid, country_idx, NodeKind.ALTRUIST, _draw(rng, bloods)))
            nid += 1
    arcs: list[Arc] = []
    for i in nodes:
        for j in nodes:
            if i.id == j.id or j.kind is not NodeKind.PAIR:
                continue
            if blood_compatible(i.donor_blood, j.patient_blood) and rng.random() < 1 - j.patient_pra:
                arcs.append(Arc(i.id, j.id, 1.0))
    return CompatibilityGraph(nodes, arcs, len(spec.countries))
