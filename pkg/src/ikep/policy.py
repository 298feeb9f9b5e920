"""Per-country and international exchange restrictions.

Caps use ``None`` to mean "unbounded".  Segment lengths are measured in
nodes: an l-segment has l nodes and l-1 national arcs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigurationError

Cap = Optional[int]  # None = unbounded


def cap_value(cap: Cap) -> float:
    return math.inf if cap is None else cap


@dataclass(frozen=True)
class CountryPolicy:
    cycle_cap: Cap = 3           # max nodes in a national cycle
    segment_cap: Cap = None      # max nodes per segment of an international cycle
    max_segments: Cap = None     # max segments of this country per international cycle
    max_pairs: Cap = None        # max pairs of this country per international cycle
    chain_cap: Cap = None        # max pairs in a national chain

    def __post_init__(self):
        for name in ("cycle_cap", "segment_cap", "max_segments", "max_pairs", "chain_cap"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigurationError(f"{name} must be >= 1 or unbounded, got {v}")


@dataclass(frozen=True)
class PolicyConfig:
    countries: tuple[CountryPolicy, ...]
    international_cycle_cap: Cap = None   # max nodes in an international cycle
    max_countries: Cap = None             # max countries per international cycle
    chains_enabled: bool = False
    international_chain_cap: Cap = None   # max pairs in an international chain

    def __post_init__(self):
        if not self.countries:
            raise ConfigurationError("policy needs at least one country")
        if self.max_countries is not None and self.max_countries < 1:
            raise ConfigurationError("max_countries must be >= 1 or unbounded")

    @property
    def num_countries(self) -> int:
        return len(self.countries)

    def country(self, k: int) -> CountryPolicy:
        if not 1 <= k <= len(self.countries):
            raise ConfigurationError(f"unknown country {k}")
        return self.countries[k - 1]

    def segment_cap(self, k: int) -> Cap:
        """Segment cap for country k; defaults to one less than its cycle cap."""
        cp = self.country(k)
        if cp.segment_cap is not None:
            return cp.segment_cap
        if cp.cycle_cap is None:
            return None
        return max(1, cp.cycle_cap - 1)


def merged_policy(national_caps: tuple[Cap, ...], chains_enabled: bool = False) -> PolicyConfig:
    """Joint-pool policy for countries with the given national cycle caps.

    The international cycle cap is the larger individual bound, each
    country's segment cap is one less than its own bound, and segments per
    country are unrestricted unless some partner is unbounded, in which
    case every country is held to one segment per international cycle.
    """
    finite = [c for c in national_caps if c is not None]
    has_unbounded = len(finite) < len(national_caps)
    international = None if has_unbounded else (max(finite) if finite else None)
    one_segment = 1 if has_unbounded else None
    countries = tuple(
        CountryPolicy(
            cycle_cap=c,
            segment_cap=None if c is None else max(1, c - 1),
            max_segments=one_segment,
        )
        for c in national_caps
    )
    return PolicyConfig(
        countries=countries,
        international_cycle_cap=international,
        chains_enabled=chains_enabled,
    )


def single_country_policy(cycle_cap: Cap, chain_cap: Cap = None,
                          chains_enabled: bool = False) -> PolicyConfig:
    return PolicyConfig(
        countries=(CountryPolicy(cycle_cap=cycle_cap, chain_cap=chain_cap),),
        international_cycle_cap=cycle_cap,
        chains_enabled=chains_enabled,
        international_chain_cap=chain_cap,
    )


def restrict_to_country(policy: PolicyConfig, k: int) -> PolicyConfig:
    """Single-country view of ``policy`` for a national matching run."""
    cp = policy.country(k)
    return PolicyConfig(
        countries=(cp,),
        international_cycle_cap=cp.cycle_cap,
        chains_enabled=policy.chains_enabled,
        international_chain_cap=cp.chain_cap,
    )


__all__ = [
    "Cap", "cap_value", "CountryPolicy", "PolicyConfig",
    "merged_policy", "single_country_policy", "restrict_to_country",
]
