"""Multi-period matching simulation over a rolling patient pool.

Pairs arrive uniformly over quarterly matching runs, participate in at
most a fixed number of runs, and leave the pool unmatched afterwards.
All cooperation regimes are replayed on identical instances and arrival
schedules so their outcomes are directly comparable.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigurationError
from .graph import Arc, CompatibilityGraph, Node, induced_subgraph
from .policies import Regime, run_regime
from .policy import Cap, merged_policy
from .sampling import CountrySpec, InstanceSpec, sample_instance

DEFAULT_REGIMES = (Regime.NO_COOPERATION, Regime.CONSECUTIVE, Regime.MERGED)

# Tie-break nudge: pairs closer to dropping out are preferred among
# equally sized matchings.  Small enough that total perturbation over a
# whole stage stays below 1, so transplant counts are never affected.
_URGENCY_EPS = 1e-3


@dataclass(frozen=True)
class SimulationConfig:
    pairs_per_country: int = 100
    caps: tuple[Cap, ...] = (3, 3)
    stages: int = 12
    instances: int = 20
    max_runs: int = 4                      # matching runs a pair stays in the pool
    ratio: tuple[int, ...] | None = None   # relative pool sizes, e.g. (1, 2)
    regimes: tuple[Regime, ...] = DEFAULT_REGIMES
    exclude_direct_compatible: bool = True
    seed: int = 0
    time_limit: float | None = None

    def __post_init__(self):
        if self.pairs_per_country < 1 or self.stages < 1 or self.instances < 1:
            raise ConfigurationError("pool size, stages and instances must be >= 1")
        if self.max_runs < 1:
            raise ConfigurationError("max_runs must be >= 1")
        if self.ratio is not None and len(self.ratio) != len(self.caps):
            raise ConfigurationError("ratio needs one entry per country")

    @property
    def num_countries(self) -> int:
        return len(self.caps)

    def country_sizes(self) -> tuple[int, ...]:
        """Pool size per country after applying the ratio."""
        if self.ratio is None:
            return (self.pairs_per_country,) * self.num_countries
        top = max(self.ratio)
        return tuple(
            max(1, math.floor(self.pairs_per_country * r / top)) for r in self.ratio
        )


@dataclass(frozen=True)
class StageRecord:
    instance: int
    regime: str
    stage: int
    country: int
    transplants: int
    dropouts: int
    pool: int   # active unmatched pairs of this country when the run starts


@dataclass(frozen=True)
class RunRecord:
    instance: int
    regime: str
    country: int
    transplants: int
    dropouts: int
    timed_out: bool


@dataclass(frozen=True)
class PairFate:
    """Per-pair outcome of one regime replay: stage matched or dropped."""
    matched_stage: dict[int, int]
    dropped_stage: dict[int, int]


@dataclass
class SimulationResult:
    config: SimulationConfig
    stage_records: list[StageRecord] = field(default_factory=list)
    run_records: list[RunRecord] = field(default_factory=list)
    # (instance, regime name) -> per-pair fates; not persisted to CSV
    fates: dict[tuple[int, str], PairFate] = field(default_factory=dict)

    def totals(self, regime: Regime | str) -> dict[int, int]:
        name = regime.value if isinstance(regime, Regime) else regime
        out: dict[int, int] = {}
        for r in self.run_records:
            if r.regime == name:
                out[r.country] = out.get(r.country, 0) + r.transplants
        return out

    def instances_timed_out(self) -> set[int]:
        return {r.instance for r in self.run_records if r.timed_out}


def build_instance(cfg: SimulationConfig, index: int) -> CompatibilityGraph:
    """Deterministic instance for the given replication index.

    Node ids are shuffled after sampling: the generator emits nodes
    blocked by country, and deterministic solver tie-breaking would
    otherwise hand every tie to the first country.  Registration order
    carries no meaning, so a random interleaving keeps ties neutral.
    """
    sizes = cfg.country_sizes()
    base_seed = cfg.seed * 1_000_003 + index
    spec = InstanceSpec(
        countries=tuple(CountrySpec(pairs=s) for s in sizes),
        exclude_direct_compatible=cfg.exclude_direct_compatible,
        seed=base_seed,
    )
    g = sample_instance(spec)
    rng = random.Random(base_seed * 7 + 3)
    order = list(range(len(g.nodes)))
    rng.shuffle(order)                     # order[new_id] = old_id
    new_id = {old: new for new, old in enumerate(order)}
    nodes = [Node(new, g.nodes[old].country, g.nodes[old].kind,
                  g.nodes[old].donor_blood, g.nodes[old].patient_blood,
                  g.nodes[old].patient_pra)
             for new, old in enumerate(order)]
    arcs = [Arc(new_id[a.source], new_id[a.target], a.weight) for a in g.arcs]
    return CompatibilityGraph(nodes, arcs, g.num_countries)


def schedule_arrivals(cfg: SimulationConfig, index: int, n: int) -> tuple[int, ...]:
    """Arrival stage per node, uniform over the horizon and seed-stable."""
    rng = random.Random((cfg.seed * 1_000_003 + index) * 7 + 1)
    return tuple(rng.randrange(cfg.stages) for _ in range(n))


def _with_urgency_weights(g: CompatibilityGraph, to_parent: tuple[int, ...],
                          arrivals: tuple[int, ...], t: int) -> CompatibilityGraph:
    """Bias arc weights toward recipients who have waited longer."""
    arcs = [Arc(a.source, a.target,
                a.weight + _URGENCY_EPS * (t - arrivals[to_parent[a.target]]))
            for a in g.arcs]
    return CompatibilityGraph(g.nodes, arcs, g.num_countries)


def _replay_regime(g: CompatibilityGraph, arrivals: tuple[int, ...],
                   regime: Regime, cfg: SimulationConfig,
                   instance: int) -> tuple[list[StageRecord], list[RunRecord], PairFate]:
    policy = merged_policy(cfg.caps)
    matched: set[int] = set()
    gone: set[int] = set()
    matched_stage: dict[int, int] = {}
    dropped_stage: dict[int, int] = {}
    stage_rows: list[StageRecord] = []
    transplants = {k: 0 for k in range(1, cfg.num_countries + 1)}
    dropouts = {k: 0 for k in range(1, cfg.num_countries + 1)}
    timed_out = False
    for t in range(cfg.stages):
        active = [v for v in range(len(g.nodes))
                  if arrivals[v] <= t and v not in matched and v not in gone]
        pool = {k: 0 for k in transplants}
        for v in active:
            pool[g.country_of(v)] += 1
        sub = induced_subgraph(g, active)
        stage_graph = _with_urgency_weights(sub.graph, sub.to_parent, arrivals, t)
        outcome = run_regime(regime, stage_graph, policy, cfg.time_limit)
        timed_out |= outcome.timed_out
        newly = {sub.to_parent[v]
                 for c in outcome.plan.cycles for v in c.nodes}
        newly |= {sub.to_parent[v] for ch in outcome.plan.chains for v in ch}
        matched |= newly
        for v in newly:
            matched_stage[v] = t
        stage_tx = {k: 0 for k in transplants}
        for v in newly:
            stage_tx[g.country_of(v)] += 1
        leavers = [v for v in active
                   if v not in matched and arrivals[v] + cfg.max_runs - 1 == t]
        gone.update(leavers)
        for v in leavers:
            dropped_stage[v] = t
        stage_drop = {k: 0 for k in transplants}
        for v in leavers:
            stage_drop[g.country_of(v)] += 1
        for k in transplants:
            transplants[k] += stage_tx[k]
            dropouts[k] += stage_drop[k]
            stage_rows.append(StageRecord(instance, regime.value, t, k,
                                          stage_tx[k], stage_drop[k], pool[k]))
    run_rows = [RunRecord(instance, regime.value, k, transplants[k],
                          dropouts[k], timed_out)
                for k in sorted(transplants)]
    return stage_rows, run_rows, PairFate(matched_stage, dropped_stage)


def run_simulation(cfg: SimulationConfig) -> SimulationResult:
    """Replay every regime over the shared instances and arrival schedules."""
    result = SimulationResult(cfg)
    for i in range(cfg.instances):
        g = build_instance(cfg, i)
        arrivals = schedule_arrivals(cfg, i, len(g.nodes))
        for regime in cfg.regimes:
            stage_rows, run_rows, fate = _replay_regime(g, arrivals, regime, cfg, i)
            result.stage_records.extend(stage_rows)
            result.run_records.extend(run_rows)
            result.fates[(i, regime.value)] = fate
    return result


@dataclass(frozen=True)
class SweepCell:
    caps: tuple[Cap, ...]
    ratio: tuple[int, ...] | None
    result: SimulationResult


def sweep(cfg: SimulationConfig, caps_grid: list[tuple[Cap, ...]],
          ratios: list[tuple[int, ...] | None] | None = None) -> list[SweepCell]:
    """One simulation per (caps, ratio) cell, all on the same base seed.

    Cells that share a ratio reuse identical instances and arrivals, so
    differences between cells with the same ratio come from the caps alone.
    """
    if ratios is None:
        ratios = [cfg.ratio]
    cells = []
    for caps in caps_grid:
        for ratio in ratios:
            cell_cfg = replace(cfg, caps=caps, ratio=ratio)
            cells.append(SweepCell(caps, ratio, run_simulation(cell_cfg)))
    return cells


# -- CSV persistence ---------------------------------------------------

_STAGE_FIELDS = ["instance", "regime", "stage", "country",
                 "transplants", "dropouts", "pool"]
_RUN_FIELDS = ["instance", "regime", "country", "transplants",
               "dropouts", "timed_out"]


def write_stage_report(result: SimulationResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_STAGE_FIELDS)
        for r in result.stage_records:
            w.writerow([r.instance, r.regime, r.stage, r.country,
                        r.transplants, r.dropouts, r.pool])


def read_stage_report(path: str | Path) -> list[StageRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _STAGE_FIELDS:
            raise ConfigurationError(f"unexpected stage report header in {path}")
        return [StageRecord(int(r["instance"]), r["regime"], int(r["stage"]),
                            int(r["country"]), int(r["transplants"]),
                            int(r["dropouts"]), int(r["pool"]))
                for r in reader]


def write_run_report(result: SimulationResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_RUN_FIELDS)
        for r in result.run_records:
            w.writerow([r.instance, r.regime, r.country, r.transplants,
                        r.dropouts, int(r.timed_out)])


def read_run_report(path: str | Path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _RUN_FIELDS:
            raise ConfigurationError(f"unexpected run report header in {path}")
        return [RunRecord(int(r["instance"]), r["regime"], int(r["country"]),
                          int(r["transplants"]), int(r["dropouts"]),
                          bool(int(r["timed_out"])))
                for r in reader]
