"""Country-partitioned compatibility graphs and the text instance format.

Nodes are patient-donor pairs or altruistic donors, arcs are virtual
crossmatch-compatible donations.  Graphs are immutable after construction
and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, TextIO

from .errors import InstanceFormatError, ModelError

NodeId = int
CountryId = int

BLOOD_GROUPS = ("O", "A", "B", "AB")

# donor group -> patient groups that can receive from it
_ABO_COMPATIBLE = {
    "O": {"O", "A", "B", "AB"},
    "A": {"A", "AB"},
    "B": {"B", "AB"},
    "AB": {"AB"},
}


def blood_compatible(donor: str, patient: str) -> bool:
    return patient in _ABO_COMPATIBLE[donor]


class NodeKind(str, Enum):
    PAIR = "pair"
    ALTRUIST = "altruist"
    # An altruistic donor extended with an artificial patient who is
    # compatible with every donor; only appears in reduced graphs.
    ARTIFICIAL = "artificial"


@dataclass(frozen=True)
class Node:
    id: NodeId
    country: CountryId
    kind: NodeKind = NodeKind.PAIR
    donor_blood: Optional[str] = None
    patient_blood: Optional[str] = None
    patient_pra: Optional[float] = None

    @property
    def has_patient(self) -> bool:
        return self.kind is NodeKind.PAIR

    @property
    def has_donor(self) -> bool:
        return True  # every node kind brings a donor


@dataclass(frozen=True)
class Arc:
    source: NodeId
    target: NodeId
    weight: float = 1.0


class CompatibilityGraph:
    """Directed compatibility graph with a partition of nodes into countries."""

    def __init__(self, nodes: Sequence[Node], arcs: Sequence[Arc], num_countries: int):
        nodes = tuple(nodes)
        if [n.id for n in nodes] != list(range(len(nodes))):
            raise ModelError("node ids must be dense 0..n-1 in order")
        for n in nodes:
            if not 1 <= n.country <= num_countries:
                raise ModelError(f"node {n.id} has country {n.country} outside 1..{num_countries}")
            if n.kind is not NodeKind.PAIR and (n.patient_blood is not None or n.patient_pra is not None):
                raise ModelError(f"node {n.id}: altruistic donors carry no patient attributes")
        seen = set()
        out: list[list[NodeId]] = [[] for _ in nodes]
        inn: list[list[NodeId]] = [[] for _ in nodes]
        weights: dict[tuple[NodeId, NodeId], float] = {}
        for a in arcs:
            if a.source == a.target:
                raise ModelError(f"self-arc at node {a.source}")
            if not (0 <= a.source < len(nodes) and 0 <= a.target < len(nodes)):
                raise ModelError(f"arc ({a.source},{a.target}) references unknown node")
            if (a.source, a.target) in seen:
                raise ModelError(f"duplicate arc ({a.source},{a.target})")
            if nodes[a.target].kind is NodeKind.ALTRUIST:
                raise ModelError(f"arc ({a.source},{a.target}) points into an altruistic donor")
            if a.weight < 0:
                raise ModelError(f"arc ({a.source},{a.target}) has negative weight")
            seen.add((a.source, a.target))
            out[a.source].append(a.target)
            inn[a.target].append(a.source)
            weights[(a.source, a.target)] = a.weight
        self.nodes = nodes
        self.arcs = tuple(sorted(arcs, key=lambda a: (a.source, a.target)))
        self.num_countries = num_countries
        self._out = tuple(tuple(sorted(v)) for v in out)
        self._in = tuple(tuple(sorted(v)) for v in inn)
        self._weights = weights
        by_country: list[list[NodeId]] = [[] for _ in range(num_countries)]
        for n in nodes:
            by_country[n.country - 1].append(n.id)
        self._by_country = tuple(tuple(v) for v in by_country)

    # -- basic queries -------------------------------------------------

    def __len__(self) -> int:
        return len(self.nodes)

    def has_arc(self, i: NodeId, j: NodeId) -> bool:
        return (i, j) in self._weights

    def weight(self, i: NodeId, j: NodeId) -> float:
        return self._weights[(i, j)]

    def out_neighbors(self, i: NodeId) -> tuple[NodeId, ...]:
        return self._out[i]

    def in_neighbors(self, i: NodeId) -> tuple[NodeId, ...]:
        return self._in[i]

    def country_of(self, i: NodeId) -> CountryId:
        return self.nodes[i].country

    def nodes_of_country(self, k: CountryId) -> tuple[NodeId, ...]:
        self._check_country(k)
        return self._by_country[k - 1]

    def is_international(self, i: NodeId, j: NodeId) -> bool:
        return self.nodes[i].country != self.nodes[j].country

    def national_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if not self.is_international(a.source, a.target)]

    def international_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if self.is_international(a.source, a.target)]

    def arcs_into_country(self, k: CountryId) -> list[Arc]:
        """Arcs whose recipient patient lives in country k."""
        self._check_country(k)
        return [a for a in self.arcs if self.country_of(a.target) == k]

    def _check_country(self, k: CountryId) -> None:
        if not 1 <= k <= self.num_countries:
            raise ModelError(f"unknown country {k}")


@dataclass(frozen=True)
class Subgraph:
    """An induced subgraph with its mapping back to the parent graph."""

    graph: CompatibilityGraph
    to_parent: tuple[NodeId, ...]  # subgraph id -> parent id


def induced_subgraph(g: CompatibilityGraph, keep: Iterable[NodeId]) -> Subgraph:
    ids = sorted(set(keep))
    remap = {old: new for new, old in enumerate(ids)}
    nodes = [
        Node(remap[i], g.nodes[i].country, g.nodes[i].kind, g.nodes[i].donor_blood,
             g.nodes[i].patient_blood, g.nodes[i].patient_pra)
        for i in ids
    ]
    arcs = [
        Arc(remap[a.source], remap[a.target], a.weight)
        for a in g.arcs
        if a.source in remap and a.target in remap
    ]
    return Subgraph(CompatibilityGraph(nodes, arcs, g.num_countries), tuple(ids))


def country_subgraph(g: CompatibilityGraph, k: CountryId) -> Subgraph:
    """Induced subgraph on the nodes of country k, with densified ids."""
    g._check_country(k)
    return induced_subgraph(g, g.nodes_of_country(k))


def reduce_chains_to_cycles(g: CompatibilityGraph) -> CompatibilityGraph:
    """Give every altruistic donor an artificial patient compatible with all donors.

    Chains in the input correspond one-to-one with cycles through the
    altruist node in the output.  The added arcs carry weight 0 so that
    unit-weight objectives keep counting true transplants.  Idempotent on
    already-reduced graphs.
    """
    altruists = [n.id for n in g.nodes if n.kind in (NodeKind.ALTRUIST, NodeKind.ARTIFICIAL)]
    if not altruists:
        return g
    nodes = [
        Node(n.id, n.country, NodeKind.ARTIFICIAL if n.id in set(altruists) else n.kind,
             n.donor_blood, n.patient_blood, n.patient_pra)
        for n in g.nodes
    ]
    arcs = list(g.arcs)
    present = {(a.source, a.target) for a in arcs}
    for a_id in altruists:
        for v in range(len(g.nodes)):
            if v != a_id and (v, a_id) not in present:
                arcs.append(Arc(v, a_id, 0.0))
                present.add((v, a_id))
    return CompatibilityGraph(nodes, arcs, g.num_countries)


# -- instance file format ---------------------------------------------
#
#   kep <num_nodes> <num_countries>
#   node <id> <country> <kind> <donor_blood> [<patient_blood> <pra>]
#   arc <src> <dst> <weight>

_KIND_TOKENS = {k.value: k for k in NodeKind}


def write_instance(g: CompatibilityGraph, fh: TextIO) -> None:
    fh.write(f"kep {len(g.nodes)} {g.num_countries}\n")
    for n in g.nodes:
        line = f"node {n.id} {n.country} {n.kind.value} {n.donor_blood or '-'}"
        if n.kind is NodeKind.PAIR:
            line += f" {n.patient_blood or '-'} {n.patient_pra if n.patient_pra is not None else 0}"
        fh.write(line + "\n")
    for a in g.arcs:
        fh.write(f"arc {a.source} {a.target} {a.weight:g}\n")


def parse_instance(fh: TextIO) -> CompatibilityGraph:
    nodes: list[Node] = []
    arcs: list[Arc] = []
    header = None
    for line_no, raw in enumerate(fh, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "kep" or len(parts) != 3:
                raise InstanceFormatError(line_no, "expected header 'kep <num_nodes> <num_countries>'")
            try:
                header = (int(parts[1]), int(parts[2]))
            except ValueError:
                raise InstanceFormatError(line_no, "header counts must be integers")
            continue
        if parts[0] == "node":
            if len(parts) not in (5, 7):
                raise InstanceFormatError(line_no, "node line needs 4 or 6 fields")
            try:
                nid, country = int(parts[1]), int(parts[2])
            except ValueError:
                raise InstanceFormatError(line_no, "node id and country must be integers")
            kind = _KIND_TOKENS.get(parts[3])
            if kind is None:
                raise InstanceFormatError(line_no, f"unknown node kind {parts[3]!r}")
            donor = None if parts[4] == "-" else parts[4]
            if donor is not None and donor not in BLOOD_GROUPS:
                raise InstanceFormatError(line_no, f"unknown blood group {donor!r}")
            patient = pra = None
            if len(parts) == 7:
                if kind is not NodeKind.PAIR:
                    raise InstanceFormatError(line_no, "patient fields only valid for pair nodes")
                patient = None if parts[5] == "-" else parts[5]
                if patient is not None and patient not in BLOOD_GROUPS:
                    raise InstanceFormatError(line_no, f"unknown blood group {patient!r}")
                try:
                    pra = float(parts[6])
                except ValueError:
                    raise InstanceFormatError(line_no, "pra must be a number")
                if not 0 <= pra <= 1:
                    raise InstanceFormatError(line_no, "pra must lie in [0,1]")
            nodes.append(Node(nid, country, kind, donor, patient, pra))
        elif parts[0] == "arc":
            if len(parts) != 4:
                raise InstanceFormatError(line_no, "arc line needs 3 fields")
            try:
                arcs.append(Arc(int(parts[1]), int(parts[2]), float(parts[3])))
            except ValueError:
                raise InstanceFormatError(line_no, "arc fields must be numeric")
        else:
            raise InstanceFormatError(line_no, f"unknown record {parts[0]!r}")
    if header is None:
        raise InstanceFormatError(0, "empty instance file")
    if header[0] != len(nodes):
        raise InstanceFormatError(0, f"header announces {header[0]} nodes, found {len(nodes)}")
    try:
        return CompatibilityGraph(nodes, arcs, header[1])
    except ModelError as exc:
        raise InstanceFormatError(0, str(exc))
