"""Solver-independent binary programs for the exchange formulations.

Four builders are provided:

* ``build_cycle_model``     -- one variable per pre-enumerated cycle.
* ``build_edge_model``      -- arc variables with path-based length caps.
* ``build_mixed_model``     -- national cycle variables, segment variables
  and a national/international arc-variable split, linked so that arcs are
  selected exactly when their covering cycle or segment is selected.
* ``build_bounded_unbounded_model`` -- the two-country case where one
  country enumerates cycles and segments while the other keeps unbounded
  cycles, glued together through per-node layers so that every
  international cycle has one segment per country.

``add_layer_constraints`` extends a mixed model with layered arc copies to
express per-cycle caps on segments, pairs and countries.

Every constraint carries a stable tag so models are self-describing; see
``tag_counts`` and the LP export.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import ConfigurationError, ModelError, UnsupportedPolicyError
from .graph import CompatibilityGraph
from .enumeration import Cycle, Segment
from .policy import PolicyConfig, cap_value


class VarKind(str, Enum):
    CYCLE = "cycle"              # x_c
    SEGMENT = "segment"          # z_s
    EDGE = "edge"                # y_ij
    NAT_EDGE = "nat_edge"        # national copy of an arc variable
    INT_EDGE = "int_edge"        # international-cycle copy of an arc variable
    LAYER_EDGE = "layer_edge"    # per-layer copy yt_ij
    COUNTRY_LAYER = "country_layer"  # b_k_t country activation per layer
    RECV_IND = "recv_indicator"  # node receives internationally
    GIVE_IND = "give_indicator"  # node gives internationally


@dataclass(frozen=True)
class Var:
    name: str
    kind: VarKind
    payload: tuple


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    terms: tuple[tuple[int, float], ...]   # (variable index, coefficient)
    relation: str                          # "<=", "=" or ">="
    rhs: float
    tag: str


@dataclass
class IpModel:
    variables: list[Var] = field(default_factory=list)
    constraints: list[LinearConstraint] = field(default_factory=list)
    objective: list[tuple[int, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add_var(self, name: str, kind: VarKind, payload: tuple) -> int:
        self.variables.append(Var(name, kind, payload))
        return len(self.variables) - 1

    def add_constraint(self, name: str, terms: list[tuple[int, float]],
                       relation: str, rhs: float, tag: str) -> None:
        terms = [(i, c) for i, c in terms if c != 0]
        idxs = [i for i, _ in terms]
        if len(idxs) != len(set(idxs)):
            raise ModelError(f"constraint {name}: duplicate variable")
        for i in idxs:
            if not 0 <= i < len(self.variables):
                raise ModelError(f"constraint {name}: unknown variable index {i}")
        if relation not in ("<=", "=", ">="):
            raise ModelError(f"constraint {name}: bad relation {relation!r}")
        self.constraints.append(LinearConstraint(name, tuple(terms), relation, rhs, tag))

    def tag_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for c in self.constraints:
            counts[c.tag] = counts.get(c.tag, 0) + 1
        return counts

    def objective_value(self, values) -> float:
        return sum(coeff * values[i] for i, coeff in self.objective)

    def var_index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise ModelError(f"no variable named {name}")


# ---------------------------------------------------------------- cycle


def build_cycle_model(cycles: list[Cycle], num_nodes: int,
                      weights: list[float] | None = None) -> IpModel:
    """Cycle-packing program: max sum of cycle weights, nodes used once.

    Default weight of a cycle is its transplant count (its ``weight``
    field, which equals node count for unit arc weights).
    """
    m = IpModel()
    by_node: dict[int, list[int]] = {}
    for ci, c in enumerate(cycles):
        for v in c.nodes:
            if not 0 <= v < num_nodes:
                raise ModelError(f"cycle {c.nodes} references unknown node {v}")
        idx = m.add_var(f"x_c{ci}", VarKind.CYCLE, (c,))
        w = weights[ci] if weights is not None else c.weight
        m.objective.append((idx, w))
        for v in c.nodes:
            by_node.setdefault(v, []).append(idx)
    for v in sorted(by_node):
        m.add_constraint(f"pack_n{v}", [(i, 1.0) for i in by_node[v]],
                         "<=", 1.0, "cycle_node_pack")
    return m


# ----------------------------------------------------------------- edge


def _paths_with_arcs(g: CompatibilityGraph, num_arcs: int,
                     members: set[int] | None = None) -> list[tuple[int, ...]]:
    """All simple directed paths with exactly ``num_arcs`` arcs."""
    out: list[tuple[int, ...]] = []
    nodes = sorted(members) if members is not None else range(len(g.nodes))

    def dfs(path: list[int], on_path: set[int]) -> None:
        if len(path) == num_arcs + 1:
            out.append(tuple(path))
            return
        for w in g.out_neighbors(path[-1]):
            if w not in on_path and (members is None or w in members):
                path.append(w)
                on_path.add(w)
                dfs(path, on_path)
                path.pop()
                on_path.remove(w)

    for start in nodes:
        dfs([start], {start})
    return out


def _arc_vars(m: IpModel, g: CompatibilityGraph, kind: VarKind, prefix: str,
              arcs=None) -> dict[tuple[int, int], int]:
    idx = {}
    for a in (g.arcs if arcs is None else arcs):
        idx[(a.source, a.target)] = m.add_var(
            f"{prefix}_{a.source}_{a.target}", kind, (a.source, a.target))
    return idx


def build_edge_model(g: CompatibilityGraph, cycle_cap: int) -> IpModel:
    """Arc-variable program for cycles of at most ``cycle_cap`` nodes."""
    if cycle_cap is None:
        raise ConfigurationError(
            "edge model needs a finite cycle cap; use the free edge or "
            "bounded/unbounded models for unbounded cycles"
        )
    m = build_free_edge_model(g)
    for pi, p in enumerate(_paths_with_arcs(g, cycle_cap)):
        terms = [(m.var_index(f"y_{p[i]}_{p[i + 1]}"), 1.0) for i in range(len(p) - 1)]
        m.add_constraint(f"path{pi}", terms, "<=", cycle_cap - 1, "path_length_cap")
    return m


def build_free_edge_model(g: CompatibilityGraph) -> IpModel:
    """Arc-variable program with no length cap: unbounded cycle packing."""
    m = IpModel()
    y = _arc_vars(m, g, VarKind.EDGE, "y")
    for a, idx in y.items():
        m.objective.append((idx, g.weight(*a)))
    for v in range(len(g.nodes)):
        terms = [(y[(u, v)], 1.0) for u in g.in_neighbors(v)]
        terms += [(y[(v, w)], -1.0) for w in g.out_neighbors(v)]
        if terms:
            m.add_constraint(f"bal_n{v}", terms, "=", 0.0, "flow_balance")
        out_terms = [(y[(v, w)], 1.0) for w in g.out_neighbors(v)]
        if out_terms:
            m.add_constraint(f"deg_n{v}", out_terms, "<=", 1.0, "out_degree")
    return m


# ---------------------------------------------------------------- mixed


def build_mixed_model(g: CompatibilityGraph, national_cycles: list[Cycle],
                      segments: list[Segment], policy: PolicyConfig) -> IpModel:
    """National cycles as variables, international cycles as linked segments.

    Arc variables are split into a national copy (usable only inside a
    selected national cycle) and an international copy (usable only inside
    a selected segment chain); length caps are enforced with path
    constraints on the matching copy.
    """
    K = policy.international_cycle_cap
    if K is None:
        raise UnsupportedPolicyError(
            "mixed model needs a finite international cycle cap; use the "
            "bounded/unbounded model for an unbounded partner"
        )
    for k in range(1, policy.num_countries + 1):
        if policy.country(k).cycle_cap is None:
            raise UnsupportedPolicyError(
                f"country {k} allows unbounded national cycles; use the "
                "bounded/unbounded model"
            )
    m = IpModel()
    nat_arcs = g.national_arcs()
    yn = _arc_vars(m, g, VarKind.NAT_EDGE, "yn", nat_arcs)
    yi = _arc_vars(m, g, VarKind.INT_EDGE, "yi")
    for (i, j), idx in list(yn.items()) + list(yi.items()):
        m.objective.append((idx, g.weight(i, j)))

    x: list[int] = []
    for ci, c in enumerate(national_cycles):
        if c.is_international:
            raise ModelError(f"cycle {c.nodes} is international; mixed model takes national cycles")
        x.append(m.add_var(f"x_c{ci}", VarKind.CYCLE, (c,)))
    z: list[int] = []
    for si, s in enumerate(segments):
        z.append(m.add_var(f"z_s{si}", VarKind.SEGMENT, (s,)))

    # international receive/give indicators, tied to the arc variables
    recv: dict[int, int] = {}
    give: dict[int, int] = {}
    int_in: dict[int, list[int]] = {}
    int_out: dict[int, list[int]] = {}
    for a in g.international_arcs():
        int_out.setdefault(a.source, []).append(yi[(a.source, a.target)])
        int_in.setdefault(a.target, []).append(yi[(a.source, a.target)])
    for v in sorted(int_in):
        recv[v] = m.add_var(f"ep_{v}", VarKind.RECV_IND, (v,))
        m.add_constraint(f"recv_n{v}", [(recv[v], 1.0)] + [(t, -1.0) for t in int_in[v]],
                         "=", 0.0, "recv_indicator")
    for v in sorted(int_out):
        give[v] = m.add_var(f"em_{v}", VarKind.GIVE_IND, (v,))
        m.add_constraint(f"give_n{v}", [(give[v], 1.0)] + [(t, -1.0) for t in int_out[v]],
                         "=", 0.0, "give_indicator")

    cycles_at: dict[int, list[int]] = {}
    for ci, c in enumerate(national_cycles):
        for v in c.nodes:
            cycles_at.setdefault(v, []).append(x[ci])
    segments_at: dict[int, list[int]] = {}
    for si, s in enumerate(segments):
        for v in s.nodes:
            segments_at.setdefault(v, []).append(z[si])

    for v in range(len(g.nodes)):
        nat_in = [(yn[(u, v)], 1.0) for u in g.in_neighbors(v) if (u, v) in yn]
        nat_out = [(yn[(v, w)], -1.0) for w in g.out_neighbors(v) if (v, w) in yn]
        if nat_in or nat_out:
            m.add_constraint(f"nbal_n{v}", nat_in + nat_out, "=", 0.0, "national_flow_balance")
        i_in = [(yi[(u, v)], 1.0) for u in g.in_neighbors(v)]
        i_out = [(yi[(v, w)], -1.0) for w in g.out_neighbors(v)]
        if i_in or i_out:
            m.add_constraint(f"ibal_n{v}", i_in + i_out, "=", 0.0, "international_flow_balance")
        cover = [(i, 1.0) for i in cycles_at.get(v, []) + segments_at.get(v, [])]
        if cover:
            m.add_constraint(f"cover_n{v}", cover, "<=", 1.0, "cover_pack")
        outs = [(yn[(v, w)], 1.0) for w in g.out_neighbors(v) if (v, w) in yn]
        outs += [(yi[(v, w)], 1.0) for w in g.out_neighbors(v)]
        if outs:
            m.add_constraint(f"link_n{v}", outs + [(i, -1.0) for i, _ in cover],
                             "<=", 0.0, "cover_link")

    for ci, c in enumerate(national_cycles):
        arcs = [(c.nodes[i], c.nodes[(i + 1) % len(c.nodes)]) for i in range(len(c.nodes))]
        terms = [(yn[a], 1.0) for a in arcs]
        m.add_constraint(f"cyclb_c{ci}", [(x[ci], len(arcs))] + [(i, -w) for i, w in terms],
                         "<=", 0.0, "cycle_edge_lb")
        m.add_constraint(f"cycub_c{ci}", terms + [(x[ci], -1.0)],
                         "<=", len(arcs) - 1, "cycle_edge_ub")

    for si, s in enumerate(segments):
        u, v = s.nodes[0], s.nodes[-1]
        if u not in recv or v not in give:
            # segment can never be part of an international cycle
            m.add_constraint(f"segoff_s{si}", [(z[si], 1.0)], "<=", 0.0, "segment_unreachable")
            continue
        arcs = [(s.nodes[i], s.nodes[i + 1]) for i in range(len(s.nodes) - 1)]
        arc_terms = [(yi[a], 1.0) for a in arcs]
        ends = [(recv[u], 1.0), (give[v], 1.0)]
        m.add_constraint(
            f"seglb_s{si}",
            [(z[si], len(arcs) + 2)] + [(i, -w) for i, w in arc_terms + ends],
            "<=", 0.0, "segment_edge_lb")
        m.add_constraint(
            f"segub_s{si}",
            arc_terms + ends + [(z[si], -1.0)],
            "<=", len(arcs) + 1, "segment_edge_ub")

    # length caps via path constraints
    pi = 0
    for p in _paths_with_arcs(g, K):
        terms = [(yi[(p[i], p[i + 1])], 1.0) for i in range(len(p) - 1)]
        m.add_constraint(f"ipath{pi}", terms, "<=", K - 1, "international_path_cap")
        pi += 1
    for k in range(1, policy.num_countries + 1):
        members = set(g.nodes_of_country(k))
        Kk = policy.country(k).cycle_cap
        for p in _paths_with_arcs(g, Kk, members):
            terms = [(yn[(p[i], p[i + 1])], 1.0) for i in range(len(p) - 1)]
            m.add_constraint(f"npath{pi}", terms, "<=", Kk - 1, "national_path_cap")
            pi += 1
        Lk = policy.segment_cap(k)
        if Lk is not None:
            if cap_value(Lk) > cap_value(K) and policy.country(k).max_segments is None:
                m.notes.append(
                    f"country {k}: segment cap {Lk} exceeds the international "
                    f"cycle cap {K} with unrestricted segments per country")
            for p in _paths_with_arcs(g, Lk, members):
                terms = [(yi[(p[i], p[i + 1])], 1.0) for i in range(len(p) - 1)]
                m.add_constraint(f"spath{pi}", terms, "<=", Lk - 1, "segment_path_cap")
                pi += 1
    return m


# ---------------------------------------------------------------- layers


def add_layer_constraints(model: IpModel, g: CompatibilityGraph, T: int | None,
                          policy: PolicyConfig) -> IpModel:
    """Extend a mixed model with layered arc copies for per-cycle caps.

    Each layer holds whole international cycles (flow balance is
    replicated per layer), so caps on segments, pairs and countries can be
    written per layer.  A layer may still hold several disjoint
    international cycles; each of them satisfies the caps individually.
    """
    if T is None:
        T = max(1, len(g.nodes) // 2)
    if T <= 0:
        raise ConfigurationError(f"layer count must be >= 1, got {T}")
    m = IpModel(list(model.variables), list(model.constraints),
                list(model.objective), list(model.notes))
    yi = {v.payload: i for i, v in enumerate(m.variables) if v.kind is VarKind.INT_EDGE}
    if not yi:
        raise ModelError("layer constraints require a model with international arc variables")
    yt: dict[tuple[int, int, int], int] = {}
    for (i, j) in sorted(yi):
        for t in range(1, T + 1):
            yt[(t, i, j)] = m.add_var(f"yt{t}_{i}_{j}", VarKind.LAYER_EDGE, (t, i, j))
        m.add_constraint(
            f"ldec_{i}_{j}",
            [(yt[(t, i, j)], 1.0) for t in range(1, T + 1)] + [(yi[(i, j)], -1.0)],
            "=", 0.0, "layer_decomposition")
    for t in range(1, T + 1):
        for v in range(len(g.nodes)):
            terms = [(yt[(t, u, v)], 1.0) for u in g.in_neighbors(v)
                     if (u, v) in yi]
            terms += [(yt[(t, v, w)], -1.0) for w in g.out_neighbors(v)
                      if (v, w) in yi]
            if terms:
                m.add_constraint(f"lbal_t{t}_n{v}", terms, "=", 0.0, "layer_flow_balance")
    int_arcs = {(a.source, a.target) for a in g.international_arcs()}
    for k in range(1, policy.num_countries + 1):
        into_k = [(a.source, a.target) for a in g.arcs_into_country(k)]
        int_into_k = [a for a in into_k if a in int_arcs]
        lam = policy.country(k).max_segments
        beta = policy.country(k).max_pairs
        for t in range(1, T + 1):
            if lam is not None and int_into_k:
                m.add_constraint(
                    f"lseg_t{t}_k{k}",
                    [(yt[(t, i, j)], 1.0) for i, j in int_into_k],
                    "<=", lam, "country_segment_cap")
            if beta is not None and into_k:
                m.add_constraint(
                    f"lpair_t{t}_k{k}",
                    [(yt[(t, i, j)], 1.0) for i, j in into_k],
                    "<=", beta, "country_pair_cap")
    if policy.max_countries is not None:
        b: dict[tuple[int, int], int] = {}
        for k in range(1, policy.num_countries + 1):
            for t in range(1, T + 1):
                b[(k, t)] = m.add_var(f"b{k}_{t}", VarKind.COUNTRY_LAYER, (k, t))
        for k in range(1, policy.num_countries + 1):
            big_m = max(1, len(g.nodes_of_country(k)))
            int_into_k = [(a.source, a.target) for a in g.arcs_into_country(k)
                          if (a.source, a.target) in int_arcs]
            for t in range(1, T + 1):
                if int_into_k:
                    m.add_constraint(
                        f"lact_t{t}_k{k}",
                        [(yt[(t, i, j)], 1.0) for i, j in int_into_k] + [(b[(k, t)], -big_m)],
                        "<=", 0.0, "country_activation")
        for t in range(1, T + 1):
            m.add_constraint(
                f"lcnt_t{t}",
                [(b[(k, t)], 1.0) for k in range(1, policy.num_countries + 1)],
                "<=", policy.max_countries, "country_count_cap")
    return m


# -------------------------------------------------- bounded / unbounded


def build_bounded_unbounded_model(g: CompatibilityGraph, v1_cycles: list[Cycle],
                                  v1_segments: list[Segment],
                                  bounded_country: int = 1) -> IpModel:
    """Two-country model: one country bounded, the partner unbounded.

    The bounded country contributes enumerated national cycles and
    segments; the partner keeps plain arc variables with no length caps.
    Arcs leaving the bounded country live in a single layer indexed by
    their source node, which forces every international cycle to use
    exactly one segment in each country.
    """
    if g.num_countries != 2:
        raise UnsupportedPolicyError("bounded/unbounded model is two-country only")
    if bounded_country not in (1, 2):
        raise ConfigurationError("bounded_country must be 1 or 2")
    V1 = set(g.nodes_of_country(bounded_country))
    V2 = set(g.nodes_of_country(3 - bounded_country))
    for c in v1_cycles:
        if set(c.nodes) - V1:
            raise ModelError(f"cycle {c.nodes} leaves the bounded country")
    for s in v1_segments:
        if set(s.nodes) - V1:
            raise ModelError(f"segment {s.nodes} leaves the bounded country")

    edge_arcs = [a for a in g.arcs if not (a.source in V1 and a.target in V1)]
    gates = sorted(i for i in V1 if any(j in V2 for j in g.out_neighbors(i)))
    layer_of = {i: t for t, i in enumerate(gates, start=1)}
    T = max(1, len(gates))

    m = IpModel()
    y = _arc_vars(m, g, VarKind.EDGE, "y", edge_arcs)
    yt: dict[tuple[int, int, int], int] = {}
    for a in edge_arcs:
        i, j = a.source, a.target
        layers = [layer_of[i]] if i in V1 else range(1, T + 1)
        for t in layers:
            yt[(t, i, j)] = m.add_var(f"yt{t}_{i}_{j}", VarKind.LAYER_EDGE, (t, i, j))
        m.add_constraint(
            f"ldec_{i}_{j}",
            [(yt[(t, i, j)], 1.0) for t in layers] + [(y[(i, j)], -1.0)],
            "=", 0.0, "layer_decomposition")

    x = [m.add_var(f"x_c{ci}", VarKind.CYCLE, (c,)) for ci, c in enumerate(v1_cycles)]
    # segments must be enterable and exitable internationally to ever be used
    usable = []
    for s in v1_segments:
        head_ok = any(u in V2 for u in g.in_neighbors(s.nodes[0]))
        tail_ok = s.nodes[-1] in layer_of
        usable.append(head_ok and tail_ok)
    z = [m.add_var(f"z_s{si}", VarKind.SEGMENT, (s,)) for si, s in enumerate(v1_segments)]

    for ci, c in enumerate(v1_cycles):
        m.objective.append((x[ci], c.weight))
    for (i, j), idx in y.items():
        m.objective.append((idx, g.weight(i, j)))
    for si, s in enumerate(v1_segments):
        if s.arc_count:
            # interior transplants; the head's transplant is counted by its
            # incoming international arc variable
            m.objective.append((z[si], float(s.arc_count)))

    # per-layer flow balance in the unbounded country
    for t in range(1, T + 1):
        for v in sorted(V2):
            terms = [(yt[(t, u, v)], 1.0) for u in g.in_neighbors(v) if (t, u, v) in yt]
            terms += [(yt[(t, v, w)], -1.0) for w in g.out_neighbors(v) if (t, v, w) in yt]
            if terms:
                m.add_constraint(f"lbal_t{t}_n{v}", terms, "=", 0.0, "layer_flow_balance")

    for v in range(len(g.nodes)):
        outs = [(y[(v, w)], 1.0) for w in g.out_neighbors(v) if (v, w) in y]
        if outs:
            m.add_constraint(f"deg_n{v}", outs, "<=", 1.0, "out_degree")

    cycles_at: dict[int, list[int]] = {}
    for ci, c in enumerate(v1_cycles):
        for v in c.nodes:
            cycles_at.setdefault(v, []).append(x[ci])
    seg_start: dict[int, list[int]] = {}
    seg_end: dict[int, list[int]] = {}
    segments_at: dict[int, list[int]] = {}
    for si, s in enumerate(v1_segments):
        seg_start.setdefault(s.nodes[0], []).append(z[si])
        seg_end.setdefault(s.nodes[-1], []).append(z[si])
        for v in s.nodes:
            segments_at.setdefault(v, []).append(z[si])

    for v in sorted(V1):
        cover = [(i, 1.0) for i in cycles_at.get(v, []) + segments_at.get(v, [])]
        if cover:
            m.add_constraint(f"cover_n{v}", cover, "<=", 1.0, "cover_pack")
        int_in = [(y[(u, v)], 1.0) for u in g.in_neighbors(v) if u in V2]
        start_terms = int_in + [(i, -1.0) for i in seg_start.get(v, [])]
        if start_terms:
            m.add_constraint(f"sstart_n{v}", start_terms, "=", 0.0, "segment_start_link")
        int_out = [(y[(v, w)], 1.0) for w in g.out_neighbors(v) if w in V2]
        end_terms = int_out + [(i, -1.0) for i in seg_end.get(v, [])]
        if end_terms:
            m.add_constraint(f"send_n{v}", end_terms, "=", 0.0, "segment_end_link")

    for si, s in enumerate(v1_segments):
        if not usable[si]:
            m.add_constraint(f"segoff_s{si}", [(z[si], 1.0)], "<=", 0.0, "segment_unreachable")
            continue
        head, tail = s.nodes[0], s.nodes[-1]
        t = layer_of[tail]
        terms = [(yt[(t, u, head)], 1.0) for u in g.in_neighbors(head)
                 if u in V2 and (t, u, head) in yt]
        terms += [(yt[(t, tail, w)], 1.0) for w in g.out_neighbors(tail)
                  if w in V2 and (t, tail, w) in yt]
        m.add_constraint(
            f"spin_s{si}", [(z[si], 2.0)] + [(i, -c) for i, c in terms],
            "<=", 0.0, "segment_layer_pin")
    return m
