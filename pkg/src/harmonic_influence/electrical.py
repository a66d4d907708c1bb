"""Electrical-network model of the opinion process.

A social graph with positive edge conductances plus a grounded
reference node (the opinion field) forms an electrical network.  Fixing
a leader node at potential 1 and the field at potential 0, the
potentials of the remaining nodes solve a grounded Laplacian system,
and the harmonic influence of the leader is one plus the sum of those
potentials.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .graphs import Edge, MessageDigraph, UndirectedGraph, connected_components

DENSE_SOLVE_CUTOFF = 2000
RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class ConductanceNetwork:
    """Conductances of the social graph plus per-node field conductances.

    ``edge_conductance`` maps each edge (u, v), u < v, to a positive
    value; ``field_conductance[i]`` couples node i to the grounded field
    node (zero means no field edge).  The extended graph including the
    field node must be connected, which also forces at least one
    positive field conductance.
    """

    graph: UndirectedGraph
    edge_conductance: Mapping[Edge, float]
    field_conductance: np.ndarray

    def __post_init__(self) -> None:
        g = self.graph
        cond = {tuple(sorted(e)): float(c) for e, c in self.edge_conductance.items()}
        if set(cond) != set(g.edges):
            raise ValueError("edge conductances must cover exactly the graph's edges")
        for e, c in cond.items():
            if not c > 0.0:
                raise ValueError(f"conductance of edge {e} must be positive, got {c}")
        gamma = np.asarray(self.field_conductance, dtype=np.float64)
        if gamma.shape != (g.node_count,):
            raise ValueError("field_conductance must have one entry per node")
        if np.any(gamma < 0.0):
            raise ValueError("field conductances must be nonnegative")
        for comp in connected_components(g):
            if not any(gamma[i] > 0.0 for i in comp):
                raise ValueError(
                    "extended network is disconnected: component containing node "
                    f"{min(comp)} has no field conductance"
                )
        object.__setattr__(self, "edge_conductance", cond)
        gamma.setflags(write=False)
        object.__setattr__(self, "field_conductance", gamma)

    @property
    def node_count(self) -> int:
        return self.graph.node_count

    def conductance(self, u: int, v: int) -> float:
        key = (u, v) if u < v else (v, u)
        return self.edge_conductance[key]

    def total_conductance(self, i: int) -> float:
        """Sum of all conductances incident to i, field edge included."""
        return sum(self.conductance(i, j) for j in self.graph.adjacency[i]) + float(
            self.field_conductance[i]
        )


def uniform_network(g: UndirectedGraph, gamma: float, edge_value: float = 1.0) -> ConductanceNetwork:
    """Network with one conductance value on every edge and gamma to the field."""
    return ConductanceNetwork(
        graph=g,
        edge_conductance={e: edge_value for e in g.edges},
        field_conductance=np.full(g.node_count, float(gamma)),
    )


@dataclass(frozen=True)
class InfluenceWeights:
    """Row-normalized trust weights derived from conductances.

    ``trust[(i, j)]`` is how much i trusts neighbor j and
    ``field_trust[i]`` how much i trusts the opinion field; each row
    sums to one.
    """

    graph: UndirectedGraph
    trust: Mapping[tuple[int, int], float]
    field_trust: np.ndarray


@dataclass(frozen=True)
class PotentialVector:
    """Node potentials with the leader held at 1 and the field at 0."""

    leader: int
    values: np.ndarray


@dataclass(frozen=True)
class InfluenceVector:
    """Harmonic influence of every node: values[l] is the influence of l as leader."""

    values: np.ndarray


def build_weights(net: ConductanceNetwork) -> InfluenceWeights:
    """Normalize conductances into trust weights, row by row."""
    g = net.graph
    trust: dict[tuple[int, int], float] = {}
    field_trust = np.empty(g.node_count)
    for i in range(g.node_count):
        denom = net.total_conductance(i)
        if not denom > 0.0:
            raise ValueError(f"node {i} is isolated: zero total conductance")
        for j in g.adjacency[i]:
            trust[(i, j)] = net.conductance(i, j) / denom
        field_trust[i] = float(net.field_conductance[i]) / denom
    field_trust.setflags(write=False)
    return InfluenceWeights(graph=g, trust=trust, field_trust=field_trust)


def _grounded_laplacian(net: ConductanceNetwork) -> np.ndarray:
    """Laplacian over the social nodes, field row/column dropped.

    Diagonal entries carry the full degree including the field edge, so
    removing the leader row/column gives the grounded system directly.
    """
    n = net.node_count
    lap = np.zeros((n, n))
    for (u, v), c in net.edge_conductance.items():
        lap[u, v] -= c
        lap[v, u] -= c
        lap[u, u] += c
        lap[v, v] += c
    lap[np.diag_indices(n)] += net.field_conductance
    return lap


def grounded_laplacian_solve(
    net: ConductanceNetwork,
    leader: int,
    dense_cutoff: int = DENSE_SOLVE_CUTOFF,
) -> PotentialVector:
    """Potentials of all nodes with the leader at 1 and the field grounded.

    Solves L_RR y_R = C_{R,leader} where R excludes the leader.  Uses a
    dense Cholesky factorization up to ``dense_cutoff`` nodes and
    conjugate gradients with a diagonal preconditioner beyond that.
    """
    n = net.node_count
    if not 0 <= leader < n:
        raise ValueError(f"leader {leader} outside node range")
    if n == 1:
        return PotentialVector(leader=leader, values=np.ones(1))

    lap = _grounded_laplacian(net)
    keep = np.array([i for i in range(n) if i != leader], dtype=np.intp)
    lrr = lap[np.ix_(keep, keep)]
    rhs = np.array([net.conductance(i, leader) if net.graph.has_edge(i, leader) else 0.0 for i in keep])

    if n <= dense_cutoff:
        try:
            chol = scipy.linalg.cho_factor(lrr, lower=True, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise ArithmeticError(
                f"grounded Laplacian with leader {leader} is not positive definite"
            ) from exc
        y_r = scipy.linalg.cho_solve(chol, rhs, check_finite=False)
    else:
        a = scipy.sparse.csr_matrix(lrr)
        precond = scipy.sparse.diags(1.0 / lrr.diagonal())
        y_r, info = scipy.sparse.linalg.cg(a, rhs, rtol=1e-12, atol=0.0, M=precond, maxiter=50 * n)
        if info != 0:
            raise ArithmeticError(f"conjugate gradient failed to converge (info={info})")

    rhs_scale = float(np.abs(rhs).sum())
    residual = float(np.abs(lrr @ y_r - rhs).sum())
    if residual > RESIDUAL_RTOL * max(rhs_scale, 1e-300):
        raise ArithmeticError(
            f"grounded solve residual {residual:.3e} exceeds tolerance for leader {leader}"
        )

    values = np.empty(n)
    values[keep] = y_r
    values[leader] = 1.0
    # Potentials are convex combinations of the boundary values 0 and 1;
    # anything beyond roundoff distance from [0, 1] signals a bad system.
    if values.min() < -1e-9 or values.max() > 1.0 + 1e-9:
        raise ArithmeticError("potentials escaped [0, 1] beyond roundoff")
    np.clip(values, 0.0, 1.0, out=values)
    values.setflags(write=False)
    return PotentialVector(leader=leader, values=values)


def harmonic_influence_exact(net: ConductanceNetwork, dense_cutoff: int = DENSE_SOLVE_CUTOFF) -> InfluenceVector:
    """Exact harmonic influence of every node, one grounded solve per leader.

    The per-leader solves are independent pure functions of the network;
    callers needing speed can distribute them freely.
    """
    n = net.node_count
    values = np.empty(n)
    for leader in range(n):
        pot = grounded_laplacian_solve(net, leader, dense_cutoff=dense_cutoff)
        # sum over all nodes = 1 (the leader's fixed potential) + sum over R
        values[leader] = float(pot.values.sum())
    values.setflags(write=False)
    return InfluenceVector(values=values)


def exact_message_potentials(
    net: ConductanceNetwork,
    md: MessageDigraph,
    dense_cutoff: int = DENSE_SOLVE_CUTOFF,
) -> np.ndarray:
    """Exact counterpart of the converged potential messages.

    Entry for the message node (j, i) is the potential of i when j is
    the leader, i.e. what the message flowing from i to j estimates.
    One grounded solve per receiver node.
    """
    out = np.empty(md.size)
    by_receiver: dict[int, list[int]] = {}
    for idx, (j, _i) in enumerate(md.arc_nodes):
        by_receiver.setdefault(j, []).append(idx)
    for j, indices in by_receiver.items():
        pot = grounded_laplacian_solve(net, j, dense_cutoff=dense_cutoff)
        for idx in indices:
            out[idx] = pot.values[md.arc_nodes[idx][1]]
    out.setflags(write=False)
    return out


def glue_leaders(
    g: UndirectedGraph,
    edge_conductance: Mapping[Edge, float],
    zero_leader_set: Sequence[int] | set[int],
) -> ConductanceNetwork:
    """Collapse a set of leaf nodes with fixed zero opinion into the field.

    Every member of ``zero_leader_set`` must be a leaf; its single edge
    becomes a field edge of the surviving neighbor, and parallel field
    edges are merged by summing conductances.  Surviving nodes are
    renumbered densely in ascending original order.
    """
    leaders = set(int(v) for v in zero_leader_set)
    if not leaders:
        raise ValueError("zero_leader_set must be nonempty")
    for v in leaders:
        if not 0 <= v < g.node_count:
            raise ValueError(f"leader {v} outside node range")
        if g.degree(v) != 1:
            raise ValueError(f"zero-opinion leader {v} is not a leaf (degree {g.degree(v)})")
    cond = {tuple(sorted(e)): float(c) for e, c in edge_conductance.items()}
    if set(cond) != set(g.edges):
        raise ValueError("edge conductances must cover exactly the graph's edges")

    survivors = [v for v in range(g.node_count) if v not in leaders]
    if not survivors:
        raise ValueError("all nodes are zero-opinion leaders; nothing survives")
    new_id = {v: idx for idx, v in enumerate(survivors)}

    new_edges: list[Edge] = []
    new_cond: dict[Edge, float] = {}
    gamma = np.zeros(len(survivors))
    for (u, v), c in cond.items():
        u_in, v_in = u in leaders, v in leaders
        if u_in and v_in:
            continue  # both endpoints collapse into the field node
        if u_in or v_in:
            keep = v if u_in else u
            gamma[new_id[keep]] += c
        else:
            e = (new_id[u], new_id[v]) if new_id[u] < new_id[v] else (new_id[v], new_id[u])
            new_edges.append(e)
            new_cond[e] = c
    new_graph = UndirectedGraph(len(survivors), tuple(new_edges))
    return ConductanceNetwork(graph=new_graph, edge_conductance=new_cond, field_conductance=gamma)
