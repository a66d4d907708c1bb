"""Synchronous message passing estimation of harmonic influence.

Every ordered arc (j, i) of the social graph carries two messages sent
from i to j: a potential message in (0, 1] and an influence message in
[1, inf).  All messages start at 1 and are updated synchronously from
the previous step's buffer.  On trees the messages fix exactly after
diameter-many steps and reproduce the grounded-Laplacian answer; on
cyclic graphs they converge asymptotically to an approximation.

Summation order inside every update is ascending neighbor index, so
runs are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .electrical import InfluenceWeights
from .graphs import MessageDigraph, UndirectedGraph, is_connected, message_digraph

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10**5


class _Kernel:
    """Precompiled update arrays for one (message digraph, weights) pair."""

    def __init__(self, md: MessageDigraph, weights: InfluenceWeights):
        self.md = md
        self.weights = weights
        m = md.size
        trust = weights.trust
        q = weights.field_trust
        alpha = np.empty(m)
        for idx, (j, i) in enumerate(md.arc_nodes):
            alpha[idx] = q[i] / trust[(i, j)]
        # Dependency arcs (a -> b): message a is computed from message b.
        # md.arcs is ordered by (a, then ascending source id), which for a
        # fixed a means ascending neighbor index of the sender.
        self.dep_target = np.array([a for a, _ in md.arcs], dtype=np.intp)
        self.dep_source = np.array([b for _, b in md.arcs], dtype=np.intp)
        coef = np.empty(len(md.arcs))
        for e, (a, b) in enumerate(md.arcs):
            j, i = md.arc_nodes[a]
            _, k = md.arc_nodes[b]
            coef[e] = trust[(i, k)] / trust[(i, j)]
        self.dep_coef = coef
        self.alpha = alpha
        self.receivers = md.receivers()
        self.size = m

    def step(self, w: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        shrink = 1.0 - w
        contrib = np.bincount(
            self.dep_target, weights=self.dep_coef * shrink[self.dep_source], minlength=self.size
        )
        w_new = 1.0 / (1.0 + self.alpha + contrib)
        flow = w * h
        h_new = 1.0 + np.bincount(
            self.dep_target, weights=flow[self.dep_source], minlength=self.size
        )
        return w_new, h_new

    def estimates(self, w: np.ndarray, h: np.ndarray) -> np.ndarray:
        n = self.md.base.node_count
        return 1.0 + np.bincount(self.receivers, weights=w * h, minlength=n)


@dataclass(frozen=True)
class MessageState:
    """Message values at one step, indexed by the message digraph's nodes."""

    md: MessageDigraph
    w_msgs: np.ndarray
    h_msgs: np.ndarray
    t: int = 0
    _kernel: Optional[_Kernel] = field(default=None, repr=False, compare=False)


def initial_messages(md: MessageDigraph, weights: InfluenceWeights) -> MessageState:
    """All messages start at one."""
    if weights.graph != md.base:
        raise ValueError("weights and message digraph cover different graphs")
    w = np.ones(md.size)
    h = np.ones(md.size)
    w.setflags(write=False)
    h.setflags(write=False)
    return MessageState(md=md, w_msgs=w, h_msgs=h, t=0, _kernel=_Kernel(md, weights))


def _kernel_for(state: MessageState, weights: InfluenceWeights) -> _Kernel:
    k = state._kernel
    if k is not None and k.weights is weights:
        return k
    return _Kernel(state.md, weights)


def mpa_step(state: MessageState, weights: InfluenceWeights) -> MessageState:
    """One synchronous update of every message."""
    kernel = _kernel_for(state, weights)
    w_new, h_new = kernel.step(state.w_msgs, state.h_msgs)
    w_new.setflags(write=False)
    h_new.setflags(write=False)
    return MessageState(md=state.md, w_msgs=w_new, h_msgs=h_new, t=state.t + 1, _kernel=kernel)


def node_influence_estimate(state: MessageState, node: int) -> float:
    """Influence estimate a node can form from its incoming messages."""
    md = state.md
    if not 0 <= node < md.base.node_count:
        raise ValueError(f"node {node} outside range")
    acc = 0.0
    for i in md.base.adjacency[node]:
        idx = md.arc_id[(node, i)]
        acc += state.w_msgs[idx] * state.h_msgs[idx]
    return 1.0 + acc


def influence_estimates(state: MessageState, weights: InfluenceWeights) -> np.ndarray:
    """Influence estimates of all nodes at the current step."""
    return _kernel_for(state, weights).estimates(state.w_msgs, state.h_msgs)


@dataclass(frozen=True)
class MpaResult:
    """Outcome of a full message passing run.

    ``iterations`` counts the synchronous steps executed; the traces,
    when recorded, hold one row per step from t=0 through t=iterations.
    """

    md: MessageDigraph
    h_estimates: np.ndarray
    w_limits: np.ndarray
    iterations: int
    converged: bool
    final_residual: float
    h_trace: Optional[np.ndarray] = None
    w_trace: Optional[np.ndarray] = None


def run_mpa(
    g: UndirectedGraph,
    weights: InfluenceWeights,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    trace: bool = False,
) -> MpaResult:
    """Run the message passing updates until messages and estimates settle.

    Stops when the 1-norm of successive differences of the potential
    messages plus that of the node estimates drops to ``tol``.  Hitting
    ``max_iter`` first is reported through ``converged=False`` rather
    than raised; the caller decides.
    """
    if g != weights.graph:
        raise ValueError("graph and weights disagree")
    if g.edge_count == 0:
        raise ValueError("graph has no edges, so there are no messages to pass")
    if not is_connected(g):
        raise ValueError("message passing requires a connected graph")
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")

    md = message_digraph(g)
    state = initial_messages(md, weights)
    kernel = state._kernel
    assert kernel is not None
    w, h = state.w_msgs, state.h_msgs
    est = kernel.estimates(w, h)
    w_rows = [w] if trace else []
    est_rows = [est] if trace else []

    converged = False
    residual = np.inf
    steps = 0
    while steps < max_iter:
        w_new, h_new = kernel.step(w, h)
        est_new = kernel.estimates(w_new, h_new)
        steps += 1
        residual = float(np.abs(w_new - w).sum() + np.abs(est_new - est).sum())
        w, h, est = w_new, h_new, est_new
        if trace:
            w_rows.append(w_new)
            est_rows.append(est_new)
        if residual <= tol:
            converged = True
            break

    est.setflags(write=False)
    w.setflags(write=False)
    return MpaResult(
        md=md,
        h_estimates=est,
        w_limits=w,
        iterations=steps,
        converged=converged,
        final_residual=residual,
        h_trace=np.array(est_rows) if trace else None,
        w_trace=np.array(w_rows) if trace else None,
    )


def error_trace(result: MpaResult) -> list[tuple[int, float, float]]:
    """Distance of each recorded step to the final iterate, in 1-norm.

    The final iterate stands in for the unknown limit.  One entry per
    executed step, t = 0 .. iterations-1; the last entry is therefore
    bounded by the stopping tolerance whenever the run converged.
    """
    if result.h_trace is None or result.w_trace is None:
        raise ValueError("result carries no traces; rerun with trace=True")
    h_final = result.h_trace[-1]
    w_final = result.w_trace[-1]
    out = []
    for t in range(result.iterations):
        h_err = float(np.abs(result.h_trace[t] - h_final).sum())
        w_err = float(np.abs(result.w_trace[t] - w_final).sum())
        out.append((t, h_err, w_err))
    return out
