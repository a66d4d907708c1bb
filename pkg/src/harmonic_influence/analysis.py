"""Convergence machinery for message-passing-like dynamics on digraphs.

The driven two-variable recursion here generalizes the message updates:
a decay vector in (0, 1] and a growth vector in [1, inf) evolve on an
arbitrary digraph under driving sequences alpha (non-decreasing) and
beta (convergent), with reciprocal scaling vectors r and s.  The module
also provides the structural convergence test (every node of a
nontrivial strongly connected component must reach the support of
alpha), a spectral radius diagnostic, and rank-order statistics for
comparing approximate against exact influence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .graphs import Digraph, condensation, reachable_set

RS_TOL = 1e-12
ALPHA_MONOTONE_TOL = 1e-15

DrivingSequence = Union[np.ndarray, Sequence[float], Callable[[int], np.ndarray]]


def _as_provider(seq: DrivingSequence, size: int, name: str) -> Callable[[int], np.ndarray]:
    if callable(seq):
        return seq
    arr = np.asarray(seq, dtype=np.float64)
    if arr.shape != (size,):
        raise ValueError(f"{name} must have one entry per digraph node")
    return lambda _t: arr


class _ArcGather:
    """Flattened arc arrays for vectorized updates, in stored arc order."""

    def __init__(self, d: Digraph, r: np.ndarray, s: np.ndarray):
        self.arc_from = np.array([v for v, _ in d.arcs], dtype=np.intp)
        self.arc_to = np.array([w for _, w in d.arcs], dtype=np.intp)
        self.coef = r[self.arc_from] * s[self.arc_to]
        self.size = d.node_count


@dataclass(frozen=True)
class GeneralizedDynamicsState:
    """One step of the driven decay/growth recursion on a digraph."""

    d: Digraph
    omega: np.ndarray
    eta: np.ndarray
    alpha: Callable[[int], np.ndarray]
    beta: Callable[[int], np.ndarray]
    r: np.ndarray
    s: np.ndarray
    t: int = 0
    _last_alpha: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    _gather: Optional[_ArcGather] = field(default=None, repr=False, compare=False)


def initial_generalized_state(
    d: Digraph,
    alpha: DrivingSequence,
    beta: DrivingSequence,
    r: Sequence[float],
    s: Sequence[float],
) -> GeneralizedDynamicsState:
    """Start the recursion at omega = eta = 1 and validate r = 1/s."""
    n = d.node_count
    r_arr = np.asarray(r, dtype=np.float64)
    s_arr = np.asarray(s, dtype=np.float64)
    if r_arr.shape != (n,) or s_arr.shape != (n,):
        raise ValueError("r and s must have one entry per digraph node")
    if np.any(r_arr <= 0.0) or np.any(s_arr <= 0.0):
        raise ValueError("r and s must be positive")
    if np.any(np.abs(r_arr * s_arr - 1.0) > RS_TOL):
        raise ValueError("scaling vectors must be reciprocal: r_v * s_v = 1")
    return GeneralizedDynamicsState(
        d=d,
        omega=np.ones(n),
        eta=np.ones(n),
        alpha=_as_provider(alpha, n, "alpha"),
        beta=_as_provider(beta, n, "beta"),
        r=r_arr,
        s=s_arr,
        t=0,
        _last_alpha=None,
        _gather=_ArcGather(d, r_arr, s_arr),
    )


def _checked_alpha(state: GeneralizedDynamicsState) -> np.ndarray:
    alpha_t = np.asarray(state.alpha(state.t), dtype=np.float64)
    if alpha_t.shape != (state.d.node_count,):
        raise ValueError("alpha(t) has the wrong shape")
    if np.any(alpha_t < 0.0):
        raise ValueError("alpha(t) must be nonnegative")
    if state._last_alpha is not None and np.any(alpha_t < state._last_alpha - ALPHA_MONOTONE_TOL):
        raise ValueError(f"alpha decreased at t={state.t}; the driving sequence must be non-decreasing")
    return alpha_t


def generalized_step(state: GeneralizedDynamicsState) -> GeneralizedDynamicsState:
    """Synchronous update of both vectors from the step-t buffers."""
    gather = state._gather if state._gather is not None else _ArcGather(state.d, state.r, state.s)
    alpha_t = _checked_alpha(state)
    beta_t = np.asarray(state.beta(state.t), dtype=np.float64)
    n = gather.size
    shrink = 1.0 - state.omega
    contrib = np.bincount(
        gather.arc_from, weights=gather.coef * shrink[gather.arc_to], minlength=n
    )
    omega_new = 1.0 / (1.0 + alpha_t + contrib)
    flow = state.omega * state.eta
    eta_new = 1.0 + beta_t + np.bincount(
        gather.arc_from, weights=flow[gather.arc_to], minlength=n
    )
    return GeneralizedDynamicsState(
        d=state.d,
        omega=omega_new,
        eta=eta_new,
        alpha=state.alpha,
        beta=state.beta,
        r=state.r,
        s=state.s,
        t=state.t + 1,
        _last_alpha=alpha_t,
        _gather=gather,
    )


def run_generalized(
    state: GeneralizedDynamicsState,
    steps: int,
    stop_eta_above: Optional[float] = None,
) -> GeneralizedDynamicsState:
    """Apply up to ``steps`` updates; optionally stop once eta crosses a bound."""
    for _ in range(steps):
        state = generalized_step(state)
        if stop_eta_above is not None and float(state.eta.max()) > stop_eta_above:
            break
    return state


def check_convergence_hypothesis(d: Digraph, alpha_support: Iterable[int]) -> frozenset[int]:
    """Nodes of nontrivial strongly connected components that cannot reach the support.

    An empty result means the structural convergence hypothesis holds:
    from every node of every nontrivial strongly connected component
    some node with a nonzero driving sequence is reachable.
    """
    support = set(int(v) for v in alpha_support)
    for v in support:
        if not 0 <= v < d.node_count:
            raise ValueError(f"support node {v} outside range")
    cond = condensation(d)
    suspects = [v for comp in cond.nontrivial_components() for v in comp]
    if not suspects:
        return frozenset()
    reverse = Digraph(d.node_count, tuple((w, v) for v, w in d.arcs))
    can_reach_support = reachable_set(reverse, support)
    return frozenset(v for v in suspects if v not in can_reach_support)


def spectral_radius_diagnostic(
    d: Digraph,
    omega: Sequence[float],
    tol: float = 1e-8,
    max_iter: int = 10**4,
) -> float:
    """Spectral radius of (adjacency matrix) * diag(omega), by power iteration.

    The iteration runs on the matrix plus the identity, which leaves the
    radius shifted by exactly one but makes it converge on periodic
    structures such as directed cycles.
    """
    n = d.node_count
    w = np.asarray(omega, dtype=np.float64)
    if w.shape != (n,):
        raise ValueError("omega must have one entry per digraph node")
    if np.any(w <= 0.0) or np.any(w > 1.0):
        raise ValueError("omega entries must lie in (0, 1]")
    a = np.zeros((n, n))
    for v, u in d.arcs:
        a[v, u] = w[u]
    shifted = a + np.eye(n)

    x = np.ones(n) / np.sqrt(n)
    estimate = 0.0
    for _ in range(max_iter):
        y = shifted @ x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0
        x_new = y / norm
        estimate = float(x_new @ (shifted @ x_new))
        if float(np.linalg.norm(shifted @ x_new - estimate * x_new)) <= tol:
            return max(estimate - 1.0, 0.0)
        x = x_new
    raise ArithmeticError(
        f"power iteration did not converge in {max_iter} steps; last estimate {estimate - 1.0:.6e}"
    )


def _fractional_ranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sorted_x = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(a: Sequence[float], b: Sequence[float]) -> float:
    """Rank-order correlation: Pearson correlation of fractional ranks.

    Ties receive the average of the ranks they span.  Raises if either
    input has no rank variance (the coefficient is undefined).
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length vectors")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    rx = _fractional_ranks(x)
    ry = _fractional_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    vx = float(rx @ rx)
    vy = float(ry @ ry)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("rank variance is zero; coefficient undefined")
    return float((rx @ ry) / np.sqrt(vx * vy))


def scatter_pairs(exact: Sequence[float], approx: Sequence[float]) -> list[tuple[float, float]]:
    """Index-aligned (exact, approximate) pairs for 45-degree comparison plots."""
    x = np.asarray(exact, dtype=np.float64)
    y = np.asarray(approx, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length vectors")
    return [(float(e), float(a)) for e, a in zip(x, y)]
