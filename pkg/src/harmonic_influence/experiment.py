"""End-to-end experiment pipeline on nested random graphs.

Generates an Erdos-Renyi graph, extracts a spanning tree, reintroduces
a few of the removed edges, and on each of the three nested graphs
compares the exact harmonic influence (grounded Laplacian solves)
against the message passing estimate: convergence traces, scatter
pairs, rank correlation.  Also owns the edge-list file format and the
plot-ready CSV/JSON report files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis, mpa
from .electrical import (
    ConductanceNetwork,
    build_weights,
    exact_message_potentials,
    harmonic_influence_exact,
    uniform_network,
)
from .graphs import (
    UndirectedGraph,
    add_extra_edges,
    diameter,
    erdos_renyi,
    is_connected,
    spanning_tree,
)

NEGLIGIBLE_ERROR = 1e-8
TRACE_THIN_START = 10**4
TRACE_THIN_STRIDE = 10
_TREE_SEED_OFFSET = 10_007
_EXTRA_SEED_OFFSET = 20_011
GRAPH_NAMES = ("spanning_tree", "few_extra_edges", "erdos_renyi")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 50
    p: float = 0.1
    extra_edges: int = 10
    gamma: float = 0.04
    seed: int = 0
    tol: float = 1e-10
    max_iter: int = 10**5
    outputs: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.extra_edges < 0:
            raise ValueError("extra_edges must be nonnegative")
        if not self.gamma > 0.0:
            raise ValueError("gamma must be positive: every node trusts the field")
        if self.tol < 0.0:
            raise ValueError("tol must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass(frozen=True)
class GraphRunReport:
    """Exact-versus-estimate comparison on one graph of the pipeline."""

    name: str
    edge_count: int
    diameter: int
    iterations: int
    converged: bool
    final_residual: float
    spearman_h: float           # NaN when the coefficient is undefined
    max_h_ratio: float
    h_negligible_iter: Optional[int]
    w_negligible_iter: Optional[int]
    h_exact: np.ndarray
    h_estimates: np.ndarray
    w_exact: np.ndarray
    w_limits: np.ndarray
    arc_nodes: tuple[tuple[int, int], ...]
    error_rows: list[tuple[int, float, float]]


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    er_seed_used: int
    graphs: dict[str, GraphRunReport]


def _first_index_at_most(values: list[float], bound: float) -> Optional[int]:
    for t, v in enumerate(values):
        if v <= bound:
            return t
    return None


def _run_one_graph(name: str, g: UndirectedGraph, cfg: ExperimentConfig) -> GraphRunReport:
    net = uniform_network(g, cfg.gamma)
    weights = build_weights(net)
    exact = harmonic_influence_exact(net)
    result = mpa.run_mpa(g, weights, tol=cfg.tol, max_iter=cfg.max_iter, trace=True)
    w_exact = exact_message_potentials(net, result.md)
    errors = mpa.error_trace(result)
    try:
        rho = analysis.spearman(exact.values, result.h_estimates)
    except ValueError:
        rho = math.nan
    return GraphRunReport(
        name=name,
        edge_count=g.edge_count,
        diameter=diameter(g),
        iterations=result.iterations,
        converged=result.converged,
        final_residual=result.final_residual,
        spearman_h=rho,
        max_h_ratio=float(np.max(result.h_estimates / exact.values)),
        h_negligible_iter=_first_index_at_most([e[1] for e in errors], NEGLIGIBLE_ERROR),
        w_negligible_iter=_first_index_at_most([e[2] for e in errors], NEGLIGIBLE_ERROR),
        h_exact=exact.values,
        h_estimates=result.h_estimates,
        w_exact=w_exact,
        w_limits=result.w_limits,
        arc_nodes=result.md.arc_nodes,
        error_rows=errors,
    )


def generate_graphs(cfg: ExperimentConfig) -> tuple[dict[str, UndirectedGraph], int]:
    """The three nested graphs, plus the Erdos-Renyi seed that produced a connected one."""
    er_seed = cfg.seed
    for _ in range(100):
        g_er = erdos_renyi(cfg.n, cfg.p, er_seed)
        if is_connected(g_er):
            break
        er_seed += 1
    else:
        raise RuntimeError(
            f"no connected Erdos-Renyi graph found in 100 attempts from seed {cfg.seed}"
        )
    g_st = spanning_tree(g_er, cfg.seed + _TREE_SEED_OFFSET)
    g_fe = add_extra_edges(g_st, g_er, cfg.extra_edges, cfg.seed + _EXTRA_SEED_OFFSET)
    graphs = {
        "spanning_tree": g_st,
        "few_extra_edges": g_fe,
        "erdos_renyi": g_er,
    }
    return graphs, er_seed


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Full pipeline; writes report files when the config names an output directory."""
    graphs, er_seed = generate_graphs(cfg)
    runs = {name: _run_one_graph(name, g, cfg) for name, g in graphs.items()}
    report = ExperimentReport(config=cfg, er_seed_used=er_seed, graphs=runs)
    if cfg.outputs is not None:
        save_report(report, cfg.outputs)
    return report


# ---------------------------------------------------------------------------
# Edge-list file format
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphFile:
    """Parsed edge-list file: graph, edge conductances, field conductances."""

    graph: UndirectedGraph
    edge_conductance: dict[tuple[int, int], float]
    field_conductance: np.ndarray

    def has_field_edges(self) -> bool:
        return bool(np.any(self.field_conductance > 0.0))

    def network(self, fallback_gamma: Optional[float] = None) -> ConductanceNetwork:
        """Build the electrical network, defaulting the field coupling if absent."""
        gamma = self.field_conductance
        if not self.has_field_edges():
            if fallback_gamma is None:
                raise ValueError("file has no field edges and no fallback gamma given")
            gamma = np.full(self.graph.node_count, float(fallback_gamma))
        return ConductanceNetwork(
            graph=self.graph,
            edge_conductance=dict(self.edge_conductance),
            field_conductance=gamma,
        )


def save_graph(
    path: Path | str,
    graph: UndirectedGraph,
    edge_conductance: Optional[dict[tuple[int, int], float]] = None,
    field_conductance: Optional[np.ndarray] = None,
) -> None:
    """Write the edge-list format; see load_graph for the grammar."""
    lines = [f"n {graph.node_count}"]
    for u, v in graph.edges:
        if edge_conductance is None:
            lines.append(f"{u} {v}")
        else:
            lines.append(f"{u} {v} {edge_conductance[(u, v)]!r}")
    if field_conductance is not None:
        for i, c in enumerate(field_conductance):
            if c > 0.0:
                lines.append(f"{i} f {float(c)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_graph(path: Path | str) -> GraphFile:
    """Parse an edge-list file.

    Grammar, one entry per line: ``n <count>`` (optional, declares the
    node count), ``u v`` (edge with conductance 1), ``u v <c>`` (edge
    with conductance c), ``u f <c>`` (field conductance of node u).
    ``#`` starts a comment; blank lines are ignored.  Without an ``n``
    line the node count is the largest mentioned id plus one.
    """
    declared_n: Optional[int] = None
    edges: dict[tuple[int, int], float] = {}
    field: dict[int, float] = {}
    max_node = -1

    def parse_node(tok: str, lineno: int) -> int:
        nonlocal max_node
        try:
            v = int(tok)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: expected a node id, got {tok!r}") from None
        if v < 0:
            raise ValueError(f"{path}:{lineno}: node ids must be nonnegative")
        max_node = max(max_node, v)
        return v

    for lineno, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "n":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise ValueError(f"{path}:{lineno}: malformed node-count line {raw!r}")
            declared_n = int(tokens[1])
            continue
        if len(tokens) not in (2, 3):
            raise ValueError(f"{path}:{lineno}: malformed line {raw!r}")
        try:
            cond = float(tokens[2]) if len(tokens) == 3 else 1.0
        except ValueError:
            raise ValueError(f"{path}:{lineno}: malformed conductance in {raw!r}") from None
        if tokens[1] == "f":
            u = parse_node(tokens[0], lineno)
            field[u] = field.get(u, 0.0) + cond
            continue
        if tokens[0] == "f":
            raise ValueError(f"{path}:{lineno}: field lines must name the node first")
        u = parse_node(tokens[0], lineno)
        v = parse_node(tokens[1], lineno)
        if u == v:
            raise ValueError(f"{path}:{lineno}: self-loop {u}-{v}")
        key = (u, v) if u < v else (v, u)
        if key in edges:
            raise ValueError(f"{path}:{lineno}: duplicate edge {u}-{v}")
        edges[key] = cond

    n = declared_n if declared_n is not None else max_node + 1
    if n < 1:
        raise ValueError(f"{path}: no nodes declared")
    if max_node >= n:
        raise ValueError(f"{path}: node id {max_node} exceeds declared count {n}")
    graph = UndirectedGraph(n, tuple(edges))
    gamma = np.zeros(n)
    for i, c in field.items():
        gamma[i] = c
    return GraphFile(graph=graph, edge_conductance=edges, field_conductance=gamma)


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

def _json_float(x: float) -> Optional[float]:
    return None if math.isnan(x) else x


def _write_trace_csv(path: Path, rows: list[tuple[int, float, float]]) -> None:
    lines = [
        f"# rows beyond t={TRACE_THIN_START} keep every {TRACE_THIN_STRIDE}th step",
        "t,h_err_l1,w_err_l1",
    ]
    for t, h_err, w_err in rows:
        if t > TRACE_THIN_START and t % TRACE_THIN_STRIDE != 0:
            continue
        lines.append(f"{t},{h_err!r},{w_err!r}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _write_scatter_csv(path: Path, labels: list[str], exact: np.ndarray, approx: np.ndarray, kind: str) -> None:
    lines = [f"{kind},exact,approx"]
    for label, e, a in zip(labels, exact, approx):
        lines.append(f"{label},{float(e)!r},{float(a)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def save_report(report: ExperimentReport, out_dir: Path | str) -> None:
    """Write report.json plus per-graph trace and scatter CSV files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = report.config
    summary = {
        "config": {
            "n": cfg.n,
            "p": cfg.p,
            "extra_edges": cfg.extra_edges,
            "gamma": cfg.gamma,
            "seed": cfg.seed,
            "tol": cfg.tol,
            "max_iter": cfg.max_iter,
        },
        "er_seed_used": report.er_seed_used,
        "graphs": {},
    }
    for name, run in report.graphs.items():
        summary["graphs"][name] = {
            "edge_count": run.edge_count,
            "diameter": run.diameter,
            "iterations": run.iterations,
            "converged": run.converged,
            "final_residual": run.final_residual,
            "spearman_h": _json_float(run.spearman_h),
            "max_h_ratio": run.max_h_ratio,
            "h_negligible_iter": run.h_negligible_iter,
            "w_negligible_iter": run.w_negligible_iter,
        }
        _write_trace_csv(out / f"{name}_trace.csv", run.error_rows)
        node_labels = [str(i) for i in range(len(run.h_exact))]
        _write_scatter_csv(out / f"{name}_scatter_h.csv", node_labels, run.h_exact, run.h_estimates, "node")
        arc_labels = [f"{i}->{j}" for j, i in run.arc_nodes]
        _write_scatter_csv(out / f"{name}_scatter_w.csv", arc_labels, run.w_exact, run.w_limits, "arc")
    (out / "report.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="ascii"
    )
