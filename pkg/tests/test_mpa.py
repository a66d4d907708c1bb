import numpy as np
import pytest

from harmonic_influence.analysis import initial_generalized_state, generalized_step
from harmonic_influence.electrical import (
    build_weights,
    exact_message_potentials,
    harmonic_influence_exact,
    uniform_network,
)
from harmonic_influence.graphs import (
    UndirectedGraph,
    diameter,
    erdos_renyi,
    is_connected,
    message_digraph,
    spanning_tree,
)
from harmonic_influence.mpa import (
    error_trace,
    influence_estimates,
    initial_messages,
    mpa_step,
    node_influence_estimate,
    run_mpa,
)

GAMMA = 0.04


def path_graph(n):
    return UndirectedGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def random_connected(n, p, seed):
    g = erdos_renyi(n, p, seed)
    while not is_connected(g):
        seed += 1
        g = erdos_renyi(n, p, seed)
    return g


def random_tree(n, seed):
    return spanning_tree(random_connected(n, min(1.0, 4.0 / n), seed), seed)


def setup(g, gamma=GAMMA):
    net = uniform_network(g, gamma)
    w = build_weights(net)
    md = message_digraph(g)
    return net, w, md


def square_with_chord():
    return UndirectedGraph(4, ((0, 1), (1, 2), (2, 3), (0, 3), (0, 2)))


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------

def test_initialization_all_ones():
    _, w, md = setup(path_graph(4))
    state = initial_messages(md, w)
    assert np.all(state.w_msgs == 1.0)
    assert np.all(state.h_msgs == 1.0)
    assert state.t == 0


def test_leaf_message_constant_from_first_step():
    g = path_graph(4)
    _, w, md = setup(g)
    leaf_arc = md.arc_id[(1, 0)]  # message sent by leaf 0 to its neighbor 1
    expected = 1.0 / (1.0 + w.field_trust[0] / w.trust[(0, 1)])
    state = initial_messages(md, w)
    for t in range(1, 6):
        state = mpa_step(state, w)
        assert state.w_msgs[leaf_arc] == expected, t


def test_two_node_messages():
    g = UndirectedGraph(2, ((0, 1),))
    _, w, md = setup(g)
    state = mpa_step(initial_messages(md, w), w)
    # q_i / Q_ij reduces to the conductance ratio 0.04, so W = 1/1.04
    assert state.w_msgs[md.arc_id[(0, 1)]] == pytest.approx(1.0 / 1.04, abs=1e-15)
    assert state.w_msgs[md.arc_id[(1, 0)]] == pytest.approx(1.0 / 1.04, abs=1e-15)
    assert node_influence_estimate(state, 0) == pytest.approx(1.0 + 1.0 / 1.04, abs=1e-14)


def test_estimate_at_t_zero_is_one_plus_degree():
    g = random_connected(12, 0.3, seed=6)
    _, w, md = setup(g)
    state = initial_messages(md, w)
    for v in range(g.node_count):
        assert node_influence_estimate(state, v) == 1.0 + g.degree(v)
    assert np.array_equal(
        influence_estimates(state, w),
        1.0 + np.array([g.degree(v) for v in range(g.node_count)]),
    )


def test_step_idempotent_at_fixed_point():
    g = random_connected(10, 0.35, seed=3)
    _, w, md = setup(g)
    state = initial_messages(md, w)
    for _ in range(4000):
        state = mpa_step(state, w)
    again = mpa_step(state, w)
    assert np.abs(again.w_msgs - state.w_msgs).max() <= 1e-15
    assert np.abs(again.h_msgs - state.h_msgs).max() <= 1e-15


def test_message_ranges_and_w_monotone():
    g = square_with_chord()
    _, w, md = setup(g)
    state = initial_messages(md, w)
    for _ in range(60):
        nxt = mpa_step(state, w)
        assert np.all(nxt.w_msgs > 0.0) and np.all(nxt.w_msgs <= 1.0)
        assert np.all(nxt.h_msgs >= 1.0)
        assert np.all(nxt.w_msgs <= state.w_msgs)
        assert np.any(nxt.w_msgs < state.w_msgs)  # strict somewhere while converging
        state = nxt


def test_node_estimate_matches_vectorized_estimates_bitwise():
    g = random_connected(15, 0.3, seed=26)
    _, w, md = setup(g)
    state = initial_messages(md, w)
    for _ in range(7):
        state = mpa_step(state, w)
    est = influence_estimates(state, w)
    for v in range(g.node_count):
        assert node_influence_estimate(state, v) == est[v]


def test_run_mpa_matches_manual_stepping():
    g = square_with_chord()
    _, w, md = setup(g)
    result = run_mpa(g, w, tol=1e-10)
    state = initial_messages(md, w)
    for _ in range(result.iterations):
        state = mpa_step(state, w)
    assert np.array_equal(result.w_limits, state.w_msgs)
    assert np.array_equal(result.h_estimates, influence_estimates(state, w))


# ---------------------------------------------------------------------------
# run_mpa
# ---------------------------------------------------------------------------

def test_run_requires_connected_graph_with_edges():
    _, w, _ = setup(path_graph(3))
    with pytest.raises(ValueError):
        run_mpa(UndirectedGraph(3, ((0, 1),)), w)
    g1 = UndirectedGraph(1, ())
    with pytest.raises(ValueError):
        net1 = uniform_network(g1, GAMMA)
        run_mpa(g1, build_weights(net1))


def test_tree_fixes_after_exactly_diameter_steps():
    for seed in range(6):
        tree = random_tree(30, seed=420 + seed)
        _, w, _ = setup(tree)
        d = diameter(tree)
        result = run_mpa(tree, w, tol=0.0, max_iter=1000, trace=True)
        assert result.converged
        assert result.iterations == d + 1  # detection costs one extra step
        assert np.array_equal(result.w_trace[d], result.w_trace[d + 1])
        assert not np.array_equal(result.w_trace[d - 1], result.w_trace[d])


def test_tree_messages_bitwise_fixed_including_h():
    tree = random_tree(25, seed=17)
    _, w, md = setup(tree)
    d = diameter(tree)
    state = initial_messages(md, w)
    snaps = {}
    for t in range(1, d + 2):
        state = mpa_step(state, w)
        if t >= d - 1:
            snaps[t] = state
    assert np.array_equal(snaps[d].w_msgs, snaps[d + 1].w_msgs)
    assert np.array_equal(snaps[d].h_msgs, snaps[d + 1].h_msgs)
    changed = not np.array_equal(snaps[d - 1].w_msgs, snaps[d].w_msgs) or not np.array_equal(
        snaps[d - 1].h_msgs, snaps[d].h_msgs
    )
    assert changed


def test_tree_estimates_match_exact_influence():
    for seed in range(5):
        tree = random_tree(40, seed=900 + seed)
        net, w, md = setup(tree)
        result = run_mpa(tree, w, tol=0.0, max_iter=1000)
        exact = harmonic_influence_exact(net)
        assert np.abs(result.h_estimates - exact.values).max() <= 1e-9


def test_tree_w_limits_match_exact_potentials():
    tree = random_tree(35, seed=31)
    net, w, md = setup(tree)
    result = run_mpa(tree, w, tol=0.0, max_iter=1000)
    w_star = exact_message_potentials(net, result.md)
    assert np.abs(result.w_limits - w_star).max() <= 1e-9


def test_run_smallest_input_two_nodes():
    g = UndirectedGraph(2, ((0, 1),))
    _, w, _ = setup(g)
    result = run_mpa(g, w, tol=0.0, max_iter=10, trace=True)
    # single-edge tree has diameter 1: fixed from the first step
    assert np.array_equal(result.w_trace[1], result.w_trace[2])
    assert result.h_estimates[0] == pytest.approx(1.0 + 1.0 / 1.04, abs=1e-14)


def test_run_flags_non_convergence_without_raising():
    g = square_with_chord()
    _, w, _ = setup(g)
    result = run_mpa(g, w, tol=1e-12, max_iter=5)
    assert not result.converged
    assert result.iterations == 5
    assert result.final_residual > 1e-12


def test_max_iter_equal_diameter_still_returns_fixed_messages():
    tree = random_tree(30, seed=8)
    _, w, _ = setup(tree)
    d = diameter(tree)
    capped = run_mpa(tree, w, tol=0.0, max_iter=d)
    longer = run_mpa(tree, w, tol=0.0, max_iter=1000)
    assert not capped.converged  # it never got to observe a zero residual
    assert np.array_equal(capped.w_limits, longer.w_limits)
    assert np.array_equal(capped.h_estimates, longer.h_estimates)


def test_overestimation_on_cyclic_graph():
    g = random_connected(30, 0.15, seed=55)
    net, w, _ = setup(g)
    result = run_mpa(g, w)
    exact = harmonic_influence_exact(net)
    w_star = exact_message_potentials(net, result.md)
    assert np.all(result.h_estimates >= exact.values - 1e-9)
    assert np.all(result.w_limits <= w_star + 1e-9)


# ---------------------------------------------------------------------------
# error traces
# ---------------------------------------------------------------------------

def test_error_trace_requires_traces():
    g = path_graph(4)
    _, w, _ = setup(g)
    with pytest.raises(ValueError):
        error_trace(run_mpa(g, w, trace=False))


def test_error_trace_lengths_and_final_entry():
    g = square_with_chord()
    _, w, _ = setup(g)
    tol = 1e-10
    result = run_mpa(g, w, tol=tol, trace=True)
    errors = error_trace(result)
    assert len(errors) == result.iterations
    t_last, h_last, w_last = errors[-1]
    assert t_last == result.iterations - 1
    assert h_last <= tol and w_last <= tol


def test_error_trace_tree_zero_from_diameter():
    tree = random_tree(20, seed=5)
    _, w, _ = setup(tree)
    d = diameter(tree)
    result = run_mpa(tree, w, tol=0.0, max_iter=100, trace=True)
    errors = error_trace(result)
    for t, h_err, w_err in errors:
        if t >= d:
            assert h_err == 0.0 and w_err == 0.0
        else:
            assert h_err > 0.0 or w_err > 0.0


# ---------------------------------------------------------------------------
# equivalence with the generalized digraph dynamics
# ---------------------------------------------------------------------------

def test_generalized_dynamics_reproduces_messages_bitwise():
    g = square_with_chord()
    _, w, md = setup(g)
    m = md.size
    alpha = np.array([w.field_trust[i] / w.trust[(i, j)] for j, i in md.arc_nodes])
    # unit conductances: the per-message scaling is 1/C = C = 1
    r = np.ones(m)
    s = np.ones(m)
    gen = initial_generalized_state(md.to_digraph(), alpha, np.zeros(m), r, s)
    msg = initial_messages(md, w)
    for t in range(100):
        gen = generalized_step(gen)
        msg = mpa_step(msg, w)
        assert np.array_equal(gen.omega, msg.w_msgs), t
        assert np.array_equal(gen.eta, msg.h_msgs), t
