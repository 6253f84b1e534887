from __future__ import annotations

import pytest

from kmcheck.dsl import parse_system
from kmcheck.model import Direction
from kmcheck.semantics import (
    ResourceExhausted,
    apply_step,
    build_bounded_graph,
    enabled_steps,
    initial_configuration,
)

from conftest import fixture_system


def test_initial_configuration_shape():
    system = fixture_system("fib.kmc")
    cfg = initial_configuration(system)
    assert cfg.locals == (0, 0, 0)
    assert len(cfg.buffers) == 6  # one queue per ordered role pair
    assert all(buf == () for buf in cfg.buffers)


def test_fib_initially_has_exactly_one_step():
    system = fixture_system("fib.kmc")
    steps = enabled_steps(system, initial_configuration(system), 1)
    assert len(steps) == 1
    (step, nxt) = steps[0]
    assert step.role == "u"
    assert str(step.action) == "m!compute<int>"
    ci = system.channel_index[("u", "m")]
    assert nxt.buffers[ci] == (("compute", "int"),)


def test_step_order_follows_role_then_declaration_order():
    system = parse_system(
        "role a: {b!x<unit>; end} or {b!y<unit>; end}\n"
        "role b: {a?x<unit>; end} or {a?y<unit>; end}\n")
    steps = enabled_steps(system, initial_configuration(system), 1)
    assert [str(s.action) for s, _ in steps] == ["b!x<unit>", "b!y<unit>"]
    # after sending x, only the matching receive is enabled
    _, after = steps[0]
    follow = enabled_steps(system, after, 1)
    assert [(s.role, s.action.label) for s, _ in follow] == [("b", "x")]


def test_receive_blocked_by_mismatched_head():
    system = parse_system(
        "role a: b!x<unit>; b!y<unit>; end\n"
        "role b: {a?y<unit>; a?x<unit>; end} or {a?x<unit>; a?y<unit>; end}\n")
    cfg = initial_configuration(system)
    for _ in range(2):  # a sends x then y
        cfg = enabled_steps(system, cfg, 2)[0][1]
    labels = [s.action.label for s, _ in enabled_steps(system, cfg, 2)]
    assert labels == ["x"]  # only the queue head is receivable


def test_send_blocked_at_full_queue():
    system = fixture_system("flood.kmc")
    cfg = initial_configuration(system)
    cfg = enabled_steps(system, cfg, 1)[0][1]  # a fills a->b
    remaining = [(s.role, s.action.label) for s, _ in enabled_steps(system, cfg, 1)]
    assert remaining == [("b", "msg")]
    # unbounded queues never block sends
    assert len(enabled_steps(system, cfg, None)) == 2


def test_graph_counts_match_frozen_reference(golden):
    for name, pins in golden["graphs"].items():
        system = fixture_system(name)
        for k, (nodes, edges) in pins.items():
            graph = build_bounded_graph(system, int(k))
            assert (len(graph.nodes), len(graph.edges)) == (nodes, edges), name


def test_breadth_first_numbering_and_parents():
    system = fixture_system("fib.kmc")
    graph = build_bounded_graph(system, 1)
    assert graph.initial == 0
    assert graph.nodes[0] == initial_configuration(system)
    assert graph.depth == sorted(graph.depth)  # discovery in depth order
    assert graph.parent[0] is None
    for v in range(1, len(graph.nodes)):
        u, step = graph.parent[v]
        assert graph.depth[v] == graph.depth[u] + 1
        assert apply_step(system, graph.nodes[u], step, 1) == graph.nodes[v]


def test_every_edge_is_a_real_step():
    system = fixture_system("prefetch.kmc")
    graph = build_bounded_graph(system, 2)
    for u, step, v in graph.edges:
        assert apply_step(system, graph.nodes[u], step, 2) == graph.nodes[v]


def test_exploration_is_deterministic():
    system = fixture_system("fib.kmc")
    g1 = build_bounded_graph(system, 2)
    g2 = build_bounded_graph(system, 2)
    assert g1.nodes == g2.nodes
    assert g1.edges == g2.edges
    assert g1.depth == g2.depth


def test_resource_cap_raises_with_count():
    system = fixture_system("fib.kmc")
    with pytest.raises(ResourceExhausted) as info:
        build_bounded_graph(system, 1, max_configs=10)
    assert info.value.configs_seen == 10


def test_bound_must_be_positive():
    with pytest.raises(ValueError):
        build_bounded_graph(fixture_system("fib.kmc"), 0)


def test_apply_step_rejects_disabled_steps():
    system = fixture_system("handshake.kmc")
    cfg = initial_configuration(system)
    ((send_step, after),) = enabled_steps(system, cfg, 1)
    ((recv_step, _),) = enabled_steps(system, after, 1)
    assert apply_step(system, cfg, recv_step, 1) is None  # nothing queued yet
    assert apply_step(system, after, send_step, 1) is None  # already sent
