"""Elementary-cycle enumeration, checked against a brute-force oracle."""

import random

import blueprint_corpus as corpus_mod
from flowmesh.blueprint import find_cycles
from solutions import (
    imaging_blueprint,
    maze_blueprint,
    pipeline_blueprint,
    sudoku_blueprint,
)


def brute_force_cycle_sets(blueprint):
    """All elementary cycles as frozensets of link ids.

    A cycle visits each node once, so its link set determines it uniquely;
    collecting sets dedupes rotations without caring how the implementation
    anchors its output.
    """
    links = blueprint.rpc_links()
    by_source = {}
    for link in links:
        by_source.setdefault(link.source.node, []).append(link)

    found = set()

    def walk(origin, current, path, on_path):
        for link in by_source.get(current, ()):
            nxt = link.target.node
            if nxt == origin:
                found.add(frozenset(l.id for l in path + [link]))
            elif nxt not in on_path:
                walk(origin, nxt, path + [link], on_path | {nxt})

    for origin in by_source:
        walk(origin, origin, [], {origin})
    return found


def as_sets(cycles):
    return {frozenset(link.id for link in cycle) for cycle in cycles}


def test_linear_pipeline_has_no_cycles():
    assert find_cycles(pipeline_blueprint()) == ()


def test_imaging_fan_out_join_is_acyclic():
    assert find_cycles(imaging_blueprint()) == ()


def test_sudoku_has_its_two_request_reply_cycles():
    cycles = find_cycles(sudoku_blueprint())
    assert len(cycles) == 2
    assert as_sets(cycles) == {
        frozenset(
            {
                "gui.requestSudokuEvaluation->evaluator.evaluateSudokuDesign",
                "evaluator.evaluateSudokuDesign->gui.processEvaluationResult",
            }
        ),
        frozenset(
            {
                "evaluator.callAnswersetSolver->solver.solve",
                "solver.solve->evaluator.receiveAnswersetSolverResult",
            }
        ),
    }


def test_maze_has_five_cycles():
    cycles = find_cycles(maze_blueprint())
    assert len(cycles) == 5
    assert as_sets(cycles) == brute_force_cycle_sets(maze_blueprint())


def test_parallel_links_count_as_distinct_cycles():
    from flowmesh.blueprint import Blueprint, ContainerNode, Endpoint, Link
    from flowmesh.proto3 import parse_proto

    proto = """syntax = "proto3";
    message Empty {}
    message P { int32 n = 1; }
    service S {
      rpc a(P) returns (P);
      rpc b(P) returns (P);
    }
    """
    nodes = (
        ContainerNode("x", "img", parse_proto(proto), "S"),
        ContainerNode("y", "img", parse_proto(proto), "S"),
    )
    links = (
        Link(Endpoint("x", "a"), Endpoint("y", "a")),
        Link(Endpoint("x", "b"), Endpoint("y", "b")),
        Link(Endpoint("y", "a"), Endpoint("x", "a")),
    )
    blueprint = Blueprint(name="p", version="1", nodes=nodes, links=links)
    cycles = find_cycles(blueprint)
    assert len(cycles) == 2
    assert as_sets(cycles) == brute_force_cycle_sets(blueprint)


def test_every_cycle_is_a_closed_walk():
    for cycle in find_cycles(maze_blueprint()):
        for prev, nxt in zip(cycle, cycle[1:]):
            assert prev.target.node == nxt.source.node
        assert cycle[-1].target.node == cycle[0].source.node


def test_matches_oracle_on_random_blueprints():
    rng = random.Random(99)
    for _ in range(40):
        blueprint = corpus_mod.make_blueprint(rng).blueprint
        assert as_sets(find_cycles(blueprint)) == brute_force_cycle_sets(blueprint)


def test_output_independent_of_link_order():
    rng = random.Random(5)
    for _ in range(10):
        blueprint = corpus_mod.make_blueprint(rng).blueprint
        if len(blueprint.links) < 2:
            continue
        shuffled_links = list(blueprint.links)
        rng.shuffle(shuffled_links)
        from dataclasses import replace

        shuffled = replace(blueprint, links=tuple(shuffled_links))
        assert find_cycles(shuffled) == find_cycles(blueprint)
