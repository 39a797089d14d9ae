"""
Integration tests: every GOSSIP simulator reproduces the LOCAL reference
execution of every bundled algorithm
"""

import os
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../..'))

from gossip_sim.engine import RandomSource
from gossip_sim.graph import generate
from gossip_sim.local_algorithms import BfsLabeling, NeighborCollection, RumorFlooding, SourceFlooding, gatherize
from gossip_sim.protocols import default_tau, superstep
from gossip_sim.simulate import (
    run_local,
    simulate_direct_exchange,
    simulate_round_robin,
    simulate_superstep,
    simulate_via_spanner,
)
from gossip_sim.spanner import extract_spanner

GRAPHS = [
    ("path", {"n": 6}),
    ("star", {"n": 5}),
    ("dumbbell", {"k": 4}),
    ("grid", {"rows": 3, "cols": 3}),
    ("erdos_renyi", {"n": 12, "p": 0.35, "seed": 3}),
]


def algorithms(g):
    return [
        SourceFlooding(0, horizon=g.n),
        BfsLabeling(0, horizon=g.n),
        RumorFlooding(g.n),
        NeighborCollection(),
    ]


@pytest.fixture(params=GRAPHS, ids=[family for family, _ in GRAPHS])
def graph(request):
    family, params = request.param
    return generate(family, **params)


class TestEquivalenceMatrix:
    """Outputs and LOCAL round counts match the reference for each simulator"""

    def test_superstep(self, graph):
        """Test the Superstep simulator against the reference"""
        for alg in algorithms(graph):
            outcome = simulate_superstep(graph, alg, tape_seed=11)
            assert outcome.equivalent, alg.name
            assert outcome.details["round_bound_ok"]

    def test_round_robin(self, graph):
        """Test the round-robin simulator against the reference"""
        for alg in algorithms(graph):
            outcome = simulate_round_robin(graph, alg, tape_seed=11)
            assert outcome.equivalent, alg.name
            assert outcome.gossip_rounds == outcome.model_rounds * graph.max_degree

    def test_direct_exchange(self, graph):
        """Test the DirectExchange simulator against the reference"""
        for alg in algorithms(graph):
            outcome = simulate_direct_exchange(graph, alg, tape_seed=11, epsilon=0.5)
            assert outcome.equivalent, alg.name
            assert outcome.invariants_ok

    def test_spanner(self, graph):
        """Test simulation over a spanner extracted from a Superstep run"""
        source = superstep(graph, default_tau(graph), RandomSource(5))
        spanner = extract_spanner(graph, source.traces, source.completed)
        assert spanner.certify(graph)["success"]
        for alg in algorithms(graph):
            outcome = simulate_via_spanner(graph, alg, 11, spanner, inner="round_robin")
            assert outcome.equivalent, alg.name

    def test_gathered_algorithm(self, graph):
        """Test that a gathered algorithm simulates like the plain algorithm"""
        alg = BfsLabeling(0, horizon=graph.n)
        reference = run_local(graph, alg, 11)
        gathered = gatherize(alg, reference.model_rounds)
        assert simulate_round_robin(graph, gathered, 11).outputs == reference.outputs
