"""
Statistical acceptance checks at larger scale (deselect with -m "not slow")
"""

import math
import os
import statistics
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../..'))

from gossip_sim.engine import RandomSource, reversal_violations, run_process
from gossip_sim.graph import generate, hereditary_density
from gossip_sim.protocols import default_tau, direct_exchange, greedy_unheard_baseline, schedule_replay, superstep
from gossip_sim.spanner import message_bound


@pytest.mark.slow
class TestAcceptance:
    """Large-sample checks of the exact invariants and the round bounds"""

    def test_reversal_at_scale(self):
        """Test the reversal property on 100 random traces"""
        for seed in range(100):
            g = generate("erdos_renyi", n=40, p=0.15, seed=seed)
            _, trace = run_process(g, None, 12, RandomSource(seed))
            assert reversal_violations(g, trace) == []

    def test_superstep_on_figure1(self):
        """Test Superstep invariants, round and message bounds on the two-cluster family"""
        g = generate("figure1", n=100)
        tau = default_tau(g)
        log_m = math.log2(2 * g.m)
        rounds = []
        for seed in range(20):
            report = superstep(g, tau, RandomSource(seed))
            assert report.completed
            assert report.invariants_ok
            assert all(a > b for a, b in zip(report.frontier_sizes, report.frontier_sizes[1:]))
            assert report.stats.connections <= message_bound(g, 64.0)
            rounds.append(report.total_rounds)
        assert statistics.median(rounds) <= 16 * log_m ** 3

    def test_direct_exchange_on_random_graphs(self):
        """Test DirectExchange on 20 random graphs"""
        for seed in range(20):
            g = generate("erdos_renyi", n=60, p=0.1, seed=seed)
            report = direct_exchange(g, 0.5)
            assert report.completed
            assert report.invariants_ok
            assert report.schedule.verify_schedule_covers(g)
            assert schedule_replay(g, report.schedule) <= report.rounds
            assert report.density == hereditary_density(g)

    def test_baseline_flat_on_figure1(self):
        """Test that the greedy baseline stays near-constant on figure1 while Superstep keeps its budget"""
        for n in (100, 200, 400):
            g = generate("figure1", n=n)
            for seed in range(10):
                report = greedy_unheard_baseline(g, RandomSource(seed), 10_000)
                assert report.completed
                assert report.rounds == 2

        medians = []
        for n in (100, 200, 400):
            g = generate("figure1", n=n, gadget=3)
            runs = [greedy_unheard_baseline(g, RandomSource(seed), 10_000) for seed in range(15)]
            assert all(r.completed for r in runs)
            medians.append(statistics.median(r.rounds for r in runs))
        assert max(medians) <= 6
        assert medians[-1] / medians[0] < 3

    def test_superstep_budget_on_figure1_gadget(self):
        """Test Superstep median rounds against C log2^3(2m) on figure1 with gadgets"""
        for n in (100, 200, 400):
            g = generate("figure1", n=n, gadget=3)
            tau = default_tau(g)
            reports = [superstep(g, tau, RandomSource(seed)) for seed in range(5)]
            assert all(r.completed and r.invariants_ok for r in reports)
            assert statistics.median(r.total_rounds for r in reports) <= 16 * math.log2(2 * g.m) ** 3
