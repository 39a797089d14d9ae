"""
Unit tests for UniformGossip, Superstep, rumor spreading, DirectExchange and the baseline
"""

import math
import os
import sys

import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '../..'))

from gossip_sim.config import ProtocolsConfig
from gossip_sim.engine import RandomSource
from gossip_sim.errors import (
    Disconnected,
    InvalidConfig,
    InvalidParams,
    IterationCapExceeded,
    ScheduleGraphMismatch,
)
from gossip_sim.graph import Graph, generate
from gossip_sim.protocols import (
    ExchangeSchedule,
    SuperstepReport,
    default_tau,
    direct_exchange,
    greedy_unheard_baseline,
    initiation_bound,
    iteration_cap,
    neighbors_exchanged,
    rumor_by_superstep,
    rumor_complete,
    schedule_lower_bound,
    schedule_replay,
    superstep,
    uniform_gossip,
)


class TestUniformGossip:
    """Test suite for plain UniformGossip runs"""

    def test_two_nodes_complete_in_one_round(self):
        """Test that K2 solves Rumor after the first round"""
        report = uniform_gossip(generate("path", n=2), 3, RandomSource(0))
        assert report.completion_round == 1
        assert report.completed
        assert len(report.trace) == 3

    def test_single_node_is_complete(self):
        """Test that a single node has nothing to learn"""
        assert uniform_gossip(Graph(1), 0, RandomSource(0)).completion_round == 0

    def test_weighted_graph_rejected(self):
        """Test that protocols refuse weighted graphs"""
        with pytest.raises(InvalidParams):
            uniform_gossip(Graph(2, [(0, 1, 2.0)]), 1, RandomSource(0))


class TestDefaultTau:
    """Test suite for the default per-iteration round budget"""

    def test_examples(self):
        """Test tau for m = 1 and m = 8 at C_tau = 2"""
        assert default_tau(generate("path", n=2)) == 2
        assert default_tau(generate("cycle", n=8)) == 32

    def test_edgeless_graph(self):
        """Test that an edgeless graph gets tau = 1"""
        assert default_tau(Graph(5)) == 1

    def test_non_positive_constant(self):
        """Test that C_tau <= 0 is a configuration error"""
        with pytest.raises(InvalidConfig):
            default_tau(generate("path", n=2), c_tau=0)

    def test_iteration_cap(self):
        """Test the cap formula 4 ceil(log2(2m + 2)) + slack"""
        assert iteration_cap(1, 8) == 4 * 2 + 8
        assert iteration_cap(0, 0) == 4


class TestSuperstep:
    """Test suite for one Superstep invocation"""

    def test_single_edge(self):
        """Test that K2 finishes in one iteration with an empty next frontier"""
        report = superstep(generate("path", n=2), 3, RandomSource(0))
        assert report.iterations == 1
        assert report.frontier_sizes == [2]
        assert report.pruned_sizes == [2]
        assert report.completed
        assert report.total_rounds == 6
        assert len(report.traces) == 2

    def test_edgeless_graph(self):
        """Test that an empty frontier means zero iterations"""
        report = superstep(Graph(3), 1, RandomSource(0))
        assert report.iterations == 0
        assert report.completed
        assert report.total_rounds == 0

    @pytest.mark.parametrize("seed", range(4))
    def test_exchange_on_dumbbell(self, seed):
        """Test completion and the per-iteration invariants"""
        g = generate("dumbbell", k=4)
        report = superstep(g, default_tau(g), RandomSource(seed))
        assert report.completed
        assert report.invariants_ok
        assert neighbors_exchanged(g, report.state)
        assert report.exchanged == frozenset(g.edges())
        sizes = report.frontier_sizes
        assert sizes[0] == 2 * g.m
        assert all(a > b for a, b in zip(sizes, sizes[1:]))

    def test_aux_messages_are_discarded(self):
        """Test that only payloads remain known after an invocation"""
        report = superstep(generate("star", n=4), 4, RandomSource(1))
        kinds = {m.kind for u in range(5) for m in report.state.known(u)}
        assert kinds == {"payload"}

    def test_same_seed_same_report(self):
        """Test that an invocation is reproducible from its seed"""
        g = generate("erdos_renyi", n=14, p=0.3, seed=6)
        a = superstep(g, 8, RandomSource(3))
        b = superstep(g, 8, RandomSource(3))
        assert a.to_dict() == b.to_dict()
        assert a.traces == b.traces

    def test_tau_must_be_positive(self):
        """Test that tau = 0 is refused"""
        with pytest.raises(InvalidParams):
            superstep(generate("path", n=2), 0, RandomSource(0))

    @pytest.mark.slow
    def test_frontier_halves_in_most_iterations(self):
        """Test that at most 5% of iterations keep more than half their frontier and that
        iterations <= 2 log2(2m) in at least 95% of runs"""
        graphs = [
            generate("path", n=16),
            generate("star", n=16),
            generate("dumbbell", k=8),
            generate("erdos_renyi", n=64, p=0.12, seed=2),
            generate("figure1", n=32),
        ]
        iterations = slow_iterations = runs = fast_runs = 0
        for g in graphs:
            tau = default_tau(g)
            for seed in range(20):
                report = superstep(g, tau, RandomSource(seed))
                runs += 1
                fast_runs += report.iterations <= 2 * math.log2(2 * g.m)
                for record in report.records:
                    iterations += 1
                    slow_iterations += record.frontier_size - record.pruned_size > record.frontier_size / 2
        assert slow_iterations <= 0.05 * iterations
        assert fast_runs >= 0.95 * runs

    def test_iteration_cap_carries_partial_report(self, mocker):
        """Test that exceeding the cap raises with the report so far"""
        mocker.patch("gossip_sim.protocols.iteration_cap", return_value=0)
        with pytest.raises(IterationCapExceeded) as exc_info:
            superstep(generate("path", n=3), 2, RandomSource(0))
        assert exc_info.value.report is not None
        assert exc_info.value.report.iterations == 0
        assert not exc_info.value.report.completed


class TestRumor:
    """Test suite for rumor spreading by repeated Superstep"""

    def test_two_nodes(self):
        """Test that K2 needs a single invocation"""
        report = rumor_by_superstep(generate("path", n=2), 2, RandomSource(0))
        assert report.invocations == 1
        assert report.completed

    def test_path_within_diameter_invocations(self):
        """Test that path(5) needs at most D = 4 invocations"""
        g = generate("path", n=5)
        report = rumor_by_superstep(g, default_tau(g), RandomSource(2))
        assert report.completed
        assert 1 <= report.invocations <= 4
        assert report.within_diameter
        assert report.rounds == sum(r.total_rounds for r in report.reports)

    def test_disconnected_graph(self):
        """Test that rumor spreading needs a connected graph"""
        with pytest.raises(Disconnected):
            rumor_by_superstep(Graph(3), 1, RandomSource(0))

    def test_single_node(self):
        """Test that a single node is complete without invocations"""
        report = rumor_by_superstep(Graph(1), 1, RandomSource(0))
        assert report.invocations == 0
        assert report.completed

    def test_stalled_invocations_exceed_diameter(self, mocker):
        """Test that invocations beyond D are counted and flagged"""
        real_superstep = superstep
        calls = []

        def stall_twice(g, tau, rng, state=None, config=None):
            calls.append(tau)
            if len(calls) <= 2:
                return SuperstepReport(tau=tau, completed=True, state=state)
            return real_superstep(g, tau, rng, state, config=config)

        mocker.patch("gossip_sim.protocols.superstep", side_effect=stall_twice)
        g = generate("path", n=3)
        report = rumor_by_superstep(g, default_tau(g), RandomSource(0))
        assert report.completed
        assert report.invocations > report.diameter == 2
        assert not report.within_diameter
        assert not report.invariants_ok

    def test_invocation_cap(self, mocker):
        """Test that rumor spreading stops after D + rumor_slack invocations"""
        mocker.patch("gossip_sim.protocols.superstep",
                     side_effect=lambda g, tau, rng, state=None, config=None:
                     SuperstepReport(tau=tau, completed=True, state=state))
        g = generate("path", n=4)
        report = rumor_by_superstep(g, 1, RandomSource(0), ProtocolsConfig(rumor_slack=2))
        assert not report.completed
        assert report.invocations == 3 + 2


class TestDirectExchange:
    """Test suite for DirectExchange schedule discovery"""

    def test_two_nodes(self):
        """Test that K2 completes in the first window with one initiation each"""
        report = direct_exchange(generate("path", n=2), 0.5)
        assert report.completed
        assert report.windows == 1
        assert max(report.initiations) <= 1

    def test_star_center_never_initiates(self):
        """Test that leaves terminate in the first window and the center initiates nothing"""
        report = direct_exchange(generate("star", n=64), 0.5)
        assert report.initiations[0] == 0
        assert report.initiations[1:] == [1] * 64
        assert report.windows == 1
        assert report.invariants_ok

    def test_tree_initiation_bound(self):
        """Test that tree nodes initiate at most 2 (1 + eps)^2 contacts"""
        report = direct_exchange(generate("tree", n=40, seed=1), 0.5)
        assert report.density == 1
        assert max(report.initiations) <= 4
        assert initiation_bound(1, 0.5) == pytest.approx(4.5)
        assert report.invariants_ok

    def test_edgeless_graph(self):
        """Test that an edgeless graph needs no rounds"""
        report = direct_exchange(Graph(4), 0.5)
        assert report.rounds == 0
        assert report.completed

    def test_invalid_epsilon(self):
        """Test that epsilon must be positive"""
        with pytest.raises(InvalidParams):
            direct_exchange(generate("path", n=3), 0.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_random_graph_bounds(self, seed):
        """Test coverage and both bounds on random graphs"""
        g = generate("erdos_renyi", n=30, p=0.2, seed=seed)
        report = direct_exchange(g, 0.5, ProtocolsConfig())
        assert report.invariants_ok
        assert schedule_replay(g, report.schedule) <= report.rounds


class TestSchedules:
    """Test suite for direct schedules and their replay"""

    def test_replay_rounds(self):
        """Test that replaying uses one round per schedule position"""
        g = generate("clique", n=5)
        report = direct_exchange(g, 0.5)
        rounds = schedule_replay(g, report.schedule)
        assert rounds == report.schedule.total_rounds
        assert rounds >= schedule_lower_bound(g) == 2

    def test_node_count_mismatch(self):
        """Test that a schedule for another node count is refused"""
        with pytest.raises(ScheduleGraphMismatch):
            schedule_replay(generate("path", n=3), ExchangeSchedule(((1,), (0,))))

    def test_foreign_contact(self):
        """Test that contacts must be edges of the graph"""
        with pytest.raises(ScheduleGraphMismatch):
            schedule_replay(generate("path", n=3), ExchangeSchedule(((2,), (), (0,))))

    def test_incomplete_schedule(self):
        """Test that a schedule missing an edge is refused"""
        with pytest.raises(ScheduleGraphMismatch):
            schedule_replay(generate("path", n=3), ExchangeSchedule(((1,), (), ())))

    def test_activations_and_cover(self):
        """Test the round structure of a schedule"""
        schedule = ExchangeSchedule(((1, 2), (2,), ()))
        trace = schedule.activations()
        assert [a.choices for a in trace] == [{0: 1, 1: 2}, {0: 2}]
        assert schedule.verify_schedule_covers(generate("clique", n=3))
        assert not schedule.verify_schedule_covers(generate("clique", n=4))


class TestBaseline:
    """Test suite for the random-unheard-neighbor baseline"""

    def test_two_nodes(self):
        """Test that K2 needs one round"""
        report = greedy_unheard_baseline(generate("path", n=2), RandomSource(0), 10)
        assert report.rounds == 1
        assert report.completed

    @pytest.mark.parametrize("seed", range(20))
    def test_triangle(self, seed):
        """Test that the triangle always finishes within two rounds"""
        report = greedy_unheard_baseline(generate("clique", n=3), RandomSource(seed), 10)
        assert report.completed
        assert report.rounds <= 2

    def test_edgeless_graph(self):
        """Test that nobody has an unheard neighbor"""
        report = greedy_unheard_baseline(Graph(3), RandomSource(0), 10)
        assert report.rounds == 0
        assert report.completed

    def test_round_cap(self):
        """Test that the cap must allow at least one round"""
        with pytest.raises(InvalidParams):
            greedy_unheard_baseline(generate("path", n=2), RandomSource(0), 0)


class TestCompletionPredicates:
    """Test suite for the Rumor and neighbor-exchange predicates"""

    def test_predicates_on_initial_state(self):
        """Test that an initial state solves neither problem on a path"""
        from gossip_sim.engine import KnowledgeState
        g = generate("path", n=3)
        state = KnowledgeState.initial(3)
        assert not rumor_complete(state)
        assert not neighbors_exchanged(g, state)
        assert neighbors_exchanged(Graph(3), state)
