"""
GOSSIP protocols: UniformGossip, Superstep (NeighborExchange), rumor spreading
by repeated Superstep, DirectExchange scheduling and the random-unheard-neighbor
baseline
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Hashable, List, Optional, Tuple

from .config import ProtocolsConfig
from .engine import (
    AUX_A,
    AUX_B,
    PAYLOAD,
    ExchangeStats,
    KnowledgeState,
    MessageId,
    ProcessTrace,
    RandomSource,
    ActivationSet,
    apply_round,
    replay,
    reverse,
    run_process,
    sample_activation,
    symmetric_closure,
)
from .errors import (
    Disconnected,
    InvalidConfig,
    InvalidParams,
    IterationCapExceeded,
    NonConvergence,
    ScheduleGraphMismatch,
)
from .graph import DirectedEdgeSet, Edge, Graph, hereditary_density

logger = logging.getLogger(__name__)


def _require_protocol_graph(g: Graph) -> None:
    if not g.is_unweighted():
        raise InvalidParams(f"protocols run on unweighted loop-free graphs, {g.name} is not")


def _payload_mask(state: KnowledgeState, nodes, tag: Hashable = 0) -> int:
    mask = 0
    for v in nodes:
        slot = state.registry.slot(MessageId(PAYLOAD, v, tag))
        if slot is not None:
            mask |= 1 << slot
    return mask


def rumor_complete(state: KnowledgeState, tag: Hashable = 0) -> bool:
    """Every node knows every node's payload"""
    full = _payload_mask(state, range(state.n), tag)
    return all(mask & full == full for mask in state.masks)


def neighbors_exchanged(g: Graph, state: KnowledgeState, tag: Hashable = 0) -> bool:
    """Every node knows the payload of each of its neighbors"""
    for u in range(g.n):
        wanted = _payload_mask(state, g.neighbors(u), tag)
        if state.masks[u] & wanted != wanted:
            return False
    return True


# --- UniformGossip ----------------------------------------------------------------

@dataclass
class GossipReport:
    rounds: int
    completion_round: Optional[int]
    stats: ExchangeStats
    trace: ProcessTrace

    @property
    def completed(self) -> bool:
        return self.completion_round is not None


def uniform_gossip(g: Graph, tau: int, rng: RandomSource) -> GossipReport:
    """Run tau rounds of UniformGossip over all edges with per-node payloads,
    noting the first round after which the Rumor problem is solved."""
    _require_protocol_graph(g)
    if tau < 0:
        raise InvalidParams(f"tau must be non-negative, got {tau}")
    state = KnowledgeState.initial(g.n)
    completion = 0 if rumor_complete(state) else None
    rounds = []
    for r in range(tau):
        activation = sample_activation(g, None, rng, r, "uniform_gossip")
        state = apply_round(state, symmetric_closure(activation))
        rounds.append(activation)
        if completion is None and rumor_complete(state):
            completion = r + 1
    return GossipReport(tau, completion, state.stats, ProcessTrace(tuple(rounds)))


# --- Superstep ---------------------------------------------------------------------

def default_tau(g: Graph, c_tau: float = 2.0) -> int:
    """tau = ceil(c_tau * log2(2m)^2); 1 for an edgeless graph"""
    if c_tau <= 0:
        raise InvalidConfig(f"c_tau must be positive, got {c_tau}")
    if g.m == 0:
        return 1
    log_2m = math.log2(2 * g.m)
    return max(1, math.ceil(c_tau * log_2m * log_2m))


def iteration_cap(m: int, slack: int = 8) -> int:
    return 4 * math.ceil(math.log2(2 * m + 2)) + slack


@dataclass
class IterationRecord:
    """Sizes and exact checks of one Superstep iteration"""
    index: int
    frontier_size: int
    pruned_size: int
    symmetry_ok: bool
    reversal_ok: bool
    exchange_ok: bool

    @property
    def ok(self) -> bool:
        return self.symmetry_ok and self.reversal_ok and self.exchange_ok


@dataclass
class SuperstepReport:
    tau: int
    iterations: int = 0
    records: List[IterationRecord] = field(default_factory=list)
    exchanged: FrozenSet[Edge] = frozenset()
    completed: bool = False
    traces: List[ProcessTrace] = field(default_factory=list)
    stats: ExchangeStats = ExchangeStats()
    state: Optional[KnowledgeState] = None

    @property
    def total_rounds(self) -> int:
        return 2 * self.tau * self.iterations

    @property
    def frontier_sizes(self) -> List[int]:
        return [r.frontier_size for r in self.records]

    @property
    def pruned_sizes(self) -> List[int]:
        return [r.pruned_size for r in self.records]

    @property
    def invariants_ok(self) -> bool:
        return all(r.ok for r in self.records)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau": self.tau,
            "iterations": self.iterations,
            "total_rounds": self.total_rounds,
            "frontier_sizes": self.frontier_sizes,
            "pruned_sizes": self.pruned_sizes,
            "completed": self.completed,
            "invariants_ok": self.invariants_ok,
            "connections": self.stats.connections,
            "transfers": self.stats.transfers,
        }


def superstep(g: Graph, tau: int, rng: RandomSource, state: Optional[KnowledgeState] = None,
              payload_tag: Hashable = 0, config: Optional[ProtocolsConfig] = None) -> SuperstepReport:
    """One Superstep invocation: after it every neighbor pair has exchanged
    payloads (with high probability; otherwise IterationCapExceeded).

    `state` carries knowledge from earlier invocations; payload identifiers
    are MessageId("payload", v, payload_tag).
    """
    config = config or ProtocolsConfig()
    _require_protocol_graph(g)
    if tau < 1:
        raise InvalidParams(f"tau must be at least 1, got {tau}")
    if state is None:
        state = KnowledgeState.initial(g.n, payload_tag)
    state = KnowledgeState(state.registry, state.masks)
    cap = iteration_cap(g.m, config.superstep_slack)

    report = SuperstepReport(tau=tau)
    frontier = g.directed_edges()
    exchanged = set()
    i = 0
    while frontier:
        if i >= cap:
            report.exchanged = frozenset(exchanged)
            report.state = state
            report.stats = state.stats
            raise IterationCapExceeded(f"frontier of {g.name} still has {len(frontier)} edges "
                                       f"after {cap} iterations", report)
        iteration_rng = rng.child(f"superstep/{i}")
        aux_tag = (payload_tag, i)
        symmetry_ok = frontier.is_symmetric()

        state = state.with_messages(AUX_A, aux_tag)
        state, forward = run_process(g, frontier, tau, iteration_rng, state, purpose="forward")
        x = {(u, w): state.knows(u, MessageId(AUX_A, w, aux_tag)) for u, w in frontier}

        state = state.with_messages(AUX_B, aux_tag)
        backward = reverse(forward)
        state = replay(g, backward, state)
        y = {(u, w): state.knows(u, MessageId(AUX_B, w, aux_tag)) for u, w in frontier}

        pruned = [(u, w) for u, w in frontier if x[(u, w)] or y[(u, w)]]
        reversal_ok = all(x[(u, w)] == y.get((w, u), False) for u, w in frontier)
        exchange_ok = all(state.knows(u, MessageId(PAYLOAD, w, payload_tag))
                          and state.knows(w, MessageId(PAYLOAD, u, payload_tag)) for u, w in pruned)
        if not (reversal_ok and exchange_ok and symmetry_ok):
            logger.warning(f"Superstep iteration {i} on {g.name}: symmetry={symmetry_ok} "
                           f"reversal={reversal_ok} exchange={exchange_ok}")

        report.records.append(IterationRecord(i, len(frontier), len(pruned), symmetry_ok,
                                              reversal_ok, exchange_ok))
        report.traces.extend([forward, backward])
        exchanged.update((u, w) if u < w else (w, u) for u, w in pruned)
        logger.debug(f"Superstep iteration {i}: |F|={len(frontier)} |P|={len(pruned)}")

        frontier = frontier - pruned
        state = state.discard({AUX_A, AUX_B})
        i += 1

    report.iterations = i
    report.exchanged = frozenset(exchanged)
    report.completed = report.exchanged == frozenset(g.edges())
    report.state = state
    report.stats = state.stats
    return report


@dataclass
class RumorReport:
    rounds: int
    invocations: int
    diameter: int
    completed: bool
    reports: List[SuperstepReport] = field(default_factory=list)

    @property
    def within_diameter(self) -> bool:
        return self.invocations <= self.diameter

    @property
    def invariants_ok(self) -> bool:
        return self.within_diameter and all(r.invariants_ok for r in self.reports)

    @property
    def iterations(self) -> int:
        return sum(r.iterations for r in self.reports)

    @property
    def stats(self) -> ExchangeStats:
        total = ExchangeStats()
        for r in self.reports:
            total = total.merged(r.stats)
        return total


def rumor_by_superstep(g: Graph, tau: int, rng: RandomSource,
                       config: Optional[ProtocolsConfig] = None) -> RumorReport:
    """Repeat Superstep until every node knows every payload.

    Stops after D + rumor_slack invocations; `within_diameter` reports
    whether D sufficed.
    """
    config = config or ProtocolsConfig()
    if not g.is_connected():
        raise Disconnected(f"{g.name} is not connected")
    diameter = g.diameter()
    cap = max(diameter, 1) + config.rumor_slack
    state = KnowledgeState.initial(g.n)
    reports: List[SuperstepReport] = []
    while not rumor_complete(state) and len(reports) < cap:
        report = superstep(g, tau, rng.child(f"rumor/{len(reports)}"), state, config=config)
        reports.append(report)
        state = report.state
    completed = rumor_complete(state)
    rounds = sum(r.total_rounds for r in reports)
    if len(reports) > diameter:
        logger.warning(f"Rumor on {g.name} needed {len(reports)} invocations, more than D={diameter}")
    logger.info(f"Rumor on {g.name}: {len(reports)} invocations (D={diameter}), {rounds} rounds")
    return RumorReport(rounds, len(reports), diameter, completed, reports)


# --- DirectExchange ------------------------------------------------------------------

@dataclass(frozen=True)
class ExchangeSchedule:
    """Per-node ordered lists of neighbors to contact directly"""
    contacts: Tuple[Tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.contacts)

    @property
    def total_rounds(self) -> int:
        return max((len(c) for c in self.contacts), default=0)

    def initiations(self) -> List[int]:
        return [len(c) for c in self.contacts]

    def activations(self) -> ProcessTrace:
        """Round k: every node contacts the k-th entry of its list"""
        return ProcessTrace(tuple(
            ActivationSet({u: c[k] for u, c in enumerate(self.contacts) if k < len(c)})
            for k in range(self.total_rounds)
        ))

    def verify_schedule_covers(self, g: Graph) -> bool:
        covered = {(u, w) if u < w else (w, u) for u, c in enumerate(self.contacts) for w in c}
        return self.n == g.n and covered >= set(g.edges())


@dataclass
class DirectExchangeReport:
    schedule: ExchangeSchedule
    rounds: int
    initiations: List[int]
    density: int
    epsilon: float
    phases: int
    windows: int
    covers_ok: bool
    initiation_bound_ok: bool
    round_bound_ok: bool

    @property
    def completed(self) -> bool:
        return self.covers_ok

    @property
    def invariants_ok(self) -> bool:
        return self.covers_ok and self.initiation_bound_ok and self.round_bound_ok


def initiation_bound(density: int, epsilon: float) -> float:
    return 2 * (1 + epsilon) ** 2 * density


def direct_exchange_round_bound(g: Graph, density: int, epsilon: float, c_dx: float = 128.0) -> float:
    log_n = max(1.0, math.log2(g.n)) if g.n else 1.0
    return c_dx * max(density, 1) * log_n / epsilon ** 2


def direct_exchange(g: Graph, epsilon: float,
                    config: Optional[ProtocolsConfig] = None) -> DirectExchangeReport:
    """Lockstep simulation of DirectExchange.

    Every phase raises delta' by (1 + epsilon) and runs ceil(c_in log2 n / epsilon)
    windows of ceil(delta') rounds. In a window each active node with at most
    delta' unheard neighbors contacts all of them and terminates.
    """
    config = config or ProtocolsConfig()
    _require_protocol_graph(g)
    if epsilon <= 0:
        raise InvalidParams(f"epsilon must be positive, got {epsilon}")

    heard: List[set] = [set() for _ in range(g.n)]
    active = {u for u in range(g.n) if g.degree(u) > 0}
    contacts: List[List[int]] = [[] for _ in range(g.n)]
    windows_per_phase = max(1, math.ceil(config.c_in * math.log2(max(g.n, 2)) / epsilon))
    delta_prime, rounds, phases, windows = 1.0, 0, 0, 0

    while active:
        if delta_prime > g.n:
            raise NonConvergence(f"delta' = {delta_prime:.2f} exceeds n = {g.n} "
                                 f"with {len(active)} active nodes")
        delta_prime *= 1 + epsilon
        phases += 1
        for _ in range(windows_per_phase):
            if not active:
                break
            initiators = {}
            for u in sorted(active):
                unheard = [w for w in g.neighbors(u) if w not in heard[u]]
                if len(unheard) <= delta_prime:
                    initiators[u] = unheard
            for u, targets in initiators.items():
                contacts[u].extend(targets)
                for w in targets:
                    heard[u].add(w)
                    heard[w].add(u)
            active.difference_update(initiators)
            active = {u for u in active if len(heard[u]) < g.degree(u)}
            rounds += math.ceil(delta_prime)
            windows += 1
        logger.debug(f"DirectExchange phase {phases}: delta'={delta_prime:.3f}, {len(active)} active")

    schedule = ExchangeSchedule(tuple(tuple(c) for c in contacts))
    density = hereditary_density(g)
    initiations = schedule.initiations()
    report = DirectExchangeReport(
        schedule=schedule,
        rounds=rounds,
        initiations=initiations,
        density=density,
        epsilon=epsilon,
        phases=phases,
        windows=windows,
        covers_ok=schedule.verify_schedule_covers(g),
        initiation_bound_ok=max(initiations, default=0) <= initiation_bound(density, epsilon) + 1e-9,
        round_bound_ok=rounds <= direct_exchange_round_bound(g, density, epsilon, config.c_dx),
    )
    logger.info(f"DirectExchange on {g.name}: {rounds} rounds, {phases} phases, "
                f"max initiations {max(initiations, default=0)} (delta={density})")
    return report


def schedule_replay(g: Graph, schedule: ExchangeSchedule) -> int:
    """Execute only the direct contacts; returns the rounds used"""
    if schedule.n != g.n:
        raise ScheduleGraphMismatch(f"schedule has {schedule.n} nodes, {g.name} has {g.n}")
    for u, targets in enumerate(schedule.contacts):
        for w in targets:
            if not g.has_edge(u, w):
                raise ScheduleGraphMismatch(f"scheduled contact ({u}, {w}) is not an edge of {g.name}")
    trace = schedule.activations()
    state = replay(g, trace, KnowledgeState.initial(g.n))
    if not neighbors_exchanged(g, state):
        raise ScheduleGraphMismatch(f"schedule does not cover every edge of {g.name}")
    return len(trace)


def schedule_lower_bound(g: Graph) -> int:
    """Any direct schedule needs at least delta rounds"""
    return hereditary_density(g)


# --- baseline ----------------------------------------------------------------------------

@dataclass
class BaselineReport:
    rounds: int
    completed: bool
    stats: ExchangeStats


def greedy_unheard_baseline(g: Graph, rng: RandomSource, round_cap: int) -> BaselineReport:
    """Each round every node that has not heard some neighbor's payload
    (directly or indirectly) contacts one such neighbor uniformly at random."""
    _require_protocol_graph(g)
    if round_cap < 1:
        raise InvalidParams(f"round_cap must be at least 1, got {round_cap}")
    state = KnowledgeState.initial(g.n)
    slots = [state.registry.slot(MessageId(PAYLOAD, v)) for v in range(g.n)]
    rounds = 0
    while rounds < round_cap:
        draws = rng.uniforms("baseline", rounds, g.n)
        choices = {}
        for u in range(g.n):
            mask = state.masks[u]
            unheard = [w for w in g.neighbors(u) if not mask >> slots[w] & 1]
            if unheard:
                choices[u] = unheard[min(int(draws[u] * len(unheard)), len(unheard) - 1)]
        if not choices:
            break
        state = apply_round(state, symmetric_closure(ActivationSet(choices)))
        rounds += 1
    completed = neighbors_exchanged(g, state)
    logger.debug(f"Baseline on {g.name}: {rounds} rounds, completed={completed}")
    return BaselineReport(rounds, completed, state.stats)
