"""
Reference LOCAL executor and GOSSIP-model simulators of LOCAL algorithms.

Every simulator drives the algorithm with the same loop as the reference
executor; they differ only in the exchanger that delivers one LOCAL round of
broadcasts through the GOSSIP engine.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .config import SimulatorConfig
from .engine import PAYLOAD, ActivationSet, KnowledgeState, MessageId, ProcessTrace, RandomSource, replay
from .errors import RoundCapExceeded, UncertifiedSpanner
from .graph import Graph
from .local_algorithms import Inbox, LocalAlgorithm, make_tape
from .protocols import (
    default_tau,
    direct_exchange,
    direct_exchange_round_bound,
    initiation_bound,
    iteration_cap,
    superstep,
)
from .spanner import SpannerResult, verify_stretch

logger = logging.getLogger(__name__)

LOCAL = "local"
SUPERSTEP = "superstep"
ROUND_ROBIN = "round_robin"
DIRECT_EXCHANGE = "direct_exchange"
SPANNER = "spanner"


@dataclass
class SimulationOutcome:
    kind: str
    outputs: List[Any]
    model_rounds: int
    gossip_rounds: int = 0
    equivalent: Optional[bool] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def invariants_ok(self) -> bool:
        return self.equivalent is not False and self.details.get("round_bound_ok", True)


# --- exchangers --------------------------------------------------------------------

class Exchanger(ABC):
    """Delivers one LOCAL round of broadcasts and accounts its GOSSIP rounds"""

    kind = LOCAL

    def __init__(self, g: Graph):
        self.g = g
        self.gossip_rounds = 0

    @abstractmethod
    def exchange(self, index: int, outgoing: Dict[int, Any]) -> Dict[int, Inbox]:
        ...

    def details(self) -> Dict[str, Any]:
        return {}


def _inboxes(g: Graph, state: KnowledgeState, outgoing: Dict[int, Any], tag: int) -> Dict[int, Inbox]:
    """A node receives a neighbor's broadcast iff it learned that neighbor's payload"""
    inboxes: Dict[int, Inbox] = {}
    for v in range(g.n):
        inbox = {u: outgoing[u] for u in g.neighbors(v)
                 if u in outgoing and state.knows(v, MessageId(PAYLOAD, u, tag))}
        if inbox:
            inboxes[v] = inbox
    return inboxes


class LocalExchanger(Exchanger):

    def exchange(self, index, outgoing):
        return {v: {u: outgoing[u] for u in self.g.neighbors(v) if u in outgoing} for v in range(self.g.n)}


class SuperstepExchanger(Exchanger):
    """One Superstep invocation per LOCAL round"""

    kind = SUPERSTEP

    def __init__(self, g: Graph, tau: int, rng: RandomSource, config: SimulatorConfig):
        super().__init__(g)
        self.tau = tau
        self.rng = rng
        self.config = config
        self.invocation_rounds: List[int] = []

    def exchange(self, index, outgoing):
        state = KnowledgeState.initial(self.g.n, tag=index)
        report = superstep(self.g, self.tau, self.rng.child(f"local/{index}"), state,
                           payload_tag=index, config=self.config.protocols)
        self.invocation_rounds.append(report.total_rounds)
        self.gossip_rounds += report.total_rounds
        return _inboxes(self.g, report.state, outgoing, index)

    def details(self):
        cap = iteration_cap(self.g.m, self.config.protocols.superstep_slack)
        bound = len(self.invocation_rounds) * 2 * self.tau * cap
        return {"tau": self.tau, "invocation_rounds": self.invocation_rounds,
                "round_bound": bound, "round_bound_ok": self.gossip_rounds <= bound}


class RoundRobinExchanger(Exchanger):
    """Delta GOSSIP rounds per LOCAL round; node u contacts its k-th neighbor in round k"""

    kind = ROUND_ROBIN

    def __init__(self, g: Graph):
        super().__init__(g)
        self.trace = ProcessTrace(tuple(
            ActivationSet({u: g.neighbors(u)[k] for u in range(g.n) if g.degree(u) > k})
            for k in range(g.max_degree)
        ))

    def exchange(self, index, outgoing):
        state = replay(self.g, self.trace, KnowledgeState.initial(self.g.n, tag=index))
        self.gossip_rounds += len(self.trace)
        return _inboxes(self.g, state, outgoing, index)

    def details(self):
        return {"rounds_per_local_round": len(self.trace)}


class DirectExchangeExchanger(Exchanger):
    """Discovers a direct schedule once, then replays it every LOCAL round"""

    kind = DIRECT_EXCHANGE

    def __init__(self, g: Graph, epsilon: float, config: SimulatorConfig):
        super().__init__(g)
        self.epsilon = epsilon
        self.config = config
        self.report = None
        self.trace: Optional[ProcessTrace] = None
        self.local_rounds = 0

    def exchange(self, index, outgoing):
        if self.report is None:
            self.report = direct_exchange(self.g, self.epsilon, self.config.protocols)
            self.trace = self.report.schedule.activations()
            self.gossip_rounds += self.report.rounds
        state = replay(self.g, self.trace, KnowledgeState.initial(self.g.n, tag=index))
        self.gossip_rounds += len(self.trace)
        self.local_rounds += 1
        return _inboxes(self.g, state, outgoing, index)

    def details(self):
        if self.report is None:
            return {"discovery_rounds": 0, "replay_rounds": 0, "round_bound_ok": True}
        density = self.report.density
        bound = (direct_exchange_round_bound(self.g, density, self.epsilon, self.config.protocols.c_dx)
                 + self.local_rounds * initiation_bound(density, self.epsilon))
        return {
            "discovery_rounds": self.report.rounds,
            "replay_rounds": len(self.trace),
            "density": density,
            "round_bound": bound,
            "round_bound_ok": self.gossip_rounds <= bound and self.report.invariants_ok,
        }


class SpannerExchanger(Exchanger):
    """alpha flooding rounds of relay sets on the spanner per LOCAL round,
    each realized by the inner exchanger over the spanner"""

    kind = SPANNER

    def __init__(self, g: Graph, spanner: Graph, alpha: int, inner: Exchanger):
        super().__init__(g)
        self.spanner = spanner
        self.alpha = alpha
        self.inner = inner

    def exchange(self, index, outgoing):
        relays: Dict[int, Dict[int, Any]] = {v: {v: message} for v, message in outgoing.items()}
        for j in range(self.alpha):
            bundles = {v: dict(r) for v, r in relays.items() if r}
            received = self.inner.exchange(index * self.alpha + j, bundles)
            for v, inbox in received.items():
                merged = relays.setdefault(v, {})
                for bundle in inbox.values():
                    merged.update(bundle)
        self.gossip_rounds = self.inner.gossip_rounds
        return {v: {u: relays[v][u] for u in self.g.neighbors(v) if u in relays.get(v, {})}
                for v in range(self.g.n)}

    def details(self):
        return {"alpha": self.alpha, "inner": self.inner.kind, **self.inner.details()}


# --- driver ---------------------------------------------------------------------------

def _execute(g: Graph, alg: LocalAlgorithm, tape_seed: int, exchanger: Exchanger,
             round_cap: int) -> SimulationOutcome:
    states = [alg.init(v, g.neighbors(v), make_tape(tape_seed, v, alg.tape_length)) for v in range(g.n)]
    outgoing: Dict[int, Any] = {}
    for v in range(g.n):
        if not alg.halted(states[v]):
            states[v], message = alg.round(states[v], {})
            if message is not None:
                outgoing[v] = message

    rounds = 0
    while not all(alg.halted(s) for s in states):
        if rounds >= round_cap:
            raise RoundCapExceeded(f"{alg.name} did not halt on {g.name} within {round_cap} rounds")
        inboxes = exchanger.exchange(rounds, outgoing)
        rounds += 1
        fresh: Dict[int, Any] = {}
        for v in range(g.n):
            if alg.halted(states[v]):
                continue
            states[v], message = alg.round(states[v], inboxes.get(v, {}))
            if message is not None:
                fresh[v] = message
        outgoing = fresh

    return SimulationOutcome(exchanger.kind, [alg.output(s) for s in states], rounds,
                             exchanger.gossip_rounds, details=exchanger.details())


def run_local(g: Graph, alg: LocalAlgorithm, tape_seed: int,
              config: Optional[SimulatorConfig] = None) -> SimulationOutcome:
    """Synchronous LOCAL reference execution"""
    config = config or SimulatorConfig()
    outcome = _execute(g, alg, tape_seed, LocalExchanger(g), config.simulate.local_round_cap)
    outcome.equivalent = True
    return outcome


def _compare(g: Graph, alg: LocalAlgorithm, tape_seed: int, outcome: SimulationOutcome,
             config: SimulatorConfig) -> SimulationOutcome:
    reference = run_local(g, alg, tape_seed, config)
    outcome.equivalent = outcome.outputs == reference.outputs and outcome.model_rounds == reference.model_rounds
    if not outcome.equivalent:
        logger.warning(f"{outcome.kind} simulation of {alg.name} on {g.name} diverges from LOCAL reference")
    outcome.details["reference_rounds"] = reference.model_rounds
    return outcome


def simulate_superstep(g: Graph, alg: LocalAlgorithm, tape_seed: int, tau: Optional[int] = None,
                       rng: Optional[RandomSource] = None,
                       config: Optional[SimulatorConfig] = None) -> SimulationOutcome:
    config = config or SimulatorConfig()
    tau = tau if tau is not None else default_tau(g, config.protocols.c_tau)
    rng = rng or RandomSource(tape_seed)
    exchanger = SuperstepExchanger(g, tau, rng, config)
    outcome = _execute(g, alg, tape_seed, exchanger, config.simulate.local_round_cap)
    return _compare(g, alg, tape_seed, outcome, config)


def simulate_round_robin(g: Graph, alg: LocalAlgorithm, tape_seed: int,
                         config: Optional[SimulatorConfig] = None) -> SimulationOutcome:
    config = config or SimulatorConfig()
    outcome = _execute(g, alg, tape_seed, RoundRobinExchanger(g), config.simulate.local_round_cap)
    return _compare(g, alg, tape_seed, outcome, config)


def simulate_direct_exchange(g: Graph, alg: LocalAlgorithm, tape_seed: int, epsilon: Optional[float] = None,
                             config: Optional[SimulatorConfig] = None) -> SimulationOutcome:
    config = config or SimulatorConfig()
    epsilon = epsilon if epsilon is not None else config.simulate.epsilon
    exchanger = DirectExchangeExchanger(g, epsilon, config)
    outcome = _execute(g, alg, tape_seed, exchanger, config.simulate.local_round_cap)
    return _compare(g, alg, tape_seed, outcome, config)


def _inner_exchanger(kind: str, s: Graph, tape_seed: int, config: SimulatorConfig) -> Exchanger:
    if kind == DIRECT_EXCHANGE:
        return DirectExchangeExchanger(s, config.simulate.epsilon, config)
    if kind == ROUND_ROBIN:
        return RoundRobinExchanger(s)
    if kind == SUPERSTEP:
        return SuperstepExchanger(s, default_tau(s, config.protocols.c_tau),
                                  RandomSource(tape_seed).child("spanner"), config)
    raise ValueError(f"unknown inner simulator {kind!r}")


def simulate_via_spanner(g: Graph, alg: LocalAlgorithm, tape_seed: int, s: SpannerResult,
                         inner: str = DIRECT_EXCHANGE, alpha: Optional[int] = None,
                         config: Optional[SimulatorConfig] = None) -> SimulationOutcome:
    """Run alg communicating only over the spanner: every LOCAL round on g
    becomes alpha flooding rounds on the spanner, simulated by `inner`."""
    config = config or SimulatorConfig()
    if alpha is None:
        alpha = s.certified_stretch[0] if s.certified_stretch else s.source_rounds
    violation, holds = verify_stretch(g, s.subgraph, alpha, 0, neighbors_only=True)
    if not holds:
        raise UncertifiedSpanner(f"spanner of {g.name} exceeds stretch {alpha} at pair {violation}")
    exchanger = SpannerExchanger(g, s.subgraph, alpha, _inner_exchanger(inner, s.subgraph, tape_seed, config))
    outcome = _execute(g, alg, tape_seed, exchanger, config.simulate.local_round_cap)
    return _compare(g, alg, tape_seed, outcome, config)


def write_equivalence_diff(path: Union[str, Path], reference: SimulationOutcome,
                           outcome: SimulationOutcome) -> int:
    """Dump both output vectors where they differ; returns the number of differing nodes"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# reference: {reference.kind} rounds={reference.model_rounds}",
             f"# simulated: {outcome.kind} rounds={outcome.model_rounds} gossip_rounds={outcome.gossip_rounds}"]
    differing = 0
    for v, (expected, actual) in enumerate(zip(reference.outputs, outcome.outputs)):
        if expected != actual:
            differing += 1
            lines.append(f"{v}\t{expected!r}\t{actual!r}")
    with open(path, 'w') as f:
        f.write("\n".join(lines) + "\n")
    return differing
