"""
Round-based GOSSIP execution kernel: activation sampling, symmetric closure,
knowledge propagation, trace recording and trace reversal
"""

import logging
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Hashable, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import AsymmetricClosure, InvalidParams
from .graph import DirectedEdgeSet, Graph

logger = logging.getLogger(__name__)

PAYLOAD = "payload"
AUX_A = "aux_a"
AUX_B = "aux_b"
MARKER = "marker"


def _tag_key(tag: Union[str, int]) -> int:
    # Stable across processes, unlike hash().
    if isinstance(tag, int):
        return tag
    return zlib.crc32(tag.encode("utf-8")) & 0xFFFFFFFF


class RandomSource:
    """Counter-based randomness keyed by (seed, purpose, round, node).

    Each (purpose, round) pair opens an independent Philox stream; node v
    reads position v of it, so identical seeds replay identical choices.
    """

    def __init__(self, seed: int, path: Tuple[int, ...] = ()):
        if seed < 0:
            raise InvalidParams(f"seed must be non-negative, got {seed}")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.path = tuple(path)

    def child(self, tag: Union[str, int]) -> "RandomSource":
        """Independent source for a nested protocol instance"""
        return RandomSource(self.seed, self.path + (_tag_key(tag),))

    def stream(self, purpose: str, round_index: int) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.path + (_tag_key(purpose), round_index))
        return np.random.Generator(np.random.Philox(sequence))

    def uniforms(self, purpose: str, round_index: int, n: int) -> np.ndarray:
        """One uniform draw in [0, 1) per node"""
        return self.stream(purpose, round_index).random(n)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, path={self.path})"


class MessageId(NamedTuple):
    """A message identifier; payload content lives outside the engine"""
    kind: str
    origin: int
    tag: Hashable = 0


class MessageRegistry:
    """Maps message identifiers to bit slots, recycling released slots"""

    def __init__(self):
        self._slots: Dict[MessageId, int] = {}
        self._messages: Dict[int, MessageId] = {}
        self._free: List[int] = []
        self._next = 0

    def register(self, message: MessageId) -> int:
        slot = self._slots.get(message)
        if slot is not None:
            return slot
        slot = self._free.pop() if self._free else self._next
        if slot == self._next:
            self._next += 1
        self._slots[message] = slot
        self._messages[slot] = message
        return slot

    def slot(self, message: MessageId) -> Optional[int]:
        return self._slots.get(message)

    def release(self, messages: Iterable[MessageId]) -> int:
        """Forget messages; returns the bitmask of the freed slots"""
        freed = 0
        for message in messages:
            slot = self._slots.pop(message, None)
            if slot is not None:
                del self._messages[slot]
                self._free.append(slot)
                freed |= 1 << slot
        return freed

    def decode(self, mask: int) -> FrozenSet[MessageId]:
        found = []
        while mask:
            low = mask & -mask
            found.append(self._messages[low.bit_length() - 1])
            mask ^= low
        return frozenset(found)

    def messages(self) -> List[MessageId]:
        return list(self._slots)

    def __len__(self) -> int:
        return len(self._slots)


@dataclass(frozen=True)
class ExchangeStats:
    """Connections (|closure| / 2 per round) and identifier transfers"""
    rounds: int = 0
    connections: int = 0
    transfers: int = 0

    def plus(self, connections: int, transfers: int) -> "ExchangeStats":
        return ExchangeStats(self.rounds + 1, self.connections + connections, self.transfers + transfers)

    def merged(self, other: "ExchangeStats") -> "ExchangeStats":
        return ExchangeStats(self.rounds + other.rounds, self.connections + other.connections,
                             self.transfers + other.transfers)


class KnowledgeState:
    """Per-node sets of known message identifiers, stored as int bitsets.

    States are treated as immutable values; the registry is shared between a
    state and the states derived from it.
    """

    def __init__(self, registry: MessageRegistry, masks: Sequence[int],
                 stats: ExchangeStats = ExchangeStats()):
        self.registry = registry
        self.masks: Tuple[int, ...] = tuple(masks)
        self.stats = stats

    @classmethod
    def empty(cls, n: int, registry: Optional[MessageRegistry] = None) -> "KnowledgeState":
        return cls(registry or MessageRegistry(), [0] * n)

    @classmethod
    def initial(cls, n: int, tag: Hashable = 0, registry: Optional[MessageRegistry] = None) -> "KnowledgeState":
        """Every node knows exactly its own payload"""
        return cls.empty(n, registry).with_messages(PAYLOAD, tag)

    @property
    def n(self) -> int:
        return len(self.masks)

    def with_messages(self, kind: str, tag: Hashable = 0,
                      nodes: Optional[Iterable[int]] = None) -> "KnowledgeState":
        """Each listed node (default all) starts knowing MessageId(kind, v, tag)"""
        masks = list(self.masks)
        for v in (range(self.n) if nodes is None else nodes):
            masks[v] |= 1 << self.registry.register(MessageId(kind, v, tag))
        return KnowledgeState(self.registry, masks, self.stats)

    def discard(self, kinds: Iterable[str]) -> "KnowledgeState":
        """Forget every message of the given kinds and recycle their slots"""
        kinds = set(kinds)
        freed = self.registry.release(m for m in self.registry.messages() if m.kind in kinds)
        keep = ~freed
        return KnowledgeState(self.registry, [mask & keep for mask in self.masks], self.stats)

    def knows(self, u: int, message: MessageId) -> bool:
        slot = self.registry.slot(message)
        return slot is not None and bool(self.masks[u] >> slot & 1)

    def known(self, u: int) -> FrozenSet[MessageId]:
        return self.registry.decode(self.masks[u])

    def holders(self, message: MessageId) -> FrozenSet[int]:
        slot = self.registry.slot(message)
        if slot is None:
            return frozenset()
        return frozenset(u for u, mask in enumerate(self.masks) if mask >> slot & 1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeState):
            return NotImplemented
        return all(self.known(u) == other.known(u) for u in range(self.n)) and self.n == other.n

    def __repr__(self) -> str:
        return f"KnowledgeState(n={self.n}, messages={len(self.registry)})"


@dataclass(frozen=True)
class ActivationSet:
    """One round of choices: node -> chosen neighbor; absent nodes are idle"""
    choices: Dict[int, int] = field(default_factory=dict)

    def edges(self) -> List[Tuple[int, int]]:
        return sorted(self.choices.items())

    def __len__(self) -> int:
        return len(self.choices)


@dataclass(frozen=True)
class ProcessTrace:
    """Ordered activation sets A_1..A_tau of one process run"""
    rounds: Tuple[ActivationSet, ...] = ()

    def __len__(self) -> int:
        return len(self.rounds)

    def __iter__(self):
        return iter(self.rounds)

    def to_lines(self) -> List[str]:
        return [f"{i}: " + " ".join(f"{u}->{w}" for u, w in a.edges()) for i, a in enumerate(self.rounds)]

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "ProcessTrace":
        rounds = []
        for line in lines:
            index, _, body = line.partition(":")
            if int(index) != len(rounds):
                raise InvalidParams(f"trace round {index} out of order")
            choices = {}
            for token in body.split():
                u, _, w = token.partition("->")
                choices[int(u)] = int(w)
            rounds.append(ActivationSet(choices))
        return cls(tuple(rounds))


# --- operations ----------------------------------------------------------------

def sample_activation(g: Graph, frontier: Optional[DirectedEdgeSet], rng: RandomSource,
                      round_index: int, purpose: str = "activation") -> ActivationSet:
    """Every node with an outgoing frontier edge picks one uniformly at random.

    frontier=None stands for all directed edges of g.
    """
    draws = rng.uniforms(purpose, round_index, g.n)
    if frontier is None:
        degrees = g.degrees
        active = np.flatnonzero(degrees)
        offsets = np.minimum((draws[active] * degrees[active]).astype(np.int64), degrees[active] - 1)
        targets = g.indices[g.indptr[active] + offsets]
        return ActivationSet(dict(zip(active.tolist(), targets.tolist())))

    choices = {}
    for u in frontier.sources():
        outs = frontier.out_neighbors(u)
        choices[u] = outs[min(int(draws[u] * len(outs)), len(outs) - 1)]
    return ActivationSet(choices)


def symmetric_closure(a: ActivationSet) -> DirectedEdgeSet:
    """A° = {(u, w): (u, w) in A or (w, u) in A}"""
    pairs = set()
    for u, w in a.choices.items():
        pairs.add((u, w))
        pairs.add((w, u))
    return DirectedEdgeSet(pairs, symmetric=True)


def apply_round(state: KnowledgeState, closure: DirectedEdgeSet) -> KnowledgeState:
    """One simultaneous exchange over every activated edge, using only the
    pre-round knowledge (messages move one hop per round)."""
    if not closure.is_symmetric():
        raise AsymmetricClosure("closure is not symmetric")
    old = state.masks
    new = list(old)
    transfers = 0
    for u, w in closure:
        new[u] |= old[w]
        transfers += old[w].bit_count()
    return KnowledgeState(state.registry, new, state.stats.plus(len(closure) // 2, transfers))


def run_process(g: Graph, frontier: Optional[DirectedEdgeSet], tau: int, rng: RandomSource,
                state: Optional[KnowledgeState] = None,
                purpose: str = "uniform_gossip") -> Tuple[KnowledgeState, ProcessTrace]:
    """tau rounds of UniformGossip restricted to `frontier`, recording the trace"""
    if tau < 0:
        raise InvalidParams(f"tau must be non-negative, got {tau}")
    if frontier is not None:
        for u, w in frontier:
            if not g.has_edge(u, w):
                raise InvalidParams(f"frontier edge ({u}, {w}) is not in {g.name}")
    state = state if state is not None else KnowledgeState.initial(g.n)
    rounds = []
    for r in range(tau):
        activation = sample_activation(g, frontier, rng, r, purpose)
        state = apply_round(state, symmetric_closure(activation))
        rounds.append(activation)
    return state, ProcessTrace(tuple(rounds))


def reverse(k: ProcessTrace) -> ProcessTrace:
    """K^rev: the same activation sets in reversed order"""
    return ProcessTrace(tuple(reversed(k.rounds)))


def replay(g: Graph, trace: ProcessTrace, initial: KnowledgeState) -> KnowledgeState:
    """Re-execute a recorded trace from the given state"""
    state = initial
    for activation in trace:
        for u, w in activation.choices.items():
            if not g.has_edge(u, w):
                raise InvalidParams(f"trace edge ({u}, {w}) is not in {g.name}")
        state = apply_round(state, symmetric_closure(activation))
    return state


def reachability(g: Graph, trace: ProcessTrace) -> List[int]:
    """masks[u] has bit w set iff u is in K({w})"""
    markers = KnowledgeState.empty(g.n).with_messages(MARKER)
    final = replay(g, trace, markers)
    slots = [markers.registry.slot(MessageId(MARKER, w)) for w in range(g.n)]
    masks = []
    for u in range(g.n):
        masks.append(sum(1 << w for w in range(g.n) if final.masks[u] >> slots[w] & 1))
    return masks


def reversal_violations(g: Graph, trace: ProcessTrace) -> List[Tuple[int, int]]:
    """Ordered pairs (u, w) where u in K({w}) disagrees with w in K^rev({u})"""
    forward = reachability(g, trace)
    backward = reachability(g, reverse(trace))
    violations = []
    for u in range(g.n):
        for w in range(g.n):
            if bool(forward[u] >> w & 1) != bool(backward[w] >> u & 1):
                violations.append((u, w))
    return violations


def broadcast_time(g: Graph, source: int, rng: RandomSource, round_cap: int,
                   purpose: str = "broadcast") -> Optional[int]:
    """Rounds of UniformGossip until every node knows the source's message"""
    state = KnowledgeState.empty(g.n).with_messages(PAYLOAD, nodes=[source])
    full = (1 << g.n) - 1
    slot = state.registry.slot(MessageId(PAYLOAD, source))
    for r in range(round_cap):
        if sum(1 << u for u, mask in enumerate(state.masks) if mask >> slot & 1) == full:
            return r
        state = apply_round(state, symmetric_closure(sample_activation(g, None, rng, r, purpose)))
    if all(mask >> slot & 1 for mask in state.masks):
        return round_cap
    return None


# --- trace dump ------------------------------------------------------------------

def dump_traces(path: Union[str, Path], traces: Sequence[ProcessTrace],
                header: Optional[Dict[str, object]] = None) -> None:
    """Write traces as structured text: `# key: value` header, then one
    `# trace k` section per trace with one `round: u->w ...` line per round."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {key}: {value}" for key, value in (header or {}).items()]
    for k, trace in enumerate(traces):
        lines.append(f"# trace {k}")
        lines.extend(trace.to_lines())
    with open(path, 'w') as f:
        f.write("\n".join(lines) + "\n")
    logger.debug(f"Dumped {len(traces)} traces to {path}")


def load_traces(path: Union[str, Path]) -> Tuple[Dict[str, str], List[ProcessTrace]]:
    header: Dict[str, str] = {}
    sections: List[List[str]] = []
    with open(path, 'r') as f:
        for raw in f:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("# trace"):
                sections.append([])
            elif line.startswith("#"):
                key, sep, value = line[1:].partition(":")
                if sep and not sections:
                    header[key.strip()] = value.strip()
            elif sections:
                sections[-1].append(line)
            else:
                raise InvalidParams(f"round line before any trace section: {line!r}")
    return header, [ProcessTrace.from_lines(section) for section in sections]
