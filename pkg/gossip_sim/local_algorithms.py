"""
LOCAL-model algorithms: the behavioral interface the executors drive, the
shipped algorithms and the gather-then-compute transformation.

Round semantics shared by every executor:
  * init(node, neighbors, tape) builds the state;
  * a zero-cost local step round(state, {}) emits the first broadcast;
  * each communication round every non-halted node receives the messages its
    neighbors emitted in the previous step and calls round(state, inbox);
  * a message emitted in the call that halts a node is still delivered.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional, Tuple

import numpy as np

Tape = Tuple[float, ...]
Inbox = Dict[int, Any]


def make_tape(tape_seed: int, node: int, length: int) -> Tape:
    """Pre-drawn random tape of node, identical for every executor"""
    if length == 0:
        return ()
    sequence = np.random.SeedSequence(tape_seed, spawn_key=(node,))
    return tuple(np.random.Generator(np.random.Philox(sequence)).random(length).tolist())


class LocalAlgorithm(ABC):
    """A synchronous LOCAL algorithm with all randomness on the tape"""

    name = "local"
    tape_length = 0

    @abstractmethod
    def init(self, node: int, neighbors: Tuple[int, ...], tape: Tape) -> Any:
        ...

    @abstractmethod
    def round(self, state: Any, inbox: Inbox) -> Tuple[Any, Optional[Any]]:
        """Process one inbox; returns the new state and a broadcast or None"""

    @abstractmethod
    def halted(self, state: Any) -> bool:
        ...

    @abstractmethod
    def output(self, state: Any) -> Any:
        ...


class SourceFlooding(LocalAlgorithm):
    """Hop distance from `source`; a node halts once it knows its distance.

    `horizon` bounds the rounds a node waits, for graphs where the source
    may be unreachable (such nodes output None).
    """

    name = "flooding"

    def __init__(self, source: int = 0, horizon: Optional[int] = None):
        self.source = source
        self.horizon = horizon

    def init(self, node, neighbors, tape):
        return {"node": node, "dist": 0 if node == self.source else None, "round": 0, "started": False}

    def round(self, state, inbox):
        state = dict(state)
        if not state["started"]:
            state["started"] = True
            return state, state["dist"]
        state["round"] += 1
        if state["dist"] is None and inbox:
            state["dist"] = min(inbox.values()) + 1
            return state, state["dist"]
        return state, None

    def halted(self, state):
        if not state["started"]:
            return False
        if state["dist"] is not None:
            return True
        return self.horizon is not None and state["round"] >= self.horizon

    def output(self, state):
        return state["dist"]


class BfsLabeling(SourceFlooding):
    """Hop distance plus a BFS parent picked among the first senders by tape"""

    name = "bfs"
    tape_length = 1

    def init(self, node, neighbors, tape):
        state = super().init(node, neighbors, tape)
        state.update(parent=None, tape=tape)
        return state

    def round(self, state, inbox):
        learned = state["started"] and state["dist"] is None and bool(inbox)
        state, message = super().round(state, inbox)
        if learned:
            senders = sorted(u for u, d in inbox.items() if d == state["dist"] - 1)
            state["parent"] = senders[min(int(state["tape"][0] * len(senders)), len(senders) - 1)]
        return state, message

    def output(self, state):
        return (state["dist"], state["parent"])


class RumorFlooding(LocalAlgorithm):
    """All-to-all dissemination of node IDs; halts when all n are known"""

    name = "rumor"

    def __init__(self, n: int, horizon: Optional[int] = None):
        self.n = n
        self.horizon = horizon if horizon is not None else max(n - 1, 0)

    def init(self, node, neighbors, tape):
        return {"known": frozenset({node}), "round": 0, "started": False}

    def round(self, state, inbox):
        if not state["started"]:
            return {**state, "started": True}, state["known"]
        known = state["known"].union(*inbox.values()) if inbox else state["known"]
        message = known if known != state["known"] else None
        return {**state, "known": known, "round": state["round"] + 1}, message

    def halted(self, state):
        return state["started"] and (len(state["known"]) >= self.n or state["round"] >= self.horizon)

    def output(self, state):
        return tuple(sorted(state["known"]))


class NeighborCollection(LocalAlgorithm):
    """One round: every node outputs the sorted IDs of its neighbors"""

    name = "neighbors"

    def init(self, node, neighbors, tape):
        return {"node": node, "heard": None, "started": False}

    def round(self, state, inbox):
        if not state["started"]:
            return {**state, "started": True}, state["node"]
        return {**state, "heard": tuple(sorted(inbox))}, None

    def halted(self, state):
        return state["heard"] is not None

    def output(self, state):
        return state["heard"]


class GatheredAlgorithm(LocalAlgorithm):
    """Floods (neighbors, tape) of every node for T rounds, then computes the
    wrapped algorithm's output by running it locally on the gathered ball"""

    def __init__(self, inner: LocalAlgorithm, rounds: int):
        self.inner = inner
        self.rounds = rounds
        self.name = f"gather({inner.name},{rounds})"
        self.tape_length = inner.tape_length

    def init(self, node, neighbors, tape):
        return {"node": node, "known": {node: (tuple(neighbors), tape)}, "round": 0,
                "started": False, "result": None, "done": False}

    def round(self, state, inbox):
        state = dict(state)
        if state["started"]:
            known = dict(state["known"])
            for bundle in inbox.values():
                known.update(bundle)
            state["known"] = known
            state["round"] += 1
        state["started"] = True
        if state["round"] >= self.rounds:
            state["result"] = self._simulate(state["node"], state["known"])
            state["done"] = True
        return state, dict(state["known"])

    def _simulate(self, node: int, known: Dict[int, Tuple[Tuple[int, ...], Tape]]) -> Any:
        inner = self.inner
        states = {x: inner.init(x, nbrs, tape) for x, (nbrs, tape) in known.items()}
        outgoing = {}
        for x in sorted(states):
            if not inner.halted(states[x]):
                states[x], message = inner.round(states[x], {})
                if message is not None:
                    outgoing[x] = message
        for _ in range(self.rounds):
            if inner.halted(states[node]):
                break
            fresh = {}
            for x in sorted(states):
                if inner.halted(states[x]):
                    continue
                inbox = {u: outgoing[u] for u in known[x][0] if u in outgoing}
                states[x], message = inner.round(states[x], inbox)
                if message is not None:
                    fresh[x] = message
            outgoing = fresh
        return inner.output(states[node])

    def halted(self, state):
        return state["done"]

    def output(self, state):
        return state["result"]


def gatherize(alg: LocalAlgorithm, rounds: int) -> GatheredAlgorithm:
    """Turn a T-round algorithm into flooding-only communication plus local
    computation on the T-neighborhood"""
    return GatheredAlgorithm(alg, rounds)
