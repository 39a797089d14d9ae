"""
Spanner extraction from gossip traces and stretch/density certification
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple, Union

import networkx as nx

from .engine import ProcessTrace
from .errors import IncompleteRun, NotSubgraph
from .graph import Edge, Graph, hereditary_density
from .graph_io import write_edge_list

logger = logging.getLogger(__name__)


@dataclass
class SpannerResult:
    """Edges activated by a NeighborExchange run, with its round count T"""
    subgraph: Graph
    source_rounds: int
    certified_stretch: Optional[Tuple[int, int]] = None
    density: Optional[int] = None

    def certify(self, g: Graph) -> Dict[str, Any]:
        """Check neighbor stretch <= T and hereditary density <= T; on success
        record the (T, 0) stretch."""
        stretch = neighbor_stretch(g, self.subgraph)
        self.density = spanner_density(self.subgraph)
        t = self.source_rounds
        stretch_ok = stretch <= t
        density_ok = self.density <= t
        if stretch_ok and density_ok:
            self.certified_stretch = (t, 0)
        return {
            "success": stretch_ok and density_ok,
            "neighbor_stretch": stretch,
            "density": self.density,
            "rounds": t,
            "stretch_ok": stretch_ok,
            "density_ok": density_ok,
        }


def extract_spanner(g: Graph, traces: Iterable[ProcessTrace], completed: bool = True) -> SpannerResult:
    """Union of all symmetric-closure edges over every round of every trace"""
    if not completed:
        raise IncompleteRun(f"the run on {g.name} did not complete NeighborExchange")
    edges = set()
    rounds = 0
    for trace in traces:
        rounds += len(trace)
        for activation in trace:
            edges.update((u, w) if u < w else (w, u) for u, w in activation.choices.items())
    subgraph = g.subgraph_from_edges(edges, name=f"spanner({g.name})")
    logger.debug(f"Extracted spanner of {g.name}: {subgraph.m} of {g.m} edges, T={rounds}")
    return SpannerResult(subgraph, rounds)


def _check_subgraph(g: Graph, s: Graph) -> None:
    if s.n != g.n:
        raise NotSubgraph(f"{s.name} has {s.n} nodes, {g.name} has {g.n}")
    for u, v in s.edges():
        if not g.has_edge(u, v):
            raise NotSubgraph(f"({u}, {v}) is not an edge of {g.name}")


def verify_stretch(g: Graph, s: Graph, alpha: float, beta: float,
                   neighbors_only: bool = False) -> Tuple[Optional[Edge], bool]:
    """Check dist_S(u, v) <= alpha * dist_G(u, v) + beta for every pair
    connected in G (or only for G-neighbors). Returns the pair with the largest
    excess, or None when the bound holds."""
    _check_subgraph(g, s)
    g_nx, s_nx = g.to_networkx(), s.to_networkx()
    worst: Optional[Edge] = None
    worst_excess = 0.0
    for u in range(g.n):
        in_s = nx.single_source_shortest_path_length(s_nx, u)
        if neighbors_only:
            in_g: Dict[int, int] = {v: 1 for v in g.neighbors(u)}
        else:
            in_g = nx.single_source_shortest_path_length(g_nx, u)
        for v, d in in_g.items():
            if v <= u:
                continue
            excess = in_s.get(v, math.inf) - (alpha * d + beta)
            if excess > worst_excess:
                worst, worst_excess = (u, v), excess
    return worst, worst is None


def neighbor_stretch(g: Graph, s: Graph) -> float:
    """Largest dist_S(u, v) over edges (u, v) of G; inf if S separates one"""
    _check_subgraph(g, s)
    s_nx = s.to_networkx()
    worst = 0.0
    for u in range(g.n):
        later = [v for v in g.neighbors(u) if v > u]
        if not later:
            continue
        in_s = nx.single_source_shortest_path_length(s_nx, u)
        for v in later:
            worst = max(worst, in_s.get(v, math.inf))
    return worst


def spanner_density(s: Graph) -> int:
    return hereditary_density(s)


def message_bound(g: Graph, c_msg: float) -> float:
    """c_msg * n * log2(2m)^3 connections"""
    if g.m == 0:
        return 0.0
    return c_msg * g.n * math.log2(2 * g.m) ** 3


def export_spanner(path: Union[str, Path], result: SpannerResult, graph_name: str = "") -> None:
    """Write the spanner as an edge list with a comment header"""
    alpha, beta = result.certified_stretch or ("", "")
    header = {
        "graph": graph_name or result.subgraph.name,
        "T": result.source_rounds,
        "alpha": alpha,
        "beta": beta,
        "density": "" if result.density is None else result.density,
    }
    write_edge_list(result.subgraph, path, header)
