"""
Weighted undirected graphs, conductance quantities, hereditary density and
generators for the test families
"""

import itertools
import logging
import math
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Tuple

import networkx as nx
import numpy as np

from .errors import InvalidParams, OverlappingSets, TooLargeForExact, ZeroVolume

logger = logging.getLogger(__name__)

TOLERANCE = 1e-12
DEFAULT_EXACT_LIMIT = 20

VertexSet = FrozenSet[int]
Edge = Tuple[int, int]

# Subset enumeration works through the masks in blocks of this many rows.
_CHUNK = 1 << 15


class Graph:
    """Immutable weighted undirected graph with self-loops.

    Adjacency is kept in CSR form (numpy arrays). A loop of weight alpha at u
    is stored as w_uu = 2 * alpha, so it contributes w_uu to vol({u}).
    """

    def __init__(self, n: int, edges: Iterable[Tuple[int, int, float]] = (),
                 self_loops: Optional[Dict[int, float]] = None, name: str = ""):
        if n < 0:
            raise InvalidParams(f"node count must be non-negative, got {n}")
        self.n = n
        self.name = name or f"graph(n={n})"

        weights: Dict[Edge, float] = {}
        loops = np.zeros(n, dtype=float)
        for u, v, w in edges:
            self._check_node(u)
            self._check_node(v)
            if w < 0:
                raise InvalidParams(f"negative weight {w} on edge ({u}, {v})")
            if w == 0:
                continue
            if u == v:
                loops[u] += 2.0 * w
                continue
            key = (u, v) if u < v else (v, u)
            weights[key] = weights.get(key, 0.0) + float(w)
        for u, w_uu in (self_loops or {}).items():
            self._check_node(u)
            if w_uu < 0:
                raise InvalidParams(f"negative loop weight {w_uu} at {u}")
            loops[u] += float(w_uu)

        rows: List[List[Tuple[int, float]]] = [[] for _ in range(n)]
        for (u, v), w in weights.items():
            rows[u].append((v, w))
            rows[v].append((u, w))
        for row in rows:
            row.sort()

        self.indptr = np.zeros(n + 1, dtype=np.int64)
        self.indptr[1:] = np.cumsum([len(row) for row in rows]) if n else []
        self.indices = np.fromiter((v for row in rows for v, _ in row), dtype=np.int64,
                                   count=int(self.indptr[-1]))
        self.weights = np.fromiter((w for row in rows for _, w in row), dtype=float,
                                   count=int(self.indptr[-1]))
        self.loops = loops
        self._rows = [tuple(v for v, _ in row) for row in rows]
        self._weight_map = weights
        self.m = len(weights)
        self._check_symmetry()

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge], name: str = "") -> "Graph":
        """Unweighted graph from a list of undirected edges"""
        return cls(n, ((u, v, 1.0) for u, v in edges), name=name)

    @classmethod
    def from_networkx(cls, nx_graph: nx.Graph, name: str = "") -> "Graph":
        """Relabel a networkx graph to 0..n-1 (sorted node order) and convert"""
        order = sorted(nx_graph.nodes())
        index = {node: i for i, node in enumerate(order)}
        edges = ((index[u], index[v], float(data.get("weight", 1.0)))
                 for u, v, data in nx_graph.edges(data=True))
        return cls(len(order), edges, name=name)

    def _check_node(self, u: int) -> None:
        if not 0 <= u < self.n:
            raise InvalidParams(f"node {u} outside [0, {self.n})")

    def _check_symmetry(self) -> None:
        sources = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        forward = np.sort(sources * self.n + self.indices)
        backward = np.sort(self.indices * self.n + sources)
        if not np.array_equal(forward, backward):
            raise InvalidParams(f"adjacency of {self.name} is not symmetric")

    # --- structure -------------------------------------------------------

    def neighbors(self, u: int) -> Tuple[int, ...]:
        """Sorted neighbors of u (loops excluded)"""
        return self._rows[u]

    def degree(self, u: int) -> int:
        return len(self._rows[u])

    @cached_property
    def max_degree(self) -> int:
        return max((len(row) for row in self._rows), default=0)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def weight(self, u: int, v: int) -> float:
        if u == v:
            return float(self.loops[u])
        return self._weight_map.get((u, v) if u < v else (v, u), 0.0)

    def has_edge(self, u: int, v: int) -> bool:
        return u != v and ((u, v) if u < v else (v, u)) in self._weight_map

    def edges(self) -> List[Edge]:
        """Undirected non-loop edges as (u, v) with u < v, sorted"""
        return sorted(self._weight_map)

    def weighted_edges(self) -> List[Tuple[int, int, float]]:
        return [(u, v, self._weight_map[(u, v)]) for u, v in self.edges()]

    def directed_edges(self) -> "DirectedEdgeSet":
        """The symmetric directed edge set E-> of the graph"""
        pairs = [(u, v) for u in range(self.n) for v in self._rows[u]]
        return DirectedEdgeSet(pairs, symmetric=True)

    def is_unweighted(self) -> bool:
        return bool(np.all(self.weights == 1.0)) and not bool(np.any(self.loops))

    @cached_property
    def node_volumes(self) -> np.ndarray:
        """vol({u}) for every u: incident weights plus the loop weight"""
        sources = np.repeat(np.arange(self.n), self.degrees)
        return np.bincount(sources, weights=self.weights, minlength=self.n) + self.loops

    def dense_weights(self, nodes: List[int]) -> np.ndarray:
        """Weight matrix restricted to `nodes` (diagonal = loop weights)"""
        position = {u: i for i, u in enumerate(nodes)}
        matrix = np.zeros((len(nodes), len(nodes)))
        for i, u in enumerate(nodes):
            matrix[i, i] = self.loops[u]
            for v, w in zip(self._rows[u], self.weights[self.indptr[u]:self.indptr[u + 1]]):
                j = position.get(v)
                if j is not None:
                    matrix[i, j] = w
        return matrix

    def subgraph_from_edges(self, edges: Iterable[Edge], name: str = "") -> "Graph":
        """Graph on the same node set keeping only the given edges"""
        kept = {(u, v) if u < v else (v, u) for u, v in edges}
        for u, v in kept:
            if not self.has_edge(u, v):
                raise InvalidParams(f"({u}, {v}) is not an edge of {self.name}")
        return Graph(self.n, ((u, v, self._weight_map[(u, v)]) for u, v in sorted(kept)),
                     name=name or f"sub({self.name})")

    def to_networkx(self) -> nx.Graph:
        nx_graph = nx.Graph()
        nx_graph.add_nodes_from(range(self.n))
        nx_graph.add_weighted_edges_from(self.weighted_edges())
        return nx_graph

    def is_connected(self) -> bool:
        return self.n <= 1 or nx.is_connected(self.to_networkx())

    def diameter(self) -> int:
        if self.n <= 1:
            return 0
        return nx.diameter(self.to_networkx())

    @cached_property
    def _key(self) -> tuple:
        return (self.n, tuple(self.weighted_edges()), tuple(self.loops.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Graph({self.name}, n={self.n}, m={self.m})"


class DirectedEdgeSet:
    """A set of ordered pairs (u, w); `symmetric` tags closed sets"""

    def __init__(self, edges: Iterable[Edge] = (), symmetric: bool = False):
        self._edges: FrozenSet[Edge] = frozenset(edges)
        self.symmetric = symmetric

    @cached_property
    def _out(self) -> Dict[int, Tuple[int, ...]]:
        out: Dict[int, List[int]] = {}
        for u, w in self._edges:
            out.setdefault(u, []).append(w)
        return {u: tuple(sorted(ws)) for u, ws in out.items()}

    def out_neighbors(self, u: int) -> Tuple[int, ...]:
        return self._out.get(u, ())

    def sources(self) -> List[int]:
        return sorted(self._out)

    def is_symmetric(self) -> bool:
        return all((w, u) in self._edges for u, w in self._edges)

    def undirected(self) -> List[Edge]:
        return sorted({(u, w) if u < w else (w, u) for u, w in self._edges})

    def difference(self, other: Iterable[Edge]) -> "DirectedEdgeSet":
        return DirectedEdgeSet(self._edges - frozenset(other))

    def __sub__(self, other: Iterable[Edge]) -> "DirectedEdgeSet":
        return self.difference(other)

    def __contains__(self, edge: object) -> bool:
        return edge in self._edges

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self._edges))

    def __len__(self) -> int:
        return len(self._edges)

    def __bool__(self) -> bool:
        return bool(self._edges)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, DirectedEdgeSet):
            return self._edges == other._edges
        if isinstance(other, (set, frozenset)):
            return self._edges == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._edges)

    def __repr__(self) -> str:
        return f"DirectedEdgeSet({sorted(self._edges)!r}, symmetric={self.symmetric})"


class Conductance(NamedTuple):
    """Value of Phi(H) with the minimising side and whether it is exact"""
    value: float
    certified: bool
    witness: VertexSet


def vertex_set(g: Graph, members: Iterable[int]) -> VertexSet:
    """Validate members against g and freeze them"""
    s = frozenset(members)
    for u in s:
        if not 0 <= u < g.n:
            raise InvalidParams(f"node {u} outside [0, {g.n})")
    return s


# --- volumes and cuts ------------------------------------------------------

def volume(g: Graph, s: Iterable[int]) -> float:
    """vol(S) = w(S, V), loops contributing w_uu"""
    members = list(vertex_set(g, s))
    if not members:
        return 0.0
    return float(g.node_volumes[members].sum())


def cut_weight(g: Graph, s: Iterable[int], t: Iterable[int]) -> float:
    """w(S, T) as a double sum; w(S, S) counts internal edges twice"""
    s_set, t_set = vertex_set(g, s), vertex_set(g, t)
    total = 0.0
    for u in s_set:
        if u in t_set:
            total += float(g.loops[u])
        start, end = g.indptr[u], g.indptr[u + 1]
        for v, w in zip(g.indices[start:end], g.weights[start:end]):
            if int(v) in t_set:
                total += float(w)
    return total


def cut_conductance(g: Graph, s: Iterable[int], t: Iterable[int]) -> float:
    """phi(S, T) = w(S, T) / min(vol S, vol T) for disjoint S, T"""
    s_set, t_set = vertex_set(g, s), vertex_set(g, t)
    if s_set & t_set:
        raise OverlappingSets(f"sets share nodes {sorted(s_set & t_set)}")
    smaller = min(volume(g, s_set), volume(g, t_set))
    if smaller <= TOLERANCE:
        raise ZeroVolume("cut side has zero volume")
    return cut_weight(g, s_set, t_set) / smaller


def _subset_masks(start: int, stop: int, k: int) -> np.ndarray:
    masks = np.arange(start, stop, dtype=np.int64)
    return ((masks[:, None] >> np.arange(k, dtype=np.int64)) & 1).astype(float)


def _mask_to_set(mask: int, nodes: List[int]) -> VertexSet:
    return frozenset(u for i, u in enumerate(nodes) if mask >> i & 1)


def _exact_conductance(g: Graph, nodes: List[int]) -> Conductance:
    k = len(nodes)
    matrix = g.dense_weights(nodes)
    np.fill_diagonal(matrix, 0.0)
    vols = g.node_volumes[nodes]
    total_vol = float(vols.sum())

    best, best_mask = math.inf, 0
    # Masks over the first k-1 nodes: the last node always sits in H - S, so
    # each unordered bipartition is visited once.
    total = 1 << (k - 1)
    for start in range(1, total, _CHUNK):
        x = _subset_masks(start, min(start + _CHUNK, total), k)
        vol_s = x @ vols
        vol_t = total_vol - vol_s
        cut = ((x @ matrix) * (1.0 - x)).sum(axis=1)
        smaller = np.minimum(vol_s, vol_t)
        valid = smaller > TOLERANCE
        if not valid.any():
            continue
        phi = np.where(valid, cut / np.where(valid, smaller, 1.0), np.inf)
        i = int(np.argmin(phi))
        if phi[i] < best - TOLERANCE:
            best, best_mask = float(phi[i]), start + i
    if math.isinf(best):
        return Conductance(1.0, True, frozenset())
    return Conductance(best, True, _mask_to_set(best_mask, nodes))


def spectral_order(g: Graph, nodes: List[int], iterations: int = 200,
                   tolerance: float = 1e-9) -> List[int]:
    """Order `nodes` by the second eigenvector of the normalized adjacency
    of their strongly induced graph (power iteration with deflation)."""
    if len(nodes) <= 2:
        return list(nodes)
    matrix = g.dense_weights(nodes)
    vols = g.node_volumes[nodes]
    # Boundary weight folds into the loops, so row sums equal ambient volumes.
    matrix[np.diag_indices_from(matrix)] += vols - matrix.sum(axis=1)
    d = np.where(vols > TOLERANCE, vols, 1.0)
    inv_sqrt = 1.0 / np.sqrt(d)
    normalized = inv_sqrt[:, None] * matrix * inv_sqrt[None, :]
    lazy = 0.5 * (np.eye(len(nodes)) + normalized)

    top = np.sqrt(d)
    top /= np.linalg.norm(top)
    x = np.random.default_rng(0).standard_normal(len(nodes))
    x -= (x @ top) * top
    x /= np.linalg.norm(x)
    for _ in range(iterations):
        y = lazy @ x
        y -= (y @ top) * top
        norm = np.linalg.norm(y)
        if norm <= TOLERANCE:
            break
        y /= norm
        if np.linalg.norm(y - x) < tolerance:
            x = y
            break
        x = y
    embedding = x * inv_sqrt
    order = np.argsort(embedding, kind="stable")
    return [nodes[i] for i in order]


def sweep_cuts(g: Graph, nodes: List[int], iterations: int = 200,
               tolerance: float = 1e-9) -> Iterator[Tuple[VertexSet, float, float, float]]:
    """Yield (prefix, vol(prefix), vol(rest), w(prefix, rest)) along the
    spectral order, skipping prefixes with a zero-volume side."""
    order = spectral_order(g, nodes, iterations, tolerance)
    members = frozenset(nodes)
    vols = g.node_volumes
    total_vol = float(vols[order].sum()) if order else 0.0
    prefix: set = set()
    vol_s, cut = 0.0, 0.0
    for u in order[:-1]:
        # Moving u into the prefix removes its edges to the prefix from the
        # cut and adds its edges to the rest.
        start, end = g.indptr[u], g.indptr[u + 1]
        for v, w in zip(g.indices[start:end], g.weights[start:end]):
            v = int(v)
            if v in prefix:
                cut -= float(w)
            elif v in members:
                cut += float(w)
        prefix.add(u)
        vol_s += float(vols[u])
        vol_t = total_vol - vol_s
        if min(vol_s, vol_t) > TOLERANCE:
            yield frozenset(prefix), vol_s, vol_t, cut


def set_conductance(g: Graph, h: Iterable[int], mode: str = "auto",
                    exact_limit: int = DEFAULT_EXACT_LIMIT) -> Conductance:
    """Embedded conductance Phi(H) = min over S of phi(S, H - S).

    mode "exact" enumerates every bipartition (|H| <= exact_limit), "heuristic"
    returns a sweep-cut upper bound flagged non-certified, "auto" picks by size.
    """
    nodes = sorted(vertex_set(g, h))
    if len(nodes) < 2:
        raise InvalidParams("conductance needs at least two nodes")
    if mode not in {"auto", "exact", "heuristic"}:
        raise InvalidParams(f"unknown conductance mode {mode!r}")
    too_large = len(nodes) > exact_limit
    if mode == "exact" and too_large:
        raise TooLargeForExact(f"|H| = {len(nodes)} exceeds exact limit {exact_limit}")
    if mode == "exact" or (mode == "auto" and not too_large):
        return _exact_conductance(g, nodes)

    best, witness = math.inf, frozenset()
    for prefix, vol_s, vol_t, cut in sweep_cuts(g, nodes):
        phi = cut / min(vol_s, vol_t)
        if phi < best:
            best, witness = phi, prefix
    if math.isinf(best):
        best = 1.0
    logger.debug(f"Sweep conductance of {len(nodes)} nodes: {best:.4f} (non-certified)")
    return Conductance(best, False, witness)


def conductance_by_enumeration(g: Graph, h: Iterable[int]) -> float:
    """Loop-based brute force Phi(H), independent of the vectorised path"""
    nodes = sorted(vertex_set(g, h))
    best = math.inf
    rest_all = frozenset(nodes)
    for size in range(1, len(nodes)):
        for side in itertools.combinations(nodes, size):
            s = frozenset(side)
            try:
                phi = cut_conductance(g, s, rest_all - s)
            except ZeroVolume:
                continue
            best = min(best, phi)
    return 1.0 if math.isinf(best) else best


def strongly_induced(g: Graph, u: Iterable[int]) -> Graph:
    """Strongly induced graph of U: node i is the i-th smallest member of U,
    boundary weight is folded into the loops so volumes are preserved."""
    nodes = sorted(vertex_set(g, u))
    position = {x: i for i, x in enumerate(nodes)}
    edges = []
    loops = {}
    for i, x in enumerate(nodes):
        outside = 0.0
        start, end = g.indptr[x], g.indptr[x + 1]
        for y, w in zip(g.indices[start:end], g.weights[start:end]):
            j = position.get(int(y))
            if j is None:
                outside += float(w)
            elif i < j:
                edges.append((i, j, float(w)))
        loop = float(g.loops[x]) + outside
        if loop:
            loops[i] = loop
    return Graph(len(nodes), edges, self_loops=loops, name=f"induced({g.name})")


# --- hereditary density -----------------------------------------------------

def _require_simple(g: Graph) -> None:
    if not g.is_unweighted():
        raise InvalidParams("hereditary density needs an unweighted loop-free graph")


def _orientation_feasible(g: Graph, delta: int) -> bool:
    """Can every edge be assigned to an endpoint with at most delta per node?"""
    network = nx.DiGraph()
    for i, (u, v) in enumerate(g.edges()):
        network.add_edge("source", ("e", i), capacity=1)
        network.add_edge(("e", i), ("v", u), capacity=1)
        network.add_edge(("e", i), ("v", v), capacity=1)
    for u in range(g.n):
        network.add_edge(("v", u), "sink", capacity=delta)
    return nx.maximum_flow_value(network, "source", "sink") >= g.m


def hereditary_density(g: Graph) -> int:
    """Smallest integer delta with |E(S)| <= delta |S| for every S (the
    pseudoarboricity), by binary search over a flow orientation test."""
    _require_simple(g)
    if g.m == 0:
        return 0
    lo, hi = max(1, math.ceil(g.m / g.n)), g.max_degree
    while lo < hi:
        mid = (lo + hi) // 2
        if _orientation_feasible(g, mid):
            hi = mid
        else:
            lo = mid + 1
    logger.debug(f"Hereditary density of {g.name}: {lo}")
    return lo


def density_by_enumeration(g: Graph) -> int:
    """Subset-enumeration oracle for hereditary density (n <= 15)"""
    _require_simple(g)
    if g.n > 15:
        raise TooLargeForExact(f"n = {g.n} exceeds the enumeration limit 15")
    adjacency = [sum(1 << v for v in g.neighbors(u)) for u in range(g.n)]
    best = 0
    for mask in range(1, 1 << g.n):
        members = [u for u in range(g.n) if mask >> u & 1]
        edges = sum((adjacency[u] & mask).bit_count() for u in members) // 2
        best = max(best, math.ceil(edges / len(members)))
    return best


# --- generators --------------------------------------------------------------

class GraphFamily(str, Enum):
    PATH = "path"
    CYCLE = "cycle"
    STAR = "star"
    CLIQUE = "clique"
    DUMBBELL = "dumbbell"
    ERDOS_RENYI = "erdos_renyi"
    FIGURE1 = "figure1"
    TREE = "tree"
    GRID = "grid"
    CLIQUE_UNION = "clique_union"


def _need(params: Dict, key: str, minimum: int = 0) -> int:
    if key not in params:
        raise InvalidParams(f"missing parameter {key!r}")
    value = params[key]
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < minimum:
        raise InvalidParams(f"parameter {key!r} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _figure1(n: int, gadget: int) -> Graph:
    z_count = math.ceil(math.log2(n))
    v, w = 0, 1
    z_nodes = range(2, 2 + z_count)
    u_nodes = range(2 + z_count, 2 + z_count + n)
    edges = [(x, hub) for x in itertools.chain(z_nodes, u_nodes) for hub in (v, w)]
    total = 2 + z_count + n
    if gadget:
        for u in u_nodes:
            x = total
            clique = list(range(total + 1, total + 1 + gadget))
            edges.append((u, x))
            edges.extend((x, c) for c in clique)
            edges.extend(itertools.combinations(clique, 2))
            total += 1 + gadget
    suffix = f",gadget={gadget}" if gadget else ""
    return Graph.from_edges(total, edges, name=f"figure1({n}{suffix})")


def generate(family, **params) -> Graph:
    """Build a graph of the named family.

    Parameters per family: path/cycle/clique(n), star(n leaves),
    dumbbell(k), erdos_renyi(n, p, seed), figure1(n, gadget=0),
    tree(n, seed), grid(rows, cols), clique_union(k, copies).
    """
    try:
        family = GraphFamily(family)
    except ValueError as e:
        raise InvalidParams(f"unknown graph family {family!r}") from e

    if family is GraphFamily.PATH:
        n = _need(params, "n", 1)
        return Graph.from_networkx(nx.path_graph(n), name=f"path({n})")
    if family is GraphFamily.CYCLE:
        n = _need(params, "n", 3)
        return Graph.from_networkx(nx.cycle_graph(n), name=f"cycle({n})")
    if family is GraphFamily.STAR:
        n = _need(params, "n", 1)
        return Graph.from_networkx(nx.star_graph(n), name=f"star({n})")
    if family is GraphFamily.CLIQUE:
        n = _need(params, "n", 1)
        return Graph.from_networkx(nx.complete_graph(n), name=f"clique({n})")
    if family is GraphFamily.DUMBBELL:
        k = _need(params, "k", 2)
        return Graph.from_networkx(nx.barbell_graph(k, 0), name=f"dumbbell({k})")
    if family is GraphFamily.ERDOS_RENYI:
        n = _need(params, "n", 1)
        seed = _need(params, "seed", 0)
        p = params.get("p")
        if not isinstance(p, (int, float)) or not 0.0 <= p <= 1.0:
            raise InvalidParams(f"edge probability must lie in [0, 1], got {p!r}")
        nx_graph = nx.gnp_random_graph(n, float(p), seed=seed)
        return Graph.from_networkx(nx_graph, name=f"erdos_renyi({n},{p},seed={seed})")
    if family is GraphFamily.FIGURE1:
        n = _need(params, "n", 2)
        gadget = _need({"gadget": params.get("gadget", 0)}, "gadget", 0)
        return _figure1(n, gadget)
    if family is GraphFamily.TREE:
        n = _need(params, "n", 1)
        seed = _need(params, "seed", 0)
        rng = np.random.default_rng(seed)
        edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
        return Graph.from_edges(n, edges, name=f"tree({n},seed={seed})")
    if family is GraphFamily.GRID:
        rows, cols = _need(params, "rows", 1), _need(params, "cols", 1)
        return Graph.from_networkx(nx.grid_2d_graph(rows, cols), name=f"grid({rows},{cols})")
    if family is GraphFamily.CLIQUE_UNION:
        k, copies = _need(params, "k", 1), _need(params, "copies", 1)
        nx_graph = nx.disjoint_union_all([nx.complete_graph(k) for _ in range(copies)])
        return Graph.from_networkx(nx_graph, name=f"clique_union({k},{copies})")
    raise InvalidParams(f"unhandled graph family {family!r}")
