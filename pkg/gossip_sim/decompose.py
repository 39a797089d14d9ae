"""
Conductance decomposition oracle: maximum-volume sparse cuts, the recursive
Cluster procedure and checks of the partition and balanced-cut bounds.

This is a verification tool for small graphs, not a distributed algorithm.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Union

import numpy as np

from .config import DecomposeConfig
from .errors import InvalidParams, TooLargeForExact
from .graph import (
    Conductance,
    Graph,
    VertexSet,
    _subset_masks,
    set_conductance,
    strongly_induced,
    sweep_cuts,
    vertex_set,
    volume,
)

logger = logging.getLogger(__name__)

_CHUNK = 1 << 15
_LOG_BASE = math.log(4 / 3)


class SparseCut(NamedTuple):
    """A maximum-volume side S with vol(S) <= vol(U)/2 and phi(S, U - S) <= xi"""
    side: Optional[VertexSet]
    conductance: float
    certified: bool


def log_four_thirds(x: float) -> float:
    return math.log(x) / _LOG_BASE if x > 0 else float("-inf")


def _exact_sparse_cut(g: Graph, nodes: List[int], xi: float, tolerance: float) -> SparseCut:
    k = len(nodes)
    matrix = g.dense_weights(nodes)
    np.fill_diagonal(matrix, 0.0)
    vols = g.node_volumes[nodes]
    total_vol = float(vols.sum())

    best_vol = -math.inf
    candidates: List[tuple] = []
    full = (1 << k) - 1
    for start in range(1, full, _CHUNK):
        stop = min(start + _CHUNK, full)
        x = _subset_masks(start, stop, k)
        vol_s = x @ vols
        vol_t = total_vol - vol_s
        cut = ((x @ matrix) * (1.0 - x)).sum(axis=1)
        smaller = np.minimum(vol_s, vol_t)
        defined = smaller > tolerance
        phi = np.where(defined, cut / np.where(defined, smaller, 1.0), np.inf)
        eligible = defined & (vol_s <= total_vol / 2 + tolerance) & (phi <= xi + tolerance)
        if not eligible.any():
            continue
        chunk_best = float(vol_s[eligible].max())
        if chunk_best > best_vol + tolerance:
            best_vol, candidates = chunk_best, []
        if chunk_best >= best_vol - tolerance:
            for i in np.flatnonzero(eligible & (vol_s >= best_vol - tolerance)):
                candidates.append((start + int(i), float(phi[i])))

    if not candidates:
        return SparseCut(None, math.inf, True)
    # Ties on volume go to the lexicographically smallest member list.
    mask, phi = min(candidates, key=lambda c: [u for j, u in enumerate(nodes) if c[0] >> j & 1])
    side = frozenset(u for j, u in enumerate(nodes) if mask >> j & 1)
    return SparseCut(side, phi, True)


def _sweep_sparse_cut(g: Graph, nodes: List[int], xi: float, config: DecomposeConfig) -> SparseCut:
    members = frozenset(nodes)
    total_vol = float(g.node_volumes[nodes].sum())
    best: Optional[tuple] = None
    for prefix, vol_s, vol_t, cut in sweep_cuts(g, nodes, config.power_iterations, config.power_tolerance):
        phi = cut / min(vol_s, vol_t)
        if phi > xi + config.tolerance:
            continue
        side, side_vol = (prefix, vol_s) if vol_s <= vol_t else (members - prefix, vol_t)
        if side_vol > total_vol / 2 + config.tolerance:
            continue
        key = (-side_vol, sorted(side))
        if best is None or key < best[0]:
            best = (key, side, phi)
    if best is None:
        return SparseCut(None, math.inf, False)
    return SparseCut(best[1], best[2], False)


def find_sparse_cut(g: Graph, u: Iterable[int], xi: float, mode: str = "auto",
                    config: Optional[DecomposeConfig] = None) -> SparseCut:
    """Maximum-volume S in U with vol(S) <= vol(U)/2 and phi(S, U - S) <= xi.

    Exact enumeration for |U| <= exact_limit, a sweep-cut candidate
    (non-certified) beyond that in "auto" or "heuristic" mode.
    """
    config = config or DecomposeConfig()
    if mode not in {"auto", "exact", "heuristic"}:
        raise InvalidParams(f"unknown sparse cut mode {mode!r}")
    nodes = sorted(vertex_set(g, u))
    too_large = len(nodes) > config.exact_limit
    if mode == "exact" and too_large:
        raise TooLargeForExact(f"|U| = {len(nodes)} exceeds exact limit {config.exact_limit}")
    if len(nodes) < 2:
        return SparseCut(None, math.inf, True)
    if mode == "heuristic" or too_large:
        return _sweep_sparse_cut(g, nodes, xi, config)
    return _exact_sparse_cut(g, nodes, xi, config.tolerance)


@dataclass
class ClusterPartition:
    clusters: List[VertexSet]
    xi: float
    conductances: List[Conductance]
    cut_weight: float
    max_depth: int = 0
    certified: bool = True

    def cluster_of(self) -> Dict[int, int]:
        return {u: i for i, c in enumerate(self.clusters) for u in c}


def _cluster_conductance(g: Graph, members: VertexSet, mode: str, exact_limit: int) -> Conductance:
    if len(members) < 2:
        return Conductance(1.0, True, frozenset())
    return set_conductance(g, members, mode=mode, exact_limit=exact_limit)


def partition_cut_weight(g: Graph, clusters: Iterable[Iterable[int]]) -> float:
    """Sum over i < j of w(V_i, V_j)"""
    owner = {u: i for i, c in enumerate(clusters) for u in c}
    return float(sum(w for u, v, w in g.weighted_edges() if owner.get(u) != owner.get(v)))


def cluster(g: Graph, u: Optional[Iterable[int]], xi: float, mode: str = "auto",
            config: Optional[DecomposeConfig] = None) -> ClusterPartition:
    """Recursive Cluster(U): no sparse cut keeps U whole; a small side S
    (vol(S) <= vol(U)/4) splits off U - S as a cluster and recurses into S;
    otherwise both sides recurse."""
    config = config or DecomposeConfig()
    if xi <= 0:
        raise InvalidParams(f"xi must be positive, got {xi}")
    root = vertex_set(g, range(g.n) if u is None else u)
    clusters: List[VertexSet] = []
    state = {"depth": 0, "certified": True}

    def recurse(members: VertexSet, depth: int) -> None:
        state["depth"] = max(state["depth"], depth)
        cut = find_sparse_cut(g, members, xi, mode, config)
        state["certified"] = state["certified"] and cut.certified
        if cut.side is None:
            clusters.append(members)
            return
        rest = members - cut.side
        if volume(g, cut.side) <= volume(g, members) / 4 + config.tolerance:
            clusters.append(rest)
            recurse(cut.side, depth + 1)
        else:
            recurse(cut.side, depth + 1)
            recurse(rest, depth + 1)

    if root:
        recurse(root, 0)
    conductances = [_cluster_conductance(g, c, mode, config.exact_limit) for c in clusters]
    certified = state["certified"] and all(c.certified for c in conductances)
    logger.debug(f"Cluster on {g.name}: {len(clusters)} clusters, depth {state['depth']}")
    return ClusterPartition(clusters, xi, conductances, partition_cut_weight(g, clusters),
                            state["depth"], certified)


def xi_for_zeta(g: Graph, zeta: float) -> float:
    """xi = 3 zeta / log_{4/3} vol(V)"""
    log_vol = log_four_thirds(volume(g, range(g.n)))
    if log_vol <= 0:
        return math.inf
    return 3 * zeta / log_vol


def verify_partition(g: Graph, p: ClusterPartition, zeta: float,
                     config: Optional[DecomposeConfig] = None) -> Dict[str, Any]:
    """Check Phi(V_i) >= zeta / log_{4/3} vol(V) for every cluster and
    sum_{i<j} w(V_i, V_j) <= (3 zeta / 2) vol(V). Failures are report entries."""
    config = config or DecomposeConfig()
    tol = config.tolerance
    total_vol = volume(g, range(g.n))
    log_vol = log_four_thirds(total_vol)
    vacuous = total_vol < 2
    conductance_bound = zeta / log_vol if not vacuous else 0.0
    cut_bound = 1.5 * zeta * total_vol
    violations: List[str] = []

    seen: set = set()
    for c in p.clusters:
        if seen & c:
            violations.append(f"clusters overlap on {sorted(seen & c)}")
        seen |= c
    if seen != set(range(g.n)):
        violations.append(f"clusters miss nodes {sorted(set(range(g.n)) - seen)}")

    clusters = []
    for i, c in enumerate(p.clusters):
        recomputed = _cluster_conductance(g, c, "auto", config.exact_limit)
        ok = vacuous or recomputed.value >= conductance_bound - tol
        if not ok:
            violations.append(f"cluster {i}: Phi = {recomputed.value:.6f} < {conductance_bound:.6f}")
        if i < len(p.conductances) and abs(p.conductances[i].value - recomputed.value) > 1e-9:
            violations.append(f"cluster {i}: stored Phi {p.conductances[i].value:.6f} "
                              f"!= recomputed {recomputed.value:.6f}")
        clusters.append({"members": sorted(c), "phi": recomputed.value,
                         "certified": recomputed.certified, "ok": ok})

    cut = partition_cut_weight(g, p.clusters)
    if abs(cut - p.cut_weight) > 1e-9:
        violations.append(f"stored cut weight {p.cut_weight} != recomputed {cut}")
    cut_ok = vacuous or cut <= cut_bound + tol
    if not cut_ok:
        violations.append(f"cut weight {cut} > bound {cut_bound}")
    depth_bound = max(log_vol, 0.0) if not vacuous else 0.0
    if not vacuous and p.max_depth > depth_bound + tol:
        violations.append(f"recursion depth {p.max_depth} > {depth_bound:.3f}")

    return {
        "success": not violations,
        "violations": violations,
        "zeta": zeta,
        "xi": p.xi,
        "xi_expected": xi_for_zeta(g, zeta),
        "volume": total_vol,
        "conductance_bound": conductance_bound,
        "cut_weight": cut,
        "cut_bound": cut_bound,
        "cut_fraction": cut / (total_vol / 2) if total_vol else 0.0,
        "max_depth": p.max_depth,
        "depth_bound": depth_bound,
        "certified": p.certified and all(c["certified"] for c in clusters),
        "clusters": clusters,
    }


def verify_balcut(g: Graph, u: Iterable[int], xi: float,
                  config: Optional[DecomposeConfig] = None) -> Dict[str, Any]:
    """When the maximal sparse cut S has vol(S) <= vol(U)/4 (no cut counts as
    volume 0), check Phi(U - S) >= xi / 3 on the strongly induced graph of U."""
    config = config or DecomposeConfig()
    members = vertex_set(g, u)
    cut = find_sparse_cut(g, members, xi, "exact", config)
    side = cut.side or frozenset()
    vol_u, vol_s = volume(g, members), volume(g, side)
    report: Dict[str, Any] = {
        "success": True,
        "error": None,
        "side": sorted(side) if cut.side is not None else None,
        "vol_s": vol_s,
        "vol_u": vol_u,
        "triggered": vol_s <= vol_u / 4 + config.tolerance,
        "phi_rest": None,
        "bound": xi / 3,
    }
    if not report["triggered"]:
        return report
    rest = sorted(members - side)
    if len(rest) < 2:
        return report
    induced = strongly_induced(g, members)
    position = {x: i for i, x in enumerate(sorted(members))}
    phi = set_conductance(induced, [position[x] for x in rest], mode="exact",
                          exact_limit=config.exact_limit).value
    report["phi_rest"] = phi
    if phi < xi / 3 - config.tolerance:
        report["success"] = False
        report["error"] = f"Phi(U - S) = {phi:.6f} < xi/3 = {xi / 3:.6f}"
    return report


def partition_report_lines(report: Dict[str, Any]) -> List[str]:
    """Structured text rendering of a verify_partition report"""
    lines = [
        f"# zeta: {report['zeta']}",
        f"# xi: {report['xi']}",
        f"# volume: {report['volume']}",
        f"cut_weight {report['cut_weight']:g} bound {report['cut_bound']:g} "
        f"fraction {report['cut_fraction']:.4f}",
        f"conductance_bound {report['conductance_bound']:.6f}",
        f"depth {report['max_depth']} bound {report['depth_bound']:.3f}",
    ]
    for i, c in enumerate(report["clusters"]):
        flag = "ok" if c["ok"] else "FAIL"
        exact = "" if c["certified"] else " non_certified"
        lines.append(f"cluster {i} phi {c['phi']:.6f} {flag}{exact}: " + " ".join(map(str, c["members"])))
    lines.extend(f"violation {v}" for v in report["violations"])
    return lines


def export_partition(path: Union[str, Path], report: Dict[str, Any], graph_name: str = "") -> None:
    """Write a verify_partition report as structured text"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ([f"# graph: {graph_name}"] if graph_name else []) + partition_report_lines(report)
    path.write_text("\n".join(lines) + "\n")
