"""
Edge-list file format: first line `n m`, then m lines `u v [w]`.
Blank lines and `#` comments are ignored; the writer emits u < v.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .errors import GraphFormatError, InvalidParams
from .graph import Graph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def parse_edge_list(text: str, name: str = "") -> Graph:
    """Parse edge-list text into a Graph"""
    header: Optional[Tuple[int, int]] = None
    edges: List[Tuple[int, int, float]] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 2:
                raise GraphFormatError(f"expected header 'n m', got {raw.strip()!r}", line_no)
            try:
                header = (int(fields[0]), int(fields[1]))
            except ValueError as e:
                raise GraphFormatError(f"non-integer header {raw.strip()!r}", line_no) from e
            if header[0] < 0 or header[1] < 0:
                raise GraphFormatError("negative node or edge count", line_no)
            continue
        if len(fields) not in (2, 3):
            raise GraphFormatError(f"expected 'u v [w]', got {raw.strip()!r}", line_no)
        try:
            u, v = int(fields[0]), int(fields[1])
            w = float(fields[2]) if len(fields) == 3 else 1.0
        except ValueError as e:
            raise GraphFormatError(f"malformed edge {raw.strip()!r}", line_no) from e
        if not (0 <= u < header[0] and 0 <= v < header[0]):
            raise GraphFormatError(f"node id outside [0, {header[0]})", line_no)
        edges.append((u, v, w))

    if header is None:
        raise GraphFormatError("missing header line")
    if len(edges) != header[1]:
        raise GraphFormatError(f"header announces {header[1]} edges, found {len(edges)}")
    try:
        return Graph(header[0], edges, name=name)
    except InvalidParams as e:
        raise GraphFormatError(str(e)) from e


def read_edge_list(path: PathLike) -> Graph:
    """Load a graph file; the graph is named after the file stem"""
    path = Path(path)
    with open(path, 'r') as f:
        text = f.read()
    graph = parse_edge_list(text, name=path.stem)
    logger.info(f"Loaded {graph.name}: n={graph.n}, m={graph.m}")
    return graph


def format_edge_list(graph: Graph, header: Optional[Dict[str, object]] = None) -> str:
    """Render a graph, optionally preceded by `# key: value` comment lines"""
    lines = [f"# {key}: {value}" for key, value in (header or {}).items()]
    loops = [(u, float(graph.loops[u])) for u in range(graph.n) if graph.loops[u]]
    lines.append(f"{graph.n} {graph.m + len(loops)}")
    for u, v, w in graph.weighted_edges():
        lines.append(f"{u} {v}" if w == 1.0 else f"{u} {v} {w!r}")
    # A loop line `u u a` stands for a loop of weight a, stored as 2a.
    for u, w_uu in loops:
        lines.append(f"{u} {u} {w_uu / 2!r}")
    return "\n".join(lines) + "\n"


def write_edge_list(graph: Graph, path: PathLike, header: Optional[Dict[str, object]] = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        f.write(format_edge_list(graph, header))
    logger.info(f"Wrote {graph.name} to {path}")


def read_header(path: PathLike) -> Dict[str, str]:
    """Collect the `# key: value` lines at the top of a graph or trace file"""
    values: Dict[str, str] = {}
    with open(path, 'r') as f:
        for raw in f:
            line = raw.strip()
            if not line:
                continue
            if not line.startswith("#"):
                break
            key, sep, value = line[1:].partition(":")
            if sep:
                values[key.strip()] = value.strip()
    return values
