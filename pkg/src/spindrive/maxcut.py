"""MaxCut instances: edge-list parsing, the QUBO image, and cut evaluation.

Instance text format: a header line "n_vertices n_edges" followed by one
"i j w" triple per edge, whitespace-separated with 1-based vertex indices.
Integer weights stay integers so cut values compare exactly.

The QUBO image of a graph puts the edge weight on each symmetric
off-diagonal pair (so the pair contributes 2*w*x_i*x_j) and minus the
weighted degree on the diagonal; its objective equals minus the cut value
for every partition, and its spin image has zero longitudinal field on
every vertex because the two contributions cancel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ising import QuboModel, rescale

__all__ = ["Graph", "parse_biqmac", "read_graph", "to_qubo", "cut_value", "rescale"]


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        for (i, j, w) in self.edges:
            if not (1 <= i < j <= self.n_vertices):
                raise ValueError(f"edge ({i}, {j}) out of range or not normalized")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def parse_biqmac(text: str) -> Graph:
    """Parse the header-plus-edge-triples format."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty instance file")
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError(f"bad header line {lines[0]!r}")
    n_vertices, n_edges = int(header[0]), int(header[1])
    if len(lines) - 1 != n_edges:
        raise ValueError(f"header declares {n_edges} edges but {len(lines) - 1} lines follow")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise ValueError(f"bad edge line {ln!r}")
        i, j = int(parts[0]), int(parts[1])
        try:
            w: float = int(parts[2])
        except ValueError:
            w = float(parts[2])
        if i == j:
            raise ValueError(f"self-loop on vertex {i}")
        if not (1 <= i <= n_vertices and 1 <= j <= n_vertices):
            raise ValueError(f"edge ({i}, {j}) out of range 1..{n_vertices}")
        if i > j:
            i, j = j, i
        edges.append((i, j, w))
    return Graph(n_vertices, tuple(edges))


def read_graph(path) -> Graph:
    with open(path) as fh:
        return parse_biqmac(fh.read())


def to_qubo(g: Graph) -> QuboModel:
    """QUBO whose objective at x equals minus the cut value of x."""
    entries: dict[tuple[int, int], float] = {}
    for (i, j, w) in g.edges:
        entries[(i, j)] = entries.get((i, j), 0) + w
        entries[(i, i)] = entries.get((i, i), 0) - w
        entries[(j, j)] = entries.get((j, j), 0) - w
    return QuboModel(g.n_vertices, entries, offset=0.0)


def cut_value(g: Graph, x):
    """Total weight of edges crossing the bipartition given by binary x."""
    x = list(x)
    if len(x) != g.n_vertices:
        raise ValueError(f"partition has {len(x)} entries for {g.n_vertices} vertices")
    total = 0
    for (i, j, w) in g.edges:
        if x[i - 1] != x[j - 1]:
            total += w
    return total
