"""
Immutable bipartite graph and perfect-matching models.

A ``BipartiteGraph`` wraps a frozen ``networkx.Graph`` whose nodes carry a
``side`` attribute ("X" or "Y") and whose edges may carry a ``sign`` (+1/-1).
The graph also remembers an explicit vertex order: every matrix, matching and
report derived from a graph uses that order, so results are reproducible.
"""

import logging
import re
from dataclasses import dataclass
from typing import Dict, Hashable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from modules.errors import GraphConstructionError, PreconditionError

logger = logging.getLogger(__name__)

X = "X"
Y = "Y"


_INT_RE = re.compile(r"-?(0|[1-9]\d*)")


def other_side(side: str) -> str:
    return Y if side == X else X


def format_label(label: Hashable) -> str:
    """Text form of a vertex label: tuples as "(a,b)", everything else via str()."""
    if isinstance(label, tuple):
        return "(" + ",".join(format_label(part) for part in label) + ")"
    return str(label)


def split_top_level(text: str, separator: str) -> List[str]:
    """Split on ``separator`` outside of parentheses."""
    parts, depth, start = [], 0, 0
    for position, char in enumerate(text):
        if char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        elif char == separator and depth == 0:
            parts.append(text[start:position])
            start = position + 1
    parts.append(text[start:])
    return parts


def parse_label(text: str) -> Hashable:
    """Inverse of format_label: "(a,b)" becomes a tuple, plain integers become int."""
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        return tuple(parse_label(part) for part in split_top_level(text[1:-1], ","))
    if _INT_RE.fullmatch(text):
        return int(text)
    return text


class ProductLabel(NamedTuple):
    """Vertex (g, h) of a Cartesian product G □ H."""

    g: Hashable
    h: Hashable


class BipartiteGraph:
    """A simple bipartite graph with a stored bipartition and canonical vertex order.

    Args:
        vertices: Labels in canonical order; labels must be unique and hashable.
        sides: Map from every vertex to "X" or "Y".
        edges: Pairs (u, v) or triples (u, v, sign) with sign in {+1, -1}.
        name: Family descriptor used in reports.
        factors: (G, H) when the graph was built as G □ H.

    Raises:
        GraphConstructionError: On duplicate labels, unknown endpoints, loops,
            repeated edges or an edge inside one side.
    """

    def __init__(
        self,
        vertices: Sequence[Hashable],
        sides: Dict[Hashable, str],
        edges: Iterable[tuple],
        name: str = "",
        factors: Optional[Tuple["BipartiteGraph", "BipartiteGraph"]] = None,
    ):
        self.name = name
        self.factors = factors
        self._order: Tuple[Hashable, ...] = tuple(vertices)
        self._index: Dict[Hashable, int] = {}
        for position, vertex in enumerate(self._order):
            if vertex in self._index:
                raise GraphConstructionError(f"Duplicate vertex label {vertex!r}")
            self._index[vertex] = position

        graph = nx.Graph()
        for vertex in self._order:
            side = sides.get(vertex)
            if side not in (X, Y):
                raise GraphConstructionError(f"Vertex {vertex!r} has no valid side (got {side!r})")
            graph.add_node(vertex, side=side)

        for edge in edges:
            u, v = edge[0], edge[1]
            sign = edge[2] if len(edge) > 2 else None
            if u not in self._index or v not in self._index:
                raise GraphConstructionError(f"Edge ({u!r}, {v!r}) uses an unknown vertex")
            if u == v:
                raise GraphConstructionError(f"Loop at {u!r}")
            if graph.has_edge(u, v):
                raise GraphConstructionError(f"Repeated edge ({u!r}, {v!r})")
            if sides[u] == sides[v]:
                raise GraphConstructionError(
                    f"Edge ({u!r}, {v!r}) joins two {sides[u]}-vertices; graph is not bipartite"
                )
            if sign not in (None, 1, -1):
                raise GraphConstructionError(f"Edge sign must be +1 or -1, got {sign!r}")
            if sign is None:
                graph.add_edge(u, v)
            else:
                graph.add_edge(u, v, sign=sign)

        self._graph = nx.freeze(graph)
        self._x = tuple(v for v in self._order if sides[v] == X)
        self._y = tuple(v for v in self._order if sides[v] == Y)

    # ─────────────────────────────────────────────────────────
    # Accessors
    # ─────────────────────────────────────────────────────────
    @property
    def nx_graph(self) -> nx.Graph:
        """The frozen underlying networkx graph."""
        return self._graph

    @property
    def vertices(self) -> Tuple[Hashable, ...]:
        return self._order

    @property
    def x_vertices(self) -> Tuple[Hashable, ...]:
        return self._x

    @property
    def y_vertices(self) -> Tuple[Hashable, ...]:
        return self._y

    @property
    def n_vertices(self) -> int:
        return len(self._order)

    @property
    def n_edges(self) -> int:
        return self._graph.number_of_edges()

    @property
    def is_balanced(self) -> bool:
        return len(self._x) == len(self._y)

    def index(self, vertex: Hashable) -> int:
        return self._index[vertex]

    def __contains__(self, vertex) -> bool:
        return vertex in self._index

    def side(self, vertex: Hashable) -> str:
        return self._graph.nodes[vertex]["side"]

    def sides(self) -> Dict[Hashable, str]:
        return {v: self.side(v) for v in self._order}

    def has_edge(self, u: Hashable, v: Hashable) -> bool:
        return self._graph.has_edge(u, v)

    def sign(self, u: Hashable, v: Hashable) -> Optional[int]:
        return self._graph.edges[u, v].get("sign")

    def neighbors(self, vertex: Hashable) -> List[Hashable]:
        """Neighbours of ``vertex`` in canonical order."""
        return sorted(self._graph.neighbors(vertex), key=self._index.__getitem__)

    def degree(self, vertex: Hashable) -> int:
        return self._graph.degree(vertex)

    def degree_sequence(self) -> List[int]:
        return sorted((d for _, d in self._graph.degree()), reverse=True)

    def edges(self) -> List[tuple]:
        """Edges as (x, y) pairs, X endpoint first, sorted by canonical order."""
        oriented = []
        for u, v in self._graph.edges():
            if self.side(u) == Y:
                u, v = v, u
            oriented.append((u, v))
        return sorted(oriented, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def signed_edges(self) -> List[tuple]:
        return [(u, v, self.sign(u, v)) for u, v in self.edges()]

    def is_signed(self) -> bool:
        return any("sign" in data for _, _, data in self._graph.edges(data=True))

    # ─────────────────────────────────────────────────────────
    # Derived graphs
    # ─────────────────────────────────────────────────────────
    def induced(self, vertices: Iterable[Hashable], name: str = "") -> "BipartiteGraph":
        """Induced subgraph on ``vertices``, keeping canonical order and signs."""
        keep = set(vertices)
        unknown = keep - set(self._order)
        if unknown:
            raise PreconditionError(f"Unknown vertices {sorted(map(repr, unknown))}")
        order = [v for v in self._order if v in keep]
        edges = [
            (u, v) if s is None else (u, v, s)
            for u, v, s in self.signed_edges()
            if u in keep and v in keep
        ]
        return BipartiteGraph(order, {v: self.side(v) for v in order}, edges, name=name or self.name)

    def remove_vertices(self, vertices: Iterable[Hashable]) -> "BipartiteGraph":
        drop = set(vertices)
        return self.induced([v for v in self._order if v not in drop], name=self.name)

    def relabel(self, mapping: Dict[Hashable, Hashable], name: str = "") -> "BipartiteGraph":
        """Rename vertices; labels missing from ``mapping`` are kept."""
        rename = lambda v: mapping.get(v, v)  # noqa: E731
        order = [rename(v) for v in self._order]
        sides = {rename(v): self.side(v) for v in self._order}
        edges = [
            (rename(u), rename(v)) if s is None else (rename(u), rename(v), s)
            for u, v, s in self.signed_edges()
        ]
        return BipartiteGraph(order, sides, edges, name=name or self.name)

    def bi_adjacency_pattern(
        self,
        rows: Optional[Sequence[Hashable]] = None,
        cols: Optional[Sequence[Hashable]] = None,
    ) -> np.ndarray:
        """Boolean matrix with True at (i, j) iff rows[i] ~ cols[j].

        Defaults to X-vertices by Y-vertices in canonical order.
        """
        rows = self._x if rows is None else rows
        cols = self._y if cols is None else cols
        pattern = np.zeros((len(rows), len(cols)), dtype=bool)
        for i, u in enumerate(rows):
            for j, v in enumerate(cols):
                pattern[i, j] = self._graph.has_edge(u, v)
        return pattern

    # ─────────────────────────────────────────────────────────
    # Comparison
    # ─────────────────────────────────────────────────────────
    def _structure(self):
        return (
            frozenset(self.sides().items()),
            frozenset(frozenset(e) for e in self._graph.edges()),
        )

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return self._structure() == other._structure()

    def __hash__(self):
        return hash(self._structure())

    def __repr__(self):
        label = self.name or "BipartiteGraph"
        return f"<{label}: |X|={len(self._x)} |Y|={len(self._y)} |E|={self.n_edges}>"


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint host edges, stored as (x, y) pairs in canonical order."""

    edges: Tuple[tuple, ...]

    @classmethod
    def of(cls, host: BipartiteGraph, edges: Iterable[tuple]) -> "Matching":
        """Validate ``edges`` against ``host`` and return them as a canonical matching.

        Raises:
            PreconditionError: If an edge is missing from the host or two edges share a vertex.
        """
        oriented = []
        seen = set()
        for u, v in edges:
            if u not in host or v not in host or not host.has_edge(u, v):
                raise PreconditionError(f"({u!r}, {v!r}) is not an edge of {host!r}")
            if host.side(u) == Y:
                u, v = v, u
            if u in seen or v in seen:
                raise PreconditionError(f"Edges share a vertex at ({u!r}, {v!r})")
            seen.update((u, v))
            oriented.append((u, v))
        oriented.sort(key=lambda e: (host.index(e[0]), host.index(e[1])))
        return cls(tuple(oriented))

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __contains__(self, edge) -> bool:
        u, v = edge
        return (u, v) in self.edges or (v, u) in self.edges

    def vertices(self) -> set:
        return {v for edge in self.edges for v in edge}

    def partner(self) -> Dict[Hashable, Hashable]:
        mate = {}
        for u, v in self.edges:
            mate[u] = v
            mate[v] = u
        return mate

    def is_perfect(self, host: BipartiteGraph) -> bool:
        return 2 * len(self.edges) == host.n_vertices and self.vertices() == set(host.vertices)

    def issubset(self, other: "Matching") -> bool:
        return set(self.edges) <= set(other.edges)
