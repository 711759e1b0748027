"""
Graph family constructors, graph products and the family-expression language.

Canonical labels per family:

    K2, P:n, C:n        integers 0..n-1; even labels are X
    Q:d, FQ:d           integers 0..2^d-1 in binary counting order; even popcount is X
    Kmn:m,n, star:n     "x0".."x{m-1}" (X) and "y0".."y{n-1}" (Y); the star centre is "x0"
    BCP:n, s14, gprime  "x0".. and "y0".. as for Kmn
    blowup:n            pairs (i, c), i in 0..2n-1, c in {0, 1}; X when i is even
    prod(G;H)           ProductLabel (g, h) in row-major order
    bd(G)               ProductLabel (v, a), a in {0, 1}; X when a = 0
"""

import logging
import os
import re
from typing import Hashable, Iterable, List, Sequence, Union

import networkx as nx

from models.bipartite_graph import X, Y, BipartiteGraph, ProductLabel, format_label, parse_label, split_top_level
from modules.errors import ExpressionParseError, GraphConstructionError, PreconditionError

logger = logging.getLogger(__name__)

GraphLike = Union[BipartiteGraph, nx.Graph]

# Zero entries of the 7x7 weight table of the K_{7,7}-minus-8-edges example
GPRIME_MISSING_EDGES = (
    ("x0", "y2"), ("x0", "y3"), ("x1", "y2"), ("x1", "y3"),
    ("x2", "y0"), ("x2", "y1"), ("x3", "y0"), ("x3", "y1"),
)


def _require_positive(name: str, **params):
    for key, value in params.items():
        if not isinstance(value, int) or value < 1:
            raise GraphConstructionError(f"{name}: parameter {key} must be a positive integer, got {value!r}")


def _xy_labels(m: int, n: int):
    xs = [f"x{i}" for i in range(m)]
    ys = [f"y{j}" for j in range(n)]
    sides = {**{x: X for x in xs}, **{y: Y for y in ys}}
    return xs, ys, sides


# ─────────────────────────────────────────────────────────
# Family constructors
# ─────────────────────────────────────────────────────────
def path(n: int) -> BipartiteGraph:
    _require_positive("path", n=n)
    vertices = list(range(n))
    sides = {v: X if v % 2 == 0 else Y for v in vertices}
    return BipartiteGraph(vertices, sides, [(i, i + 1) for i in range(n - 1)], name=f"P:{n}")


def k2() -> BipartiteGraph:
    return BipartiteGraph([0, 1], {0: X, 1: Y}, [(0, 1)], name="K2")


def cycle(n: int) -> BipartiteGraph:
    """Even cycle C_n on 0..n-1."""
    _require_positive("cycle", n=n)
    if n % 2 == 1:
        raise GraphConstructionError(f"C_{n} has an odd cycle and is not bipartite")
    if n < 4:
        raise GraphConstructionError(f"C_{n} is not a simple cycle; use n >= 4")
    vertices = list(range(n))
    sides = {v: X if v % 2 == 0 else Y for v in vertices}
    return BipartiteGraph(vertices, sides, [(i, (i + 1) % n) for i in range(n)], name=f"C:{n}")


def complete_bipartite(m: int, n: int) -> BipartiteGraph:
    _require_positive("complete_bipartite", m=m, n=n)
    xs, ys, sides = _xy_labels(m, n)
    return BipartiteGraph(xs + ys, sides, [(x, y) for x in xs for y in ys], name=f"Kmn:{m},{n}")


def star(n: int) -> BipartiteGraph:
    """K_{1,n} with centre "x0"."""
    graph = complete_bipartite(1, n)
    graph.name = f"star:{n}"
    return graph


def hypercube(d: int) -> BipartiteGraph:
    _require_positive("hypercube", d=d)
    vertices = list(range(2 ** d))
    sides = {v: X if bin(v).count("1") % 2 == 0 else Y for v in vertices}
    edges = [(v, v ^ (1 << b)) for v in vertices for b in range(d) if v < v ^ (1 << b)]
    return BipartiteGraph(vertices, sides, edges, name=f"Q:{d}")


def folded_hypercube(d: int) -> BipartiteGraph:
    """Q_d plus an edge between every pair of complementary vertices (odd d >= 3)."""
    _require_positive("folded_hypercube", d=d)
    if d % 2 == 0:
        raise GraphConstructionError(f"FQ_{d} is not bipartite for even d")
    if d < 3:
        raise GraphConstructionError("FQ_1 would repeat the edge of Q_1; use d >= 3")
    base = hypercube(d)
    mask = 2 ** d - 1
    extra = [(v, v ^ mask) for v in base.vertices if v < v ^ mask]
    return BipartiteGraph(base.vertices, base.sides(), base.edges() + extra, name=f"FQ:{d}")


def blowup_cycle(n: int) -> BipartiteGraph:
    """C_{2n}[2]: every vertex of C_{2n} doubled, copies of adjacent vertices all joined."""
    _require_positive("blowup_cycle", n=n)
    if n < 2:
        raise GraphConstructionError("C_{2n}[2] needs n >= 2")
    size = 2 * n
    vertices = [(i, c) for i in range(size) for c in (0, 1)]
    sides = {(i, c): X if i % 2 == 0 else Y for i, c in vertices}
    edges = [((i, a), ((i + 1) % size, b)) for i in range(size) for a in (0, 1) for b in (0, 1)]
    return BipartiteGraph(vertices, sides, edges, name=f"blowup:{n}")


def bcp(n: int) -> BipartiteGraph:
    """K_{n,n} with the perfect matching {x_i y_i} removed."""
    _require_positive("bcp", n=n)
    if n < 2:
        raise GraphConstructionError("BCP(1) has no edges; use n >= 2")
    xs, ys, sides = _xy_labels(n, n)
    edges = [(xs[i], ys[j]) for i in range(n) for j in range(n) if i != j]
    return BipartiteGraph(xs + ys, sides, edges, name=f"BCP:{n}")


def s14() -> BipartiteGraph:
    """The signed 4-regular graph on 14 vertices.

    x_i is joined positively to y_i, y_{i+1}, y_{i+3} and negatively to
    y_{i-1}, subscripts mod 7.
    """
    xs, ys, sides = _xy_labels(7, 7)
    edges = []
    for i in range(7):
        for offset in (0, 1, 3):
            edges.append((xs[i], ys[(i + offset) % 7], 1))
        edges.append((xs[i], ys[(i - 1) % 7], -1))
    return BipartiteGraph(xs + ys, sides, edges, name="s14")


def g_prime() -> BipartiteGraph:
    """K_{7,7} without the eight pairs in GPRIME_MISSING_EDGES."""
    xs, ys, sides = _xy_labels(7, 7)
    missing = set(GPRIME_MISSING_EDGES)
    edges = [(x, y) for x in xs for y in ys if (x, y) not in missing]
    return BipartiteGraph(xs + ys, sides, edges, name="gprime")


# ─────────────────────────────────────────────────────────
# Products and derived graphs
# ─────────────────────────────────────────────────────────
def as_bipartite(graph: GraphLike, name: str = "") -> BipartiteGraph:
    """Return ``graph`` as a BipartiteGraph, colouring a plain networkx graph if needed."""
    if isinstance(graph, BipartiteGraph):
        return graph
    if not nx.is_bipartite(graph):
        raise GraphConstructionError(f"{name or 'graph'} contains an odd cycle")
    colouring = nx.bipartite.color(graph)
    sides = {v: X if colouring[v] == 0 else Y for v in graph.nodes}
    return BipartiteGraph(list(graph.nodes), sides, list(graph.edges()), name=name)


def cartesian_product(G: GraphLike, H: GraphLike) -> BipartiteGraph:
    """G □ H with side((g, h)) = side_G(g) XOR side_H(h).

    Raises:
        GraphConstructionError: If either factor is not bipartite.
    """
    G = as_bipartite(G, "G")
    H = as_bipartite(H, "H")
    product = nx.cartesian_product(G.nx_graph, H.nx_graph)
    vertices = [ProductLabel(g, h) for g in G.vertices for h in H.vertices]
    sides = {
        ProductLabel(g, h): X if G.side(g) == H.side(h) else Y
        for g, h in vertices
    }
    edges = [(ProductLabel(*u), ProductLabel(*v)) for u, v in product.edges()]
    result = BipartiteGraph(vertices, sides, edges, name=f"prod({G.name};{H.name})", factors=(G, H))
    logger.debug(f"Built {result!r}")
    return result


def bipartite_double(G: GraphLike) -> BipartiteGraph:
    """bd(G) = G x K2, bipartition by the second coordinate."""
    base = G.nx_graph if isinstance(G, BipartiteGraph) else G
    order = list(G.vertices) if isinstance(G, BipartiteGraph) else list(base.nodes)
    double = nx.tensor_product(base, nx.path_graph(2))
    vertices = [ProductLabel(v, a) for v in order for a in (0, 1)]
    sides = {label: X if label.h == 0 else Y for label in vertices}
    edges = [(ProductLabel(*u), ProductLabel(*v)) for u, v in double.edges()]
    name = getattr(G, "name", "") or "G"
    return BipartiteGraph(vertices, sides, edges, name=f"bd({name})")


def delete_X_vertices(G: BipartiteGraph, D: Iterable[Hashable]) -> BipartiteGraph:
    """Induced subgraph on V(G) minus D, where D must lie in X.

    Raises:
        PreconditionError: If some vertex of D is unknown or lies in Y.
    """
    D = list(D)
    for vertex in D:
        if vertex not in G:
            raise PreconditionError(f"{vertex!r} is not a vertex of {G!r}")
        if G.side(vertex) != X:
            raise PreconditionError(f"{vertex!r} is a Y-vertex; only X-vertices may be deleted")
    labels = ",".join(format_label(v) for v in D)
    result = G.remove_vertices(D)
    result.name = f"del({G.name};{labels})" if D else G.name
    return result


def union_graph(parts: Sequence[BipartiteGraph]) -> BipartiteGraph:
    """Union of graphs whose Y-sides are pairwise disjoint; shared X labels are merged.

    Raises:
        GraphConstructionError: On a Y-side collision or a label used on both sides.
    """
    if not parts:
        raise GraphConstructionError("union needs at least one graph")
    order: List[Hashable] = []
    sides = {}
    edges = []
    for index, part in enumerate(parts):
        for vertex in part.vertices:
            side = part.side(vertex)
            if vertex in sides:
                if sides[vertex] != side:
                    raise GraphConstructionError(f"{vertex!r} is X in one part and Y in another")
                if side == Y:
                    raise GraphConstructionError(
                        f"Y-vertex {vertex!r} of part {index + 1} collides with an earlier part"
                    )
                continue
            sides[vertex] = side
            order.append(vertex)
        edges.extend((u, v) if s is None else (u, v, s) for u, v, s in part.signed_edges())
    name = "union(" + ";".join(p.name for p in parts) + ")"
    return BipartiteGraph(order, sides, edges, name=name)


def suffix_y_vertices(G: BipartiteGraph, part: int) -> BipartiteGraph:
    """Rename every Y-vertex v of G to "<v>_<part>" so union parts stay Y-disjoint."""
    mapping = {v: f"{format_label(v)}_{part}" for v in G.y_vertices}
    return G.relabel(mapping, name=G.name)


def audit_bipartite(G: BipartiteGraph) -> bool:
    """True iff the stored sides are a proper 2-colouring of G."""
    if not nx.is_bipartite(G.nx_graph):
        return False
    return all(G.side(u) != G.side(v) for u, v in G.nx_graph.edges())


# ─────────────────────────────────────────────────────────
# Family expressions
# ─────────────────────────────────────────────────────────
# name -> (constructor, number of integer parameters)
FAMILIES = {
    "K2": (k2, 0),
    "P": (path, 1),
    "C": (cycle, 1),
    "Kmn": (complete_bipartite, 2),
    "star": (star, 1),
    "Q": (hypercube, 1),
    "FQ": (folded_hypercube, 1),
    "blowup": (blowup_cycle, 1),
    "BCP": (bcp, 1),
    "s14": (s14, 0),
    "gprime": (g_prime, 0),
}
COMBINATORS = ("prod", "bd", "union", "del")


class _ExpressionParser:
    """Recursive-descent parser for family expressions."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise ExpressionParseError(message, position=self.pos)

    def skip_space(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_space()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char: str):
        if self.peek() != char:
            found = self.peek() or "end of input"
            self.error(f"Expected '{char}' but found '{found}'")
        self.pos += 1

    def identifier(self) -> str:
        self.skip_space()
        match = re.compile(r"[A-Za-z][A-Za-z0-9]*").match(self.text, self.pos)
        if not match:
            self.error("Expected a family name")
        self.pos = match.end()
        return match.group(0)

    def integer(self) -> int:
        self.skip_space()
        match = re.compile(r"\d+").match(self.text, self.pos)
        if not match:
            self.error("Expected an integer parameter")
        self.pos = match.end()
        return int(match.group(0))

    def raw_until_close(self) -> str:
        """Consume text up to the ')' closing the current call."""
        depth, start = 0, self.pos
        while self.pos < len(self.text):
            char = self.text[self.pos]
            if char == "(":
                depth += 1
            elif char == ")":
                if depth == 0:
                    return self.text[start:self.pos]
                depth -= 1
            self.pos += 1
        self.error("Unclosed '('")

    def parse(self) -> BipartiteGraph:
        graph = self.expression(allow_simple=False)
        if self.peek():
            self.error(f"Unexpected trailing text '{self.text[self.pos:]}'")
        return graph

    def expression(self, allow_simple: bool) -> GraphLike:
        start = self.pos
        name = self.identifier()
        if name in COMBINATORS:
            graph = self.combinator(name)
        elif name == "K" or (name == "C" and allow_simple):
            graph = self.simple_graph(name, allow_simple, start)
        elif name in FAMILIES:
            constructor, arity = FAMILIES[name]
            params = []
            if arity:
                self.expect(":")
                params.append(self.integer())
                for _ in range(arity - 1):
                    self.expect(",")
                    params.append(self.integer())
            try:
                graph = constructor(*params)
            except GraphConstructionError as exc:
                raise GraphConstructionError(f"{exc} (at position {start})") from exc
        else:
            self.pos = start
            self.error(f"Unknown family '{name}'")
        return graph

    def simple_graph(self, name: str, allow_simple: bool, start: int) -> GraphLike:
        self.expect(":")
        n = self.integer()
        if name == "C":
            if n % 2 == 0:
                return cycle(n)
            if n < 3:
                self.error(f"C:{n} is not a simple cycle")
            return nx.cycle_graph(n)
        if not allow_simple:
            self.pos = start
            self.error("K:n is not bipartite; it is only accepted inside bd(...)")
        return nx.complete_graph(n)

    def combinator(self, name: str) -> BipartiteGraph:
        self.expect("(")
        if name == "bd":
            inner = self.expression(allow_simple=True)
            self.expect(")")
            graph = bipartite_double(inner)
            if isinstance(inner, nx.Graph):
                graph.name = f"bd({self._simple_name(inner)})"
            return graph
        if name == "del":
            base = self.expression(allow_simple=False)
            self.expect(";")
            raw = self.raw_until_close()
            self.expect(")")
            labels = [parse_label(part) for part in split_top_level(raw, ",") if part.strip()]
            return delete_X_vertices(base, labels)

        args = [self.expression(allow_simple=False)]
        while self.peek() == ";":
            self.pos += 1
            args.append(self.expression(allow_simple=False))
        self.expect(")")
        if name == "prod":
            if len(args) != 2:
                self.error("prod takes exactly two graphs")
            return cartesian_product(args[0], args[1])
        parts = [suffix_y_vertices(part, index + 1) for index, part in enumerate(args)]
        return union_graph(parts)

    @staticmethod
    def _simple_name(graph: nx.Graph) -> str:
        n = graph.number_of_nodes()
        return f"K:{n}" if graph.number_of_edges() == n * (n - 1) // 2 else f"C:{n}"


def parse_family_expression(text: str) -> BipartiteGraph:
    """Build the graph described by a family expression such as "prod(Kmn:2,2;C:4)".

    Grammar:
        E := K2 | P:n | C:n | Kmn:m,n | star:n | Q:d | FQ:d | blowup:n | BCP:n
           | s14 | gprime | prod(E;E) | bd(E) | union(E;E;...) | del(E;label,...)

    Inside bd(...) the non-bipartite graphs C:<odd n> and K:n are also accepted.

    Raises:
        ExpressionParseError: On malformed text (the message carries the position).
        GraphConstructionError: On a parameterization that is not bipartite.
    """
    graph = _ExpressionParser(text).parse()
    logger.debug(f"Parsed '{text}' into {graph!r}")
    return graph


# ─────────────────────────────────────────────────────────
# Graph files
# ─────────────────────────────────────────────────────────
def graph_to_text(G: BipartiteGraph) -> str:
    lines = []
    if G.name:
        lines.append(f"c {G.name}")
    lines.append(f"p bipartite {len(G.x_vertices)} {len(G.y_vertices)}")
    for vertex in G.vertices:
        lines.append(f"v {format_label(vertex)} {G.side(vertex)}")
    for u, v, sign in G.signed_edges():
        suffix = "" if sign is None else (" +1" if sign > 0 else " -1")
        lines.append(f"e {format_label(u)} {format_label(v)}{suffix}")
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> BipartiteGraph:
    """Parse the line-oriented graph format written by graph_to_text.

    Raises:
        ExpressionParseError: With the offending line number as position.
    """
    name = ""
    header = None
    vertices, sides, edges = [], {}, []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]
        try:
            if kind == "c":
                if not name and len(tokens) > 1:
                    name = line[1:].strip()
            elif kind == "p":
                if tokens[1] != "bipartite" or len(tokens) != 4:
                    raise ValueError("header must read 'p bipartite <|X|> <|Y|>'")
                header = (int(tokens[2]), int(tokens[3]))
            elif kind == "v":
                if len(tokens) != 3 or tokens[2] not in (X, Y):
                    raise ValueError("vertex line must read 'v <label> <X|Y>'")
                label = parse_label(tokens[1])
                vertices.append(label)
                sides[label] = tokens[2]
            elif kind == "e":
                if len(tokens) not in (3, 4):
                    raise ValueError("edge line must read 'e <label> <label> [sign]'")
                edge = (parse_label(tokens[1]), parse_label(tokens[2]))
                if len(tokens) == 4:
                    edge += ({"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1}[tokens[3]],)
                edges.append(edge)
            else:
                raise ValueError(f"unknown line type '{kind}'")
        except (ValueError, KeyError, IndexError) as exc:
            raise ExpressionParseError(f"Graph file line {number}: {exc}", position=number) from exc

    if header is None:
        raise ExpressionParseError("Graph file has no 'p bipartite' header")
    graph = BipartiteGraph(vertices, sides, edges, name=name)
    if (len(graph.x_vertices), len(graph.y_vertices)) != header:
        raise ExpressionParseError(
            f"Header declares {header} but the file lists "
            f"({len(graph.x_vertices)}, {len(graph.y_vertices)}) vertices"
        )
    return graph


def write_graph_file(G: BipartiteGraph, file_path: str) -> None:
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file_path, "w", encoding="utf-8") as handle:
        handle.write(graph_to_text(G))
    logger.info(f"Wrote {G!r} to {file_path}")


def read_graph_file(file_path: str) -> BipartiteGraph:
    with open(file_path, "r", encoding="utf-8") as handle:
        return graph_from_text(handle.read())
