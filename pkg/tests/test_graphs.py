"""
Tests for the bipartite graph model, the family constructors, the expression
language and the graph file format.
"""

import networkx as nx
import pytest

from models.bipartite_graph import X, Y, BipartiteGraph, Matching, ProductLabel, format_label, parse_label
from modules.errors import ExpressionParseError, GraphConstructionError, PreconditionError
from modules.graph_families import (
    audit_bipartite,
    bcp,
    cartesian_product,
    complete_bipartite,
    cycle,
    delete_X_vertices,
    graph_from_text,
    graph_to_text,
    hypercube,
    k2,
    parse_family_expression,
    read_graph_file,
    s14,
    write_graph_file,
)


# ─────────────────────────────────────────────────────────
# Model
# ─────────────────────────────────────────────────────────
def test_edge_inside_one_side_is_rejected():
    with pytest.raises(GraphConstructionError):
        BipartiteGraph(["a", "b"], {"a": X, "b": X}, [("a", "b")])


def test_duplicate_and_unknown_vertices_are_rejected():
    with pytest.raises(GraphConstructionError):
        BipartiteGraph(["a", "a"], {"a": X}, [])
    with pytest.raises(GraphConstructionError):
        BipartiteGraph(["a", "b"], {"a": X, "b": Y}, [("a", "c")])


def test_edges_are_oriented_x_first_in_canonical_order():
    G = cycle(4)
    assert G.edges() == [(0, 1), (0, 3), (2, 1), (2, 3)]
    assert G.neighbors(0) == [1, 3]


def test_matching_of_validates_edges():
    G = cycle(6)
    M = Matching.of(G, [(1, 0), (2, 3), (4, 5)])
    assert M.edges == ((0, 1), (2, 3), (4, 5))
    assert M.is_perfect(G)
    with pytest.raises(PreconditionError):
        Matching.of(G, [(0, 2)])
    with pytest.raises(PreconditionError):
        Matching.of(G, [(0, 1), (2, 1)])


def test_labels_round_trip_through_text():
    label = ProductLabel(("x0", 1), 3)
    assert format_label(label) == "((x0,1),3)"
    assert parse_label(format_label(label)) == (("x0", 1), 3)
    assert parse_label("-4") == -4


# ─────────────────────────────────────────────────────────
# Families
# ─────────────────────────────────────────────────────────
@pytest.mark.parametrize("expression, vertices, edges", [
    ("K2", 2, 1),
    ("P:5", 5, 4),
    ("C:8", 8, 8),
    ("Kmn:2,3", 5, 6),
    ("star:4", 5, 4),
    ("Q:3", 8, 12),
    ("FQ:3", 8, 16),
    ("blowup:2", 8, 16),
    ("BCP:4", 8, 12),
    ("s14", 14, 28),
    ("gprime", 14, 41),
    ("prod(Kmn:2,2;C:6)", 24, 48),
    ("bd(C:5)", 10, 10),
    ("bd(K:4)", 8, 12),
    ("union(star:2;star:3)", 6, 5),
    ("del(Kmn:3,3;x0)", 5, 6),
])
def test_family_sizes(expression, vertices, edges):
    G = parse_family_expression(expression)
    assert G.n_vertices == vertices
    assert G.n_edges == edges
    assert audit_bipartite(G)


def test_odd_parameterizations_are_not_bipartite():
    for expression in ("C:5", "FQ:4"):
        with pytest.raises(GraphConstructionError):
            parse_family_expression(expression)


def test_s14_signs_and_regularity():
    G = s14()
    assert G.degree_sequence() == [4] * 14
    assert sum(1 for _, _, sign in G.signed_edges() if sign == -1) == 7
    assert G.sign("x0", "y6") == -1
    assert G.sign("x0", "y3") == 1


def test_prism_of_a_square_is_the_cube():
    G = parse_family_expression("prod(Q:2;K2)")
    assert nx.is_isomorphic(G.nx_graph, hypercube(3).nx_graph)
    assert G.factors is not None and G.factors[1] == k2()


def test_product_sides_follow_the_xor_rule():
    G = cartesian_product(complete_bipartite(2, 2), cycle(4))
    assert G.side(ProductLabel("x0", 0)) == X
    assert G.side(ProductLabel("x0", 1)) == Y
    assert G.side(ProductLabel("y0", 1)) == X
    assert len(G.x_vertices) == len(G.y_vertices) == 8


def test_bipartite_double_of_k4_is_the_crown():
    G = parse_family_expression("bd(K:4)")
    assert nx.is_isomorphic(G.nx_graph, bcp(4).nx_graph)
    assert G.name == "bd(K:4)"


def test_union_suffixes_y_vertices_and_shares_x():
    G = parse_family_expression("union(star:2;star:3)")
    assert G.x_vertices == ("x0",)
    assert set(G.y_vertices) == {"y0_1", "y1_1", "y0_2", "y1_2", "y2_2"}


def test_delete_only_x_vertices():
    G = complete_bipartite(3, 3)
    assert delete_X_vertices(G, ["x2"]).name == "del(Kmn:3,3;x2)"
    with pytest.raises(PreconditionError):
        delete_X_vertices(G, ["y0"])


# ─────────────────────────────────────────────────────────
# Expression errors
# ─────────────────────────────────────────────────────────
@pytest.mark.parametrize("expression", ["Kmn:2", "prod(K2", "foo:3", "K:4", "Q:3 extra", "prod(K2;K2;K2)"])
def test_malformed_expressions_report_a_position(expression):
    with pytest.raises(ExpressionParseError) as info:
        parse_family_expression(expression)
    assert info.value.position is not None


# ─────────────────────────────────────────────────────────
# Graph files
# ─────────────────────────────────────────────────────────
def test_graph_file_keeps_signs_and_order(tmp_path):
    path = tmp_path / "graphs" / "s14.txt"
    write_graph_file(s14(), str(path))
    G = read_graph_file(str(path))
    assert G == s14()
    assert G.vertices == s14().vertices
    assert G.name == "s14"
    assert graph_to_text(G).splitlines()[1] == "p bipartite 7 7"


def test_graph_file_errors_name_the_line():
    with pytest.raises(ExpressionParseError) as info:
        graph_from_text("p bipartite 1 1\nv a X\nv b Y\nq a b\n")
    assert info.value.position == 4
    with pytest.raises(ExpressionParseError):
        graph_from_text("v a X\n")
    with pytest.raises(ExpressionParseError):
        graph_from_text("p bipartite 2 1\nv a X\nv b Y\n")
