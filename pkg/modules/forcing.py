"""
Perfect matchings, uniqueness by peeling, forcing sets and forcing numbers.

Uniqueness is decided by degree-one peeling: a vertex of degree one forces its
only edge, and both endpoints are removed. For bipartite graphs the remainder is
either empty (unique perfect matching), has no perfect matching, or has at least
two, because a bipartite graph with exactly one perfect matching always has a
vertex of degree one. Enumeration is kept as an oracle for small graphs.
"""

import logging
from collections import deque
from itertools import combinations
from typing import Dict, FrozenSet, Hashable, List, Optional, Sequence, Set, Tuple

import networkx as nx
from joblib import Parallel, delayed

from models.bipartite_graph import X, BipartiteGraph, Matching, format_label
from models.forcing_report import (
    ForcingReport,
    ForcingResult,
    MatchingEnumeration,
    UpperBoundCertificate,
    Uniqueness,
)
from modules.errors import PreconditionError

logger = logging.getLogger(__name__)

Adjacency = Dict[Hashable, Tuple[Hashable, ...]]


def _adjacency(G: BipartiteGraph) -> Adjacency:
    return {v: tuple(G.neighbors(v)) for v in G.vertices}


def matching_to_text(M: Matching) -> str:
    return " ".join(f"{format_label(u)}-{format_label(v)}" for u, v in M)


# ─────────────────────────────────────────────────────────
# Peeling
# ─────────────────────────────────────────────────────────
def _has_perfect_matching(G: BipartiteGraph, alive: Dict[Hashable, Set[Hashable]]) -> bool:
    graph = nx.Graph()
    graph.add_nodes_from(alive)
    graph.add_edges_from((u, v) for u, nbrs in alive.items() for v in nbrs)
    top = [v for v in alive if G.side(v) == X]
    if 2 * len(top) != len(alive):
        return False
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=top)
    return len(matching) == len(alive)


def _peel(
    G: BipartiteGraph,
    adjacency: Adjacency,
    removed: Set[Hashable],
    known_perfect: bool = False,
) -> Tuple[Uniqueness, List[tuple]]:
    """Peel G - removed and return the verdict with the edges forced on the way.

    ``known_perfect`` says the remainder is already known to have a perfect
    matching, which saves the Hopcroft-Karp check when peeling gets stuck.
    """
    alive = {v: {u for u in nbrs if u not in removed} for v, nbrs in adjacency.items() if v not in removed}
    forced: List[tuple] = []
    queue = deque(v for v in G.vertices if v in alive and len(alive[v]) <= 1)
    while queue:
        v = queue.popleft()
        if v not in alive:
            continue
        if not alive[v]:
            return Uniqueness.NONE, forced
        if len(alive[v]) > 1:
            continue
        (u,) = alive[v]
        forced.append((v, u))
        for endpoint in (v, u):
            for w in alive.pop(endpoint):
                if w in alive:
                    alive[w].discard(endpoint)
                    if len(alive[w]) <= 1:
                        queue.append(w)

    if not alive:
        return Uniqueness.UNIQUE, forced
    if known_perfect or _has_perfect_matching(G, alive):
        return Uniqueness.MULTIPLE, forced
    return Uniqueness.NONE, forced


def has_unique_pm(G: BipartiteGraph) -> Uniqueness:
    """UNIQUE, MULTIPLE or NONE (no perfect matching at all) by degree-one peeling."""
    verdict, _ = _peel(G, _adjacency(G), set())
    return verdict


def unique_perfect_matching(G: BipartiteGraph) -> Optional[Matching]:
    """The perfect matching of G when it is unique, else None."""
    verdict, forced = _peel(G, _adjacency(G), set())
    if verdict is not Uniqueness.UNIQUE:
        return None
    return Matching.of(G, forced)


# ─────────────────────────────────────────────────────────
# Enumeration
# ─────────────────────────────────────────────────────────
def _extend(
    choices: Sequence[Sequence[int]],
    depth: int,
    used: List[bool],
    current: List[int],
    found: List[Tuple[int, ...]],
    limit: Optional[int],
) -> None:
    if limit is not None and len(found) >= limit:
        return
    if depth == len(choices):
        found.append(tuple(current))
        return
    for y in choices[depth]:
        if used[y]:
            continue
        used[y] = True
        current.append(y)
        _extend(choices, depth + 1, used, current, found, limit)
        current.pop()
        used[y] = False
        if limit is not None and len(found) >= limit:
            return


def _enumerate_branch(choices, first: int, n_y: int, limit: Optional[int]) -> List[Tuple[int, ...]]:
    used = [False] * n_y
    used[first] = True
    found: List[Tuple[int, ...]] = []
    _extend(choices, 1, used, [first], found, limit)
    return found


def enumerate_perfect_matchings(
    G: BipartiteGraph,
    cap: Optional[int] = None,
    jobs: int = 1,
) -> MatchingEnumeration:
    """All perfect matchings of G in lexicographic order of canonical vertex order.

    Matchings are built by matching the X-vertices in canonical order, each to its
    Y-neighbours in canonical order. With ``cap`` the search stops after cap
    matchings and sets ``truncated`` if at least one more exists. ``jobs`` > 1
    splits the search on the edges of the first X-vertex; the merged result is in
    the same order as the sequential one.
    """
    xs, ys = G.x_vertices, G.y_vertices
    if len(xs) != len(ys):
        logger.debug(f"{G!r} is unbalanced; no perfect matchings")
        return MatchingEnumeration(())
    if not xs:
        return MatchingEnumeration((Matching(()),))

    y_index = {y: j for j, y in enumerate(ys)}
    choices = [[y_index[y] for y in G.neighbors(x)] for x in xs]
    limit = None if cap is None else cap + 1

    if jobs > 1 and len(choices[0]) > 1:
        branches = Parallel(n_jobs=jobs)(
            delayed(_enumerate_branch)(choices, first, len(ys), limit) for first in choices[0]
        )
        found = [m for branch in branches for m in branch]
        if limit is not None:
            found = found[:limit]
    else:
        found = []
        _extend(choices, 0, [False] * len(ys), [], found, limit)

    truncated = cap is not None and len(found) > cap
    if truncated:
        found = found[:cap]
    matchings = tuple(Matching(tuple(zip(xs, (ys[j] for j in m)))) for m in found)
    logger.debug(f"Enumerated {len(matchings)} perfect matchings of {G!r} (truncated={truncated})")
    return MatchingEnumeration(matchings, truncated)


# ─────────────────────────────────────────────────────────
# Forcing sets
# ─────────────────────────────────────────────────────────
def _require_perfect(G: BipartiteGraph, M: Matching) -> None:
    for u, v in M:
        if not G.has_edge(u, v):
            raise PreconditionError(f"({format_label(u)}, {format_label(v)}) is not an edge of {G!r}")
    if not M.is_perfect(G):
        raise PreconditionError(f"The matching is not a perfect matching of {G!r}")


def is_forcing(G: BipartiteGraph, M: Matching, S) -> bool:
    """True iff S is contained in no perfect matching of G other than M.

    Raises:
        PreconditionError: If M is not a perfect matching of G or S is not a subset of M.
    """
    _require_perfect(G, M)
    S = list(S)
    outside = [edge for edge in S if edge not in M]
    if outside:
        u, v = outside[0]
        raise PreconditionError(f"({format_label(u)}, {format_label(v)}) is not an edge of the matching")
    removed = {v for edge in S for v in edge}
    verdict, _ = _peel(G, _adjacency(G), removed, known_perfect=True)
    return verdict is Uniqueness.UNIQUE


def alternating_cycle_packing(G: BipartiteGraph, M: Matching) -> List[FrozenSet[tuple]]:
    """Greedy vertex-disjoint M-alternating 4-cycles, then 6-cycles.

    Each cycle is returned as the set of its M-edges. A forcing set of M contains
    an edge of every M-alternating cycle, so the length of the packing bounds
    f(G, M) from below.
    """
    edges = list(M.edges)
    used: Set[tuple] = set()
    packing: List[FrozenSet[tuple]] = []

    def take(cycle_edges):
        if used.isdisjoint(cycle_edges):
            used.update(cycle_edges)
            packing.append(frozenset(cycle_edges))

    for a, b in combinations(edges, 2):
        (x1, y1), (x2, y2) = a, b
        if G.has_edge(x1, y2) and G.has_edge(x2, y1):
            take((a, b))

    for a, b, c in combinations(edges, 3):
        if not used.isdisjoint((a, b, c)):
            continue
        (x1, y1), (x2, y2), (x3, y3) = a, b, c
        forward = G.has_edge(x1, y2) and G.has_edge(x2, y3) and G.has_edge(x3, y1)
        backward = G.has_edge(x1, y3) and G.has_edge(x3, y2) and G.has_edge(x2, y1)
        if forward or backward:
            take((a, b, c))
    return packing


def forcing_number_of_matching(
    G: BipartiteGraph,
    M: Matching,
    limit: Optional[int] = None,
) -> ForcingResult:
    """Smallest forcing set of M, searched by size and lexicographically within a size.

    Subsets missing an edge of some packed alternating cycle are skipped. With
    ``limit`` the search gives up after size ``limit`` and returns value None.
    """
    _require_perfect(G, M)
    packing = alternating_cycle_packing(G, M)
    lower = len(packing)
    adjacency = _adjacency(G)
    edges = list(M.edges)
    top = len(edges) if limit is None else min(limit, len(edges))

    for size in range(lower, top + 1):
        for subset in combinations(edges, size):
            chosen = set(subset)
            if any(chosen.isdisjoint(cycle) for cycle in packing):
                continue
            removed = {v for edge in subset for v in edge}
            verdict, _ = _peel(G, adjacency, removed, known_perfect=True)
            if verdict is Uniqueness.UNIQUE:
                return ForcingResult(size, True, tuple(subset), lower, limit)
    return ForcingResult(None, False, (), lower, limit)


def minimum_forcing_number(
    G: BipartiteGraph,
    known_lower: Optional[int] = None,
    cap: Optional[int] = None,
    jobs: int = 1,
) -> ForcingReport:
    """f(G) as the minimum of f(G, M) over the enumerated perfect matchings.

    The search stops early when the running minimum reaches ``known_lower``; the
    value is then certified by that bound (closure "known_lower") rather than by
    exhaustion. A ``cap`` that truncates the enumeration leaves only an upper bound.

    Raises:
        PreconditionError: If G has no perfect matching.
        VerificationError: If ``known_lower`` exceeds a forcing number that was found.
    """
    enumeration = enumerate_perfect_matchings(G, cap=cap, jobs=jobs)
    if not enumeration.matchings:
        raise PreconditionError(f"{G!r} has no perfect matching")

    best: Optional[ForcingResult] = None
    table = []
    closure = None
    examined = 0
    for M in enumeration.matchings:
        examined += 1
        limit = None if best is None else best.value - 1
        result = forcing_number_of_matching(G, M, limit)
        table.append((matching_to_text(M), result.describe()))
        if result.value is not None:
            best = result
        if known_lower is not None and best.value <= known_lower:
            closure = "known_lower"
            break
        if best.value == 0:
            break

    report = ForcingReport(
        graph=G.name or repr(G),
        n_vertices=G.n_vertices,
        upper_bound=best.value,
        upper_certificate=Matching.of(G, best.forcing_set),
        matchings_examined=examined,
        table=table,
    )
    if closure == "known_lower":
        report.lower_bound, report.lower_kind = known_lower, "rank"
        report.exact, report.closure = best.value, closure
    elif not enumeration.truncated:
        report.lower_bound, report.lower_kind = best.value, "exhaustive"
        report.exact, report.closure = best.value, "exhaustive"
    else:
        report.truncated = True
        report.lower_bound, report.lower_kind = (known_lower, "rank") if known_lower is not None else (0, "trivial")
    report.check()
    logger.info(f"{report.graph}: f = {report.exact if report.exact is not None else report.upper_bound} "
                f"({report.verdict}, {examined} matchings examined)")
    return report


# ─────────────────────────────────────────────────────────
# Upper-bound matchings of products
# ─────────────────────────────────────────────────────────
def _is_prism_factor(H: BipartiteGraph) -> bool:
    return H.n_vertices == 2 and H.n_edges == 1


def _is_even_cycle(H: BipartiteGraph) -> bool:
    return (
        H.n_vertices >= 4
        and H.n_vertices % 2 == 0
        and all(H.degree(v) == 2 for v in H.vertices)
        and nx.is_connected(H.nx_graph)
    )


def canonical_upper_matching(product: BipartiteGraph) -> UpperBoundCertificate:
    """The uniquely extendable matching behind f(G □ K2) <= |X| and f(G □ C_2k) <= |V(G)|.

    Prism: x of copy 0 to x of copy 1 for every X-vertex x of G.
    Circular: x of copy 0 to x of the next copy, y of copy 0 to y of the previous copy.
    The verdict comes from peeling the product minus the matched vertices; a
    failed verdict withholds the bound.

    Raises:
        PreconditionError: If the graph was not built as G □ K2 or G □ C_2k.
    """
    if not product.factors:
        raise PreconditionError(f"{product!r} was not built as a Cartesian product")
    G, H = product.factors
    h0 = H.vertices[0] if H.n_vertices else None
    if _is_prism_factor(H):
        h1 = H.vertices[1]
        edges = [((x, h0), (x, h1)) for x in G.x_vertices]
    elif _is_even_cycle(H):
        following, previous = H.neighbors(h0)
        edges = [((x, h0), (x, following)) for x in G.x_vertices]
        edges += [((y, h0), (y, previous)) for y in G.y_vertices]
    else:
        raise PreconditionError(f"Second factor {H!r} is neither K2 nor an even cycle")

    index = {(label.g, label.h): label for label in product.vertices}
    M = Matching.of(product, [(index[u], index[v]) for u, v in edges])
    verdict, forced = _peel(product, _adjacency(product), M.vertices())
    extension = None
    if verdict is Uniqueness.UNIQUE:
        extension = Matching.of(product, list(M.edges) + forced)
        logger.info(f"Upper matching of size {len(M)} extends uniquely in {product!r}")
    else:
        logger.warning(f"Upper matching of size {len(M)} in {product!r} is not uniquely extendable ({verdict.value})")
    return UpperBoundCertificate(M, verdict, extension)
