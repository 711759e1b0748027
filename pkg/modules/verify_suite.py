"""
Verification suite: the grid of product instances whose minimum forcing numbers
are known, certified by the pipeline and cross-checked by exhaustion, plus
randomized property checks of the arithmetic, rank and matching layers.

Cases are plain records dispatched by ``run_case`` so they can run in worker
processes; results come back in case order whatever the completion order.
"""

import logging
import os
import time
from dataclasses import dataclass, field as dataclass_field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

import config
from models.forcing_report import Uniqueness
from modules.block_matrices import case_for_k
from modules.certificates import gprime_certificate, s14_certificate
from modules.errors import ForcingToolError
from modules.fields import get_field, smallest_fourier_prime
from modules.forcing import (
    enumerate_perfect_matchings,
    has_unique_pm,
    is_forcing,
    minimum_forcing_number,
)
from modules.graph_families import parse_family_expression
from modules.pipeline import CertifyContext, run_certify
from modules.rank_engine import exact_rank

logger = logging.getLogger(__name__)

GROUPS = (
    "hypercube", "balanced_prism", "case1", "case2", "case3", "case4", "oracle",
    "prism", "star", "union", "s14", "gprime", "properties", "fault",
)
DEFAULT_GROUPS = tuple(g for g in GROUPS if g != "fault")

# Base graphs of the circular grid with the field of their certificate
CIRCULAR_BASES = (("Kmn:2,2", "Q"), ("Q:2", "Q"), ("Kmn:3,3", "GFp:7"), ("s14", "Q"))

# Graphs with at most 12 vertices used by the matching property checks
CORPUS = (
    "K2", "P:4", "P:6", "C:4", "C:6", "C:8", "C:12", "Kmn:2,2", "Kmn:2,3", "Kmn:3,3",
    "star:3", "Q:2", "Q:3", "BCP:3", "BCP:4", "blowup:2", "FQ:3", "bd(C:5)", "bd(K:4)",
    "prod(P:4;K2)", "prod(star:3;K2)", "prod(Kmn:2,2;K2)", "prod(C:6;K2)", "prod(Kmn:3,3;K2)",
)


@dataclass(frozen=True)
class SuiteCase:
    group: str
    name: str
    kind: str
    params: Dict = dataclass_field(default_factory=dict)

    @property
    def command(self) -> str:
        p = self.params
        if self.kind == "certify":
            target = f"--k {p['k']}" if p.get("k") else "--prism"
            command = f'python main.py certify "{p["expression"]}" {target}'
            if p.get("field"):
                command += f" --field {p['field']}"
            if p.get("certificate_path"):
                command += f" --certificate {p['certificate_path']}"
            return command
        if self.kind == "oracle":
            return f'python main.py oracle "{p["expression"]}"'
        return f"python main.py verify-suite --grid {self.group}"


# ─────────────────────────────────────────────────────────
# Grid
# ─────────────────────────────────────────────────────────
def _certify(group, expression, expect, k=None, field=None, certificate_path=None) -> SuiteCase:
    mode = f"k={k}" if k else "prism"
    params = {"expression": expression, "expect": expect, "k": k, "field": field,
              "certificate_path": certificate_path}
    return SuiteCase(group, f"certify {expression} {mode}", "certify", params)


def _oracle(group, expression, expect) -> SuiteCase:
    return SuiteCase(group, f"oracle {expression}", "oracle", {"expression": expression, "expect": expect})


def build_cases(groups: Sequence[str], suite: Optional[dict] = None, seed: Optional[int] = None) -> List[SuiteCase]:
    """The cases of the requested groups, in GROUPS order.

    ``suite`` is the verify_suite settings section; both arguments default to config.DEFAULT_SETTINGS.
    """
    suite = suite or config.DEFAULT_SETTINGS["verify_suite"]
    seed = config.DEFAULT_SETTINGS["seed"] if seed is None else seed
    cases: List[SuiteCase] = []
    for group in GROUPS:
        if group not in groups:
            continue
        if group == "hypercube":
            cases += [_oracle(group, "Q:2", 1), _oracle(group, "Q:3", 2)]
        elif group == "balanced_prism":
            for n in (2, 3):
                cases.append(_oracle(group, f"prod(Kmn:{n},{n};K2)", n))
                cases.append(_certify(group, f"Kmn:{n},{n}", n))
        elif group.startswith("case"):
            for k in suite["k_values"]:
                if case_for_k(k) != group:
                    continue
                for expression, field in CIRCULAR_BASES:
                    n = parse_family_expression(expression).n_vertices
                    cases.append(_certify(group, expression, n, k=k, field=field))
        elif group == "oracle":
            cases += [
                _oracle(group, "prod(Kmn:2,2;C:4)", 4),
                _oracle(group, "C:6", 1),
                _oracle(group, "prod(star:3;K2)", 1),
            ]
        elif group == "prism":
            for n in range(1, 5):
                for m in range(1, n + 1):
                    field = f"GFp:{smallest_fourier_prime(n)}"
                    cases.append(_certify(group, f"Kmn:{m},{n}", m, field=field))
                    cases.append(_oracle(group, f"prod(Kmn:{m},{n};K2)", m))
        elif group == "star":
            for n in range(1, 6):
                cases.append(_certify(group, f"star:{n}", 1, field="GFp:7"))
                cases.append(_oracle(group, f"prod(star:{n};K2)", 1))
        elif group == "union":
            cases.append(_certify(group, "union(star:2;star:3)", 1, field="Qsqrt:2"))
            cases.append(_oracle(group, "prod(union(star:2;star:3);K2)", 1))
            cases.append(_certify(group, "union(Kmn:2,3;Kmn:2,2)", 2, field="Qsqrt:2"))
        elif group == "s14":
            cases.append(SuiteCase(group, "s14 B B^T = I", "orthogonal", {"name": "s14"}))
            cases.append(_certify(group, "s14", 7))
        elif group == "gprime":
            cases.append(SuiteCase(group, "gprime (B/18)(B/18)^T = I", "orthogonal", {"name": "gprime"}))
            cases.append(_certify(group, "gprime", 14, k=2))
        elif group == "properties":
            for descriptor in ("Q", "GFp:101", "Qsqrt:2"):
                cases.append(SuiteCase(group, f"field axioms {descriptor}", "field_axioms",
                                       {"field": descriptor, "cases": suite["property_cases"], "seed": seed}))
            cases.append(SuiteCase(group, "rank invariance", "rank_invariance",
                                   {"cases": suite["rank_cases"], "seed": seed}))
            cases.append(SuiteCase(group, "peeling vs counting", "peeling", {"seed": seed}))
            cases.append(SuiteCase(group, "forcing monotonicity", "monotonicity",
                                   {"cases": suite["monotonicity_cases"], "seed": seed}))
        elif group == "fault":
            path = os.path.join(config.FIXTURES_FOLDER, "corrupted_k22.json")
            cases.append(_certify(group, "Kmn:2,2", 4, k=2, certificate_path=path))
    return cases


# ─────────────────────────────────────────────────────────
# Case runners
# ─────────────────────────────────────────────────────────
def _run_certify(p: dict) -> Tuple[bool, str]:
    context = CertifyContext(
        expression=p["expression"], k=p.get("k"), prism=not p.get("k"),
        field=p.get("field"), certificate_path=p.get("certificate_path"),
    )
    runner = run_certify(context)
    if not runner.passed:
        failed = runner.failed_stage
        return False, f"halted at stage '{failed.name}': {failed.message}"
    report = context.forcing
    if report.exact != p["expect"]:
        return False, f"{report.verdict}: {report.lower_bound} <= f <= {report.upper_bound}, expected {p['expect']}"
    return True, f"EXACT f = {report.exact} (corank {context.rank.corank}, matching {len(context.upper.matching)})"


def _run_oracle(p: dict) -> Tuple[bool, str]:
    report = minimum_forcing_number(parse_family_expression(p["expression"]))
    detail = f"f = {report.exact} over {report.matchings_examined} matchings ({report.closure})"
    return report.exact == p["expect"] and report.closure == "exhaustive", detail


def _run_orthogonal(p: dict) -> Tuple[bool, str]:
    cert = s14_certificate() if p["name"] == "s14" else gprime_certificate()
    field = cert.field
    gram = cert.B.entries.dot(cert.B.entries.T)
    for (i, j), value in np.ndenumerate(gram):
        expected = field.one if i == j else field.zero
        if not field.is_zero(value - expected):
            return False, f"entry ({i}, {j}) of B B^T is {field.format(value)}"
    return True, f"B B^T = I_{gram.shape[0]} over {field.descriptor}"


def _run_field_axioms(p: dict) -> Tuple[bool, str]:
    field = get_field(p["field"])
    rng = np.random.default_rng(p["seed"])
    for case in range(p["cases"]):
        x, y, z = (field.random_element(rng) for _ in range(3))
        laws = {
            "additive associativity": field.equal(field.add(field.add(x, y), z), field.add(x, field.add(y, z))),
            "multiplicative associativity": field.equal(field.mul(field.mul(x, y), z), field.mul(x, field.mul(y, z))),
            "distributivity": field.equal(field.mul(x, field.add(y, z)), field.add(field.mul(x, y), field.mul(x, z))),
            "commutativity": field.equal(field.mul(x, y), field.mul(y, x)),
            "additive inverse": field.is_zero(field.add(x, field.neg(x))),
        }
        if not field.is_zero(x):
            laws["multiplicative inverse"] = field.equal(field.mul(x, field.inverse(x)), field.one)
        broken = [law for law, holds in laws.items() if not holds]
        if broken:
            return False, f"case {case}: {broken[0]} fails for {field.format(x)}, {field.format(y)}, {field.format(z)}"
    return True, f"{p['cases']} random triples"


def _random_matrix(field, rng, rows: int, cols: int):
    matrix = field.zeros(rows, cols)
    for i in range(rows):
        for j in range(cols):
            if rng.random() < 0.6:
                matrix[i, j] = field.random_element(rng)
    return matrix


def _run_rank_invariance(p: dict) -> Tuple[bool, str]:
    rng = np.random.default_rng(p["seed"])
    fields = [get_field("Q"), get_field("GFp:101")]
    for case in range(p["cases"]):
        field = fields[case % 2]
        rows, cols = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        M = _random_matrix(field, rng, rows, cols)
        rank = exact_rank(M, field).rank
        scaled = M.copy()
        row = int(rng.integers(rows))
        scaled[row, :] = scaled[row, :] * field.random_element(rng, nonzero=True)
        swapped = scaled[rng.permutation(rows), :]
        column = int(rng.integers(cols))
        swapped[:, column] = swapped[:, column] * field.random_element(rng, nonzero=True)
        variants = {
            "transpose": exact_rank(np.array(M.T), field).rank,
            "row scaling, row swaps and column scaling": exact_rank(swapped, field).rank,
        }
        for name, value in variants.items():
            if value != rank:
                return False, f"case {case} over {field.descriptor}: {name} changed rank {rank} to {value}"
    return True, f"{p['cases']} random matrices"


def _uniqueness_by_count(G) -> Uniqueness:
    enumeration = enumerate_perfect_matchings(G, cap=1)
    if not enumeration.matchings:
        return Uniqueness.NONE
    return Uniqueness.MULTIPLE if enumeration.truncated else Uniqueness.UNIQUE


def _peeling_corpus(rng) -> List:
    """Corpus graphs with vertex-deleted subgraphs that exercise all three verdicts."""
    graphs = []
    for expression in CORPUS:
        G = parse_family_expression(expression)
        graphs.append(G)
        first = enumerate_perfect_matchings(G, cap=1).matchings
        for _ in range(3):
            if G.x_vertices and G.y_vertices:
                x = G.x_vertices[int(rng.integers(len(G.x_vertices)))]
                y = G.y_vertices[int(rng.integers(len(G.y_vertices)))]
                graphs.append(G.remove_vertices([x, y]))
            if first:
                edges = list(first[0].edges)
                size = int(rng.integers(0, len(edges) + 1))
                chosen = [edges[i] for i in sorted(rng.choice(len(edges), size=size, replace=False))]
                graphs.append(G.remove_vertices([v for edge in chosen for v in edge]))
    return graphs


def _run_peeling(p: dict) -> Tuple[bool, str]:
    rng = np.random.default_rng(p["seed"])
    graphs = _peeling_corpus(rng)
    tally = {verdict: 0 for verdict in Uniqueness}
    for G in graphs:
        peeled, counted = has_unique_pm(G), _uniqueness_by_count(G)
        if peeled is not counted:
            return False, f"{G!r}: peeling says {peeled.value}, counting says {counted.value}"
        tally[peeled] += 1
    summary = ", ".join(f"{count} {verdict.value}" for verdict, count in tally.items())
    return True, f"{len(graphs)} graphs agree ({summary})"


def _run_monotonicity(p: dict) -> Tuple[bool, str]:
    rng = np.random.default_rng(p["seed"])
    pool = []
    for expression in CORPUS:
        G = parse_family_expression(expression)
        matchings = enumerate_perfect_matchings(G, cap=50).matchings
        if matchings and len(matchings[0]) > 0:
            pool.append((G, matchings))
    forcing_pairs = 0
    for case in range(p["cases"]):
        G, matchings = pool[int(rng.integers(len(pool)))]
        M = matchings[int(rng.integers(len(matchings)))]
        edges = list(M.edges)
        bigger = [e for e in edges if rng.random() < 0.5]
        smaller = [e for e in bigger if rng.random() < 0.5]
        small_forces = is_forcing(G, M, smaller)
        if small_forces and not is_forcing(G, M, bigger):
            return False, f"case {case} on {G!r}: a subset forces but its superset does not"
        forcing_pairs += small_forces
    return True, f"{p['cases']} triples, {forcing_pairs} with a forcing subset"


RUNNERS = {
    "certify": _run_certify,
    "oracle": _run_oracle,
    "orthogonal": _run_orthogonal,
    "field_axioms": _run_field_axioms,
    "rank_invariance": _run_rank_invariance,
    "peeling": _run_peeling,
    "monotonicity": _run_monotonicity,
}


def run_case(case: SuiteCase) -> dict:
    start = time.perf_counter()
    try:
        passed, detail = RUNNERS[case.kind](case.params)
    except ForcingToolError as exc:
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return {
        "group": case.group,
        "case": case.name,
        "passed": bool(passed),
        "detail": detail,
        "command": case.command,
        "seconds": time.perf_counter() - start,
    }


def run_suite(cases: Sequence[SuiteCase], jobs: int = 1) -> List[dict]:
    """Run every case, concurrently when jobs > 1; rows keep the order of ``cases``."""
    if jobs > 1:
        rows = Parallel(n_jobs=jobs)(delayed(run_case)(case) for case in cases)
    else:
        rows = [run_case(case) for case in cases]
    failures = [row for row in rows if not row["passed"]]
    for row in failures:
        logger.error(f"[{row['group']}] {row['case']} failed: {row['detail']} (reproduce: {row['command']})")
    logger.info(f"Verification suite: {len(rows) - len(failures)}/{len(rows)} cases passed")
    return list(rows)


def summary_table(rows: Sequence[dict]) -> pd.DataFrame:
    """One line per case, in run order."""
    frame = pd.DataFrame(list(rows), columns=["group", "case", "passed", "seconds", "detail", "command"])
    frame["seconds"] = frame["seconds"].round(3)
    return frame


def group_summary(rows: Sequence[dict]) -> pd.DataFrame:
    frame = summary_table(rows)
    grouped = frame.groupby("group", sort=False).agg(cases=("case", "count"), passed=("passed", "sum"))
    grouped["failed"] = grouped["cases"] - grouped["passed"]
    return grouped.reset_index()


def parse_grid(grid: Optional[str]) -> Tuple[str, ...]:
    """Comma-separated group names; None or "default" selects every group except fault, "all" every group."""
    if not grid or grid == "default":
        return DEFAULT_GROUPS
    if grid == "all":
        return GROUPS
    groups = tuple(part.strip() for part in grid.split(",") if part.strip())
    unknown = [g for g in groups if g not in GROUPS]
    if unknown:
        raise ValueError(f"Unknown suite group(s) {', '.join(unknown)}; choose from {', '.join(GROUPS)}")
    return groups
