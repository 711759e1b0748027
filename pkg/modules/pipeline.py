"""
Certification pipeline: certificate -> block matrix -> support audit -> exact rank
-> dependency identities -> canonical upper matching -> sandwich verdict.

Each step is a Stage object executed by a StageRunner, which keeps the history
of what ran, how long it took and where the run stopped. A stage either returns
None (passed), returns a message (a check failed) or raises a ForcingToolError
(the stage could not run); the runner halts at the first stage that does not pass.
"""

import logging
import time
from dataclasses import dataclass, field as dataclass_field
from typing import List, Optional, Tuple, Union

import humanfriendly

from models.bipartite_graph import BipartiteGraph
from models.certificates import (
    BlockMatrix,
    CertificateReport,
    InvolutoryCertificate,
    RowInversePair,
    WeightedBiAdjacency,
)
from models.forcing_report import ForcingReport, UpperBoundCertificate
from modules.block_matrices import circular_block_matrix, instantiate, prism_block_matrix
from modules.certificate_registry import get_certificate_registry
from modules.certificates import involutory_from_pair, pair_from_involutory, read_certificate, verify_certificate
from modules.errors import ForcingToolError, PreconditionError, VerificationError
from modules.forcing import canonical_upper_matching, minimum_forcing_number
from modules.graph_families import parse_family_expression
from modules.rank_engine import (
    CrossFieldReport,
    DependencyResidual,
    RankCertificate,
    assert_rank_bound,
    cross_field_rank_check,
    exact_rank,
    verify_case_dependency,
)

logger = logging.getLogger(__name__)

PASSED = "passed"
FAILED = "failed"
ERROR = "error"


@dataclass
class CertifyContext:
    """Inputs of one certify run and everything its stages produce."""

    expression: str
    k: Optional[int] = None
    prism: bool = False
    field: Optional[str] = None
    certificate_path: Optional[str] = None
    cross_check_primes: Tuple[int, ...] = ()
    graph: Optional[BipartiteGraph] = None
    certificate: Union[None, InvolutoryCertificate, RowInversePair] = None
    certificate_report: Optional[CertificateReport] = None
    block_matrix: Optional[BlockMatrix] = None
    matrix: Optional[WeightedBiAdjacency] = None
    rank: Optional[RankCertificate] = None
    residuals: Tuple[DependencyResidual, ...] = ()
    cross_check: Optional[CrossFieldReport] = None
    upper: Optional[UpperBoundCertificate] = None
    forcing: Optional[ForcingReport] = None

    @property
    def mode(self) -> str:
        return "prism" if self.prism else f"circular k={self.k}"

    @property
    def expected_corank(self) -> int:
        """|V(G)| for G □ C_2k, |X| for G □ K2."""
        if self.prism:
            return len(self.graph.x_vertices)
        return self.graph.n_vertices


# ─────────────────────────────────────────────────────────
# Stage machinery
# ─────────────────────────────────────────────────────────
class Stage:
    """
    Base class for pipeline stages.
    Each subclass implements run(), which reads and extends the context.
    """

    name = "stage"

    def run(self, context) -> Optional[str]:
        raise NotImplementedError


@dataclass
class StageRecord:
    name: str
    status: str
    seconds: float
    message: str = ""
    error: Optional[BaseException] = None

    def to_dict(self) -> dict:
        result = {"stage": self.name, "status": self.status, "message": self.message}
        if self.error is not None:
            result["error_type"] = type(self.error).__name__
        return result


class StageRunner:
    """Runs stages in order, recording each outcome, and halts at the first non-passing one."""

    def __init__(self):
        self.history: List[StageRecord] = []

    def run(self, stages: List[Stage], context) -> bool:
        for stage in stages:
            record = self._execute(stage, context)
            self.history.append(record)
            if record.status != PASSED:
                logger.error(f"Pipeline halted at stage '{stage.name}': {record.message}")
                return False
        return True

    @staticmethod
    def _execute(stage: Stage, context) -> StageRecord:
        logger.info(f"Stage '{stage.name}' started")
        start = time.perf_counter()
        try:
            message = stage.run(context)
        except ForcingToolError as exc:
            elapsed = time.perf_counter() - start
            return StageRecord(stage.name, ERROR, elapsed, str(exc), exc)
        elapsed = time.perf_counter() - start
        status = PASSED if message is None else FAILED
        logger.info(f"Stage '{stage.name}' {status} in {humanfriendly.format_timespan(elapsed)}")
        return StageRecord(stage.name, status, elapsed, message or "")

    @property
    def passed(self) -> bool:
        return bool(self.history) and all(record.status == PASSED for record in self.history)

    @property
    def failed_stage(self) -> Optional[StageRecord]:
        return next((record for record in self.history if record.status != PASSED), None)

    def timings(self) -> dict:
        return {record.name: round(record.seconds, 6) for record in self.history}


# ─────────────────────────────────────────────────────────
# Certify stages
# ─────────────────────────────────────────────────────────
class CertificateStage(Stage):
    name = "certificate"

    def run(self, context: CertifyContext) -> Optional[str]:
        if context.certificate_path:
            candidate = read_certificate(context.certificate_path)
            if context.expression:
                context.graph = parse_family_expression(context.expression)
                if candidate.host != context.graph:
                    raise PreconditionError(
                        f"Certificate host {candidate.host!r} is not the graph {context.graph!r}"
                    )
            else:
                context.graph = candidate.host
        else:
            context.graph = parse_family_expression(context.expression)
            registry = get_certificate_registry()
            if context.prism:
                candidate = registry.build_pair(context.expression, context.field)
            else:
                candidate = registry.build_involutory(context.expression, context.field)
            if candidate.host != context.graph:
                raise VerificationError(f"Registry built a certificate for {candidate.host!r}, not {context.graph!r}")

        context.certificate_report = verify_certificate(candidate)
        if not context.certificate_report.passed:
            failure = context.certificate_report.first_failure
            return f"check '{failure.check}' failed: {failure.message}"
        if context.prism and isinstance(candidate, InvolutoryCertificate):
            candidate = pair_from_involutory(candidate)
        if not context.prism and isinstance(candidate, RowInversePair):
            if candidate.m != candidate.n:
                raise PreconditionError("An unbalanced row-inverse pair cannot seed a circular product; use --prism")
            candidate = involutory_from_pair(candidate)
        context.certificate = candidate
        logger.info(f"Certificate for {context.graph!r} over {candidate.field.descriptor}: {candidate.provenance}")
        return None


class BlockMatrixStage(Stage):
    name = "block_matrix"

    def run(self, context: CertifyContext) -> Optional[str]:
        if context.prism:
            context.block_matrix = prism_block_matrix(context.certificate)
        else:
            context.block_matrix = circular_block_matrix(context.certificate, context.k)
        return None


class SupportAuditStage(Stage):
    name = "support_audit"

    def run(self, context: CertifyContext) -> Optional[str]:
        context.matrix = instantiate(context.block_matrix, context.certificate)
        return None


class RankStage(Stage):
    name = "exact_rank"

    def run(self, context: CertifyContext) -> Optional[str]:
        matrix = context.matrix
        label = f"R[{context.graph.name} {context.mode}]"
        context.rank = exact_rank(matrix.entries, matrix.field, label)
        if matrix.field.descriptor == "Q" and context.cross_check_primes:
            context.cross_check = cross_field_rank_check(matrix.entries, context.cross_check_primes)
        expected = context.expected_corank
        if context.rank.corank != expected:
            return f"corank {context.rank.corank} differs from the expected {expected}"
        return None


class DependencyStage(Stage):
    name = "dependency"

    def run(self, context: CertifyContext) -> Optional[str]:
        top, bottom = verify_case_dependency(context.block_matrix, context.matrix, context.certificate, context.k)
        context.residuals = (top, bottom)
        ok = top.is_zero and bottom.is_zero
        assert_rank_bound(ok, context.rank.rank, context.k, context.graph.n_vertices)
        for residual in context.residuals:
            if not residual.is_zero:
                block, row, col, value = residual.first_nonzero
                return f"{residual.side} identity of {residual.case} leaves {value} in block {block} at ({row}, {col})"
        return None


class UpperMatchingStage(Stage):
    name = "upper_matching"

    def run(self, context: CertifyContext) -> Optional[str]:
        context.upper = canonical_upper_matching(context.block_matrix.host)
        if not context.upper.verified:
            return f"canonical matching of size {len(context.upper.matching)} is not uniquely extendable"
        return None


class VerdictStage(Stage):
    name = "verdict"

    def run(self, context: CertifyContext) -> Optional[str]:
        product = context.block_matrix.host
        report = ForcingReport(
            graph=product.name,
            n_vertices=product.n_vertices,
            lower_bound=context.rank.corank,
            lower_kind="rank",
            upper_bound=context.upper.bound,
            upper_certificate=context.upper.matching,
        )
        report.close_if_bounds_meet()
        context.forcing = report
        logger.info(f"{product.name}: {report.lower_bound} <= f <= {report.upper_bound} ({report.verdict})")
        return None


def certify_stages(context: CertifyContext) -> List[Stage]:
    stages = [CertificateStage(), BlockMatrixStage(), SupportAuditStage(), RankStage()]
    if not context.prism:
        stages.append(DependencyStage())
    stages += [UpperMatchingStage(), VerdictStage()]
    return stages


def run_certify(context: CertifyContext) -> StageRunner:
    """Run the certify pipeline on ``context``; the runner holds the history."""
    if not context.prism and context.k is None:
        raise PreconditionError("certify needs --k <int> or --prism")
    runner = StageRunner()
    runner.run(certify_stages(context), context)
    return runner


# ─────────────────────────────────────────────────────────
# Oracle
# ─────────────────────────────────────────────────────────
@dataclass
class OracleContext:
    expression: str
    cap: Optional[int] = None
    jobs: int = 1
    known_lower: Optional[int] = None
    graph: Optional[BipartiteGraph] = None
    forcing: Optional[ForcingReport] = None
    notes: List[str] = dataclass_field(default_factory=list)


class OracleStage(Stage):
    name = "oracle"

    def run(self, context: OracleContext) -> Optional[str]:
        context.graph = parse_family_expression(context.expression)
        context.forcing = minimum_forcing_number(
            context.graph, known_lower=context.known_lower, cap=context.cap, jobs=context.jobs
        )
        return None


def run_oracle(context: OracleContext) -> StageRunner:
    runner = StageRunner()
    runner.run([OracleStage()], context)
    return runner
