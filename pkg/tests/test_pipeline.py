"""
Tests for the certification pipeline, the oracle pipeline and the report documents.
"""

import json
import os

import pytest

import config
from modules.errors import PreconditionError, VerificationError
from modules.pipeline import (
    ERROR,
    FAILED,
    PASSED,
    CertifyContext,
    OracleContext,
    Stage,
    StageRunner,
    run_certify,
    run_oracle,
)
from modules.forcing import minimum_forcing_number
from modules.graph_families import parse_family_expression
from modules.report_manager import certify_report, oracle_report, strip_timings, suite_report, write_report

FIXTURE = os.path.join(config.FIXTURES_FOLDER, "corrupted_k22.json")


class PassingStage(Stage):
    name = "passing"

    def run(self, context):
        context.append(self.name)
        return None


class FailingStage(Stage):
    name = "failing"

    def run(self, context):
        context.append(self.name)
        return "check did not hold"


class RaisingStage(Stage):
    name = "raising"

    def run(self, context):
        raise VerificationError("broken")


# ─────────────────────────────────────────────────────────
# Stage runner
# ─────────────────────────────────────────────────────────
def test_runner_halts_at_the_first_failing_stage():
    seen = []
    runner = StageRunner()
    assert not runner.run([PassingStage(), FailingStage(), PassingStage()], seen)
    assert seen == ["passing", "failing"]
    assert [record.status for record in runner.history] == [PASSED, FAILED]
    assert runner.failed_stage.message == "check did not hold"
    assert not runner.passed


def test_runner_records_raised_errors():
    runner = StageRunner()
    assert not runner.run([RaisingStage(), PassingStage()], [])
    record = runner.failed_stage
    assert record.status == ERROR
    assert isinstance(record.error, VerificationError)
    assert record.to_dict()["error_type"] == "VerificationError"
    assert set(runner.timings()) == {"raising"}


# ─────────────────────────────────────────────────────────
# Certify
# ─────────────────────────────────────────────────────────
def test_certify_circular_complete_bipartite():
    context = CertifyContext("Kmn:2,2", k=2, cross_check_primes=(101, 103))
    runner = run_certify(context)
    assert runner.passed
    assert [record.name for record in runner.history] == [
        "certificate", "block_matrix", "support_audit", "exact_rank", "dependency", "upper_matching", "verdict",
    ]
    assert context.rank.corank == 4
    assert context.cross_check.consistent
    assert context.forcing.exact == 4
    assert context.forcing.verdict == "EXACT"


def test_certify_prism_of_s14():
    context = CertifyContext("s14", prism=True)
    runner = run_certify(context)
    assert runner.passed
    assert "dependency" not in [record.name for record in runner.history]
    assert context.forcing.lower_bound == context.forcing.upper_bound == 7


@pytest.mark.parametrize("expression, exact", [
    ("prod(Kmn:2,2;K2)", 4),
    ("prod(prod(Kmn:2,2;K2);K2)", 8),
])
def test_certify_prism_of_a_product(expression, exact):
    context = CertifyContext(expression, prism=True)
    runner = run_certify(context)
    assert runner.passed, runner.failed_stage
    assert context.rank.corank == exact
    assert context.forcing.exact == exact
    assert context.forcing.verdict == "EXACT"


def test_prism_of_a_product_agrees_with_the_oracle():
    context = CertifyContext("prod(Kmn:2,2;K2)", prism=True)
    assert run_certify(context).passed
    oracle = minimum_forcing_number(parse_family_expression("prod(prod(Kmn:2,2;K2);K2)"))
    assert oracle.exact == context.forcing.exact == 4


def test_certify_gprime_over_its_quadratic_field():
    context = CertifyContext("gprime", k=2)
    assert run_certify(context).passed
    assert context.certificate.field.descriptor == "Qsqrt:2"
    assert context.forcing.exact == 14


def test_corrupted_certificate_halts_at_the_certificate_stage():
    context = CertifyContext("Kmn:2,2", k=2, certificate_path=FIXTURE)
    runner = run_certify(context)
    assert runner.failed_stage.name == "certificate"
    assert runner.failed_stage.status == FAILED
    assert "B Binv = I" in runner.failed_stage.message
    assert context.forcing is None


def test_certificate_for_another_graph_is_a_precondition_error():
    runner = run_certify(CertifyContext("Kmn:3,3", k=2, certificate_path=FIXTURE))
    assert isinstance(runner.failed_stage.error, PreconditionError)


def test_certify_needs_a_target():
    with pytest.raises(PreconditionError):
        run_certify(CertifyContext("Kmn:2,2"))


def test_malformed_expression_is_an_error_stage():
    runner = run_certify(CertifyContext("Kmn:2", k=2))
    assert runner.failed_stage.name == "certificate"
    assert runner.failed_stage.status == ERROR
    assert runner.failed_stage.to_dict()["error_type"] == "ExpressionParseError"


# ─────────────────────────────────────────────────────────
# Oracle
# ─────────────────────────────────────────────────────────
def test_oracle_on_the_cube():
    context = OracleContext("Q:3")
    runner = run_oracle(context)
    assert runner.passed
    assert context.forcing.exact == 2
    document = oracle_report(context, runner, ["main.py", "oracle", "Q:3"])
    assert document["verdict"] == "EXACT"
    assert document["forcing"]["closure"] == "exhaustive"


def test_oracle_without_perfect_matching_fails():
    context = OracleContext("star:3")
    runner = run_oracle(context)
    assert isinstance(runner.failed_stage.error, PreconditionError)
    assert oracle_report(context, runner, [])["verdict"] == "FAILED"


# ─────────────────────────────────────────────────────────
# Reports
# ─────────────────────────────────────────────────────────
def certify_document(command):
    context = CertifyContext("Kmn:2,2", k=3)
    runner = run_certify(context)
    return certify_report(context, runner, command)


def test_certify_report_contents():
    document = certify_document(["main.py", "certify", "Kmn:2,2", "--k", "3"])
    assert document["schema_version"] == config.REPORT_SCHEMA_VERSION
    assert document["kind"] == "certify"
    assert document["mode"] == "circular" and document["k"] == 3
    assert document["block_matrix"]["case"] == "case2"
    assert document["rank"]["corank"] == 4
    assert len(document["dependencies"]) == 2
    assert document["halted_at"] is None
    assert document["verdict"] == "EXACT"


def test_reports_are_reproducible_apart_from_timings():
    command = ["main.py", "certify", "Kmn:2,2", "--k", "3"]
    first, second = certify_document(command), certify_document(command)
    assert "timings" in first
    assert strip_timings(first) == strip_timings(second)


def test_suite_report_moves_case_seconds_into_timings():
    rows = [
        {"group": "oracle", "case": "hexagon", "passed": True, "seconds": 0.25},
        {"group": "s14", "case": "orthogonal", "passed": False, "seconds": 0.5},
    ]
    document = suite_report(rows, ["main.py", "verify-suite"], elapsed=1.0)
    assert document["cases"] == [strip_timings(row, key="seconds") for row in rows]
    assert all("seconds" not in row for row in document["cases"])
    assert document["timings"] == {"oracle/hexagon": 0.25, "s14/orthogonal": 0.5, "total": 1.0}
    assert document["passed"] is False
    assert "seconds" in rows[0]


def test_write_report(tmp_path):
    document = certify_document(["main.py"])
    file_path = tmp_path / "reports" / "certify.json"
    write_report(document, str(file_path))
    with open(file_path, encoding="utf-8") as handle:
        loaded = json.load(handle)
    assert loaded["verdict"] == "EXACT"
    write_report(document, None)
