"""
Tests for the command line: sub-commands, report files and the exit-code contract.
"""

import json
import os

import pytest

import config
from modules.certificate_registry import get_certificate_registry
from modules.certificates import read_certificate, verify_certificate
from modules.errors import ExpressionParseError, PreconditionError, VerificationError
from modules.settings_manager import SettingsManager
from ui.cli import build_parser, execute, exit_code_for, parse_args

FIXTURE = os.path.join(config.FIXTURES_FOLDER, "corrupted_k22.json")


@pytest.fixture
def run(tmp_path):
    settings = SettingsManager(str(tmp_path / "settings.json"))

    def invoke(*argv):
        argv = list(argv)
        return execute(parse_args(argv), settings, argv)

    return invoke


def test_exit_codes_of_error_types():
    assert exit_code_for(ExpressionParseError("bad")) == config.EXIT_PARSE_ERROR
    assert exit_code_for(PreconditionError("unmet")) == config.EXIT_PRECONDITION
    assert exit_code_for(VerificationError("wrong")) == config.EXIT_VERIFICATION_FAILED
    assert exit_code_for(None) == config.EXIT_VERIFICATION_FAILED


def test_help_lists_fields_families_and_exit_codes():
    epilog = build_parser().epilog
    assert "GFp:<p>" in epilog
    assert "Kmn" in epilog
    assert "budget truncation" in epilog


# ─────────────────────────────────────────────────────────
# build
# ─────────────────────────────────────────────────────────
def test_build_writes_the_graph_file(run, tmp_path, capsys):
    graph_path = tmp_path / "product.txt"
    assert run("build", "prod(Kmn:2,2;C:6)", "--out", str(graph_path)) == config.EXIT_OK
    assert graph_path.read_text(encoding="utf-8").splitlines()[1] == "p bipartite 12 12"
    assert "|V| = 24" in capsys.readouterr().out


def test_build_writes_the_default_certificate(run, tmp_path):
    cert_path = tmp_path / "k33.json"
    assert run("build", "Kmn:3,3", "--out", str(tmp_path / "k33.txt"), "--certificate", str(cert_path)) == 0
    cert = read_certificate(str(cert_path))
    assert cert.field.descriptor == "Q"
    assert verify_certificate(cert).passed


# ─────────────────────────────────────────────────────────
# certify
# ─────────────────────────────────────────────────────────
def test_certify_success_writes_a_report(run, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    assert run("certify", "Kmn:2,2", "--k", "2", "--out", str(report_path)) == config.EXIT_OK
    assert "(EXACT)" in capsys.readouterr().out
    with open(report_path, encoding="utf-8") as handle:
        document = json.load(handle)
    assert document["verdict"] == "EXACT"
    assert document["command"] == ["main.py", "certify", "Kmn:2,2", "--k", "2", "--out", str(report_path)]


def test_certify_reads_a_built_certificate(run, tmp_path, capsys):
    cert_path = str(tmp_path / "k33.json")
    assert run("build", "Kmn:3,3", "--out", str(tmp_path / "k33.txt"), "--certificate", cert_path) == 0
    assert run("certify", "--k", "3", "--certificate", cert_path) == config.EXIT_OK
    assert "(EXACT)" in capsys.readouterr().out


def test_certify_with_a_corrupted_certificate(run, capsys):
    assert run("certify", "Kmn:2,2", "--k", "2", "--certificate", FIXTURE) == config.EXIT_VERIFICATION_FAILED
    assert "stage 'certificate'" in capsys.readouterr().out


@pytest.mark.parametrize("argv, code", [
    (("certify", "Kmn:2", "--k", "2"), config.EXIT_PARSE_ERROR),
    (("certify", "C:5", "--prism"), config.EXIT_PRECONDITION),
    (("certify", "Kmn:2,2"), config.EXIT_PRECONDITION),
    (("certify", "--k", "2"), config.EXIT_PRECONDITION),
    (("certify", "Kmn:3,2", "--prism"), config.EXIT_PRECONDITION),
])
def test_certify_failures_map_to_exit_codes(run, argv, code):
    assert run(*argv) == code


# ─────────────────────────────────────────────────────────
# oracle
# ─────────────────────────────────────────────────────────
def test_oracle_exact(run, capsys):
    assert run("oracle", "Q:3") == config.EXIT_OK
    assert "f = 2" in capsys.readouterr().out


def test_oracle_truncated_by_the_cap(run, capsys):
    assert run("oracle", "Kmn:3,3", "--cap", "1") == config.EXIT_BUDGET_TRUNCATED
    assert "TRUNCATED" in capsys.readouterr().out


def test_oracle_without_perfect_matching(run):
    assert run("oracle", "star:3") == config.EXIT_PRECONDITION


# ─────────────────────────────────────────────────────────
# verify-suite
# ─────────────────────────────────────────────────────────
def test_fault_grid_fails_with_a_reproduction_command(run, tmp_path, capsys):
    report_path = tmp_path / "suite.json"
    assert run("verify-suite", "--grid", "fault", "--out", str(report_path)) == config.EXIT_VERIFICATION_FAILED
    out = capsys.readouterr().out
    assert "reproduce: python main.py certify" in out
    with open(report_path, encoding="utf-8") as handle:
        document = json.load(handle)
    assert document["passed"] is False
    assert "seconds" not in document["cases"][0]
    assert set(document["timings"]) == {"fault/certify Kmn:2,2 k=2", "total"}


def test_unknown_grid_group_is_a_parse_error(run):
    assert run("verify-suite", "--grid", "nope") == config.EXIT_PARSE_ERROR


def test_small_grid_passes(run, capsys):
    assert run("verify-suite", "--grid", "hypercube,s14") == config.EXIT_OK
    assert "4/4 passed" in capsys.readouterr().out


# ─────────────────────────────────────────────────────────
# Options and settings
# ─────────────────────────────────────────────────────────
def test_jobs_only_on_commands_that_fan_out():
    assert parse_args(["oracle", "Q:3", "--jobs", "2"]).jobs == 2
    assert parse_args(["verify-suite", "--jobs", "2"]).jobs == 2
    for argv in (["certify", "Kmn:2,2", "--k", "2", "--jobs", "2"], ["build", "K2", "--jobs", "2"]):
        with pytest.raises(SystemExit):
            parse_args(argv)


def test_settings_file_reaches_the_commands(tmp_path, capsys):
    settings_path = tmp_path / "settings.json"
    settings_path.write_text(json.dumps({"matching_cap": 1, "cross_check_primes": [7]}), encoding="utf-8")
    settings = SettingsManager(str(settings_path))

    argv = ["oracle", "Kmn:3,3"]
    assert execute(parse_args(argv), settings, argv) == config.EXIT_BUDGET_TRUNCATED

    report_path = tmp_path / "report.json"
    argv = ["certify", "Kmn:2,2", "--k", "2", "--out", str(report_path)]
    assert execute(parse_args(argv), settings, argv) == config.EXIT_OK
    with open(report_path, encoding="utf-8") as handle:
        assert [entry["prime"] for entry in json.load(handle)["cross_field"]["primes"]] == [7]


def test_seed_flag_overrides_the_settings(run):
    registry = get_certificate_registry()
    try:
        assert run("oracle", "Q:3", "--seed", "5") == config.EXIT_OK
        assert registry.seed == 5
    finally:
        registry.configure(seed=config.DEFAULT_SETTINGS["seed"])
