"""
Tests for the verification grid: group selection, case construction, case
runners and the summary tables.
"""

import pytest

import config
from modules.verify_suite import (
    DEFAULT_GROUPS,
    GROUPS,
    SuiteCase,
    build_cases,
    group_summary,
    parse_grid,
    run_case,
    run_suite,
    summary_table,
)


def test_parse_grid():
    assert parse_grid(None) == DEFAULT_GROUPS
    assert parse_grid("default") == DEFAULT_GROUPS
    assert "fault" not in DEFAULT_GROUPS
    assert parse_grid("all") == GROUPS
    assert parse_grid("case1, oracle") == ("case1", "oracle")
    with pytest.raises(ValueError):
        parse_grid("case1,case9")


def test_case_groups_follow_the_k_values():
    cases = build_cases(("case4",))
    assert {case.params["k"] for case in cases} == {5}
    assert {case.params["expression"]: case.params["expect"] for case in cases} == {
        "Kmn:2,2": 4, "Q:2": 4, "Kmn:3,3": 6, "s14": 14,
    }


def test_suite_section_and_seed_shape_the_cases():
    suite = dict(config.DEFAULT_SETTINGS["verify_suite"], k_values=[3], property_cases=7)
    cases = build_cases(("case2", "case4", "properties"), suite, seed=11)
    assert {case.params["k"] for case in cases if case.kind == "certify"} == {3}
    assert not [case for case in cases if case.group == "case4"]
    properties = [case for case in cases if case.group == "properties"]
    assert {case.params["seed"] for case in properties} == {11}
    assert {case.params["cases"] for case in properties if case.kind == "field_axioms"} == {7}


def test_default_grid_has_no_fault_case():
    cases = build_cases(DEFAULT_GROUPS)
    assert cases and all(case.group != "fault" for case in cases)
    assert [case.group for case in cases] == sorted((case.group for case in cases), key=GROUPS.index)


def test_reproduction_commands():
    (certify,) = [c for c in build_cases(("case1",)) if c.params["expression"] == "Kmn:2,2"]
    assert certify.command == 'python main.py certify "Kmn:2,2" --k 2 --field Q'
    (fault,) = build_cases(("fault",))
    assert fault.command.endswith("--certificate " + fault.params["certificate_path"])
    oracle = build_cases(("hypercube",))[0]
    assert oracle.command == 'python main.py oracle "Q:2"'


def test_fault_case_fails_at_the_certificate_stage():
    (fault,) = build_cases(("fault",))
    row = run_case(fault)
    assert not row["passed"]
    assert "stage 'certificate'" in row["detail"]


def test_oracle_case_compares_with_the_expected_value():
    assert run_case(SuiteCase("oracle", "hexagon", "oracle", {"expression": "C:6", "expect": 1}))["passed"]
    assert not run_case(SuiteCase("oracle", "hexagon", "oracle", {"expression": "C:6", "expect": 2}))["passed"]


def test_errors_become_failed_rows():
    row = run_case(SuiteCase("oracle", "no matching", "oracle", {"expression": "star:3", "expect": 1}))
    assert not row["passed"]
    assert row["detail"].startswith("PreconditionError")


@pytest.mark.parametrize("case", [
    SuiteCase("properties", "axioms", "field_axioms", {"field": "Qsqrt:2", "cases": 50, "seed": 1}),
    SuiteCase("properties", "axioms", "field_axioms", {"field": "GFp:101", "cases": 50, "seed": 1}),
    SuiteCase("properties", "rank", "rank_invariance", {"cases": 20, "seed": 1}),
    SuiteCase("properties", "monotone", "monotonicity", {"cases": 20, "seed": 1}),
    SuiteCase("s14", "orthogonal", "orthogonal", {"name": "s14"}),
    SuiteCase("gprime", "orthogonal", "orthogonal", {"name": "gprime"}),
])
def test_property_cases_pass(case):
    row = run_case(case)
    assert row["passed"], row["detail"]


def test_summary_tables():
    cases = [
        SuiteCase("oracle", "hexagon", "oracle", {"expression": "C:6", "expect": 1}),
        SuiteCase("oracle", "wrong", "oracle", {"expression": "C:6", "expect": 3}),
        SuiteCase("s14", "orthogonal", "orthogonal", {"name": "s14"}),
    ]
    rows = run_suite(cases)
    assert [row["case"] for row in rows] == ["hexagon", "wrong", "orthogonal"]
    table = summary_table(rows)
    assert list(table["passed"]) == [True, False, True]
    groups = group_summary(rows).set_index("group")
    assert groups.loc["oracle", "cases"] == 2
    assert groups.loc["oracle", "failed"] == 1
    assert groups.loc["s14", "failed"] == 0
