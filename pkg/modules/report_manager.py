"""
Report documents.

A report is one JSON document per run with sorted keys. Everything except the
``timings`` section is reproducible by re-running ``command``.
"""

import json
import logging
import os
from typing import List, Optional

import config
from models.bipartite_graph import format_label
from modules.pipeline import CertifyContext, OracleContext, StageRunner

logger = logging.getLogger(__name__)


def _document(kind: str, command: List[str], runner: StageRunner) -> dict:
    failed = runner.failed_stage
    return {
        "schema_version": config.REPORT_SCHEMA_VERSION,
        "tool_version": config.VERSION,
        "kind": kind,
        "command": list(command),
        "stages": [record.to_dict() for record in runner.history],
        "halted_at": failed.name if failed else None,
        "timings": runner.timings(),
    }


def certify_report(context: CertifyContext, runner: StageRunner, command: List[str]) -> dict:
    document = _document("certify", command, runner)
    cert = context.certificate
    document.update({
        "graph": context.expression or (context.graph.name if context.graph else None),
        "mode": "prism" if context.prism else "circular",
        "k": context.k,
        "field": cert.field.descriptor if cert is not None else context.field,
        "certificate": None if cert is None else {
            "provenance": cert.provenance,
            "kind": type(cert).__name__,
            "rows": [format_label(v) for v in cert.B.rows],
            "cols": [format_label(v) for v in cert.B.cols],
        },
        "certificate_checks": None if context.certificate_report is None else context.certificate_report.to_dict(),
        "block_matrix": None if context.block_matrix is None else {
            "case": context.block_matrix.case,
            "grid": context.block_matrix.as_text(),
        },
        "rank": None if context.rank is None else context.rank.to_dict(),
        "cross_field": None if context.cross_check is None else context.cross_check.to_dict(),
        "dependencies": [residual.to_dict() for residual in context.residuals],
        "upper_matching": None if context.upper is None else {
            "size": len(context.upper.matching),
            "verdict": context.upper.verdict.value,
        },
        "forcing": None if context.forcing is None else context.forcing.to_dict(),
        "verdict": context.forcing.verdict if context.forcing is not None else "FAILED",
    })
    return document


def oracle_report(context: OracleContext, runner: StageRunner, command: List[str]) -> dict:
    document = _document("oracle", command, runner)
    document.update({
        "graph": context.expression,
        "cap": context.cap,
        "forcing": None if context.forcing is None else context.forcing.to_dict(),
        "verdict": context.forcing.verdict if context.forcing is not None else "FAILED",
    })
    return document


def suite_report(rows: List[dict], command: List[str], elapsed: float) -> dict:
    """Suite document; per-case ``seconds`` move from the rows into ``timings``."""
    timings = {f"{row['group']}/{row['case']}": round(row.get("seconds", 0.0), 6) for row in rows}
    timings["total"] = round(elapsed, 6)
    return {
        "schema_version": config.REPORT_SCHEMA_VERSION,
        "tool_version": config.VERSION,
        "kind": "verify-suite",
        "command": list(command),
        "cases": [strip_timings(row, key="seconds") for row in rows],
        "passed": all(row["passed"] for row in rows),
        "timings": timings,
    }


def strip_timings(document: dict, key: str = "timings") -> dict:
    """The reproducible part of a report, or of a suite row with ``key="seconds"``."""
    return {name: value for name, value in document.items() if name != key}


def write_report(document: dict, file_path: Optional[str]) -> None:
    if not file_path:
        return
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file_path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=4, sort_keys=True)
    logger.info(f"Wrote {document.get('kind', 'report')} report to {file_path}")
