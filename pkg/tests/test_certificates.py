"""
Tests for certificate constructors, conversions, verification and the JSON
certificate document.
"""

import json
import os
from fractions import Fraction

import numpy as np
import pytest

import config
from models.bipartite_graph import format_label
from models.certificates import InvolutoryCertificate, RowInversePair
from modules.certificates import (
    certificate_from_dict,
    certificate_to_dict,
    complete_bipartite_involutory,
    delete_rows,
    fourier_pair,
    gprime_certificate,
    hypercube_by_lifting,
    hypercube_involutory,
    involutory_from_pair,
    pair_from_involutory,
    prism_lift,
    random_certificate_search,
    read_certificate,
    relabel_certificate,
    s14_certificate,
    star_pair,
    union_pair,
    verify_certificate,
    weighted,
    write_certificate,
)
from modules.errors import ExpressionParseError, FieldMismatchError, PreconditionError, SupportMismatchError
from modules.fields import get_field
from modules.graph_families import cartesian_product, complete_bipartite, cycle, hypercube, k2, path

Q = get_field("Q")


def is_identity(matrix, field) -> bool:
    """True iff ``matrix`` is the identity over ``field``."""
    return all(
        field.is_zero(value - (field.one if i == j else field.zero))
        for (i, j), value in np.ndenumerate(matrix)
    )


# ─────────────────────────────────────────────────────────
# Balanced constructions
# ─────────────────────────────────────────────────────────
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_complete_bipartite_certificates_verify(n):
    cert = complete_bipartite_involutory(n, Q)
    assert verify_certificate(cert).passed
    assert cert.host == complete_bipartite(n, n)


def test_householder_is_self_inverse():
    cert = complete_bipartite_involutory(3, Q)
    assert cert.B.entries[0, 0] == Fraction(1, 3)
    assert cert.B.entries[0, 1] == Fraction(-2, 3)
    assert (cert.binv == cert.B.entries).all()


def test_hypercube_recursion_needs_a_root_of_d():
    with pytest.raises(PreconditionError):
        hypercube_involutory(2, Q)
    assert verify_certificate(hypercube_involutory(2, get_field("Qsqrt:2"))).passed
    assert verify_certificate(hypercube_involutory(2, get_field("GFp:7"))).passed
    assert verify_certificate(hypercube_involutory(4, Q)).passed


def test_hypercube_by_lifting_stays_rational():
    cert = hypercube_by_lifting(3, Q)
    assert cert.host == hypercube(3)
    assert cert.field.descriptor == "Q"
    assert verify_certificate(cert).passed


def test_prism_lift_builds_the_prism_certificate():
    base = complete_bipartite_involutory(2, Q)
    lifted = prism_lift(base)
    assert lifted.host == cartesian_product(base.host, k2())
    assert verify_certificate(lifted).passed
    with pytest.raises(PreconditionError):
        prism_lift(base, c=0)


def test_s14_matrix_is_orthogonal():
    cert = s14_certificate()
    B = cert.B.entries
    assert is_identity(B.dot(B.T), Q)
    assert (cert.binv == B.T).all()


def test_gprime_standardized_rows_are_orthonormal():
    cert = gprime_certificate()
    field = cert.field
    assert field.descriptor == "Qsqrt:2"
    B = cert.B.entries
    assert is_identity(B.dot(B.T), field)
    assert B[6, 6] == Fraction(1, 9)


def test_random_search_is_deterministic_for_a_seed():
    first = random_certificate_search(cycle(4), 101, 50, seed=3)
    second = random_certificate_search(cycle(4), 101, 50, seed=3)
    assert first is not None and second is not None
    assert first.provenance == second.provenance
    assert (first.B.entries == second.B.entries).all()
    with pytest.raises(PreconditionError):
        random_certificate_search(complete_bipartite(1, 2), 101, 5, seed=1)


def test_random_search_gives_up_on_graphs_without_a_certificate():
    # A path has a bidiagonal bi-adjacency matrix whose inverse fills a whole triangle
    assert random_certificate_search(path(6), 101, 20, seed=1) is None


# ─────────────────────────────────────────────────────────
# Row-inverse pairs
# ─────────────────────────────────────────────────────────
def test_fourier_pair_over_gf7():
    pair = fourier_pair(3, 7)
    field = pair.field
    assert is_identity(pair.B.entries.dot(pair.C.entries.T), field)
    with pytest.raises(PreconditionError):
        fourier_pair(3, 11)


def test_star_pair_rows():
    pair = star_pair(3, Q)
    assert list(pair.C.entries[0]) == [Fraction(1, 3)] * 3
    with pytest.raises(PreconditionError):
        star_pair(7, get_field("GFp:7"))


def test_delete_rows_keeps_the_row_inverse_identity():
    pair = delete_rows(fourier_pair(4, 5), ["x2", "x3"])
    assert (pair.m, pair.n) == (2, 4)
    assert pair.host.x_vertices == ("x0", "x1")
    assert verify_certificate(pair).passed
    with pytest.raises(PreconditionError):
        delete_rows(pair, ["x9"])


def star_parts(field, sizes=(2, 3), shared_centre=True):
    """Stars with their leaves (and optionally centres) renamed apart."""
    parts = []
    for index, n in enumerate(sizes, start=1):
        pair = star_pair(n, field)
        vertices = pair.host.y_vertices if shared_centre else pair.host.vertices
        mapping = {v: f"{format_label(v)}_{index}" for v in vertices}
        parts.append(relabel_certificate(pair, mapping))
    return parts


@pytest.mark.parametrize("descriptor", ["Qsqrt:2", "GFp:7"])
def test_union_scales_shared_rows_by_a_root_of_one_half(descriptor):
    field = get_field(descriptor)
    union = union_pair(star_parts(field))
    assert tuple(union.B.rows) == ("x0",)
    assert len(union.B.cols) == 5
    s = union.B.entries[0, 0]
    assert field.is_zero(field(2) * s * s - field.one)
    assert verify_certificate(union).passed


def test_union_without_shared_rows_needs_no_scale():
    union = union_pair(star_parts(Q, shared_centre=False))
    assert tuple(union.B.rows) == ("x0_1", "x0_2")
    assert verify_certificate(union).passed


def test_union_rejects_mixed_fields():
    first, _ = star_parts(Q)
    _, second = star_parts(get_field("GFp:7"))
    with pytest.raises(FieldMismatchError):
        union_pair([first, second])


@pytest.mark.parametrize("descriptor", ["Q", "GFp:5"])
def test_union_needs_a_root_of_one_half(descriptor):
    with pytest.raises(PreconditionError):
        union_pair(star_parts(get_field(descriptor)))


def test_union_rejects_a_wrong_scale():
    with pytest.raises(PreconditionError):
        union_pair(star_parts(get_field("GFp:7")), scale=1)
    with pytest.raises(PreconditionError):
        union_pair([])


def test_conversions_between_kinds():
    cert = complete_bipartite_involutory(2, Q)
    pair = pair_from_involutory(cert)
    assert isinstance(pair, RowInversePair)
    back = involutory_from_pair(pair)
    assert isinstance(back, InvolutoryCertificate)
    assert (back.binv == cert.binv).all()
    with pytest.raises(PreconditionError):
        involutory_from_pair(star_pair(2, Q))


# ─────────────────────────────────────────────────────────
# Verification
# ─────────────────────────────────────────────────────────
def test_support_mismatch_is_raised_on_construction():
    host = complete_bipartite(2, 2)
    with pytest.raises(SupportMismatchError):
        weighted(host, host.x_vertices, host.y_vertices, [[1, 0], [1, 1]], Q)


def test_verification_reports_the_first_failing_entry():
    host = complete_bipartite(2, 2)
    B = weighted(host, host.x_vertices, host.y_vertices, [[1, 1], [1, -1]], Q)
    broken = InvolutoryCertificate(B, Q.matrix([[1, 1], [1, -1]]), "no scaling")
    report = verify_certificate(broken)
    assert not report.passed
    assert report.first_failure.check == "B Binv = I"
    assert report.first_failure.value == "2"


def test_bare_matrix_verification_checks_the_inverse_support():
    host = complete_bipartite(2, 2)
    B = weighted(host, host.x_vertices, host.y_vertices, [[1, 1], [1, 1]], Q)
    report = verify_certificate(B)
    assert not report.passed
    assert report.first_failure.check == "B invertible"


# ─────────────────────────────────────────────────────────
# Certificate documents
# ─────────────────────────────────────────────────────────
def test_certificate_file_keeps_entries(tmp_path):
    cert = prism_lift(complete_bipartite_involutory(2, Q))
    file_path = str(tmp_path / "prism.json")
    write_certificate(cert, file_path)
    loaded = read_certificate(file_path)
    assert loaded.host == cert.host
    assert (loaded.B.entries == cert.B.entries).all()
    assert verify_certificate(loaded).passed
    with open(file_path, encoding="utf-8") as handle:
        assert json.load(handle)["kind"] == "involutory"


def test_pair_document_over_quadratic_field():
    pair = star_pair(2, get_field("Qsqrt:2"))
    document = certificate_to_dict(pair)
    assert document["kind"] == "row_inverse_pair"
    assert document["C"] == [["1/2+0*sqrt(2)", "1/2+0*sqrt(2)"]]
    assert verify_certificate(certificate_from_dict(document)).passed


def test_malformed_documents_are_parse_errors():
    document = certificate_to_dict(complete_bipartite_involutory(2, Q))
    with pytest.raises(ExpressionParseError):
        certificate_from_dict({**document, "schema_version": 99})
    with pytest.raises(ExpressionParseError):
        certificate_from_dict({key: value for key, value in document.items() if key != "B"})
    with pytest.raises(ExpressionParseError):
        certificate_from_dict({**document, "kind": "mystery"})


def test_corrupted_fixture_fails_the_identity_check():
    cert = read_certificate(os.path.join(config.FIXTURES_FOLDER, "corrupted_k22.json"))
    report = verify_certificate(cert)
    assert report.checks[0].passed and report.checks[1].passed
    assert report.first_failure.check == "B Binv = I"
