"""
Tests for the certificate registry: default fields, constructors per family and
registration of new families.
"""

import pytest

from models.certificates import InvolutoryCertificate, RowInversePair
from modules.certificate_registry import CertificateRegistry, get_certificate_registry, split_expression
from modules.certificates import star_pair, verify_certificate
from modules.errors import ExpressionParseError, PreconditionError
from modules.graph_families import parse_family_expression


@pytest.fixture
def registry():
    return CertificateRegistry(search_prime=101, search_trials=200, seed=2024)


def test_split_expression():
    assert split_expression("Kmn:2,3") == ("Kmn", ["2", "3"])
    assert split_expression("prod(Kmn:2,2;C:4)") == ("prod", ["Kmn:2,2", "C:4"])
    assert split_expression("s14") == ("s14", [])
    with pytest.raises(ExpressionParseError):
        split_expression("prod(K2;K2")


@pytest.mark.parametrize("expression, descriptor", [
    ("Kmn:2,2", "Q"),
    ("Kmn:2,3", "GFp:7"),
    ("Kmn:1,4", "GFp:5"),
    ("star:3", "Q"),
    ("gprime", "Qsqrt:2"),
    ("prod(Kmn:2,2;K2)", "Q"),
    ("prod(Kmn:2,2;C:4)", "GFp:101"),
    ("C:6", "GFp:101"),
])
def test_default_fields(registry, expression, descriptor):
    assert registry.default_field(expression) == descriptor


@pytest.mark.parametrize("expression", [
    "Kmn:2,2", "Kmn:2,3", "Kmn:3,3", "star:4", "Q:3", "s14", "gprime",
    "prod(Kmn:2,2;K2)", "union(star:2;star:3)", "del(Kmn:3,3;x2)",
])
def test_default_certificates_verify_on_their_graph(registry, expression):
    cert = registry.build(expression)
    assert cert.host == parse_family_expression(expression)
    assert verify_certificate(cert).passed


def test_kinds_are_converted_on_request(registry):
    assert isinstance(registry.build_pair("Kmn:2,2"), RowInversePair)
    assert isinstance(registry.build_involutory("Kmn:2,2"), InvolutoryCertificate)
    with pytest.raises(PreconditionError):
        registry.build_involutory("Kmn:2,3")


def test_fourier_certificate_over_a_chosen_field(registry):
    cert = registry.build("Kmn:3,3", "GFp:7")
    assert cert.field.descriptor == "GFp:7"
    assert verify_certificate(cert).passed


def test_families_without_a_constructor_or_with_bad_parameters(registry):
    with pytest.raises(PreconditionError):
        registry.build("foo:3")
    with pytest.raises(PreconditionError):
        registry.build("Kmn:3,2")
    with pytest.raises(ExpressionParseError):
        registry.build("Kmn:a,b")
    with pytest.raises(PreconditionError):
        registry.build("gprime", "Q")


def test_random_search_needs_a_prime_field(registry):
    assert verify_certificate(registry.build("C:4")).passed
    with pytest.raises(PreconditionError):
        registry.build("C:4", "Q")


def test_register_replaces_a_family(registry):
    assert registry.is_registered("star")
    registry.register("star", lambda args, field: star_pair(1, field), "Q", "always one leaf")
    assert registry.build("star:5").host == parse_family_expression("star:1")
    assert "always one leaf" in registry.help_text()


def test_configure_keeps_unset_values(registry):
    registry.configure(search_trials=10)
    assert (registry.search_prime, registry.search_trials, registry.seed) == (101, 10, 2024)


def test_module_registry_is_a_singleton():
    assert get_certificate_registry() is get_certificate_registry()
