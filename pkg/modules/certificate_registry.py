"""
Certificate Registry

Maps a family name of the expression language to the constructor that builds
its default certificate, together with the field it is built over when the
caller does not choose one.

Design Pattern: Singleton (module-level instance)
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

import config
from models.bipartite_graph import format_label, parse_label, split_top_level
from models.certificates import InvolutoryCertificate, RowInversePair
from modules.certificates import (
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
    relabel_certificate,
    s14_certificate,
    star_pair,
    union_pair,
)
from modules.errors import ExpressionParseError, PreconditionError
from modules.fields import Field, PrimeField, get_field, smallest_fourier_prime
from modules.graph_families import parse_family_expression

logger = logging.getLogger(__name__)

Certificate = Union[InvolutoryCertificate, RowInversePair]
Builder = Callable[[List[str], Field], Certificate]


@dataclass(frozen=True)
class FamilyEntry:
    family: str
    builder: Builder
    default_field: Callable[[List[str]], str]
    description: str


def split_expression(expression: str) -> Tuple[str, List[str]]:
    """"Kmn:2,3" -> ("Kmn", ["2", "3"]); "prod(A;B)" -> ("prod", ["A", "B"]); "s14" -> ("s14", [])."""
    text = expression.strip()
    if "(" in text:
        if not text.endswith(")"):
            raise ExpressionParseError(f"Unbalanced parentheses in '{expression}'", position=len(text))
        head, inner = text.split("(", 1)
        return head.strip(), [part.strip() for part in split_top_level(inner[:-1], ";")]
    if ":" in text:
        head, params = text.split(":", 1)
        return head.strip(), [part.strip() for part in params.split(",")]
    return text, []


def _integers(family: str, args: List[str], count: int) -> List[int]:
    try:
        values = [int(a) for a in args]
    except ValueError as exc:
        raise ExpressionParseError(f"{family} takes integer parameters, got {args!r}") from exc
    if len(values) != count:
        raise ExpressionParseError(f"{family} takes {count} parameter(s), got {len(values)}")
    return values


class CertificateRegistry:
    """
    Registry of default certificate constructors per graph family.

    Usage:
        registry = get_certificate_registry()
        cert = registry.build_involutory("Kmn:2,2")
        pair = registry.build_pair("Kmn:2,3", "GFp:7")
    """

    def __init__(self, search_prime: int = 101, search_trials: int = 200, seed: int = 2024):
        self._entries: Dict[str, FamilyEntry] = {}
        self.search_prime = search_prime
        self.search_trials = search_trials
        self.seed = seed
        self._register_defaults()

    def configure(self, search_prime=None, search_trials=None, seed=None) -> None:
        """Override the random-search settings; None keeps the current value."""
        if search_prime is not None:
            self.search_prime = search_prime
        if search_trials is not None:
            self.search_trials = search_trials
        if seed is not None:
            self.seed = seed

    # ─────────────────────────────────────────────────────────
    # Registration
    # ─────────────────────────────────────────────────────────
    def register(self, family: str, builder: Builder, default_field, description: str) -> None:
        """Register (or replace) the constructor of ``family``.

        ``default_field`` is a descriptor or a callable from the parameter list to one.
        """
        chooser = default_field if callable(default_field) else (lambda args, d=default_field: d)
        if family in self._entries:
            logger.debug(f"Replacing certificate constructor for '{family}'")
        self._entries[family] = FamilyEntry(family, builder, chooser, description)

    def is_registered(self, family: str) -> bool:
        return family in self._entries

    def families(self) -> List[FamilyEntry]:
        return list(self._entries.values())

    def help_text(self) -> str:
        lines = ["default certificate field per family:"]
        for entry in self._entries.values():
            lines.append(f"  {entry.family:<8} {entry.description}")
        return "\n".join(lines)

    # ─────────────────────────────────────────────────────────
    # Building
    # ─────────────────────────────────────────────────────────
    def _entry(self, expression: str) -> Tuple[FamilyEntry, List[str]]:
        family, args = split_expression(expression)
        if family not in self._entries:
            raise PreconditionError(f"No certificate constructor is registered for '{family}'")
        return self._entries[family], args

    def default_field(self, expression: str) -> str:
        entry, args = self._entry(expression)
        return entry.default_field(args)

    def build(self, expression: str, field: Union[None, str, Field] = None) -> Certificate:
        """The family's own certificate (involutory or row-inverse pair) of ``expression``."""
        entry, args = self._entry(expression)
        if field is None:
            field = entry.default_field(args)
        if isinstance(field, str):
            field = get_field(field)
        logger.debug(f"Building certificate for '{expression}' over {field.descriptor}")
        return entry.builder(args, field)

    def build_involutory(self, expression: str, field=None) -> InvolutoryCertificate:
        result = self.build(expression, field)
        if isinstance(result, RowInversePair):
            return involutory_from_pair(result)
        return result

    def build_pair(self, expression: str, field=None) -> RowInversePair:
        result = self.build(expression, field)
        if isinstance(result, InvolutoryCertificate):
            return pair_from_involutory(result)
        return result

    # ─────────────────────────────────────────────────────────
    # Default constructors
    # ─────────────────────────────────────────────────────────
    def _search(self, expression: str, field: Field) -> InvolutoryCertificate:
        if not isinstance(field, PrimeField):
            raise PreconditionError(f"'{expression}' has no explicit certificate; random search needs GFp:<p>")
        graph = parse_family_expression(expression)
        cert = random_certificate_search(graph, field.p, self.search_trials, self.seed)
        if cert is None:
            raise PreconditionError(
                f"No certificate for {graph!r} found in {self.search_trials} trials over {field.descriptor}"
            )
        return cert

    def _searched_family(self, family: str) -> Builder:
        def builder(args: List[str], field: Field) -> Certificate:
            expression = family
            if args:
                expression += ("(" + ";".join(args) + ")") if family == "bd" else (":" + ",".join(args))
            return self._search(expression, field)
        return builder

    def _complete_bipartite(self, args: List[str], field: Field) -> Certificate:
        m, n = _integers("Kmn", args, 2)
        if m > n:
            raise PreconditionError(f"Kmn:{m},{n} has more X- than Y-vertices; write Kmn:{n},{m}")
        if isinstance(field, PrimeField) and n >= 2 and (field.p - 1) % n == 0:
            pair = fourier_pair(n, field.p)
            if m == n:
                return involutory_from_pair(pair)
        else:
            cert = complete_bipartite_involutory(n, field)
            if m == n:
                return cert
            pair = pair_from_involutory(cert)
        return delete_rows(pair, [f"x{i}" for i in range(m, n)])

    @staticmethod
    def _complete_bipartite_field(args: List[str]) -> str:
        m, n = _integers("Kmn", args, 2)
        return "Q" if m == n else f"GFp:{smallest_fourier_prime(n)}"

    @staticmethod
    def _hypercube(args: List[str], field: Field) -> InvolutoryCertificate:
        (d,) = _integers("Q", args, 1)
        if field.descriptor == "Q":
            return hypercube_by_lifting(d, field)
        try:
            return hypercube_involutory(d, field)
        except PreconditionError as exc:
            logger.info(f"Recursive Q_{d} certificate unavailable ({exc}); lifting instead")
            return hypercube_by_lifting(d, field)

    @staticmethod
    def _gprime(args: List[str], field: Field) -> InvolutoryCertificate:
        if field.descriptor != "Qsqrt:2":
            raise PreconditionError(f"gprime has a certificate over Qsqrt:2 only, not {field.descriptor}")
        return gprime_certificate()

    def _product(self, args: List[str], field: Field) -> Certificate:
        if len(args) != 2:
            raise ExpressionParseError("prod takes exactly two graphs")
        if args[1] == "K2":
            return prism_lift(self.build_involutory(args[0], field))
        return self._search(f"prod({args[0]};{args[1]})", field)

    def _product_field(self, args: List[str]) -> str:
        if len(args) == 2 and args[1] == "K2":
            return self.default_field(args[0])
        return f"GFp:{self.search_prime}"

    def _union(self, args: List[str], field: Field) -> RowInversePair:
        parts = []
        for index, part in enumerate(args, start=1):
            pair = self.build_pair(part, field)
            mapping = {y: f"{format_label(y)}_{index}" for y in pair.host.y_vertices}
            parts.append(relabel_certificate(pair, mapping, name=pair.host.name))
        return union_pair(parts)

    def _delete(self, args: List[str], field: Field) -> RowInversePair:
        if len(args) != 2:
            raise ExpressionParseError("del takes a graph and a label list")
        labels = [parse_label(part) for part in split_top_level(args[1], ",") if part.strip()]
        return delete_rows(self.build_pair(args[0], field), labels)

    def _register_defaults(self) -> None:
        search_field = lambda args: f"GFp:{self.search_prime}"  # noqa: E731
        self.register("Kmn", self._complete_bipartite, self._complete_bipartite_field,
                      "Q (Hadamard/Householder) when m = n; Fourier over the smallest GF(p), p = 1 mod n, when m < n")
        self.register("star", lambda args, field: star_pair(*_integers("star", args, 1), field), "Q",
                      "Q, all-ones row")
        self.register("Q", self._hypercube, "Q", "Q, prism lifts of Q_1")
        self.register("s14", lambda args, field: s14_certificate(field), "Q", "Q, signed orthogonal matrix")
        self.register("gprime", self._gprime, "Qsqrt:2", "Qsqrt:2, row-orthogonal weights / 18")
        self.register("prod", self._product, self._product_field,
                      "prod(E;K2): field of E, prism lift")
        self.register("union", self._union, "Qsqrt:2", "Qsqrt:2, row-inverse pairs glued with 2 s^2 = 1")
        self.register("del", self._delete, lambda args: self.default_field(args[0]) if args else "Q",
                      "field of E, rows of the deleted X-vertices dropped")
        for family in ("K2", "P", "C", "BCP", "FQ", "blowup", "bd"):
            self.register(family, self._searched_family(family), search_field,
                          "GF(p) with the configured search prime, random search")


# Module-level singleton instance
_registry_instance: Optional[CertificateRegistry] = None


def get_certificate_registry() -> CertificateRegistry:
    """
    Get the global certificate registry instance.

    Returns:
        CertificateRegistry: The singleton registry instance
    """
    global _registry_instance
    if _registry_instance is None:
        search = config.DEFAULT_SETTINGS["random_search"]
        _registry_instance = CertificateRegistry(search["prime"], search["trials"], config.DEFAULT_SETTINGS["seed"])
    return _registry_instance
