"""
Result records of the combinatorial side: matching enumerations, per-matching
forcing numbers and the lower/upper/exact summary of a graph.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from models.bipartite_graph import Matching, format_label
from modules.errors import VerificationError


class Uniqueness(Enum):
    UNIQUE = "unique"
    MULTIPLE = "multiple"
    NONE = "none"


@dataclass(frozen=True)
class MatchingEnumeration:
    matchings: Tuple[Matching, ...]
    truncated: bool = False

    def __len__(self):
        return len(self.matchings)


@dataclass(frozen=True)
class ForcingResult:
    """Forcing number of one matching.

    ``value`` is None when the search stopped at ``limit``; the true value is
    then larger than the limit and ``exact`` is False.
    """

    value: Optional[int]
    exact: bool
    forcing_set: Tuple[tuple, ...] = ()
    lower_bound: int = 0
    limit: Optional[int] = None

    def describe(self) -> str:
        if self.value is not None:
            return str(self.value)
        return f">{self.limit}"


@dataclass(frozen=True)
class UpperBoundCertificate:
    """A matching of a product graph together with its uniqueness verdict.

    ``extension`` is the perfect matching it extends to when the verdict is UNIQUE.
    """

    matching: Matching
    verdict: Uniqueness
    extension: Optional[Matching] = None

    @property
    def verified(self) -> bool:
        return self.verdict is Uniqueness.UNIQUE

    @property
    def bound(self) -> Optional[int]:
        return len(self.matching) if self.verified else None


@dataclass
class ForcingReport:
    """Lower bound, upper bound and (when closed) the exact minimum forcing number."""

    graph: str
    n_vertices: int
    lower_bound: Optional[int] = None
    lower_kind: str = "trivial"
    upper_bound: Optional[int] = None
    upper_certificate: Optional[Matching] = None
    exact: Optional[int] = None
    closure: Optional[str] = None
    truncated: bool = False
    matchings_examined: int = 0
    table: List[Tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.check()

    def check(self) -> None:
        """Raise VerificationError if the bounds contradict each other."""
        if self.lower_bound is not None and self.upper_bound is not None and self.lower_bound > self.upper_bound:
            raise VerificationError(
                f"{self.graph}: lower bound {self.lower_bound} exceeds upper bound {self.upper_bound}"
            )
        if self.exact is not None:
            closed_by_bounds = self.lower_bound == self.upper_bound == self.exact
            if not closed_by_bounds and self.closure not in ("exhaustive", "known_lower"):
                raise VerificationError(f"{self.graph}: exact value {self.exact} is not certified")

    @property
    def verdict(self) -> str:
        if self.exact is not None:
            return "EXACT"
        if self.truncated:
            return "TRUNCATED"
        return "BOUNDS"

    def close_if_bounds_meet(self) -> None:
        if self.lower_bound is not None and self.lower_bound == self.upper_bound:
            self.exact = self.lower_bound
            self.closure = self.closure or "bounds_meet"
        self.check()

    def to_dict(self) -> dict:
        matching = None
        if self.upper_certificate is not None:
            matching = [[format_label(u), format_label(v)] for u, v in self.upper_certificate]
        return {
            "graph": self.graph,
            "vertices": self.n_vertices,
            "lower_bound": self.lower_bound,
            "lower_kind": self.lower_kind,
            "upper_bound": self.upper_bound,
            "upper_matching": matching,
            "exact": self.exact,
            "closure": self.closure,
            "truncated": self.truncated,
            "verdict": self.verdict,
            "matchings_examined": self.matchings_examined,
            "table": [{"matching": m, "forcing_number": f} for m, f in self.table],
        }
