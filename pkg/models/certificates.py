"""
Matrix witnesses attached to bipartite graphs.

    WeightedBiAdjacency   a field matrix whose rows are the vertices of one side and
                          whose columns are the vertices of the other; its nonzero
                          pattern must equal the graph's bi-adjacency pattern
    InvolutoryCertificate B with an inverse Binv of transposed support, so that
                          [[O, B], [Binv, O]] squares to the identity
    RowInversePair        B and C on a possibly unbalanced graph with B C^T = I
    BlockMatrix           a grid of symbolic block tags plus the vertex order of every
                          block row and block column
"""

import logging
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from typing import Hashable, List, Optional, Tuple

import numpy as np

from models.bipartite_graph import BipartiteGraph, format_label
from modules.errors import FieldMismatchError, PreconditionError, SupportMismatchError
from modules.fields import Field

logger = logging.getLogger(__name__)


def _frozen_copy(matrix: np.ndarray) -> np.ndarray:
    copy = np.array(matrix, dtype=object, copy=True)
    copy.setflags(write=False)
    return copy


def first_support_mismatch(host: BipartiteGraph, rows, cols, entries: np.ndarray, field: Field):
    """Return (row, col, edge_present) for the first entry whose support disagrees, else None."""
    for i, u in enumerate(rows):
        for j, v in enumerate(cols):
            nonzero = not field.is_zero(entries[i, j])
            if nonzero != host.has_edge(u, v):
                return u, v, host.has_edge(u, v)
    return None


@dataclass(frozen=True, eq=False)
class WeightedBiAdjacency:
    """Weighted bi-adjacency matrix of ``host``.

    Raises:
        PreconditionError: If rows and columns do not cover the two sides of the host.
        FieldMismatchError: If an entry belongs to another field.
        SupportMismatchError: If the nonzero pattern differs from the bi-adjacency pattern.
    """

    host: BipartiteGraph
    rows: Tuple[Hashable, ...]
    cols: Tuple[Hashable, ...]
    entries: np.ndarray
    field: Field

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        object.__setattr__(self, "entries", _frozen_copy(self.entries))
        if self.entries.shape != (len(self.rows), len(self.cols)):
            raise PreconditionError(
                f"Matrix shape {self.entries.shape} does not match "
                f"{len(self.rows)} rows and {len(self.cols)} columns"
            )
        row_sides = {self.host.side(v) for v in self.rows}
        col_sides = {self.host.side(v) for v in self.cols}
        if len(row_sides) > 1 or len(col_sides) > 1 or (row_sides and row_sides == col_sides):
            raise PreconditionError("Rows and columns must index the two opposite sides")
        if len(set(self.rows)) + len(set(self.cols)) != self.host.n_vertices:
            raise PreconditionError("Rows and columns must cover every vertex of the host exactly once")
        try:
            self.field.check_matrix(self.entries)
        except FieldMismatchError as exc:
            raise FieldMismatchError(f"Matrix over {self.field.descriptor}: {exc}") from exc
        mismatch = first_support_mismatch(self.host, self.rows, self.cols, self.entries, self.field)
        if mismatch:
            u, v, present = mismatch
            state = "zero on an edge" if present else "nonzero on a non-edge"
            raise SupportMismatchError(f"Entry ({u!r}, {v!r}) is {state}", row=u, col=v)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class InvolutoryCertificate:
    """B on a balanced host together with its inverse.

    ``binv`` is indexed by (B.cols, B.rows). Validity is established by
    ``verify_certificate``; constructors in modules.certificates always verify.
    """

    B: WeightedBiAdjacency
    binv: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        if not self.B.host.is_balanced or self.B.shape[0] != self.B.shape[1]:
            raise PreconditionError(f"Involutory certificates need a balanced host, got {self.B.host!r}")
        object.__setattr__(self, "binv", _frozen_copy(self.binv))
        if self.binv.shape != self.B.shape[::-1]:
            raise PreconditionError(f"Inverse shape {self.binv.shape} does not match B {self.B.shape}")
        self.B.field.check_matrix(self.binv)

    @property
    def host(self) -> BipartiteGraph:
        return self.B.host

    @property
    def field(self) -> Field:
        return self.B.field

    @property
    def n(self) -> int:
        """Number of vertices of the host."""
        return self.host.n_vertices

    @property
    def half(self) -> int:
        return self.B.shape[0]

    def assembled(self) -> Tuple[np.ndarray, List[Hashable]]:
        """A = [[O, B], [Binv, O]] over the vertex order rows + cols."""
        size = self.half
        A = self.field.zeros(2 * size, 2 * size)
        A[:size, size:] = self.B.entries
        A[size:, :size] = self.binv
        return A, list(self.B.rows) + list(self.B.cols)


@dataclass(frozen=True, eq=False)
class RowInversePair:
    """B and C on a host with |X| = m <= |Y| = n, rows X, columns Y, B C^T = I_m."""

    B: WeightedBiAdjacency
    C: WeightedBiAdjacency
    provenance: str = ""

    def __post_init__(self):
        if self.B.host is not self.C.host and self.B.host != self.C.host:
            raise PreconditionError("B and C must share one host graph")
        if self.B.rows != self.C.rows or self.B.cols != self.C.cols:
            raise PreconditionError("B and C must use the same row and column orders")
        if self.B.field != self.C.field:
            raise FieldMismatchError(
                f"B is over {self.B.field.descriptor} but C is over {self.C.field.descriptor}"
            )
        if len(self.B.rows) > len(self.B.cols):
            raise PreconditionError("Row-inverse pairs need at most as many rows as columns")

    @property
    def host(self) -> BipartiteGraph:
        return self.B.host

    @property
    def field(self) -> Field:
        return self.B.field

    @property
    def m(self) -> int:
        return len(self.B.rows)

    @property
    def n(self) -> int:
        return len(self.B.cols)


class BlockTag(Enum):
    """Symbolic block: a coefficient times one of O, I, B, Binv or C^T."""

    O = ("O", 0)
    I = ("I", 1)
    NEG_I = ("I", -1)
    TWO_I = ("I", 2)
    B = ("B", 1)
    NEG_B = ("B", -1)
    TWO_B = ("B", 2)
    BINV = ("Binv", 1)
    NEG_BINV = ("Binv", -1)
    TWO_BINV = ("Binv", 2)
    CT = ("C^T", 1)

    @property
    def base(self) -> str:
        return self.value[0]

    @property
    def coefficient(self) -> int:
        return self.value[1]

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0

    def __str__(self):
        if self.is_zero:
            return "O"
        prefix = {1: "", -1: "-", 2: "2"}[self.coefficient]
        return f"{prefix}{self.base}"


@dataclass(frozen=True, eq=False)
class BlockMatrix:
    """A partitioned matrix of block tags over a product graph.

    ``row_blocks[i]`` and ``col_blocks[j]`` list the product vertices indexing
    block row i and block column j.
    """

    grid: Tuple[Tuple[BlockTag, ...], ...]
    row_blocks: Tuple[Tuple[Hashable, ...], ...]
    col_blocks: Tuple[Tuple[Hashable, ...], ...]
    host: BipartiteGraph
    case: str = ""
    k: Optional[int] = None
    notes: Tuple[str, ...] = dataclass_field(default_factory=tuple)

    def __post_init__(self):
        if len(self.grid) != len(self.row_blocks) or any(len(r) != len(self.col_blocks) for r in self.grid):
            raise PreconditionError("Block grid shape does not match the block orders")

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.row_blocks), len(self.col_blocks)

    def tag(self, i: int, j: int) -> BlockTag:
        """Block R_{ij} with 1-based indices."""
        return self.grid[i - 1][j - 1]

    def rows(self) -> List[Hashable]:
        return [v for block in self.row_blocks for v in block]

    def cols(self) -> List[Hashable]:
        return [v for block in self.col_blocks for v in block]

    def nonzero_blocks_in_row(self, i: int) -> int:
        return sum(1 for tag in self.grid[i - 1] if not tag.is_zero)

    def nonzero_blocks_in_col(self, j: int) -> int:
        return sum(1 for row in self.grid if not row[j - 1].is_zero)

    def count(self, tag: BlockTag) -> int:
        return sum(1 for row in self.grid for t in row if t is tag)

    def as_text(self) -> List[List[str]]:
        return [[str(tag) for tag in row] for row in self.grid]


@dataclass(frozen=True)
class VerificationResult:
    """Outcome of one exact check; failures carry the first offending position."""

    check: str
    passed: bool
    message: str = ""
    location: Optional[Tuple] = None
    value: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "message": self.message,
            "location": None if self.location is None else [format_label(part) for part in self.location],
            "value": self.value,
        }


@dataclass(frozen=True)
class CertificateReport:
    """All checks run by verify_certificate; passes iff every check passed."""

    kind: str
    field: str
    checks: Tuple[VerificationResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def first_failure(self) -> Optional[VerificationResult]:
        return next((check for check in self.checks if not check.passed), None)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "field": self.field,
            "passed": self.passed,
            "checks": [check.to_dict() for check in self.checks],
        }
