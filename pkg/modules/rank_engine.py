"""
Exact rank, corank and inverse computation over any supported field, plus the
block-row dependency checks of the circular constructions.

Elimination is plain Gaussian elimination: the pivot is the first nonzero entry
at or below the current row, rows are swapped, nothing else is reordered.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from models.certificates import (
    BlockMatrix,
    InvolutoryCertificate,
    WeightedBiAdjacency,
    first_support_mismatch,
)
from modules.block_matrices import case_for_k
from modules.errors import (
    FieldArithmeticError,
    PreconditionError,
    SupportMismatchError,
    VerificationError,
)
from modules.fields import Field, PrimeField, RationalField, get_field

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankCertificate:
    field: str
    rows: int
    cols: int
    rank: int
    pivots: Tuple[int, ...]
    label: str = ""

    @property
    def corank(self) -> int:
        return self.rows - self.rank

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "field": self.field,
            "rows": self.rows,
            "cols": self.cols,
            "rank": self.rank,
            "corank": self.corank,
            "pivots": list(self.pivots),
        }


# ─────────────────────────────────────────────────────────
# Elimination
# ─────────────────────────────────────────────────────────
def _row_echelon(M: np.ndarray, field: Field) -> Tuple[np.ndarray, List[int]]:
    work = np.array(M, dtype=object, copy=True)
    n_rows, n_cols = work.shape
    pivots: List[int] = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        pivot = next((i for i in range(r, n_rows) if not field.is_zero(work[i, c])), None)
        if pivot is None:
            continue
        if pivot != r:
            work[[r, pivot]] = work[[pivot, r]]
        inverse = field.one / work[r, c]
        for i in range(r + 1, n_rows):
            if not field.is_zero(work[i, c]):
                factor = work[i, c] * inverse
                work[i, c:] = work[i, c:] - factor * work[r, c:]
        pivots.append(c)
        r += 1
    return work, pivots


def exact_rank(M: np.ndarray, field: Field, label: str = "") -> RankCertificate:
    """Rank of M over ``field`` by exact elimination.

    Raises:
        FieldMismatchError: If an entry is not an element of ``field``.
    """
    M = np.asarray(M, dtype=object)
    field.check_matrix(M)
    if M.size == 0:
        return RankCertificate(field.descriptor, M.shape[0], M.shape[1] if M.ndim > 1 else 0, 0, (), label)
    _, pivots = _row_echelon(M, field)
    certificate = RankCertificate(field.descriptor, M.shape[0], M.shape[1], len(pivots), tuple(pivots), label)
    logger.debug(
        f"rank {label or 'matrix'} {M.shape[0]}x{M.shape[1]} over {field.descriptor}: "
        f"rank={certificate.rank} corank={certificate.corank}"
    )
    return certificate


def invert(M: np.ndarray, field: Field) -> np.ndarray:
    """Exact Gauss-Jordan inverse.

    Raises:
        PreconditionError: If M is not square.
        FieldArithmeticError: If M is singular.
    """
    M = np.asarray(M, dtype=object)
    n_rows, n_cols = M.shape
    if n_rows != n_cols:
        raise PreconditionError(f"Cannot invert a {n_rows}x{n_cols} matrix")
    field.check_matrix(M)
    work = np.concatenate([np.array(M, dtype=object, copy=True), field.identity(n_rows)], axis=1)
    for c in range(n_rows):
        pivot = next((i for i in range(c, n_rows) if not field.is_zero(work[i, c])), None)
        if pivot is None:
            raise FieldArithmeticError(f"Matrix is singular over {field.descriptor}")
        if pivot != c:
            work[[c, pivot]] = work[[pivot, c]]
        work[c] = work[c] * (field.one / work[c, c])
        for i in range(n_rows):
            if i != c and not field.is_zero(work[i, c]):
                work[i] = work[i] - work[i, c] * work[c]
    return work[:, n_rows:]


def forcing_lower_bound(M: WeightedBiAdjacency) -> int:
    """corank(M), a lower bound for the minimum forcing number of M.host.

    Raises:
        SupportMismatchError: If the support audit fails; no bound is emitted then.
        PreconditionError: If M is not square (the host has no perfect matching).
    """
    mismatch = first_support_mismatch(M.host, M.rows, M.cols, M.entries, M.field)
    if mismatch:
        u, v, _ = mismatch
        raise SupportMismatchError(f"Support audit failed at ({u!r}, {v!r}); refusing to emit a bound", u, v)
    if M.shape[0] != M.shape[1]:
        raise PreconditionError(f"Lower bound needs a square bi-adjacency matrix, got {M.shape}")
    return exact_rank(M.entries, M.field).corank


def assert_rank_bound(dependency_ok: bool, rank: int, k: int, n: int) -> None:
    """Two verified block-row dependencies force rank(R) <= kn - n.

    Raises:
        VerificationError: If the dependencies hold but the rank exceeds the bound.
    """
    if dependency_ok and rank > k * n - n:
        raise VerificationError(
            f"Dependencies verified but rank {rank} exceeds k*n - n = {k * n - n} (k={k}, n={n})"
        )


# ─────────────────────────────────────────────────────────
# Block-row dependencies of the circular matrices
# ─────────────────────────────────────────────────────────
class DependencyTerm(NamedTuple):
    """coefficient * left * R^(block), left being I, B or Binv."""

    coefficient: int
    left: str
    block: int

    def __str__(self):
        sign = "-" if self.coefficient < 0 else "+"
        magnitude = abs(self.coefficient)
        factor = "" if magnitude == 1 else f"{magnitude} "
        left = "" if self.left == "I" else f"{self.left} "
        return f"{sign} {factor}{left}R{self.block}"


def _terms(*triples) -> List[DependencyTerm]:
    return [DependencyTerm(*t) for t in triples]


def dependency_terms(case: str, k: int) -> Tuple[List[DependencyTerm], List[DependencyTerm]]:
    """Linear combinations expressing block row 1 (top) and block row 2k (bottom)."""
    m = 2 * k
    if case == "case1":
        return _terms((1, "B", 2), (2, "I", 3)), _terms((1, "Binv", 3), (1, "I", 2))

    if case == "case2":
        top, bottom = [], []
        for i in range(k // 3):
            top += _terms((1, "B", 6 * i + 2), (-1, "B", 6 * i + 4), (1, "I", 6 * i + 5))
        for i in range(1, k // 3):
            top += _terms((-1, "I", 6 * i + 1))
        bottom += _terms((1, "Binv", m - 1), (-1, "Binv", m - 3), (1, "I", m - 4))
        for i in range(1, k // 3):
            bottom += _terms(
                (-1, "I", m - 6 * i), (1, "Binv", m - 6 * i - 1),
                (-1, "Binv", m - 6 * i - 3), (1, "I", m - 6 * i - 4),
            )
        return top, bottom

    if case == "case3":
        top = _terms((1, "B", 2), (1, "I", 3), (-1, "B", 4))
        bottom = _terms((1, "Binv", m - 1), (1, "I", m - 2), (-1, "Binv", m - 3))
        for i in range(1, (k - 4) // 3 + 1):
            top += _terms(
                (1, "B", 6 * i), (-1, "I", 6 * i + 1),
                (1, "I", 6 * i + 3), (-1, "B", 6 * i + 4),
            )
            bottom += _terms(
                (1, "Binv", m - 6 * i + 1), (-1, "I", m - 6 * i),
                (1, "I", m - 6 * i - 2), (-1, "Binv", m - 6 * i - 3),
            )
        top += _terms((1, "B", m - 2), (-1, "I", m - 1))
        bottom += _terms((1, "Binv", 3), (-1, "I", 2))
        return top, bottom

    if case == "case4":
        top, bottom = [], []
        for i in range((k - 5) // 3 + 1):
            top += _terms(
                (1, "B", 6 * i + 2), (-1, "B", 6 * i + 4),
                (1, "I", 6 * i + 5), (-1, "I", 6 * i + 7),
            )
            bottom += _terms(
                (1, "Binv", m - 6 * i - 1), (-1, "Binv", m - 6 * i - 3),
                (1, "I", m - 6 * i - 4), (-1, "I", m - 6 * i - 6),
            )
        top += _terms((1, "B", m - 2), (-1, "I", m - 1))
        bottom += _terms((1, "Binv", 3), (-1, "I", 2))
        return top, bottom

    raise PreconditionError(f"Unknown circular case '{case}'")


@dataclass(frozen=True)
class DependencyResidual:
    """Z = (sum of terms) - R^(target); verified iff every block of Z is zero."""

    case: str
    side: str
    target: int
    terms: Tuple[str, ...]
    is_zero: bool
    first_nonzero: Optional[Tuple[int, int, int, str]] = None

    def to_dict(self) -> dict:
        result = {
            "case": self.case,
            "side": self.side,
            "target_block_row": self.target,
            "combination": " ".join(self.terms),
            "verified": self.is_zero,
        }
        if self.first_nonzero is not None:
            block, row, col, value = self.first_nonzero
            result["first_nonzero"] = {"block": block, "row": row, "col": col, "value": value}
        return result


def _residual(case, side, target, terms, blocks, B, Binv, field, h) -> DependencyResidual:
    left_factor = {"B": B, "Binv": Binv}
    total = -blocks[target - 1]
    for term in terms:
        block_row = blocks[term.block - 1]
        if term.left != "I":
            block_row = left_factor[term.left].dot(block_row)
        total = total + term.coefficient * block_row
    first = None
    for (row, col), value in np.ndenumerate(total):
        if not field.is_zero(value):
            first = (col // h + 1, row, col % h, field.format(value))
            break
    return DependencyResidual(case, side, target, tuple(str(t) for t in terms), first is None, first)


def verify_case_dependency(
    R: BlockMatrix,
    matrix: WeightedBiAdjacency,
    cert: InvolutoryCertificate,
    k: int,
) -> Tuple[DependencyResidual, DependencyResidual]:
    """Evaluate the top and bottom block-row identities on the concrete matrix.

    Args:
        R: Block grid from circular_block_matrix.
        matrix: R instantiated with ``cert``.
        cert: The certificate used for instantiation.
        k: Half the cycle length.

    Returns:
        (top residual, bottom residual); block indices in reports are 1-based.

    Raises:
        PreconditionError: If R was built for another case or another k.
    """
    expected = case_for_k(k)
    if R.case != expected or (R.k is not None and R.k != k):
        raise PreconditionError(f"Block matrix is tagged {R.case} (k={R.k}) but k={k} needs {expected}")
    h = cert.half
    if matrix.shape != (2 * k * h, 2 * k * h):
        raise PreconditionError(f"Matrix shape {matrix.shape} does not match 2k blocks of size {h}")
    field = cert.field
    entries = matrix.entries
    blocks = [entries[i * h:(i + 1) * h, :] for i in range(2 * k)]
    top_terms, bottom_terms = dependency_terms(expected, k)
    top = _residual(expected, "top", 1, top_terms, blocks, cert.B.entries, cert.binv, field, h)
    bottom = _residual(expected, "bottom", 2 * k, bottom_terms, blocks, cert.B.entries, cert.binv, field, h)
    logger.debug(f"{expected} k={k}: top verified={top.is_zero}, bottom verified={bottom.is_zero}")
    return top, bottom


# ─────────────────────────────────────────────────────────
# Cross-field check
# ─────────────────────────────────────────────────────────
@dataclass(frozen=True)
class PrimeRank:
    prime: int
    rank: Optional[int]
    status: str
    reason: str = ""

    def to_dict(self) -> dict:
        return {"prime": self.prime, "rank": self.rank, "status": self.status, "reason": self.reason}


@dataclass(frozen=True)
class CrossFieldReport:
    rational_rank: int
    primes: Tuple[PrimeRank, ...]

    @property
    def consistent(self) -> bool:
        """False only if some prime gave a larger rank than Q, which cannot happen."""
        return all(entry.status != "violation" for entry in self.primes)

    def to_dict(self) -> dict:
        return {
            "rational_rank": self.rational_rank,
            "consistent": self.consistent,
            "primes": [entry.to_dict() for entry in self.primes],
        }


def cross_field_rank_check(M: np.ndarray, primes: Sequence[int]) -> CrossFieldReport:
    """Compare the rank of a rational matrix with its ranks modulo each prime.

    Primes dividing some denominator are skipped and reported as such.
    """
    rationals = RationalField()
    M = np.asarray(M, dtype=object)
    rationals.check_matrix(M)
    rational_rank = exact_rank(M, rationals).rank
    results = []
    for p in primes:
        field: PrimeField = get_field(f"GFp:{p}")
        bad = next((v for v in M.flat if Fraction(v).denominator % p == 0), None)
        if bad is not None:
            results.append(PrimeRank(p, None, "skipped", f"denominator of {Fraction(bad)} is divisible by {p}"))
            continue
        reduced = np.empty(M.shape, dtype=object)
        for index, value in np.ndenumerate(M):
            reduced[index] = field(Fraction(value))
        rank = exact_rank(reduced, field).rank
        if rank == rational_rank:
            status = "agree"
        elif rank < rational_rank:
            status = "drop"
        else:
            status = "violation"
        results.append(PrimeRank(p, rank, status))
    return CrossFieldReport(rational_rank, tuple(results))
