"""
Certificate constructors, conversions, verification and file IO.

Every constructor verifies what it builds before returning it; a construction
that fails its own check raises VerificationError instead of returning a
broken witness.
"""

import hashlib
import json
import logging
import os
from typing import Hashable, Iterable, List, Optional, Sequence

import numpy as np

import config
from models.bipartite_graph import BipartiteGraph, ProductLabel, format_label, parse_label
from models.certificates import (
    CertificateReport,
    InvolutoryCertificate,
    RowInversePair,
    VerificationResult,
    WeightedBiAdjacency,
    first_support_mismatch,
)
from modules.errors import (
    ExpressionParseError,
    FieldArithmeticError,
    FieldMismatchError,
    PreconditionError,
    VerificationError,
)
from modules.fields import (
    Field,
    PrimeField,
    RationalField,
    element_of_order,
    get_field,
    scalar_for_norm,
)
from modules.graph_families import (
    cartesian_product,
    complete_bipartite,
    delete_X_vertices,
    g_prime,
    graph_from_text,
    graph_to_text,
    hypercube,
    k2,
    s14,
    star,
    union_graph,
)
from modules.rank_engine import invert

logger = logging.getLogger(__name__)

# Signed weights of s14 in units of 1/2; rows x0,x6,x4,x1,x3,x5,x2 and columns y0,y1,y3,y6,y4,y2,y5
S14_TABLE = (
    ("1/2", "1/2", "1/2", "-1/2", "0", "0", "0"),
    ("1/2", "0", "0", "1/2", "0", "1/2", "-1/2"),
    ("1/2", "0", "-1/2", "0", "1/2", "0", "1/2"),
    ("-1/2", "1/2", "0", "0", "1/2", "1/2", "0"),
    ("0", "0", "1/2", "1/2", "1/2", "-1/2", "0"),
    ("0", "1/2", "0", "1/2", "-1/2", "0", "1/2"),
    ("0", "-1/2", "1/2", "0", "0", "1/2", "1/2"),
)
S14_ROWS = ("x0", "x6", "x4", "x1", "x3", "x5", "x2")
S14_COLS = ("y0", "y1", "y3", "y6", "y4", "y2", "y5")
S14_SHA256 = "5aa74be11a8d8e784bcd3e68f75f090d247f47f5a6696fcab66bba484813f080"

# Row-orthogonal weights of gprime before standardization (every row has squared norm 324)
GPRIME_TABLE = (
    ("-9", "9", "0", "0", "3*sqrt(2)", "-6*sqrt(2)", "6*sqrt(2)"),
    ("9", "-9", "0", "0", "3*sqrt(2)", "-6*sqrt(2)", "6*sqrt(2)"),
    ("0", "0", "-9", "9", "-6*sqrt(2)", "3*sqrt(2)", "6*sqrt(2)"),
    ("0", "0", "9", "-9", "-6*sqrt(2)", "3*sqrt(2)", "6*sqrt(2)"),
    ("3*sqrt(2)", "3*sqrt(2)", "-6*sqrt(2)", "-6*sqrt(2)", "8", "8", "4"),
    ("-6*sqrt(2)", "-6*sqrt(2)", "3*sqrt(2)", "3*sqrt(2)", "8", "8", "4"),
    ("6*sqrt(2)", "6*sqrt(2)", "6*sqrt(2)", "6*sqrt(2)", "4", "4", "2"),
)
GPRIME_SHA256 = "f437956654aa7afb61460586180c2627636d80abf59470ac2c459244f63635a8"


def table_checksum(table: Sequence[Sequence[str]]) -> str:
    text = ";".join(",".join(row) for row in table)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _check_table(name: str, table, expected: str) -> None:
    actual = table_checksum(table)
    if actual != expected:
        raise VerificationError(f"Literal table {name} is corrupted (sha256 {actual})")


# ─────────────────────────────────────────────────────────
# Verification
# ─────────────────────────────────────────────────────────
def _identity_mismatch(product: np.ndarray, field: Field):
    for (i, j), value in np.ndenumerate(product):
        expected = field.one if i == j else field.zero
        if not field.is_zero(value - expected):
            return i, j, value
    return None


def _support_check(name: str, host, rows, cols, entries, field) -> VerificationResult:
    mismatch = first_support_mismatch(host, rows, cols, entries, field)
    if mismatch is None:
        return VerificationResult(name, True)
    u, v, present = mismatch
    state = "zero on an edge" if present else "nonzero on a non-edge"
    return VerificationResult(name, False, f"entry ({format_label(u)}, {format_label(v)}) is {state}", (u, v))


def _identity_check(name: str, product: np.ndarray, field: Field, rows, cols) -> VerificationResult:
    mismatch = _identity_mismatch(product, field)
    if mismatch is None:
        return VerificationResult(name, True)
    i, j, value = mismatch
    return VerificationResult(
        name, False,
        f"entry ({format_label(rows[i])}, {format_label(cols[j])}) is {field.format(value)}",
        (rows[i], cols[j]), field.format(value),
    )


def verify_certificate(candidate) -> CertificateReport:
    """Run every exact check for an involutory certificate, a row-inverse pair or a bare B.

    Never raises on a failed check; the first offending entry of each failed
    check is recorded in the report.
    """
    if isinstance(candidate, InvolutoryCertificate):
        B, field = candidate.B, candidate.field
        checks = [
            _support_check("support(B)", B.host, B.rows, B.cols, B.entries, field),
            _support_check("support(Binv) = support(B^T)", B.host, B.cols, B.rows, candidate.binv, field),
            _identity_check("B Binv = I", B.entries.dot(candidate.binv), field, B.rows, B.rows),
        ]
        A, order = candidate.assembled()
        checks.append(_identity_check("A^2 = I", A.dot(A), field, order, order))
        return CertificateReport("involutory", field.descriptor, tuple(checks))

    if isinstance(candidate, RowInversePair):
        B, C, field = candidate.B, candidate.C, candidate.field
        checks = [
            _support_check("support(B)", B.host, B.rows, B.cols, B.entries, field),
            _support_check("support(C)", C.host, C.rows, C.cols, C.entries, field),
            _identity_check("B C^T = I", B.entries.dot(C.entries.T), field, B.rows, B.rows),
        ]
        return CertificateReport("row_inverse_pair", field.descriptor, tuple(checks))

    if isinstance(candidate, WeightedBiAdjacency):
        B, field = candidate, candidate.field
        checks = [_support_check("support(B)", B.host, B.rows, B.cols, B.entries, field)]
        try:
            inverse = invert(B.entries, field)
        except (FieldArithmeticError, PreconditionError) as exc:
            checks.append(VerificationResult("B invertible", False, str(exc)))
        else:
            checks.append(VerificationResult("B invertible", True))
            checks.append(
                _support_check("support(Binv) = support(B^T)", B.host, B.cols, B.rows, inverse, field)
            )
        return CertificateReport("weighted_bi_adjacency", field.descriptor, tuple(checks))

    raise PreconditionError(f"Cannot verify a {type(candidate).__name__}")


def _verified(candidate, what: str):
    report = verify_certificate(candidate)
    if not report.passed:
        failure = report.first_failure
        raise VerificationError(f"{what}: check '{failure.check}' failed, {failure.message}")
    return candidate


# ─────────────────────────────────────────────────────────
# Building blocks
# ─────────────────────────────────────────────────────────
def weighted(host: BipartiteGraph, rows, cols, entries, field: Field) -> WeightedBiAdjacency:
    matrix = entries if isinstance(entries, np.ndarray) else field.matrix(entries)
    return WeightedBiAdjacency(host, tuple(rows), tuple(cols), matrix, field)


def involutory_certificate(B: WeightedBiAdjacency, binv: np.ndarray, provenance: str) -> InvolutoryCertificate:
    return _verified(InvolutoryCertificate(B, binv, provenance), provenance)


def pair_from_involutory(cert: InvolutoryCertificate) -> RowInversePair:
    """(B, Binv^T) is a row-inverse pair since B Binv = I."""
    C = weighted(cert.host, cert.B.rows, cert.B.cols, np.array(cert.binv.T), cert.field)
    return _verified(RowInversePair(cert.B, C, cert.provenance), "pair from involutory")


def involutory_from_pair(pair: RowInversePair) -> InvolutoryCertificate:
    if pair.m != pair.n:
        raise PreconditionError(f"Only a square pair converts to an involutory certificate ({pair.m}x{pair.n})")
    return involutory_certificate(pair.B, np.array(pair.C.entries.T), pair.provenance)


def relabel_certificate(candidate, mapping: dict, name: str = ""):
    """Rename host vertices of a certificate or pair; unmapped labels are kept."""
    rename = lambda v: mapping.get(v, v)  # noqa: E731
    host = candidate.host.relabel(mapping, name=name)

    def moved(matrix: WeightedBiAdjacency) -> WeightedBiAdjacency:
        return WeightedBiAdjacency(
            host, tuple(map(rename, matrix.rows)), tuple(map(rename, matrix.cols)), matrix.entries, matrix.field
        )

    if isinstance(candidate, InvolutoryCertificate):
        return InvolutoryCertificate(moved(candidate.B), candidate.binv, candidate.provenance)
    return RowInversePair(moved(candidate.B), moved(candidate.C), candidate.provenance)


# ─────────────────────────────────────────────────────────
# Balanced constructions
# ─────────────────────────────────────────────────────────
def complete_bipartite_involutory(n: int, field: Field) -> InvolutoryCertificate:
    """Involutory certificate of K_{n,n}.

    n = 1 gives [1]; n = 2 gives [[1, 1], [1, -1]] with inverse B/2; n >= 3 gives
    the self-inverse Householder matrix I - (2/n) J.
    """
    if field.characteristic == 2:
        raise PreconditionError("K_{n,n} certificates need a field of characteristic other than 2")
    host = complete_bipartite(n, n)
    rows, cols = host.x_vertices, host.y_vertices
    if n == 1:
        B = weighted(host, rows, cols, [[1]], field)
        return involutory_certificate(B, field.matrix([[1]]), "K_{1,1} identity")
    if n == 2:
        B = weighted(host, rows, cols, [[1, 1], [1, -1]], field)
        half = field.one / field(2)
        return involutory_certificate(B, B.entries * half, "K_{2,2} Hadamard")
    if field.is_zero(field(n)):
        raise PreconditionError(f"n = {n} is not invertible in {field.descriptor}")
    off = -field(2) / field(n)
    diagonal = field.one + off
    if field.is_zero(diagonal):
        raise PreconditionError(f"I - (2/n)J has a zero diagonal in {field.descriptor}")
    entries = [[diagonal if i == j else off for j in range(n)] for i in range(n)]
    B = weighted(host, rows, cols, entries, field)
    return involutory_certificate(B, B.entries, f"K_{{{n},{n}}} Householder")


def hypercube_involutory(d: int, field: Field) -> InvolutoryCertificate:
    """s * A_d with A_1 = [[0, 1], [1, 0]], A_d = [[A_{d-1}, I], [I, -A_{d-1}]] and s^2 d = 1.

    Raises:
        PreconditionError: If the field has no such s.
    """
    if d < 1:
        raise PreconditionError(f"Hypercube dimension must be positive, got {d}")
    try:
        s = scalar_for_norm(field, d)
    except PreconditionError as exc:
        hint = "use Qsqrt:<d> or a prime field GF(p) in which d is a square"
        if d == 2:
            hint = "use Qsqrt:2 or GF(p) with p = +-1 mod 8"
        raise PreconditionError(f"{exc}; {hint}") from exc

    A = field.matrix([[0, 1], [1, 0]])
    for _ in range(d - 1):
        size = A.shape[0]
        eye = field.identity(size)
        A = np.block([[A, eye], [eye, -A]])
    A = A * s

    host = hypercube(d)
    rows, cols = host.x_vertices, host.y_vertices
    B = weighted(host, rows, cols, A[np.ix_(rows, cols)], field)
    return involutory_certificate(B, A[np.ix_(cols, rows)], f"hypercube Q_{d} recursion over {field.descriptor}")


def find_lift_parameter(field: Field):
    """Return a nonzero c for which 1 + c^2 is the inverse of a square."""
    if isinstance(field, RationalField):
        return config.DEFAULT_LIFT_PARAMETER
    limit = field.p if isinstance(field, PrimeField) else 64
    for value in range(1, limit):
        c = field(value)
        norm = field.one + c * c
        if not field.is_zero(norm) and field.sqrt(field.one / norm) is not None:
            return c
    raise PreconditionError(f"No lift parameter c exists in {field.descriptor}")


def prism_lift(cert: InvolutoryCertificate, c=None) -> InvolutoryCertificate:
    """Certificate for host □ K2: s * [[B, cI], [cI, -Binv]] with s^2 (1 + c^2) = 1.

    Rows are (x, 0) then (y, 1); columns are (y, 0) then (x, 1).

    Raises:
        PreconditionError: If c is zero or the field has no matching s.
    """
    field = cert.field
    c = find_lift_parameter(field) if c is None else field(c)
    if field.is_zero(c):
        raise PreconditionError("Lift parameter c must be nonzero")
    s = scalar_for_norm(field, field.one + c * c)

    h = cert.half
    eye = field.identity(h)
    B, Binv = cert.B.entries, cert.binv
    lifted = np.block([[B, eye * c], [eye * c, -Binv]]) * s
    lifted_inverse = np.block([[Binv, eye * c], [eye * c, -B]]) * s

    host = cartesian_product(cert.host, k2())
    rows = [ProductLabel(x, 0) for x in cert.B.rows] + [ProductLabel(y, 1) for y in cert.B.cols]
    cols = [ProductLabel(y, 0) for y in cert.B.cols] + [ProductLabel(x, 1) for x in cert.B.rows]
    provenance = f"prism_lift(c={field.format(c)}) of [{cert.provenance}]"
    return involutory_certificate(weighted(host, rows, cols, lifted, field), lifted_inverse, provenance)


def hypercube_by_lifting(d: int, field: Field, c=None) -> InvolutoryCertificate:
    """Q_1 identity certificate lifted d - 1 times, relabeled to the integer labels of Q_d."""
    cert = hypercube_involutory(1, field)
    for _ in range(d - 1):
        cert = prism_lift(cert, c)

    def flatten(label):
        if isinstance(label, tuple):
            return 2 * flatten(label[0]) + label[1]
        return label

    mapping = {v: flatten(v) for v in cert.host.vertices}
    relabeled = relabel_certificate(cert, mapping, name=f"Q:{d}")
    if relabeled.host != hypercube(d):
        raise VerificationError(f"Lifted host does not match Q_{d}")
    return _verified(relabeled, f"lifted Q_{d}")


def orthogonal_to_involutory(B: WeightedBiAdjacency, provenance: str = "") -> InvolutoryCertificate:
    """An orthogonal B (B B^T = I) gives a certificate with Binv = B^T."""
    return involutory_certificate(B, np.array(B.entries.T), provenance or "orthogonal B, Binv = B^T")


def standardize_orthogonal_rows(B: WeightedBiAdjacency) -> WeightedBiAdjacency:
    """Scale a square matrix with pairwise orthogonal rows of one common squared norm r^2 to B / r.

    Raises:
        VerificationError: If rows are not orthogonal or their norms differ.
        PreconditionError: If r is not in the field.
    """
    field = B.field
    gram = B.entries.dot(B.entries.T)
    norm = gram[0, 0]
    for (i, j), value in np.ndenumerate(gram):
        expected = norm if i == j else field.zero
        if not field.is_zero(value - expected):
            raise VerificationError(
                f"Rows {format_label(B.rows[i])} and {format_label(B.rows[j])} give {field.format(value)}, "
                f"expected {field.format(expected)}"
            )
    s = scalar_for_norm(field, norm)
    return WeightedBiAdjacency(B.host, B.rows, B.cols, B.entries * s, field)


def s14_certificate(field: Optional[Field] = None) -> InvolutoryCertificate:
    """The signed 1/2-weighted orthogonal matrix of s14; Binv = B^T."""
    _check_table("S14", S14_TABLE, S14_SHA256)
    field = field or RationalField()
    B = weighted(s14(), S14_ROWS, S14_COLS, [[RationalField().parse(e) for e in row] for row in S14_TABLE], field)
    host = B.host
    for i, x in enumerate(S14_ROWS):
        for j, y in enumerate(S14_COLS):
            sign = host.sign(x, y) if host.has_edge(x, y) else None
            if sign is not None and (sign > 0) != (RationalField().parse(S14_TABLE[i][j]) > 0):
                raise VerificationError(f"Sign of ({x}, {y}) disagrees with the edge sign")
    return orthogonal_to_involutory(B, "s14 signed orthogonal matrix")


def gprime_certificate() -> InvolutoryCertificate:
    """The row-orthogonal weights of gprime over Q(sqrt 2), standardized by 1/18."""
    _check_table("GPRIME", GPRIME_TABLE, GPRIME_SHA256)
    field = get_field("Qsqrt:2")
    host = g_prime()
    raw = weighted(host, host.x_vertices, host.y_vertices, [list(row) for row in GPRIME_TABLE], field)
    standardized = standardize_orthogonal_rows(raw)
    return orthogonal_to_involutory(standardized, "gprime row-orthogonal weights / 18")


def random_certificate_search(
    G: BipartiteGraph,
    p: int,
    trials: int,
    seed: int,
) -> Optional[InvolutoryCertificate]:
    """Sample nonzero GF(p) weights on the edges until B^-1 has the support of B^T.

    Returns None after ``trials`` misses; the search is deterministic for a seed.
    """
    if not G.is_balanced:
        raise PreconditionError(f"Random search needs a balanced graph, got {G!r}")
    field = get_field(f"GFp:{p}")
    rng = np.random.default_rng(seed)
    rows, cols = G.x_vertices, G.y_vertices
    pattern = G.bi_adjacency_pattern(rows, cols)
    for trial in range(trials):
        entries = field.zeros(len(rows), len(cols))
        for (i, j), present in np.ndenumerate(pattern):
            if present:
                entries[i, j] = field.random_element(rng, nonzero=True)
        try:
            inverse = invert(entries, field)
        except FieldArithmeticError:
            continue
        if first_support_mismatch(G, cols, rows, inverse, field) is None:
            logger.info(f"Random search found a certificate for {G!r} over GF({p}) at trial {trial + 1}")
            B = weighted(G, rows, cols, entries, field)
            return involutory_certificate(B, inverse, f"random search GF({p}) seed={seed} trial={trial + 1}")
    logger.info(f"Random search over GF({p}) found nothing for {G!r} in {trials} trials")
    return None


# ─────────────────────────────────────────────────────────
# Row-inverse pairs
# ─────────────────────────────────────────────────────────
def fourier_pair(n: int, p: int) -> RowInversePair:
    """B = (w^{ij}), C = n^-1 (w^{-ij}) over GF(p), w of order n, on K_{n,n}.

    Raises:
        PreconditionError: If p is not prime or p is not 1 modulo n.
    """
    omega = element_of_order(n, p)
    field = get_field(f"GFp:{p}")
    if field.is_zero(field(n)):
        raise PreconditionError(f"n = {n} is not invertible in GF({p})")
    n_inverse = field(n).inverse()
    host = complete_bipartite(n, n)
    rows, cols = host.x_vertices, host.y_vertices
    B = weighted(host, rows, cols, [[omega ** (i * j) for j in range(n)] for i in range(n)], field)
    C = weighted(host, rows, cols, [[n_inverse * omega ** (-i * j) for j in range(n)] for i in range(n)], field)
    return _verified(RowInversePair(B, C, f"Fourier matrix n={n} over GF({p}), w={omega.value}"), "fourier_pair")


def star_pair(n: int, field: Field) -> RowInversePair:
    """All-ones row on K_{1,n} with C = n^-1 times the all-ones row."""
    if field.is_zero(field(n)):
        raise PreconditionError(f"n = {n} is not invertible in {field.descriptor}")
    host = star(n)
    scale = field.one / field(n)
    B = weighted(host, host.x_vertices, host.y_vertices, [[1] * n], field)
    C = weighted(host, host.x_vertices, host.y_vertices, [[scale] * n], field)
    return _verified(RowInversePair(B, C, f"star K_{{1,{n}}} all-ones row"), "star_pair")


def delete_rows(pair: RowInversePair, D: Iterable[Hashable]) -> RowInversePair:
    """Drop the rows of the X-vertices in D from both B and C."""
    D = list(D)
    unknown = [v for v in D if v not in pair.B.rows]
    if unknown:
        raise PreconditionError(f"{unknown!r} are not rows of the pair")
    if not D:
        return pair
    keep = [i for i, v in enumerate(pair.B.rows) if v not in set(D)]
    if not keep:
        raise PreconditionError("Deleting every row leaves an empty pair")
    host = delete_X_vertices(pair.host, D)
    rows = tuple(pair.B.rows[i] for i in keep)
    B = WeightedBiAdjacency(host, rows, pair.B.cols, pair.B.entries[keep, :], pair.field)
    C = WeightedBiAdjacency(host, rows, pair.C.cols, pair.C.entries[keep, :], pair.field)
    labels = ",".join(format_label(v) for v in D)
    return _verified(RowInversePair(B, C, f"{pair.provenance} without rows {labels}"), "delete_rows")


def _union_two(first: RowInversePair, second: RowInversePair, scale) -> RowInversePair:
    field = first.field
    if second.field != field:
        raise FieldMismatchError(
            f"Pairs over {first.field.descriptor} and {second.field.descriptor} cannot be joined"
        )
    overlap = [x for x in first.B.rows if x in set(second.B.rows)]
    only_first = [x for x in first.B.rows if x not in set(overlap)]
    only_second = [x for x in second.B.rows if x not in set(overlap)]
    if overlap:
        if scale is None:
            scale = field.sqrt(field.one / field(2))
            if scale is None:
                raise PreconditionError(
                    f"{field.descriptor} has no s with 2 s^2 = 1; use Qsqrt:2 or GF(p) with p = +-1 mod 8"
                )
        scale = field(scale)
        if not field.is_zero(field(2) * scale * scale - field.one):
            raise PreconditionError(f"Scale {field.format(scale)} does not satisfy 2 s^2 = 1")

    host = union_graph([first.host, second.host])
    rows = only_first + overlap + only_second
    cols = list(first.B.cols) + list(second.B.cols)
    first_index = {x: i for i, x in enumerate(first.B.rows)}
    second_index = {x: i for i, x in enumerate(second.B.rows)}

    def glued(left: np.ndarray, right: np.ndarray) -> np.ndarray:
        result = field.zeros(len(rows), len(cols))
        width = left.shape[1]
        for r, x in enumerate(rows):
            factor = scale if x in overlap else field.one
            if x in first_index:
                result[r, :width] = left[first_index[x], :] * factor
            if x in second_index:
                result[r, width:] = right[second_index[x], :] * factor
        return result

    B = WeightedBiAdjacency(host, rows, cols, glued(first.B.entries, second.B.entries), field)
    C = WeightedBiAdjacency(host, rows, cols, glued(first.C.entries, second.C.entries), field)
    provenance = f"union of [{first.provenance}] and [{second.provenance}]"
    return _verified(RowInversePair(B, C, provenance), "union_pair")


def union_pair(pairs: Sequence[RowInversePair], scale=None) -> RowInversePair:
    """Join pairs with disjoint Y-sides; shared X rows are scaled by s with 2 s^2 = 1.

    Pairs are joined left to right.
    """
    if not pairs:
        raise PreconditionError("union_pair needs at least one pair")
    result = pairs[0]
    for pair in pairs[1:]:
        result = _union_two(result, pair, scale)
    return result


# ─────────────────────────────────────────────────────────
# Certificate documents
# ─────────────────────────────────────────────────────────
def certificate_to_dict(candidate) -> dict:
    field = candidate.field
    document = {
        "schema_version": config.CERTIFICATE_SCHEMA_VERSION,
        "field": field.descriptor,
        "provenance": candidate.provenance,
        "host": graph_to_text(candidate.host).splitlines(),
        "rows": [format_label(v) for v in candidate.B.rows],
        "cols": [format_label(v) for v in candidate.B.cols],
        "B": [[field.format(value) for value in row] for row in candidate.B.entries],
    }
    if isinstance(candidate, InvolutoryCertificate):
        document["kind"] = "involutory"
        document["Binv"] = [[field.format(value) for value in row] for row in candidate.binv]
    elif isinstance(candidate, RowInversePair):
        document["kind"] = "row_inverse_pair"
        document["C"] = [[field.format(value) for value in row] for row in candidate.C.entries]
    else:
        raise PreconditionError(f"Cannot serialize a {type(candidate).__name__}")
    return document


def certificate_from_dict(document: dict):
    """Rebuild a certificate without verifying it; run verify_certificate on the result.

    Raises:
        ExpressionParseError: On a malformed document.
        SupportMismatchError: If B (or C) does not match the embedded host.
    """
    try:
        if document.get("schema_version") != config.CERTIFICATE_SCHEMA_VERSION:
            raise ExpressionParseError(f"Unsupported certificate schema {document.get('schema_version')!r}")
        field = get_field(document["field"])
        host = graph_from_text("\n".join(document["host"]))
        rows = [parse_label(v) for v in document["rows"]]
        cols = [parse_label(v) for v in document["cols"]]
        B = weighted(host, rows, cols, document["B"], field)
        kind = document["kind"]
        provenance = document.get("provenance", "")
        if kind == "involutory":
            return InvolutoryCertificate(B, field.matrix(document["Binv"]), provenance)
        if kind == "row_inverse_pair":
            return RowInversePair(B, weighted(host, rows, cols, document["C"], field), provenance)
        raise ExpressionParseError(f"Unknown certificate kind '{kind}'")
    except (KeyError, TypeError) as exc:
        raise ExpressionParseError(f"Malformed certificate document: missing or invalid {exc}") from exc


def write_certificate(candidate, file_path: str) -> None:
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file_path, "w", encoding="utf-8") as handle:
        json.dump(certificate_to_dict(candidate), handle, indent=4, sort_keys=True)
    logger.info(f"Wrote certificate for {candidate.host!r} to {file_path}")


def read_certificate(file_path: str):
    try:
        with open(file_path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ExpressionParseError(f"{file_path} is not valid JSON: {exc.msg}", position=exc.pos) from exc
    return certificate_from_dict(document)
