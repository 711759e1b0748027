"""
Block-partitioned weighted bi-adjacency matrices of G □ C_2k and G □ K2.

Vertex orders of the circular matrix (copy i of G is vertex i - 1 of C_2k):

    block row i      X-vertices of copy i when i is odd, Y-vertices when i is even
    block column i   Y-vertices of copy i when i is odd, X-vertices when i is even

inside each block the X-vertices follow B's rows and the Y-vertices follow B's columns.
"""

import logging
from typing import List, Union

import numpy as np

from models.bipartite_graph import ProductLabel
from models.certificates import (
    BlockMatrix,
    BlockTag,
    InvolutoryCertificate,
    RowInversePair,
    WeightedBiAdjacency,
)
from modules.errors import PreconditionError
from modules.graph_families import cartesian_product, cycle, k2

logger = logging.getLogger(__name__)

O, I, B, BINV = BlockTag.O, BlockTag.I, BlockTag.B, BlockTag.BINV


def case_for_k(k: int) -> str:
    """case1 for k = 2, otherwise case2/case3/case4 for k = 0/1/2 modulo 3."""
    if k < 2:
        raise PreconditionError(f"Circular products need k >= 2, got {k}")
    if k == 2:
        return "case1"
    return {0: "case2", 1: "case3", 2: "case4"}[k % 3]


def _base_grid(k: int) -> List[List[BlockTag]]:
    size = 2 * k
    grid = [[O] * size for _ in range(size)]
    for i in range(size):
        grid[i][i] = B if i % 2 == 0 else BINV
        grid[(i - 1) % size][i] = I
        grid[(i + 1) % size][i] = I
    return grid


def _set(grid, i: int, j: int, tag: BlockTag) -> None:
    grid[i - 1][j - 1] = tag


def circular_block_matrix(cert: InvolutoryCertificate, k: int) -> BlockMatrix:
    """The 2k x 2k block grid R of host □ C_2k for the case selected by k.

    Raises:
        PreconditionError: If k < 2, or if the field has characteristic 2 and the
            grid has a block with coefficient 2 (the message names that block).
    """
    case = case_for_k(k)
    m = 2 * k
    if case == "case1":
        grid = [
            [B, I, O, BlockTag.TWO_I],
            [I, BlockTag.NEG_BINV, BlockTag.TWO_I, O],
            [O, I, BlockTag.NEG_B, I],
            [I, O, I, BINV],
        ]
    else:
        grid = _base_grid(k)
        if case == "case3":
            _set(grid, 1, m, BlockTag.NEG_I)
            _set(grid, m, 1, BlockTag.NEG_I)
            for i, j in ((1, 2), (4, 3), (m, m - 1), (m - 3, m - 2)):
                _set(grid, i, j, BlockTag.TWO_I)
        elif case == "case4":
            _set(grid, 3, 3, BlockTag.TWO_B)
            _set(grid, m - 2, m - 2, BlockTag.TWO_BINV)
            _set(grid, 1, m, BlockTag.NEG_I)
            _set(grid, m, 1, BlockTag.NEG_I)

    if cert.field.characteristic == 2:
        for i, row in enumerate(grid, start=1):
            for j, tag in enumerate(row, start=1):
                if tag.coefficient == 2:
                    raise PreconditionError(
                        f"Block R_{{{i},{j}}} = {tag} vanishes in characteristic 2 ({case}, k={k})"
                    )

    host = cartesian_product(cert.host, cycle(m))
    xs, ys = cert.B.rows, cert.B.cols
    row_blocks = tuple(
        tuple(ProductLabel(v, i - 1) for v in (xs if i % 2 == 1 else ys)) for i in range(1, m + 1)
    )
    col_blocks = tuple(
        tuple(ProductLabel(v, i - 1) for v in (ys if i % 2 == 1 else xs)) for i in range(1, m + 1)
    )
    logger.debug(f"Circular grid {case} for k={k} over {cert.host!r}")
    return BlockMatrix(tuple(tuple(row) for row in grid), row_blocks, col_blocks, host, case=case, k=k)


def prism_block_matrix(pair: RowInversePair) -> BlockMatrix:
    """[[I_n, C^T], [B, I_m]] with rows (Y of copy 1, X of copy 2) and columns (Y of copy 2, X of copy 1)."""
    host = cartesian_product(pair.host, k2())
    xs, ys = pair.B.rows, pair.B.cols
    row_blocks = (tuple(ProductLabel(y, 0) for y in ys), tuple(ProductLabel(x, 1) for x in xs))
    col_blocks = (tuple(ProductLabel(y, 1) for y in ys), tuple(ProductLabel(x, 0) for x in xs))
    grid = ((I, BlockTag.CT), (B, I))
    return BlockMatrix(grid, row_blocks, col_blocks, host, case="prism")


def instantiate(R: BlockMatrix, source: Union[InvolutoryCertificate, RowInversePair]) -> WeightedBiAdjacency:
    """Substitute concrete matrices for the block tags of R.

    Raises:
        PreconditionError: If a substituted block does not fit its block row and column.
        SupportMismatchError: If the result is not a weighted bi-adjacency matrix of R.host.
    """
    field = source.field
    if isinstance(source, InvolutoryCertificate):
        bases = {"B": source.B.entries, "Binv": source.binv}
    else:
        bases = {"B": source.B.entries, "C^T": np.array(source.C.entries.T)}

    blocks = []
    for i, row in enumerate(R.grid):
        height = len(R.row_blocks[i])
        line = []
        for j, tag in enumerate(row):
            width = len(R.col_blocks[j])
            if tag.base == "O":
                block = field.zeros(height, width)
            elif tag.base == "I":
                if height != width:
                    raise PreconditionError(f"Identity block R_{{{i + 1},{j + 1}}} is not square")
                block = field.identity(height)
            elif tag.base in bases:
                block = bases[tag.base]
            else:
                raise PreconditionError(f"Block {tag} cannot be filled from a {type(source).__name__}")
            if block.shape != (height, width):
                raise PreconditionError(
                    f"Block R_{{{i + 1},{j + 1}}} = {tag} has shape {block.shape}, expected {(height, width)}"
                )
            if tag.coefficient not in (0, 1):
                block = block * field(tag.coefficient)
            line.append(block)
        blocks.append(line)

    entries = np.block(blocks) if blocks else field.zeros(0, 0)
    return WeightedBiAdjacency(R.host, R.rows(), R.cols(), entries, field)
