"""
Tests for the block grids of G □ C_2k and G □ K2 and their instantiation.
"""

import pytest

from models.certificates import BlockTag
from modules.block_matrices import case_for_k, circular_block_matrix, instantiate, prism_block_matrix
from modules.certificates import complete_bipartite_involutory, hypercube_involutory, pair_from_involutory, star_pair
from modules.errors import PreconditionError
from modules.fields import get_field
from modules.graph_families import cartesian_product, complete_bipartite, cycle, k2
from modules.rank_engine import exact_rank

Q = get_field("Q")


@pytest.mark.parametrize("k, case", [(2, "case1"), (3, "case2"), (4, "case3"), (5, "case4"),
                                     (6, "case2"), (7, "case3"), (8, "case4")])
def test_case_selection(k, case):
    assert case_for_k(k) == case


def test_k_below_two_is_rejected():
    with pytest.raises(PreconditionError):
        case_for_k(1)


def test_case1_grid():
    R = circular_block_matrix(complete_bipartite_involutory(2, Q), 2)
    assert R.as_text() == [
        ["B", "I", "O", "2I"],
        ["I", "-Binv", "2I", "O"],
        ["O", "I", "-B", "I"],
        ["I", "O", "I", "Binv"],
    ]
    assert R.host == cartesian_product(complete_bipartite(2, 2), cycle(4))


@pytest.mark.parametrize("k", [3, 6])
def test_case2_is_the_plain_circulant(k):
    R = circular_block_matrix(complete_bipartite_involutory(2, Q), k)
    assert R.shape == (2 * k, 2 * k)
    assert all(R.nonzero_blocks_in_row(i) == 3 for i in range(1, 2 * k + 1))
    assert all(R.nonzero_blocks_in_col(j) == 3 for j in range(1, 2 * k + 1))
    assert R.count(BlockTag.B) == k and R.count(BlockTag.BINV) == k


def test_case3_and_case4_modifications():
    R = circular_block_matrix(complete_bipartite_involutory(2, Q), 4)
    assert R.tag(1, 8) is BlockTag.NEG_I and R.tag(8, 1) is BlockTag.NEG_I
    assert R.count(BlockTag.TWO_I) == 4
    R = circular_block_matrix(complete_bipartite_involutory(2, Q), 5)
    assert R.tag(3, 3) is BlockTag.TWO_B
    assert R.tag(8, 8) is BlockTag.TWO_BINV


def test_characteristic_two_names_the_vanishing_block():
    cert = hypercube_involutory(1, get_field("GFp:2"))
    with pytest.raises(PreconditionError, match=r"R_\{1,4\}"):
        circular_block_matrix(cert, 2)
    assert circular_block_matrix(cert, 3).case == "case2"


def test_prism_grid_and_instantiation():
    pair = star_pair(3, Q)
    R = prism_block_matrix(pair)
    assert R.as_text() == [["I", "C^T"], ["B", "I"]]
    assert R.host == cartesian_product(pair.host, k2())
    M = instantiate(R, pair)
    assert M.shape == (4, 4)
    assert exact_rank(M.entries, Q).corank == 1


def test_circular_instantiation_has_corank_n():
    cert = complete_bipartite_involutory(2, Q)
    M = instantiate(circular_block_matrix(cert, 2), cert)
    assert M.shape == (8, 8)
    assert exact_rank(M.entries, Q).corank == 4


def test_prism_grid_cannot_be_filled_from_an_involutory_certificate():
    cert = complete_bipartite_involutory(2, Q)
    R = prism_block_matrix(pair_from_involutory(cert))
    with pytest.raises(PreconditionError):
        instantiate(R, cert)
