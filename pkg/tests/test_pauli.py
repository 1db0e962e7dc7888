import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ftde.pauli import (
    DimensionError,
    NoSolutionError,
    PauliOperator,
    PauliParseError,
    gf2_rank,
    gf2_row_reduce,
    in_row_span,
    multiply,
    pauli_from_string,
    solve_symplectic,
    symplectic_gram,
    symplectic_product,
)

from conftest import dense_pauli

letters = st.text(alphabet="IXYZ", min_size=1, max_size=4)
signs = st.sampled_from(["", "-", "i", "-i"])


def pauli_pair(n_max=4):
    return st.integers(1, n_max).flatmap(
        lambda n: st.tuples(st.text("IXYZ", min_size=n, max_size=n), st.text("IXYZ", min_size=n, max_size=n))
    )


def test_parse_two_qubit_z_string():
    p = pauli_from_string("ZZI")
    assert (p.x, p.z, p.phase) == (0, 0b011, 0)
    assert list(p.z_bits) == [1, 1, 0]


def test_identity_string():
    p = pauli_from_string("III")
    assert p.is_identity and p.phase == 0


def test_y_is_i_x_z():
    y = pauli_from_string("Y")
    assert np.allclose(y.to_matrix(), 1j * dense_pauli("X") @ dense_pauli("Z"))
    assert np.allclose(y.to_matrix(), dense_pauli("Y"))


@pytest.mark.parametrize("bad, pos", [("XQZ", 1), ("-iXA", 3)])
def test_parse_error_names_position(bad, pos):
    with pytest.raises(PauliParseError, match=f"position {pos}"):
        pauli_from_string(bad)


@pytest.mark.parametrize("bad", ["", "   ", "-", "i"])
def test_parse_rejects_empty(bad):
    with pytest.raises(PauliParseError):
        pauli_from_string(bad)


@given(signs, letters)
def test_matrix_matches_oracle(sign, body):
    assert np.allclose(pauli_from_string(sign + body).to_matrix(), dense_pauli(sign + body))


def test_x_times_z_is_minus_i_y():
    prod = pauli_from_string("X") * pauli_from_string("Z")
    assert str(prod) == "-iY"
    assert np.allclose(prod.to_matrix(), -1j * dense_pauli("Y"))


def test_zzi_times_izz():
    prod = pauli_from_string("ZZI") * pauli_from_string("IZZ")
    assert str(prod) == "ZIZ" and prod.sign_exponent == 0


@given(pauli_pair())
def test_product_matches_dense(pair):
    a, b = pair
    prod = multiply(pauli_from_string(a), pauli_from_string(b))
    assert np.allclose(prod.to_matrix(), dense_pauli(a) @ dense_pauli(b))


@given(pauli_pair(3), st.text("IXYZ", min_size=3, max_size=3))
def test_associative(pair, c):
    a, b = pair
    if len(a) != 3:
        return
    pa, pb, pc = map(pauli_from_string, (a, b, c))
    lhs, rhs = (pa * pb) * pc, pa * (pb * pc)
    assert (lhs.x, lhs.z, lhs.phase) == (rhs.x, rhs.z, rhs.phase)


@given(signs, letters)
def test_inverse(sign, body):
    p = pauli_from_string(sign + body)
    e = p * p.inverse()
    assert e.is_identity and e.phase == 0


def test_identity_is_neutral():
    p = pauli_from_string("-iXYZ")
    e = PauliOperator.identity(3)
    assert str(p * e) == str(p) == str(e * p)


def test_multiply_dimension_mismatch():
    with pytest.raises(DimensionError):
        multiply(pauli_from_string("X"), pauli_from_string("XX"))


@given(pauli_pair())
def test_symplectic_product_is_commutation(pair):
    a, b = pair
    A, B = dense_pauli(a), dense_pauli(b)
    commute = np.allclose(A @ B, B @ A)
    pa, pb = pauli_from_string(a), pauli_from_string(b)
    assert symplectic_product(pa.row, pb.row) == (0 if commute else 1)
    assert pa.commutes(pb) == commute


def test_symplectic_examples():
    zz = pauli_from_string("ZZI").row
    assert symplectic_product(zz, pauli_from_string("XXX").row) == 0
    assert symplectic_product(zz, pauli_from_string("IXI").row) == 1


def test_symplectic_length_errors():
    with pytest.raises(DimensionError):
        symplectic_product([1, 0, 1], [1, 0, 1])
    with pytest.raises(DimensionError):
        symplectic_product([1, 0], [1, 0, 0, 1])


def test_gram_matches_pairwise():
    ops = [pauli_from_string(s).row for s in ["XZI", "ZZI", "IYX", "XXX"]]
    g = symplectic_gram(ops, ops)
    for i, j in itertools.product(range(4), repeat=2):
        assert g[i, j] == symplectic_product(ops[i], ops[j])


def _span_size(m):
    """Oracle: count distinct GF(2) combinations of the rows."""
    rows = [int("".join(map(str, r)), 2) for r in m]
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    return len(span)


bit_matrices = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: st.lists(st.lists(st.integers(0, 1), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


@given(bit_matrices)
def test_gf2_rank_matches_span_oracle(m):
    assert 2 ** gf2_rank(m) == _span_size(m)


@given(bit_matrices, st.booleans())
def test_row_reduce_transform(m, reverse):
    red = gf2_row_reduce(m, reverse=reverse)
    a = np.array(m) % 2
    assert np.array_equal((red.transform.astype(int) @ a) % 2, red.reduced)
    for i, c in enumerate(red.pivots):
        col = red.reduced[:, c]
        assert col[i] == 1 and col.sum() == 1


@given(bit_matrices)
def test_in_row_span_of_row_sum(m):
    a = np.array(m, dtype=np.uint8)
    assert in_row_span(a, a.sum(axis=0) % 2)


def test_solve_symplectic_unit_vectors():
    m = np.array([p.row for p in map(pauli_from_string, ["ZZI", "IZZ"])])
    for e in ([1, 0], [0, 1], [1, 1]):
        x = solve_symplectic(m, e)
        assert [symplectic_product(row, x) for row in m] == e


def test_solve_symplectic_dependent_rows():
    m = np.array([p.row for p in map(pauli_from_string, ["ZZ", "ZZ"])])
    with pytest.raises(NoSolutionError):
        solve_symplectic(m, [1, 0])


def test_embed_and_restrict_round_trip():
    p = pauli_from_string("XZ")
    big = p.embed(4, [3, 1])
    assert big.letters() == "IZIX"
    assert big.restrict([3, 1]).letters() == "XZ"
