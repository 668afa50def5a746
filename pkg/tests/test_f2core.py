import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csppke.f2core import (
    ERASED,
    BitVec,
    BudgetError,
    FormatError,
    SparseRowMatrix,
    TriVector,
    apply_erasure_corruption,
    check_expansion,
    matvec,
    neighbor,
    row_or,
    srm_dumps,
    srm_loads,
)
from csppke.rng import stream


# --- BitVec -----------------------------------------------------------------


@given(st.lists(st.integers(0, 1), max_size=200))
def test_bitvec_bits_round_trip(bits):
    v = BitVec.from_bits(bits)
    assert v.to_array().tolist() == bits
    assert v.weight() == sum(bits)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
def test_bitvec_hex_round_trip(bits):
    v = BitVec.from_bits(bits)
    assert BitVec.from_hex(v.to_hex()) == v


@given(st.integers(1, 100), st.integers(0, 2**32))
def test_bitvec_xor_weight(length, seed):
    rng = stream(seed, "bitvec")
    a, b = BitVec.random(length, rng), BitVec.random(length, rng)
    assert (a ^ b).weight() == int((a.to_array() ^ b.to_array()).sum())
    assert (a ^ a).weight() == 0


def test_bitvec_rejects_out_of_range_bits():
    with pytest.raises(ValueError):
        BitVec(3, 0b1000)
    with pytest.raises(IndexError):
        BitVec.from_indices(3, [3])
    with pytest.raises(FormatError):
        BitVec.from_hex("8:zzz")
    with pytest.raises(FormatError):
        BitVec.from_hex("8:012")  # wrong width


# --- neighbor / row_or -------------------------------------------------------


def test_neighbor_on_worked_example(worked_matrix):
    # first constraint touches variables 1 and 3 (1-based), i.e. 0 and 2 here
    assert neighbor(worked_matrix, 0, 0) == 0
    assert neighbor(worked_matrix, 0, 1) == 2
    # last constraint touches variables 1 and 4
    assert neighbor(worked_matrix, 3, 0) == 0
    assert neighbor(worked_matrix, 3, 1) == 3


def test_neighbor_identity_pattern():
    m = SparseRowMatrix(5, 5, 1, [[i] for i in range(5)])
    for i in range(5):
        assert neighbor(m, i, 0) == i


def test_neighbor_bounds():
    m = SparseRowMatrix(2, 4, 2, [[0, 1], [2, 3]])
    with pytest.raises(IndexError):
        neighbor(m, 2, 0)
    with pytest.raises(IndexError):
        neighbor(m, 0, 2)


def test_row_or_disjoint_and_identical():
    disjoint = SparseRowMatrix(2, 8, 3, [[0, 1, 2], [3, 4, 5]])
    assert row_or(disjoint, [0, 1]).weight() == 6
    identical = SparseRowMatrix(2, 8, 3, [[0, 1, 2], [0, 1, 2]])
    assert row_or(identical, [0, 1]).weight() == 3


def test_row_or_worked_example(worked_matrix):
    # union of supports {1,3} and {3,4} is {1,3,4}
    union = row_or(worked_matrix, [0, 1])
    assert union.weight() == 3
    assert union.to_array().tolist() == [1, 0, 1, 1]


def test_row_or_rejects_empty():
    with pytest.raises(ValueError):
        row_or(SparseRowMatrix(1, 2, 1, [[0]]), [])


@given(st.integers(0, 2**32), st.integers(1, 8), st.integers(1, 10), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_row_or_weight_bounds(seed, m, n, k):
    if k > n:
        return
    rng = stream(seed, "row-or-hyp")
    rows = np.sort(rng.random((m, n)).argsort(axis=1)[:, :k], axis=1)
    matrix = SparseRowMatrix(m, n, k, rows)
    subset = [int(i) for i in rng.choice(m, size=int(rng.integers(1, m + 1)), replace=False)]
    weight = row_or(matrix, subset).weight()
    assert k <= weight <= min(n, k * len(subset))


# --- check_expansion ---------------------------------------------------------


def test_expansion_disjoint_rows_pass():
    m = SparseRowMatrix(4, 12, 3, [[0, 1, 2], [3, 4, 5], [6, 7, 8], [9, 10, 11]])
    report = check_expansion(m, gamma=1.0, t=4)
    assert report.passed and report.certified


def test_expansion_identical_rows_counterexample():
    m = SparseRowMatrix(3, 6, 2, [[0, 1], [0, 1], [2, 3]])
    report = check_expansion(m, gamma=0.9, t=2)
    assert not report.passed
    assert report.counterexample == (0, 1)  # hw = 2 < 0.9 * 4


def test_expansion_worked_example(worked_matrix):
    # every pair of the four supports shares at most one variable
    report = check_expansion(worked_matrix, gamma=0.75, t=2)
    assert report.passed and report.certified


@given(st.integers(0, 2**32), st.floats(0.3, 1.0), st.floats(0.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_expansion_monotone_in_gamma_and_t(seed, gamma, shrink):
    rng = stream(seed, "expansion-mono")
    m, n, k = 6, 10, 2
    rows = np.sort(rng.random((m, n)).argsort(axis=1)[:, :k], axis=1)
    matrix = SparseRowMatrix(m, n, k, rows)
    if check_expansion(matrix, gamma, t=3).passed:
        smaller_gamma = gamma * shrink
        assert check_expansion(matrix, smaller_gamma, t=3).passed
        assert check_expansion(matrix, gamma, t=2).passed


def test_expansion_sampled_counterexample_is_true_violation():
    m = SparseRowMatrix(6, 8, 2, [[0, 1]] * 3 + [[2, 3], [4, 5], [6, 7]])
    report = check_expansion(m, gamma=0.9, t=2, mode="sampled", trials=500, rng=stream(0, "s"))
    assert not report.passed and not report.certified
    assert row_or(m, report.counterexample).weight() < 0.9 * 2 * len(report.counterexample)


def test_expansion_sampled_never_certifies():
    m = SparseRowMatrix(2, 4, 2, [[0, 1], [2, 3]])
    report = check_expansion(m, gamma=1.0, t=2, mode="sampled", trials=50, rng=stream(1, "s"))
    assert report.passed and not report.certified


def test_expansion_budget():
    rows = [[i, i + 1] for i in range(30)]
    m = SparseRowMatrix(30, 31, 2, rows)
    with pytest.raises(BudgetError):
        check_expansion(m, gamma=0.5, t=10, budget=1000)


# --- matvec -------------------------------------------------------------------


def dense_matvec_oracle(matrix: SparseRowMatrix, x: BitVec) -> list[int]:
    dense = matrix.to_dense()
    return ((dense @ x.to_array()) % 2).tolist()


def test_matvec_zero_input():
    m = SparseRowMatrix(3, 4, 2, [[0, 1], [1, 2], [2, 3]])
    assert matvec(m, BitVec.zeros(4)).weight() == 0


def test_matvec_permutation_pattern():
    perm = [2, 0, 3, 1]
    m = SparseRowMatrix(4, 4, 1, [[j] for j in perm])
    x = BitVec.from_bits([1, 0, 0, 1])
    assert matvec(m, x).to_array().tolist() == [x.get(j) for j in perm]


def test_matvec_matches_dense_oracle_exhaustively():
    rng = stream(7, "matvec")
    rows = np.sort(rng.random((6, 4)).argsort(axis=1)[:, :2], axis=1)
    m = SparseRowMatrix(6, 4, 2, rows)
    for value in range(16):
        x = BitVec(4, value)
        assert matvec(m, x).to_array().tolist() == dense_matvec_oracle(m, x)


@given(st.integers(0, 2**32), st.integers(1, 8), st.integers(1, 8), st.integers(1, 4))
@settings(max_examples=30, deadline=None)
def test_matvec_matches_dense_oracle_random(seed, m, n, k):
    if k > n:
        return
    rng = stream(seed, "matvec-hyp")
    rows = np.sort(rng.random((m, n)).argsort(axis=1)[:, :k], axis=1)
    matrix = SparseRowMatrix(m, n, k, rows)
    for value in range(1 << n):
        x = BitVec(n, value)
        assert matvec(matrix, x).to_array().tolist() == dense_matvec_oracle(matrix, x)


def test_matvec_length_mismatch():
    m = SparseRowMatrix(1, 4, 2, [[0, 3]])
    with pytest.raises(ValueError):
        matvec(m, BitVec.zeros(5))


# --- erasure/corruption channel ----------------------------------------------


def test_channel_noiseless_is_identity():
    v = BitVec.random(64, stream(3, "ch"))
    out = apply_erasure_corruption(v, 0.0, 0.0, stream(4, "ch"))
    assert not out.erased_mask().any()
    assert np.array_equal(out.symbols, v.to_array().astype(np.int8))


def test_channel_full_erasure():
    v = BitVec.random(64, stream(5, "ch"))
    out = apply_erasure_corruption(v, 1.0, 0.0, stream(6, "ch"))
    assert out.erased_mask().all()


def test_channel_marginals_monte_carlo():
    length = 100_000
    v = BitVec.random(length, stream(8, "ch"))
    out = apply_erasure_corruption(v, 0.5, 0.5, stream(9, "ch"))
    erased = out.erased_mask()
    assert abs(erased.mean() - 0.5) < 0.01
    survivors = ~erased
    disagree = out.symbols[survivors] != v.to_array().astype(np.int8)[survivors]
    assert abs(disagree.mean() - 0.25) < 0.01  # beta/2 among the non-erased


def test_trivector_fill():
    tv = TriVector(np.array([0, 1, ERASED, ERASED], dtype=np.int8))
    filled = tv.fill_erasures(np.array([1, 1, 1, 0], dtype=np.uint8))
    assert filled.tolist() == [0, 1, 1, 0]
    assert tv.known_mask().tolist() == [True, True, False, False]


# --- SparseRowMatrix validation + SRM format ----------------------------------


def test_matrix_rejects_bad_rows():
    with pytest.raises(ValueError):
        SparseRowMatrix(1, 4, 2, [[1, 1]])  # not strictly increasing
    with pytest.raises(ValueError):
        SparseRowMatrix(1, 4, 2, [[2, 4]])  # column out of range
    with pytest.raises(ValueError):
        SparseRowMatrix(2, 4, 2, [[0, 1]])  # wrong shape


def test_srm_round_trip(worked_matrix):
    text = srm_dumps(worked_matrix)
    assert text.startswith("SRM 4 4 2\n") and text.endswith("\n")
    again = srm_loads(text)
    assert again == worked_matrix
    assert srm_dumps(again) == text


def test_srm_errors_name_lines():
    with pytest.raises(FormatError, match="line 1"):
        srm_loads("SRM x 4 2\n")
    with pytest.raises(FormatError, match="line 3"):
        srm_loads("SRM 2 4 2\n0 1\n0\n")
    with pytest.raises(FormatError, match="line 2"):
        srm_loads("SRM 1 4 2\n")
