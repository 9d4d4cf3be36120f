import itertools
import math
from decimal import Decimal, localcontext

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crfhmc.errors import (
    AllZeroRowError,
    InvalidTableError,
    LengthMismatchError,
    UnknownSymbolError,
)
from crfhmc.tables import (
    LOG_ZERO,
    Alphabet,
    argmax_lowest,
    as_table,
    expected_hamming_loss,
    hamming_loss,
    log_sum_exp,
    normalize_log,
)

finite_logs = st.floats(min_value=-300.0, max_value=300.0, allow_nan=False, allow_infinity=False)


def decimal_log_sum_exp(values) -> Decimal:
    """50 位精度的 log Σ exp(v)"""
    with localcontext() as ctx:
        ctx.prec = 50
        return sum(Decimal(v).exp() for v in values).ln()


# ====================
# log_sum_exp
# ====================

def test_log_sum_exp_small_integers():
    assert log_sum_exp([math.log(1), math.log(3)]) == pytest.approx(math.log(4), abs=1e-15)


def test_log_sum_exp_empty_is_log_zero():
    assert log_sum_exp([]) == LOG_ZERO


def test_log_sum_exp_only_negative_infinity():
    assert log_sum_exp([LOG_ZERO, LOG_ZERO]) == LOG_ZERO


def test_log_sum_exp_large_values_do_not_overflow():
    result = log_sum_exp([1000.0] * 50)
    assert math.isfinite(result)
    assert abs(Decimal(result) - decimal_log_sum_exp([1000.0] * 50)) < Decimal("1e-12")


@given(st.lists(finite_logs, min_size=1, max_size=40))
@settings(max_examples=200, deadline=None)
def test_log_sum_exp_matches_arbitrary_precision(values):
    expected = decimal_log_sum_exp(values)
    assert abs(Decimal(log_sum_exp(values)) - expected) <= Decimal("1e-12") * max(Decimal(1), abs(expected))


@given(st.lists(finite_logs, min_size=1, max_size=10))
@settings(deadline=None)
def test_log_sum_exp_ignores_zero_weights(values):
    assert log_sum_exp(values + [LOG_ZERO]) == pytest.approx(log_sum_exp(values), abs=1e-12)


# ====================
# normalize_log
# ====================

def test_normalize_log_symmetric_row():
    np.testing.assert_allclose(normalize_log([math.log(2), math.log(2)]), [math.log(0.5)] * 2, atol=1e-15)


def test_normalize_log_keeps_point_mass():
    row = normalize_log([0.0, LOG_ZERO])
    assert row[0] == 0.0
    assert row[1] == LOG_ZERO


def test_normalize_log_softmax():
    with localcontext() as ctx:
        ctx.prec = 50
        exps = [Decimal(v).exp() for v in (1, 2, 3)]
        expected = [float(e / sum(exps)) for e in exps]
    np.testing.assert_allclose(np.exp(normalize_log([1.0, 2.0, 3.0])), expected, rtol=1e-14)


def test_normalize_log_rejects_all_zero_row():
    with pytest.raises(AllZeroRowError):
        normalize_log([LOG_ZERO, LOG_ZERO])


def test_normalize_log_result_is_read_only():
    row = normalize_log([0.0, 1.0])
    with pytest.raises(ValueError):
        row[0] = 1.0


@given(st.lists(st.floats(min_value=-50.0, max_value=50.0), min_size=1, max_size=8))
@settings(deadline=None)
def test_normalize_log_is_idempotent_and_preserves_argmax(values):
    once = normalize_log(values)
    twice = normalize_log(once)
    assert np.max(np.abs(once - twice)) <= 1e-12
    assert math.fsum(np.exp(once)) == pytest.approx(1.0, abs=1e-12)
    assert once[int(np.argmax(values))] == once.max()


# ====================
# hamming_loss
# ====================

@pytest.mark.parametrize(
    "a, b, expected",
    [
        ([0, 1, 1], [0, 1, 1], 0),
        ([0, 1, 1], [0, 1, 0], 1),
        ([0, 0], [1, 1], 2),
    ],
)
def test_hamming_loss_examples(a, b, expected):
    assert hamming_loss(a, b) == expected


def test_hamming_loss_length_mismatch():
    with pytest.raises(LengthMismatchError):
        hamming_loss([0, 1], [0])


@pytest.mark.parametrize("length, size", [(1, 3), (2, 3), (3, 2), (3, 3)])
def test_hamming_loss_is_a_metric(length, size):
    seqs = list(itertools.product(range(size), repeat=length))
    for a in seqs:
        for b in seqs:
            d = hamming_loss(a, b)
            assert (d == 0) == (a == b)
            assert d == hamming_loss(b, a)
            for c in seqs:
                assert hamming_loss(a, c) <= d + hamming_loss(b, c)


def test_expected_hamming_loss_of_point_masses():
    rows = np.log([[1.0, 0.0], [0.25, 0.75]])
    assert expected_hamming_loss(rows, [0, 1]) == pytest.approx(0.25)
    assert expected_hamming_loss(rows, [1, 0]) == pytest.approx(1.75)


# ====================
# Alphabet / 表格
# ====================

def test_alphabet_index_and_symbol_are_inverse():
    alphabet = Alphabet(("N", "V", "DET"))
    assert alphabet.size == 3
    for i, s in enumerate(alphabet.symbols):
        assert alphabet.index(s) == i
        assert alphabet.symbol(alphabet.index(s)) == s
    assert alphabet.decode(alphabet.encode(["DET", "N"])) == ("DET", "N")


def test_alphabet_rejects_duplicates_and_empty():
    with pytest.raises(InvalidTableError):
        Alphabet(("a", "a"))
    with pytest.raises(InvalidTableError):
        Alphabet(())


def test_alphabet_unknown_symbol():
    with pytest.raises(UnknownSymbolError, match="'z'"):
        Alphabet(("a", "b")).encode(["a", "z"])
    with pytest.raises(UnknownSymbolError):
        Alphabet(("a", "b")).check_seq([0, 2])


def test_as_table_validation():
    with pytest.raises(InvalidTableError, match="NaN"):
        as_table([0.0, float("nan")], (2,))
    with pytest.raises(InvalidTableError, match=r"\+inf"):
        as_table([0.0, float("inf")], (2,))
    with pytest.raises(InvalidTableError, match="generalized"):
        as_table([0.0, LOG_ZERO], (2,), allow_neg_inf=False)
    with pytest.raises(InvalidTableError, match="shape"):
        as_table([[0.0, 1.0]], (2, 2), name="V[0]")
    table = as_table([[0.0, LOG_ZERO]], (1, 2))
    assert not table.flags.writeable


def test_argmax_lowest_breaks_ties_towards_lowest_index():
    assert argmax_lowest(np.log([0.5, 0.5])) == 0
    assert argmax_lowest(np.log([0.2, 0.4, 0.4])) == 1
    assert argmax_lowest(np.log([0.3, 0.7])) == 1


def test_argmax_lowest_merges_near_ties():
    assert argmax_lowest(np.log([0.5 - 4e-13, 0.5 + 4e-13])) == 0
    assert argmax_lowest(np.log([0.5 - 4e-12, 0.5 + 4e-12])) == 1


def test_argmax_lowest_works_row_by_row():
    rows = np.log([[[0.5, 0.5], [0.3, 0.7]], [[0.9, 0.1], [0.5 - 4e-13, 0.5 + 4e-13]]])
    picked = argmax_lowest(rows)
    assert picked.shape == (2, 2)
    assert picked.tolist() == [[0, 1], [0, 0]]
