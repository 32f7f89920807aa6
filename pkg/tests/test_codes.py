from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qkc.codes import (
    INF, CodeError, ceil_neg_log2, decode_bar, decode_prime, encode_bar, encode_prime,
    is_prefix_free, kraft_sum, number, numeral, pair, shannon_fano_lengths, unpair,
)
from qkc.ring import RingReal, SQRT2

bits = st.text(alphabet="01", max_size=14)


def test_numeral_order():
    assert [numeral(k) for k in range(7)] == ["", "0", "1", "00", "01", "10", "11"]
    assert number("00") == 3


def test_bar_examples():
    assert encode_bar("010") == "1001101"
    assert encode_bar("") == "0"
    assert encode_bar("1") == "110"


def test_prime_and_pair_examples():
    # header bar(numeral(3)) = bar("00") = "10001"
    assert encode_prime("101") == "10001" + "101"
    assert unpair(pair("1", "")) == ("1", "")


@given(bits)
def test_bar_roundtrip_and_length(x):
    code = encode_bar(x)
    assert len(code) == 2 * len(x) + 1
    assert decode_bar(code + "0110") == (x, len(code))


@given(bits, bits)
def test_pair_roundtrip(x, y):
    assert unpair(pair(x, y)) == (x, y)


@given(bits)
def test_prime_roundtrip(x):
    code = encode_prime(x)
    assert decode_prime(code) == (x, len(code))


@given(st.lists(bits, max_size=12, unique=True))
def test_encodings_prefix_free(words):
    assert is_prefix_free([encode_bar(w) for w in words])
    assert is_prefix_free([encode_prime(w) for w in words])


def test_prefix_free_detection():
    assert not is_prefix_free(["0", "01"])
    assert not is_prefix_free(["1", "1"])
    assert is_prefix_free(["0", "10", "11"])


def test_decode_errors():
    for bad in ["", "1", "100", "1000"]:
        with pytest.raises(CodeError):
            decode_bar(bad)
    with pytest.raises(CodeError):
        decode_prime("1000110")
    with pytest.raises(CodeError):
        encode_bar("012")


def test_kraft():
    assert kraft_sum([1, 2, 2]) == 1
    assert kraft_sum([]) == 0
    with pytest.raises(ValueError):
        kraft_sum([-1])


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=1))
def test_ceil_neg_log2_brackets(f):
    t = ceil_neg_log2(f)
    assert f >= Fraction(1, 2 ** t)
    assert t == 0 or f < Fraction(1, 2 ** (t - 1))


def test_ceil_neg_log2_special():
    assert ceil_neg_log2(0) == INF
    assert ceil_neg_log2(Fraction(9, 25)) == 2
    assert ceil_neg_log2(Fraction(16, 25)) == 1
    assert ceil_neg_log2(Fraction(1, 2)) == 1
    # 1/sqrt2 lies in [1/2, 1)
    assert ceil_neg_log2(RingReal(0, Fraction(1, 2))) == 1
    assert ceil_neg_log2(0.25 + 1e-15) == 2
    with pytest.raises(ValueError):
        ceil_neg_log2(Fraction(3, 2))
    with pytest.raises(ValueError):
        ceil_neg_log2(SQRT2)


@given(st.lists(st.integers(1, 50), min_size=1, max_size=8))
def test_shannon_fano_kraft(weights):
    total = sum(weights)
    probs = [Fraction(w, total) for w in weights]
    lengths = shannon_fano_lengths(probs)
    assert kraft_sum(lengths) <= 1


def test_shannon_fano_zero_probability():
    assert shannon_fano_lengths([Fraction(1, 2), 0, Fraction(1, 4)]) == [1, INF, 2]
    with pytest.raises(ValueError):
        shannon_fano_lengths([Fraction(3, 4), Fraction(1, 2)])
