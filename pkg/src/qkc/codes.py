"""Self-delimiting codes, pairing, Kraft sums and Shannon-Fano code lengths.

Bit strings are plain Python ``str`` objects over ``"0"``/``"1"``.  Naturals and
strings are identified through the bijective numbering
``0 <-> "", 1 <-> "0", 2 <-> "1", 3 <-> "00", ...``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

from .ring import RingReal

INF = math.inf

# fidelity slack used only when a state could not be represented exactly
FLOAT_TOLERANCE = 2.0 ** -40


class CodeError(ValueError):
    """Raised when a code word cannot be decoded."""


def check_bits(x: str) -> str:
    if not isinstance(x, str) or x.strip("01"):
        raise CodeError(f"not a bit string: {x!r}")
    return x


def numeral(k: int) -> str:
    """The k-th binary string in length-lexicographic order."""
    if k < 0:
        raise ValueError("numerals are defined for nonnegative integers")
    return bin(k + 1)[3:]


def number(x: str) -> int:
    """Inverse of :func:`numeral`."""
    return int("1" + check_bits(x), 2) - 1


def encode_bar(x: str) -> str:
    """``1 x1 x1 x2 x2 ... xn (not xn)``; the empty string maps to ``"0"``."""
    check_bits(x)
    if not x:
        return "0"
    body = "".join(c + c for c in x[:-1])
    last = x[-1]
    return "1" + body + last + ("0" if last == "1" else "1")


def decode_bar(bits: str, pos: int = 0) -> tuple[str, int]:
    """Decode one bar code word starting at ``pos``; returns (payload, next position)."""
    if pos >= len(bits):
        raise CodeError("truncated bar code")
    if bits[pos] == "0":
        return "", pos + 1
    pos += 1
    out = []
    while True:
        if pos + 2 > len(bits):
            raise CodeError("truncated bar code")
        a, b = bits[pos], bits[pos + 1]
        out.append(a)
        pos += 2
        if a != b:
            return "".join(out), pos


def encode_prime(x: str) -> str:
    """Standard self-delimiting code: bar code of the length numeral, then ``x``."""
    check_bits(x)
    return encode_bar(numeral(len(x))) + x


def decode_prime(bits: str, pos: int = 0) -> tuple[str, int]:
    header, pos = decode_bar(bits, pos)
    n = number(header)
    if pos + n > len(bits):
        raise CodeError("truncated prime code payload")
    return bits[pos:pos + n], pos + n


def pair(x: str, y: str) -> str:
    return encode_prime(x) + encode_prime(y)


def unpair(bits: str) -> tuple[str, str]:
    x, pos = decode_prime(bits)
    y, pos = decode_prime(bits, pos)
    if pos != len(bits):
        raise CodeError("trailing bits after pair")
    return x, y


def is_prefix_free(words: Iterable[str]) -> bool:
    """True iff no word is a proper prefix of another (duplicates count as a violation)."""
    ordered = sorted(words)
    # in sorted order a prefix is always immediately followed by one of its extensions
    return not any(b.startswith(a) for a, b in zip(ordered, ordered[1:]))


def kraft_sum(lengths: Iterable[int]) -> Fraction:
    total = Fraction(0)
    for length in lengths:
        if length < 0:
            raise ValueError(f"negative code length {length}")
        total += Fraction(1, 1 << length)
    return total


def ceil_neg_log2(f) -> int | float:
    """Least integer t >= 0 with ``f >= 2**-t``.

    Exact for ring and rational inputs.  ``f == 0`` gives ``INF``.  A Python
    float is treated as an inexact fidelity and compared with slack
    :data:`FLOAT_TOLERANCE`.
    """
    if isinstance(f, float):
        return _ceil_neg_log2_float(f)
    f = RingReal.coerce(f)
    s = f.sign()
    if s == 0:
        return INF
    if s < 0 or f > 1:
        raise ValueError(f"fidelity out of range: {f}")
    if not f.b:
        num, den = f.a.numerator, f.a.denominator
        t = max(0, den.bit_length() - num.bit_length())
    else:
        t = max(0, math.ceil(-math.log2(float(f))))
    while f * (1 << t) < 1:
        t += 1
    while t > 0 and f * (1 << (t - 1)) >= 1:
        t -= 1
    return t


def _ceil_neg_log2_float(f: float) -> int | float:
    if f < -FLOAT_TOLERANCE or f > 1 + FLOAT_TOLERANCE:
        raise ValueError(f"fidelity out of range: {f}")
    if f <= FLOAT_TOLERANCE:
        return INF
    t = max(0, math.ceil(-math.log2(f)) - 1)
    while f < 2.0 ** -t - FLOAT_TOLERANCE:
        t += 1
    return t


def shannon_fano_lengths(probs: Sequence) -> list:
    """Code lengths ``ceil(-log2 p)``; zero probabilities get ``INF``."""
    ring_probs = []
    for p in probs:
        p = p if isinstance(p, float) else RingReal.coerce(p)
        if p < 0 or p > 1:
            raise ValueError(f"probability out of range: {p}")
        ring_probs.append(p)
    total = sum(ring_probs, RingReal(0)) if not any(isinstance(p, float) for p in ring_probs) \
        else sum(float(p) for p in ring_probs)
    if total > 1 + (FLOAT_TOLERANCE if isinstance(total, float) else 0):
        raise ValueError("probabilities sum to more than 1")
    return [ceil_neg_log2(p) for p in ring_probs]
