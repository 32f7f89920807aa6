from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qkc.qstate import (
    CNOT, GATES, H, R, S, X, PureState, StateError, apply_gate, basis_state, equal_up_to_phase,
    extend_to_basis, factor_prefix, fidelity, gram_schmidt, inner, is_orthonormal, is_unitary,
    measure_probs, tensor, tensor_power, zero_state,
)
from qkc.ring import CRing, ONE, RingReal

ZERO1, ONE1 = basis_state(1, "0"), basis_state(1, "1")


def test_gate_algebra():
    assert apply_gate(apply_gate(ZERO1, S, [0]), S, [0]) == PureState(1, [0, -1])
    assert apply_gate(apply_gate(ONE1, S, [0]), S, [0]) == ZERO1
    for s in (ZERO1, ONE1):
        assert apply_gate(apply_gate(s, H, [0]), H, [0]) == s
    assert all(is_unitary(g) for g in GATES.values())
    assert len(GATES) == 5


def test_rotation_fidelity():
    r = apply_gate(ZERO1, R, [0])
    assert r == PureState(1, [Fraction(3, 5), Fraction(4, 5)])
    assert fidelity(ZERO1, r) == Fraction(9, 25)
    assert fidelity(ONE1, r) == Fraction(16, 25)


def test_cnot_and_qubit_order():
    s = apply_gate(basis_state(2, "10"), CNOT, [0, 1])
    assert s == basis_state(2, "11")
    assert apply_gate(basis_state(2, "00"), X, [1]) == basis_state(2, "01")
    with pytest.raises(StateError):
        apply_gate(s, CNOT, [1, 1])
    with pytest.raises(StateError):
        apply_gate(s, X, [2])


def test_state_validation():
    with pytest.raises(StateError):
        PureState(1, [0, 0])
    with pytest.raises(StateError):
        PureState(1, [1, 0, 0])
    with pytest.raises(StateError):
        PureState(1, [1, 1], norm2=RingReal(3))


def test_symbolic_norm():
    s = PureState(1, [1, 1])
    assert s.norm2 == ONE  # 1/sqrt2 lies in the field
    t = PureState(1, [1, 2])
    assert fidelity(t, t) == 1
    assert fidelity(t, ZERO1) == Fraction(1, 5)


def test_json_roundtrip():
    s = apply_gate(apply_gate(zero_state(2), H, [0]), R, [1])
    assert PureState.from_json(s.to_json()) == s
    t = PureState(1, [1, 2])
    assert PureState.from_json(t.to_json()) == t


def test_phase_sensitive_equality():
    assert PureState(1, [0, -1]) != ONE1
    assert equal_up_to_phase(PureState(1, [0, -1]), ONE1)


gate_seq = st.lists(st.tuples(st.sampled_from(["X", "R", "H", "S", "CNOT"]), st.integers(0, 2),
                              st.integers(1, 2)), max_size=6)


def _build(seq, n=3):
    s = zero_state(n)
    for name, q, d in seq:
        g = GATES[name]
        if g.arity > n:
            continue
        q %= n
        qs = [q] if g.arity == 1 else [q, (q + 1 + d % (n - 1)) % n]
        s = apply_gate(s, g, qs)
    return s


@given(gate_seq)
def test_gates_preserve_norm(seq):
    s = _build(seq)
    assert sum(measure_probs(s), RingReal(0)) == 1


@given(gate_seq, gate_seq)
def test_tensor_factors(a, b):
    x, y = _build(a, 2), _build(b, 1)
    split = factor_prefix(tensor(x, y), 2)
    assert split is not None
    assert equal_up_to_phase(split[0], x) and equal_up_to_phase(split[1], y)


def test_bell_state_does_not_factor():
    bell = apply_gate(apply_gate(zero_state(2), H, [0]), CNOT, [0, 1])
    assert factor_prefix(bell, 1) is None
    assert len(extend_to_basis([bell], 2)) == 4


@given(st.lists(gate_seq, min_size=1, max_size=5))
def test_gram_schmidt_orthonormal(seqs):
    states = [_build(s) for s in seqs]
    ortho = gram_schmidt(states)
    assert is_orthonormal(ortho)
    full = extend_to_basis(ortho, 3)
    assert len(full) == 8 and is_orthonormal(full)


def test_gram_schmidt_examples():
    r = apply_gate(ZERO1, R, [0])
    assert gram_schmidt([ZERO1, r]) == [ZERO1, ONE1]
    assert gram_schmidt([ZERO1, ZERO1]) == [ZERO1]
    rr = tensor(r, r)
    out = gram_schmidt([basis_state(2, "00"), rr])
    assert fidelity(out[0], out[1]) == 0


def test_tensor_power_and_inner():
    r = apply_gate(ZERO1, R, [0])
    assert tensor_power(r, 2) == PureState(2, [Fraction(9, 25), Fraction(12, 25),
                                               Fraction(12, 25), Fraction(16, 25)])
    assert inner(ZERO1, ONE1) == CRing(0)
