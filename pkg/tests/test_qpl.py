from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import oracle
from qkc.qpl import (
    CNOT, HALT, NOT, REPAUX, ROT, RUNAUX, ConditionSpec, FuelExhausted, Halted, Instr, Invalid,
    InvalidProgram, MachineSpec, assemble, decode_program, run, step_bound,
)
from qkc.qstate import PureState, basis_state, tensor_power

W3 = MachineSpec(3)
N1 = ConditionSpec(1)


def test_operand_width():
    assert [MachineSpec(w).operand_width for w in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]


def test_run_examples():
    assert run(W3, "1111", N1, 10) == Halted(basis_state(1, "0"), 1)
    assert run(W3, "0001111", N1, 10) == Halted(PureState(1, [Fraction(3, 5), Fraction(4, 5)]), 2)
    assert run(W3, "10001111", N1, 10) == Halted(basis_state(1, "1"), 2)


def test_decode_errors():
    assert run(W3, "1001", N1, 10) == Invalid("truncated")
    assert run(W3, "11110", N1, 10) == Invalid("trailing")
    assert run(W3, "0111111", N1, 10) == Invalid("operand")
    # CNOT with equal control and target
    assert run(W3, "11000001111", N1, 10) == Invalid("operand")
    assert run(W3, "111011111", N1, 10) == Invalid("aux")


def test_cnot_program():
    prog = assemble([Instr(NOT, (0,)), Instr(CNOT, (0, 1))], MachineSpec(4), 2)
    assert run(MachineSpec(4), prog, ConditionSpec(2), 10).output == basis_state(2, "11")


def test_entangled_output_rejected():
    # ROT q0; CNOT q0 q1 leaves qubit 0 entangled with qubit 1
    prog = assemble([Instr(ROT, (0,)), Instr(CNOT, (0, 1))], W3, 1)
    assert run(W3, prog, N1, 10) == Invalid("entangled")


def test_fuel():
    assert run(W3, "0001111", N1, 1) == FuelExhausted()
    assert isinstance(run(W3, "0001111", N1, 2), Halted)


def test_cloning_runs():
    cond = ConditionSpec(1, 2, "0001111")
    res = run(W3, "111011111", cond, 20)
    r = PureState(1, [Fraction(3, 5), Fraction(4, 5)])
    assert res.output == tensor_power(r, 2)
    assert res.steps == 6
    W6 = MachineSpec(6)
    p1 = assemble([Instr(NOT, (0,))], W6, 1)
    res = run(W6, "111011111", ConditionSpec(1, 4, p1), 40)
    assert res.output == basis_state(4, "1111")


def test_aux_restrictions():
    assert run(W3, "111011111", ConditionSpec(1, 2, "111011111"), 20) == Invalid("nested")
    # RUNAUX 2 shifts NOT q1 to qubit 3 >= W
    assert run(W3, "11100" + "10" + "1111", ConditionSpec(1, None, "10011111"), 20) == Invalid("offset")


def test_uncond_header():
    U = MachineSpec(3, "uncond")
    prog = assemble([], U, 1)
    assert decode_program(prog, U).header_n == 1
    assert run(U, prog, N1, 10).output == basis_state(1, "0")
    prog2 = assemble([], U, 2)
    assert run(U, prog2, N1, 10).output == basis_state(2, "00")


instr = st.one_of(
    st.builds(lambda q: Instr(ROT, (q,)), st.integers(0, 3)),
    st.builds(lambda q: Instr(NOT, (q,)), st.integers(0, 3)),
    st.builds(lambda q, d: Instr(CNOT, (q, (q + d) % 4)), st.integers(0, 3), st.integers(1, 3)),
    st.builds(lambda d: Instr(RUNAUX, (d,)), st.integers(0, 3)),
    st.just(Instr(REPAUX)),
)


@given(st.lists(instr, max_size=8), st.sampled_from(["cond-n", "uncond"]))
def test_assemble_decode_roundtrip(instrs, mode):
    spec = MachineSpec(4, mode)
    bits = assemble(instrs, spec, 2)
    prog = decode_program(bits, spec)
    assert list(prog.instructions) == instrs + [Instr(HALT)]
    # every proper prefix and every extension is rejected
    for cut in range(len(bits)):
        with pytest.raises(InvalidProgram):
            decode_program(bits[:cut], spec)
    with pytest.raises(InvalidProgram):
        decode_program(bits + "0", spec)


@given(st.lists(instr, max_size=6), st.integers(1, 3))
def test_step_bound_holds(instrs, m):
    spec = MachineSpec(4)
    cond = ConditionSpec(1, m, "0001111")
    bits = assemble(instrs, spec, 1)
    res = run(spec, bits, cond, 10 ** 6)
    if isinstance(res, Halted):
        assert res.steps <= step_bound(bits, cond)


@pytest.mark.parametrize("W,n,m,aux,mode,L", [
    (3, 1, None, "", "cond-n", 10),
    (4, 2, None, "", "cond-n", 11),
    (3, 1, 2, "0001111", "cond-n", 11),
    (2, 1, None, "", "cond-n", 10),
    (3, 1, None, "", "uncond", 11),
])
def test_engine_matches_oracle(W, n, m, aux, mode, L):
    spec, cond = MachineSpec(W, mode), ConditionSpec(n, m, aux)
    for bits in oracle.all_bits(L):
        want = oracle.execute(bits, W, n, m, aux, mode)
        got = run(spec, bits, cond, 10 ** 6)
        if want is None:
            assert not isinstance(got, Halted), bits
        else:
            assert isinstance(got, Halted), (bits, got)
            assert oracle.same_state(got.output, want[0]) and got.steps == want[1], bits


def test_output_sign_canonical():
    for bits in oracle.all_bits(10):
        got = run(W3, bits, N1, 100)
        if isinstance(got, Halted):
            first = next(a for a in got.output.amps if a)
            assert first.re > 0 and not first.im
