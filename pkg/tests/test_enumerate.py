import json
from fractions import Fraction

import pytest

import oracle
from qkc.codes import is_prefix_free, kraft_sum
from qkc.enumerate import (
    BudgetError, TableError, check_budget, default_fuel, dovetail, dovetail_iter, dump_table,
    load_table, save_table, sweep,
)
from qkc.qpl import ConditionSpec, MachineSpec, run
from qkc.qstate import PureState, basis_state

W3, N1 = MachineSpec(3), ConditionSpec(1)


def test_examples():
    t = dovetail(W3, N1, 4)
    assert [(r.bits, r.output) for r in t.records] == [("1111", basis_state(1, "0"))]
    t7 = dovetail(W3, N1, 7)
    rec = {r.bits: r.output for r in t7.records}
    assert rec["0001111"] == PureState(1, [Fraction(3, 5), Fraction(4, 5)])
    assert len(dovetail(W3, N1, 0)) == 0 and len(sweep(W3, N1, 0)) == 0


@pytest.mark.parametrize("W,n,m,aux,mode,L", [
    (3, 1, None, "", "cond-n", 10),
    (4, 2, None, "", "cond-n", 10),
    (3, 1, 3, "0001111", "cond-n", 10),
    (3, 1, None, "", "uncond", 10),
    (1, 1, None, "", "cond-n", 9),
])
def test_schedulers_match_oracle(W, n, m, aux, mode, L):
    spec, cond = MachineSpec(W, mode), ConditionSpec(n, m, aux)
    brute = oracle.brute_table(L, W, n, m, aux, mode)
    a, b = dovetail(spec, cond, L), sweep(spec, cond, L)
    assert dump_table(a) == dump_table(b)
    assert [r.bits for r in a.records] == sorted(brute, key=lambda x: (len(x), x))
    for r in a.records:
        st, steps = brute[r.bits]
        assert oracle.same_state(r.output, st) and r.steps == steps
        assert run(spec, r.bits, cond, r.steps).output == r.output


def test_dovetail_stage_order():
    # "1111" is candidate 30 and halts on its first step, before any 7-bit program is admitted
    found = [r.bits for r in dovetail_iter(W3, N1, 8)]
    assert found[0] == "1111"
    assert set(found) == {r.bits for r in sweep(W3, N1, 8).records}


@pytest.mark.parametrize("L", [8, 12])
def test_prefix_free_and_kraft(L):
    t = sweep(W3, N1, L)
    words = [r.bits for r in t.records]
    assert is_prefix_free(words)
    assert kraft_sum(len(w) for w in words) <= 1


def test_parallel_determinism():
    a = sweep(MachineSpec(4), ConditionSpec(2), 12, workers=1)
    b = sweep(MachineSpec(4), ConditionSpec(2), 12, workers=3)
    assert dump_table(a) == dump_table(b)


def test_fuel_default_and_cutoff():
    cond = ConditionSpec(1, 3, "0001111")
    assert default_fuel(9, cond) == 36 + 27
    full = sweep(W3, cond, 9)
    tight = sweep(W3, cond, 9, fuel=3)
    assert {r.bits for r in tight.records} == {r.bits for r in full.records if r.steps <= 3}
    assert dump_table(tight) == dump_table(dovetail(W3, cond, 9, fuel=3))


def test_restrict():
    big = sweep(W3, N1, 11)
    assert dump_table(big.restrict(8)).splitlines()[1:] == dump_table(sweep(W3, N1, 8)).splitlines()[1:]


def test_save_load(tmp_path):
    t = sweep(W3, N1, 7)
    p = tmp_path / "t.jsonl"
    save_table(t, p)
    assert load_table(p) == t
    lines = p.read_text().splitlines()
    assert json.loads(lines[1]) == {"bits": "1111", "steps": 1,
                                    "state": [["1/1+0/1*r2", "0/1+0/1*r2"], ["0/1+0/1*r2", "0/1+0/1*r2"]]}


def test_load_errors(tmp_path):
    t = sweep(W3, N1, 8)
    text = dump_table(t)
    p = tmp_path / "t.jsonl"
    # truncated file
    p.write_text("\n".join(text.splitlines()[:-1]) + "\n")
    with pytest.raises(TableError, match="digest"):
        load_table(p)
    # manifest claims max_len 7 while a record has 8 bits
    man = json.loads(text.splitlines()[0])
    man["max_len"] = 7
    p.write_text("\n".join([json.dumps(man)] + text.splitlines()[1:]) + "\n")
    with pytest.raises(TableError, match="longer"):
        load_table(p)
    man["max_len"], man["version"] = 8, 99
    p.write_text("\n".join([json.dumps(man)] + text.splitlines()[1:]) + "\n")
    with pytest.raises(TableError, match="version"):
        load_table(p)
    # malformed ring literal with a matching digest
    bad = text.replace('"1/1+0/1*r2"', '"1/1+x*r2"', 1)
    recs = bad.splitlines()[1:]
    import hashlib
    h = hashlib.sha256("".join(r + "\n" for r in recs).encode()).hexdigest()
    man = json.loads(text.splitlines()[0])
    man["digest"] = h
    p.write_text("\n".join([json.dumps(man)] + recs) + "\n")
    with pytest.raises(TableError, match="bad record"):
        load_table(p)


def test_budget(monkeypatch):
    with pytest.raises(BudgetError):
        check_budget(24)
    check_budget(23)
    monkeypatch.setenv("QKC_BUDGET", "64")
    with pytest.raises(BudgetError):
        sweep(W3, N1, 6)
    sweep(W3, N1, 5)
