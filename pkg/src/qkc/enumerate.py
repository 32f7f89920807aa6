"""Enumerate halting programs and persist the program -> output table.

Two schedulers produce the same canonical table:

* :func:`dovetail` runs every bit string of length <= max_len in interleaved
  stages (stage k executes step i of candidate k-i+1).
* :func:`sweep` walks the decoding tree, so only prefixes that can still decode
  are explored, and shares simulation work between programs with a common
  prefix.  Top-level subtrees are farmed out to worker processes.
"""

from __future__ import annotations

import hashlib
import json
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator

from .codes import check_bits
from .qpl import (
    CNOT, HALT, NOT, REPAUX, ROT, RUNAUX, ConditionSpec, Execution, Halted, Instr,
    InvalidProgram, MachineSpec, OPCODES, _MARK, apply_op, decode_aux, expand_aux,
    extract_output, mode_header,
)
from .qstate import PureState

TABLE_VERSION = 1
DEFAULT_BUDGET = 1 << 24


class BudgetError(RuntimeError):
    """A request would enumerate more candidates than the configured budget."""


class TableError(ValueError):
    """A table file is malformed, inconsistent, or fails its digest."""


def candidate_budget() -> int:
    raw = os.environ.get("QKC_BUDGET")
    if raw:
        try:
            return int(raw)
        except ValueError:
            raise BudgetError(f"QKC_BUDGET is not an integer: {raw!r}") from None
    return DEFAULT_BUDGET


def check_budget(max_len: int, budget: int | None = None) -> None:
    budget = candidate_budget() if budget is None else budget
    if (1 << (max_len + 1)) > budget:
        raise BudgetError(f"max_len={max_len} needs 2^{max_len + 1} candidates; budget is {budget}")


def default_fuel(max_len: int, cond: ConditionSpec) -> int:
    return 4 * max_len + cond.copies * max_len


@dataclass(frozen=True)
class HaltRecord:
    bits: str
    n: int
    output: PureState
    steps: int

    @property
    def length(self) -> int:
        return len(self.bits)


def _order(rec: HaltRecord):
    return (len(rec.bits), rec.bits)


@dataclass(frozen=True)
class HaltTable:
    spec: MachineSpec
    cond: ConditionSpec
    max_len: int
    fuel: int
    records: tuple = field(default=())

    def restrict(self, max_len: int) -> "HaltTable":
        """The table for a smaller length bound (programs halt within their length)."""
        if max_len > self.max_len:
            raise ValueError("cannot extend a table by restriction")
        recs = tuple(r for r in self.records if r.length <= max_len)
        return HaltTable(self.spec, self.cond, max_len, self.fuel, recs)

    def outputs(self) -> list[PureState]:
        """Distinct outputs, each with its first (shortest) program's order."""
        seen = {}
        for r in self.records:
            seen.setdefault(r.output, r)
        return [r.output for r in seen.values()]

    def shortest_programs(self) -> dict:
        """Map each distinct output state to its first record in canonical order."""
        seen = {}
        for r in self.records:
            seen.setdefault(r.output, r)
        return seen

    def manifest(self) -> dict:
        return {
            "W": self.spec.W, "mode": self.spec.mode, "n": self.cond.n, "m": self.cond.m,
            "aux": self.cond.aux, "max_len": self.max_len, "fuel": self.fuel,
            "version": TABLE_VERSION, "digest": table_digest(self.records),
        }

    def __len__(self):
        return len(self.records)


# dovetailing -----------------------------------------------------------------------


def candidates(max_len: int) -> Iterator[str]:
    """All nonempty bit strings up to ``max_len`` in length-lexicographic order."""
    for length in range(1, max_len + 1):
        for tup in product("01", repeat=length):
            yield "".join(tup)


def dovetail_iter(spec: MachineSpec, cond: ConditionSpec, max_len: int, fuel: int | None = None,
                  budget: int | None = None) -> Iterator[HaltRecord]:
    """Yield halt records in the order the staged schedule discovers them.

    At stage k the k-th candidate is admitted and every admitted, still running
    candidate executes one more step, so candidate j performs step k-j+1.
    """
    check_budget(max_len, budget)
    fuel = default_fuel(max_len, cond) if fuel is None else fuel
    pending = candidates(max_len)
    active: deque = deque()
    exhausted = False
    while True:
        if not exhausted:
            bits = next(pending, None)
            if bits is None:
                exhausted = True
            else:
                active.append(Execution(spec, bits, cond))
        if exhausted and not active:
            return
        survivors = deque()
        for ex in active:
            if ex.done:
                continue
            if ex.steps >= fuel:
                continue
            res = ex.step()
            if res is None:
                survivors.append(ex)
            elif isinstance(res, Halted) and res.output.n == cond.out_qubits:
                yield HaltRecord(ex.bits, cond.n, res.output, res.steps)
        active = survivors


def dovetail(spec: MachineSpec, cond: ConditionSpec, max_len: int, fuel: int | None = None,
             budget: int | None = None) -> HaltTable:
    fuel = default_fuel(max_len, cond) if fuel is None else fuel
    if max_len < 1:
        return HaltTable(spec, cond, max(max_len, 0), fuel, ())
    recs = sorted(dovetail_iter(spec, cond, max_len, fuel, budget), key=_order)
    return HaltTable(spec, cond, max_len, fuel, tuple(recs))


# decoding-tree sweep -----------------------------------------------------------------


def _choices(spec: MachineSpec):
    """Every decodable instruction other than HALT, with its bit encoding."""
    W = spec.W
    out = []
    for q in range(W):
        out.append(Instr(ROT, (q,)))
    for q in range(W):
        out.append(Instr(NOT, (q,)))
    for q in range(W):
        for r in range(W):
            if q != r:
                out.append(Instr(CNOT, (q, r)))
    for d in range(W):
        out.append(Instr(RUNAUX, (d,)))
    out.append(Instr(REPAUX))
    return [(ins, ins.encode(spec)) for ins in out]


class _Sweeper:
    def __init__(self, spec: MachineSpec, cond: ConditionSpec, max_len: int, fuel: int):
        self.spec = spec
        self.cond = cond
        self.max_len = max_len
        self.fuel = fuel
        self.halt_bits = OPCODES[HALT]
        self.choices = _choices(spec)
        self.header = mode_header(spec, cond.n)
        try:
            self.aux_body = decode_aux(cond.aux, spec)
        except InvalidProgram:
            self.aux_body = None
        self.out = cond.out_qubits

    def _expand(self, ins: Instr):
        """Micro-ops for one instruction, or None if it cannot run."""
        if ins.op in (RUNAUX, REPAUX):
            if self.aux_body is None:
                return None
            n = self.cond.n
            offsets = [ins.args[0] * n] if ins.op == RUNAUX else \
                [k * n for k in range(self.cond.copies)]
            ops = [(_MARK, ())]
            try:
                for off in offsets:
                    ops.extend(expand_aux(self.aux_body, off, self.spec.W))
            except InvalidProgram:
                return None
            return ops
        return [(ins.op, ins.args)]

    def roots(self):
        v = [0] * (1 << self.spec.W)
        v[0] = 1
        return [(self.header, v, 0)]

    def children(self, node):
        bits, v, steps = node
        for ins, enc in self.choices:
            nb = bits + enc
            if len(nb) + len(self.halt_bits) > self.max_len:
                continue
            ops = self._expand(ins)
            if ops is None or steps + len(ops) + 1 > self.fuel:
                continue
            nv = v
            for op, args in ops:
                if op != _MARK:
                    nv = apply_op(nv, self.spec.W, op, args)
            yield nb, nv, steps + len(ops)

    def halt(self, node, sink):
        bits, v, steps = node
        full = bits + self.halt_bits
        if len(full) > self.max_len or steps + 1 > self.fuel or self.out > self.spec.W:
            return
        out = extract_output(v, self.spec.W, self.out)
        if out is not None:
            sink.append(HaltRecord(full, self.cond.n, out, steps + 1))

    def walk(self, node, sink):
        stack = [node]
        while stack:
            cur = stack.pop()
            self.halt(cur, sink)
            stack.extend(self.children(cur))
        return sink


def _sweep_task(args):
    spec, cond, max_len, fuel, node = args
    return _Sweeper(spec, cond, max_len, fuel).walk(node, [])


def sweep(spec: MachineSpec, cond: ConditionSpec, max_len: int, fuel: int | None = None,
          workers: int = 1, budget: int | None = None) -> HaltTable:
    """Exhaustive table built by walking the decoding tree."""
    fuel = default_fuel(max_len, cond) if fuel is None else fuel
    if max_len < 1:
        return HaltTable(spec, cond, max(max_len, 0), fuel, ())
    check_budget(max_len, budget)
    sw = _Sweeper(spec, cond, max_len, fuel)
    recs: list = []
    if workers <= 1:
        for root in sw.roots():
            sw.walk(root, recs)
    else:
        # the root itself is handled here; its subtrees go to workers
        tasks = []
        for root in sw.roots():
            sw.halt(root, recs)
            tasks.extend((spec, cond, max_len, fuel, child) for child in sw.children(root))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_sweep_task, tasks):
                recs.extend(part)
    recs.sort(key=_order)
    return HaltTable(spec, cond, max_len, fuel, tuple(recs))


def build_table(spec: MachineSpec, cond: ConditionSpec, max_len: int, fuel: int | None = None,
                workers: int = 1, scheduler: str = "sweep") -> HaltTable:
    if scheduler == "dovetail":
        return dovetail(spec, cond, max_len, fuel)
    if scheduler == "sweep":
        return sweep(spec, cond, max_len, fuel, workers)
    raise ValueError(f"unknown scheduler {scheduler!r}")


_TABLE_CACHE: dict = {}


def cached_table(spec: MachineSpec, cond: ConditionSpec, max_len: int) -> HaltTable:
    """Sweep with default fuel, reusing any larger cached table for the same machine."""
    key = (spec, cond)
    have = _TABLE_CACHE.get(key)
    if have is not None and have.max_len >= max_len:
        want_fuel = default_fuel(max_len, cond)
        if have.fuel >= want_fuel:
            recs = tuple(r for r in have.restrict(max_len).records if r.steps <= want_fuel)
            return HaltTable(spec, cond, max_len, want_fuel, recs)
    table = sweep(spec, cond, max_len)
    if have is None or have.max_len < max_len:
        _TABLE_CACHE[key] = table
    return table


# persistence -------------------------------------------------------------------------


def _record_obj(rec: HaltRecord) -> dict:
    st = rec.output.to_json()
    obj = {"bits": rec.bits, "steps": rec.steps, "state": st["amps"]}
    if "norm2" in st:
        obj["norm2"] = st["norm2"]
    return obj


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def table_digest(records) -> str:
    h = hashlib.sha256()
    for rec in records:
        h.update(_dumps(_record_obj(rec)).encode())
        h.update(b"\n")
    return h.hexdigest()


def dump_table(t: HaltTable) -> str:
    lines = [_dumps(t.manifest())]
    lines.extend(_dumps(_record_obj(r)) for r in t.records)
    return "\n".join(lines) + "\n"


def save_table(t: HaltTable, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dump_table(t))


def load_table(path) -> HaltTable:
    with open(path, encoding="ascii") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    if not lines:
        raise TableError("empty table file")
    try:
        man = json.loads(lines[0])
        raw = [json.loads(ln) for ln in lines[1:]]
    except json.JSONDecodeError as exc:
        raise TableError(f"malformed JSON: {exc}") from None
    if man.get("version") != TABLE_VERSION:
        raise TableError(f"unsupported table version {man.get('version')!r}")
    try:
        spec = MachineSpec(int(man["W"]), man["mode"])
        cond = ConditionSpec(int(man["n"]), man.get("m"), man.get("aux", ""))
        max_len, fuel = int(man["max_len"]), int(man["fuel"])
    except (KeyError, TypeError, ValueError) as exc:
        raise TableError(f"bad manifest: {exc}") from None
    h = hashlib.sha256()
    for obj in raw:
        h.update(_dumps(obj).encode())
        h.update(b"\n")
    if h.hexdigest() != man.get("digest"):
        raise TableError("digest mismatch")
    recs = []
    for obj in raw:
        try:
            bits = check_bits(obj["bits"])
            state = PureState.from_json({"n": cond.out_qubits, "amps": obj["state"],
                                         **({"norm2": obj["norm2"]} if "norm2" in obj else {})})
            recs.append(HaltRecord(bits, cond.n, state, int(obj["steps"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise TableError(f"bad record {obj!r}: {exc}") from None
        if len(bits) > max_len:
            raise TableError(f"record {bits} longer than manifest max_len={max_len}")
    if [_order(r) for r in recs] != sorted(_order(r) for r in recs):
        raise TableError("records not in canonical order")
    return HaltTable(spec, cond, max_len, fuel, tuple(recs))
