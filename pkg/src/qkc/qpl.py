"""The reference machine: a prefix-free binary program language over a qubit workspace.

Opcode table (prefix-free)::

    0       ROT q       rotation [[3/5,-4/5],[4/5,3/5]] on qubit q
    10      NOT q
    110     CNOT q r    control q, target r (q != r)
    11100   RUNAUX d    run the auxiliary program with its qubits shifted by d*n
    11101   REPAUX      run the auxiliary program m times at offsets 0, n, ..., (m-1)n
    1111    HALT

Operands are fixed width ``ceil(log2 W)``.  A program is accepted only if it
decodes to an instruction list ending in HALT with no bit left over, so the
accepted set is prefix-free by construction.

In unconditional mode the program starts with ``encode_prime(numeral(n))``.
Auxiliary programs are always read without that header and may not contain
RUNAUX or REPAUX.

The simulator keeps the workspace as an integer vector; the true amplitudes are
that vector divided by ``5**k`` after ``k`` rotations, and the scale cancels when
the output is normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .codes import CodeError, check_bits, decode_prime, encode_prime, number, numeral
from .qstate import MAX_QUBITS, PureState
from .ring import CRing, ONE, RingReal

ROT, NOT, CNOT, RUNAUX, REPAUX, HALT = "ROT", "NOT", "CNOT", "RUNAUX", "REPAUX", "HALT"
OPCODES = {ROT: "0", NOT: "10", CNOT: "110", RUNAUX: "11100", REPAUX: "11101", HALT: "1111"}
ARITY = {ROT: 1, NOT: 1, CNOT: 2, RUNAUX: 1, REPAUX: 0, HALT: 0}
# executed but leaves the workspace untouched
_MARK = "MARK"


@dataclass(frozen=True)
class MachineSpec:
    W: int
    mode: str = "cond-n"

    def __post_init__(self):
        if self.W < 1 or self.W > MAX_QUBITS:
            raise ValueError(f"workspace width must be in 1..{MAX_QUBITS}, got {self.W}")
        if self.mode not in ("cond-n", "uncond"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def default(cls, n: int, mode: str = "cond-n") -> "MachineSpec":
        return cls(n + 2, mode)

    @property
    def operand_width(self) -> int:
        return (self.W - 1).bit_length()

    def operand(self, q: int) -> str:
        w = self.operand_width
        return format(q, f"0{w}b") if w else ""

    def to_json(self) -> dict:
        return {"W": self.W, "mode": self.mode}

    @classmethod
    def from_json(cls, obj: dict) -> "MachineSpec":
        return cls(int(obj["W"]), obj.get("mode", "cond-n"))


@dataclass(frozen=True)
class ConditionSpec:
    n: int
    m: int | None = None
    aux: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")
        check_bits(self.aux)

    @property
    def copies(self) -> int:
        return self.m or 1

    @property
    def out_qubits(self) -> int:
        return self.n * self.copies

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "aux": self.aux}


class Instr(NamedTuple):
    op: str
    args: tuple = ()

    def encode(self, spec: MachineSpec) -> str:
        return OPCODES[self.op] + "".join(spec.operand(a) for a in self.args)


@dataclass(frozen=True)
class Program:
    raw: str
    instructions: tuple
    header_n: int | None = None

    @property
    def consumed(self) -> int:
        return len(self.raw)

    @property
    def uses_aux(self) -> bool:
        return any(i.op in (RUNAUX, REPAUX) for i in self.instructions)


class InvalidProgram(ValueError):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


@dataclass(frozen=True)
class Halted:
    output: PureState
    steps: int


@dataclass(frozen=True)
class Invalid:
    reason: str


@dataclass(frozen=True)
class FuelExhausted:
    pass


def _read_opcode(bits: str, pos: int) -> tuple[str, int]:
    def bit(k):
        if pos + k >= len(bits):
            raise InvalidProgram("truncated", f"opcode at bit {pos}")
        return bits[pos + k]

    if bit(0) == "0":
        return ROT, pos + 1
    if bit(1) == "0":
        return NOT, pos + 2
    if bit(2) == "0":
        return CNOT, pos + 3
    if bit(3) == "1":
        return HALT, pos + 4
    return (RUNAUX if bit(4) == "0" else REPAUX), pos + 5


def decode_body(bits: str, spec: MachineSpec, pos: int = 0) -> tuple:
    """Decode instructions from ``pos`` through HALT, requiring exact consumption."""
    w = spec.operand_width
    out = []
    while True:
        op, pos = _read_opcode(bits, pos)
        args = []
        for _ in range(ARITY[op]):
            if pos + w > len(bits):
                raise InvalidProgram("truncated", f"operand at bit {pos}")
            q = int(bits[pos:pos + w], 2) if w else 0
            if q >= spec.W:
                raise InvalidProgram("operand", f"qubit {q} >= W={spec.W}")
            args.append(q)
            pos += w
        if op == CNOT and args[0] == args[1]:
            raise InvalidProgram("operand", "CNOT control equals target")
        out.append(Instr(op, tuple(args)))
        if op == HALT:
            if pos != len(bits):
                raise InvalidProgram("trailing", f"{len(bits) - pos} unread bit(s)")
            return tuple(out)


def mode_header(spec: MachineSpec, n: int) -> str:
    return encode_prime(numeral(n)) if spec.mode == "uncond" else ""


def decode_program(bits: str, spec: MachineSpec) -> Program:
    """Decode ``bits`` or raise :class:`InvalidProgram`."""
    check_bits(bits)
    header_n = None
    pos = 0
    if spec.mode == "uncond":
        try:
            payload, pos = decode_prime(bits)
        except CodeError:
            raise InvalidProgram("truncated", "length header") from None
        header_n = number(payload)
        if header_n < 1 or header_n > spec.W:
            raise InvalidProgram("header", f"n={header_n} not in 1..W")
    return Program(bits, decode_body(bits, spec, pos), header_n)


def assemble(instructions, spec: MachineSpec, n: int | None = None) -> str:
    """Inverse of decoding: instruction list (HALT appended if missing) to bits."""
    instructions = list(instructions)
    if not instructions or instructions[-1].op != HALT:
        instructions.append(Instr(HALT))
    head = mode_header(spec, n) if spec.mode == "uncond" else ""
    return head + "".join(i.encode(spec) for i in instructions)


def decode_aux(aux: str, spec: MachineSpec) -> tuple:
    try:
        body = decode_body(aux, spec)
    except InvalidProgram as exc:
        raise InvalidProgram("aux", str(exc)) from None
    if any(i.op in (RUNAUX, REPAUX) for i in body):
        raise InvalidProgram("nested", "aux program uses RUNAUX/REPAUX")
    return body


# workspace primitives --------------------------------------------------------------


def apply_op(v: list, W: int, op: str, args: tuple) -> list:
    """Apply one primitive to an integer-scaled workspace vector, returning a new vector."""
    if op == ROT:
        m = 1 << (W - 1 - args[0])
        out = v[:]
        for i in range(len(v)):
            if not i & m:
                a, b = v[i], v[i | m]
                if a or b:
                    out[i] = 3 * a - 4 * b
                    out[i | m] = 4 * a + 3 * b
        return out
    if op == NOT:
        m = 1 << (W - 1 - args[0])
        return [v[i ^ m] for i in range(len(v))]
    if op == CNOT:
        mc = 1 << (W - 1 - args[0])
        mt = 1 << (W - 1 - args[1])
        return [v[i ^ mt] if i & mc else v[i] for i in range(len(v))]
    return v


def expand_aux(body: tuple, offset: int, W: int) -> list:
    """Aux instructions shifted by ``offset``; the aux HALT becomes a no-op step."""
    ops = []
    for ins in body:
        if ins.op == HALT:
            ops.append((_MARK, ()))
            continue
        args = tuple(a + offset for a in ins.args)
        if any(a >= W for a in args):
            raise InvalidProgram("offset", f"aux qubit {max(args)} >= W={W}")
        ops.append((ins.op, args))
    return ops


def micro_ops(prog: Program, spec: MachineSpec, cond: ConditionSpec) -> list:
    """Flatten a program into executed steps (aux calls inlined)."""
    n = prog.header_n if prog.header_n is not None else cond.n
    aux_body = decode_aux(cond.aux, spec) if prog.uses_aux else None
    ops = []
    for ins in prog.instructions:
        if ins.op == RUNAUX:
            ops.append((_MARK, ()))
            ops.extend(expand_aux(aux_body, ins.args[0] * n, spec.W))
        elif ins.op == REPAUX:
            ops.append((_MARK, ()))
            for k in range(cond.copies):
                ops.extend(expand_aux(aux_body, k * n, spec.W))
        else:
            ops.append((ins.op, ins.args))
    return ops


def _canonical_front(front: list) -> PureState:
    g = 0
    for x in front:
        g = math.gcd(g, x)
    front = [x // g for x in front]
    first = next(x for x in front if x)
    if first < 0:
        front = [-x for x in front]
    s2 = sum(x * x for x in front)
    root = math.isqrt(s2)
    n = (len(front) - 1).bit_length()
    if root * root == s2:
        amps = [CRing(Fraction(x, root)) for x in front]
        return PureState(n, amps, ONE, check=False)
    # PureState tries a sqrt inside Q(sqrt 2) and otherwise keeps norm2 symbolic
    return PureState(n, [CRing(x) for x in front], RingReal(s2), check=False)


def extract_output(v: list, W: int, out: int) -> PureState | None:
    """The first ``out`` qubits if they factor from the rest, else None.

    The returned state's phase is fixed so its first nonzero amplitude is positive.
    """
    if out == W:
        return _canonical_front(v)
    cols = 1 << (W - out)
    i0 = next(i for i, x in enumerate(v) if x)
    r0, c0 = divmod(i0, cols)
    pivot = v[i0]
    row0 = v[r0 * cols:(r0 + 1) * cols]
    for r in range(1 << out):
        base = r * cols
        a = v[base + c0]
        for c in range(cols):
            if v[base + c] * pivot != a * row0[c]:
                return None
    return _canonical_front([v[r * cols + c0] for r in range(1 << out)])


class Execution:
    """A single program run that can be advanced one instruction at a time."""

    def __init__(self, spec: MachineSpec, bits: str, cond: ConditionSpec):
        self.spec = spec
        self.bits = bits
        self.cond = cond
        self.steps = 0
        self.result = None
        self._ops = []
        self._out = 0
        try:
            prog = decode_program(bits, spec)
            n = prog.header_n if prog.header_n is not None else cond.n
            self._out = n * cond.copies
            if self._out > spec.W:
                raise InvalidProgram("width", f"{self._out} output qubits exceed W={spec.W}")
            self._ops = micro_ops(prog, spec, cond)
        except InvalidProgram as exc:
            self.result = Invalid(exc.reason)
            return
        self._v = [0] * (1 << spec.W)
        self._v[0] = 1

    @property
    def done(self) -> bool:
        return self.result is not None

    @property
    def total_steps(self) -> int:
        return len(self._ops)

    def step(self):
        """Execute one instruction; returns the final result once finished, else None."""
        if self.result is not None:
            return self.result
        op, args = self._ops[self.steps]
        self.steps += 1
        if op == HALT:
            out = extract_output(self._v, self.spec.W, self._out)
            self.result = Halted(out, self.steps) if out is not None else Invalid("entangled")
            return self.result
        if op != _MARK:
            self._v = apply_op(self._v, self.spec.W, op, args)
        return None


def run(spec: MachineSpec, bits: str, cond: ConditionSpec, fuel: int):
    """Run a program to completion; result is Halted, Invalid or FuelExhausted."""
    if fuel < 0:
        raise ValueError("fuel must be nonnegative")
    ex = Execution(spec, bits, cond)
    if ex.done:
        return ex.result
    if ex.total_steps > fuel:
        return FuelExhausted()
    while True:
        res = ex.step()
        if res is not None:
            return res


def step_bound(bits: str, cond: ConditionSpec) -> int:
    """Upper bound on executed steps for an accepted program of this length.

    Every instruction takes at least one bit, and each aux call (at least five
    bits) runs at most ``m * l(aux)`` aux instructions.
    """
    calls = len(bits) // 5
    return len(bits) + calls * cond.copies * len(cond.aux)
