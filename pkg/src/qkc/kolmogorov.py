"""Machine-relative complexity of pure states.

The complexity of a target is the least ``l(p) + ceil(-log2 F)`` over halting
programs ``p``, where ``F`` is the fidelity between the program's output and
the target.  Everything here is relative to one fixed :class:`MachineSpec`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .codes import INF, ceil_neg_log2
from .enumerate import HaltTable, cached_table, check_budget, default_fuel, dovetail_iter
from .qpl import HALT, NOT, ConditionSpec, Instr, MachineSpec, assemble, step_bound
from .qstate import PureState, basis_state, fidelity
from .ring import RingReal


@dataclass(frozen=True)
class KEstimate:
    value: int | float
    witness: str | None
    directly_computed: PureState | None
    approximation_part: int | float
    exact: bool
    machine: MachineSpec | None = None

    @property
    def finite(self) -> bool:
        return self.value != INF

    def to_json(self) -> dict:
        fin = self.finite
        return {
            "value": self.value if fin else None,
            "witness": self.witness,
            "approx": self.approximation_part if fin else None,
            "exact": self.exact,
            "machine": self.machine.to_json() if self.machine else None,
            "output": self.directly_computed.to_json() if self.directly_computed else None,
        }


def _infinite(spec, exact=False) -> KEstimate:
    return KEstimate(INF, None, None, INF, exact, spec)


def _stable(table: HaltTable, value) -> bool:
    """Whether the table holds every program that could still beat ``value``."""
    if value == INF or table.max_len < value:
        return False
    worst = step_bound("0" * int(value), table.cond)
    return table.fuel >= worst


def k_quantum(target: PureState, table: HaltTable) -> KEstimate:
    if target.n != table.cond.out_qubits:
        raise ValueError(f"target has {target.n} qubits; table outputs {table.cond.out_qubits}")
    best = None
    best_val = INF
    for rec in _first_programs(table):
        if rec.length >= best_val:
            break
        approx = ceil_neg_log2(fidelity(rec.output, target))
        val = rec.length + approx
        if val < best_val:
            best_val, best = val, (rec, approx)
    if best is None:
        return _infinite(table.spec)
    rec, approx = best
    return KEstimate(best_val, rec.bits, rec.output, approx, _stable(table, best_val), table.spec)


def _first_programs(table: HaltTable):
    # the first record of each output in canonical order is its shortest program,
    # and the strict-improvement scan only ever accepts such records
    return table.shortest_programs().values()


def basis_program(x: str, spec: MachineSpec, n: int) -> str:
    """NOT on every set bit of ``x``, then HALT."""
    instrs = [Instr(NOT, (q,)) for q, c in enumerate(x) if c == "1"]
    return assemble(instrs + [Instr(HALT)], spec, n)


def basis_bound(target: PureState, spec: MachineSpec, cond: ConditionSpec) -> tuple[int, str]:
    """Best value reachable by a classical-basis program, with its basis label."""
    best, label = INF, None
    for i in target.support:
        x = format(i, f"0{target.n}b")
        prog = basis_program(x, spec, cond.n)
        val = len(prog) + ceil_neg_log2(fidelity(basis_state(target.n, x), target))
        if val < best:
            best, label = val, x
    return best, label


def k_exact(target: PureState, spec: MachineSpec, cond: ConditionSpec,
            budget: int | None = None) -> KEstimate:
    """True machine minimum: enumerate every program no longer than the basis bound."""
    if not target.exact:
        raise ValueError("k_exact needs an exact-ring target")
    if target.n != cond.out_qubits:
        raise ValueError(f"target has {target.n} qubits; condition outputs {cond.out_qubits}")
    if cond.out_qubits > spec.W:
        raise ValueError(f"{cond.out_qubits} output qubits exceed W={spec.W}")
    bound, _ = basis_bound(target, spec, cond)
    check_budget(bound, budget)
    table = cached_table(spec, cond, bound)
    est = k_quantum(target, table)
    # longer programs pay at least their length, which already exceeds the bound
    return KEstimate(est.value, est.witness, est.directly_computed, est.approximation_part,
                     True, spec)


def k_classical(x: str, table: HaltTable) -> KEstimate:
    return k_quantum(basis_state(len(x), x), table)


def universal_weight(table: HaltTable, n: int) -> dict:
    """``2**-K(x)`` for every n-bit ``x`` with a finite value in the table."""
    out = {}
    if not table.records:
        return out
    for i in range(1 << n):
        x = format(i, f"0{n}b")
        est = k_classical(x, table)
        if est.finite:
            out[x] = Fraction(1, 1 << est.value)
    return out


# measurement-driven approximation ------------------------------------------------------


def sample_size(n: int, epsilon: float, alpha: float) -> int:
    """Least ``k`` with ``2n - eps**2 k log2(e) / 6 <= log2(alpha)``."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return math.ceil(6 * (2 * n - math.log2(alpha)) / (epsilon ** 2 * math.log2(math.e)))


def chernoff_tail(epsilon: float, q: float, k: int) -> float:
    """Two-sided bound ``2 exp(-eps**2 q k / 3)`` on a relative deviation above ``eps``."""
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    if not 0 <= q <= 1:
        raise ValueError("q must lie in [0, 1]")
    if k < 0:
        raise ValueError("k must be nonnegative")
    return 2 * math.exp(-epsilon ** 2 * q * k / 3)


@dataclass(frozen=True)
class MCConfig:
    epsilon: float
    alpha: float
    k: int
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon < 1 or not 0 < self.alpha < 1:
            raise ValueError("epsilon and alpha must lie in (0, 1)")
        if self.k < 0:
            raise ValueError("k must be nonnegative")

    @classmethod
    def sized(cls, n: int, epsilon: float, alpha: float, seed: int = 0) -> "MCConfig":
        return cls(epsilon, alpha, sample_size(n, epsilon, alpha), seed)

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "alpha": self.alpha, "k": self.k, "seed": self.seed}


_SCALE = 1 << 64


def uniform_draw(seed: int, bits: str, trial: int) -> int:
    """Counter-based 64-bit draw; read it as ``u / 2**64``."""
    h = hashlib.blake2b(f"{seed}|{bits}|{trial}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def _threshold(q) -> int:
    """Least integer t with ``t >= q * 2**64``, so ``u < q 2**64`` iff ``u < t``."""
    q = RingReal.coerce(q)
    target = q * _SCALE
    t = int(float(q) * _SCALE)
    while RingReal(t) < target:
        t += 1
    while t > 0 and RingReal(t - 1) >= target:
        t -= 1
    return t


def bernoulli_count(q, k: int, seed: int, bits: str) -> int:
    """Number of successes in ``k`` simulated projective tests with pass probability ``q``."""
    t = _threshold(q)
    return sum(1 for j in range(k) if uniform_draw(seed, bits, j) < t)


@dataclass
class MCResult:
    estimate: KEstimate
    trace: list = field(default_factory=list)
    bound: int = 0


def mc_approximate(target: PureState, spec: MachineSpec, cond: ConditionSpec, mc: MCConfig,
                   *, max_len: int | None = None, fuel: int | None = None,
                   allow_undersized: bool = False) -> MCResult:
    """Estimate the complexity from simulated measurement statistics.

    Programs are discovered by dovetailing up to the classical-basis bound (or
    ``max_len``).  For each one, ``m`` of ``k`` simulated tests pass and the
    candidate is ``l(p) - log2(m / ((1 + eps) k))``.  The running minimum is
    kept with least-length tie-breaking and reported rounded up.
    """
    if not target.exact:
        raise ValueError("mc_approximate needs an exact-ring target")
    need = sample_size(target.n, mc.epsilon, mc.alpha)
    if mc.k < need and not allow_undersized:
        raise ValueError(f"k={mc.k} is below the required sample size {need}")
    bound = basis_bound(target, spec, cond)[0] if max_len is None else max_len
    fuel = default_fuel(bound, cond) if fuel is None else fuel
    slack = 1 + Fraction(mc.epsilon)
    best_key = None
    best = None
    trace = []
    for rec in dovetail_iter(spec, cond, bound, fuel):
        q = fidelity(rec.output, target)
        m = bernoulli_count(q, mc.k, mc.seed, rec.bits)
        entry = {"bits": rec.bits, "length": rec.length, "q": str(RingReal.coerce(q)),
                 "k": mc.k, "m": m, "candidate": None}
        if m:
            ratio = Fraction(m) / (slack * mc.k)
            # compare 2**candidate exactly: 2**l / ratio
            key = (Fraction(1 << rec.length) / ratio, rec.length, rec.bits)
            cand = rec.length + ceil_neg_log2(ratio)
            entry["candidate"] = cand
            if best_key is None or key < best_key:
                best_key, best = key, (rec, ratio, cand)
        trace.append(entry)
    if best is None:
        return MCResult(_infinite(spec), trace, bound)
    rec, ratio, cand = best
    est = KEstimate(cand, rec.bits, rec.output, ceil_neg_log2(ratio), False, spec)
    return MCResult(est, trace, bound)
