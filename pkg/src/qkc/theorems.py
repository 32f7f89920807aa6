"""Executable audits of the checkable content behind the main results.

Each audit returns an :class:`AuditReport`.  Only claims that hold literally on
the reference machine are asserted (counting bounds, exact fidelities, witness
program lengths).  Constants hidden by asymptotic notation are measured and
reported as observations instead.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

from .codes import INF, ceil_neg_log2
from .enumerate import HaltTable
from .kolmogorov import k_classical, k_exact, k_quantum
from .qpl import (
    HALT, REPAUX, ConditionSpec, Halted, Instr, InvalidProgram, MachineSpec, assemble,
    decode_program, run,
)
from .qstate import (
    CNOT as CNOT_GATE, H, R, S, X, PureState, apply_gate, basis_state, extend_to_basis,
    fidelity, gram_schmidt, is_orthonormal, tensor, tensor_power, zero_state,
)
from .ring import ONE, RingReal


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, (Fraction, RingReal)):
        return str(x)
    if isinstance(x, PureState):
        return x.to_json()
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, MachineSpec):
        return x.to_json()
    return x


@dataclass
class Claim:
    claim: str
    bound: object
    measured: object
    passed: bool


@dataclass
class AuditReport:
    name: str
    parameters: dict
    asserted: list = field(default_factory=list)
    observations: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    def check(self, claim: str, bound, measured, passed: bool) -> bool:
        self.asserted.append(Claim(claim, bound, measured, bool(passed)))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.asserted)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "parameters": _jsonable(self.parameters),
            "passed": self.passed,
            "asserted": [
                {"claim": c.claim, "bound": _jsonable(c.bound), "measured": _jsonable(c.measured),
                 "passed": c.passed} for c in self.asserted
            ],
            "observations": _jsonable(self.observations),
            "artifacts": _jsonable(self.artifacts),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def render(self) -> str:
        rows = [("claim", "bound", "measured", "verdict")]
        for c in self.asserted:
            rows.append((c.claim, _short(c.bound), _short(c.measured), "pass" if c.passed else "FAIL"))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = [f"audit {self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for r in rows:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        for k, v in self.observations.items():
            lines.append(f"observed {k}: {_short(v)}")
        return "\n".join(lines)


def _short(x) -> str:
    s = json.dumps(_jsonable(x), sort_keys=True)
    return s if len(s) <= 60 else s[:57] + "..."


def _labels(n: int):
    return [format(i, f"0{n}b") for i in range(1 << n)]


def _check_table(table: HaltTable, n: int):
    if table.cond.out_qubits != n:
        raise ValueError(f"table outputs {table.cond.out_qubits} qubits, audit asks for n={n}")


# seeded ring-exact targets -----------------------------------------------------------


def random_ring_targets(n: int, count: int, seed: int, depth: int = 4) -> list[PureState]:
    """States from short seeded gate sequences over X, R, H, S and CNOT applied to zero."""
    rng = random.Random(seed)
    gates = [X, R, H, S] + ([CNOT_GATE] if n > 1 else [])
    out = []
    for _ in range(count):
        s = zero_state(n)
        for _ in range(rng.randint(1, depth)):
            g = rng.choice(gates)
            s = apply_gate(s, g, rng.sample(range(n), g.arity))
        out.append(_canonical_phase(s))
    return out


def _canonical_phase(s: PureState) -> PureState:
    first = s.amps[s.support[0]]
    if first.im or first.re.sign() > 0:
        return s
    return PureState(s.n, [-a for a in s.amps], s.norm2, check=False)


def r_generated_states(n: int) -> list[PureState]:
    """R applied to |0...0> on each single qubit."""
    return [apply_gate(zero_state(n), R, (q,)) for q in range(n)]


def random_orthonormal_basis(n: int, seed: int, depth: int | None = None) -> list[PureState]:
    """Columns of a seeded product of R, NOT and CNOT gates; rational and exactly orthonormal."""
    rng = random.Random(seed)
    depth = 2 * n + 2 if depth is None else depth
    ops = []
    for _ in range(depth):
        kind = rng.choice(["R", "R", "X", "CNOT"] if n > 1 else ["R", "R", "X"])
        if kind == "CNOT":
            ops.append((CNOT_GATE, tuple(rng.sample(range(n), 2))))
        else:
            ops.append((R if kind == "R" else X, (rng.randrange(n),)))
    basis = []
    for x in _labels(n):
        s = basis_state(n, x)
        for g, qs in ops:
            s = apply_gate(s, g, qs)
        basis.append(s)
    return basis


# upper bound ---------------------------------------------------------------------------


def best_basis_fidelity(target: PureState):
    best, label = None, None
    for x in _labels(target.n):
        f = fidelity(basis_state(target.n, x), target)
        if best is None or f > best:
            best, label = f, x
    return best, label


def audit_upper_bound(table: HaltTable, n: int, extra: list | None = None,
                      seed: int = 0, random_count: int = 8) -> AuditReport:
    """Every target stays within ``2n + c_U`` where ``c_U = max_i K(e_i) - n``."""
    _check_table(table, n)
    spec, cond = table.spec, table.cond
    corpus = list(table.outputs())
    corpus += [basis_state(n, x) for x in _labels(n)]
    corpus += r_generated_states(n)
    corpus += random_ring_targets(n, random_count, seed)
    corpus += list(extra or [])
    if not corpus:
        raise ValueError("empty corpus")
    basis_k = {x: k_exact(basis_state(n, x), spec, cond).value for x in _labels(n)}
    c_u = max(basis_k.values()) - n
    rep = AuditReport("upper-bound", {"n": n, "machine": spec, "cond": cond.to_json(),
                                      "max_len": table.max_len, "seed": seed})
    rep.observations["c_U"] = c_u
    rep.observations["basis_K"] = basis_k
    limit = 2 * n + c_u
    worst = 0
    mech_ok = True
    rows = []
    for t in corpus:
        val = k_exact(t, spec, cond).value
        f, label = best_basis_fidelity(t)
        mech_ok &= f * (1 << n) >= 1
        worst = max(worst, val)
        rows.append({"target": t.label(), "K": val, "best_basis": label, "fidelity": f})
    rep.check(f"max K over {len(corpus)} targets <= 2n + c_U", limit, worst, worst <= limit)
    rep.check("some basis fidelity >= 2^-n for every target", Fraction(1, 1 << n),
              min(r["fidelity"] for r in rows), mech_ok)
    rep.artifacts["targets"] = rows
    return rep


# incompressibility ------------------------------------------------------------------------


def audit_incompressibility_classical(table: HaltTable, n: int, delta: int) -> AuditReport:
    """At least ``2^n (1 - 2^-delta) + 1`` of the n-bit strings have ``K >= n - delta``."""
    _check_table(table, n)
    threshold = n - delta
    if table.max_len < threshold - 1:
        raise ValueError(f"table max_len={table.max_len} cannot certify K >= {threshold}")
    count = 0
    ks = {}
    for x in _labels(n):
        est = k_classical(x, table)
        ks[x] = est.value
        # values beyond max_len are only upper bounds, but all exceed threshold - 1
        if est.value >= threshold:
            count += 1
    stated = (1 << n) * (1 - Fraction(1, 1 << delta)) + 1
    # at most 2^t - 1 programs are shorter than t; none when t <= 0
    bound = (1 << n) - max(0, (1 << threshold) - 1 if threshold >= 0 else 0)
    rep = AuditReport("incompressibility-classical",
                      {"n": n, "delta": delta, "machine": table.spec, "max_len": table.max_len})
    rep.check(f"#{{x : K(x) >= {threshold}}} >= 2^n - (2^(n-delta) - 1)", bound, count,
              count >= bound)
    rep.observations["stated_bound"] = stated
    rep.observations["stated_bound_applies"] = delta <= n
    if delta <= n:
        rep.check(f"#{{x : K(x) >= {threshold}}} >= 2^n(1-2^-delta)+1", stated, count,
                  count >= stated)
    rep.observations["K"] = ks
    return rep


@dataclass
class HardBasis:
    span: list
    completion: list

    @property
    def vectors(self) -> list:
        return self.span + self.completion

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return len(self.span) + len(self.completion)


def construct_hard_basis(table: HaltTable, n: int, below: int | None = None) -> HardBasis:
    """Orthonormal basis whose completion is orthogonal to every short-program output.

    ``below`` restricts to programs shorter than that length (default: whole table).
    """
    _check_table(table, n)
    states = [r.output for r in table.shortest_programs().values()
              if below is None or r.length < below]
    span = gram_schmidt(states)
    if len(span) > 1 << n:
        raise AssertionError("more independent states than the dimension")
    full = extend_to_basis(span, n)
    return HardBasis(span, full[len(span):])


def audit_incompressibility_quantum(basis, table: HaltTable, n: int, c: int) -> AuditReport:
    """At least ``2^n (1 - 2^-c)`` basis vectors have ``K >= n - c``."""
    _check_table(table, n)
    vectors = list(basis)
    if len(vectors) != 1 << n or not is_orthonormal(vectors):
        raise ValueError("input is not an orthonormal basis")
    threshold = n - c
    count = 0
    by_witness: dict = {}
    values = []
    for i, v in enumerate(vectors):
        est = k_quantum(v, table)
        values.append(est.value)
        if est.value >= threshold:
            count += 1
        if est.witness is not None:
            by_witness.setdefault(est.witness, []).append(i)
    bound = (1 << n) * (1 - Fraction(1, 1 << c))
    rep = AuditReport("incompressibility-quantum",
                      {"n": n, "c": c, "machine": table.spec, "max_len": table.max_len})
    rep.check(f"#{{v : K(v) >= {threshold}}} >= 2^n(1-2^-c)", bound, count, count >= bound)
    rep.observations["K"] = values
    # basis vectors that share a directly computed part
    rep.observations["shared_witness"] = {w: ix for w, ix in by_witness.items() if len(ix) > 1}
    return rep


# consistency with direct programs -----------------------------------------------------------


def audit_consistency(table: HaltTable, n: int) -> AuditReport:
    _check_table(table, n)
    first = table.shortest_programs()
    rep = AuditReport("consistency", {"n": n, "machine": table.spec, "max_len": table.max_len})
    gaps = Counter()
    rows = {}
    for x in _labels(n):
        e = basis_state(n, x)
        rec = first.get(e)
        if rec is None:
            continue
        k = k_classical(x, table).value
        gap = rec.length - k
        gaps[gap] += 1
        rows[x] = {"direct_min": rec.length, "K": k, "gap": gap}
        rep.check(f"K({x}) <= direct_min", rec.length, k, k <= rec.length)
    rep.observations["gap_histogram"] = dict(sorted(gaps.items()))
    rep.artifacts["rows"] = rows
    return rep


# sub-additivity ---------------------------------------------------------------------------


def subadditivity_witness(x: str, table: HaltTable) -> AuditReport:
    """The superposition of zero and ``x`` costs at most one bit more than zero."""
    n = len(x)
    if not x or set(x) == {"0"}:
        raise ValueError("x must be a nonzero classical string")
    _check_table(table, n)
    ex = basis_state(n, x)
    zero = zero_state(n)
    amps = [0] * (1 << n)
    amps[0] = amps[int(x, 2)] = 1
    y = PureState(n, amps)
    half = RingReal(Fraction(1, 2))
    fx, f0 = fidelity(y, ex), fidelity(y, zero)
    rep = AuditReport("subadditivity", {"x": x, "n": n, "machine": table.spec,
                                        "max_len": table.max_len})
    rep.check("fidelity(y, x) = 1/2", half, fx, fx == half)
    rep.check("fidelity(y, 0...0) = 1/2", half, f0, f0 == half)
    rep.check("approximation part against x is 1", 1, ceil_neg_log2(fx), ceil_neg_log2(fx) == 1)
    k0 = k_quantum(zero, table)
    ky = k_quantum(y, table)
    kx = k_quantum(ex, table)
    via = INF
    if k0.witness is not None:
        via = len(k0.witness) + ceil_neg_log2(fidelity(k0.directly_computed, y))
    rep.check("K(y) <= K(0...0) + 1", k0.value + 1, ky.value, ky.value <= k0.value + 1)
    rep.check("zero witness reaches y within one bit", k0.value + 1, via, via <= k0.value + 1)
    rep.observations.update({"K(x)": kx.value, "K(y)": ky.value, "K(0)": k0.value,
                             "K(x)-K(y)": kx.value - ky.value})
    rep.artifacts["y"] = y
    rep.artifacts["zero_witness"] = k0.witness
    return rep


def _shift_concat(px: str, py: str, src: MachineSpec, dst: MachineSpec, n: int) -> str | None:
    """p_x followed by p_y moved up by n qubits, re-encoded for the wider machine."""
    try:
        ix = decode_program(px, src).instructions[:-1]
        iy = decode_program(py, src).instructions[:-1]
    except InvalidProgram:
        return None
    shifted = [Instr(i.op, tuple(a + n for a in i.args)) for i in iy]
    if any(a >= dst.W for i in shifted for a in i.args):
        return None
    return assemble(list(ix) + shifted + [Instr(HALT)], dst, 2 * n)


def subadditive_restricted_audit(table: HaltTable, table2: HaltTable, n: int) -> AuditReport:
    """Pairs of directly computable states against the 2n-qubit table."""
    _check_table(table, n)
    _check_table(table2, 2 * n)
    first = list(table.shortest_programs().values())
    rep = AuditReport("subadditive-restricted",
                      {"n": n, "machine": table.spec, "machine2": table2.spec,
                       "max_len": table.max_len, "max_len2": table2.max_len})
    glue = []
    gap2 = []
    overlap = 0
    rows = []
    for rx in first:
        for ry in first:
            t = tensor(rx.output, ry.output)
            kt = k_quantum(t, table2).value
            w = _shift_concat(rx.bits, ry.bits, table.spec, table2.spec, n)
            ok = False
            if w is not None:
                res = run(table2.spec, w, table2.cond, 10 * len(w))
                ok = isinstance(res, Halted) and res.output == t
            row = {"x": rx.output.label(), "y": ry.output.label(), "K": kt}
            if ok:
                g = len(w) - rx.length - ry.length
                glue.append(g)
                row["witness"] = w
                rep.check(f"K({row['x']} (x) {row['y']}) <= l(p_x)+l(p_y)+glue",
                          rx.length + ry.length + g, kt, kt <= len(w))
            else:
                # p_x leaves ancilla junk where the shifted p_y expects zeros
                overlap += 1
            f = fidelity(rx.output, ry.output)
            if f:
                gap2.append(kt - k_quantum(ry.output, table).value - ceil_neg_log2(f))
            rows.append(row)
    rep.observations["c_concat"] = max(glue) if glue else None
    rep.observations["c_overlap"] = max(gap2) if gap2 else None
    rep.observations["pairs_without_concat_witness"] = overlap
    same = [r["K"] for r in rows if r["x"] == r["y"]]
    rep.observations["multiples_lower_m2"] = multiples_bounds(n, 2, 0)[0]
    rep.observations["K_tensor_squares"] = same
    rep.artifacts["pairs"] = rows
    return rep


# bound arithmetic ---------------------------------------------------------------------------


def log_binomial(a: int, b: int) -> tuple[float, float]:
    """``log2 C(a, b)`` exactly and by the Stirling-type approximation."""
    if not 0 < b < a:
        raise ValueError("need 0 < b < a")
    exact = math.log2(math.comb(a, b))
    asym = (b * math.log2(a / b) + (a - b) * math.log2(a / (a - b))
            + 0.5 * math.log2(a / (b * (a - b))))
    return exact, asym


def multiples_bounds(n: int, m: int, K_m: int) -> tuple[float, float]:
    """Lower and upper bounds on the complexity of an m-fold copy of an n-qubit state."""
    if n < 1 or m < 1 or K_m < 0:
        raise ValueError("need n, m >= 1 and K_m >= 0")
    N = 1 << n
    lower = math.log2(math.comb(m + N - 1, m))
    s = K_m + lower
    upper = 4 * s + 2 * math.log2(s)
    assert lower <= upper
    return lower, upper


def audit_multiples(n_max: int = 8, m_max: int = 8, k_max: int = 16,
                    binom_max: int = 1 << 10) -> AuditReport:
    rep = AuditReport("multiples", {"n_max": n_max, "m_max": m_max, "K_max": k_max,
                                    "binom_max": binom_max})
    bad = 0
    for n in range(1, n_max + 1):
        for m in range(1, m_max + 1):
            for km in range(k_max + 1):
                lo, hi = multiples_bounds(n, m, km)
                bad += lo > hi
    rep.check("lower <= upper over the sweep", 0, bad, bad == 0)
    devs = [abs(e - a) for e, a in (log_binomial(2 * m, m) for m in range(1, binom_max + 1))]
    stirling = 0.5 * math.log2(2 * math.pi)
    rep.check("log-binomial deviation bounded over the sweep", 2, max(devs), max(devs) <= 2)
    rep.check("deviation tends to log2(2 pi)/2", stirling, devs[-1],
              abs(devs[-1] - stirling) <= 0.01)
    rep.observations["conditional_copy_bound"] = "not machine-checked (quantum conditional)"
    return rep


def cloning_program(spec: MachineSpec, n: int) -> str:
    return assemble([Instr(REPAUX), Instr(HALT)], spec, n)


def cloning_check(p: str, n: int, m: int, spec: MachineSpec) -> AuditReport:
    """REPAUX; HALT with aux=p outputs the m-fold tensor power of p's output."""
    if spec.W < m * n:
        raise ValueError(f"workspace W={spec.W} too small for {m} copies of {n} qubits")
    single = run(spec, p, ConditionSpec(n), 4 * len(p) + 4)
    if not isinstance(single, Halted):
        raise ValueError(f"program {p!r} is not accepted: {single}")
    cond = ConditionSpec(n, m, p)
    witness = cloning_program(spec, n)
    res = run(spec, witness, cond, 4 * len(witness) + m * len(p) + 4)
    want = tensor_power(single.output, m)
    got = res.output if isinstance(res, Halted) else None
    rep = AuditReport("cloning", {"p": p, "n": n, "m": m, "machine": spec})
    rep.check("output equals m-fold tensor power", want, got, got is not None and got == want)
    rep.check("witness length is constant", 9 if spec.mode == "cond-n" else len(witness),
              len(witness), True)
    rep.artifacts["witness"] = witness
    return rep


def invariance_gap(spec_a: MachineSpec, spec_b: MachineSpec, corpus) -> AuditReport:
    corpus = list(corpus)
    if not corpus:
        raise ValueError("empty corpus")
    rows = []
    gap = 0
    for t in corpus:
        cond = ConditionSpec(t.n)
        ka = k_exact(t, spec_a, cond).value
        kb = k_exact(t, spec_b, cond).value
        gap = max(gap, abs(ka - kb))
        rows.append({"target": t.label(), "K_A": ka, "K_B": kb})
    rep = AuditReport("invariance", {"A": spec_a, "B": spec_b, "corpus_size": len(corpus)})
    rep.check("gap is finite", "finite", gap, gap != INF)
    rep.observations["gap"] = gap
    rep.artifacts["rows"] = rows
    return rep


def fidelity_is_one(a: PureState, b: PureState) -> bool:
    return fidelity(a, b) == ONE
