"""Exact pure states over Q(sqrt 2) and the gates that act on them.

A :class:`PureState` stores an amplitude vector ``amps`` and its exact squared
norm ``norm2``; the physical state is ``amps / sqrt(norm2)``.  Most states have
``norm2 == 1``, but keeping the norm symbolic lets Gram-Schmidt and tensor
factorization stay exact when the square root is not in the field.

Qubit 0 is the leftmost character of a basis label, so basis index ``i`` has
qubit ``q`` equal to bit ``n - 1 - q`` of ``i``.

States built from decimal floats are *inexact*: their amplitudes are Python
``complex`` and fidelities come back as floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .codes import FLOAT_TOLERANCE, check_bits
from .ring import CONE, CRing, CZERO, INV_SQRT2, ONE, RingReal, ZERO

MAX_QUBITS = 12


class StateError(ValueError):
    pass


class PureState:
    __slots__ = ("n", "amps", "norm2", "exact", "_support", "_key")

    def __init__(self, n: int, amps: Sequence, norm2=None, *, check: bool = True):
        if n < 0 or n > MAX_QUBITS:
            raise StateError(f"qubit count {n} outside 0..{MAX_QUBITS}")
        if len(amps) != 1 << n:
            raise StateError(f"expected {1 << n} amplitudes, got {len(amps)}")
        exact = not any(isinstance(a, (complex, float)) for a in amps)
        self.n = n
        self.exact = exact
        if exact:
            amps = tuple(CRing.coerce(a) for a in amps)
            total = _sum_abs2(amps)
            if norm2 is None:
                norm2 = total
            else:
                norm2 = RingReal.coerce(norm2)
                if check and total != norm2:
                    raise StateError(f"squared norm is {total}, declared {norm2}")
            if not norm2:
                raise StateError("zero vector is not a state")
            amps, norm2 = _try_normalize(amps, norm2)
        else:
            amps = tuple(complex(a) for a in amps)
            total = sum(abs(a) ** 2 for a in amps)
            norm2 = float(total if norm2 is None else norm2)
            if norm2 <= 0:
                raise StateError("zero vector is not a state")
            if check and abs(total - norm2) > 1e-9:
                raise StateError(f"squared norm is {total}, declared {norm2}")
        self.amps = amps
        self.norm2 = norm2
        self._support = None
        self._key = None

    # construction helpers ----------------------------------------------------

    @classmethod
    def from_ring(cls, amps: Sequence, norm2=None) -> "PureState":
        n = (len(amps) - 1).bit_length()
        return cls(n, amps, norm2)

    @classmethod
    def from_json(cls, obj: dict) -> "PureState":
        try:
            n = int(obj["n"])
            raw = obj["amps"]
        except (KeyError, TypeError, ValueError) as exc:
            raise StateError(f"malformed state object: {exc}") from None
        if not isinstance(raw, list):
            raise StateError("amps must be a list")
        amps = []
        floating = False
        for entry in raw:
            if not isinstance(entry, list) or len(entry) != 2:
                raise StateError(f"amplitude must be [re, im], got {entry!r}")
            parts = []
            for v in entry:
                if isinstance(v, bool):
                    raise StateError("boolean amplitude")
                if isinstance(v, int):
                    parts.append(RingReal(v))
                elif isinstance(v, float):
                    floating = True
                    parts.append(v)
                elif isinstance(v, str):
                    parts.append(RingReal.parse(v))
                else:
                    raise StateError(f"bad amplitude component {v!r}")
            amps.append(parts)
        norm2 = obj.get("norm2")
        if isinstance(norm2, str):
            norm2 = RingReal.parse(norm2)
        elif isinstance(norm2, int):
            norm2 = RingReal(norm2)
        if floating:
            vals = [complex(float(re), float(im)) for re, im in amps]
            return cls(n, vals, None if norm2 is None else float(norm2))
        return cls(n, [CRing(re, im) for re, im in amps], norm2)

    def to_json(self) -> dict:
        if self.exact:
            out = {"n": self.n, "amps": [[str(a.re), str(a.im)] for a in self.amps]}
            if self.norm2 != ONE:
                out["norm2"] = str(self.norm2)
        else:
            out = {"n": self.n, "amps": [[a.real, a.imag] for a in self.amps]}
            if abs(self.norm2 - 1) > 1e-15:
                out["norm2"] = self.norm2
        return out

    # views -------------------------------------------------------------------

    @property
    def dim(self) -> int:
        return 1 << self.n

    @property
    def support(self) -> tuple[int, ...]:
        if self._support is None:
            if self.exact:
                self._support = tuple(i for i, a in enumerate(self.amps) if a)
            else:
                self._support = tuple(i for i, a in enumerate(self.amps) if a != 0)
        return self._support

    def to_complex(self) -> list[complex]:
        scale = float(self.norm2) ** 0.5
        return [complex(a) / scale for a in self.amps]

    def as_inexact(self) -> "PureState":
        if not self.exact:
            return self
        return PureState(self.n, [complex(a) for a in self.amps], float(self.norm2), check=False)

    def label(self) -> str:
        """Compact human-readable form, e.g. ``(3/5,4/5)``."""
        parts = []
        for a in self.amps:
            if self.exact:
                parts.append(_fmt_c(a))
            else:
                parts.append(f"{a:.6g}")
        body = ",".join(parts)
        if self.exact and self.norm2 != ONE:
            return f"({body})/sqrt({_fmt_r(self.norm2)})"
        return f"({body})"

    def __repr__(self):
        return f"PureState(n={self.n}, {self.label()})"

    # equality is phase-sensitive; see equal_up_to_phase for the projective version
    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        if self.n != other.n:
            return False
        if not (self.exact and other.exact):
            a, b = self.to_complex(), other.to_complex()
            return all(abs(x - y) <= 1e-9 for x, y in zip(a, b))
        if self.norm2 == other.norm2:
            return self.amps == other.amps
        if self.support != other.support:
            return False
        i = self.support[0]
        lam = self.amps[i] / other.amps[i]
        if lam.im or lam.re.sign() <= 0:
            return False
        if lam.re * lam.re * other.norm2 != self.norm2:
            return False
        return all(self.amps[j] == other.amps[j] * lam.re for j in self.support)

    def __hash__(self):
        return hash(self.projective_key())

    def projective_key(self):
        """Key invariant under global phase and scale; equal states share it."""
        if self._key is None:
            if not self.exact:
                vec = self.to_complex()
                i = self.support[0]
                ph = vec[i] / abs(vec[i])
                self._key = (self.n, tuple(complex(round((v / ph).real, 9), round((v / ph).imag, 9))
                                           for v in vec))
            else:
                i = self.support[0]
                pivot = self.amps[i]
                self._key = (self.n, tuple(_ckey(a / pivot) for a in self.amps))
        return self._key


def _ckey(c: CRing):
    return (c.re.a, c.re.b, c.im.a, c.im.b)


def _fmt_r(r: RingReal) -> str:
    if not r.b:
        return str(r.a)
    if not r.a:
        return f"{r.b}*r2"
    return f"{r.a}{'+' if r.b > 0 else '-'}{abs(r.b)}*r2"


def _fmt_c(c: CRing) -> str:
    if not c.im:
        return _fmt_r(c.re)
    if not c.re:
        return f"{_fmt_r(c.im)}i"
    return f"{_fmt_r(c.re)}+({_fmt_r(c.im)})i"


def _sum_abs2(amps) -> RingReal:
    a = Fraction(0)
    b = Fraction(0)
    for z in amps:
        s = z.abs2()
        a += s.a
        b += s.b
    return RingReal(a, b)


def _try_normalize(amps, norm2):
    if norm2 == ONE:
        return amps, ONE
    root = norm2.sqrt()
    if root is None:
        return amps, norm2
    inv = root.inverse()
    return tuple(a * inv for a in amps), ONE


# construction ------------------------------------------------------------------


def basis_state(n: int, index: str) -> PureState:
    check_bits(index)
    if len(index) != n:
        raise StateError(f"basis label {index!r} does not have {n} bits")
    amps = [CZERO] * (1 << n)
    amps[int(index, 2) if index else 0] = CONE
    return PureState(n, amps, ONE, check=False)


def zero_state(n: int) -> PureState:
    return basis_state(n, "0" * n)


def tensor(a: PureState, b: PureState) -> PureState:
    if a.exact and b.exact:
        amps = [x * y if x and y else CZERO for x in a.amps for y in b.amps]
        return PureState(a.n + b.n, amps, a.norm2 * b.norm2, check=False)
    a, b = a.as_inexact(), b.as_inexact()
    return PureState(a.n + b.n, [x * y for x in a.amps for y in b.amps], a.norm2 * b.norm2,
                     check=False)


def tensor_power(a: PureState, m: int) -> PureState:
    if m < 1:
        raise StateError("tensor power needs m >= 1")
    out = a
    for _ in range(m - 1):
        out = tensor(out, a)
    return out


def inner(a: PureState, b: PureState):
    """Unnormalized ``<a|b>`` of the stored amplitude vectors."""
    if a.n != b.n:
        raise StateError(f"dimension mismatch: {a.n} vs {b.n} qubits")
    if a.exact and b.exact:
        sa, sb = a.support, b.support
        idx = sa if len(sa) <= len(sb) else sb
        total = CZERO
        for i in idx:
            x, y = a.amps[i], b.amps[i]
            if x and y:
                total = total + x.conj() * y
        return total
    ca, cb = a.as_inexact().amps, b.as_inexact().amps
    return sum((x.conjugate() * y for x, y in zip(ca, cb)), 0j)


def fidelity(a: PureState, b: PureState):
    """``|<a|b>|^2`` for the normalized states; exact ring value or float."""
    ip = inner(a, b)
    if isinstance(ip, CRing):
        num = ip.abs2()
        if not num:
            return ZERO
        den = a.norm2 * b.norm2
        return num if den == ONE else num / den
    return abs(ip) ** 2 / (float(a.norm2) * float(b.norm2))


def equal_up_to_phase(a: PureState, b: PureState) -> bool:
    if a.n != b.n:
        return False
    f = fidelity(a, b)
    if isinstance(f, float):
        return abs(f - 1) <= FLOAT_TOLERANCE
    return f == ONE


def measure_probs(s: PureState) -> list:
    if s.exact:
        if s.norm2 == ONE:
            return [a.abs2() for a in s.amps]
        return [a.abs2() / s.norm2 for a in s.amps]
    return [abs(a) ** 2 / s.norm2 for a in s.amps]


def scale(s: PureState, c) -> PureState:
    """Multiply by a unit-modulus ring scalar (e.g. a global sign)."""
    c = CRing.coerce(c)
    if c.abs2() != ONE:
        raise StateError("global phase must have modulus 1")
    return PureState(s.n, [a * c for a in s.amps], s.norm2, check=False)


# gates -------------------------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    name: str
    matrix: tuple  # rows of CRing
    arity: int

    def dagger(self) -> tuple:
        d = len(self.matrix)
        return tuple(tuple(self.matrix[j][i].conj() for j in range(d)) for i in range(d))


def _gate(name, rows, arity):
    return Gate(name, tuple(tuple(CRing.coerce(x) for x in row) for row in rows), arity)


_h = INV_SQRT2
X = _gate("X", [[0, 1], [1, 0]], 1)
R = _gate("R", [[Fraction(3, 5), Fraction(-4, 5)], [Fraction(4, 5), Fraction(3, 5)]], 1)
H = _gate("H", [[_h, _h], [_h, -_h]], 1)
S = _gate("S", [[_h, _h], [-_h, _h]], 1)
CNOT = _gate("CNOT", [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], 2)

GATES = {g.name: g for g in (X, CNOT, R, H, S)}


def is_unitary(g: Gate) -> bool:
    d = len(g.matrix)
    dag = g.dagger()
    for i in range(d):
        for j in range(d):
            acc = CZERO
            for k in range(d):
                acc = acc + dag[i][k] * g.matrix[k][j]
            if acc != (CONE if i == j else CZERO):
                return False
    return True


def apply_gate(s: PureState, g: Gate, qubits: Sequence[int]) -> PureState:
    qubits = tuple(qubits)
    if len(qubits) != g.arity:
        raise StateError(f"{g.name} acts on {g.arity} qubit(s), got {len(qubits)}")
    if len(set(qubits)) != len(qubits):
        raise StateError(f"repeated qubit index in {qubits}")
    for q in qubits:
        if not 0 <= q < s.n:
            raise StateError(f"qubit index {q} out of range for {s.n} qubits")
    masks = [1 << (s.n - 1 - q) for q in qubits]
    # sub-index k of the gate selects bit pattern over `qubits`, first qubit most significant
    offsets = []
    for k in range(1 << g.arity):
        off = 0
        for pos, m in enumerate(masks):
            if (k >> (g.arity - 1 - pos)) & 1:
                off |= m
        offsets.append(off)
    allmask = sum(masks)
    exact = s.exact
    mat = g.matrix if exact else [[complex(x) for x in row] for row in g.matrix]
    zero = CZERO if exact else 0j
    out = list(s.amps)
    for base in range(s.dim):
        if base & allmask:
            continue
        idx = [base | off for off in offsets]
        vec = [s.amps[i] for i in idx]
        for r, i in enumerate(idx):
            acc = zero
            row = mat[r]
            for c, v in enumerate(vec):
                if v and row[c]:
                    acc = acc + row[c] * v
            out[i] = acc
    return PureState(s.n, out, s.norm2, check=False)


# factorization -------------------------------------------------------------------


def factor_prefix(s: PureState, k: int):
    """Split off the first ``k`` qubits as ``(front, back)``, or None if entangled."""
    if not 0 < k < s.n:
        raise StateError(f"split point {k} outside 1..{s.n - 1}")
    cols = 1 << (s.n - k)
    amps = s.amps
    i0 = s.support[0]
    r0, c0 = divmod(i0, cols)
    pivot = amps[i0]
    exact = s.exact
    for i in s.support:
        r, c = divmod(i, cols)
        lhs = amps[i] * pivot
        rhs = amps[r * cols + c0] * amps[r0 * cols + c]
        if exact:
            if lhs != rhs:
                return None
        elif abs(lhs - rhs) > 1e-9:
            return None
    # zeros outside the support must also be consistent with rank one
    for r in range(1 << k):
        a = amps[r * cols + c0]
        if not a:
            continue
        for c in range(cols):
            b = amps[r0 * cols + c]
            if b and not amps[r * cols + c]:
                return None
    front = [amps[r * cols + c0] for r in range(1 << k)]
    back = [amps[r0 * cols + c] for c in range(cols)]
    return PureState(k, front), PureState(s.n - k, back)


# orthonormalization -------------------------------------------------------------


def _project_out(vec: list, basis: Sequence[PureState]) -> list:
    for e in basis:
        coeff = CZERO
        for i in e.support:
            if vec[i]:
                coeff = coeff + e.amps[i].conj() * vec[i]
        if not coeff:
            continue
        coeff = coeff / e.norm2
        for i in e.support:
            vec[i] = vec[i] - coeff * e.amps[i]
    return vec


def gram_schmidt(vectors: Iterable[PureState]) -> list[PureState]:
    """Exact Gram-Schmidt; linearly dependent inputs are dropped."""
    out: list[PureState] = []
    n = None
    for v in vectors:
        if not v.exact:
            raise StateError("gram_schmidt requires exact states")
        if n is None:
            n = v.n
        elif v.n != n:
            raise StateError("mixed qubit counts")
        residual = _project_out(list(v.amps), out)
        if any(residual):
            out.append(PureState(n, residual))
    return out


def extend_to_basis(orthonormal: Sequence[PureState], n: int) -> list[PureState]:
    """Complete to a basis of 2^n vectors using canonical candidates in lex order."""
    dim = 1 << n
    basis = list(orthonormal)
    if len(basis) > dim:
        raise StateError(f"{len(basis)} vectors exceed dimension {dim}")
    for v in basis:
        if v.n != n:
            raise StateError("qubit count mismatch")
    for i in range(dim):
        if len(basis) == dim:
            break
        vec = [CZERO] * dim
        vec[i] = CONE
        residual = _project_out(vec, basis)
        if any(residual):
            basis.append(PureState(n, residual))
    return basis


def is_orthonormal(vectors: Sequence[PureState]) -> bool:
    for i, a in enumerate(vectors):
        for b in vectors[i:]:
            f = fidelity(a, b)
            want = ONE if a is b else ZERO
            if f != want:
                return False
    return True
