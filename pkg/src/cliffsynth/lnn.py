"""Synthesis for a linear nearest-neighbour chain.

Qubits are 0-based in circuits; interval labels ``[j, k]`` are 1-based and
stand for ``x_j ^ x_{j+1} ^ ... ^ x_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .clifford import (
    CNOT,
    Circuit,
    H,
    NotSymplecticError,
    SymplecticMat,
    circuit_to_symplectic,
    invert_circuit,
    phase_layer,
)
from .f2linalg import BinMatrix, SingularMatrixError, invert, is_invertible
from .phasepoly import NotQuadraticError, PhaseDescr, extract_descr, reduce_to_quadratic
from .synthesis import seven_stage


class NonIdentityLinearPartError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class IntervalFunc:
    j: int
    k: int

    def __post_init__(self):
        if not 1 <= self.j <= self.k:
            raise ValueError(f"bad interval [{self.j},{self.k}]")

    @property
    def mask(self) -> int:
        return ((1 << self.k) - 1) ^ ((1 << (self.j - 1)) - 1)

    @classmethod
    def from_mask(cls, mask: int) -> "IntervalFunc | None":
        if mask == 0:
            return None
        lo = (mask & -mask).bit_length()
        hi = mask.bit_length()
        iv = cls(lo, hi)
        return iv if iv.mask == mask else None

    def __str__(self) -> str:
        return f"[{self.j},{self.k}]"


# -- reversal network ------------------------------------------------------------


def _s1(n: int) -> list[tuple[int, int]]:
    # 1-based (control, target) pairs
    if n % 2:
        return [(i, i + 1) for i in range(1, n - 1, 2)] + [(i, i - 1) for i in range(3, n + 1, 2)]
    return [(i, i + 1) for i in range(1, n, 2)] + [(i, i - 1) for i in range(3, n, 2)]


def _s2(n: int) -> list[tuple[int, int]]:
    if n % 2:
        return [(i, i - 1) for i in range(2, n, 2)] + [(i, i + 1) for i in range(2, n, 2)]
    return [(i, i - 1) for i in range(2, n + 1, 2)] + [(i, i + 1) for i in range(2, n - 1, 2)]


@dataclass
class ReversalNetwork:
    """``n + 1`` alternating half-blocks S1, S2, S1, ...; a full S block is
    one S1 followed by one S2.  ``wire_trace[t][w]`` is the interval held by
    wire ``w`` after ``t`` half-blocks."""

    n: int
    stages: list[Circuit]
    wire_trace: list[tuple[IntervalFunc, ...]] = field(default_factory=list)

    def circuit(self) -> Circuit:
        out = Circuit(self.n)
        for s in self.stages:
            out.extend(s.gates)
        return out

    def full_boundaries(self) -> list[int]:
        """Half-block indices that sit between full S blocks."""
        return list(range(0, len(self.stages) + 1, 2))

    def first_appearance(self) -> dict[IntervalFunc, tuple[int, int]]:
        """Earliest (boundary, wire) of each interval over full-S boundaries."""
        seen: dict[IntervalFunc, tuple[int, int]] = {}
        for t in self.full_boundaries():
            for w, iv in enumerate(self.wire_trace[t]):
                seen.setdefault(iv, (t, w))
        return seen


def reversal_network(n: int) -> ReversalNetwork:
    if n < 1:
        raise ValueError("n must be positive")
    stages = []
    wires = [1 << q for q in range(n)]
    trace = [tuple(IntervalFunc(q + 1, q + 1) for q in range(n))]
    for h in range(n + 1):
        pairs = _s1(n) if h % 2 == 0 else _s2(n)
        stages.append(Circuit(n, [CNOT(c - 1, t - 1) for c, t in pairs]))
        for c, t in pairs:
            wires[t - 1] ^= wires[c - 1]
        row = tuple(IntervalFunc.from_mask(m) for m in wires)
        if any(iv is None for iv in row):
            raise AssertionError("reversal network left the interval basis")
        trace.append(row)  # type: ignore[arg-type]
    net = ReversalNetwork(n, stages, trace)
    if wires != [1 << (n - 1 - q) for q in range(n)]:
        raise AssertionError("reversal network does not reverse")
    return net


# -- CZ-hat ------------------------------------------------------------------------


def _to_prefix_basis(mask: int) -> int:
    # x_i = y_{i-1} ^ y_i where y_i = x_0 ^ ... ^ x_i (0-based)
    out = 0
    i = 0
    while mask:
        if mask & 1:
            out ^= (1 << i) | ((1 << (i - 1)) if i else 0)
        mask >>= 1
        i += 1
    return out


def interval_terms(quad: PhaseDescr) -> dict[IntervalFunc, int]:
    """Rewrite a phase polynomial as a sum over interval functions."""
    y = reduce_to_quadratic(PhaseDescr(quad.n, {_to_prefix_basis(m): u for m, u in quad.poly.items()}))
    out: dict[IntervalFunc, int] = {}
    for m, u in y.poly.items():
        lo = (m & -m).bit_length() - 1
        hi = m.bit_length() - 1
        # y_i alone is [1, i+1]; y_i ^ y_k is [i+2, k+1]
        iv = IntervalFunc(1, lo + 1) if lo == hi else IntervalFunc(lo + 2, hi + 1)
        out[iv] = (out.get(iv, 0) + u) % 4
    return {iv: u for iv, u in sorted(out.items()) if u}


def czhat_synthesize(n: int, quad: PhaseDescr) -> Circuit:
    """Phases ``quad`` followed by the qubit reversal, on a chain.

    Phases on intervals of length >= 2 are applied at the first full-S
    boundary (after the first S block) where a wire holds them; single
    literals are applied at the end on the reversed wire.  The first S block
    therefore carries no phase gates.
    """
    if quad.n != n:
        raise ValueError("qubit count mismatch")
    if not quad.is_quadratic():
        raise NotQuadraticError("expected a quadratic phase polynomial")
    if quad.g != BinMatrix.identity(n):
        raise NonIdentityLinearPartError("expected identity linear part")
    net = reversal_network(n)
    terms = interval_terms(quad)
    first = net.first_appearance()
    at: dict[int, list[int]] = {}
    for iv, u in terms.items():
        if iv.j == iv.k:
            continue
        t, w = first[iv]
        at.setdefault(t, [0] * n)[w] += u
    out = Circuit(n)
    for t, stage in enumerate(net.stages):
        if t in at:
            out.extend(phase_layer(at[t]))
        out.extend(stage.gates)
    end = at.get(len(net.stages), [0] * n)
    for iv, u in terms.items():
        if iv.j == iv.k:
            end[n - iv.j] += u
    out.extend(phase_layer(end))
    return out


# -- linear stage ------------------------------------------------------------------


def _reduce_against(basis: dict[int, int], v: int) -> int:
    for p, b in basis.items():
        if v >> p & 1:
            v ^= b
    return v


def _prefix_label(rows: list[int], i: int, v: int) -> int:
    """Lowest set bit of ``v`` reduced modulo span(rows[:i])."""
    basis: dict[int, int] = {}
    for r in rows[:i]:
        r = _reduce_against(basis, r)
        p = (r & -r).bit_length() - 1
        for q in list(basis):
            if basis[q] >> p & 1:
                basis[q] ^= r
        basis[p] = r
    v = _reduce_against(basis, v)
    return (v & -v).bit_length() - 1


def _odd_even_rounds(n: int):
    for rnd in range(n):
        yield range(rnd % 2, n - 1, 2)


def c_stage_lnn(a: BinMatrix) -> Circuit:
    """CNOT circuit on a chain whose tableau A-block is ``a``, depth <= 5n.

    Works on ``X = (a^t)^{-1}`` with adjacent row additions; the operations
    that reduce X to I, read in order, form the circuit.  The first odd-even
    transposition sort (each comparator at most 2 CNOTs) arranges the
    prefix spans as ``span(e_{n-1-i}, ..., e_{n-1})``.  The second sort
    reverses the labels (each comparator at most 3 CNOTs) and clears one
    entry whenever two labels meet.
    """
    n = a.nrows
    if not is_invertible(a):
        raise SingularMatrixError("linear map is not invertible")
    if a == BinMatrix.identity(n):
        return Circuit(n)
    if a == _reversal(n) and n > 1:
        return reversal_network(n).circuit()
    x = list(invert(a.T).rows)
    ops: list[tuple[int, int]] = []

    def add(src: int, dst: int) -> None:
        x[dst] ^= x[src]
        ops.append((src, dst))

    def swap(i: int) -> None:
        add(i, i + 1)
        add(i + 1, i)
        add(i, i + 1)

    # phase 1: prefix labels descending
    labels = [_prefix_label(x, i, x[i]) for i in range(n)]
    for pairs in _odd_even_rounds(n):
        for i in pairs:
            if labels[i] > labels[i + 1]:
                continue
            target = labels[i + 1]
            if _prefix_label(x, i, x[i] ^ x[i + 1]) == target:
                add(i + 1, i)
            else:
                add(i, i + 1)
                add(i + 1, i)
            labels[i], labels[i + 1] = labels[i + 1], labels[i]
    if labels != list(range(n - 1, -1, -1)):
        raise AssertionError("first sort did not finish")

    # phase 2: row with label l is e_l plus bits of larger labels not yet met
    for pairs in _odd_even_rounds(n):
        for i in pairs:
            hi, lo = labels[i], labels[i + 1]
            if hi < lo:
                continue
            if x[i + 1] >> hi & 1:
                add(i + 1, i)
                add(i, i + 1)
            else:
                swap(i)
            labels[i], labels[i + 1] = lo, hi
    if x != [1 << q for q in range(n)]:
        raise AssertionError("linear stage did not reduce to the identity")
    return Circuit(n, [CNOT(s, d) for s, d in ops])


def _reversal(n: int) -> BinMatrix:
    return BinMatrix(n, n, tuple(1 << (n - 1 - q) for q in range(n)))


# -- full pipeline -----------------------------------------------------------------


def pipeline_lnn(m: SymplecticMat) -> Circuit:
    """Chain-legal circuit for ``m`` with two-qubit depth <= 14n - 4.

    From ``C1 D1 H D2 C2`` (D = diagonal CZ/P stages): ``D1 = CZhat1 . REV``
    and ``REV . H_S . D2 = H_{rev S} . CZhat2`` with ``CZhat2`` built as the
    inverse of a CZ-hat for the negated phases.  The phase-free first S block
    of CZhat1 joins C1 and the phase-free last S block of CZhat2 joins C2.
    """
    if not isinstance(m, SymplecticMat):
        raise NotSymplecticError("expected a SymplecticMat")
    n = m.n
    lc = seven_stage(m)
    st = [c for _, c in lc.stages]
    c1, d1, h, d2, c2 = st[0], st[1] + st[2], st[3], st[4] + st[5], st[6]
    if n == 1:
        return lc.flatten()

    q1, q2 = extract_descr(d1), extract_descr(d2)
    if not q1.poly and not q2.poly:
        out = Circuit(n, c_stage_lnn(circuit_to_symplectic(c1).A).gates)
        out.extend(h.gates)
        out.extend(c_stage_lnn(circuit_to_symplectic(c2).A).gates)
        return out
    hat1 = czhat_synthesize(n, q1)
    neg = PhaseDescr(n, {mk: -u for mk, u in q2.poly.items()})
    hat2 = invert_circuit(czhat_synthesize(n, reduce_to_quadratic(neg)))

    head = len(_first_block(n))
    lin1 = circuit_to_symplectic(c1 + Circuit(n, hat1.gates[:head])).A
    lin2 = circuit_to_symplectic(Circuit(n, hat2.gates[len(hat2) - head:]) + c2).A
    out = Circuit(n)
    out.extend(c_stage_lnn(lin1).gates)
    out.extend(hat1.gates[head:])
    out.extend(H(n - 1 - g.qubits[0]) for g in h)
    out.extend(hat2.gates[: len(hat2) - head])
    out.extend(c_stage_lnn(lin2).gates)
    return out


def _first_block(n: int) -> list[tuple[int, int]]:
    return _s1(n) + (_s2(n) if n >= 2 else [])
