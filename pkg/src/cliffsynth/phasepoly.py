"""Phase polynomials of H-free circuits and the -P-CZ-C- folding.

An H-free circuit maps ``|x>`` to ``i^p(x) |g x>`` where ``p`` is a Z4-linear
combination of parities ``m . x`` and ``g`` is invertible.  A parity is an
n-bit mask (bit ``j`` set when ``x_j`` participates).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from .clifford import CZ, Circuit, LayeredCircuit, cnots_for_wire_map, phase_layer
from .f2linalg import BinMatrix, invert, is_invertible, mul_vec, parity, popcount, transpose

ORDERS = ("P-CZ-C", "C-P-CZ", "CZ-P-C", "C-CZ-P")
MAX_QUBITS = 24


class HadamardNotSupportedError(ValueError):
    pass


class NotQuadraticError(ValueError):
    pass


def _consolidate(terms: Iterable[tuple[int, int]]) -> dict[int, int]:
    acc: dict[int, int] = defaultdict(int)
    for mask, u in terms:
        if mask == 0:
            raise ValueError("linear functions must be nonzero")
        acc[mask] = (acc[mask] + u) % 4
    return {m: u for m, u in sorted(acc.items()) if u}


@dataclass(frozen=True)
class PhaseDescr:
    n: int
    poly: Mapping[int, int]
    g: BinMatrix | None = None

    def __post_init__(self):
        g = BinMatrix.identity(self.n) if self.g is None else self.g
        if g.shape != (self.n, self.n) or not is_invertible(g):
            raise ValueError("g must be an invertible n x n matrix")
        if any(m >> self.n for m in self.poly):
            raise ValueError("mask exceeds qubit count")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "poly", _consolidate(self.poly.items()))

    def is_quadratic(self) -> bool:
        return all(popcount(m) <= 2 for m in self.poly)


def extract_descr(c: Circuit, max_qubits: int = MAX_QUBITS) -> PhaseDescr:
    if c.n > max_qubits:
        raise ValueError(f"phase polynomial extraction is capped at {max_qubits} qubits")
    wires = [1 << q for q in range(c.n)]
    terms: list[tuple[int, int]] = []
    for g in c:
        if g.name == "H":
            raise HadamardNotSupportedError("phase polynomials need H-free circuits")
        if g.name == "P":
            terms.append((wires[g.qubits[0]], g.power))
        elif g.name == "CNOT":
            ctl, tgt = g.qubits
            wires[tgt] ^= wires[ctl]
        elif g.name == "CZ":
            y, z = (wires[q] for q in g.qubits)
            terms += [(y, 1), (z, 1), (y ^ z, 3)]
        elif g.name == "SWAP":
            a, b = g.qubits
            wires[a], wires[b] = wires[b], wires[a]
    return PhaseDescr(c.n, _consolidate(terms), BinMatrix(c.n, c.n, tuple(wires)))


def phase_evaluate(d: PhaseDescr, x: int) -> tuple[int, int]:
    phase = sum(u * parity(m & x) for m, u in d.poly.items()) % 4
    return phase, mul_vec(d.g, x)


def reduce_to_quadratic(d: PhaseDescr) -> PhaseDescr:
    """Rewrite every parity of weight >= 3 with the six-term identity
    ``u(a^b^c) = 3u(a + b + c + a^b + a^c + b^c)`` (mod 4)."""
    poly = dict(d.poly)
    for s in range(d.n, 2, -1):
        heavy = [(m, u) for m, u in poly.items() if popcount(m) == s]
        if not heavy:
            continue
        terms = [(m, u) for m, u in poly.items() if popcount(m) != s]
        for m, u in heavy:
            a = m & -m
            b = (m ^ a) & -(m ^ a)
            c = m ^ a ^ b
            v = 3 * u % 4
            terms += [(a, v), (b, v), (c, v), (a ^ b, v), (a ^ c, v), (b ^ c, v)]
        poly = _consolidate(terms)
    return PhaseDescr(d.n, poly, d.g)


def canonical_form(d: PhaseDescr) -> PhaseDescr:
    """Unique representative of the phase function: quadratic, with every
    pair coefficient equal to 1 (``2(a^b) = 2a + 2b`` moves the rest into
    the linear terms)."""
    q = reduce_to_quadratic(d)
    terms: list[tuple[int, int]] = []
    for m, u in q.poly.items():
        if popcount(m) == 1:
            terms.append((m, u))
            continue
        a, b = m & -m, m ^ (m & -m)
        if u & 1:
            terms.append((m, 1))
        if u in (2, 3):
            terms += [(a, 2), (b, 2)]
    return PhaseDescr(d.n, _consolidate(terms), d.g)


def equivalent(d1: PhaseDescr, d2: PhaseDescr) -> bool:
    c1, c2 = canonical_form(d1), canonical_form(d2)
    return c1.n == c2.n and c1.poly == c2.poly and c1.g == c2.g


def over_outputs(d: PhaseDescr) -> PhaseDescr:
    """Re-express the phase over the output parities ``y = g x``, so the
    phases may be applied after the linear stage."""
    ginv_t = transpose(invert(d.g))
    poly = _consolidate((mul_vec(ginv_t, m), u) for m, u in d.poly.items())
    return reduce_to_quadratic(PhaseDescr(d.n, poly, d.g))


def synthesize_pczc(d: PhaseDescr, order: str = "P-CZ-C") -> LayeredCircuit:
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    if not d.is_quadratic():
        raise NotQuadraticError("reduce_to_quadratic first")
    if order.split("-")[0] == "C":
        d = over_outputs(d)
    n = d.n
    powers = [0] * n
    cz = Circuit(n)
    for m, u in d.poly.items():
        bits = [j for j in range(n) if m >> j & 1]
        for j in bits:
            powers[j] += u
        if len(bits) == 2 and u & 1:
            cz.append(CZ(*bits))
    stages = {
        "P": Circuit(n, phase_layer(powers)),
        "CZ": cz,
        "C": Circuit(n, cnots_for_wire_map(d.g)),
    }
    return LayeredCircuit(n, [(tag, stages[tag]) for tag in order.split("-")])


def fold(c: Circuit, order: str = "P-CZ-C") -> LayeredCircuit:
    return synthesize_pczc(reduce_to_quadratic(extract_descr(c)), order)
