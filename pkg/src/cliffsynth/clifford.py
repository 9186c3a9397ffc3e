"""Gates, circuits and their binary symplectic tableaux.

Conventions used throughout the package:

* qubits are 0-based;
* a tableau is a ``2n x 2n`` matrix ``[[A, B], [C, D]]`` without a sign column;
* a gate acts on a tableau by *right* multiplication, i.e. by column
  operations, so the tableau of ``g1 g2 ... gm`` (gates listed in time order)
  is ``M(g1) @ M(g2) @ ... @ M(gm)``.

Column rules: ``H(k)`` swaps columns ``k`` and ``n+k``; ``P(k)`` adds column
``k`` into column ``n+k``; ``CNOT(j, k)`` adds column ``j`` into ``k`` and
column ``n+k`` into ``n+j``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .f2linalg import (
    BinMatrix,
    SingularMatrixError,
    invert,
    is_invertible,
    permutation_matrix,
)

GATE_NAMES = ("H", "P", "CNOT", "CZ", "SWAP")
STAGE_TAGS = ("H", "P", "C", "CZ")


class InvalidGateError(ValueError):
    pass


class NotSymplecticError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    power: int = 1

    def __post_init__(self):
        if self.name not in GATE_NAMES:
            raise InvalidGateError(f"unknown gate {self.name!r}")
        arity = 1 if self.name in ("H", "P") else 2
        if len(self.qubits) != arity:
            raise InvalidGateError(f"{self.name} takes {arity} qubit(s)")
        if any(q < 0 for q in self.qubits):
            raise InvalidGateError(f"negative qubit index in {self}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise InvalidGateError(f"{self.name} needs two distinct qubits")
        if self.name == "P":
            if self.power % 4 == 0 or not 1 <= self.power <= 3:
                raise InvalidGateError("P power must be 1, 2 or 3")
        elif self.power != 1:
            raise InvalidGateError(f"{self.name} has no power")

    @property
    def is_two_qubit(self) -> bool:
        return len(self.qubits) == 2

    def inverse(self) -> "Gate":
        if self.name == "P":
            return Gate("P", self.qubits, 4 - self.power)
        return self

    def relabel(self, mapping: Sequence[int]) -> "Gate":
        return Gate(self.name, tuple(mapping[q] for q in self.qubits), self.power)

    def __str__(self) -> str:
        if self.name == "P" and self.power != 1:
            return f"P^{self.power}({self.qubits[0]})"
        return f"{self.name}({', '.join(map(str, self.qubits))})"


def H(q: int) -> Gate:
    return Gate("H", (q,))


def P(q: int, power: int = 1) -> Gate:
    return Gate("P", (q,), power % 4)


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def CZ(a: int, b: int) -> Gate:
    return Gate("CZ", (a, b))


def SWAP(a: int, b: int) -> Gate:
    return Gate("SWAP", (a, b))


@dataclass
class Circuit:
    n: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        gates, self.gates = list(self.gates), []
        self.extend(gates)

    def append(self, g: Gate) -> None:
        if any(q >= self.n for q in g.qubits):
            raise InvalidGateError(f"{g} is out of range for {self.n} qubits")
        self.gates.append(g)

    def extend(self, gates: Iterable[Gate]) -> None:
        for g in gates:
            self.append(g)

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise ValueError("qubit counts differ")
        return Circuit(self.n, self.gates + other.gates)

    def copy(self) -> "Circuit":
        return Circuit(self.n, list(self.gates))

    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if g.is_two_qubit)

    def relabel(self, mapping: Sequence[int]) -> "Circuit":
        return Circuit(self.n, [g.relabel(mapping) for g in self.gates])


@dataclass
class LayeredCircuit:
    n: int
    stages: list[tuple[str, Circuit]] = field(default_factory=list)

    @property
    def tags(self) -> list[str]:
        return [t for t, _ in self.stages]

    def flatten(self) -> Circuit:
        out = Circuit(self.n)
        for _, c in self.stages:
            out.extend(c.gates)
        return out

    def validate(self) -> None:
        allowed = {"H": {"H"}, "P": {"P"}, "C": {"CNOT"}, "CZ": {"CZ"}}
        for tag, c in self.stages:
            if tag not in allowed:
                raise ValueError(f"unknown stage tag {tag!r}")
            if c.n != self.n:
                raise ValueError("stage qubit count differs from layered circuit")
            for g in c:
                if g.name not in allowed[tag]:
                    raise ValueError(f"{g} not allowed in a {tag} stage")
            if tag in ("H", "P"):
                qs = [g.qubits[0] for g in c]
                if len(qs) != len(set(qs)):
                    raise ValueError(f"{tag} stage has two gates on one qubit")


# -- symplectic matrices -------------------------------------------------------


@lru_cache(maxsize=64)
def symplectic_form(n: int) -> BinMatrix:
    """``J = [[0, I], [I, 0]]``."""
    z, i = BinMatrix.zeros(n), BinMatrix.identity(n)
    return BinMatrix.block([[z, i], [i, z]])


def is_symplectic(m: BinMatrix) -> bool:
    if not m.is_square():
        raise ValueError("tableau must be square")
    if m.nrows % 2:
        raise ValueError("tableau must have even side")
    # M^t J M = J iff M J M^t = J: rows pair up as a symplectic basis
    n = m.nrows // 2
    lo = (1 << n) - 1
    rows = m.rows
    flipped = [((r & lo) << n) | (r >> n) for r in rows]
    for i, r in enumerate(rows):
        for j in range(i + 1, 2 * n):
            if bin(r & flipped[j]).count("1") & 1 != (j == i + n):
                return False
    return True


def block_conditions(m: BinMatrix) -> dict[str, bool]:
    """The column and row forms of the symplectic condition, block by block."""
    n = m.nrows // 2
    a, b = m.slice(0, n, 0, n), m.slice(0, n, n, 2 * n)
    c, d = m.slice(n, 2 * n, 0, n), m.slice(n, 2 * n, n, 2 * n)
    i = BinMatrix.identity(n)
    return {
        "AtC=CtA": a.T @ c == c.T @ a,
        "AtD+CtB=I": a.T @ d + c.T @ b == i,
        "BtD=DtB": b.T @ d == d.T @ b,
        "ABt=BAt": a @ b.T == b @ a.T,
        "ADt+BCt=I": a @ d.T + b @ c.T == i,
        "CDt=DCt": c @ d.T == d @ c.T,
    }


@dataclass(frozen=True)
class SymplecticMat:
    n: int
    m: BinMatrix

    def __post_init__(self):
        if self.m.shape != (2 * self.n, 2 * self.n):
            raise ValueError(f"expected a {2 * self.n}x{2 * self.n} tableau")
        if not is_symplectic(self.m):
            raise NotSymplecticError("matrix is not symplectic")

    @classmethod
    def identity(cls, n: int) -> "SymplecticMat":
        return cls(n, BinMatrix.identity(2 * n))

    @classmethod
    def from_blocks(cls, a: BinMatrix, b: BinMatrix, c: BinMatrix, d: BinMatrix) -> "SymplecticMat":
        return cls(a.nrows, BinMatrix.block([[a, b], [c, d]]))

    @property
    def A(self) -> BinMatrix:
        return self.m.slice(0, self.n, 0, self.n)

    @property
    def B(self) -> BinMatrix:
        return self.m.slice(0, self.n, self.n, 2 * self.n)

    @property
    def C(self) -> BinMatrix:
        return self.m.slice(self.n, 2 * self.n, 0, self.n)

    @property
    def D(self) -> BinMatrix:
        return self.m.slice(self.n, 2 * self.n, self.n, 2 * self.n)

    def __matmul__(self, other: "SymplecticMat") -> "SymplecticMat":
        return SymplecticMat(self.n, self.m @ other.m)

    def inverse(self) -> "SymplecticMat":
        # M^-1 = J M^t J
        j = symplectic_form(self.n)
        return SymplecticMat(self.n, j @ self.m.T @ j)


def linear_tableau(a: BinMatrix) -> SymplecticMat:
    """``diag(a, a^{-t})``, the tableau of a CNOT circuit with A-block ``a``."""
    n = a.nrows
    z = BinMatrix.zeros(n)
    return SymplecticMat.from_blocks(a, z, z, invert(a).T)


def upper_tableau(b: BinMatrix) -> SymplecticMat:
    """``[[I, b], [0, I]]`` for symmetric ``b`` (P and CZ layers)."""
    n = b.nrows
    i, z = BinMatrix.identity(n), BinMatrix.zeros(n)
    return SymplecticMat.from_blocks(i, b, z, i)


def permutation_tableau(perm: Sequence[int]) -> SymplecticMat:
    p = permutation_matrix(perm)
    z = BinMatrix.zeros(len(perm))
    return SymplecticMat.from_blocks(p, z, z, p)


def hadamard_tableau(n: int, qubits: Iterable[int]) -> SymplecticMat:
    return circuit_to_symplectic(Circuit(n, [H(q) for q in sorted(set(qubits))]))


# -- gate action -------------------------------------------------------------


def _swap_bits(r: int, i: int, j: int) -> int:
    if ((r >> i) ^ (r >> j)) & 1:
        r ^= (1 << i) | (1 << j)
    return r


def _apply_columns(rows: list[int], n: int, g: Gate) -> None:
    name = g.name
    if name == "H":
        (k,) = g.qubits
        for i, r in enumerate(rows):
            rows[i] = _swap_bits(r, k, n + k)
    elif name == "P":
        if g.power % 2 == 0:
            return
        (k,) = g.qubits
        for i, r in enumerate(rows):
            rows[i] = r ^ (((r >> k) & 1) << (n + k))
    elif name == "CNOT":
        j, k = g.qubits
        for i, r in enumerate(rows):
            r ^= ((r >> j) & 1) << k
            r ^= ((r >> (n + k)) & 1) << (n + j)
            rows[i] = r
    elif name == "CZ":
        a, b = g.qubits
        for i, r in enumerate(rows):
            r ^= ((r >> b) & 1) << (n + a)
            r ^= ((r >> a) & 1) << (n + b)
            rows[i] = r
    elif name == "SWAP":
        a, b = g.qubits
        for sub in (CNOT(a, b), CNOT(b, a), CNOT(a, b)):
            _apply_columns(rows, n, sub)


def apply_gate_right(m: SymplecticMat, g: Gate) -> SymplecticMat:
    if any(q >= m.n for q in g.qubits):
        raise InvalidGateError(f"{g} is out of range for {m.n} qubits")
    rows = list(m.m.rows)
    _apply_columns(rows, m.n, g)
    return SymplecticMat(m.n, BinMatrix(2 * m.n, 2 * m.n, tuple(rows)))


def circuit_to_symplectic(c: Circuit) -> SymplecticMat:
    n = c.n
    rows = list(BinMatrix.identity(2 * n).rows)
    for g in c:
        _apply_columns(rows, n, g)
    return SymplecticMat(n, BinMatrix(2 * n, 2 * n, tuple(rows)))


def invert_circuit(c: Circuit) -> Circuit:
    return Circuit(c.n, [g.inverse() for g in reversed(c.gates)])


# -- metrics -------------------------------------------------------------------


def two_qubit_depth(c: Circuit) -> int:
    """Greedy in-order layering where only two-qubit gates occupy layers."""
    level = [0] * c.n
    depth = 0
    for g in c:
        if not g.is_two_qubit:
            continue
        a, b = g.qubits
        d = max(level[a], level[b]) + 1
        level[a] = level[b] = d
        depth = max(depth, d)
    return depth


def is_lnn_legal(c: Circuit) -> bool:
    return all(abs(g.qubits[0] - g.qubits[1]) == 1 for g in c if g.is_two_qubit)


# -- subgroups -------------------------------------------------------------------


def classify_subgroup(m: SymplecticMat) -> set[str]:
    """Tags among ``C_n``, ``C_down``, ``B0`` and ``Borel`` that ``m`` belongs to.

    The triangular subgroup is the lower-unitriangular one: the A-block of
    ``CNOT(c, t)`` has its off-diagonal 1 at ``(c, t)``, so ``C_down`` is
    generated by the CNOTs with ``c > t``.
    """
    a, b, c = m.A, m.B, m.C
    tags: set[str] = set()
    if not c.is_zero():
        return tags
    # C = 0 and symplectic imply D = A^{-t} and A B^t symmetric
    tri = a.is_unitriangular(lower=True)
    if b.is_zero():
        tags.add("C_n")
        if tri:
            tags.add("C_down")
    if a == BinMatrix.identity(m.n) and b.is_symmetric():
        tags.add("B0")
    if tri and (a @ b.T).is_symmetric():
        tags.add("Borel")
    return tags


# -- stage synthesis helpers ---------------------------------------------------


def cnots_for_wire_map(g: BinMatrix) -> list[Gate]:
    """CNOT gates whose wire map is ``g`` (wire ``i`` ends holding row ``i`` of
    ``g`` as a function of the inputs), by Gauss-Jordan elimination."""
    n = g.nrows
    rows = list(g.rows)
    ops: list[tuple[int, int]] = []
    for col in range(n):
        bit = 1 << col
        piv = next((i for i in range(col, n) if rows[i] & bit), None)
        if piv is None:
            raise SingularMatrixError("linear map is not invertible")
        if piv != col:
            rows[col] ^= rows[piv]
            ops.append((piv, col))
        for i in range(n):
            if i != col and rows[i] & bit:
                rows[i] ^= rows[col]
                ops.append((col, i))
    # ops reduce g to I, so g is their product in reverse time order
    return [CNOT(c, t) for c, t in reversed(ops)]


def cnots_for_tableau_block(a: BinMatrix) -> list[Gate]:
    """CNOT gates with tableau ``diag(a, a^{-t})``; the wire map is ``a^t``."""
    return cnots_for_wire_map(a.T)


def lower_cnots(a: BinMatrix) -> list[Gate]:
    """``C_down`` gates (control above target index) with A-block ``a``.

    For lower-unitriangular ``a`` the column reduction is direct: column ``t``
    is cleared by ``CNOT(c, t)`` for each ``c > t`` with ``a[c, t] = 1``.
    """
    if not a.is_unitriangular(lower=True):
        raise ValueError("expected a lower-unitriangular matrix")
    n = a.nrows
    ops = [(c, t) for t in range(n - 2, -1, -1) for c in range(t + 1, n) if a[c, t]]
    return [CNOT(c, t) for c, t in reversed(ops)]


def phase_layer(powers: Sequence[int]) -> list[Gate]:
    """One P gate per qubit with a nonzero power mod 4."""
    return [P(q, v % 4) for q, v in enumerate(powers) if v % 4]


def permutation_cnots(perm: Sequence[int]) -> list[Gate]:
    """CNOT gates whose tableau is ``permutation_tableau(perm)``."""
    return cnots_for_tableau_block(permutation_matrix(perm))


# -- random words ----------------------------------------------------------------


def random_clifford_word(n: int, length: int, seed: int) -> Circuit:
    """Deterministic pseudo-random word over H, P, CNOT and CZ (not uniform)."""
    if length < 0:
        raise ValueError("length must be non-negative")
    rng = random.Random(seed)
    c = Circuit(n)
    kinds = ["H", "P"] + (["CNOT", "CZ"] if n > 1 else [])
    for _ in range(length):
        kind = rng.choice(kinds)
        if kind == "H":
            c.append(H(rng.randrange(n)))
        elif kind == "P":
            c.append(P(rng.randrange(n)))
        else:
            a, b = rng.sample(range(n), 2)
            c.append(CNOT(a, b) if kind == "CNOT" else CZ(a, b))
    return c


def random_symplectic(n: int, rng: random.Random, length: int | None = None) -> SymplecticMat:
    length = 8 * n * n + 8 if length is None else length
    return circuit_to_symplectic(random_clifford_word(n, length, rng.getrandbits(64)))


def random_invertible(n: int, rng: random.Random) -> BinMatrix:
    while True:
        m = BinMatrix(n, n, tuple(rng.getrandbits(n) for _ in range(n)))
        if is_invertible(m):
            return m


def random_borel(n: int, rng: random.Random, length: int | None = None) -> SymplecticMat:
    """Random element of the Borel subgroup from a word over ``C_down``, P and CZ."""
    length = 4 * n * n + 4 if length is None else length
    c = Circuit(n)
    for _ in range(length):
        kind = rng.randrange(3) if n > 1 else 1
        if kind == 0:
            t, ctl = sorted(rng.sample(range(n), 2))
            c.append(CNOT(ctl, t))
        elif kind == 1:
            c.append(P(rng.randrange(n), rng.randrange(1, 4)))
        else:
            a, b = rng.sample(range(n), 2)
            c.append(CZ(a, b))
    return circuit_to_symplectic(c)
