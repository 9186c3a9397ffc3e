"""Exhaustive and bidirectional searches for optimal gate counts, and the
CZ-stage rewriting by CNOT-conjugated fans.

Equivalence is tableau equality (Pauli and global phase ignored).  Two
representations are used:

* full tableaux packed into one int (row ``i`` at bits ``2n*i ..``);
* for alphabets containing a free P gate and no H, classes of H-free
  tableaux ``diag(A, A^{-t}) [[I, S], [0, I]]`` modulo the diagonal of ``S``.
  A class key packs A row-major in the low ``n*n`` bits and the strictly
  upper part of S above it.  Right multiplication by a CNOT conjugates S by
  a transvection and picks up the free diagonal bit of the target qubit,
  so each CNOT has two successors; a CZ toggles one bit of S.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, Iterable, Iterator, Mapping

import numpy as np

from .clifford import (
    CNOT,
    phase_layer,
    CZ,
    Circuit,
    Gate,
    P,
    SymplecticMat,
    _apply_columns,
    upper_tableau,
)
from .f2linalg import BinMatrix, invert
from .phasepoly import canonical_form, equivalent, extract_descr

DEFAULT_COST = {"H": 0, "P": 0, "CNOT": 1, "CZ": 1, "SWAP": 1}
MAX_SEARCH_QUBITS = 4


class SearchBudgetExceeded(RuntimeError):
    pass


class UnsupportedSizeError(ValueError):
    pass


class NotHollowSymmetricError(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpec:
    n: int
    gate_alphabet: frozenset[str]
    target: SymplecticMat
    cost: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_COST))

    def __post_init__(self):
        object.__setattr__(self, "gate_alphabet", frozenset(self.gate_alphabet))
        if not self.gate_alphabet:
            raise ValueError("alphabet must be nonempty")
        unknown = self.gate_alphabet - set(DEFAULT_COST)
        if unknown:
            raise ValueError(f"unknown gate kinds {sorted(unknown)}")
        if any(self.cost.get(k, 1) not in (0, 1) for k in self.gate_alphabet):
            raise ValueError("costs must be 0 or 1")
        if self.target.n != self.n:
            raise ValueError("target has the wrong qubit count")

    def generators(self) -> list[tuple[Gate, int]]:
        n = self.n
        out: list[tuple[Gate, int]] = []
        for kind in sorted(self.gate_alphabet):
            c = self.cost.get(kind, 1)
            if kind in ("H", "P"):
                out += [(Gate(kind, (q,)), c) for q in range(n)]
            elif kind in ("CZ", "SWAP"):
                out += [(Gate(kind, pair), c) for pair in itertools.combinations(range(n), 2)]
            else:
                out += [(CNOT(a, b), c) for a, b in itertools.permutations(range(n), 2)]
        return out


# -- generic bidirectional 0-1 search ------------------------------------------------


def _close(layer: list, dist: dict, expand: Callable, r: int) -> list:
    queue = list(layer)
    for x in queue:
        for c, y in expand(x):
            if c == 0 and y not in dist:
                dist[y] = r
                queue.append(y)
    return queue


def bidirectional_search(
    start: Hashable,
    goal: Hashable,
    forward: Callable[[Hashable], Iterable[tuple[int, Hashable]]],
    backward: Callable[[Hashable], Iterable[tuple[int, Hashable]]],
    max_states: int = 5_000_000,
) -> int:
    """Minimal 0-1 cost from ``start`` to ``goal``.  Each side grows by whole
    cost levels (closed under free edges); the smaller frontier grows first."""
    sides = [{start: 0}, {goal: 0}]
    expand = [forward, backward]
    frontiers = [_close([start], sides[0], forward, 0), _close([goal], sides[1], backward, 0)]
    radius = [0, 0]
    best = min((d + sides[1][x] for x, d in sides[0].items() if x in sides[1]), default=None)
    while best is None or best > radius[0] + radius[1]:
        live = [s for s in (0, 1) if frontiers[s]]
        if not live:
            break
        s = min(live, key=lambda i: (len(frontiers[i]), i))
        r = radius[s] + 1
        layer = []
        for x in frontiers[s]:
            for c, y in expand[s](x):
                if c == 1 and y not in sides[s]:
                    sides[s][y] = r
                    layer.append(y)
        layer = _close(layer, sides[s], expand[s], r)
        radius[s], frontiers[s] = r, layer
        other = sides[1 - s]
        for y in layer:
            if y in other and (best is None or r + other[y] < best):
                best = r + other[y]
        if len(sides[0]) + len(sides[1]) > max_states:
            raise SearchBudgetExceeded(f"explored more than {max_states} states")
    if best is None:
        raise ValueError("target is not reachable with this alphabet")
    return best


# -- full tableau representation ---------------------------------------------------------


def pack_tableau(m: SymplecticMat) -> int:
    w = 2 * m.n
    return sum(r << (w * i) for i, r in enumerate(m.m.rows))


def _tableau_step(n: int, gens: list[tuple[Gate, int]]):
    w = 2 * n
    mask = (1 << w) - 1

    def step(key: int) -> Iterator[tuple[int, int]]:
        rows = [(key >> (w * i)) & mask for i in range(w)]
        for g, c in gens:
            r = list(rows)
            _apply_columns(r, n, g)
            yield c, sum(v << (w * i) for i, v in enumerate(r))

    return step


# -- P-quotient representation -----------------------------------------------------------


def _pairs(n: int) -> dict[tuple[int, int], int]:
    idx = {}
    for p, (i, j) in enumerate(itertools.combinations(range(n), 2)):
        idx[(i, j)] = idx[(j, i)] = n * n + p
    return idx


def class_key(m: SymplecticMat) -> int:
    """Key of the class of an H-free tableau modulo right-multiplied P gates."""
    if not m.C.is_zero():
        raise ValueError("tableau is not H-free")
    n = m.n
    a = m.A
    s = invert(a) @ m.B
    key = sum(r << (n * i) for i, r in enumerate(a.rows))
    for (i, j), pos in _pairs(n).items():
        if i < j and s[i, j]:
            key |= 1 << pos
    return key


def _quotient_moves(n: int, alphabet: frozenset[str]) -> list[tuple]:
    moves = []
    pairs = _pairs(n)
    if "CZ" in alphabet:
        for i, j in itertools.combinations(range(n), 2):
            moves.append(("cz", pairs[(i, j)]))
    if "CNOT" in alphabet:
        for c, t in itertools.permutations(range(n), 2):
            colmask = sum(1 << (n * i + c) for i in range(n))
            others = [(pairs[(t, j)], pairs[(c, j)]) for j in range(n) if j not in (c, t)]
            for d in (0, 1):
                moves.append(("cx", colmask, t - c, others, pairs[(c, t)] if d else None))
    return moves


def _quotient_step(n: int, alphabet: frozenset[str]):
    moves = _quotient_moves(n, alphabet)

    def step(key: int) -> Iterator[tuple[int, int]]:
        for mv in moves:
            if mv[0] == "cz":
                yield 1, key ^ (1 << mv[1])
                continue
            _, colmask, shift, others, toggle = mv
            x = key & colmask
            k = key ^ (x << shift if shift > 0 else x >> -shift)
            for src, dst in others:
                k ^= ((key >> src) & 1) << dst
            if toggle is not None:
                k ^= 1 << toggle
            yield 1, k

    return step


def _use_quotient(spec: SearchSpec) -> bool:
    return (
        "P" in spec.gate_alphabet
        and spec.cost.get("P", 1) == 0
        and not spec.gate_alphabet & {"H", "SWAP"}
        and all(spec.cost.get(k, 1) == 1 for k in spec.gate_alphabet - {"P"})
        and spec.target.C.is_zero()
    )


def optimal_cost(spec: SearchSpec, max_states: int = 5_000_000, use_quotient: bool | None = None) -> int:
    """Fewest cost-1 gates from the alphabet whose product is the target."""
    if spec.n > MAX_SEARCH_QUBITS:
        raise SearchBudgetExceeded(f"searches are limited to n <= {MAX_SEARCH_QUBITS}")
    n = spec.n
    if use_quotient is None:
        use_quotient = _use_quotient(spec)
    elif use_quotient and not _use_quotient(spec):
        raise ValueError("the P-quotient needs a free P, no H or SWAP, and an H-free target")
    if use_quotient:
        step = _quotient_step(n, spec.gate_alphabet)
        start = class_key(SymplecticMat.identity(n))
        return bidirectional_search(start, class_key(spec.target), step, step, max_states)
    gens = spec.generators()
    fwd = _tableau_step(n, gens)
    bwd = _tableau_step(n, [(g.inverse(), c) for g, c in gens])
    start = pack_tableau(SymplecticMat.identity(n))
    return bidirectional_search(start, pack_tableau(spec.target), fwd, bwd, max_states)


# -- vectorised breadth-first searches ---------------------------------------------------


def _bfs(nbits: int, start: int, successors: Callable[[np.ndarray], Iterable[np.ndarray]]) -> np.ndarray:
    """Unit-cost BFS over keys ``< 2**nbits``; returns distances (-1 unseen)."""
    dist = np.full(1 << nbits, -1, dtype=np.int8)
    dist[start] = 0
    frontier = np.array([start], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        fresh = []
        for nxt in successors(frontier):
            new = nxt[dist[nxt] < 0]
            dist[new] = level
            fresh.append(new)
        frontier = np.unique(np.concatenate(fresh)) if fresh else frontier[:0]
    return dist


def _identity_bits(n: int) -> int:
    return sum(1 << (n * i + i) for i in range(n))


def _col_add(keys: np.ndarray, n: int, c: int, t: int) -> np.ndarray:
    colmask = sum(1 << (n * i + c) for i in range(n))
    x = keys & colmask
    return keys ^ (x << (t - c) if t > c else x >> (c - t))


@lru_cache(maxsize=None)
def gl_distances(n: int) -> np.ndarray:
    """CNOT-count distances over GL(n, F2); index = row-major bits of A."""
    if n > 5:
        raise UnsupportedSizeError("GL search is limited to n <= 5")

    def succ(keys):
        for c, t in itertools.permutations(range(n), 2):
            yield _col_add(keys, n, c, t)

    return _bfs(n * n, _identity_bits(n), succ)


@lru_cache(maxsize=None)
def hfree_distances(n: int) -> np.ndarray:
    """Two-qubit counts over {P, CZ, CNOT} for every class of H-free tableaux."""
    if n > 4:
        raise UnsupportedSizeError("H-free search is limited to n <= 4")
    pairs = _pairs(n)

    def succ(keys):
        for i, j in itertools.combinations(range(n), 2):
            yield keys ^ (1 << pairs[(i, j)])
        for c, t in itertools.permutations(range(n), 2):
            k = _col_add(keys, n, c, t)
            for j in range(n):
                if j not in (c, t):
                    k = k ^ (((keys >> pairs[(t, j)]) & 1) << pairs[(c, j)])
            yield k
            yield k ^ (1 << pairs[(c, t)])

    return _bfs(n * n + n * (n - 1) // 2, _identity_bits(n), succ)


def cz_only_distances(n: int) -> np.ndarray:
    """CZ-count distances over hollow symmetric matrices (edge sets)."""
    m = n * (n - 1) // 2

    def succ(keys):
        for p in range(m):
            yield keys ^ (1 << p)

    return _bfs(m, 0, succ)


# -- gate-count table rows ----------------------------------------------------------------


@dataclass(frozen=True)
class Table1Row:
    n: int
    cz_only: int
    cz_full: int
    c_cnot: int
    c_full: int
    notes: tuple[str, ...] = ()

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.cz_only, self.cz_full, self.c_cnot, self.c_full


def _max_cz_full(n: int) -> int:
    dist = hfree_distances(n)
    base = _identity_bits(n)
    keys = base + (np.arange(1 << (n * (n - 1) // 2), dtype=np.int64) << (n * n))
    return int(dist[keys].max())


def _max_c_full(n: int) -> int:
    dist = hfree_distances(n)[: 1 << (n * n)]
    return int(dist.max())


def verify_cz_full_bound(n: int, bound: int) -> int:
    """Largest optimal two-qubit count over all CZ-stage targets, each found
    by its own bidirectional search; raises if any exceeds ``bound``."""
    worst = 0
    for b in hollow_matrices(n):
        spec = SearchSpec(n, frozenset({"P", "CZ", "CNOT"}), upper_tableau(b))
        c = optimal_cost(spec)
        if c > bound:
            raise AssertionError(f"target needs {c} > {bound} gates")
        worst = max(worst, c)
    return worst


def hollow_matrices(n: int) -> Iterator[BinMatrix]:
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(pairs)):
        rows = [0] * n
        for p, (i, j) in enumerate(pairs):
            if bits >> p & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        yield BinMatrix(n, n, tuple(rows))


def table1_row(n: int) -> Table1Row:
    if not 2 <= n <= 5:
        raise UnsupportedSizeError("table rows are available for 2 <= n <= 5")
    c_cnot = int(gl_distances(n).max())
    if n <= 4:
        cz_only = int(cz_only_distances(n).max())
        return Table1Row(n, cz_only, _max_cz_full(n), c_cnot, _max_c_full(n))
    worst = max(optimize_cz_stage(b).two_qubit_count() for b in hollow_matrices(n))
    return Table1Row(
        n,
        n * (n - 1) // 2,
        worst,
        c_cnot,
        c_cnot,
        (
            "cz_only from the closed form n(n-1)/2",
            "cz_full is the CZ-stage optimizer's worst case, an upper bound only",
            "c_full equals c_cnot since P and CZ gates never shorten a CNOT stage",
        ),
    )


# -- CZ-stage optimizer ------------------------------------------------------------------


@dataclass(frozen=True)
class FanMove:
    """``CNOT(u,v) CZ(v,x)_{x in N} CNOT(u,v)`` toggles the edges u-x and v-x
    for every x in N; with ``uv`` the gates ``P(u) P(v)`` before and
    ``P^3(v)`` after the first CNOT also toggle u-v."""

    u: int
    v: int
    fan: tuple[int, ...]
    uv: bool

    @property
    def cost(self) -> int:
        return 2 + len(self.fan)

    def edges(self) -> frozenset[tuple[int, int]]:
        out = set()
        for x in self.fan:
            out ^= {tuple(sorted((self.u, x))), tuple(sorted((self.v, x)))}
        if self.uv:
            out ^= {tuple(sorted((self.u, self.v)))}
        return frozenset(out)

    def gates(self) -> list[Gate]:
        u, v = self.u, self.v
        out: list[Gate] = [P(u), P(v)] if self.uv else []
        out.append(CNOT(u, v))
        if self.uv:
            out.append(P(v, 3))
        out += [CZ(v, x) for x in self.fan]
        out.append(CNOT(u, v))
        return out


def _edges_of(b: BinMatrix) -> frozenset[tuple[int, int]]:
    return frozenset((i, j) for i in range(b.nrows) for j in range(i + 1, b.nrows) if b[i, j])


@dataclass(frozen=True)
class ConjugatedLayer:
    """``C . P(delta) CZ(edges) . C^-1`` for a short CNOT word ``C``; with a
    single CNOT and a fan of CZs on its target this is the fan identity."""

    word: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int], ...]
    delta: tuple[int, ...]

    @property
    def cost(self) -> int:
        return 2 * len(self.word) + len(self.edges)

    def gates(self) -> list[Gate]:
        out = [CNOT(c, t) for c, t in self.word]
        out += [P(q) for q in self.delta]
        out += [CZ(a, b) for a, b in self.edges]
        out += [CNOT(c, t) for c, t in reversed(self.word)]
        return out


def _wire_map(n: int, word) -> tuple[int, ...]:
    wires = [1 << q for q in range(n)]
    for c, t in word:
        wires[t] ^= wires[c]
    return tuple(wires)


def _form_mask(wires: tuple[int, ...], pairs, terms) -> int:
    """Off-diagonal edge mask of ``sum y_a y_b`` (or ``y_a`` when a == b)
    rewritten over the inputs, where wire ``w`` holds parity ``wires[w]``."""
    out = 0
    for a, b in terms:
        wa, wb = wires[a], wires[b]
        for p, (i, j) in enumerate(pairs):
            if a == b:
                bit = (wa >> i & 1) & (wa >> j & 1)
            else:
                bit = (wa >> i & 1) & (wb >> j & 1) ^ (wa >> j & 1) & (wb >> i & 1)
            if bit:
                out ^= 1 << p
    return out


@lru_cache(maxsize=None)
def _layer_table(n: int, max_word: int = 2) -> dict[int, tuple[int, tuple]]:
    """Cheapest combination of conjugated layers for every edge set, by
    Dijkstra from the empty graph over the XOR action of the layers."""
    pairs = list(itertools.combinations(range(n), 2))
    cnots = list(itertools.permutations(range(n), 2))
    seen: dict[tuple[int, ...], tuple] = {}
    for length in range(max_word + 1):
        for word in itertools.product(cnots, repeat=length):
            seen.setdefault(_wire_map(n, word), word)
    moves: dict[int, ConjugatedLayer] = {}
    for wires, word in seen.items():
        edge_img = [_form_mask(wires, pairs, [e]) for e in pairs]
        diag_span = {0: ()}
        for q in range(n):
            m = _form_mask(wires, pairs, [(q, q)])
            diag_span.update({k ^ m: d + (q,) for k, d in list(diag_span.items()) if k ^ m not in diag_span})
        for bits in range(1 << len(pairs)):
            mask = 0
            for p in range(len(pairs)):
                if bits >> p & 1:
                    mask ^= edge_img[p]
            edges = tuple(e for p, e in enumerate(pairs) if bits >> p & 1)
            cost = 2 * len(word) + len(edges)
            for dm, delta in diag_span.items():
                old = moves.get(mask ^ dm)
                if old is None or cost < old.cost:
                    moves[mask ^ dm] = ConjugatedLayer(word, edges, delta)
    moves.pop(0, None)
    options = sorted(moves.items(), key=lambda kv: (kv[1].cost, kv[0]))
    best: dict[int, tuple[int, tuple]] = {0: (0, ())}
    heap = [(0, 0)]
    while heap:
        d, state = heapq.heappop(heap)
        if best[state][0] < d:
            continue
        for mask, mv in options:
            nxt, c = state ^ mask, d + mv.cost
            if nxt not in best or c < best[nxt][0]:
                best[nxt] = (c, best[state][1] + (mv,))
                heapq.heappush(heap, (c, nxt))
    return best


def _greedy_fans(n: int, edges: set[tuple[int, int]]) -> list:
    out: list = []
    while True:
        best = None
        for u, v in itertools.permutations(range(n), 2):
            common = tuple(
                x for x in range(n)
                if x not in (u, v) and tuple(sorted((u, x))) in edges and tuple(sorted((v, x))) in edges
            )
            uv = tuple(sorted((u, v))) in edges
            gain = 2 * len(common) + uv - (len(common) + 2)
            if common and gain > 0 and (best is None or gain > best[0]):
                best = (gain, FanMove(u, v, common, uv))
        if best is None:
            break
        edges ^= set(best[1].edges())
        out.append(best[1])
    return out + [CZ(*e) for e in sorted(edges)]


def _fix_phases(c: Circuit, target: Circuit) -> None:
    """Append P gates so the phase polynomial of ``c`` matches ``target``."""
    have = canonical_form(extract_descr(c)).poly
    want = canonical_form(extract_descr(target)).poly
    if {m for m in have if m & (m - 1)} != {m for m in want if m & (m - 1)}:
        raise AssertionError("CZ-stage rewrite changed the quadratic part")
    powers = [(want.get(1 << q, 0) - have.get(1 << q, 0)) % 4 for q in range(c.n)]
    c.extend(phase_layer(powers))


def optimize_cz_stage(b: BinMatrix, exact_limit: int = 5) -> Circuit:
    """{P, CZ, CNOT} circuit equal, phases included, to the CZ stage ``b``.

    Up to ``exact_limit`` qubits the cheapest combination of CNOT-conjugated
    CZ/P layers (conjugating words of at most two CNOTs) is looked up;
    larger stages use greedy fan contractions."""
    n = b.nrows
    if not b.is_square() or not b.is_symmetric() or any(b.diag()):
        raise NotHollowSymmetricError("expected a symmetric matrix with zero diagonal")
    edges = _edges_of(b)
    plain = plain_cz_circuit(b)
    if n <= exact_limit:
        pairs = list(itertools.combinations(range(n), 2))
        state = sum(1 << i for i, p in enumerate(pairs) if p in edges)
        plan = list(_layer_table(n)[state][1])
    else:
        plan = _greedy_fans(n, set(edges))
    out = Circuit(n)
    for m in plan:
        out.extend(m.gates() if isinstance(m, (FanMove, ConjugatedLayer)) else [m])
    if out.two_qubit_count() >= len(edges):
        return plain
    _fix_phases(out, plain)
    return out


def phase_exact_equiv(c1: Circuit, c2: Circuit) -> bool:
    return c1.n == c2.n and equivalent(extract_descr(c1), extract_descr(c2))


def plain_cz_circuit(b: BinMatrix) -> Circuit:
    return Circuit(b.nrows, [CZ(i, j) for i, j in sorted(_edges_of(b))])


def worst_c_target(n: int) -> BinMatrix:
    """An A-block with the largest CNOT count (first in key order)."""
    dist = gl_distances(n)
    key = int(np.argmax(dist))
    return BinMatrix(n, n, tuple((key >> (n * i)) & ((1 << n) - 1) for i in range(n)))


__all__ = [
    "SearchSpec",
    "SearchBudgetExceeded",
    "UnsupportedSizeError",
    "NotHollowSymmetricError",
    "optimal_cost",
    "table1_row",
    "optimize_cz_stage",
    "phase_exact_equiv",
    "verify_cz_full_bound",
]
