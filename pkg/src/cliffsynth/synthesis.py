"""Bruhat decomposition of symplectic tableaux and the layered normal forms.

The triangular subgroup used here is the lower one (see
``clifford.classify_subgroup``).  The elimination itself is carried out in the
upper-triangular frame on the qubit-reversed matrix ``R M R`` and mapped back,
since conjugation by the reversal swaps the two frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .clifford import (
    Circuit,
    H,
    LayeredCircuit,
    NotSymplecticError,
    SymplecticMat,
    circuit_to_symplectic,
    classify_subgroup,
    cnots_for_tableau_block,
    hadamard_tableau,
    linear_tableau,
    lower_cnots,
    permutation_cnots,
    permutation_tableau,
    phase_layer,
    upper_tableau,
)
from .f2linalg import (
    BinMatrix,
    invert,
    lpl_decompose,
    lpu_decompose,
    permutation_matrix,
    rank,
    symmetric_ldl,
)
from .phasepoly import fold

NINE_TAGS = ["C", "P", "C", "P", "H", "P", "C", "P", "C"]
SEVEN_TAGS = ["C", "CZ", "P", "H", "P", "CZ", "C"]


class RankDeficientError(ValueError):
    pass


class NotSymplecticHalfError(ValueError):
    pass


class NotBorelError(ValueError):
    pass


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


# -- permutations --------------------------------------------------------------
# A permutation list ``p`` stands for ``permutation_matrix(p)``, which has its
# 1s at ``(i, p[i])``.


def compose(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """The list of ``permutation_matrix(a) @ permutation_matrix(b)``."""
    return tuple(b[a[i]] for i in range(len(a)))


def inverse_perm(p: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def identity_perm(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def _embed(m: BinMatrix, idx: Sequence[int], n: int) -> BinMatrix:
    """Identity of size n with ``m`` placed on the rows and columns ``idx``."""
    rows = [1 << i for i in range(n)]
    for a, i in enumerate(idx):
        r = 0
        for b, j in enumerate(idx):
            if m[a, b]:
                r |= 1 << j
        rows[i] = r
    return BinMatrix(n, n, tuple(rows))


def _symplectic_diag(u: BinMatrix) -> SymplecticMat:
    """``diag(u, u^{-t})``."""
    return linear_tableau(u)


# -- symplectic LPU ------------------------------------------------------------


@dataclass(frozen=True)
class SymplecticLPU:
    L: BinMatrix
    sigma: tuple[int, ...]
    k: int
    D1: BinMatrix
    D2: BinMatrix
    tau: tuple[int, ...]
    U: BinMatrix

    @property
    def n(self) -> int:
        return self.L.nrows

    def middle(self) -> BinMatrix:
        """``[[I_k, 0, D1, D2], [0, 0, 0, I_{n-k}]]``."""
        n, k = self.n, self.k
        rows = []
        for i in range(k):
            r = 1 << i
            for j in range(k):
                r |= self.D1[i, j] << (n + j)
            for j in range(n - k):
                r |= self.D2[i, j] << (n + k + j)
            rows.append(r)
        rows += [1 << (n + i) for i in range(k, n)]
        return BinMatrix(n, 2 * n, tuple(rows))

    def recompose(self) -> BinMatrix:
        ps, pt = permutation_matrix(self.sigma), permutation_matrix(self.tau)
        right = BinMatrix.block(
            [[pt, BinMatrix.zeros(self.n)], [BinMatrix.zeros(self.n), pt]]
        ) @ _symplectic_diag(self.U).m
        return self.L @ ps @ self.middle() @ right


def symplectic_lpu(lower_half: BinMatrix) -> SymplecticLPU:
    """Factor the lower half ``[C | D]`` of a symplectic matrix as
    ``L . sigma . [[I_k, 0, D1, D2], [0, 0, 0, I]] . diag(tau, tau) . diag(U, U^{-t})``
    with L lower and U upper triangular."""
    n2 = lower_half.ncols
    n = lower_half.nrows
    if n2 != 2 * n:
        raise ValueError("expected an n x 2n matrix")
    c, d = lower_half.slice(0, n, 0, n), lower_half.slice(0, n, n, 2 * n)
    if rank(lower_half) != n:
        raise RankDeficientError("lower half must have rank n")
    # rows must span an isotropic subspace
    if c @ d.T != d @ c.T:
        raise NotSymplecticHalfError("rows of [C|D] are not pairwise orthogonal")

    l1, p1, u1 = lpu_decompose(c)
    d1 = invert(l1) @ d @ u1.T
    pivots = sorted(p1.entries, key=lambda e: e[1])
    prow = {i for i, _ in pivots}
    pcol = {j for _, j in pivots}
    free_rows = [i for i in range(n) if i not in prow]
    free_cols = [j for j in range(n) if j not in pcol]

    l2, p2, l3 = lpl_decompose(d1.submatrix(free_rows, free_cols))
    e = _embed(l2, free_rows, n)
    f = _embed(l3, free_cols, n)
    d2 = invert(e) @ d1 @ invert(f)

    # order rows and columns so that pivots come first
    p2map = p2.row_map()
    tail = sorted(range(len(free_rows)), key=lambda a: p2map[a])
    rows = [i for i, _ in pivots] + [free_rows[a] for a in tail]
    cols = [j for _, j in pivots] + free_cols
    k = len(pivots)

    sigma = [0] * n
    for i, r in enumerate(rows):
        sigma[r] = i
    z = d2.submatrix(rows, cols)
    return SymplecticLPU(
        L=l1 @ e,
        sigma=tuple(sigma),
        k=k,
        D1=z.slice(0, k, 0, k),
        D2=z.slice(0, k, k, n),
        tau=tuple(cols),
        U=invert(f).T @ u1,
    )


# -- Bruhat decomposition ------------------------------------------------------


@dataclass(frozen=True)
class BruhatFactors:
    """``m = W1 . H_S . pi . W2`` with W1, W2 Borel and ``H_S`` the Hadamards
    on the qubit set ``hadamards``."""

    W1: SymplecticMat
    hadamards: tuple[int, ...]
    pi: tuple[int, ...]
    W2: SymplecticMat

    @property
    def k(self) -> int:
        return len(self.hadamards)

    @property
    def n(self) -> int:
        return self.W1.n

    def weyl(self) -> SymplecticMat:
        return hadamard_tableau(self.n, self.hadamards) @ permutation_tableau(self.pi)

    def recompose(self) -> SymplecticMat:
        return self.W1 @ self.weyl() @ self.W2


def _bruhat_upper(m: SymplecticMat) -> BruhatFactors:
    """Elimination in the upper-triangular frame (Borel = C=0, A upper)."""
    n = m.n
    lpu = symplectic_lpu(m.m.slice(n, 2 * n, 0, 2 * n))
    k = lpu.k
    g1 = _symplectic_diag(invert(lpu.L).T)  # diag(L^{-t}, L)
    g2 = _symplectic_diag(lpu.U)
    ps, pt = permutation_tableau(lpu.sigma), permutation_tableau(lpu.tau)
    m1 = ps.inverse() @ g1.inverse() @ m @ g2.inverse() @ pt.inverse()

    # clear the A-block with a B0 row operation
    a = m1.A
    s_rows = [0] * n
    for i in range(k):
        for j in range(k):
            s_rows[i] |= a[i, j] << j
        for j in range(k, n):
            s_rows[i] |= a[j, i] << j
    for i in range(k, n):
        for j in range(k):
            s_rows[i] |= a[i, j] << j
    x = upper_tableau(BinMatrix(n, n, tuple(s_rows)))
    m2 = x @ m1

    # clear the D-block with a B0 column operation
    d, b = m2.D, m2.B
    t_rows = [0] * n
    for i in range(n):
        for j in range(n):
            if i < k:
                v = d[i, j]
            elif j < k:
                v = d[j, i]
            else:
                v = b[i, j]
            t_rows[i] |= v << j
    y = upper_tableau(BinMatrix(n, n, tuple(t_rows)))
    hk = hadamard_tableau(n, range(k))
    if m2 @ y != hk:
        raise InvariantError("Bruhat elimination did not reach a Weyl element")

    # m = g1 ps x hk y pt g2; move the permutations past x, hk and y
    w1 = g1 @ ps @ x @ ps.inverse()
    w2 = pt.inverse() @ y @ pt @ g2
    hs = tuple(i for i in range(n) if lpu.sigma[i] < k)
    pi = compose(lpu.sigma, lpu.tau)
    return BruhatFactors(w1, hs, pi, w2)


def _reverse(m: SymplecticMat) -> SymplecticMat:
    r = permutation_tableau(tuple(range(m.n - 1, -1, -1)))
    return r @ m @ r


def bruhat_decompose(m: SymplecticMat) -> BruhatFactors:
    if not isinstance(m, SymplecticMat):
        raise NotSymplecticError("expected a SymplecticMat")
    n = m.n
    up = _bruhat_upper(_reverse(m))
    rho = tuple(range(n - 1, -1, -1))
    hs = tuple(sorted(rho[q] for q in up.hadamards))
    pi = compose(compose(rho, up.pi), rho)
    return BruhatFactors(_reverse(up.W1), hs, pi, _reverse(up.W2))


# -- Borel factoring -------------------------------------------------------------


def _cstage(n: int, a: BinMatrix) -> Circuit:
    return Circuit(n, lower_cnots(a))


def _pstage(n: int, diag: Sequence[int]) -> Circuit:
    return Circuit(n, phase_layer(diag))


def borel_factor(w: SymplecticMat, side: str = "left") -> LayeredCircuit:
    """-C-P-C-P- (``left``) or -P-C-P-C- (``right``) with both C stages
    lower-triangular."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if "Borel" not in classify_subgroup(w):
        raise NotBorelError("matrix is not in the Borel subgroup")
    n = w.n
    a, b = w.A, w.B
    empty = Circuit(n)
    if side == "left":
        # w = diag(A) [[I, S], [0, I]], S = A^{-1} B = L L^t + Lam
        s = invert(a) @ b
        if s.is_diagonal():
            stages = [("C", _cstage(n, a)), ("P", empty), ("C", empty), ("P", _pstage(n, s.diag()))]
        else:
            l, lam = symmetric_ldl(s)
            stages = [
                ("C", _cstage(n, a @ l)),
                ("P", _pstage(n, [1] * n)),
                ("C", _cstage(n, invert(l))),
                ("P", _pstage(n, lam.diag())),
            ]
    else:
        # w = [[I, S'], [0, I]] diag(A), S' = B A^t
        s = b @ a.T
        if s.is_diagonal():
            stages = [("P", _pstage(n, s.diag())), ("C", empty), ("P", empty), ("C", _cstage(n, a))]
        else:
            l, lam = symmetric_ldl(s)
            stages = [
                ("P", _pstage(n, lam.diag())),
                ("C", _cstage(n, l)),
                ("P", _pstage(n, [1] * n)),
                ("C", _cstage(n, invert(l) @ a)),
            ]
    return LayeredCircuit(n, stages)


# -- normal forms ----------------------------------------------------------------


def _hstage(n: int, qubits: Sequence[int]) -> Circuit:
    return Circuit(n, [H(q) for q in qubits])


def nine_stage(m: SymplecticMat) -> LayeredCircuit:
    """-C-P-C-P-H-P-C-P-C-; the qubit permutation is merged into the seventh
    stage, which is therefore lower-triangular only when the permutation is
    trivial."""
    n = m.n
    f = bruhat_decompose(m)
    left = borel_factor(f.W1, "left")
    right = borel_factor(f.W2, "right")
    # pi . P(lam) = P(lam') . pi with lam'[i] = lam[pi[i]]
    lam = right.stages[0][1]
    powers = [0] * n
    for g in lam:
        powers[g.qubits[0]] = g.power
    moved = [powers[f.pi[i]] for i in range(n)]
    merged = circuit_to_symplectic(Circuit(n, permutation_cnots(f.pi)) + right.stages[1][1])
    stages = list(left.stages)
    stages.append(("H", _hstage(n, f.hadamards)))
    stages.append(("P", _pstage(n, moved)))
    c7 = merged.A
    if c7.is_unitriangular(lower=True):
        stages.append(("C", _cstage(n, c7)))
    else:
        stages.append(("C", Circuit(n, cnots_for_tableau_block(c7))))
    stages += right.stages[2:]
    return LayeredCircuit(n, stages)


def seven_stage(
    m: SymplecticMat, left_order: str = "C-CZ-P", right_order: str = "P-CZ-C"
) -> LayeredCircuit:
    """-C-CZ-P-H-P-CZ-C- by folding each Borel side into three stages."""
    n = m.n
    f = bruhat_decompose(m)
    left = borel_factor(f.W1, "left").flatten()
    right = Circuit(n, permutation_cnots(f.pi)) + borel_factor(f.W2, "right").flatten()
    stages = list(fold(left, left_order).stages)
    stages.append(("H", _hstage(n, f.hadamards)))
    stages += fold(right, right_order).stages
    return LayeredCircuit(n, [(t, _drop_paulis(c)) for t, c in stages])


def _drop_paulis(c: Circuit) -> Circuit:
    # Z = P^2 is invisible at the tableau level
    return Circuit(c.n, [g for g in c if not (g.name == "P" and g.power == 2)])


# -- Bruhat cells ------------------------------------------------------------------


@dataclass(frozen=True)
class BruhatCell:
    """Block structure ``(k, sigma, tau)``: the Weyl representative is
    ``sigma . (1 x ... x 1 x H x ... x H) . tau`` with Hadamards on the last
    ``k`` qubits."""

    k: int
    sigma: tuple[int, ...]
    tau: tuple[int, ...]

    @property
    def pi(self) -> tuple[int, ...]:
        return compose(self.sigma, self.tau)

    def representative(self) -> SymplecticMat:
        n = len(self.sigma)
        h = hadamard_tableau(n, range(n - self.k, n))
        return permutation_tableau(self.sigma) @ h @ permutation_tableau(self.tau)


def weyl_cell(m: SymplecticMat) -> BruhatCell:
    f = bruhat_decompose(m)
    n, hs = m.n, set(f.hadamards)
    # sigma sends the Hadamard qubits to the last k positions
    order = [q for q in range(n) if q not in hs] + sorted(hs)
    sigma = [0] * n
    for pos, q in enumerate(order):
        sigma[q] = pos
    sigma_t = tuple(sigma)
    tau = compose(inverse_perm(sigma_t), f.pi)
    return BruhatCell(f.k, sigma_t, tau)


def cell_signature(m: SymplecticMat) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
    """``(k, hadamard set, pi)``, the data that identifies the double coset."""
    f = bruhat_decompose(m)
    return f.k, f.hadamards, f.pi
