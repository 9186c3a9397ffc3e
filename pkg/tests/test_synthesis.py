import itertools
import random

import pytest

from cliffsynth.clifford import (
    CNOT,
    CZ,
    SWAP,
    Circuit,
    H,
    P,
    SymplecticMat,
    circuit_to_symplectic,
    classify_subgroup,
    hadamard_tableau,
    is_symplectic,
    random_borel,
    random_symplectic,
)
from cliffsynth.f2linalg import BinMatrix, is_invertible
from cliffsynth.synthesis import (
    NINE_TAGS,
    SEVEN_TAGS,
    NotBorelError,
    NotSymplecticHalfError,
    RankDeficientError,
    borel_factor,
    bruhat_decompose,
    nine_stage,
    seven_stage,
    symplectic_lpu,
    weyl_cell,
)


def all_sp2():
    out = []
    for bits in itertools.product([0, 1], repeat=4):
        m = BinMatrix.from_lists([bits[:2], bits[2:]])
        if is_symplectic(m):
            out.append(SymplecticMat(1, m))
    return out


def lower_half(m):
    return m.m.slice(m.n, 2 * m.n, 0, 2 * m.n)


def tab(n, *gates):
    return circuit_to_symplectic(Circuit(n, list(gates)))


class TestSymplecticLPU:
    def test_k0(self):
        f = symplectic_lpu(lower_half(SymplecticMat.identity(3)))
        assert f.k == 0 and f.L == BinMatrix.identity(3) and f.U == BinMatrix.identity(3)

    def test_kn(self):
        f = symplectic_lpu(lower_half(hadamard_tableau(3, range(3))))
        assert f.k == 3 and f.D1.is_zero()
        assert f.L == f.U == BinMatrix.identity(3)

    @pytest.mark.parametrize("seed", range(30))
    def test_random(self, seed):
        rng = random.Random(seed)
        n = 1 + seed % 6
        m = random_symplectic(n, rng)
        f = symplectic_lpu(lower_half(m))
        assert f.recompose() == lower_half(m)
        assert f.L.is_lower_triangular() and is_invertible(f.L)
        assert f.U.is_upper_triangular() and is_invertible(f.U)
        assert sorted(f.sigma) == sorted(f.tau) == list(range(n))
        assert f.D1.is_symmetric()

    def test_rank_deficient(self):
        with pytest.raises(RankDeficientError):
            symplectic_lpu(BinMatrix.zeros(2, 4))

    def test_not_isotropic(self):
        # rows (1,0|1,0) and (0,1|1,0) pair to 1
        half = BinMatrix.from_lists([[1, 0, 1, 0], [0, 1, 1, 0]])
        with pytest.raises(NotSymplecticHalfError):
            symplectic_lpu(half)


class TestBorel:
    def test_identity(self):
        lc = borel_factor(SymplecticMat.identity(3))
        assert lc.tags == ["C", "P", "C", "P"] and all(len(c) == 0 for _, c in lc.stages)

    def test_phase(self):
        lc = borel_factor(tab(3, P(0)))
        assert [g for _, c in lc.stages for g in c] == [P(0)]
        assert lc.stages[3][1].gates == [P(0)]

    def test_not_borel(self):
        with pytest.raises(NotBorelError):
            borel_factor(tab(2, H(0)))
        with pytest.raises(NotBorelError):
            borel_factor(tab(2, CNOT(0, 1)))

    @pytest.mark.parametrize("side", ["left", "right"])
    @pytest.mark.parametrize("seed", range(15))
    def test_random(self, side, seed):
        w = random_borel(6, random.Random(seed))
        lc = borel_factor(w, side)
        lc.validate()
        assert lc.tags == (["C", "P", "C", "P"] if side == "left" else ["P", "C", "P", "C"])
        assert circuit_to_symplectic(lc.flatten()) == w
        for tag, c in lc.stages:
            if tag == "C":
                assert "C_down" in classify_subgroup(circuit_to_symplectic(c))


class TestBruhat:
    def test_identity(self):
        f = bruhat_decompose(SymplecticMat.identity(4))
        assert f.k == 0 and f.W1 == f.W2 == SymplecticMat.identity(4)

    def test_all_hadamards(self):
        f = bruhat_decompose(hadamard_tableau(4, range(4)))
        assert f.k == 4 and f.pi == (0, 1, 2, 3)
        assert f.W1 == f.W2 == SymplecticMat.identity(4)

    @pytest.mark.parametrize("seed", range(40))
    def test_random(self, seed):
        rng = random.Random(seed)
        n = 1 + seed % 8
        m = random_symplectic(n, rng)
        f = bruhat_decompose(m)
        assert f.recompose() == m
        assert "Borel" in classify_subgroup(f.W1) and "Borel" in classify_subgroup(f.W2)


class TestNormalForms:
    def test_identity(self):
        for fn, tags in ((nine_stage, NINE_TAGS), (seven_stage, SEVEN_TAGS)):
            lc = fn(SymplecticMat.identity(3))
            assert lc.tags == tags and len(lc.flatten()) == 0

    def test_cnot_down_single_stage(self):
        lc = nine_stage(tab(2, CNOT(1, 0)))
        nonempty = [i for i, (_, c) in enumerate(lc.stages) if len(c)]
        assert len(nonempty) == 1 and lc.tags[nonempty[0]] == "C"

    def test_cz_only_cz_stage(self):
        lc = seven_stage(tab(2, CZ(0, 1)))
        nonempty = [t for t, c in lc.stages if len(c)]
        assert nonempty == ["CZ"]

    @pytest.mark.parametrize("m", all_sp2(), ids=lambda m: str(m.m.rows))
    def test_sp2_exhaustive(self, m):
        for fn in (nine_stage, seven_stage):
            lc = fn(m)
            lc.validate()
            assert circuit_to_symplectic(lc.flatten()) == m

    @pytest.mark.parametrize("seed", range(30))
    def test_random(self, seed):
        rng = random.Random(seed)
        n = 2 + seed % 7
        m = random_symplectic(n, rng)
        nine, seven = nine_stage(m), seven_stage(m)
        assert nine.tags == NINE_TAGS and seven.tags == SEVEN_TAGS
        for lc in (nine, seven):
            lc.validate()
            assert circuit_to_symplectic(lc.flatten()) == m

    @pytest.mark.parametrize("seed", range(20))
    def test_c_down_when_permutation_trivial(self, seed):
        rng = random.Random(seed)
        m = random_borel(4, rng) @ hadamard_tableau(4, rng.sample(range(4), 2)) @ random_borel(4, rng)
        lc = nine_stage(m)
        for tag, c in lc.stages:
            if tag == "C":
                assert "C_down" in classify_subgroup(circuit_to_symplectic(c))

    @pytest.mark.parametrize("lo, ro", [("C-CZ-P", "P-CZ-C"), ("CZ-P-C", "C-P-CZ"), ("P-CZ-C", "C-CZ-P")])
    def test_alternative_orders(self, lo, ro):
        m = random_symplectic(4, random.Random(9))
        lc = seven_stage(m, lo, ro)
        assert lc.tags == lo.split("-") + ["H"] + ro.split("-")
        assert circuit_to_symplectic(lc.flatten()) == m


class TestWeylCell:
    def test_borel(self):
        cell = weyl_cell(random_borel(4, random.Random(1)))
        assert cell.k == 0 and cell.pi == (0, 1, 2, 3)

    def test_all_h(self):
        cell = weyl_cell(hadamard_tableau(3, range(3)))
        assert cell.k == 3 and cell.pi == (0, 1, 2)

    def test_swap(self):
        cell = weyl_cell(tab(2, SWAP(0, 1)))
        assert cell.k == 0 and cell.pi == (1, 0)

    @pytest.mark.parametrize("seed", range(20))
    def test_representative_in_same_cell(self, seed):
        m = random_symplectic(5, random.Random(seed))
        cell = weyl_cell(m)
        rep = weyl_cell(cell.representative())
        assert (rep.k, rep.pi) == (cell.k, cell.pi)

    @pytest.mark.parametrize("seed", range(30))
    def test_double_coset_invariance(self, seed):
        rng = random.Random(seed)
        n = 2 + seed % 5
        m = random_symplectic(n, rng)
        b1, b2 = random_borel(n, rng), random_borel(n, rng)
        c1, c2 = weyl_cell(m), weyl_cell(b1 @ m @ b2)
        assert (c1.k, c1.pi) == (c2.k, c2.pi)

    @pytest.mark.parametrize("seed", range(30))
    def test_k_subadditive(self, seed):
        rng = random.Random(seed)
        n = 2 + seed % 5
        m1, m2 = random_symplectic(n, rng), random_symplectic(n, rng)
        assert weyl_cell(m1 @ m2).k <= weyl_cell(m1).k + weyl_cell(m2).k
