"""Acceptance criteria.  Each criterion records its parts in RESULTS; the
terminal summary (see conftest.py) prints one PASS/FAIL line per criterion."""

import io
import itertools
import random
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliffsynth import cli
from cliffsynth.clifford import (
    CNOT,
    P,
    Circuit,
    SymplecticMat,
    circuit_to_symplectic,
    classify_subgroup,
    is_lnn_legal,
    is_symplectic,
    random_borel,
    random_invertible,
    random_symplectic,
    two_qubit_depth,
)
from cliffsynth.f2linalg import BinMatrix
from cliffsynth.lnn import IntervalFunc, c_stage_lnn, pipeline_lnn, reversal_network
from cliffsynth.oracle import (
    cz_only_distances,
    gl_distances,
    optimize_cz_stage,
    phase_exact_equiv,
    plain_cz_circuit,
    table1_row,
    verify_cz_full_bound,
)
from cliffsynth.phasepoly import PhaseDescr, extract_descr, fold, phase_evaluate, reduce_to_quadratic
from cliffsynth.synthesis import NINE_TAGS, SEVEN_TAGS, nine_stage, seven_stage, weyl_cell

from sim import simulate_basis

TITLES = {
    1: "optimal counts, exact rows n=2,3",
    2: "optimal counts, n=4,5",
    3: "(-P-C-)^m folding",
    4: "six-term parity identity",
    5: "reversal network",
    6: "9- and 7-stage round trip",
    7: "nearest-neighbour depth bounds",
    8: "star CZ-stage rewrite",
    9: "Bruhat cell invariance",
    10: "CLI round trip",
}
RESULTS: dict[int, list[tuple[str, bool, str]]] = {}


def record(num: int, part: str, ok: bool, detail: str = "") -> None:
    RESULTS.setdefault(num, []).append((part, ok, detail))
    print(f"criterion {num} [{part}]: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"criterion {num} [{part}]: {detail}"


# -- 1 -------------------------------------------------------------------------------


def test_c1_table_rows_small():
    t = time.perf_counter()
    rows = {n: table1_row(n).as_tuple() for n in (2, 3)}
    elapsed = time.perf_counter() - t
    ok = rows == {2: (1, 1, 3, 3), 3: (3, 3, 6, 6)} and elapsed < 60
    record(1, "rows", ok, f"{rows} in {elapsed:.1f}s")


# -- 2 -------------------------------------------------------------------------------


def test_c2_linear_counts():
    c4, c5 = int(gl_distances(4).max()), int(gl_distances(5).max())
    record(2, "c_cnot", (c4, c5) == (9, 12), f"n=4 {c4}, n=5 {c5}")


def test_c2_cz_only():
    searched = int(cz_only_distances(4).max())
    row5 = table1_row(5)
    ok = searched == 6 == 4 * 3 // 2 and row5.cz_only == 10
    record(2, "cz_only", ok, f"n=4 search {searched}, n=5 {row5.cz_only}")


def test_c2_cz_full_n4():
    worst = verify_cz_full_bound(4, 5)
    record(2, "cz_full n=4", worst <= 5, f"worst per-target optimum {worst}")


def test_c2_cz_full_n5_bound():
    row = table1_row(5)
    ok = row.cz_full <= 7 and any("upper bound" in note for note in row.notes)
    record(2, "cz_full n=5 bound", ok, f"constructive bound {row.cz_full}")


# -- 3 -------------------------------------------------------------------------------


def random_pc_word(rng: random.Random) -> Circuit:
    n = rng.randint(1, 6)
    c = Circuit(n)
    for _ in range(rng.randint(1, 5)):
        for q in range(n):
            if rng.random() < 0.5:
                c.append(P(q, rng.randint(1, 3)))
        if n > 1:
            for _ in range(rng.randint(0, 2 * n)):
                c.append(CNOT(*rng.sample(range(n), 2)))
    return c


def test_c3_folding():
    rng = random.Random(2024)
    t = time.perf_counter()
    bad = 0
    for _ in range(200):
        c = random_pc_word(rng)
        lc = fold(c)
        flat = lc.flatten()
        d = extract_descr(c)
        if lc.tags != ["P", "CZ", "C"]:
            bad += 1
            continue
        for x in range(1 << c.n):
            if phase_evaluate(d, x) != simulate_basis(flat, x) or simulate_basis(c, x) != simulate_basis(flat, x):
                bad += 1
                break
    elapsed = time.perf_counter() - t
    record(3, "200 words", bad == 0 and elapsed < 30, f"{bad} mismatches in {elapsed:.1f}s")


# -- 4 -------------------------------------------------------------------------------


def test_c4_identity_truth_table():
    ok = all(
        u * (a ^ b ^ c) % 4 == 3 * u * (a + b + c + (a ^ b) + (a ^ c) + (b ^ c)) % 4
        for u in range(4)
        for a, b, c in itertools.product((0, 1), repeat=3)
    )
    record(4, "8 assignments", ok)


_REDUCTION_EXAMPLES = [0]


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 6), st.dictionaries(st.integers(1, 63), st.integers(1, 3), max_size=8))
def test_c4_reduction_property(n, poly):
    poly = {m & ((1 << n) - 1): u for m, u in poly.items() if m & ((1 << n) - 1)}
    d = PhaseDescr(n, poly)
    q = reduce_to_quadratic(d)
    ok = q.is_quadratic() and all(phase_evaluate(d, x) == phase_evaluate(q, x) for x in range(1 << n))
    _REDUCTION_EXAMPLES[0] += 1
    if not ok:
        record(4, "reduction property", False, f"poly {poly}")


def test_c4_reduction_recorded():
    # runs after the property test; its failures are recorded there
    ran = _REDUCTION_EXAMPLES[0]
    record(4, "reduction property examples", ran > 0, f"{ran} examples checked")


# -- 5 -------------------------------------------------------------------------------


@pytest.mark.parametrize("n", range(2, 17))
def test_c5_depth(n):
    d = two_qubit_depth(reversal_network(n).circuit())
    record(5, f"depth n={n}", d == 2 * n + 2, f"depth {d}, expected {2 * n + 2}")


def _coverage(n):
    net = reversal_network(n)
    everything = {IntervalFunc(j, k) for j in range(1, n + 1) for k in range(j, n + 1)}
    seen: list[IntervalFunc] = []
    for t in net.full_boundaries():
        if set(seen) >= everything:
            break
        seen += net.wire_trace[t]
    return seen, everything


@pytest.mark.parametrize("n", range(2, 17))
def test_c5_coverage(n):
    seen, everything = _coverage(n)
    ok = set(seen) == everything and len(seen) == len(everything) == n * (n + 1) // 2
    record(5, f"coverage n={n}", ok, f"{len(seen)} trace entries for {len(everything)} intervals")


def test_c5_n7_traces():
    rows = [
        [(1, 1), (2, 3), (4, 5), (6, 7), (7, 7)],
        [(2, 2), (1, 3), (2, 5), (4, 7), (6, 6)],
        [(3, 3), (1, 5), (2, 7), (4, 6), (5, 5)],
        [(4, 4), (3, 5), (1, 7), (2, 6), (4, 4)],
        [(5, 5), (3, 7), (1, 6), (2, 4), (3, 3)],
        [(6, 6), (5, 7), (3, 6), (1, 4), (2, 2)],
        [(7, 7), (5, 6), (3, 4), (1, 2), (1, 1)],
    ]
    net = reversal_network(7)
    got = [[net.wire_trace[t][w] for t in net.full_boundaries()] for w in range(7)]
    record(5, "n=7 traces", got == [[IntervalFunc(*p) for p in row] for row in rows])


def test_c5_runtime():
    t = time.perf_counter()
    for n in range(2, 17):
        two_qubit_depth(reversal_network(n).circuit())
        _coverage(n)
    elapsed = time.perf_counter() - t
    record(5, "runtime", elapsed < 1, f"{elapsed:.3f}s")


# -- 6 -------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def normal_forms():
    sp2 = []
    for bits in itertools.product((0, 1), repeat=4):
        m = BinMatrix.from_lists([bits[:2], bits[2:]])
        if is_symplectic(m):
            sp2.append(SymplecticMat(1, m))
    rng = random.Random(6)
    cases = sp2 + [random_symplectic(n, rng) for n in range(2, 9) for _ in range(500)]
    t = time.perf_counter()
    out = [(m, nine_stage(m), seven_stage(m)) for m in cases]
    return len(sp2), out, time.perf_counter() - t


def test_c6_round_trip(normal_forms):
    n_sp2, out, elapsed = normal_forms
    bad = sum(
        1
        for m, nine, seven in out
        if nine.tags != NINE_TAGS
        or seven.tags != SEVEN_TAGS
        or circuit_to_symplectic(nine.flatten()) != m
        or circuit_to_symplectic(seven.flatten()) != m
    )
    ok = n_sp2 == 6 and bad == 0 and elapsed < 60
    record(6, "round trip", ok, f"{len(out)} tableaux, {bad} failures, {elapsed:.1f}s")


def test_c6_c_down_layers(normal_forms):
    _, out, _ = normal_forms
    bad = sum(
        1
        for _, nine, _ in out
        if any(tag == "C" and "C_down" not in classify_subgroup(circuit_to_symplectic(c)) for tag, c in nine.stages)
    )
    record(6, "C layers lower-triangular", bad == 0, f"{bad} of {len(out)} decompositions have a non-triangular C layer")


# -- 7 -------------------------------------------------------------------------------


def test_c7_pipeline():
    rng = random.Random(7)
    worst = {}
    bad = 0
    for i in range(200):
        n = 2 + i % 7
        m = random_symplectic(n, rng)
        c = pipeline_lnn(m)
        d = two_qubit_depth(c)
        worst[n] = max(worst.get(n, 0), d)
        if d > 14 * n - 4 or not is_lnn_legal(c) or circuit_to_symplectic(c) != m:
            bad += 1
    record(7, "pipeline", bad == 0, f"{bad} failures, worst depths {worst}")


def test_c7_c_stage():
    rng = random.Random(77)
    bad = 0
    for i in range(200):
        n = 1 + i % 8
        a = random_invertible(n, rng)
        c = c_stage_lnn(a)
        if two_qubit_depth(c) > 5 * n or not is_lnn_legal(c) or circuit_to_symplectic(c).A != a:
            bad += 1
    record(7, "C stage", bad == 0, f"{bad} failures")


# -- 8 -------------------------------------------------------------------------------


def test_c8_star_rewrite():
    rows = [0] * 5
    for i, j in [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]:
        rows[i] |= 1 << j
        rows[j] |= 1 << i
    b = BinMatrix(5, 5, tuple(rows))
    c = optimize_cz_stage(b)
    plain = plain_cz_circuit(b)
    ok = c.two_qubit_count() == 5 and len(plain) == 7 and phase_exact_equiv(c, plain)
    record(8, "5 gates", ok, f"{c.two_qubit_count()} two-qubit gates")


# -- 9 -------------------------------------------------------------------------------


def test_c9_double_coset():
    rng = random.Random(9)
    bad = 0
    for i in range(200):
        n = 2 + i % 6
        m = random_symplectic(n, rng)
        b1, b2 = random_borel(n, rng), random_borel(n, rng)
        if weyl_cell(b1 @ m @ b2) != weyl_cell(m):
            bad += 1
    record(9, "invariance", bad == 0, f"{bad} of 200 differ")


def test_c9_subadditive():
    rng = random.Random(99)
    bad = 0
    for i in range(200):
        n = 2 + i % 6
        m1, m2 = random_symplectic(n, rng), random_symplectic(n, rng)
        if weyl_cell(m1 @ m2).k > weyl_cell(m1).k + weyl_cell(m2).k:
            bad += 1
    record(9, "k subadditive", bad == 0, f"{bad} of 200 violate")


# -- 10 ------------------------------------------------------------------------------


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("mode", [["--stages", "7"], ["--stages", "9"], ["--lnn"]], ids=["7", "9", "lnn"])
def test_c10_cli(tmp_path, mode):
    rng = random.Random(10)
    bad = 0
    for i in range(50):
        n = 1 + i % 6
        mp = tmp_path / "m.txt"
        mp.write_text(cli.format_matrix(random_symplectic(n, rng)))
        first = _cli(["synth", mp, *mode])
        again = _cli(["synth", mp, *mode])
        cp = tmp_path / "c.txt"
        cp.write_text(first[1])
        if first[0] != 0 or first != again or _cli(["verify", cp, mp])[0] != 0:
            bad += 1
    record(10, f"synth/verify {' '.join(mode)}", bad == 0, f"{bad} of 50 failed")
