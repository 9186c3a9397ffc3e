import random
import sys

import pytest

from cliffsynth.f2linalg import BinMatrix


def naive_mul(a, b):
    """Triple-loop product over GF(2) on nested lists."""
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    return [[sum(a[i][t] * b[t][j] for t in range(k)) % 2 for j in range(m)] for i in range(n)]


def random_matrix(rng, r, c):
    return BinMatrix(r, c, tuple(rng.getrandbits(c) for _ in range(r)))


def random_symmetric(rng, n, hollow=False):
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            v = rng.getrandbits(1)
            if i == j and hollow:
                v = 0
            rows[i][j] = rows[j][i] = v
    return BinMatrix.from_lists(rows)


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.TITLES):
        parts = mod.RESULTS.get(num)
        if not parts:
            terminalreporter.write_line(f"criterion {num:2d} {mod.TITLES[num]}: NOT RUN")
            continue
        failed = [f"{p} ({d})" if d else p for p, ok, d in parts if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {num:2d} {mod.TITLES[num]}: {status}"
        if failed:
            line += " - failed: " + "; ".join(failed)
        terminalreporter.write_line(line)
