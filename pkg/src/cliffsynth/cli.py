"""Command line front end.

Circuit files start with ``qubits N`` and hold one gate per line (``H q``,
``P q``, ``PDG q``, ``Z q``, ``CNOT c t``, ``CZ a b``, ``SWAP a b``); ``#``
starts a comment and ``# stage X`` marks a stage boundary.  Matrix files
start with ``n N`` followed by the 2N rows of the tableau as bits.

Exit codes: 0 ok, 1 semantic failure, 2 malformed input, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence, TextIO

from .clifford import (
    Circuit,
    Gate,
    InvalidGateError,
    LayeredCircuit,
    SymplecticMat,
    circuit_to_symplectic,
    is_lnn_legal,
    is_symplectic,
    random_clifford_word,
    two_qubit_depth,
)
from .f2linalg import BinMatrix
from .lnn import pipeline_lnn
from .oracle import NotHollowSymmetricError, UnsupportedSizeError, optimize_cz_stage, table1_row
from .phasepoly import ORDERS, HadamardNotSupportedError, fold
from .synthesis import InvariantError, nine_stage, seven_stage, weyl_cell

EXIT_OK, EXIT_FAIL, EXIT_MALFORMED, EXIT_INVARIANT = 0, 1, 2, 3

_ONE_QUBIT = {"H": ("H", 1), "P": ("P", 1), "Z": ("P", 2), "PDG": ("P", 3)}
_TWO_QUBIT = {"CNOT", "CZ", "SWAP"}


class ParseError(ValueError):
    pass


# -- circuit files -----------------------------------------------------------------


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _int(tok: str, what: str, lineno: int) -> int:
    try:
        v = int(tok, 10)
    except ValueError:
        raise ParseError(f"line {lineno}: bad {what} {tok!r}") from None
    if v < 0:
        raise ParseError(f"line {lineno}: negative {what}")
    return v


def _header(lines: list[tuple[int, str]], key: str) -> tuple[int, list[tuple[int, str]]]:
    if not lines:
        raise ParseError(f"missing '{key} N' header")
    lineno, text = lines[0]
    toks = text.split()
    if len(toks) != 2 or toks[0] != key:
        raise ParseError(f"line {lineno}: expected '{key} N'")
    n = _int(toks[1], "size", lineno)
    if n < 1:
        raise ParseError(f"line {lineno}: size must be positive")
    return n, lines[1:]


def parse_layered(text: str) -> LayeredCircuit:
    """Parse a circuit file, keeping ``# stage X`` boundaries."""
    n: int | None = None
    stages: list[tuple[str, list[Gate]]] = []
    loose: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        code, _, comment = raw.partition("#")
        code = code.strip()
        if not code:
            marker = comment.split()
            if n is not None and len(marker) == 2 and marker[0] == "stage":
                stages.append((marker[1], []))
            continue
        if n is None:
            n, _ = _header([(lineno, code)], "qubits")
            continue
        g = _parse_gate(code, lineno, n)
        (stages[-1][1] if stages else loose).append(g)
    if n is None:
        raise ParseError("missing 'qubits N' header")
    if stages and loose:
        raise ParseError("gates before the first stage marker")
    if not stages:
        return LayeredCircuit(n, [("", Circuit(n, loose))])
    return LayeredCircuit(n, [(tag, Circuit(n, gs)) for tag, gs in stages])


def _parse_gate(line: str, lineno: int, n: int) -> Gate:
    toks = line.split()
    name = toks[0].upper()
    if name in _ONE_QUBIT:
        arity = 1
    elif name in _TWO_QUBIT:
        arity = 2
    else:
        raise ParseError(f"line {lineno}: unknown gate {toks[0]!r}")
    if len(toks) != arity + 1:
        raise ParseError(f"line {lineno}: {name} takes {arity} qubit(s)")
    qs = tuple(_int(t, "qubit", lineno) for t in toks[1:])
    if any(q >= n for q in qs):
        raise ParseError(f"line {lineno}: qubit index out of range")
    try:
        if arity == 1:
            kind, power = _ONE_QUBIT[name]
            return Gate(kind, qs, power)
        return Gate(name, qs)
    except InvalidGateError as e:
        raise ParseError(f"line {lineno}: {e}") from None


def parse_circuit(text: str) -> Circuit:
    return parse_layered(text).flatten()


def format_gate(g: Gate) -> str:
    if g.name == "P":
        return {1: "P", 2: "Z", 3: "PDG"}[g.power] + f" {g.qubits[0]}"
    return " ".join([g.name, *map(str, g.qubits)])


def format_circuit(c: Circuit | LayeredCircuit) -> str:
    lines = [f"qubits {c.n}"]
    if isinstance(c, LayeredCircuit):
        for tag, stage in c.stages:
            lines.append(f"# stage {tag}")
            lines += [format_gate(g) for g in stage]
    else:
        lines += [format_gate(g) for g in c]
    return "\n".join(lines) + "\n"


# -- matrix files ------------------------------------------------------------------


def _bit_rows(rows: list[tuple[int, str]], width: int) -> list[int]:
    out = []
    for lineno, text in rows:
        toks = text.split()
        if len(toks) == 1 and len(toks[0]) == width:
            toks = list(toks[0])
        if len(toks) != width or any(t not in ("0", "1") for t in toks):
            raise ParseError(f"line {lineno}: expected {width} bits")
        out.append(sum(1 << j for j, t in enumerate(toks) if t == "1"))
    return out


def _matrix_rows(text: str) -> tuple[int, list[tuple[int, str]]]:
    body = [(i, _strip(l)) for i, l in enumerate(text.splitlines(), 1) if _strip(l)]
    return _header(body, "n")


def parse_matrix(text: str) -> BinMatrix:
    n, rest = _matrix_rows(text)
    if len(rest) != 2 * n:
        raise ParseError(f"expected {2 * n} matrix rows, found {len(rest)}")
    return BinMatrix(2 * n, 2 * n, tuple(_bit_rows(rest, 2 * n)))


def parse_cz_stage(text: str) -> BinMatrix:
    """An N x N adjacency matrix, or a 2N x 2N tableau ``[[I, B], [0, I]]``."""
    n, rest = _matrix_rows(text)
    if len(rest) == n:
        return BinMatrix(n, n, tuple(_bit_rows(rest, n)))
    m = parse_matrix(text)
    t = SymplecticMat(n, m) if is_symplectic(m) else None
    if t is None or t.A != BinMatrix.identity(n) or not t.C.is_zero():
        raise ParseError("tableau is not a CZ stage")
    return t.B


def parse_symplectic(text: str) -> SymplecticMat:
    m = parse_matrix(text)
    if not is_symplectic(m):
        raise ParseError("matrix is not symplectic")
    return SymplecticMat(m.nrows // 2, m)


def format_matrix(m: SymplecticMat) -> str:
    lines = [f"n {m.n}"]
    lines += [" ".join(str(r >> j & 1) for j in range(2 * m.n)) for r in m.m.rows]
    return "\n".join(lines) + "\n"


# -- commands --------------------------------------------------------------------


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None


def _write(args: argparse.Namespace, text: str, out: TextIO) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


def cmd_synth(args, out: TextIO, err: TextIO) -> int:
    m = parse_symplectic(_read(args.matrix))
    n = m.n
    if args.lnn:
        circ: Circuit | LayeredCircuit = pipeline_lnn(m)
        flat = circ
    elif args.stages == 9:
        circ = nine_stage(m)
        flat = circ.flatten()
    else:
        circ = seven_stage(m, args.left_order, args.right_order)
        flat = circ.flatten()
    if circuit_to_symplectic(flat) != m:
        raise InvariantError("synthesized circuit does not recompose to the input")
    depth = two_qubit_depth(flat)
    _write(args, format_circuit(circ), out)
    if isinstance(circ, LayeredCircuit):
        err.write("stages " + " ".join(circ.tags) + "\n")
    err.write(f"two-qubit gates {flat.two_qubit_count()}\n")
    if args.lnn:
        budget = 14 * n - 4
        if depth > budget or not is_lnn_legal(flat):
            raise InvariantError(f"chain circuit breaks the depth budget {budget}")
        err.write(f"depth {depth} <= {budget}\n")
    else:
        err.write(f"depth {depth}\n")
    return EXIT_OK


def cmd_verify(args, out: TextIO, err: TextIO) -> int:
    c = parse_circuit(_read(args.circuit))
    m = parse_matrix(_read(args.matrix))
    if c.n * 2 != m.nrows:
        out.write(f"qubit count differs: circuit {c.n}, matrix {m.nrows // 2}\n")
        return EXIT_FAIL
    got = circuit_to_symplectic(c).m
    for i in range(m.nrows):
        for j in range(m.ncols):
            if got[i, j] != m[i, j]:
                out.write(f"mismatch at row {i} column {j}: circuit {got[i, j]}, matrix {m[i, j]}\n")
                return EXIT_FAIL
    out.write("ok\n")
    return EXIT_OK


def cmd_fold(args, out: TextIO, err: TextIO) -> int:
    c = parse_circuit(_read(args.circuit))
    try:
        layered = fold(c, args.order)
    except HadamardNotSupportedError as e:
        err.write(f"error: {e}\n")
        return EXIT_FAIL
    if circuit_to_symplectic(layered.flatten()) != circuit_to_symplectic(c):
        raise InvariantError("folded circuit differs from the input")
    _write(args, format_circuit(layered), out)
    return EXIT_OK


def cmd_depth(args, out: TextIO, err: TextIO) -> int:
    c = parse_circuit(_read(args.circuit))
    out.write(f"depth {two_qubit_depth(c)}\n")
    out.write(f"two-qubit gates {c.two_qubit_count()}\n")
    out.write(f"lnn {'yes' if is_lnn_legal(c) else 'no'}\n")
    return EXIT_OK


def _perm(p: Sequence[int]) -> str:
    return "identity" if list(p) == list(range(len(p))) else " ".join(map(str, p))


def cmd_cell(args, out: TextIO, err: TextIO) -> int:
    cell = weyl_cell(parse_symplectic(_read(args.matrix)))
    out.write(f"k={cell.k}, pi={_perm(cell.pi)}\n")
    out.write(f"sigma={_perm(cell.sigma)}\n")
    out.write(f"tau={_perm(cell.tau)}\n")
    return EXIT_OK


def cmd_random(args, out: TextIO, err: TextIO) -> int:
    if args.n < 1:
        raise ParseError("n must be positive")
    length = 8 * args.n * args.n + 8 if args.length is None else args.length
    word = random_clifford_word(args.n, length, args.seed)
    if args.circuit:
        _write(args, format_circuit(word), out)
    else:
        _write(args, format_matrix(circuit_to_symplectic(word)), out)
    return EXIT_OK


def cmd_oracle(args, out: TextIO, err: TextIO) -> int:
    try:
        row = table1_row(args.n)
    except UnsupportedSizeError as e:
        err.write(f"error: {e}\n")
        return EXIT_FAIL
    out.write(" ".join(map(str, row.as_tuple())) + "\n")
    for note in row.notes:
        err.write(f"note: {note}\n")
    return EXIT_OK


def cmd_czopt(args, out: TextIO, err: TextIO) -> int:
    m = parse_cz_stage(_read(args.matrix))
    try:
        c = optimize_cz_stage(m)
    except NotHollowSymmetricError as e:
        err.write(f"error: {e}\n")
        return EXIT_FAIL
    _write(args, format_circuit(c), out)
    edges = sum(bin(r).count("1") for r in m.rows) // 2
    err.write(f"two-qubit gates {c.two_qubit_count()} (plain {edges})\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cliffsynth", description="Stabilizer circuit synthesis over GF(2).")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="synthesize a layered circuit from a tableau")
    s.add_argument("matrix", help="matrix file, '-' for stdin")
    s.add_argument("--stages", type=int, choices=(7, 9), default=7)
    s.add_argument("--lnn", action="store_true", help="route for a nearest-neighbour chain")
    s.add_argument("--left-order", choices=ORDERS, default="C-CZ-P")
    s.add_argument("--right-order", choices=ORDERS, default="P-CZ-C")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("verify", help="check a circuit against a tableau")
    s.add_argument("circuit")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("fold", help="fold an H-free circuit into three stages")
    s.add_argument("circuit")
    s.add_argument("--order", choices=ORDERS, default="P-CZ-C")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_fold)

    s = sub.add_parser("depth", help="two-qubit depth and chain legality")
    s.add_argument("circuit")
    s.set_defaults(func=cmd_depth)

    s = sub.add_parser("cell", help="Bruhat cell (k, sigma, tau) of a tableau")
    s.add_argument("matrix")
    s.set_defaults(func=cmd_cell)

    s = sub.add_parser("random", help="random tableau or circuit word")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--length", type=int)
    s.add_argument("--circuit", action="store_true", help="emit the word instead of its tableau")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_random)

    s = sub.add_parser("oracle", help="optimal gate-count table rows")
    s.add_argument("--table1", action="store_true", required=True)
    s.add_argument("-n", type=int, required=True)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("czopt", help="rewrite a CZ stage with fewer two-qubit gates")
    s.add_argument("matrix", help="N x N adjacency matrix or a 2N x 2N CZ-stage tableau")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_czopt)
    return p


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_MALFORMED if e.code else EXIT_OK
    try:
        return args.func(args, out, err)
    except ParseError as e:
        err.write(f"error: {e}\n")
        return EXIT_MALFORMED
    except InvariantError as e:
        err.write(f"internal error: {e}\n")
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
