"""Independent basis-state simulator for H-free circuits (test oracle)."""


def simulate_basis(circuit, x):
    """Return (phase in Z4, output basis index) for input basis index x."""
    phase = 0
    for g in circuit:
        if g.name == "P":
            phase += g.power * ((x >> g.qubits[0]) & 1)
        elif g.name == "CNOT":
            c, t = g.qubits
            x ^= ((x >> c) & 1) << t
        elif g.name == "CZ":
            a, b = g.qubits
            phase += 2 * ((x >> a) & (x >> b) & 1)
        elif g.name == "SWAP":
            a, b = g.qubits
            if ((x >> a) ^ (x >> b)) & 1:
                x ^= (1 << a) | (1 << b)
        else:
            raise ValueError("H-free circuits only")
    return phase % 4, x


def truth_table(circuit):
    return [simulate_basis(circuit, x) for x in range(1 << circuit.n)]
