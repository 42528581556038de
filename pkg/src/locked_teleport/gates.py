"""Named gates, Bell states and the channel lock/unlock operators."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import StateVector, UnitaryOperator, apply_operator, basis_state

_SQRT_HALF = 1.0 / np.sqrt(2.0)

# Receiver-side corrections indexed by Bell outcome; the last one is i*Y, so it squares to -I.
_PAULIS = (
    np.array([[1, 0], [0, 1]]),
    np.array([[0, 1], [1, 0]]),
    np.array([[1, 0], [0, -1]]),
    np.array([[0, 1], [-1, 0]]),
)

# (sign, bits) pairs for the four Bell states, in measurement-index order.
_BELL = (
    ("00", "11", 1),
    ("01", "10", 1),
    ("00", "11", -1),
    ("01", "10", -1),
)


def _check_index(value: int, what: str) -> int:
    if value not in (0, 1, 2, 3):
        raise ValueError(f"{what} index must be 0..3, got {value!r}")
    return value


def pauli(j: int) -> UnitaryOperator:
    return UnitaryOperator(_PAULIS[_check_index(j, "pauli")])


def hadamard() -> UnitaryOperator:
    return UnitaryOperator(_SQRT_HALF * np.array([[1, 1], [1, -1]]))


def cnot() -> UnitaryOperator:
    """Control on the first (most significant) qubit."""
    return UnitaryOperator(np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]))


def bell_state(m: int, labels: Sequence[str] = ("q0", "q1")) -> StateVector:
    first, second, sign = _BELL[_check_index(m, "bell")]
    amps = np.zeros(4, dtype=complex)
    amps[int(first, 2)] = _SQRT_HALF
    amps[int(second, 2)] = sign * _SQRT_HALF
    return StateVector(amps, tuple(labels))


def make_gate(kind: str, index: int | None = None):
    """Look up a gate by name: ``pauli`` and ``bell`` take an index 0..3."""
    if kind == "pauli":
        return pauli(index)
    if kind == "bell":
        return bell_state(index)
    if kind == "hadamard":
        return hadamard()
    if kind == "cnot":
        return cnot()
    raise ValueError(f"unknown gate kind {kind!r}")


def lock_operator(n: int) -> UnitaryOperator:
    """Hadamard on the first receiver qubit, then CNOTs from it onto each other one.

    For two receivers this is the 4x4 matrix
    ``[[1,0,1,0],[0,1,0,1],[0,1,0,-1],[1,0,-1,0]] / sqrt(2)``.
    """
    if n < 1:
        raise ValueError(f"lock needs at least one receiver, got {n}")
    labels = [f"r{i}" for i in range(n)]
    columns = []
    for k in range(2**n):
        state = basis_state(format(k, f"0{n}b"), labels)
        state = apply_operator(state, hadamard(), [labels[0]])
        for other in labels[1:]:
            state = apply_operator(state, cnot(), [labels[0], other])
        columns.append(state.amplitudes)
    return UnitaryOperator(np.column_stack(columns))


def unlock_operator(n: int) -> UnitaryOperator:
    return lock_operator(n).dagger


def alice_lock_operator() -> UnitaryOperator:
    """Sender-side lock on (A1, A2); the same matrix as the two-receiver unlock."""
    return UnitaryOperator(
        _SQRT_HALF * np.array([[1, 0, 0, 1], [0, 1, 1, 0], [1, 0, 0, -1], [0, 1, -1, 0]])
    )
