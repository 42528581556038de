import numpy as np
import pytest

from locked_teleport.core import StateVector, apply_operator, tensor_product
from locked_teleport.gates import (
    alice_lock_operator,
    bell_state,
    cnot,
    hadamard,
    lock_operator,
    make_gate,
    pauli,
    unlock_operator,
)

S = 1 / np.sqrt(2)

LOCK_2 = S * np.array([[1, 0, 1, 0], [0, 1, 0, 1], [0, 1, 0, -1], [1, 0, -1, 0]])
UNLOCK_2 = S * np.array([[1, 0, 0, 1], [0, 1, 1, 0], [1, 0, 0, -1], [0, 1, -1, 0]])
SENDER_LOCK = S * np.array([[1, 0, 0, 1], [0, 1, 1, 0], [1, 0, 0, -1], [0, 1, -1, 0]])


def test_pauli_set():
    np.testing.assert_array_equal(pauli(0).entries, np.eye(2))
    np.testing.assert_array_equal(pauli(1).entries, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(pauli(2).entries, [[1, 0], [0, -1]])
    np.testing.assert_array_equal(pauli(3).entries, [[0, 1], [-1, 0]])


def test_last_pauli_squares_to_minus_identity():
    np.testing.assert_array_equal(pauli(3).entries @ pauli(3).entries, -np.eye(2))


def test_bell_states():
    np.testing.assert_allclose(bell_state(0).amplitudes, [S, 0, 0, S])
    np.testing.assert_allclose(bell_state(1).amplitudes, [0, S, S, 0])
    np.testing.assert_allclose(bell_state(2).amplitudes, [S, 0, 0, -S])
    np.testing.assert_allclose(bell_state(3).amplitudes, [0, S, -S, 0])


def test_bell_basis_orthonormal():
    basis = np.array([bell_state(m).amplitudes for m in range(4)])
    np.testing.assert_allclose(basis.conj() @ basis.T, np.eye(4), atol=1e-15)


def test_hadamard_involution():
    np.testing.assert_allclose(hadamard().entries @ hadamard().entries, np.eye(2), atol=1e-15)


@pytest.mark.parametrize("bad", [-1, 4])
def test_index_out_of_range(bad):
    with pytest.raises(ValueError):
        pauli(bad)
    with pytest.raises(ValueError):
        bell_state(bad)


def test_make_gate_dispatch():
    assert make_gate("cnot").arity == 2
    assert make_gate("hadamard").arity == 1
    np.testing.assert_array_equal(make_gate("pauli", 3).entries, pauli(3).entries)
    np.testing.assert_array_equal(make_gate("bell", 1).amplitudes, bell_state(1).amplitudes)
    with pytest.raises(ValueError):
        make_gate("toffoli")


def test_lock_two_receivers_matches_printed_matrix():
    np.testing.assert_allclose(lock_operator(2).entries, LOCK_2, rtol=0, atol=1e-15)


def test_unlock_two_receivers_matches_printed_matrix():
    np.testing.assert_allclose(unlock_operator(2).entries, UNLOCK_2, rtol=0, atol=1e-15)
    np.testing.assert_allclose(
        unlock_operator(2).entries @ lock_operator(2).entries, np.eye(4), atol=1e-15
    )


def test_lock_is_cnot_after_hadamard():
    explicit = cnot().entries @ np.kron(hadamard().entries, np.eye(2))
    np.testing.assert_allclose(lock_operator(2).entries, explicit, rtol=0, atol=1e-14)


def test_single_receiver_lock_is_hadamard():
    np.testing.assert_allclose(lock_operator(1).entries, hadamard().entries, atol=1e-15)


def test_lock_rejects_zero():
    with pytest.raises(ValueError):
        lock_operator(0)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_lock_unitary_and_inverse(n):
    u = lock_operator(n).entries
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2**n), atol=1e-12)
    np.testing.assert_allclose(unlock_operator(n).entries @ u, np.eye(2**n), atol=1e-12)


def test_three_receiver_lock_builds_ghz_from_zero():
    out = lock_operator(3).entries @ np.eye(8)[0]
    expected = np.zeros(8)
    expected[[0, 7]] = S
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_sender_lock_matrix():
    np.testing.assert_array_equal(alice_lock_operator().entries, SENDER_LOCK)
    np.testing.assert_array_equal(alice_lock_operator().entries, unlock_operator(2).entries)


def test_sender_lock_on_channel_equals_receiver_lock():
    channel = tensor_product(bell_state(0, ("A1", "B")), bell_state(0, ("A2", "C")))
    channel = channel.reorder(["A1", "A2", "B", "C"])
    by_sender = apply_operator(channel, alice_lock_operator(), ["A1", "A2"])
    by_receivers = apply_operator(channel, lock_operator(2), ["B", "C"])
    np.testing.assert_allclose(by_sender.amplitudes, by_receivers.amplitudes, atol=1e-15)


def test_all_outputs_unitary_or_normalized():
    for m in range(4):
        assert abs(np.linalg.norm(bell_state(m).amplitudes) - 1) < 1e-12
        u = pauli(m).entries
        np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    assert isinstance(bell_state(0), StateVector)
