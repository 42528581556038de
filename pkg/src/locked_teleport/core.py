"""Dense state-vector and density-matrix primitives over labeled qubit registers.

Basis ordering is big-endian in the label list: the first label is the most
significant bit, so for labels ``("B", "C")`` index 2 is ``|1>_B |0>_C``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

STRUCTURE_TOL = 1e-12
PSD_TOL = 1e-10
ABSENT_PROBABILITY = 1e-14


class LabelError(ValueError):
    """Raised for duplicate, unknown or otherwise invalid qubit labels."""


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


def _check_labels(labels: Sequence[str]) -> tuple[str, ...]:
    labels = tuple(str(label) for label in labels)
    if len(set(labels)) != len(labels):
        seen = set()
        dupes = sorted({label for label in labels if label in seen or seen.add(label)})
        raise LabelError(f"label collision: {', '.join(dupes)}")
    return labels


def _positions(labels: tuple[str, ...], wanted: Sequence[str]) -> list[int]:
    missing = [w for w in wanted if w not in labels]
    if missing:
        raise LabelError(f"unknown qubit label(s) {missing}; register is {list(labels)}")
    if len(set(wanted)) != len(wanted):
        raise LabelError(f"repeated target labels {list(wanted)}")
    return [labels.index(w) for w in wanted]


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on an ordered register of qubits."""

    amplitudes: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = _check_labels(self.labels)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != 2 ** len(labels):
            raise ValueError(
                f"{amps.size} amplitudes do not fit a {len(labels)}-qubit register"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > STRUCTURE_TOL:
            raise ValueError(f"state is not normalized (squared norm {norm!r})")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def relabel(self, labels: Sequence[str]) -> StateVector:
        return StateVector(self.amplitudes, tuple(labels))

    def reorder(self, labels: Sequence[str]) -> StateVector:
        """Same state with the register permuted into ``labels`` order."""
        if sorted(labels) != sorted(self.labels):
            raise LabelError(f"{list(labels)} is not a permutation of {list(self.labels)}")
        axes = _positions(self.labels, labels)
        return StateVector(np.transpose(self.tensor(), axes).ravel(), tuple(labels))

    def __repr__(self):
        return f"StateVector(labels={list(self.labels)}, amplitudes={np.round(self.amplitudes, 6)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on labeled qubits."""

    entries: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = _check_labels(self.labels)
        rho = _frozen(self.entries)
        dim = 2 ** len(labels)
        if rho.shape != (dim, dim):
            raise ValueError(f"density matrix shape {rho.shape} does not match {len(labels)} qubits")
        if not np.all(np.isfinite(rho)):
            raise ValueError("density matrix entries must be finite")
        if np.max(np.abs(rho - rho.conj().T)) > STRUCTURE_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > STRUCTURE_TOL:
            raise ValueError(f"density matrix trace is {np.trace(rho).real!r}, expected 1")
        try:
            np.linalg.cholesky(rho + PSD_TOL * np.eye(dim))
        except np.linalg.LinAlgError:
            raise ValueError("density matrix has an eigenvalue below -1e-10") from None
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "entries", rho)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def __repr__(self):
        return f"DensityMatrix(labels={list(self.labels)}, entries=\n{np.round(self.entries, 6)})"


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    """Unitary acting on ``arity`` qubits; bound to targets when applied."""

    entries: np.ndarray
    arity: int = 0

    def __post_init__(self):
        u = _frozen(self.entries)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"operator must be square, got shape {u.shape}")
        arity = int(round(np.log2(u.shape[0]))) if u.shape[0] else -1
        if arity < 0 or 2**arity != u.shape[0]:
            raise ValueError(f"operator dimension {u.shape[0]} is not a power of two")
        if self.arity and self.arity != arity:
            raise ValueError(f"declared arity {self.arity} but matrix acts on {arity} qubits")
        if not np.all(np.isfinite(u)):
            raise ValueError("operator entries must be finite")
        if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) > STRUCTURE_TOL:
            raise ValueError("operator is not unitary")
        object.__setattr__(self, "entries", u)
        object.__setattr__(self, "arity", arity)

    @property
    def dagger(self) -> UnitaryOperator:
        return UnitaryOperator(self.entries.conj().T)

    def __matmul__(self, other: UnitaryOperator) -> UnitaryOperator:
        if not isinstance(other, UnitaryOperator):
            return NotImplemented
        if other.arity != self.arity:
            raise ValueError("cannot compose operators of different arity")
        return UnitaryOperator(self.entries @ other.entries)

    def __repr__(self):
        return f"UnitaryOperator(arity={self.arity}, entries=\n{np.round(self.entries, 6)})"


@dataclass(frozen=True)
class ProjectionResult:
    probability: float
    collapsed: StateVector | None  # None when the branch has (numerically) zero weight
    remaining_labels: tuple[str, ...]

    @property
    def absent(self) -> bool:
        return self.collapsed is None


def basis_state(bits: str, labels: Sequence[str]) -> StateVector:
    """Computational basis ket, e.g. ``basis_state("01", ["B", "C"])``."""
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[int(bits, 2) if bits else 0] = 1.0
    return StateVector(amps, tuple(labels))


def tensor_product(a, b):
    """Kronecker product of two states (labels ``a`` then ``b``) or two operators."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        clash = set(a.labels) & set(b.labels)
        if clash:
            raise LabelError(f"label collision: {', '.join(sorted(clash))}")
        return StateVector(np.kron(a.amplitudes, b.amplitudes), a.labels + b.labels)
    if isinstance(a, UnitaryOperator) and isinstance(b, UnitaryOperator):
        return UnitaryOperator(np.kron(a.entries, b.entries))
    raise TypeError(
        f"tensor_product needs two states or two operators, got {type(a).__name__} "
        f"and {type(b).__name__}"
    )


def kron_all(items):
    items = list(items)
    out = items[0]
    for item in items[1:]:
        out = tensor_product(out, item)
    return out


def apply_operator(state: StateVector, u: UnitaryOperator, targets: Sequence[str]) -> StateVector:
    """Apply ``u`` to ``targets`` (first target is the most significant bit of ``u``)."""
    targets = tuple(targets)
    if len(targets) != u.arity:
        raise ValueError(f"operator acts on {u.arity} qubits but {len(targets)} targets given")
    axes = _positions(state.labels, targets)
    k = u.arity
    op = u.entries.reshape((2,) * (2 * k))
    out = np.tensordot(op, state.tensor(), axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return StateVector(out.ravel(), state.labels)


def _split(state: StateVector, front: Sequence[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Matrix view of ``state`` with ``front`` qubits as rows, the rest as columns."""
    axes = _positions(state.labels, front)
    rest = [i for i in range(state.num_qubits) if i not in axes]
    mat = np.transpose(state.tensor(), axes + rest).reshape(2 ** len(axes), 2 ** len(rest))
    return mat, tuple(state.labels[i] for i in rest)


def project_and_renormalize(
    state: StateVector, projector_state: StateVector, targets: Sequence[str]
) -> ProjectionResult:
    """Project ``targets`` onto ``projector_state`` and renormalize what is left.

    The projector's own labels are ignored; its qubits are matched to
    ``targets`` positionally.
    """
    targets = tuple(targets)
    if projector_state.num_qubits != len(targets):
        raise ValueError(
            f"projector has {projector_state.num_qubits} qubits, {len(targets)} targets given"
        )
    mat, rest = _split(state, targets)
    residual = projector_state.amplitudes.conj() @ mat
    probability = float(np.vdot(residual, residual).real)
    if probability < ABSENT_PROBABILITY:
        return ProjectionResult(probability, None, rest)
    return ProjectionResult(probability, StateVector(residual / np.sqrt(probability), rest), rest)


def density_from_state(state: StateVector) -> DensityMatrix:
    psi = state.amplitudes
    return DensityMatrix(np.outer(psi, psi.conj()), state.labels)


def reduced_density_matrix(state: StateVector, keep: Sequence[str]) -> DensityMatrix:
    """Partial trace taken straight from the amplitudes, without forming |psi><psi|."""
    keep = tuple(keep)
    if not keep:
        raise LabelError("keep set must not be empty")
    mat, _ = _split(state, keep)
    return DensityMatrix(mat @ mat.conj().T, keep)


def partial_trace(rho: DensityMatrix, keep: Sequence[str]) -> DensityMatrix:
    """Trace out every qubit not in ``keep``; the result is ordered as ``keep``."""
    keep = tuple(keep)
    if not keep:
        raise LabelError("keep set must not be empty")
    q = rho.num_qubits
    kept = _positions(rho.labels, keep)
    traced = [i for i in range(q) if i not in kept]
    t = rho.entries.reshape((2,) * (2 * q))
    t = np.transpose(t, kept + traced + [q + i for i in kept] + [q + i for i in traced])
    dk, dt = 2 ** len(kept), 2 ** len(traced)
    out = np.einsum("iaja->ij", t.reshape(dk, dt, dk, dt))
    return DensityMatrix(out, keep)


def partial_transpose(
    rho: DensityMatrix | np.ndarray,
    transpose_over: Sequence[str],
    labels: Sequence[str] | None = None,
) -> np.ndarray:
    """Swap row and column indices of the ``transpose_over`` qubits only.

    For a bipartite ``rho = sum rho_ijkl |i><j| (x) |k><l|`` transposed over
    the first factor this gives ``sum rho_jikl |i><j| (x) |k><l|``. The
    result is Hermitian but need not be positive, so a bare array is returned.
    A bare array input needs ``labels``.
    """
    if isinstance(rho, DensityMatrix):
        labels, entries = rho.labels, rho.entries
    else:
        if labels is None:
            raise LabelError("labels are required when passing a bare matrix")
        labels, entries = _check_labels(labels), np.asarray(rho, dtype=complex)
        if entries.shape != (2 ** len(labels),) * 2:
            raise ValueError(f"matrix shape {entries.shape} does not match {len(labels)} qubits")
    transpose_over = tuple(transpose_over)
    if not transpose_over:
        raise LabelError("transpose_over must name at least one qubit")
    axes = _positions(labels, transpose_over)
    q = len(labels)
    if len(axes) == q:
        raise LabelError("transposing every qubit is a full transpose, not a partial one")
    perm = list(range(2 * q))
    for i in axes:
        perm[i], perm[q + i] = q + i, i
    t = np.transpose(entries.reshape((2,) * (2 * q)), perm)
    return t.reshape(2**q, 2**q)


def fidelity_pure(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2, clipped into [0, 1]."""
    if a.labels != b.labels:
        raise LabelError(f"label mismatch: {list(a.labels)} vs {list(b.labels)}")
    return float(min(1.0, max(0.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)))


def fidelity_mixed(target: StateVector, rho: DensityMatrix) -> float:
    """<phi|rho|phi> for a pure target and a (possibly mixed) state."""
    if target.labels != rho.labels:
        raise LabelError(f"label mismatch: {list(target.labels)} vs {list(rho.labels)}")
    phi = target.amplitudes
    return float(min(1.0, max(0.0, np.vdot(phi, rho.entries @ phi).real)))


def phase_aligned_deviation(a: StateVector, b: StateVector) -> float:
    """Max entrywise |a - e^{i t} b| with the global phase t chosen to align them."""
    if a.labels != b.labels:
        raise LabelError(f"label mismatch: {list(a.labels)} vs {list(b.labels)}")
    overlap = np.vdot(b.amplitudes, a.amplitudes)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(a.amplitudes - phase * b.amplitudes)))


def random_state(labels: Sequence[str], rng: np.random.Generator) -> StateVector:
    labels = tuple(labels)
    dim = 2 ** len(labels)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(v / np.linalg.norm(v), labels)


def random_unitary(arity: int, rng: np.random.Generator) -> UnitaryOperator:
    """Orthonormalize a complex Gaussian matrix with modified Gram-Schmidt."""
    dim = 2**arity
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q = np.zeros_like(m)
    for j in range(dim):
        v = m[:, j].copy()
        for i in range(j):
            v -= np.vdot(q[:, i], v) * q[:, i]
        q[:, j] = v / np.linalg.norm(v)
    return UnitaryOperator(q)
