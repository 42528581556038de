"""PPT separability checks, bipartition entropies and channel audits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    DensityMatrix,
    LabelError,
    StateVector,
    partial_trace,
    partial_transpose,
    reduced_density_matrix,
)
from .eigen import hermitian_eigenvalues

NEGATIVE_EIGENVALUE_TOL = 1e-10
ENTROPY_CLAMP = 1e-12

STAGES = ("pre_lock", "post_lock", "post_measurement")

MAXIMALLY_MIXED_PAIR = np.eye(4) / 4

# Reduced state of a sender/receiver pair once the receivers' lock is on.
LOCKED_PAIR_DENSITY = np.array(
    [[1, 0, 1, 0], [0, 1, 0, -1], [1, 0, 1, 0], [0, -1, 0, 1]], dtype=complex
) / 4


@dataclass(frozen=True)
class PPTReport:
    cut: tuple[tuple[str, ...], tuple[str, ...]]  # (transposed qubits, complement)
    eigenvalues: tuple[float, ...]
    min_eigenvalue: float
    ppt_holds: bool


@dataclass(frozen=True)
class ChannelAudit:
    stage: str
    ppt: dict[str, PPTReport]
    entropies: dict[str, float | None]
    spectra: dict[str, tuple[float, ...]]
    checks: dict[str, float] = field(default_factory=dict)  # named comparison -> max deviation


def ppt_check(rho: DensityMatrix, transpose_over: Sequence[str]) -> PPTReport:
    """Peres-Horodecki test: positive partial transpose, exact for 2x2 and 2x3."""
    transpose_over = tuple(transpose_over)
    eigenvalues = hermitian_eigenvalues(partial_transpose(rho, transpose_over))
    rest = tuple(label for label in rho.labels if label not in transpose_over)
    lowest = float(eigenvalues[0])
    return PPTReport(
        cut=(transpose_over, rest),
        eigenvalues=tuple(float(x) for x in eigenvalues),
        min_eigenvalue=lowest,
        ppt_holds=lowest >= -NEGATIVE_EIGENVALUE_TOL,
    )


def _check_cut(labels: tuple[str, ...], left: Sequence[str]) -> tuple[str, ...]:
    left = tuple(left)
    if not left or len(left) >= len(labels) or not set(left) <= set(labels):
        raise LabelError(f"{list(left)} is not a proper nonempty cut of {list(labels)}")
    return left


def _entropy_bits(spectrum: np.ndarray) -> float:
    spectrum = np.where(np.abs(spectrum) < ENTROPY_CLAMP, 0.0, spectrum)
    positive = spectrum[spectrum > 0]
    return float(-np.sum(positive * np.log2(positive))) + 0.0


def reduced_spectrum(state: StateVector, left: Sequence[str]) -> tuple[float, ...]:
    """Descending eigenvalues of the reduced state on ``left`` (squared Schmidt weights)."""
    left = _check_cut(state.labels, left)
    eigenvalues = hermitian_eigenvalues(reduced_density_matrix(state, left).entries)
    return tuple(float(x) for x in eigenvalues[::-1])


def entanglement_entropy(state: StateVector, left: Sequence[str]) -> float:
    """Von Neumann entropy in bits of the reduced state on ``left``."""
    return _entropy_bits(np.array(reduced_spectrum(state, left)))


def _reduce(channel, keep):
    if isinstance(channel, StateVector):
        return reduced_density_matrix(channel, keep)
    return partial_trace(channel, keep)


def channel_audit(channel: StateVector | DensityMatrix, stage: str) -> ChannelAudit:
    """Audit a four-qubit channel register ordered (A1, A2, B, C).

    Labels are taken positionally, so a register named (A1, A2, B1, B2)
    works the same way. Entropy across the (A1 B | A2 C) cut is reported
    only for pure channels.
    """
    stage = stage.replace("-", "_")
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r} (choose from {', '.join(STAGES)})")
    if channel.num_qubits != 4:
        raise ValueError(f"channel audit needs a 4-qubit register, got {list(channel.labels)}")
    a1, a2, b, c = channel.labels

    rho_bc = _reduce(channel, (b, c))
    rho_a1b = _reduce(channel, (a1, b))
    rho_a2c = _reduce(channel, (a2, c))
    ppt = {
        f"{a1}|{b}": ppt_check(rho_a1b, (a1,)),
        f"{a2}|{c}": ppt_check(rho_a2c, (a2,)),
        f"{b}|{c}": ppt_check(rho_bc, (b,)),
    }

    cut_name = f"{a1}{b}|{a2}{c}"
    if isinstance(channel, StateVector):
        spectrum = reduced_spectrum(channel, (a1, b))
        entropies = {cut_name: _entropy_bits(np.array(spectrum))}
    else:
        spectrum = tuple(float(x) for x in hermitian_eigenvalues(rho_a1b.entries)[::-1])
        entropies = {cut_name: None}

    checks = {f"rho_{b}{c} vs I/4": float(np.max(np.abs(rho_bc.entries - MAXIMALLY_MIXED_PAIR)))}
    if stage == "post_lock":
        checks[f"rho_{a1}{b} vs locked pair"] = float(
            np.max(np.abs(rho_a1b.entries - LOCKED_PAIR_DENSITY))
        )
    return ChannelAudit(stage=stage, ppt=ppt, entropies=entropies, spectra={cut_name: spectrum}, checks=checks)
