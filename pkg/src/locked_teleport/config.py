"""Scenario configuration shared by the protocol engine and the CLI."""

from __future__ import annotations

import enum
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .core import STRUCTURE_TOL, StateVector

log = logging.getLogger(__name__)

MAX_QUBITS_ENV = "LOCKED_TELEPORT_MAX_QUBITS"
DEFAULT_MAX_QUBITS = 15
QUBITS_PER_RECEIVER = 3  # T_i, A_i, B_i


class ConfigError(ValueError):
    """Invalid scenario configuration."""


class LockMode(str, enum.Enum):
    RECEIVERS_JOINT = "receivers_joint"
    ALICE_PRE_DISTRIBUTION = "alice_pre_distribution"
    ALICE_POST_DISTRIBUTION = "alice_post_distribution"
    NONE = "none"

    @classmethod
    def parse(cls, text: str | LockMode) -> LockMode:
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "_")
        key = {"alice_pre": "alice_pre_distribution", "alice_post": "alice_post_distribution"}.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown lock mode {text!r} (choose from {choices})") from None


def max_receivers() -> int:
    """Receiver cap derived from the qubit budget (overridable through the environment)."""
    raw = os.environ.get(MAX_QUBITS_ENV)
    if raw is None:
        return DEFAULT_MAX_QUBITS // QUBITS_PER_RECEIVER
    try:
        qubits = int(raw)
    except ValueError:
        raise ConfigError(f"{MAX_QUBITS_ENV} must be an integer, got {raw!r}") from None
    if qubits > DEFAULT_MAX_QUBITS:
        log.warning(
            "%s=%d: a %d-qubit state vector needs %.1f MiB per copy",
            MAX_QUBITS_ENV, qubits, qubits, 16 * 2**qubits / 2**20,
        )
    return max(1, qubits // QUBITS_PER_RECEIVER)


@dataclass(frozen=True)
class InputStateSpec:
    """Amplitudes of one qubit to teleport: alpha|0> + beta|1>."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        alpha, beta = complex(self.alpha), complex(self.beta)
        if not all(np.isfinite([alpha.real, alpha.imag, beta.real, beta.imag])):
            raise ConfigError("input amplitudes must be finite")
        norm = abs(alpha) ** 2 + abs(beta) ** 2
        if abs(norm - 1.0) > STRUCTURE_TOL:
            raise ConfigError(f"input state is not normalized (|alpha|^2+|beta|^2 = {norm!r})")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def normalized(cls, alpha: complex, beta: complex, tol: float = 1e-9) -> InputStateSpec:
        """Accept amplitudes normalized to ``tol`` and rescale them exactly."""
        norm = abs(complex(alpha)) ** 2 + abs(complex(beta)) ** 2
        if abs(norm - 1.0) > tol:
            raise ConfigError(f"input state ({alpha}, {beta}) is not normalized: |alpha|^2+|beta|^2 = {norm:.12g}")
        scale = 1.0 / np.sqrt(norm)
        return cls(complex(alpha) * scale, complex(beta) * scale)

    @classmethod
    def random(cls, rng: np.random.Generator) -> InputStateSpec:
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        return cls(complex(v[0]), complex(v[1]))

    def as_state(self, label: str) -> StateVector:
        return StateVector(np.array([self.alpha, self.beta]), (label,))


@dataclass(frozen=True)
class ScenarioConfig:
    receivers: int = 2
    inputs: tuple[InputStateSpec, ...] | None = None  # None: random per trial, derived from the seed
    lock_mode: LockMode = LockMode.RECEIVERS_JOINT
    skip_unlock: bool = False
    trials: int = 100
    seed: int = 0
    output_format: str = "json"
    forced_outcome: tuple[int, ...] | None = None
    workers: int = 1
    timing: bool = False
    max_receivers: int = field(default_factory=max_receivers)

    def __post_init__(self):
        object.__setattr__(self, "lock_mode", LockMode.parse(self.lock_mode))
        if self.inputs is not None:
            object.__setattr__(self, "inputs", tuple(self.inputs))
        if self.forced_outcome is not None:
            object.__setattr__(self, "forced_outcome", tuple(int(m) for m in self.forced_outcome))
        n = self.receivers
        if not isinstance(n, int) or n < 1:
            raise ConfigError(f"receivers must be a positive integer, got {n!r}")
        if n > self.max_receivers:
            raise ConfigError(
                f"receivers={n} exceeds the cap of {self.max_receivers} "
                f"({QUBITS_PER_RECEIVER * n} qubits; raise {MAX_QUBITS_ENV} to allow more)"
            )
        if self.lock_mode is LockMode.ALICE_POST_DISTRIBUTION and n != 2:
            raise ConfigError(f"lock mode alice_post_distribution needs exactly 2 receivers, got {n}")
        if self.inputs is not None and len(self.inputs) != n:
            raise ConfigError(f"{len(self.inputs)} input states given for {n} receivers")
        if self.forced_outcome is not None:
            if len(self.forced_outcome) != n:
                raise ConfigError(f"forced outcome has {len(self.forced_outcome)} entries for {n} receivers")
            if any(m not in (0, 1, 2, 3) for m in self.forced_outcome):
                raise ConfigError(f"forced outcome entries must be 0..3, got {list(self.forced_outcome)}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.output_format not in ("json", "text"):
            raise ConfigError(f"output format must be json or text, got {self.output_format!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
