"""Locked simultaneous teleportation from one sender to n receivers.

A run goes through five steps: lock the receiver qubits, Bell-measure every
(A_i, T_i) pair, broadcast the outcomes, jointly unlock the receiver
register, and apply each receiver's Pauli correction.

The register layout is always ``[T1..Tn, A1..An, B1..Bn]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .analysis import PPTReport, ppt_check
from .config import ConfigError, InputStateSpec, LockMode, ScenarioConfig, max_receivers
from .core import (
    StateVector,
    UnitaryOperator,
    apply_operator,
    density_from_state,
    fidelity_mixed,
    kron_all,
    phase_aligned_deviation,
    project_and_renormalize,
    reduced_density_matrix,
)
from .gates import alice_lock_operator, bell_state, lock_operator, pauli, unlock_operator

SENDER = "Alice"
_STREAM_TAGS = {"input": 1, "measure": 2}


class ProtocolError(RuntimeError):
    """Internal inconsistency while running the protocol."""


def t_labels(n: int) -> list[str]:
    return [f"T{i}" for i in range(1, n + 1)]


def a_labels(n: int) -> list[str]:
    return [f"A{i}" for i in range(1, n + 1)]


def b_labels(n: int) -> list[str]:
    return [f"B{i}" for i in range(1, n + 1)]


def derived_rng(seed: int, trial: int, tag: str, index: int = 0) -> np.random.Generator:
    """Independent stream keyed by (seed, trial, tag, index)."""
    return np.random.default_rng(np.random.SeedSequence([seed, trial, _STREAM_TAGS[tag], index]))


def trial_inputs(config: ScenarioConfig, trial: int) -> tuple[InputStateSpec, ...]:
    if config.inputs is not None:
        return config.inputs
    return tuple(
        InputStateSpec.random(derived_rng(config.seed, trial, "input", i))
        for i in range(config.receivers)
    )


def epr_pair(labels: Sequence[str]) -> StateVector:
    return bell_state(0, labels)


def build_initial_state(specs: Sequence[InputStateSpec], limit: int | None = None) -> StateVector:
    """Inputs on T1..Tn times one EPR pair per (A_i, B_i)."""
    n = len(specs)
    limit = max_receivers() if limit is None else limit
    if not 1 <= n <= limit:
        raise ConfigError(f"need between 1 and {limit} receivers, got {n}")
    ts, as_, bs = t_labels(n), a_labels(n), b_labels(n)
    parts = [spec.as_state(t) for spec, t in zip(specs, ts)]
    parts += [epr_pair((a, b)) for a, b in zip(as_, bs)]
    return kron_all(parts).reorder(ts + as_ + bs)


def apply_lock(state: StateVector, mode: LockMode, n: int) -> StateVector:
    mode = LockMode.parse(mode)
    if mode is LockMode.NONE:
        return state
    if mode is LockMode.ALICE_POST_DISTRIBUTION:
        if n != 2:
            raise ConfigError(f"alice_post_distribution lock is only defined for 2 receivers, got {n}")
        return apply_operator(state, alice_lock_operator(), a_labels(2))
    return apply_operator(state, lock_operator(n), b_labels(n))


@dataclass(frozen=True)
class Measurement:
    outcomes: tuple[int, ...]
    probability: float
    collapsed: StateVector  # receiver register B1..Bn


def _measure_pair(state: StateVector, i: int) -> list:
    pair = (f"A{i}", f"T{i}")
    return [project_and_renormalize(state, bell_state(m, pair), pair) for m in range(4)]


def bell_measure_all(
    state: StateVector,
    rng: np.random.Generator | None,
    n: int,
    forced: Sequence[int] | None = None,
) -> Measurement:
    """Measure (A_i, T_i) in the Bell basis for i = 1..n.

    Each pair consumes one uniform draw and picks its outcome by inverse CDF
    over the branch probabilities in index order. ``forced`` skips sampling.
    """
    outcome = []
    probability = 1.0
    for i in range(1, n + 1):
        branches = _measure_pair(state, i)
        if forced is not None:
            m = int(forced[i - 1])
        else:
            u = rng.random()
            cumulative = 0.0
            m = max(k for k, b in enumerate(branches) if not b.absent)
            for k, branch in enumerate(branches):
                cumulative += branch.probability
                if u < cumulative and not branch.absent:
                    m = k
                    break
        chosen = branches[m]
        if chosen.absent:
            raise ProtocolError(
                f"Bell branch {m} on pair {i} has probability {chosen.probability:.3g}; "
                "the channel state is inconsistent"
            )
        outcome.append(m)
        probability *= chosen.probability
        state = chosen.collapsed
    return Measurement(tuple(outcome), probability, state)


def outcome_distribution(
    state: StateVector, n: int, order: Sequence[int] | None = None
) -> dict[tuple[int, ...], float]:
    """Exact joint outcome probabilities, measuring pairs in ``order`` (1-based)."""
    order = list(order) if order is not None else list(range(1, n + 1))
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError(f"order {order} is not a permutation of 1..{n}")
    dist: dict[tuple[int, ...], float] = {}

    def walk(current: StateVector | None, depth: int, picked: dict[int, int], weight: float):
        if depth == len(order):
            dist[tuple(picked[i] for i in range(1, n + 1))] = weight
            return
        i = order[depth]
        if current is None:
            for m in range(4):
                walk(None, depth + 1, {**picked, i: m}, 0.0)
            return
        for m, branch in enumerate(_measure_pair(current, i)):
            p = 0.0 if branch.absent else weight * branch.probability
            walk(branch.collapsed, depth + 1, {**picked, i: m}, p)

    walk(state, 0, {}, 1.0)
    return dict(sorted(dist.items()))


def correction_for(m: int) -> UnitaryOperator:
    """Pauli correction for Bell outcome m (outcome 3 restores the input up to -1)."""
    return pauli(m)


@dataclass(frozen=True)
class Message:
    sender: str
    receivers: tuple[str, ...]
    pair: int
    payload: int


@dataclass(frozen=True)
class ProtocolTranscript:
    seed: int
    trial: int
    lock_mode: LockMode
    inputs: tuple[InputStateSpec, ...]
    outcomes: tuple[int, ...]
    outcome_probability: float
    classical_messages: tuple[Message, ...]
    unlock_applied: bool
    fidelities: tuple[float, ...]
    steps: tuple[str, ...]
    residual_ppt: PPTReport | None = None
    states: dict[str, StateVector] | None = field(default=None, repr=False, compare=False)


_LOCK_NARRATIVE = {
    LockMode.RECEIVERS_JOINT: "S1 lock: receivers jointly apply the lock on {targets}",
    LockMode.ALICE_PRE_DISTRIBUTION: "S1 lock: Alice applies the lock on {targets} before distributing them",
    LockMode.ALICE_POST_DISTRIBUTION: "S1 lock: Alice applies the sender-side lock on A1, A2",
    LockMode.NONE: "S1 lock: skipped (unlocked channels)",
}


def _run(config: ScenarioConfig, rng, trial: int, keep_states: bool) -> ProtocolTranscript:
    n = config.receivers
    bs = b_labels(n)
    specs = trial_inputs(config, trial)
    if rng is None:
        rng = derived_rng(config.seed, trial, "measure")
    states = {}

    state = build_initial_state(specs, limit=config.max_receivers)
    states["initial"] = state
    state = apply_lock(state, config.lock_mode, n)
    states["locked"] = state
    steps = [_LOCK_NARRATIVE[config.lock_mode].format(targets=", ".join(bs))]

    measurement = bell_measure_all(state, rng, n, forced=config.forced_outcome)
    state = measurement.collapsed
    states["measured"] = state
    pairs = ", ".join(f"(A{i}, T{i})" for i in range(1, n + 1))
    steps.append(f"S2 measure: Bell measurement on {pairs} -> {list(measurement.outcomes)}")

    messages = tuple(
        Message(SENDER, tuple(bs), i, m) for i, m in enumerate(measurement.outcomes, start=1)
    )
    steps.append(f"S3 transmit: Alice sends {list(measurement.outcomes)} to {', '.join(bs)}")

    residual_ppt = None
    if config.skip_unlock and n >= 2:
        residual_ppt = ppt_check(density_from_state(state), (bs[0],))

    unlock = config.lock_mode is not LockMode.NONE and not config.skip_unlock
    if unlock:
        state = apply_operator(state, unlock_operator(n), bs)
        steps.append(f"S4 unlock: {', '.join(bs)} jointly apply the unlock")
    elif config.lock_mode is LockMode.NONE:
        steps.append("S4 unlock: not needed (no lock)")
    else:
        steps.append("S4 unlock: skipped, receivers act separately")
    states["unlocked"] = state

    for b, m in zip(bs, measurement.outcomes):
        state = apply_operator(state, correction_for(m), [b])
    steps.append(
        "S5 recover: " + ", ".join(f"{b} applies pauli({m})" for b, m in zip(bs, measurement.outcomes))
    )
    states["final"] = state

    fidelities = tuple(
        fidelity_mixed(spec.as_state(b), reduced_density_matrix(state, [b]))
        for spec, b in zip(specs, bs)
    )
    return ProtocolTranscript(
        seed=config.seed,
        trial=trial,
        lock_mode=config.lock_mode,
        inputs=specs,
        outcomes=measurement.outcomes,
        outcome_probability=measurement.probability,
        classical_messages=messages,
        unlock_applied=unlock,
        fidelities=fidelities,
        steps=tuple(steps),
        residual_ppt=residual_ppt,
        states=states if keep_states else None,
    )


def run_protocol(
    config: ScenarioConfig,
    rng: np.random.Generator | None = None,
    trial: int = 0,
    keep_states: bool = False,
) -> ProtocolTranscript:
    """One trial of the full protocol; ``rng`` defaults to the (seed, trial) stream."""
    return _run(config, rng, trial, keep_states)


def defection_run(
    config: ScenarioConfig,
    rng: np.random.Generator | None = None,
    trial: int = 0,
    keep_states: bool = False,
) -> ProtocolTranscript:
    """Receivers skip the joint unlock and only apply their local corrections."""
    if not config.skip_unlock:
        raise ConfigError("defection_run needs skip_unlock=True")
    return _run(config, rng, trial, keep_states)


@dataclass(frozen=True)
class BranchCheck:
    outcome: tuple[int, ...]
    probability: float
    deviation: float


@dataclass(frozen=True)
class DecompositionReport:
    receivers: int
    branches: tuple[BranchCheck, ...]
    max_deviation: float
    max_probability_error: float


def verify_bell_decomposition(specs: Sequence[InputStateSpec], n: int | None = None) -> DecompositionReport:
    """Check every Bell branch of the locked state against lock . (x)_i pauli(m_i)|phi_i>."""
    n = len(specs) if n is None else n
    if n != len(specs):
        raise ValueError(f"{len(specs)} input states given for n={n}")
    if not 1 <= n <= 3:
        raise ValueError(f"exhaustive decomposition check supports 1..3 receivers, got {n}")
    bs = b_labels(n)
    locked = apply_lock(build_initial_state(specs), LockMode.RECEIVERS_JOINT, n)
    lock = lock_operator(n)
    expected_p = 4.0 ** -n
    checks = []
    for outcome in itertools.product(range(4), repeat=n):
        measured = bell_measure_all(locked, None, n, forced=outcome)
        expected = kron_all(
            [
                apply_operator(spec.as_state(b), pauli(m), [b])
                for spec, b, m in zip(specs, bs, outcome)
            ]
        )
        expected = apply_operator(expected, lock, bs)
        checks.append(
            BranchCheck(outcome, measured.probability, phase_aligned_deviation(measured.collapsed, expected))
        )
    return DecompositionReport(
        receivers=n,
        branches=tuple(checks),
        max_deviation=max(c.deviation for c in checks),
        max_probability_error=max(abs(c.probability - expected_p) for c in checks),
    )
