"""Run orchestration, aggregate statistics and deterministic report serialization."""

from __future__ import annotations

import dataclasses
import enum
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import __version__
from .analysis import ChannelAudit, channel_audit
from .config import LockMode, ScenarioConfig
from .core import StateVector, kron_all, reduced_density_matrix
from .gates import bell_state
from .protocol import (
    ProtocolTranscript,
    a_labels,
    apply_lock,
    b_labels,
    bell_measure_all,
    build_initial_state,
    epr_pair,
    run_protocol,
)

FIDELITY_TOL = 1e-10
STRUCTURE_TOL = 1e-12
EIGENVALUE_TOL = 1e-10

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2


# -- serialization -----------------------------------------------------------

def to_jsonable(obj: Any) -> Any:
    """Plain JSON-ready structure; complex numbers become [re, im]."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
            if f.name != "states"
        }
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in obj]
    return obj


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    text = format(x, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj: Any, indent: int, level: int) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, tuple, dict)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[" + ",".join(pad + _encode(v, indent, level + 1) for v in obj) + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            pad + json.dumps(str(k)) + ": " + _encode(obj[k], indent, level + 1)
            for k in sorted(obj, key=str)
        ]
        return "{" + ",".join(items) + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Sorted keys and 17 significant digits, so equal inputs give equal bytes."""
    return _encode(to_jsonable(obj), indent, 0) + "\n"


# -- channel audits ----------------------------------------------------------

def channel_register(lock_mode: LockMode | str = LockMode.NONE) -> StateVector:
    """The two-receiver EPR channel on (A1, A2, B1, B2), optionally locked."""
    channel = kron_all([epr_pair(("A1", "B1")), epr_pair(("A2", "B2"))])
    channel = channel.reorder(a_labels(2) + b_labels(2))
    return apply_lock(channel, lock_mode, 2)


def post_measurement_channel(specs, outcomes, lock_mode=LockMode.RECEIVERS_JOINT):
    """Mixed (A1, A2, B1, B2) state after the sender's Bell measurement."""
    locked = apply_lock(build_initial_state(specs), lock_mode, 2)
    measured = bell_measure_all(locked, None, 2, forced=outcomes)
    full = kron_all(
        [bell_state(m, (f"A{i}", f"T{i}")) for i, m in enumerate(outcomes, start=1)]
        + [measured.collapsed]
    )
    return reduced_density_matrix(full, a_labels(2) + b_labels(2))


def audit_failures(audit: ChannelAudit) -> list[str]:
    """Expected channel structure before and after locking; empty when all hold.

    Post-measurement audits are descriptive only.
    """
    failures = []
    if audit.stage == "post_measurement":
        return failures
    for name, deviation in audit.checks.items():
        if deviation > STRUCTURE_TOL:
            failures.append(f"{audit.stage}: {name} deviation {deviation:.3g}")
    pair_cuts = [key for key in audit.ppt if key.startswith("A")]
    (cut, entropy), = audit.entropies.items()
    if audit.stage == "pre_lock":
        for key in pair_cuts:
            if audit.ppt[key].ppt_holds:
                failures.append(f"pre_lock: EPR pair {key} unexpectedly passes PPT")
        if entropy is not None and abs(entropy) > EIGENVALUE_TOL:
            failures.append(f"pre_lock: entropy across {cut} is {entropy:.3g}, expected 0")
    elif audit.stage == "post_lock":
        for key in pair_cuts:
            got = np.array(audit.ppt[key].eigenvalues)
            if np.max(np.abs(got - [0.0, 0.0, 0.5, 0.5])) > EIGENVALUE_TOL:
                failures.append(f"post_lock: PT spectrum on {key} is {got.tolist()}, expected [0, 0, 0.5, 0.5]")
        if entropy is not None and abs(entropy - 1.0) > EIGENVALUE_TOL:
            failures.append(f"post_lock: entropy across {cut} is {entropy:.3g}, expected 1")
    return failures


def audits_for(config: ScenarioConfig) -> dict[str, dict]:
    if config.receivers != 2:
        return {}
    stages = {"pre_lock": channel_register(LockMode.NONE)}
    if config.lock_mode is not LockMode.NONE:
        stages["post_lock"] = channel_register(config.lock_mode)
    out = {}
    for stage, channel in stages.items():
        audit = channel_audit(channel, stage)
        out[stage] = {**to_jsonable(audit), "failures": audit_failures(audit)}
    return out


# -- runs ----------------------------------------------------------------------

def config_echo(config: ScenarioConfig) -> dict:
    return {
        "receivers": config.receivers,
        "inputs": "random" if config.inputs is None else to_jsonable(config.inputs),
        "lock_mode": config.lock_mode.value,
        "skip_unlock": config.skip_unlock,
        "trials": config.trials,
        "seed": config.seed,
        "output_format": config.output_format,
        "forced_outcome": None if config.forced_outcome is None else list(config.forced_outcome),
    }


def trial_summary(transcript: ProtocolTranscript) -> dict:
    return to_jsonable(transcript)


def recovery_expected(trial: dict) -> bool:
    return trial["unlock_applied"] or trial["lock_mode"] == LockMode.NONE.value


def aggregate(trials: list[dict]) -> dict:
    """Aggregate block; a pure function of the per-trial entries."""
    n = len(trials[0]["fidelities"])
    per_receiver = []
    for i in range(n):
        values = [t["fidelities"][i] for t in trials]
        per_receiver.append(
            {
                "receiver": f"B{i + 1}",
                "min_fidelity": min(values),
                "mean_fidelity": math.fsum(values) / len(values),
            }
        )
    histogram: dict[str, int] = {}
    for t in trials:
        key = ",".join(str(m) for m in t["outcomes"])
        histogram[key] = histogram.get(key, 0) + 1
    failures = [
        f"trial {t['trial']}: B{i + 1} fidelity {f!r} below 1 - {FIDELITY_TOL:g}"
        for t in trials
        if recovery_expected(t)
        for i, f in enumerate(t["fidelities"])
        if f < 1.0 - FIDELITY_TOL
    ]
    return {
        "trials": len(trials),
        "receivers": per_receiver,
        "outcome_histogram": histogram,
        "failures": failures,
    }


@dataclass
class RunReport:
    config: dict
    trials: list[dict]
    aggregate: dict
    audits: dict[str, dict]
    version: str
    duration_ms: float | None

    @property
    def failures(self) -> list[str]:
        out = list(self.aggregate["failures"])
        for audit in self.audits.values():
            out.extend(audit["failures"])
        return out

    @property
    def exit_status(self) -> int:
        return EXIT_OK if not self.failures else EXIT_ASSERTION

    def to_json(self) -> str:
        return dumps(dataclasses.asdict(self))

    def to_text(self) -> str:
        cfg = self.config
        lines = [
            f"locked-teleport {self.version}",
            f"receivers={cfg['receivers']} lock_mode={cfg['lock_mode']} skip_unlock={cfg['skip_unlock']} "
            f"trials={cfg['trials']} seed={cfg['seed']}",
        ]
        for r in self.aggregate["receivers"]:
            lines.append(
                f"  {r['receiver']}: min fidelity {r['min_fidelity']:.12f}  mean {r['mean_fidelity']:.12f}"
            )
        hist = self.aggregate["outcome_histogram"]
        lines.append(f"  outcomes seen: {len(hist)} distinct, " + " ".join(f"{k}:{v}" for k, v in sorted(hist.items())))
        for stage, audit in self.audits.items():
            lines.append(f"  audit {stage}:")
            for cut, ppt in audit["ppt"].items():
                verdict = "PPT" if ppt["ppt_holds"] else "NPT"
                eig = ", ".join(f"{x:.6f}" for x in ppt["eigenvalues"])
                lines.append(f"    {cut:8s} {verdict}  PT eigenvalues [{eig}]")
            for cut, s in audit["entropies"].items():
                lines.append(f"    entropy {cut}: {s:.6f} bits" if s is not None else f"    entropy {cut}: n/a")
        if self.duration_ms is not None:
            lines.append(f"  duration {self.duration_ms:.1f} ms")
        failures = self.failures
        lines.append("status: OK" if not failures else f"status: FAILED ({len(failures)})")
        lines.extend(f"  - {f}" for f in failures)
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_text()


def run_trials(config: ScenarioConfig) -> list[ProtocolTranscript]:
    """All trials, ordered by trial index regardless of completion order."""
    indices = range(config.trials)
    if config.workers == 1:
        return [run_protocol(config, trial=t) for t in indices]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(lambda t: run_protocol(config, trial=t), indices))


def execute(config: ScenarioConfig) -> tuple[RunReport, int]:
    start = time.perf_counter()
    trials = [trial_summary(t) for t in run_trials(config)]
    report = RunReport(
        config=config_echo(config),
        trials=trials,
        aggregate=aggregate(trials),
        audits=audits_for(config),
        version=__version__,
        duration_ms=None,
    )
    if config.timing:
        report.duration_ms = (time.perf_counter() - start) * 1000.0
    return report, report.exit_status

