"""Command-line entry point.

    locked-teleport run --receivers 2 --seed 7 --trials 100
    locked-teleport analyze-channel --stage post-lock
    locked-teleport verify-decomposition --receivers 3 --trials 20
    locked-teleport sweep --receivers-from 1 --receivers-to 5
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import channel_audit
from .config import ConfigError, InputStateSpec, LockMode, ScenarioConfig
from .protocol import ProtocolError, derived_rng, verify_bell_decomposition
from .report import (
    EXIT_ASSERTION,
    EXIT_OK,
    EXIT_USAGE,
    aggregate,
    audit_failures,
    channel_register,
    dumps,
    execute,
    post_measurement_channel,
    run_trials,
    to_jsonable,
    trial_summary,
)


DECOMPOSITION_TOL = 1e-12

LOCK_MODE_CHOICES = ["receivers-joint", "alice-pre", "alice-post", "none"]

# config-file key -> ScenarioConfig field
_FILE_KEYS = {
    "receivers": "receivers",
    "trials": "trials",
    "seed": "seed",
    "lock_mode": "lock_mode",
    "skip_unlock": "skip_unlock",
    "states": "states",
    "force_outcome": "force_outcome",
    "format": "output_format",
    "output_format": "output_format",
    "workers": "workers",
    "timing": "timing",
}


def _amplitude(value) -> complex:
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(float(re), float(im))
    return complex(value)


def parse_state(text) -> InputStateSpec:
    """``"0.6,0.8"`` or ``"0.5+0.5j,0.7071"`` or a two-element list."""
    if isinstance(text, str):
        parts = [p.strip() for p in text.split(",")]
    else:
        parts = list(text)
    if len(parts) != 2:
        raise ConfigError(f"state {text!r} needs exactly two amplitudes 'alpha,beta'")
    try:
        alpha, beta = (_amplitude(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot parse amplitudes in state {text!r}") from None
    return InputStateSpec.normalized(alpha, beta)


def parse_outcome(text) -> tuple[int, ...]:
    parts = text.split(",") if isinstance(text, str) else list(text)
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"cannot parse forced outcome {text!r}") from None


def _scenario_options(p: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    p.add_argument("--config", default=s, help="JSON file with scenario settings; flags override it")
    p.add_argument("--receivers", "-n", type=int, default=s, help="number of receivers (default 2)")
    p.add_argument("--trials", type=int, default=s, help="number of seeded trials (default 100)")
    p.add_argument("--seed", type=int, default=s, help="master seed, 64-bit unsigned (default 0)")
    p.add_argument("--lock-mode", default=s, help=f"one of {', '.join(LOCK_MODE_CHOICES)}")
    p.add_argument("--skip-unlock", action="store_true", default=s, help="receivers skip the joint unlock")
    p.add_argument("--state", action="append", default=s, metavar="ALPHA,BETA",
                   help="explicit input state, once per receiver (default: random per trial)")
    p.add_argument("--force-outcome", default=s, metavar="M1,M2,...", help="bypass sampling")
    p.add_argument("--format", dest="output_format", choices=["json", "text"], default=s)
    p.add_argument("--workers", type=int, default=s, help="thread pool size for trials")
    p.add_argument("--timing", action="store_true", default=s,
                   help="record wall-clock duration (makes output non-reproducible)")
    p.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locked-teleport", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="seeded protocol trials")
    _scenario_options(run)

    analyze = sub.add_parser("analyze-channel", help="PPT and entropy audit of the two-receiver channel")
    _scenario_options(analyze)
    analyze.add_argument("--stage", default="all",
                         choices=["pre-lock", "post-lock", "post-measurement", "all"])

    verify = sub.add_parser("verify-decomposition", help="check every Bell branch of the locked state")
    _scenario_options(verify)

    sweep = sub.add_parser("sweep", help="fidelity table over a range of receiver counts")
    _scenario_options(sweep)
    sweep.add_argument("--receivers-from", type=int, default=1)
    sweep.add_argument("--receivers-to", type=int, default=5)
    return parser


def _load_file(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(raw) - set(_FILE_KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s) in config file {path}: {', '.join(unknown)}")
    return {_FILE_KEYS[k]: v for k, v in raw.items()}


def parse_config(argv=None, config_file: str | None = None, **overrides) -> ScenarioConfig:
    """ScenarioConfig from ``run`` flags; ``argv`` excludes the subcommand."""
    parser = argparse.ArgumentParser(prog="locked-teleport run", add_help=False)
    _scenario_options(parser)
    ns = parser.parse_args(list(argv or []))
    return config_from_namespace(ns, config_file=config_file, **overrides)


def config_from_namespace(ns: argparse.Namespace, config_file: str | None = None, **overrides) -> ScenarioConfig:
    values: dict = {}
    path = getattr(ns, "config", None) or config_file
    if path:
        values.update(_load_file(path))
    for key in ("receivers", "trials", "seed", "lock_mode", "skip_unlock", "output_format", "workers", "timing"):
        if hasattr(ns, key):
            values[key] = getattr(ns, key)
    if hasattr(ns, "state"):
        values["states"] = ns.state
    if hasattr(ns, "force_outcome"):
        values["force_outcome"] = ns.force_outcome
    values.update(overrides)

    states = values.pop("states", None)
    if states is not None:
        values["inputs"] = tuple(parse_state(s) for s in states)
    outcome = values.pop("force_outcome", None)
    if outcome is not None:
        values["forced_outcome"] = parse_outcome(outcome)
    if "lock_mode" in values:
        values["lock_mode"] = LockMode.parse(values["lock_mode"])
    if "inputs" in values and "receivers" not in values:
        values["receivers"] = len(values["inputs"])
    for key in ("receivers", "trials", "seed", "workers"):
        if key in values and (isinstance(values[key], bool) or not isinstance(values[key], int)):
            raise ConfigError(f"{key} must be an integer, got {values[key]!r}")
    return ScenarioConfig(**values)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(ns) -> int:
    config = config_from_namespace(ns)
    report, status = execute(config)
    _emit(report.render(config.output_format), ns.output)
    for failure in report.failures:
        print(f"assertion failed: {failure}", file=sys.stderr)
    return status


def cmd_analyze(ns) -> int:
    config = config_from_namespace(ns, receivers=2)
    if config.lock_mode is LockMode.NONE:
        raise ConfigError("analyze-channel needs a lock mode other than none")
    stages = ["pre_lock", "post_lock", "post_measurement"] if ns.stage == "all" else [ns.stage.replace("-", "_")]
    audits = {}
    for stage in stages:
        if stage == "pre_lock":
            channel = channel_register(LockMode.NONE)
        elif stage == "post_lock":
            channel = channel_register(config.lock_mode)
        else:
            specs = config.inputs or (InputStateSpec(1, 0), InputStateSpec(1, 0))
            outcome = config.forced_outcome or (0, 0)
            channel = post_measurement_channel(specs, outcome, config.lock_mode)
        audit = channel_audit(channel, stage)
        audits[stage] = {**to_jsonable(audit), "failures": audit_failures(audit)}
    failures = [f for a in audits.values() for f in a["failures"]]
    doc = {"command": "analyze-channel", "lock_mode": config.lock_mode.value, "audits": audits, "version": __version__}
    if config.output_format == "json":
        _emit(dumps(doc), ns.output)
    else:
        lines = []
        for stage, audit in audits.items():
            lines.append(f"{stage}:")
            for cut, ppt in audit["ppt"].items():
                eig = ", ".join(f"{x:.6f}" for x in ppt["eigenvalues"])
                lines.append(f"  {cut:8s} {'PPT' if ppt['ppt_holds'] else 'NPT'}  [{eig}]")
            for cut, s in audit["entropies"].items():
                lines.append(f"  entropy {cut}: " + ("n/a (mixed)" if s is None else f"{s:.6f} bits"))
            for name, dev in audit["checks"].items():
                lines.append(f"  {name}: max deviation {dev:.3g}")
        _emit("\n".join(lines) + "\n", ns.output)
    for failure in failures:
        print(f"assertion failed: {failure}", file=sys.stderr)
    return EXIT_ASSERTION if failures else EXIT_OK


def cmd_verify(ns) -> int:
    trials = getattr(ns, "trials", 20)
    config = config_from_namespace(ns, trials=trials)
    n = config.receivers
    if n > 3:
        raise ConfigError(f"verify-decomposition enumerates 4^n branches; n={n} exceeds 3")
    cases = []
    for case in range(config.trials):
        specs = config.inputs or tuple(
            InputStateSpec.random(derived_rng(config.seed, case, "input", i)) for i in range(n)
        )
        result = verify_bell_decomposition(specs)
        cases.append(
            {
                "case": case,
                "inputs": to_jsonable(specs),
                "branches": len(result.branches),
                "max_deviation": result.max_deviation,
                "max_probability_error": result.max_probability_error,
            }
        )
    worst_dev = max(c["max_deviation"] for c in cases)
    worst_p = max(c["max_probability_error"] for c in cases)
    passed = worst_dev <= DECOMPOSITION_TOL and worst_p <= DECOMPOSITION_TOL
    doc = {
        "command": "verify-decomposition",
        "receivers": n,
        "seed": config.seed,
        "cases": cases,
        "max_deviation": worst_dev,
        "max_probability_error": worst_p,
        "tolerance": DECOMPOSITION_TOL,
        "passed": passed,
        "version": __version__,
    }
    if config.output_format == "json":
        _emit(dumps(doc), ns.output)
    else:
        _emit(
            f"n={n}: {len(cases)} inputs x {4 ** n} branches, max residual deviation {worst_dev:.3g}, "
            f"max probability error {worst_p:.3g} -> {'OK' if passed else 'FAILED'}\n",
            ns.output,
        )
    return EXIT_OK if passed else EXIT_ASSERTION


def cmd_sweep(ns) -> int:
    lo, hi = ns.receivers_from, ns.receivers_to
    if lo < 1 or hi < lo:
        raise ConfigError(f"bad receiver range {lo}..{hi}")
    rows = []
    failures = []
    start = time.perf_counter()
    for n in range(lo, hi + 1):
        config = config_from_namespace(ns, receivers=n, trials=getattr(ns, "trials", 20))
        trials = [trial_summary(t) for t in run_trials(config)]
        agg = aggregate(trials)
        rows.append(
            {
                "receivers": n,
                "qubits": 3 * n,
                "trials": len(trials),
                "min_fidelity": min(r["min_fidelity"] for r in agg["receivers"]),
                "mean_fidelity": min(r["mean_fidelity"] for r in agg["receivers"]),
                "distinct_outcomes": len(agg["outcome_histogram"]),
                "failures": agg["failures"],
            }
        )
        failures += agg["failures"]
    fmt = getattr(ns, "output_format", "json")
    doc = {"command": "sweep", "rows": rows, "version": __version__}
    if getattr(ns, "timing", False):
        doc["duration_ms"] = (time.perf_counter() - start) * 1000.0
    if fmt == "json":
        _emit(dumps(doc), ns.output)
    else:
        lines = [f"{'n':>3} {'qubits':>6} {'trials':>6} {'min fidelity':>16} {'mean fidelity':>16}"]
        lines += [
            f"{r['receivers']:>3} {r['qubits']:>6} {r['trials']:>6} {r['min_fidelity']:>16.12f} {r['mean_fidelity']:>16.12f}"
            for r in rows
        ]
        _emit("\n".join(lines) + "\n", ns.output)
    return EXIT_ASSERTION if failures else EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "analyze-channel": cmd_analyze,
    "verify-decomposition": cmd_verify,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[ns.command](ns)
    except ConfigError as exc:
        print(f"locked-teleport: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProtocolError as exc:
        print(f"locked-teleport: internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
