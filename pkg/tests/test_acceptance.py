"""Exit criteria for the package; each test is one criterion at its stated tolerance."""

import json
import subprocess
import sys

import numpy as np
import pytest

from locked_teleport import cli
from locked_teleport.analysis import ppt_check, reduced_spectrum, entanglement_entropy
from locked_teleport.config import InputStateSpec, LockMode, ScenarioConfig
from locked_teleport.core import apply_operator, random_unitary, reduced_density_matrix
from locked_teleport.gates import alice_lock_operator, cnot, hadamard, lock_operator, unlock_operator
from locked_teleport.protocol import (
    apply_lock,
    build_initial_state,
    defection_run,
    outcome_distribution,
    run_protocol,
)
from locked_teleport.report import channel_register

S = 1 / np.sqrt(2)
LOCK_MATRIX = S * np.array([[1, 0, 1, 0], [0, 1, 0, 1], [0, 1, 0, -1], [1, 0, -1, 0]])
UNLOCK_MATRIX = S * np.array([[1, 0, 0, 1], [0, 1, 1, 0], [1, 0, 0, -1], [0, 1, -1, 0]])
SENDER_LOCK_MATRIX = S * np.array([[1, 0, 0, 1], [0, 1, 1, 0], [1, 0, 0, -1], [0, 1, -1, 0]])
LOCKED_PAIR = np.array([[1, 0, 1, 0], [0, 1, 0, -1], [1, 0, 1, 0], [0, -1, 0, 1]]) / 4


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


def random_specs(n, rng):
    return tuple(InputStateSpec.random(rng) for _ in range(n))


def test_01_teleportation_correctness():
    worst = 0.0
    for mode in (LockMode.RECEIVERS_JOINT, LockMode.ALICE_PRE_DISTRIBUTION, LockMode.ALICE_POST_DISTRIBUTION):
        cfg = ScenarioConfig(receivers=2, lock_mode=mode, trials=100, seed=2024)
        for trial in range(cfg.trials):
            worst = max(worst, max(abs(f - 1) for f in run_protocol(cfg, trial=trial).fidelities))
    report("teleportation correctness", worst <= 1e-10, f"max |F - 1| = {worst:.3g} over 3 modes x 100 inputs")


def test_02_bell_decomposition(capsys):
    worst = 0.0
    for n in (1, 2, 3):
        status = cli.main(["verify-decomposition", "--receivers", str(n), "--trials", "20", "--seed", str(n)])
        doc = json.loads(capsys.readouterr().out)
        assert status == 0 and len(doc["cases"]) == 20
        assert all(c["branches"] == 4**n for c in doc["cases"])
        worst = max(worst, doc["max_deviation"])
    report("Bell decomposition", worst <= 1e-12, f"max branch deviation {worst:.3g}")


def test_03_outcome_distribution():
    rng = np.random.default_rng(3)
    worst = 0.0
    for n in (1, 2, 3):
        for _ in range(10):
            locked = apply_lock(build_initial_state(random_specs(n, rng)), LockMode.RECEIVERS_JOINT, n)
            dist = outcome_distribution(locked, n)
            assert len(dist) == 4**n
            worst = max(worst, max(abs(p - 4.0**-n) for p in dist.values()))
    report("outcome distribution", worst <= 1e-12, f"max |p - 4^-n| = {worst:.3g}")


def test_04_receivers_maximally_mixed_after_lock():
    rho = reduced_density_matrix(channel_register(LockMode.RECEIVERS_JOINT), ["B1", "B2"])
    dev = np.max(np.abs(rho.entries - np.eye(4) / 4))
    eig = np.array(ppt_check(rho, ["B1"]).eigenvalues)
    eig_dev = np.max(np.abs(eig - 0.25))
    report("rho_BC = I/4 with PT spectrum 1/4 x4", dev <= 1e-12 and eig_dev <= 1e-10,
           f"entry deviation {dev:.3g}, eigenvalue deviation {eig_dev:.3g}")


def test_05_receivers_mixed_under_any_unitary():
    rng = np.random.default_rng(5)
    locked = channel_register(LockMode.RECEIVERS_JOINT)
    worst = 0.0
    for _ in range(50):
        out = apply_operator(locked, random_unitary(2, rng), ["B1", "B2"])
        worst = max(worst, np.max(np.abs(reduced_density_matrix(out, ["B1", "B2"]).entries - np.eye(4) / 4)))
    report("rho_BC invariant under 50 random unitaries", worst <= 1e-12, f"max deviation {worst:.3g}")


def test_06_sender_receiver_pairs_disentangled():
    locked = channel_register(LockMode.RECEIVERS_JOINT)
    rho_a1b = reduced_density_matrix(locked, ["A1", "B1"])
    dev = np.max(np.abs(rho_a1b.entries - LOCKED_PAIR))
    spectra = [
        np.array(ppt_check(rho_a1b, ["A1"]).eigenvalues),
        np.array(ppt_check(reduced_density_matrix(locked, ["A2", "B2"]), ["A2"]).eigenvalues),
    ]
    eig_dev = max(np.max(np.abs(s - [0, 0, 0.5, 0.5])) for s in spectra)
    report("rho_A1B matrix and PT spectrum {0,0,1/2,1/2}", dev <= 1e-12 and eig_dev <= 1e-10,
           f"entry deviation {dev:.3g}, eigenvalue deviation {eig_dev:.3g} (both pairs)")


def test_07_composite_pair_entanglement():
    pre = entanglement_entropy(channel_register(LockMode.NONE), ["A1", "B1"])
    post_state = channel_register(LockMode.RECEIVERS_JOINT)
    post = entanglement_entropy(post_state, ["A1", "B1"])
    spectrum = np.array(reduced_spectrum(post_state, ["A1", "B1"]))
    ok = abs(pre) <= 1e-10 and abs(post - 1) <= 1e-10 and np.max(np.abs(spectrum - [0.5, 0.5, 0, 0])) <= 1e-10
    report("entropy (A1 B | A2 C) 0 -> 1 bit", ok, f"pre {pre:.3g}, post {post!r}, spectrum {spectrum.round(12).tolist()}")


def test_08_sender_lock_equivalent():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(10):
        s = build_initial_state(random_specs(2, rng))
        a = apply_lock(s, LockMode.ALICE_POST_DISTRIBUTION, 2).amplitudes
        b = apply_lock(s, LockMode.RECEIVERS_JOINT, 2).amplitudes
        overlap = np.vdot(b, a)
        worst = max(worst, np.max(np.abs(a - overlap / abs(overlap) * b)))
    report("sender-side lock equals receiver lock", worst <= 1e-12, f"max phase-aligned deviation {worst:.3g}")


def test_09_sender_lock_is_unlock_matrix():
    u_sender = alice_lock_operator().entries
    u_unlock = unlock_operator(2).entries
    same = np.array_equal(SENDER_LOCK_MATRIX, UNLOCK_MATRIX) and np.max(np.abs(u_sender - u_unlock)) == 0
    unitary = max(np.max(np.abs(u.conj().T @ u - np.eye(4))) for u in (u_sender, u_unlock))
    printed = max(np.max(np.abs(u_sender - SENDER_LOCK_MATRIX)), np.max(np.abs(u_unlock - UNLOCK_MATRIX)))
    report("sender lock matrix == unlock matrix", same and unitary <= 1e-12 and printed <= 1e-15,
           f"identical={same}, unitarity error {unitary:.3g}, printed-matrix error {printed:.3g}")


def test_10_n_receivers():
    worst = 0.0
    for n in (3, 4, 5):
        cfg = ScenarioConfig(receivers=n, trials=20, seed=10 + n)
        for trial in range(cfg.trials):
            worst = max(worst, max(abs(f - 1) for f in run_protocol(cfg, trial=trial).fidelities))
    lock_dev = np.max(np.abs(lock_operator(2).entries - LOCK_MATRIX))
    report("n-receiver lock", worst <= 1e-10 and lock_dev <= 1e-15,
           f"max |F - 1| = {worst:.3g} for n=3,4,5; two-receiver lock deviation {lock_dev:.3g}")


def test_11_defection():
    zero = InputStateSpec(1, 0)
    t = defection_run(ScenarioConfig(inputs=(zero, zero), skip_unlock=True, forced_outcome=(0, 0)))
    bob = t.fidelities[0]
    cfg = ScenarioConfig(receivers=2, skip_unlock=True, seed=11)
    blocked = 0
    worst_min_eig = -np.inf
    for trial in range(50):
        tr = defection_run(cfg, trial=trial)
        worst_min_eig = max(worst_min_eig, tr.residual_ppt.min_eigenvalue)
        blocked += min(tr.fidelities) < 0.999
    ok = abs(bob - 0.5) <= 1e-12 and worst_min_eig < -1e-6 and blocked == 50
    report("defection blocked", ok,
           f"Bob fidelity {bob:.6f}; largest PT min eigenvalue {worst_min_eig:.3g}; {blocked}/50 trials with a receiver < 0.999")


def test_12_hadamard_cnot_factorization():
    product = cnot().entries @ np.kron(hadamard().entries, np.eye(2))
    dev = np.max(np.abs(product - LOCK_MATRIX))
    report("CNOT (H x I) equals lock", dev <= 1e-14, f"max deviation {dev:.3g}")


@pytest.mark.parametrize("argv", [["run", "--seed", "13", "--trials", "50"]])
def test_13_determinism(argv):
    cmd = [sys.executable, "-m", "locked_teleport", *argv]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    report("byte-identical reports", first == second and len(first) > 0, f"{len(first)} bytes, identical={first == second}")
