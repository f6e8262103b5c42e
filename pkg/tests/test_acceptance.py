"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import contextlib
import io
import json
import math
import time
from fractions import Fraction

import numpy as np

from conftest import ACCEPTANCE_LINES
from orthosim.adversary import InterceptResend, MeasureAll, duality_tradeoff, ckw_monogamy, eve_leakage
from orthosim.cli import main
from orthosim.harness import EfficiencyReport
from orthosim.protocol import ProtocolConfig, run_protocol
from orthosim.qlinalg import (
    Z_BASIS,
    StateVec,
    bell_basis,
    computational_basis,
    ghz_basis,
    hermitian_family,
    random_basis,
    random_state,
    random_unitary,
)
from orthosim.registry import Ledger

VARIANTS = ("dsqc", "dsqc_gv", "qsdc", "qsdc_gv")
PSI_PLUS = StateVec.from_amps([1, 0, 0, 1], normalize=True)


def record(number, passed, detail, elapsed, budget):
    in_time = elapsed < budget
    ok = bool(passed and in_time)
    detail = f"{detail}; {elapsed:.2f} s (budget {budget} s)"
    ACCEPTANCE_LINES.append((number, ok, detail))
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert passed, detail
    assert in_time, f"over the time budget: {detail}"


def test_1_efficiency_exact():
    t0 = time.perf_counter()
    expected = {"dsqc": (Fraction(1, 2), Fraction(1, 3)), "dsqc_gv": (Fraction(1, 2), Fraction(1, 3)),
                "qsdc": (Fraction(1, 2), Fraction(1, 2)), "qsdc_gv": (Fraction(1, 2), Fraction(1, 2))}
    rng = np.random.default_rng(1)
    seen = {}
    ok = True
    for variant in VARIANTS:
        for n in (1, 2, 3):
            cfg = ProtocolConfig(n=n, N=3, variant=variant, basis=ghz_basis(n))
            report = run_protocol(cfg, None, None, rng)
            eff = EfficiencyReport.from_report(report)
            ok &= not report.aborted and (eff.eta1, eff.eta2) == expected[variant]
            seen[variant] = (str(eff.eta1), str(eff.eta2))
    detail = "eta1, eta2: " + ", ".join(f"{v}=({a}, {b})" for v, (a, b) in seen.items())
    record(1, ok, detail, time.perf_counter() - t0, 1)


def test_2_deterministic_decoding():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    bases = {n: [random_basis(n, rng) for _ in range(100)] for n in (1, 2, 3)}
    failures = 0
    runs = 0
    for variant in VARIANTS:
        configs = {}
        for r in range(1000):
            n = (1, 2, 3)[r % 3]
            k = (r // 3) % 100
            if (n, k) not in configs:
                configs[n, k] = ProtocolConfig(n=n, N=2, variant=variant, basis=bases[n][k],
                                               anchor=int(rng.integers(2**n)))
            report = run_protocol(configs[n, k], None, None, rng)
            runs += 1
            failures += not report.decoded_ok
    detail = f"{runs - failures}/{runs} runs decoded exactly (1000 per variant, n in 1..3, 100 bases per n)"
    record(2, failures == 0, detail, time.perf_counter() - t0, 30)


def test_3_bb84_detection():
    t0 = time.perf_counter()
    rates = {}
    ok = True
    for policy in ("fixed_z", "random_zx"):
        cfg = ProtocolConfig(n=2, N=10, variant="dsqc", basis=ghz_basis(2), delta=0.0)
        rng = np.random.default_rng(3)
        trials = 1000
        reports = [run_protocol(cfg, None, InterceptResend(policy), rng) for _ in range(trials)]
        # every run checks Nn = 20 single decoys, so the mean rate is the per-decoy rate
        per_decoy = float(np.mean([r.decoy_error_rate for r in reports]))
        abort = sum(r.aborted for r in reports) / trials
        rates[policy] = (per_decoy, abort)
        ok &= abs(per_decoy - 0.25) <= 0.02 and abs(abort - (1 - 0.75**20)) <= 0.01
    detail = "; ".join(f"{p}: per-decoy error {e:.4f} over 20000 decoys, abort rate {a:.3f}"
                       for p, (e, a) in rates.items()) + f" (target 0.25, {1 - 0.75**20:.4f})"
    record(3, ok, detail, time.perf_counter() - t0, 60)


def test_4_bell_detection():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    pairs = 10_000
    bell = bell_basis()
    rates = {}
    for label, members in (("single", 1), ("double", 2)):
        errors = 0
        for _ in range(pairs):
            ledger = Ledger()
            ids = ledger.create_block(PSI_PLUS)
            ledger.transfer(ids, "in_transit")
            for pid in ids[:members]:
                ledger.measure_particles([pid], Z_BASIS, rng)
            errors += ledger.measure_particles(ids, bell, rng) != 0
        rates[label] = errors / pairs
    # end to end: measuring every travel qubit of the GV variant hits both members of each pair
    cfg = ProtocolConfig(n=2, N=10, variant="dsqc_gv", basis=bell, delta=0.0)
    runs = [run_protocol(cfg, None, MeasureAll(), rng) for _ in range(1000)]
    rates["protocol"] = float(np.mean([r.decoy_error_rate for r in runs]))
    ok = all(abs(v - 0.5) <= 0.02 for v in rates.values())
    detail = ", ".join(f"{k} {v:.4f}" for k, v in rates.items()) + " per-pair error over 10000 pairs (target 0.50)"
    record(4, ok, detail, time.perf_counter() - t0, 60)


def test_5_encoding_family_algebra():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    for n in (1, 2, 3):
        m = 2**n
        for _ in range(50):
            basis = random_basis(n, rng)
            anchor = int(rng.integers(m))
            ops = hermitian_family(basis, anchor).ops
            a = basis.vectors[anchor]
            for u in ops:
                worst = max(worst, np.linalg.norm(u - u.conj().T), np.linalg.norm(u.conj().T @ u - np.eye(m)))
            images = ops @ a
            gram = images.conj() @ images.T
            worst = max(worst, float(np.max(np.abs(gram - np.eye(m)))))
    detail = f"max deviation {worst:.2e} over M in (2, 4, 8), 50 bases each (tolerance 1e-10)"
    record(5, worst < 1e-10, detail, time.perf_counter() - t0, 10)


def test_6_duality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    dev = max(abs(duality_tradeoff([random_unitary(2, rng), random_unitary(2, rng)]).sum_check - 1)
              for _ in range(1000))
    same = duality_tradeoff([np.eye(2), np.eye(2)])
    flip = duality_tradeoff([np.eye(2), np.array([[0, 1], [1, 0]])])
    limits = (same.distinguishability, same.coherence) == (0.0, 1.0) and \
             (flip.distinguishability, flip.coherence) == (1.0, 0.0)
    detail = (f"max |D^2 + C^2 - 1| = {dev:.2e} over 1000 probes; identical -> "
              f"({same.distinguishability}, {same.coherence}), orthogonal -> "
              f"({flip.distinguishability}, {flip.coherence})")
    record(6, dev < 1e-9 and limits, detail, time.perf_counter() - t0, 5)


def test_7_monogamy():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    slack = min(ckw_monogamy(random_state(3, rng)).slack for _ in range(10_000))
    s = 1 / math.sqrt(2)
    ghz = ckw_monogamy(StateVec.from_amps([s, 0, 0, 0, 0, 0, 0, s])).slack
    w = ckw_monogamy(StateVec.from_amps([0, 1, 1, 0, 1, 0, 0, 0], normalize=True)).slack
    ok = slack >= -1e-9 and abs(ghz - 1) < 1e-9 and abs(w) < 1e-9
    detail = f"min slack {slack:.3e} over 10000 Haar states; GHZ slack {ghz:.12f}, W slack {w:.2e}"
    record(7, ok, detail, time.perf_counter() - t0, 30)


def test_8_leakage():
    t0 = time.perf_counter()
    bell_cfg = ProtocolConfig(n=2, N=1, variant="qsdc", basis=bell_basis())
    prod_cfg = ProtocolConfig(n=2, N=1, variant="qsdc", basis=computational_basis(2))
    chi_bell = eve_leakage(bell_cfg, MeasureAll())
    chi_prod = eve_leakage(prod_cfg, MeasureAll())
    ok = abs(chi_bell) < 1e-9 and abs(chi_prod - 1) < 1e-9
    detail = f"one qubit per block: Bell basis chi = {chi_bell:.2e}, product basis chi = {chi_prod:.12f}"
    record(8, ok, detail, time.perf_counter() - t0, 5)


def _cli(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(argv)
    return code, out.getvalue()


def test_9_reproducibility(tmp_path):
    t0 = time.perf_counter()
    invocations = [
        ["run", "--variant", "dsqc", "--n", "2", "--copies", "4", "--message", "1011", "--seed", "7"],
        ["run", "--variant", "qsdc-gv", "--basis", "random", "--copies", "3", "--trials", "20",
         "--attack", "intercept-random", "--seed", "9", "--leakage"],
        ["run", "--trials", "10", "--output", "csv", "--attack", "probe-cnot", "--seed", "2"],
        ["sweep", "--copies", "2", "4", "--attack", "none", "intercept-z", "--trials", "10", "--seed", "5"],
        ["efficiency", "--variant", "qsdc", "--n", "3", "--seed", "1"],
        ["diagnose", "duality", "--samples", "200", "--seed", "3"],
        ["diagnose", "monogamy", "--samples", "200", "--seed", "3"],
        ["diagnose", "leakage", "--variant", "dsqc", "--n", "2", "--basis", "random", "--seed", "4"],
    ]
    mismatches = []
    for argv in invocations:
        first, second = _cli(argv), _cli(argv)
        if first != second or first[0] != 0:
            mismatches.append(argv[0])
    path_a, path_b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (path_a, path_b):
        main(["run", "--trials", "5", "--seed", "11", "--out", str(path)])
    if path_a.read_bytes() != path_b.read_bytes():
        mismatches.append("--out")
    json.loads(path_a.read_text())
    detail = f"{len(invocations) + 1 - len(mismatches)}/{len(invocations) + 1} invocations byte-identical on repeat"
    record(9, not mismatches, detail, time.perf_counter() - t0, 5)
