"""Monte-Carlo experiments, efficiency metrics and report formatting."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .adversary import AttackModel, NoAttack, attack_to_dict
from .errors import ZeroDenominator, ZeroQubits
from .protocol import SCHEMA_VERSION, ProtocolConfig, RunReport, run_protocol

CSV_COLUMNS = ("trial", "aborted", "error_rate", "decoded_ok", "c", "q", "b")


def eta1(c: int, q: int) -> Fraction:
    """Message bits per qubit, exactly."""
    if q <= 0:
        raise ZeroQubits("no qubits were used")
    return Fraction(c, q)


def eta2(c: int, q: int, b: int) -> Fraction:
    """Message bits per (qubit + classical decoding bit), exactly."""
    if q + b <= 0:
        raise ZeroDenominator("q + b must be positive")
    return Fraction(c, q + b)


@dataclass(frozen=True)
class EfficiencyReport:
    eta1: Fraction
    eta2: Fraction
    c: int
    q: int
    b: int

    @classmethod
    def from_counts(cls, c: int, q: int, b: int) -> "EfficiencyReport":
        return cls(eta1(c, q), eta2(c, q, b), c, q, b)

    @classmethod
    def from_report(cls, report: RunReport) -> "EfficiencyReport":
        return cls.from_counts(report.c, report.q, report.b)

    def to_dict(self) -> dict:
        return {"eta1": str(self.eta1), "eta2": str(self.eta2)}


def analytic_efficiency(variant: str) -> tuple[Fraction, Fraction]:
    """Closed-form (eta1, eta2) for a completed run of ``variant``."""
    if variant in ("dsqc", "dsqc_gv"):
        return Fraction(1, 2), Fraction(1, 3)
    return Fraction(1, 2), Fraction(1, 2)


def derive_seed(master: int, trial: int) -> np.random.SeedSequence:
    """Independent, reproducible stream for one trial of a master-seeded experiment."""
    return np.random.SeedSequence(entropy=int(master), spawn_key=(int(trial),))


def trial_rng(master: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, trial))


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    config: ProtocolConfig
    attack: AttackModel = field(default_factory=NoAttack)
    trials: int = 1
    message: str | None = None
    output: str = "json"
    leakage: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.output not in ("json", "csv"):
            raise ValueError(f"unknown output format {self.output!r}")


@dataclass
class TrialStats:
    trials_run: int
    aborts: int
    decode_successes: int
    mean_decoy_error_rate: float
    detection_rate: float
    mean_leakage_bits: float | None = None

    @property
    def completions(self) -> int:
        return self.trials_run - self.aborts

    @classmethod
    def from_reports(cls, reports: Sequence[RunReport]) -> "TrialStats":
        n = len(reports)
        aborts = sum(r.aborted for r in reports)
        leaks = [r.eve_leakage_bits for r in reports if r.eve_leakage_bits is not None]
        return cls(
            trials_run=n,
            aborts=aborts,
            decode_successes=sum(r.decoded_ok for r in reports),
            mean_decoy_error_rate=sum(r.decoy_error_rate for r in reports) / n,
            detection_rate=aborts / n,
            mean_leakage_bits=sum(leaks) / len(leaks) if leaks else None,
        )

    def to_dict(self) -> dict:
        return {
            "trials_run": self.trials_run,
            "aborts": self.aborts,
            "decode_successes": self.decode_successes,
            "mean_decoy_error_rate": self.mean_decoy_error_rate,
            "detection_rate": self.detection_rate,
            "mean_leakage_bits": self.mean_leakage_bits,
        }


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    stats: TrialStats
    reports: list[RunReport]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "variant": self.spec.config.variant,
            "n": self.spec.config.n,
            "N": self.spec.config.N,
            "delta": self.spec.config.delta,
            "seed": self.spec.config.seed,
            "attack": attack_to_dict(self.spec.attack),
            "stats": self.stats.to_dict(),
            "reports": [r.to_dict() for r in self.reports],
        }


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Run ``spec.trials`` independent executions seeded from ``spec.config.seed``."""
    reports = [
        run_protocol(spec.config, spec.message, spec.attack, trial_rng(spec.config.seed, i),
                     leakage=spec.leakage)
        for i in range(spec.trials)
    ]
    return ExperimentResult(spec, TrialStats.from_reports(reports), reports)


def reports_to_csv(reports: Iterable[RunReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for i, r in enumerate(reports):
        writer.writerow([i, int(r.aborted), repr(float(r.decoy_error_rate)), int(r.decoded_ok), r.c, r.q, r.b])
    return buf.getvalue()


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def sweep(
    base: ProtocolConfig,
    copies: Sequence[int],
    attacks: Sequence[AttackModel],
    deltas: Sequence[float],
    trials: int,
) -> list[dict]:
    """Grid over block count, attack and threshold; one aggregate row per cell."""
    rows = []
    for N in copies:
        for attack in attacks:
            for delta in deltas:
                config = ProtocolConfig(
                    n=base.n, N=N, variant=base.variant, basis=base.basis, anchor=base.anchor,
                    output_perm=base.output_perm, delta=delta, seed=base.seed,
                )
                result = run_experiment(ExperimentSpec(config, attack, trials))
                rows.append({"N": N, "attack": attack_to_dict(attack), "delta": delta,
                             **result.stats.to_dict()})
    return rows


def sweep_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    columns = ["N", "attack", "delta", "trials_run", "aborts", "decode_successes",
               "mean_decoy_error_rate", "detection_rate"]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([json.dumps(row[c], sort_keys=True) if c == "attack" else row[c] for c in columns])
    return buf.getvalue()
