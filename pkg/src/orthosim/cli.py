"""Command-line entry point: ``orthosim {run,sweep,efficiency,diagnose}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import adversary, harness
from .errors import OrthosimError
from .protocol import BASIS_PRESETS, ProtocolConfig, load_config, named_basis, parse_message
from .qlinalg import (
    load_basis,
    random_state,
    random_unitary,
    StateVec,
)


EXIT_OK, EXIT_ABORT, EXIT_CONFIG = 0, 1, 2


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ORTHOSIM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"ORTHOSIM_SEED must be an integer, got {env!r}") from None
    return 0


def _add_protocol_args(p: argparse.ArgumentParser, copies_nargs=None) -> None:
    p.add_argument("--config", help="protocol config JSON (overrides the individual flags)")
    p.add_argument("--variant", default="dsqc", choices=["dsqc", "qsdc", "dsqc-gv", "qsdc-gv"])
    p.add_argument("--n", type=int, default=2, help="qubits per code block")
    if copies_nargs:
        p.add_argument("--copies", type=int, nargs=copies_nargs, default=None, help="number of blocks N")
    else:
        p.add_argument("--copies", type=int, default=None, help="number of blocks N")
    p.add_argument("--basis", default="ghz", choices=BASIS_PRESETS, help="named code basis")
    p.add_argument("--basis-file", help="basis JSON document; overrides --basis")
    p.add_argument("--anchor", type=int, default=0, help="index of the initial state")
    p.add_argument("--seed", type=int, default=None, help="master seed (fallback: $ORTHOSIM_SEED, then 0)")
    p.add_argument("--output", default="json", choices=["json", "csv"])
    p.add_argument("--out", help="write the report here instead of stdout")


def _config(args, copies: int, delta: float) -> ProtocolConfig:
    seed = _seed(args)
    if args.config:
        cfg = load_config(args.config)
        return ProtocolConfig(n=cfg.n, N=cfg.N, variant=cfg.variant, basis=cfg.basis, anchor=cfg.anchor,
                              output_perm=cfg.output_perm, delta=cfg.delta,
                              seed=args.seed if args.seed is not None else cfg.seed)
    if args.basis_file:
        basis = load_basis(args.basis_file)
    else:
        basis = named_basis(args.basis, args.n, np.random.default_rng(seed))
    return ProtocolConfig(n=args.n, N=copies, variant=args.variant.replace("-", "_"), basis=basis,
                          anchor=args.anchor, delta=delta, seed=seed)


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _trim(report, length: int):
    """Drop filler blocks from a report whose message was padded to N * n bits."""
    report.message = report.message[:length]
    if report.decoded_bits is not None:
        report.decoded_bits = report.decoded_bits[:length]
    return report


def cmd_run(args) -> int:
    message = parse_message(args.message) if args.message else None
    copies = args.copies
    if copies is None:
        copies = -(-len(message) // args.n) if message else 1
    config = _config(args, copies, args.delta)
    padded = message
    if message is not None:
        if len(message) > config.message_length:
            raise ValueError(
                f"message has {len(message)} bits but N * n = {config.message_length}"
            )
        # short messages ride in zero-filled trailing blocks
        padded = message.ljust(config.message_length, "0")
    attack = adversary.parse_attack(args.attack)
    spec = harness.ExperimentSpec(config, attack, args.trials, padded, args.output, args.leakage)
    if args.trials == 1:
        report = harness.run_protocol(config, padded, attack, np.random.default_rng(config.seed),
                                      leakage=args.leakage)
        reports = [report]
    else:
        result = harness.run_experiment(spec)
        reports = result.reports
    if message is not None:
        for r in reports:
            _trim(r, len(message))
    if args.trials == 1:
        doc = reports[0].to_dict()
    else:
        result.stats = harness.TrialStats.from_reports(reports)
        doc = result.to_dict()
    if args.output == "csv":
        _emit(args, harness.reports_to_csv(reports))
    else:
        _emit(args, harness.dumps(doc))
    if args.strict and any(r.aborted for r in reports):
        return EXIT_ABORT
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _config(args, 1, 0.0)
    attacks = [adversary.parse_attack(a) for a in args.attack]
    rows = harness.sweep(config, args.copies or [config.N], attacks, args.delta, args.trials)
    if args.output == "csv":
        _emit(args, harness.sweep_to_csv(rows))
    else:
        _emit(args, harness.dumps({"schema": harness.SCHEMA_VERSION, "rows": rows}))
    return EXIT_OK


def cmd_efficiency(args) -> int:
    config = _config(args, args.copies or 1, 0.0)
    report = harness.run_protocol(config, None, adversary.NoAttack(), np.random.default_rng(config.seed))
    _emit(args, harness.dumps(harness.EfficiencyReport.from_report(report).to_dict()))
    return EXIT_OK


def _diagnose_duality(args) -> dict:
    rng = np.random.default_rng(_seed(args))
    sums = []
    for _ in range(args.samples):
        rep = adversary.duality_tradeoff([random_unitary(2, rng), random_unitary(2, rng)])
        sums.append(rep.sum_check)
    same = adversary.duality_tradeoff([np.eye(2), np.eye(2)])
    flip = adversary.duality_tradeoff([np.eye(2), np.array([[0, 1], [1, 0]])])
    return {
        "samples": args.samples,
        "max_abs_deviation": float(np.max(np.abs(np.array(sums) - 1.0))),
        "identical_probe": [same.distinguishability, same.coherence],
        "orthogonal_probe": [flip.distinguishability, flip.coherence],
    }


def _diagnose_monogamy(args) -> dict:
    rng = np.random.default_rng(_seed(args))
    slacks = [adversary.ckw_monogamy(random_state(3, rng)).slack for _ in range(args.samples)]
    s = 1 / np.sqrt(2)
    ghz = StateVec.from_amps([s, 0, 0, 0, 0, 0, 0, s])
    w = StateVec.from_amps([0, 1, 1, 0, 1, 0, 0, 0], normalize=True)
    return {
        "samples": args.samples,
        "min_slack": float(min(slacks)),
        "violations": int(sum(x < -1e-9 for x in slacks)),
        "ghz_slack": adversary.ckw_monogamy(ghz).slack,
        "w_slack": adversary.ckw_monogamy(w).slack,
    }


def _diagnose_leakage(args) -> dict:
    config = _config(args, 1, 0.0)
    attack = adversary.parse_attack(args.attack)
    positions = None
    if args.eve_positions:
        positions = [int(p) for p in args.eve_positions.split(",")]
    doc = {
        "variant": config.variant,
        "n": config.n,
        "eve_positions": positions,
        "chi_bits": adversary.eve_leakage(config, attack, positions),
    }
    if config.variant in ("dsqc", "dsqc_gv") and config.n <= 3:
        doc["scrambled_chi_bits"] = adversary.scrambled_leakage(config)
    return doc


def cmd_diagnose(args) -> int:
    handlers = {"duality": _diagnose_duality, "monogamy": _diagnose_monogamy, "leakage": _diagnose_leakage}
    _emit(args, harness.dumps(handlers[args.what](args)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orthosim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the protocol once or for several trials")
    _add_protocol_args(run)
    run.add_argument("--message", help="binary string or 0x-prefixed hex")
    run.add_argument("--attack", default="none", help=f"JSON attack model or one of {sorted(adversary.PRESETS)}")
    run.add_argument("--delta", type=float, default=0.0, help="maximum tolerated decoy error rate")
    run.add_argument("--trials", type=int, default=1)
    run.add_argument("--strict", action="store_true", help="exit 1 if any trial aborted")
    run.add_argument("--leakage", action="store_true", help="attach Eve's Holevo leakage to each report")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="grid over block count, attack and threshold")
    _add_protocol_args(sw, copies_nargs="+")
    sw.add_argument("--attack", nargs="+", default=["none"])
    sw.add_argument("--delta", type=float, nargs="+", default=[0.0])
    sw.add_argument("--trials", type=int, default=100)
    sw.set_defaults(func=cmd_sweep)

    eff = sub.add_parser("efficiency", help="qubit efficiencies of a completed run")
    _add_protocol_args(eff)
    eff.set_defaults(func=cmd_efficiency)

    diag = sub.add_parser("diagnose", help="security diagnostics")
    diag.add_argument("what", choices=["duality", "monogamy", "leakage"])
    _add_protocol_args(diag)
    diag.add_argument("--samples", type=int, default=1000)
    diag.add_argument("--attack", default="measure-all")
    diag.add_argument("--eve-positions", help="comma-separated qubit positions Eve holds in each block")
    diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OrthosimError, ValueError) as exc:
        print(f"orthosim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
