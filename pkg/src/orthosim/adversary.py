"""Eavesdropper strategies and security diagnostics.

Attack models are small frozen dataclasses; :func:`apply_attack` runs one
against the particles currently in the channel.  The diagnostics are pure
functions:

* :func:`probe_interaction` / :func:`duality_tradeoff` -- a controlled probe
  ``sum_a |a><a| (x) C_a`` and the which-way/coherence trade-off it induces;
* :func:`ckw_monogamy` -- squared-concurrence monogamy for three qubits;
* :func:`eve_leakage` / :func:`scrambled_leakage` -- Holevo information of
  Eve's share of the code states.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NonUnitaryProbe,
    NotInTransit,
    TooLarge,
    WrongQubitCount,
)
from .qlinalg import (
    MAX_DIM,
    X_BASIS,
    Z_BASIS,
    BasisSet,
    DensityMatrix,
    StateVec,
    _qubits_for,
    apply_unitary,
    bell_basis,
    concurrence,
    holevo_bound,
    is_unitary,
    matrix_from_pairs,
    matrix_to_pairs,
    reduced_density,
    tensor,
)
from .registry import Ledger, ParticleId

BASIS_POLICIES = ("fixed_z", "fixed_x", "random_zx", "code_basis")


def _check_probe_ops(ops: Sequence[np.ndarray]) -> None:
    shapes = {op.shape for op in ops}
    if len(shapes) != 1:
        raise DimensionMismatch("probe operations must all act on the same probe space")
    (shape,) = shapes
    if len(shape) != 2 or shape[0] != shape[1]:
        raise DimensionMismatch(f"probe operations must be square, got {shape}")
    _qubits_for(shape[0])
    for op in ops:
        if not is_unitary(op):
            raise NonUnitaryProbe("probe operation is not unitary")


def _rounds(value) -> frozenset[int] | None:
    return None if value is None else frozenset(int(r) for r in value)


@dataclass(frozen=True)
class NoAttack:
    kind = "none"
    rounds: frozenset[int] | None = None
    fraction: float = 1.0


@dataclass(frozen=True)
class InterceptResend:
    """Measure each targeted qubit and forward the collapsed eigenstate.

    ``code_basis`` groups consecutive qubits of the send order into ``n``-tuples
    and measures them jointly in the protocol's code basis.
    """

    kind = "intercept_resend"
    basis: str = "random_zx"
    rounds: frozenset[int] | None = None
    fraction: float = 1.0

    def __post_init__(self):
        if self.basis not in BASIS_POLICIES:
            raise ValueError(f"unknown basis policy {self.basis!r}")
        object.__setattr__(self, "rounds", _rounds(self.rounds))


@dataclass(frozen=True)
class MeasureAll:
    kind = "measure_all"
    rounds: frozenset[int] | None = None
    fraction: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rounds", _rounds(self.rounds))


@dataclass(frozen=True, eq=False)
class EntanglingProbe:
    """Couple every targeted qubit to a fresh probe via ``sum_a |a><a| (x) C_a``."""

    kind = "entangling_probe"
    ops: tuple = ()
    rounds: frozenset[int] | None = None
    fraction: float = 1.0

    def __post_init__(self):
        ops = tuple(np.asarray(op, dtype=complex) for op in self.ops)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "rounds", _rounds(self.rounds))
        if len(ops) != 2:
            raise DimensionMismatch("a single-qubit probe attack needs exactly two probe operations")
        _check_probe_ops(ops)

    @property
    def probe_qubits(self) -> int:
        return _qubits_for(self.ops[0].shape[0])


AttackModel = Union[NoAttack, InterceptResend, MeasureAll, EntanglingProbe]

PRESETS = {
    "none": NoAttack(),
    "intercept-z": InterceptResend("fixed_z"),
    "intercept-x": InterceptResend("fixed_x"),
    "intercept-random": InterceptResend("random_zx"),
    "intercept-code": InterceptResend("code_basis"),
    "measure-all": MeasureAll(),
    "probe-cnot": EntanglingProbe((np.eye(2), np.array([[0, 1], [1, 0]]))),
}


def attack_from_dict(doc: dict) -> AttackModel:
    """Parse ``{"kind": "intercept_resend", "basis": "random_zx", ...}``."""
    kind = doc.get("kind", "none")
    common = {"rounds": doc.get("rounds"), "fraction": float(doc.get("fraction", 1.0))}
    if kind == "none":
        return NoAttack()
    if kind == "intercept_resend":
        return InterceptResend(doc.get("basis", "random_zx"), **common)
    if kind == "measure_all":
        basis = doc.get("basis", "computational")
        if basis != "computational":
            raise ValueError("measure_all only supports the computational basis")
        return MeasureAll(**common)
    if kind == "entangling_probe":
        ops = [matrix_from_pairs(op) for op in doc["probe_ops"]]
        return EntanglingProbe(tuple(ops), **common)
    raise ValueError(f"unknown attack kind {kind!r}")


def attack_to_dict(attack: AttackModel) -> dict:
    doc: dict = {"kind": attack.kind}
    if isinstance(attack, InterceptResend):
        doc["basis"] = attack.basis
    if isinstance(attack, MeasureAll):
        doc["basis"] = "computational"
    if isinstance(attack, EntanglingProbe):
        doc["probe_ops"] = [matrix_to_pairs(op) for op in attack.ops]
    if attack.rounds is not None:
        doc["rounds"] = sorted(attack.rounds)
    if attack.fraction != 1.0:
        doc["fraction"] = attack.fraction
    return doc


def parse_attack(text: str) -> AttackModel:
    """Preset name or JSON document."""
    text = text.strip()
    if text in PRESETS:
        return PRESETS[text]
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        raise ValueError(
            f"attack must be a JSON object or one of {sorted(PRESETS)}; got {text!r}"
        ) from None
    return attack_from_dict(doc)


def attacks_round(attack: AttackModel, round_number: int) -> bool:
    """Whether ``attack`` is active in transmission round ``round_number`` (1-based)."""
    return not isinstance(attack, NoAttack) and (attack.rounds is None or round_number in attack.rounds)


@dataclass
class EveRecord:
    """What Eve wrote down: ``(particle ids, basis label, outcome)`` per measurement."""

    measurements: list[tuple[tuple[ParticleId, ...], str, object]] = field(default_factory=list)
    probes: dict[ParticleId, list[ParticleId]] = field(default_factory=dict)


def controlled_probe_unitary(probe_ops: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_a |a><a| (x) C_a`` on (attacked system) (x) (probe)."""
    ops = [np.asarray(op, dtype=complex) for op in probe_ops]
    _check_probe_ops(ops)
    d = len(ops)
    out = np.zeros((d * ops[0].shape[0],) * 2, dtype=complex)
    for a, op in enumerate(ops):
        proj = np.zeros((d, d))
        proj[a, a] = 1
        out += np.kron(proj, op)
    return out


def probe_interaction(
    state: StateVec,
    probe_ops: Sequence[np.ndarray],
    targets: Sequence[int] | None = None,
    probe_state: StateVec | None = None,
) -> StateVec:
    """Attach a probe to ``state`` and apply the controlled interaction.

    ``targets`` are the attacked qubits of ``state`` (all of them by default),
    whose computational basis states label the probe operations.  The probe
    starts in ``probe_state`` (``|0...0>`` by default) and is appended after
    the system qubits; a probe state larger than the operations' space
    carries extra reference qubits that the operations do not touch.
    """
    ops = [np.asarray(op, dtype=complex) for op in probe_ops]
    _check_probe_ops(ops)
    targets = list(range(state.qubit_count)) if targets is None else list(targets)
    if len(ops) != 2 ** len(targets):
        raise DimensionMismatch(
            f"{len(ops)} probe operations for {len(targets)} attacked qubit(s); need {2 ** len(targets)}"
        )
    probe_q = _qubits_for(ops[0].shape[0])
    if probe_state is None:
        probe_state = StateVec.from_amps(np.eye(2**probe_q)[0])
    if probe_state.qubit_count < probe_q:
        raise DimensionMismatch("probe state is smaller than the probe operations' space")
    joint = tensor(state, probe_state)
    k = state.qubit_count
    probe_positions = list(range(k, k + probe_q))
    return apply_unitary(joint, controlled_probe_unitary(ops), targets + probe_positions)


def _targets(attack: AttackModel, ids: Sequence[ParticleId], rng: np.random.Generator) -> list[ParticleId]:
    if attack.fraction >= 1.0:
        return list(ids)
    keep = rng.random(len(ids)) < attack.fraction
    return [pid for pid, k in zip(ids, keep) if k]


def apply_attack(
    attack: AttackModel,
    ledger: Ledger,
    ids: Sequence[ParticleId],
    rng: np.random.Generator,
    code_basis: BasisSet | None = None,
) -> EveRecord:
    """Run ``attack`` on the in-transit particles ``ids``, given in send order."""
    record = EveRecord()
    ids = list(ids)
    bad = [pid for pid, holder in zip(ids, ledger.holders(ids)) if holder != "in_transit"]
    if bad:
        raise NotInTransit(f"particles {bad} are not in the channel")
    if isinstance(attack, NoAttack):
        return record
    targets = _targets(attack, ids, rng)

    if isinstance(attack, MeasureAll):
        for pid in targets:
            outcome = ledger.measure_particles([pid], Z_BASIS, rng)
            record.measurements.append(((pid,), "Z", outcome))
    elif isinstance(attack, InterceptResend):
        if attack.basis == "code_basis":
            if code_basis is None:
                raise ValueError("code_basis interception needs the protocol's code basis")
            n = code_basis.n
            whole = len(targets) - len(targets) % n
            for start in range(0, whole, n):
                group = targets[start:start + n]
                outcome = ledger.measure_particles(group, code_basis, rng)
                record.measurements.append((tuple(group), "code", outcome))
            for pid in targets[whole:]:
                outcome = ledger.measure_particles([pid], Z_BASIS, rng)
                record.measurements.append(((pid,), "Z", outcome))
        else:
            for pid in targets:
                if attack.basis == "fixed_z":
                    label = "Z"
                elif attack.basis == "fixed_x":
                    label = "X"
                else:
                    label = "Z" if rng.random() < 0.5 else "X"
                outcome = ledger.measure_particles([pid], Z_BASIS if label == "Z" else X_BASIS, rng)
                record.measurements.append(((pid,), label, outcome))
    elif isinstance(attack, EntanglingProbe):
        u = controlled_probe_unitary(attack.ops)
        blank = StateVec.from_amps(np.eye(2**attack.probe_qubits)[0])
        for pid in targets:
            probe_ids = ledger.create_block(blank, holder="eve")
            ledger.apply_unitary([pid] + probe_ids, u)
            record.probes[pid] = probe_ids
    else:
        raise TypeError(f"unsupported attack model {attack!r}")
    return record


@dataclass(frozen=True)
class DualityReport:
    distinguishability: float
    coherence: float
    sum_check: float
    linear_sum: float


def _trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def duality_tradeoff(probe_ops: Sequence[np.ndarray], probe_state: StateVec | None = None) -> DualityReport:
    """Which-way distinguishability vs. coherence for a probe attack on ``|+>``.

    ``distinguishability`` is the trace distance between Eve's two
    conditional probe states.  ``coherence`` is twice the magnitude of the
    off-diagonal element of Bob's qubit, which for a ``|+>`` input equals the
    overlap ``|<beta_0|beta_1>|`` of the two probe branches.  A
    ``probe_state`` wider than the probe operations models a probe already
    entangled with a reference that Eve does not hold; her conditional states
    are then mixed.
    """
    ops = [np.asarray(op, dtype=complex) for op in probe_ops]
    if len(ops) != 2:
        raise DimensionMismatch("duality trade-off is defined for a single attacked qubit")
    for op in ops:
        if not is_unitary(op):
            raise NonUnitaryProbe("probe operation is not unitary")
    probe_q = _qubits_for(ops[0].shape[0])
    blank = probe_state or StateVec.from_amps(np.eye(2**probe_q)[0])
    if blank.qubit_count < probe_q:
        raise DimensionMismatch("probe state is smaller than the probe operations' space")

    branches = [apply_unitary(blank, op, list(range(probe_q))) for op in ops]
    coherence = float(abs(np.vdot(branches[0].amps, branches[1].amps)))
    held = list(range(probe_q))
    conditional = [reduced_density(b, held).entries for b in branches]
    d = min(max(_trace_distance(*conditional), 0.0), 1.0)
    c = min(coherence, 1.0)
    return DualityReport(d, c, d * d + c * c, d + c)


@dataclass(frozen=True)
class MonogamyReport:
    e_ac: float
    e_bc: float
    e_ab_c: float
    slack: float


def ckw_monogamy(state: StateVec) -> MonogamyReport:
    """Squared concurrences ``C^2(A:C)``, ``C^2(B:C)`` against the tangle ``4 det(rho_C)``.

    Parties A, B, C are qubits 0, 1, 2 of a pure state.
    """
    if state.qubit_count != 3:
        raise WrongQubitCount(f"monogamy check needs 3 qubits, got {state.qubit_count}")
    e_ac = concurrence(reduced_density(state, [0, 2])) ** 2
    e_bc = concurrence(reduced_density(state, [1, 2])) ** 2
    rho_c = reduced_density(state, [2]).entries
    e_ab_c = float(4 * np.linalg.det(rho_c).real)
    return MonogamyReport(e_ac, e_bc, e_ab_c, e_ab_c - e_ac - e_bc)


# dense 2^(2n) density matrices; 10 qubits is 16 MB per matrix
SCRAMBLE_MAX_QUBITS = 10


def _code_states(config) -> list[StateVec]:
    m = config.basis.dim
    if m > MAX_DIM:
        raise TooLarge(f"M = {m} exceeds the enumeration cap of {MAX_DIM}")
    anchor = config.basis.vectors[config.anchor]
    return [StateVec(config.family.ops[v] @ anchor, config.n) for v in range(m)]


def _default_positions(config) -> list[list[int]]:
    if config.variant in ("qsdc", "qsdc_gv"):
        return [[s] for s in range(config.n)]
    return [list(range(config.n))]


def _eve_state(attack: AttackModel, code: StateVec, positions: list[int]) -> DensityMatrix:
    if isinstance(attack, EntanglingProbe):
        joint = code
        probe_q = attack.probe_qubits
        for pos in positions:
            joint = probe_interaction(joint, attack.ops, targets=[pos])
        k = code.qubit_count
        probes = list(range(k, k + probe_q * len(positions)))
        return reduced_density(joint, probes)
    return reduced_density(code, positions)


def eve_leakage(config, attack: AttackModel, eve_positions: Sequence[int] | None = None) -> float:
    """Holevo information (bits) Eve can hold about one uniformly random code word.

    Every one of the ``M`` messages is enumerated.  Eve's accessible share is
    the qubits at ``eve_positions`` of a code block; if not given it is the
    worst single position for the multi-round variants (one qubit per block
    per round) and the whole block otherwise.  Against an entangling probe
    the ensemble is built from Eve's probe registers instead of the qubits.
    """
    if isinstance(attack, NoAttack):
        return 0.0
    codes = _code_states(config)
    if eve_positions is not None:
        choices = [list(eve_positions)]
    else:
        choices = _default_positions(config)
    m = len(codes)
    best = 0.0
    for positions in choices:
        ensemble = [(1 / m, _eve_state(attack, c, positions)) for c in codes]
        best = max(best, holevo_bound(ensemble))
    return best


def scrambled_leakage(config, rng: np.random.Generator | None = None, samples: int | None = None) -> float:
    """Holevo information of one block plus its decoys sent in an unknown order.

    Eve holds the ``n`` code qubits of a block together with ``n`` decoys,
    shuffled by a uniformly random permutation she does not know.  Decoys are
    uniformly mixed single qubits, or ``|psi+>`` pairs for the orthogonal-state
    variants.  All ``(2n)!`` orders are enumerated when that is at most 5040;
    otherwise ``samples`` random orders are drawn from ``rng``.
    """
    codes = _code_states(config)
    n = config.n
    total = 2 * n
    if total > SCRAMBLE_MAX_QUBITS:
        raise TooLarge(f"{total} qubits is too large for a dense scrambled ensemble")
    if config.variant in ("dsqc_gv", "qsdc_gv"):
        pair = bell_basis().vectors[0]
        decoy = np.array([1], dtype=complex)
        decoy_rho = np.outer(decoy, decoy)
        for _ in range(n // 2):
            decoy_rho = np.kron(decoy_rho, np.outer(pair, pair.conj()))
        if n % 2:
            decoy_rho = np.kron(decoy_rho, np.eye(2) / 2)
    else:
        decoy_rho = np.eye(2**n) / 2**n

    if math.factorial(total) <= 5040:
        orders = list(permutations(range(total)))
    else:
        if rng is None or samples is None:
            raise ValueError("block too large to enumerate; pass rng and samples")
        orders = [tuple(rng.permutation(total)) for _ in range(samples)]

    ensemble = []
    for code in codes:
        rho = np.kron(code.projector(), decoy_rho).reshape((2,) * (2 * total))
        acc = np.zeros((2**total, 2**total), dtype=complex)
        for order in orders:
            axes = list(order) + [total + o for o in order]
            acc += rho.transpose(axes).reshape(2**total, 2**total)
        acc /= len(orders)
        ensemble.append((1 / len(codes), DensityMatrix((acc + acc.conj().T) / 2, total)))
    return holevo_bound(ensemble)
