"""Alice/Bob state machines for the four protocol variants.

``dsqc`` and ``dsqc_gv`` send every qubit in one scrambled batch and disclose
the true order once the decoys check out.  ``qsdc`` and ``qsdc_gv`` send the
``s``-th qubit of every block in round ``s`` and need no order disclosure.
The ``_gv`` variants check eavesdropping with ``|psi+>`` decoy pairs measured
in the Bell basis instead of single decoys in two conjugate bases.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import adversary
from .adversary import AttackModel, NoAttack
from .errors import (
    ConfigInvalid,
    IndexOutOfRange,
    LengthMismatch,
    OddDecoyCount,
    UnpairedDecoy,
)
from .qlinalg import (
    X_BASIS,
    Z_BASIS,
    BasisSet,
    Permutation,
    StateVec,
    UnitaryFamily,
    basis_from_dict,
    basis_to_dict,
    bell_basis,
    computational_basis,
    encoding_family,
    ghz_basis,
    random_basis,
    states_equal,
    verify_orthogonal_family,
)
from .registry import Ledger, ParticleId, TransportSequence, permute_transport

VARIANTS = ("dsqc", "qsdc", "dsqc_gv", "qsdc_gv")
PURPOSES = ("decoy_coordinates", "order_disclosure", "acknowledgment", "eavesdrop_check")
BASIS_PRESETS = ("computational", "bell", "ghz", "random")
SCHEMA_VERSION = 1


def named_basis(name: str, n: int, rng: np.random.Generator | None = None) -> BasisSet:
    if name == "computational":
        return computational_basis(n)
    if name == "ghz":
        return ghz_basis(n)
    if name == "bell":
        if n != 2:
            raise ConfigInvalid("the Bell basis needs n = 2")
        return bell_basis()
    if name == "random":
        return random_basis(n, rng if rng is not None else np.random.default_rng())
    raise ConfigInvalid(f"unknown basis preset {name!r}; choose from {BASIS_PRESETS}")


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    """Everything Alice announces publicly before a run, plus the check threshold."""

    n: int
    N: int
    variant: str
    basis: BasisSet
    anchor: int = 0
    output_perm: Permutation | None = None
    family: UnitaryFamily | None = None
    delta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigInvalid(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.n < 1 or self.N < 1:
            raise ConfigInvalid("n and N must be positive")
        if self.basis.dim != 2**self.n:
            raise ConfigInvalid(f"basis has dimension {self.basis.dim}, expected M = 2**{self.n}")
        if not 0 <= self.anchor < self.basis.dim:
            raise ConfigInvalid(f"anchor {self.anchor} outside 0..{self.basis.dim - 1}")
        if not 0 <= self.delta < 1:
            raise ConfigInvalid(f"threshold delta must lie in [0, 1), got {self.delta}")
        perm = self.output_perm or Permutation.identity(self.basis.dim)
        if len(perm) != self.basis.dim:
            raise ConfigInvalid("output permutation must act on M letters")
        object.__setattr__(self, "output_perm", perm)
        family = self.family
        if family is None:
            family = encoding_family(self.basis, self.anchor, perm)
            object.__setattr__(self, "family", family)
        if family.anchor_index != self.anchor or not verify_orthogonal_family(family, self.basis):
            raise ConfigInvalid("encoding family is not an orthogonal family for this anchor")
        anchor = self.basis[self.anchor]
        for j in range(self.basis.dim):
            image = StateVec.from_amps(family.ops[j] @ anchor.amps, normalize=True)
            if not states_equal(image, self.basis[perm(j)], atol=1e-9):
                raise ConfigInvalid(f"family member {j} does not map the anchor onto |b_{j}>")

    @property
    def M(self) -> int:
        return self.basis.dim

    @property
    def decoy_kind(self) -> str:
        return "bell_pairs" if self.variant.endswith("_gv") else "mub_singles"

    @property
    def message_length(self) -> int:
        return self.N * self.n

    @classmethod
    def from_dict(cls, doc: dict) -> "ProtocolConfig":
        """Build from a JSON-style mapping mirroring the fields.

        ``basis`` is a basis document or a preset name; the family is always
        derived from the basis, anchor and output permutation.
        """
        try:
            n = int(doc["n"])
            N = int(doc["N"])
            variant = str(doc.get("variant", "dsqc")).replace("-", "_")
            seed = int(doc.get("seed", 0))
            basis_doc = doc.get("basis", "ghz")
            if isinstance(basis_doc, str):
                basis = named_basis(basis_doc, n, np.random.default_rng(seed))
            else:
                basis = basis_from_dict(basis_doc)
            perm = doc.get("output_perm")
            return cls(
                n=n,
                N=N,
                variant=variant,
                basis=basis,
                anchor=int(doc.get("anchor", 0)),
                output_perm=None if perm is None else Permutation(tuple(perm)),
                delta=float(doc.get("delta", 0.0)),
                seed=seed,
            )
        except ConfigInvalid:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad protocol config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "variant": self.variant,
            "basis": basis_to_dict(self.basis),
            "anchor": self.anchor,
            "output_perm": list(self.output_perm.map),
            "delta": self.delta,
            "seed": self.seed,
        }


def load_config(path) -> ProtocolConfig:
    with open(path) as fh:
        return ProtocolConfig.from_dict(json.load(fh))


@dataclass(frozen=True)
class DecoySpec:
    """Decoys to mix into one transmission.

    Bell-pair decoys need an even count; with ``pad_with_single`` an odd count
    is met by ``count // 2`` pairs plus one single-qubit decoy.
    """

    kind: str
    count: int
    pad_with_single: bool = False

    def __post_init__(self):
        if self.kind not in ("mub_singles", "bell_pairs"):
            raise ValueError(f"unknown decoy kind {self.kind!r}")
        if self.count < 0:
            raise ValueError("decoy count must be nonnegative")
        if self.kind == "bell_pairs" and self.count % 2 and not self.pad_with_single:
            raise OddDecoyCount(f"{self.count} decoy qubits cannot form Bell pairs")


@dataclass(frozen=True)
class SingleDecoy:
    particle: ParticleId
    basis: str  # "Z" or "X"
    value: int


@dataclass(frozen=True)
class DressedSequence:
    sequence: TransportSequence
    hidden: Permutation
    decoy_positions: tuple[int, ...]
    singles: tuple[SingleDecoy, ...]
    pairs: tuple[tuple[ParticleId, ParticleId], ...]

    @property
    def message_positions(self) -> tuple[int, ...]:
        """Send positions of the message qubits, in their original order."""
        m = len(self.sequence) - len(self.decoy_positions)
        return tuple(self.hidden(i) for i in range(m))


@dataclass(frozen=True)
class TranscriptEntry:
    sender: str
    purpose: str
    bits: int


@dataclass
class Transcript:
    entries: list[TranscriptEntry] = field(default_factory=list)

    def add(self, sender: str, purpose: str, bits: int) -> None:
        if purpose not in PURPOSES:
            raise ValueError(f"unknown transcript purpose {purpose!r}")
        if bits < 0:
            raise ValueError("bit counts are nonnegative")
        self.entries.append(TranscriptEntry(sender, purpose, int(bits)))

    def bits(self, purpose: str) -> int:
        return sum(e.bits for e in self.entries if e.purpose == purpose)


@dataclass
class RunReport:
    decoded_bits: str | None
    aborted: bool
    decoy_error_rate: float
    rounds: int
    c: int
    q: int
    b: int
    eve_leakage_bits: float | None = None
    message: str = ""
    transcript: Transcript = field(default_factory=Transcript)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "decoded_bits": self.decoded_bits,
            "aborted": self.aborted,
            "decoy_error_rate": self.decoy_error_rate,
            "rounds": self.rounds,
            "c": self.c,
            "q": self.q,
            "b": self.b,
            "eve_leakage_bits": self.eve_leakage_bits,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @property
    def decoded_ok(self) -> bool:
        return not self.aborted and self.decoded_bits == self.message


class Decision(str, Enum):
    ACCEPT = "accept"
    ABORT = "abort"


def _check_bits(bits: str, n: int) -> str:
    if len(bits) != n or set(bits) - {"0", "1"}:
        raise LengthMismatch(f"expected {n} bits, got {bits!r}")
    return bits


def encode_block(bits: str, config: ProtocolConfig) -> StateVec:
    """``U_j |a_anchor>`` where ``j`` is the integer the bit string spells (MSB first)."""
    j = int(_check_bits(bits, config.n), 2)
    return StateVec.from_amps(config.family.ops[j] @ config.basis.vectors[config.anchor], normalize=True)


def decode_block(outcome: int, config: ProtocolConfig) -> str:
    """Invert the encoding for an outcome index of a measurement in ``config.basis``.

    Outcome ``k`` means Bob found ``|a_k>``; the message index is the ``j``
    with ``|b_j> = |a_k>``.
    """
    if not 0 <= outcome < config.M:
        raise IndexOutOfRange(f"outcome {outcome} outside 0..{config.M - 1}")
    j = config.output_perm.inverse()(outcome)
    return format(j, f"0{config.n}b")


def parse_message(text: str) -> str:
    """Binary string, or hex with a ``0x`` prefix (four bits per digit)."""
    text = text.strip()
    if text.lower().startswith("0x"):
        digits = text[2:]
        if not digits:
            raise ValueError("empty hex message")
        return "".join(format(int(d, 16), "04b") for d in digits)
    if not text or set(text) - {"0", "1"}:
        raise ValueError(f"message must be binary or 0x-prefixed hex, got {text!r}")
    return text


def dress_with_decoys(
    message_ids: Sequence[ParticleId],
    spec: DecoySpec,
    rng: np.random.Generator,
    ledger: Ledger,
    perm: Permutation | None = None,
) -> DressedSequence:
    """Prepare decoys, append them to the message qubits and scramble the lot.

    ``perm`` overrides the random scramble (the identity leaves the decoys in
    the trailing positions).  Only Alice learns the returned permutation.
    """
    message_ids = list(message_ids)
    if spec.count != len(message_ids):
        raise LengthMismatch(
            f"{spec.count} decoys for {len(message_ids)} message qubits; they must match"
        )
    singles: list[SingleDecoy] = []
    pairs: list[tuple[ParticleId, ParticleId]] = []
    decoy_ids: list[ParticleId] = []
    if spec.kind == "bell_pairs":
        psi_plus = bell_basis()[0]
        for _ in range(spec.count // 2):
            a, b = ledger.create_block(psi_plus)
            pairs.append((a, b))
            decoy_ids += [a, b]
        n_singles = spec.count % 2
    else:
        n_singles = spec.count
    for _ in range(n_singles):
        label = "Z" if rng.random() < 0.5 else "X"
        value = int(rng.random() < 0.5)
        basis = Z_BASIS if label == "Z" else X_BASIS
        (pid,) = ledger.create_block(basis[value])
        singles.append(SingleDecoy(pid, label, value))
        decoy_ids.append(pid)

    combined = message_ids + decoy_ids
    hidden = perm if perm is not None else Permutation.random(len(combined), rng)
    sequence = permute_transport(combined, hidden)
    m = len(message_ids)
    positions = tuple(sorted(hidden(m + t) for t in range(len(decoy_ids))))
    return DressedSequence(sequence, hidden, positions, tuple(singles), tuple(pairs))


def bb84_decoy_check(prepared: Sequence[SingleDecoy], outcomes: Sequence[int]) -> float:
    """Fraction of decoys whose outcome in the preparation basis differs from the prepared value."""
    if len(prepared) != len(outcomes):
        raise LengthMismatch(f"{len(prepared)} decoys but {len(outcomes)} outcomes")
    if not prepared:
        return 0.0
    wrong = sum(d.value != int(o) for d, o in zip(prepared, outcomes))
    return wrong / len(prepared)


def bell_decoy_check(pairs: Sequence[Sequence[ParticleId]], outcomes: Sequence[int]) -> float:
    """Fraction of decoy pairs not found in ``|psi+>`` (Bell index 0)."""
    if len(pairs) != len(outcomes):
        raise UnpairedDecoy(f"{len(pairs)} pairs but {len(outcomes)} Bell outcomes")
    for pair in pairs:
        if len(pair) != 2 or pair[0] == pair[1]:
            raise UnpairedDecoy(f"not a decoy pair: {pair!r}")
    if not pairs:
        return 0.0
    return sum(int(o) != 0 for o in outcomes) / len(pairs)


def threshold_decide(error_rate: float, checked_count: int, delta: float) -> Decision:
    """Accept iff the observed error rate is at most ``delta`` (boundary inclusive)."""
    if checked_count <= 0:
        raise ValueError("nothing was checked")
    return Decision.ACCEPT if error_rate <= delta else Decision.ABORT


def _position_bits(length: int) -> int:
    return max(1, math.ceil(math.log2(length))) if length > 1 else 1


def _transmit(
    ledger: Ledger,
    dressed: DressedSequence,
    attack: AttackModel,
    active: bool,
    rng: np.random.Generator,
    code_basis: BasisSet,
) -> None:
    ids = list(dressed.sequence)
    ledger.transfer(ids, "in_transit")
    if active:
        adversary.apply_attack(attack, ledger, ids, rng, code_basis=code_basis)
    ledger.transfer(ids, "bob")


def _check_decoys(
    ledger: Ledger, dressed: DressedSequence, rng: np.random.Generator, transcript: Transcript
) -> tuple[float, int]:
    """Acknowledge, disclose decoy coordinates, measure and compare; returns (error rate, units checked)."""
    transcript.add("bob", "acknowledgment", 0)
    transcript.add("alice", "decoy_coordinates",
                   len(dressed.decoy_positions) * _position_bits(len(dressed.sequence)))
    single_out = []
    for d in dressed.singles:
        basis = Z_BASIS if d.basis == "Z" else X_BASIS
        single_out.append(ledger.measure_particles([d.particle], basis, rng))
    pair_out = [ledger.measure_particles(list(p), bell_basis(), rng) for p in dressed.pairs]
    # basis announcement plus outcome comparison
    transcript.add("alice", "eavesdrop_check", len(dressed.singles))
    transcript.add("bob", "eavesdrop_check", len(dressed.singles) + 2 * len(dressed.pairs))
    units = len(dressed.singles) + len(dressed.pairs)
    errors = (bb84_decoy_check(dressed.singles, single_out) * len(dressed.singles)
              + bell_decoy_check(dressed.pairs, pair_out) * len(dressed.pairs))
    return (errors / units if units else 0.0), units


def _prepare(config: ProtocolConfig, message: str | None, rng: np.random.Generator):
    if message is None:
        message = "".join("1" if b else "0" for b in rng.integers(0, 2, config.message_length))
    if len(message) != config.message_length or set(message) - {"0", "1"}:
        raise LengthMismatch(
            f"message must be {config.message_length} bits (N={config.N} blocks of n={config.n})"
        )
    ledger = Ledger()
    blocks: list[list[ParticleId]] = []
    for l in range(config.N):
        ids = ledger.create_block(config.basis[config.anchor])
        j = int(message[l * config.n:(l + 1) * config.n], 2)
        ledger.apply_unitary(ids, config.family.ops[j])
        blocks.append(ids)
    return message, ledger, blocks


def _decode(config: ProtocolConfig, ledger: Ledger, blocks, rng) -> str:
    return "".join(
        decode_block(ledger.measure_particles(ids, config.basis, rng), config) for ids in blocks
    )


def _leakage(config: ProtocolConfig, attack: AttackModel) -> float:
    if isinstance(attack, NoAttack):
        return 0.0
    if config.variant in ("dsqc", "dsqc_gv") and config.n <= 3:
        return adversary.scrambled_leakage(config)
    return adversary.eve_leakage(config, attack)


def run_dsqc(
    config: ProtocolConfig,
    message: str | None = None,
    attack: AttackModel | None = None,
    rng: np.random.Generator | None = None,
    leakage: bool = False,
    perm: Permutation | None = None,
) -> RunReport:
    """One single-batch run: prepare, encode, dress, send, check, disclose order, decode.

    An abort yields a report with ``aborted`` set and no decoded bits; retrying
    is left to the caller.  ``perm`` pins the transport scramble (testing).
    """
    if config.variant not in ("dsqc", "dsqc_gv"):
        raise ConfigInvalid(f"run_dsqc cannot run variant {config.variant!r}")
    attack = attack or NoAttack()
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    message, ledger, blocks = _prepare(config, message, rng)
    transcript = Transcript()
    nn = config.message_length

    p_b = [pid for ids in blocks for pid in ids]
    spec = DecoySpec(config.decoy_kind, nn, pad_with_single=True)
    dressed = dress_with_decoys(p_b, spec, rng, ledger, perm=perm)
    _transmit(ledger, dressed, attack, adversary.attacks_round(attack, 1), rng, config.basis)
    q = len(dressed.sequence)

    error_rate, checked = _check_decoys(ledger, dressed, rng, transcript)
    leak = _leakage(config, attack) if leakage else None
    if threshold_decide(error_rate, checked, config.delta) is Decision.ABORT:
        return RunReport(None, True, error_rate, 1, 0, q, 0, leak, message, transcript)

    # revealing the true order costs one bit per message qubit
    transcript.add("alice", "order_disclosure", nn)
    decoded = _decode(config, ledger, blocks, rng)
    b = transcript.bits("order_disclosure")
    return RunReport(decoded, False, error_rate, 1, nn, q, b, leak, message, transcript)


def run_qsdc(
    config: ProtocolConfig,
    message: str | None = None,
    attack: AttackModel | None = None,
    rng: np.random.Generator | None = None,
    leakage: bool = False,
) -> RunReport:
    """Multi-round run: round ``s`` carries qubit ``s`` of every block plus ``N`` decoys.

    Each round is checked before the next is sent; a failed check truncates
    the run.  No order disclosure is needed, so ``b`` is always zero.
    """
    if config.variant not in ("qsdc", "qsdc_gv"):
        raise ConfigInvalid(f"run_qsdc cannot run variant {config.variant!r}")
    attack = attack or NoAttack()
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    message, ledger, blocks = _prepare(config, message, rng)
    transcript = Transcript()
    leak = _leakage(config, attack) if leakage else None

    q = 0
    errors = 0.0
    checked_total = 0
    for s in range(config.n):
        round_ids = [ids[s] for ids in blocks]
        spec = DecoySpec(config.decoy_kind, config.N, pad_with_single=True)
        dressed = dress_with_decoys(round_ids, spec, rng, ledger)
        _transmit(ledger, dressed, attack, adversary.attacks_round(attack, s + 1), rng, config.basis)
        q += len(dressed.sequence)
        error_rate, checked = _check_decoys(ledger, dressed, rng, transcript)
        errors += error_rate * checked
        checked_total += checked
        if threshold_decide(error_rate, checked, config.delta) is Decision.ABORT:
            return RunReport(None, True, errors / checked_total, s + 1, 0, q, 0, leak, message, transcript)

    decoded = _decode(config, ledger, blocks, rng)
    return RunReport(decoded, False, errors / checked_total, config.n, config.message_length, q,
                     transcript.bits("order_disclosure"), leak, message, transcript)


def run_protocol(
    config: ProtocolConfig,
    message: str | None = None,
    attack: AttackModel | None = None,
    rng: np.random.Generator | None = None,
    leakage: bool = False,
) -> RunReport:
    if config.variant in ("dsqc", "dsqc_gv"):
        return run_dsqc(config, message, attack, rng, leakage=leakage)
    return run_qsdc(config, message, attack, rng, leakage=leakage)
