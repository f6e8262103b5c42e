"""Simulator for orthogonal-state direct secure quantum communication protocols."""

from .adversary import (
    EntanglingProbe,
    InterceptResend,
    MeasureAll,
    NoAttack,
    apply_attack,
    ckw_monogamy,
    duality_tradeoff,
    eve_leakage,
    probe_interaction,
    scrambled_leakage,
)
from .harness import EfficiencyReport, ExperimentSpec, TrialStats, eta1, eta2, run_experiment
from .protocol import (
    DecoySpec,
    ProtocolConfig,
    RunReport,
    decode_block,
    encode_block,
    run_dsqc,
    run_protocol,
    run_qsdc,
)
from .qlinalg import (
    BasisSet,
    DensityMatrix,
    Permutation,
    StateVec,
    UnitaryFamily,
    gram_schmidt,
    hermitian_family,
    permutation_unitary,
    verify_orthogonal_family,
)
from .registry import Ledger, TransportSequence, permute_transport

__version__ = "0.1.0"
