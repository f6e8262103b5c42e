import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orthosim.adversary import (
    PRESETS,
    EntanglingProbe,
    InterceptResend,
    MeasureAll,
    NoAttack,
    apply_attack,
    attack_from_dict,
    attack_to_dict,
    attacks_round,
    ckw_monogamy,
    controlled_probe_unitary,
    duality_tradeoff,
    eve_leakage,
    parse_attack,
    probe_interaction,
    scrambled_leakage,
)
from orthosim.errors import DimensionMismatch, NonUnitaryProbe, NotInTransit, TooLarge, WrongQubitCount
from orthosim.protocol import ProtocolConfig
from orthosim.qlinalg import (
    StateVec,
    bell_basis,
    computational_basis,
    ghz_basis,
    is_unitary,
    ket,
    random_basis,
    random_state,
    random_unitary,
    reduced_density,
    states_equal,
    tensor,
)
from orthosim.registry import Ledger

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])


def ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def in_transit(ledger, state):
    ids = ledger.create_block(state)
    ledger.transfer(ids, "in_transit")
    return ids


class TestApplyAttack:
    def test_none_is_bit_identical(self, rng):
        ledger = Ledger()
        s = random_state(3, rng)
        ids = in_transit(ledger, s)
        apply_attack(NoAttack(), ledger, ids, rng)
        assert np.array_equal(ledger.block_of(ids[0]).state.amps, s.amps)

    def test_fixed_z_on_plus(self, rng):
        ones = 0
        for _ in range(2000):
            ledger = Ledger()
            (p,) = in_transit(ledger, ket("+"))
            rec = apply_attack(InterceptResend("fixed_z"), ledger, [p], rng)
            (_, label, out) = rec.measurements[0]
            assert label == "Z"
            assert states_equal(ledger.block_of(p).state, ket(str(out)))
            ones += out
        assert abs(ones / 2000 - 0.5) < 0.05

    def test_not_in_transit(self, rng):
        ledger = Ledger()
        ids = ledger.create_block(ket("0"))
        with pytest.raises(NotInTransit):
            apply_attack(MeasureAll(), ledger, ids, rng)

    def test_identity_probe_leaves_no_trace(self, rng):
        ledger = Ledger()
        s = random_state(1, rng)
        (p,) = in_transit(ledger, s)
        rec = apply_attack(EntanglingProbe((I2, I2)), ledger, [p], rng)
        probe = rec.probes[p]
        rho = ledger.density_of([p]).entries
        assert np.allclose(rho, s.projector(), atol=1e-10)
        assert np.allclose(ledger.density_of(probe).entries, np.diag([1, 0]), atol=1e-10)
        assert ledger.holders(probe) == ["eve"]

    def test_code_basis_groups(self, rng):
        ledger = Ledger()
        ids = in_transit(ledger, bell_basis()[2]) + in_transit(ledger, ket("1"))
        rec = apply_attack(InterceptResend("code_basis"), ledger, ids, rng, code_basis=bell_basis())
        assert rec.measurements[0] == ((ids[0], ids[1]), "code", 2)
        assert rec.measurements[1] == ((ids[2],), "Z", 1)

    def test_fraction_zero_touches_nothing(self, rng):
        ledger = Ledger()
        ids = in_transit(ledger, ket("++"))
        rec = apply_attack(MeasureAll(fraction=0.0), ledger, ids, rng)
        assert not rec.measurements


class TestProbeInteraction:
    def test_cnot_probe_copies_basis_states(self):
        out = probe_interaction(ket("1"), [I2, X])
        assert states_equal(out, ket("11"))

    def test_cnot_probe_on_plus_is_bell(self):
        out = probe_interaction(ket("+"), [I2, X])
        assert states_equal(out, bell_basis()[0])

    @pytest.mark.parametrize("theta", [0.0, 0.4, 1.3, math.pi / 2, 2.9])
    def test_rotation_overlap(self, theta):
        out = probe_interaction(ket("+"), [I2, ry(theta)])
        rho = reduced_density(out, [0]).entries
        assert 2 * abs(rho[0, 1]) == pytest.approx(abs(math.cos(theta / 2)), abs=1e-12)

    def test_joint_map_is_unitary(self, rng):
        ops = [random_unitary(2, rng), random_unitary(2, rng)]
        assert is_unitary(controlled_probe_unitary(ops))
        images = np.array([probe_interaction(computational_basis(1)[a], ops).amps for a in range(2)])
        assert np.allclose(images.conj() @ images.T, np.eye(2), atol=1e-12)

    def test_targets_subset(self):
        out = probe_interaction(ket("01"), [I2, X], targets=[1])
        assert states_equal(out, ket("011"))

    def test_wrong_count_and_non_unitary(self):
        with pytest.raises(DimensionMismatch):
            probe_interaction(ket("01"), [I2, X])
        with pytest.raises(NonUnitaryProbe):
            probe_interaction(ket("0"), [I2, 2 * I2])


class TestDuality:
    def test_limits(self):
        same = duality_tradeoff([I2, I2])
        assert (same.distinguishability, same.coherence) == (0.0, 1.0)
        flip = duality_tradeoff([I2, X])
        assert (flip.distinguishability, flip.coherence) == (1.0, 0.0)

    def test_half_overlap(self):
        rep = duality_tradeoff([I2, ry(math.pi / 2)])
        assert rep.coherence == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert rep.distinguishability == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert rep.linear_sum == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_haar_probes_saturate(self, rng):
        for _ in range(1000):
            rep = duality_tradeoff([random_unitary(2, rng), random_unitary(2, rng)])
            assert abs(rep.sum_check - 1) < 1e-9
            assert 1 - 1e-12 <= rep.linear_sum <= math.sqrt(2) + 1e-12

    def test_larger_probe(self, rng):
        rep = duality_tradeoff([random_unitary(4, rng), random_unitary(4, rng)])
        assert abs(rep.sum_check - 1) < 1e-9

    def test_coherence_matches_bobs_qubit(self, rng):
        # independent route: off-diagonal of the attacked qubit after the interaction
        for _ in range(50):
            ops = [random_unitary(2, rng), random_unitary(2, rng)]
            rho = reduced_density(probe_interaction(ket("+"), ops), [0]).entries
            assert duality_tradeoff(ops).coherence == pytest.approx(2 * abs(rho[0, 1]), abs=1e-10)

    def test_mixed_probe_below_bound(self, rng):
        for _ in range(200):
            ops = [random_unitary(2, rng), random_unitary(2, rng)]
            rep = duality_tradeoff(ops, probe_state=random_state(2, rng))
            assert rep.sum_check <= 1 + 1e-9


def _w():
    return StateVec.from_amps([0, 1, 1, 0, 1, 0, 0, 0], normalize=True)


class TestMonogamy:
    def test_ghz(self):
        rep = ckw_monogamy(ghz_basis(3)[0])
        assert rep.e_ac == pytest.approx(0, abs=1e-12) and rep.e_bc == pytest.approx(0, abs=1e-12)
        assert rep.e_ab_c == pytest.approx(1, abs=1e-12)

    def test_w_saturates(self):
        rep = ckw_monogamy(_w())
        assert rep.e_ac == pytest.approx(4 / 9, abs=1e-10)
        assert rep.slack == pytest.approx(0, abs=1e-10)

    def test_product(self, rng):
        s = tensor(random_state(1, rng), random_state(1, rng), random_state(1, rng))
        rep = ckw_monogamy(s)
        assert max(abs(rep.e_ac), abs(rep.e_bc), abs(rep.e_ab_c)) < 1e-9

    def test_haar(self, rng):
        slacks = [ckw_monogamy(random_state(3, rng)).slack for _ in range(10_000)]
        assert min(slacks) >= -1e-9

    def test_wrong_size(self):
        with pytest.raises(WrongQubitCount):
            ckw_monogamy(ket("00"))


def cfg(n, variant, basis, **kw):
    return ProtocolConfig(n=n, N=1, variant=variant, basis=basis, **kw)


class TestLeakage:
    @pytest.mark.parametrize("variant", ["qsdc", "qsdc_gv"])
    def test_maximally_entangled_code_hides_everything(self, variant):
        for attack in (MeasureAll(), PRESETS["probe-cnot"]):
            assert eve_leakage(cfg(2, variant, bell_basis()), attack) == pytest.approx(0, abs=1e-9)

    def test_single_qubit_block_is_exposed(self):
        assert eve_leakage(cfg(1, "dsqc", computational_basis(1)), MeasureAll()) == pytest.approx(1)

    def test_product_block_one_position(self):
        config = cfg(2, "dsqc", computational_basis(2))
        assert eve_leakage(config, MeasureAll(), [0]) == pytest.approx(1)
        assert eve_leakage(config, MeasureAll()) == pytest.approx(2)

    def test_no_attack(self):
        assert eve_leakage(cfg(1, "dsqc", computational_basis(1)), NoAttack()) == 0.0

    def test_grows_with_subsystem(self, rng):
        for _ in range(10):
            config = cfg(3, "dsqc", random_basis(3, rng), anchor=int(rng.integers(8)))
            one = eve_leakage(config, MeasureAll(), [0])
            two = eve_leakage(config, MeasureAll(), [0, 1])
            three = eve_leakage(config, MeasureAll(), [0, 1, 2])
            assert one <= two + 1e-9 <= three + 2e-9
            assert three == pytest.approx(3, abs=1e-9)

    def test_cnot_probe_matches_z_measurement(self):
        config = cfg(1, "dsqc", computational_basis(1))
        assert eve_leakage(config, PRESETS["probe-cnot"]) == pytest.approx(1)

    @pytest.mark.parametrize("n,variant", [(1, "dsqc"), (2, "dsqc"), (2, "dsqc_gv"), (3, "dsqc")])
    def test_scrambling_bounded(self, n, variant, rng):
        config = cfg(n, variant, random_basis(n, rng))
        plain = eve_leakage(config, MeasureAll())
        mixed = scrambled_leakage(config)
        assert -1e-9 <= mixed <= plain + 1e-9

    def test_scrambled_single_qubit_value(self):
        # code |0>/|1> mixed with a uniform decoy, order unknown: 1/2 bit
        assert scrambled_leakage(cfg(1, "dsqc", computational_basis(1))) == pytest.approx(0.5, abs=1e-12)

    def test_scrambled_too_large(self):
        with pytest.raises(TooLarge):
            scrambled_leakage(cfg(6, "dsqc", ghz_basis(6)))

    def test_scrambled_sampled_path(self, rng):
        config = cfg(4, "dsqc", ghz_basis(4))
        with pytest.raises(ValueError):
            scrambled_leakage(config)
        assert 0 <= scrambled_leakage(config, rng, samples=20) <= 4


class TestAttackDocs:
    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_roundtrip(self, name):
        attack = PRESETS[name]
        again = attack_from_dict(json.loads(json.dumps(attack_to_dict(attack))))
        assert attack_to_dict(again) == attack_to_dict(attack)

    def test_rounds_and_fraction(self):
        attack = parse_attack('{"kind": "intercept_resend", "basis": "fixed_x", "rounds": [2], "fraction": 0.5}')
        assert attack == InterceptResend("fixed_x", rounds={2}, fraction=0.5)
        assert not attacks_round(attack, 1) and attacks_round(attack, 2)
        assert not attacks_round(NoAttack(), 1)

    def test_bad_documents(self):
        with pytest.raises(ValueError):
            parse_attack("teleport")
        with pytest.raises(ValueError):
            attack_from_dict({"kind": "measure_all", "basis": "x"})
        with pytest.raises(ValueError):
            InterceptResend("diagonal")
        with pytest.raises(DimensionMismatch):
            EntanglingProbe((I2,))


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * math.pi))
def test_probe_tradeoff_curve(theta):
    rep = duality_tradeoff([I2, ry(theta)])
    assert rep.coherence == pytest.approx(abs(math.cos(theta / 2)), abs=1e-10)
    assert rep.distinguishability == pytest.approx(abs(math.sin(theta / 2)), abs=1e-10)
